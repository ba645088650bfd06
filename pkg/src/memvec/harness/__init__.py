"""Harness: file formats, evaluation, experiment drivers and the CLI."""

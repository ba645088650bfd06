import csv

import numpy as np
import pytest

from memvec.harness import io
from memvec.harness.cli import main


def run(argv):
    return main([str(a) for a in argv])


class TestGen:
    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.fvecs", tmp_path / "b.fvecs"
        assert run(["gen", "--n", 100, "--d", 16, "--seed", 7, "--out", a]) == 0
        assert run(["gen", "--n", 100, "--d", 16, "--seed", 7, "--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_clustered_with_labels(self, tmp_path):
        out = tmp_path / "c.fvecs"
        lab = tmp_path / "c.ivecs"
        assert run(["gen", "--n", 60, "--d", 8, "--seed", 1, "--clusters", 3,
                    "--eta", 0.9, "--out", out, "--labels-out", lab]) == 0
        assert io.read_fvecs(out).shape == (60, 8)
        labels = io.read_ivecs(lab)
        assert np.array_equal(labels[:, 0], np.repeat([0, 1, 2], 20))

    def test_indivisible_clusters_fail(self, tmp_path):
        code = run(["gen", "--n", 61, "--d", 8, "--seed", 1, "--clusters", 3,
                    "--out", tmp_path / "x.fvecs"])
        assert code == 1


@pytest.fixture
def pipeline(tmp_path):
    db = tmp_path / "db.fvecs"
    q = tmp_path / "q.fvecs"
    idx = tmp_path / "idx.mvix"
    run(["gen", "--n", 200, "--d", 24, "--seed", 3, "--out", db])
    run(["gen", "--n", 4, "--d", 24, "--seed", 9, "--out", q])
    assert run(["build", "--data", db, "--assign", "random", "--construction",
                "pinv", "--unit-size", 10, "--seed", 1, "--out", idx]) == 0
    return db, q, idx, tmp_path


class TestBuildQueryEval:
    def test_query_csv_schema(self, pipeline):
        db, q, idx, tmp = pipeline
        res = tmp / "res.csv"
        assert run(["query", "--index", idx, "--data", db, "--queries", q,
                    "--tau", 0.2, "--out", res]) == 0
        with open(res, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert set(rows[0]) == {"query", "rank", "dataset_id", "score",
                                "complexity", "complexity_ratio"}

    def test_impossible_threshold_scans_only_units(self, pipeline):
        db, q, idx, tmp = pipeline
        res = tmp / "res.csv"
        # threshold above every representative norm: no unit can pass
        assert run(["query", "--index", idx, "--data", db, "--queries", q,
                    "--tau", 100.0, "--out", res]) == 0
        with open(res, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert all(r["dataset_id"] == "" for r in rows)
        assert all(int(r["complexity"]) == 20 for r in rows)  # M = 200/10

    def test_eval_from_cosine_gt(self, pipeline):
        db, q, idx, tmp = pipeline
        res = tmp / "res.csv"
        run(["query", "--index", idx, "--data", db, "--queries", q,
             "--tau", -2.0, "--out", res])
        out = tmp / "eval.csv"
        assert run(["eval", "--results", res, "--data", db, "--queries", q,
                    "--alpha0", 0.3, "--out", out]) == 0
        with open(out, newline="") as handle:
            row = next(csv.DictReader(handle))
        # every unit positive means exhaustive search: full recall
        assert float(row["recall_of_matches"]) == 1.0

    def test_query_deterministic(self, pipeline):
        db, q, idx, tmp = pipeline
        r1, r2 = tmp / "r1.csv", tmp / "r2.csv"
        run(["query", "--index", idx, "--data", db, "--queries", q,
             "--tau", 0.2, "--out", r1])
        run(["query", "--index", idx, "--data", db, "--queries", q,
             "--tau", 0.2, "--out", r2])
        assert r1.read_bytes() == r2.read_bytes()

    def test_build_kmeans(self, pipeline):
        db, q, idx, tmp = pipeline
        out = tmp / "km.mvix"
        assert run(["build", "--data", db, "--assign", "kmeans",
                    "--construction", "sum", "--M", 10, "--normalize",
                    "--seed", 2, "--out", out]) == 0
        assert io.read_index(out).num_units == 10

    def test_build_batch_kmeans(self, pipeline):
        db, q, idx, tmp = pipeline
        out = tmp / "bk.mvix"
        assert run(["build", "--data", db, "--assign", "batch-kmeans",
                    "--construction", "sum", "--M", 5, "--batch-size", 100,
                    "--seed", 2, "--out", out]) == 0
        assert io.read_index(out).num_units == 10  # 5 per batch, 2 batches


class TestTheory:
    def test_cost_minimum_below_one_tenth(self, tmp_path, capsys):
        assert run(["theory", "cost", "--d", 1000, "--eps", 0.01,
                    "--alpha0", 0.9, "--n-max", 200]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header = lines[0].split(",")
        col = header.index("ratio_theory")
        ratios = [float(line.split(",")[col]) for line in lines[1:]]
        assert min(ratios) < 0.1

    def test_roc_csv(self, capsys):
        assert run(["theory", "roc", "--d", 100, "--n", 10,
                    "--alpha", 0.7, "--tau-steps", 5]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "construction,tau,pfp,tpr"
        assert len(lines) == 11


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["query", "--nonsense"])
        assert exc.value.code == 2

    def test_missing_file_is_1(self, tmp_path, capsys):
        assert run(["build", "--data", tmp_path / "absent.fvecs",
                    "--assign", "random", "--unit-size", 5,
                    "--out", tmp_path / "o.mvix"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_corrupt_input_is_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.fvecs"
        bad.write_bytes(b"\x01\x00")
        assert run(["build", "--data", bad, "--assign", "random",
                    "--unit-size", 5, "--out", tmp_path / "o.mvix"]) == 1

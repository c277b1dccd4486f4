import json
import subprocess
import sys

import pytest

from curvehash.cli import main


def write(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return str(path)


@pytest.fixture
def pairs(tmp_path):
    return write(tmp_path / "pairs.jsonl", [
        {"id": "a", "points": [[0], [4]]},
        {"id": "b", "points": [[0], [2], [4]]},
        {"id": "one", "points": [[0]]},
        {"id": "four", "points": [[1], [2], [3], [4]]},
    ])


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestDist:
    def test_frechet(self, capsys, pairs):
        assert run(capsys, "dist", pairs, "a", "b")[:2] == (0, "2\n")
        assert run(capsys, "dist", pairs, "a", "a")[:2] == (0, "0\n")

    def test_dtw(self, capsys, pairs):
        assert run(capsys, "dist", pairs, "one", "four", "--kind", "dtw")[1] == "10\n"

    def test_infeasible(self, capsys, pairs):
        code, _, err = run(capsys, "dist", pairs, "one", "four", "--kind", "anchored", "--w", "2")
        assert code == 3 and "no valid traversal" in err

    def test_unknown_id(self, capsys, pairs):
        assert run(capsys, "dist", pairs, "a", "zzz")[0] == 2

    def test_missing_width(self, capsys, pairs):
        assert run(capsys, "dist", pairs, "a", "b", "--kind", "speed")[0] == 2

    def test_malformed_file_reports_line(self, capsys, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "points": [[0]]}\n{oops\n')
        code, _, err = run(capsys, "dist", str(bad), "a", "a")
        assert code == 2 and "line 2" in err


class TestBuildQuery:
    def test_build_prints_plan(self, capsys, tmp_path):
        data = write(tmp_path / "d.jsonl", [{"id": "x", "points": [[0], [1], [2]]}])
        code, out, _ = run(capsys, "build", data, "--r", "1", "--out", str(tmp_path / "i.bin"))
        assert code == 0 and out.startswith("delta=12 c=12 L=2 ")

    def test_tradeoff_k_equals_m(self, capsys, tmp_path):
        data = write(tmp_path / "d.jsonl", [{"id": "x", "points": [[0, 0], [1, 1], [2, 0]]}])
        code, out, _ = run(capsys, "build", data, "--scheme", "tradeoff", "--K", "3", "--out", str(tmp_path / "i"))
        assert code == 0 and f"c={4 * 2**1.5:.6g}" in out

    def test_empty_file(self, capsys, tmp_path):
        data = tmp_path / "e.jsonl"
        data.write_text("")
        assert run(capsys, "build", str(data), "--out", str(tmp_path / "i"))[0] == 0

    def test_too_large(self, capsys, tmp_path):
        data = write(tmp_path / "d.jsonl", [{"id": "x", "points": [[float(i)] for i in range(20)]}])
        assert run(capsys, "build", data, "--scheme", "constant", "--out", str(tmp_path / "i"))[0] == 4

    def test_query(self, capsys, tmp_path, pairs):
        idx = str(tmp_path / "i.bin")
        assert run(capsys, "build", pairs, "--r", "0.01", "--out", idx)[0] == 0
        queries = write(tmp_path / "q.jsonl", [{"id": "q1", "points": [[0], [4]]},
                                               {"id": "q2", "points": [[500], [900]]}])
        code, out, _ = run(capsys, "query", idx, queries)
        lines = out.splitlines()
        assert code == 0 and lines[0].split("\t")[0] == "q1" and lines[1] == "q2\tnone"
        assert lines[0].split("\t")[1] in {"a", "b"}

    def test_query_dimension_mismatch(self, capsys, tmp_path, pairs):
        idx = str(tmp_path / "i.bin")
        run(capsys, "build", pairs, "--out", idx)
        queries = write(tmp_path / "q.jsonl", [{"id": "q", "points": [[0, 0]]}])
        assert run(capsys, "query", idx, queries)[0] == 2


class TestProbe:
    def test_analytic_pair(self, capsys, tmp_path):
        data = write(tmp_path / "p.jsonl", [{"id": "p", "points": [[0]]}, {"id": "q", "points": [[1]]}])
        # r = 1, d = 1, m = 1 plans delta = 4
        code, out, _ = run(capsys, "probe", "--data", data, "--ids", "p", "q", "--trials", "100000",
                           "--expect", "0.75", "--seed", "1")
        report = json.loads(out)
        assert code == 0 and abs(report["estimate"] - 0.75) <= report["half_width"]

    @pytest.mark.parametrize("scheme", ["basic", "basic-dtw", "tradeoff", "speed", "continuous"])
    @pytest.mark.parametrize("bound", ["near", "far"])
    def test_generated(self, capsys, scheme, bound):
        code, out, _ = run(capsys, "probe", "--scheme", scheme, "--bound", bound, "--m", "3", "--K", "2",
                           "--trials", "2000", "--seed", "5")
        assert code == 0 and json.loads(out)["verdict"] == "pass"

    def test_identical_pair(self, capsys, tmp_path):
        data = write(tmp_path / "p.jsonl", [{"id": "p", "points": [[0], [3]]}, {"id": "q", "points": [[0], [3]]}])
        out = run(capsys, "probe", "--data", data, "--ids", "p", "q", "--trials", "500")[1]
        assert json.loads(out)["estimate"] == 1.0

    def test_constant_far_claim_fails(self, capsys, tmp_path):
        # delta = 2, cr = 2: the pair is beyond cr yet collides
        data = write(tmp_path / "p.jsonl", [{"id": "p", "points": [[0.9]]}, {"id": "q", "points": [[3.8]]}])
        code, out, _ = run(capsys, "probe", "--scheme", "constant", "--r", "0.5", "--bound", "far",
                           "--data", data, "--ids", "p", "q", "--trials", "20000", "--seed", "0")
        report = json.loads(out)
        assert code == 5 and report["premise_holds"] and report["collisions"] > 0

    def test_too_few_trials(self, capsys):
        assert run(capsys, "probe", "--trials", "10")[0] == 2


class TestGen:
    def test_byte_identical(self, capsys, tmp_path):
        args = ["gen", "--n", "30", "--m", "4", "--planted-r", "0.5", "--far-cr", "3", "--seed", "7"]
        run(capsys, *args, "--out", str(tmp_path / "a"), "--query-out", str(tmp_path / "qa"))
        run(capsys, *args, "--out", str(tmp_path / "b"), "--query-out", str(tmp_path / "qb"))
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
        assert len((tmp_path / "a").read_text().splitlines()) == 30

    def test_single_curve_to_stdout(self, capsys):
        code, out, err = run(capsys, "gen", "--n", "1", "--m", "3", "--planted-r", "0.5", "--far-cr", "1")
        assert code == 0 and json.loads(out)["id"] == "planted" and json.loads(err)["id"] == "query"

    def test_bad_radii(self, capsys):
        assert run(capsys, "gen", "--n", "3", "--m", "3", "--planted-r", "2", "--far-cr", "1")[0] == 2

    def test_round_trip(self, capsys, tmp_path):
        data, query, idx = tmp_path / "d", tmp_path / "q", tmp_path / "i"
        run(capsys, "gen", "--n", "200", "--m", "6", "--d", "2", "--planted-r", "0.5", "--far-cr", str(4 * 2**1.5 * 6),
            "--seed", "3", "--out", str(data), "--query-out", str(query))
        assert run(capsys, "build", str(data), "--r", "1", "--out", str(idx), "--seed", "3")[0] == 0
        assert run(capsys, "query", str(idx), str(query))[1] == "query\tplanted\n"


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--n", "100", "--queries", "5", "--seed", "2")
    assert code == 0 and json.loads(out)["recall"] == 1.0


def test_module_entry_point(pairs):
    res = subprocess.run([sys.executable, "-m", "curvehash", "dist", pairs, "a", "b"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "2\n"


def test_seed_from_environment(tmp_path, monkeypatch, capsys):
    args = ["gen", "--n", "5", "--m", "3", "--planted-r", "0.5", "--far-cr", "2"]
    monkeypatch.setenv("CURVEHASH_SEED", "11")
    run(capsys, *args, "--out", str(tmp_path / "a"), "--query-out", str(tmp_path / "qa"))
    run(capsys, *args, "--seed", "11", "--out", str(tmp_path / "b"), "--query-out", str(tmp_path / "qb"))
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

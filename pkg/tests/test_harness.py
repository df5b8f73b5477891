import collections
import math

import pytest

from belgatree import cli
from belgatree.harness import (
    BadTrace,
    IoFailure,
    RunReport,
    Workload,
    emit_csv,
    generate,
    loglog,
    read_trace,
    run,
    run_many,
    zipf_probs,
)


class TestWorkloads:
    def test_sequential_wraps(self):
        assert generate(Workload("sequential", 8, 16)) == list(range(1, 9)) * 2

    def test_alternating(self):
        assert generate(Workload("alternating", 7, 6)) == [1, 7, 2, 6, 3, 5]

    def test_constant(self):
        assert generate(Workload("constant", 9, 4, key=5)) == [5] * 4
        with pytest.raises(ValueError):
            generate(Workload("constant", 9, 4, key=10))

    @pytest.mark.parametrize("kind", ("uniform", "zipf", "working-set", "sequential", "alternating"))
    def test_deterministic_and_in_range(self, kind):
        a = generate(Workload(kind, 500, 1000, seed=3))
        assert a == generate(Workload(kind, 500, 1000, seed=3))
        assert len(a) == 1000 and all(1 <= x <= 500 for x in a)

    def test_seeds_differ(self):
        assert generate(Workload("uniform", 500, 100, seed=1)) != generate(Workload("uniform", 500, 100, seed=2))

    def test_zipf_top_key_frequency(self):
        N, m, alpha = 1000, 20000, 1.1
        xs = generate(Workload("zipf", N, m, alpha=alpha, seed=0))
        top = collections.Counter(xs).most_common(1)[0][1] / m
        p1 = zipf_probs(N, alpha)[0]
        assert p1 / 3 <= top <= 3 * p1

    def test_working_set_is_concentrated(self):
        xs = generate(Workload("working-set", 10000, 5000, seed=0))
        assert len(set(xs)) < 2000

    def test_bad_workload(self):
        with pytest.raises(ValueError):
            Workload("bogus", 10, 10)
        with pytest.raises(ValueError):
            Workload("uniform", 0, 10)
        with pytest.raises(ValueError):
            Workload("uniform", 10, 0)


class TestTrace:
    def test_read(self, tmp_path):
        p = tmp_path / "t.txt"
        p.write_text("3\n1\n\n2\n")
        assert read_trace(str(p), 3) == [3, 1, 2]
        r = run("classic", Workload("trace", 3, 0, B=4, trace_path=str(p)))
        assert [rec.key for rec in r.records] == [3, 1, 2]

    @pytest.mark.parametrize("text", ("1\nfoo\n", "1\n9\n", "", "0\n"))
    def test_bad(self, tmp_path, text):
        p = tmp_path / "t.txt"
        p.write_text(text)
        with pytest.raises(BadTrace):
            read_trace(str(p), 5)

    def test_missing_file(self, tmp_path):
        with pytest.raises(BadTrace):
            read_trace(str(tmp_path / "nope"), 5)


class TestRun:
    @pytest.mark.parametrize("B", (4, 16, 64))
    def test_classic_mean_cost_bounds(self, B):
        N = 1023
        r = run("classic", Workload("uniform", N, 2000, B=B, seed=1))
        # searches stop early at internal keys, so the mean sits a little below the height
        lo = math.floor(math.log(N, B))
        hi = 1 + math.ceil(math.log(N, math.ceil(B / 2))) + 1
        assert lo <= r.mean_cost <= hi

    def test_belga_beats_classic_on_constant(self):
        w = Workload("constant", 4095, 2000, B=16, key=77)
        belga = run("belga", w)
        classic = run("classic", w)
        assert belga.mean_cost < classic.mean_cost / 2

    def test_belga_ratio_stable_across_sizes(self):
        ratios = [run("belga", Workload("uniform", N, 4 * N, B=16, seed=0)).ratio for N in (127, 1023)]
        assert max(ratios) / min(ratios) <= 2

    def test_report_fields(self):
        r = run("belga", Workload("uniform", 255, 300, B=4, seed=0), backend="python")
        assert r.m == 300 and r.backend == "python"
        assert r.total == sum(rec.cost for rec in r.records)
        assert r.ib > 0
        assert r.ratio == pytest.approx(r.total / ((r.ib + 255 + 300) * (1 + loglog(255, 4))))
        assert r.summary()["m"] == 300

    def test_rbsim_replay_runs(self):
        r = run("rbsim-replay", Workload("uniform", 200, 100, B=8, seed=0))
        assert r.m == 100 and r.total > 0

    def test_large_b_warns(self):
        r = run("classic", Workload("uniform", 15, 10, B=128))
        assert r.warnings and "exceeds" in r.warnings[0]
        assert not run("classic", Workload("uniform", 1023, 10, B=16)).warnings

    def test_unknown_structure(self):
        with pytest.raises(ValueError):
            run("splay", Workload("uniform", 15, 10))

    def test_run_many_matches_sequential(self):
        jobs = [("belga", Workload("uniform", 127, 200, B=b, seed=b)) for b in (2, 4, 16)]
        a = [r.total for r in run_many(jobs, workers=1)]
        b = [r.total for r in run_many(jobs, workers=3)]
        assert a == b


class TestCsv:
    def test_header_only_when_empty(self, tmp_path):
        p = tmp_path / "o.csv"
        emit_csv(RunReport("belga", "uniform", 7, 4, 0), p)
        assert p.read_text() == "op,key,cost,cum_cost,pref_changes\n"

    def test_rows_and_summary(self, tmp_path):
        p = tmp_path / "o.csv"
        r = run("belga", Workload("sequential", 7, 3, B=4))
        emit_csv(r, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "op,key,cost,cum_cost,pref_changes"
        rows = [ln.split(",") for ln in lines[1:4]]
        assert [int(row[1]) for row in rows] == [1, 2, 3]
        assert int(rows[-1][3]) == r.total
        assert all(ln.startswith("# ") for ln in lines[4:])

    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for i in range(2):
            p = tmp_path / f"{i}.csv"
            emit_csv(run("belga", Workload("zipf", 511, 400, B=16, seed=9)), p)
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]

    def test_unwritable(self, tmp_path):
        with pytest.raises(IoFailure):
            emit_csv(RunReport("belga", "uniform", 7, 4, 0), tmp_path / "no" / "such" / "dir.csv")


class TestCli:
    def test_summary(self, capsys):
        assert cli.main(["--structure", "classic", "--N", "255", "--B", "4", "--ops", "50"]) == 0
        out = capsys.readouterr().out
        assert "total_cost" in out and "mean_cost" in out

    def test_csv_flag(self, tmp_path, capsys):
        p = tmp_path / "o.csv"
        assert cli.main(["--N", "63", "--ops", "10", "--csv", str(p)]) == 0
        assert len(p.read_text().splitlines()) > 10

    def test_bad_trace_exit_code(self, tmp_path, capsys):
        p = tmp_path / "t.txt"
        p.write_text("1\n99\n")
        assert cli.main(["--workload", "trace", "--trace", str(p), "--N", "10"]) == 1
        assert "error" in capsys.readouterr().err
        assert cli.main(["--workload", "trace"]) == 1

    def test_warning_goes_to_stderr(self, capsys):
        assert cli.main(["--structure", "classic", "--N", "15", "--B", "200", "--ops", "5"]) == 0
        assert "warning:" in capsys.readouterr().err

    def test_bench(self, capsys):
        assert cli.main(["--bench", "--N", "127", "--ops", "50"]) == 0
        assert "us/search" in capsys.readouterr().out

    def test_bad_choice_exits(self):
        with pytest.raises(SystemExit):
            cli.main(["--structure", "splay"])

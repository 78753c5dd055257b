import json

import pytest

from dynobj import bench


def test_spec_validation():
    with pytest.raises(ValueError):
        bench.BenchmarkSpec("incr", iters=10)
    with pytest.raises(ValueError):
        bench.BenchmarkSpec("incr", reps=2)
    with pytest.raises(ValueError):
        bench.BenchmarkSpec("nonsense")


def test_records_output(capsys):
    rc = bench.main(["--test", "incr,forward_incr", "--iters", "100000", "--reps", "3",
                     "--warmup", "100", "--format", "records"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    recs = [json.loads(x) for x in lines]
    assert [r["test"] for r in recs] == ["direct_call_baseline", "incr", "forward_incr"]
    for r in recs:
        assert tuple(r) == bench.RECORD_FIELDS
    assert recs[0]["ratio_vs_direct"] == 1.0


def test_table_output_and_contexts(capsys):
    rc = bench.main(["--test", "next_method_incr", "--iters", "100000", "--reps", "3",
                     "--contract-level", "all", "--fast-message-rank", "0",
                     "--cache-bound", "2048", "--contexts", "2"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "next_method_incr" in out and "cache: hits=" in out


def test_config_errors_exit_2(capsys):
    assert bench.main(["--test", "incr", "--iters", "5"]) == 2
    assert bench.main(["--test", "incr", "--cache-bound", "1000"]) == 2


def test_correctness_failure_exit_1(monkeypatch, capsys):
    def broken(rt):
        loop, expected, observed = bench._w_incr(rt)
        return loop, (lambda n: n + 1), observed

    monkeypatch.setitem(bench.WORKLOADS, "incr", broken)
    rc = bench.main(["--test", "incr", "--iters", "100000", "--reps", "3"])
    assert rc == 1
    assert "correctness check failed" in capsys.readouterr().err


def test_every_workload_is_checked():
    specs = [bench.BenchmarkSpec(t, iters=100_000, reps=3, warmup=0) for t in bench.TESTS]
    report = bench.run_benchmarks(specs, chunk=50_000)
    assert [r.test for r in report.results] == list(bench.TESTS)
    assert all(r.median_ns > 0 for r in report.results)
    assert report.cache["hits"] > 0

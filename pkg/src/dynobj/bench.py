"""Dispatch microbenchmarks: counter workloads, forwarding and next-method cost.

Each workload is a loop of ``iters`` sends timed ``reps`` times.  The report
gives the median latency per call, the spread across repetitions and the
ratio to a plain Python function call doing the same work.  Every workload
checks its final counter value, so a broken dispatcher fails loudly instead
of producing a fast number.

    python3 -m dynobj.bench --test all --iters 200000 --reps 5
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import threading
import time
from dataclasses import dataclass, field

from .contracts import ContractLevel
from .corelib import make_runtime
from .dispatch import DispatchConfig

TESTS = (
    "direct_call_baseline",
    "incr", "incrBy", "incrBy2", "incrBy3", "incrBy4", "incrBy5",
    "addTo", "addTo2", "addTo3", "addTo4",
    "forward_incr", "next_method_incr", "eval_closure",
)
MIN_ITERS = 100_000
MIN_REPS = 3
CACHE_FIELDS = ("hits", "misses", "substitutions", "evictions")
RECORD_FIELDS = ("test", "iters", "median_ns", "calls_per_sec", "ratio_vs_direct")


class CorrectnessError(AssertionError):
    pass


@dataclass
class BenchmarkSpec:
    test: str
    iters: int = 1_000_000
    reps: int = 5
    warmup: int = 10_000

    def __post_init__(self):
        if self.test not in TESTS:
            raise ValueError(f"unknown test {self.test!r}")
        if self.iters < MIN_ITERS:
            raise ValueError(f"iters must be >= {MIN_ITERS}")
        if self.reps < MIN_REPS:
            raise ValueError(f"reps must be >= {MIN_REPS}")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")


@dataclass
class Result:
    test: str
    iters: int
    samples_ns: list
    ratio_vs_direct: float = float("nan")

    @property
    def median_ns(self):
        return statistics.median(self.samples_ns)

    @property
    def spread_ns(self):
        """Interquartile range of the chunk latencies."""
        q = statistics.quantiles(self.samples_ns, n=4)
        return q[2] - q[0]

    @property
    def calls_per_sec(self):
        return 1e9 / self.median_ns

    def record(self):
        return {"test": self.test, "iters": self.iters,
                "median_ns": round(self.median_ns, 2),
                "calls_per_sec": round(self.calls_per_sec),
                "ratio_vs_direct": round(self.ratio_vs_direct, 3)}


@dataclass
class BenchmarkReport:
    results: list = field(default_factory=list)
    cache: dict = field(default_factory=dict)

    def __getitem__(self, test):
        for r in self.results:
            if r.test == test:
                return r
        raise KeyError(test)

    def ratio(self, a, b):
        return self[a].median_ns / self[b].median_ns


# workloads: setup(rt) -> (loop(n), expected(n) -> check value, observed())

def _loop1(fn, arg):
    def loop(n):
        for _ in range(n):
            fn(arg)
    return loop


def _w_direct(rt):
    c = rt.gnew(rt.c.Counter)

    def incr(self):
        self.cnt += 1
    return _loop1(incr, c), (lambda n: n), (lambda: c.cnt)


def _w_incr(rt):
    c = rt.gnew(rt.c.Counter)
    return _loop1(rt.g.gincr, c), (lambda n: n), (lambda: c.cnt)


def _w_incr_by(k):
    def setup(rt):
        c = rt.gnew(rt.c.Counter)
        gen = rt.g.gincrBy if k == 1 else getattr(rt.g, f"gincrBy{k}")
        args = (1,) * k

        def loop(n):
            for _ in range(n):
                gen(c, *args)
        return loop, (lambda n: k * n), (lambda: c.cnt)
    return setup


def _w_add_to(k):
    def setup(rt):
        c = rt.gnew(rt.c.Counter)
        one = rt.gnew(rt.c.Counter)
        one.cnt = 1
        gen = rt.g.gaddTo if k == 1 else getattr(rt.g, f"gaddTo{k}")
        args = (one,) * k

        def loop(n):
            for _ in range(n):
                gen(c, *args)
        return loop, (lambda n: k * n), (lambda: c.cnt)
    return setup


def _w_forward(rt):
    c = rt.gnew(rt.c.Counter)
    p = rt.gnewWith(rt.c.Proxy, c)
    return _loop1(rt.g.gincr, p), (lambda n: n), (lambda: c.cnt)


def _w_next_method(rt):
    # 1000 millis carry into one gincr through next_method
    m = rt.gnew(rt.c.MilliCounter)
    gen = rt.g.gincrBy

    def loop(n):
        for _ in range(n):
            gen(m, 1)
    return loop, (lambda n: n), (lambda: m.cnt * 1000 + m.mcnt)


def _w_eval_closure(rt):
    c = rt.gnew(rt.c.Counter)
    fun = rt.functors.make_functor(rt.g.gincr, [c])
    return _loop1(rt.g.geval0, fun), (lambda n: n), (lambda: c.cnt)


WORKLOADS = {
    "direct_call_baseline": _w_direct,
    "incr": _w_incr,
    "incrBy": _w_incr_by(1),
    **{f"incrBy{k}": _w_incr_by(k) for k in range(2, 6)},
    "addTo": _w_add_to(1),
    **{f"addTo{k}": _w_add_to(k) for k in range(2, 5)},
    "forward_incr": _w_forward,
    "next_method_incr": _w_next_method,
    "eval_closure": _w_eval_closure,
}


def run_benchmarks(specs, rt=None, *, chunk=10_000):
    """Run each spec and return a :class:`BenchmarkReport`.

    A repetition runs every workload for ``iters`` calls, cut into chunks of
    ``chunk`` calls executed round-robin across workloads.  Each chunk is one
    latency sample, so a burst of machine noise spoils a few samples of every
    test instead of one test's whole repetition.  The median is taken over
    all chunks of all repetitions.
    """
    specs = list(specs)
    if rt is None:
        rt = make_runtime(contract_level=ContractLevel.PRE)
    samples = {s.test: [] for s in specs}
    for rep in range(max(s.reps for s in specs)):
        active = [s for s in specs if s.reps > rep]
        states = []
        for s in active:
            loop, expected, observed = WORKLOADS[s.test](rt)
            if s.warmup:
                loop(s.warmup)
            states.append([s, loop, expected, observed, observed(), s.iters])
        while any(st[5] for st in states):
            for st in states:
                n = min(chunk, st[5])
                if not n:
                    continue
                t0 = time.perf_counter_ns()
                st[1](n)
                dt = time.perf_counter_ns() - t0
                samples[st[0].test].append(dt / n)
                st[5] -= n
        for s, _, expected, observed, base, _ in states:
            got, want = observed() - base, expected(s.iters)
            if got != want:
                raise CorrectnessError(f"{s.test}: counter moved by {got}, expected {want}")
    report = BenchmarkReport([Result(s.test, s.iters, samples[s.test]) for s in specs],
                             dict(zip(CACHE_FIELDS, rt.cache_stats())))
    direct = next((r for r in report.results if r.test == "direct_call_baseline"), None)
    if direct is not None:
        for r in report.results:
            r.ratio_vs_direct = r.median_ns / direct.median_ns
    return report


def check_contexts(rt, n, iters=1000):
    """Repeat ``incr`` in ``n`` threads, each with its own context and cache."""
    counts = []

    def work():
        c = rt.gnew(rt.c.Counter)
        for _ in range(iters):
            rt.g.gincr(c)
        counts.append(c.cnt)

    for _ in range(n):
        t = threading.Thread(target=work)
        t.start()
        t.join()
    bad = [k for k in counts if k != iters]
    if bad or len(counts) != n:
        raise CorrectnessError(f"context runs counted {counts}, expected {iters} each")


def format_table(report):
    lines = [f"{'test':<22}{'iters':>10}{'median ns':>12}{'IQR ns':>11}"
             f"{'calls/s':>13}{'x direct':>10}"]
    for r in report.results:
        lines.append(f"{r.test:<22}{r.iters:>10}{r.median_ns:>12.1f}{r.spread_ns:>11.1f}"
                     f"{r.calls_per_sec:>13,.0f}{r.ratio_vs_direct:>10.2f}")
    c = report.cache
    lines.append(f"cache: hits={c.get('hits', 0)} misses={c.get('misses', 0)} "
                 f"substitutions={c.get('substitutions', 0)} evictions={c.get('evictions', 0)}")
    return "\n".join(lines)


def format_records(report):
    return "\n".join(json.dumps(r.record()) for r in report.results)


def build_parser():
    p = argparse.ArgumentParser(prog="dynobj-bench", description=__doc__.splitlines()[0])
    p.add_argument("--test", default="all", help="workload name or 'all'")
    p.add_argument("--iters", type=int, default=1_000_000)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--warmup", type=int, default=10_000)
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.add_argument("--fast-message-rank", type=int, default=5, choices=range(6),
                   metavar="0..5")
    p.add_argument("--contract-level", default="pre",
                   choices=("none", "pre", "post", "all"))
    p.add_argument("--cache-bound", type=int, default=65536)
    p.add_argument("--contexts", type=int, default=0,
                   help="also repeat incr in N fresh contexts (correctness only)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        names = TESTS if args.test == "all" else tuple(args.test.split(","))
        specs = [BenchmarkSpec(n, args.iters, args.reps, args.warmup) for n in names]
        if "direct_call_baseline" not in names:
            specs.insert(0, BenchmarkSpec("direct_call_baseline", args.iters, args.reps,
                                          args.warmup))
        config = DispatchConfig(fast_message_rank=args.fast_message_rank,
                                cache_slot_bound=args.cache_bound,
                                initial_slots=min(1024, args.cache_bound))
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    rt = make_runtime(config=config, contract_level=ContractLevel.parse(args.contract_level))
    try:
        report = run_benchmarks(specs, rt)
        if args.contexts:
            check_contexts(rt, args.contexts)
    except CorrectnessError as e:
        print(f"correctness check failed: {e}", file=sys.stderr)
        return 1
    print(format_table(report) if args.format == "table" else format_records(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())

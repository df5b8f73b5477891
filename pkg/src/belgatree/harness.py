"""Workloads, experiment runs and CSV reports."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import _backend
from .belga import BelgaTree
from .classic import ClassicTree
from .model import ModelTree
from .reference import height_for, interleave_bound

WORKLOADS = ("sequential", "uniform", "zipf", "working-set", "alternating", "constant", "trace")
STRUCTURES = ("belga", "classic", "rbsim-replay")


class BadTrace(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass
class Workload:
    kind: str
    N: int
    m: int
    B: int = 16
    seed: int = 0
    alpha: float = 1.1
    trace_path: Optional[str] = None
    key: int = 1

    def __post_init__(self):
        if self.kind not in WORKLOADS:
            raise ValueError(f"unknown workload {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.m < 1 and self.kind != "trace":
            raise ValueError("m must be positive")


def read_trace(path: str, N: int) -> list:
    """One decimal key per line; every key must lie in ``[1, N]``."""
    try:
        with open(path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise BadTrace(f"{path}: {e}") from e
    keys = []
    for no, line in enumerate(lines, 1):
        text = line.strip()
        if not text:
            continue
        try:
            x = int(text, 10)
        except ValueError:
            raise BadTrace(f"{path}:{no}: not an integer: {text!r}") from None
        if not 1 <= x <= N:
            raise BadTrace(f"{path}:{no}: key {x} outside [1, {N}]")
        keys.append(x)
    if not keys:
        raise BadTrace(f"{path}: empty trace")
    return keys


def zipf_probs(N: int, alpha: float) -> np.ndarray:
    w = np.arange(1, N + 1, dtype=float) ** -alpha
    return w / w.sum()


def generate(w: Workload) -> list:
    """The key sequence of ``w``; deterministic in its seed."""
    N, m = w.N, w.m
    rng = np.random.default_rng(w.seed)
    if w.kind == "sequential":
        return [i % N + 1 for i in range(m)]
    if w.kind == "uniform":
        return rng.integers(1, N + 1, size=m).tolist()
    if w.kind == "zipf":
        # rank r is drawn with probability ~ r**-alpha; ranks are scattered over keys
        ranks = rng.choice(N, size=m, p=zipf_probs(N, w.alpha))
        perm = rng.permutation(N) + 1
        return perm[ranks].tolist()
    if w.kind == "working-set":
        size = max(1, math.isqrt(N))
        hot = rng.integers(1, N + 1, size=size)
        out = []
        for _ in range(m):
            if rng.random() < 1.0 / size:
                hot[rng.integers(size)] = rng.integers(1, N + 1)
            out.append(int(hot[rng.integers(size)]))
        return out
    if w.kind == "alternating":
        # 1, N, 2, N-1, ... : every search crosses the middle of the key range
        half = (N + 1) // 2
        out = []
        for i in range(m):
            j = (i // 2) % half
            out.append(j + 1 if i % 2 == 0 else N - j)
        return out
    if w.kind == "constant":
        if not 1 <= w.key <= N:
            raise ValueError(f"key {w.key} outside [1, {N}]")
        return [w.key] * m
    if w.trace_path is None:
        raise BadTrace("trace workload needs a trace path")
    return read_trace(w.trace_path, N)


@dataclass
class OpRecord:
    op: int
    key: int
    cost: int
    cum_cost: int
    pref_changes: int


@dataclass
class RunReport:
    structure: str
    workload: str
    N: int
    B: int
    seed: int
    records: List[OpRecord] = field(default_factory=list)
    ib: int = 0
    seconds: float = 0.0
    backend: str = ""
    warnings: List[str] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.records)

    @property
    def total(self) -> int:
        return self.records[-1].cum_cost if self.records else 0

    @property
    def mean_cost(self) -> float:
        return self.total / self.m if self.m else 0.0

    @property
    def scale(self) -> float:
        """``(IB + N + m) * (1 + log_B log2 N)``."""
        return (self.ib + self.N + self.m) * (1 + loglog(self.N, self.B))

    @property
    def ratio(self) -> float:
        return self.total / self.scale if self.m else 0.0

    @property
    def lower_bound(self) -> float:
        """Interleave bound in B-tree units, ``IB / log2 B``."""
        return self.ib / max(1.0, math.log2(self.B))

    def summary(self) -> dict:
        return {
            "structure": self.structure,
            "workload": self.workload,
            "N": self.N,
            "B": self.B,
            "m": self.m,
            "seed": self.seed,
            "total_cost": self.total,
            "mean_cost": round(self.mean_cost, 6),
            "IB": self.ib,
            "IB_over_log2B": round(self.lower_bound, 6),
            "ratio": round(self.ratio, 6),
        }


def loglog(N: int, B: int) -> float:
    """``log_B log2 N``, clamped at zero for tiny ``N``."""
    l2 = math.log2(max(N, 2))
    return max(0.0, math.log(l2) / math.log(B)) if l2 > 1 else 0.0


def run(structure: str, w: Workload, backend: str = "auto", keys: Optional[Sequence] = None) -> RunReport:
    """Serve the searches of ``w`` with ``structure`` and meter every one."""
    if structure not in STRUCTURES:
        raise ValueError(f"unknown structure {structure!r}")
    xs = list(keys) if keys is not None else generate(w)
    N, B = w.N, w.B
    rep = RunReport(structure, w.kind, N, B, w.seed)
    if B > math.log2(max(N, 2)) ** 3:
        rep.warnings.append(
            f"B={B} exceeds (log2 N)^3={math.log2(max(N, 2)) ** 3:.0f}; "
            "the competitive bound assumes B polylogarithmic in N"
        )
    start = time.perf_counter()
    if structure == "belga":
        _run_belga(rep, xs, N, B, backend)
    elif structure == "classic":
        _run_classic(rep, xs, N, B)
    else:
        _run_rbsim(rep, xs, N, B)
    rep.seconds = time.perf_counter() - start
    rep.ib = interleave_bound(xs, height_for(N))
    return rep


def _oracle(N: int, x: int) -> bool:
    # the stored keys are exactly 1..N
    return 1 <= x <= N


def _record(rep: RunReport, x: int, cost: int, changes: int) -> None:
    cum = (rep.records[-1].cum_cost if rep.records else 0) + cost
    rep.records.append(OpRecord(len(rep.records), x, cost, cum, changes))


def _run_belga(rep, xs, N, B, backend) -> None:
    t = BelgaTree(N, B, backend=backend)
    rep.backend = t.backend
    for x in xs:
        out = t.search(x)
        if out.found != _oracle(N, x):
            raise AssertionError(f"belga answered {out.found} for {x}")
        _record(rep, x, out.cost, out.changes)
    inline = t.rt.flips
    if inline != interleave_bound(xs, t.height):
        raise AssertionError("inline and replayed interleave bounds differ")


def _run_classic(rep, xs, N, B) -> None:
    t = ClassicTree.build_from_sorted(range(1, N + 1), B)
    rep.backend = "python"
    meter = t.meter
    for x in xs:
        before = meter.total()
        found = t.search(x)
        if found != _oracle(N, x):
            raise AssertionError(f"classic answered {found} for {x}")
        _record(rep, x, meter.total() - before, 0)


def _run_rbsim(rep, xs, N, B) -> None:
    # classic B-tree searches replayed as model moves on the red-black forest
    from .rb_sim import Simulator

    t = ClassicTree.build_from_sorted(range(1, N + 1), max(B, 3))
    model = ModelTree.from_nested(max(B, 3), _nested(t.root))
    sim = Simulator(model)
    rep.backend = "python"
    meter = sim.meter
    for x in xs:
        before = meter.total()
        sim.sim_init()
        found = False
        while True:
            v = model.cursor.at
            i = next((j for j, k in enumerate(v.keys) if k >= x), len(v.keys))
            if i < len(v.keys) and v.keys[i] == x:
                found = True
                break
            if v.children[i] is None:
                break
            sim.sim_move(i)
        if found != _oracle(N, x):
            raise AssertionError(f"replay answered {found} for {x}")
        _record(rep, x, meter.total() - before, 0)


def _nested(v):
    if v.height == 0:
        return (list(v.keys), None)
    return (list(v.keys), [_nested(c) for c in v.children])


def run_many(jobs: Iterable[tuple], workers: int = 1) -> list:
    """Run ``(structure, workload)`` pairs, optionally on worker threads."""
    jobs = list(jobs)
    if workers <= 1:
        return [run(s, w) for s, w in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: run(*job), jobs))


def emit_csv(r: RunReport, path) -> None:
    """Per-op rows under a fixed header, then ``#``-prefixed summary lines."""
    try:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["op", "key", "cost", "cum_cost", "pref_changes"])
            for rec in r.records:
                out.writerow([rec.op, rec.key, rec.cost, rec.cum_cost, rec.pref_changes])
            if r.records:
                for k, v in r.summary().items():
                    fh.write(f"# {k}={v}\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def bench_backends(N: int = 32767, B: int = 16, m: int = 20000, seed: int = 0) -> dict:
    """Seconds per search for each available Belga backend on a uniform workload."""
    xs = generate(Workload("uniform", N, m, B, seed))
    names = ["python"] + (["compiled"] if _backend.compiled is not None else [])
    out = {}
    totals = set()
    for name in names:
        t = BelgaTree(N, B, backend=name)
        start = time.perf_counter()
        for x in xs:
            t.search(x)
        out[name] = (time.perf_counter() - start) / m
        totals.add(t.meter.total())
    if len(totals) != 1:
        raise AssertionError("backends disagree on the metered cost")
    return out

"""Timing of the two right-hand-side paths and their scaling exponents.

The convolution path is timed one state per call.  The spatial path is
dominated by fixed Python and FFT-setup overhead at these sizes when called
on one state, so besides the single-call latency it is also timed on a batch
of ``batch_points / N`` independent states, and the per-state cost of the
batch is what the scaling fit uses.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from .solver import SpatialVariant, convolution_plan, spatial_plan
from .spectral import SpectralGrid, random_bandlimited

DEFAULT_SIZES = (256, 1024, 4096)
THEORY = {"convolution": 2.0, "spatial": 1.1}


@dataclass
class BenchRow:
    path: str
    n_modes: int
    cold_ns: float
    warm_ns: float
    warm_rel_spread: float
    batch: int

    def line(self) -> str:
        return (f"{self.path}\t{self.n_modes}\t{self.warm_ns:.0f}\t{self.cold_ns:.0f}\t"
                f"{self.warm_rel_spread:.3f}\t{self.batch}")


def _cold(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def _sample(fn, loops: int) -> float:
    t0 = time.perf_counter()
    for _ in range(loops):
        fn()
    return (time.perf_counter() - t0) / loops


def _rows(path: str, cases: dict, repeats: int, min_time: float) -> list[BenchRow]:
    """Time every size in interleaved rounds so slow drifts hit all sizes alike.

    ``cases`` maps N to ``(setup, fn, batch)``; ``setup`` clears plan caches
    before the cold call.
    """
    cold, loops, samples = {}, {}, {n: [] for n in cases}
    for n, (setup, fn, _) in cases.items():
        setup()
        cold[n] = _cold(fn)
        loops[n] = max(1, int(min_time / max(_cold(fn), 1e-7)))
    for _ in range(repeats):
        for n, (_, fn, _) in cases.items():
            samples[n].append(_sample(fn, loops[n]))
    rows = []
    for n, (_, _, batch) in cases.items():
        s = samples[n]
        spread = statistics.pstdev(s) / statistics.mean(s) if len(s) > 1 else 0.0
        rows.append(BenchRow(path, n, cold[n] * 1e9 / batch, min(s) * 1e9 / batch, spread, batch))
    return rows


def _clear():
    convolution_plan.cache_clear()
    spatial_plan.cache_clear()


def bench_sizes(sizes=DEFAULT_SIZES, repeats: int = 7, min_time: float = 0.05, batch_points: int = 1 << 16,
                seed: int = 0) -> list[BenchRow]:
    """Rows for ``convolution``, ``spatial`` (batched, per state) and ``spatial_single``.

    Cold timings are the first call after clearing the plan caches, so they
    include plan construction; warm timings are the best of ``repeats``
    rounds.
    """
    rng = np.random.default_rng(seed)
    single = {n: random_bandlimited(SpectralGrid(n), rng).coeffs for n in sizes}
    stacks = {n: np.stack([random_bandlimited(SpectralGrid(n), rng).coeffs
                           for _ in range(max(1, batch_points // n))]) for n in sizes}

    def conv(n):
        return lambda: convolution_plan(n, "canonical").apply(single[n])

    def spatial(n, data):
        return lambda: spatial_plan(n).apply(data, SpatialVariant.HILBERT_SQUARE)

    rows = _rows("spatial", {n: (_clear, spatial(n, stacks[n]), stacks[n].shape[0]) for n in sizes},
                 repeats, min_time)
    rows += _rows("spatial_single", {n: (_clear, spatial(n, single[n]), 1) for n in sizes}, repeats, min_time)
    rows += _rows("convolution", {n: (_clear, conv(n), 1) for n in sizes}, repeats, min_time)
    return rows


def scaling_exponent(rows: list[BenchRow], path: str) -> float:
    """Least-squares slope of log(warm time) against log N."""
    pts = [(r.n_modes, r.warm_ns) for r in rows if r.path == path]
    if len(pts) < 2:
        return float("nan")
    n, t = np.array(pts, dtype=float).T
    return float(np.polyfit(np.log(n), np.log(t), 1)[0])


def report(rows: list[BenchRow]) -> dict:
    exps = {path: scaling_exponent(rows, path) for path in ("convolution", "spatial", "spatial_single")}
    return {"rows": [asdict(r) for r in rows], "exponents": exps, "theory": THEORY}

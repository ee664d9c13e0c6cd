"""Seeded trial sweeps over strategies, step counts, pool sizes, and qubit
counts, with paired-trial discipline: trial i always derives its initial
state and direction stream from (seed, i) alone, so strategy comparisons
share initial states and random substreams.

Aggregate rows use the fixed summary schema: sweep_name, strategy, n,
M_checkpoint, pool_size, mean_alpha, stderr_alpha, trials, seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import hamiltonians as ham
from .engine import RandomizationStrategy, RunConfig, j_curve
from .sampling import weight_graded_pool

SUMMARY_COLUMNS = ("sweep_name", "strategy", "n", "M_checkpoint", "pool_size",
                   "mean_alpha", "stderr_alpha", "trials", "seed")
DIFFERENCE_COLUMNS = ("sweep_name", "n", "M_checkpoint", "alpha_haar",
                      "alpha_two_design", "abs_difference", "trials", "seed")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a base config, the swept axis, its values, and trial count.

    axis 'steps_M':   values are checkpoint step counts (strictly increasing).
    axis 'pool_size': values are pool sizes at fixed M = base.max_steps.
    axis 'n_qubits':  values are qubit counts for the scaling insets.
    """

    name: str
    base: RunConfig
    axis: str
    values: tuple
    trials: int

    def __post_init__(self):
        if self.axis not in ("steps_M", "pool_size", "n_qubits"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        vals = tuple(int(v) for v in self.values)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("axis values must be strictly increasing")
        if not vals:
            raise ValueError("axis values must be nonempty")
        object.__setattr__(self, "values", vals)


def log_checkpoints(max_steps: int, per_decade: int = 10) -> tuple:
    """Logarithmically spaced integer checkpoints in [1, max_steps]."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    count = max(2, int(per_decade * math.log10(max_steps)) + 1)
    grid = np.unique(np.rint(np.geomspace(1, max_steps, count)).astype(int))
    return tuple(int(g) for g in grid)


def _curve_worker(payload: tuple) -> np.ndarray:
    cfg, trial = payload
    return j_curve(cfg, trial)


def parallel_map(fn: Callable, payloads: Sequence, workers: int) -> list:
    """Order-preserving map, optionally over a process pool."""
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    chunk = max(1, len(payloads) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads, chunksize=chunk))


def trial_curves(cfg: RunConfig, trials: int, workers: int = 1) -> np.ndarray:
    """(trials, max_steps + 1) array of J trajectories."""
    payloads = [(cfg, t) for t in range(trials)]
    return np.vstack(parallel_map(_curve_worker, payloads, workers))


def _alpha_stats(curves: np.ndarray, e_min: float, checkpoint: int) -> tuple:
    alphas = curves[:, checkpoint] / e_min
    mean = float(alphas.mean())
    se = float(alphas.std(ddof=1) / math.sqrt(len(alphas))) if len(alphas) > 1 else 0.0
    return mean, se


def _row(spec: SweepSpec, strategy: str, n: int, checkpoint: int, pool_size,
         mean: float, se: float) -> dict:
    return {
        "sweep_name": spec.name,
        "strategy": strategy,
        "n": n,
        "M_checkpoint": checkpoint,
        "pool_size": pool_size if pool_size is not None else "",
        "mean_alpha": mean,
        "stderr_alpha": se,
        "trials": spec.trials,
        "seed": spec.base.seed,
    }


def _strategy_variant(base: RunConfig, strategy: RandomizationStrategy,
                      max_steps: Optional[int] = None) -> RunConfig:
    return replace(base, strategy=strategy,
                   max_steps=base.max_steps if max_steps is None else max_steps)


def _paired_strategies(base: RunConfig, kinds: Sequence[str]) -> dict:
    generator = base.strategy.generator
    out = {}
    for kind in kinds:
        if kind == "haar":
            out[kind] = RandomizationStrategy("haar", generator=generator)
        elif kind == "two_design":
            out[kind] = RandomizationStrategy("two_design", generator=generator,
                                              design=base.strategy.design)
        elif kind == "pool":
            pool = base.strategy.pool or weight_graded_pool(base.n_qubits)
            out[kind] = RandomizationStrategy("pool", pool=pool)
    return out


def sweep_fig2(spec: SweepSpec, workers: int = 1) -> tuple:
    """Haar vs 2-design mean-alpha curves on one graph, paired trials.

    Returns (summary_rows, difference_rows); the difference table carries
    |alpha_haar - alpha_two_design| per checkpoint.
    """
    if spec.axis != "steps_M":
        raise ValueError("fig2 sweeps the step count")
    base = spec.base
    h_p = ham.hamiltonian_from_spec(base.hamiltonian, base.n_qubits)
    e_min = h_p.ground_energy
    if e_min >= 0:
        raise ValueError("fig2 needs an Ising-form problem with negative ground energy")
    strategies = _paired_strategies(base, ("haar", "two_design"))
    max_m = spec.values[-1]
    means = {}
    rows = []
    for kind, strat in strategies.items():
        cfg = _strategy_variant(base, strat, max_steps=max_m)
        curves = trial_curves(cfg, spec.trials, workers)
        means[kind] = {}
        for m in spec.values:
            mean, se = _alpha_stats(curves, e_min, m)
            means[kind][m] = mean
            rows.append(_row(spec, kind, base.n_qubits, m, None, mean, se))
    diff_rows = [
        {
            "sweep_name": spec.name,
            "n": base.n_qubits,
            "M_checkpoint": m,
            "alpha_haar": means["haar"][m],
            "alpha_two_design": means["two_design"][m],
            "abs_difference": abs(means["haar"][m] - means["two_design"][m]),
            "trials": spec.trials,
            "seed": base.seed,
        }
        for m in spec.values
    ]
    return rows, diff_rows


def sweep_fig3(spec: SweepSpec, workers: int = 1) -> list:
    """Complete-graph sweeps: alpha vs M for the three strategies
    (axis 'steps_M'), alpha vs pool size at fixed M (axis 'pool_size'), or the
    scaling insets over n (axis 'n_qubits')."""
    if spec.axis == "steps_M":
        return _fig3_steps(spec, workers)
    if spec.axis == "pool_size":
        return _fig3_pool_sizes(spec, workers)
    return _fig3_insets(spec, workers)


def _fig3_steps(spec: SweepSpec, workers: int) -> list:
    base = spec.base
    h_p = ham.hamiltonian_from_spec(base.hamiltonian, base.n_qubits)
    e_min = h_p.ground_energy
    strategies = _paired_strategies(base, ("haar", "two_design", "pool"))
    max_m = spec.values[-1]
    rows = []
    for kind, strat in strategies.items():
        cfg = _strategy_variant(base, strat, max_steps=max_m)
        curves = trial_curves(cfg, spec.trials, workers)
        pool_size = len(strat.pool) if kind == "pool" else None
        for m in spec.values:
            mean, se = _alpha_stats(curves, e_min, m)
            rows.append(_row(spec, kind, base.n_qubits, m, pool_size, mean, se))
    return rows


def _fig3_pool_sizes(spec: SweepSpec, workers: int) -> list:
    base = spec.base
    h_p = ham.hamiltonian_from_spec(base.hamiltonian, base.n_qubits)
    e_min = h_p.ground_energy
    graded = weight_graded_pool(base.n_qubits)
    m_fixed = base.max_steps
    rows = []
    for size in spec.values:
        if size > len(graded):
            raise ValueError(f"pool size {size} exceeds {len(graded)} available strings")
        strat = RandomizationStrategy("pool", pool=graded[:size])
        cfg = _strategy_variant(base, strat)
        curves = trial_curves(cfg, spec.trials, workers)
        mean, se = _alpha_stats(curves, e_min, m_fixed)
        rows.append(_row(spec, "pool", base.n_qubits, m_fixed, size, mean, se))
    return rows


def geometric_pool_sizes(n_qubits: int, start: int = 3) -> tuple:
    """Roughly doubling pool sizes from `start` up to the full 4^n - 1."""
    full = 4**n_qubits - 1
    sizes = []
    s = start
    while s < full:
        sizes.append(s)
        s *= 2
    sizes.append(full)
    return tuple(sizes)


def _inset_budget(spec: SweepSpec, n: int) -> int:
    """Step budget per qubit count: base.max_steps at the largest swept n,
    scaled down by 4 per qubit below it (floored at 2000)."""
    n_top = spec.values[-1]
    scaled = spec.base.max_steps * 4.0 ** (n - n_top)
    return max(2000, int(math.ceil(scaled)))


def _fig3_insets(spec: SweepSpec, workers: int) -> list:
    """Minimal M with mean alpha > 0.99 (full pool), and minimal pool size
    with mean alpha > 0.9 at fixed M, per qubit count."""
    rows = []
    trials = spec.trials
    for n in spec.values:
        budget = _inset_budget(spec, n)
        graded = weight_graded_pool(n)
        base_n = replace(spec.base, n_qubits=n, hamiltonian=f"ising:complete:{n}",
                         strategy=RandomizationStrategy("pool", pool=graded),
                         max_steps=budget)
        h_p = ham.hamiltonian_from_spec(base_n.hamiltonian, n)
        e_min = h_p.ground_energy
        curves = trial_curves(base_n, trials, workers)
        mean_alpha = curves.mean(axis=0) / e_min
        crossing = np.nonzero(mean_alpha > 0.99)[0]
        m_star = int(crossing[0]) if len(crossing) else -1
        alpha_at = float(mean_alpha[m_star]) if m_star >= 0 else float(mean_alpha[-1])
        rows.append({
            "sweep_name": f"{spec.name}_m_star",
            "strategy": "pool",
            "n": n,
            "M_checkpoint": m_star,
            "pool_size": len(graded),
            "mean_alpha": alpha_at,
            "stderr_alpha": 0.0,
            "trials": trials,
            "seed": spec.base.seed,
        })
        m_fixed = max(500, budget // 2)
        size_star = -1
        alpha_size = 0.0
        for size in geometric_pool_sizes(n):
            strat = RandomizationStrategy("pool", pool=graded[:size])
            cfg = replace(base_n, strategy=strat, max_steps=m_fixed)
            sized = trial_curves(cfg, trials, workers)
            mean, _ = _alpha_stats(sized, e_min, m_fixed)
            if mean > 0.9:
                size_star, alpha_size = size, mean
                break
        rows.append({
            "sweep_name": f"{spec.name}_pool_star",
            "strategy": "pool",
            "n": n,
            "M_checkpoint": m_fixed,
            "pool_size": size_star,
            "mean_alpha": alpha_size,
            "stderr_alpha": 0.0,
            "trials": trials,
            "seed": spec.base.seed,
        })
    return rows

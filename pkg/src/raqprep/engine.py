"""The adaptive loop: randomized direction sampling, gradient evaluation
(exact, finite-difference, shot-based parameter shift), the analytic update
theta_k = -gamma * dJ(0)/dtheta_k, circuit growth, stopping logic, and trace
recording.

Directions are Hermitian generators H_k of unit spectral norm: either a fixed
Pauli conjugated by a fresh random unitary (Haar or 2-design), or a uniform
draw from an operator pool. A step applies V^dag e^{-i theta H} V as three
cheap applications; no dense matrix exponential is ever formed.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import hamiltonians as ham
from .linalg import (
    ConjugatedPauli,
    PauliString,
    StateVector,
    apply_operator_raw,
    operator_matrix,
    rotate_operator_raw,
)
from .sampling import (
    RngStream,
    TwoDesignConfig,
    haar_unitary,
    matrix_digest,
    random_state,
    sample_pool,
    two_design_unitary,
)

STRATEGY_KINDS = ("haar", "two_design", "pool")


@dataclass(frozen=True)
class RandomizationStrategy:
    """How the direction H_k is drawn at each step.

    kind 'haar' / 'two_design': H_k = V^dag H V with H a fixed unit-norm
    traceless Pauli generator (default X on qubit 0) and V resampled fresh.
    kind 'pool': H_k drawn uniformly from an ordered PauliString pool.
    """

    kind: str
    generator: Optional[PauliString] = None
    design: TwoDesignConfig = TwoDesignConfig()
    pool: tuple = ()

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.generator is not None:
            _check_unit_generator(self.generator)
        if self.kind == "pool":
            if not self.pool:
                raise ValueError("pool strategy requires a nonempty pool")
            for p in self.pool:
                _check_unit_generator(p)
            object.__setattr__(self, "pool", tuple(self.pool))

    def resolved_generator(self, n_qubits: int) -> PauliString:
        if self.generator is not None:
            if self.generator.n_qubits != n_qubits:
                raise ValueError("strategy generator size does not match n_qubits")
            return self.generator
        return PauliString.single("X", 0, n_qubits)


def _check_unit_generator(p: PauliString) -> None:
    if p.is_identity:
        raise ValueError("generator must be traceless (not the identity string)")
    if abs(p.coefficient) != 1.0:
        raise ValueError("generator must have spectral norm 1")


@dataclass(frozen=True)
class GradientMode:
    """exact | finite_difference (central, step fd_step) | shots (parameter shift)."""

    kind: str = "exact"
    fd_step: float = 1e-5
    shots: int = 1024

    def __post_init__(self):
        if self.kind not in ("exact", "finite_difference", "shots"):
            raise ValueError(f"unknown gradient mode {self.kind!r}")
        if self.fd_step <= 0:
            raise ValueError("finite-difference step must be positive")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "GradientMode":
        kind, _, arg = text.partition(":")
        if kind == "exact":
            return cls("exact")
        if kind in ("fd", "finite_difference"):
            return cls("finite_difference", fd_step=float(arg) if arg else 1e-5)
        if kind == "shots":
            return cls("shots", shots=int(arg))
        raise ValueError(f"unknown gradient mode {text!r}")

    def describe(self) -> str:
        if self.kind == "finite_difference":
            return f"fd:{self.fd_step:g}"
        if self.kind == "shots":
            return f"shots:{self.shots}"
        return "exact"


@dataclass(frozen=True)
class StopRule:
    """Fixed step budget by default; opt-in alpha threshold or gradient patience."""

    alpha_threshold: Optional[float] = None
    grad_tol: Optional[float] = None
    patience: int = 1

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    """descent_repeats > 1 re-measures and re-updates theta along the same
    sampled direction before the next direction is drawn (default 1: one
    analytic update per direction, no inner optimization)."""

    n_qubits: int
    hamiltonian: str
    strategy: RandomizationStrategy
    gamma: Union[float, str] = "auto"
    max_steps: int = 1000
    stop: StopRule = StopRule()
    gradient_mode: GradientMode = GradientMode()
    descent_repeats: int = 1
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.descent_repeats < 1:
            raise ValueError("descent_repeats must be >= 1")
        if isinstance(self.gamma, str):
            if self.gamma != "auto":
                raise ValueError(f"gamma must be a positive number or 'auto', got {self.gamma!r}")
        elif self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class StepRecord:
    k: int
    gradient: float
    theta: float
    j_before: float
    j_after: float
    delta_j: float
    strategy_kind: str
    sampled_direction: str
    stream_id: int
    gradient_mode: str = "exact"
    purity: Optional[float] = None
    fidelity: Optional[float] = None

    def to_json_dict(self) -> dict:
        out = {
            "k": self.k,
            "J_before": self.j_before,
            "J_after": self.j_after,
            "gradient": self.gradient,
            "theta": self.theta,
            "strategy": self.strategy_kind,
            "stream_id": self.stream_id,
        }
        if self.purity is not None:
            out["purity"] = self.purity
        if self.fidelity is not None:
            out["fidelity"] = self.fidelity
        return out


@dataclass
class RunTrace:
    config: dict
    records: list
    final_j: float
    final_alpha: Optional[float]
    final_fidelity: Optional[float]
    steps_executed: int
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------

def gradient_exact(state: StateVector, h_k, h_p: ham.ProblemHamiltonian) -> float:
    """dJ(0)/dtheta = i <psi|[H_k, H_p]|psi>, evaluated as -2 Im <H_k psi|H_p psi>."""
    return _gradient_exact_raw(state.amplitudes, h_k, h_p)


def _gradient_exact_raw(amps: np.ndarray, h_k, h_p: ham.ProblemHamiltonian) -> float:
    hk_psi = apply_operator_raw(h_k, amps)
    hp_psi = h_p.apply(amps)
    return float(-2.0 * np.vdot(hk_psi, hp_psi).imag)


def gradient_hilbert_schmidt(state: StateVector, h_k, h_p: ham.ProblemHamiltonian) -> float:
    """Second, independent path: <[|psi><psi|, H_p], i H_k> via dense matrices."""
    psi = state.amplitudes
    proj = np.outer(psi, psi.conj())
    hp_mat = h_p.dense_matrix()
    grad_mat = proj @ hp_mat - hp_mat @ proj
    hk_mat = operator_matrix(h_k)
    # <A, iB> = Tr(A^dag i B) with A anti-Hermitian
    return float(np.trace(grad_mat.conj().T @ (1j * hk_mat)).real)


def gradient_finite_difference(state: StateVector, h_k, h_p: ham.ProblemHamiltonian,
                               fd_step: float = 1e-5) -> float:
    """Central difference of J(theta) around 0."""
    return _gradient_fd_raw(state.amplitudes, h_k, h_p, fd_step)


def _gradient_fd_raw(amps: np.ndarray, h_k, h_p, fd_step: float) -> float:
    j_plus = ham.cost_raw(h_p, rotate_operator_raw(h_k, fd_step, amps))
    j_minus = ham.cost_raw(h_p, rotate_operator_raw(h_k, -fd_step, amps))
    return (j_plus - j_minus) / (2.0 * fd_step)


def _is_involutory(h_k) -> bool:
    if isinstance(h_k, PauliString):
        return abs(h_k.coefficient) == 1.0 and not h_k.is_identity
    if isinstance(h_k, ConjugatedPauli):
        return abs(h_k.base.coefficient) == 1.0 and not h_k.base.is_identity
    return False


def _sample_cost(h_p: ham.ProblemHamiltonian, amps: np.ndarray, shots: int,
                 gen: np.random.Generator) -> float:
    """Mean of `shots` draws from the eigenvalue distribution of H_p in |amps>."""
    if h_p.form == "ising_diagonal":
        probs = np.abs(amps) ** 2
        values = h_p.diagonal
    elif h_p.form == "projector":
        overlap = np.abs(np.vdot(h_p.target.amplitudes, amps)) ** 2
        probs = np.array([overlap, 1.0 - overlap])
        values = np.array([0.0, 1.0])
    else:
        evals, evecs = np.linalg.eigh(h_p.matrix)
        probs = np.abs(evecs.conj().T @ amps) ** 2
        values = evals
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    draws = gen.choice(values, size=shots, p=probs)
    return float(draws.mean())


def gradient_shot_estimate(state: StateVector, h_k, h_p: ham.ProblemHamiltonian,
                           shots: int, rng: RngStream) -> float:
    """Parameter-shift estimate dJ/dtheta = J(pi/4) - J(-pi/4) for involutory
    generators, each J estimated from `shots` measurement samples."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not _is_involutory(h_k):
        raise ValueError("parameter shift needs an involutory generator (Pauli-string conjugate)")
    amps = state.amplitudes
    gen = rng.gen
    j_plus = _sample_cost(h_p, rotate_operator_raw(h_k, np.pi / 4, amps), shots, gen)
    j_minus = _sample_cost(h_p, rotate_operator_raw(h_k, -np.pi / 4, amps), shots, gen)
    return j_plus - j_minus


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _RunContext:
    n_qubits: int
    h_p: ham.ProblemHamiltonian
    gamma: float
    generator: Optional[PauliString]
    strategy: RandomizationStrategy
    gradient_mode: GradientMode
    descent_repeats: int = 1


@functools.lru_cache(maxsize=32)
def _prepare(cfg: RunConfig) -> _RunContext:
    h_p = ham.hamiltonian_from_spec(cfg.hamiltonian, cfg.n_qubits)
    if h_p.n_qubits != cfg.n_qubits:
        raise ValueError(
            f"hamiltonian acts on {h_p.n_qubits} qubits but config says {cfg.n_qubits}"
        )
    gamma = cfg.gamma
    if gamma == "auto":
        gamma = 1.0 / (4.0 * h_p.spectral_norm)
    generator = None
    if cfg.strategy.kind in ("haar", "two_design"):
        generator = cfg.strategy.resolved_generator(cfg.n_qubits)
    else:
        for p in cfg.strategy.pool:
            if p.n_qubits != cfg.n_qubits:
                raise ValueError("pool element size does not match n_qubits")
    return _RunContext(cfg.n_qubits, h_p, float(gamma), generator,
                       cfg.strategy, cfg.gradient_mode, cfg.descent_repeats)


def _sample_direction(ctx: _RunContext, rng: RngStream):
    kind = ctx.strategy.kind
    if kind == "haar":
        v = haar_unitary(ctx.n_qubits, rng)
        return ConjugatedPauli(v, ctx.generator), f"haar:{matrix_digest(v.matrix)}"
    if kind == "two_design":
        v = two_design_unitary(ctx.n_qubits, ctx.strategy.design, rng)
        return ConjugatedPauli(v, ctx.generator), \
            f"{ctx.strategy.design.flavor}:{matrix_digest(v.matrix)}"
    p = sample_pool(ctx.strategy.pool, rng)
    return p, f"pool:{p.label}"


def _gradient(ctx: _RunContext, amps: np.ndarray, h_k, shot_rng: RngStream) -> float:
    mode = ctx.gradient_mode
    if mode.kind == "exact":
        return _gradient_exact_raw(amps, h_k, ctx.h_p)
    if mode.kind == "finite_difference":
        return _gradient_fd_raw(amps, h_k, ctx.h_p, mode.fd_step)
    state = StateVector(ctx.n_qubits, amps)
    return gradient_shot_estimate(state, h_k, ctx.h_p, mode.shots, shot_rng)


def _do_step(ctx: _RunContext, amps: np.ndarray, j_before: float, k: int,
             dir_rng: RngStream, shot_rng: RngStream, stream_id: int):
    h_k, desc = _sample_direction(ctx, dir_rng)
    grad = _gradient(ctx, amps, h_k, shot_rng)
    theta = -ctx.gamma * grad if grad != 0.0 else 0.0
    new_amps = rotate_operator_raw(h_k, theta, amps) if theta != 0.0 else amps
    # optional inner repeats descend further along this same direction; the
    # record keeps the direction's initial gradient and the accumulated angle
    for _ in range(ctx.descent_repeats - 1):
        g_inner = _gradient(ctx, new_amps, h_k, shot_rng)
        if g_inner == 0.0:
            break
        inner_theta = -ctx.gamma * g_inner
        new_amps = rotate_operator_raw(h_k, inner_theta, new_amps)
        theta += inner_theta
    j_after = ham.cost_raw(ctx.h_p, new_amps) if theta != 0.0 else j_before
    record = StepRecord(
        k=k, gradient=grad, theta=theta, j_before=j_before, j_after=j_after,
        delta_j=j_before - j_after, strategy_kind=ctx.strategy.kind,
        sampled_direction=desc, stream_id=stream_id,
        gradient_mode=ctx.gradient_mode.describe(),
    )
    return new_amps, j_after, record


def step(state: StateVector, cfg: RunConfig, rng: RngStream):
    """One adaptive step; returns (new state, StepRecord)."""
    ctx = _prepare(cfg)
    if state.n_qubits != ctx.n_qubits:
        raise ValueError("state size does not match config")
    j_before = ham.cost_raw(ctx.h_p, state.amplitudes)
    new_amps, _, record = _do_step(ctx, state.amplitudes, j_before, 0,
                                   rng, rng.child(2), rng.stream_id)
    return StateVector(ctx.n_qubits, new_amps), record


def _figures_of_merit(ctx: _RunContext, j: float):
    if ctx.h_p.form == "projector":
        return None, 1.0 - j
    e_min = ctx.h_p.ground_energy
    if e_min == 0.0:
        return None, None
    return j / e_min, None


def _should_stop(ctx: _RunContext, stop: StopRule, j: float, grad: float,
                 flat_count: int):
    """Returns (stop_now, updated flat gradient count)."""
    if stop.grad_tol is not None:
        flat_count = flat_count + 1 if abs(grad) < stop.grad_tol else 0
        if flat_count >= stop.patience:
            return True, flat_count
    if stop.alpha_threshold is not None:
        alpha, fidelity = _figures_of_merit(ctx, j)
        merit = alpha if alpha is not None else fidelity
        if merit is not None and merit >= stop.alpha_threshold:
            return True, flat_count
    return False, flat_count


def config_echo(cfg: RunConfig) -> dict:
    strategy = {
        "kind": cfg.strategy.kind,
        "generator": cfg.strategy.generator.label if cfg.strategy.generator else "X@0",
    }
    if cfg.strategy.kind == "two_design":
        strategy["design_flavor"] = cfg.strategy.design.flavor
        strategy["design_layers"] = cfg.strategy.design.layers
    if cfg.strategy.kind == "pool":
        strategy["pool_size"] = len(cfg.strategy.pool)
        strategy["generator"] = "pool"
    return {
        "n_qubits": cfg.n_qubits,
        "hamiltonian": cfg.hamiltonian,
        "strategy": strategy,
        "gamma": cfg.gamma,
        "max_steps": cfg.max_steps,
        "stop": {
            "alpha_threshold": cfg.stop.alpha_threshold,
            "grad_tol": cfg.stop.grad_tol,
            "patience": cfg.stop.patience,
        },
        "gradient_mode": cfg.gradient_mode.describe(),
        "descent_repeats": cfg.descent_repeats,
        "seed": cfg.seed,
        "trials": cfg.trials,
    }


def run(cfg: RunConfig, trial: int = 0, initial_state: Optional[StateVector] = None,
        record_steps: bool = True) -> RunTrace:
    """Execute one trial of the adaptive loop.

    The initial state is Haar-random from the trial's substream unless one is
    supplied. Three substreams (initial state, directions, shot noise) derive
    from (seed, trial), so paired comparisons across strategies share both the
    initial state and the direction stream.
    """
    t0 = time.perf_counter()
    ctx = _prepare(cfg)
    base = RngStream(cfg.seed, trial)
    init_rng, dir_rng, shot_rng = base.child(0), base.child(1), base.child(2)
    if initial_state is None:
        amps = random_state(cfg.n_qubits, init_rng).amplitudes
    else:
        if initial_state.n_qubits != cfg.n_qubits:
            raise ValueError("initial state size does not match config")
        amps = initial_state.amplitudes
    j = ham.cost_raw(ctx.h_p, amps)
    records = []
    flat_count = 0
    steps = 0
    for k in range(cfg.max_steps):
        amps, j, record = _do_step(ctx, amps, j, k, dir_rng, shot_rng, base.stream_id)
        steps += 1
        if record_steps:
            records.append(record)
        stop_now, flat_count = _should_stop(ctx, cfg.stop, j, record.gradient, flat_count)
        if stop_now:
            break
    alpha, fidelity = _figures_of_merit(ctx, j)
    echo = config_echo(cfg)
    echo["trial"] = trial
    return RunTrace(config=echo, records=records, final_j=j, final_alpha=alpha,
                    final_fidelity=fidelity, steps_executed=steps,
                    wall_time=time.perf_counter() - t0)


def j_curve(cfg: RunConfig, trial: int = 0,
            initial_state: Optional[StateVector] = None) -> np.ndarray:
    """Cost trajectory [J_0, ..., J_M] of one trial, without step records.

    Follows exactly the same stream discipline as run(); stop rules are
    ignored so curves across trials share a common length.
    """
    ctx = _prepare(cfg)
    base = RngStream(cfg.seed, trial)
    init_rng, dir_rng, shot_rng = base.child(0), base.child(1), base.child(2)
    if initial_state is None:
        amps = random_state(cfg.n_qubits, init_rng).amplitudes
    else:
        amps = initial_state.amplitudes
    curve = np.empty(cfg.max_steps + 1)
    j = ham.cost_raw(ctx.h_p, amps)
    curve[0] = j
    for k in range(cfg.max_steps):
        amps, j, _ = _do_step(ctx, amps, j, k, dir_rng, shot_rng, base.stream_id)
        curve[k + 1] = j
    return curve

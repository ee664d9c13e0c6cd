"""Mixed-state preparation on a dilated system + ancilla register: the
fidelity cost J = 1 - <target|rho_S|target>, its gradient over the composite,
and the cooling loop that drives a mixed system state to a pure target by
dumping entropy into the ancillas.

The composite orders system qubits first (leftmost) and ancillas last; the
ancilla register starts in |0...0>. Density matrices evolve densely, so the
total register is capped at 10 qubits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import hamiltonians as ham
from .engine import GradientMode, RandomizationStrategy, RunTrace, StepRecord, StopRule
from .linalg import (
    ConjugatedPauli,
    DensityMatrix,
    StateVector,
    operator_matrix,
    partial_trace,
)
from .sampling import RngStream, haar_unitary, matrix_digest, sample_pool, two_design_unitary

MAX_TOTAL_QUBITS = 10
COMMUTATION_KICK_TOL = 1e-12


@dataclass(frozen=True)
class DilatedState:
    """System + ancilla composite state."""

    n_system: int
    n_ancilla: int
    rho: DensityMatrix

    def __post_init__(self):
        if self.n_system < 1 or self.n_ancilla < 1:
            raise ValueError("need at least one system and one ancilla qubit")
        if self.n_ancilla > 2 * self.n_system:
            raise ValueError("ancilla register beyond 2 * n_system is never needed")
        total = self.n_system + self.n_ancilla
        if total > MAX_TOTAL_QUBITS:
            raise ValueError(f"composite register capped at {MAX_TOTAL_QUBITS} qubits")
        if self.rho.n_qubits != total:
            raise ValueError("density matrix size does not match system + ancilla")

    def system_state(self) -> DensityMatrix:
        return partial_trace(self.rho, range(self.n_system))


def target_projector_full(target: StateVector, n_ancilla: int) -> np.ndarray:
    """|target><target| tensor 1_A as a dense matrix on the composite."""
    t = target.amplitudes
    return np.kron(np.outer(t, t.conj()), np.eye(2**n_ancilla, dtype=complex))


def dilated_problem_hamiltonian(target: StateVector, n_ancilla: int) -> ham.ProblemHamiltonian:
    """H_p = 1 - |target><target| tensor 1_A on the composite, in dense form."""
    full = target_projector_full(target, n_ancilla)
    return ham.dense_hamiltonian(np.eye(full.shape[0], dtype=complex) - full)


def fidelity_to_target(rho: np.ndarray, target_full: np.ndarray) -> float:
    return float(np.trace(rho @ target_full).real)


def cooling_gradient(state: DilatedState, target: StateVector, h_k) -> float:
    """dJ(0)/dtheta = -<[rho, |t><t| tensor 1_A], i H_k> = -2 Im Tr(rho T H_k)."""
    if target.n_qubits != state.n_system:
        raise ValueError("target acts on the system register only")
    hk_mat = operator_matrix(h_k)
    if hk_mat.shape[0] != state.rho.matrix.shape[0]:
        raise ValueError("direction operator must act on the full composite")
    t_full = target_projector_full(target, state.n_ancilla)
    return _cooling_gradient_raw(state.rho.matrix, t_full, hk_mat)


def _cooling_gradient_raw(rho: np.ndarray, t_full: np.ndarray, hk_mat: np.ndarray) -> float:
    return float(-2.0 * np.trace(rho @ t_full @ hk_mat).imag)


def gradient_via_dilated_hamiltonian(state: DilatedState, target: StateVector, h_k) -> float:
    """Independent path: i Tr(rho [H_k, H_p]) with H_p = 1 - |t><t| tensor 1_A."""
    hk_mat = operator_matrix(h_k)
    hp_mat = dilated_problem_hamiltonian(target, state.n_ancilla).matrix
    comm = hk_mat @ hp_mat - hp_mat @ hk_mat
    return float((1j * np.trace(state.rho.matrix @ comm)).real)


@dataclass(frozen=True)
class CoolingConfig:
    """Adaptive-run configuration extended with the dilation fields."""

    n_system: int
    n_ancilla: int
    target: str = "zero"  # zero | plus | basis:<bits> | random:<seed>
    rho0_system: str = "maximally_mixed"  # maximally_mixed | zero | basis:<bits>
    strategy: RandomizationStrategy = RandomizationStrategy("haar")
    gamma: Union[float, str] = "auto"
    max_steps: int = 1000
    stop: StopRule = StopRule()
    gradient_mode: GradientMode = GradientMode()
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if self.max_steps < 1 or self.trials < 1:
            raise ValueError("max_steps and trials must be >= 1")
        if self.n_system < 1 or self.n_ancilla < 1:
            raise ValueError("need at least one system and one ancilla qubit")
        if self.n_system + self.n_ancilla > MAX_TOTAL_QUBITS:
            raise ValueError(f"composite register capped at {MAX_TOTAL_QUBITS} qubits")
        if self.gradient_mode.kind != "exact":
            raise ValueError("cooling runs support exact gradients only")

    def resolve_target(self) -> StateVector:
        kind, _, arg = self.target.partition(":")
        if kind == "zero":
            return StateVector.computational_basis(self.n_system, 0)
        if kind == "plus":
            return StateVector.uniform_plus(self.n_system)
        if kind == "basis":
            if len(arg) != self.n_system:
                raise ValueError("target bitstring length must equal n_system")
            return StateVector.from_bits(arg)
        if kind == "random":
            from .sampling import random_state

            return random_state(self.n_system, RngStream(int(arg), 0))
        raise ValueError(f"unknown target spec {self.target!r}")

    def resolve_rho0(self) -> np.ndarray:
        d = 2**self.n_system
        kind, _, arg = self.rho0_system.partition(":")
        if kind == "maximally_mixed":
            return np.eye(d, dtype=complex) / d
        if kind == "zero":
            rho = np.zeros((d, d), dtype=complex)
            rho[0, 0] = 1.0
            return rho
        if kind == "basis":
            idx = int(arg, 2)
            rho = np.zeros((d, d), dtype=complex)
            rho[idx, idx] = 1.0
            return rho
        raise ValueError(f"unknown rho0 spec {self.rho0_system!r}")


def cooling_echo(cfg: CoolingConfig) -> dict:
    return {
        "n_system": cfg.n_system,
        "n_ancilla": cfg.n_ancilla,
        "n_qubits": cfg.n_system + cfg.n_ancilla,
        "hamiltonian": f"dilated-projector:{cfg.target}",
        "target": cfg.target,
        "rho0_system": cfg.rho0_system,
        "strategy": {"kind": cfg.strategy.kind},
        "gamma": cfg.gamma,
        "max_steps": cfg.max_steps,
        "gradient_mode": cfg.gradient_mode.describe(),
        "seed": cfg.seed,
        "trials": cfg.trials,
    }


def _sample_cooling_direction(cfg: CoolingConfig, n_total: int, rng: RngStream):
    kind = cfg.strategy.kind
    if kind == "haar":
        v = haar_unitary(n_total, rng)
        return ConjugatedPauli(v, cfg.strategy.resolved_generator(n_total)), \
            f"haar:{matrix_digest(v.matrix)}"
    if kind == "two_design":
        v = two_design_unitary(n_total, cfg.strategy.design, rng)
        return ConjugatedPauli(v, cfg.strategy.resolved_generator(n_total)), \
            f"{cfg.strategy.design.flavor}:{matrix_digest(v.matrix)}"
    p = sample_pool(cfg.strategy.pool, rng)
    return p, f"pool:{p.label}"


def _system_purity(rho: np.ndarray, n_system: int, n_total: int) -> float:
    tensor = rho.reshape([2] * (2 * n_total))
    for _ in range(n_total - n_system):  # trace out trailing ancillas
        half = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=half - 1, axis2=tensor.ndim - 1)
    k = tensor.ndim // 2
    rho_s = tensor.reshape(2**k, 2**k)
    return float(np.trace(rho_s @ rho_s).real)


def cooling_run(cfg: CoolingConfig, trial: int = 0) -> RunTrace:
    """Adaptive cooling of the system register toward a pure target.

    rho_0 = rho_0^S tensor |0...0><0...0|_A; when rho_0 commutes with the
    target projector (e.g. the fully mixed state), one Haar unitary on the
    composite is applied first as the randomizing kick. J = 1 - <t|rho_S|t>
    decreases monotonically in exact mode with gamma = 1/(4 ||H_p||) = 1/4.
    """
    t0 = time.perf_counter()
    n_total = cfg.n_system + cfg.n_ancilla
    if n_total > MAX_TOTAL_QUBITS:
        raise ValueError(f"composite register capped at {MAX_TOTAL_QUBITS} qubits")
    target = cfg.resolve_target()
    t_full = target_projector_full(target, cfg.n_ancilla)
    gamma = cfg.gamma
    if gamma == "auto":
        gamma = 0.25  # projector-form H_p has unit spectral norm
    base = RngStream(cfg.seed, trial)
    kick_rng, dir_rng = base.child(0), base.child(1)

    d_a = 2**cfg.n_ancilla
    rho_a = np.zeros((d_a, d_a), dtype=complex)
    rho_a[0, 0] = 1.0
    rho = np.kron(cfg.resolve_rho0(), rho_a)

    # commuting starts have zero gradient everywhere, so the adaptive loop
    # would never move; one random global unitary breaks the degeneracy.
    # Starting exactly at the target also commutes but needs no escape.
    kicked = False
    j = 1.0 - fidelity_to_target(rho, t_full)
    if j > COMMUTATION_KICK_TOL and \
            np.linalg.norm(rho @ t_full - t_full @ rho) < COMMUTATION_KICK_TOL:
        v = haar_unitary(n_total, kick_rng).matrix
        rho = v @ rho @ v.conj().T
        kicked = True
        j = 1.0 - fidelity_to_target(rho, t_full)
    records = []
    flat_count = 0
    steps = 0
    for k in range(cfg.max_steps):
        h_k, desc = _sample_cooling_direction(cfg, n_total, dir_rng)
        hk_mat = operator_matrix(h_k)
        grad = _cooling_gradient_raw(rho, t_full, hk_mat)
        theta = -gamma * grad if grad != 0.0 else 0.0
        if theta != 0.0:
            w = np.cos(theta) * np.eye(hk_mat.shape[0]) - 1j * np.sin(theta) * hk_mat
            rho = w @ rho @ w.conj().T
        j_new = 1.0 - fidelity_to_target(rho, t_full)
        records.append(StepRecord(
            k=k, gradient=grad, theta=theta, j_before=j, j_after=j_new,
            delta_j=j - j_new, strategy_kind=cfg.strategy.kind,
            sampled_direction=desc, stream_id=base.stream_id,
            gradient_mode="exact",
            purity=_system_purity(rho, cfg.n_system, n_total),
            fidelity=1.0 - j_new,
        ))
        j = j_new
        steps += 1
        if cfg.stop.grad_tol is not None:
            flat_count = flat_count + 1 if abs(grad) < cfg.stop.grad_tol else 0
            if flat_count >= cfg.stop.patience:
                break
        if cfg.stop.alpha_threshold is not None and 1.0 - j >= cfg.stop.alpha_threshold:
            break
    echo = cooling_echo(cfg)
    echo["trial"] = trial
    echo["kick_applied"] = kicked
    return RunTrace(config=echo, records=records, final_j=j, final_alpha=None,
                    final_fidelity=1.0 - j, steps_executed=steps,
                    wall_time=time.perf_counter() - t0)

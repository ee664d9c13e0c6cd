"""Dilated-register cooling: gradient paths, partial-trace consistency,
the randomizing kick, and convergence from the fully mixed state."""

import numpy as np
import pytest

from raqprep.dilation import (
    CoolingConfig,
    DilatedState,
    cooling_gradient,
    cooling_run,
    dilated_problem_hamiltonian,
    gradient_via_dilated_hamiltonian,
    target_projector_full,
)
from raqprep.engine import StopRule
from raqprep.linalg import DensityMatrix, PauliString, StateVector
from raqprep.sampling import RngStream, haar_unitary, random_state

ZERO1 = StateVector.computational_basis(1, 0)


def _dilated_from_pure(amps, n_system, n_ancilla):
    rho = np.outer(amps, amps.conj())
    return DilatedState(n_system, n_ancilla, DensityMatrix(n_system + n_ancilla, rho))


def test_dilated_state_validation():
    rho = DensityMatrix(2, np.eye(4, dtype=complex) / 4)
    DilatedState(1, 1, rho)
    with pytest.raises(ValueError):
        DilatedState(1, 3, DensityMatrix(4, np.eye(16, dtype=complex) / 16))  # > 2 n_system
    with pytest.raises(ValueError):
        DilatedState(2, 1, rho)  # size mismatch


def test_gradient_zero_at_global_optimum():
    rho = np.kron(np.outer(ZERO1.amplitudes, ZERO1.amplitudes.conj()),
                  np.diag([0.3, 0.7]).astype(complex))
    state = DilatedState(1, 1, DensityMatrix(2, rho))
    for label in ("XI", "IX", "YZ", "ZY", "XX"):
        assert abs(cooling_gradient(state, ZERO1, PauliString.from_label(label))) < 1e-12


def test_gradient_zero_at_fully_mixed_composite():
    state = DilatedState(1, 1, DensityMatrix(2, np.eye(4, dtype=complex) / 4))
    for label in ("XI", "IY", "ZZ", "XY", "YX"):
        assert abs(cooling_gradient(state, ZERO1, PauliString.from_label(label))) < 1e-12


def test_gradient_against_finite_difference():
    plus0 = np.kron(np.array([1, 1]) / np.sqrt(2), np.array([1.0, 0.0])).astype(complex)
    state = _dilated_from_pure(plus0, 1, 1)
    h_k = PauliString.from_label("YI")
    g = cooling_gradient(state, ZERO1, h_k)
    t_full = target_projector_full(ZERO1, 1)
    hk = h_k.matrix()

    def j_of(theta):
        w = np.cos(theta) * np.eye(4) - 1j * np.sin(theta) * hk
        rotated = w @ state.rho.matrix @ w.conj().T
        return 1.0 - np.trace(rotated @ t_full).real

    h = 1e-5
    fd = (j_of(h) - j_of(-h)) / (2 * h)
    assert abs(g - fd) < 1e-6


def test_gradient_two_path_agreement_random_composites():
    rng = RngStream(50, 0)
    for i, (n_s, n_a) in enumerate([(1, 1), (1, 2), (2, 1), (2, 2)]):
        n = n_s + n_a
        psi = random_state(n, rng.child(3 * i))
        state = _dilated_from_pure(psi.amplitudes, n_s, n_a)
        target = random_state(n_s, rng.child(3 * i + 1))
        from raqprep.linalg import ConjugatedPauli

        h_k = ConjugatedPauli(haar_unitary(n, rng.child(3 * i + 2)),
                              PauliString.single("X", 0, n))
        g1 = cooling_gradient(state, target, h_k)
        g2 = gradient_via_dilated_hamiltonian(state, target, h_k)
        assert abs(g1 - g2) < 1e-10


def test_cost_equals_partial_trace_path():
    rng = RngStream(51, 0)
    psi = random_state(3, rng.child(0))
    state = _dilated_from_pure(psi.amplitudes, 2, 1)
    target = random_state(2, rng.child(1))
    t_full = target_projector_full(target, 1)
    j_composite = 1.0 - np.trace(state.rho.matrix @ t_full).real
    rho_s = state.system_state()
    j_reduced = 1.0 - float(np.real(
        target.amplitudes.conj() @ rho_s.matrix @ target.amplitudes))
    assert abs(j_composite - j_reduced) < 1e-12


def test_dilated_hamiltonian_spectrum():
    h_p = dilated_problem_hamiltonian(ZERO1, 1)
    assert h_p.spectral_norm == pytest.approx(1.0, abs=1e-12)
    assert h_p.ground_energy == pytest.approx(0.0, abs=1e-12)


def test_cooling_stationary_at_target_without_kick():
    # starting exactly at the target: no kick, zero gradients, J stays 0
    cfg = CoolingConfig(1, 1, target="zero", rho0_system="zero", max_steps=10, seed=3)
    trace = cooling_run(cfg, trial=0)
    assert trace.config["kick_applied"] is False
    assert all(abs(r.gradient) < 1e-12 for r in trace.records)
    assert trace.final_j == pytest.approx(0.0, abs=1e-12)


def test_cooling_no_kick_for_noncommuting_start():
    cfg = CoolingConfig(1, 1, target="plus", rho0_system="zero", max_steps=5, seed=4)
    trace = cooling_run(cfg, trial=0)
    assert trace.config["kick_applied"] is False


def test_cooling_kick_fires_for_fully_mixed():
    cfg = CoolingConfig(1, 1, target="zero", max_steps=5, seed=5)
    trace = cooling_run(cfg, trial=0)
    assert trace.config["kick_applied"] is True


def test_cooling_monotone_and_convergent():
    cfg = CoolingConfig(1, 1, target="zero", max_steps=2000, seed=6,
                        stop=StopRule(alpha_threshold=0.999))
    converged = 0
    for trial in range(15):
        trace = cooling_run(cfg, trial=trial)
        assert min(r.delta_j for r in trace.records) >= -1e-12
        converged += trace.final_fidelity >= 0.99
    assert converged >= 14


def test_cooling_purity_approaches_one_when_converged():
    cfg = CoolingConfig(1, 1, target="zero", max_steps=2000, seed=7,
                        stop=StopRule(alpha_threshold=0.999))
    trace = cooling_run(cfg, trial=0)
    assert trace.final_fidelity >= 0.99
    assert trace.records[-1].purity >= 0.98


def test_cooling_records_carry_purity_and_fidelity():
    cfg = CoolingConfig(1, 1, target="zero", max_steps=5, seed=8)
    trace = cooling_run(cfg, trial=0)
    for rec in trace.records:
        assert rec.purity is not None and rec.fidelity is not None
        d = rec.to_json_dict()
        assert {"k", "J_before", "J_after", "gradient", "theta",
                "strategy", "stream_id", "purity", "fidelity"} <= set(d)


def test_cooling_determinism():
    cfg = CoolingConfig(1, 2, target="plus", max_steps=50, seed=9)
    t1 = cooling_run(cfg, trial=1)
    t2 = cooling_run(cfg, trial=1)
    assert t1.records == t2.records


def test_cooling_config_validation():
    with pytest.raises(ValueError):
        CoolingConfig(4, 8, max_steps=10)  # 12 total > cap
    with pytest.raises(ValueError):
        CoolingConfig(1, 1, target="bogus", max_steps=10).resolve_target()

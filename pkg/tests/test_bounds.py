"""Inequality and identity checks: Lipschitz constant, per-step bound,
step-count bound, 2-design expected improvement, second-moment identity,
pool-average bound."""

import math

import numpy as np
import pytest

from raqprep import hamiltonians as ham
from raqprep.bounds import (
    BoundReport,
    check_step_bound,
    empirical_gradient_slope,
    lipschitz_constant,
    m_upper_bound,
    pool_average_bound,
    second_moment_identity_value,
    two_design_expected_bound,
    verify_two_design_bound_mc,
)
from raqprep.engine import RandomizationStrategy, RunConfig, run, step
from raqprep.linalg import ConjugatedPauli, PauliString, StateVector
from raqprep.sampling import RngStream, TwoDesignConfig, full_pauli_pool, haar_unitary, random_state

Z1 = ham.from_diagonal([1.0, -1.0])
PLUS = StateVector.uniform_plus(1)
X, Y, Z = (PauliString.from_label(l) for l in "XYZ")


def test_lipschitz_constant_values():
    assert lipschitz_constant(Z1, X) == 4.0
    k4 = ham.ising_from_graph(ham.Graph.complete(4))
    assert lipschitz_constant(k4, PauliString.single("X", 0, 4)) == 24.0


def test_lipschitz_dominates_sampled_slopes():
    # Y on |+> produces the steepest nontrivial J(theta) = -sin(2 theta)
    slope = empirical_gradient_slope(PLUS, Y, Z1, pairs=1000, rng=RngStream(1, 0))
    assert 0.5 < slope <= 4.0
    rng = RngStream(2, 0)
    for n in (2, 3):
        h_p = ham.ising_from_graph(ham.Graph.complete(n))
        state = random_state(n, rng.child(n))
        h_k = ConjugatedPauli(haar_unitary(n, rng.child(10 + n)), PauliString.single("X", 0, n))
        lf = lipschitz_constant(h_p, h_k.base)
        slope = empirical_gradient_slope(state, h_k, h_p, pairs=1000, rng=rng.child(20 + n))
        assert slope <= lf + 1e-9


def test_step_bound_closed_form_example():
    cfg = RunConfig(1, "diagonal:1,-1", RandomizationStrategy("pool", pool=(Y,)), max_steps=1)
    _, rec = step(PLUS, cfg, RngStream(0, 0))
    report = check_step_bound(rec, Z1)
    assert report.satisfied
    assert report.lhs == pytest.approx(math.sin(1.0), abs=1e-12)
    assert report.rhs == pytest.approx(0.5, abs=1e-12)


def test_step_bound_zero_gradient():
    cfg = RunConfig(1, "diagonal:1,-1", RandomizationStrategy("pool", pool=(Z,)), max_steps=1)
    _, rec = step(PLUS, cfg, RngStream(0, 0))
    report = check_step_bound(rec, Z1)
    assert report.satisfied and report.lhs == 0.0 and report.rhs == 0.0


def test_step_bound_full_run_sweep():
    cfg = RunConfig(4, "ising:complete:4", RandomizationStrategy("haar"),
                    max_steps=2000, seed=12)
    h_p = ham.hamiltonian_from_spec(cfg.hamiltonian, 4)
    trace = run(cfg, trial=0)
    reports = [check_step_bound(rec, h_p) for rec in trace.records]
    assert all(r.satisfied for r in reports)


def test_step_bound_rejects_shot_records():
    from raqprep.engine import GradientMode

    cfg = RunConfig(1, "diagonal:1,-1", RandomizationStrategy("pool", pool=(Y,)),
                    max_steps=1, gradient_mode=GradientMode.parse("shots:100"))
    _, rec = step(PLUS, cfg, RngStream(0, 0))
    with pytest.raises(ValueError):
        check_step_bound(rec, Z1)


def test_m_bound_single_step_closed_form():
    cfg = RunConfig(1, "diagonal:1,-1", RandomizationStrategy("pool", pool=(Y,)), max_steps=1)
    trace = run(cfg, trial=0, initial_state=PLUS)
    report = m_upper_bound(trace, epsilon=1.0 - math.sin(1.0))
    assert report.satisfied and not report.inconclusive
    # C_eps = 8 * sin(1), min gradient^2 = 4 -> bound = 2 sin(1) >= M = 1
    assert report.lhs == pytest.approx(2 * math.sin(1.0), abs=1e-9)
    assert report.rhs == 1.0


def test_m_bound_run_sweep():
    cfg = RunConfig(2, "ising:complete:2", RandomizationStrategy("haar"),
                    max_steps=2000, seed=13)
    for trial in range(20):
        report = m_upper_bound(run(cfg, trial=trial), epsilon=0.01)
        assert not report.inconclusive
        assert report.satisfied


def test_m_bound_inconclusive_cases():
    # never reaches epsilon: all directions commute with H_p
    pool = (PauliString.from_label("ZZ"),)
    cfg = RunConfig(2, "ising:complete:2", RandomizationStrategy("pool", pool=pool),
                    max_steps=20, seed=14)
    report = m_upper_bound(run(cfg, trial=0), epsilon=0.01)
    assert report.inconclusive
    # reaches epsilon immediately with an all-zero gradient path: vacuous bound
    cfg = RunConfig(2, "ising:complete:2", RandomizationStrategy("pool", pool=pool),
                    max_steps=5, seed=14)
    ground = StateVector.from_bits("01")
    report = m_upper_bound(run(cfg, trial=0, initial_state=ground), epsilon=0.01)
    assert report.inconclusive and report.satisfied


def test_two_design_expected_bound_values():
    assert two_design_expected_bound(X, Z1, PLUS) == pytest.approx(1 / 6, abs=1e-12)
    eigen = StateVector.computational_basis(1, 0)
    assert two_design_expected_bound(X, Z1, eigen) == pytest.approx(0.0, abs=1e-12)
    zz = ham.ising_from_graph(ham.Graph.complete(2))
    plus2 = StateVector.uniform_plus(2)
    assert two_design_expected_bound(PauliString.single("X", 0, 2), zz, plus2) == \
        pytest.approx(1 / 15, abs=1e-12)


def test_two_design_bound_validates_generator():
    with pytest.raises(ValueError):
        two_design_expected_bound(PauliString.from_label("I"), Z1, PLUS)
    with pytest.raises(ValueError):
        two_design_expected_bound(PauliString.from_label("X", coefficient=2.0), Z1, PLUS)


def test_second_moment_identity_value():
    assert second_moment_identity_value(X, Z1, PLUS) == pytest.approx(4 / 3, abs=1e-12)


@pytest.mark.parametrize("flavor", ["haar", "clifford"])
def test_mc_bound_and_identity_n1(flavor):
    imp, ident = verify_two_design_bound_mc(X, Z1, PLUS, 10_000, flavor, RngStream(20, 0))
    assert imp.satisfied and imp.lhs >= 1 / 6
    assert ident.satisfied
    assert ident.rhs == pytest.approx(4 / 3, abs=1e-12)


def test_mc_identity_all_sizes_and_flavors():
    # exact flavors at n in {1,2,3}; brickwork included as layers=3 at n<=2
    cases = []
    for n in (1, 2, 3):
        h = PauliString.single("X", 0, n)
        h_p = Z1 if n == 1 else ham.ising_from_graph(ham.Graph.complete(n))
        state = StateVector.uniform_plus(n)
        flavors = ["haar", "clifford"]
        if n <= 2:
            flavors.append(TwoDesignConfig("brickwork", layers=3))
        for flavor in flavors:
            cases.append((n, h, h_p, state, flavor))
    for i, (n, h, h_p, state, flavor) in enumerate(cases):
        imp, ident = verify_two_design_bound_mc(h, h_p, state, 10_000, flavor,
                                                RngStream(30 + i, 0))
        assert ident.satisfied, (n, flavor, ident)
        assert imp.satisfied, (n, flavor, imp)


def test_mc_eigenstate_gives_zero_moment():
    eigen = StateVector.computational_basis(1, 0)
    imp, ident = verify_two_design_bound_mc(X, Z1, eigen, 2000, "haar", RngStream(40, 0))
    assert ident.lhs == pytest.approx(0.0, abs=1e-20)
    assert imp.rhs == pytest.approx(0.0, abs=1e-15)


def test_pool_average_closed_form():
    report = pool_average_bound((X, Y, Z), PLUS, Z1)
    assert report.satisfied
    assert report.lhs == pytest.approx(math.sin(1.0) / 3, abs=1e-12)
    assert report.rhs == pytest.approx(1 / 6, abs=1e-12)


def test_pool_average_commuting_element():
    report = pool_average_bound((Z,), PLUS, Z1)
    assert report.satisfied and report.lhs == 0.0 and report.rhs == 0.0


def test_pool_average_full_pool_random_states():
    zz = ham.ising_from_graph(ham.Graph.complete(2))
    pool = full_pauli_pool(2)
    rng = RngStream(41, 0)
    for i in range(20):
        report = pool_average_bound(pool, random_state(2, rng.child(i)), zz)
        assert report.satisfied, report


def test_bound_report_serialization():
    report = BoundReport("demo", 1.0, 0.5, True, 0.5, sample_count=10)
    data = report.to_dict()
    assert data["bound_name"] == "demo" and data["satisfied"] is True
    assert "lhs" in report.to_json()

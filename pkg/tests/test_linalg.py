"""Core linear algebra: Pauli rotations, dense application, expectations,
commutator expectations (two paths), partial trace, spectral norms."""

import numpy as np
import pytest

from raqprep.linalg import (
    ConjugatedPauli,
    DenseOperator,
    DensityMatrix,
    PauliString,
    StateVector,
    apply_dense,
    apply_pauli_rotation,
    commutator_expectation,
    commutator_expectation_naive,
    expectation,
    partial_trace,
    spectral_norm,
)
from raqprep.sampling import RngStream, haar_unitary, random_state

HADAMARD = DenseOperator(1, np.array([[1, 1], [1, -1]]) / np.sqrt(2), unitary_flag=True)


def test_statevector_validation():
    with pytest.raises(ValueError):
        StateVector(1, np.array([1.0, 1.0]))  # unnormalized
    with pytest.raises(ValueError):
        StateVector(2, np.array([1.0, 0.0]))  # wrong length
    s = StateVector.from_bits("01")
    assert s.amplitudes[1] == 1.0


def test_pauli_string_basics():
    p = PauliString.from_label("XIZ")
    assert p.weight == 2 and not p.is_identity
    assert PauliString.from_label("II").is_identity
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")
    # squares to coefficient^2 * identity
    m = PauliString.from_label("XY", coefficient=3.0).matrix()
    assert np.allclose(m @ m, 9.0 * np.eye(4))
    # traceless unless identity
    assert abs(np.trace(PauliString.from_label("ZXY").matrix())) == 0.0
    assert np.trace(PauliString.from_label("II").matrix()) == 4.0


def test_rotation_at_zero_angle_is_identity():
    s = StateVector.computational_basis(1, 0)
    out = apply_pauli_rotation(s, PauliString.from_label("Z"), 0.0)
    assert np.array_equal(out.amplitudes, s.amplitudes)


def test_rotation_x_half_pi():
    # e^{-i pi/2 X}|0> = cos(pi/2)|0> - i sin(pi/2) X|0> = -i|1>
    s = StateVector.computational_basis(1, 0)
    out = apply_pauli_rotation(s, PauliString.from_label("X"), np.pi / 2)
    assert np.allclose(out.amplitudes, [0.0, -1.0j], atol=1e-12)


def test_rotation_y_on_plus_gives_minus_sin():
    # <Z> after e^{-i theta Y} on |+> is -sin(2 theta)
    s = StateVector.uniform_plus(1)
    out = apply_pauli_rotation(s, PauliString.from_label("Y"), 0.5)
    z = PauliString.from_label("Z")
    assert abs(expectation(out, z) + np.sin(1.0)) < 1e-12


def test_rotation_requires_unit_coefficient_and_matching_size():
    s = StateVector.uniform_plus(1)
    with pytest.raises(ValueError):
        apply_pauli_rotation(s, PauliString.from_label("X", coefficient=2.0), 0.3)
    with pytest.raises(ValueError):
        apply_pauli_rotation(s, PauliString.from_label("XX"), 0.3)


def test_rotation_composition():
    rng = RngStream(7, 0)
    s = random_state(3, rng)
    p = PauliString.from_label("XZY")
    a, b = 0.37, -1.21
    once = apply_pauli_rotation(apply_pauli_rotation(s, p, a), p, b)
    combined = apply_pauli_rotation(s, p, a + b)
    assert np.max(np.abs(once.amplitudes - combined.amplitudes)) < 1e-10


def test_rotation_matches_dense_exponential():
    expm = pytest.importorskip("scipy.linalg").expm
    rng = RngStream(11, 0)
    for n, label in ((1, "Y"), (2, "XZ"), (3, "ZIY")):
        s = random_state(n, rng.child(n))
        p = PauliString.from_label(label)
        theta = 0.813
        fast = apply_pauli_rotation(s, p, theta).amplitudes
        dense = expm(-1j * theta * p.matrix()) @ s.amplitudes
        assert np.max(np.abs(fast - dense)) < 1e-10


def test_apply_dense():
    s = StateVector.computational_basis(1, 0)
    out = apply_dense(s, HADAMARD)
    assert np.allclose(out.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])
    v = haar_unitary(3, RngStream(3, 0))
    out = apply_dense(random_state(3, RngStream(4, 0)), v)
    assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-10
    with pytest.raises(ValueError):
        apply_dense(s, DenseOperator(1, np.array([[1, 0], [0, 0]])))  # not unitary-flagged


def test_norm_preserved_over_many_applications():
    rng = RngStream(99, 0)
    gen = rng.gen
    amps = random_state(3, rng).amplitudes
    s = StateVector(3, amps)
    labels = ["XII", "IYI", "IIZ", "XYZ", "ZZX"]
    for i in range(10_000):
        p = PauliString.from_label(labels[i % len(labels)])
        s = apply_pauli_rotation(s, p, float(gen.uniform(-1, 1)))
    assert abs(np.linalg.norm(s.amplitudes) - 1.0) < 1e-9


def test_expectation_examples():
    z = PauliString.from_label("Z")
    assert expectation(StateVector.computational_basis(1, 0), z) == 1.0
    assert abs(expectation(StateVector.uniform_plus(1), z)) < 1e-12
    zz = PauliString.from_label("ZZ")
    assert expectation(StateVector.from_bits("01"), zz) == -1.0
    # sums of Pauli strings
    total = expectation(StateVector.from_bits("01"),
                        [PauliString.from_label("ZI"), PauliString.from_label("IZ")])
    assert abs(total) < 1e-12


def test_expectation_rejects_non_hermitian():
    s = StateVector.computational_basis(1, 0)
    with pytest.raises(ValueError):
        expectation(s, DenseOperator(1, np.array([[0, 1], [0, 0]], dtype=complex)))


def test_commutator_expectation_examples():
    y, z, x = (PauliString.from_label(l) for l in "YZX")
    plus = StateVector.uniform_plus(1)
    zero = StateVector.computational_basis(1, 0)
    assert abs(commutator_expectation(plus, y, z) + 2.0) < 1e-12
    assert abs(commutator_expectation(zero, y, z)) < 1e-12
    assert abs(commutator_expectation(zero, x, z)) < 1e-12


def test_commutator_two_paths_and_antisymmetry():
    rng = RngStream(5, 0)
    for n in (1, 2, 3):
        s = random_state(n, rng.child(n))
        a = ConjugatedPauli(haar_unitary(n, rng.child(10 + n)), PauliString.single("X", 0, n))
        b = PauliString.single("Z", n - 1, n)
        fast = commutator_expectation(s, a, b)
        naive = commutator_expectation_naive(s, a, b)
        assert abs(fast - naive) < 1e-12
        assert commutator_expectation(s, b, a) == -fast  # exact antisymmetry


def test_partial_trace_product_state():
    rho = StateVector.from_bits("00").density_matrix()
    reduced = partial_trace(rho, keep={0})
    assert np.allclose(reduced.matrix, [[1, 0], [0, 0]])


def test_partial_trace_bell_state():
    bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    reduced = partial_trace(bell.density_matrix(), keep={0})
    assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_separable_factor():
    rng = RngStream(21, 0)
    rho_s = random_state(2, rng.child(0)).density_matrix().matrix
    rho_a = random_state(1, rng.child(1)).density_matrix().matrix
    joint = DensityMatrix(3, np.kron(rho_s, rho_a))
    reduced = partial_trace(joint, keep={0, 1})
    assert np.max(np.abs(reduced.matrix - rho_s)) < 1e-12


def test_partial_trace_random_properties():
    rng = RngStream(22, 0)
    for i in range(5):
        rho = random_state(3, rng.child(i)).density_matrix()
        reduced = partial_trace(rho, keep={1, 2})
        assert abs(np.trace(reduced.matrix) - 1.0) < 1e-10
        assert np.max(np.abs(reduced.matrix - reduced.matrix.conj().T)) < 1e-10


def test_partial_trace_rejects_bad_keep():
    rho = StateVector.from_bits("00").density_matrix()
    with pytest.raises(ValueError):
        partial_trace(rho, keep=set())
    with pytest.raises(ValueError):
        partial_trace(rho, keep={5})


def test_spectral_norms():
    assert spectral_norm(PauliString.from_label("XI")) == 1.0
    assert spectral_norm(PauliString.from_label("ZZ", coefficient=-2.5)) == 2.5
    h = DenseOperator(1, np.diag([3.0, -7.0]).astype(complex))
    assert spectral_norm(h) == 7.0


def test_spectral_norm_unitary_invariance():
    rng = RngStream(31, 0)
    h = DenseOperator(2, PauliString.from_label("ZZ").matrix()
                      + 0.4 * PauliString.from_label("XI").matrix())
    base = spectral_norm(h)
    for i in range(5):
        v = haar_unitary(2, rng.child(i)).matrix
        conj = DenseOperator(2, v.conj().T @ h.matrix @ v)
        assert abs(spectral_norm(conj) - base) < 1e-8


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(1, np.array([[0.5, 0.1j], [0.2j, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        DensityMatrix(1, np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        DensityMatrix(1, np.diag([1.5, -0.5]).astype(complex))  # negative eigenvalue


def test_dense_operator_unitarity_check():
    with pytest.raises(ValueError):
        DenseOperator(1, np.array([[1, 1], [0, 1]], dtype=complex), unitary_flag=True)


def test_qubit_cap():
    with pytest.raises(ValueError):
        StateVector(13, np.zeros(2**13))
    with pytest.raises(ValueError):
        PauliString.from_label("X" * 13)

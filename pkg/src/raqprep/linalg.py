"""Dense complex linear algebra for small qubit registers.

Statevectors, density matrices, Pauli strings, dense operators, operator
application, expectations, commutator expectations, and partial traces.
Everything is plain numpy complex128, capped at MAX_QUBITS = 12.

Index convention: qubit 0 is the leftmost tensor factor, so for a basis
state index b the bit addressing qubit q is ``(b >> (n - 1 - q)) & 1``.
All values are immutable after construction; functions return fresh objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 12
NORM_TOL = 1e-10
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-9

PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def qubit_bit(index: int, qubit: int, n_qubits: int) -> int:
    """Bit of basis-state `index` addressing `qubit` (qubit 0 = leftmost factor)."""
    return (index >> (n_qubits - 1 - qubit)) & 1


def _check_n_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def _bit_parity(values: np.ndarray) -> np.ndarray:
    """Parity of the set bits of each entry (entries < 2^16)."""
    v = values.copy()
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state over `n_qubits` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude vector must have length 2^{self.n_qubits}, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def computational_basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        """Basis state from a bitstring, e.g. '01' -> |01>."""
        return cls.computational_basis(len(bits), int(bits, 2))

    @classmethod
    def uniform_plus(cls, n_qubits: int) -> "StateVector":
        d = 2**n_qubits
        return cls(n_qubits, np.full(d, 1 / np.sqrt(d), dtype=complex))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix over `n_qubits` qubits."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        m = np.asarray(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise ValueError(f"density matrix must be {d}x{d}, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        tr = np.trace(m)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {tr!r} deviates from 1")
        if np.linalg.eigvalsh(m).min() < -POSITIVITY_TOL:
            raise ValueError("density matrix has an eigenvalue below the positivity tolerance")
        object.__setattr__(self, "matrix", m)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a real coefficient.

    Squares to coefficient^2 * identity, is traceless unless all factors are
    I, and has spectral norm |coefficient|.
    """

    n_qubits: int
    factors: tuple
    coefficient: float = 1.0

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        factors = tuple(self.factors)
        if len(factors) != self.n_qubits:
            raise ValueError("factor count must equal qubit count")
        for f in factors:
            if f not in PAULI_MATS:
                raise ValueError(f"unknown Pauli factor {f!r}")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def from_label(cls, label: str, coefficient: float = 1.0) -> "PauliString":
        return cls(len(label), tuple(label), coefficient)

    @classmethod
    def single(cls, letter: str, qubit: int, n_qubits: int, coefficient: float = 1.0) -> "PauliString":
        factors = ["I"] * n_qubits
        factors[qubit] = letter
        return cls(n_qubits, tuple(factors), coefficient)

    @property
    def label(self) -> str:
        return "".join(self.factors)

    @property
    def weight(self) -> int:
        return sum(1 for f in self.factors if f != "I")

    @property
    def is_identity(self) -> bool:
        return self.weight == 0

    def masks(self) -> tuple:
        """(xmask, zmask, y_count) in basis-index bit positions."""
        xmask = zmask = y_count = 0
        n = self.n_qubits
        for q, f in enumerate(self.factors):
            bit = 1 << (n - 1 - q)
            if f in ("X", "Y"):
                xmask |= bit
            if f in ("Z", "Y"):
                zmask |= bit
            if f == "Y":
                y_count += 1
        return xmask, zmask, y_count

    def matrix(self) -> np.ndarray:
        out = np.array([[self.coefficient]], dtype=complex)
        for f in self.factors:
            out = np.kron(out, PAULI_MATS[f])
        return out


@dataclass(frozen=True)
class DenseOperator:
    """Dense 2^n x 2^n operator; `unitary_flag` asserts and checks unitarity."""

    n_qubits: int
    matrix: np.ndarray
    unitary_flag: bool = False

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        m = np.asarray(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if m.shape != (d, d):
            raise ValueError(f"operator must be {d}x{d}, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        if self.unitary_flag:
            self._check_unitary()

    def _check_unitary(self):
        m = self.matrix
        d = m.shape[0]
        if d <= 64:
            err = np.max(np.abs(m.conj().T @ m - np.eye(d)))
        else:
            # spot-check on a spread of basis columns; full product is O(d^3)
            cols = np.linspace(0, d - 1, 8, dtype=int)
            block = m[:, cols]
            err = np.max(np.abs(m.conj().T @ block - np.eye(d)[:, cols]))
        if err > NORM_TOL:
            raise ValueError(f"unitary_flag set but M^dag M deviates from identity by {err:.3e}")


@dataclass(frozen=True)
class ConjugatedPauli:
    """Hermitian operator V^dag P V: a Pauli generator conjugated by a unitary.

    Applied factored (V, then P or its rotation, then V^dag); the dense matrix
    is only materialized on request.
    """

    v: DenseOperator
    base: PauliString

    def __post_init__(self):
        if self.v.n_qubits != self.base.n_qubits:
            raise ValueError("conjugating unitary and base Pauli disagree on qubit count")
        if not self.v.unitary_flag:
            raise ValueError("conjugation requires a unitary DenseOperator")

    @property
    def n_qubits(self) -> int:
        return self.base.n_qubits

    @property
    def coefficient(self) -> float:
        return self.base.coefficient

    def matrix(self) -> np.ndarray:
        vm = self.v.matrix
        return vm.conj().T @ self.base.matrix() @ vm


Operator = Union[PauliString, DenseOperator, ConjugatedPauli]


# ---------------------------------------------------------------------------
# raw-array kernels (shared by the public operations and the engine hot loops)
# ---------------------------------------------------------------------------

def apply_pauli_raw(p: PauliString, amps: np.ndarray) -> np.ndarray:
    """P |psi> on a raw amplitude array (vectors or column-stacked matrices)."""
    xmask, zmask, y_count = p.masks()
    idx = np.arange(amps.shape[0])
    sign = 1.0 - 2.0 * _bit_parity(idx & zmask)
    scale = (p.coefficient * (1j**y_count)) * sign
    out = np.empty_like(amps)
    out[idx ^ xmask] = (scale * amps.T).T if amps.ndim > 1 else scale * amps
    return out


def rotate_pauli_raw(p: PauliString, theta: float, amps: np.ndarray) -> np.ndarray:
    """e^{-i theta P} |psi> via the closed form cos(theta) I - i sin(theta) P."""
    if theta == 0.0:
        return amps.copy()
    return np.cos(theta) * amps - 1j * np.sin(theta) * apply_pauli_raw(p, amps)


def apply_operator_raw(op: Operator, amps: np.ndarray) -> np.ndarray:
    if isinstance(op, PauliString):
        return apply_pauli_raw(op, amps)
    if isinstance(op, DenseOperator):
        return op.matrix @ amps
    if isinstance(op, ConjugatedPauli):
        vm = op.v.matrix
        return vm.conj().T @ apply_pauli_raw(op.base, vm @ amps)
    raise TypeError(f"unsupported operator type {type(op).__name__}")


def rotate_operator_raw(op: Operator, theta: float, amps: np.ndarray) -> np.ndarray:
    """e^{-i theta op} |psi> without ever forming a dense matrix exponential.

    Pauli generators use the closed form; conjugated Paulis factor through
    V^dag e^{-i theta P} V; general Hermitian dense generators go through the
    (slow) eigendecomposition path.
    """
    if isinstance(op, PauliString):
        return rotate_pauli_raw(op, theta, amps)
    if isinstance(op, ConjugatedPauli):
        vm = op.v.matrix
        return vm.conj().T @ rotate_pauli_raw(op.base, theta, vm @ amps)
    if isinstance(op, DenseOperator):
        _require_hermitian(op.matrix)
        evals, evecs = np.linalg.eigh(op.matrix)
        return evecs @ (np.exp(-1j * theta * evals) * (evecs.conj().T @ amps))
    raise TypeError(f"unsupported operator type {type(op).__name__}")


def operator_matrix(op) -> np.ndarray:
    """Dense matrix of an operator (PauliString, DenseOperator, ConjugatedPauli, or list sum)."""
    if isinstance(op, (PauliString, ConjugatedPauli)):
        return op.matrix()
    if isinstance(op, DenseOperator):
        return op.matrix
    if isinstance(op, (list, tuple)):
        return sum(term.matrix() for term in op)
    raise TypeError(f"unsupported operator type {type(op).__name__}")


def operator_n_qubits(op) -> int:
    if isinstance(op, (list, tuple)):
        if not op:
            raise ValueError("empty operator sum")
        return op[0].n_qubits
    return op.n_qubits


def _require_hermitian(matrix: np.ndarray) -> None:
    if np.max(np.abs(matrix - matrix.conj().T)) > HERMITICITY_TOL:
        raise ValueError("operator is not Hermitian within tolerance")


def _check_dims(state: StateVector, op) -> None:
    if operator_n_qubits(op) != state.n_qubits:
        raise ValueError(
            f"operator acts on {operator_n_qubits(op)} qubits but state has {state.n_qubits}"
        )


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def apply_pauli_rotation(state: StateVector, p: PauliString, theta: float) -> StateVector:
    """e^{-i theta P} |state> for a unit-coefficient Pauli string P."""
    _check_dims(state, p)
    if p.coefficient != 1.0:
        raise ValueError("rotation generator must have coefficient 1")
    return StateVector(state.n_qubits, rotate_pauli_raw(p, theta, state.amplitudes))


def apply_dense(state: StateVector, u: DenseOperator) -> StateVector:
    """U |state> for a dense unitary."""
    _check_dims(state, u)
    if not u.unitary_flag:
        raise ValueError("apply_dense requires unitary_flag")
    return StateVector(state.n_qubits, u.matrix @ state.amplitudes)


def expectation(state: StateVector, h) -> float:
    """<psi|H|psi> for a Hermitian operator (Pauli string, sum of them, or dense)."""
    _check_dims(state, h)
    if isinstance(h, (list, tuple)):
        return sum(expectation(state, term) for term in h)
    if isinstance(h, DenseOperator):
        _require_hermitian(h.matrix)
    raw = np.vdot(state.amplitudes, apply_operator_raw(h, state.amplitudes))
    return float(raw.real)


def commutator_expectation(state: StateVector, a, b) -> float:
    """i <psi|[A, B]|psi> for Hermitian A, B; equals -2 Im <psi|A B|psi>."""
    _check_dims(state, a)
    _check_dims(state, b)
    a_psi = apply_operator_raw(a, state.amplitudes)
    b_psi = apply_operator_raw(b, state.amplitudes)
    return float(-2.0 * np.vdot(a_psi, b_psi).imag)


def commutator_expectation_naive(state: StateVector, a, b) -> float:
    """Independent path: i(<AB> - <BA>) from two separate inner products."""
    psi = state.amplitudes
    ab = np.vdot(psi, apply_operator_raw(a, apply_operator_raw(b, psi)))
    ba = np.vdot(psi, apply_operator_raw(b, apply_operator_raw(a, psi)))
    return float((1j * (ab - ba)).real)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out all qubits not in `keep`; kept qubits stay in ascending order."""
    keep_sorted = sorted(set(keep))
    n = rho.n_qubits
    if not keep_sorted:
        raise ValueError("keep set must be nonempty")
    if keep_sorted[0] < 0 or keep_sorted[-1] >= n:
        raise ValueError(f"keep indices out of range for {n} qubits: {keep_sorted}")
    traced = [q for q in range(n) if q not in keep_sorted]
    tensor = rho.matrix.reshape([2] * (2 * n))
    for offset, q in enumerate(traced):
        ax = q - offset  # axes shift left after each trace
        tensor = np.trace(tensor, axis1=ax, axis2=ax + n - offset)
    k = len(keep_sorted)
    return DensityMatrix(k, tensor.reshape(2**k, 2**k))


def spectral_norm(h) -> float:
    """Largest singular value of a Hermitian operator.

    Pauli strings and conjugated Paulis resolve to |coefficient|; diagonal
    problem Hamiltonians to max |diagonal|; dense operators go through an
    eigendecomposition. Objects caching their own norm (ProblemHamiltonian)
    are honored.
    """
    cached = getattr(h, "spectral_norm", None)
    if isinstance(cached, float):
        return cached
    if isinstance(h, (PauliString, ConjugatedPauli)):
        return abs(h.coefficient)
    if isinstance(h, DenseOperator):
        _require_hermitian(h.matrix)
        return float(np.max(np.abs(np.linalg.eigvalsh(h.matrix))))
    if isinstance(h, (list, tuple)):
        m = operator_matrix(h)
        _require_hermitian(m)
        return float(np.max(np.abs(np.linalg.eigvalsh(m))))
    raise TypeError(f"unsupported operator type {type(h).__name__}")


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out

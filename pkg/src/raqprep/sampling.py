"""All sources of randomness: seeded/derived PRNG streams, Haar-random
unitaries, unitary 2-designs (uniform Cliffords and brickwork circuits),
Haar-random states, uniform pool draws, and random regular graphs.

Streams are derived from a 64-bit master seed and a stream id through a
splitmix-style hash, so distinct trials get reproducible, statistically
independent generators.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .hamiltonians import Graph
from .linalg import DenseOperator, PauliString, StateVector, kron_all

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 scrambling round (a 64-bit bijection)."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _stream_key(seed: int, stream_id: int) -> int:
    return splitmix64((splitmix64(seed) + stream_id) & _MASK64)


@dataclass
class RngStream:
    """Reproducible PRNG stream addressed by (master seed, stream id)."""

    seed: int
    stream_id: int
    _gen: Optional[np.random.Generator] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            self._gen = np.random.Generator(np.random.PCG64(_stream_key(self.seed, self.stream_id)))
        return self._gen

    def child(self, tag: int) -> "RngStream":
        """Derived substream; same master seed, hashed stream id."""
        derived = splitmix64((self.stream_id * _GOLDEN + tag + 1) & _MASK64)
        return RngStream(self.seed, derived)


def matrix_digest(matrix: np.ndarray) -> str:
    """Short stable hash of a matrix, for trace records."""
    return hashlib.sha1(np.ascontiguousarray(matrix).tobytes()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Haar measure
# ---------------------------------------------------------------------------

def _haar_matrix(dim: int, gen: np.random.Generator) -> np.ndarray:
    """QR of a complex Ginibre matrix with the R-diagonal phase correction."""
    z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_unitary(n_qubits: int, rng: RngStream) -> DenseOperator:
    """Haar-distributed unitary on n qubits (exact, not QR-biased)."""
    return DenseOperator(n_qubits, _haar_matrix(2**n_qubits, rng.gen), unitary_flag=True)


def random_state(n_qubits: int, rng: RngStream) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    d = 2**n_qubits
    v = rng.gen.standard_normal(d) + 1j * rng.gen.standard_normal(d)
    return StateVector(n_qubits, v / np.linalg.norm(v))


# ---------------------------------------------------------------------------
# uniform random Cliffords via canonical symplectic-group indexing
# ---------------------------------------------------------------------------
# Binary symplectic vectors over F_2^{2n} are packed into plain ints with
# (x_q, z_q) at bits (2q, 2q+1); the group element is built from transvections,
# and a uniform index <-> element bijection makes the draw uniform by
# construction.

_EVEN_BITS = int("55" * 8, 16)  # 0b...0101, enough for 2n <= 64 bits


def _form_partner(v: int) -> int:
    """J v: swap each (x, z) bit pair, so <u, w> = popcount(u & Jw) mod 2."""
    return ((v & _EVEN_BITS) << 1) | ((v >> 1) & _EVEN_BITS)


def _sym_inner(v: int, w: int) -> int:
    return (v & _form_partner(w)).bit_count() & 1


def _transvection(k: int, v: int) -> int:
    return v ^ k if _sym_inner(k, v) else v


def _find_transvection(x: int, y: int) -> tuple:
    """Pair (h0, h1) with Z_h1 Z_h0 x = y for nonzero x, y (0 means identity)."""
    if x == y:
        return 0, 0
    if _sym_inner(x, y) == 1:
        return x ^ y, 0
    nn = max(x.bit_length(), y.bit_length())
    z = 0
    for i in range(0, nn, 2):  # block supported by both x and y
        xb, yb = (x >> i) & 3, (y >> i) & 3
        if xb and yb:
            zb = xb ^ yb
            if zb == 0:  # blocks agree; pick any partner within the block
                zb = 2 if xb == 3 else 3
            z = zb << i
            return x ^ z, y ^ z
    for i in range(0, nn, 2):  # block where only x is supported
        xb = (x >> i) & 3
        if xb and not ((y >> i) & 3):
            zb = 2 if xb == 3 else (((xb & 1) << 1) | (xb >> 1))
            z |= zb << i
            break
    for i in range(0, nn, 2):  # block where only y is supported
        yb = (y >> i) & 3
        if yb and not ((x >> i) & 3):
            zb = 2 if yb == 3 else (((yb & 1) << 1) | (yb >> 1))
            z |= zb << i
            break
    return x ^ z, y ^ z


def symplectic_group_order(n: int) -> int:
    order = 1
    for j in range(1, n + 1):
        order *= (4**j - 1) << (2 * j - 1)
    return order


def _symplectic_rows_ints(n: int, draw) -> list:
    """Row images as packed ints; row 2i is the image of x_i, row 2i+1 of z_i.

    `draw(n_level)` supplies (k, free_bits) for each recursion level.
    """
    k, free_bits = draw(n)
    f1 = k  # k in [1, 4^n - 1] already encodes a nonzero vector
    t0, t1 = _find_transvection(1, f1)
    eprime = 1 | ((free_bits >> 1) << 2)
    h0 = _transvection(t1, _transvection(t0, eprime))
    extra = 0 if free_bits & 1 else f1
    if n == 1:
        rows = [1, 2]
    else:
        rows = [1, 2] + [r << 2 for r in _symplectic_rows_ints(n - 1, draw)]
    out = []
    for v in rows:
        v = _transvection(t1, _transvection(t0, v))
        v = _transvection(h0, v)
        if extra:
            v = _transvection(extra, v)
        out.append(v)
    return out


def _rows_to_matrix(rows: list, n: int) -> np.ndarray:
    nn = 2 * n
    return np.array([[(r >> j) & 1 for j in range(nn)] for r in rows], dtype=np.uint8)


def symplectic_from_index(index: int, n: int) -> np.ndarray:
    """Canonical bijection from [0, |Sp(2n, 2)|) onto the symplectic group."""
    if not 0 <= index < symplectic_group_order(n):
        raise ValueError("symplectic index out of range")
    state = {"i": index}

    def draw(m: int) -> tuple:
        s = 4**m - 1
        k = state["i"] % s + 1
        state["i"] //= s
        free_bits = state["i"] % (1 << (2 * m - 1))
        state["i"] >>= 2 * m - 1
        return k, free_bits

    return _rows_to_matrix(_symplectic_rows_ints(n, draw), n)


def _random_symplectic_ints(n: int, gen: np.random.Generator) -> list:
    def draw(m: int) -> tuple:
        k = int(gen.integers(1, 4**m))
        free_bits = int(gen.integers(0, 1 << (2 * m - 1)))
        return k, free_bits

    return _symplectic_rows_ints(n, draw)


_ROW_FACTOR = ("I", "X", "Z", "Y")  # indexed by x_bit + 2 z_bit


def _pauli_from_row(row: int, sign_bit: int, n: int) -> PauliString:
    factors = tuple(_ROW_FACTOR[(row >> (2 * q)) & 3] for q in range(n))
    return PauliString(n, factors, -1.0 if sign_bit else 1.0)


def clifford_tableau(n_qubits: int, rng: RngStream) -> tuple:
    """Uniform Clifford as generator images: (x_images, z_images) PauliStrings."""
    gen = rng.gen
    rows = _random_symplectic_ints(n_qubits, gen)
    signs = gen.integers(0, 2, size=2 * n_qubits)
    x_images = tuple(_pauli_from_row(rows[2 * i], int(signs[2 * i]), n_qubits)
                     for i in range(n_qubits))
    z_images = tuple(_pauli_from_row(rows[2 * i + 1], int(signs[2 * i + 1]), n_qubits)
                     for i in range(n_qubits))
    return x_images, z_images


def clifford_dense_from_tableau(x_images: Sequence[PauliString],
                                z_images: Sequence[PauliString]) -> np.ndarray:
    """Materialize the unique (up to global phase) unitary with U X_i U^dag =
    x_images[i] and U Z_i U^dag = z_images[i].

    U|0...0> is the state stabilized by the z-images; the remaining columns
    follow by applying products of x-images.
    """
    from .linalg import apply_pauli_raw

    n = x_images[0].n_qubits
    d = 2**n
    phi = None
    for j in range(d):  # a basis state with nonzero projection always exists
        v = np.zeros(d, dtype=complex)
        v[j] = 1.0
        for q in z_images:
            v = 0.5 * (v + apply_pauli_raw(q, v))
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            phi = v / norm
            break
    if phi is None:
        raise RuntimeError("stabilizer projector annihilated every basis state")
    # grow columns by doubling: appending X_i's image flips basis bit i
    u = phi[:, None]
    for i in range(n - 1, -1, -1):
        u = np.concatenate([u, apply_pauli_raw(x_images[i], u)], axis=1)
    return u


def random_clifford_dense(n_qubits: int, rng: RngStream) -> np.ndarray:
    x_images, z_images = clifford_tableau(n_qubits, rng)
    return clifford_dense_from_tableau(x_images, z_images)


# ---------------------------------------------------------------------------
# 2-design sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoDesignConfig:
    """flavor 'clifford' is an exact 2-design; 'brickwork' stacks `layers`
    repetitions of per-qubit Haar rotations followed by a CZ chain."""

    flavor: str = "clifford"
    layers: int = 1

    def __post_init__(self):
        if self.flavor not in ("clifford", "brickwork"):
            raise ValueError(f"unknown 2-design flavor {self.flavor!r}")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")


def _cz_chain_signs(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    sign = np.ones(2**n)
    for q in range(n - 1):
        both = ((idx >> (n - 1 - q)) & 1) & ((idx >> (n - 2 - q)) & 1)
        sign *= 1.0 - 2.0 * both
    return sign


def two_design_unitary(n_qubits: int, cfg: TwoDesignConfig, rng: RngStream) -> DenseOperator:
    if cfg.flavor == "clifford":
        return DenseOperator(n_qubits, random_clifford_dense(n_qubits, rng), unitary_flag=True)
    gen = rng.gen
    cz = _cz_chain_signs(n_qubits)
    m = np.eye(2**n_qubits, dtype=complex)
    for _ in range(cfg.layers):
        locals_ = kron_all([_haar_matrix(2, gen) for _ in range(n_qubits)])
        m = cz[:, None] * (locals_ @ m)
    return DenseOperator(n_qubits, m, unitary_flag=True)


# ---------------------------------------------------------------------------
# graphs and pools
# ---------------------------------------------------------------------------

def random_regular_graph(n_vertices: int, degree: int, rng: RngStream) -> Graph:
    """Configuration (pairing) model with full rejection of self-loops and
    multi-edges, so the draw is uniform over simple `degree`-regular graphs."""
    if degree >= n_vertices or degree < 0:
        raise ValueError(f"degree {degree} infeasible for {n_vertices} vertices")
    if (n_vertices * degree) % 2 == 1:
        raise ValueError(f"n * degree must be even, got {n_vertices} * {degree}")
    stubs = np.repeat(np.arange(n_vertices), degree)
    gen = rng.gen
    while True:
        perm = gen.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        edges = set()
        ok = True
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v or (min(u, v), max(u, v)) in edges:
                ok = False
                break
            edges.add((min(u, v), max(u, v)))
        if ok:
            return Graph(n_vertices, tuple(sorted(edges)))


def sample_pool(pool: Sequence[PauliString], rng: RngStream) -> PauliString:
    """Uniform draw from an ordered operator pool."""
    if not pool:
        raise ValueError("operator pool is empty")
    return pool[int(rng.gen.integers(0, len(pool)))]


def weight_graded_pool(n_qubits: int, max_weight: Optional[int] = None) -> tuple:
    """All non-identity Pauli strings up to `max_weight`, in the deterministic
    order: ascending weight, ascending support, letters lexicographic X<Y<Z."""
    cap = n_qubits if max_weight is None else min(max_weight, n_qubits)
    pool = []
    for w in range(1, cap + 1):
        for positions in itertools.combinations(range(n_qubits), w):
            for letters in itertools.product("XYZ", repeat=w):
                factors = ["I"] * n_qubits
                for pos, letter in zip(positions, letters):
                    factors[pos] = letter
                pool.append(PauliString(n_qubits, tuple(factors)))
    return tuple(pool)


def full_pauli_pool(n_qubits: int) -> tuple:
    """All 4^n - 1 non-identity Pauli strings in the graded order."""
    return weight_graded_pool(n_qubits)

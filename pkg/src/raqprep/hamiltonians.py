"""Problem Hamiltonians: Ising couplings from graphs, projector form for known
targets, dense form, ground-energy brute force, variance, approximation ratio.

The Ising convention is H = sum over edges w_ij Z_i Z_j with no field or
offset; spins are z = +1 for bit 0 and z = -1 for bit 1. Minimizing this
energy is MaxCut on the underlying graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .linalg import MAX_QUBITS, StateVector

GROUND_DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Simple undirected weighted graph; edges stored as sorted (u, v) pairs."""

    n_vertices: int
    edges: tuple
    weights: tuple = ()

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        canon = []
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            e = (min(u, v), max(u, v))
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        weights = tuple(float(w) for w in self.weights) if self.weights else (1.0,) * len(canon)
        if len(weights) != len(canon):
            raise ValueError("weight count must match edge count")
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "weights", weights)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def from_edge_list_text(cls, text: str) -> "Graph":
        """Parse 'u v [weight]' lines (0-indexed vertices, blank lines and # comments skipped)."""
        edges, weights = [], []
        max_vertex = -1
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            parts = stripped.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"line {lineno}: expected 'u v [weight]', got {line!r}")
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
            edges.append((u, v))
            weights.append(w)
            max_vertex = max(max_vertex, u, v)
        if not edges:
            raise ValueError("edge list is empty")
        return cls(max_vertex + 1, tuple(edges), tuple(weights))

    def degrees(self) -> list:
        deg = [0] * self.n_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True)
class ProblemHamiltonian:
    """Hermitian cost operator in one of three forms, with cached spectrum facts.

    form 'ising_diagonal': `diagonal` holds the 2^n real diagonal entries.
    form 'projector':      H = 1 - |target><target|.
    form 'dense':          `matrix` holds the full Hermitian matrix.
    """

    form: str
    n_qubits: int
    diagonal: Optional[np.ndarray] = None
    target: Optional[StateVector] = None
    matrix: Optional[np.ndarray] = None
    spectral_norm: float = 0.0
    ground_energy: float = 0.0
    ground_degeneracy: int = 0

    def __post_init__(self):
        if self.form == "ising_diagonal":
            diag = np.asarray(self.diagonal, dtype=float)
            if diag.shape != (2**self.n_qubits,):
                raise ValueError("diagonal length must be 2^n")
            object.__setattr__(self, "diagonal", diag)
            norm = float(np.max(np.abs(diag)))
            e_min = float(np.min(diag))
            deg = int(np.sum(diag <= e_min + GROUND_DEGENERACY_TOL))
        elif self.form == "projector":
            if self.target is None or self.target.n_qubits != self.n_qubits:
                raise ValueError("projector form needs a target state of matching size")
            norm, e_min, deg = 1.0, 0.0, 1
        elif self.form == "dense":
            m = np.asarray(self.matrix, dtype=complex)
            d = 2**self.n_qubits
            if m.shape != (d, d):
                raise ValueError(f"dense form must be {d}x{d}")
            if np.max(np.abs(m - m.conj().T)) > 1e-10:
                raise ValueError("dense Hamiltonian is not Hermitian")
            object.__setattr__(self, "matrix", m)
            evals = np.linalg.eigvalsh(m)
            norm = float(np.max(np.abs(evals)))
            e_min = float(evals[0])
            deg = int(np.sum(evals <= e_min + GROUND_DEGENERACY_TOL))
        else:
            raise ValueError(f"unknown form {self.form!r}")
        object.__setattr__(self, "spectral_norm", norm)
        object.__setattr__(self, "ground_energy", e_min)
        object.__setattr__(self, "ground_degeneracy", deg)

    def dense_matrix(self) -> np.ndarray:
        if self.form == "ising_diagonal":
            return np.diag(self.diagonal.astype(complex))
        if self.form == "projector":
            t = self.target.amplitudes
            return np.eye(len(t), dtype=complex) - np.outer(t, t.conj())
        return self.matrix

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """H |psi> on a raw amplitude array."""
        if self.form == "ising_diagonal":
            return self.diagonal * amps
        if self.form == "projector":
            t = self.target.amplitudes
            return amps - t * np.vdot(t, amps)
        return self.matrix @ amps


def ising_from_graph(g: Graph) -> ProblemHamiltonian:
    """H = sum_{(i,j) in E} w_ij Z_i Z_j stored as a diagonal over bitstrings."""
    n = g.n_vertices
    if n > MAX_QUBITS:
        raise ValueError(f"graph has {n} vertices, cap is {MAX_QUBITS}")
    idx = np.arange(2**n)
    spins = [1.0 - 2.0 * ((idx >> (n - 1 - q)) & 1) for q in range(n)]
    diag = np.zeros(2**n)
    for (u, v), w in zip(g.edges, g.weights):
        diag += w * spins[u] * spins[v]
    return ProblemHamiltonian("ising_diagonal", n, diagonal=diag)


def from_diagonal(diagonal: np.ndarray) -> ProblemHamiltonian:
    """Arbitrary real-diagonal Hamiltonian (same machinery as the Ising form)."""
    diag = np.asarray(diagonal, dtype=float)
    n = int(np.log2(len(diag)))
    if 2**n != len(diag):
        raise ValueError("diagonal length must be a power of two")
    return ProblemHamiltonian("ising_diagonal", n, diagonal=diag)


def projector_hamiltonian(target: StateVector) -> ProblemHamiltonian:
    """H = 1 - |target><target|: eigenvalues {0 once, 1 elsewhere}."""
    return ProblemHamiltonian("projector", target.n_qubits, target=target)


def dense_hamiltonian(matrix: np.ndarray) -> ProblemHamiltonian:
    n = int(np.log2(matrix.shape[0]))
    return ProblemHamiltonian("dense", n, matrix=matrix)


def cost(state: StateVector, h: ProblemHamiltonian) -> float:
    """J = <psi|H|psi>."""
    if state.n_qubits != h.n_qubits:
        raise ValueError("state and Hamiltonian qubit counts differ")
    return cost_raw(h, state.amplitudes)


def cost_raw(h: ProblemHamiltonian, amps: np.ndarray) -> float:
    if h.form == "ising_diagonal":
        return float(np.dot(h.diagonal, np.abs(amps) ** 2))
    if h.form == "projector":
        return float(1.0 - np.abs(np.vdot(h.target.amplitudes, amps)) ** 2)
    return float(np.vdot(amps, h.matrix @ amps).real)


def ground_energy_bruteforce(h: ProblemHamiltonian) -> tuple:
    """(E_min, degeneracy) by exact diagonal scan or full eigendecomposition."""
    if h.form == "ising_diagonal":
        e_min = float(np.min(h.diagonal))
        return e_min, int(np.sum(h.diagonal <= e_min + GROUND_DEGENERACY_TOL))
    if h.form == "projector":
        return 0.0, 1
    evals = np.linalg.eigvalsh(h.matrix)
    e_min = float(evals[0])
    return e_min, int(np.sum(evals <= e_min + GROUND_DEGENERACY_TOL))


def variance_of(state: StateVector, h: ProblemHamiltonian) -> float:
    """Var_psi(H) = <H^2> - <H>^2 (nonnegative up to rounding)."""
    amps = state.amplitudes
    if h.form == "ising_diagonal":
        probs = np.abs(amps) ** 2
        mean = float(np.dot(h.diagonal, probs))
        return float(np.dot(h.diagonal**2, probs)) - mean**2
    if h.form == "projector":
        j = cost(state, h)  # H is idempotent, so <H^2> = <H>
        return j - j * j
    h_psi = h.matrix @ amps
    return float(np.vdot(h_psi, h_psi).real) - float(np.vdot(amps, h_psi).real) ** 2


def approximation_ratio(j: float, e_min: float) -> float:
    """alpha = J / E_min, unclipped; undefined (rejected) for E_min = 0."""
    if e_min == 0.0:
        raise ValueError("approximation ratio undefined for E_min = 0; use fidelity 1 - J")
    return j / e_min


# ---------------------------------------------------------------------------
# spec-string builders (config files and CLI)
# ---------------------------------------------------------------------------

def graph_from_spec(spec: str, base_dir: Optional[Path] = None) -> Graph:
    """'complete:<n>', 'regular:<n>:<d>:<seed>', or 'file:<path>' (edge-list text)."""
    parts = spec.split(":")
    if parts[0] == "complete" and len(parts) == 2:
        return Graph.complete(int(parts[1]))
    if parts[0] == "regular" and len(parts) == 4:
        from .sampling import RngStream, random_regular_graph

        n, d, seed = int(parts[1]), int(parts[2]), int(parts[3])
        return random_regular_graph(n, d, RngStream(seed, 0))
    if parts[0] == "file" and len(parts) >= 2:
        path = Path(":".join(parts[1:]))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return Graph.from_edge_list_text(path.read_text())
    raise ValueError(f"unknown graph spec {spec!r}")


def hamiltonian_from_spec(spec: str, n_qubits: Optional[int] = None,
                          base_dir: Optional[Path] = None) -> ProblemHamiltonian:
    """Resolve a Hamiltonian spec string.

    'ising:<graph spec>'           Ising form on the given graph.
    'diagonal:<v0,v1,...>'         explicit real diagonal (length 2^n).
    'projector:zero'               target |0...0> (needs n_qubits).
    'projector:plus'               uniform superposition target.
    'projector:basis:<bits>'       computational basis target.
    'projector:random:<seed>'      Haar-random target (needs n_qubits).
    """
    kind, _, rest = spec.partition(":")
    if kind == "diagonal":
        h = from_diagonal([float(x) for x in rest.split(",")])
        if n_qubits is not None and h.n_qubits != n_qubits:
            raise ValueError(f"diagonal is for {h.n_qubits} qubits but n_qubits={n_qubits}")
        return h
    if kind == "ising":
        h = ising_from_graph(graph_from_spec(rest, base_dir))
        if n_qubits is not None and h.n_qubits != n_qubits:
            raise ValueError(f"graph has {h.n_qubits} vertices but n_qubits={n_qubits}")
        return h
    if kind == "projector":
        sub, _, arg = rest.partition(":")
        if sub == "basis":
            return projector_hamiltonian(StateVector.from_bits(arg))
        if n_qubits is None:
            raise ValueError(f"projector spec {spec!r} needs an explicit n_qubits")
        if sub == "zero":
            return projector_hamiltonian(StateVector.computational_basis(n_qubits, 0))
        if sub == "plus":
            return projector_hamiltonian(StateVector.uniform_plus(n_qubits))
        if sub == "random":
            from .sampling import RngStream, random_state

            return projector_hamiltonian(random_state(n_qubits, RngStream(int(arg), 0)))
        raise ValueError(f"unknown projector target {sub!r}")
    raise ValueError(f"unknown hamiltonian spec {spec!r}")

"""Dense linear-algebra oracle: state vectors, density matrices and distances.

Basis index bit ``q`` is qubit ``q`` (little-endian), so the operator for a
Pauli string is ``kron(sigma_{n-1}, ..., sigma_0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import PauliString
from .tableau import CliffordOp, ConfigurationError


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-10
    trace: float = 1e-9
    hermitian: float = 1e-10
    eigen: float = 1e-9
    branch_sum: float = 1e-9
    pauli_offdiag: float = 1e-9


TOL = Tolerances()
MAX_STATE_QUBITS = 12
MAX_DENSITY_QUBITS = 10

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = {"I": I2, "X": PX, "Y": PY, "Z": PZ}

GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "X": PX,
    "Y": PY,
    "Z": PZ,
    # two-qubit gates act on (first target, second target) with the first
    # target as the most significant bit of the 4x4 index
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}


class OracleUnavailable(RuntimeError):
    """The requested instance is too large for an exact computation."""


def pauli_matrix(p: PauliString) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    for q in reversed(range(p.n)):
        m = np.kron(m, SINGLE[p.kind(q)])
    return (1j ** p.phase) * m


def _apply_to_axes(tensor: np.ndarray, u: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


class DenseState:
    """State vector on at most 12 qubits."""

    def __init__(self, amplitudes: np.ndarray):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError("amplitude vector length must be a power of two")
        if n > MAX_STATE_QUBITS:
            raise OracleUnavailable(f"{n} qubits exceeds the state-vector cap")
        if abs(np.linalg.norm(amps) - 1) > TOL.norm:
            raise ValueError("state is not normalized")
        self.n = n
        self.amplitudes = amps

    @classmethod
    def zeros(cls, n: int) -> DenseState:
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1
        return cls(a)

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)

    def _axis(self, q: int) -> int:
        return self.n - 1 - q

    def apply_matrix(self, u: np.ndarray, qubits: Sequence[int]) -> DenseState:
        t = _apply_to_axes(self._tensor(), u, [self._axis(q) for q in qubits])
        self.amplitudes = t.reshape(-1)
        return self

    def apply(self, g: CliffordOp) -> DenseState:
        if max(g.targets) >= self.n:
            raise ConfigurationError(f"target out of range: {g}")
        return self.apply_matrix(GATE_MATRICES[g.kind], g.targets)

    def apply_pauli(self, p: PauliString) -> DenseState:
        self.amplitudes = pauli_matrix(p) @ self.amplitudes
        return self

    def expectation(self, p: PauliString) -> float:
        v = self.amplitudes
        return float(np.real(np.vdot(v, pauli_matrix(p) @ v)))

    def probability_plus(self, p: PauliString) -> float:
        """Probability of outcome +1 when measuring P."""
        return 0.5 * (1 + self.expectation(p))

    def density_matrix(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()))


class DensityMatrix:
    """Hermitian, unit-trace, positive operator on at most 10 qubits.

    ``check=False`` skips validation so that linear maps can be pushed
    through non-physical operators (e.g. Pauli basis elements).
    """

    def __init__(self, entries: np.ndarray, check: bool = True):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(np.log2(m.shape[0])))
        if 2**n != m.shape[0]:
            raise ValueError("dimension must be a power of two")
        if n > MAX_DENSITY_QUBITS:
            raise OracleUnavailable(f"{n} qubits exceeds the density-matrix cap")
        if check:
            if abs(np.trace(m) - 1) > TOL.trace:
                raise ValueError("trace is not 1")
            if np.max(np.abs(m - m.conj().T)) > TOL.hermitian:
                raise ValueError("matrix is not Hermitian")
            if np.linalg.eigvalsh(m).min() < -TOL.eigen:
                raise ValueError("matrix is not positive semidefinite")
        self.n = n
        self.entries = m

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityMatrix:
        d = 2**n
        return cls(np.eye(d) / d)

    def _tensor(self) -> np.ndarray:
        return self.entries.reshape((2,) * (2 * self.n))

    def apply_matrix(self, u: np.ndarray, qubits: Sequence[int]) -> DensityMatrix:
        n = self.n
        ket = [n - 1 - q for q in qubits]
        bra = [2 * n - 1 - q for q in qubits]
        t = _apply_to_axes(self._tensor(), u, ket)
        t = _apply_to_axes(t, u.conj(), bra)
        self.entries = t.reshape(2**n, 2**n)
        return self

    def apply(self, g: CliffordOp) -> DensityMatrix:
        if max(g.targets) >= self.n:
            raise ConfigurationError(f"target out of range: {g}")
        return self.apply_matrix(GATE_MATRICES[g.kind], g.targets)

    def apply_pauli_channel(self, probs: dict[str, float], qubits: Sequence[int]) -> DensityMatrix:
        """rho -> sum_P p_P P rho P over Pauli labels on ``qubits`` (e.g. "XZ")."""
        total = sum(probs.values())
        if abs(total - 1) > TOL.branch_sum:
            raise ValueError(f"channel probabilities sum to {total}")
        base = self.entries
        d = base.shape[0]
        i = np.arange(d)
        out = np.zeros_like(base)
        for label, pr in probs.items():
            if pr == 0:
                continue
            x = z = 0
            for ch, q in zip(label, qubits):
                x |= (ch in "XY") << q
                z |= (ch in "ZY") << q
            # P rho P^dag with P = X^x Z^z up to a phase that cancels
            sgn = 1 - 2 * (np.bitwise_count(i & z) & 1).astype(float)
            m = base * np.outer(sgn, sgn)
            out += pr * m[np.ix_(i ^ x, i ^ x)]
        self.entries = out
        return self

    def project(self, p: PauliString, outcome: int) -> DensityMatrix:
        """Unnormalized projection onto the ``outcome`` eigenspace of P."""
        proj = 0.5 * (np.eye(2**self.n) + outcome * pauli_matrix(p))
        return DensityMatrix(proj @ self.entries @ proj, check=False)

    def partial_trace(self, keep: Sequence[int]) -> DensityMatrix:
        n = self.n
        keep = sorted(keep)
        t = self._tensor()
        left = list(range(n - 1, -1, -1))   # qubit on each ket axis
        for q in [q for q in range(n - 1, -1, -1) if q not in keep]:
            ax = left.index(q)
            t = np.trace(t, axis1=ax, axis2=ax + len(left))
            left.remove(q)
        k = len(keep)
        return DensityMatrix(t.reshape(2**k, 2**k), check=False)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def expectation(self, p: PauliString) -> float:
        return float(np.real(np.trace(pauli_matrix(p) @ self.entries)))


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, DensityMatrix):
        return m.entries
    if isinstance(m, DenseState):
        return m.density_matrix().entries
    return np.asarray(m, dtype=complex)


def trace_norm(m) -> float:
    a = _as_matrix(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("trace norm needs a square matrix")
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho0, rho1) -> float:
    """Squared fidelity ||sqrt(rho0) sqrt(rho1)||_tr^2."""
    a, b = _as_matrix(rho0), _as_matrix(rho1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    f = trace_norm(_psd_sqrt(a) @ _psd_sqrt(b)) ** 2
    return float(min(max(f, 0.0), 1.0))


def trace_distance(rho0, rho1) -> float:
    a, b = _as_matrix(rho0), _as_matrix(rho1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = 0.5 * trace_norm(b - a)
    return float(min(max(d, 0.0), 1.0))


def bloch_state(r: Sequence[float]) -> np.ndarray:
    rx, ry, rz = r
    return 0.5 * (I2 + rx * PX + ry * PY + rz * PZ)


class ChannelMap:
    """Single-qubit channel stored as its 4x4 Pauli transfer matrix.

    ``ptm[i, j] = Tr(P_i Phi(P_j)) / 2`` with P = (I, X, Y, Z).
    """

    def __init__(self, ptm: np.ndarray):
        self.ptm = np.asarray(ptm, dtype=float)
        if self.ptm.shape != (4, 4):
            raise ValueError("PTM must be 4x4")

    @classmethod
    def identity(cls) -> ChannelMap:
        return cls(np.eye(4))

    @classmethod
    def from_pauli_probabilities(cls, p_i: float, p_x: float, p_y: float, p_z: float) -> ChannelMap:
        total = p_i + p_x + p_y + p_z
        if abs(total - 1) > TOL.branch_sum:
            raise ValueError(f"branch probabilities sum to {total}")
        ax = p_i + p_x - p_y - p_z
        ay = p_i - p_x + p_y - p_z
        az = p_i - p_x - p_y + p_z
        return cls(np.diag([1.0, ax, ay, az]))

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> ChannelMap:
        basis = [I2, PX, PY, PZ]
        ptm = np.zeros((4, 4))
        for j, pj in enumerate(basis):
            out = sum(k @ pj @ k.conj().T for k in kraus)
            for i, pi in enumerate(basis):
                ptm[i, j] = 0.5 * np.real(np.trace(pi @ out))
        return cls(ptm)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        basis = [I2, PX, PY, PZ]
        coeffs = np.array([np.real(np.trace(b @ rho)) for b in basis])
        out_c = self.ptm @ coeffs
        return 0.5 * sum(c * b for c, b in zip(out_c, basis))

    def compose(self, other: ChannelMap) -> ChannelMap:
        """self after other."""
        return ChannelMap(self.ptm @ other.ptm)

    def is_pauli(self) -> bool:
        off = self.ptm - np.diag(np.diag(self.ptm))
        return bool(np.max(np.abs(off)) < TOL.pauli_offdiag and abs(self.ptm[0, 0] - 1) < TOL.pauli_offdiag)

    def pauli_probabilities(self) -> tuple[float, float, float, float]:
        ax, ay, az = alpha_coefficients(self)
        return (
            (1 + ax + ay + az) / 4,
            (1 + ax - ay - az) / 4,
            (1 - ax + ay - az) / 4,
            (1 - ax - ay + az) / 4,
        )


def alpha_coefficients(ch: ChannelMap) -> tuple[float, float, float]:
    """Pauli transfer eigenvalues of a single-qubit Pauli channel."""
    if not ch.is_pauli():
        raise ValueError("channel is not a unital Pauli channel")
    d = np.diag(ch.ptm)
    return float(d[1]), float(d[2]), float(d[3])


def integrity_from_alphas(alphas: Sequence[float]) -> float:
    """Worst-axis distinguishability, min_j |alpha_j|."""
    return float(min(abs(a) for a in alphas))


def integrity_squared_alphas(alphas: Sequence[float]) -> float:
    """The alternative min_j alpha_j**2 reading, kept for comparison."""
    return float(min(a * a for a in alphas))


def axis_eigenstates(axis: str) -> tuple[np.ndarray, np.ndarray]:
    r = {"X": (1, 0, 0), "Y": (0, 1, 0), "Z": (0, 0, 1)}[axis]
    return bloch_state(r), bloch_state(tuple(-v for v in r))


def worst_case_distance_sampled(ch: ChannelMap, samples: int, rng: np.random.Generator) -> float:
    """Minimum over random antipodal pure-state pairs of D(Phi(psi), Phi(psi_perp))."""
    best = np.inf
    for _ in range(samples):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        d = trace_distance(ch.apply(bloch_state(v)), ch.apply(bloch_state(-v)))
        best = min(best, d)
    return float(best)

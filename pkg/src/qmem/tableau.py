"""Clifford gates and an Aaronson-Gottesman stabilizer tableau.

The tableau is stored column-major: for every qubit ``q`` we keep a bitmask
over the 2n rows holding that qubit's X (resp. Z) bit, and one more bitmask
with the row signs.  Rows ``0..n-1`` are destabilizers, ``n..2n-1`` are
stabilizers.  Gates are then a handful of big-integer operations, while
measurement extracts the rows it needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, parity

ONE_QUBIT_GATES = ("H", "S", "SDG", "X", "Y", "Z")
TWO_QUBIT_GATES = ("CX", "CZ")


class ConfigurationError(ValueError):
    """Raised for invalid circuit or experiment descriptions."""


@dataclass(frozen=True)
class CliffordOp:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.kind in ONE_QUBIT_GATES:
            if len(self.targets) != 1:
                raise ConfigurationError(f"{self.kind} takes one target")
        elif self.kind in TWO_QUBIT_GATES:
            if len(self.targets) != 2:
                raise ConfigurationError(f"{self.kind} takes two targets")
            if self.targets[0] == self.targets[1]:
                raise ConfigurationError(f"{self.kind} targets must be distinct")
        else:
            raise ConfigurationError(f"unknown gate {self.kind!r}")
        if any(t < 0 for t in self.targets):
            raise ConfigurationError("negative target")

    def inverse(self) -> CliffordOp:
        inv = {"S": "SDG", "SDG": "S"}.get(self.kind, self.kind)
        return CliffordOp(inv, self.targets)

    def __str__(self) -> str:
        return f"{self.kind} " + " ".join(map(str, self.targets))


def op(kind: str, *targets: int) -> CliffordOp:
    return CliffordOp(kind, tuple(targets))


def _bit(v: int, q: int) -> int:
    return v >> q & 1


def conjugate(p: PauliString, g: CliffordOp) -> PauliString:
    """Return g P g^dagger."""
    if max(g.targets) >= p.n:
        raise ConfigurationError(f"target out of range for {p.n} qubits: {g}")
    x, z = p.x, p.z
    flip = 0
    k = g.kind
    if k in ONE_QUBIT_GATES:
        q = g.targets[0]
        xq, zq = _bit(x, q), _bit(z, q)
        if k == "H":
            flip = xq & zq
            x ^= (xq ^ zq) << q
            z ^= (xq ^ zq) << q
        elif k == "S":
            flip = xq & zq
            z ^= xq << q
        elif k == "SDG":
            flip = xq & (zq ^ 1)
            z ^= xq << q
        elif k == "X":
            flip = zq
        elif k == "Y":
            flip = xq ^ zq
        else:
            flip = xq
    elif k == "CX":
        c, t = g.targets
        xc, zc, xt, zt = _bit(x, c), _bit(z, c), _bit(x, t), _bit(z, t)
        flip = xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
    else:
        a, b = g.targets
        xa, za, xb, zb = _bit(x, a), _bit(z, a), _bit(x, b), _bit(z, b)
        flip = xa & xb & (za ^ zb)
        z ^= xb << a
        z ^= xa << b
    return PauliString(p.n, x, z, p.phase + 2 * flip)


def conjugate_circuit(p: PauliString, circuit: Iterable[CliffordOp]) -> PauliString:
    for g in circuit:
        p = conjugate(p, g)
    return p


def inverse_circuit(circuit: Sequence[CliffordOp]) -> list[CliffordOp]:
    return [g.inverse() for g in reversed(circuit)]


class StabilizerTableau:
    """Pure stabilizer state of ``n`` qubits with destabilizer bookkeeping."""

    def __init__(self, n: int):
        if n <= 0:
            raise ConfigurationError("tableau needs at least one qubit")
        self.n = n
        self._full = (1 << 2 * n) - 1
        # |0...0>: destabilizer i = X_i, stabilizer i = Z_i
        self.xc = [1 << q for q in range(n)]
        self.zc = [1 << (n + q) for q in range(n)]
        self.r = 0

    # -- construction -------------------------------------------------
    @classmethod
    def from_stabilizers(cls, generators: Sequence[PauliString]) -> StabilizerTableau:
        """Build the state stabilized by ``generators`` (n independent, commuting)."""
        n = generators[0].n
        if len(generators) != n:
            raise ConfigurationError(f"need {n} generators, got {len(generators)}")
        destabs = destabilizers_for(generators)
        t = cls(n)
        t.xc = [0] * n
        t.zc = [0] * n
        for i, d in enumerate(destabs):
            t._set_row(i, d)
        for i, s in enumerate(generators):
            if not s.is_hermitian:
                raise ConfigurationError(f"generator {s} is not Hermitian")
            t._set_row(n + i, s)
        return t

    def copy(self) -> StabilizerTableau:
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n, t._full = self.n, self._full
        t.xc, t.zc, t.r = list(self.xc), list(self.zc), self.r
        return t

    # -- row access ---------------------------------------------------
    def row(self, i: int) -> PauliString:
        x = z = 0
        for q in range(self.n):
            x |= (self.xc[q] >> i & 1) << q
            z |= (self.zc[q] >> i & 1) << q
        return PauliString(self.n, x, z, 2 * (self.r >> i & 1))

    def _set_row(self, i: int, p: PauliString) -> None:
        m = 1 << i
        for q in range(self.n):
            if p.x >> q & 1:
                self.xc[q] |= m
            else:
                self.xc[q] &= ~m
            if p.z >> q & 1:
                self.zc[q] |= m
            else:
                self.zc[q] &= ~m
        if p.phase & 2:
            self.r |= m
        else:
            self.r &= ~m

    @property
    def stabilizers(self) -> list[PauliString]:
        return [self.row(self.n + i) for i in range(self.n)]

    @property
    def destabilizers(self) -> list[PauliString]:
        return [self.row(i) for i in range(self.n)]

    def _anticommuting_rows(self, p: PauliString) -> int:
        anti = 0
        m = p.x | p.z
        q = 0
        while m:
            if m & 1:
                if p.x >> q & 1:
                    anti ^= self.zc[q]
                if p.z >> q & 1:
                    anti ^= self.xc[q]
            m >>= 1
            q += 1
        return anti

    def _check_targets(self, targets: Iterable[int]) -> None:
        for t in targets:
            if not 0 <= t < self.n:
                raise ConfigurationError(f"target {t} out of range for {self.n} qubits")

    # -- evolution ----------------------------------------------------
    def apply(self, g: CliffordOp) -> StabilizerTableau:
        self._check_targets(g.targets)
        xc, zc, k = self.xc, self.zc, g.kind
        if k in ONE_QUBIT_GATES:
            q = g.targets[0]
            if k == "H":
                self.r ^= xc[q] & zc[q]
                xc[q], zc[q] = zc[q], xc[q]
            elif k == "S":
                self.r ^= xc[q] & zc[q]
                zc[q] ^= xc[q]
            elif k == "SDG":
                self.r ^= xc[q] & ~zc[q] & self._full
                zc[q] ^= xc[q]
            elif k == "X":
                self.r ^= zc[q]
            elif k == "Y":
                self.r ^= xc[q] ^ zc[q]
            else:
                self.r ^= xc[q]
        elif k == "CX":
            c, t = g.targets
            self.r ^= xc[c] & zc[t] & ~(xc[t] ^ zc[c]) & self._full
            xc[t] ^= xc[c]
            zc[c] ^= zc[t]
        else:
            a, b = g.targets
            self.r ^= xc[a] & xc[b] & (zc[a] ^ zc[b])
            zc[a] ^= xc[b]
            zc[b] ^= xc[a]
        return self

    def apply_circuit(self, circuit: Iterable[CliffordOp]) -> StabilizerTableau:
        for g in circuit:
            self.apply(g)
        return self

    def apply_pauli(self, p: PauliString) -> StabilizerTableau:
        if p.n != self.n:
            raise ConfigurationError(f"size mismatch: {p.n} vs {self.n}")
        self.r ^= self._anticommuting_rows(p)
        return self

    # -- measurement --------------------------------------------------
    def peek(self, p: PauliString) -> int:
        """Expectation of P: +1 or -1 if deterministic, 0 if random."""
        if p.n != self.n:
            raise ConfigurationError(f"size mismatch: {p.n} vs {self.n}")
        anti = self._anticommuting_rows(p)
        if anti >> self.n:
            return 0
        acc = PauliString(self.n)
        for i in range(self.n):
            if anti >> i & 1:
                acc = acc * self.row(self.n + i)
        return acc.sign * p.sign

    def measure(self, p: PauliString, rng: np.random.Generator) -> int:
        """Measure Hermitian P; returns +1/-1 and projects the state."""
        if not p.is_hermitian:
            raise ConfigurationError(f"{p} is not Hermitian")
        det = self.peek(p)
        if det:
            return det
        n = self.n
        anti = self._anticommuting_rows(p)
        stab_anti = anti >> n
        k = (stab_anti & -stab_anti).bit_length() - 1
        piv = n + k
        prow = self.row(piv)
        rest = anti & ~(1 << piv)
        i = 0
        while rest:
            if rest & 1:
                prod = self.row(i) * prow
                self._set_row(i, PauliString(n, prod.x, prod.z, prod.phase & 2))
            rest >>= 1
            i += 1
        self._set_row(k, prow)
        outcome = 1 if rng.random() < 0.5 else -1
        self._set_row(piv, p if outcome == 1 else p.negated())
        return outcome

    def reset(self, qubit: int, basis: str, rng: np.random.Generator) -> StabilizerTableau:
        """Put ``qubit`` into the +1 eigenstate of ``basis`` (X, Y or Z)."""
        self._check_targets([qubit])
        obs = PauliString.single(self.n, qubit, basis)
        if self.measure(obs, rng) < 0:
            flip = "Z" if basis == "X" else "X"
            self.apply_pauli(PauliString.single(self.n, qubit, flip))
        return self

    def is_valid(self) -> bool:
        """Check the commutation structure of the tableau."""
        rows = [self.row(i) for i in range(2 * self.n)]
        n = self.n
        for i in range(n):
            for j in range(n):
                if not rows[n + i].commutes(rows[n + j]):
                    return False
                if not rows[i].commutes(rows[j]):
                    return False
                if rows[i].commutes(rows[n + j]) == (i == j):
                    return False
        return True


def destabilizers_for(generators: Sequence[PauliString]) -> list[PauliString]:
    """Find Paulis D_i with D_i anticommuting only with generator i, all D commuting.

    Generators must commute and be independent.
    """
    n = generators[0].n
    m = len(generators)
    for a in generators:
        for b in generators:
            if not a.commutes(b):
                raise ConfigurationError(f"generators {a} and {b} anticommute")
    # Solve <D, S_j> = delta_ij over GF(2); D = (dx, dz) packed as 2n-bit vector.
    # <D, S> = |dx & S.z| + |dz & S.x|  ->  row vector (S.z | S.x << n)
    rows = [(g.z | g.x << n) for g in generators]
    sols = _solve_gf2(rows, 2 * n)
    out: list[PauliString] = []
    for i in range(m):
        v = sols[i]
        out.append(PauliString(n, v & ((1 << n) - 1), v >> n))
    # make destabilizers mutually commute without disturbing <D_i, S_j>
    for j in range(m):
        for i in range(j):
            if not out[j].commutes(out[i]):
                prod = out[j] * generators[i]
                out[j] = PauliString(n, prod.x, prod.z)
    return out


def _solve_gf2(rows: list[int], width: int) -> list[int]:
    """For each i return v with parity(rows[j] & v) == (i == j)."""
    m = len(rows)
    # Gauss-Jordan on augmented [rows | I]
    aug = [(r, 1 << i) for i, r in enumerate(rows)]
    pivots: list[int] = []
    rank = 0
    for col in range(width):
        sel = next((k for k in range(rank, m) if aug[k][0] >> col & 1), None)
        if sel is None:
            continue
        aug[rank], aug[sel] = aug[sel], aug[rank]
        for k in range(m):
            if k != rank and aug[k][0] >> col & 1:
                aug[k] = (aug[k][0] ^ aug[rank][0], aug[k][1] ^ aug[rank][1])
        pivots.append(col)
        rank += 1
    if rank < m:
        raise ConfigurationError("generators are not independent")
    # reduced row k has a single pivot bit in column pivots[k] among pivots;
    # v = sum of e_{pivot_k} over k where combo_k contains i gives <row_j, v> = delta
    sols = []
    for i in range(m):
        v = 0
        for k in range(m):
            if aug[k][1] >> i & 1:
                v |= 1 << pivots[k]
        sols.append(v)
    # sanity check
    for i, v in enumerate(sols):
        for j, r in enumerate(rows):
            if parity(r & v) != (i == j):
                raise AssertionError("GF(2) solve failed")
    return sols


def synthesize_clifford(x_images: Sequence[PauliString], z_images: Sequence[PauliString]) -> list[CliffordOp]:
    """Gate list U (H, S, CX, Paulis) with U X_i U^dag = x_images[i] and U Z_i U^dag = z_images[i].

    Images must form a symplectic basis. The images are reduced to the
    trivial basis qubit by qubit; the circuit is the inverse of the reduction.
    """
    n = len(x_images)
    if len(z_images) != n or any(p.n != n for p in [*x_images, *z_images]):
        raise ConfigurationError("need n X-images and n Z-images on n qubits")
    for i in range(n):
        for j in range(n):
            if x_images[i].commutes(z_images[j]) == (i == j):
                raise ConfigurationError("images are not a symplectic basis")
            if i < j and not (x_images[i].commutes(x_images[j]) and z_images[i].commutes(z_images[j])):
                raise ConfigurationError("images are not a symplectic basis")
    imgs = list(x_images) + list(z_images)
    gates: list[CliffordOp] = []

    def emit(g: CliffordOp) -> None:
        gates.append(g)
        for k in range(2 * n):
            imgs[k] = conjugate(imgs[k], g)

    for i in range(n):
        a = imgs[i]
        # turn every component of the X-image into X
        for k in range(i, n):
            kind = a.kind(k)
            if kind == "Z":
                emit(op("H", k))
            elif kind == "Y":
                emit(op("S", k))
        a = imgs[i]
        if a.kind(i) != "X":
            k = next(k for k in range(i + 1, n) if a.kind(k) == "X")
            emit(op("CX", i, k))
            emit(op("CX", k, i))
            emit(op("CX", i, k))
        for k in range(i + 1, n):
            if imgs[i].kind(k) == "X":
                emit(op("CX", i, k))
        # Z-image: clear qubits above i with gates that fix X_i
        b = imgs[n + i]
        for k in range(i + 1, n):
            kind = b.kind(k)
            if kind == "X":
                emit(op("H", k))
            elif kind == "Y":
                emit(op("S", k))
                emit(op("H", k))
        for k in range(i + 1, n):
            if imgs[n + i].kind(k) == "Z":
                emit(op("CX", k, i))
        if imgs[n + i].kind(i) == "Y":
            emit(op("H", i))
            emit(op("S", i))
            emit(op("H", i))
    for i in range(n):
        if imgs[i].sign < 0:
            emit(op("Z", i))
        if imgs[n + i].sign < 0:
            emit(op("X", i))
    for i in range(n):
        if imgs[i] != PauliString.single(n, i, "X") or imgs[n + i] != PauliString.single(n, i, "Z"):
            raise AssertionError("Clifford reduction did not reach the identity")
    return inverse_circuit(gates)

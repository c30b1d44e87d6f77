"""Bit-packed Pauli strings.

A Pauli string on ``n`` qubits is stored as two integer bitmasks (``x`` and
``z``) plus a phase exponent: the operator is ``i**phase`` times the tensor
product of single-qubit Paulis, where a qubit with both bits set carries ``Y``.
Hermitian strings have an even phase exponent (sign +1 or -1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

MAX_QUBITS = 64

_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_CHAR = {v: k for k, v in _CHAR_BITS.items()}


def popcount(v: int) -> int:
    return bin(v).count("1")


def parity(v: int) -> int:
    return popcount(v) & 1


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if not 0 < self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {self.n}")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("bitmask exceeds qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- construction -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_str(cls, text: str) -> PauliString:
        """Parse strings like ``"XZZXI"``, ``"-YIZ"`` or ``"+iX"``."""
        s = text.strip()
        phase = 0
        if s.startswith("-"):
            phase, s = 2, s[1:]
        elif s.startswith("+"):
            s = s[1:]
        if s.startswith("i"):
            phase, s = phase + 1, s[1:]
        x = z = 0
        for k, ch in enumerate(s):
            bx, bz = _CHAR_BITS[ch]
            x |= bx << k
            z |= bz << k
        return cls(len(s), x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> PauliString:
        bx, bz = _CHAR_BITS[kind]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def from_sparse(cls, n: int, terms: dict[int, str], sign: int = 1) -> PauliString:
        x = z = 0
        for q, kind in terms.items():
            bx, bz = _CHAR_BITS[kind]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z, 0 if sign > 0 else 2)

    # -- properties ---------------------------------------------------
    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n) if m >> q & 1]

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.phase == 0 else -1

    def kind(self, qubit: int) -> str:
        return _BITS_CHAR[(self.x >> qubit & 1, self.z >> qubit & 1)]

    def unsigned(self) -> PauliString:
        return PauliString(self.n, self.x, self.z)

    def negated(self) -> PauliString:
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    # -- algebra ------------------------------------------------------
    def commutes(self, other: PauliString) -> bool:
        self._check(other)
        return parity(self.x & other.z) == parity(self.z & other.x)

    def __mul__(self, other: PauliString) -> PauliString:
        self._check(other)
        x3, z3 = self.x ^ other.x, self.z ^ other.z
        # Y = i X Z, and Z X = -X Z per qubit
        k = (
            self.phase + other.phase
            + popcount(self.x & self.z) + popcount(other.x & other.z)
            + 2 * popcount(self.z & other.x)
            - popcount(x3 & z3)
        )
        return PauliString(self.n, x3, z3, k)

    def tensor(self, other: PauliString) -> PauliString:
        return PauliString(
            self.n + other.n,
            self.x | other.x << self.n,
            self.z | other.z << self.n,
            self.phase + other.phase,
        )

    def embed(self, n: int, offset: int = 0) -> PauliString:
        """Place this string on qubits ``offset..offset+self.n-1`` of ``n``."""
        return PauliString(n, self.x << offset, self.z << offset, self.phase)

    def restrict(self, qubits: Iterable[int]) -> PauliString:
        qs = list(qubits)
        x = z = 0
        for k, q in enumerate(qs):
            x |= (self.x >> q & 1) << k
            z |= (self.z >> q & 1) << k
        return PauliString(len(qs), x, z, self.phase)

    def _check(self, other: PauliString) -> None:
        if self.n != other.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")

    def __str__(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return prefix + "".join(self.kind(q) for q in range(self.n))

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def symplectic_product(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Commutation bit of two (x, z) bitmask pairs: 1 if they anticommute."""
    return parity(a[0] & b[1]) ^ parity(a[1] & b[0])


def all_paulis(n: int, weight: int | None = None) -> Iterable[PauliString]:
    """Every unsigned n-qubit Pauli, optionally of a fixed weight."""
    for x in range(1 << n):
        for z in range(1 << n):
            if weight is None or popcount(x | z) == weight:
                yield PauliString(n, x, z)

"""Stabilizer codes: generators, logical operators, encoders and lookup decoders."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .pauli import PauliString
from .tableau import (
    CliffordOp,
    ConfigurationError,
    StabilizerTableau,
    destabilizers_for,
    op,
    synthesize_clifford,
)

AXES = ("X", "Y", "Z")
CODE_NAMES = ("five", "steane", "surface9", "physical_qubit")


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n: int
    stabilizers: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    css: bool = False
    table: dict[int, PauliString] = field(default_factory=dict, compare=False, repr=False)
    encoder: tuple[CliffordOp, ...] = field(default=(), compare=False, repr=False)

    @property
    def r(self) -> int:
        return len(self.stabilizers)

    def logical(self, axis: str) -> PauliString:
        if axis == "X":
            return self.logical_x
        if axis == "Z":
            return self.logical_z
        if axis == "Y":
            y = self.logical_x * self.logical_z
            return PauliString(y.n, y.x, y.z, y.phase + 1)
        raise ConfigurationError(f"unknown axis {axis!r}; expected one of {AXES}")

    # -- syndromes ----------------------------------------------------
    def syndrome_of(self, e: PauliString) -> int:
        """Bit i is set iff ``e`` anticommutes with stabilizer i."""
        if e.n != self.n:
            raise ValueError(f"size mismatch: {e.n} vs {self.n}")
        s = 0
        for i, g in enumerate(self.stabilizers):
            if not e.commutes(g):
                s |= 1 << i
        return s

    def coordinates(self, e: PauliString) -> int:
        """Syndrome bits, then anticommutation with logical X and logical Z.

        Two Paulis share coordinates iff they differ by a stabilizer (up to phase).
        """
        c = self.syndrome_of(e)
        c |= (not e.commutes(self.logical_x)) << self.r
        c |= (not e.commutes(self.logical_z)) << (self.r + 1)
        return c

    def correction(self, syndrome: int) -> PauliString:
        return self.table[syndrome]

    def is_stabilizer(self, e: PauliString) -> bool:
        """True if ``e`` is in the stabilizer group up to sign."""
        return self.coordinates(e) == 0

    def flips(self, residual: PauliString, axis: str) -> bool:
        """Whether ``residual`` flips the eigenvalue of the ``axis`` logical operator."""
        return not residual.commutes(self.logical(axis))

    def decode_flip(self, e: PauliString, axis: str) -> bool:
        """Logical flip seen by an ideal decoder after lookup correction of ``e``."""
        residual = e * self.table[self.syndrome_of(e)]
        return self.flips(residual, axis)

    # -- vectorized views ---------------------------------------------
    @property
    def stabilizer_masks(self) -> np.ndarray:
        """(r, 2) array of (x, z) bitmasks."""
        return np.array([(g.x, g.z) for g in self.stabilizers], dtype=np.int64).reshape(-1, 2)

    def table_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Correction (x, z) bitmasks indexed by syndrome."""
        size = 1 << self.r
        tx = np.zeros(size, dtype=np.int64)
        tz = np.zeros(size, dtype=np.int64)
        for s, c in self.table.items():
            tx[s], tz[s] = c.x, c.z
        return tx, tz


def _min_weight_table(n: int, stabs: Sequence[PauliString], kinds: str = "XYZ") -> dict[int, PauliString]:
    """Lowest-weight Pauli (over ``kinds``) for every reachable syndrome."""
    table: dict[int, PauliString] = {}
    target = 1 << len(stabs)
    for w in range(n + 1):
        for qs in combinations(range(n), w):
            for ks in product(kinds, repeat=w):
                e = PauliString.from_sparse(n, dict(zip(qs, ks)))
                s = 0
                for i, g in enumerate(stabs):
                    if not e.commutes(g):
                        s |= 1 << i
                table.setdefault(s, e)
        if len(table) == target:
            break
    return table


def _css_table(n: int, stabs: Sequence[PauliString]) -> dict[int, PauliString]:
    """Separable decoding: X part from Z-type checks, Z part from X-type checks."""
    zmask = sum(1 << i for i, g in enumerate(stabs) if g.x == 0)
    xmask = sum(1 << i for i, g in enumerate(stabs) if g.z == 0)
    if zmask | xmask != (1 << len(stabs)) - 1:
        raise ConfigurationError("CSS decoding needs pure X- or Z-type checks")
    xtab = _min_weight_table(n, stabs, "X")
    ztab = _min_weight_table(n, stabs, "Z")
    table = {}
    for s in range(1 << len(stabs)):
        cx = xtab.get(s & zmask)
        cz = ztab.get(s & xmask)
        if cx is None or cz is None:
            continue
        table[s] = PauliString(n, cx.x, cz.z)
    return table


def _encoder(n: int, stabs: Sequence[PauliString], lx: PauliString, lz: PauliString) -> tuple[CliffordOp, ...]:
    """Clifford taking X_0 -> L_X, Z_0 -> L_Z and Z_i -> S_i."""
    if n == 1:
        return ()
    d = destabilizers_for([lz, *stabs])
    xs = [lx]
    for dj in d[1:]:
        if not dj.commutes(lx):
            prod = dj * lz
            dj = PauliString(n, prod.x, prod.z)
        xs.append(dj)
    return tuple(synthesize_clifford(xs, [lz, *stabs]))


def _build(name: str, stab_strs: Sequence[str], lx: str, lz: str, css: bool) -> CodeSpec:
    stabs = tuple(PauliString.from_str(s) for s in stab_strs)
    n = len(lx)
    lxp, lzp = PauliString.from_str(lx), PauliString.from_str(lz)
    table = _css_table(n, stabs) if css else _min_weight_table(n, stabs)
    code = CodeSpec(name, n, stabs, lxp, lzp, css, table, _encoder(n, stabs, lxp, lzp))
    validate_code(code)
    return code


def _from_sets(n: int, sets: Sequence[Sequence[int]], kind: str) -> list[str]:
    return ["".join(kind if q in s else "I" for q in range(n)) for s in sets]


@lru_cache(maxsize=None)
def get_code(name: str) -> CodeSpec:
    if name == "five":
        stabs = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
        return _build("five", stabs, "XXXXX", "ZZZZZ", css=False)
    if name == "steane":
        sets = [(3, 4, 5, 6), (0, 2, 4, 6), (1, 2, 5, 6)]
        stabs = _from_sets(7, sets, "X") + _from_sets(7, sets, "Z")
        return _build("steane", stabs, "XXXIIII", "ZZZIIII", css=True)
    if name == "surface9":
        # 3x3 grid, qubit r*3+c; weight-4 plaquettes plus weight-2 boundary checks
        xs = [(0, 1, 3, 4), (4, 5, 7, 8), (1, 2), (6, 7)]
        zs = [(1, 2, 4, 5), (3, 4, 6, 7), (0, 3), (5, 8)]
        stabs = _from_sets(9, xs, "X") + _from_sets(9, zs, "Z")
        return _build("surface9", stabs, "XIIXIIXII", "ZZZIIIIII", css=True)
    if name == "physical_qubit":
        return CodeSpec("physical_qubit", 1, (), PauliString.from_str("X"), PauliString.from_str("Z"),
                        False, {0: PauliString(1)}, ())
    raise ConfigurationError(f"unknown code {name!r}; expected one of {CODE_NAMES}")


def validate_code(code: CodeSpec) -> None:
    stabs = code.stabilizers
    n = code.n
    for a in stabs:
        for b in stabs:
            if not a.commutes(b):
                raise ConfigurationError(f"{code.name}: stabilizers {a} and {b} anticommute")
    # independence: destabilizers_for raises otherwise
    destabilizers_for(list(stabs))
    if code.logical_x.commutes(code.logical_z):
        raise ConfigurationError(f"{code.name}: logical operators commute")
    for g in stabs:
        if not (g.commutes(code.logical_x) and g.commutes(code.logical_z)):
            raise ConfigurationError(f"{code.name}: logical operator fails to commute with {g}")
    if len(code.table) != 1 << len(stabs):
        raise ConfigurationError(f"{code.name}: lookup table incomplete")
    for s, c in code.table.items():
        if code.syndrome_of(c) != s:
            raise ConfigurationError(f"{code.name}: table entry for {s:b} has the wrong syndrome")
    for q in range(n):
        for k in "XYZ":
            e = PauliString.single(n, q, k)
            if not code.is_stabilizer(e * code.table[code.syndrome_of(e)]):
                raise ConfigurationError(f"{code.name}: weight-1 error {e} not corrected")


def encode_ideal(code: CodeSpec, axis: str, sign: int, extra: int = 0) -> StabilizerTableau:
    """Noiseless logical eigenstate, optionally followed by ``extra`` |0> qubits."""
    n = code.n + extra
    t = StabilizerTableau(n)
    prep = {"X": [op("H", 0)], "Y": [op("H", 0), op("S", 0)], "Z": []}[axis]
    if sign < 0:
        prep = [op("X", 0)] + prep
    t.apply_circuit(prep)
    t.apply_circuit(code.encoder)
    return t


def logical_representatives(code: CodeSpec, axis: str, weight: int) -> list[PauliString]:
    """Signed Paulis of the given weight equal to the ``axis`` logical times a stabilizer."""
    target = code.coordinates(code.logical(axis))
    found = []
    # enumerate the stabilizer group
    group = [PauliString(code.n)]
    for g in code.stabilizers:
        group += [h * g for h in group]
    lg = code.logical(axis)
    for h in group:
        p = lg * h
        if p.weight == weight and code.coordinates(p) == target:
            found.append(p)
    return found


def harmless_weight2_count(code: CodeSpec) -> tuple[int, int]:
    """(harmless, total) weight-2 Paulis under lookup decoding."""
    harmless = total = 0
    for qs in combinations(range(code.n), 2):
        for ks in product("XYZ", repeat=2):
            e = PauliString.from_sparse(code.n, dict(zip(qs, ks)))
            total += 1
            if code.is_stabilizer(e * code.table[code.syndrome_of(e)]):
                harmless += 1
    return harmless, total


__all__ = [
    "AXES",
    "CODE_NAMES",
    "CodeSpec",
    "encode_ideal",
    "get_code",
    "harmless_weight2_count",
    "logical_representatives",
    "validate_code",
]

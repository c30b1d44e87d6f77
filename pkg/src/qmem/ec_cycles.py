"""Error-correction cycles: syndrome extraction plus lookup correction.

A cycle measures the stabilizers with noisy ancilla circuits and applies the
lookup correction noiselessly.  Four styles are provided:

* ``non_ft``: one ancilla in |+>, controlled-Pauli couplings, one round.
* ``shor_ft``: verified four-qubit cat state per stabilizer, three rounds.
* ``flag_ft``: syndrome ancilla plus flag ancilla, three rounds, flag tables.
* ``surface_ordered``: interleaved four-step schedule on the nine-qubit
  surface code with hook errors aligned away from the logical operators,
  three rounds (a single round is available via ``rounds=1``).

Ancilla |+> states are made by a Z-basis preparation and a Hadamard, and
controlled-Z couplings are single gates by default (see ``coupling``).
Data qubits are ``0..n-1`` and ancillas follow.  Circuits are element lists
of ``("prep", q, basis)``, ``("gate", CliffordOp)`` and ``("meas", q, basis)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codes import CodeSpec, get_code
from .noise import FaultInjector, NoNoise, fault_codes
from .pauli import PauliString
from .sim import FrameBackend, Machine
from .tableau import ConfigurationError, op

EC_STYLES = ("non_ft", "shor_ft", "flag_ft", "surface_ordered")
VALID_CODES = {
    "non_ft": ("five", "steane", "surface9"),
    "shor_ft": ("five", "steane"),
    "flag_ft": ("five", "steane"),
    "surface_ordered": ("surface9",),
}
ANCILLAS = {"non_ft": 1, "shor_ft": 5, "flag_ft": 2, "surface_ordered": 6}
COUPLINGS = ("native", "conjugated")
REPEATS = ("adaptive", "fixed")


@dataclass
class EcOutcome:
    syndrome: np.ndarray
    flag_raised: np.ndarray
    correction_x: np.ndarray
    correction_z: np.ndarray
    ancilla_usage: int


def check_style(code_name: str, style: str) -> None:
    if style not in EC_STYLES:
        raise ConfigurationError(f"unknown ec_style {style!r}; valid styles: {', '.join(EC_STYLES)}")
    if code_name not in VALID_CODES[style]:
        raise ConfigurationError(
            f"ec_style {style!r} is not available for code {code_name!r} (valid: {VALID_CODES[style]})")


def plus_prep(q: int) -> list[tuple]:
    """|+> as a Z-basis preparation followed by a Hadamard (two noisy elements)."""
    return [("prep", q, "Z"), ("gate", op("H", q))]


def coupling(kind: str, a: int, q: int, mode: str = "native") -> list[tuple]:
    """Controlled-``kind`` with ancilla ``a`` as control and data ``q`` as target.

    ``native`` uses one two-qubit gate for controlled-X and controlled-Z;
    ``conjugated`` builds controlled-Z as H CX H on the data qubit.
    Controlled-Y is S^dag CX S in both modes.
    """
    if kind == "X":
        return [("gate", op("CX", a, q))]
    if kind == "Z":
        if mode == "native":
            return [("gate", op("CZ", a, q))]
        return [("gate", op("H", q)), ("gate", op("CX", a, q)), ("gate", op("H", q))]
    if kind == "Y":
        return [("gate", op("SDG", q)), ("gate", op("CX", a, q)), ("gate", op("S", q))]
    raise ValueError(kind)


def nonft_block(code: CodeSpec, k: int, anc: int, mode: str = "native") -> list[tuple]:
    g = code.stabilizers[k]
    ops: list[tuple] = plus_prep(anc)
    for q in g.support:
        ops += coupling(g.kind(q), anc, q, mode)
    ops.append(("meas", anc, "X"))
    return ops


def flag_block(code: CodeSpec, k: int, anc: int, flag: int, mode: str = "native") -> list[tuple]:
    g = code.stabilizers[k]
    s = g.support
    if len(s) != 4:
        raise ConfigurationError("flag circuits are built for weight-4 stabilizers")
    ops: list[tuple] = plus_prep(anc) + [("prep", flag, "Z")]
    ops += coupling(g.kind(s[0]), anc, s[0], mode)
    ops.append(("gate", op("CX", anc, flag)))
    ops += coupling(g.kind(s[1]), anc, s[1], mode)
    ops += coupling(g.kind(s[2]), anc, s[2], mode)
    ops.append(("gate", op("CX", anc, flag)))
    ops += coupling(g.kind(s[3]), anc, s[3], mode)
    ops += [("meas", anc, "X"), ("meas", flag, "Z")]
    return ops


def cat_prep_ops(cat: list[int], verifier: int) -> list[tuple]:
    a0, a1, a2, a3 = cat
    return [
        *plus_prep(a0), ("prep", a1, "Z"), ("prep", a2, "Z"), ("prep", a3, "Z"),
        ("gate", op("CX", a0, a1)), ("gate", op("CX", a1, a2)), ("gate", op("CX", a2, a3)),
        ("prep", verifier, "Z"), ("gate", op("CX", a0, verifier)), ("gate", op("CX", a3, verifier)),
        ("meas", verifier, "Z"),
    ]


# four-step schedule for the nine-qubit surface code: check -> ((qubit, step), ...)
SURFACE_SCHEDULE = {
    0: ((0, 1), (1, 2), (3, 3), (4, 4)),   # X plaquette, Z-shaped order
    1: ((4, 1), (5, 2), (7, 3), (8, 4)),   # X plaquette
    2: ((1, 3), (2, 4)),                   # X boundary, steps 3-4
    3: ((6, 1), (7, 2)),                   # X boundary, steps 1-2
    4: ((1, 1), (4, 2), (2, 3), (5, 4)),   # Z plaquette, N-shaped order
    5: ((3, 1), (6, 2), (4, 3), (7, 4)),   # Z plaquette
    6: ((0, 3), (3, 4)),                   # Z boundary, steps 3-4 (reuses check 3's ancilla)
    7: ((5, 1), (8, 2)),                   # Z boundary, steps 1-2 (then check 2 reuses it)
}
# check -> ancilla slot; slots 4 and 5 serve two boundary checks each
SURFACE_ANCILLA = {0: 0, 1: 1, 4: 2, 5: 3, 3: 4, 6: 4, 7: 5, 2: 5}


def surface_ordered_ops(code: CodeSpec, schedule=None) -> list[tuple]:
    schedule = SURFACE_SCHEDULE if schedule is None else schedule
    n = code.n
    anc = {k: n + s for k, s in SURFACE_ANCILLA.items()}
    is_x = {k: code.stabilizers[k].z == 0 for k in schedule}
    first = {k: min(st for _, st in schedule[k]) for k in schedule}
    last = {k: max(st for _, st in schedule[k]) for k in schedule}
    ops: list[tuple] = []
    for k in sorted(schedule, key=lambda k: (first[k], k)):
        if first[k] == 1:
            ops += plus_prep(anc[k]) if is_x[k] else [("prep", anc[k], "Z")]
    for step in range(1, 5):
        for k in sorted(schedule):
            if first[k] == step and step > 1:
                ops += plus_prep(anc[k]) if is_x[k] else [("prep", anc[k], "Z")]
        for k in sorted(schedule):
            for q, st in schedule[k]:
                if st == step:
                    g = op("CX", anc[k], q) if is_x[k] else op("CX", q, anc[k])
                    ops.append(("gate", g))
        for k in sorted(schedule):
            if last[k] == step:
                ops.append(("meas", anc[k], "X" if is_x[k] else "Z", k))
    return ops


class EcCycle:
    """A syndrome-extraction cycle for a given (code, style, coupling)."""

    def __init__(self, code: CodeSpec, style: str, mode: str = "native", rounds: int | None = None,
                 repeat: str = "adaptive"):
        check_style(code.name, style)
        if mode not in COUPLINGS:
            raise ConfigurationError(f"unknown coupling {mode!r}; valid: {COUPLINGS}")
        self.code = code
        self.style = style
        self.mode = mode
        self.n_anc = ANCILLAS[style]
        self.rounds = rounds if rounds is not None else (1 if style == "non_ft" else 3)
        if repeat not in REPEATS:
            raise ConfigurationError(f"unknown repeat rule {repeat!r}; valid: {REPEATS}")
        self.repeat = repeat
        n = code.n
        self.n_qubits = n + self.n_anc
        self.tx, self.tz = code.table_arrays()
        if style in ("non_ft", "flag_ft"):
            self.plain_blocks = [nonft_block(code, k, n, mode) for k in range(code.r)]
        if style == "flag_ft":
            self.blocks = [flag_block(code, k, n, n + 1, mode) for k in range(code.r)]
            self.flag_tables = build_flag_tables(code.name, mode)
        elif style == "surface_ordered":
            self.surface_ops = surface_ordered_ops(code)

    # -- syndrome extraction ------------------------------------------
    def _round(self, m: Machine, idx: np.ndarray, follow_up: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """One full round; returns (syndrome, flagged, first flagged stabilizer).

        Adaptive flag cycles run their follow-up rounds with unflagged circuits.
        """
        code, n = self.code, self.code.n
        s = np.zeros(len(idx), dtype=np.int64)
        flagged = np.zeros(len(idx), dtype=bool)
        where = np.full(len(idx), -1, dtype=np.int64)
        plain = self.style == "flag_ft" and follow_up and self.repeat == "adaptive"
        if self.style == "non_ft" or plain:
            for k, block in enumerate(self.plain_blocks):
                (b,) = m.run(block, idx)
                s |= b.astype(np.int64) << k
        elif self.style == "flag_ft":
            for k, block in enumerate(self.blocks):
                b, f = m.run(block, idx)
                s |= b.astype(np.int64) << k
                new = (f == 1) & ~flagged
                where[new] = k
                flagged |= f == 1
        elif self.style == "shor_ft":
            cat = [n, n + 1, n + 2, n + 3]
            for k, g in enumerate(code.stabilizers):
                pending = idx
                while pending.size:
                    (v,) = m.run(cat_prep_ops(cat, n + 4), pending)
                    pending = pending[v == 1]
                for a, q in zip(cat, g.support):
                    m.run(coupling(g.kind(q), a, q, self.mode), idx)
                if code.name == "five":
                    m.run([("gate", op("CX", cat[2], cat[3])), ("gate", op("CX", cat[1], cat[2])),
                           ("gate", op("CX", cat[0], cat[1]))], idx)
                    b = m.measure(cat[0], "X", idx)
                else:
                    b = np.zeros(len(idx), dtype=np.uint8)
                    for a in cat:
                        b ^= m.measure(a, "X", idx)
                s |= b.astype(np.int64) << k
        else:
            for e in self.surface_ops:
                if e[0] == "prep":
                    m.prep(e[1], e[2], idx)
                elif e[0] == "gate":
                    m.gate(e[1].kind, e[1].targets, idx)
                else:
                    b = m.measure(e[1], e[2], idx)
                    s |= b.astype(np.int64) << e[3]
        return s, flagged, where

    def measure_syndrome(self, m: Machine, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Returns (syndrome, correction_x, correction_z, flag_raised).

        With ``repeat="adaptive"`` a first round that is trivial and unflagged
        ends the cycle; only the other trials run the remaining rounds.
        """
        first = self._round(m, idx)
        s = first[0].copy()
        if self.rounds == 1:
            return s, self.tx[s], self.tz[s], first[1]
        cx, cz = self.tx[s].copy(), self.tz[s].copy()
        flag_any = np.zeros(len(idx), dtype=bool)
        if self.repeat == "adaptive":
            sel = np.flatnonzero((first[0] != 0) | first[1])
        else:
            sel = np.arange(len(idx))
        if sel.size:
            sub = idx[sel]
            rounds = [tuple(v[sel] for v in first)]
            rounds += [self._round(m, sub, follow_up=True) for _ in range(self.rounds - 1)]
            s[sel], cx[sel], cz[sel], flag_any[sel] = self._decide(m, sub, rounds)
        return s, cx, cz, flag_any

    def _decide(self, m: Machine, idx: np.ndarray, rounds: list[tuple]) -> tuple[np.ndarray, ...]:
        syn = [r[0] for r in rounds]
        # two agreeing rounds win, otherwise trust the last round
        s = syn[-1].copy()
        if self.rounds == 3:
            s1, s2, s3 = syn
            agree12 = (s1 == s2) & (s2 != s3) & (s1 != s3)
            s[agree12] = s1[agree12]
        cx, cz = self.tx[s].copy(), self.tz[s].copy()
        flag_any = np.zeros(len(idx), dtype=bool)
        if self.style == "flag_ft":
            decided = np.zeros(len(idx), dtype=bool)
            for r, (_, flagged, where) in enumerate(rounds):
                new = flagged & ~decided
                if not new.any():
                    continue
                decided |= new
                flag_any |= new
                if r + 1 < len(rounds):
                    nxt = syn[r + 1][new]
                else:
                    nxt, _, _ = self._round(m, idx[new], follow_up=True)
                fx, fz = self.flag_tables
                w = where[new]
                s[new] = nxt
                cx[new] = fx[w, nxt]
                cz[new] = fz[w, nxt]
        return s, cx, cz, flag_any

    def run(self, m: Machine, idx: np.ndarray, noisy_correction: bool = False) -> EcOutcome:
        """Extract the syndrome and apply the correction.

        The correction is noiseless unless ``noisy_correction`` is set, in
        which case every corrected qubit also suffers one-qubit gate noise.
        """
        s, cx, cz, flagged = self.measure_syndrome(m, idx)
        m.backend.apply_masks(range(self.code.n), cx, cz, idx)
        if noisy_correction:
            for q in range(self.code.n):
                hit = ((cx | cz) >> q & 1).astype(bool)
                if hit.any():
                    m.noise.element(m.backend, "gate1", (q,), idx[hit])
        return EcOutcome(s, flagged, cx, cz, self.n_anc)


@lru_cache(maxsize=None)
def build_flag_tables(code_name: str, mode: str = "native") -> tuple[np.ndarray, np.ndarray]:
    """Per-stabilizer correction tables used after a raised flag.

    Every single fault in stabilizer k's flagged circuit that raises the flag
    is injected; the resulting data error is recorded against its syndrome.
    Two inequivalent errors with the same syndrome are a collision.
    Syndromes never produced fall back to the ordinary lookup table.
    """
    code = get_code(code_name)
    n, r = code.n, code.r
    fx = np.zeros((r, 1 << r), dtype=np.int64)
    fz = np.zeros((r, 1 << r), dtype=np.int64)
    tx, tz = code.table_arrays()
    for k in range(r):
        block = flag_block(code, k, n, n + 1, mode)
        entries: dict[int, PauliString] = {}
        probe = FaultInjector(1)
        Machine(FrameBackend(n + 2, 1), probe, range(n)).run(block, np.arange(1))
        locs, codes = [], []
        for loc, kind in enumerate(probe.kinds):
            for c in fault_codes(kind):
                locs.append(loc)
                codes.append(c)
        N = len(locs)
        be = FrameBackend(n + 2, N)
        inj = FaultInjector(N, locs, codes)
        idx = np.arange(N)
        _, flag = Machine(be, inj, range(n)).run(block, idx)
        ex, ez = be.data_masks(range(n), idx)
        for i in np.flatnonzero(flag == 1):
            e = PauliString(n, int(ex[i]), int(ez[i]))
            s = code.syndrome_of(e)
            prev = entries.setdefault(s, e)
            if not code.is_stabilizer(prev * e):
                raise ConfigurationError(
                    f"flag table collision for {code_name} stabilizer {k}: {prev} vs {e}")
        fx[k], fz[k] = tx, tz
        for s, e in entries.items():
            fx[k, s], fz[k, s] = e.x, e.z
    return fx, fz


def make_cycle(code_name: str, style: str, mode: str = "native", rounds: int | None = None,
               repeat: str = "adaptive") -> EcCycle:
    return _cached_cycle(code_name, style, mode, rounds, repeat)


@lru_cache(maxsize=None)
def _cached_cycle(code_name: str, style: str, mode: str, rounds: int | None, repeat: str) -> EcCycle:
    return EcCycle(get_code(code_name), style, mode, rounds, repeat)


def noiseless_machine(n_qubits: int, n_data: int, n_trials: int = 1) -> Machine:
    return Machine(FrameBackend(n_qubits, n_trials), NoNoise(), range(n_data))


def fault_locations(run, n_qubits: int, n_data: int) -> list[tuple[int, str]]:
    """Element kinds seen by a noiseless run of ``run(machine, idx)``."""
    probe = FaultInjector(1)
    run(Machine(FrameBackend(n_qubits, 1), probe, range(n_data)), np.arange(1))
    return list(enumerate(probe.kinds))


def single_fault_failures(run, code: CodeSpec, n_qubits: int, axes=("X", "Y", "Z")) -> list[tuple[int, str, int]]:
    """Inject every single fault into ``run`` and list those that end in a logical flip.

    After the faulty run an ideal decoder reads the data qubits; a failure is
    a flip of any of the given logical axes.
    """
    locs, codes, kinds = [], [], []
    for loc, kind in fault_locations(run, n_qubits, code.n):
        for c in fault_codes(kind):
            locs.append(loc)
            codes.append(c)
            kinds.append(kind)
    N = len(locs)
    be = FrameBackend(n_qubits, N)
    idx = np.arange(N)
    run(Machine(be, FaultInjector(N, locs, codes), range(code.n)), idx)
    bad = np.zeros(N, dtype=bool)
    for axis in axes:
        bad |= be.ideal_bob(code, range(code.n), axis, idx, 0) == 1
    return [(locs[i], kinds[i], codes[i]) for i in np.flatnonzero(bad)]


def cycle_failures(code_name: str, style: str, mode: str = "native",
                   rounds: int | None = None, repeat: str = "adaptive") -> list[tuple[int, str, int]]:
    cyc = make_cycle(code_name, style, mode, rounds, repeat)
    return single_fault_failures(cyc.run, cyc.code, cyc.n_qubits)

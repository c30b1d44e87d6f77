"""Alice (state preparation) and Bob (read-out) variants.

``ideal`` endpoints are noiseless and work for every code and axis.  The
noisy variants run real circuits through the machine's noise model:

* ``noisy_ft`` (Steane, Z axis): |0>_L from three pivot qubits fanned out
  with CNOTs, verified by one extra qubit measuring a weight-3 logical Z;
  Alice restarts until the verifier reads 0.  Bob measures all seven qubits
  in Z, fixes one bit with the Hamming checks and reads the logical parity.
* ``noisy_non_ft`` (five-qubit, X axis): a logical X eigenstate from a
  graph-state circuit (ring of CZ gates), read out by measuring a weight-3
  representative of logical X.

The logical sign Alice picks is applied as a noiseless logical Pauli after
her circuit, so both signs share one circuit.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations, product

import numpy as np

from .codes import CodeSpec, get_code, logical_representatives
from .noise import FaultInjector, fault_codes
from .pauli import PauliString
from .sim import FrameBackend, Machine
from .tableau import CliffordOp, ConfigurationError, conjugate_circuit, op

ENDPOINT_STYLES = ("ideal", "noisy_ft", "noisy_non_ft")
# style -> (code, axis) it supports
NOISY_SUPPORT = {"noisy_ft": ("steane", "Z"), "noisy_non_ft": ("five", "X")}
ENDPOINT_ANCILLAS = {"ideal": 0, "noisy_ft": 1, "noisy_non_ft": 0}

# Steane pivots: the one qubit unique to each X-type check (sets A, B, C)
STEANE_PIVOTS = (3, 0, 1)


def check_endpoint(style: str, code_name: str, axes) -> None:
    if style not in ENDPOINT_STYLES:
        raise ConfigurationError(f"unknown endpoint style {style!r}; valid: {', '.join(ENDPOINT_STYLES)}")
    if style == "ideal":
        return
    code, axis = NOISY_SUPPORT[style]
    if code_name != code:
        raise ConfigurationError(f"endpoint style {style!r} is implemented for code {code!r} only")
    if tuple(axes) != (axis,):
        raise ConfigurationError(f"endpoint style {style!r} prepares {axis}-axis states only; set axes=[{axis!r}]")


# -- Steane verified preparation ------------------------------------------
def steane_prep_ops(orders, verifier_support, verifier: int = 7) -> list[tuple]:
    """Pivot fan-out preparation of |0>_L followed by one Z-parity check."""
    ops: list[tuple] = []
    for q in range(7):
        ops.append(("prep", q, "X" if q in STEANE_PIVOTS else "Z"))
    for layer in range(3):
        for p, order in zip(STEANE_PIVOTS, orders):
            ops.append(("gate", op("CX", p, order[layer])))
    ops.append(("prep", verifier, "Z"))
    for q in verifier_support:
        ops.append(("gate", op("CX", q, verifier)))
    ops.append(("meas", verifier, "Z"))
    return ops


def _prep_failures(code: CodeSpec, ops: list[tuple]) -> int:
    """Accepted single faults that leave an uncorrectable X error on |0>_L."""
    probe = FaultInjector(1)
    Machine(FrameBackend(8, 1), probe, range(7)).run(ops, np.arange(1))
    locs, codes = [], []
    for loc, kind in enumerate(probe.kinds):
        for c in fault_codes(kind):
            locs.append(loc)
            codes.append(c)
    N = len(locs)
    be = FrameBackend(8, N)
    (v,) = Machine(be, FaultInjector(N, locs, codes), range(7)).run(ops, np.arange(N))
    ex, ez = be.data_masks(range(7), np.arange(N))
    bad = 0
    for i in np.flatnonzero(v == 0):
        if code.decode_flip(PauliString(7, int(ex[i]), 0), "Z"):
            bad += 1
    return bad


@lru_cache(maxsize=None)
def steane_prep_design() -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Fan-out orders and verifier support, found by exhaustive single-fault search."""
    code = get_code("steane")
    sets = [(3, 4, 5, 6), (0, 2, 4, 6), (1, 2, 5, 6)]
    choices = [list(permutations([q for q in s if q != p])) for p, s in zip(STEANE_PIVOTS, sets)]
    reps = [tuple(r.support) for r in logical_representatives(code, "Z", 3)]
    for orders in product(*choices):
        for support in reps:
            if _prep_failures(code, steane_prep_ops(orders, support)) == 0:
                return tuple(orders), support
    raise ConfigurationError("no single-fault-safe Steane preparation found")


# -- five-qubit graph-state preparation ------------------------------------
_LOCAL = ((), ("H",), ("S",), ("H", "S"), ("S", "H"), ("H", "S", "H"))


def _graph_form(gens: list[PauliString]):
    """Reduce generators to rows X_i Z^A_i; None unless the X block has full rank."""
    n = gens[0].n
    rows = list(gens)
    for i in range(n):
        piv = next((j for j in range(i, n) if rows[j].x >> i & 1), None)
        if piv is None:
            return None
        rows[i], rows[piv] = rows[piv], rows[i]
        for j in range(n):
            if j != i and rows[j].x >> i & 1:
                rows[j] = rows[j] * rows[i]
    for i, r in enumerate(rows):
        if r.x != 1 << i or r.z >> i & 1:
            return None
    adj = [[rows[i].z >> j & 1 for j in range(n)] for i in range(n)]
    if any(adj[i][j] != adj[j][i] for i in range(n) for j in range(n)):
        return None
    return adj, [r.sign for r in rows]


@lru_cache(maxsize=None)
def five_prep_gates() -> tuple[tuple[CliffordOp, ...], int]:
    """Shortest graph-state circuit (after |+> on all five qubits) for |+>_L or |->_L.

    Returns the gates and the sign bit of the state they prepare.
    """
    code = get_code("five")
    best = None
    for sign_bit in (0, 1):
        lx = code.logical_x.negated() if sign_bit else code.logical_x
        gens = list(code.stabilizers) + [lx]
        for choice in product(range(len(_LOCAL)), repeat=code.n):
            u = [op(g, q) for q, c in enumerate(choice) for g in _LOCAL[c]]
            form = _graph_form([conjugate_circuit(g, u) for g in gens])
            if form is None:
                continue
            adj, signs = form
            edges = [(i, j) for i in range(code.n) for j in range(i + 1, code.n) if adj[i][j]]
            gates = [op("CZ", i, j) for i, j in edges]
            gates += [op("Z", i) for i, s in enumerate(signs) if s < 0]
            gates += [g.inverse() for g in reversed(u)]
            if best is None or len(gates) < len(best[0]):
                best = (tuple(gates), sign_bit)
    if best is None:
        raise ConfigurationError("five-qubit code state is not locally equivalent to a graph state")
    return best


def five_prep_ops() -> list[tuple]:
    return [("prep", q, "X") for q in range(5)] + [("gate", g) for g in five_prep_gates()[0]]


@lru_cache(maxsize=None)
def five_readout() -> PauliString:
    """Weight-3 logical X representative with the fewest Y factors."""
    reps = logical_representatives(get_code("five"), "X", 3)
    return min(reps, key=lambda p: (sum(p.kind(q) == "Y" for q in p.support), p.support))


# -- agents -----------------------------------------------------------------
def alice_prepare(m: Machine, style: str, code: CodeSpec, axis: str, signs: np.ndarray,
                  idx: np.ndarray) -> int:
    """Prepare the signed ``axis`` eigenstate on data qubits; returns restarts used."""
    if style == "ideal":
        m.backend.load_ideal(code, axis, signs, idx)
        return 0
    restarts = 0
    if style == "noisy_ft":
        orders, support = steane_prep_design()
        ops = steane_prep_ops(orders, support, code.n)
        pending = idx
        while pending.size:
            (v,) = m.run(ops, pending)
            pending = pending[v == 1]
            restarts += pending.size
        flip = code.logical_x
    else:
        m.run(five_prep_ops(), idx)
        flip = code.logical_z
        signs = signs ^ five_prep_gates()[1]
    m.backend.apply_pauli(flip, idx[signs == 1])
    return restarts


def bob_guess(m: Machine, style: str, code: CodeSpec, axis: str, signs: np.ndarray,
              idx: np.ndarray) -> np.ndarray:
    """Guessed sign bit (1 means the -1 eigenstate) per trial."""
    if style == "ideal":
        return m.backend.ideal_bob(code, range(code.n), axis, idx, signs)
    if style == "noisy_ft":
        # reference word 1111111 is the odd-parity codeword for the - sign
        bits = np.array([m.measure(q, "Z", idx, signs) for q in range(code.n)], dtype=np.uint8)
        return hamming_decode(code, bits)
    rep = five_readout()
    sbit = int(rep.sign < 0)
    out = np.full(len(idx), sbit, dtype=np.uint8)
    for j, q in enumerate(rep.support):
        ref = signs ^ sbit if j == 0 else 0
        out ^= m.measure(q, rep.kind(q), idx, ref)
    return out


def hamming_decode(code: CodeSpec, bits: np.ndarray) -> np.ndarray:
    """Classical single-bit correction of Z read-outs, then logical Z parity.

    ``bits`` has shape (n, trials).
    """
    zchecks = [g.z for g in code.stabilizers if g.x == 0]
    syn = np.zeros(bits.shape[1], dtype=np.int64)
    for k, mask in enumerate(zchecks):
        par = np.zeros(bits.shape[1], dtype=np.uint8)
        for q in range(code.n):
            if mask >> q & 1:
                par ^= bits[q]
        syn |= par.astype(np.int64) << k
    fix = np.full(1 << len(zchecks), -1, dtype=np.int64)
    for q in range(code.n):
        fix[sum((mask >> q & 1) << k for k, mask in enumerate(zchecks))] = q
    out = np.zeros(bits.shape[1], dtype=np.uint8)
    for q in code.logical_z.support:
        out ^= bits[q] ^ (fix[syn] == q)
    return out

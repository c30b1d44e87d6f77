"""Exact logical channels for ideal-endpoint memories with non-FT cycles.

Two independent routes compute the same channel:

* ``frame_distribution``: a dynamic program over the Pauli frame reduced to
  its coordinates (syndrome bits plus anticommutation with the logical
  operators), extended by the syndrome record of the running cycle.  Noise
  enters as XOR-convolutions evaluated with a fast Walsh-Hadamard transform.
* ``dense_channel``: density matrices with every measurement branch
  enumerated and the correction applied per branch.

Both are exact (no sampling).  Configurations outside their reach raise
``OracleUnavailable``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codes import AXES, CodeSpec, get_code
from .dense import (
    MAX_DENSITY_QUBITS,
    ChannelMap,
    DensityMatrix,
    OracleUnavailable,
    bloch_state,
    pauli_matrix,
    trace_distance,
)
from .ec_cycles import EcCycle, make_cycle
from .noise import FaultInjector, NoNoise, env_pauli_probs, fault_codes
from .pauli import PauliString
from .sim import FrameBackend, Machine
from .tableau import op


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along a power-of-two axis."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        a = np.concatenate([v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]], axis=1).reshape(n)
        h *= 2
    return a


def xor_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distribution of i ^ j for independent i ~ a, j ~ b."""
    return fwht(fwht(a) * fwht(b)) / len(a)


def check_oracle(cfg) -> None:
    """Raise ``OracleUnavailable`` unless ``cfg`` is within exact reach."""
    if cfg.alice_style != "ideal" or cfg.bob_style != "ideal":
        raise OracleUnavailable("exact channels need ideal Alice and Bob")
    if cfg.m and cfg.ec_style != "non_ft":
        raise OracleUnavailable(f"no exact oracle for ec_style {cfg.ec_style!r}: repeated rounds branch adaptively")
    if cfg.m and cfg.rounds not in (None, 1):
        raise OracleUnavailable("exact oracle covers single-round cycles only")
    if cfg.m and cfg.noisy_correction:
        raise OracleUnavailable("exact oracle assumes noiseless corrections")


def _segments(cfg) -> list[tuple[str, float]]:
    out = []
    for _ in range(cfg.m):
        out += [("idle", cfg.segment), ("cycle", 0.0)]
    out.append(("idle", cfg.segment if cfg.m else cfg.duration))
    return out


# -- frame dynamic program ---------------------------------------------------
def _coords(code: CodeSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Vectorized ``CodeSpec.coordinates`` for frames given as bitmasks."""
    ops = list(code.stabilizers) + [code.logical_x, code.logical_z]
    c = np.zeros(np.shape(x), dtype=np.int64)
    for k, g in enumerate(ops):
        bit = np.bitwise_count((x & g.z) ^ (z & g.x)) & 1
        c |= bit.astype(np.int64) << k
    return c


def _env_distribution(code: CodeSpec, t: float, params) -> np.ndarray:
    size = 1 << (code.r + 2)
    dist = np.zeros(size)
    dist[0] = 1.0
    if t <= 0:
        return dist
    probs = env_pauli_probs(t, params)
    spec = np.ones(size)
    for q in range(code.n):
        one = np.zeros(size)
        for (px, pz), pr in zip(((0, 0), (1, 0), (1, 1), (0, 1)), probs):
            one[int(_coords(code, np.int64(px << q), np.int64(pz << q)))] += pr
        spec *= fwht(one)
    return fwht(spec) / size


@dataclass(frozen=True)
class BlockModel:
    """Net effect of one check-measurement block with its internal faults.

    ``faults[j]`` lists (probability, coordinate shift, record flip) triples
    for location ``j``; an incoming frame keeps its coordinates and adds
    its syndrome bit ``k`` to the record.
    """

    k: int
    faults: tuple[tuple[tuple[float, int, int], ...], ...]


def _block_model(cycle: EcCycle, k: int, p_e: float) -> BlockModel:
    code, block = cycle.code, cycle.plain_blocks[k]
    nq = cycle.n_qubits
    # incoming data frames must pass through unchanged and be read into the record
    for q in range(code.n):
        for px, pz in ((1, 0), (0, 1)):
            be = FrameBackend(nq, 1)
            be.x[q, 0], be.z[q, 0] = bool(px), bool(pz)
            (bit,) = Machine(be, NoNoise(), range(code.n)).run(block, np.arange(1))
            fx, fz = be.data_masks(range(code.n), np.arange(1))
            before = int(_coords(code, np.int64(px << q), np.int64(pz << q)))
            after = int(_coords(code, fx, fz)[0])
            if after != before or int(bit[0]) != before >> k & 1:
                raise OracleUnavailable(f"check block {k} is not a transparent syndrome read-out")
    probe = FaultInjector(1)
    Machine(FrameBackend(nq, 1), probe, range(code.n)).run(block, np.arange(1))
    locs, codes = [], []
    for loc, kind in enumerate(probe.kinds):
        for c in fault_codes(kind):
            locs.append(loc)
            codes.append(c)
    N = len(locs)
    be = FrameBackend(nq, N)
    (bits,) = Machine(be, FaultInjector(N, locs, codes), range(code.n)).run(block, np.arange(N))
    fx, fz = be.data_masks(range(code.n), np.arange(N))
    shift = _coords(code, fx, fz)
    faults = []
    for loc, kind in enumerate(probe.kinds):
        sel = [i for i in range(N) if locs[i] == loc]
        pr = p_e / len(sel)
        faults.append(tuple((pr, int(shift[i]), int(bits[i])) for i in sel))
    return BlockModel(k, tuple(faults))


@lru_cache(maxsize=64)
def _cycle_tables(code_name: str, coupling: str, p_e: float):
    cycle = make_cycle(code_name, "non_ft", coupling, 1)
    code = cycle.code
    blocks = [_block_model(cycle, k, p_e) for k in range(code.r)]
    corr = np.array([code.coordinates(code.table[s]) for s in range(1 << code.r)], dtype=np.int64)
    return blocks, corr


def _apply_cycle(dist: np.ndarray, code: CodeSpec, blocks, corr) -> np.ndarray:
    """One non-FT cycle on a coordinate distribution; returns the new distribution."""
    w = code.r + 2
    size = 1 << (w + code.r)
    full = np.zeros(size)
    full[: len(dist)] = dist
    idx = np.arange(size, dtype=np.int64)
    low = idx & ((1 << w) - 1)
    for b in blocks:
        rec = 1 << (w + b.k)
        moved = np.zeros(size)
        moved[idx ^ (((idx >> b.k) & 1) * rec)] = full
        # fault spectrum lives on the coordinate bits plus record bit k
        spec = np.ones(2 << w)
        for loc in b.faults:
            one = np.zeros(2 << w)
            one[0] = 1.0 - sum(p for p, _, _ in loc)
            for p, shift, flip in loc:
                one[shift | (flip << w)] += p
            spec *= fwht(one)
        full = fwht(fwht(moved) * spec[low | (((idx >> (w + b.k)) & 1) << w)]) / size
    cls = idx & ((1 << w) - 1)
    record = idx >> w
    return np.bincount(cls ^ corr[record], weights=full, minlength=1 << w)


def frame_distribution(cfg) -> np.ndarray:
    """Exact distribution of the final frame coordinates (before Bob)."""
    check_oracle(cfg)
    return _frame_distribution(cfg.code, cfg.coupling, cfg.noise, tuple(_segments(cfg))).copy()


@lru_cache(maxsize=256)
def _frame_distribution(code_name: str, coupling: str, noise, segments) -> np.ndarray:
    code = get_code(code_name)
    dist = np.zeros(1 << (code.r + 2))
    dist[0] = 1.0
    tables = None
    for kind, t in segments:
        if kind == "idle":
            dist = xor_convolve(dist, _env_distribution(code, t, noise))
        else:
            tables = tables or _cycle_tables(code_name, coupling, noise.p_e)
            dist = _apply_cycle(dist, code, *tables)
    return np.clip(dist, 0.0, None)


def _flip_bits(code: CodeSpec, coords: np.ndarray, axis: str) -> np.ndarray:
    ax = (coords >> code.r) & 1
    az = (coords >> (code.r + 1)) & 1
    return {"X": ax, "Z": az, "Y": ax ^ az}[axis]


def logical_probabilities(cfg) -> tuple[float, float, float, float]:
    """(I, X, Y, Z) weights of the decoded logical Pauli channel."""
    code = get_code(cfg.code)
    dist = frame_distribution(cfg)
    coords = np.arange(len(dist), dtype=np.int64)
    tx, tz = code.table_arrays()
    s = coords & ((1 << code.r) - 1)
    resid = coords ^ _coords(code, tx[s], tz[s])
    ax = (resid >> code.r) & 1   # anticommutes with logical X: a Z-type logical
    az = (resid >> (code.r + 1)) & 1
    p = np.bincount(ax * 2 + az, weights=dist, minlength=4)
    # ax=0,az=1 -> X ; ax=1,az=1 -> Y ; ax=1,az=0 -> Z
    total = p.sum()
    return p[0] / total, p[1] / total, p[3] / total, p[2] / total


def exact_channel(cfg) -> ChannelMap:
    """Logical channel seen through Igor's cycles and a lookup-decoding Bob."""
    return ChannelMap.from_pauli_probabilities(*logical_probabilities(cfg))


def exact_guess_probabilities(cfg) -> dict[str, float]:
    ch = exact_channel(cfg)
    return {a: 0.5 * (1 + ch.ptm[i + 1, i + 1]) for i, a in enumerate(AXES)}


def exact_integrity(cfg) -> float:
    pg = exact_guess_probabilities(cfg)
    return min(2 * pg[a] - 1 for a in cfg.axes)


def powerful_bob(cfg, basis: str) -> float:
    """Optimal guess probability for a Bob who may measure the data freely.

    The output states for the two signs are block diagonal in the syndrome,
    and within a block they differ only by the logical flip, so the optimum
    picks the likelier flip per syndrome.
    """
    code = get_code(cfg.code)
    dist = frame_distribution(cfg)
    coords = np.arange(len(dist), dtype=np.int64)
    flip = _flip_bits(code, coords, basis)
    s = coords & ((1 << code.r) - 1)
    table = np.zeros((1 << code.r, 2))
    np.add.at(table, (s, flip), dist)
    return float(table.max(axis=1).sum() / dist.sum())


def powerful_integrity(cfg) -> float:
    return min(2 * powerful_bob(cfg, a) - 1 for a in cfg.axes)


# -- dense density-matrix route --------------------------------------------
def _embed(rho: np.ndarray, n_data: int, n_total: int) -> DensityMatrix:
    """Data state on the low qubits, fresh |0> ancillas above."""
    anc = np.zeros((1 << (n_total - n_data),) * 2, dtype=complex)
    anc[0, 0] = 1.0
    return DensityMatrix(np.kron(anc, rho), check=False)


def _reset(dm: DensityMatrix, q: int) -> None:
    """Trace out qubit ``q`` and put it back in |0>."""
    n = dm.n
    reduced = dm.partial_trace([i for i in range(n) if i != q]).entries
    full = np.zeros((2,) * (2 * n), dtype=complex)
    sl = [slice(None)] * (2 * n)
    sl[n - 1 - q] = 0
    sl[2 * n - 1 - q] = 0
    full[tuple(sl)] = reduced.reshape((2,) * (2 * n - 2))
    dm.entries = full.reshape(dm.entries.shape)


def _run_dense_ops(dm: DensityMatrix, ops, p_e: float):
    """Apply elements with their noise until the first measurement; returns the rest."""
    single = {"X": 1 / 3, "Y": 1 / 3, "Z": 1 / 3}
    for j, e in enumerate(ops):
        if e[0] == "prep":
            q = e[1]
            _reset(dm, q)
            if e[2] == "X":
                dm.apply(op("H", q))
            if p_e:
                dm.apply_pauli_channel({"I": 1 - p_e, **{k: p_e * v for k, v in single.items()}}, [q])
        elif e[0] == "gate":
            g = e[1]
            dm.apply(g)
            if p_e:
                if len(g.targets) == 2:
                    labels = [a + b for a in "IXYZ" for b in "IXYZ"][1:]
                    ch = {"II": 1 - p_e, **{lab: p_e / 15 for lab in labels}}
                else:
                    ch = {"I": 1 - p_e, **{k: p_e * v for k, v in single.items()}}
                dm.apply_pauli_channel(ch, list(g.targets))
        else:
            q, basis = e[1], e[2]
            if p_e:
                dm.apply_pauli_channel({"I": 1 - p_e, ("Z" if basis == "X" else "X"): p_e}, [q])
            return dm, e, ops[j + 1:]
    return dm, None, []


def _measure_branches(dm: DensityMatrix, q: int, basis: str) -> list[DensityMatrix]:
    """Unnormalized post-measurement states for outcomes 0 and 1 (ancilla traced out)."""
    keep = [i for i in range(dm.n) if i != q]
    obs = PauliString.single(dm.n, q, basis)
    return [dm.project(obs, +1).partial_trace(keep), dm.project(obs, -1).partial_trace(keep)]


def _dense_cycle(rho: np.ndarray, cycle: EcCycle, p_e: float) -> np.ndarray:
    code = cycle.code
    n, nq = code.n, cycle.n_qubits
    tx, tz = code.table_arrays()
    out = np.zeros_like(rho)

    def recurse(r: np.ndarray, k: int, syndrome: int) -> None:
        nonlocal out
        if np.real(np.trace(r)) < 1e-15:
            return
        if k == code.r:
            c = PauliString(n, int(tx[syndrome]), int(tz[syndrome]))
            pm = pauli_matrix(c)
            out = out + pm @ r @ pm.conj().T
            return
        dm = _embed(r, n, nq)
        dm, meas, rest = _run_dense_ops(dm, cycle.plain_blocks[k], p_e)
        if rest:
            raise OracleUnavailable("dense route expects one measurement per check block")
        for bit, branch in enumerate(_measure_branches(dm, meas[1], meas[2])):
            recurse(branch.entries, k + 1, syndrome | (bit << k))

    recurse(rho, 0, 0)
    return out


def _dense_env(rho: np.ndarray, n: int, t: float, params) -> np.ndarray:
    if t <= 0:
        return rho
    pi, px, py, pz = env_pauli_probs(t, params)
    dm = DensityMatrix(rho, check=False)
    for q in range(n):
        dm.apply_pauli_channel({"I": pi, "X": px, "Y": py, "Z": pz}, [q])
    return dm.entries


def _dense_memory(cfg, rho_in: np.ndarray) -> np.ndarray:
    """Encode a one-qubit state, run the memory, return the data-qubit state."""
    code = get_code(cfg.code)
    n = code.n
    dm = _embed(rho_in, 1, n)
    for g in code.encoder:
        dm.apply(g)
    rho = dm.entries
    cycle = make_cycle(cfg.code, "non_ft", cfg.coupling, 1) if cfg.m else None
    for kind, t in _segments(cfg):
        if kind == "idle":
            rho = _dense_env(rho, n, t, cfg.noise)
        else:
            rho = _dense_cycle(rho, cycle, cfg.noise.p_e)
    return rho


def _ideal_decode(code: CodeSpec, rho: np.ndarray) -> np.ndarray:
    """Lookup-correct a data state; returns it (still encoded)."""
    if not code.r:
        return rho
    dim = rho.shape[0]
    out = np.zeros_like(rho)
    for s in range(1 << code.r):
        proj = np.eye(dim, dtype=complex)
        for k, g in enumerate(code.stabilizers):
            sign = -1 if s >> k & 1 else 1
            proj = proj @ (0.5 * (np.eye(dim) + sign * pauli_matrix(g)))
        c = pauli_matrix(code.table[s])
        out += c @ proj @ rho @ proj @ c.conj().T
    return out


def dense_channel(cfg) -> tuple[ChannelMap, dict[str, float]]:
    """Logical channel and powerful-Bob guess probabilities from density matrices."""
    check_oracle(cfg)
    code = get_code(cfg.code)
    nq = code.n + (1 if cfg.m else 0)
    if nq > MAX_DENSITY_QUBITS:
        raise OracleUnavailable(f"{nq} live qubits exceed the density-matrix cap")
    logicals = {a: pauli_matrix(code.logical(a)) for a in AXES}
    vec = {"X": (1, 0, 0), "Y": (0, 1, 0), "Z": (0, 0, 1)}
    ptm = np.zeros((4, 4))
    ptm[0, 0] = 1.0
    powerful = {}
    for j, a in enumerate(AXES):
        outs = []
        for sgn in (1, -1):
            rho = _dense_memory(cfg, bloch_state([sgn * v for v in vec[a]]))
            outs.append(rho)
        powerful[a] = 0.5 * (1 + trace_distance(outs[0], outs[1]))
        dec = [_ideal_decode(code, r) for r in outs]
        for i, b in enumerate(AXES):
            # Phi(sigma_a) = Phi(rho_+a) - Phi(rho_-a)
            ptm[i + 1, j + 1] = 0.5 * np.real(np.trace(logicals[b] @ (dec[0] - dec[1])))
    return ChannelMap(ptm), powerful


__all__ = [
    "check_oracle",
    "dense_channel",
    "exact_channel",
    "exact_guess_probabilities",
    "exact_integrity",
    "frame_distribution",
    "fwht",
    "logical_probabilities",
    "powerful_bob",
    "powerful_integrity",
    "xor_convolve",
]

"""Simulation backends driven by a common circuit interface.

``FrameBackend`` tracks, for a batch of trials, the Pauli error relative to a
noiseless reference run (bool arrays of shape ``(qubits, trials)``).  Every
measurement the protocol relies on is deterministic in that reference, so a
measured bit is the frame's anticommutation with the measured Pauli XOR a
known reference bit.  ``TableauBackend`` runs one full stabilizer tableau per
trial and is the slow reference path.

``Machine`` wraps a backend with a noise object and exposes circuit
elements (preparation, gates, measurement, idle exposure).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .codes import CodeSpec, encode_ideal, get_code
from .pauli import PauliString
from .tableau import CliffordOp, ConfigurationError, StabilizerTableau, op

BIT_PARITY = np.bitwise_count


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (k, m) bool array into m integers, row q at bit q."""
    out = np.zeros(bits.shape[1], dtype=np.int64)
    for q in range(bits.shape[0]):
        out |= bits[q].astype(np.int64) << q
    return out


class FrameBackend:
    def __init__(self, n_qubits: int, n_trials: int):
        self.n = n_qubits
        self.n_trials = n_trials
        self.x = np.zeros((n_qubits, n_trials), dtype=bool)
        self.z = np.zeros((n_qubits, n_trials), dtype=bool)

    def prep(self, q: int, basis: str, idx: np.ndarray) -> None:
        self.x[q, idx] = False
        self.z[q, idx] = False

    def gate(self, g: CliffordOp, idx: np.ndarray) -> None:
        x, z, k = self.x, self.z, g.kind
        if k == "H":
            q = g.targets[0]
            xq = x[q, idx]
            x[q, idx] = z[q, idx]
            z[q, idx] = xq
        elif k in ("S", "SDG"):
            q = g.targets[0]
            z[q, idx] ^= x[q, idx]
        elif k == "CX":
            c, t = g.targets
            x[t, idx] ^= x[c, idx]
            z[c, idx] ^= z[t, idx]
        elif k == "CZ":
            a, b = g.targets
            xa, xb = x[a, idx], x[b, idx]
            z[a, idx] ^= xb
            z[b, idx] ^= xa
        # Pauli gates leave the frame unchanged

    def snapshot(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x.copy(), self.z.copy()

    def restore(self, saved: tuple[np.ndarray, np.ndarray]) -> None:
        self.x, self.z = saved[0].copy(), saved[1].copy()

    def load_ideal(self, code: CodeSpec, axis: str, signs: np.ndarray, idx: np.ndarray) -> None:
        """Noiseless encoded state: an empty frame (the sign lives in Bob's reference)."""
        self.x[:, idx] = False
        self.z[:, idx] = False

    def flip(self, q: int, idx_x: np.ndarray, idx_z: np.ndarray) -> None:
        if len(idx_x):
            self.x[q, idx_x] ^= True
        if len(idx_z):
            self.z[q, idx_z] ^= True

    def apply_pauli(self, p: PauliString, idx: np.ndarray, offset: int = 0) -> None:
        """Noiseless Pauli; only the reference sign changes, so the frame is untouched."""
        return None

    def apply_masks(self, qubits: Sequence[int], mx: np.ndarray, mz: np.ndarray, idx: np.ndarray) -> None:
        for k, q in enumerate(qubits):
            self.x[q, idx] ^= (mx >> k & 1).astype(bool)
            self.z[q, idx] ^= (mz >> k & 1).astype(bool)

    def measure(self, q: int, basis: str, idx: np.ndarray, ref) -> np.ndarray:
        if basis == "Z":
            f = self.x[q, idx]
        elif basis == "X":
            f = self.z[q, idx]
        else:
            f = self.x[q, idx] ^ self.z[q, idx]
        return f.astype(np.uint8) ^ np.asarray(ref, dtype=np.uint8)

    def data_masks(self, qubits: Sequence[int], idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q = list(qubits)
        return _pack(self.x[q][:, idx]), _pack(self.z[q][:, idx])

    def ideal_bob(self, code: CodeSpec, qubits: Sequence[int], axis: str, idx: np.ndarray,
                  ref: np.ndarray) -> np.ndarray:
        """Noiseless correct-and-decode; returns the measured logical bit."""
        fx, fz = self.data_masks(qubits, idx)
        flip = frame_logical_flip(code, fx, fz, axis)
        return flip.astype(np.uint8) ^ np.asarray(ref, dtype=np.uint8)


def frame_syndrome(code: CodeSpec, fx: np.ndarray, fz: np.ndarray) -> np.ndarray:
    s = np.zeros(fx.shape, dtype=np.int64)
    for i, g in enumerate(code.stabilizers):
        bit = (BIT_PARITY((fx & g.z) ^ (fz & g.x)) & 1).astype(np.int64)
        s |= bit << i
    return s


def frame_logical_flip(code: CodeSpec, fx: np.ndarray, fz: np.ndarray, axis: str) -> np.ndarray:
    s = frame_syndrome(code, fx, fz)
    tx, tz = code.table_arrays()
    rx, rz = fx ^ tx[s], fz ^ tz[s]
    lg = code.logical(axis)
    return (BIT_PARITY((rx & lg.z) ^ (rz & lg.x)) & 1).astype(bool)


@lru_cache(maxsize=None)
def _encoded(code_name: str, axis: str, sign_bit: int, extra: int) -> StabilizerTableau:
    return encode_ideal(get_code(code_name), axis, -1 if sign_bit else 1, extra)


class TableauBackend:
    """One stabilizer tableau per trial, each with its own generator."""

    def __init__(self, n_qubits: int, rngs: Sequence[np.random.Generator]):
        self.n = n_qubits
        self.n_trials = len(rngs)
        self.rngs = list(rngs)
        self.tabs = [StabilizerTableau(n_qubits) for _ in rngs]

    def set_state(self, i: int, t: StabilizerTableau) -> None:
        if t.n != self.n:
            raise ConfigurationError("tableau size mismatch")
        self.tabs[i] = t

    def snapshot(self) -> list[StabilizerTableau]:
        return [t.copy() for t in self.tabs]

    def restore(self, saved: list[StabilizerTableau]) -> None:
        self.tabs = [t.copy() for t in saved]

    def load_ideal(self, code: CodeSpec, axis: str, signs: np.ndarray, idx: np.ndarray) -> None:
        for j, i in enumerate(idx):
            self.tabs[i] = _encoded(code.name, axis, int(signs[j]), self.n - code.n).copy()

    def prep(self, q: int, basis: str, idx: np.ndarray) -> None:
        for i in idx:
            self.tabs[i].reset(q, basis, self.rngs[i])

    def gate(self, g: CliffordOp, idx: np.ndarray) -> None:
        for i in idx:
            self.tabs[i].apply(g)

    def flip(self, q: int, idx_x: np.ndarray, idx_z: np.ndarray) -> None:
        for i in idx_x:
            self.tabs[i].apply(op("X", q))
        for i in idx_z:
            self.tabs[i].apply(op("Z", q))

    def apply_pauli(self, p: PauliString, idx: np.ndarray, offset: int = 0) -> None:
        full = p.embed(self.n, offset)
        for i in idx:
            self.tabs[i].apply_pauli(full)

    def apply_masks(self, qubits: Sequence[int], mx: np.ndarray, mz: np.ndarray, idx: np.ndarray) -> None:
        for j, i in enumerate(idx):
            for k, q in enumerate(qubits):
                if mx[j] >> k & 1:
                    self.tabs[i].apply(op("X", q))
                if mz[j] >> k & 1:
                    self.tabs[i].apply(op("Z", q))

    def measure(self, q: int, basis: str, idx: np.ndarray, ref) -> np.ndarray:
        obs = PauliString.single(self.n, q, basis)
        return np.array([self.tabs[i].measure(obs, self.rngs[i]) < 0 for i in idx], dtype=np.uint8)

    def ideal_bob(self, code: CodeSpec, qubits: Sequence[int], axis: str, idx: np.ndarray,
                  ref: np.ndarray) -> np.ndarray:
        offset = qubits[0]
        if list(qubits) != list(range(offset, offset + code.n)):
            raise ConfigurationError("data qubits must be contiguous")
        out = np.zeros(len(idx), dtype=np.uint8)
        stabs = [g.embed(self.n, offset) for g in code.stabilizers]
        lg = code.logical(axis).embed(self.n, offset)
        for j, i in enumerate(idx):
            t = self.tabs[i].copy()
            rng = self.rngs[i]
            s = 0
            for k, g in enumerate(stabs):
                if t.measure(g, rng) < 0:
                    s |= 1 << k
            t.apply_pauli(code.table[s].embed(self.n, offset))
            out[j] = t.measure(lg, rng) < 0
        return out


class Machine:
    """Backend plus noise: the primitive elements all circuits are built from."""

    def __init__(self, backend, noise, data: Sequence[int]):
        self.backend = backend
        self.noise = noise
        self.data = list(data)

    def prep(self, q: int, basis: str, idx: np.ndarray) -> None:
        self.backend.prep(q, basis, idx)
        self.noise.element(self.backend, "prep", (q,), idx)

    def gate(self, kind: str, targets: Sequence[int], idx: np.ndarray) -> None:
        g = CliffordOp(kind, tuple(targets))
        self.backend.gate(g, idx)
        self.noise.element(self.backend, "gate2" if len(targets) == 2 else "gate1", g.targets, idx)

    def measure(self, q: int, basis: str, idx: np.ndarray, ref=0) -> np.ndarray:
        self.noise.element(self.backend, "meas", (q,), idx, basis)
        return self.backend.measure(q, basis, idx, ref)

    def idle(self, duration: float, idx: np.ndarray) -> None:
        self.noise.env(self.backend, self.data, duration, idx)

    def run(self, ops: Sequence[tuple], idx: np.ndarray) -> list[np.ndarray]:
        """Execute an element list; returns the measured bits in order."""
        bits = []
        for e in ops:
            if e[0] == "prep":
                self.prep(e[1], e[2], idx)
            elif e[0] == "gate":
                self.gate(e[1].kind, e[1].targets, idx)
            else:
                bits.append(self.measure(e[1], e[2], idx))
        return bits

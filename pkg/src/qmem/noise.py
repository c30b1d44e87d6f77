"""Error model: environmental decoherence and faulty circuit elements.

Every circuit element (preparation, one- or two-qubit gate, measurement)
fails with the same probability ``p_e``.  Environmental noise hits each data
qubit independently with probability ``(1 - exp(-t/T)) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .pauli import PauliString
from .tableau import ConfigurationError

ENV_KINDS = ("depolarizing", "dephasing")
ELEMENT_KINDS = ("prep", "gate1", "gate2", "meas")

# Pauli labels as (x, z) bits, index 0..3 = I, X, Y, Z
PAULI_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))
ONE_QUBIT_ERRORS = ("X", "Y", "Z")
TWO_QUBIT_ERRORS = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]


@dataclass(frozen=True)
class NoiseParams:
    T: float = 1.0
    p_e: float = 0.0
    env_kind: str = "depolarizing"

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigurationError(f"T must be positive, got {self.T}")
        if not 0 <= self.p_e <= 1:
            raise ConfigurationError(f"p_e must lie in [0, 1], got {self.p_e}")
        if self.env_kind not in ENV_KINDS:
            raise ConfigurationError(f"env_kind must be one of {ENV_KINDS}, got {self.env_kind!r}")


def env_error_prob(t: float, T: float) -> float:
    """Probability that an exposed qubit suffers an error after time ``t``."""
    if t < 0:
        raise ValueError(f"negative duration {t}")
    return 0.5 * -math.expm1(-t / T)


def env_pauli_probs(t: float, params: NoiseParams) -> tuple[float, float, float, float]:
    """(I, X, Y, Z) probabilities of one environmental exposure."""
    p = env_error_prob(t, params.T)
    if params.env_kind == "depolarizing":
        return (1 - p, p / 3, p / 3, p / 3)
    return (1 - p, 0.0, 0.0, p)


def sample_element_error(kind: str, params: NoiseParams, rng: np.random.Generator,
                         basis: str = "Z") -> Optional[PauliString]:
    """Draw the error following one element: None, or a 1- or 2-qubit Pauli.

    One uniform draw decides occurrence and, if it fires, a second picks the type.
    For measurements the error is the Pauli that inverts the measured basis.
    """
    if kind not in ELEMENT_KINDS:
        raise ConfigurationError(f"unknown element kind {kind!r}")
    if not rng.random() < params.p_e:
        return None
    u = rng.random()
    if kind == "meas":
        return PauliString.from_str(inverting_pauli(basis))
    if kind == "gate2":
        return PauliString.from_str(TWO_QUBIT_ERRORS[int(u * 15)])
    return PauliString.from_str(ONE_QUBIT_ERRORS[int(u * 3)])


def inverting_pauli(basis: str) -> str:
    return "Z" if basis == "X" else "X"


class NoNoise:
    """Noise object for ideal agents."""

    def element(self, backend, kind, qubits, idx, basis="Z"):
        return None

    def env(self, backend, qubits, duration, idx):
        return None


class SampledNoise:
    """Draws element and environmental errors for a batch of trials.

    Vectorized form of the draw discipline of ``sample_element_error``: one
    uniform per trial decides occurrence, one more per hit picks the type.
    """

    def __init__(self, params: NoiseParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng

    def element(self, backend, kind, qubits, idx, basis="Z"):
        p = self.params.p_e
        if p == 0 or len(idx) == 0:
            return
        hit = idx[self.rng.random(len(idx)) < p]
        if hit.size == 0:
            return
        if kind == "meas":
            q = qubits[0]
            if basis == "X":
                backend.flip(q, hit[:0], hit)
            else:
                backend.flip(q, hit, hit[:0])
            return
        u = self.rng.random(hit.size)
        if kind == "gate2":
            t = (u * 15).astype(np.int64) + 1
            _flip_kinds(backend, qubits[0], hit, t >> 2)
            _flip_kinds(backend, qubits[1], hit, t & 3)
        else:
            _flip_kinds(backend, qubits[0], hit, (u * 3).astype(np.int64) + 1)

    def env(self, backend, qubits, duration, idx):
        if duration <= 0 or len(idx) == 0:
            return
        p = env_error_prob(duration, self.params.T)
        for q in qubits:
            hit = idx[self.rng.random(len(idx)) < p]
            if hit.size == 0:
                continue
            u = self.rng.random(hit.size)
            if self.params.env_kind == "depolarizing":
                _flip_kinds(backend, q, hit, (u * 3).astype(np.int64) + 1)
            else:
                backend.flip(q, hit[:0], hit)


def _flip_kinds(backend, q, idx, kinds):
    """Apply Pauli ``kinds`` (0=I, 1=X, 2=Y, 3=Z) to qubit ``q`` of trials ``idx``."""
    xs = idx[(kinds == 1) | (kinds == 2)]
    zs = idx[(kinds == 2) | (kinds == 3)]
    backend.flip(q, xs, zs)


class FaultInjector:
    """Deterministic single faults for exhaustive fault-tolerance checks.

    Trial ``i`` receives Pauli code ``codes[i]`` at its ``locations[i]``-th
    circuit element (counted per trial).  Codes are 1..3 for one-qubit
    elements, 1..15 for two-qubit ones (first qubit = code >> 2) and any
    nonzero value for a measurement flip.  ``kinds`` records the element
    kinds seen by trial 0, which is how locations are enumerated.
    """

    def __init__(self, n_trials: int, locations=None, codes=None):
        self.count = np.zeros(n_trials, dtype=np.int64)
        self.locations = np.full(n_trials, -1, dtype=np.int64) if locations is None else np.asarray(locations)
        self.codes = np.zeros(n_trials, dtype=np.int64) if codes is None else np.asarray(codes)
        self.kinds: list[str] = []

    def element(self, backend, kind, qubits, idx, basis="Z"):
        if len(idx) == 0:
            return
        if idx[0] == 0:
            self.kinds.append(kind)
        fire = idx[self.count[idx] == self.locations[idx]]
        self.count[idx] += 1
        if fire.size == 0:
            return
        codes = self.codes[fire]
        if kind == "meas":
            q = qubits[0]
            if basis == "X":
                backend.flip(q, fire[:0], fire)
            else:
                backend.flip(q, fire, fire[:0])
        elif kind == "gate2":
            _flip_kinds(backend, qubits[0], fire, codes >> 2)
            _flip_kinds(backend, qubits[1], fire, codes & 3)
        else:
            _flip_kinds(backend, qubits[0], fire, codes)

    def env(self, backend, qubits, duration, idx):
        return None


def fault_codes(kind: str) -> range:
    return range(1, 16) if kind == "gate2" else range(1, 2) if kind == "meas" else range(1, 4)

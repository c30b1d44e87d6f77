"""Alice, Igor, Bob: trajectory runner, integrity estimates and milestones.

A memory channel encodes a Pauli eigenstate (Alice), exposes the data qubits
to the environment while Igor runs ``m`` equispaced error-correction cycles,
and hands the result to Bob, who guesses the sign.  Integrity is
``2 p_g - 1`` on the worst of the tested Pauli axes.

Trials are processed in fixed blocks of ``BLOCK`` trials.  Each block has its
own generator derived from ``(seed, block)``, so results do not depend on
how many worker threads share the blocks.  Trial ``i`` tests axis
``axes[i % len(axes)]``; signs are drawn uniformly.
"""

from __future__ import annotations

import math
import os
import queue
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .codes import AXES, CODE_NAMES, get_code
from .ec_cycles import ANCILLAS, COUPLINGS, REPEATS, check_style, make_cycle
from .endpoints import ENDPOINT_ANCILLAS, alice_prepare, bob_guess, check_endpoint
from .noise import NoiseParams, SampledNoise
from .sim import FrameBackend, Machine, TableauBackend
from .tableau import ConfigurationError

BLOCK = 8192
Z95 = 1.959963984540054
VERDICTS = ("met", "not-met", "inconclusive")


@dataclass(frozen=True)
class ExperimentConfig:
    """One memory channel.

    ``tau`` is in units of ``noise.T``.  Encoded channels last ``alpha * tau``;
    the bare physical qubit ignores ``alpha``.  Each EC cycle occupies
    ``delta`` with no environmental exposure, and the remaining time is split
    evenly around the cycles.
    """

    code: str = "five"
    tau: float = 0.0
    m: int = 0
    ec_style: str = "non_ft"
    noise: NoiseParams = field(default_factory=NoiseParams)
    alice_style: str = "ideal"
    bob_style: str = "ideal"
    alpha: float = 1.0
    delta: float = 0.0
    n_runs: int = 100_000
    seed: int = 0
    coupling: str = "native"
    rounds: Optional[int] = None
    repeat: str = "adaptive"
    axes: tuple[str, ...] = AXES
    noisy_correction: bool = False
    label: str = ""

    def __post_init__(self):
        if self.code not in CODE_NAMES:
            raise ConfigurationError(f"code: unknown code {self.code!r}; valid: {', '.join(CODE_NAMES)}")
        if not isinstance(self.m, (int, np.integer)) or self.m < 0:
            raise ConfigurationError(f"m: must be a non-negative integer, got {self.m!r}")
        if self.tau < 0:
            raise ConfigurationError(f"tau: must be non-negative, got {self.tau}")
        if self.alpha < 1:
            raise ConfigurationError(f"alpha: must be >= 1, got {self.alpha}")
        if self.delta < 0:
            raise ConfigurationError(f"delta: must be non-negative, got {self.delta}")
        if self.n_runs <= 0:
            raise ConfigurationError(f"n_runs: must be positive, got {self.n_runs}")
        if self.coupling not in COUPLINGS:
            raise ConfigurationError(f"coupling: unknown {self.coupling!r}; valid: {', '.join(COUPLINGS)}")
        if self.repeat not in REPEATS:
            raise ConfigurationError(f"repeat: unknown {self.repeat!r}; valid: {', '.join(REPEATS)}")
        if self.rounds is not None and self.rounds not in (1, 3):
            raise ConfigurationError(f"rounds: must be 1 or 3, got {self.rounds!r}")
        if not self.axes or any(a not in AXES for a in self.axes) or len(set(self.axes)) != len(self.axes):
            raise ConfigurationError(f"axes: must be distinct entries of {AXES}, got {self.axes!r}")
        if self.code == "physical_qubit":
            if self.m:
                raise ConfigurationError("m: the bare physical qubit has no error correction")
        else:
            check_style(self.code, self.ec_style)
        if self.m * self.delta > self.duration + 1e-12:
            raise ConfigurationError(f"delta: m*delta = {self.m * self.delta} exceeds the duration {self.duration}")
        check_endpoint(self.alice_style, self.code, self.axes)
        check_endpoint(self.bob_style, self.code, self.axes)

    @property
    def duration(self) -> float:
        return self.tau if self.code == "physical_qubit" else self.alpha * self.tau

    @property
    def segment(self) -> float:
        """Environmental exposure between consecutive cycles."""
        return (self.duration - self.m * self.delta) / (self.m + 1)

    def cycle_times(self) -> list[float]:
        """Completion time of each EC cycle."""
        return [k * self.segment + k * self.delta for k in range(1, self.m + 1)]

    def with_(self, **kw) -> ExperimentConfig:
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["axes"] = list(self.axes)
        return d


@dataclass
class IntegrityEstimate:
    per_basis: dict[str, tuple[int, int, float]]
    R_hat: float
    ci_low: float
    ci_high: float
    worst_axis: str
    near_tie: bool
    n_runs: int
    seed: int
    label: str = ""

    @property
    def sigma(self) -> float:
        """Standard error of ``R_hat`` (normal approximation on the worst axis)."""
        s, n, p = self.per_basis[self.worst_axis]
        return 2 * math.sqrt(max(p * (1 - p), 0.25 / n) / n)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "R_hat": self.R_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "worst_axis": self.worst_axis,
            "near_tie": self.near_tie,
            "n_runs": self.n_runs,
            "seed": self.seed,
            "per_basis": {a: {"successes": s, "trials": n, "p_g": p} for a, (s, n, p) in self.per_basis.items()},
        }


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # clamp so rounding never pushes the interval off the point estimate
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def make_estimate(counts: dict[str, tuple[int, int]], cfg: ExperimentConfig) -> IntegrityEstimate:
    per = {a: (s, n, s / n) for a, (s, n) in counts.items() if n > 0}
    worst = min(per, key=lambda a: (per[a][2], AXES.index(a)))
    s, n, p = per[worst]
    lo, hi = wilson_interval(s, n)
    tie = False
    for a, (_, na, pa) in per.items():
        if a != worst:
            se = math.sqrt(p * (1 - p) / n + pa * (1 - pa) / na)
            if pa - p <= 2 * se:
                tie = True
    return IntegrityEstimate(per, 2 * p - 1, 2 * lo - 1, 2 * hi - 1, worst, tie, cfg.n_runs, cfg.seed, cfg.label)


# -- trajectory execution ---------------------------------------------------
def _n_qubits(cfg: ExperimentConfig) -> int:
    n = get_code(cfg.code).n
    anc = ANCILLAS[cfg.ec_style] if cfg.m else 0
    return n + max(anc, ENDPOINT_ANCILLAS[cfg.alice_style])


def _execute(cfg: ExperimentConfig, m: Machine, axis_of: np.ndarray, signs: np.ndarray,
             grid: Sequence[float] = ()) -> tuple[np.ndarray, list[np.ndarray]]:
    """Run Alice, the memory and Bob on trials ``0..len(signs)-1``.

    Returns Bob's success flags and, for each interruption time in ``grid``
    (ascending), the success flags an ideal Bob would have had at that time.
    """
    code = get_code(cfg.code)
    idx = np.arange(len(signs))
    groups = [(a, idx[axis_of == k]) for k, a in enumerate(cfg.axes)]
    for a, sub in groups:
        if sub.size:
            alice_prepare(m, cfg.alice_style, code, a, signs[sub], sub)
    cycle = make_cycle(cfg.code, cfg.ec_style, cfg.coupling, cfg.rounds, cfg.repeat) if cfg.m else None

    checkpoints: list[np.ndarray] = []
    pending = sorted(grid)
    now = 0.0

    def advance(until: float, inclusive: bool = True) -> None:
        nonlocal now
        eps = 1e-12 if inclusive else -1e-12
        while pending and pending[0] <= until + eps:
            # expose a copy up to t; the trajectory itself keeps one exposure per segment
            t = pending.pop(0)
            saved = m.backend.snapshot()
            m.idle(max(t - now, 0.0), idx)
            ok = np.zeros(len(signs), dtype=bool)
            for a, sub in groups:
                if sub.size:
                    ok[sub] = m.backend.ideal_bob(code, range(code.n), a, sub, signs[sub]) == signs[sub]
            m.backend.restore(saved)
            checkpoints.append(ok)
        if until > now:
            m.idle(until - now, idx)
            now = until

    t = 0.0
    for k in range(cfg.m):
        t += cfg.segment
        advance(t, inclusive=False)
        cycle.run(m, idx, cfg.noisy_correction)
        t += cfg.delta
        now = t
    advance(cfg.duration)

    ok = np.zeros(len(signs), dtype=bool)
    for a, sub in groups:
        if sub.size:
            ok[sub] = bob_guess(m, cfg.bob_style, code, a, signs[sub], sub) == signs[sub]
    return ok, checkpoints


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0, block))))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, trial_index))))


def _run_block(cfg: ExperimentConfig, block: int, grid: Sequence[float]) -> np.ndarray:
    """Success counts per (checkpoint..., final) x axis for one block."""
    start = block * BLOCK
    size = min(BLOCK, cfg.n_runs - start)
    rng = _block_rng(cfg.seed, block)
    signs = rng.integers(0, 2, size, dtype=np.uint8)
    axis_of = (start + np.arange(size)) % len(cfg.axes)
    be = FrameBackend(_n_qubits(cfg), size)
    m = Machine(be, SampledNoise(cfg.noise, rng), range(get_code(cfg.code).n))
    ok, cps = _execute(cfg, m, axis_of, signs, grid)
    out = np.zeros((len(cps) + 1, len(cfg.axes)), dtype=np.int64)
    for row, flags in enumerate([*cps, ok]):
        out[row] = np.bincount(axis_of, weights=flags, minlength=len(cfg.axes)).astype(np.int64)
    return out


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("QMEM_THREADS")
        try:
            threads = int(env) if env else 1
        except ValueError:
            raise ConfigurationError(f"QMEM_THREADS must be an integer, got {env!r}") from None
    if threads < 1:
        raise ConfigurationError(f"threads must be >= 1, got {threads}")
    return threads


def _run_counts(cfg: ExperimentConfig, grid: Sequence[float], threads: Optional[int],
                progress: Optional[queue.Queue]) -> np.ndarray:
    n_blocks = -(-cfg.n_runs // BLOCK)

    def work(b: int) -> np.ndarray:
        r = _run_block(cfg, b, grid)
        if progress is not None:
            progress.put(("block", b, n_blocks))
        return r

    threads = resolve_threads(threads)
    if threads == 1:
        parts = [work(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, range(n_blocks)))
    return np.sum(parts, axis=0)


def _trials_per_axis(cfg: ExperimentConfig) -> np.ndarray:
    return np.bincount(np.arange(cfg.n_runs) % len(cfg.axes), minlength=len(cfg.axes))


def estimate_integrity(cfg: ExperimentConfig, threads: Optional[int] = None,
                       progress: Optional[queue.Queue] = None) -> IntegrityEstimate:
    if cfg.n_runs < 10_000:
        warnings.warn(f"n_runs = {cfg.n_runs} is below 10^4; estimates will be coarse", stacklevel=2)
    counts = _run_counts(cfg, (), threads, progress)[-1]
    trials = _trials_per_axis(cfg)
    return make_estimate({a: (int(counts[k]), int(trials[k])) for k, a in enumerate(cfg.axes)}, cfg)


def interruption_sweep(cfg: ExperimentConfig, grid: Sequence[float], threads: Optional[int] = None,
                       progress: Optional[queue.Queue] = None) -> list[tuple[float, IntegrityEstimate]]:
    """Integrity an ideal Bob would see when stepping in at each grid time.

    A cycle completing exactly at an interruption time is included.  All
    grid points share the same trajectories.
    """
    grid = sorted(float(t) for t in grid)
    if not grid:
        raise ConfigurationError("grid: must not be empty")
    if grid[0] < 0 or grid[-1] > cfg.duration + 1e-12:
        raise ConfigurationError(f"grid: times must lie in [0, {cfg.duration}]")
    counts = _run_counts(cfg, grid, threads, progress)
    trials = _trials_per_axis(cfg)
    return [(t, make_estimate({a: (int(counts[j, k]), int(trials[k])) for k, a in enumerate(cfg.axes)}, cfg))
            for j, t in enumerate(grid)]


def run_trajectory(cfg: ExperimentConfig, trial_index: int) -> bool:
    """One trial on the full stabilizer-tableau backend (slow reference path)."""
    rng = trial_rng(cfg.seed, trial_index)
    sign = rng.integers(0, 2, 1, dtype=np.uint8)
    axis_of = np.array([trial_index % len(cfg.axes)])
    be = TableauBackend(_n_qubits(cfg), [rng])
    m = Machine(be, SampledNoise(cfg.noise, rng), range(get_code(cfg.code).n))
    ok, _ = _execute(cfg, m, axis_of, sign)
    return bool(ok[0])


def estimate_integrity_reference(cfg: ExperimentConfig) -> IntegrityEstimate:
    """Integrity from ``run_trajectory`` over all trials."""
    counts = {a: [0, 0] for a in cfg.axes}
    for i in range(cfg.n_runs):
        a = cfg.axes[i % len(cfg.axes)]
        counts[a][0] += run_trajectory(cfg, i)
        counts[a][1] += 1
    return make_estimate({a: tuple(v) for a, v in counts.items()}, cfg)


# -- comparisons and milestones --------------------------------------------
def compare(a: IntegrityEstimate, b: IntegrityEstimate, z: float = Z95) -> tuple[float, float, float]:
    """Difference ``R_a - R_b`` with a normal-approximation interval."""
    d = a.R_hat - b.R_hat
    s = math.hypot(a.sigma, b.sigma)
    return d, d - z * s, d + z * s


def _classify(d: float, lo: float, hi: float) -> str:
    if lo > 0:
        return "above"
    if hi < 0:
        return "below"
    return "tied+" if d > 0 else "tied-"


def _exists_verdict(states: list[str]) -> str:
    if "above" in states:
        return "met"
    if "tied+" in states:
        return "inconclusive"
    return "not-met"


def _forall_verdict(states: list[str]) -> str:
    if all(s == "above" for s in states):
        return "met"
    if "below" in states:
        return "not-met"
    return "inconclusive"


@dataclass
class MilestoneReport:
    verdicts: dict[str, str]
    witnesses: dict[str, object]
    rows: list[dict]

    def to_dict(self) -> dict:
        return {"verdicts": self.verdicts, "witnesses": self.witnesses, "rows": self.rows}


def evaluate_milestones(family: Sequence[ExperimentConfig], tau_grid: Sequence[float],
                        threads: Optional[int] = None) -> MilestoneReport:
    """Verdicts for M1-M4 over a family of channels on a common duration grid.

    The family holds one bare-qubit channel (Theta) and encoded channels of a
    single code keyed by their cycle count ``m`` (m = 0 and m = 1 required).
    ``tau_grid`` gives the bare-qubit durations; encoded members run for
    ``alpha * tau``.  "met" needs a 95% interval on the difference that
    excludes zero.
    """
    if not family:
        raise ConfigurationError("family: must not be empty")
    thetas = [c for c in family if c.code == "physical_qubit"]
    encoded = [c for c in family if c.code != "physical_qubit"]
    if len(thetas) != 1:
        raise ConfigurationError("family: needs exactly one physical_qubit channel")
    by_m: dict[int, ExperimentConfig] = {}
    for c in encoded:
        if c.m in by_m:
            raise ConfigurationError(f"family: duplicate member with m = {c.m}")
        by_m[c.m] = c
    if len({c.code for c in encoded}) > 1:
        raise ConfigurationError("family: encoded members must share one code")
    for need in (0, 1):
        if need not in by_m:
            raise ConfigurationError(f"family: missing encoded member with m = {need}")
    grid = sorted(float(t) for t in tau_grid)
    if not grid or grid[0] <= 0:
        raise ConfigurationError("tau_grid: needs positive durations")

    rows = []
    est: dict[tuple[str, float], IntegrityEstimate] = {}
    for t in grid:
        for key, c in [("theta", thetas[0])] + [(f"m{k}", by_m[k]) for k in sorted(by_m)]:
            e = estimate_integrity(c.with_(tau=t), threads)
            est[key, t] = e
            rows.append({"member": key, "tau": t, "R_hat": e.R_hat, "ci_low": e.ci_low, "ci_high": e.ci_high})

    verdicts, witnesses = {}, {}

    def exists(pairs):
        states, wit = [], None
        for t in grid:
            for a, b in pairs:
                st = _classify(*compare(est[a, t], est[b, t]))
                states.append(st)
                if st == "above" and wit is None:
                    wit = {"tau": t, "channel": a, "against": b}
        return _exists_verdict(states), wit

    verdicts["M1"], witnesses["M1"] = exists([("m1", "m0")])
    pairs2 = [(f"m{k}", f"m{k - 1}") for k in sorted(by_m) if k >= 2 and k - 1 in by_m]
    if pairs2:
        verdicts["M2"], witnesses["M2"] = exists(pairs2)
    else:
        verdicts["M2"], witnesses["M2"] = "inconclusive", "no consecutive members with m >= 2"
    verdicts["M3"], witnesses["M3"] = exists([(f"m{k}", "theta") for k in sorted(by_m) if k > 0])
    states, worst = [], None
    for t in grid:
        best = max(by_m, key=lambda k: est[f"m{k}", t].R_hat)
        d, lo, hi = compare(est[f"m{best}", t], est["theta", t])
        states.append(_classify(d, lo, hi))
        if worst is None or d < worst["margin"]:
            worst = {"tau": t, "best_m": best, "margin": d}
    verdicts["M4"], witnesses["M4"] = _forall_verdict(states), worst
    return MilestoneReport(verdicts, witnesses, rows)


def crossing_points(taus: Sequence[float], diff: Sequence[float]) -> list[float]:
    """Linearly interpolated zero crossings of a sampled difference curve."""
    out = []
    for (t0, d0), (t1, d1) in zip(zip(taus, diff), zip(taus[1:], diff[1:])):
        if d0 == 0:
            out.append(t0)
        elif d0 * d1 < 0:
            out.append(t0 + (t1 - t0) * d0 / (d0 - d1))
    return out

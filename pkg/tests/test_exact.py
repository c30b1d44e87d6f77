import itertools
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmem.codes import get_code
from qmem.dense import OracleUnavailable, alpha_coefficients
from qmem.exact import (
    check_oracle,
    dense_channel,
    exact_channel,
    exact_guess_probabilities,
    exact_integrity,
    fwht,
    logical_probabilities,
    powerful_bob,
    xor_convolve,
)
from qmem.noise import NoiseParams, env_error_prob, env_pauli_probs
from qmem.pauli import PauliString
from qmem.protocol import ExperimentConfig, estimate_integrity


@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_xor_convolve_matches_brute_force(k, seed):
    rng = np.random.default_rng(seed)
    n = 1 << k
    a, b = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
    ref = np.zeros(n)
    for i, j in itertools.product(range(n), repeat=2):
        ref[i ^ j] += a[i] * b[j]
    assert np.allclose(xor_convolve(a, b), ref)
    assert np.allclose(fwht(fwht(a)) / n, a)


@pytest.mark.parametrize("kw", [
    {"m": 1, "ec_style": "flag_ft"},
    {"m": 1, "rounds": 3},
    {"m": 1, "noisy_correction": True},
    {"code": "steane", "alice_style": "noisy_ft", "bob_style": "noisy_ft", "axes": ("Z",)},
])
def test_oracle_reach(kw):
    cfg = ExperimentConfig(**kw)
    with pytest.raises(OracleUnavailable):
        check_oracle(cfg)
    with pytest.raises(OracleUnavailable):
        exact_integrity(cfg)


@pytest.mark.parametrize("kind", ["depolarizing", "dephasing"])
def test_physical_qubit_channel(kind):
    for tau in (0.0, 0.3, 1.0):
        cfg = ExperimentConfig(code="physical_qubit", tau=tau, noise=NoiseParams(env_kind=kind))
        assert np.allclose(logical_probabilities(cfg), env_pauli_probs(tau, cfg.noise))


def _brute_force_memory(code_name, tau):
    """Enumerate every Pauli error of an unprotected memory (m = 0)."""
    code = get_code(code_name)
    p = env_error_prob(tau, 1.0)
    w = {"I": 1 - p, "X": p / 3, "Y": p / 3, "Z": p / 3}
    out = np.zeros(4)
    for labels in itertools.product("IXYZ", repeat=code.n):
        e = PauliString.from_str("".join(labels))
        pr = np.prod([w[c] for c in labels])
        fx, fz = code.decode_flip(e, "X"), code.decode_flip(e, "Z")
        # X flip with no Z flip means a logical Z error, etc.
        out[{(0, 0): 0, (0, 1): 1, (1, 1): 2, (1, 0): 3}[(int(fx), int(fz))]] += pr
    return out


@pytest.mark.parametrize("code", ["five", "steane"])
def test_unprotected_memory_matches_enumeration(code):
    for tau in (0.1, 0.6):
        cfg = ExperimentConfig(code=code, tau=tau)
        assert np.allclose(logical_probabilities(cfg), _brute_force_memory(code, tau), atol=1e-12)


@pytest.mark.parametrize("code,m,tau", [
    ("physical_qubit", 0, 0.4),
    ("five", 0, 0.3),
    ("five", 1, 0.0),
    ("five", 1, 0.4),
    ("five", 2, 0.5),
])
def test_frame_program_matches_density_matrices(code, m, tau):
    cfg = ExperimentConfig(code=code, m=m, tau=tau, noise=NoiseParams(p_e=0.01))
    dense, powerful = dense_channel(cfg)
    frame = exact_channel(cfg)
    assert dense.is_pauli()
    assert np.allclose(dense.ptm, frame.ptm, atol=1e-9)
    for a in "XYZ":
        assert powerful[a] == pytest.approx(powerful_bob(cfg, a), abs=1e-9)


@pytest.mark.slow
def test_frame_program_matches_density_matrices_steane():
    cfg = ExperimentConfig(code="steane", m=1, tau=0.2, noise=NoiseParams(p_e=0.01))
    dense, powerful = dense_channel(cfg)
    assert np.allclose(dense.ptm, exact_channel(cfg).ptm, atol=1e-9)
    for a in "XYZ":
        assert powerful[a] == pytest.approx(powerful_bob(cfg, a), abs=1e-9)


def test_dense_route_reach():
    with pytest.raises(OracleUnavailable):
        dense_channel(ExperimentConfig(code="steane", m=1, rounds=3))


def test_no_noise_gives_identity():
    for code in ("five", "steane", "surface9"):
        cfg = ExperimentConfig(code=code, m=3, tau=0.0)
        assert logical_probabilities(cfg) == pytest.approx((1, 0, 0, 0))


@pytest.mark.parametrize("code", ["five", "steane", "surface9"])
def test_powerful_bob_dominates(code):
    for tau in (0.0, 0.3, 0.8):
        cfg = ExperimentConfig(code=code, m=1, tau=tau, noise=NoiseParams(p_e=0.005))
        pg = exact_guess_probabilities(cfg)
        for a in "XYZ":
            assert powerful_bob(cfg, a) >= pg[a] - 1e-12


def test_channel_alphas_match_guess_probabilities():
    cfg = ExperimentConfig(code="steane", m=1, tau=0.3, noise=NoiseParams(p_e=0.004))
    pg = exact_guess_probabilities(cfg)
    for a, alpha in zip("XYZ", alpha_coefficients(exact_channel(cfg))):
        assert 2 * pg[a] - 1 == pytest.approx(alpha)


@pytest.mark.parametrize("cfg", [
    ExperimentConfig(code="five", m=2, tau=0.4, noise=NoiseParams(p_e=0.005)),
    ExperimentConfig(code="steane", m=1, tau=0.2, noise=NoiseParams(p_e=0.005, env_kind="dephasing")),
    ExperimentConfig(code="surface9", m=1, tau=0.1, noise=NoiseParams(p_e=0.008)),
    ExperimentConfig(code="five", m=3, tau=0.6, alpha=1.5, delta=0.05, noise=NoiseParams(p_e=0.002)),
], ids=["five-m2", "steane-dephasing", "surface9", "five-delta"])
def test_monte_carlo_matches_exact(cfg):
    cfg = cfg.with_(n_runs=60000, seed=77)
    e = estimate_integrity(cfg)
    pg = exact_guess_probabilities(cfg)
    for a, (s, n, p) in e.per_basis.items():
        sd = np.sqrt(pg[a] * (1 - pg[a]) / n)
        assert abs(p - pg[a]) < 4 * sd + 1e-12, a


def test_frame_program_is_fast():
    start = time.time()
    exact_integrity(ExperimentConfig(code="surface9", m=2, tau=0.7, noise=NoiseParams(p_e=0.003)))
    assert time.time() - start < 30

"""The nine acceptance criteria, each run from its shipped recipe.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import contextlib
import csv
import io
import json
import math
import time
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE
from qmem.cli import main
from qmem.codes import get_code
from qmem.dense import DenseState
from qmem.ec_cycles import cycle_failures
from qmem.exact import exact_guess_probabilities
from qmem.noise import NoiseParams
from qmem.pauli import all_paulis
from qmem.protocol import ExperimentConfig, crossing_points, estimate_integrity, interruption_sweep
from qmem.tableau import ONE_QUBIT_GATES, StabilizerTableau, op

RECIPES = Path(__file__).resolve().parent.parent / "recipes"


class Point:
    def __init__(self, row):
        self.R = float(row["R_hat"])
        self.lo, self.hi = float(row["ci_low"]), float(row["ci_high"])
        self.row = row

    @property
    def sigma(self):
        # Wilson half-width back to one standard deviation
        return (self.hi - self.lo) / (2 * 1.959963984540054)


def z_score(a: Point, b: Point) -> float:
    return (a.R - b.R) / max(math.hypot(a.sigma, b.sigma), 1e-12)


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[k] = line
    print(line)
    return ok


def run_recipe(command, recipe, tmp_path, runs, **overrides):
    doc = json.loads((RECIPES / recipe).read_text())
    doc.update(overrides)
    path = tmp_path / recipe
    path.write_text(json.dumps(doc))
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main([command, "--config", str(path), "--runs", str(runs)])
    assert code == 0
    return buf.getvalue()


def curves(text, x="tau_over_T"):
    out = defaultdict(dict)
    for row in csv.DictReader(io.StringIO(text)):
        out[row["channel_label"]][float(row[x])] = Point(row)
    return out


def crossings(a: dict, b: dict):
    taus = sorted(a)
    return crossing_points(taus, [a[t].R - b[t].R for t in taus])


# -- 1 ----------------------------------------------------------------------------------
def test_criterion_1_interruption_anchor_values(tmp_path):
    start = time.time()
    c = curves(run_recipe("interruption", "fig5.json", tmp_path, 1_000_000), "interrupt_t_over_T")
    wall = time.time() - start
    th, p3, p19 = (c[k][0.5] for k in ("theta", "phi3", "phi19"))
    anchors = all(abs(p.R - v) <= 0.02 for p, v in [(th, 0.74), (p3, 0.78), (p19, 0.63)])
    order = z_score(p3, th) >= 4 and z_score(th, p19) >= 4
    ok = anchors and order and wall < 600
    record(1, ok, f"Theta={th.R:.4f} Phi3={p3.R:.4f} Phi19={p19.R:.4f} (targets .74/.78/.63 +-.02); "
                  f"z(Phi3-Theta)={z_score(p3, th):.1f} z(Theta-Phi19)={z_score(th, p19):.1f}; wall {wall:.0f}s")
    assert ok


# -- 2 ----------------------------------------------------------------------------------
def test_criterion_2_duration_crossings(tmp_path):
    c = curves(run_recipe("sweep", "fig2a.json", tmp_path, 500_000))
    th, p0, p1, p7 = c["theta"], c["phi0"], c["phi1_p0.002"], c["phi1_p0.007"]
    x10 = crossings(p1, p0)
    x1t = crossings(p1, th)
    x70 = crossings(p7, p0)
    never = all(p7[t].R <= th[t].R for t in th)
    checks = [
        bool(x10) and all(abs(x - 0.16) <= 0.03 for x in x10),
        len(x1t) >= 2 and abs(x1t[0] - 0.035) <= 0.03 and abs(x1t[-1] - 0.49) <= 0.03,
        never,
        bool(x70) and all(abs(x - 0.55) <= 0.05 for x in x70),
    ]
    ok = all(checks)
    record(2, ok, f"Phi1/Phi0 crossing {[round(x, 3) for x in x10]} (0.16+-0.03); Phi1>Theta on "
                  f"{[round(x, 3) for x in x1t]} (0.035, 0.49 +-0.03); at 0.7%: never above Theta={never}, "
                  f"Phi1/Phi0 crossing {[round(x, 3) for x in x70]} (0.55+-0.05)")
    assert ok


# -- 3 ----------------------------------------------------------------------------------
def _fits(points):
    p = np.array([q for q, _ in points])
    y = 1 - np.array([pt.R for _, pt in points])
    w = 1 / np.maximum(np.array([pt.sigma for _, pt in points]), 1e-6) ** 2
    c = (p @ y) / (p @ p)
    r2 = 1 - np.sum((y - c * p) ** 2) / np.sum((y - y.mean()) ** 2)
    # one-parameter weighted fits through R(0) = 1: AIC difference is the chi^2 difference
    cl = np.sum(w * p * y) / np.sum(w * p * p)
    kq = np.sum(w * p * p * y) / np.sum(w * p**4)
    return r2, np.sum(w * (y - cl * p) ** 2), np.sum(w * (y - kq * p * p) ** 2)


def test_criterion_3_gate_error_shape_laws(tmp_path):
    # the linear R^2 is biased low by sampling noise, so the NonFT curves get more trials
    chans = json.loads((RECIPES / "fig3.json").read_text())["channels"]
    nonft = [c for c in chans if c.get("ec_style") == "non_ft"]
    ft = [c for c in chans if c.get("ec_style") != "non_ft"]
    text = run_recipe("sweep", "fig3.json", tmp_path, 4_000_000, channels=nonft)
    text += run_recipe("sweep", "fig3.json", tmp_path, 1_000_000, channels=ft).split("\n", 1)[1]
    data = defaultdict(dict)
    for row in csv.DictReader(io.StringIO(text)):
        lab, p = row["channel_label"].split("@p_e=")
        data[lab][float(p)] = Point(row)
    details, ok = [], True
    for lab, pts in data.items():
        fit_pts = [(p, pts[p]) for p in sorted(pts) if p <= 0.005 + 1e-12]
        r2, aic_lin, aic_quad = _fits(fit_pts)
        if lab.endswith("non_ft"):
            good = r2 > 0.999
            details.append(f"{lab} R2={r2:.5f}")
        else:
            good = aic_quad < aic_lin
            details.append(f"{lab} AIC lin-quad={aic_lin - aic_quad:.0f}")
        ok &= good
    best = "surface9/surface_ordered"
    for p in (0.002, 0.005, 0.008):
        dom = all(data[best][p].R > data[k][p].R for k in data if k != best)
        ok &= dom
        details.append(f"ordered dominates at {p}: {dom}")
    for code in ("five", "steane"):
        zs = [z_score(flag, data[f"{code}/shor_ft"][p]) for p, flag in data[f"{code}/flag_ft"].items()]
        ok &= min(zs) > -2
        details.append(f"{code} min z(flag-shor)={min(zs):.1f}")
    record(3, ok, "; ".join(details))
    assert ok


# -- 4 ----------------------------------------------------------------------------------
def test_criterion_4_code_reordering(tmp_path):
    c = curves(run_recipe("sweep", "fig4.json", tmp_path, 2_000_000))
    five, steane, nine = c["five"], c["steane"], c["surface9"]
    t0, t1 = 0.0, max(five)
    z_ns = z_score(nine[t0], steane[t0])
    z_sf = z_score(steane[t0], five[t0])
    z_end_s = z_score(five[t1], steane[t1])
    z_end_n = z_score(five[t1], nine[t1])
    z_nf = z_score(nine[t0], five[t0])
    # Steane level with or above five: it may not fall 4 sigma below
    ok = z_ns >= 4 and z_sf > -4 and z_nf >= 4 and z_end_s >= 4 and z_end_n >= 4
    record(4, ok, f"tau=0: nine={nine[t0].R:.4f} steane={steane[t0].R:.4f} five={five[t0].R:.4f} "
                  f"z(nine-steane)={z_ns:.1f} z(steane-five)={z_sf:.1f} z(nine-five)={z_nf:.1f}; "
                  f"tau={t1}: z(five-steane)={z_end_s:.1f} z(five-nine)={z_end_n:.1f}")
    assert ok


# -- 5 ----------------------------------------------------------------------------------
def test_criterion_5_milestones(tmp_path):
    a = json.loads(run_recipe("milestones", "fig6a.json", tmp_path, 400_000))["verdicts"]
    b = json.loads(run_recipe("milestones", "fig6b.json", tmp_path, 400_000))["verdicts"]
    ok = (a["M1"], a["M2"], a["M3"], a["M4"]) == ("met", "met", "met", "not-met") and b["M4"] == "met"
    record(5, ok, f"p_e=0.3%: {a}; p_e=0.1%: M4 {b['M4']}")
    assert ok


# -- 6 ----------------------------------------------------------------------------------
def test_criterion_6_noisy_endpoints(tmp_path):
    c = curves(run_recipe("sweep", "fig7.json", tmp_path, 400_000))
    res = {}
    for p in ("0.005", "0.01"):
        for kind in ("ideal", "noisy"):
            res[kind, p] = crossings(c[f"{kind}_phi1_p{p}"], c[f"{kind}_phi0_p{p}"])
    exists = bool(res["ideal", "0.005"]) and bool(res["noisy", "0.005"])
    absent = not res["ideal", "0.01"] and not res["noisy", "0.01"]
    shift = abs(res["noisy", "0.005"][0] - res["ideal", "0.005"][0]) if exists else float("nan")
    ok = exists and absent and shift < 0.05
    record(6, ok, f"crossings ideal/noisy at 0.5%: {[round(x, 3) for x in res['ideal', '0.005']]} / "
                  f"{[round(x, 3) for x in res['noisy', '0.005']]}; at 1%: {res['ideal', '0.01']} / "
                  f"{res['noisy', '0.01']}; verdict preserved={exists and absent}; shift={shift:.3f} (< 0.05)")
    assert ok


# -- 7 ----------------------------------------------------------------------------------
def test_criterion_7_powerful_bob(tmp_path):
    text = run_recipe("oracle-compare", "fig12.json", tmp_path, 100_000)
    gaps = defaultdict(list)
    for row in csv.DictReader(io.StringIO(text)):
        gaps[row["channel_label"]].append(float(row["p_B"]) - float(row["p_g_exact"]))
    g = {k: max(v) for k, v in gaps.items()}
    ok = g["five"] < 0.01 and g["steane"] < 0.01 and g["surface9"] > 0 and min(min(v) for v in gaps.values()) >= -1e-12
    record(7, ok, f"max gap five={g['five']:.4f} steane={g['steane']:.4f} (< 0.01); surface9={g['surface9']:.4f} (> 0)")
    assert ok


# -- 8 ----------------------------------------------------------------------------------
def _random_circuit_equivalence(n_circuits=1000):
    rng = np.random.default_rng(8)
    gates = ONE_QUBIT_GATES + ("CX", "CZ")
    for _ in range(n_circuits):
        n = int(rng.integers(1, 11))
        t, psi = StabilizerTableau(n), DenseState.zeros(n)
        for _ in range(int(rng.integers(1, 4 * n + 2))):
            kind = gates[rng.integers(len(gates))] if n > 1 else gates[rng.integers(6)]
            g = op(kind, *map(int, rng.choice(n, 2, replace=False))) if kind in ("CX", "CZ") \
                else op(kind, int(rng.integers(n)))
            t.apply(g)
            psi.apply(g)
        i = np.arange(2**n)
        for s in t.stabilizers:
            sgn = 1 - 2 * (np.bitwise_count(i & s.z) & 1).astype(int)
            w = 1j ** (s.phase + bin(s.x & s.z).count("1")) * (sgn * psi.amplitudes)[i ^ s.x]
            if abs(np.vdot(psi.amplitudes, w) - 1) > 1e-9:
                return False
    return True


def test_criterion_8_property_suites(tmp_path):
    parts = {}
    ft = [("five", "shor_ft"), ("five", "flag_ft"), ("steane", "shor_ft"), ("steane", "flag_ft"),
          ("surface9", "surface_ordered")]
    parts["FT certification"] = all(cycle_failures(c, s) == [] for c, s in ft)
    parts["non-FT fails"] = all(len(cycle_failures(c, "non_ft")) > 0 for c in ("five", "steane", "surface9"))
    ok_w1 = True
    for name in ("five", "steane", "surface9"):
        code = get_code(name)
        ok_w1 &= all(code.is_stabilizer(e * code.correction(code.syndrome_of(e))) for e in all_paulis(code.n, 1))
    parts["weight-1 tables"] = ok_w1
    parts["tableau=dense x1000"] = _random_circuit_equivalence()
    # Monte Carlo against the exact channel over oracle-reachable configurations
    worst = 0.0
    for code in ("physical_qubit", "five", "steane", "surface9"):
        for m in ((0,) if code == "physical_qubit" else (0, 1, 2)):
            for kind in ("depolarizing", "dephasing"):
                for tau in (0.0, 0.3, 0.8):
                    cfg = ExperimentConfig(code=code, m=m, tau=tau, n_runs=100_000, seed=m + 17,
                                           noise=NoiseParams(p_e=0.005, env_kind=kind))
                    e = estimate_integrity(cfg)
                    pg = exact_guess_probabilities(cfg)
                    r_exact = min(2 * pg[a] - 1 for a in cfg.axes)
                    half = (e.ci_high - e.ci_low) / 2
                    worst = max(worst, abs(e.R_hat - r_exact) / max(half, 1e-12) if half else 0.0)
                    if half == 0 and e.R_hat != r_exact and abs(e.R_hat - r_exact) > 1e-6:
                        worst = float("inf")
    parts["MC within 4 CI"] = worst <= 4
    # thread-count invariance of CLI output
    outs = []
    for threads in (1, 4):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            main(["interruption", "--config", str(RECIPES / "fig2b.json"), "--runs", "20000",
                  "--threads", str(threads)])
        outs.append(buf.getvalue())
    cfg = ExperimentConfig(code="steane", m=2, ec_style="shor_ft", tau=0.3, n_runs=30000,
                           noise=NoiseParams(p_e=0.004))
    parts["thread invariance"] = outs[0] == outs[1] and (
        [e.per_basis for _, e in interruption_sweep(cfg, [0.1, 0.3], 1)]
        == [e.per_basis for _, e in interruption_sweep(cfg, [0.1, 0.3], 3)])
    ok = all(parts.values())
    record(8, ok, "; ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in parts.items())
           + f" (largest MC deviation {worst:.2f} CI)")
    assert ok


# -- 9 ----------------------------------------------------------------------------------
def test_criterion_9_dephasing_anisotropy(tmp_path):
    c = curves(run_recipe("sweep", "fig14.json", tmp_path, 400_000))
    taus = sorted(c["axis_Z"])
    z = np.array([c["axis_Z"][t].R for t in taus])
    zs = np.array([c["axis_Z"][t].sigma for t in taus])
    x = np.array([c["axis_X"][t].R for t in taus])
    # weighted slope of the Z curve and its standard error
    w = 1 / zs**2
    tm = np.sum(w * taus) / np.sum(w)
    slope = np.sum(w * (np.array(taus) - tm) * z) / np.sum(w * (np.array(taus) - tm) ** 2)
    se = 1 / math.sqrt(np.sum(w * (np.array(taus) - tm) ** 2))
    flat = abs(slope) < 3 * se
    decreasing = bool(np.all(np.diff(x) < 0))
    # the worst-axis channel is an independent run, so compare within 4 sigma
    from_min = all(abs(z_score(c["worst"][t], min((c[f"axis_{a}"][t] for a in "XYZ"), key=lambda q: q.R))) < 4
                   for t in taus)
    x_below_z = all(c["axis_X"][t].R < c["axis_Z"][t].R for t in taus if t > 0)
    ok = flat and decreasing and from_min and x_below_z
    record(9, ok, f"Z slope {slope:.4f} +- {se:.4f} (flat={flat}); X strictly decreasing={decreasing}; "
                  f"integrity = axis minimum={from_min}, X below Z={x_below_z}")
    assert ok

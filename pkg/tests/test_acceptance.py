"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the criterion lines are
written straight to the terminal so they survive output capture.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from imcf_lab import cli_io
from imcf_lab import flow_engine as fe
from imcf_lab import hypothesis_certifier as hc
from imcf_lab import monitors as mon
from imcf_lab import oracles
from imcf_lab.scenarios import CATALOGUE, make_scenario


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def certified(sc):
    return hc.certify_lte(sc, refine_check=False), hc.certify_asymptotics(sc)


def test_criterion_1_euclidean_sphere(report):
    t0 = time.perf_counter()
    sc = make_scenario("euclidean", {"r0": 1.0})
    lte, _ = certified(sc)
    traj = fe.run(sc, fe.initial_state(sc), 2.0, fe.FlowControls(fixed_steps=512), certificate=lte)
    elapsed = time.perf_counter() - t0
    t = traj.times
    eF = float(np.max(np.abs(traj["F_max"] - np.exp(t / 2)) / np.exp(t / 2)))
    eH = float(np.max(np.abs(traj["H_max"] - 2 * np.exp(-t / 2)) / (2 * np.exp(-t / 2))))
    ok = eF <= 1e-3 and eH <= 1e-3 and elapsed < 5.0 and traj.steps == 512
    assert report(1, ok, f"F_err={eF:.2e} H_err={eH:.2e} steps={traj.steps} time={elapsed:.2f}s")


def test_criterion_2_hyperbolic_sphere(report):
    t0 = time.perf_counter()
    sc = make_scenario("hyperbolic_sphere", {"r0": 1.0})
    lte, _ = certified(sc)
    traj = fe.run(sc, fe.initial_state(sc), 4.0, certificate=lte)
    elapsed = time.perf_counter() - t0
    t = traj.times
    ref = solve_ivp(lambda s, y: np.tanh(y) / 2, (0, 4), [1.0], method="DOP853",
                    rtol=1e-13, atol=1e-13, dense_output=True)
    ode_err = float(np.max(np.abs(traj["F_max"] - ref.sol(t)[0])))
    H = traj["H_max"]
    C0 = H[0] ** 2 - 4.0
    env = np.sqrt(4.0 + C0 * np.exp(-2.0 * t))
    margin = float(np.min(env - H))
    t_worst = float(t[int(np.argmin(env - H))])
    monotone = bool(np.all(np.diff(H) < 0) and H[-1] > 2.0)
    ok = ode_err <= 1e-6 and margin >= -1e-6 and monotone and elapsed < 5.0
    assert report(2, ok, f"ode_err={ode_err:.2e} envelope_margin={margin:.3e} at t={t_worst:.3g} "
                         f"monotone={monotone} H(T)={H[-1]:.6f} time={elapsed:.2f}s")


def test_criterion_3_oracle_equivalence(report):
    t0 = time.perf_counter()
    curv = oracles.curvature_samples(100, seed=0)
    shape = oracles.shape_samples(20, seed=0)
    elapsed = time.perf_counter() - t0
    wc = max(r.rel_error for r in curv)
    ws = max(r.rel_error for r in shape)
    kinds = {r.kind for r in curv}
    ok = wc <= 1e-4 and ws <= 1e-4 and len(curv) == 100 and elapsed < 60.0
    ok = ok and kinds == {"bar_ricci", "hat_ricci", "hat_scalar"}
    assert report(3, ok, f"curvature_worst={wc:.2e} shape_worst={ws:.2e} "
                         f"samples={len(curv)}+{len(shape)} time={elapsed:.1f}s")


def test_criterion_4_certifier_catalogue(report, tmp_path):
    ex1 = make_scenario("example1", {"l": 1.0, "p": 0.5, "q": 1.0, "n": 2, "r_lo": 1.0, "r_hi": 20.0})
    # Ricci lower constant: n, the value of the asymptotically hyperbolic model
    lte1 = hc.certify_lte(ex1, ricci_C=float(ex1.n))
    min_margin = min(rec.margin for rec in lte1.records)
    r_low, _ = hc.scalar_lower_bound(ex1)
    ex1_ok = lte1.passed and min_margin > 0 and r_low >= -6.0
    ex2 = hc.certify_lte(make_scenario("example2_negative"))
    g = ex2["G_cone"]
    ex2_ok = (not ex2.passed) and (not g.passed) and g.witness is not None and g.margin < 0
    eu = make_scenario("euclidean")
    eu_lte, eu_asym = certified(eu)
    eu_ok = eu_lte.passed and eu_lte["G_cone"].margin == 0.0 and not eu_asym.passed
    mismatched = []
    for sid in CATALOGUE:
        out = tmp_path / sid
        code = cli_io.execute(cli_io.RunConfig(subcommand="certify", scenario=sid, out=str(out)))
        want = 0 if make_scenario(sid).expected["lte"] == "PASS" else 1
        if code != want:
            mismatched.append(f"{sid}:{code}")
    ok = ex1_ok and ex2_ok and eu_ok and not mismatched
    assert report(4, ok, f"example1_min_margin={min_margin:.3e} example1_R_hat_min={r_low:.10f} "
                         f"example2_G_margin={g.margin:.3e} witness_r={g.witness[0]:.3g} "
                         f"euclidean_G_margin={eu_lte['G_cone'].margin:g} "
                         f"exit_mismatches={','.join(mismatched) or 'none'}")


def _axisym_checks(sid, allow_lte_only):
    sc = make_scenario(sid, {"amplitude": 0.05})
    lte, asym = certified(sc)
    traj = fe.run(sc, fe.initial_state(sc, "axisym", 128), 3.0, certificate=lte)
    params = mon.EnvelopeParams.from_certificates(sc, traj, lte, asym)
    vs = [mon.check_w_floor(traj, sc.cone.theta1), mon.check_u_max(traj, params),
          mon.check_eta_growth(traj, params), mon.check_gradient_bound(traj, params, allow_lte_only)]
    return lte.passed, vs


def test_criterion_5_maximum_principles(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    # Example 1 is not asymptotically hyperbolic, so its gradient bound uses the LTE-only variant
    for sid, lte_only in (("hyperbolic_perturbed", False), ("example1_perturbed", True)):
        certified_ok, vs = _axisym_checks(sid, lte_only)
        ok = ok and certified_ok and all(v.passed for v in vs)
        parts.append(sid + "[" + " ".join(f"{v.check_id}={v.status}({v.margin:.2e})" for v in vs) + "]")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    assert report(5, ok, " ".join(parts) + f" time={elapsed:.1f}s")


def test_criterion_6_residual_convergence(report):
    sc = make_scenario("hyperbolic_sphere")
    lte, _ = certified(sc)
    res = []
    for dt in (0.04, 0.02, 0.01, 0.005):
        traj = fe.run(sc, fe.initial_state(sc), 4.0, fe.FlowControls(dt_max=dt), certificate=lte)
        res.append(mon.check_w_evolution_residual(traj, sc).fitted["residual_l1"])
    ratios = [a / b for a, b in zip(res[:-1], res[1:])]
    ok = all(abs(r - 4.0) <= 0.8 for r in ratios)
    assert report(6, ok, "residuals=" + ",".join(f"{r:.3e}" for r in res)
                  + " ratios=" + ",".join(f"{r:.3f}" for r in ratios))


def test_criterion_7_determinism(report, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scenario = hyperbolic_perturbed\nmode = axisym\nT = 0.5\nresolution = 48\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        proc = subprocess.run([sys.executable, "-m", "imcf_lab.cli_io", "run", "--config", str(cfg),
                               "--out", str(out), "--seed", "11"], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    differ = [n for n in names if (outs[0] / n).read_bytes() != (outs[1] / n).read_bytes()]
    ok = names == sorted(os.listdir(outs[1])) and "trajectory.csv" in names and not differ
    assert report(7, ok, f"files={len(names)} differing={','.join(differ) or 'none'}")

"""Acceptance suite: one test per numbered criterion, stated tolerances only.

Each criterion prints a `ACCEPTANCE <n> ... PASS/FAIL` line (run pytest with
-s or -rA to see all of them) and the final test writes a summary table.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

import smoothsgd as sgd
from smoothsgd.harness import fit_loglog_slope
from smoothsgd.objectives import ConstantsVariant

ASYM = ConstantsVariant.ASYM_VALLEY
DWELL = ConstantsVariant.DOUBLE_WELL

RESULTS: dict[int, tuple[str, bool, str, float]] = {}


def record(num: int, name: str, checks: list[tuple[str, bool]], started: float,
           limit_s: float | None) -> None:
    elapsed = time.monotonic() - started
    ok = all(flag for _, flag in checks)
    if limit_s is not None:
        ok = ok and elapsed <= limit_s
        checks = checks + [(f"runtime {elapsed:.1f}s <= {limit_s:.0f}s", elapsed <= limit_s)]
    detail = "; ".join(f"{label}: {'ok' if flag else 'FAIL'}" for label, flag in checks)
    RESULTS[num] = (name, ok, detail, elapsed)
    print(f"ACCEPTANCE {num} {name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    assert ok, f"criterion {num} ({name}): {detail}"


def alpha_root() -> float:
    """Bisection oracle for the scale-free well location of the double well."""
    def balance(a):
        s = 1.0 - a * a
        return 1.0 - (2.0 / (s * s)) * math.exp(1.0 - 1.0 / s)

    lo, hi = 0.85, 0.95
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if balance(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_criterion_01_asym_valley_constants():
    started = time.monotonic()
    consts = sgd.mollifier_constants(ASYM)
    out = sgd.find_valid_regime(ASYM, 1e-3, consts)
    r, eta = out
    view = sgd.SmoothedView(sgd.asym_quad_bump(1e-3), sgd.uniform_noise(r), eta,
                            window=(-2.0, 4.0))
    cert = sgd.certify_problem(view, ASYM)
    record(1, "asym valley constants in regime", [
        ("regime_ok", bool(cert.regime_ok)),
        ("vstar = 1 +- 1e-8", abs(cert.vstar - 1.0) <= 1e-8),
        ("mu = 1 +- 1e-6", abs(cert.mu - 1.0) <= 1e-6),
        ("c >= 1/3 - 1e-3", cert.c >= 1.0 / 3.0 - 1e-3),
        ("M2 <= 8/9 + 1e-3 at M1 = 0", cert.M1 == 0.0 and cert.M2 <= 8.0 / 9.0 + 1e-3),
    ], started, 10.0)


def test_criterion_02_double_well_constants():
    started = time.monotonic()
    consts = sgd.mollifier_constants(DWELL)
    delta, r, eta = 0.2, 1.0, 0.2
    regime = sgd.regime_check(DWELL, delta, r, eta, consts)
    view = sgd.SmoothedView(sgd.sym_bump(delta), sgd.uniform_noise(r), eta,
                            window=(-2.0, 2.0))
    cert = sgd.certify_problem(view, DWELL)
    m1_cap = consts.C1 * delta ** 2 / (eta * r)
    # note: the closed-form conditions fail at these figure parameters
    # (regime.ok is False) and the measured one-point constant is ~0.28, so
    # the c >= 1/2 clause records an honest failure; see the decisions ledger
    record(2, "double well constants at figure parameters", [
        ("regime_check evaluated", regime.slacks is not None),
        ("vstar = 0 +- 1e-10", abs(cert.vstar) <= 1e-10),
        ("mu = 1 +- 1e-6", abs(cert.mu - 1.0) <= 1e-6),
        ("c >= 1/2 - 1e-3", cert.c >= 0.5 - 1e-3),
        ("M1 <= C1 d^2/(eta r) + 1e-6 at M2 = 0", cert.M2 == 0.0 and cert.M1 <= m1_cap + 1e-6),
    ], started, 10.0)


def test_criterion_03_double_well_separation():
    started = time.monotonic()
    consts = sgd.mollifier_constants(DWELL)
    large = sgd.preset("figD-large")
    assert large.run.trials == 500 and large.run.T == 200_000
    view_l = sgd.SmoothedView(large.objective, large.noise, large.run.eta,
                              window=large.window)
    rep_l = sgd.run_ensemble(large, view_l)
    cap = consts.C1 * 0.2 ** 2 / (large.run.eta * large.noise.r)
    check_l = abs(rep_l.mean_tail_avg_w) <= cap + 3.0 * rep_l.se_tail_avg_w

    small = sgd.preset("figD-small")
    view_s = sgd.SmoothedView(small.objective, small.noise, small.run.eta,
                              window=small.window)
    rep_s = sgd.run_ensemble(small, view_s)
    target = alpha_root() * 0.2
    mean_abs_final = float(np.mean(np.abs(rep_s.final_w)))
    check_s = abs(mean_abs_final - target) <= 0.10 * target
    record(3, "double well separation (large vs small step)", [
        (f"|mean tail| {abs(rep_l.mean_tail_avg_w):.2e} <= {cap:.3f} + 3se", check_l),
        ("|mean tail| below the well location", abs(rep_l.mean_tail_avg_w) < target),
        (f"mean|final| {mean_abs_final:.4f} within 10% of {target:.4f}", check_s),
    ], started, 300.0)


def test_criterion_04_asym_valley_averaging_dominance():
    started = time.monotonic()
    exp = sgd.preset("figC-sep-large")
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    rep = sgd.run_ensemble(exp, view)
    sep = rep.mean_abs_final - rep.mean_abs_tailavg
    sep_se = math.sqrt(rep.se_abs_final ** 2 + rep.se_abs_tailavg ** 2)
    dominance = sep > 3.0 * sep_se

    slow = dataclasses.replace(exp, run=dataclasses.replace(exp.run, eta=0.01))
    view_slow = sgd.SmoothedView(slow.objective, slow.noise, 0.01, window=slow.window)
    rep_slow = sgd.run_ensemble(slow, view_slow)
    trap = rep.trapped_fraction < rep_slow.trapped_fraction
    record(4, "asym valley averaging dominance", [
        (f"mean|tail-1| {rep.mean_abs_tailavg:.4f} < mean|final-1| "
         f"{rep.mean_abs_final:.4f} by >= 3 se", dominance),
        (f"trapped {rep.trapped_fraction:.3f} < {rep_slow.trapped_fraction:.3f}", trap),
    ], started, 180.0)


def test_criterion_05_bound_dominance_and_control():
    started = time.monotonic()
    r, eta = sgd.find_valid_regime(ASYM, 1e-3)
    spec, noise = sgd.asym_quad_bump(1e-3), sgd.uniform_noise(r)
    view = sgd.SmoothedView(spec, noise, eta, window=(-2.0, 4.0))
    consts = sgd.certify_problem(view, ASYM)
    T = 1_000_000
    exp = sgd.ExperimentConfig(spec, noise, sgd.RunConfig(eta=eta, T=T, seed=77, trials=100),
                               window=(-2.0, 4.0))
    rep = sgd.run_ensemble(exp, view)
    rep2 = sgd.run_ensemble(
        dataclasses.replace(exp, run=dataclasses.replace(exp.run, T=2 * T)), view)
    margin = abs(abs(rep2.mean_tail_avg_v - rep2.vstar) - abs(rep.mean_tail_avg_v - rep.vstar))
    f0, d0 = sgd.initial_moments(view, "uniform", -1.0, 2.0, consts.vstar)
    verdicts = sgd.compare_to_bound(rep, sgd.sgd_mse_bound(consts, eta, T, d0, f0),
                                    sgd.averaged_bias_bound(consts, eta), t_margin=margin)

    # falsification control: a certificate with c inflated tenfold must be
    # able to fail verdict A; demonstrated where the honest bound is tight
    # enough (gaussian noise on the quadratic, started at the minimizer)
    viewQ = sgd.SmoothedView(sgd.quadratic(1.0), sgd.gaussian_noise(1.0), 0.1,
                             window=(-2.0, 4.0))
    constsQ = sgd.certify_problem(viewQ)
    expQ = sgd.ExperimentConfig(
        sgd.quadratic(1.0), sgd.gaussian_noise(1.0),
        sgd.RunConfig(eta=0.1, T=10_000, seed=11, trials=100, w0_kind="fixed", w0_a=1.0),
        window=(-2.0, 4.0))
    repQ = sgd.run_ensemble(expQ, viewQ)
    f0q, d0q = sgd.initial_moments(viewQ, "fixed", 1.0, 0.0, constsQ.vstar)
    honest = sgd.compare_to_bound(
        repQ, sgd.sgd_mse_bound(constsQ, 0.1, 10_000, d0q, f0q),
        sgd.averaged_bias_bound(constsQ, 0.1))
    corrupted = sgd.compare_to_bound(
        repQ, sgd.sgd_mse_bound(dataclasses.replace(constsQ, c=constsQ.c * 10.0),
                                0.1, 10_000, d0q, f0q),
        sgd.averaged_bias_bound(constsQ, 0.1))
    record(5, "theorem bounds dominate the measurements", [
        (f"verdict A: {verdicts.time_avg_mse:.4f} <= {verdicts.sgd_total:.4f} + 3se",
         verdicts.verdict_a),
        (f"verdict B: {verdicts.mean_tail_v_dev:.4f} <= {verdicts.avg_total:.4f} "
         f"+ 3se + {margin:.4f}", verdicts.verdict_b),
        ("control: honest bound passes", honest.verdict_a),
        ("control: c x 10 fails verdict A", not corrupted.verdict_a),
    ], started, 300.0)


def test_criterion_06_eta_scaling_of_both_methods():
    started = time.monotonic()
    consts = sgd.mollifier_constants(ASYM)
    deltas = [3e-3, 1e-3, 3e-4, 1e-4]
    family = {}
    for d in deltas:
        r, _ = sgd.find_valid_regime(ASYM, d, consts)
        eta = 2.0 * consts.C1 * d / r
        assert sgd.regime_check(ASYM, d, r, eta, consts).ok
        family[eta] = (sgd.asym_quad_bump(d), sgd.uniform_noise(r))
    base = sgd.ExperimentConfig(
        sgd.asym_quad_bump(deltas[0]), sgd.uniform_noise(1.0),
        sgd.RunConfig(eta=0.1, T=1000, seed=1234, trials=16), window=(-2.0, 4.0))
    # the tail-average error of the averaged iterate carries a seed-noise
    # floor ~ sigma/sqrt(T); the budget T = 5e-4/eta^2 keeps that floor at
    # the eta scale the closed-form rate table predicts
    sweep = sgd.eta_sweep(base, sorted(family, reverse=True),
                          t_for_eta=lambda eta: int(math.ceil(5e-4 / eta ** 2)),
                          problem_for_eta=lambda eta: family[eta])
    record(6, "step-size scaling of averaged vs plain SGD", [
        (f"averaged slope {sweep.avg_slope:.3f} in [0.8, 1.5]",
         0.8 <= sweep.avg_slope <= 1.5),
        (f"sgd slope {sweep.sgd_slope:.3f} in [0.35, 0.75]",
         0.35 <= sweep.sgd_slope <= 0.75),
        ("no dropped step sizes", not sweep.dropped),
    ], started, 600.0)


def test_criterion_07_curvature_penalty_residual_order():
    started = time.monotonic()
    etas = [0.4, 0.2, 0.1, 0.05]
    resid = []
    for eta in etas:
        view = sgd.SmoothedView(sgd.polynomial([0, 0, 0, 0, 1.0]), sgd.uniform_noise(1.0),
                                eta, window=(-2.0, 2.0))
        resid.append(sgd.taylor_penalty_residual(view, 0.5)[1])
    slope, _ = fit_loglog_slope(np.array(etas), np.array(resid))
    record(7, "curvature-penalty residual order", [
        (f"log-log slope {slope:.3f} >= 2.9", slope >= 2.9),
    ], started, 1.0)


def test_criterion_08_biased_gradient_gap_bound():
    started = time.monotonic()
    grid = np.linspace(-1.0, 2.0, 101)
    view = sgd.SmoothedView(sgd.asym_quad_bump(0.3), sgd.state_scaled_noise(1.0, 0.5),
                            0.05, window=(-2.0, 4.0))
    worst = -np.inf
    for v in grid:
        gap, bound = sgd.bias_gap(view, float(v))
        worst = max(worst, gap - bound)
    viewU = sgd.SmoothedView(sgd.asym_quad_bump(0.3), sgd.uniform_noise(1.0), 0.05,
                             window=(-2.0, 4.0))
    control = max(sgd.bias_gap(viewU, float(v))[0] for v in grid)
    record(8, "biased-gradient gap within its bound", [
        (f"max(gap - bound) = {worst:.2e} <= 1e-9", worst <= 1e-9),
        (f"state-independent control gap {control:.2e} <= 1e-10", control <= 1e-10),
    ], started, 30.0)


def test_criterion_09_coordinate_change_and_stationarity():
    started = time.monotonic()
    spec = sgd.asym_quad_bump(0.3)
    L = sgd.lipschitz_bound(spec)
    view = sgd.SmoothedView(spec, sgd.uniform_noise(1.0), 1.0 / (2.0 * L))
    rng = np.random.default_rng(303)
    pts = rng.uniform(-5.0, 5.0, 1000)
    rt = max(abs(sgd.phi_inverse(view, sgd.phi_forward(view, w)) - w) for w in pts)
    grid = np.linspace(-5.0, 5.0, 50_001)
    min_slope = float(np.min(1.0 - view.eta * sgd.evaluate_arrays(spec, grid)[2]))
    defect = sgd.implicit_identity_check(
        spec, sgd.uniform_noise(1.0), sgd.RunConfig(eta=0.05, T=10_000, seed=5, trials=1))
    cfg = sgd.RunConfig(eta=0.1, T=10_000, seed=21, trials=100)
    lhs, rhs, se = sgd.stationarity_sum_check(spec, sgd.uniform_noise(1.0), cfg,
                                              L=L, sigma1_sq=1.0)
    record(9, "coordinate change and stationarity sum", [
        (f"roundtrip {rt:.2e} <= 1e-10", rt <= 1e-10),
        (f"min slope {min_slope:.6f} >= 0.5 - 1e-9", min_slope >= 0.5 - 1e-9),
        (f"implicit-view defect {defect:.2e} <= 1e-9", defect <= 1e-9),
        (f"stationarity {lhs:.1f} <= {rhs:.1f} + 3se", lhs <= rhs + 3.0 * se),
    ], started, 60.0)


def test_criterion_10_degenerate_reductions():
    started = time.monotonic()
    spec = sgd.asym_quad_bump(0.3)
    view = sgd.SmoothedView(spec, sgd.zero_noise(), 0.3)
    grid = np.linspace(-2.0, 4.0, 1000)
    sup = float(np.max(np.abs(sgd.smoothed_eval_grid(view, grid)[0]
                              - sgd.evaluate_arrays(spec, grid)[0])))
    cfg = sgd.RunConfig(eta=0.5, T=60, seed=0, trials=1, w0_kind="fixed", w0_a=0.0)
    tr = sgd.run_sgd(sgd.quadratic(1.0), sgd.zero_noise(), cfg, vstar=1.0)
    contraction = abs(tr.final_w - 1.0) <= 2.0 ** -60 + 1e-16
    record(10, "noise-free degenerate reductions", [
        (f"sup|F - f| = {sup:.2e} <= 1e-12", sup <= 1e-12),
        ("gradient-descent contraction to fp tolerance", contraction),
    ], started, None)


def test_zz_summary_table():
    print("\n================ acceptance summary ================", flush=True)
    for num in sorted(RESULTS):
        name, ok, detail, elapsed = RESULTS[num]
        print(f"  criterion {num:>2} [{'PASS' if ok else 'FAIL'}] {name} "
              f"({elapsed:.1f}s)", flush=True)
        if not ok:
            print(f"      {detail}", flush=True)
    print("====================================================", flush=True)

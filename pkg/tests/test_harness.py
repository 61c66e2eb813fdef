import dataclasses

import numpy as np
import pytest

import smoothsgd as sgd
from smoothsgd.harness import HISTOGRAM_BINS, fit_loglog_slope


def small_exp(**kw):
    base = dict(
        objective=sgd.quadratic(1.0),
        noise=sgd.zero_noise(),
        run=sgd.RunConfig(eta=0.3, T=500, seed=7, trials=8, w0_kind="fixed", w0_a=0.0),
        window=(-2.0, 4.0),
    )
    base.update(kw)
    return sgd.ExperimentConfig(**base)


def test_zero_noise_ensemble_collapses():
    exp = small_exp()
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    rep = sgd.run_ensemble(exp, view)
    assert rep.se_abs_final == 0.0
    assert np.all(rep.final_w == rep.final_w[0])
    assert rep.diverged == 0
    assert rep.hist_final.sum() == rep.trials - rep.diverged
    assert len(rep.hist_edges) == HISTOGRAM_BINS + 1


def test_histogram_counts_total():
    exp = small_exp(noise=sgd.uniform_noise(1.0),
                    run=sgd.RunConfig(eta=0.3, T=2000, seed=11, trials=64))
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    rep = sgd.run_ensemble(exp, view)
    assert rep.hist_final.sum() == rep.trials - rep.diverged
    assert rep.hist_tailavg.sum() == rep.trials - rep.diverged


def test_slope_fit_oracles():
    etas = np.array([0.1, 0.2, 0.4, 0.8])
    s, se = fit_loglog_slope(etas, etas.copy())
    assert s == pytest.approx(1.0, abs=1e-12) and se == pytest.approx(0.0, abs=1e-12)
    s, _ = fit_loglog_slope(etas, np.sqrt(etas))
    assert s == pytest.approx(0.5, abs=1e-12)
    s, _ = fit_loglog_slope(etas, 3.0 * etas ** 1.3)
    assert s == pytest.approx(1.3, abs=1e-12)


def test_ensemble_determinism():
    exp = small_exp(noise=sgd.uniform_noise(1.0),
                    run=sgd.RunConfig(eta=0.3, T=2000, seed=5, trials=16))
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    a = sgd.run_ensemble(exp, view)
    b = sgd.run_ensemble(exp, view)
    assert np.array_equal(a.final_w, b.final_w)
    assert np.array_equal(a.tail_avg_w, b.tail_avg_w)
    assert a.time_avg_mse == b.time_avg_mse


def test_all_diverged_is_an_error():
    exp = small_exp(objective=sgd.polynomial([0, 0, 0, 0, 1.0]),
                    run=sgd.RunConfig(eta=3.0, T=50, seed=1, trials=4,
                                      w0_kind="fixed", w0_a=2.0))
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=(-1.0, 3.0))
    view.vstar = 0.0
    with pytest.raises(RuntimeError):
        sgd.run_ensemble(exp, view)


def test_eta_sweep_requires_enough_points():
    exp = small_exp(noise=sgd.uniform_noise(1.0))
    with pytest.raises(ValueError):
        sgd.eta_sweep(exp, [0.1, 0.2, 0.3])
    with pytest.raises(RuntimeError):
        sgd.eta_sweep(exp, [0.1, 0.2, 0.3, 0.4], regime_limit=lambda e: e < 0.15)


def test_eta_sweep_on_quadratic_matches_stationary_scaling():
    # with a T budget growing as 1/eta^2 (many mixing times at every eta,
    # matched tail-noise floor), the quadratic shows the canonical scalings:
    # sqrt stationary MSE ~ sqrt(eta), tail-average error ~ eta
    exp = small_exp(
        noise=sgd.uniform_noise(1.0),
        run=sgd.RunConfig(eta=0.1, T=20_000, seed=3, trials=24, w0_kind="fixed", w0_a=1.0),
    )
    sweep = sgd.eta_sweep(exp, [0.2, 0.1, 0.05, 0.025, 0.0125],
                          t_for_eta=lambda eta: int(20.0 / eta ** 2))
    assert 0.35 <= sweep.sgd_slope <= 0.75
    assert 0.8 <= sweep.avg_slope <= 1.5
    assert not sweep.dropped


def test_verdict_logic_and_falsification_control():
    exp = small_exp(noise=sgd.gaussian_noise(1.0),
                    run=sgd.RunConfig(eta=0.1, T=10_000, seed=11, trials=100,
                                      w0_kind="fixed", w0_a=1.0))
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    rep = sgd.run_ensemble(exp, view)
    consts = sgd.certify_problem(view)
    f0, d0 = sgd.initial_moments(view, "fixed", 1.0, 0.0, consts.vstar)
    honest = sgd.sgd_mse_bound(consts, exp.run.eta, exp.run.T, d0, f0)
    avg = sgd.averaged_bias_bound(consts, exp.run.eta)
    v = sgd.compare_to_bound(rep, honest, avg)
    assert v.verdict_a and v.verdict_b
    corrupted = sgd.sgd_mse_bound(dataclasses.replace(consts, c=consts.c * 10.0),
                                  exp.run.eta, exp.run.T, d0, f0)
    v_bad = sgd.compare_to_bound(rep, corrupted, avg)
    assert not v_bad.verdict_a


def test_zero_noise_verdicts_trivially_pass():
    exp = small_exp()
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    rep = sgd.run_ensemble(exp, view)
    consts = sgd.certify_problem(view)
    f0, d0 = sgd.initial_moments(view, "fixed", 0.0, 0.0, consts.vstar)
    a = sgd.sgd_mse_bound(consts, exp.run.eta, exp.run.T, d0, f0)
    b = sgd.averaged_bias_bound(consts, exp.run.eta)
    v = sgd.compare_to_bound(rep, a, b)
    assert v.verdict_a and v.verdict_b
    assert v.margin_a == pytest.approx(a.total - rep.time_avg_mse)


def test_preset_catalog():
    names = sgd.preset_names()
    assert names == ["figC-sep-small", "figC-sep-large", "figD-small", "figD-large",
                     "fig2-sweep", "smooth-curves"]
    pd = sgd.preset("figD-large")
    assert pd.objective.kind == "sym_bump" and pd.objective.delta == 0.2
    assert pd.noise.r == 1.0 and pd.run.eta == 0.2
    assert pd.run.T == 200_000 and pd.run.trials == 500
    ps = sgd.preset("figD-small")
    assert ps.run.eta == 0.01
    pc = sgd.preset("figC-sep-large")
    assert pc.objective.delta == 0.3 and pc.run.eta == 0.3 and pc.run.trials == 500
    sweep = sgd.preset("fig2-sweep")
    assert sweep.etas == (0.1, 0.3, 0.5, 0.7, 0.9)
    with pytest.raises(KeyError) as exc:
        sgd.preset("nope")
    assert "figC-sep-small" in str(exc.value)


def test_trapped_fraction_region():
    exp = small_exp(objective=sgd.asym_quad_bump(0.3), noise=sgd.uniform_noise(1.0),
                    run=sgd.RunConfig(eta=0.01, T=20_000, seed=2, trials=64),
                    trap_halfwidth=0.3)
    view = sgd.SmoothedView(exp.objective, exp.noise, exp.run.eta, window=exp.window)
    rep = sgd.run_ensemble(exp, view)
    manual = float(np.mean(np.abs(rep.final_w) < 0.3))
    assert rep.trapped_fraction == manual
    assert 0.0 < rep.trapped_fraction < 1.0

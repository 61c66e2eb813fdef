"""Command-line front door: config in, CSV artifacts out.

Subcommands: run, sweep, certify, bounds, preset, landscape, selftest.
Exit codes: 0 success, 1 usage/configuration error, 2 verdict failure under
--strict.  All file outputs are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import _kernels, config as cfgmod, reporting
from .bounds import averaged_bias_bound, sgd_mse_bound
from .certify import certify_problem
from .dynamics import RunConfig, run_trials
from .harness import ExperimentConfig, compare_to_bound, eta_sweep, preset, preset_names, run_ensemble
from .noise import NoiseModel, uniform_noise
from .objectives import ConstantsVariant, asym_quad_bump, evaluate_arrays, quadratic
from .smoothing import QuadratureError, SmoothedView, initial_moments, phi_forward, phi_inverse, smoothed_eval_grid

CERTIFICATE_HEADER = ["problem", "delta", "r", "eta", "L", "sigma1_sq", "sigma2",
                      "c", "mu", "M1", "M2", "vstar", "regime_ok"]
BOUNDS_HEADER = ["problem", "eta", "T", "init_term", "f0_term", "linear_eta_term",
                 "quad_eta_term", "sgd_total", "eta32_term", "M1_term", "M2_linear",
                 "M2_quad", "avg_total"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--preset", help="named preset from the catalog")
    p.add_argument("--seed", type=int, help="base seed (fallback: SMOOTHSGD_SEED)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="kernel thread count")
    p.add_argument("--strict", action="store_true",
                   help="nonzero exit when a bound verdict fails")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="config override (repeatable)")


def _seed_from(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SMOOTHSGD_SEED")
    return int(env) if env else None


def _resolve(args) -> ExperimentConfig:
    raw: dict[str, str] = {}
    if args.preset:
        exp = preset(args.preset)
        raw.update(cfgmod.experiment_to_config(exp))
    if args.config:
        with open(args.config) as fh:
            raw.update(cfgmod.parse_config_text(fh.read()))
    if not raw and not args.preset:
        raise cfgmod.ConfigError("need --preset or --config")
    raw.update(cfgmod.parse_overrides(args.overrides))
    return cfgmod.resolve_experiment(raw, seed=_seed_from(args))


def _set_workers(n: int) -> None:
    if n > 1 and _kernels.HAS_NUMBA:
        import numba

        available = numba.config.NUMBA_NUM_THREADS
        if available > 1:
            numba.set_num_threads(min(n, available))
        else:
            print("workers: only one kernel thread available; running single-threaded",
                  file=sys.stderr)


def _variant_for(exp: ExperimentConfig) -> ConstantsVariant | None:
    if exp.objective.kind == "asym_quad_bump":
        return ConstantsVariant.ASYM_VALLEY
    if exp.objective.kind == "sym_bump":
        return ConstantsVariant.DOUBLE_WELL
    return None


def _verdicts_for(exp: ExperimentConfig, view: SmoothedView, report):
    consts = certify_problem(view, _variant_for(exp))
    if consts.failed:
        return None, consts
    f0, d0 = initial_moments(view, exp.run.w0_kind, exp.run.w0_a, exp.run.w0_b, consts.vstar)
    sgd_b = sgd_mse_bound(consts, exp.run.eta, exp.run.T, d0, f0)
    avg_b = averaged_bias_bound(consts, exp.run.eta)
    return compare_to_bound(report, sgd_b, avg_b), consts


def _run_single(exp: ExperimentConfig, out_dir: str, strict: bool) -> int:
    view = exp.view()
    report = run_ensemble(exp, view)
    verdicts, _ = _verdicts_for(exp, view, report)
    cfg = cfgmod.experiment_to_config(exp)
    reporting.write_trials_csv(os.path.join(out_dir, "trials.csv"), report, cfg)
    row = reporting.summary_row(exp.preset_name, report, exp.run, verdicts)
    reporting.write_summary_csv(os.path.join(out_dir, "summary.csv"), [row], cfg)
    name = exp.preset_name or "custom"
    print(f"{name}: N={report.trials} diverged={report.diverged} "
          f"mean|tail-v*|={report.mean_abs_tailavg:.6g}")
    if strict and verdicts is not None and not (verdicts.verdict_a and verdicts.verdict_b):
        return 2
    return 0


def _run_multi_eta(exp: ExperimentConfig, out_dir: str, strict: bool) -> int:
    rows = []
    sweep_rows = []
    failed = False
    cfg = cfgmod.experiment_to_config(exp)
    for eta in exp.etas:
        sub = replace(exp, run=replace(exp.run, eta=float(eta)), etas=())
        view = sub.view()
        report = run_ensemble(sub, view)
        verdicts, _ = _verdicts_for(sub, view, report)
        if verdicts is not None and not (verdicts.verdict_a and verdicts.verdict_b):
            failed = True
        reporting.write_trials_csv(
            os.path.join(out_dir, f"trials_eta{eta}.csv"), report,
            cfgmod.experiment_to_config(sub))
        rows.append(reporting.summary_row(exp.preset_name, report, sub.run, verdicts))
        se_mse = (0.5 * report.se_time_avg_mse / math.sqrt(report.time_avg_mse)
                  if report.time_avg_mse > 0 else 0.0)
        sweep_rows.append([eta, report.mean_abs_tailavg, report.se_abs_tailavg,
                           math.sqrt(report.time_avg_mse), se_mse])
        print(f"{exp.preset_name or 'custom'} eta={eta}: "
              f"mean|tail-v*|={report.mean_abs_tailavg:.6g}")
    reporting.write_summary_csv(os.path.join(out_dir, "summary.csv"), rows, cfg)
    reporting.atomic_write_text(
        os.path.join(out_dir, "sweep.csv"),
        reporting.render_csv(reporting.SWEEP_HEADER, sweep_rows, cfg))
    return 2 if strict and failed else 0


def cmd_run(args) -> int:
    exp = _resolve(args)
    _set_workers(args.workers)
    if exp.etas:
        return _run_multi_eta(exp, args.out, args.strict)
    return _run_single(exp, args.out, args.strict)


def cmd_sweep(args) -> int:
    raw: dict[str, str] = {}
    if args.preset:
        raw.update(cfgmod.experiment_to_config(preset(args.preset)))
    if args.config:
        with open(args.config) as fh:
            raw.update(cfgmod.parse_config_text(fh.read()))
    raw.update(cfgmod.parse_overrides(args.overrides))
    etas_raw = raw.get("sweep.etas") or raw.get("etas")
    if not etas_raw:
        raise cfgmod.ConfigError("sweep needs 'sweep.etas'")
    etas = [float(x) for x in etas_raw.split(",")]
    t_rule = raw.get("sweep.t_rule", "fixed")
    budget = float(raw.get("sweep.t_budget", "0") or 0)
    trials = raw.get("sweep.trials")
    raw = {k: v for k, v in raw.items() if not k.startswith("sweep.")}
    exp = cfgmod.resolve_experiment(raw, seed=_seed_from(args))
    if trials:
        exp = replace(exp, run=replace(exp.run, trials=int(trials)))
    _set_workers(args.workers)
    t_for_eta = None
    if t_rule == "inverse_eta_sq":
        if budget <= 0:
            raise cfgmod.ConfigError("t_rule inverse_eta_sq needs sweep.t_budget > 0")
        t_for_eta = lambda eta: max(exp.run.T, int(math.ceil(budget / eta ** 2)))
    elif t_rule != "fixed":
        raise cfgmod.ConfigError(f"unknown sweep.t_rule {t_rule!r}")
    sweep = eta_sweep(exp, etas, t_for_eta=t_for_eta)
    reporting.write_sweep_csv(os.path.join(args.out, "sweep.csv"), sweep,
                              cfgmod.experiment_to_config(exp))
    print(f"sweep: avg slope {sweep.avg_slope:.3f} (se {sweep.avg_slope_se:.3f}), "
          f"sgd slope {sweep.sgd_slope:.3f} (se {sweep.sgd_slope_se:.3f})")
    for eta, why in sweep.dropped:
        print(f"dropped eta={eta}: {why}", file=sys.stderr)
    if args.strict and sweep.dropped:
        return 2
    return 0


def cmd_certify(args) -> int:
    exp = _resolve(args)
    _set_workers(args.workers)
    view = exp.view()
    variant = _variant_for(exp)
    consts = certify_problem(view, variant)
    name = exp.preset_name or exp.objective.kind
    block = {
        "problem": name,
        "delta": exp.objective.delta,
        "r": exp.noise.r,
        "eta": exp.run.eta,
        "L": consts.L,
        "sigma1_sq": consts.sigma1_sq,
        "sigma2": consts.sigma2,
        "c": consts.c,
        "mu": consts.mu,
        "M1": consts.M1,
        "M2": consts.M2,
        "vstar": consts.vstar,
        "regime_ok": consts.regime_ok,
        "window_lo": consts.window[0],
        "window_hi": consts.window[1],
        "grid_n": consts.grid_n,
        "failed": consts.failed,
    }
    for key, value in block.items():
        print(f"{key} = {value}")
    row = [name, exp.objective.delta, exp.noise.r, exp.run.eta, consts.L,
           consts.sigma1_sq, consts.sigma2, consts.c, consts.mu, consts.M1,
           consts.M2, consts.vstar, consts.regime_ok]
    reporting.atomic_write_text(
        os.path.join(args.out, "certificate.csv"),
        reporting.render_csv(CERTIFICATE_HEADER, [row], cfgmod.experiment_to_config(exp)))
    return 0


def cmd_bounds(args) -> int:
    exp = _resolve(args)
    _set_workers(args.workers)
    etas = list(exp.etas) if exp.etas else [exp.run.eta]
    rows = []
    name = exp.preset_name or exp.objective.kind
    for eta in etas:
        view = exp.view(eta)
        consts = certify_problem(view, _variant_for(exp))
        if consts.failed:
            raise RuntimeError(f"certificate failed at eta={eta} (c={consts.c}, mu={consts.mu})")
        f0, d0 = initial_moments(view, exp.run.w0_kind, exp.run.w0_a, exp.run.w0_b, consts.vstar)
        sgd_b = sgd_mse_bound(consts, float(eta), exp.run.T, d0, f0)
        avg_b = averaged_bias_bound(consts, float(eta))
        rows.append([name, eta, exp.run.T,
                     sgd_b.terms["init_term"], sgd_b.terms["f0_term"],
                     sgd_b.terms["linear_eta_term"], sgd_b.terms["quad_eta_term"],
                     sgd_b.total,
                     avg_b.terms["eta32_term"], avg_b.terms["M1_term"],
                     avg_b.terms["M2_linear"], avg_b.terms["M2_quad"], avg_b.total])
    reporting.atomic_write_text(
        os.path.join(args.out, "bounds.csv"),
        reporting.render_csv(BOUNDS_HEADER, rows, cfgmod.experiment_to_config(exp)))
    print(f"bounds: wrote {len(rows)} row(s) to {os.path.join(args.out, 'bounds.csv')}")
    return 0


def cmd_landscape(args) -> int:
    exp = _resolve(args)
    n = int(args.grid_n)
    view = exp.view()
    v = np.linspace(exp.window[0], exp.window[1], n)
    f = evaluate_arrays(exp.objective, v)[0]
    F, Fg, _ = smoothed_eval_grid(view, v)
    reporting.write_landscape_csv(os.path.join(args.out, "landscape.csv"),
                                  v, f, F, Fg, cfgmod.experiment_to_config(exp))
    print(f"landscape: {n} points on [{exp.window[0]}, {exp.window[1]}]")
    return 0


def cmd_preset(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(name)
        return 0
    exp = preset(args.name)
    print(cfgmod.format_config(cfgmod.experiment_to_config(exp)))
    return 0


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def _selftest_checks(quad_cap: int):
    rng = np.random.default_rng(7)

    def finite_difference():
        for spec in (quadratic(1.0), asym_quad_bump(0.3)):
            pts = rng.uniform(-2.0, 2.0, 200)
            f, g, h = evaluate_arrays(spec, pts)
            step = 1e-6
            fp, _, _ = evaluate_arrays(spec, pts + step)
            fm, _, _ = evaluate_arrays(spec, pts - step)
            gfd = (fp - fm) / (2 * step)
            scale = np.maximum(1.0, np.abs(g))
            if np.max(np.abs(gfd - g) / scale) > 1e-6:
                return False
        return True

    def phi_roundtrip():
        view = SmoothedView(asym_quad_bump(0.3), uniform_noise(1.0), 1.0 / (2.0 * 71.0))
        pts = rng.uniform(-5.0, 5.0, 100)
        err = max(abs(phi_inverse(view, phi_forward(view, w)) - w) for w in pts)
        return err <= 1e-10

    def quadrature_vs_closed_form():
        from smoothsgd.smoothing import _grid_fFgh_at_order

        view = SmoothedView(quadratic(0.0), uniform_noise(1.0), 0.3, quad_order_cap=quad_cap)
        try:
            F = smoothed_eval_grid(view, np.float64(0.0))[0]
            if abs(F - 0.09 / 6.0) > 1e-12:
                return False
            # the bump integral exercises the order-doubling ladder; its
            # value is cross-checked against a plain global rule
            bump = SmoothedView(asym_quad_bump(0.3), uniform_noise(1.0), 0.3,
                                quad_order_cap=quad_cap)
            pts = np.array([0.1, 0.3])
            Fb = smoothed_eval_grid(bump, pts)[0]
            ref = _grid_fFgh_at_order(bump, pts, 512)[0]
        except QuadratureError:
            return False
        return float(np.max(np.abs(Fb - ref))) <= 1e-9

    def zero_noise_reduction():
        view = SmoothedView(asym_quad_bump(0.3), NoiseModel(kind="zero"), 0.3)
        v = np.linspace(-2.0, 4.0, 500)
        F = smoothed_eval_grid(view, v)[0]
        f = evaluate_arrays(asym_quad_bump(0.3), v)[0]
        return float(np.max(np.abs(F - f))) <= 1e-12

    def sgd_determinism():
        cfg = RunConfig(eta=0.3, T=2000, seed=99, trials=3)
        a, _ = run_trials(asym_quad_bump(0.3), uniform_noise(1.0), cfg, 1.0)
        b, _ = run_trials(asym_quad_bump(0.3), uniform_noise(1.0), cfg, 1.0)
        return all(x.final_w == y.final_w and x.tail_avg_w == y.tail_avg_w
                   for x, y in zip(a, b))

    return {
        "finite_difference": finite_difference,
        "phi_roundtrip": phi_roundtrip,
        "quadrature_vs_closed_form": quadrature_vs_closed_form,
        "zero_noise_reduction": zero_noise_reduction,
        "sgd_determinism": sgd_determinism,
    }


def cmd_selftest(args) -> int:
    quad_cap = 2 if args.break_quadrature else 4096
    results = {}
    for name, check in _selftest_checks(quad_cap).items():
        start = time.monotonic()
        try:
            ok = bool(check())
        except Exception as exc:  # a crashing check is a failing check
            ok = False
            results[name] = {"ok": False, "error": repr(exc)}
        if name not in results:
            results[name] = {"ok": ok, "seconds": round(time.monotonic() - start, 3)}
    failed = [name for name, r in results.items() if not r["ok"]]
    if args.json:
        print(json.dumps(results, indent=2, sort_keys=True))
    else:
        for name, r in results.items():
            print(f"{name}: {'ok' if r['ok'] else 'FAIL'}")
    if failed:
        print(f"selftest failures: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smoothsgd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep), ("certify", cmd_certify),
                     ("bounds", cmd_bounds)):
        p = sub.add_parser(name)
        _common_flags(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("landscape")
    _common_flags(p)
    p.add_argument("--grid-n", default=1001, type=int)
    p.set_defaults(fn=cmd_landscape)

    p = sub.add_parser("preset")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.set_defaults(fn=cmd_preset)

    p = sub.add_parser("selftest")
    p.add_argument("--json", action="store_true")
    p.add_argument("--break-quadrature", action="store_true",
                   help="fault-injection hook: clamp the quadrature order cap to 2")
    p.set_defaults(fn=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 1
    try:
        return args.fn(args)
    except (cfgmod.ConfigError, KeyError, FileNotFoundError, ValueError) as exc:
        print(f"smoothsgd: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

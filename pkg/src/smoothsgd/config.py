"""Flat `key = value` configuration with dotted keys.

The format is a plain text file, one assignment per line, `#` comments and
blank lines ignored.  Unknown keys are errors, not warnings: configs are the
reproducibility record, so silent typos are unacceptable.
"""

from __future__ import annotations

from dataclasses import replace

from .dynamics import RunConfig
from .harness import ExperimentConfig
from .noise import NoiseModel
from .objectives import ObjectiveSpec

__all__ = [
    "ConfigError",
    "parse_config_text",
    "parse_overrides",
    "resolve_experiment",
    "experiment_to_config",
    "format_config",
    "with_seed",
    "KNOWN_KEYS",
]

KNOWN_KEYS = frozenset({
    "label",
    "objective.kind", "objective.delta", "objective.center", "objective.coefficients",
    "noise.kind", "noise.r", "noise.s", "noise.beta",
    "seed", "eta",
    "quad.order_cap", "window.lo", "window.hi",
    "run.eta", "run.T", "run.w0.kind", "run.w0.lo", "run.w0.hi", "run.w0.value",
    "run.tail_fraction", "run.record_stride", "run.trials",
    "trap.halfwidth",
    "sweep.etas", "sweep.t_rule", "sweep.t_budget", "sweep.trials",
    "landscape.n", "etas",
})


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    """Raw key -> value strings; duplicate keys keep the last assignment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override must be key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        out[key] = value.strip()
    return out


def _get_float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


def _get_int(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


def _objective(cfg) -> ObjectiveSpec:
    kind = cfg.get("objective.kind")
    if kind is None:
        raise ConfigError("missing required key 'objective.kind'")
    if kind == "quadratic":
        return ObjectiveSpec(kind=kind, center=_get_float(cfg, "objective.center", 0.0))
    if kind in ("asym_quad_bump", "sym_bump"):
        return ObjectiveSpec(kind=kind, delta=_get_float(cfg, "objective.delta"))
    if kind == "polynomial":
        raw = cfg.get("objective.coefficients")
        if not raw:
            raise ConfigError("polynomial objective needs 'objective.coefficients'")
        return ObjectiveSpec(kind=kind, coefficients=tuple(float(x) for x in raw.split(",")))
    raise ConfigError(f"objective.kind: unknown kind {kind!r}")


def _noise(cfg) -> NoiseModel:
    kind = cfg.get("noise.kind", "zero")
    if kind == "zero":
        return NoiseModel(kind="zero")
    if kind == "uniform":
        return NoiseModel(kind="uniform", r=_get_float(cfg, "noise.r"))
    if kind == "gaussian":
        return NoiseModel(kind="gaussian", s=_get_float(cfg, "noise.s"))
    if kind == "state_scaled":
        return NoiseModel(kind="state_scaled", r=_get_float(cfg, "noise.r"),
                          beta=_get_float(cfg, "noise.beta"))
    raise ConfigError(f"noise.kind: unknown kind {kind!r}")


def _eta(cfg) -> float:
    if "eta" in cfg and "run.eta" in cfg and cfg["eta"] != cfg["run.eta"]:
        raise ConfigError("'eta' and 'run.eta' disagree; set only one")
    if "eta" in cfg:
        return _get_float(cfg, "eta")
    return _get_float(cfg, "run.eta")


def resolve_experiment(cfg: dict[str, str], seed: int | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from raw config, with an optional seed override."""
    objective = _objective(cfg)
    noise = _noise(cfg)
    eta = _eta(cfg)
    run = RunConfig(
        eta=eta,
        T=_get_int(cfg, "run.T", 10_000),
        w0_kind=cfg.get("run.w0.kind", "uniform"),
        w0_a=_get_float(cfg, "run.w0.value", 0.0) if cfg.get("run.w0.kind") == "fixed"
        else _get_float(cfg, "run.w0.lo", -1.0),
        w0_b=_get_float(cfg, "run.w0.hi", 2.0),
        seed=seed if seed is not None else _get_int(cfg, "seed", 0),
        tail_fraction=_get_float(cfg, "run.tail_fraction", 0.5),
        record_stride=_get_int(cfg, "run.record_stride", 1),
        trials=_get_int(cfg, "run.trials", 1),
    )
    window = (_get_float(cfg, "window.lo", -2.0), _get_float(cfg, "window.hi", 4.0))
    trap = cfg.get("trap.halfwidth")
    etas = cfg.get("etas", "")
    return ExperimentConfig(
        objective=objective, noise=noise, run=run, window=window,
        trap_halfwidth=float(trap) if trap else None,
        preset_name=cfg.get("label"),
        etas=tuple(float(x) for x in etas.split(",") if x.strip()) if etas else (),
        quad_order_cap=_get_int(cfg, "quad.order_cap", 4096),
    )


def experiment_to_config(exp: ExperimentConfig) -> dict[str, str]:
    """Fully resolved key -> value map; parse + resolve is the identity."""
    cfg: dict[str, str] = {}
    if exp.preset_name:
        cfg["label"] = exp.preset_name
    obj = exp.objective
    cfg["objective.kind"] = obj.kind
    if obj.kind == "quadratic":
        cfg["objective.center"] = repr(obj.center)
    elif obj.kind in ("asym_quad_bump", "sym_bump"):
        cfg["objective.delta"] = repr(obj.delta)
    else:
        cfg["objective.coefficients"] = ",".join(repr(c) for c in obj.coefficients)
    cfg["noise.kind"] = exp.noise.kind
    if exp.noise.kind in ("uniform", "state_scaled"):
        cfg["noise.r"] = repr(exp.noise.r)
    if exp.noise.kind == "gaussian":
        cfg["noise.s"] = repr(exp.noise.s)
    if exp.noise.kind == "state_scaled":
        cfg["noise.beta"] = repr(exp.noise.beta)
    run = exp.run
    cfg["eta"] = repr(run.eta)
    cfg["run.T"] = str(run.T)
    cfg["run.w0.kind"] = run.w0_kind
    if run.w0_kind == "fixed":
        cfg["run.w0.value"] = repr(run.w0_a)
    else:
        cfg["run.w0.lo"] = repr(run.w0_a)
        cfg["run.w0.hi"] = repr(run.w0_b)
    cfg["run.tail_fraction"] = repr(run.tail_fraction)
    cfg["run.record_stride"] = str(run.record_stride)
    cfg["run.trials"] = str(run.trials)
    cfg["seed"] = str(run.seed)
    cfg["window.lo"] = repr(exp.window[0])
    cfg["window.hi"] = repr(exp.window[1])
    cfg["quad.order_cap"] = str(exp.quad_order_cap)
    if exp.trap_halfwidth is not None:
        cfg["trap.halfwidth"] = repr(exp.trap_halfwidth)
    if exp.etas:
        cfg["etas"] = ",".join(repr(e) for e in exp.etas)
    return cfg


def format_config(cfg: dict[str, str]) -> str:
    return "\n".join(f"{k} = {v}" for k, v in sorted(cfg.items()))


def with_seed(exp: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(exp, run=replace(exp.run, seed=seed))

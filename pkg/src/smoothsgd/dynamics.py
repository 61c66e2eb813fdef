"""SGD trajectories, the gradient-descent-shifted view, and tail averaging.

For each trial the iteration is

    v_t     = w_t - eta * f'(w_t)
    w_{t+1} = v_t - eta * eps_{t+1}(w_t)

with v living on the noise-smoothed objective.  The trial loop streams:
the tail means of w and v, the mean noise over the tail window (the exact
difference between those two tails, divided by -eta), the running sum of
(v_t - vstar)^2 for t = 0..T, the full-trajectory mean of v, and the sum of
f'(w_t)^2 for t = 1..T that the stationarity inequality bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .noise import NoiseModel, Stream, trial_seed
from .objectives import ObjectiveSpec, evaluate
from .smoothing import SmoothedView, initial_moments, phi_inverse

__all__ = [
    "RunConfig",
    "Trajectory",
    "DivergenceError",
    "run_sgd",
    "run_trials",
    "tail_average",
    "implicit_identity_check",
    "stationarity_sum_check",
]


class DivergenceError(RuntimeError):
    def __init__(self, step):
        super().__init__(f"iterate left [-1e6, 1e6] at step {step}")
        self.step = step


@dataclass(frozen=True)
class RunConfig:
    """One trial's step size, horizon, initialization, and bookkeeping."""

    eta: float
    T: int
    w0_kind: str = "uniform"           # "fixed" or "uniform"
    w0_a: float = -1.0                 # fixed value, or interval low end
    w0_b: float = 2.0                  # interval high end
    seed: int = 0
    tail_fraction: float = 0.5
    record_stride: int = 1
    trials: int = 1

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not (0.0 < self.tail_fraction <= 1.0):
            raise ValueError("tail_fraction must lie in (0, 1]")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.w0_kind not in ("fixed", "uniform"):
            raise ValueError("w0_kind must be 'fixed' or 'uniform'")

    @property
    def tail_start(self) -> int:
        """First window index t0: the tail covers w_{t0+1}..w_T and v_{t0}..v_{T-1}."""
        t0 = self.T - max(1, int(round(self.T * self.tail_fraction)))
        return min(max(t0, 0), self.T - 1)


@dataclass
class Trajectory:
    """Per-trial outputs; sums are Kahan-compensated inside the kernels."""

    final_w: float
    tail_avg_w: float
    tail_avg_v: float
    noise_tail_mean: float
    sum_sq_dist_v: float
    mean_v_full: float
    sum_sq_pert_grad: float
    steps: int
    diverged: bool = False
    diverge_step: int = -1
    decimated_w: np.ndarray | None = None
    record_stride: int = 1


_OBJ_CODES = {"quadratic": _kernels.OBJ_QUADRATIC, "asym_quad_bump": _kernels.OBJ_ASYM_BUMP,
              "sym_bump": _kernels.OBJ_SYM_BUMP, "polynomial": _kernels.OBJ_POLY}


def _kernel_params(spec: ObjectiveSpec):
    code = _OBJ_CODES[spec.kind]
    if spec.kind == "quadratic":
        return code, spec.center, np.zeros(0)
    if spec.kind in ("asym_quad_bump", "sym_bump"):
        return code, spec.delta, np.zeros(0)
    c = np.asarray(spec.coefficients, dtype=float)
    gcoeffs = c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(1)
    return code, 0.0, gcoeffs


def run_trials(spec: ObjectiveSpec, noise: NoiseModel, cfg: RunConfig,
               vstar: float = 0.0, record: bool = False):
    """All trials of a run through the active kernel backend.

    Returns (list of Trajectory, seeds array).  Trial i runs on the
    substream trial_seed(cfg.seed, i); outputs are deterministic in
    (seed, trials) regardless of scheduling.
    """
    code, a, gcoeffs = _kernel_params(spec)
    seeds = np.array([trial_seed(cfg.seed, i) for i in range(cfg.trials)], dtype=np.uint64)
    w0_kind = _kernels.W0_FIXED if cfg.w0_kind == "fixed" else _kernels.W0_UNIFORM
    out, dec = _kernels.run_ensemble_kernel(
        code, a, gcoeffs, noise.kind_code, noise.r, noise.s, noise.beta,
        cfg.eta, cfg.T, w0_kind, cfg.w0_a, cfg.w0_b, seeds, vstar,
        cfg.tail_start, stride=cfg.record_stride, record=record)
    K = _kernels
    trajs = []
    for i in range(cfg.trials):
        trajs.append(Trajectory(
            final_w=float(out[i, K.COL_FINAL_W]),
            tail_avg_w=float(out[i, K.COL_TAIL_W]),
            tail_avg_v=float(out[i, K.COL_TAIL_V]),
            noise_tail_mean=float(out[i, K.COL_TAIL_EPS]),
            sum_sq_dist_v=float(out[i, K.COL_SS_DIST_V]),
            mean_v_full=float(out[i, K.COL_SUM_V]) / (cfg.T + 1),
            sum_sq_pert_grad=float(out[i, K.COL_SS_PERT_GRAD]),
            steps=cfg.T,
            diverged=bool(out[i, K.COL_DIVERGED]),
            diverge_step=int(out[i, K.COL_DIVERGE_STEP]),
            decimated_w=None if dec is None else dec[i].copy(),
            record_stride=cfg.record_stride,
        ))
    return trajs, seeds


def run_sgd(spec: ObjectiveSpec, noise: NoiseModel, cfg: RunConfig,
            vstar: float | None = None, record: bool = False) -> Trajectory:
    """Single-trial run; raises DivergenceError if the iterate blows up."""
    one = replace(cfg, trials=1)
    trajs, _ = run_trials(spec, noise, one, 0.0 if vstar is None else vstar, record=record)
    traj = trajs[0]
    if traj.diverged:
        raise DivergenceError(traj.diverge_step)
    return traj


def tail_average(values, t0: int) -> float:
    """Compensated mean of values[t0+1 .. end] (indices into the w sequence)."""
    n = len(values)
    if not t0 < n - 1:
        raise ValueError("t0 must leave a nonempty tail")
    s = c = 0.0
    for x in values[t0 + 1:]:
        y = x - c
        t = s + y
        c = (t - s) - y
        s = t
    return s / (n - 1 - t0)


def implicit_identity_check(spec: ObjectiveSpec, noise: NoiseModel, cfg: RunConfig,
                            view: SmoothedView | None = None) -> float:
    """Max gap between the shifted explicit iterates and the v-space recursion.

    Runs w_{t+1} = w_t - eta (f'(w_t) + eps) and independently
    v_{t+1} = v_t - eta eps'(v_t) - eta f'(v_t - eta eps'(v_t)) on the same
    draw sequence, with eps'(v) re-read through the inverse coordinate change
    when the noise law is state dependent.  Returns max_t |phi(w_t) - v_t|.
    """
    if noise.kind == "state_scaled" and view is None:
        raise ValueError("state-scaled noise needs a SmoothedView for the inverse map")
    eta = cfg.eta
    stream = Stream(trial_seed(cfg.seed, 0))
    u0 = stream.next_unit()
    if cfg.w0_kind == "uniform":
        w = cfg.w0_a + (cfg.w0_b - cfg.w0_a) * u0
    else:
        w = cfg.w0_a
    v = w - eta * evaluate(spec, w)[1]
    defect = 0.0
    for _ in range(cfg.T):
        u = stream.next_unit()
        if noise.kind == "zero":
            xi = 0.0
        elif noise.kind == "uniform":
            xi = (2.0 * u - 1.0) * noise.r
        elif noise.kind == "gaussian":
            from .noise import normal_icdf
            xi = normal_icdf(u + 2.0 ** -54) * noise.s
        else:
            xi = (2.0 * u - 1.0) * noise.r
        if noise.kind == "state_scaled":
            eps_w = (1.0 + noise.beta * math.sin(w)) * xi
            eps_v = (1.0 + noise.beta * math.sin(phi_inverse(view, v))) * xi
        else:
            eps_w = eps_v = xi
        # explicit track
        g = evaluate(spec, w)[1]
        w = (w - eta * g) - eta * eps_w
        # implicit track
        inner = v - eta * eps_v
        v = inner - eta * evaluate(spec, inner)[1]
        phi_w = w - eta * evaluate(spec, w)[1]
        defect = max(defect, abs(phi_w - v))
    return defect


def stationarity_sum_check(spec: ObjectiveSpec, noise: NoiseModel, cfg: RunConfig,
                           L: float, sigma1_sq: float,
                           view: SmoothedView | None = None) -> tuple[float, float, float]:
    """Ensemble check of the descent-lemma bound on summed gradient norms.

    lhs  = ensemble mean of sum_{t=1}^{T} f'(w_t)^2
    rhs  = (4 / (3 eta)) E f(w0) + (2/3) eta sigma1_sq L (T + 1)

    Returns (lhs, rhs, stderr of lhs).  The rhs indexing matches a run of T
    steps: the summed gradients sit at the perturbed points w_1 .. w_T.
    """
    trajs, _ = run_trials(spec, noise, cfg, 0.0)
    sums = np.array([t.sum_sq_pert_grad for t in trajs if not t.diverged])
    if sums.size == 0:
        raise DivergenceError(-1)
    lhs = float(sums.mean())
    se = float(sums.std(ddof=1) / math.sqrt(sums.size)) if sums.size > 1 else 0.0
    if view is None:
        view = SmoothedView(spec, noise, cfg.eta)
    f0 = initial_moments(view, cfg.w0_kind, cfg.w0_a, cfg.w0_b, 0.0)[0]
    rhs = (4.0 / (3.0 * cfg.eta)) * f0 + (2.0 / 3.0) * cfg.eta * sigma1_sq * L * (cfg.T + 1)
    return lhs, rhs, se

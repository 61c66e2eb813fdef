"""Gradient-noise laws with seeded, bit-reproducible sampling.

Randomness comes from a splitmix64 counter generator: state advances by a
fixed odd constant and each output is the Stafford mix13 finalizer of the
state.  Everything is plain 64-bit integer arithmetic followed by exact
IEEE-754 double scaling, so a (seed, position) pair maps to the same double
on every platform, in the scalar sampler, the numpy batch sampler, and the
compiled trial kernels alike.

Trial substreams are derived from (base_seed, trial_index) by

    state0 = mix13(mix13(base_seed) XOR ((index + 1) * 0xD1B54A32D192ED03))

which scatters substream states across the full 2^64 state space, so
distinct trials never run on overlapping counter ranges in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseModel",
    "MomentBounds",
    "Stream",
    "zero_noise",
    "uniform_noise",
    "gaussian_noise",
    "state_scaled_noise",
    "moment_bounds",
    "sample",
    "sample_batch",
    "trial_seed",
    "normal_icdf",
]

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_SALT = 0xD1B54A32D192ED03

KIND_ZERO = 0
KIND_UNIFORM = 1
KIND_GAUSSIAN = 2
KIND_STATE_SCALED = 3

_KIND_CODES = {
    "zero": KIND_ZERO,
    "uniform": KIND_UNIFORM,
    "gaussian": KIND_GAUSSIAN,
    "state_scaled": KIND_STATE_SCALED,
}


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean gradient-noise law.

    kinds:
      zero                exactly 0 at every state
      uniform(r)          U[-r, r], independent of the state
      gaussian(s)         N(0, s^2), independent of the state
      state_scaled(r, b)  (1 + b sin w) * U[-r, r]; the only catalog member
                          whose law depends on the iterate, giving a nonzero
                          Jacobian bound so the biased-gradient machinery is
                          exercised nontrivially
    """

    kind: str
    r: float = 0.0
    s: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown noise kind: {self.kind!r}")
        if self.kind in ("uniform", "state_scaled") and not self.r > 0:
            raise ValueError("uniform noise requires r > 0")
        if self.kind == "gaussian" and not self.s > 0:
            raise ValueError("gaussian noise requires s > 0")
        if self.kind == "state_scaled" and not (0.0 <= self.beta < 1.0):
            raise ValueError("state_scaled noise requires 0 <= beta < 1")

    @property
    def kind_code(self) -> int:
        return _KIND_CODES[self.kind]


def zero_noise() -> NoiseModel:
    return NoiseModel(kind="zero")


def uniform_noise(r: float) -> NoiseModel:
    return NoiseModel(kind="uniform", r=float(r))


def gaussian_noise(s: float) -> NoiseModel:
    return NoiseModel(kind="gaussian", s=float(s))


def state_scaled_noise(r: float, beta: float) -> NoiseModel:
    return NoiseModel(kind="state_scaled", r=float(r), beta=float(beta))


@dataclass(frozen=True)
class MomentBounds:
    """Second-moment bound, Jacobian bound, and the exact variance.

    sigma1_sq and sigma2 are the loose analytic bounds the convergence
    theorems consume (E[eps^2] <= sigma1_sq, |d eps/d w| <= sigma2), while
    exact_variance carries the true E[eps^2] needed by quadrature and the
    curvature-penalty expansion.
    """

    sigma1_sq: float
    sigma2: float
    exact_variance: float


def moment_bounds(model: NoiseModel, at_w: float = 0.0) -> MomentBounds:
    """Moment bounds for a noise law; at_w matters only for state_scaled."""
    if model.kind == "zero":
        return MomentBounds(0.0, 0.0, 0.0)
    if model.kind == "uniform":
        return MomentBounds(model.r ** 2, 0.0, model.r ** 2 / 3.0)
    if model.kind == "gaussian":
        return MomentBounds(model.s ** 2, 0.0, model.s ** 2)
    scale = 1.0 + model.beta * math.sin(at_w)
    return MomentBounds(
        sigma1_sq=(1.0 + model.beta) ** 2 * model.r ** 2,
        sigma2=model.beta * model.r,
        exact_variance=scale * scale * model.r ** 2 / 3.0,
    )


# ---------------------------------------------------------------------------
# splitmix64 counter RNG
# ---------------------------------------------------------------------------

def mix13(z: int) -> int:
    """Stafford mix13 finalizer (the splitmix64 output function)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def trial_seed(base_seed: int, index: int) -> int:
    """Substream state for trial `index` under `base_seed` (documented mix)."""
    return mix13(mix13(base_seed) ^ ((index + 1) * STREAM_SALT & MASK64))


@dataclass
class Stream:
    """Owned RNG state; one stream per trial, never shared."""

    state: int

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix13(self.state)

    def next_unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53


def normal_icdf(p: float) -> float:
    """Inverse standard-normal CDF (Wichura's double-precision algorithm).

    Pure rational-polynomial arithmetic plus one log and one sqrt; accurate
    to ~1e-16 relative on (0, 1).
    """
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


def _unit_from_u64(k: int) -> float:
    return (k >> 11) * 2.0 ** -53


def sample(model: NoiseModel, w: float, stream: Stream) -> float:
    """One noise draw at state w; advances the stream once for every kind.

    Advancing unconditionally keeps (seed, position) -> u64 fixed across
    kinds, so e.g. a state_scaled draw is exactly (1 + beta sin w) times the
    uniform draw the beta = 0 model would have produced.
    """
    k = stream.next_u64()
    if model.kind == "zero":
        return 0.0
    if model.kind == "uniform":
        return (2.0 * _unit_from_u64(k) - 1.0) * model.r
    if model.kind == "gaussian":
        # the 2^-54 shift maps [0,1) onto (0,1) so the quantile is finite
        return normal_icdf(_unit_from_u64(k) + 2.0 ** -54) * model.s
    xi = (2.0 * _unit_from_u64(k) - 1.0) * model.r
    return (1.0 + model.beta * math.sin(w)) * xi


def sample_batch(model: NoiseModel, w: float, seed: int, n: int) -> np.ndarray:
    """n consecutive draws from the stream starting at state `seed`.

    Vectorized replay of `sample`; bit-identical to n scalar calls.
    """
    counters = np.uint64(seed) + (np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GOLDEN))
    k = _mix13_np(counters)
    if model.kind == "zero":
        return np.zeros(n)
    unit = (k >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    if model.kind == "uniform":
        return (2.0 * unit - 1.0) * model.r
    if model.kind == "gaussian":
        return normal_icdf_np(unit + 2.0 ** -54) * model.s
    xi = (2.0 * unit - 1.0) * model.r
    return (1.0 + model.beta * math.sin(w)) * xi


def _mix13_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def normal_icdf_np(p: np.ndarray) -> np.ndarray:
    """Vectorized normal_icdf, same arithmetic per element."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    q = p - 0.5
    central = np.abs(q) <= 0.425
    if np.any(central):
        qc = q[central]
        r = 0.180625 - qc * qc
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        out[central] = qc * num / den
    tail = ~central
    if np.any(tail):
        qt = q[tail]
        pt = p[tail]
        r = np.where(qt < 0.0, pt, 1.0 - pt)
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.empty_like(r)
        if np.any(near):
            rn = r[near] - 1.6
            num = (((((((7.74545014278341407640e-4 * rn + 2.27238449892691845833e-2) * rn
                        + 2.41780725177450611770e-1) * rn + 1.27045825245236838258e0) * rn
                      + 3.64784832476320460504e0) * rn + 5.76949722146069140550e0) * rn
                    + 4.63033784615654529590e0) * rn + 1.42343711074968357734e0)
            den = (((((((1.05075007164441684324e-9 * rn + 5.47593808499534494600e-4) * rn
                        + 1.51986665636164571966e-2) * rn + 1.48103976427480074590e-1) * rn
                      + 6.89767334985100004550e-1) * rn + 1.67638483018380384940e0) * rn
                    + 2.05319162663775882187e0) * rn + 1.0)
            val[near] = num / den
        far = ~near
        if np.any(far):
            rf = r[far] - 5.0
            num = (((((((2.01033439929228813265e-7 * rf + 2.71155556874348757815e-5) * rf
                        + 1.24266094738807843860e-3) * rf + 2.65321895265761230930e-2) * rf
                      + 2.96560571828504891230e-1) * rf + 1.78482653991729133580e0) * rf
                    + 5.46378491116411436990e0) * rf + 6.65790464350110377720e0)
            den = (((((((2.04426310338993978564e-15 * rf + 1.42151175831644588870e-7) * rf
                        + 1.84631831751005468180e-5) * rf + 7.86869131145613259100e-4) * rf
                      + 1.48753612908506148525e-2) * rf + 1.36929880922735805310e-1) * rf
                    + 5.99832206555887937690e-1) * rf + 1.0)
            val[far] = num / den
        out[tail] = np.where(qt < 0.0, -val, val)
    return out

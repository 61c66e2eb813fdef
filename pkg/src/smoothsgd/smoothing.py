"""Quadrature view of the noise-smoothed objective.

For a step size eta and gradient noise eps, the smoothed objective is

    F(v) = E[ f(v - eta * eps'(v)) ],

where eps'(v) is the noise read through the gradient-descent change of
variables w -> v = w - eta f'(w).  For state-independent noise eps' = eps and
F, F', F'' are plain convolutions evaluated here by Gauss-Legendre (compact
noise) or Gauss-Hermite (gaussian noise) quadrature with order doubling until
successive values settle.  For the state-scaled law the integrand needs the
inverse change of variables, computed by a safeguarded Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseModel, moment_bounds
from .objectives import ObjectiveSpec, curvature_range, evaluate, evaluate_arrays, lipschitz_bound

__all__ = [
    "SmoothedView",
    "QuadratureError",
    "RegimeError",
    "smoothed_eval",
    "smoothed_eval_grid",
    "minimize_smoothed",
    "taylor_penalty_residual",
    "phi_forward",
    "phi_inverse",
    "phi_derivative",
    "bias_gap",
    "mc_smoothed_value",
    "initial_moments",
]

QUAD_START_ORDER = 32
QUAD_TOL = 1e-12
# numpy's Gauss-Hermite node solver overflows above this order
GH_MAX_ORDER = 256


class QuadratureError(RuntimeError):
    """Order doubling hit the cap without settling; carries both estimates."""

    def __init__(self, last, previous, cap):
        super().__init__(
            f"quadrature did not settle at order cap {cap}: last={last!r} previous={previous!r}"
        )
        self.last = last
        self.previous = previous


class RegimeError(ValueError):
    """Step size too large for the requested change-of-variables operation."""


_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_gh_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _gl_cache:
        x, w = np.polynomial.legendre.leggauss(order)
        _gl_cache[order] = (x, w)
    return _gl_cache[order]


def _gh_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _gh_cache:
        x, w = np.polynomial.hermite.hermgauss(order)
        _gh_cache[order] = (x, w / math.sqrt(math.pi))
    return _gh_cache[order]


@dataclass
class SmoothedView:
    """Objective + noise + step size, with cached minimizer and L bound.

    The minimizer cache is single-assignment: once found it never changes,
    so concurrent readers are safe after construction.
    """

    objective: ObjectiveSpec
    noise: NoiseModel
    eta: float
    quad_order_cap: int = 4096
    window: tuple[float, float] = (-2.0, 4.0)
    vstar: float | None = None
    L: float = field(init=False)
    minima_found: int = field(default=0, init=False)
    _fpp_max: float | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        self.L = lipschitz_bound(self.objective, self.window)

    @property
    def fpp_max(self) -> float:
        if self._fpp_max is None:
            self._fpp_max = curvature_range(self.objective, self.window)[1]
        return self._fpp_max


def _noise_nodes(view: SmoothedView, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes in noise space and weights summing to 1."""
    noise = view.noise
    if noise.kind == "gaussian":
        x, w = _gh_nodes(min(order, GH_MAX_ORDER))
        return x * (math.sqrt(2.0) * noise.s), w
    x, w = _gl_nodes(order)
    return x * noise.r, w * 0.5


def _phi_regime_guard(view: SmoothedView) -> None:
    """The w -> v map is a strictly increasing bijection iff eta * sup f'' < 1.

    eta <= 1/(2L) is the guaranteed regime; the sharp one-sided condition is
    accepted too so the catalog's large-step examples stay usable.
    """
    if view.eta <= 0.5 / view.L:
        return
    fpp_max = view.fpp_max
    if fpp_max > 0 and view.eta * fpp_max >= 1.0:
        raise RegimeError(
            f"eta={view.eta} leaves w - eta*f'(w) non-invertible (sup f''={fpp_max:.6g})"
        )


def phi_forward(view: SmoothedView, w: float) -> float:
    """v = w - eta f'(w)."""
    _phi_regime_guard(view)
    return w - view.eta * evaluate(view.objective, w)[1]


def phi_derivative(view: SmoothedView, w: float) -> float:
    """d/dw of the change of variables: 1 - eta f''(w)."""
    return 1.0 - view.eta * evaluate(view.objective, w)[2]


def phi_inverse(view: SmoothedView, v: float, tol: float = 1e-12, max_iter: int = 100) -> float:
    """Unique w with w - eta f'(w) = v, by safeguarded Newton from w = v."""
    _phi_regime_guard(view)
    eta = view.eta
    obj = view.objective

    def phi_and_slope(w):
        _, fp, fpp = evaluate(obj, w)
        return w - eta * fp - v, 1.0 - eta * fpp

    # bracket by doubling: phi is strictly increasing
    half = max(1.0, abs(v)) * 0.5
    lo, hi = v - half, v + half
    flo, _ = phi_and_slope(lo)
    fhi, _ = phi_and_slope(hi)
    grow = 0
    while flo > 0.0 or fhi < 0.0:
        half *= 2.0
        lo, hi = v - half, v + half
        flo, _ = phi_and_slope(lo)
        fhi, _ = phi_and_slope(hi)
        grow += 1
        if grow > 60:
            raise RegimeError("could not bracket the inverse change of variables")

    w = v
    fw, slope = phi_and_slope(w)
    for _ in range(max_iter):
        if abs(fw) <= tol:
            return w
        if fw < 0.0:
            lo = w
        else:
            hi = w
        if slope > 0.0:
            step = fw / slope
            cand = w - step
        else:
            cand = math.nan
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        w = cand
        fw, slope = phi_and_slope(w)
    raise RegimeError(f"inverse iteration did not converge at v={v} (eta={eta})")


def _scale_and_slope(view: SmoothedView, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """State-scaled noise amplitude s(v) = 1 + beta sin(w(v)) and ds/dv."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    beta = view.noise.beta
    s = np.empty_like(v)
    sp = np.empty_like(v)
    for i, vi in enumerate(v):
        w = phi_inverse(view, float(vi))
        slope = phi_derivative(view, w)
        s[i] = 1.0 + beta * math.sin(w)
        sp[i] = beta * math.cos(w) / slope
    return s, sp


def _grid_fFgh_at_order(view: SmoothedView, v: np.ndarray, order: int):
    """(F, F', F'') on the grid v at a fixed quadrature order."""
    nodes, weights = _noise_nodes(view, order)
    eta = view.eta
    if view.noise.kind == "state_scaled":
        s, sp = _scale_and_slope(view, v)
        args = v[:, None] - (eta * s)[:, None] * nodes[None, :]
        fv, fg, _ = evaluate_arrays(view.objective, args)
        F = fv @ weights
        jac = 1.0 - (eta * sp)[:, None] * nodes[None, :]
        Fg = (jac * fg) @ weights
        return F, Fg, None
    args = v[:, None] - eta * nodes[None, :]
    fv, fg, fh = evaluate_arrays(view.objective, args)
    return fv @ weights, fg @ weights, fh @ weights


def _poly_convolution(coeffs: np.ndarray, eta: float, even_moments) -> np.ndarray:
    """Exact coefficients of E p(v - eta*eps) for symmetric eps.

    even_moments(j) must return E[eps^j] for even j; odd moments vanish and
    the even powers make the sign of eta irrelevant.
    """
    deg = len(coeffs) - 1
    out = np.zeros(deg + 1)
    for k in range(deg + 1):
        for j in range(0, k + 1, 2):
            out[k - j] += coeffs[k] * math.comb(k, j) * eta ** j * even_moments(j)
    return out


def _box_bump_split(spec):
    """Quadratic part (a, b, c of a w^2/2-form) and bump part of a catalog member.

    Returns (q0, q1, half_q2, bump_amp, delta) describing
    f(w) = q0 + q1 w + half_q2 w^2 + bump_amp * bump(w / delta); bump_amp 0
    means no bump term.
    """
    if spec.kind == "quadratic":
        c = spec.center
        return 0.5 * c * c, -c, 0.5, 0.0, 1.0
    if spec.kind == "asym_quad_bump":
        return 0.5, -1.0, 0.5, -spec.delta, spec.delta
    if spec.kind == "sym_bump":
        return 0.0, 0.0, 0.5, spec.delta ** 2, spec.delta
    raise ValueError(spec.kind)


def _bump_parts(spec, u: np.ndarray):
    """(g, g', .) of the compactly supported part of a catalog member."""
    from .objectives import _bump012_arrays

    b, b1, _ = _bump012_arrays(u / spec.delta)
    if spec.kind == "asym_quad_bump":
        # g(w) = -delta * bump(w/delta)
        return -spec.delta * b, -b1
    # g(w) = delta^2 * bump(w/delta)
    return spec.delta ** 2 * b, spec.delta * b1


def _grid_uniform_box(view: SmoothedView, v: np.ndarray):
    """(F, F', F'') under uniform noise via the box-kernel structure.

    Convolving with a box kernel is an antiderivative difference, so the
    derivatives of F are exact endpoint evaluations:

        F'(v)  = q'(v) + [g(v + eta r) - g(v - eta r)] / (2 eta r)
        F''(v) = q''   + [g'(v + eta r) - g'(v - eta r)] / (2 eta r)

    for f = q + g with q quadratic and g the compact bump.  Only the bump's
    contribution to F itself needs nodes, integrated over the overlap of its
    support with [v - eta r, v + eta r] under the usual order doubling.
    Polynomial objectives convolve in closed form via exact even moments.
    """
    eta, r = view.eta, view.noise.r
    er = eta * r
    if view.objective.kind == "polynomial":
        c = np.asarray(view.objective.coefficients, dtype=float)
        conv = _poly_convolution(c, eta, lambda j: r ** j / (j + 1.0))
        poly = np.polynomial.polynomial
        return (poly.polyval(v, conv), poly.polyval(v, poly.polyder(conv)),
                np.broadcast_to(poly.polyval(v, poly.polyder(conv, 2)), v.shape))

    q0, q1, half_q2, amp, delta = _box_bump_split(view.objective)
    var = r * r / 3.0
    F = q0 + q1 * v + half_q2 * v * v + half_q2 * (eta * eta * var)
    Fgrad = q1 + 2.0 * half_q2 * v
    Fhess = np.full_like(v, 2.0 * half_q2)
    if amp == 0.0:
        return F, Fgrad, Fhess

    g_hi, g1_hi = _bump_parts(view.objective, v + er)
    g_lo, g1_lo = _bump_parts(view.objective, v - er)
    Fgrad = Fgrad + (g_hi - g_lo) / (2.0 * er)
    Fhess = Fhess + (g1_hi - g1_lo) / (2.0 * er)

    lo = np.maximum(v - er, -delta)
    hi = np.minimum(v + er, delta)
    overlap = np.flatnonzero(hi > lo)
    if overlap.size:
        mid = 0.5 * (lo[overlap] + hi[overlap])
        half = 0.5 * (hi[overlap] - lo[overlap])

        def bump_integral(order):
            x, wts = _gl_nodes(order)
            vals = _bump_parts(view.objective, mid[:, None] + half[:, None] * x[None, :])[0]
            return (vals @ wts) * half

        order = min(QUAD_START_ORDER, view.quad_order_cap)
        prev = bump_integral(order)
        settled = False
        while order < view.quad_order_cap:
            order *= 2
            cur = bump_integral(order)
            tol = max(QUAD_TOL, 4.0 * order * np.finfo(float).eps)
            if float(np.max(np.abs(cur - prev))) < tol * max(1.0, float(np.max(np.abs(cur)))):
                prev = cur
                settled = True
                break
            prev = cur
        if not settled:
            raise QuadratureError(prev, None, view.quad_order_cap)
        F[overlap] += prev / (2.0 * er)
    return F, Fgrad, Fhess


def smoothed_eval_grid(view: SmoothedView, v: np.ndarray):
    """(F, F', F'') on an array of points with adaptive order doubling.

    Doubles the order from 32 until the sup-norm change of all returned
    quantities drops below 1e-12 (relative to max(1, value)); raises
    QuadratureError at the cap.  Zero noise returns f directly.
    """
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    if view.noise.kind == "zero":
        f, g, h = evaluate_arrays(view.objective, v)
        return (f[0], g[0], h[0]) if scalar else (f, g, h)
    if view.noise.kind == "uniform":
        F, Fg, Fh = _grid_uniform_box(view, v)
        return (F[0], Fg[0], Fh[0]) if scalar else (F, Fg, Fh)

    cap = view.quad_order_cap
    if view.noise.kind == "gaussian":
        cap = min(cap, GH_MAX_ORDER)
    order = min(QUAD_START_ORDER, cap)
    prev = _grid_fFgh_at_order(view, v, order)
    older = None
    settled = False
    while order < cap:
        order *= 2
        cur = _grid_fFgh_at_order(view, v, order)
        # agreement between orders cannot be demanded below the roundoff of
        # an order-term dot product, so the tolerance carries that floor
        tol = max(QUAD_TOL, 4.0 * order * np.finfo(float).eps)
        settled = True
        for a, b in zip(prev, cur):
            if a is None:
                continue
            scale = max(1.0, float(np.max(np.abs(b))))
            if float(np.max(np.abs(a - b))) >= tol * scale:
                settled = False
        prev, older = cur, prev
        if settled:
            break
    if not settled:
        raise QuadratureError(prev, older, view.quad_order_cap)

    F, Fg, Fh = prev
    if Fh is None:
        # state-scaled second derivative via central differences of F'
        h = 1e-6
        _, gp, _ = _grid_fFgh_at_order(view, v + h, order)
        _, gm, _ = _grid_fFgh_at_order(view, v - h, order)
        Fh = (gp - gm) / (2.0 * h)
    return (F[0], Fg[0], Fh[0]) if scalar else (F, Fg, Fh)


def smoothed_eval(view: SmoothedView, v: float) -> tuple[float, float, float]:
    """F(v), F'(v), F''(v) at a single point."""
    F, Fg, Fh = smoothed_eval_grid(view, np.float64(v))
    return float(F), float(Fg), float(Fh)


def minimize_smoothed(view: SmoothedView, window: tuple[float, float] | None = None,
                      grid_n: int = 10_000) -> float:
    """Global minimizer of F over the window; cached on the view.

    Sign changes of F' are bracketed on a uniform grid, bisected to 1e-10,
    Newton-polished to 1e-12, and the candidate with the lowest F wins (ties
    break toward smaller v).  The count of local minima found is recorded so
    reports can flag multi-minimum landscapes.
    """
    if window is None:
        window = view.window
    if view.vstar is not None:
        return view.vstar
    lo, hi = window
    grid = np.linspace(lo, hi, grid_n)
    _, Fg, _ = smoothed_eval_grid(view, grid)
    sign = np.sign(Fg)
    candidates = []
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        a, b = float(grid[i]), float(grid[i + 1])
        ga = float(Fg[i])
        for _ in range(200):
            if b - a < 1e-10:
                break
            mid = 0.5 * (a + b)
            gm = smoothed_eval(view, mid)[1]
            if gm == 0.0:
                a = b = mid
                break
            if (ga < 0.0) == (gm < 0.0):
                a, ga = mid, gm
            else:
                b = mid
        x = 0.5 * (a + b)
        for _ in range(100):
            _, g, h = smoothed_eval(view, x)
            if h <= 0.0 or abs(g) <= 1e-12:
                break
            step = g / h
            if not math.isfinite(step):
                break
            x -= step
            if abs(step) <= 1e-12:
                break
        _, g, h = smoothed_eval(view, x)
        if h > 0.0:
            candidates.append(x)
    for i in np.flatnonzero(Fg == 0.0):
        x = float(grid[i])
        if all(abs(x - c) > 1e-9 for c in candidates):
            _, _, h = smoothed_eval(view, x)
            if h > 0.0:
                candidates.append(x)
    if not candidates:
        raise ValueError(f"no stationary minimum of F in window {window}")
    values = [smoothed_eval(view, c)[0] for c in candidates]
    best = min(range(len(candidates)), key=lambda i: (values[i], candidates[i]))
    view.minima_found = len(candidates)
    view.vstar = float(candidates[best])
    return view.vstar


def taylor_penalty_residual(view: SmoothedView, v: float) -> tuple[float, float]:
    """Quality of the curvature-penalty approximation of F.

    approx = f(v) + (eta^2 / 2) f''(v) E[eps^2] with the exact noise variance;
    the residual |F(v) - approx| is third order in eta for symmetric noise.
    """
    if view.noise.kind == "state_scaled":
        raise ValueError("penalty residual is defined for state-independent noise")
    f, _, fpp = evaluate(view.objective, v)
    var = moment_bounds(view.noise).exact_variance
    approx = f + 0.5 * view.eta ** 2 * fpp * var
    F = smoothed_eval(view, v)[0]
    return approx, abs(F - approx)


def bias_gap(view: SmoothedView, v: float) -> tuple[float, float]:
    """Gap between F'(v) and the frozen-noise gradient mean, with its bound.

    gap = |F'(v) - E[f'(v - eta eps'(v))]| where the expectation does not
    differentiate through the noise; the bound is
    2 eta sigma2 sqrt(E[f'(v - eta eps'(v))^2]).  State-independent noise has
    sigma2 = 0 and a zero gap.
    """
    eta = view.eta
    mb = moment_bounds(view.noise)
    if view.noise.kind == "zero":
        return 0.0, 0.0

    def at_order(order):
        nodes, weights = _noise_nodes(view, order)
        if view.noise.kind == "state_scaled":
            s, sp = _scale_and_slope(view, np.atleast_1d(np.float64(v)))
            args = v - eta * s[0] * nodes
            _, fg, _ = evaluate_arrays(view.objective, args)
            Fg = float(((1.0 - eta * sp[0] * nodes) * fg) @ weights)
            frozen = float(fg @ weights)
        else:
            args = v - eta * nodes
            _, fg, _ = evaluate_arrays(view.objective, args)
            Fg = float(fg @ weights)
            frozen = Fg
        return Fg, frozen, float((fg * fg) @ weights)

    cap = view.quad_order_cap
    if view.noise.kind == "gaussian":
        cap = min(cap, GH_MAX_ORDER)
    order = min(QUAD_START_ORDER, cap)
    prev = at_order(order)
    settled = False
    while order < cap:
        order *= 2
        cur = at_order(order)
        if max(abs(a - b) for a, b in zip(prev, cur)) < QUAD_TOL:
            prev = cur
            settled = True
            break
        prev = cur
    if not settled:
        raise QuadratureError(prev, None, view.quad_order_cap)
    Fg, frozen, second = prev
    gap = abs(Fg - frozen)
    bound = 2.0 * eta * mb.sigma2 * math.sqrt(max(second, 0.0))
    return gap, bound


def mc_smoothed_value(view: SmoothedView, v: float, n: int = 10_000_000,
                      seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo cross-check of F(v): (estimate, standard error)."""
    from .noise import sample_batch, trial_seed

    eps = sample_batch(view.noise, phi_inverse(view, v) if view.noise.kind == "state_scaled" else v,
                       trial_seed(seed, 0), n)
    vals = evaluate_arrays(view.objective, v - view.eta * eps)[0]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


def initial_moments(view: SmoothedView, w0_kind: str, a: float, b: float,
                    vstar: float) -> tuple[float, float]:
    """(E f(w0), E (phi(w0) - vstar)^2) under the initialization law.

    Fixed law: both moments are point evaluations.  Uniform law:
    Gauss-Legendre over [a, b] with the usual order doubling.
    """
    eta = view.eta
    if w0_kind == "fixed":
        f, fp, _ = evaluate(view.objective, a)
        return f, (a - eta * fp - vstar) ** 2

    def moments(order):
        x, w = _gl_nodes(order)
        pts = 0.5 * (a + b) + 0.5 * (b - a) * x
        f, fp, _ = evaluate_arrays(view.objective, pts)
        d = pts - eta * fp - vstar
        return float(f @ w) * 0.5, float((d * d) @ w) * 0.5

    order = min(QUAD_START_ORDER, view.quad_order_cap)
    prev = moments(order)
    while order < view.quad_order_cap:
        order *= 2
        cur = moments(order)
        if max(abs(x - y) for x, y in zip(prev, cur)) < QUAD_TOL * max(1.0, *map(abs, cur)):
            return cur
        prev = cur
    raise QuadratureError(prev, None, view.quad_order_cap)

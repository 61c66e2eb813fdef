"""Catalog of analytic 1-D test objectives with exact derivatives.

Every objective is twice continuously differentiable on all of R and
nonnegative in its intended parameter range.  The bump members are built
from the classic compactly supported mollifier

    bump(x) = exp(1 - 1/(1 - x^2))   for |x| < 1,   0 otherwise,

normalized so bump(0) = 1.  The bump and all its derivatives vanish at
|x| = 1, so adding a scaled copy to a quadratic keeps the sum C^infty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ObjectiveSpec",
    "MollifierConstants",
    "ConstantsVariant",
    "quadratic",
    "asym_quad_bump",
    "sym_bump",
    "polynomial",
    "evaluate",
    "evaluate_arrays",
    "mollifier_constants",
    "lipschitz_bound",
    "curvature_range",
    "local_minima",
]

# exp underflows to 0 below roughly -745.1; clamping slightly above keeps the
# inner branch free of denormal noise while staying exact (the true value
# there is < 1e-323)
_EXP_FLOOR = -745.0


class ConstantsVariant(Enum):
    """Which max(1, .) wrapper convention the mollifier constants follow.

    The asymmetric-valley example takes C1 = max(1, max|bump'|) and
    C2 = max|bump''|; the double-well example takes C1 = max|bump'| and
    C2 = max(1, max|bump''|).  The downstream regime inequalities quote these
    exact conventions, so both are kept.
    """

    ASYM_VALLEY = "asym_valley"
    DOUBLE_WELL = "double_well"


@dataclass(frozen=True)
class ObjectiveSpec:
    """Tagged closed-form objective.

    kind is one of "quadratic", "asym_quad_bump", "sym_bump", "polynomial".
    Only the fields relevant to the kind are meaningful.
    """

    kind: str
    center: float = 0.0
    delta: float = 0.0
    coefficients: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("quadratic", "asym_quad_bump", "sym_bump", "polynomial"):
            raise ValueError(f"unknown objective kind: {self.kind!r}")
        if self.kind in ("asym_quad_bump", "sym_bump") and not self.delta > 0:
            raise ValueError("bump objectives require delta > 0")
        if self.kind == "polynomial" and len(self.coefficients) == 0:
            raise ValueError("polynomial objective requires coefficients")


def quadratic(center: float = 0.0) -> ObjectiveSpec:
    """f(w) = (w - center)^2 / 2."""
    return ObjectiveSpec(kind="quadratic", center=float(center))


def asym_quad_bump(delta: float) -> ObjectiveSpec:
    """f(w) = (w - 1)^2 / 2 - delta * bump(w / delta).

    The negative bump carves a sharp local minimum of width delta near the
    origin, at distance 1 from the flat quadratic minimum.
    """
    return ObjectiveSpec(kind="asym_quad_bump", delta=float(delta))


def sym_bump(delta: float) -> ObjectiveSpec:
    """f(w) = w^2 / 2 + delta^2 * bump(w / delta).

    The positive bump turns the origin into a local maximum flanked by two
    symmetric minima at +/- alpha*delta with alpha independent of delta.
    """
    return ObjectiveSpec(kind="sym_bump", delta=float(delta))


def polynomial(coefficients) -> ObjectiveSpec:
    """f(w) = sum_i coefficients[i] * w^i (ascending powers)."""
    return ObjectiveSpec(kind="polynomial", coefficients=tuple(float(c) for c in coefficients))


# ---------------------------------------------------------------------------
# unit mollifier and derivatives (scalar, libm-backed)
# ---------------------------------------------------------------------------

def _bump012(x: float) -> tuple[float, float, float]:
    """bump(x), bump'(x), bump''(x) with the outer branch exactly zero."""
    s = 1.0 - x * x
    if s <= 0.0:
        return 0.0, 0.0, 0.0
    arg = 1.0 - 1.0 / s
    if arg < _EXP_FLOOR:
        return 0.0, 0.0, 0.0
    b = math.exp(arg)
    q = -2.0 * x / (s * s)          # d(arg)/dx
    dq = -2.0 / (s * s) - 8.0 * x * x / (s * s * s)
    return b, b * q, b * (q * q + dq)


def _bump012_arrays(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized _bump012 over any array shape."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.reshape(-1)
    b = np.zeros_like(xf)
    b1 = np.zeros_like(xf)
    b2 = np.zeros_like(xf)
    s = 1.0 - xf * xf
    inner = s > 0.0
    if np.any(inner):
        xi = xf[inner]
        si = s[inner]
        arg = 1.0 - 1.0 / si
        live = arg >= _EXP_FLOOR
        if np.any(live):
            xi = xi[live]
            si = si[live]
            e = np.exp(arg[live])
            q = -2.0 * xi / (si * si)
            dq = -2.0 / (si * si) - 8.0 * xi * xi / (si * si * si)
            idx = np.flatnonzero(inner)[live]
            b[idx] = e
            b1[idx] = e * q
            b2[idx] = e * (q * q + dq)
    return b.reshape(shape), b1.reshape(shape), b2.reshape(shape)


def evaluate(spec: ObjectiveSpec, w: float) -> tuple[float, float, float]:
    """Closed-form (f(w), f'(w), f''(w))."""
    if spec.kind == "quadratic":
        d = w - spec.center
        return 0.5 * d * d, d, 1.0
    if spec.kind == "asym_quad_bump":
        d = w - 1.0
        b, b1, b2 = _bump012(w / spec.delta)
        # g(w) = -delta * bump(w/delta):  g' = -bump', g'' = -bump''/delta
        return 0.5 * d * d - spec.delta * b, d - b1, 1.0 - b2 / spec.delta
    if spec.kind == "sym_bump":
        dl = spec.delta
        b, b1, b2 = _bump012(w / dl)
        # g(w) = delta^2 * bump(w/delta):  g' = delta * bump', g'' = bump''
        return 0.5 * w * w + dl * dl * b, w + dl * b1, 1.0 + b2
    # polynomial: interleaved Horner for f, f', f''
    c = spec.coefficients
    f = fp = fpp = 0.0
    for i in range(len(c) - 1, -1, -1):
        fpp = fpp * w + 2.0 * fp
        fp = fp * w + f
        f = f * w + c[i]
    return f, fp, fpp


def evaluate_arrays(spec: ObjectiveSpec, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized evaluate over an array of points."""
    w = np.asarray(w, dtype=float)
    if spec.kind == "quadratic":
        d = w - spec.center
        return 0.5 * d * d, d, np.ones_like(w)
    if spec.kind == "asym_quad_bump":
        d = w - 1.0
        b, b1, b2 = _bump012_arrays(w / spec.delta)
        return 0.5 * d * d - spec.delta * b, d - b1, 1.0 - b2 / spec.delta
    if spec.kind == "sym_bump":
        dl = spec.delta
        b, b1, b2 = _bump012_arrays(w / dl)
        return 0.5 * w * w + dl * dl * b, w + dl * b1, 1.0 + b2
    c = np.asarray(spec.coefficients, dtype=float)
    poly = np.polynomial.polynomial
    f = poly.polyval(w, c)
    fp = poly.polyval(w, poly.polyder(c))
    fpp = poly.polyval(w, poly.polyder(c, 2))
    return f, fp, fpp


@dataclass(frozen=True)
class MollifierConstants:
    """Certified maxima of the unit mollifier derivatives."""

    C1: float
    C2: float
    variant: ConstantsVariant


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Golden-section maximization of fun on [lo, hi] to abs accuracy tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return max(fc, fd)


_CONSTANTS_CACHE: dict[ConstantsVariant, MollifierConstants] = {}


def mollifier_constants(variant: ConstantsVariant) -> MollifierConstants:
    """max|bump'| and max|bump''| with the variant's max(1, .) wrappers.

    Maxima are located on a 100001-point grid over [-1, 1] and refined by
    golden-section search to 1e-9; results are cached.
    """
    cached = _CONSTANTS_CACHE.get(variant)
    if cached is not None:
        return cached
    grid = np.linspace(-1.0, 1.0, 100_001)
    _, b1, b2 = _bump012_arrays(grid)
    step = grid[1] - grid[0]

    def refine(absfun, i):
        lo = max(-1.0, grid[i] - step)
        hi = min(1.0, grid[i] + step)
        return _golden_max(absfun, lo, hi)

    m1 = refine(lambda x: abs(_bump012(x)[1]), int(np.argmax(np.abs(b1))))
    m2 = refine(lambda x: abs(_bump012(x)[2]), int(np.argmax(np.abs(b2))))
    if variant is ConstantsVariant.ASYM_VALLEY:
        consts = MollifierConstants(C1=max(1.0, m1), C2=m2, variant=variant)
    else:
        consts = MollifierConstants(C1=m1, C2=max(1.0, m2), variant=variant)
    _CONSTANTS_CACHE[variant] = consts
    return consts


def lipschitz_bound(spec: ObjectiveSpec, window: tuple[float, float] | None = None) -> float:
    """Uniform bound L on |f''|.

    Closed form for the catalog members; polynomials are maximized on a
    caller-supplied window (required, since |f''| is unbounded on R).
    """
    if spec.kind == "quadratic":
        return 1.0
    if spec.kind == "asym_quad_bump":
        c = mollifier_constants(ConstantsVariant.ASYM_VALLEY)
        return 1.0 + c.C2 / spec.delta
    if spec.kind == "sym_bump":
        c = mollifier_constants(ConstantsVariant.DOUBLE_WELL)
        return 1.0 + c.C2
    if window is None:
        raise ValueError("polynomial objective needs a window for the curvature bound")
    grid = np.linspace(window[0], window[1], 100_001)
    _, _, fpp = evaluate_arrays(spec, grid)
    return float(np.max(np.abs(fpp)))


def curvature_range(spec: ObjectiveSpec, window: tuple[float, float] | None = None) -> tuple[float, float]:
    """(inf f'', sup f'') over R for catalog members, over window for polynomials.

    The supremum decides invertibility of w -> w - eta f'(w): the map is
    strictly increasing iff eta * sup f'' < 1, a weaker requirement than the
    symmetric bound eta <= 1/(2L).
    """
    if spec.kind == "quadratic":
        return 1.0, 1.0
    if spec.kind in ("asym_quad_bump", "sym_bump"):
        grid = np.linspace(-1.0, 1.0, 200_001)
        _, _, b2 = _bump012_arrays(grid)
        lo2 = _golden_max(lambda x: -_bump012(x)[2], max(-1.0, grid[int(np.argmin(b2))] - 1e-5),
                          min(1.0, grid[int(np.argmin(b2))] + 1e-5))
        hi2 = _golden_max(lambda x: _bump012(x)[2], max(-1.0, grid[int(np.argmax(b2))] - 1e-5),
                          min(1.0, grid[int(np.argmax(b2))] + 1e-5))
        bmin, bmax = -lo2, hi2
        if spec.kind == "asym_quad_bump":
            # f'' = 1 - bump''(x)/delta
            return 1.0 - bmax / spec.delta, 1.0 - bmin / spec.delta
        return 1.0 + bmin, 1.0 + bmax
    if window is None:
        raise ValueError("polynomial objective needs a window for the curvature range")
    grid = np.linspace(window[0], window[1], 100_001)
    _, _, fpp = evaluate_arrays(spec, grid)
    return float(np.min(fpp)), float(np.max(fpp))


def _bisect_root(fun, lo: float, hi: float, tol: float = 1e-10) -> float:
    flo = fun(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            return mid
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if (flo < 0.0) == (fm < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def local_minima(spec: ObjectiveSpec, window: tuple[float, float], grid_n: int = 10_000) -> list[tuple[float, float]]:
    """All roots of f' with f'' > 0 inside window.

    Sign changes of f' are bracketed on a uniform grid and refined by
    bisection to 1e-10.  Returns (location, value) pairs sorted by location;
    empty when the window holds no minimum.
    """
    lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("window must be a finite nonempty interval")
    grid = np.linspace(lo, hi, grid_n)
    _, fp, _ = evaluate_arrays(spec, grid)
    out = []
    sign = np.sign(fp)
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        root = _bisect_root(lambda x: evaluate(spec, x)[1], grid[i], grid[i + 1])
        val, _, hess = evaluate(spec, root)
        if hess > 0.0:
            out.append((root, val))
    # grid points landing exactly on a root (e.g. symmetric objectives at 0)
    for i in np.flatnonzero(fp == 0.0):
        x = float(grid[i])
        val, _, hess = evaluate(spec, x)
        if hess > 0.0 and all(abs(x - r) > 1e-8 for r, _ in out):
            out.append((x, val))
    return sorted(out)

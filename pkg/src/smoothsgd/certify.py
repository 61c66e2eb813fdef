"""Empirical certification of the regularity constants of the smoothed objective.

The convergence bounds consume five numbers beyond the noise moments: the
curvature bound L of f, a one-point strong-convexity constant c at the
smoothed minimizer, the minimizer curvature mu, and an envelope (M1, M2) on
the deviation of F' from its linearization at the minimizer.  This module
measures all of them on a dense grid, and separately evaluates the
closed-form parameter regimes under which the two worked examples derive
their constants analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import moment_bounds
from .objectives import ConstantsVariant, MollifierConstants, mollifier_constants
from .smoothing import SmoothedView, minimize_smoothed, smoothed_eval, smoothed_eval_grid

__all__ = [
    "CertifiedConstants",
    "RegimeReport",
    "MEnvelope",
    "certify_c",
    "certify_mu",
    "fit_M_envelope",
    "regime_check",
    "find_valid_regime",
    "certify_problem",
]

EXCLUSION_BAND = 1e-6


@dataclass(frozen=True)
class CertifiedConstants:
    """Constants measured on a stated window and grid; failed=True marks a
    certificate whose positivity requirements (c > 0, mu > 0) did not hold."""

    L: float
    sigma1_sq: float
    sigma2: float
    c: float
    mu: float
    M1: float
    M2: float
    vstar: float
    window: tuple[float, float]
    grid_n: int
    failed: bool = False
    regime_ok: bool | None = None


@dataclass(frozen=True)
class RegimeReport:
    ok: bool
    slacks: tuple[tuple[str, float], ...]

    def slack(self, name: str) -> float:
        for k, v in self.slacks:
            if k == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class MEnvelope:
    """Two operating points of the linearization-error envelope.

    row_m1_zero: (0, M2) with M2 = sup |R| / dist^2
    row_m2_zero: (M1, 0) with M1 = sup |R|
    where R(v) = F'(v) - F''(vstar) (v - vstar).
    """

    row_m1_zero: tuple[float, float]
    row_m2_zero: tuple[float, float]


def _grid_residuals(view: SmoothedView, vstar: float, window, grid_n: int):
    grid = np.linspace(window[0], window[1], grid_n)
    _, Fg, _ = smoothed_eval_grid(view, grid)
    dist = grid - vstar
    mask = np.abs(dist) >= EXCLUSION_BAND
    return grid, Fg, dist, mask


def certify_c(view: SmoothedView, vstar: float, window=None, grid_n: int = 10_000) -> float:
    """inf over the grid of F'(v)(v - vstar) / (v - vstar)^2.

    Nonpositive values are returned as-is; callers mark the certificate
    failed rather than raising.
    """
    if window is None:
        window = view.window
    _, Fg, dist, mask = _grid_residuals(view, vstar, window, grid_n)
    ratio = Fg[mask] * dist[mask] / (dist[mask] * dist[mask])
    return float(np.min(ratio))


def certify_mu(view: SmoothedView, vstar: float) -> float:
    """Curvature of the smoothed objective at its minimizer."""
    return smoothed_eval(view, vstar)[2]


def fit_M_envelope(view: SmoothedView, vstar: float, window=None, grid_n: int = 10_000,
                   M1_fixed: float | None = None):
    """Envelope on R(v) = F'(v) - F''(vstar)(v - vstar) over the grid.

    With M1_fixed given, returns the matching M2 after checking the excluded
    band around vstar satisfies |R| <= M1_fixed + 1e-9.  Without it, returns
    the two-point MEnvelope (the only operating points the closed-form
    examples use).
    """
    if window is None:
        window = view.window
    mu = certify_mu(view, vstar)
    grid, Fg, dist, mask = _grid_residuals(view, vstar, window, grid_n)
    R = Fg - mu * dist
    absR = np.abs(R)
    if M1_fixed is not None:
        band = ~mask
        if np.any(band) and float(np.max(absR[band])) > M1_fixed + 1e-9:
            raise ValueError("excluded band violates the fixed M1 level")
        excess = np.maximum(0.0, absR[mask] - M1_fixed)
        return float(np.max(excess / (dist[mask] * dist[mask])))
    m1_sup = float(np.max(absR))
    m2_sup = float(np.max(absR[mask] / (dist[mask] * dist[mask])))
    return MEnvelope(row_m1_zero=(0.0, m2_sup), row_m2_zero=(m1_sup, 0.0))


def regime_check(variant: ConstantsVariant, delta: float, r: float, eta: float,
                 consts: MollifierConstants) -> RegimeReport:
    """Slack of every closed-form parameter inequality; ok iff all >= 0."""
    if consts.variant is not variant:
        raise ValueError("constants variant does not match the requested example")
    C1, C2 = consts.C1, consts.C2
    if variant is ConstantsVariant.ASYM_VALLEY:
        slacks = (
            ("delta_small", 1.0 / (4.0 * (1.0 + 2.0 * C1)) - delta),
            ("r_large", r - 4.0 * C1 * (delta + C2)),
            ("eta_low", eta - 2.0 * C1 * delta / r),
            ("eta_high", min(1.0 / (4.0 * r) - delta / r, delta / (2.0 * (delta + C2))) - eta),
        )
    else:
        slacks = (
            ("bump_slope", (eta * r / 2.0) * (eta * r - delta) - C1 * delta * delta),
            ("bump_curvature", eta * r / 2.0 - C2 * delta),
            ("eta_small", 1.0 / (2.0 * (1.0 + C2)) - eta),
        )
    return RegimeReport(ok=all(s >= 0.0 for _, s in slacks), slacks=slacks)


def find_valid_regime(variant: ConstantsVariant, delta: float,
                      consts: MollifierConstants | None = None):
    """Constructive (r, eta) satisfying the example's inequalities, or None.

    Asymmetric valley: r is set 1% above its lower bound and eta at the
    midpoint of its admissible interval.  Double well: eta is set 1% below
    its cap and r 1% above the larger of its two lower bounds.
    """
    if consts is None:
        consts = mollifier_constants(variant)
    C1, C2 = consts.C1, consts.C2
    if variant is ConstantsVariant.ASYM_VALLEY:
        if delta > 1.0 / (4.0 * (1.0 + 2.0 * C1)):
            return None
        r = 4.0 * C1 * (delta + C2) * 1.01
        lo = 2.0 * C1 * delta / r
        hi = min(1.0 / (4.0 * r) - delta / r, delta / (2.0 * (delta + C2)))
        if lo > hi:
            return None
        eta = 0.5 * (lo + hi)
    else:
        eta = 0.99 / (2.0 * (1.0 + C2))
        r = max(2.0 * C2 * delta / eta,
                (delta / (2.0 * eta)) * (1.0 + math.sqrt(1.0 + 8.0 * C1))) * 1.01
        if r <= 0:
            return None
    if not regime_check(variant, delta, r, eta, consts).ok:
        return None
    return r, eta


def certify_problem(view: SmoothedView, variant: ConstantsVariant | None = None,
                    window=None, grid_n: int = 10_000) -> CertifiedConstants:
    """Full certificate for a configured problem.

    The window defaults to [vstar - 3, vstar + 3] clipped to the view's
    window, which covers the smoothing support and the basin for every
    catalog member.  The M row is chosen the way the matching closed-form
    example operates: M1 = 0 for the asymmetric valley, M2 = 0 for the
    double well and anything else.
    """
    vstar = minimize_smoothed(view)
    if window is None:
        lo = max(view.window[0], vstar - 3.0)
        hi = min(view.window[1], vstar + 3.0)
        window = (lo, hi)
    c_hat = certify_c(view, vstar, window, grid_n)
    mu_hat = certify_mu(view, vstar)
    env = fit_M_envelope(view, vstar, window, grid_n)
    if variant is ConstantsVariant.ASYM_VALLEY:
        M1, M2 = env.row_m1_zero
    else:
        M1, M2 = env.row_m2_zero
    mb = moment_bounds(view.noise)
    regime_ok = None
    if variant is not None and view.objective.kind in ("asym_quad_bump", "sym_bump"):
        consts = mollifier_constants(variant)
        regime_ok = regime_check(variant, view.objective.delta, view.noise.r,
                                 view.eta, consts).ok
    return CertifiedConstants(
        L=view.L, sigma1_sq=mb.sigma1_sq, sigma2=mb.sigma2,
        c=c_hat, mu=mu_hat, M1=M1, M2=M2, vstar=vstar,
        window=window, grid_n=grid_n,
        failed=not (c_hat > 0.0 and mu_hat > 0.0),
        regime_ok=regime_ok,
    )

"""Closed-form convergence bounds evaluated on certified constants.

Two bounds are computed.  For the shifted iterates v_t, the time-averaged
squared distance to the smoothed minimizer obeys

    (1/(T+1)) sum E (v_t - v*)^2
      <= d0 / (c eta (T+1))
       + (8 / (3 c (T+1))) (1 + 2 eta sigma2^2 / c) f0
       + 2 eta sigma1^2 / c
       + (8 eta^2 sigma1^2 L / (3 c)) (1 + 2 eta sigma2^2 / c),

with d0 = E (v_0 - v*)^2 and f0 = E f(w_0).  For the tail-averaged iterate,
the distance of its mean to the minimizer obeys, up to an uncomputed
O(T^{-1/2}) term,

    |E v_bar - v*| <= 4 sigma1 sigma2 eta^{3/2} L^{1/2} / (sqrt(3) mu)
                    + M1 / mu
                    + 2 eta sigma1^2 M2 / (c mu)
                    + (8 eta^2 sigma1^2 L M2 / (3 c mu)) (1 + 2 eta sigma2^2 / c).

The rate table instantiates both for the two worked examples in terms of the
mollifier constants alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .certify import CertifiedConstants
from .objectives import ConstantsVariant, MollifierConstants

__all__ = ["BoundReport", "sgd_mse_bound", "averaged_bias_bound", "rate_table"]


@dataclass(frozen=True)
class BoundReport:
    """Named terms of one bound evaluation; totals are sums of the terms.

    The inputs (certified constants and, for the finite-T bound, the exact
    initialization moments) are echoed so a report is self-describing.
    """

    terms: dict[str, float]
    total: float
    eta: float
    T: int | None = None
    note: str = ""
    consts: CertifiedConstants | None = None
    d0_sq: float | None = None
    f0: float | None = None

    def __post_init__(self):
        s = sum(self.terms.values())
        if not math.isclose(s, self.total, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("total does not match the sum of its terms")


def sgd_mse_bound(consts: CertifiedConstants, eta: float, T: int,
                  d0_sq: float, f0: float) -> BoundReport:
    """Bound on the time-averaged squared v-distance after T steps."""
    c = consts.c
    if c <= 0.0:
        raise ValueError("certificate failed: c <= 0")
    s2sq = consts.sigma2 ** 2
    amp = 1.0 + 2.0 * eta * s2sq / c
    terms = {
        "init_term": d0_sq / (c * eta * (T + 1)),
        "f0_term": (8.0 / (3.0 * c * (T + 1))) * amp * f0,
        "linear_eta_term": 2.0 * eta * consts.sigma1_sq / c,
        "quad_eta_term": (8.0 * eta ** 2 * consts.sigma1_sq * consts.L / (3.0 * c)) * amp,
    }
    return BoundReport(terms=terms, total=sum(terms.values()), eta=eta, T=T,
                       consts=consts, d0_sq=d0_sq, f0=f0)


def averaged_bias_bound(consts: CertifiedConstants, eta: float) -> BoundReport:
    """Asymptotic-in-T bound on |E v_bar - v*|.

    The O(T^{-1/2}) term has no exhibited constant and is carried as a note,
    never as a number; comparisons against experiments must separately
    establish that the measured T-dependence is below this total.
    """
    c, mu = consts.c, consts.mu
    if mu <= 0.0:
        raise ValueError("certificate failed: mu <= 0")
    if c <= 0.0:
        raise ValueError("certificate failed: c <= 0")
    sigma1 = math.sqrt(consts.sigma1_sq)
    s2sq = consts.sigma2 ** 2
    amp = 1.0 + 2.0 * eta * s2sq / c
    terms = {
        "eta32_term": 4.0 * sigma1 * consts.sigma2 * eta ** 1.5 * math.sqrt(consts.L) / (math.sqrt(3.0) * mu),
        "M1_term": consts.M1 / mu,
        "M2_linear": 2.0 * eta * consts.sigma1_sq * consts.M2 / (c * mu),
        "M2_quad": (8.0 * eta ** 2 * consts.sigma1_sq * consts.L * consts.M2 / (3.0 * c * mu)) * amp,
    }
    return BoundReport(terms=terms, total=sum(terms.values()), eta=eta,
                       note="plus an uncomputed O(T^-1/2) term", consts=consts)


def rate_table(variant: ConstantsVariant, delta: float, r: float,
               consts: MollifierConstants, eta: float | None = None):
    """Example-specific rates in terms of the mollifier constants.

    Asymmetric valley (eta fixed to its optimal value 2 C1 delta / r):
        sgd: sqrt(12 C1 delta r + 32 C1^2 delta (delta + C2))
        avg: (32/9) (3 C1 delta r + 8 C1^2 delta (delta + C2))
    Double well (caller-supplied eta):
        sgd: 2 sqrt(eta r^2 + (4/3) eta^2 r^2 (1 + C2))
        avg: C1 delta^2 / (eta r)

    Returns (eta_star, sgd_rate, avg_rate).
    """
    C1, C2 = consts.C1, consts.C2
    if variant is ConstantsVariant.ASYM_VALLEY:
        eta_star = 2.0 * C1 * delta / r
        sgd_rate = math.sqrt(12.0 * C1 * delta * r + 32.0 * C1 ** 2 * delta * (delta + C2))
        avg_rate = (32.0 / 9.0) * (3.0 * C1 * delta * r + 8.0 * C1 ** 2 * delta * (delta + C2))
        return eta_star, sgd_rate, avg_rate
    if eta is None:
        raise ValueError("double-well rates need a caller-supplied eta")
    sgd_rate = 2.0 * math.sqrt(eta * r ** 2 + (4.0 / 3.0) * eta ** 2 * r ** 2 * (1.0 + C2))
    avg_rate = C1 * delta ** 2 / (eta * r)
    return eta, sgd_rate, avg_rate

"""Theoretical convergence rates and finite-sample rate diagnostics.

Closed-form rate exponents for the tabulated regimes (ordinary or
super-smooth density classes against mildly or severely ill-posed noise),
the base term responsible for the parametric elbow in estimation, exact
finite-n scans of all rate quantities, and log-log regression utilities
for recovering exponents from numeric or Monte Carlo data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionNotFound
from .estimation import optimal_dim_est
from .fourier import NoiseModel, SmoothnessClass
from .testing import nu_k_sq, radius_upper

__all__ = [
    "RegimeSpec",
    "OrderDescriptor",
    "RateReport",
    "base_term",
    "theoretical_estimation_rate",
    "theoretical_testing_radius",
    "numeric_rate_scan",
    "fit_rate",
]


@dataclass(frozen=True)
class RegimeSpec:
    """A (smoothness, ill-posedness) pairing from the rate tables.

    smoothness: "ordinary" (a_j ~ j^{-s}, s > 1/2) or "super"
    (a_j ~ exp(-j^s), s > 0); illposedness: "mild" (|eps_j| ~ j^{-p},
    p > 1/2) or "severe" (|eps_j| ~ exp(-j^p), p > 0).
    """

    smoothness: str
    s: float
    illposedness: str
    p: float

    def __post_init__(self):
        if self.smoothness == "ordinary":
            if self.s <= 0.5:
                raise ValueError("ordinary smoothness requires s > 1/2")
        elif self.smoothness == "super":
            if self.s <= 0:
                raise ValueError("super smoothness requires s > 0")
        else:
            raise ValueError(f"unknown smoothness {self.smoothness!r}")
        if self.illposedness == "mild":
            if self.p <= 0.5:
                raise ValueError("mild ill-posedness requires p > 1/2")
        elif self.illposedness == "severe":
            if self.p <= 0:
                raise ValueError("severe ill-posedness requires p > 0")
        else:
            raise ValueError(f"unknown illposedness {self.illposedness!r}")


@dataclass(frozen=True)
class OrderDescriptor:
    """Order of a positive sequence: n^{n_exp} (log n)^{log_exp}.

    Constant factors are deliberately absent; rate statements are only
    meaningful up to constants.
    """

    n_exp: float
    log_exp: float = 0.0

    def value(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return n ** self.n_exp * np.log(n) ** self.log_exp


@dataclass(frozen=True)
class RateReport:
    regime: RegimeSpec
    r_star4: Optional[OrderDescriptor]
    base: Optional[OrderDescriptor]
    rate: OrderDescriptor
    elbow: bool
    elbow_condition: str


def base_term(cls: SmoothnessClass, eps: NoiseModel, n: int, m_max: int = 10 ** 4):
    """B = max_m min(a_m^4, a_m^2 / (n |eps_m|^2)), scanned over m <= m_max.

    Returns (B, argmax m). The first factor decays in m while the second
    typically grows until noise decay takes over, so the max sits at their
    crossing; a warning flags a scan window too small to contain it.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    m = np.arange(1, m_max + 1)
    a = cls.a(m)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        second = a ** 2 / (n * eps.modulus(m) ** 2)
    vals = np.minimum(a ** 4, np.nan_to_num(second, nan=0.0))
    idx = int(np.argmax(vals))
    if vals[m_max - 1] >= vals[idx] * (1.0 - 1e-12):
        warnings.warn("base term still maximal at m_max; widen the scan window")
    return float(vals[idx]), idx + 1


def theoretical_estimation_rate(reg: RegimeSpec, n: int = 0) -> RateReport:
    """Closed-form order of the minimax estimation risk for the regime.

    ordinary/mild: n^{-8s/(4s+4p+1)}, switching to the parametric n^{-1}
    once s - p >= 1/4 (the elbow); ordinary/severe: (log n)^{-4s/p};
    super/mild: n^{-1}.
    """
    s, p = reg.s, reg.p
    if reg.smoothness == "ordinary" and reg.illposedness == "mild":
        elbow = s - p >= 0.25
        r4 = OrderDescriptor(-8.0 * s / (4.0 * s + 4.0 * p + 1.0))
        b = OrderDescriptor(-1.0)
        rate = b if elbow else r4
        return RateReport(reg, r4, b, rate, elbow, "s - p >= 1/4")
    if reg.smoothness == "ordinary" and reg.illposedness == "severe":
        rate = OrderDescriptor(0.0, -4.0 * s / p)
        return RateReport(reg, rate, OrderDescriptor(-1.0), rate, False, "never (log regime)")
    if reg.smoothness == "super" and reg.illposedness == "mild":
        rate = OrderDescriptor(-1.0)
        return RateReport(reg, None, rate, rate, True, "always (parametric)")
    raise ValueError("no tabulated rate for super-smooth against severe noise")


def theoretical_testing_radius(reg: RegimeSpec, n: int = 0) -> RateReport:
    """Closed-form order of the minimax radius of testing (squared scale
    is this value; the table reports rho*^2). There is no elbow: testing
    never accelerates to a parametric rate in the ordinary/mild regime.
    """
    s, p = reg.s, reg.p
    if reg.smoothness == "ordinary" and reg.illposedness == "mild":
        rate = OrderDescriptor(-4.0 * s / (4.0 * s + 4.0 * p + 1.0))
        return RateReport(reg, rate, None, rate, False, "no elbow for testing")
    if reg.smoothness == "ordinary" and reg.illposedness == "severe":
        rate = OrderDescriptor(0.0, -2.0 * s / p)
        return RateReport(reg, rate, None, rate, False, "no elbow for testing")
    if reg.smoothness == "super" and reg.illposedness == "mild":
        rate = OrderDescriptor(-1.0, (4.0 * p + 1.0) / (2.0 * s))
        return RateReport(reg, rate, None, rate, False, "no elbow for testing")
    raise ValueError("no tabulated radius for super-smooth against severe noise")


@dataclass(frozen=True)
class ScanRow:
    n: int
    kappa_star: int
    rho_star_sq: float
    r_star4: float
    base: float

    @property
    def estimation_bound(self) -> float:
        return max(self.r_star4, self.base)


def numeric_rate_scan(
    cls: SmoothnessClass,
    eps: NoiseModel,
    n_grid,
    k_max: int = 10 ** 5,
    m_max: int = 10 ** 4,
):
    """Exact finite-n rate quantities for each n in an ascending grid.

    Per n: the optimal dimension kappa*, the minimized testing radius
    rho*^2 = min_k max(a_k^2, nu_k^2), its square r*^4, and the base term.
    Feeding columns of the result to fit_rate recovers the closed-form
    exponents.
    """
    n_grid = list(n_grid)
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly ascending")
    rows = []
    for n in n_grid:
        kappa = optimal_dim_est(cls, eps, n, k_max)
        # rho_k^2 = max(a_k^2, nu_k^2) is minimized near the crossing at
        # kappa*; scan a safety margin on both sides.
        lo, hi = 1, min(k_max, 4 * kappa + 8)
        ks = np.arange(lo, hi + 1)
        a2 = cls.a(ks) ** 2
        with np.errstate(over="ignore"):
            nu2 = np.sqrt(2.0 * np.cumsum(eps.modulus(ks) ** -4.0)) / n
        rho2 = float(np.min(np.maximum(a2, nu2)))
        b, _ = base_term(cls, eps, n, m_max)
        rows.append(ScanRow(n=n, kappa_star=kappa, rho_star_sq=rho2, r_star4=rho2 ** 2, base=b))
    return rows


def fit_rate(ns, values, log_log_term: bool = False):
    """Least-squares fit of log v on log n (optionally + log log n).

    Returns (slope, log_exponent, r_squared); log_exponent is 0.0 when
    the log-log regressor is disabled.
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.size < 4:
        raise ValueError("need at least 4 points")
    if np.any(values <= 0):
        raise ValueError("values must be strictly positive")
    y = np.log(values)
    cols = [np.ones_like(ns), np.log(ns)]
    if log_log_term:
        cols.append(np.log(np.log(ns)))
    x = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    slope = float(coef[1])
    log_exp = float(coef[2]) if log_log_term else 0.0
    return slope, log_exp, r2


def fit_log_rate(ns, values):
    """Fit log v = c + gamma * log log n (pure log-rate regimes, where the
    n term is absent). Returns (gamma, r_squared)."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.size < 4:
        raise ValueError("need at least 4 points")
    if np.any(values <= 0):
        raise ValueError("values must be strictly positive")
    y = np.log(values)
    x = np.column_stack([np.ones_like(ns), np.log(np.log(ns))])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(coef[1]), r2

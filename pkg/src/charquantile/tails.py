"""Asymptotic tail models and the composite quantile.

For a symmetric stable law with ``phi(t) = exp(-|t|^alpha)``, ``alpha < 2``,
the upper tail CDF expands in powers of ``x^-alpha``.  Inverting its first
four terms gives, with ``eps = 1 - u``,

    w(u) ~ (c_{-1}/eps + c_0 + c_1 eps + c_2 eps^2) ** (1/alpha).

The central series is used on ``|2u - 1| <= 2 u_switch - 1`` and the tail
beyond, mirrored into the lower tail for symmetric laws.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .series import CentralSeries, eval_series, validity_limit

KINK_TOL = 1e-3
SCAN_LO, SCAN_HI = 0.90, 0.99
# documented range of the central series for the Gaussian, where no tail exists
GAUSSIAN_VALID = 0.94


class AccuracyWarning(UserWarning):
    """Evaluation outside the range where the model is known to be accurate."""


@dataclass(frozen=True)
class TailModel:
    alpha: float
    c: tuple  # (c_-1, c_0, c_1, c_2)
    u_switch: float = 0.95
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise DomainError(f"tail model needs 0 < alpha < 2, got {self.alpha}")
        if not 0.5 < self.u_switch < 1:
            raise DomainError("u_switch must lie in (1/2, 1)")

    def with_switch(self, u_switch: float) -> "TailModel":
        return TailModel(self.alpha, self.c, u_switch, self.scale)

    def __call__(self, u):
        """Upper-tail quantile; meaningful for ``u`` near 1."""
        eps = 1.0 - np.asarray(u, dtype=float)
        cm1, c0, c1, c2 = self.c
        base = cm1 / eps + c0 + eps * (c1 + eps * c2)
        out = self.scale * np.power(base, 1.0 / self.alpha)
        return out if out.ndim else float(out)


def stable_tail_coefficients(alpha: float) -> tuple:
    a = alpha
    g1, g2, g3, g4 = (math.gamma(k * a) for k in (1, 2, 3, 4))
    s = math.sin(math.pi * a / 2)
    c = math.cos(math.pi * a / 2)
    cpa = math.cos(math.pi * a)
    cm1 = g1 * s / math.pi
    c0 = -c * g2 / g1
    c1 = math.pi / s**2 * (2 * g1 * g3 * math.sin(3 * math.pi * a / 2)
                           - 3 / s * g2**2 * math.sin(math.pi * a) ** 2) / (12 * g1**3)
    c2 = -(math.pi**2 * (c / s) / s
           * (6 * (cpa + 1) * g2**3 - 3 * (2 * cpa + 1) * g1 * g3 * g2 + cpa * g1**2 * g4)
           / (6 * g1**5))
    return cm1, c0, c1, c2


def stable_tail(alpha: float, u_switch: float = 0.95, scale: float = 1.0) -> TailModel:
    if not 0 < alpha < 2:
        raise DomainError(
            f"no asymptotic tail model for alpha = {alpha}; the series form needs 0 < alpha < 2"
        )
    return TailModel(alpha, stable_tail_coefficients(alpha), u_switch, scale)


def _rel_gap(cs: CentralSeries, tm: TailModel, u):
    ws = eval_series(cs, u)
    wt = tm(u)
    return np.abs(ws - wt) / np.abs(wt)


def tail_monotone_from(tm: TailModel, n: int = 20_001) -> float:
    """Smallest ``u`` such that the tail is finite and increasing on ``(u, 1)``."""
    cm1, c0, c1, c2 = tm.c
    eps = np.geomspace(1e-12, 0.5, n)
    base = cm1 / eps + c0 + eps * (c1 + eps * c2)
    slope = -cm1 / eps**2 + c1 + 2 * c2 * eps  # d base / d eps, must stay negative
    bad = np.flatnonzero(~((slope < 0) & (base > 0)))
    if not bad.size:
        return 0.5
    # last grid point that still qualifies
    return float(1.0 - eps[max(bad[0] - 1, 0)])


def _central_monotone_to(cs: CentralSeries, n: int = 20_001) -> float:
    from .series import eval_derivative
    u = np.linspace(cs.u0, 1.0, n)[:-1]
    with np.errstate(invalid="ignore", over="ignore"):
        d = eval_derivative(cs, u)
    bad = np.flatnonzero(~(d > 0))
    return 1.0 if not bad.size else float(u[bad[0]])


def _best_join(cs, tm, lo, hi, n, u_min, u_max):
    u = np.linspace(lo, hi, n)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        gap = _rel_gap(cs, tm, u)
    ok = np.isfinite(gap) & (u >= u_min) & (u <= u_max)
    if not ok.any():
        return None, np.inf
    gap = np.where(ok, gap, np.inf)
    i = int(np.argmin(gap))
    return float(u[i]), float(gap[i])


def choose_switch(cs: CentralSeries, tm: TailModel, lo: float = SCAN_LO, hi: float = SCAN_HI,
                  n: int = 901) -> float:
    """Join point in ``[lo, hi]`` minimising the relative central/tail gap.

    Only points where the central series is increasing up to the join and
    the tail is increasing beyond it qualify.  When no qualifying point in
    ``[lo, hi]`` gets the gap below ``KINK_TOL`` the scan is widened to
    ``[0.51, 0.9999]``; either way a warning reports a gap above tolerance.
    """
    u_min = tail_monotone_from(tm)
    u_max = _central_monotone_to(cs)
    u, gap = _best_join(cs, tm, lo, hi, n, u_min, u_max)
    if not gap < KINK_TOL:
        u2, gap2 = _best_join(cs, tm, 0.51, 0.9999, 9_889, u_min, u_max)
        if gap2 < gap:
            u, gap = u2, gap2
    if u is None:
        raise DomainError("no join point where both central series and tail are increasing")
    if not gap < KINK_TOL:
        warnings.warn(f"central/tail join gap {gap:.3g} at u={u:.4f} exceeds {KINK_TOL:g}",
                      AccuracyWarning, stacklevel=2)
    return u


def switch_gap(cs: CentralSeries, tm: TailModel) -> float:
    return float(_rel_gap(cs, tm, tm.u_switch))


@dataclass(frozen=True)
class CompositeQuantile:
    central: CentralSeries
    upper_tail: Optional[TailModel] = None
    reflection: bool = False
    # without a tail model, |2u - 1| beyond 2*valid_hi - 1 triggers a warning
    valid_hi: float = 1.0

    def __call__(self, u):
        return eval_quantile(self, u)


def eval_quantile(q: CompositeQuantile, u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or np.any(np.isnan(u)):
        raise DomainError("quantile argument must lie strictly inside (0, 1)")
    cs = q.central
    tm = q.upper_tail
    if tm is None:
        lo_edge = 1.0 - q.valid_hi if cs.symmetric else 0.0
        if np.any((u > q.valid_hi) | (u < lo_edge)):
            warnings.warn(f"evaluating the central series outside its validity range (u > {q.valid_hi:g})",
                          AccuracyWarning, stacklevel=2)
        return eval_series(cs, u)
    out = np.asarray(eval_series(cs, u), dtype=float).copy()
    up = u > tm.u_switch
    if np.any(up):
        out[up] = tm(u[up])
    if q.reflection:
        dn = u < 1.0 - tm.u_switch
        if np.any(dn):
            out[dn] = -np.asarray(tm(1.0 - u[dn]))
    return out if out.ndim else float(out)


def composite_for(cs: CentralSeries, tail: Optional[bool] = None) -> CompositeQuantile:
    """Composite quantile for a built series, attaching a tail where one exists.

    Symmetric stable laws with ``alpha < 2`` get the asymptotic tail (unless
    ``tail`` is False); the Gaussian keeps its documented central range;
    everything else uses the series' own truncation proxy as the range.
    """
    dist = cs.dist or {}
    name = dist.get("dist")
    alpha = dist.get("alpha")
    stable_sym = name == "stable" and cs.symmetric and alpha is not None
    if stable_sym and alpha < 2 and tail is not False:
        tm = stable_tail(alpha, scale=dist.get("scale", 1.0))
        tm = tm.with_switch(choose_switch(cs, tm))
        return CompositeQuantile(cs, tm, reflection=True)
    if cs.symmetric and ((stable_sym and alpha == 2) or name == "gaussian"):
        return CompositeQuantile(cs, None, cs.symmetric, GAUSSIAN_VALID)
    return CompositeQuantile(cs, None, cs.symmetric, validity_limit(cs))

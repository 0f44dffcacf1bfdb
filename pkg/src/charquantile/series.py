"""Central quantile series about the zero-quantile anchor.

With ``x = w'(u0) = 1 / f(0)`` and the recurrence polynomials evaluated at
the anchor, the quantile is

    w(u) = sum_{k>=1} q_k (u - u0)^k,   q_1 = x,   q_k = x^{k+1} p_k / k!.

Symmetric laws use the symmetric-substituted ``p_k`` (odd ``k`` only) and
are evaluated in the variables ``v = 2u - 1``, ``w = v^2`` with Horner
coefficients ``a_j = q_{2j+1} / 2^{2j+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from . import diffring
from .charfns import CharFnDescriptor
from .errors import DegenerateDensityError, ShapeError
from .moments import MomentVector, build_moment_vector, zero_location
from .quadrature import DEFAULT, QuadratureConfig

DEFAULT_TERMS = 35
DEFAULT_DPS = 50


@dataclass(frozen=True)
class CentralSeries:
    u0: float
    wdash: float
    qcoeffs: tuple  # q_1 .. q_N
    symmetric: bool
    dist: dict = field(default_factory=dict)
    mp_qcoeffs: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.qcoeffs or not self.qcoeffs[0] > 0:
            raise DegenerateDensityError("leading coefficient w'(u0) must be positive")
        if self.symmetric and any(self.qcoeffs[k] != 0 for k in range(1, len(self.qcoeffs), 2)):
            raise ShapeError("symmetric series must have vanishing even coefficients")

    @property
    def nterms(self) -> int:
        return len(self.qcoeffs)

    def __call__(self, u):
        return eval_series(self, u)


def slope_at_anchor(mv: MomentVector) -> float:
    d0 = float(mv.dvals[0])
    if not math.isfinite(d0) or d0 <= 0:
        raise DegenerateDensityError(f"density at the anchor is {d0}; need a positive finite value")
    return 1.0 / d0


def _symmetric_q(mv: MomentVector, n_max: int, mp: bool) -> list:
    pvals = diffring.load_or_compute_symmetric(n_max)
    ev = mv.evals(mp=mp)
    x = 1 / ev[0]
    q = [x] + [0] * (n_max - 1)
    fact = 1
    for n in range(2, n_max + 1):
        fact *= n
        if n % 2:
            q[n - 1] = x ** (n + 1) * diffring.substitute(pvals[n], ev, x) / fact
    return q


def _general_q(mv: MomentVector, n_max: int, mp: bool) -> list:
    seq = diffring.load_or_compute_sequence(n_max) if n_max >= 2 else []
    bv = mv.bvals(mp=mp)
    d0 = mv.mp_dvals[0] if mp else mv.dvals[0]
    x = 1 / d0
    q = [x]
    fact = 1
    for n in range(2, n_max + 1):
        fact *= n
        q.append(x ** (n + 1) * diffring.substitute(seq[n - 2], bv, x) / fact)
    return q


def build_series(cf: CharFnDescriptor, terms: int = DEFAULT_TERMS, cfg: QuadratureConfig = DEFAULT,
                 dps: Optional[int] = DEFAULT_DPS, moments: Optional[MomentVector] = None) -> CentralSeries:
    """Central series with ``terms`` correction terms beyond the linear one.

    Symmetric laws get orders ``1, 3, ..., 2*terms + 1``; asymmetric ones
    orders ``1..terms + 1`` about ``u0``.  Coefficients are assembled in
    mpmath at ``dps`` digits because the recurrence polynomials cancel
    heavily at high order; ``dps=None`` keeps everything in doubles, which
    is only trustworthy for short series.
    """
    if terms < 0:
        raise ValueError("terms must be non-negative")
    n_max = 2 * terms + 1 if cf.symmetric else terms + 1
    u0 = zero_location(cf, cfg)
    mv = moments if moments is not None else build_moment_vector(cf, n_max - 1, cfg, dps=dps)
    slope_at_anchor(mv)
    mp = dps is not None and mv.mp_dvals is not None
    with mpmath.workdps(dps or 15):
        q = _symmetric_q(mv, n_max, mp) if cf.symmetric else _general_q(mv, n_max, mp)
        mpq = tuple(mpmath.mpf(v) for v in q) if mp else None
    qf = tuple(float(v) for v in q)
    return CentralSeries(u0, qf[0], qf, cf.symmetric, cf.spec(), mpq)


def horner_coeffs(cs: CentralSeries, mp: bool = False) -> list:
    """``a_j`` with ``w = v (a_0 + v^2 (a_1 + ...))`` and ``v = 2u - 1``."""
    if not cs.symmetric:
        raise ShapeError("the v = 2u - 1 Horner form is only defined for symmetric series")
    if mp and cs.mp_qcoeffs is not None:
        q = cs.mp_qcoeffs
        # ldexp is exact, independent of the working precision
        return [mpmath.ldexp(q[2 * j], -(2 * j + 1)) for j in range((len(q) + 1) // 2)]
    q = cs.qcoeffs
    return [q[2 * j] / 2 ** (2 * j + 1) for j in range((len(q) + 1) // 2)]


def _horner(coeffs, z):
    acc = np.zeros_like(z) + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc


def eval_series(cs: CentralSeries, u):
    u = np.asarray(u, dtype=float)
    if cs.symmetric:
        a = horner_coeffs(cs)
        v = 2.0 * u - 1.0
        out = v * _horner(a, v * v)
    else:
        d = u - cs.u0
        out = d * _horner(list(cs.qcoeffs), d)
    return out if out.ndim else float(out)


def eval_derivative(cs: CentralSeries, u):
    """``dw/du`` of the truncated series."""
    u = np.asarray(u, dtype=float)
    d = u - cs.u0
    dq = [k * q for k, q in enumerate(cs.qcoeffs, start=1)]
    out = _horner(dq, d)
    return out if out.ndim else float(out)


def check_monotone(cs: CentralSeries, lo: float, hi: float, n: int = 10_001) -> bool:
    w = eval_series(cs, np.linspace(lo, hi, n))
    return bool(np.all(np.diff(w) > 0))


def validity_limit(cs: CentralSeries, rel: float = 1e-3) -> float:
    """Largest ``u`` past which the last retained term exceeds ``rel`` of w.

    A cheap truncation-error proxy used for warnings, not a guarantee.
    """
    u = np.linspace(cs.u0, 1.0, 4001)[1:-1]
    w = np.abs(eval_series(cs, u))
    k = cs.nterms
    last = np.abs(cs.qcoeffs[-1]) * np.abs(u - cs.u0) ** k
    bad = np.flatnonzero(last > rel * np.maximum(w, 1e-300))
    return float(u[bad[0]]) if bad.size else 1.0

"""Characteristic moments, density derivatives at the origin, Gil-Pelaez CDF.

All integrals run over the half line, using ``phi(-t) = conj(phi(t))``:

    E_k    = (1/pi) int_0^inf t^{2k} phi(t) dt                      (symmetric)
    D_k    = f^{(k)}(0) = (1/pi) int_0^inf t^k Re[(-i)^k phi(t)] dt
    F(x)   = 1/2 - (1/pi) int_0^inf Im[phi(t) e^{-itx}] / t dt
    u0     = F(0)

The Gil-Pelaez integrand is integrated over half-periods of ``sin(tx)``;
when the envelope decays too slowly for direct summation the tail is summed
with Euler's transform.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .charfns import CharFnDescriptor, make_stable_symmetric
from .errors import DivergenceError, DomainError, NonConvergenceError
from .quadrature import DEFAULT, QuadratureConfig, euler_sum, integrate, panel_integrals, truncation_point


@dataclass
class MomentVector:
    """Density derivatives ``D_k = f^{(k)}(0)`` for ``k = 0..K``."""

    dvals: np.ndarray
    provenance: list[str]
    errors: np.ndarray
    symmetric: bool
    mp_dvals: Optional[list] = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return len(self.dvals) - 1

    def bvals(self, mp: bool = False) -> list:
        """``B_m = -D_{m+1}`` for ``m = 0..K-1``."""
        src = self.mp_dvals if mp else self.dvals
        return [-src[m + 1] for m in range(self.order)]

    def evals(self, mp: bool = False) -> list:
        """``E_j = (-1)^j D_{2j}``; index 0 is ``E_0 = f(0)``."""
        src = self.mp_dvals if mp else self.dvals
        return [(-1) ** j * src[2 * j] for j in range(self.order // 2 + 1)]


def _check_order(cf: CharFnDescriptor, j: int) -> None:
    if j > cf.moment_order:
        raise DivergenceError(
            f"moment does not exist: {cf.name} {cf.params} has finite density "
            f"derivatives only up to order {cf.moment_order}, order {j} requested"
        )


def _halfline_moment(g, cf: CharFnDescriptor, power: int, cfg: QuadratureConfig):
    """Integrate ``g`` over [0, T] where ``t^power |phi|`` has decayed."""
    env = lambda t: t**power * np.abs(cf(t))
    T = truncation_point(env, cfg.truncation, t_start=0.25)
    if not np.isfinite(T):
        raise NonConvergenceError(f"{cf.name}: t^{power} phi(t) does not decay; integral truncation failed")
    # geometric panels near zero resolve cusps such as exp(-|t|^alpha)
    near = np.geomspace(T * 1e-6, T / 64, 12)
    edges = np.concatenate([[0.0], near, np.linspace(T / 64, T, 64)[1:]])
    return integrate(g, edges, cfg)


def even_moment(cf: CharFnDescriptor, k: int, cfg: QuadratureConfig = DEFAULT, with_error: bool = False):
    """``E_k`` by quadrature."""
    if not cf.symmetric:
        raise DomainError("even moments are defined here for symmetric characteristic functions")
    if k < 0:
        raise DomainError("moment index must be non-negative")
    _check_order(cf, 2 * k)
    p = 2 * k
    val, err = _halfline_moment(lambda t: t**p * np.real(cf(t)), cf, p, cfg)
    val, err = val / math.pi, err / math.pi
    return (val, err) if with_error else val


def derivative_at_zero(cf: CharFnDescriptor, k: int, cfg: QuadratureConfig = DEFAULT, with_error: bool = False):
    """``f^{(k)}(0)`` by quadrature (exact zero for odd ``k`` when symmetric)."""
    if k < 0:
        raise DomainError("derivative order must be non-negative")
    _check_order(cf, k)
    if cf.symmetric and k % 2:
        return (0.0, 0.0) if with_error else 0.0
    r = k % 4

    def g(t):
        ph = cf(t)
        part = np.real(ph) if r % 2 == 0 else np.imag(ph)
        return (t**k) * (part if r in (0, 1) else -part)

    val, err = _halfline_moment(g, cf, k, cfg)
    val, err = val / math.pi, err / math.pi
    return (val, err) if with_error else val


def _mp_cutoff(cf: CharFnDescriptor, k: int, dps: int) -> float:
    env = lambda t: t**k * np.abs(cf(t))
    T = truncation_point(env, 10.0 ** -(dps + 5), t_start=0.25)
    if not np.isfinite(T):
        raise NonConvergenceError(f"{cf.name}: t^{k} phi(t) does not decay")
    return T


def derivative_at_zero_mp(cf: CharFnDescriptor, k: int, dps: int, cfg: QuadratureConfig = DEFAULT,
                          cutoff: Optional[float] = None, phi=None):
    """Extended-precision ``f^{(k)}(0)`` by tanh-sinh quadrature on ``cf.eval_mp``.

    ``cutoff`` and ``phi`` (a memoised ``t -> (Re, Im)`` from ``_memo``) let
    a caller share nodes across orders: with a common cutoff the quadrature
    visits the same abscissae for every ``k`` and only the cheap power
    changes.
    """
    if cf.eval_mp is None:
        raise DomainError(f"{cf.name} has no extended-precision evaluator")
    _check_order(cf, k)
    if cf.symmetric and k % 2:
        return mpmath.mpf(0)
    T = cutoff if cutoff is not None else _mp_cutoff(cf, k, dps)
    parts = phi or _memo(cf.eval_mp)
    # Re[(-i)^k phi] is +-Re phi for even k, +-Im phi for odd k
    idx = k % 2
    sign = -1 if k % 4 in (2, 3) else 1
    with mpmath.workdps(dps + 10):
        f = lambda t: sign * t**k * parts(t)[idx]
        pts = [mpmath.mpf(T) * j / 8 for j in range(9)]
        val = mpmath.quad(f, pts) / mpmath.pi
    return +val


def _memo(fn):
    """``t -> (Re fn(t), Im fn(t))`` with a cache keyed by the abscissa."""
    cache = {}

    def g(t):
        v = cache.get(t)
        if v is None:
            z = mpmath.mpc(fn(t))
            v = cache[t] = (z.real, z.imag)
        return v
    return g


def build_moment_vector(cf: CharFnDescriptor, K: int, cfg: QuadratureConfig = DEFAULT,
                        dps: Optional[int] = None, prefer_closed: bool = True) -> MomentVector:
    """``D_0..D_K``, closed forms first, quadrature otherwise.

    With ``dps`` every entry is also carried in mpmath at that many digits:
    closed forms directly, quadrature through ``eval_mp`` when the descriptor
    has one (otherwise the double value is promoted).
    """
    _check_order(cf, K)
    d = np.zeros(K + 1)
    err = np.zeros(K + 1)
    prov: list[str] = []
    mp_d = [] if dps else None
    closed = prefer_closed and cf.symmetric and cf.closed_moments is not None
    shared = {}
    if mp_d is not None and not closed and cf.eval_mp is not None:
        shared = {"cutoff": max(_mp_cutoff(cf, k, dps) for k in (0, K)), "phi": _memo(cf.eval_mp)}
    with mpmath.workdps(dps or 15):
        for k in range(K + 1):
            if cf.symmetric and k % 2:
                prov.append("symmetry")
                if mp_d is not None:
                    mp_d.append(mpmath.mpf(0))
                continue
            if closed:
                j = k // 2
                d[k] = (-1) ** j * cf.closed_moments(j)
                prov.append("closed-form")
                if mp_d is not None:
                    src = cf.closed_moments_mp
                    mp_d.append((-1) ** j * (src(j) if src else mpmath.mpf(cf.closed_moments(j))))
            elif mp_d is not None and cf.eval_mp is not None:
                mp_d.append(derivative_at_zero_mp(cf, k, dps, cfg, **shared))
                d[k] = float(mp_d[-1])
                prov.append("quadrature")
            else:
                d[k], err[k] = derivative_at_zero(cf, k, cfg, with_error=True)
                prov.append("quadrature")
                if mp_d is not None:
                    mp_d.append(mpmath.mpf(d[k]))
    return MomentVector(d, prov, err, cf.symmetric, mp_d)


# ---------------------------------------------------------------------------
# Gil-Pelaez


_sign_lock = threading.Lock()
_sign_checked = False


def _sign_self_check(cfg: QuadratureConfig) -> None:
    global _sign_checked
    if _sign_checked:
        return
    with _sign_lock:
        if not _sign_checked:
            f1 = _gp_integral(make_stable_symmetric(1.0), 1.0, cfg)
            if abs(f1 - 0.75) > 1e-12:
                raise AssertionError(f"Gil-Pelaez sign check failed: Cauchy F(1) = {f1!r}")
            _sign_checked = True


def _gp_integrand(cf: CharFnDescriptor, x: float):
    if cf.symmetric:
        def g(t):
            return np.real(cf(t)) * np.sin(t * x) / t
    else:
        def g(t):
            return -np.imag(cf(t) * np.exp(-1j * t * x)) / t
    return g


def _gp_integral(cf: CharFnDescriptor, x: float, cfg: QuadratureConfig) -> float:
    """Gil-Pelaez ``F(x)`` without the one-off sign check."""
    if cf.symmetric and x == 0:
        return 0.5
    g = _gp_integrand(cf, x)
    env = lambda t: np.abs(cf(t)) / np.maximum(t, 1.0)
    T = truncation_point(env, cfg.truncation, t_start=0.25, t_max=1e15, relative=False)
    ax = abs(x)
    if ax > 0:
        half = math.pi / ax
    else:
        half = math.inf
    if np.isfinite(T):
        # half-period panels when oscillation dominates, uniform otherwise
        if ax > 1 and T / half > 16:
            npan = int(math.ceil(T / half))
            if npan > cfg.max_panels:
                return _gp_accelerated(g, half, cfg)
            edges = np.arange(npan + 1) * half
        else:
            step = min(half, T / 64)
            edges = np.concatenate([[0.0], np.arange(1, int(math.ceil(T / step)) + 1) * step])
        near = np.geomspace(edges[1] * 1e-8, edges[1], 9)[:-1]
        edges = np.concatenate([[0.0], near, edges[1:]])
        val, _ = integrate(g, edges, cfg)
    elif ax > 0:
        return _gp_accelerated(g, half, cfg)
    else:
        raise NonConvergenceError(f"{cf.name}: characteristic function does not decay")
    return 0.5 + val / math.pi


def _gp_accelerated(g, half: float, cfg: QuadratureConfig, direct: int = 400, extra: int = 48) -> float:
    edges = np.arange(direct + 1) * half
    near = np.geomspace(half * 1e-8, half, 9)[:-1]
    head, _ = integrate(g, np.concatenate([[0.0], near, edges[1:]]), cfg)
    tail_panels = panel_integrals(g, np.arange(direct, direct + extra + 1) * half, cfg)
    tail, tail_err = euler_sum(tail_panels)
    if tail_err > max(cfg.abs_tol, 1e-10):
        raise NonConvergenceError(f"Euler-accelerated Gil-Pelaez tail did not settle (err {tail_err:.2g})")
    return 0.5 + (head + tail) / math.pi


def gil_pelaez_cdf(cf: CharFnDescriptor, x, cfg: QuadratureConfig = DEFAULT):
    """CDF at ``x`` (scalar or array) from the characteristic function."""
    _sign_self_check(cfg)
    xs = np.asarray(x, dtype=float)
    if xs.ndim == 0:
        return _gp_integral(cf, float(xs), cfg)
    return np.array([_gp_integral(cf, float(v), cfg) for v in xs.ravel()]).reshape(xs.shape)


def zero_location(cf: CharFnDescriptor, cfg: QuadratureConfig = DEFAULT) -> float:
    """``u0`` with ``w(u0) = 0``; exactly 1/2 for symmetric laws."""
    if cf.symmetric:
        return 0.5
    _sign_self_check(cfg)
    return _gp_integral(cf, 0.0, cfg)


def density(cf: CharFnDescriptor, x: float, cfg: QuadratureConfig = DEFAULT) -> float:
    """``f(x) = (1/pi) int_0^inf Re[phi(t) e^{-itx}] dt``."""
    if cf.symmetric:
        g = lambda t: np.real(cf(t)) * np.cos(t * x)
    else:
        g = lambda t: np.real(cf(t) * np.exp(-1j * t * x))
    env = lambda t: np.abs(cf(t))
    T = truncation_point(env, cfg.truncation, t_start=0.25, relative=False)
    if not np.isfinite(T):
        raise NonConvergenceError(f"{cf.name}: density integral does not converge")
    step = T / 64 if x == 0 else min(math.pi / abs(x), T / 64)
    n = int(math.ceil(T / step))
    edges = np.concatenate([[0.0], np.geomspace(step * 1e-8, step, 9)[:-1], np.arange(1, n + 1) * step])
    return integrate(g, edges, cfg)[0] / math.pi

"""Catalog of characteristic functions.

Each descriptor carries a vectorized ``eval`` (real ``t`` to ``phi(t)``),
symmetry and moment-existence metadata, and where available a closed form
for the normalized even moments

    E_k = (1 / 2 pi) * int t^{2k} phi(t) dt.

``moment_order`` is the largest power ``j`` for which ``int |t|^j |phi|``
converges, i.e. the highest density derivative at the origin that exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np

from . import special
from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class CharFnDescriptor:
    name: str
    params: dict
    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    symmetric: bool
    moment_order: float = math.inf
    closed_moments: Optional[Callable[[int], float]] = field(default=None, repr=False)
    closed_moments_mp: Optional[Callable[[int], object]] = field(default=None, repr=False)
    eval_mp: Optional[Callable] = field(default=None, repr=False)

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))

    def spec(self) -> dict:
        return {"dist": self.name, **self.params}

    def scaled(self, c: float) -> "CharFnDescriptor":
        """Descriptor of ``phi(c t)``, the law of ``c X``."""
        if c <= 0:
            raise DomainError("scale factor must be positive")
        base = self

        def ev(t):
            return base.eval(c * np.asarray(t, dtype=float))

        cm = cmp = evm = None
        if base.eval_mp is not None:
            evm = lambda t: base.eval_mp(mpmath.mpf(c) * t)
        if base.closed_moments is not None:
            cm = lambda k: base.closed_moments(k) / c ** (2 * k + 1)
        if base.closed_moments_mp is not None:
            cmp = lambda k: base.closed_moments_mp(k) / mpmath.mpf(c) ** (2 * k + 1)
        return CharFnDescriptor(
            name=base.name,
            params={**base.params, "scale": base.params.get("scale", 1.0) * c},
            eval=ev,
            symmetric=base.symmetric,
            moment_order=base.moment_order,
            closed_moments=cm,
            closed_moments_mp=cmp,
            eval_mp=evm,
        )


def make_gaussian(mu: float = 0.0) -> CharFnDescriptor:
    mu = float(mu)

    def ev(t):
        if mu == 0.0:
            return np.exp(-0.5 * t * t)
        return np.exp(1j * mu * t - 0.5 * t * t)

    cm = cmp = None
    if mu == 0.0:
        cm = lambda k: 2 ** (k - 0.5) * math.gamma(k + 0.5) / math.pi
        cmp = lambda k: mpmath.mpf(2) ** (k - mpmath.mpf(1) / 2) * mpmath.gamma(k + mpmath.mpf(1) / 2) / mpmath.pi

    def evm(t):
        return mpmath.exp(1j * mpmath.mpf(mu) * t - t * t / 2)

    return CharFnDescriptor("gaussian", {"mu": mu}, ev, mu == 0.0, math.inf, cm, cmp, evm)


def _student_phi(n: float):
    nu = n / 2.0
    const = 2 ** (1 - nu) * n ** (n / 4.0) / math.gamma(nu)
    rn = math.sqrt(n)

    def ev(t):
        t = np.abs(np.asarray(t, dtype=float))
        z = rn * t
        out = np.ones_like(t)
        pos = z > 0
        zp = z[pos]
        with np.errstate(over="ignore", under="ignore"):
            # |t|^nu K_nu(sqrt(n)|t|) with the exp scaling applied in log space
            val = const * t[pos] ** nu * special.kve(nu, zp) * np.exp(-zp)
        small = zp < 1e-6
        if nu > 1 and small.any():
            # z^nu K_nu(z) -> 2^{nu-1} Gamma(nu) (1 - z^2 / (4 (nu - 1)))
            zs = zp[small]
            val[small] = 1.0 - zs * zs / (4.0 * (nu - 1.0))
        out[pos] = val
        return out

    return ev


def make_student(n: float) -> CharFnDescriptor:
    n = float(n)
    if not n > 0:
        raise DomainError(f"Student degrees of freedom must be positive, got {n}")

    def cm(k):
        return (
            4**k * n ** (-k - 0.5) * math.exp(math.lgamma(k + 0.5) + math.lgamma(k + n / 2 + 0.5) - math.lgamma(n / 2))
            / math.pi
        )

    def cmp(k):
        nn = mpmath.mpf(n)
        half = mpmath.mpf(1) / 2
        return (
            mpmath.mpf(4) ** k * nn ** (-k - half) * mpmath.gamma(k + half) * mpmath.gamma(k + nn / 2 + half)
            / (mpmath.pi * mpmath.gamma(nn / 2))
        )

    def evm(t):
        t = abs(t)
        if t == 0:
            return mpmath.mpf(1)
        nn = mpmath.mpf(n)
        return (mpmath.mpf(2) ** (1 - nn / 2) * nn ** (nn / 4) * t ** (nn / 2)
                * mpmath.besselk(nn / 2, mpmath.sqrt(nn) * t) / mpmath.gamma(nn / 2))

    return CharFnDescriptor("student", {"n": n}, _student_phi(n), True, math.inf, cm, cmp, evm)


def make_stable_symmetric(alpha: float) -> CharFnDescriptor:
    alpha = float(alpha)
    if not 0 < alpha <= 2:
        raise DomainError(f"stable index alpha must lie in (0, 2], got {alpha}")

    def ev(t):
        return np.exp(-np.abs(t) ** alpha)

    cm = lambda k: math.exp(math.lgamma((2 * k + 1) / alpha)) / (math.pi * alpha)

    def cmp(k):
        a = mpmath.mpf(alpha)
        return mpmath.gamma((2 * k + 1) / a) / (mpmath.pi * a)

    evm = lambda t: mpmath.exp(-abs(t) ** mpmath.mpf(alpha))
    return CharFnDescriptor("stable", {"alpha": alpha}, ev, True, math.inf, cm, cmp, evm)


def make_stable(alpha: float, beta: float = 0.0) -> CharFnDescriptor:
    """Stable law ``exp(-|t|^a (1 - i b sign(t) tan(pi a / 2)))``.

    Only the symmetric case gets a quantile series; skewed laws are provided
    for CDF and zero-location work.
    """
    beta = float(beta)
    if beta == 0.0:
        return make_stable_symmetric(alpha)
    alpha = float(alpha)
    if not 0 < alpha < 2 or alpha == 1:
        raise DomainError(f"skewed stable needs alpha in (0, 1) or (1, 2), got {alpha}")
    if not -1 <= beta <= 1:
        raise DomainError(f"stable skewness must lie in [-1, 1], got {beta}")
    big_phi = math.tan(math.pi * alpha / 2)

    def ev(t):
        t = np.asarray(t, dtype=float)
        ta = np.abs(t) ** alpha
        return np.exp(-ta * (1 - 1j * beta * np.sign(t) * big_phi))

    def evm(t):
        a = mpmath.mpf(alpha)
        return mpmath.exp(-abs(t) ** a * (1 - 1j * beta * mpmath.sign(t) * mpmath.tan(mpmath.pi * a / 2)))

    return CharFnDescriptor("stable", {"alpha": alpha, "beta": beta}, ev, False, math.inf, eval_mp=evm)


def stable_zero_location(alpha: float, beta: float) -> float:
    """Closed-form ``u0`` for the skewed stable parametrization above."""
    return 0.5 - math.atan(beta * math.tan(math.pi * alpha / 2)) / (math.pi * alpha)


def make_sgh(lam: float, alpha: float, delta: float) -> CharFnDescriptor:
    lam, alpha, delta = float(lam), float(alpha), float(delta)
    if not alpha > 0:
        raise DomainError(f"SGH alpha must be positive, got {alpha}")
    if not delta > 0:
        raise DomainError(f"SGH delta must be positive, got {delta}")
    if not lam < 2:
        raise DomainError(f"SGH closed moments need lambda < 2, got {lam}")
    ad = alpha * delta
    k_ref = special.kve(lam, ad)

    def ev(t):
        t = np.asarray(t, dtype=float)
        p = np.sqrt(alpha * alpha + t * t)
        with np.errstate(under="ignore"):
            ratio = special.kve(lam, delta * p) / k_ref * np.exp(-(delta * p - ad))
        return (alpha / p) ** lam * ratio

    def cm(k):
        return (
            2 ** (k - 0.5) * math.gamma(k + 0.5) * (alpha / delta) ** (k + 0.5)
            * special.kv(0.5 + k - lam, ad) / (math.pi * special.kv(lam, ad))
        )

    def cmp(k):
        a, d, l = mpmath.mpf(alpha), mpmath.mpf(delta), mpmath.mpf(lam)
        half = mpmath.mpf(1) / 2
        return (
            mpmath.mpf(2) ** (k - half) * mpmath.gamma(k + half) * (a / d) ** (k + half)
            * mpmath.besselk(half + k - l, a * d) / (mpmath.pi * mpmath.besselk(l, a * d))
        )

    def evm(t):
        a, d, l = mpmath.mpf(alpha), mpmath.mpf(delta), mpmath.mpf(lam)
        p = mpmath.sqrt(a * a + t * t)
        return (a / p) ** l * mpmath.besselk(l, d * p) / mpmath.besselk(l, a * d)

    return CharFnDescriptor("sgh", {"lambda": lam, "alpha": alpha, "delta": delta}, ev, True, math.inf, cm, cmp, evm)


def sgh_slope(lam: float, alpha: float, delta: float) -> float:
    """``w'`` at the median, ``1 / f(0)``, from the closed density value."""
    ad = alpha * delta
    return math.sqrt(2 * math.pi * delta / alpha) * special.kv(lam, ad) / special.kv(lam - 0.5, ad)


def _s_coth_s(s):
    s = np.abs(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    small = s < 1e-4
    ss = s[small] ** 2
    out[small] = 1.0 + ss / 3.0 - ss * ss / 45.0
    big = ~small
    out[big] = s[big] / np.tanh(s[big])
    return out


def make_levy_area_p(r: float) -> CharFnDescriptor:
    """Time-scaled conditioned part of the Levy stochastic area."""
    r = float(r)
    if not r > 0:
        raise DomainError(f"Levy area radius r must be positive, got {r}")

    def ev(s):
        return np.exp(-0.5 * r * r * (_s_coth_s(s) - 1.0))

    def evm(s):
        s = abs(s)
        if s == 0:
            return mpmath.mpf(1)
        return mpmath.exp(-mpmath.mpf(r) ** 2 / 2 * (s * mpmath.coth(s) - 1))

    return CharFnDescriptor("levy-area-p", {"r": r}, ev, True, math.inf, eval_mp=evm)


def make_levy_area_loop(delta_t: float = 1.0) -> CharFnDescriptor:
    """Loop part ``z dt / sinh(z dt)`` (a logistic law with scale dt/pi)."""
    dt = float(delta_t)
    if not dt > 0:
        raise DomainError("delta_t must be positive")

    def ev(z):
        y = np.abs(np.asarray(z, dtype=float)) * dt
        out = np.ones_like(y)
        nz = y > 1e-8
        with np.errstate(over="ignore"):
            out[nz] = y[nz] / np.sinh(y[nz])
        out[nz & ~np.isfinite(out)] = 0.0
        return out

    def evm(z):
        y = abs(z) * dt
        return mpmath.mpf(1) if y == 0 else y / mpmath.sinh(y)

    return CharFnDescriptor("levy-area-loop", {"delta_t": dt}, ev, True, math.inf, eval_mp=evm)


_PROBE = np.concatenate([np.linspace(1e-3, 2.0, 41), np.geomspace(2.0, 200.0, 40)])


def make_custom(eval, symmetric: Optional[bool] = None, moment_order: float = math.inf,
                name: str = "custom", params: Optional[dict] = None,
                tol: float = 1e-12) -> CharFnDescriptor:
    """Wrap a user evaluator after probing normalization, bound and symmetry.

    ``symmetric=None`` lets the probe decide.
    """
    def ev(t):
        return np.asarray(eval(np.asarray(t, dtype=float)))

    at0 = complex(np.asarray(ev(np.zeros(1)))[0])
    if abs(at0 - 1) > tol:
        raise ValidationError(f"phi(0) = {at0}, expected 1")
    pos = ev(_PROBE).astype(complex)
    neg = ev(-_PROBE).astype(complex)
    if np.any(np.abs(pos) > 1 + tol) or np.any(np.abs(neg) > 1 + tol):
        raise ValidationError("|phi(t)| exceeds 1 on the probe grid")
    if np.max(np.abs(neg - np.conj(pos))) > 1e-10:
        raise ValidationError("phi(-t) != conj(phi(t)); not the transform of a real density")
    looks_symmetric = np.max(np.abs(pos.imag)) <= tol and np.max(np.abs(pos - neg)) <= tol
    if symmetric is None:
        symmetric = bool(looks_symmetric)
    elif symmetric and not looks_symmetric:
        raise ValidationError("phi declared symmetric but phi(-t) != phi(t) or phi is not real")
    if symmetric:
        inner = ev
        ev = lambda t: np.real(inner(t))
    return CharFnDescriptor(name, dict(params or {}), ev, bool(symmetric), moment_order)


def make_variance_gamma(lam: float, alpha: float = 1.0) -> CharFnDescriptor:
    """Symmetric variance gamma ``(a^2 / (a^2 + t^2))^lam``.

    Its transform decays like ``t^{-2 lam}`` so only derivatives of order
    ``j < 2 lam - 1`` exist at the origin.
    """
    lam, alpha = float(lam), float(alpha)
    if not lam > 0 or not alpha > 0:
        raise DomainError("variance gamma needs lambda > 0 and alpha > 0")
    order = math.ceil(2 * lam - 1) - 1
    return make_custom(
        lambda t: (alpha * alpha / (alpha * alpha + t * t)) ** lam,
        symmetric=True,
        moment_order=max(order, -1),
        name="custom-vg",
        params={"lambda": lam, "alpha": alpha},
    )


_FACTORIES = {
    "gaussian": (make_gaussian, {"mu": 0.0}),
    "normal": (make_gaussian, {"mu": 0.0}),
    "student": (make_student, {}),
    "cauchy": (lambda: make_stable_symmetric(1.0), {}),
    "stable": (make_stable, {"beta": 0.0}),
    "sgh": (make_sgh, {}),
    "levy-area-p": (make_levy_area_p, {}),
    "levy-area-loop": (make_levy_area_loop, {}),
    "custom-vg": (make_variance_gamma, {"alpha": 1.0}),
}

_ALIASES = {"lambda": "lam"}


def from_spec(spec: dict) -> CharFnDescriptor:
    """Build a descriptor from ``{"dist": name, **params}``."""
    spec = dict(spec)
    try:
        name = spec.pop("dist")
    except KeyError:
        raise DomainError("distribution spec needs a 'dist' field") from None
    if name not in _FACTORIES:
        raise DomainError(f"unknown distribution {name!r}; choose from {sorted(_FACTORIES)}")
    factory, defaults = _FACTORIES[name]
    scale = spec.pop("scale", None)
    kwargs = {**defaults, **{_ALIASES.get(k, k): v for k, v in spec.items()}}
    try:
        cf = factory(**kwargs)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {name}: {exc}") from None
    return cf if scale is None else cf.scaled(float(scale))

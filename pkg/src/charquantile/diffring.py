"""Exact differential-polynomial ring driving the quantile recurrence.

Elements are polynomials in a scalar ``x`` (the slope ``w'`` at the anchor)
and in symbols ``B_m``, where ``B_m`` stands for the m-th ``w``-derivative of
the kernel integral ``P_2[w]`` evaluated at the anchor.  Differentiation in
``w`` sends ``B_m`` to ``B_{m+1}``.  Starting from ``P_2 = B_0`` the sequence

    P_{n+1} = (n+1) x B_0 P_n + x^2 B_0 dP_n/dx + dP_n/dw

is generated with arbitrary-precision rational coefficients.

Monomials are stored as ``(xdeg, bfactors)`` with ``bfactors`` a sorted tuple
of symbol indices, so equal polynomials always have identical term maps.
"""

from __future__ import annotations

import gzip
import json
import math
import os
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import MissingSymbolError, ResourceLimitError

TERM_CAP = 5_000_000
CACHE_ENV = "CHARQUANTILE_CACHE"
FORMAT_VERSION = 2


class Monomial(NamedTuple):
    xdeg: int
    bfactors: tuple[int, ...]

    def __str__(self) -> str:
        return _format_monomial(self, "B")


def _format_monomial(mono, symbol: str) -> str:
    parts = []
    if mono[0] == 1:
        parts.append("x")
    elif mono[0] > 1:
        parts.append(f"x^{mono[0]}")
    run = {}
    for m in mono[1]:
        run[m] = run.get(m, 0) + 1
    for m, c in run.items():
        parts.append(f"{symbol}{m}" if c == 1 else f"{symbol}{m}^{c}")
    return "*".join(parts) or "1"


def _merge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


class DiffPoly:
    """Immutable sparse polynomial in ``x`` and the ``B``-symbols.

    ``symbol`` only affects printing; symmetric substitution reuses this type
    with ``symbol="E"`` for the normalized even moments.
    """

    __slots__ = ("_terms", "symbol")

    def __init__(self, terms: Mapping | Iterable = (), symbol: str = "B"):
        acc: dict[tuple, Rational] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, coeff in items:
            xdeg, bf = mono
            key = (int(xdeg), tuple(sorted(bf)))
            acc[key] = acc.get(key, 0) + coeff
        self._terms = {k: v for k, v in acc.items() if v != 0}
        self.symbol = symbol

    @classmethod
    def _raw(cls, terms: dict, symbol: str = "B") -> "DiffPoly":
        # caller guarantees canonical keys and no zero coefficients
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.symbol = symbol
        return obj

    @classmethod
    def constant(cls, c: Rational) -> "DiffPoly":
        return cls({(0, ()): c})

    @classmethod
    def x(cls) -> "DiffPoly":
        return cls({(1, ()): 1})

    @classmethod
    def b(cls, m: int) -> "DiffPoly":
        if m < 0:
            raise ValueError("B index must be non-negative")
        return cls({(0, (m,)): 1})

    @property
    def terms(self) -> dict[Monomial, Rational]:
        return {Monomial(*k): v for k, v in self._terms.items()}

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == DiffPoly.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        other = _coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return DiffPoly._raw(out, self.symbol)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({k: -v for k, v in self._terms.items()}, self.symbol)

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        return self + (-_coerce(other))

    def __mul__(self, other: "DiffPoly") -> "DiffPoly":
        other = _coerce(other)
        out: dict[tuple, Rational] = {}
        for (xa, ba), ca in self._terms.items():
            for (xb, bb), cb in other._terms.items():
                key = (xa + xb, _merge(ba, bb))
                out[key] = out.get(key, 0) + ca * cb
        return DiffPoly._raw({k: v for k, v in out.items() if v}, self.symbol)

    __rmul__ = __mul__

    def ddx(self) -> "DiffPoly":
        out = {(xd - 1, bf): xd * c for (xd, bf), c in self._terms.items() if xd}
        return DiffPoly._raw(out, self.symbol)

    def ddw(self) -> "DiffPoly":
        out: dict[tuple, Rational] = {}
        for (xd, bf), c in self._terms.items():
            _ddw_into(out, xd, bf, c)
        return DiffPoly._raw({k: v for k, v in out.items() if v}, self.symbol)

    def max_xdeg(self) -> int:
        return max((xd for xd, _ in self._terms), default=-1)

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (xd, bf), c in sorted(self._terms.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
            mono = _format_monomial((xd, bf), self.symbol)
            parts.append(f"{c}" if mono == "1" else f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _coerce(p) -> DiffPoly:
    if isinstance(p, DiffPoly):
        return p
    return DiffPoly.constant(p)


def _ddw_into(out: dict, xd: int, bf: tuple[int, ...], c) -> None:
    # product rule: each distinct index m with multiplicity k contributes
    # k * (bf with one m -> m+1); replacing the last m keeps the tuple sorted
    n = len(bf)
    i = 0
    while i < n:
        m = bf[i]
        j = i + 1
        while j < n and bf[j] == m:
            j += 1
        key = (xd, bf[: j - 1] + (m + 1,) + bf[j:])
        out[key] = out.get(key, 0) + (j - i) * c
        i = j


def add(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    return a + b


def mul(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    return a * b


def ddx(p: DiffPoly) -> DiffPoly:
    return p.ddx()


def ddw(p: DiffPoly) -> DiffPoly:
    return p.ddw()


def _step_terms(terms: dict, n: int, keep=None) -> dict:
    """One recurrence step on a raw term map.

    The first two recurrence terms land on the same monomial
    ``x^{d+1} B_0 * bf`` with combined weight ``(n + 1 + d)``.
    """
    out: dict[tuple, Rational] = {}
    get = out.get
    for (xd, bf), c in terms.items():
        key = (xd + 1, (0,) + bf)
        out[key] = get(key, 0) + (n + 1 + xd) * c
        _ddw_into(out, xd, bf, c)
    if keep is None:
        return {k: v for k, v in out.items() if v}
    return {k: v for k, v in out.items() if v and keep(k)}


def recurrence_step(p_n: DiffPoly, n: int) -> DiffPoly:
    """Return ``P_{n+1}`` given ``P_n``."""
    if n < 2:
        raise ValueError("recurrence starts at n = 2")
    return DiffPoly._raw(_step_terms(p_n._terms, n))


P2 = DiffPoly._raw({(0, (0,)): 1})

_sequence: list[DiffPoly] = [P2]  # _sequence[i] is P_{i+2}


def compute_p_sequence(n_max: int, term_cap: int = TERM_CAP) -> list[DiffPoly]:
    """``[P_2, ..., P_{n_max}]``, memoized across calls."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    while len(_sequence) < n_max - 1:
        n = len(_sequence) + 1
        nxt = _step_terms(_sequence[-1]._terms, n)
        if len(nxt) > term_cap:
            raise ResourceLimitError(
                f"P_{n + 1} has {len(nxt)} terms, above the cap of {term_cap}"
            )
        _sequence.append(DiffPoly._raw(nxt))
    return _sequence[: n_max - 1]


def clear_cache() -> None:
    del _sequence[1:]
    _symmetric.clear()


# ---------------------------------------------------------------------------
# substitution


def symmetric_substitute(p: DiffPoly) -> DiffPoly:
    """Apply ``B_{2j} -> 0`` and ``B_{2j+1} -> (-1)^j E_{j+1}``.

    The result is a polynomial in ``x`` and ``E_k`` (printed with symbol E).
    """
    out: dict[tuple, Rational] = {}
    for (xd, bf), c in p._terms.items():
        e = _to_e(bf)
        if e is None:
            continue
        sign, idx = e
        key = (xd, idx)
        out[key] = out.get(key, 0) + sign * c
    return DiffPoly._raw({k: v for k, v in out.items() if v}, "E")


def _to_e(bf: tuple[int, ...]):
    sign = 1
    idx = []
    for m in bf:
        if m % 2 == 0:
            return None
        j = m // 2
        if j % 2:
            sign = -sign
        idx.append(j + 1)
    return sign, tuple(idx)


def substitute(p: DiffPoly, bvals, x):
    """Numeric value of ``p`` with ``B_m = bvals[m]`` and the given ``x``.

    ``bvals`` is any mapping or sequence indexed by symbol number.  Works with
    floats or mpmath numbers; exact coefficients are converted at the end of
    each monomial product.
    """
    total = 0
    xpow: dict[int, object] = {}
    for (xd, bf), c in p._terms.items():
        term = xpow.get(xd)
        if term is None:
            term = xpow[xd] = x**xd
        for m in bf:
            try:
                term = term * bvals[m]
            except (KeyError, IndexError):
                raise MissingSymbolError(f"no value supplied for symbol {p.symbol}{m}") from None
        if isinstance(c, Fraction):
            total += term * c.numerator / c.denominator
        else:
            total += term * c
    return total


# ---------------------------------------------------------------------------
# symmetric values to high order


_symmetric: dict[int, DiffPoly] = {}


def symmetric_p_values(n_max: int, term_cap: int = TERM_CAP) -> dict[int, DiffPoly]:
    """Symmetric-substituted ``p_n = P_n[x, 0]`` for odd ``3 <= n <= n_max``.

    The full ``P_n`` grows combinatorially (about 4e6 terms at n = 71), so
    terms that can no longer reach an all-odd monomial by ``n_max`` are
    dropped during iteration: a term with ``e`` even-index factors needs at
    least ``e`` further ``d/dw`` steps.  Entries already available from
    :func:`compute_p_sequence` are used directly.
    """
    missing = [n for n in range(3, n_max + 1, 2) if n not in _symmetric]
    if not missing:
        return {n: _symmetric[n] for n in range(3, n_max + 1, 2)}
    if n_max <= len(_sequence) + 1:
        for n in missing:
            _symmetric[n] = symmetric_substitute(_sequence[n - 2])
    else:
        target = max(missing)

        def keep_for(n):
            budget = target - n

            def keep(key):
                return sum(1 for m in key[1] if not m & 1) <= budget

            return keep

        terms = P2._terms
        for n in range(2, target):
            terms = _step_terms(terms, n, keep_for(n + 1))
            if len(terms) > term_cap:
                raise ResourceLimitError(
                    f"pruned P_{n + 1} has {len(terms)} terms, above the cap of {term_cap}"
                )
            if (n + 1) % 2 and (n + 1) not in _symmetric:
                _symmetric[n + 1] = symmetric_substitute(DiffPoly._raw(terms))
    return {n: _symmetric[n] for n in range(3, n_max + 1, 2)}


# ---------------------------------------------------------------------------
# serialization


def _hex(c) -> str:
    c = Fraction(c)
    h = format(c.numerator, "x")
    return h if c.denominator == 1 else f"{h}/{c.denominator:x}"


def _unhex(h: str):
    if "/" in h:
        num, den = h.split("/")
        return Fraction(int(num, 16), int(den, 16))
    return int(h, 16)


def _poly_to_json(p: DiffPoly) -> dict:
    """Packed form: hex coefficients, x-degrees, and one character per factor.

    Factor index ``m`` is stored as ``chr(48 + m)``, so a monomial's factors
    form one short string; monomials are separated by spaces.
    """
    items = sorted(p._terms.items())
    return {
        "c": ",".join(_hex(c) for _, c in items),
        "x": [xd for (xd, _), _ in items],
        "f": " ".join("".join(chr(48 + m) for m in bf) for (_, bf), _ in items),
    }


def _poly_from_json(doc: dict, symbol: str) -> DiffPoly:
    if not doc["x"]:
        return DiffPoly._raw({}, symbol)
    coeffs = [_unhex(h) for h in doc["c"].split(",")]
    try:
        # one byte per factor while indices stay below 208
        facs = [tuple(b - 48 for b in f.encode("latin-1")) for f in doc["f"].split(" ")]
    except UnicodeEncodeError:
        facs = [tuple(ord(ch) - 48 for ch in f) for f in doc["f"].split(" ")]
    return DiffPoly._raw(dict(zip(zip(doc["x"], facs), coeffs)), symbol)


def dump_sequence(seq: Sequence[DiffPoly], path: str | os.PathLike) -> None:
    doc = {
        "format": "charquantile-p-sequence",
        "version": FORMAT_VERSION,
        "entries": [{"n": i + 2, "terms": _poly_to_json(p)} for i, p in enumerate(seq)],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")))


def load_sequence(path: str | os.PathLike) -> list[DiffPoly]:
    doc = json.loads(_read_text(Path(path)))
    if doc.get("format") != "charquantile-p-sequence" or doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: not a version-{FORMAT_VERSION} P-sequence document")
    entries = sorted(doc["entries"], key=lambda e: e["n"])
    if [e["n"] for e in entries] != list(range(2, len(entries) + 2)):
        raise ValueError(f"{path}: P-sequence entries are not contiguous from n = 2")
    return [_poly_from_json(e["terms"], "B") for e in entries]


def dump_symmetric(values: Mapping[int, DiffPoly], path: str | os.PathLike) -> None:
    doc = {
        "format": "charquantile-symmetric-p",
        "version": FORMAT_VERSION,
        "entries": [{"n": n, "terms": _poly_to_json(p)} for n, p in sorted(values.items())],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")))


def _read_text(path: Path) -> str:
    if path.suffix == ".gz":
        with gzip.open(path, "rt") as fh:
            return fh.read()
    return path.read_text()


def load_symmetric(path: str | os.PathLike) -> dict[int, DiffPoly]:
    doc = json.loads(_read_text(Path(path)))
    if doc.get("format") != "charquantile-symmetric-p" or doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: not a version-{FORMAT_VERSION} symmetric p document")
    return {e["n"]: _poly_from_json(e["terms"], "E") for e in doc["entries"]}


def cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None


PACKAGED_SYMMETRIC = Path(__file__).parent / "data" / "symmetric_p_71.json.gz"
PACKAGED_SYMMETRIC_MAX = 71


def load_or_compute_symmetric(n_max: int) -> dict[int, DiffPoly]:
    """Symmetric p-values from memory, the shipped table, the cache dir, or fresh.

    The shipped table holds p_3 .. p_71 as produced by
    :func:`symmetric_p_values`; regenerate it with ``charquantile pcache``.
    """
    if all(n in _symmetric for n in range(3, n_max + 1, 2)):
        return symmetric_p_values(n_max)
    if n_max <= PACKAGED_SYMMETRIC_MAX and PACKAGED_SYMMETRIC.exists():
        _symmetric.update(load_symmetric(PACKAGED_SYMMETRIC))
        return symmetric_p_values(n_max)
    d = cache_dir()
    if d is not None:
        path = d / f"symmetric_p_{n_max}.json"
        if path.exists():
            _symmetric.update(load_symmetric(path))
            return symmetric_p_values(n_max)
        vals = symmetric_p_values(n_max)
        d.mkdir(parents=True, exist_ok=True)
        dump_symmetric(vals, path)
        return vals
    return symmetric_p_values(n_max)


def load_or_compute_sequence(n_max: int) -> list[DiffPoly]:
    if len(_sequence) >= n_max - 1:
        return compute_p_sequence(n_max)
    d = cache_dir()
    if d is not None:
        path = d / f"p_sequence_{n_max}.json"
        if path.exists():
            seq = load_sequence(path)
            if len(seq) > len(_sequence):
                _sequence[:] = seq
            return compute_p_sequence(n_max)
        seq = compute_p_sequence(n_max)
        d.mkdir(parents=True, exist_ok=True)
        dump_sequence(seq, path)
        return seq
    return compute_p_sequence(n_max)


def leading_coefficient(n: int) -> int:
    """Coefficient of ``x^{n-2} B_0^{n-1}`` in ``P_n``, namely ``(2n-3)!!``."""
    return math.prod(range(1, 2 * n - 2, 2))

"""Accuracy diagnostics: round-trip error, estimated quantile error, scans.

    RTE(u) = F(w(u)) - u
    EQE(u) = RTE(u) / f(w(u))

EQE is the Newton correction to ``w(u)``.  In the central region ``f`` comes
from ``1 / w'(u)`` of the series; past the tail join the series derivative
is meaningless, so ``f`` is a centred difference of the Gil-Pelaez CDF.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .charfns import CharFnDescriptor
from .errors import DomainError, TableParseError
from .moments import density, gil_pelaez_cdf
from .quadrature import DEFAULT, QuadratureConfig
from .series import eval_derivative
from .tails import CompositeQuantile, eval_quantile


@dataclass
class DiagnosticsReport:
    grid: np.ndarray
    w: np.ndarray
    rte: np.ndarray
    eqe: np.ndarray
    sub_range: tuple
    runtime: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.grid)
        if not all(len(a) == n for a in (self.w, self.rte, self.eqe)):
            raise ValueError("report arrays must have equal length")
        lo, hi = self.sub_range
        if not 0 < lo <= hi < 1:
            raise ValueError("sub-range must lie inside (0, 1)")

    def _mask(self):
        lo, hi = self.sub_range
        return (self.grid >= lo) & (self.grid <= hi)

    @property
    def max_abs_rte(self) -> float:
        m = self._mask()
        return float(np.max(np.abs(self.rte[m]))) if m.any() else math.nan

    @property
    def max_abs_eqe(self) -> float:
        m = self._mask()
        return float(np.max(np.abs(self.eqe[m]))) if m.any() else math.nan

    def to_csv(self, columns: Sequence[str] = ("u", "w", "rte", "eqe")) -> str:
        data = {"u": self.grid, "w": self.w, "rte": self.rte, "eqe": self.eqe,
                **{k: v for k, v in self.meta.items() if isinstance(v, np.ndarray)}}
        buf = io.StringIO()
        for k, v in self.meta.items():
            if not isinstance(v, np.ndarray):
                buf.write(f"# {k}: {v if isinstance(v, str) else json.dumps(v, sort_keys=True)}\n")
        buf.write(f"# max_abs_rte on [{self.sub_range[0]}, {self.sub_range[1]}]: {self.max_abs_rte:.6g}\n")
        buf.write(f"# runtime_s: {self.runtime:.3f}\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(columns)
        for row in zip(*(data[c] for c in columns)):
            wr.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _check_grid(grid) -> np.ndarray:
    g = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any((g <= 0) | (g >= 1)):
        raise DomainError("diagnostic grid must lie strictly inside (0, 1)")
    return g


def tail_density(cf: CharFnDescriptor, x: float, cfg: QuadratureConfig = DEFAULT) -> float:
    h = max(1e-6, 1e-6 * abs(x))
    return (gil_pelaez_cdf(cf, x + h, cfg) - gil_pelaez_cdf(cf, x - h, cfg)) / (2 * h)


def _in_central(q: CompositeQuantile, u: np.ndarray) -> np.ndarray:
    tm = q.upper_tail
    if tm is None:
        return np.ones(u.shape, dtype=bool)
    return np.abs(2 * u - 1) <= 2 * tm.u_switch - 1


def round_trip(q: CompositeQuantile, cf: CharFnDescriptor, grid, cfg: QuadratureConfig = DEFAULT,
               sub_range: Optional[tuple] = None) -> DiagnosticsReport:
    t0 = time.perf_counter()
    u = _check_grid(grid)
    w = np.atleast_1d(np.asarray(eval_quantile(q, u), dtype=float))
    F = np.atleast_1d(gil_pelaez_cdf(cf, w, cfg))
    rte = F - u
    f = np.empty_like(u)
    central = _in_central(q, u)
    if central.any():
        f[central] = 1.0 / np.atleast_1d(eval_derivative(q.central, u[central]))
    for i in np.flatnonzero(~central):
        f[i] = tail_density(cf, w[i], cfg)
    eqe = rte / f
    rng = sub_range or (float(u.min()), float(u.max()))
    return DiagnosticsReport(u, w, rte, eqe, rng, time.perf_counter() - t0,
                             {"dist": cf.spec(), "order": q.central.nterms})


def newton_step(cf: CharFnDescriptor, w: float, u: float, cfg: QuadratureConfig = DEFAULT) -> float:
    """One Newton update of ``w`` towards ``F(w) = u`` using the quadrature density."""
    return w - (gil_pelaez_cdf(cf, w, cfg) - u) / density(cf, w, cfg)


# ---------------------------------------------------------------------------
# reference scans


def parse_reference_table(source: Union[str, Path, io.TextIOBase], column: int = 1,
                          u_column: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Read ``u`` and reference quantiles from a whitespace-separated table.

    Lines starting with ``#`` or ``%`` are comments; leading rows that do not
    parse as numbers are treated as headers.  ``column`` picks the quantile
    column (for files listing several parameter values side by side).
    """
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise TableParseError(f"cannot read reference table {source}: {exc}") from exc
    else:
        text = source.read()
    us, xs = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        parts = s.replace(",", " ").split()
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            if us:
                raise TableParseError(f"line {lineno}: non-numeric row after data: {s!r}") from None
            continue  # header row
        if max(column, u_column) >= len(vals):
            raise TableParseError(f"line {lineno}: expected at least {max(column, u_column) + 1} columns")
        us.append(vals[u_column])
        xs.append(vals[column])
    if not us:
        raise TableParseError("reference table has no data rows")
    u = np.array(us)
    if np.any((u <= 0) | (u >= 1)):
        raise TableParseError("reference table probabilities must lie in (0, 1)")
    return u, np.array(xs)


def reference_scan(q: CompositeQuantile, oracle: Union[Callable, tuple], grid=None,
                   sub_range: Optional[tuple] = None) -> DiagnosticsReport:
    """Relative error of ``q`` against reference quantiles.

    ``oracle`` is either a callable ``u -> w_ref(u)`` (used on ``grid``) or a
    ``(u, w_ref)`` pair as returned by ``parse_reference_table``.  The report
    carries ``rel`` and ``log10_rel`` columns; ``rte``/``eqe`` hold the
    signed quantile difference ``w - w_ref`` for uniformity.
    """
    t0 = time.perf_counter()
    if callable(oracle):
        u = _check_grid(grid)
        ref = np.atleast_1d(np.asarray(oracle(u), dtype=float))
    else:
        u, ref = (np.asarray(a, dtype=float) for a in oracle)
        u = _check_grid(u)
        if grid is not None:
            raise DomainError("grid is implied by a tabulated oracle")
    w = np.atleast_1d(np.asarray(eval_quantile(q, u), dtype=float))
    diff = w - ref
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(ref != 0, np.abs(diff / ref), np.abs(diff))
        log10 = np.log10(np.maximum(rel, 1e-17))
    rng = sub_range or (float(u.min()), float(u.max()))
    return DiagnosticsReport(u, w, diff, diff, rng, time.perf_counter() - t0,
                             {"rel": rel, "log10_rel": log10})


def max_rel(report: DiagnosticsReport, lo: float, hi: float) -> float:
    m = (report.grid >= lo) & (report.grid <= hi)
    rel = report.meta["rel"][m]
    return float(np.max(rel)) if rel.size else math.nan

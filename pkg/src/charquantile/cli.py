"""Command-line interface.

    charquantile series stable --alpha 1.5 --terms 35
    charquantile u0 gaussian --mu 1
    charquantile quantile cauchy --u 0.75
    charquantile sample stable --alpha 1.5 --n 1000 --seed 7 --out draws.csv
    charquantile diagnose stable --alpha 1 --grid-start 0.1 --grid-end 0.9
    charquantile codegen stable --alpha 1.5 --lang c --digits 24
    charquantile pcache --n-max 71

Exit codes: 0 success, 2 domain or numerical error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import codegen, diagnostics, diffring, sampler
from .charfns import from_spec
from .errors import CharQuantileError
from .moments import zero_location
from .quadrature import DEFAULT, QuadratureConfig
from .series import DEFAULT_DPS, DEFAULT_TERMS, build_series
from .tails import composite_for, eval_quantile

log = logging.getLogger("charquantile")

EXIT_OK, EXIT_MATH, EXIT_IO = 0, 2, 3

_PARAM_FLAGS = {
    "alpha": float, "beta": float, "mu": float, "n": float, "lambda": float,
    "delta": float, "r": float, "delta_t": float, "scale": float,
}


def _add_dist_args(p: argparse.ArgumentParser, skip=()) -> None:
    p.add_argument("dist", nargs="?", help="distribution name (gaussian, cauchy, stable, student, sgh, "
                                            "levy-area-p, levy-area-loop, custom-vg)")
    p.add_argument("--spec", help="distribution as JSON, inline or a file path")
    for name, typ in _PARAM_FLAGS.items():
        if name not in skip:
            p.add_argument("--" + name.replace("_", "-"), dest="p_" + name, type=typ, default=None)
    p.add_argument("--df", dest="p_df", type=float, default=None, help="Student degrees of freedom (same as --n)")
    p.add_argument("--config", help="JSON file overriding quadrature settings")


def _dist_spec(args) -> dict:
    if args.spec:
        text = args.spec
        if not text.lstrip().startswith("{"):
            text = Path(text).read_text()
        spec = json.loads(text)
    else:
        if not args.dist:
            raise CharQuantileError("a distribution name or --spec is required")
        spec = {"dist": args.dist}
    for name in _PARAM_FLAGS:
        v = getattr(args, "p_" + name, None)
        if v is not None:
            spec[name] = v
    if getattr(args, "p_df", None) is not None:
        spec["n"] = args.p_df
    if isinstance(spec.get("n"), float) and spec["n"].is_integer():
        spec["n"] = int(spec["n"])
    if spec.get("dist") == "cauchy":
        spec = {"dist": "stable", "alpha": 1.0, **{k: v for k, v in spec.items() if k != "dist"}}
    return spec


def _config(args) -> QuadratureConfig:
    if not getattr(args, "config", None):
        return DEFAULT
    doc = json.loads(Path(args.config).read_text())
    known = {f.name for f in dataclasses.fields(QuadratureConfig)}
    unknown = set(doc) - known
    if unknown:
        raise CharQuantileError(f"unknown quadrature settings: {sorted(unknown)}")
    return dataclasses.replace(DEFAULT, **doc)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _series(args, cfg):
    cf = from_spec(_dist_spec(args))
    return cf, build_series(cf, terms=args.terms, cfg=cfg, dps=args.dps or None)


def cmd_series(args) -> int:
    cfg = _config(args)
    _, cs = _series(args, cfg)
    _emit(codegen.emit_coeff_json(cs).text, args.out)
    return EXIT_OK


def cmd_u0(args) -> int:
    cf = from_spec(_dist_spec(args))
    print(repr(zero_location(cf, _config(args))))
    return EXIT_OK


def cmd_quantile(args) -> int:
    cfg = _config(args)
    _, cs = _series(args, cfg)
    q = composite_for(cs, tail=None if args.tail else False)
    for u in args.u:
        print(repr(float(eval_quantile(q, u))))
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = _dist_spec(args)
    if spec.get("dist") == "levy-area":
        batch = sampler.sample_levy_area(spec["r"], spec.get("delta_t", 1.0), args.n_draws, args.seed, args.terms)
    else:
        cf = from_spec(spec)
        q = composite_for(build_series(cf, terms=args.terms, cfg=_config(args), dps=args.dps or None))
        batch = sampler.sample(q, args.n_draws, args.seed)
    lines = [f"# dist: {json.dumps(batch.dist, sort_keys=True)}", f"# seed: {batch.seed}", f"# n: {batch.n}"]
    lines += [repr(float(v)) for v in batch.values]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg = _config(args)
    cf, cs = _series(args, cfg)
    q = composite_for(cs)
    if args.oracle:
        table = diagnostics.parse_reference_table(args.oracle, column=args.column)
        rep = diagnostics.reference_scan(q, table)
        text = rep.to_csv(("u", "w", "rel", "log10_rel"))
    else:
        grid = np.linspace(args.grid_start, args.grid_end, args.grid_n)
        rep = diagnostics.round_trip(q, cf, grid, cfg)
        text = rep.to_csv()
    _emit(text, args.out)
    return EXIT_OK


def cmd_codegen(args) -> int:
    cfg = _config(args)
    _, cs = _series(args, cfg)
    if args.lang == "c":
        code = codegen.emit_horner_c(cs, digits=args.digits, name=args.name)
    elif args.lang == "expr":
        code = codegen.emit_expression(cs, digits=args.digits)
    else:
        code = codegen.emit_coeff_json(cs)
    _emit(code.text, args.out)
    return EXIT_OK


def cmd_pcache(args) -> int:
    if args.full:
        diffring.load_or_compute_sequence(args.n_max)
    else:
        diffring.load_or_compute_symmetric(args.n_max)
    if args.out:
        p = Path(args.out)
        if args.full:
            diffring.dump_sequence(diffring.load_or_compute_sequence(args.n_max), p)
        else:
            diffring.dump_symmetric(diffring.load_or_compute_symmetric(args.n_max), p)
    where = diffring.cache_dir() or "memory only (set CHARQUANTILE_CACHE to persist)"
    print(f"recurrence polynomials to order {args.n_max}: {where}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charquantile", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def series_parser(name, func, help_, skip=()):
        p = sub.add_parser(name, help=help_)
        _add_dist_args(p, skip)
        p.add_argument("--terms", type=int, default=DEFAULT_TERMS)
        p.add_argument("--dps", type=int, default=DEFAULT_DPS, help="mpmath digits for coefficients (0 = doubles)")
        p.add_argument("--out", help="output file (default stdout)")
        p.set_defaults(func=func)
        return p

    series_parser("series", cmd_series, "build a central series and write coefficient JSON")

    p = sub.add_parser("u0", help="print the zero-quantile location")
    _add_dist_args(p)
    p.set_defaults(func=cmd_u0)

    p = series_parser("quantile", cmd_quantile, "evaluate the composite quantile")
    p.add_argument("--u", type=float, nargs="+", required=True)
    p.add_argument("--no-tail", dest="tail", action="store_false", help="central series only")

    p = series_parser("sample", cmd_sample, "inverse-transform samples as CSV (Student: --df)", skip=("n",))
    p.add_argument("--n", dest="n_draws", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = series_parser("diagnose", cmd_diagnose, "round-trip or reference-table accuracy report")
    p.add_argument("--grid-start", type=float, default=0.1)
    p.add_argument("--grid-end", type=float, default=0.9)
    p.add_argument("--grid-n", type=int, default=81)
    p.add_argument("--oracle", help="reference table of u and quantile columns")
    p.add_argument("--column", type=int, default=1, help="quantile column in the reference table")

    p = series_parser("codegen", cmd_codegen, "emit source for a symmetric series")
    p.add_argument("--lang", choices=("c", "expr", "json"), default="c")
    p.add_argument("--digits", type=int, default=17)
    p.add_argument("--name", default="charquantile_w", help="C function name")

    p = sub.add_parser("pcache", help="compute and cache recurrence polynomials")
    p.add_argument("--n-max", type=int, default=diffring.PACKAGED_SYMMETRIC_MAX)
    p.add_argument("--full", action="store_true", help="full B-polynomials instead of the symmetric reduction")
    p.add_argument("--out", help="also write the table to this file")
    p.set_defaults(func=cmd_pcache)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except CharQuantileError as exc:
        print(f"charquantile: {exc.stage} stage failed: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ArithmeticError, ValueError) as exc:
        print(f"charquantile: numerical error: {exc}", file=sys.stderr)
        return EXIT_MATH
    except OSError as exc:
        print(f"charquantile: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

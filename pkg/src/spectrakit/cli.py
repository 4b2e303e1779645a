"""``spectrakit`` command line.

Two commands::

    spectrakit analyze FUNC KIND GRID      # or --func/--spectrum/--grid
    spectrakit verify SUITE [--matrix A]   # or --suite

``FUNC`` is a descriptor JSON file or the name of a corpus entry;
``--matrix`` takes a JSON file (``{"A": [[...]], "x_set": [...]}``) or an
inline diagonal such as ``diag(i,2i)``.

Exit codes: 0 success, 1 input error (including unknown suites), 2 more
than 10% of the grid Undecided because of quadrature failures, 3 a suite
assertion failed.  Undecided nodes alone never fail a run.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import corpus as cp
from . import func_model as fm
from . import report as rp
from . import semigroup_lab as sg
from . import spectra as sp
from . import suites as st
from .errors import SpectraError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_QUAD = 2
EXIT_ASSERT = 3
QUAD_FAIL_LIMIT = 0.10


class InputError(Exception):
    """Bad command-line input; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let ranges such as -3:3:0.05 through as values, like negative numbers
        self._negative_number_matcher = re.compile(r"^-\d+$|^-\d*\.\d+$|^-[\d.eE+-]*:[\d.eE:+-]*$")

    def error(self, message):  # argparse exits with 2 by default; usage errors are input errors
        self.print_usage(sys.stderr)
        raise InputError(message)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def parse_grid(text: str) -> sp.FrequencyGrid:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise InputError(f"grid must be MIN:MAX:STEP, got {text!r}") from None
    if not step > 0:
        raise InputError(f"grid step must be positive, got {step:g}")
    if not hi > lo:
        raise InputError(f"grid needs MIN < MAX, got {lo:g}:{hi:g}")
    if (hi - lo) / step > 1e6:
        raise InputError("grid has more than 10^6 points")
    return sp.FrequencyGrid(lo, hi, step)


def parse_a_ladder(text: str) -> tuple:
    """``MIN:MAX`` → the dyadic values ``2^-k`` in ``[MIN, MAX]``, largest first."""
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise InputError(f"a-ladder must be MIN:MAX, got {text!r}") from None
    if not 0 < lo <= hi:
        raise InputError(f"a-ladder needs 0 < MIN <= MAX, got {text!r}")
    ks = range(int(np.ceil(-np.log2(hi) - 1e-12)), int(np.floor(-np.log2(lo) + 1e-12)) + 1)
    ladder = tuple(2.0 ** -k for k in ks)
    if len(ladder) < 3:
        raise InputError(f"a-ladder {text!r} holds fewer than three dyadic values")
    return ladder


def parse_s_grid(text: str) -> tuple:
    try:
        vals = tuple(float(p) for p in text.replace(":", ",").split(",") if p.strip())
    except ValueError:
        raise InputError(f"s-grid must be comma-separated numbers, got {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise InputError("s-grid needs non-negative shifts")
    return vals


_TOL_KEYS = tuple(f.name for f in fields(sp.Thresholds))


def parse_tol(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in _TOL_KEYS:
            raise InputError(f"--tol expects KEY=VAL with KEY in {', '.join(_TOL_KEYS)}; got {item!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise InputError(f"--tol {key}: not a number: {val!r}") from None
        if not out[key] > 0:
            raise InputError(f"--tol {key} must be positive")
    return out


def load_func(spec: str) -> fm.FunctionDescriptor:
    """A descriptor JSON file, or the name of a corpus entry."""
    path = Path(spec)
    if path.is_file():
        try:
            return fm.from_json(path.read_text())
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read descriptor {spec}: {exc}") from None
    try:
        return cp.get_entry(spec).descriptor
    except KeyError:
        names = ", ".join(e.name for e in cp.standard_corpus())
        raise InputError(f"{spec!r} is neither a descriptor file nor a corpus entry ({names})") from None


_DIAG = re.compile(r"^\s*(?:A\s*=\s*)?diag\((.*)\)\s*$")


def _complex(tok: str) -> complex:
    t = tok.strip().replace(" ", "").replace("i", "j")
    if t.endswith("j") and t[:-1] in ("", "+", "-"):
        t = t[:-1] + "1j"
    return complex(t)


def load_matrix(spec: str) -> tuple[sg.SemigroupSystem, list]:
    """A matrix JSON file or an inline ``diag(...)``; returns ``(system, x_set)``."""
    path = Path(spec)
    if path.is_file():
        try:
            return sg.load_system(path)
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read matrix {spec}: {exc}") from None
    m = _DIAG.match(spec)
    if not m:
        raise InputError(f"--matrix expects a JSON file or diag(...), got {spec!r}")
    try:
        entries = [_complex(t) for t in m.group(1).split(",")]
    except ValueError:
        raise InputError(f"cannot parse diagonal entries in {spec!r}") from None
    system = sg.make_system(np.diag(entries), name=spec.strip())
    d = system.dim
    x_set = [np.eye(d)[k] for k in range(d)] + [np.ones(d)]
    return system, x_set


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--func", help="descriptor JSON file or corpus entry name")
    common.add_argument("--matrix", help="matrix JSON file or inline diag(...)")
    common.add_argument("--spectrum", metavar="KIND", choices=sp.KINDS, help="spectrum kind")
    common.add_argument("--grid", metavar="MIN:MAX:STEP")
    common.add_argument("--a-ladder", metavar="MIN:MAX", help="dyadic a-values 2^-k in [MIN, MAX]")
    common.add_argument("--s-grid", metavar="S1,S2,...", help="shifts for the uniform spectra")
    common.add_argument("--tol", action="append", metavar="KEY=VAL", help="threshold override (repeatable)")
    common.add_argument("--suite", metavar="NAME")
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int, default=0, help="first seed for generated systems")

    parser = _Parser(prog="spectrakit", description="Numerical spectra of bounded functions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", parents=[common], help="classify a grid for one spectrum kind")
    a.add_argument("func_pos", nargs="?", metavar="FUNC")
    a.add_argument("kind_pos", nargs="?", metavar="KIND")
    a.add_argument("grid_pos", nargs="?", metavar="GRID")
    v = sub.add_parser("verify", parents=[common], help="run a named invariant suite")
    v.add_argument("suite_pos", nargs="?", metavar="SUITE")
    return parser


def make_config(args) -> rp.RunConfig:
    if args.threads < 1:
        raise InputError("--threads must be at least 1")
    if args.command == "analyze":
        func = args.func or args.func_pos
        kind = args.spectrum or args.kind_pos
        grid = args.grid or args.grid_pos
        if kind is not None and kind not in sp.KINDS:
            raise InputError(f"unknown spectrum kind {kind!r}; expected one of {', '.join(sp.KINDS)}")
        if func is None and args.matrix is None:
            raise InputError("analyze needs --func or --matrix")
        if kind is None:
            raise InputError("analyze needs a spectrum kind (--spectrum)")
        if grid is None:
            raise InputError("analyze needs --grid MIN:MAX:STEP")
        suite = None
    else:
        func, kind, grid = args.func, args.spectrum, args.grid
        suite = args.suite or args.suite_pos
        if suite is None:
            raise InputError("verify needs a suite name")
    fmt = args.format or ("csv" if args.command == "analyze" else "json")
    return rp.RunConfig(command=args.command, func=func, matrix=args.matrix, spectrum=kind,
                        grid=grid, a_ladder=args.a_ladder,
                        s_grid=list(parse_s_grid(args.s_grid)) if args.s_grid else None,
                        tol=parse_tol(args.tol), suite=suite, out=args.out, threads=args.threads,
                        format=fmt, seed=args.seed)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _emit(text: str, config: rp.RunConfig) -> None:
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text)


def _thresholds(config: rp.RunConfig) -> sp.Thresholds | None:
    return sp.Thresholds(**config.tol) if config.tol else None


def cmd_analyze(config: rp.RunConfig) -> int:
    grid = parse_grid(config.grid)
    kw = {"thresholds": _thresholds(config), "threads": config.threads}
    if config.a_ladder:
        kw["a_ladder"] = parse_a_ladder(config.a_ladder)
    if config.s_grid:
        kw["s_grid"] = tuple(config.s_grid)
    runs = []
    if config.matrix:
        system, xs = load_matrix(config.matrix)
        for k, x in enumerate(xs):
            est = sp.estimate(sg.orbit(system, x), config.spectrum, grid, **kw)
            runs.append(({"system_id": system.name, "x_id": f"x{k}"}, est))
        columns = rp.SEMIGROUP_COLUMNS
    else:
        runs.append((None, sp.estimate(load_func(config.func), config.spectrum, grid, **kw)))
        columns = rp.BASE_COLUMNS
    if config.format == "json":
        payload = {"estimates": [{**(prefix or {}), **rp.estimate_payload(est)} for prefix, est in runs]}
        _emit(rp.write_json(payload, config), config)
    else:
        rows = [r for prefix, est in runs for r in rp.estimate_rows(est, prefix)]
        _emit(rp.write_csv(rows, config, columns), config)
    worst = max(est.quad_fail_fraction for _, est in runs)
    if worst > QUAD_FAIL_LIMIT:
        print(f"warning: {worst:.0%} of grid points Undecided from quadrature failures",
              file=sys.stderr)
        return EXIT_QUAD
    return EXIT_OK


def cmd_verify(config: rp.RunConfig) -> int:
    if config.suite not in st.SUITES:
        raise InputError(f"unknown suite {config.suite!r}; expected one of {', '.join(st.SUITES)}")
    grid = parse_grid(config.grid or st.DEFAULT_GRIDS[config.suite])
    kwargs = {}
    if config.suite == "sec3":
        if config.matrix:
            kwargs["systems"] = [load_matrix(config.matrix)]
        else:
            kwargs["seed"] = config.seed
    elif config.matrix:
        raise InputError("--matrix only applies to the sec3 suite")
    if config.suite == "prop4_2" and config.s_grid:
        kwargs["s_grid"] = tuple(config.s_grid)
    result = st.run_suite(config.suite, grid, threads=config.threads, **kwargs)
    if config.format == "csv":
        rows = [{"assertion": a.name, "pass": rp.fmt(a.passed), "n_failures": str(len(a.failures))}
                for a in result.assertions]
        _emit(rp.write_csv(rows, config, ("assertion", "pass", "n_failures")), config)
    else:
        _emit(rp.write_json(result.to_dict(), config), config)
    for a in result.failed:
        print(f"FAIL {a.name}: {json.dumps(rp._jsonable(a.failures))[:500]}", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_ASSERT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = make_config(args)
        if config.command == "analyze":
            return cmd_analyze(config)
        return cmd_verify(config)
    except InputError as exc:
        print(f"spectrakit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SpectraError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"spectrakit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "make_config", "cmd_analyze", "cmd_verify", "parse_grid",
           "parse_a_ladder", "parse_s_grid", "parse_tol", "load_func", "load_matrix",
           "EXIT_OK", "EXIT_INPUT", "EXIT_QUAD", "EXIT_ASSERT"]

"""Command-line front end.

Four subcommands: dim (entropy / expansion / dimension brackets for one
weight vector), maximize (sweep the symbol count, emit records and plot
data), gapcert (search for a cycle-derivative certificate), validate (check
the branch-system conditions).  Systems come from the built-in catalog
(--system) or a TOML definition (--file); a definition file may also carry
per-command tables whose keys provide flag defaults, overridden by actual
flags.

Exit codes: 0 success, 1 valid-but-negative outcome (no certificate found,
validation failed), 2 configuration error, 3 budget exhaustion.  Malformed
input never produces a traceback.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .brackets import ValueBracket
from .errors import (
    BudgetError,
    ConfigError,
    DivergenceError,
    InconclusiveError,
    IndeterminateError,
    NonContractionError,
)
from .gapcert import certificate_search, certificate_to_json, certificate_to_text
from .loader import load_system
from .measures import (
    DEFAULT_WORD_BUDGET,
    ProbVector,
    default_depth,
    dimension_bracket,
    entropy,
    lyapunov_bracket,
)
from .optimize import maximize_dimension, records_to_csv, records_to_json, sweep_L
from .systems import build_catalog, validate

__all__ = ["main", "RunConfig", "cmd_dim", "cmd_maximize", "cmd_gapcert",
           "cmd_validate"]

_BUDGET_ENV = "BRANCHDIM_BUDGET"


@dataclass
class RunConfig:
    command: str
    system: object
    system_ref: str
    budget: int
    output: str | None
    options: dict = field(default_factory=dict)
    out_stream: object = None

    def emit(self, text: str) -> None:
        print(text, file=self.out_stream or sys.stdout)


# ---------------------------------------------------------------------------
# Option plumbing


def _parse_p(spec: str) -> ProbVector:
    if os.path.isfile(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            spec = fh.read()
    return ProbVector.parse(spec)


def _parse_L_range(spec: str):
    try:
        if ".." in spec:
            lo_s, hi_s = spec.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
        else:
            lo = hi = int(spec)
    except ValueError:
        raise ConfigError(f"bad symbol-count range {spec!r}; use N or N..M") from None
    if not 1 <= lo <= hi:
        raise ConfigError(f"bad symbol-count range {spec!r}; need 1 <= lo <= hi")
    return lo, hi


def _write_records(path: str, rows: list, fields: tuple) -> None:
    """Write machine records; format from extension, same values either way."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".json":
        text = json.dumps(rows, indent=2)
    elif ext == ".csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            flat = dict(row)
            for k, v in flat.items():
                if isinstance(v, list):
                    flat[k] = " ".join(repr(x) for x in v)
                elif isinstance(v, bool):
                    flat[k] = str(v).lower()
            w.writerow(flat)
        text = buf.getvalue()
    else:
        raise ConfigError(f"output path must end in .csv or .json, got {path!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _resolve(args: argparse.Namespace, file_defaults: dict, command: str,
             key: str, fallback):
    """Flag value if given, else definition-file value, else fallback."""
    given = getattr(args, key, None)
    if given is not None:
        return given
    section = file_defaults.get(command, {})
    if isinstance(section, dict) and key in section:
        return section[key]
    return fallback


# ---------------------------------------------------------------------------
# Subcommands


def cmd_dim(cfg: RunConfig) -> int:
    p: ProbVector = cfg.options["p"]
    depth: int = cfg.options["depth"]
    coarse: bool = cfg.options["coarse"]
    h = entropy(p)
    chi = lyapunov_bracket(cfg.system, p, depth, coarse=coarse, budget=cfg.budget)
    if h == 0.0:
        dim = ValueBracket(0.0, 0.0, depth)
    else:
        dim = dimension_bracket(cfg.system, p, depth, coarse=coarse,
                                budget=cfg.budget)
    rule = "coarse cylinder rule" if coarse else "per-factor rule"
    cfg.emit(f"system: {cfg.system_ref} (depth {depth}, {rule})")
    cfg.emit(f"entropy:   {h:.12g}")
    cfg.emit(f"expansion: [{chi.lo:.12g}, {chi.hi:.12g}]")
    cfg.emit(f"dimension: [{dim.lo:.12g}, {dim.hi:.12g}]")
    if cfg.output:
        _write_records(cfg.output, [{
            "system": cfg.system_ref, "depth": depth, "coarse": coarse,
            "entropy": h, "lyapunov_lo": chi.lo, "lyapunov_hi": chi.hi,
            "dim_lo": dim.lo, "dim_hi": dim.hi,
        }], ("system", "depth", "coarse", "entropy", "lyapunov_lo",
             "lyapunov_hi", "dim_lo", "dim_hi"))
    return 0


def cmd_maximize(cfg: RunConfig) -> int:
    L_lo, L_hi = cfg.options["L"]
    depth = cfg.options["depth"]
    kw = dict(budget=cfg.budget, tol=cfg.options["tol"],
              max_iters=cfg.options["max_iters"], seeds=cfg.options["seeds"])
    if depth is None:
        results = list(sweep_L(cfg.system, L_hi, **kw))
    else:
        results = [maximize_dimension(cfg.system, L, depth, **kw)
                   for L in range(1, L_hi + 1)]
    results = [r for r in results if L_lo <= r.L <= L_hi]

    for r in results:
        ws = " ".join(f"{w:.6f}" for w in r.p_opt.weights)
        cfg.emit(
            f"L={r.L} depth={r.depth} dim=[{r.dim.lo:.6f}, {r.dim.hi:.6f}] "
            f"mid={r.dim.midpoint:.6f} p={ws} kkt={r.kkt_residual:.2e} "
            f"converged={'yes' if r.converged else 'no'}"
        )
    if cfg.output:
        ext = os.path.splitext(cfg.output)[1].lower()
        if ext == ".json":
            text = records_to_json(results)
        elif ext == ".csv":
            text = records_to_csv(results)
        else:
            raise ConfigError(
                f"output path must end in .csv or .json, got {cfg.output!r}"
            )
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    plot = cfg.options.get("plot")
    if plot:
        lines = ["# L dimension_midpoint half_width"]
        for r in results:
            lines.append(f"{r.L} {r.dim.midpoint!r} {0.5 * r.dim.width!r}")
        with open(plot, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def cmd_gapcert(cfg: RunConfig) -> int:
    cert = certificate_search(
        cfg.system, cfg.options["max_symbol"], cfg.options["max_len"],
        cfg.options["tol"], budget=cfg.budget,
    )
    cfg.emit(certificate_to_text(cert))
    if cfg.output:
        ext = os.path.splitext(cfg.output)[1].lower()
        if ext != ".json":
            raise ConfigError("certificate reports are JSON; use a .json path")
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(certificate_to_json(cert))
    return 0 if cert is not None and cert.valid else 1


def cmd_validate(cfg: RunConfig) -> int:
    report = validate(cfg.system)
    ok = True
    for check in report.checks:
        ok = ok and check.passed
        status = "PASS" if check.passed else "FAIL"
        line = f"{status}  {check.name}: {check.detail}"
        if not check.passed and check.witness is not None:
            line += f" (witness {check.witness:.12g})"
        cfg.emit(line)
    if report.s0 is not None:
        cfg.emit(f"series threshold s0 in [{report.s0.lo:.4f}, {report.s0.hi:.4f}]")
    cfg.emit(f"overall: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Argument parsing and dispatch


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="branchdim",
                     description="dimension computations for countable "
                                 "branched interval systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--system", help="catalog system name")
        p.add_argument("--file", help="TOML system definition")
        p.add_argument("--budget", type=int, default=None,
                       help="cylinder-word budget (default from "
                            f"{_BUDGET_ENV} or {DEFAULT_WORD_BUDGET})")
        p.add_argument("--output", default=None,
                       help="write machine records to this .csv/.json path")

    p = sub.add_parser("dim", help="brackets for one weight vector")
    add_common(p)
    p.add_argument("--p",
                   help="weights: comma list, fractions, or a file path")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--coarse-bound", dest="coarse", action="store_true",
                   default=None, help="one-step cylinder rule, no averaging")

    p = sub.add_parser("maximize", help="maximize dimension over L symbols")
    add_common(p)
    p.add_argument("--L", dest="L", default=None, help="symbol count N or range N..M")
    p.add_argument("--depth", type=int, default=None,
                   help="fixed cylinder depth (default: budget rule per L)")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--plot", default=None,
                   help="write plot-ready columns (L, midpoint, half width)")

    p = sub.add_parser("gapcert", help="search for a cycle-derivative certificate")
    add_common(p)
    p.add_argument("--max-symbol", dest="max_symbol", type=int, default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("validate", help="check the branch-system conditions")
    add_common(p)
    return parser


def _make_config(args: argparse.Namespace) -> RunConfig:
    if bool(args.system) == bool(args.file):
        raise ConfigError("give exactly one of --system or --file")
    file_defaults: dict = {}
    if args.file:
        # validate examines broken definitions instead of rejecting them
        strict = args.command != "validate"
        system, file_defaults = load_system(args.file, strict=strict)
        ref = args.file
    else:
        system = build_catalog(args.system)
        ref = args.system

    def opt(key, fallback):
        return _resolve(args, file_defaults, args.command, key, fallback)

    budget = opt("budget", None)
    if budget is None:
        budget = int(os.environ.get(_BUDGET_ENV, DEFAULT_WORD_BUDGET))
    budget = int(budget)
    if budget < 1:
        raise ConfigError("budget must be positive")

    options: dict = {}
    if args.command == "dim":
        p_spec = opt("p", None)
        if p_spec is None:
            raise ConfigError("dim needs --p")
        options["p"] = p_spec if isinstance(p_spec, ProbVector) else _parse_p(str(p_spec))
        options["depth"] = int(opt("depth", 6))
        options["coarse"] = bool(opt("coarse", False))
    elif args.command == "maximize":
        options["L"] = _parse_L_range(str(opt("L", "1..3")))
        depth = opt("depth", None)
        options["depth"] = None if depth is None else int(depth)
        options["tol"] = float(opt("tol", 1e-6))
        options["max_iters"] = int(opt("max_iters", 300))
        options["seeds"] = int(opt("seeds", 5))
        options["plot"] = opt("plot", None)
    elif args.command == "gapcert":
        options["max_symbol"] = int(opt("max_symbol", 3))
        options["max_len"] = int(opt("max_len", 3))
        options["tol"] = float(opt("tol", 1e-6))
    return RunConfig(args.command, system, ref, budget, opt("output", None),
                     options)


_DISPATCH = {
    "dim": cmd_dim,
    "maximize": cmd_maximize,
    "gapcert": cmd_gapcert,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _make_config(args)
        return _DISPATCH[cfg.command](cfg)
    except BudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ConfigError, DivergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (IndeterminateError, InconclusiveError, NonContractionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""TOML system definitions for the command-line front end.

A definition file carries a [system] table — either a catalog reference

    [system]
    catalog = "gauss"     # optional catalog params alongside, e.g. branches

or an explicit piecewise-affine branch list

    [[system.branch]]
    lo = "0"
    hi = "1/2"            # numbers or fraction strings

with an optional slope per branch (default: the full-range slope 1/width).
Remaining top-level tables supply per-command flag defaults, overridden by
actual command-line flags.

Strict loading rejects branch domains that fail to tile the unit interval
(PartitionError with the offending endpoint); non-strict loading defers that
to the validation report, so deliberately broken definitions can be examined.
"""

from __future__ import annotations

import sys
from fractions import Fraction

from .errors import ConfigError, PartitionError
from .systems import (
    Branch,
    BranchedSystem,
    Interval,
    _check_partition,
    _const_fn,
    build_catalog,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["load_config", "system_from_config", "load_system"]


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such definition file: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path} is not valid TOML: {e}") from None


def _num(value, what: str) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value).limit_denominator(10**12)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{what} is not a number or fraction: {value!r}") from None
    raise ConfigError(f"{what} must be a number, got {type(value).__name__}")


def _explicit_branch(i: int, spec: dict) -> Branch:
    unknown = set(spec) - {"lo", "hi", "slope"}
    if unknown:
        raise ConfigError(f"branch {i}: unknown keys {sorted(unknown)}")
    if "lo" not in spec or "hi" not in spec:
        raise ConfigError(f"branch {i}: lo and hi are required")
    lo = _num(spec["lo"], f"branch {i} lo")
    hi = _num(spec["hi"], f"branch {i} hi")
    if not 0 <= lo < hi <= 1:
        raise ConfigError(f"branch {i}: need 0 <= lo < hi <= 1, got {lo}..{hi}")
    width = hi - lo
    slope = _num(spec["slope"], f"branch {i} slope") if "slope" in spec else 1 / width
    if slope <= 0:
        raise ConfigError(f"branch {i}: slope must be positive")
    flo, fslope = float(lo), float(slope)
    return Branch(
        index=i,
        domain=Interval(flo, float(hi)),
        forward=lambda x, a=flo, s=fslope: (x - a) * s,
        derivative=_const_fn(fslope),
        inverse=lambda y, a=flo, s=fslope: a + y / s,
        orientation="preserving",
        derivative_monotone="increasing",
        domain_fractions=(lo, hi),
        rational_inverse=lambda y, a=lo, s=slope: a + y / s,
        rational_deriv_abs=lambda x, s=slope: s,
    )


def system_from_config(config: dict, *, strict: bool = True) -> BranchedSystem:
    """Build the system a parsed definition describes.

    strict=True additionally requires the branch domains to tile (0, 1) and
    raises PartitionError (with the offending endpoint as witness) when they
    do not; strict=False leaves that to the validation report.
    """
    sys_table = config.get("system")
    if not isinstance(sys_table, dict):
        raise ConfigError("definition file needs a [system] table")
    table = dict(sys_table)

    if "catalog" in table:
        name = table.pop("catalog")
        if "branch" in table:
            raise ConfigError("give either catalog = ... or [[system.branch]], not both")
        system = build_catalog(name, **table)
    elif "branch" in table:
        specs = table.pop("branch")
        name = table.pop("name", "custom")
        if table:
            raise ConfigError(f"unknown [system] keys {sorted(table)}")
        if not isinstance(specs, list) or not specs:
            raise ConfigError("[[system.branch]] must appear at least once")
        branches = [_explicit_branch(i + 1, s) for i, s in enumerate(specs)]
        slopes = [abs(float(b.derivative(b.domain.midpoint))) for b in branches]
        system = BranchedSystem(
            name=str(name),
            orientation="preserving",
            expansion_iterate=1,
            expansion_factor=min(slopes),
            n_branches=len(branches),
            rule=lambda n, bs=branches: bs[n - 1],
            finite=True,
            tail=None,
        )
    else:
        raise ConfigError("[system] needs catalog = ... or [[system.branch]] entries")

    if strict:
        check = _check_partition(system)
        if not check.passed:
            raise PartitionError(
                f"branch domains do not tile the unit interval: {check.detail}",
                witness=check.witness,
            )
    return system


def load_system(path: str, *, strict: bool = True):
    """Load a definition file; returns (system, command-defaults tables)."""
    config = load_config(path)
    system = system_from_config(config, strict=strict)
    defaults = {k: v for k, v in config.items() if k != "system"}
    return system, defaults

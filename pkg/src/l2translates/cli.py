"""Batch front end: parse literals and config files, run one computation, emit CSV.

Every table starts with a ``#`` comment row recording the tolerances and
tail bounds in force, followed by a header row.  Floats are written with
17 significant digits, so identical inputs give byte-identical files.
Exit status is 0 on success, 2 for invalid input and 3 when a numerical
guard refuses to produce a result.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from .errors import NumericalGuardError, ParseError, ValidationError
from .fourier import (
    BoundednessProfile,
    CoefficientWindow,
    SupEstimate,
    auto_level,
    boundedness_profiles,
    u_norm_estimate,
)
from .periodization import classify, parse_spectrum, periodization_grid, spectrum_from_set
from .sets import IntervalSet, fat_cantor, parse_set
from .witness import (
    cesaro_independence_probe,
    combination_norm,
    dependence_witness,
    nice_function_probe,
)

COMMANDS = (
    "periodize",
    "classify",
    "zero-set",
    "partial-sums",
    "dependence-demo",
    "cesaro-probe",
    "cantor-probe",
    "nice-probe",
    "unorm",
)

PROBE_HEADER = ("quantity", "region", "n", "value", "certified_bound")


def parse_schedule(text: str) -> list[int]:
    """``pow2:a..b`` (powers 2^a..2^b), ``range:a..b`` (inclusive) or ``1,2,5``."""
    text = str(text).strip()
    kind, sep, body = text.partition(":")
    try:
        if sep:
            lo, dots, hi = body.partition("..")
            if not dots:
                raise ParseError(f"schedule {text!r} needs a..b")
            lo, hi = int(lo), int(hi)
            kind = kind.strip().lower()
            if kind == "pow2":
                if lo < 0:
                    raise ParseError(f"negative exponent in {text!r}")
                out = [1 << e for e in range(lo, hi + 1)]
            elif kind == "range":
                out = list(range(lo, hi + 1))
            else:
                raise ParseError(f"unknown schedule kind {kind!r}")
        else:
            out = [int(tok) for tok in re.split(r"[,\s]+", text) if tok]
    except ValueError as exc:
        raise ParseError(f"bad schedule {text!r}") from exc
    if not out:
        raise ValidationError(f"schedule {text!r} is empty")
    if any(b <= a for a, b in zip(out, out[1:])) or out[0] < 0:
        raise ValidationError(f"schedule {text!r} must be nonnegative and strictly increasing")
    return out


def parse_function_set(text: str) -> IntervalSet:
    """A function literal ``indicator(<set>)`` or a bare set literal."""
    text = str(text).strip()
    m = re.match(r"^indicator\s*\((.*)\)\s*$", text, re.IGNORECASE)
    return parse_set(m.group(1) if m else text)


def read_config(path: str) -> dict[str, str]:
    """Flat ``key value`` lines; ``#`` starts a comment; keys use ``-`` or ``_``."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read config {path!r}: {exc}") from exc
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if not value.strip():
            raise ParseError(f"{path}:{num}: expected 'key value'")
        out[key.strip().replace("-", "_").lower()] = value.strip()
    return out


def fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


@dataclass
class Table:
    comment: dict[str, Any]
    header: Sequence[str]
    rows: list[Sequence[Any]] = field(default_factory=list)

    def write(self, out: io.TextIOBase) -> None:
        out.write("# " + "; ".join(f"{k}={fmt(v)}" for k, v in self.comment.items()) + "\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])


def _positive(name: str) -> Callable[[str], float]:
    def conv(text):
        try:
            value = float(text)
        except ValueError as exc:
            raise ParseError(f"{name} must be a number, got {text!r}") from exc
        if not value > 0 or math.isinf(value):
            raise ValidationError(f"{name} must be positive and finite, got {text!r}")
        return value

    return conv


def _power_of_two(text) -> int:
    try:
        M = int(text)
    except ValueError as exc:
        raise ParseError(f"M must be an integer, got {text!r}") from exc
    if M < 2 or M & (M - 1):
        raise ValidationError(f"M must be a power of two >= 2, got {M}")
    return M


def _nonneg_int(name: str) -> Callable[[str], int]:
    def conv(text):
        try:
            value = int(text)
        except ValueError as exc:
            raise ParseError(f"{name} must be an integer, got {text!r}") from exc
        if value < 0:
            raise ValidationError(f"{name} must be nonnegative, got {value}")
        return value

    return conv


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad fraction {text!r}") from exc


def _removal(text) -> tuple[Fraction, ...]:
    return tuple(_fraction(tok) for tok in str(text).split(":"))


# option name -> (converter, default, help)
OPTIONS: dict[str, tuple[Callable, Any, str]] = {
    "spectrum": (parse_spectrum, None, "spectrum literal: haar, sinc, indicator(a..b), set(...), sine_bump(a..b), custom(file)"),
    "M": (_power_of_two, 1024, "periodization grid size (power of two)"),
    "eps": (_positive("eps"), 1e-8, "tail tolerance for periodization"),
    "tau": (_positive("tau"), 1e-6, "zero threshold for classification"),
    "A": (parse_set, None, "set literal for A"),
    "f": (parse_function_set, None, "function literal indicator(<set>)"),
    "region": (parse_set, None, "set literal of the sup region (default: whole circle)"),
    "schedule": (parse_schedule, None, "pow2:a..b, range:a..b or an explicit list"),
    "width": (_nonneg_int("width"), None, "coefficient half-width (default: largest schedule entry)"),
    "level": (_nonneg_int("level"), None, "dyadic grid level, 2^level points per unit (default: automatic)"),
    "oracle_max_n": (_nonneg_int("oracle-max-n"), 0, "cross-check schedule entries up to this n in the time domain"),
    "depth": (_nonneg_int("depth"), 5, "fat Cantor depth"),
    "remove": (_removal, (Fraction(1, 4),), "fat Cantor removal fraction(s), a:b:c per stage"),
    "workers": (_nonneg_int("workers"), 1, "worker threads for grid sweeps"),
}

USES = {
    "periodize": ("spectrum", "M", "eps"),
    "classify": ("spectrum", "M", "eps", "tau"),
    "zero-set": ("spectrum", "M", "eps", "tau"),
    "partial-sums": ("f", "region", "schedule", "width", "level", "workers"),
    "dependence-demo": ("A", "f", "schedule", "M", "oracle_max_n"),
    "cesaro-probe": ("spectrum", "A", "f", "schedule", "M", "eps"),
    "cantor-probe": ("depth", "remove", "schedule", "width", "level", "workers"),
    "nice-probe": ("A", "f", "schedule", "width", "level"),
    "unorm": ("f", "width", "level"),
}

# per-command defaults that differ from OPTIONS
DEFAULTS = {
    "dependence-demo": {"M": 4096},
    "cantor-probe": {"level": 12},
}

REQUIRED = {
    "periodize": ("spectrum",),
    "classify": ("spectrum",),
    "zero-set": ("spectrum",),
    "partial-sums": ("f", "schedule"),
    "dependence-demo": ("A", "f", "schedule"),
    "cesaro-probe": ("f", "schedule"),
    "cantor-probe": (),
    "nice-probe": ("A", "f"),
    "unorm": ("f", "width"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l2translates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="flat 'key value' config file; flags win on conflict")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        for name in USES[cmd]:
            flag = "--" + name.replace("_", "-")
            # raw strings; conversion happens after merging with the config file
            p.add_argument(flag, dest=name, default=None, help=OPTIONS[name][2])
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flags over config over defaults and convert every value."""
    cfg = read_config(args.config) if args.config else {}
    cfg.pop("command", None)
    out_path = args.out if args.out is not None else cfg.pop("out", None)
    cfg.pop("out", None)
    allowed = USES[args.command]
    lookup = {name.lower(): name for name in allowed}
    unknown = [k for k in cfg if k not in lookup]
    if unknown:
        raise ValidationError(f"config keys not used by {args.command}: {', '.join(sorted(unknown))}")
    opts: dict[str, Any] = {"command": args.command, "out": out_path}
    for name in allowed:
        raw = getattr(args, name)
        if raw is None:
            raw = cfg.get(name.lower())
        conv, default, _ = OPTIONS[name]
        default = DEFAULTS.get(args.command, {}).get(name, default)
        opts[name] = default if raw is None else conv(raw)
    missing = [n for n in REQUIRED[args.command] if opts[n] is None]
    if missing:
        raise ValidationError(f"{args.command} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return opts


def _window(opts) -> CoefficientWindow:
    width = opts.get("width")
    if width is None:
        width = max(opts["schedule"])
    return CoefficientWindow.indicator(opts["f"], width)


def _profile_rows(name: str, region: str, prof: BoundednessProfile) -> list[tuple]:
    return [(name, region, n, s.value, s.certified_bound) for n, s in zip(prof.schedule, prof.sups)]


def _unorm_row(region: str, f: CoefficientWindow, est: SupEstimate) -> tuple:
    return ("u_norm", region, f.n, est.value, est.certified_bound)


def cmd_periodize(opts) -> Table:
    psi, M, eps = opts["spectrum"], opts["M"], opts["eps"]
    grid = periodization_grid(psi, M, eps)
    table = Table({"spectrum": psi.label, "M": M, "eps": eps, "tail": grid.tail_error}, ("xi", "p", "tail"))
    for j, v in enumerate(grid.values):
        table.rows.append((j / M, float(v), grid.tail_error))
    return table


def _classification(opts):
    grid = periodization_grid(opts["spectrum"], opts["M"], opts["eps"])
    return grid, classify(grid, opts["tau"])


def cmd_classify(opts) -> list[Table]:
    grid, rep = _classification(opts)
    comment = {"spectrum": opts["spectrum"].label, "M": grid.M, "eps": opts["eps"], "tail": grid.tail_error, "tau": rep.tau_zero, "status": rep.status}
    fields = (
        "ess_inf_est",
        "ess_sup_est",
        "positive_ae",
        "zero_set_measure",
        "minimal_flag",
        "l2_independent_sufficient",
        "reciprocal_integral",
        "floor_growth",
        "resolution_growth",
        "divergence_diagnostic",
    )
    report = Table(comment, fields, [tuple(getattr(rep, name) for name in fields)])
    return [report, _zero_set_table(rep.zero_set_approx, {"zero_set": "cells with p <= tau", "tau": rep.tau_zero})]


def _zero_set_table(Z: IntervalSet, comment) -> Table:
    return Table(comment, ("lo", "hi"), [(lo, hi) for lo, hi in Z])


def cmd_zero_set(opts) -> Table:
    grid, rep = _classification(opts)
    comment = {"spectrum": opts["spectrum"].label, "M": grid.M, "tail": grid.tail_error, "tau": rep.tau_zero, "measure": rep.zero_set_measure}
    return _zero_set_table(rep.zero_set_approx, comment)


def cmd_partial_sums(opts) -> Table:
    f = _window(opts)
    region = opts["region"] if opts["region"] is not None else IntervalSet.full()
    level = opts["level"] if opts["level"] is not None else auto_level(f, max(opts["schedule"]))
    prof = boundedness_profiles(f, [region], opts["schedule"], level, workers=opts["workers"])[0]
    comment = {"f": f"indicator({opts['f']})", "width": f.n, "region": region, "level": level, "status": prof.status}
    return Table(comment, ("n", "sup", "certified_bound"), [(n, s.value, s.certified_bound) for n, s in zip(prof.schedule, prof.sups)])


def cmd_dependence(opts) -> Table:
    A, schedule = opts["A"], opts["schedule"]
    f = CoefficientWindow.indicator(opts["f"], max(schedule))
    M = opts["M"]
    while M < 2 * (2 * max(schedule) + 1):
        M *= 2
    w = dependence_witness(A, f, schedule, M=M, oracle_max_n=opts["oracle_max_n"])
    comment = {
        "A": A,
        "f": f"indicator({opts['f']})",
        "M": w.M,
        "leakage": w.leakage,
        "max_quadrature_error": max(w.quadrature_errors),
        "decay_ratio": w.decay_ratio,
        "status": w.status,
    }
    oracle = w.oracle_norms or (None,) * len(w.norms)
    rows = [(n, v, o, e) for n, v, o, e in zip(w.schedule, w.norms, oracle, w.quadrature_errors)]
    return Table(comment, ("n", "norm", "oracle_norm", "quadrature_error"), rows)


def cmd_cesaro(opts) -> Table:
    schedule = opts["schedule"]
    if opts["spectrum"] is not None:
        psi = opts["spectrum"]
    elif opts["A"] is not None:
        psi = spectrum_from_set(opts["A"].complement())
    else:
        raise ValidationError("cesaro-probe needs --spectrum or --A")
    M = opts["M"]
    while M < 2 * (2 * max(schedule) + 1):
        M *= 2
    grid = periodization_grid(psi, M, opts["eps"])
    c = CoefficientWindow.indicator(opts["f"], max(schedule)).reflected()
    cesaro = cesaro_independence_probe(c, grid, schedule)
    partial = [combination_norm(c, n - 1, grid) if n >= 1 else math.nan for n in schedule]
    comment = {"spectrum": psi.label, "f": f"indicator({opts['f']})", "M": M, "tail": grid.tail_error, "status": "evidence"}
    return Table(comment, ("n", "cesaro_norm", "partial_norm_prev"), list(zip(schedule, cesaro, partial)))


def cmd_cantor(opts) -> Table:
    remove = opts["remove"]
    A = fat_cantor(opts["depth"], remove[0] if len(remove) == 1 else remove)
    schedule = opts["schedule"]
    width = opts["width"]
    if width is None:
        width = max(schedule) if schedule else 2048
    if schedule is None:
        schedule = [0] + [1 << i for i in range(width.bit_length()) if (1 << i) <= width]
    f = CoefficientWindow.indicator(A, width)
    level = opts["level"]
    Ac = A.complement()
    profiles = boundedness_profiles(f, [Ac, IntervalSet.full()], schedule, level, workers=opts["workers"])
    rows = [_unorm_row("full", f, u_norm_estimate(f, level))]
    rows += _profile_rows("sup", "complement", profiles[0])
    rows += _profile_rows("sup", "full", profiles[1])
    comment = {"set": f"cantor(depth={opts['depth']}, remove={':'.join(map(str, remove))})", "measure": A.measure, "width": width, "level": level, "status": "evidence"}
    return Table(comment, PROBE_HEADER, rows)


def cmd_nice(opts) -> Table:
    A = opts["A"]
    schedule = opts["schedule"]
    width = opts["width"] if opts["width"] is not None else (max(schedule) if schedule else 256)
    f = CoefficientWindow.indicator(opts["f"], width)
    level = opts["level"] if opts["level"] is not None else auto_level(f, width)
    rep = nice_function_probe(A, f, level, schedule)
    rows = [
        ("leakage", "complement", width, rep.leakage, None),
        ("truncated_leakage", "complement", width, rep.truncated_leakage, None),
        ("degenerate", "", width, rep.degenerate, None),
        _unorm_row("full", f, rep.u_norm),
    ]
    if rep.profile_complement is not None:
        rows += _profile_rows("sup", "complement", rep.profile_complement)
    rows += _profile_rows("sup", "full", rep.profile_full)
    comment = {"A": A, "f": f"indicator({opts['f']})", "width": width, "level": level, "leakage_method": rep.leakage_method, "status": rep.status}
    return Table(comment, PROBE_HEADER, rows)


def cmd_unorm(opts) -> Table:
    f = CoefficientWindow.indicator(opts["f"], opts["width"])
    level = opts["level"] if opts["level"] is not None else auto_level(f, f.n)
    est = u_norm_estimate(f, level)
    comment = {"f": f"indicator({opts['f']})", "width": f.n, "level": level, "modulus": est.modulus_bound, "status": "evidence"}
    return Table(comment, PROBE_HEADER, [_unorm_row("full", f, est)])


HANDLERS = {
    "periodize": cmd_periodize,
    "classify": cmd_classify,
    "zero-set": cmd_zero_set,
    "partial-sums": cmd_partial_sums,
    "dependence-demo": cmd_dependence,
    "cesaro-probe": cmd_cesaro,
    "cantor-probe": cmd_cantor,
    "nice-probe": cmd_nice,
    "unorm": cmd_unorm,
}


def run(opts: dict[str, Any]) -> str:
    """Execute a resolved configuration and return the CSV text."""
    result = HANDLERS[opts["command"]](opts)
    tables = result if isinstance(result, list) else [result]
    buf = io.StringIO()
    for table in tables:
        table.write(buf)
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        text = run(opts)
        if opts["out"]:
            with open(opts["out"], "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``indicatrix <command> [options]``.

Rationals cross the boundary as ``p/q`` strings.  Exit status is 0 on
success, 1 when a ``verify`` suite fails and 2 for malformed input.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import bounds, plane_incidence
from .circle_set import Arc, CircleOpenSet, InvalidInputError, normalize, tau, tau_sup_with_argmax, kh_deficit
from .constructions import (
    FatCantorSpec,
    fat_cantor_complement,
    pierpont,
    random_open_set,
    random_pl_function,
    tent_train,
    terekhin,
)
from .gauge import GaugeFunction, LengthFamily, bt_index, gauge_sum
from .pl_function import PLFunction, indicatrix_profile, modulus, modulus_at

PROG = "indicatrix"


class LiteralError(InvalidInputError):
    """Malformed literal; ``where`` names the flag and position."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# --- literal parsers --------------------------------------------------------

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text: str, where: str = "value") -> Fraction:
    """Exact ``p`` or ``p/q``; decimals and exponents are rejected."""
    text = text.strip()
    if not _RATIONAL.match(text):
        raise LiteralError(where, f"expected a rational p/q, got {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise LiteralError(where, f"zero denominator in {text!r}") from None


def parse_number(text: str, where: str = "value") -> Fraction:
    """Rational or exact decimal (``1e-6`` is read as 1/1000000)."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise LiteralError(where, f"expected a number, got {text!r}") from None


def _split_args(text: str, count: int | tuple[int, int], where: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")] if text else []
    lo, hi = (count, count) if isinstance(count, int) else count
    if not lo <= len(parts) <= hi:
        want = str(lo) if lo == hi else f"{lo} to {hi}"
        raise LiteralError(where, f"expected {want} comma-separated arguments, got {len(parts)}")
    return parts


def parse_set(text: str, where: str = "--set") -> CircleOpenSet:
    """``a/b+L/M, ...``, ``empty``, ``fatcantor:lam,m`` or ``random:n,d,seed``."""
    text = text.strip()
    head, sep, rest = text.partition(":")
    if sep and head == "fatcantor":
        lam, m = _split_args(rest, 2, where)
        try:
            return fat_cantor_complement(FatCantorSpec(parse_rational(lam, where), int(m)))[0]
        except ValueError as exc:
            raise LiteralError(where, str(exc)) from None
    if sep and head == "random":
        n, d, seed = _split_args(rest, 3, where)
        try:
            return random_open_set(int(n), int(d), int(seed))
        except ValueError as exc:
            raise LiteralError(where, str(exc)) from None
    if text in ("", "empty"):
        return CircleOpenSet.empty()
    arcs = []
    for k, token in enumerate(text.split(","), start=1):
        start, plus, length = token.strip().partition("+")
        loc = f"{where} arc {k}"
        if not plus:
            raise LiteralError(loc, f"expected start+length, got {token.strip()!r}")
        try:
            arcs.append(Arc(parse_rational(start, loc), parse_rational(length, loc)))
        except LiteralError:
            raise
        except ValueError as exc:
            raise LiteralError(loc, str(exc)) from None
    return normalize(arcs)


_NODE = re.compile(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)")


def parse_function(text: str, where: str = "--fn") -> PLFunction:
    """``pl: (x,y) (x,y) ...``, ``tent:n``, ``pierpont:b,K`` or ``terekhin:K``."""
    text = text.strip()
    head, sep, rest = text.partition(":")
    if not sep:
        raise LiteralError(where, "expected pl:, tent:, pierpont: or terekhin:")
    try:
        if head == "tent":
            return tent_train(int(rest))
        if head == "pierpont":
            b, K = _split_args(rest, 2, where)
            return pierpont(parse_rational(b, where), int(K))
        if head == "terekhin":
            return terekhin(int(rest))
        if head == "random":
            n, d, seed = _split_args(rest, 3, where)
            return random_pl_function(int(n), int(d), int(seed))
    except LiteralError:
        raise
    except ValueError as exc:
        raise LiteralError(where, str(exc)) from None
    if head != "pl":
        raise LiteralError(where, f"unknown function builder {head!r}")
    nodes = []
    pos = 0
    body = rest
    for k, m in enumerate(_NODE.finditer(body), start=1):
        gap = body[pos : m.start()].strip()
        if gap:
            raise LiteralError(f"{where} char {len(head) + 1 + pos}", f"unexpected text {gap!r}")
        loc = f"{where} node {k}"
        nodes.append((parse_rational(m.group(1), loc), parse_rational(m.group(2), loc)))
        pos = m.end()
    if body[pos:].strip():
        raise LiteralError(f"{where} char {len(head) + 1 + pos}", f"unexpected text {body[pos:].strip()!r}")
    try:
        return PLFunction(tuple(nodes))
    except ValueError as exc:
        raise LiteralError(where, str(exc)) from None


def parse_gauge(text: str, where: str = "--gauge") -> GaugeFunction:
    """``power:a``, ``logpow:a``, ``mixed:a,b,g``, ``const`` or ``recip``."""
    head, _, rest = text.strip().partition(":")
    try:
        if head in ("const", "constant"):
            return GaugeFunction.constant()
        if head in ("recip", "reciprocal"):
            return GaugeFunction.reciprocal()
        if head == "power":
            return GaugeFunction.power(float(rest))
        if head == "logpow":
            return GaugeFunction.logpow(float(rest))
        if head == "mixed":
            a, b, g = (float(v) for v in _split_args(rest, 3, where))
            return GaugeFunction.mixed(a, b, g)
    except LiteralError:
        raise
    except ValueError as exc:
        raise LiteralError(where, str(exc)) from None
    raise LiteralError(where, f"unknown gauge {text!r}")


def parse_family(text: str, where: str = "--family") -> LengthFamily:
    """``geom:m,rho,a,r[,stages]`` or ``list:l1,l2,...``."""
    head, _, rest = text.strip().partition(":")
    try:
        if head == "geom":
            parts = _split_args(rest, (4, 5), where)
            m, rho, a, r = (parse_rational(p, where) for p in parts[:4])
            stages = int(parts[4]) if len(parts) == 5 else None
            return LengthFamily.geometric(int(m), rho, a, r, stages)
        if head == "list":
            return LengthFamily.explicit([parse_rational(p, f"{where} item {k}") for k, p in enumerate(rest.split(","), 1)])
    except LiteralError:
        raise
    except ValueError as exc:
        raise LiteralError(where, str(exc)) from None
    raise LiteralError(where, f"unknown family {text!r}")


def parse_grid(text: str, where: str = "--grid") -> list[Fraction]:
    """``geom:hi,lo[,n]`` (n points, log-spaced, made rational) or ``list:a,b,...``."""
    head, _, rest = text.strip().partition(":")
    if head == "list":
        return [parse_number(p, f"{where} item {k}") for k, p in enumerate(rest.split(","), 1)]
    if head == "geom":
        parts = _split_args(rest, (2, 3), where)
        hi, lo = parse_number(parts[0], where), parse_number(parts[1], where)
        n = int(parts[2]) if len(parts) == 3 else 30
        if not 0 < lo < hi or n < 2:
            raise LiteralError(where, "need 0 < lo < hi and at least 2 points")
        pts = np.geomspace(float(hi), float(lo), n)
        out = [hi] + [Fraction(float(v)).limit_denominator(10**12) for v in pts[1:-1]] + [lo]
        return out
    raise LiteralError(where, f"unknown grid {text!r} (expected geom: or list:)")


def parse_vector(text: str, where: str = "--v") -> tuple[float, float]:
    try:
        x, y = (float(v) for v in _split_args(text, 2, where))
    except ValueError as exc:
        raise LiteralError(where, str(exc)) from None
    return x, y


# --- serialisation ----------------------------------------------------------


def _cell(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _json_value(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def export_sweep(rows: Sequence[dict], path, columns: Sequence[str] | None = None) -> Path:
    """Write rows as CSV or JSON, chosen by the path's extension.

    Rationals become ``"p/q"`` strings and floats their shortest round-trip
    decimal.  An empty CSV still gets a header when ``columns`` is given.
    """
    path = Path(path)
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    for r in rows:
        if list(r) != list(columns):
            raise InvalidInputError("rows must all have the same keys")
    if path.suffix == ".json":
        payload = [{k: _json_value(r[k]) for k in columns} for r in rows]
        path.write_text(json.dumps(payload, indent=1) + "\n")
    elif path.suffix == ".csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if columns:
                w.writerow(columns)
            for r in rows:
                w.writerow([_cell(r[k]) for k in columns])
    else:
        raise InvalidInputError(f"cannot infer format from {path.name!r} (use .csv or .json)")
    return path


def _revive(v):
    if isinstance(v, str):
        if _RATIONAL.match(v):
            return Fraction(v) if "/" in v else int(v)
        if v in ("true", "false"):
            return v == "true"
        try:
            return float(v)
        except ValueError:
            return v
    return v


def read_sweep(path) -> list[dict]:
    """Inverse of :func:`export_sweep`."""
    path = Path(path)
    if path.suffix == ".json":
        return [{k: _revive(v) for k, v in r.items()} for r in json.loads(path.read_text())]
    with open(path, newline="") as fh:
        return [{k: _revive(v) for k, v in r.items()} for r in csv.DictReader(fh)]


def _emit(rows: list[dict], out: str | None, columns: Sequence[str]):
    if out:
        export_sweep(rows, out, columns)
        return
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[k]) for k in columns])


# --- config and threads -----------------------------------------------------


def thread_count() -> int:
    raw = os.environ.get("INDICATRIX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidInputError(f"INDICATRIX_THREADS must be an integer, got {raw!r}") from None


def ordered_map(fn: Callable, items: Iterable) -> list:
    """map() that may use INDICATRIX_THREADS workers; order is preserved."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def read_config(path) -> list[str]:
    """Flat ``key = value`` lines become ``--key value`` tokens."""
    tokens = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise LiteralError(f"{path} line {lineno}", "expected key = value")
        key = key.strip().replace("_", "-")
        tokens += [f"--{key}", value.strip()]
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    """Splice config tokens in right after the subcommand so flags win."""
    for i, tok in enumerate(argv):
        if tok == "--config" or tok.startswith("--config="):
            if "=" in tok:
                path, rest = tok.split("=", 1)[1], argv[:i] + argv[i + 1 :]
            else:
                if i + 1 >= len(argv):
                    raise LiteralError("--config", "missing path")
                path, rest = argv[i + 1], argv[:i] + argv[i + 2 :]
            tokens = read_config(path)
            cmd_pos = next((k for k, t in enumerate(rest) if not t.startswith("-")), None)
            if cmd_pos is None:
                if "--command" in tokens:
                    j = tokens.index("--command")
                    cmd = tokens[j + 1]
                    tokens = tokens[:j] + tokens[j + 2 :]
                    return [cmd] + tokens + rest
                raise LiteralError("--config", "no command given")
            tokens = [t for k, t in enumerate(tokens) if t != "--command" and (k == 0 or tokens[k - 1] != "--command")]
            return rest[: cmd_pos + 1] + tokens + rest[cmd_pos + 1 :]
    return argv


# --- commands ---------------------------------------------------------------


def cmd_tau(args) -> int:
    E = parse_set(args.set)
    h = parse_rational(args.h, "--h")
    print(tau(E, h))
    return 0


def cmd_tausup(args) -> int:
    E = parse_set(args.set)
    value, at = tau_sup_with_argmax(E, parse_rational(args.t, "--t"))
    print(value if not args.argmax else f"{value} {at}")
    return 0


def cmd_modulus(args) -> int:
    f = parse_function(args.fn)
    p = float(parse_number(args.p, "--p"))
    if args.h is not None:
        v = modulus_at(f, parse_rational(args.h, "--h"), p if p != int(p) else int(p))
        print(_cell(v))
        return 0
    est = modulus(f, parse_rational(args.t, "--t"), p, args.grid)
    print(f"{est.value!r} {est.error_bound!r}")
    return 0


def cmd_indicatrix(args) -> int:
    prof = indicatrix_profile(parse_function(args.fn))
    _emit(prof.rows(), args.out, ["y_lo", "y_hi", "n", "N"])
    return 0


def cmd_gaugesum(args) -> int:
    print(repr(gauge_sum(parse_family(args.family), parse_gauge(args.gauge))))
    return 0


def cmd_btindex(args) -> int:
    idx = bt_index(parse_family(args.family))
    print(f"{idx.value!r}" + (" truncated" if idx.truncated else ""))
    return 0


SUITES = ("sharpness", "lemma33", "theorem34", "banach", "pvariation", "tau-oracle", "prop32", "fcs", "gs", "rates", "plane")


def _suite_reports(name: str, args) -> list:
    trials, seed = args.trials, args.seed
    ts = bounds.dyadic_ts(3, 10)
    if name == "sharpness":
        return [bounds.sharpness_suite(trials or 200, seed)]
    if name == "lemma33":
        return [bounds.lemma33_suite(trials or 1000, seed)]
    if name == "theorem34":
        return [bounds.theorem34_suite(trials or 200, seed)]
    if name == "banach":
        return [bounds.banach_suite(trials or 500, seed)]
    if name == "pvariation":
        return bounds.pvariation_suite(trials or 200, seed)
    if name == "tau-oracle":
        return [bounds.tau_oracle_suite(trials or 1000, seed)]
    if name == "prop32":
        fs = {"tent:3": tent_train(3), "pierpont:2,30": pierpont(2, 30), "terekhin:12": terekhin(12)}
        reps = ordered_map(lambda kv: (kv[0], bounds.prop32_report(kv[1], ts)), list(fs.items()))
        for label, r in reps:
            r.name = f"prop32 {label}"
        return [r for _, r in reps]
    if name == "fcs":
        out = []
        for lam in ("1/4", "1/5", "3/10"):
            env, ex, _ = bounds.fcs_check(Fraction(lam), args.stage)
            out += [env, ex]
        return out
    if name == "gs":
        out = []
        for label, f in (("tent:4", tent_train(4)), ("pierpont:2,50", pierpont(2, 50))):
            for variant in bounds.GS_VARIANTS:
                r = bounds.gs_implication_check(f, variant)
                r.name = f"{r.name} {label}"
                out.append(r)
        return out
    if name == "rates":
        return [bounds.terekhin_rate(terekhin(16)), bounds.power_rate(pierpont(2, 50), 0.9)]
    if name == "plane":
        return plane_incidence.plane_reports()
    raise LiteralError("--suite", f"unknown suite {name!r}")


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else [s.strip() for s in args.suite.split(",")]
    reports = []
    for name in names:
        reports += _suite_reports(name, args)
    for r in reports:
        r.tolerance = max(r.tolerance, args.tol)
    payload = [r.as_dict() for r in reports]
    text = json.dumps(payload, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    failed = [r for r in reports if not r.passed]
    if failed:
        worst = min(failed, key=lambda r: r.slack if r.bounded else -math.inf)
        print(f"{PROG}: FAILED {len(failed)} of {len(reports)} reports; worst {worst.name}: "
              f"quantity={float(worst.quantity)!r} bound={float(worst.bound)!r} witnesses={worst.as_dict()['witnesses']}",
              file=sys.stderr)
        return 1
    return 0


def cmd_fcs(args) -> int:
    lam = parse_rational(args.lam, "--lam")
    hs = parse_grid(args.hgrid, "--hgrid") if args.hgrid else bounds.fcs_h_grid(lam, args.stage)
    E, _ = fat_cantor_complement(FatCantorSpec(lam, args.stage))

    def row(h):
        lo, hi = bounds.fcs_envelope(lam, h)
        return {"h": h, "tau": tau(E, h), "lower": lo, "upper": hi}

    _emit(ordered_map(row, hs), args.out, ["h", "tau", "lower", "upper"])
    return 0


def cmd_tau2(args) -> int:
    E = plane_incidence.shape_from_literal(args.shape, args.res)
    h = float(parse_number(args.h, "--h"))
    v = parse_vector(args.v)
    t = plane_incidence.tau_directional(E, h, v)
    kh, gamma = plane_incidence.neighborhood_measures(E, h)
    print(json.dumps({"tau": t, "kh_deficit": kh, "gamma_h": gamma}))
    if args.pgm:
        plane_incidence.write_pgm(E, args.pgm)
    return 0


def cmd_export(args) -> int:
    grid = parse_grid(args.grid, "--grid")
    if args.set is not None:
        E = parse_set(args.set)
        rows = ordered_map(
            lambda h: {"h": h, "tau": tau(E, h), "lemma33": bounds.lemma33_bound(E, h), "kh_deficit": kh_deficit(E, h)},
            grid,
        )
        columns = ["h", "tau", "lemma33", "kh_deficit"]
    else:
        f = parse_function(args.fn)
        p = float(parse_number(args.p, "--p"))

        def row(t):
            est = modulus(f, t, p)
            return {"t": t, "omega": est.value, "error_bound": est.error_bound}

        rows = ordered_map(row, grid)
        columns = ["t", "omega", "error_bound"]
    _emit(rows, args.out, columns)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key=value file mirroring the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tau", help="incidence of a set with its translate",
                       description="Wraps circle_set.tau: exact measure of E symdiff (E - h).")
    p.add_argument("--set", required=True, help="a/b+L/M, ... | fatcantor:lam,m | random:n,d,seed")
    p.add_argument("--h", required=True, help="shift p/q")
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("tausup", help="sup of tau over shifts up to t",
                       description="Wraps circle_set.tau_sup: exact sup of tau(E, h) over 0 < h <= t.")
    p.add_argument("--set", required=True)
    p.add_argument("--t", required=True, help="p/q in (0, 1/2]")
    p.add_argument("--argmax", action="store_true", help="also print the maximising shift")
    p.set_defaults(func=cmd_tausup)

    p = sub.add_parser("modulus", help="L^p modulus of continuity",
                       description="Wraps pl_function.modulus (value and certified error bound), "
                                   "or pl_function.modulus_at with --h (the p-th power integral at one shift).")
    p.add_argument("--fn", required=True, help="pl: (x,y) ... | tent:n | pierpont:b,K | terekhin:K")
    p.add_argument("--t", default="1/8")
    p.add_argument("--h", default=None)
    p.add_argument("--p", default="1")
    p.add_argument("--grid", type=int, default=256, help="uniform candidates in (0, t]")
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("indicatrix", help="strip profile of n(y) and N(E_y)",
                       description="Wraps pl_function.indicatrix_profile; columns y_lo,y_hi,n,N.")
    p.add_argument("--fn", required=True)
    p.add_argument("--out", help=".csv or .json (default: CSV on stdout)")
    p.set_defaults(func=cmd_indicatrix)

    p = sub.add_parser("gaugesum", help="sum of l phi(l) over a length family",
                       description="Wraps gauge.gauge_sum; prints inf when the series diverges.")
    p.add_argument("--family", required=True, help="geom:m,rho,a,r[,stages] | list:l1,l2,...")
    p.add_argument("--gauge", required=True, help="power:a | logpow:a | mixed:a,b,g | const | recip")
    p.set_defaults(func=cmd_gaugesum)

    p = sub.add_parser("btindex", help="Besicovitch-Taylor index of a length family",
                       description="Wraps gauge.bt_index; finite families print 0 with a truncated flag.")
    p.add_argument("--family", required=True)
    p.set_defaults(func=cmd_btindex)

    p = sub.add_parser("verify", help="run verification suites",
                       description="Wraps the bounds suites and plane_incidence.plane_reports; "
                                   "emits a JSON array of reports and exits 1 if any fails.")
    p.add_argument("--suite", default="all", help=f"all or comma list of: {', '.join(SUITES)}")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--stage", type=int, default=12, help="Fat Cantor stage for the fcs suite")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fcs", help="Fat Cantor tau against its envelope",
                       description="Wraps bounds.fcs_envelope and circle_set.tau on the stage-m complement; "
                                   "columns h,tau,lower,upper.")
    p.add_argument("--lam", required=True)
    p.add_argument("--stage", type=int, default=12)
    p.add_argument("--hgrid", help="geom:hi,lo[,n] | list:h1,h2,... (default: 30 points in (lam^(m-2), lam])")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fcs)

    p = sub.add_parser("tau2", help="directional incidence of a raster shape",
                       description="Wraps plane_incidence.tau_directional and neighborhood_measures.")
    p.add_argument("--shape", required=True, help="disk:r | square:side | cantor:lam[,stage]")
    p.add_argument("--h", required=True)
    p.add_argument("--v", default="1,0")
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--pgm", help="also write the raster as PGM with a JSON sidecar")
    p.set_defaults(func=cmd_tau2)

    p = sub.add_parser("export", help="sweep tables for slope plots",
                       description="Wraps cli.export_sweep over circle_set.tau (with --set) "
                                   "or pl_function.modulus (with --fn).")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--set")
    src.add_argument("--fn")
    p.add_argument("--grid", required=True, help="geom:hi,lo[,n] | list:...")
    p.add_argument("--p", default="1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except (InvalidInputError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

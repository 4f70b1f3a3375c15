"""Command-line front end: ``treecap <subcommand> ...``.

Exit codes: 0 success, 1 malformed input, 2 a check failed, 3 an oracle
did not converge.  Defaults come from a ``key = value`` config file whose
path is read from ``TREECAP_CONFIG`` or ``--config``; flags override it.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .capacity import (
    OracleConvergenceError,
    capacity,
    capacity_dual_oracle,
    capacity_primal_oracle,
    equilibrium,
)
from .spaces import ball_capacity_estimate, discretize_set, make_space, parse_set_descriptor, weight_pi_s
from .tree import WeightedTree, chain_tree, homogeneous_tree, parse_tree

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CHECK = 2
EXIT_ORACLE = 3

CONFIG_ENV = "TREECAP_CONFIG"
FORMATS = ("table", "csv", "jsonl")
CONFIG_KEYS = {
    "p": float, "s": float, "delta": float, "depth": int, "max_depth": int,
    "tol": float, "seed": int, "format": str, "kind": str, "Q": int,
    "branching": int, "n_samples": int,
}


class InputError(ValueError):
    """Malformed command line, config or input file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# formatting ---------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return float(f"{f:.12g}") if math.isfinite(f) else str(f)
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return v


def emit_report(rows: list[dict], fmt: str = "table", columns: list[str] | None = None,
                series: tuple[str, str] | None = None) -> str:
    """Render result rows.

    Columns keep the order given (or of the first row); numbers carry 12
    significant digits.  With ``series=(x, y)`` the structured format adds
    one plot-ready record holding both columns.
    """
    if fmt not in FORMATS:
        raise InputError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if fmt == "jsonl":
        # records keep their own keys unless columns are imposed
        out = [json.dumps({c: _json_value(r.get(c)) for c in (columns or r)}) for r in rows]
        if series and rows:
            x, y = series
            out.append(json.dumps({"series": y, "x": _json_value([r[x] for r in rows]),
                                   "y": _json_value([r[y] for r in rows])}))
        return "".join(line + "\n" for line in out)
    if columns is None:
        columns = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
        return buf.getvalue()
    cells = [[_fmt(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


# inputs ---------------------------------------------------------------------------

def load_config(path: str | None) -> dict:
    """Parse ``key = value`` lines (``#`` comments) with :mod:`configparser`."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[treecap]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"malformed config {path}: {exc}") from None
    cfg = {}
    for key, value in parser["treecap"].items():
        if key not in CONFIG_KEYS:
            raise InputError(f"config: unknown key {key!r}")
        try:
            cfg[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise InputError(f"config: bad value for {key}: {value!r}") from None
    return cfg


def load_tree(desc: str) -> WeightedTree:
    """Generator string (``binary:H``, ``binary:2:H``, ``homogeneous:B:H[:W]``, ``chain:H``) or a file."""
    head, _, rest = desc.partition(":")
    args = rest.split(":") if rest else []
    try:
        if head == "binary" and len(args) in (1, 2):
            if len(args) == 2 and args[0] != "2":
                raise InputError("binary trees have branching 2")
            return homogeneous_tree(2, int(args[-1]))
        if head == "homogeneous" and len(args) in (2, 3):
            w = float(args[2]) if len(args) == 3 else 1.0
            return homogeneous_tree(int(args[0]), int(args[1]), w)
        if head == "chain" and len(args) == 1:
            return chain_tree(int(args[0]))
    except ValueError as exc:
        raise InputError(f"bad tree generator {desc!r}: {exc}") from None
    try:
        text = Path(desc).read_text()
    except OSError as exc:
        raise InputError(f"cannot read tree file {desc}: {exc}") from None
    return parse_tree(text)


def parse_node_set(tree: WeightedTree, text: str) -> list[int]:
    """``leaves``, ``root``, ``level:K`` or node ids separated by commas or spaces."""
    text = text.strip()
    if text == "leaves":
        return tree.leaves.tolist()
    if text == "root":
        return [0]
    if text.startswith("level:"):
        k = int(text.split(":", 1)[1])
        if not 0 <= k <= tree.height:
            raise InputError(f"level {k} outside 0..{tree.height}")
        sl = tree.level(k)
        return list(range(sl.start, sl.stop))
    index = {lab: i for i, lab in enumerate(tree.node_labels)}
    out = []
    for tok in text.replace(",", " ").split():
        if tok not in index:
            raise InputError(f"unknown node id {tok!r}")
        out.append(index[tok])
    if not out:
        raise InputError("empty node set")
    return out


def parse_range(text: str) -> list[int]:
    """``a..b`` (inclusive) or a comma list."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise InputError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(x) for x in text.replace(",", " ").split()]


def _space(kind: str, depth: int, cfg: dict):
    Q = cfg.get("Q") if kind == "cube" else None
    return make_space(kind, depth, Q=Q, delta=cfg.get("delta"))


# subcommands -----------------------------------------------------------------------

def _cmd_cap(args, cfg):
    tree = load_tree(args.tree)
    E = parse_node_set(tree, args.set)
    p = args.p
    if args.oracle == "primal":
        value = capacity_primal_oracle(tree, E, p, tol=args.tol, interior=args.interior)
    elif args.oracle == "dual":
        value = capacity_dual_oracle(tree, E, p, tol=args.tol, interior=args.interior)
    else:
        value = capacity(tree, E, p, interior=args.interior)
    return [{"capacity": value}], None, EXIT_OK


def _cmd_equilibrium(args, cfg):
    tree = load_tree(args.tree)
    E = parse_node_set(tree, args.set)
    res = equilibrium(tree, E, args.p, interior=args.interior)
    labels = tree.node_labels
    mu = dict(zip(res.mu.support.tolist(), res.mu.mass.tolist()))
    rows = [{"node": labels[v], "depth": int(tree.depth[v]), "phi": float(res.phi[v]),
             "mass": float(mu.get(v, 0.0))} for v in np.flatnonzero(res.phi)]
    summary = {"node": "summary", "depth": "", "phi": res.capacity, "mass": res.mu.total}
    if args.format == "jsonl":
        summary = {"capacity": res.capacity, "max_residual": res.max_residual,
                   "carleson_norm": res.carleson}
        return [summary] + rows, None, EXIT_OK
    return rows + [summary], ["node", "depth", "phi", "mass"], EXIT_OK


def _cmd_estimate(args, cfg):
    sd = parse_set_descriptor(args.set, 1 if args.space != "cube" else cfg.get("Q", 1))
    rows = []
    prev = None
    for d in args.depths:
        space = _space(args.space, d, cfg)
        E = discretize_set(space, sd, d)
        cap = capacity(weight_pi_s(space, args.s, args.p), E, args.p)
        rows.append({"depth": d, "cells": len(E), "capacity": cap,
                     "ratio_prev": (prev / cap) if prev else float("nan")})
        prev = cap
    return rows, None, EXIT_OK


def _cmd_ball(args, cfg):
    extra = args.extra
    rows = []
    for k in args.levels:
        space = _space(args.space, k + extra, cfg)
        r = space.delta**k
        est = ball_capacity_estimate(space, r, args.s, args.p)
        tree = weight_pi_s(space, args.s, args.p)
        cap = capacity(tree, [space.node_at(k, 0)], args.p)
        rows.append({"r": r, "level": k, "estimate": est.value, "capacity": cap,
                     "ratio": cap / est.value, "regime": est.regime})
    return rows, None, EXIT_OK


def _cmd_check(args, cfg):
    from . import lab
    from .spaces import lebesgue

    rng = np.random.default_rng(args.seed)
    p = args.p
    reports = []
    if args.name in ("cmcap", "monotonicity", "trace", "shadow"):
        for i in range(args.instances):
            tree = lab.random_tree(rng, cfg.get("max_depth", 4), cfg.get("branching", 3))
            E = lab.random_antichain(rng, tree)
            if args.name == "cmcap":
                rep = lab.check_cmcap(tree, E, p, n_samples=cfg.get("n_samples", 200),
                                      seed=args.seed + i)
            elif args.name == "monotonicity":
                mu = lab.random_measure(rng, tree, E.nodes)
                rep = lab.check_monotonicity(tree, mu, rng.random(tree.n_nodes), p)
                rep.seed = args.seed
            elif args.name == "trace":
                mu = equilibrium(tree, E, p).mu
                fam = [lab.random_antichain(rng, tree) for _ in range(8)]
                rep = lab.check_trace_conditions(tree, mu, p, fam, seed=args.seed + i)
            else:
                rep = lab.check_shadow(tree, E, p)
                rep.seed = args.seed
            reports.append(rep)
    elif args.name == "mww":
        space = _space(args.space, max(args.depths), cfg)
        for d in args.depths:
            reports.append(lab.check_mww(space, lebesgue(space), conjugate_or(p), d, s=args.s))
    elif args.name == "energy":
        space = _space(args.space, max(args.depths) + 1, cfg)
        reports.append(lab.check_energy_equivalence(space, lebesgue(space), args.s, p, args.depths))
    elif args.name == "transfer":
        if not args.set:
            raise InputError("check transfer needs --set")
        space = _space(args.space, 0, cfg)
        reports.append(lab.check_capacity_transfer(space, args.set, args.s, p, args.depths))
    elif args.name == "ball":
        reports.append(lab.check_ball_capacities(args.s, p, args.depths))
    else:
        raise InputError(f"unknown check {args.name!r}")
    rows = []
    for rep in reports:
        rec = rep.record()
        rows.append({"check": rec["name"], "instance": rec["instance"], "left": rec["left"],
                     "right": rec["right"], "ratio": rec["ratio"], "bound": rec["bound"],
                     "passed": rec["passed"], "seed": rec["seed"],
                     **({"empirical": rec["empirical"]} if args.format == "jsonl" else {})})
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK
    return rows, None, code


def conjugate_or(p: float) -> float:
    from .tree import conjugate

    return conjugate(p)


def exit_code_for(results) -> int:
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def _cmd_selftest(args, cfg):
    from .acceptance import CRITERIA, run_all

    numbers = parse_range(args.criteria) if args.criteria else sorted(CRITERIA)
    bad = [n for n in numbers if n not in CRITERIA]
    if bad:
        raise InputError(f"unknown criteria {bad}")
    results = run_all(numbers, stream=None)
    if not args.quiet:
        for r in results:
            print(r.line(timing=args.timing), flush=True)
    return [], None, exit_code_for(results)


# parser ---------------------------------------------------------------------------------

def build_parser(cfg: dict) -> argparse.ArgumentParser:
    parser = _Parser(prog="treecap", description="Capacities on weighted trees and dyadic spaces.")
    parser.add_argument("--config", help=f"key = value defaults file (else ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_p=True):
        sp.add_argument("--format", choices=FORMATS, default=cfg.get("format", "table"))
        if need_p:
            sp.add_argument("--p", type=float, default=cfg.get("p"), required="p" not in cfg)

    sp = sub.add_parser("cap", help="capacity of a cylinder union")
    sp.add_argument("--tree", required=True, help="generator (binary:H, homogeneous:B:H, chain:H) or file")
    sp.add_argument("--set", required=True, help="leaves, root, level:K or node ids")
    sp.add_argument("--interior", action="store_true", help="constrain at the listed nodes themselves")
    sp.add_argument("--oracle", choices=("recursion", "primal", "dual"), default="recursion")
    sp.add_argument("--tol", type=float, default=cfg.get("tol", 1e-8))
    common(sp)
    sp.set_defaults(func=_cmd_cap)

    sp = sub.add_parser("equilibrium", help="equilibrium function and measure")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--interior", action="store_true")
    common(sp)
    sp.set_defaults(func=_cmd_equilibrium)

    sp = sub.add_parser("estimate", help="capacities of a discretized set across depths")
    sp.add_argument("--space", default=cfg.get("kind", "interval"), choices=("interval", "cube", "cantor"))
    sp.add_argument("--set", required=True, help="'interval a b ...', 'ifs r t ...' or 'points x ...'")
    sp.add_argument("--s", type=float, default=cfg.get("s"), required="s" not in cfg)
    sp.add_argument("--depths", type=parse_range, default=None)
    common(sp)
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser("ball", help="ball capacities against their comparison values")
    sp.add_argument("--space", default=cfg.get("kind", "interval"), choices=("interval", "cube", "cantor"))
    sp.add_argument("--s", type=float, default=cfg.get("s"), required="s" not in cfg)
    sp.add_argument("--levels", type=parse_range, default=parse_range("2..10"),
                    help="radii r = δ^k for k in this range")
    sp.add_argument("--extra", type=int, default=8, help="levels resolved below the ball")
    common(sp)
    sp.set_defaults(func=_cmd_ball)

    sp = sub.add_parser("check", help="run one numerical check")
    sp.add_argument("name", choices=("cmcap", "monotonicity", "trace", "shadow", "mww", "energy",
                                     "transfer", "ball"))
    sp.add_argument("--seed", type=int, default=cfg.get("seed", 0))
    sp.add_argument("--instances", type=int, default=5)
    sp.add_argument("--space", default=cfg.get("kind", "interval"), choices=("interval", "cube", "cantor"))
    sp.add_argument("--s", type=float, default=cfg.get("s", 0.5))
    sp.add_argument("--set", default=None)
    sp.add_argument("--depths", type=parse_range, default=parse_range("4..8"))
    common(sp)
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    sp.add_argument("--criteria", default=None, help="subset such as 1..4 or 2,5")
    sp.add_argument("--quiet", action="store_true")
    sp.add_argument("--timing", action="store_true", help="append run times (output no longer reproducible)")
    sp.set_defaults(func=_cmd_selftest)
    return parser


def run(argv=None, stdout=None) -> int:
    """Entry point returning the exit code."""
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre = _Parser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        cfg = load_config(known.config)
        args = build_parser(cfg).parse_args(argv)
        if getattr(args, "depths", "unset") is None:
            d = cfg.get("depth")
            args.depths = list(range(3, d + 1)) if d else parse_range("3..8")
        rows, columns, code = args.func(args, cfg)
        if rows or columns:
            series = None
            if args.command == "estimate":
                series = ("depth", "capacity")
            elif args.command == "ball":
                series = ("r", "capacity")
            stdout.write(emit_report(rows, args.format, columns, series))
        return code
    except OracleConvergenceError as exc:
        print(f"treecap: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (InputError, ValueError, IndexError, KeyError) as exc:
        print(f"treecap: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())

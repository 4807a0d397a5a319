"""Command-line front end.

One request per invocation: load a constraint file (JSON; see fileio),
run one command, print a JSON response to stdout (or --output).  Errors
are machine-readable JSON on stderr with exit codes 1 (contradiction),
2 (budget/limit), 3 (malformed input); 0 is success.  `check` prints its
report on stdout and exits 1 when the set is contradictory — finding a
contradiction is that command's job, not a failure of it.

Values are reported as {"exact": "p/q", "approx": "..."} — the exact
string appears whenever an exact engine ran; the approx rendering (12
significant digits, round-half-even) is always present.  Variables are
ordered by name so output is byte-stable for golden files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from . import fileio
from .errors import (
    BudgetExceededError,
    ContradictionError,
    LimitExceededError,
    MalformedInputError,
    OrdpolyError,
    PersistentTieError,
    SamplerError,
    ShapeError,
)
from .exact import (
    DEFAULT_BUDGET,
    interpolate_all,
    interpolate_exact,
    marginal_exact,
    volume_exact,
)
from .model import (
    SHAPE_REVERSE_TREE,
    SHAPE_TOTAL_ORDER,
    SHAPE_TREE,
    ConstraintSet,
    check_consistency,
    close_under_implication,
    decompose,
    flip_constraints,
    part_skeleton,
    polytope_dimension,
)
from .poly import PiecewisePolynomial
from .sampler import SamplerConfig, estimate_topk, hit_and_run_sample
from .sampler import _chain_means, _Walk  # shared stream for sampled interpolate
from .stable import stable_interpolate
from .topk import (
    SEMANTICS_GLOBAL,
    SEMANTICS_LOCAL,
    SEMANTICS_U,
    _part_values,
    global_topk,
    local_topk,
    select,
    u_topk,
)
from .tree import (
    interpolate_decomposed,
    marginal_decomposed,
    tree_from_part,
    volume_tree,
    _single_extension_value,
    as_tree,
)

__all__ = ["main", "run"]


# ---------------------------------------------------------------------------
# rendering


def _approx_str(value) -> str:
    """12 significant digits, round-half-even, as a string."""
    with localcontext() as ctx:
        ctx.prec = 12
        ctx.rounding = ROUND_HALF_EVEN
        if isinstance(value, Fraction):
            d = Decimal(value.numerator) / Decimal(value.denominator)
        else:
            d = +Decimal(repr(float(value)))
    return str(d)


def _value_json(value) -> dict:
    if isinstance(value, Fraction):
        return {"exact": str(value), "approx": _approx_str(value)}
    return {"approx": _approx_str(value)}


def _marginal_json(pw: PiecewisePolynomial) -> dict:
    return {
        "breakpoints": [str(b) for b in pw.breakpoints],
        "pieces": [[str(c) for c in piece.coeffs] for piece in pw.pieces],
        "mass": _value_json(pw.mass()),
    }


# ---------------------------------------------------------------------------
# engine dispatch helpers


def _auto_values(cs: ConstraintSet, names: list[str], budget: int, threads: int) -> dict[str, Fraction]:
    """Per-part engine choice: tree family when possible, exact otherwise."""
    values: dict[str, Fraction] = {}
    remaining: list[str] = []
    for n in names:
        v = cs.resolve(n)
        if v.id in cs.exact_values:
            values[n] = cs.exact_values[v.id]
        else:
            remaining.append(n)
    if remaining:
        d = decompose(cs)
        by_part: dict[int, set[str]] = {}
        for n in remaining:
            by_part.setdefault(d.part_index[n], set()).add(n)
        for part_no, wanted in sorted(by_part.items()):
            values.update(_part_values(d.parts[part_no], wanted, budget, threads))
    return values


def _stable_values(cs: ConstraintSet, names: list[str]) -> dict[str, Fraction]:
    values: dict[str, Fraction] = {}
    remaining: list[str] = []
    for n in names:
        v = cs.resolve(n)
        if v.id in cs.exact_values:
            values[n] = cs.exact_values[v.id]
        else:
            remaining.append(n)
    if remaining:
        d = decompose(cs)
        by_part: dict[int, set[str]] = {}
        for n in remaining:
            by_part.setdefault(d.part_index[n], set()).add(n)
        for part_no, wanted in sorted(by_part.items()):
            part = d.parts[part_no]
            skel = part_skeleton(part)
            if skel.shape == SHAPE_TOTAL_ORDER:
                values.update({n: _single_extension_value(skel, n) for n in wanted})
            elif skel.shape == SHAPE_TREE:
                sa = stable_interpolate(tree_from_part(part))
                values.update({n: sa.value_of(n) for n in wanted})
            elif skel.shape == SHAPE_REVERSE_TREE:
                sa = stable_interpolate(tree_from_part(flip_constraints(part)))
                values.update({n: 1 - sa.value_of(n) for n in wanted})
            else:
                raise ShapeError(
                    "no stable scheme exists for general-shaped components "
                    f"(component of {sorted(wanted)[0]!r})"
                )
    return values


def _sampled_values(cs: ConstraintSet, names: list[str], cfg: SamplerConfig, chains: int) -> tuple[dict[str, float], int]:
    walk = _Walk(cs)
    values: dict[str, float] = {}
    needs = []
    for n in names:
        cls = walk.class_of[cs.resolve(n).id]
        if cls.id in walk.quotient.exact_values:
            values[n] = float(walk.quotient.exact_values[cls.id])
        else:
            needs.append(n)
    used = 0
    if needs:
        means, used = _chain_means(walk, cfg, cfg.sample_count(), chains)
        for n in needs:
            cls = walk.class_of[cs.resolve(n).id]
            values[n] = float(means[walk.column[cls.id]])
    return values, used


def _auto_volume(cs: ConstraintSet, budget: int, threads: int) -> Fraction:
    total = Fraction(1)
    for part in decompose(cs).parts:
        skel = part_skeleton(part)
        if skel.shape == SHAPE_TREE:
            total *= volume_tree(tree_from_part(part))
        elif skel.shape == SHAPE_REVERSE_TREE:
            total *= volume_tree(tree_from_part(flip_constraints(part)))
        else:
            total *= volume_exact(part, budget=budget, threads=threads)
    return total


# ---------------------------------------------------------------------------
# commands


def _cmd_check(cs: ConstraintSet, args) -> tuple[dict, int]:
    report = check_consistency(close_under_implication(cs))
    if report.ok:
        return {"consistent": True}, 0
    return (
        {
            "consistent": False,
            "message": report.message,
            "witness": [v.name for v in report.witness],
        },
        1,
    )


def _cmd_close(cs: ConstraintSet, args) -> tuple[dict, int]:
    # run() has already rejected contradictory input.
    return {"constraints": json.loads(fileio.dumps(close_under_implication(cs)))}, 0


def _cmd_decompose(cs: ConstraintSet, args) -> tuple[dict, int]:
    d = decompose(cs)
    parts = []
    for class_vars, part in zip(d.classes, d.parts):
        skel = part_skeleton(part)
        unknown_names = sorted(v.name for v in class_vars)
        pinned_names = sorted(
            v.name
            for v in skel.nodes
            if v.id not in skel.quotient.reserved and v.name not in unknown_names
        )
        parts.append(
            {
                "unknowns": unknown_names,
                "pinned": pinned_names,
                "shape": skel.shape,
            }
        )
    parts.sort(key=lambda p: p["unknowns"])
    return {"parts": parts, "dimension": polytope_dimension(cs)}, 0


def _cmd_dim(cs: ConstraintSet, args) -> tuple[dict, int]:
    return {"dimension": polytope_dimension(cs)}, 0


def _cmd_volume(cs: ConstraintSet, args) -> tuple[dict, int]:
    if args.engine == "exact":
        vol = volume_exact(cs, budget=args.max_extensions, threads=args.threads)
    elif args.engine == "tree":
        vol = volume_tree(as_tree(cs))
    elif args.engine in ("auto", None):
        vol = _auto_volume(cs, args.max_extensions, args.threads)
    else:
        raise MalformedInputError(
            f"volume supports engines auto|exact|tree, not {args.engine!r}"
        )
    return {"volume": _value_json(vol)}, 0


def _interpolate_targets(cs: ConstraintSet, var: str | None) -> list[str]:
    if var is not None:
        return [cs.resolve(var).name]
    return sorted(v.name for v in cs.unknowns())


def _cmd_interpolate(cs: ConstraintSet, args) -> tuple[dict, int]:
    names = _interpolate_targets(cs, args.var)
    diagnostics: dict = {}
    if args.scheme == "stable":
        values = _stable_values(cs, names)
    elif args.engine == "sample":
        cfg = _sampler_config(args)
        floats, used = _sampled_values(cs, names, cfg, args.chains)
        diagnostics["samples"] = used
        values = floats
    elif args.engine == "exact":
        if len(names) == 1:
            values = {
                names[0]: interpolate_exact(
                    cs, names[0], budget=args.max_extensions, threads=args.threads
                )
            }
        else:
            everything = interpolate_all(
                cs, budget=args.max_extensions, threads=args.threads
            )
            values = {n: everything[n] for n in names}
    elif args.engine == "tree":
        values = {n: interpolate_decomposed(cs, n) for n in names}
    else:  # auto
        values = _auto_values(cs, names, args.max_extensions, args.threads)
    return (
        {"values": {n: _value_json(values[n]) for n in sorted(values)}},
        0,
        diagnostics,
    )


def _cmd_marginal(cs: ConstraintSet, args) -> tuple[dict, int]:
    if args.var is None:
        raise MalformedInputError("marginal requires --var")
    if args.engine == "exact":
        pw = marginal_exact(cs, args.var, budget=args.max_extensions)
    elif args.engine == "tree":
        pw = marginal_decomposed(cs, args.var)
    else:  # auto
        try:
            pw = marginal_decomposed(cs, args.var)
        except ShapeError:
            pw = marginal_exact(cs, args.var, budget=args.max_extensions)
    return {"variable": cs.resolve(args.var).name, "marginal": _marginal_json(pw)}, 0


def _cmd_topk(cs: ConstraintSet, args) -> tuple[dict, int]:
    if args.select is None:
        raise MalformedInputError("topk requires --select a,b,c")
    if args.k is None:
        raise MalformedInputError("topk requires --k")
    names = [s.strip() for s in args.select.split(",") if s.strip()]
    sel = select(cs, names)
    if args.engine == "sample":
        if args.semantics != SEMANTICS_LOCAL:
            raise MalformedInputError(
                "sampled top-k supports the local semantics only"
            )
        ranked = estimate_topk(cs, sel, args.k, _sampler_config(args), args.chains)
        entries = [
            {"variable": v.name, "value": _value_json(val)} for v, val in ranked
        ]
        return {
            "semantics": args.semantics,
            "k": args.k,
            "variables": [e["variable"] for e in entries],
            "entries": entries,
        }, 0
    fn = {
        SEMANTICS_LOCAL: local_topk,
        SEMANTICS_U: u_topk,
        SEMANTICS_GLOBAL: global_topk,
    }.get(args.semantics)
    if fn is None:
        raise MalformedInputError(
            f"semantics must be local|u|global, not {args.semantics!r}"
        )
    result = fn(cs, sel, args.k, budget=args.max_extensions, threads=args.threads)
    entries = [
        {"variable": v.name, "value": _value_json(val)} for v, val in result.entries
    ]
    return {
        "semantics": result.semantics,
        "k": result.k,
        "variables": [e["variable"] for e in entries],
        "entries": entries,
    }, 0


def _cmd_sample(cs: ConstraintSet, args) -> tuple[dict, int]:
    cfg = _sampler_config(args)
    points = [
        {n: float(v) for n, v in sorted(p.as_dict().items())}
        for p in hit_and_run_sample(cs, cfg, args.count)
    ]
    return {"count": len(points), "points": points}, 0


_COMMANDS = {
    "check": _cmd_check,
    "close": _cmd_close,
    "decompose": _cmd_decompose,
    "dim": _cmd_dim,
    "volume": _cmd_volume,
    "interpolate": _cmd_interpolate,
    "marginal": _cmd_marginal,
    "topk": _cmd_topk,
    "sample": _cmd_sample,
}


# ---------------------------------------------------------------------------
# plumbing


def _sampler_config(args) -> SamplerConfig:
    return SamplerConfig(
        epsilon=args.epsilon,
        delta=args.delta,
        burn_in=args.burn_in,
        thinning=args.thinning,
        seed=args.seed,
    )


def _default_threads() -> int:
    env = os.environ.get("ORDPOLY_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 3 (malformed input), not argparse's default 2,
    which is reserved for budget/limit failures."""

    def error(self, message: str):
        print(
            json.dumps({"error": "malformed", "message": message}, ensure_ascii=False),
            file=sys.stderr,
        )
        raise SystemExit(3)


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="ordpoly",
        description="Interpolation, volumes, marginals, and top-k over "
        "order/exact-value constraint sets (file format: JSON with "
        "variables/order/exact).",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("check", "consistency check with witness chain"),
        ("close", "output the closure as a constraint document"),
        ("decompose", "independent components and their shapes"),
        ("dim", "dimension of the admissible polytope"),
        ("volume", "polytope volume"),
        ("interpolate", "expected values (or stable-scheme values)"),
        ("marginal", "piecewise-polynomial marginal density of one variable"),
        ("topk", "top-k under local, u, or global semantics"),
        ("sample", "almost-uniform feasible points"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", help="constraint file path, or - for stdin")
        p.add_argument("--output", help="write the JSON response here instead of stdout")
        p.add_argument(
            "--max-extensions",
            type=int,
            default=DEFAULT_BUDGET,
            help="linear-extension budget for the exact engine",
        )
        p.add_argument(
            "--threads",
            type=int,
            default=_default_threads(),
            help="exact-engine/chain parallelism (env ORDPOLY_THREADS)",
        )
        if name in ("volume", "interpolate", "marginal", "topk"):
            engines = {
                "volume": ("auto", "exact", "tree"),
                "interpolate": ("auto", "exact", "tree", "sample"),
                "marginal": ("auto", "exact", "tree"),
                "topk": ("exact", "sample"),
            }[name]
            p.add_argument(
                "--engine",
                choices=engines,
                default=engines[0],
                help="engine choice (auto prefers tree-shaped parts)",
            )
        if name in ("interpolate", "marginal"):
            p.add_argument("--var", help="variable name (interpolate default: all unknowns)")
        if name == "interpolate":
            p.add_argument(
                "--scheme",
                choices=("uniform", "stable"),
                default="uniform",
                help="uniform-expectation or stable-balanced values",
            )
        if name == "topk":
            p.add_argument("--semantics", required=True, help="local | u | global")
            p.add_argument("--k", type=int, required=True)
            p.add_argument("--select", required=True, help="comma-separated variable names")
        if name == "sample":
            p.add_argument("--count", type=int, default=10, help="points to emit")
        if name in ("interpolate", "topk", "sample"):
            p.add_argument("--epsilon", type=float, default=0.05)
            p.add_argument("--delta", type=float, default=0.05)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--burn-in", type=int, default=None, dest="burn_in")
            p.add_argument("--thinning", type=int, default=None)
            p.add_argument("--chains", type=int, default=1)
    return ap


def _load(path: str) -> ConstraintSet:
    if path == "-":
        return fileio.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return fileio.load(fh)


def _error_json(kind: str, err: Exception, **extra) -> str:
    payload = {"error": kind, "message": str(err), **extra}
    return json.dumps(payload, ensure_ascii=False)


def run(argv: Sequence[str]) -> int:
    """Parse argv, execute, print; returns the exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # usage error (3) or --help (0)
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        cs = _load(args.input)
        if args.command != "check":
            # Gate every command on consistency up front so shortcuts that
            # read pinned values directly cannot answer for an empty polytope.
            # `check` is exempt: reporting inconsistency is its result.
            report = check_consistency(close_under_implication(cs))
            if not report.ok:
                raise ContradictionError(
                    report.message, tuple(v.name for v in report.witness)
                )
        outcome = _COMMANDS[args.command](cs, args)
        if len(outcome) == 3:
            results, code, diagnostics = outcome
        else:
            results, code = outcome
            diagnostics = {}
    except ContradictionError as err:
        print(_error_json("contradiction", err, witness=list(err.witness)), file=sys.stderr)
        return 1
    except BudgetExceededError as err:
        print(
            _error_json("budget", err, budget=err.budget, lower_bound=err.lower_bound),
            file=sys.stderr,
        )
        return 2
    except (ShapeError, LimitExceededError, SamplerError) as err:
        print(_error_json("limit", err), file=sys.stderr)
        return 2
    except PersistentTieError as err:
        print(_error_json("persistent-tie", err), file=sys.stderr)
        return 3
    except (MalformedInputError, OSError, json.JSONDecodeError) as err:
        print(_error_json("malformed", err), file=sys.stderr)
        return 3
    except OrdpolyError as err:  # safety net: library error without a mapping
        print(_error_json("error", err), file=sys.stderr)
        return 3
    elapsed_ms = round((time.perf_counter() - started) * 1000, 3)
    diagnostics.setdefault("engine", getattr(args, "engine", None) or args.command)
    if getattr(args, "scheme", None) == "stable":
        diagnostics["engine"] = "stable"
    diagnostics["elapsed_ms"] = elapsed_ms
    response = {"command": args.command, "results": results, "diagnostics": diagnostics}
    text = json.dumps(response, indent=2, ensure_ascii=False)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

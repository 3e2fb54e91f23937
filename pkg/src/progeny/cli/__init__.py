"""Command-line interface.

Subcommands: simulate, fluid, compare, extinction, minimize, demo-discrete.
Exit codes: 0 success, 1 usage/config error, 2 numeric failure, 3 I/O error.
PROGENY_THREADS overrides the ensemble worker count (results unchanged);
PROGENY_BACKEND selects the numba kernel or the pure-Python engine.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, ExprSyntaxError, ProgenyError
from ..fluid import NumericOptions
from ..models import SIR, Custom, LinearBDP, Model1, Model2, custom_from_strings
from .commands import (
    cmd_compare,
    cmd_demo_discrete,
    cmd_extinction,
    cmd_fluid,
    cmd_minimize,
    cmd_simulate,
)
from .config import load_config

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="progeny", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run a configured ensemble")
    sp.add_argument("--config", required=True, type=Path)
    sp.add_argument("--out", type=Path, default=None, help="override the output directory")

    fp = sub.add_parser("fluid", help="fluid summary and ODE curve for a model")
    fp.add_argument("--model", required=True, choices=["model1", "model2", "sir", "linear", "custom"])
    fp.add_argument("--lambda", dest="lam", type=float)
    fp.add_argument("--alpha", type=float)
    fp.add_argument("--mu", type=float)
    fp.add_argument("--beta", type=float)
    fp.add_argument("--gamma", type=float)
    fp.add_argument("--n-pop", type=int)
    fp.add_argument("--b", type=float)
    fp.add_argument("--d", type=float)
    fp.add_argument("--b-expr")
    fp.add_argument("--d-expr")
    fp.add_argument("--t-end", type=float, default=None)
    fp.add_argument("--csv", required=True, type=Path)

    cp = sub.add_parser("compare", help="sweep a parameter, compare simulation with fluid")
    cp.add_argument("--config", required=True, type=Path)
    cp.add_argument("--out", type=Path, default=None)

    ep = sub.add_parser("extinction", help="tabulate extinction-time estimators")
    ep.add_argument("--config", required=True, type=Path)
    ep.add_argument("--methods", default="eps1,eps2,star",
                    help="comma-separated: epsN and/or star")
    ep.add_argument("--out", type=Path, default=None)

    mp = sub.add_parser("minimize", help="minimize the extinction-time proxy over y2*")
    mp.add_argument("--alpha", required=True, type=float)
    mp.add_argument("--mu", required=True, type=float)
    mp.add_argument("--eps", required=True, type=int)
    mp.add_argument("--out", type=Path, default=Path("out"))
    mp.add_argument("--points", type=int, default=101, help="objective curve samples")
    mp.add_argument("--svg", action="store_true")

    dp = sub.add_parser("demo-discrete", help="binary-splitting generation demo")
    dp.add_argument("--mode", required=True, choices=["progeny", "popsize"])
    dp.add_argument("--K", required=True, type=float)
    dp.add_argument("--gens", required=True, type=int)
    dp.add_argument("--seed", required=True, type=int)
    dp.add_argument("--out", type=Path, default=Path("out"))
    dp.add_argument("--svg", action="store_true")

    return p


def _fluid_model(args):
    def need(name):
        v = getattr(args, name)
        if v is None:
            raise _UsageError(f"--model {args.model} requires --{name.replace('_', '-')}")
        return v

    if args.model == "model1":
        return Model1(lam=need("lam"), mu=need("mu"))
    if args.model == "model2":
        return Model2(lam=need("lam"), alpha=need("alpha"), mu=need("mu"))
    if args.model == "sir":
        return SIR(beta=need("beta"), gamma=need("gamma"), n_pop=need("n_pop"))
    if args.model == "linear":
        return LinearBDP(b=need("b"), d=need("d"))
    return custom_from_strings(need("b_expr"), need("d_expr"))


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "simulate":
            return cmd_simulate(load_config(args.config), args.out)
        if args.command == "fluid":
            try:
                model = _fluid_model(args)
            except _UsageError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            return cmd_fluid(model, args.t_end, args.csv)
        if args.command == "compare":
            return cmd_compare(load_config(args.config), args.out)
        if args.command == "extinction":
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            if not methods:
                print("error: --methods must name at least one method", file=sys.stderr)
                return 1
            return cmd_extinction(load_config(args.config), methods, args.out)
        if args.command == "minimize":
            if args.eps < 1:
                print("error: --eps must be >= 1", file=sys.stderr)
                return 1
            return cmd_minimize(args.alpha, args.mu, args.eps, args.out, args.points, args.svg)
        if args.command == "demo-discrete":
            return cmd_demo_discrete(args.mode, args.K, args.gens, args.seed, args.out, args.svg)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, ExprSyntaxError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except ProgenyError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""hochkit command line: one computation per invocation, JSON report out.

Exit codes: 0 when a verdict was computed (OBSTRUCTED included), 1 for bad
input, 2 when an internal invariant fails.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import reports as R
from . import serialize as S
from .errors import InputError, InvariantError


def _int_list(text: str) -> List[int]:
    """'1..4', '2', or '1,3,5'."""
    out: List[int] = []
    try:
        for part in text.split(","):
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError("expected integers like 1..4 or 1,2,3, got %r" % text) from None
    return out


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer, got %r" % text) from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hochkit", description="Exact A-infinity, Hochschild and formality computations.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text, *flags):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("file", help="input JSON file ('-' for stdin)")
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")
        sp.add_argument("--verify", action="store_true", help="re-verify the emitted report before writing it")
        for f in flags:
            if f == "bound":
                sp.add_argument("--arity-bound", type=_positive, dest="arity_bound")
            elif f == "levels":
                sp.add_argument("--levels", type=_positive)
        return sp

    add("check", "check Stasheff, morphism and Lie identities", "bound")
    add("transfer", "minimal model of a DG algebra by homotopy transfer", "bound")
    hh = add("hh", "weight-graded Hochschild cohomology of an associative algebra")
    hh.add_argument("--degree", type=_int_list, default=[2], help="HH degrees, e.g. 2 or 1..3")
    hh.add_argument("--weights", type=_int_list, default=[1, 2, 3, 4], help="weights (arities), e.g. 1..4")
    add("kaledin", "Kaledin class of a family over Q[h]/h^(n+1)", "bound", "levels")
    fm = add("formality", "decide n-formality with a certificate or obstruction", "levels")
    fm.set_defaults(levels=None)
    add("lie-gauge", "gauge-trivialize a Maurer-Cartan element", "bound", "levels")
    v = sub.add_parser("verify", help="re-check a report produced by another subcommand")
    v.add_argument("file", help="report JSON file ('-' for stdin)")
    return p


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError("%s: %s" % (path, e.strerror)) from None


def compute(args) -> dict:
    data = S.loads(_read(args.file))
    c = args.command
    if c == "check":
        return R.run_check(data, args.arity_bound)
    if c == "transfer":
        return R.run_transfer(data, args.arity_bound)
    if c == "hh":
        return R.run_hh(data, args.degree, args.weights)
    if c == "kaledin":
        return R.run_kaledin(data, args.levels, args.arity_bound)
    if c == "formality":
        return R.run_formality(data, args.levels if args.levels is not None else 1)
    if c == "lie-gauge":
        return R.run_lie_gauge(data, args.levels, args.arity_bound)
    raise InputError("unknown command %r" % c)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            rep = S.loads(_read(args.file))
            ok = R.verify_report(rep)
            print("verify %s %s: %s" % (rep.get("command"), rep.get("verdict"), "ok" if ok else "FAILED"))
            return 0 if ok else 2
        rep = compute(args)
        if args.verify and not R.verify_report(rep):
            raise InvariantError("emitted report does not re-verify")
        text = S.dumps(rep)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except InvariantError as e:
        print("hochkit: internal invariant failed: %s" % e, file=sys.stderr)
        return 2
    except (InputError, ValueError, KeyError, TypeError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print("hochkit: input error: %s" % msg, file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success or pass, 1 verification failure, 2 usage error.
All numbers are printed as exact rationals ("3", "-1/6").
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Sequence

from . import __version__
from .config import Config, from_sources
from .products import BudgetExceeded, TraceSpec, build_trace, y0_coefficient
from .reduction import OracleBudgetExceeded, ReductionError, SumSpec, order_decompose, reduce_sumspec, sumspec_eval
from .series import parse_monomial
from .span import enumerate_basis, find_relations
from .special import BiBracketIndex, FamilyTag, bibracket, bracket, eisenstein, zvalue
from .theorems import DEFAULT_DEGREES, DEFAULT_ORDERS, parse_theorem

SERIES_ORDER = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str, flag: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", type=int, help="q-order N")
    p.add_argument("--degree", type=int, help="total formal degree D")
    p.add_argument("--ybound", type=int, help="y-exponent bound Y (default N)")
    p.add_argument("--format", choices=("json", "text"), help="output format")
    p.add_argument("--budget-terms", dest="budget_terms", type=int, help="abort expansions above this size")
    p.add_argument("--certify-steps", dest="certify_steps", action="store_const", const=True,
                   help="check every reduction step against the brute-force oracle")
    p.add_argument("--parallel", type=int, help="worker processes for independent solves")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qzk", description="Exact multiple q-zeta values and trace verification.")
    p.add_argument("--version", action="version", version=f"qzk {__version__}")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    s = sub.add_parser("bracket", help="[s1,...,sl] as a q-series")
    s.add_argument("s", nargs="*", type=int)
    s = sub.add_parser("bibracket", help="[s1,...;r1,...] as a q-series")
    s.add_argument("s", help="comma-separated s entries")
    s.add_argument("r", nargs="?", default=None, help="comma-separated r entries (default zeros)")
    s = sub.add_parser("zvalue", help="Z(s1,...,sl) with all s >= 2")
    s.add_argument("s", nargs="+", type=int)
    s = sub.add_parser("eisenstein", help="G_k for even k >= 2")
    s.add_argument("k", type=int)

    s = sub.add_parser("expand", help="expand a named trace")
    s.add_argument("--trace", required=True, help="lemma31 | thm32:R | pn:N | bo")
    s.add_argument("--with-ab", dest="with_ab", action="store_true")
    s.add_argument("--coeff", help="print only this formal monomial, e.g. z^2*w")
    s.add_argument("--y0", action="store_true", help="keep only the y^0 part")

    s = sub.add_parser("reduce", help="reduce a lattice sum to bi-brackets")
    s.add_argument("--spec", required=True, help="JSON file encoding a SumSpec")
    s.add_argument("--strategy", choices=("auto", "forward", "mirror"), default="auto")

    s = sub.add_parser("verify", help="verify a theorem to a stated q-order")
    s.add_argument("--theorem", required=True, help="lemma31 | thm32:R | thm45 | thm54:N | bo | zids | eisenstein")

    s = sub.add_parser("relations", help="linear relations in a weight-graded basis")
    s.add_argument("--family", required=True, choices=[f.value for f in FamilyTag])
    s.add_argument("--max-weight", dest="max_weight", type=int, required=True)
    s.add_argument("--presentation", choices=("bracket", "okounkov"), default="bracket")

    sub.add_parser("selftest", help="run the built-in property suite")
    for sp in sub.choices.values():
        _common(sp)
    return p


def _emit(obj, text: str, cfg: Config, out) -> None:
    if cfg.format == "json":
        out.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _order(cfg_order, default):
    return default if cfg_order is None else cfg_order


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _series_cmd(args, cfg, out) -> int:
    N = _order(cfg.order, SERIES_ORDER)
    if args.cmd == "bracket":
        if any(x < 1 for x in args.s):
            raise UsageError("bracket: entries must be positive")
        s = bracket(tuple(args.s), N)
    elif args.cmd == "bibracket":
        sv = _ints(args.s, "s")
        rv = _ints(args.r, "r") if args.r is not None else (0,) * len(sv)
        try:
            idx = BiBracketIndex(sv, rv)
        except ValueError as exc:
            raise UsageError(f"bibracket: {exc}") from None
        s = bibracket(idx, N)
    elif args.cmd == "zvalue":
        if any(x < 2 for x in args.s):
            raise UsageError("zvalue: entries must be >= 2")
        s = zvalue(tuple(args.s), N)
    else:
        if args.k < 2 or args.k % 2:
            raise UsageError("eisenstein: k must be even and >= 2")
        s = eisenstein(args.k, N)
    _emit(s.to_json(), repr(s), cfg, out)
    return 0


def _expand(args, cfg, out) -> int:
    try:
        spec = TraceSpec.parse(args.trace, N=_order(cfg.order, SERIES_ORDER), D=_order(cfg.degree, 4),
                               Y=cfg.ybound, with_ab=args.with_ab)
    except ValueError as exc:
        raise UsageError(f"--trace: {exc}") from None
    p = build_trace(spec, cfg.budget_terms)
    if args.y0 and p.y_vars:
        try:
            p = y0_coefficient(p)
        except ValueError as exc:
            raise UsageError(f"--ybound: {exc}") from None
    if args.coeff is None:
        _emit(p.to_json(), repr(p), cfg, out)
        return 0
    try:
        e = parse_monomial(args.coeff, p.ring.formal_vars)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"--coeff: {exc}") from None
    layer = p.coefficient(e)
    obj = {"monomial": args.coeff, "terms": layer.to_json()}
    _emit(obj, f"[{args.coeff}]: " + (repr(layer.y0_part()) if not p.y_vars else repr(layer.to_json())), cfg, out)
    return 0


def _reduce(args, cfg, out) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = SumSpec.from_json(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"--spec: {exc}") from None
    N = _order(cfg.order, 15)
    try:
        combo = reduce_sumspec(spec, args.strategy, N if cfg.certify_steps else None, cfg.max_depth)
        lhs = sumspec_eval(spec, N)
    except ReductionError as exc:
        out.write(json.dumps({"error": str(exc)}) + "\n")
        return 1
    except ValueError as exc:
        # shape errors: empty groups, divergent exponents, lt/gt on a chain starting at 0
        raise UsageError(f"--spec: {exc}") from None
    rhs = combo.evaluate(N)
    ok = lhs == rhs
    obj = {
        "spec": spec.to_json(),
        "pieces": len(order_decompose(spec)),
        "combination": combo.to_json(),
        "max_weight": combo.max_weight,
        "certificate": {"q_order": N, "oracle": lhs.to_json(), "combination": rhs.to_json(), "agree": ok,
                        "steps_certified": bool(cfg.certify_steps)},
    }
    text = f"{combo!r}\ncertificate at q-order {N}: {'agree' if ok else 'DISAGREE'}"
    _emit(obj, text, cfg, out)
    return 0 if ok else 1


def _verify(args, cfg, out) -> int:
    try:
        name, runner, kw = parse_theorem(args.theorem)
    except ValueError as exc:
        raise UsageError(f"--theorem: {exc}") from None
    key = name.split(":")[0]
    kw.update(N=_order(cfg.order, DEFAULT_ORDERS[key]), budget_terms=cfg.budget_terms)
    if key in DEFAULT_DEGREES:
        kw.update(D=_order(cfg.degree, DEFAULT_DEGREES[key]), Y=cfg.ybound)
    if key in ("lemma31", "thm32", "thm45", "thm54"):
        kw.update(margin=cfg.margin, workers=cfg.parallel)
    rep = runner(**kw)
    _emit(rep.to_json(), rep.to_text(), cfg, out)
    return 0 if rep.passed else 1


def _relations(args, cfg, out) -> int:
    N = _order(cfg.order, 40)
    if args.max_weight < 0:
        raise UsageError("--max-weight must be non-negative")
    basis = enumerate_basis(args.family, args.max_weight, N, args.presentation)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        rels = find_relations(basis, N, cfg.margin)
    rows = [{k: str(v) for k, v in r.items()} for r in rels]
    obj = {"family": args.family, "max_weight": args.max_weight, "q_order": N, "basis_size": len(basis),
           "weak_evidence": bool(caught), "relations": rows}
    text = "\n".join(" + ".join(f"{v}*{k}" for k, v in r.items()) + " = 0" for r in rows) or "no relations"
    _emit(obj, text, cfg, out)
    return 0


def _selftest(args, cfg, out) -> int:
    from .selftest import run_all
    results = run_all()
    ok = all(r["passed"] for r in results)
    text = "\n".join(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}" + (f": {r['error']}" if r.get("error") else "")
                     for r in results)
    _emit({"passed": ok, "checks": results}, text, cfg, out)
    return 0 if ok else 1


_DISPATCH = {"bracket": _series_cmd, "bibracket": _series_cmd, "zvalue": _series_cmd, "eisenstein": _series_cmd,
             "expand": _expand, "reduce": _reduce, "verify": _verify, "relations": _relations,
             "selftest": _selftest}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        if args.cmd is None:
            raise UsageError("missing subcommand")
        flags = {k: getattr(args, k, None) for k in ("order", "degree", "ybound", "format", "budget_terms",
                                                       "certify_steps", "parallel")}
        try:
            cfg = from_sources(flags)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return _DISPATCH[args.cmd](args, cfg, out)
    except UsageError as exc:
        err.write(f"qzk: usage error: {exc}\n")
        return 2
    except (BudgetExceeded, OracleBudgetExceeded) as exc:
        err.write(f"qzk: budget exceeded: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

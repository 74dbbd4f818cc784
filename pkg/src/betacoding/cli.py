"""Command-line front end: analyze, expand, kernel, sample."""

import argparse
import ast
import configparser
import json
import sys
from fractions import Fraction
from math import isqrt

import mpmath

from . import __version__
from .beta import BetaContext, eval_digits, greedy_expand
from .coding import MEASURE_NOTE, ORDER_NOTE, almost_one_one_sample, kernel_periodic
from .errors import (
    BetaCodingError,
    DegreeTooLarge,
    GapConditionUnmet,
    NonTerminating,
    NotHyperbolic,
    NotIrreducible,
    NotPisot,
    ParseError,
    PeriodCapExceeded,
    PrecisionExhausted,
    ReductionFailure,
    ZeroPolynomial,
)
from .places import classify_places, is_hyperbolic, is_irreducible
from .polyring import mahler_entropy, normalize_associated, parse_poly
from .shift import shift_entropy

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_PRECISION = 0, 1, 2, 3
REFUSALS = (NotHyperbolic, NotIrreducible, NotPisot, PeriodCapExceeded, DegreeTooLarge,
            NonTerminating, GapConditionUnmet, ReductionFailure)
DIGITS = 30
ENTROPY_TOLERANCE = "1e-9"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _s(x, digits=DIGITS):
    return mpmath.nstr(x, digits)


def _header(kind, args):
    return {
        "kind": kind,
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "precision_bits": args.precision,
        "padic_digits": args.padic_digits,
    }


def _context(poly_text, args):
    return BetaContext(normalize_associated(parse_poly(poly_text)), precision=args.precision, padic_digits=args.padic_digits)


# ---------------------------------------------------------------- analyze


def cmd_analyze(args):
    p = parse_poly(args.poly)
    f = normalize_associated(p)
    rep = _header("analyze", args)
    rep["input"] = args.poly
    rep["normalization"] = {
        "polynomial": str(f),
        "coefficients": list(f.coeffs),
        "shift": f.shift,
        "sign": f.sign,
        "content": f.content,
    }
    hyp = is_hyperbolic(f)
    rep["hyperbolic"] = {
        "value": hyp.value,
        "certificate": None if hyp.certificate is None else _s(hyp.certificate, 12),
        "reason": hyp.reason,
    }
    if not hyp:
        raise NotHyperbolic(f"{f} is not hyperbolic ({hyp.reason})", rep)
    irr = is_irreducible(f)
    rep["irreducible"] = irr
    if not irr:
        raise NotIrreducible(f"{f} is reducible over Q", rep)
    pc = classify_places(f, args.precision, args.padic_digits)
    rep["pisot"] = {"is_pisot": pc.pisot.is_pisot, **pc.pisot.to_json(DIGITS)}
    rep["places"] = pc.to_json(DIGITS)
    ctx = BetaContext(f, precision=args.precision, padic_digits=args.padic_digits)
    ent = shift_entropy(ctx, args.precision)
    mahler = mahler_entropy(f, args.precision)
    with mpmath.workprec(args.precision):
        mismatch = abs(mahler - ent.log_beta) > mpmath.mpf(ENTROPY_TOLERANCE)
    rep["entropy"] = {
        "beta": _s(ctx.beta_value),
        "mahler": _s(mahler),
        "beta_shift": _s(ent.log_beta),
        "automaton_spectral": None if ent.log_spectral_radius is None else repr(round(ent.log_spectral_radius, 12)),
        "mismatch": bool(mismatch),
        "tolerance": ENTROPY_TOLERANCE,
    }
    if ctx.is_pisot:
        pd = ctx.parry
        A = ctx.automaton
        rep["parry"] = pd.to_json()
        rep["automaton"] = {"states": A.n_states, "finite_type": A.is_finite_type}
        kern = kernel_periodic(ctx, args.max_period)
        rep["kernel"] = {"max_period": args.max_period, "sequences": [k.to_json() for k in kern]}
        sample = almost_one_one_sample(ctx, args.samples, (-12, 12), 1e-6, args.seed, threads=args.threads)
        rep["sampling"] = sample.to_json()
    else:
        rep["parry"] = None
        rep["automaton"] = None
        rep["kernel"] = None
        rep["sampling"] = None
    rep["notes"] = [ORDER_NOTE, MEASURE_NOTE]
    return rep


def _text_analyze(rep):
    lines = [
        f"polynomial      {rep['normalization']['polynomial']}",
        f"hyperbolic      {rep['hyperbolic']['value']}",
        f"irreducible     {rep['irreducible']}",
        f"pisot           {rep['pisot']['side']}",
    ]
    if rep["pisot"]["is_pisot"]:
        lines.append(f"beta            {rep['pisot']['beta']}  unit={rep['pisot']['is_unit']}")
    for row in rep["places"]:
        where = f"p={row['prime']} slope {row['newton_slope']}" if row["kind"] == "padic" else f"|root|={row['modulus'][:12]}"
        lines.append(f"place           {row['kind']:<12} {row['tag']:<9} {where}")
    e = rep["entropy"]
    lines.append(f"entropy         mahler={e['mahler'][:14]} log(beta)={e['beta_shift'][:14]} mismatch={e['mismatch']}")
    if rep["parry"]:
        lines.append(f"d(1)            {rep['parry']['d1']}")
        lines.append(f"automaton       {rep['automaton']['states']} states, finite type {rep['automaton']['finite_type']}")
        lines.append("kernel          " + ", ".join(f"({k['word']})^inf@{k['phase']}" for k in rep["kernel"]["sequences"]))
        s = rep["sampling"]
        lines.append(f"sampling        {s['samples']} samples, {s['unexplained']} unexplained, {s['kernel_explained']} kernel-explained")
    lines.append(f"note            {ORDER_NOTE}")
    return "\n".join(lines)


# ---------------------------------------------------------------- expand


class _Evaluator(ast.NodeVisitor):
    """Evaluates +, -, *, /, integer powers, b/beta and sqrt(c) in Q(beta)."""

    def __init__(self, ctx):
        self.ctx = ctx

    def visit_Expression(self, node):
        return self.visit(node.body)

    def visit_Constant(self, node):
        if isinstance(node.value, bool) or not isinstance(node.value, int):
            raise ParseError(f"unsupported literal {node.value!r}")
        return self.ctx.field.from_rational(node.value)

    def visit_Name(self, node):
        if node.id in ("b", "beta"):
            return self.ctx.beta
        raise ParseError(f"unknown symbol {node.id!r}")

    def visit_UnaryOp(self, node):
        v = self.visit(node.operand)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        raise ParseError("unsupported unary operator")

    def visit_BinOp(self, node):
        if isinstance(node.op, ast.Pow):
            e = node.right
            if isinstance(e, ast.UnaryOp) and isinstance(e.op, ast.USub) and isinstance(e.operand, ast.Constant) \
                    and type(e.operand.value) is int:
                n = -e.operand.value
            elif isinstance(e, ast.Constant) and type(e.value) is int:
                n = e.value
            else:
                raise ParseError("exponents must be integer literals")
            return self.visit(node.left) ** n
        a, b = self.visit(node.left), self.visit(node.right)
        ops = {ast.Add: lambda: a + b, ast.Sub: lambda: a - b, ast.Mult: lambda: a * b, ast.Div: lambda: a / b}
        for k, fn in ops.items():
            if isinstance(node.op, k):
                try:
                    return fn()
                except ZeroDivisionError as exc:
                    raise ParseError("division by zero") from exc
        raise ParseError("unsupported operator")

    def visit_Call(self, node):
        if not (isinstance(node.func, ast.Name) and node.func.id == "sqrt" and len(node.args) == 1):
            raise ParseError("only sqrt(c) calls are supported")
        c = self.visit(node.args[0])
        if len(c.coords) > 1:
            raise ParseError("sqrt of an irrational number is not supported")
        return _sqrt_rational(c.coords[0] if c.coords else Fraction(0), self.ctx)

    def generic_visit(self, node):
        raise ParseError(f"unsupported syntax: {type(node).__name__}")


def _rational_sqrt(q):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    return Fraction(rn, rd) if rn * rn == n and rd * rd == d else None


def _sqrt_rational(c, ctx):
    r = _rational_sqrt(c)
    F = ctx.field
    if r is not None:
        return F.from_rational(r)
    if F.degree != 2:
        raise ParseError(f"sqrt({c}) is not in Q(beta)")
    b0, b1 = F.minpoly[0], F.minpoly[1]
    disc = b1 * b1 - 4 * b0
    ratio = _rational_sqrt(c / disc)
    if ratio is None:
        raise ParseError(f"sqrt({c}) is not in Q(beta)")
    root = ratio * (2 * ctx.beta + b1)
    return root if root.sign() > 0 else -root


def parse_field_element(text, ctx):
    """Rationals, 'a+b*sqrt(c)', expressions in b/beta, or a coordinate list '[c0, c1]'."""
    s = text.strip()
    if s.startswith("["):
        try:
            vals = json.loads(s.replace("'", '"'))
            coords = tuple(Fraction(str(v)) for v in vals)
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad coordinate list {text!r}") from exc
        return ctx.field(coords)
    try:
        tree = ast.parse(s.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}") from exc
    return _Evaluator(ctx).visit(tree)


def cmd_expand(args):
    ctx = _context(args.poly, args)
    x = parse_field_element(args.x, ctx)
    if x.sign() < 0:
        raise ParseError("greedy expansion needs x >= 0")
    exp = greedy_expand(x, ctx, args.depth)
    rep = _header("expand", args)
    rep.update({
        "input": args.x,
        "polynomial": str(ctx.f),
        "beta": _s(ctx.beta_value),
        "depth": args.depth,
        "digits": str(exp.digits),
        "start_exponent": exp.digits.start_exponent,
        "terminated": exp.remainder.is_zero(),
        "remainder": [str(c) for c in exp.remainder.coords],
        "remainder_value": _s(exp.remainder.to_mpf(args.precision), 20),
        "value": _s(eval_digits(exp.digits, ctx).value + exp.remainder.to_mpf(args.precision)),
    })
    return rep


def _text_expand(rep):
    tail = "" if rep["terminated"] else f"  (+ remainder {rep['remainder_value']})"
    return f"{rep['digits'] or '0'}{tail}"


# ---------------------------------------------------------------- kernel, sample


def cmd_kernel(args):
    ctx = _context(args.poly, args)
    kern = kernel_periodic(ctx, args.max_period)
    rep = _header("kernel", args)
    rep.update({
        "polynomial": str(ctx.f),
        "max_period": args.max_period,
        "dstar": ctx.parry.to_json()["dstar"],
        "sequences": [k.to_json() for k in kern],
        "test": "exact: c+ in Z[beta, 1/beta] and c- = -c+ in Q(beta)",
    })
    return rep


def _text_kernel(rep):
    return "\n".join(f"({k['word']})^inf phase {k['phase']}" for k in rep["sequences"])


def _window(text):
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"window must be 'lo,hi', got {text!r}") from exc
    if lo > hi:
        raise UsageError(f"empty window [{lo}, {hi}]")
    return lo, hi


def cmd_sample(args):
    ctx = _context(args.poly, args)
    window = _window(args.window)
    if args.samples < 1 or args.epsilon <= 0:
        raise UsageError("samples must be positive and epsilon > 0")
    rep = _header("sample", args)
    res = almost_one_one_sample(ctx, args.samples, window, args.epsilon, args.seed, inject=args.inject, threads=args.threads)
    rep.update({"polynomial": str(ctx.f), **res.to_json()})
    return rep


def _text_sample(rep):
    return (f"{rep['samples']} samples on [{rep['window'][0]}, {rep['window'][1]}]: "
            f"{rep['collisions']} collisions, {rep['kernel_explained']} kernel-explained, "
            f"{rep['unexplained']} unexplained, {rep['injected_detected']}/{rep['injected_witnesses']} witnesses detected")


COMMANDS = {
    "analyze": (cmd_analyze, _text_analyze),
    "expand": (cmd_expand, _text_expand),
    "kernel": (cmd_kernel, _text_kernel),
    "sample": (cmd_sample, _text_sample),
}


# ---------------------------------------------------------------- driver


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--precision", type=int, default=128, help="working precision in bits")
    common.add_argument("--padic-digits", type=int, default=64, help="p-adic digits kept")
    common.add_argument("--depth", type=int, default=64, help="greedy expansion depth")
    common.add_argument("--max-period", type=int, default=6, help="largest period searched for kernel sequences")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--config", help="ini file; keys are flag names, flags override")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")

    p = _Parser(prog="betacoding", description="Beta-shift coding of cyclic algebraic dynamical systems.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", parents=[common], help="full classification report")
    a.add_argument("poly")
    a.add_argument("--samples", type=int, default=100)
    e = sub.add_parser("expand", parents=[common], help="greedy beta-expansion of x")
    e.add_argument("x")
    e.add_argument("poly")
    k = sub.add_parser("kernel", parents=[common], help="periodic sequences coding to the identity")
    k.add_argument("poly")
    s = sub.add_parser("sample", parents=[common], help="almost 1-1 sampling run")
    s.add_argument("poly")
    s.add_argument("--samples", type=int, default=500)
    s.add_argument("--window", default="-12,12")
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--no-inject", dest="inject", action="store_false")
    return p


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the --config file, so flags still win."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cp = configparser.ConfigParser()
    if not cp.read(args.config):
        raise UsageError(f"cannot read config file {args.config!r}")
    values = dict(cp.defaults())
    for section in cp.sections():
        values.update(cp[section])
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "poly", "x", "help"):
            raise UsageError(f"unknown config key {key!r}")
        action = known[dest]
        try:
            defaults[dest] = action.type(raw) if action.type else raw
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.precision < 8 or args.padic_digits < 8 or args.max_period < 1 or args.depth < 0:
        print("usage error: precision and padic-digits need >= 8, max-period >= 1, depth >= 0", file=sys.stderr)
        return EXIT_USAGE
    run, text = COMMANDS[args.command]
    code = EXIT_OK
    try:
        with mpmath.workprec(args.precision):
            rep = run(args)
    except (UsageError, ParseError, ZeroPolynomial) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except REFUSALS as exc:
        partial = exc.args[1] if len(exc.args) > 1 and isinstance(exc.args[1], dict) else _header(args.command, args)
        rep = dict(partial, refused=True, reason=str(exc.args[0]), error=type(exc).__name__)
        code = EXIT_REFUSED
    except BetaCodingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    if args.fmt == "json":
        out.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    elif code == EXIT_REFUSED:
        out.write(f"refused: {rep['reason']}\n")
    else:
        out.write(text(rep) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: expression parsing, dispatch and report output."""
from __future__ import annotations

import argparse
import ast
import hashlib
import json
import operator
import re
import sys
from fractions import Fraction
from typing import Sequence

from .core import Poly, QExp, RatFun, RatMatrix, as_fraction
from .errors import DomainError, Inconclusive, ParseError, QDiffError

# --------------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|(.))")


def _tokenize(s: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    s = s.rstrip()
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("num", m.group(1), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", start, "a number, x, an operator or a parenthesis")
            out.append(("op", ch, start))
        pos = m.end()
    out.append(("end", "", len(s)))
    return out


class _Parser:
    """expr := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*;
    unary := ('+'|'-') unary | power; power := atom ('^' int)?."""

    def __init__(self, text: str, q: Fraction | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.q = q

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, ch: str):
        kind, val, pos = self.take()
        if kind != "op" or val != ch:
            raise ParseError(f"found {val or 'end of input'!r}", pos, repr(ch))

    def parse(self) -> RatFun:
        f = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r}", pos, "an operator or end of input")
        return f

    def expr(self) -> RatFun:
        f = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            g = self.term()
            f = f + g if op == "+" else f - g
        return f

    def term(self) -> RatFun:
        f = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            g = self.unary()
            if op == "*":
                f = f * g
            else:
                if g.is_zero():
                    raise DomainError("division by zero")
                f = f / g
        return f

    def unary(self) -> RatFun:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            f = self.unary()
            return -f if val == "-" else f
        return self.power()

    def _int_exponent(self) -> int:
        kind, val, pos = self.peek()
        sign = 1
        if kind == "op" and val == "(":
            self.take()
            n = self._int_exponent()
            self.expect_op(")")
            return n
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
            kind, val, pos = self.peek()
        if kind != "num":
            raise ParseError(f"found {val or 'end of input'!r}", pos, "an integer exponent")
        self.take()
        return sign * int(val)

    def power(self) -> RatFun:
        f = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            n = self._int_exponent()
            if n < 0 and f.is_zero():
                raise DomainError("zero to a negative power")
            f = f ** n
        return f

    def atom(self) -> RatFun:
        kind, val, pos = self.take()
        if kind == "num":
            return RatFun.const(int(val))
        if kind == "name":
            if val == "x":
                return RatFun.x()
            if val == "q" and self.q is not None:
                return RatFun.const(self.q)
            raise ParseError(f"unknown name {val!r}", pos, "x" + (" or q" if self.q is not None else ""))
        if kind == "op" and val == "(":
            f = self.expr()
            self.expect_op(")")
            return f
        raise ParseError(f"found {val or 'end of input'!r}", pos, "a number, x or '('")


def parse_ratfun(s: str, q=None) -> RatFun:
    """Exact rational function from text; `q` may appear when a value is bound."""
    return _Parser(s, None if q is None else as_fraction(q)).parse()


_QEXP = re.compile(r"^\s*q\s*(?:\^\s*(?:\(\s*(-?\d+(?:\s*/\s*\d+)?)\s*\)|(-?\d+)))?\s*(?:\*\s*(.+))?$")


def parse_scaled(s: str, q):
    """'q^(e/d) * expr', 'q^k', 'q' or a plain expression.

    Returns a QExp, a ScaledRatFun or a RatFun.
    """
    from .solver import ScaledRatFun

    m = _QEXP.match(s)
    if not m:
        return parse_ratfun(s, q)
    e = Fraction((m.group(1) or m.group(2) or "1").replace(" ", ""))
    if m.group(3) is None:
        return QExp(e)
    return ScaledRatFun(QExp(e), parse_ratfun(m.group(3), q))


def parse_q(s: str) -> Fraction:
    try:
        f = parse_ratfun(s)
    except ParseError as exc:
        raise ParseError(f"bad value for q: {exc}") from None
    if not f.is_const():
        raise DomainError("q must be a rational constant")
    return f.const_value()


def parse_param(s: str, q):
    """Hypergeometric parameter: a QExp for q-power forms, else a rational."""
    v = parse_scaled(s, q)
    if isinstance(v, QExp):
        return v
    if isinstance(v, RatFun) and v.is_const():
        return v.const_value()
    raise DomainError(f"parameter {s!r} must be a constant or a power of q")


def parse_matrix(doc, q=None) -> RatMatrix:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"matrix is not valid JSON: {exc.msg}", exc.pos, "a JSON array of arrays") from None
    if not isinstance(doc, list) or not doc or not all(isinstance(r, list) for r in doc):
        raise ParseError("matrix must be a non-empty JSON array of arrays")
    return RatMatrix.from_rows([[parse_ratfun(str(e), q) for e in row] for row in doc])


# ------------------------------------------------------------------ qcalc-eval

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def qcalc_eval(expr: str, q) -> Fraction:
    """Evaluate arithmetic over qint, qfact, qbinom and qpoch exactly."""
    from . import qcalc

    q = as_fraction(q)
    funcs = {"qint": lambda n: qcalc.q_int(_nat(n), q),
             "qfact": lambda n: qcalc.q_factorial(_nat(n), q),
             "qbinom": lambda n, k: qcalc.q_binomial(_nat(n), _nat(k), q),
             "qpoch": lambda a, n: qcalc.q_pochhammer(a, _nat(n), q)}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(node.value)
        if isinstance(node, ast.Name) and node.id == "q":
            return q
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow):
                right = _int(right)
            if isinstance(node.op, ast.Div) and right == 0:
                raise DomainError("division by zero")
            return _BINOPS[type(node.op)](left, right)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in funcs and not node.keywords):
            return funcs[node.func.id](*[ev(a) for a in node.args])
        raise ParseError(f"unsupported syntax: {ast.dump(node)[:40]}", getattr(node, "col_offset", None),
                         "numbers, q, + - * / ^ and qint/qfact/qbinom/qpoch")

    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(exc.msg, exc.offset, "an arithmetic expression") from None
    return Fraction(ev(tree))


def _int(v: Fraction) -> int:
    if Fraction(v).denominator != 1:
        raise DomainError("expected an integer")
    return int(v)


def _nat(v) -> int:
    n = _int(v)
    if n < 0:
        raise DomainError("expected a nonnegative integer")
    return n


# ---------------------------------------------------------------- reporting


def tool_version() -> str:
    from . import __version__

    return __version__


def _fmt(v) -> str:
    return str(v)


def _inputs_hash(inputs: dict) -> str:
    body = json.dumps(inputs, sort_keys=True, default=str)
    return hashlib.sha256(body.encode()).hexdigest()[:16]


def _matrix_json(M: RatMatrix) -> list[list[str]]:
    return [[str(e) for e in row] for row in M.to_rows()]


def _scan_table(rep) -> list[str]:
    by_p: dict[int, dict] = {}
    for v in rep.verdicts:
        by_p.setdefault(v.p, {"kappa": v.kappa, "ell": v.ell})[v.modulus_used] = v
    lines = [f"{'p':>5} {'kappa':>6} {'ell':>4}  {'mod p':<16}{'mod p^ell':<16}"]

    def cell(v):
        if v is None:
            return "-"
        return f"{v.status} {v.order}" if v.status == "Unipotent" else v.status

    for p in sorted(by_p):
        row = by_p[p]
        lines.append(f"{p:>5} {row['kappa']:>6} {row['ell']:>4}  "
                     f"{cell(row.get('mod_p')):<16}{cell(row.get('mod_p_ell')):<16}")
    for b in rep.bad_primes:
        lines.append(f"bad prime {b['p']}: {b['reason']}")
    if rep.skipped_weak:
        lines.append("skipped (weak): " + ", ".join(map(str, rep.skipped_weak)))
    return lines


# ------------------------------------------------------------------ commands


def _system(args, need=True):
    from .qmodule import QDiffSystem

    doc = args.system
    if doc is None and args.stdin_doc is not None:
        doc = args.stdin_doc.get("system")
    if doc is None:
        if need:
            raise DomainError("no system given (use --system or a JSON document on stdin)")
        return None
    A = parse_matrix(doc, args.q)
    if args.column:
        return QDiffSystem.from_column_convention(args.q, A)
    return QDiffSystem(args.q, A)


def cmd_curvature_scan(args):
    from .arithmetic import MOD_P, MOD_P_ELL, curvature_scan

    S = _system(args)
    modulus = {"p": MOD_P, "p-ell": MOD_P_ELL, "both": "both"}[args.modulus]
    rep = curvature_scan(S, args.pmax, modulus, include_weak=args.include_weak, jobs=args.jobs)
    return rep.to_json(), _scan_table(rep)


def cmd_rational_solve(args):
    from .solver import rational_solutions

    S = _system(args)
    try:
        basis = rational_solutions(S, args.degree_cap, max(args.terms, 2 * args.degree_cap + 4))
    except Inconclusive as exc:
        return ({"status": "inconclusive", "degree_cap": exc.degree_cap, "solutions": []},
                [f"inconclusive: no rational basis reconstructed at degree cap {exc.degree_cap}"])
    if basis is None:
        return {"status": "none", "solutions": []}, ["no rational solutions"]
    sols = [[str(e) for e in row] for row in basis.solutions]
    status = "basis" if basis.complete else "partial"
    lines = [f"{status}: {len(sols)} independent rational solution(s), residuals verified zero"]
    lines += ["  [" + ", ".join(row) + "]" for row in sols]
    return {"status": status, "solutions": sols, "rank": basis.rank}, lines


def cmd_grothendieck(args):
    from .solver import grothendieck_test

    S = _system(args)
    rep = grothendieck_test(S, args.pmax, args.degree_cap, max(args.terms, 2 * args.degree_cap + 4),
                            jobs=args.jobs)
    out = rep.to_json()
    lines = [f"verdict: {rep.verdict}", f"curvature summary: {rep.scan.summary}"]
    if rep.details.get("failing_primes"):
        lines.append("non-identity primes: " + ", ".join(map(str, rep.details["failing_primes"][:20])))
    for row in rep.solutions:
        lines.append("  solution [" + ", ".join(map(str, row)) + "]")
    return out, lines


def cmd_schwarz(args):
    from .classify import HypergeomParams, goursat_rational, schwarz_rational

    if args.a is None or args.b is None or args.c is None:
        raise DomainError("schwarz needs --a, --b and --c")
    P = HypergeomParams(parse_param(args.a, args.q), parse_param(args.b, args.q),
                        parse_param(args.c, args.q), args.q)
    v = schwarz_rational(P)
    out = {"params": {"a": str(P.a), "b": str(P.b), "c": str(P.c)}, **v.to_json()}
    lines = [f"rational basis: {v.rational_basis}", f"algebraic basis: {v.algebraic_basis}",
             f"log singularity at 0: {v.log_sing_zero}", f"log singularity at infinity: {v.log_sing_infinity}"]
    if "triple" in v.witnesses:
        t = v.witnesses["triple"]
        out["goursat_triangle"] = goursat_rational(*t)
        lines.append(f"exponents {tuple(t)}, triangle condition: {out['goursat_triangle']}")
    return out, lines


def cmd_galois(args):
    from .classify import galois_antidiagonal2, galois_rank1, galois_triangular2

    if args.family == "rank1":
        desc = galois_rank1(parse_scaled(args.b, args.q), args.q, args.dcap)
    elif args.family == "triangular":
        desc = galois_triangular2(parse_ratfun(args.a, args.q), parse_scaled(args.b, args.q), args.q, args.dcap)
    else:
        desc = galois_antidiagonal2(parse_scaled(args.r, args.q), args.q, args.dcap)
    out = {"family": desc.family, "d": desc.d, "at_cap": desc.at_cap, "descriptor": str(desc)}
    return out, [f"generic Galois group: {desc}"]


def cmd_chi(args):
    from .arithmetic import chi_bounds, chi_truncated

    S = _system(args)
    if args.p is None:
        raise DomainError("chi needs --p")
    tr = chi_truncated(S, args.p, args.terms)
    bounds, skipped = chi_bounds(S, args.p)
    out = {"p": args.p, "N": args.terms, "truncated_log_p_chi": str(tr.value),
           "truncated_float": tr.as_float(),
           "bounds": [{"kind": b.kind, "value": _fmt(b.value), "meta": b.meta} for b in bounds],
           "skipped": skipped}
    lines = [f"log_p chi (truncated at N={args.terms}): {float(tr.value):.6f}"]
    for b in bounds:
        lines.append(f"{b.kind}: {b.value}")
    for k, why in skipped.items():
        lines.append(f"{k}: not applicable ({why})")
    return out, lines


def cmd_casorati(args):
    from .qmodule import casorati_rank

    if args.vector is None:
        raise DomainError("casorati needs --vector, a JSON list of expressions")
    items = json.loads(args.vector)
    u = [parse_ratfun(str(s), args.q) for s in items]
    r = casorati_rank(u, args.q)
    return {"rank": r, "size": len(u)}, [f"Casorati rank {r} of {len(u)}"]


def cmd_cyclic_vector(args):
    from .qmodule import cyclic_vector, is_companion_shaped

    S = _system(args)
    cv = cyclic_vector(S)
    out = {"vector": [str(e) for e in cv.m], "det_P": str(cv.P.det()),
           "companion": _matrix_json(cv.companion), "companion_shaped": is_companion_shaped(cv.companion)}
    lines = ["cyclic vector: [" + ", ".join(out["vector"]) + "]", f"det P = {out['det_P']}",
             "companion last column: [" + ", ".join(r[-1] for r in out["companion"]) + "]"]
    return out, lines


def cmd_qcalc_eval(args):
    if not args.expression:
        raise DomainError("qcalc-eval needs an expression")
    v = qcalc_eval(args.expression, args.q)
    return {"expression": args.expression, "value": str(v)}, [str(v)]


def cmd_size(args):
    from .arithmetic import size_partial

    S = _system(args)
    est = size_partial(S, args.terms, args.pmax)
    out = {"N": est.N, "pmax": est.pmax, "partial_sum": est.partial_sum,
           "contributions": [[str(p), v] for p, v in est.contributions]}
    return out, [f"size partial sum (N={est.N}, pmax={est.pmax}): {est.partial_sum:.6f}"]


def cmd_kappa_sum(args):
    from .arithmetic import kappa_sum_partial

    total, table = kappa_sum_partial(args.q, args.pmax)
    out = {"pmax": args.pmax, "total": total, "terms": len(table)}
    return out, [f"sum over p <= {args.pmax} of log p / (kappa_p (p - 1)) = {total:.9f}"]


COMMANDS = {
    "curvature-scan": cmd_curvature_scan,
    "rational-solve": cmd_rational_solve,
    "grothendieck": cmd_grothendieck,
    "schwarz": cmd_schwarz,
    "galois": cmd_galois,
    "chi": cmd_chi,
    "casorati": cmd_casorati,
    "cyclic-vector": cmd_cyclic_vector,
    "qcalc-eval": cmd_qcalc_eval,
    "size": cmd_size,
    "kappa-sum": cmd_kappa_sum,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdiff", description="Exact toolkit for linear q-difference systems over Q(x).")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("expression", nargs="?", help="expression for qcalc-eval")
    ap.add_argument("--q", help="the rational q (or read from a JSON document on stdin)")
    ap.add_argument("--system", help="matrix as a JSON array of arrays of expression strings")
    ap.add_argument("--column", action="store_true",
                    help="read the matrix in the column convention Y(qx) = B(x) Y(x)")
    ap.add_argument("--pmax", type=int, default=200)
    ap.add_argument("--terms", type=int, default=200)
    ap.add_argument("--degree-cap", type=int, default=30)
    ap.add_argument("--dcap", type=int, default=24)
    ap.add_argument("--modulus", choices=("p", "p-ell", "both"), default="both")
    ap.add_argument("--include-weak", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--p", type=int)
    ap.add_argument("--a")
    ap.add_argument("--b")
    ap.add_argument("--c")
    ap.add_argument("--r")
    ap.add_argument("--family", choices=("rank1", "triangular", "antidiagonal"), default="rank1")
    ap.add_argument("--vector")
    ap.add_argument("--json", action="store_true", help="emit JSON instead of text")
    ap.add_argument("--out", help="also write the JSON report to this file")
    return ap


def run(argv: Sequence[str] | None = None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_intermixed_args(argv)
    try:
        args.stdin_doc = None
        if args.system is None and args.command not in ("qcalc-eval", "kappa-sum", "schwarz", "galois", "casorati") \
                and not stdin.isatty():
            text = stdin.read()
            if text.strip():
                doc = json.loads(text)
                args.stdin_doc = doc if isinstance(doc, dict) else {"system": doc}
        if args.q is None and args.stdin_doc is not None and "q" in args.stdin_doc:
            args.q = str(args.stdin_doc["q"])
        if args.q is None:
            raise DomainError("--q is required")
        args.q = parse_q(args.q)
        if args.q in (0, 1, -1):
            raise DomainError("q must not be 0 or +-1")
        body, lines = COMMANDS[args.command](args)
    except json.JSONDecodeError as exc:
        print(f"error: stdin is not valid JSON: {exc.msg}", file=stderr)
        return 2
    except (DomainError, ParseError, QDiffError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("json", "out", "stdin_doc", "jobs")}
    if args.stdin_doc is not None:
        inputs["stdin"] = args.stdin_doc
    report = {"tool_version": tool_version(), "q": str(args.q), "command": args.command,
              "inputs_hash": _inputs_hash(inputs), **body}
    if args.json:
        print(json.dumps(report, indent=2, default=str), file=stdout)
    else:
        print("\n".join(lines), file=stdout)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, default=str)
    return 0


def main() -> None:
    sys.exit(run())

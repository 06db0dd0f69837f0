"""Parser, evaluator and asymptotic classifier for sequence expressions.

Expressions are over the integer variable ``n`` with operators
``+ - * / ^`` (``^`` right associative and binding tighter than unary
minus) and the functions ``sqrt``, ``log``, ``exp``, ``abs``.  They
specify the diagonal sequences ``h_n`` and ``v_n`` of infinite-mode
models; evaluation is vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError

__all__ = [
    "SeqExpr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Func",
    "AsymptoticClass",
    "parse",
    "to_string",
    "evaluate",
    "validate",
    "classify_asymptotics",
    "regression_points",
    "fit_samples",
]

_FUNCS = ("sqrt", "log", "exp", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "SeqExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "SeqExpr"
    right: "SeqExpr"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "SeqExpr"


SeqExpr = Union[Num, Var, Neg, BinOp, Func]


# ---------------------------------------------------------------------------
# lexer / parser (precedence climbing)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, lparen, rparen, end
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    i, m = 0, len(src)
    while i < m:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < m and src[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < m and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                seen_dot = seen_dot or src[j] == "."
                j += 1
            # scientific suffix: 1e-3, 2.5E+4
            if j < m and src[j] in "eE":
                k = j + 1
                if k < m and src[k] in "+-":
                    k += 1
                if k < m and src[k].isdigit():
                    while k < m and src[k].isdigit():
                        k += 1
                    j = k
            tokens.append(_Token("num", src[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < m and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("name", src[i:j], i))
            i = j
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
            continue
        raise InputError(f"unexpected character {c!r} at byte {i}")
    tokens.append(_Token("end", "", m))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, msg: str):
        raise InputError(f"{msg} at byte {self.tok.pos}")

    def parse(self) -> SeqExpr:
        e = self.sum_expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected token {self.tok.text!r}")
        return e

    def sum_expr(self) -> SeqExpr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> SeqExpr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> SeqExpr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> SeqExpr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            # right associative; the exponent may carry a unary sign
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> SeqExpr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text == "n":
                return Var()
            if t.text in _FUNCS:
                if self.tok.kind != "lparen":
                    self.fail(f"expected '(' after {t.text}")
                self.advance()
                arg = self.sum_expr()
                if self.tok.kind != "rparen":
                    self.fail("expected ')'")
                self.advance()
                return Func(t.text, arg)
            raise InputError(f"unknown identifier {t.text!r} at byte {t.pos}")
        if t.kind == "lparen":
            self.advance()
            e = self.sum_expr()
            if self.tok.kind != "rparen":
                self.fail("expected ')'")
            self.advance()
            return e
        self.fail(f"unexpected token {t.text!r}")


def parse(src: str) -> SeqExpr:
    """Parse a sequence expression in the variable ``n``.

    Precedence ``^`` > unary ``-`` > ``* /`` > ``+ -``; everything left
    associative except ``^``.  Errors carry byte offsets.
    """
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# printing (round-trips through parse to an equal AST)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def to_string(e: SeqExpr) -> str:
    """Render with minimal parentheses."""

    def render(e, parent_prec, is_right=False):
        if isinstance(e, Num):
            return _fmt_num(e.value)
        if isinstance(e, Var):
            return "n"
        if isinstance(e, Func):
            return f"{e.name}({render(e.arg, 0)})"
        if isinstance(e, Neg):
            inner = render(e.arg, _PREC["neg"])
            text = f"-{inner}"
            return f"({text})" if parent_prec > _PREC["neg"] else text
        prec = _PREC[e.op]
        if e.op == "^":
            # right associative; left operand needs strictly higher binding
            left = render(e.left, prec + 1)
            right = render(e.right, prec)
            text = f"{left}^{right}"
        else:
            left = render(e.left, prec)
            right = render(e.right, prec + 1)
            text = f"{left} {e.op} {right}"
        return f"({text})" if parent_prec > prec else text

    return render(e, 0)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: SeqExpr, n):
    """Evaluate at ``n`` (scalar or numpy array), vectorized.

    Domain violations (division by zero, log of a nonpositive value)
    produce inf/nan under numpy semantics; :func:`validate` screens them
    out up front for model expressions.
    """
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _eval(e, n)


def _eval(e, n):
    if isinstance(e, Num):
        return np.full_like(n, e.value)
    if isinstance(e, Var):
        return n
    if isinstance(e, Neg):
        return -_eval(e.arg, n)
    if isinstance(e, Func):
        x = _eval(e.arg, n)
        if e.name == "sqrt":
            return np.sqrt(x)
        if e.name == "log":
            return np.log(x)
        if e.name == "exp":
            return np.exp(x)
        return np.abs(x)
    l = _eval(e.left, n)
    r = _eval(e.right, n)
    if e.op == "+":
        return l + r
    if e.op == "-":
        return l - r
    if e.op == "*":
        return l * r
    if e.op == "/":
        return l / r
    return np.power(l, r)


def _probe_points(nmax: int = 10**6) -> np.ndarray:
    dense = np.arange(0, 257)
    sparse = np.unique(np.round(np.logspace(0, np.log10(nmax), 200)).astype(np.int64))
    return np.unique(np.concatenate([dense, sparse]))


def validate(e: SeqExpr, nmax: int = 10**6) -> None:
    """Reject expressions that are nonfinite anywhere on the probe range.

    Probes are n = 0..256 plus ~200 logarithmically spaced points up to
    ``nmax``.
    """
    pts = _probe_points(nmax)
    vals = evaluate(e, pts)
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(pts[bad][0])
        raise InputError(f"expression is not finite at n = {k}: {to_string(e)}")


# ---------------------------------------------------------------------------
# asymptotic classification


@dataclass(frozen=True)
class AsymptoticClass:
    """Leading growth class of a sequence.

    ``kind`` is one of ``power``, ``log-corrected-power``, ``exponential``,
    ``bounded``, ``unknown``.  ``exponent`` is the power (or the linear
    rate for exponentials); ``log_power`` the log correction; ``scale``
    the leading coefficient (or the limit of a bounded sequence) when the
    symbolic path determined it.
    """

    kind: str
    exponent: float | None = None
    log_power: float = 0.0
    scale: float | None = None


@dataclass(frozen=True)
class _Lead:
    """Leading term c * e^(r n) * n^a * log(n)^b."""

    c: float
    r: float
    a: float
    b: float


def _lead(e: SeqExpr) -> _Lead | None:
    if isinstance(e, Num):
        return _Lead(e.value, 0.0, 0.0, 0.0)
    if isinstance(e, Var):
        return _Lead(1.0, 0.0, 1.0, 0.0)
    if isinstance(e, Neg):
        l = _lead(e.arg)
        return None if l is None else _Lead(-l.c, l.r, l.a, l.b)
    if isinstance(e, Func):
        l = _lead(e.arg)
        if l is None:
            return None
        if e.name == "abs":
            return _Lead(abs(l.c), l.r, l.a, l.b)
        if e.name == "sqrt":
            if l.c < 0:
                return None
            return _Lead(np.sqrt(l.c), 0.5 * l.r, 0.5 * l.a, 0.5 * l.b)
        if e.name == "exp":
            if l.c == 0.0:
                return _Lead(1.0, 0.0, 0.0, 0.0)
            if l.r == 0.0 and l.a == 0.0 and l.b == 0.0:
                return _Lead(float(np.exp(l.c)), 0.0, 0.0, 0.0)
            if l.r == 0.0 and l.a == 1.0 and l.b == 0.0:
                return _Lead(1.0, l.c, 0.0, 0.0)
            if l.r < 0 or l.a < 0:
                # argument tends to 0: exp -> 1
                return _Lead(1.0, 0.0, 0.0, 0.0)
            return None  # superexponential or log-exponent forms
        if e.name == "log":
            if l.r != 0.0:
                return _Lead(l.r, 0.0, 1.0, 0.0)
            if l.a != 0.0:
                return _Lead(l.a, 0.0, 0.0, 1.0)
            if l.c > 0 and l.c != 1.0 and l.b == 0.0:
                return _Lead(float(np.log(l.c)), 0.0, 0.0, 0.0)
            return None  # log(1 + vanishing): leading term cancels
    l, r = _lead(e.left), _lead(e.right)
    if l is None or r is None:
        return None
    if e.op in "+-":
        rc = -r.c if e.op == "-" else r.c
        if l.c == 0.0:
            return _Lead(rc, r.r, r.a, r.b)
        if rc == 0.0 or r.c == 0.0:
            return l
        kl, kr = (l.r, l.a, l.b), (r.r, r.a, r.b)
        if kl > kr:
            return l
        if kr > kl:
            return _Lead(rc, r.r, r.a, r.b)
        c = l.c + rc
        if abs(c) <= 1e-12 * (abs(l.c) + abs(rc)):
            return None  # leading-order cancellation
        return _Lead(c, l.r, l.a, l.b)
    if e.op == "*":
        return _Lead(l.c * r.c, l.r + r.r, l.a + r.a, l.b + r.b)
    if e.op == "/":
        if r.c == 0.0:
            return None
        return _Lead(l.c / r.c, l.r - r.r, l.a - r.a, l.b - r.b)
    # power
    if r.r == 0.0 and r.a == 0.0 and r.b == 0.0:
        k = r.c
        if l.c < 0 and k != round(k):
            return None
        if l.c == 0.0:
            return _Lead(0.0, 0.0, 0.0, 0.0)
        c = float(np.sign(l.c) ** round(k) * abs(l.c) ** k) if l.c < 0 else float(l.c**k)
        return _Lead(c, l.r * k, l.a * k, l.b * k)
    # constant base, n-dependent exponent: c^g(n) = e^{ln(c) g(n)}
    if l.r == 0.0 and l.a == 0.0 and l.b == 0.0 and l.c > 0:
        if r.r == 0.0 and r.a == 1.0 and r.b == 0.0:
            return _Lead(1.0, float(np.log(l.c)) * r.c, 0.0, 0.0)
        if r.r == 0.0 and r.a < 0:
            return _Lead(1.0, 0.0, 0.0, 0.0)
    return None


def _class_from_lead(l: _Lead) -> AsymptoticClass:
    if l.c == 0.0:
        return AsymptoticClass("bounded", exponent=0.0, scale=0.0)
    if l.r != 0.0:
        return AsymptoticClass("exponential", exponent=l.r, scale=l.c)
    if l.a == 0.0 and l.b == 0.0:
        return AsymptoticClass("bounded", exponent=0.0, scale=l.c)
    if l.b == 0.0:
        return AsymptoticClass("power", exponent=l.a, scale=l.c)
    return AsymptoticClass("log-corrected-power", exponent=l.a, log_power=l.b, scale=l.c)


#: Regression residual (rms, in log space) above which the verdict is unknown.
REGRESSION_RESIDUAL_LIMIT = 0.05


def regression_points() -> np.ndarray:
    """Sample points for the log-log estimator: n in [2^10, 2^20]."""
    return np.unique(np.round(np.logspace(np.log10(2**10), np.log10(2**20), 48)).astype(np.int64))


def fit_samples(ns: np.ndarray, y: np.ndarray) -> AsymptoticClass:
    """Growth class of sampled values by regression in log space."""
    if not np.all(np.isfinite(y)):
        return AsymptoticClass("unknown")
    ay = np.abs(np.asarray(y, dtype=float))
    if np.all(ay == 0.0):
        return AsymptoticClass("bounded", exponent=0.0, scale=0.0)
    if np.any(ay == 0.0):
        return AsymptoticClass("unknown")
    ly = np.log(ay)
    ln = np.log(ns.astype(float))
    lln = np.log(ln)

    def fit(cols):
        A = np.column_stack(cols + [np.ones_like(ln)])
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        resid = ly - A @ coef
        return coef, float(np.sqrt(np.mean(resid**2)))

    (r_rate, _), res_exp = fit([ns.astype(float)])
    coef2, res2 = fit([ln, lln])
    (a1, _), res1 = fit([ln])

    # exponential wins only when it fits and the rate is significant
    if res_exp <= REGRESSION_RESIDUAL_LIMIT and abs(r_rate) * (ns[-1] - ns[0]) > 5.0:
        if res_exp < min(res1, res2):
            return AsymptoticClass("exponential", exponent=float(r_rate))
    a2, b2 = float(coef2[0]), float(coef2[1])
    if abs(b2) >= 0.25 and res2 <= REGRESSION_RESIDUAL_LIMIT:
        return AsymptoticClass("log-corrected-power", exponent=a2, log_power=b2)
    if res1 <= REGRESSION_RESIDUAL_LIMIT:
        if abs(a1) < 1e-3:
            return AsymptoticClass("bounded", exponent=0.0)
        return AsymptoticClass("power", exponent=float(a1))
    if res2 <= REGRESSION_RESIDUAL_LIMIT:
        return AsymptoticClass("log-corrected-power", exponent=a2, log_power=b2)
    return AsymptoticClass("unknown")


def _regression_class(e: SeqExpr) -> AsymptoticClass:
    ns = regression_points()
    with np.errstate(all="ignore"):
        y = np.asarray(evaluate(e, ns), dtype=float)
    return fit_samples(ns, y)


def classify_asymptotics(e: SeqExpr) -> AsymptoticClass:
    """Leading growth class of the sequence defined by ``e``.

    A symbolic leading-term pass handles polynomial combinations,
    ``n^a log^b`` forms and exponentials exactly; anything it cannot
    decide (cancellations, exotic compositions) falls back to log-log
    regression over n in [2^10, 2^20], returning ``unknown`` when the
    regression residual exceeds 0.05.
    """
    l = _lead(e)
    if l is not None:
        return _class_from_lead(l)
    return _regression_class(e)

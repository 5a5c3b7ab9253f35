"""Affine combinatory logic over B, C, I, K.

Provides the head reduction rules, bracket abstraction, and the two
translations between combinatory terms and lambda terms.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import lam
from .parsing import ParseError, TokenStream, tokenize

COMBINATOR_NAMES = ("B", "C", "I", "K")


@dataclass(frozen=True)
class CVar:
    name: str

    def __str__(self) -> str:
        return format_cl(self)


@dataclass(frozen=True)
class Comb:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class CApp:
    fun: "CLTerm"
    arg: "CLTerm"

    def __str__(self) -> str:
        return format_cl(self)


CLTerm = CVar | Comb | CApp

B = Comb("B")
C = Comb("C")
I = Comb("I")
K = Comb("K")


def capp(*terms: CLTerm) -> CLTerm:
    """Left-nested application of two or more terms."""
    result = terms[0]
    for t in terms[1:]:
        result = CApp(result, t)
    return result


def cl_free_vars(m: CLTerm) -> frozenset[str]:
    match m:
        case CVar(name):
            return frozenset((name,))
        case Comb(_):
            return frozenset()
        case CApp(fun, arg):
            return cl_free_vars(fun) | cl_free_vars(arg)


def cl_occurrence_count(x: str, m: CLTerm) -> int:
    match m:
        case CVar(name):
            return 1 if name == x else 0
        case Comb(_):
            return 0
        case CApp(fun, arg):
            return cl_occurrence_count(x, fun) + cl_occurrence_count(x, arg)


def cl_substitute(m: CLTerm, x: str, n: CLTerm) -> CLTerm:
    # no binders in CL, so plain replacement is capture-safe
    match m:
        case CVar(name):
            return n if name == x else m
        case Comb(_):
            return m
        case CApp(fun, arg):
            return CApp(cl_substitute(fun, x, n), cl_substitute(arg, x, n))


def abstract(x: str, m: CLTerm) -> CLTerm:
    """Bracket abstraction: build a combinator term acting like ``\\x. m``.

    Clauses, tried in order:

      abstract x of x        = I
      abstract x of a leaf   = K leaf
      abstract x of (f a)    = C (abstract x f) a    if x free in f
                             = B f (abstract x a)    if x free in a
                             = K (f a)               otherwise

    Only affine input is accepted: ``x`` may occur at most once in ``m``.
    """
    if cl_occurrence_count(x, m) > 1:
        raise lam.NotAffineError(f"{x} occurs more than once in {format_cl(m)}")
    match m:
        case CVar(name) if name == x:
            return I
        case CVar(_) | Comb(_):
            return CApp(K, m)
        case CApp(fun, arg):
            if x in cl_free_vars(fun):
                return capp(C, abstract(x, fun), arg)
            if x in cl_free_vars(arg):
                return capp(B, fun, abstract(x, arg))
            return CApp(K, m)


def to_cl(m: lam.LambdaTerm) -> CLTerm:
    """Translate an affine lambda term, replacing each abstraction by a
    bracket abstraction (innermost abstractions first)."""
    if not lam.is_affine(m):
        raise lam.NotAffineError(f"not affine: {lam.format_lambda(m)}")
    return _to_cl(m)


def _to_cl(m: lam.LambdaTerm) -> CLTerm:
    match m:
        case lam.Var(name):
            return CVar(name)
        case lam.App(fun, arg):
            return CApp(_to_cl(fun), _to_cl(arg))
        case lam.Abs(binder, body):
            return abstract(binder, _to_cl(body))


_LAMBDA_IMAGES = {
    "B": lam.parse_lambda("\\x. \\y. \\z. x (y z)"),
    "C": lam.parse_lambda("\\x. \\y. \\z. (x z) y"),
    "I": lam.parse_lambda("\\x. x"),
    "K": lam.parse_lambda("\\x. \\y. x"),
}


def to_lambda(m: CLTerm) -> lam.LambdaTerm:
    """Replace every combinator by its closed lambda image, homomorphically."""
    match m:
        case CVar(name):
            return lam.Var(name)
        case Comb(name):
            return _LAMBDA_IMAGES[name]
        case CApp(fun, arg):
            return lam.App(to_lambda(fun), to_lambda(arg))


def _step_cl(m: CLTerm) -> CLTerm | None:
    """One leftmost-outermost head contraction, or None in normal form."""
    match m:
        case CApp(CApp(CApp(Comb("B"), f), g), a):
            return CApp(f, CApp(g, a))
        case CApp(CApp(CApp(Comb("C"), f), a), b):
            return CApp(CApp(f, b), a)
        case CApp(Comb("I"), a):
            return a
        case CApp(CApp(Comb("K"), a), _):
            return a
        case CApp(fun, arg):
            reduced = _step_cl(fun)
            if reduced is not None:
                return CApp(reduced, arg)
            reduced = _step_cl(arg)
            if reduced is not None:
                return CApp(fun, reduced)
            return None
        case _:
            return None


def cl_normalize(m: CLTerm) -> CLTerm:
    """Contract head redexes until none remain.

    Every rule strictly shrinks the node count (B and C by two, I and K by
    at least two), so this terminates on arbitrary input.
    """
    while True:
        reduced = _step_cl(m)
        if reduced is None:
            return m
        m = reduced


# --- text format ---------------------------------------------------------
#
# clterm ::= atom+    (left-assoc)
# atom   ::= 'B' | 'C' | 'I' | 'K' | ident | '(' clterm ')'
#
# The single letters B, C, I, K are reserved, case-sensitively.


def parse_cl(src: str) -> CLTerm:
    tokens = tokenize(src, ("(", ")"))
    stream = TokenStream(tokens, len(src))
    term = _parse_cl_app(stream)
    stream.done()
    return term


def _parse_cl_app(stream: TokenStream) -> CLTerm:
    term = _parse_cl_atom(stream)
    while True:
        tok = stream.peek()
        if tok is None or tok.kind not in ("ident", "("):
            break
        term = CApp(term, _parse_cl_atom(stream))
    return term


def _parse_cl_atom(stream: TokenStream) -> CLTerm:
    tok = stream.next()
    if tok.kind == "ident":
        if tok.text in COMBINATOR_NAMES:
            return Comb(tok.text)
        return CVar(tok.text)
    if tok.kind == "(":
        term = _parse_cl_app(stream)
        stream.expect(")")
        return term
    raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def format_cl(m: CLTerm) -> str:
    match m:
        case CVar(name):
            return name
        case Comb(name):
            return name
        case CApp(fun, arg):
            arg_text = format_cl(arg)
            if isinstance(arg, CApp):
                arg_text = f"({arg_text})"
            return f"{format_cl(fun)} {arg_text}"

"""Affine lambda terms: syntax, parsing, substitution, and beta reduction.

A term is affine when every binder captures at most one occurrence of its
variable.  Reduction of affine terms is non-duplicating, so every reduction
strategy terminates; ``normalize`` insists on affine input for that reason.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

from .parsing import ParseError, TokenStream, tokenize


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return format_lambda(self)


@dataclass(frozen=True)
class App:
    fun: "LambdaTerm"
    arg: "LambdaTerm"

    def __str__(self) -> str:
        return format_lambda(self)


@dataclass(frozen=True)
class Abs:
    binder: str
    body: "LambdaTerm"

    def __str__(self) -> str:
        return format_lambda(self)


LambdaTerm = Var | App | Abs


class NotAffineError(ValueError):
    """Raised when an operation that needs affinity is handed a term without it."""


def subterms(m: LambdaTerm) -> Iterator[LambdaTerm]:
    yield m
    match m:
        case App(fun, arg):
            yield from subterms(fun)
            yield from subterms(arg)
        case Abs(_, body):
            yield from subterms(body)


def occurrence_count(x: str, m: LambdaTerm) -> int:
    """Number of free occurrences of ``x`` in ``m``."""
    match m:
        case Var(name):
            return 1 if name == x else 0
        case App(fun, arg):
            return occurrence_count(x, fun) + occurrence_count(x, arg)
        case Abs(binder, body):
            return 0 if binder == x else occurrence_count(x, body)


def free_vars(m: LambdaTerm) -> frozenset[str]:
    match m:
        case Var(name):
            return frozenset((name,))
        case App(fun, arg):
            return free_vars(fun) | free_vars(arg)
        case Abs(binder, body):
            return free_vars(body) - {binder}


def is_affine(m: LambdaTerm) -> bool:
    """True when every binder in ``m`` captures at most one occurrence."""
    for sub in subterms(m):
        match sub:
            case Abs(binder, body) if occurrence_count(binder, body) > 1:
                return False
    return True


def is_linear(m: LambdaTerm) -> bool:
    """True when every binder captures exactly one occurrence and every
    free variable of the whole term occurs exactly once."""
    for sub in subterms(m):
        match sub:
            case Abs(binder, body) if occurrence_count(binder, body) != 1:
                return False
    return all(occurrence_count(x, m) == 1 for x in free_vars(m))


def _fresh_name(base: str, taken: frozenset[str]) -> str:
    candidate = base + "'"
    while candidate in taken:
        candidate += "'"
    return candidate


def substitute(m: LambdaTerm, x: str, n: LambdaTerm) -> LambdaTerm:
    """Capture-avoiding substitution of ``n`` for every free ``x`` in ``m``.

    Bound variables that would capture a free variable of ``n`` are renamed
    with primes, first name not in use wins, so results are reproducible.
    """
    match m:
        case Var(name):
            return n if name == x else m
        case App(fun, arg):
            return App(substitute(fun, x, n), substitute(arg, x, n))
        case Abs(binder, body):
            if binder == x or occurrence_count(x, body) == 0:
                return m
            if binder in free_vars(n):
                taken = free_vars(body) | free_vars(n) | {x}
                renamed = _fresh_name(binder, taken)
                body = substitute(body, binder, Var(renamed))
                binder = renamed
            return Abs(binder, substitute(body, x, n))


Mode = Literal["full", "top-level"]


def _step(m: LambdaTerm, under_lambda: bool) -> LambdaTerm | None:
    """One leftmost-outermost beta step, or None when no redex is available.

    With ``under_lambda`` false, abstraction bodies are left alone, which
    restricts reduction to the top level of the term.
    """
    match m:
        case App(Abs(binder, body), arg):
            return substitute(body, binder, arg)
        case App(fun, arg):
            reduced = _step(fun, under_lambda)
            if reduced is not None:
                return App(reduced, arg)
            reduced = _step(arg, under_lambda)
            if reduced is not None:
                return App(fun, reduced)
            return None
        case Abs(binder, body):
            if not under_lambda:
                return None
            reduced = _step(body, under_lambda)
            if reduced is not None:
                return Abs(binder, reduced)
            return None
        case Var(_):
            return None


def is_normal(m: LambdaTerm) -> bool:
    """True when ``m`` contains no beta redex anywhere."""
    return _step(m, True) is None


def normalize(m: LambdaTerm, mode: Mode = "full") -> LambdaTerm:
    """Reduce ``m`` to normal form (leftmost-outermost strategy).

    ``mode="top-level"`` never contracts a redex under a lambda.  The input
    must be affine; beta steps on affine terms strictly shrink the term, so
    the loop terminates.
    """
    if mode not in ("full", "top-level"):
        raise ValueError(f"unknown mode {mode!r}")
    if not is_affine(m):
        raise NotAffineError(f"cannot normalize non-affine term {format_lambda(m)}")
    under_lambda = mode == "full"
    while True:
        reduced = _step(m, under_lambda)
        if reduced is None:
            return m
        m = reduced


def _debruijn(m: LambdaTerm, env: tuple[str, ...]) -> object:
    match m:
        case Var(name):
            for depth, bound in enumerate(reversed(env)):
                if bound == name:
                    return ("bound", depth)
            return ("free", name)
        case App(fun, arg):
            return ("app", _debruijn(fun, env), _debruijn(arg, env))
        case Abs(binder, body):
            return ("abs", _debruijn(body, env + (binder,)))


def alpha_eq(m: LambdaTerm, n: LambdaTerm) -> bool:
    """Equality up to renaming of bound variables."""
    return _debruijn(m, ()) == _debruijn(n, ())


# --- text format ---------------------------------------------------------
#
# term    ::= '\' ident '.' term | appterm
# appterm ::= atom+                 (application associates left)
# atom    ::= ident | '(' term ')'


def parse_lambda(src: str) -> LambdaTerm:
    tokens = tokenize(src, ("\\", ".", "(", ")"))
    stream = TokenStream(tokens, len(src))
    term = _parse_term(stream)
    stream.done()
    return term


def _parse_term(stream: TokenStream) -> LambdaTerm:
    tok = stream.peek()
    if tok is not None and tok.kind == "\\":
        stream.next()
        binder = stream.expect("ident").text
        stream.expect(".")
        return Abs(binder, _parse_term(stream))
    return _parse_appterm(stream)


def _parse_appterm(stream: TokenStream) -> LambdaTerm:
    term = _parse_atom(stream)
    while True:
        tok = stream.peek()
        if tok is None or tok.kind not in ("ident", "(", "\\"):
            break
        if tok.kind == "\\":
            # an abstraction can only follow in argument position if bracketed
            raise ParseError("abstraction must be parenthesized here", tok.pos)
        term = App(term, _parse_atom(stream))
    return term


def _parse_atom(stream: TokenStream) -> LambdaTerm:
    tok = stream.next()
    if tok.kind == "ident":
        return Var(tok.text)
    if tok.kind == "(":
        term = _parse_term(stream)
        stream.expect(")")
        return term
    raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def format_lambda(m: LambdaTerm) -> str:
    """Render with minimal parentheses (abstraction bodies extend right)."""
    match m:
        case Var(name):
            return name
        case Abs(binder, body):
            return f"\\{binder}. {format_lambda(body)}"
        case App(fun, arg):
            fun_text = format_lambda(fun)
            if isinstance(fun, Abs):
                fun_text = f"({fun_text})"
            arg_text = format_lambda(arg)
            if isinstance(arg, (App, Abs)):
                arg_text = f"({arg_text})"
            return f"{fun_text} {arg_text}"

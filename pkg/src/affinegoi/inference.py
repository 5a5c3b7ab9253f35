"""Principal type inference for affine terms.

``principal_type`` runs the syntax-directed rules: a variable gets a fresh
type variable, an abstraction discharges its binder's assumption (or adds a
fresh argument type when the binder is unused), and an application unifies
the operator's type against ``arg -> result`` and then the argument types.
Premises of an application are renamed into disjoint namespaces first, so
the rule's side conditions hold by construction.

Every inferred judgement is unique up to injective renaming of type
variables; ``canonical_rename`` picks the representative used for printing
and equality.  A separate checker, ``derivable``, validates simple-typing
judgements on beta-normal forms without going through inference, so the two
can be played against each other in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import cl, lam
from .typesys import (
    Arrow,
    FreshSupply,
    Leaf,
    Substitution,
    Type,
    compose_subst,
    format_type,
    matching,
    mgu,
    parse_type,
    type_vars,
)

Subject = lam.LambdaTerm | cl.CLTerm


@dataclass
class Judgement:
    ctx: dict[str, Type]
    term: Subject
    ty: Type

    def __str__(self) -> str:
        return format_judgement(self)


def format_judgement(j: Judgement) -> str:
    term_text = (
        lam.format_lambda(j.term)
        if isinstance(j.term, (lam.Var, lam.App, lam.Abs))
        else cl.format_cl(j.term)
    )
    ctx_text = ", ".join(f"{x}: {format_type(t)}" for x, t in sorted(j.ctx.items()))
    prefix = f"{ctx_text} " if ctx_text else ""
    return f"{prefix}|- {term_text} : {format_type(j.ty)}"


def _first_occurrence_order(ctx: dict[str, Type], ty: Type) -> list[str]:
    seen: list[str] = []
    for _, entry in sorted(ctx.items()):
        for name in type_vars(entry):
            if name not in seen:
                seen.append(name)
    for name in type_vars(ty):
        if name not in seen:
            seen.append(name)
    return seen


def _rename(ctx: dict[str, Type], ty: Type, prefix: str) -> tuple[dict[str, Type], Type]:
    order = _first_occurrence_order(ctx, ty)
    subst = Substitution({name: Leaf(f"{prefix}{i}") for i, name in enumerate(order)})
    return {x: subst(t) for x, t in ctx.items()}, subst(ty)


def canonical_rename(j: Judgement) -> Judgement:
    """Rename type variables to t0, t1, ... in first-occurrence order,
    scanning context entries by subject variable and then the type."""
    ctx, ty = _rename(j.ctx, j.ty, "t")
    return Judgement(ctx, j.term, ty)


def canonical_type(ty: Type) -> Type:
    return canonical_rename(Judgement({}, lam.Var("_"), ty)).ty


def types_equal_up_to_renaming(a: Type, b: Type) -> bool:
    return canonical_type(a) == canonical_type(b)


def _check_free_occurrences(counts: dict[str, int]) -> None:
    for name, count in sorted(counts.items()):
        if count > 1:
            raise lam.NotAffineError(
                f"free variable {name} occurs {count} times; "
                "a typing context can assume it only once"
            )


def principal_type(m: lam.LambdaTerm) -> Judgement:
    """The most general typing judgement of an affine term.

    Free variables must each occur at most once, matching the disjoint
    contexts required by the application rule.
    """
    if not lam.is_affine(m):
        raise lam.NotAffineError(f"not affine: {lam.format_lambda(m)}")
    _check_free_occurrences({x: lam.occurrence_count(x, m) for x in lam.free_vars(m)})
    supply = FreshSupply("v")
    ctx, ty = _infer_lambda(m, supply)
    return canonical_rename(Judgement(ctx, m, ty))


def _infer_lambda(m: lam.LambdaTerm, supply: FreshSupply) -> tuple[dict[str, Type], Type]:
    match m:
        case lam.Var(name):
            fresh = Leaf(supply.fresh())
            return {name: fresh}, fresh
        case lam.Abs(binder, body):
            ctx, ty = _infer_lambda(body, supply)
            if binder in ctx:
                arg = ctx.pop(binder)
                return ctx, Arrow(arg, ty)
            return ctx, Arrow(Leaf(supply.fresh()), ty)
        case lam.App(fun, arg):
            return _infer_app(
                _infer_lambda(fun, supply), _infer_lambda(arg, supply)
            )


def _infer_app(
    fun_premise: tuple[dict[str, Type], Type],
    arg_premise: tuple[dict[str, Type], Type],
) -> tuple[dict[str, Type], Type]:
    fun_ctx, fun_ty = _rename(*fun_premise, prefix="l")
    arg_ctx, arg_ty = _rename(*arg_premise, prefix="r")
    overlap = set(fun_ctx) & set(arg_ctx)
    if overlap:
        raise lam.NotAffineError(
            f"operator and operand share free variables {sorted(overlap)}"
        )
    alpha, beta = Leaf("f0"), Leaf("f1")
    shape = mgu([(fun_ty, Arrow(alpha, beta))])
    resolved = mgu([(shape(alpha), arg_ty)])
    total = compose_subst(resolved, shape)
    ctx = {x: total(t) for x, t in fun_ctx.items()}
    ctx.update({x: total(t) for x, t in arg_ctx.items()})
    return ctx, total(beta)


_COMBINATOR_TYPES = {
    "I": "t0 -> t0",
    "K": "t0 -> t1 -> t0",
    "B": "(t0 -> t1) -> (t2 -> t0) -> t2 -> t1",
    "C": "(t0 -> t1 -> t2) -> t1 -> t0 -> t2",
}


def combinator_principal_type(name: str) -> Type:
    """Principal type of a basic combinator, canonically renamed."""
    if name not in _COMBINATOR_TYPES:
        raise ValueError(f"unknown combinator {name!r}")
    return parse_type(_COMBINATOR_TYPES[name])


def principal_type_cl(m: cl.CLTerm) -> Judgement:
    """Principal typing computed directly on combinatory structure.

    Agrees with ``principal_type`` of the lambda image up to renaming.
    """
    counts: dict[str, int] = {}
    for x in cl.cl_free_vars(m):
        counts[x] = cl.cl_occurrence_count(x, m)
    _check_free_occurrences(counts)
    supply = FreshSupply("v")
    ctx, ty = _infer_cl(m, supply)
    return canonical_rename(Judgement(ctx, m, ty))


def _infer_cl(m: cl.CLTerm, supply: FreshSupply) -> tuple[dict[str, Type], Type]:
    match m:
        case cl.CVar(name):
            fresh = Leaf(supply.fresh())
            return {name: fresh}, fresh
        case cl.Comb(name):
            return {}, combinator_principal_type(name)
        case cl.CApp(fun, arg):
            return _infer_app(_infer_cl(fun, supply), _infer_cl(arg, supply))


def is_instance(general: Judgement, special: Judgement) -> bool:
    """Whether some substitution sends ``general`` to ``special``.

    Contexts must cover the same subject variables; the subject terms
    themselves are not compared.
    """
    if sorted(general.ctx) != sorted(special.ctx):
        return False
    pairs = [(general.ctx[x], special.ctx[x]) for x in sorted(general.ctx)]
    pairs.append((general.ty, special.ty))
    return matching(pairs) is not None


def equal_up_to_renaming(j1: Judgement, j2: Judgement) -> bool:
    """Whether the judgements differ only by an injective renaming of type
    variables (subjects are not compared)."""
    if sorted(j1.ctx) != sorted(j2.ctx):
        return False
    a = canonical_rename(j1)
    b = canonical_rename(j2)
    return a.ctx == b.ctx and a.ty == b.ty


# --- independent checker for simple typings of normal forms ---------------


def derivable(ctx: dict[str, Type], m: lam.LambdaTerm, ty: Type) -> bool:
    """Decide whether the simple typing ``ctx |- m : ty`` is derivable.

    Only beta-normal subjects are accepted.  Such a term is a stack of
    abstractions over a head variable applied to normal arguments, so the
    check needs no unification: the head's assumption drives everything.
    Contexts carry exactly the free variables of the subject.
    """
    if not lam.is_normal(m):
        raise ValueError(f"not a normal form: {lam.format_lambda(m)}")
    if set(ctx) != set(lam.free_vars(m)):
        return False
    return _check_nf(dict(ctx), m, ty)


def _check_nf(ctx: dict[str, Type], m: lam.LambdaTerm, ty: Type) -> bool:
    match m:
        case lam.Abs(binder, body):
            if not isinstance(ty, Arrow):
                return False
            if lam.occurrence_count(binder, body) > 0:
                if binder in ctx:
                    return False
                inner = dict(ctx)
                inner[binder] = ty.left
                return _check_nf(inner, body, ty.right)
            return _check_nf(ctx, body, ty.right)
        case _:
            return _synth_neutral(ctx, m) == ty


def _synth_neutral(ctx: dict[str, Type], m: lam.LambdaTerm) -> Type | None:
    match m:
        case lam.Var(name):
            return ctx.get(name)
        case lam.App(fun, arg):
            fun_vars = lam.free_vars(fun)
            arg_vars = lam.free_vars(arg)
            if fun_vars & arg_vars:
                return None
            fun_ty = _synth_neutral({x: t for x, t in ctx.items() if x in fun_vars}, fun)
            if not isinstance(fun_ty, Arrow):
                return None
            arg_ctx = {x: t for x, t in ctx.items() if x in arg_vars}
            if not _check_nf(arg_ctx, arg, fun_ty.left):
                return None
            return fun_ty.right
        case lam.Abs(_, _):
            return None

"""Seeded generators and cross-module theorem checkers.

Each named property draws reproducible samples, evaluates one of the
structural facts connecting reduction, typing, and the involution algebra,
and reports counterexamples with printable inputs.  One property,
``affine-full-reduction``, is a negative control: it checks full subject
conversion on an affine witness that is known to break it, so a correct
implementation reports exactly that failure.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from . import cl, lam
from .inference import (
    Judgement,
    canonical_rename,
    derivable,
    equal_up_to_renaming,
    format_judgement,
    is_instance,
    principal_type,
    principal_type_cl,
    types_equal_up_to_renaming,
)
from .involutions import (
    Involution,
    combinator_denotation,
    format_involution,
    goi_mgu,
    goi_semantics_lambda,
    goi_unifiable,
    involution_of_type,
    linear_apply,
)
from .typesys import (
    Arrow,
    Leaf,
    Substitution,
    Type,
    UnifyFailure,
    apply_subst,
    compose_subst,
    format_substitution,
    format_type,
    mgu,
    more_general,
    var_counts,
)

Mode = str  # "affine" | "linear" | "binary-type" | "strictly-binary-type-pair"


@dataclass(frozen=True)
class GenConfig:
    seed: int
    count: int
    max_depth: int
    mode: Mode = "affine"


@dataclass
class CheckReport:
    property: str
    samples: int
    failures: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "pass" if not self.failures else "fail"

    def add_failure(self, shown_input: str, expected: str, actual: str) -> None:
        self.failures.append((shown_input, expected, actual))

    def __str__(self) -> str:
        lines = [f"{self.property}: {self.status} ({self.samples} samples)"]
        for shown_input, expected, actual in sorted(self.failures):
            lines.append(f"  input:    {shown_input}")
            lines.append(f"  expected: {expected}")
            lines.append(f"  actual:   {actual}")
        return "\n".join(lines)


# --- term generators -------------------------------------------------------


def _gen_affine_term(rng: random.Random, max_depth: int) -> lam.LambdaTerm:
    """A closed term in which every binder is used at most once.

    Bound names live in a scoped pool and are consumed on use, so no
    variable ever occurs twice; unused binders are allowed.
    """
    counter = itertools.count()
    avail: list[str] = []

    def go(depth: int) -> lam.LambdaTerm:
        if depth <= 0:
            if avail and rng.random() < 0.9:
                return lam.Var(avail.pop(rng.randrange(len(avail))))
            x = f"x{next(counter)}"
            return lam.Abs(x, lam.Var(x))
        roll = rng.random()
        if avail and roll < 0.25:
            return lam.Var(avail.pop(rng.randrange(len(avail))))
        if roll < 0.62:
            x = f"x{next(counter)}"
            avail.append(x)
            body = go(depth - 1)
            if x in avail:
                avail.remove(x)
            return lam.Abs(x, body)
        return lam.App(go(depth - 1), go(depth - 1))

    while True:
        avail.clear()
        term = go(max_depth)
        if _depth(term) <= max_depth + 1:
            return term


def _gen_linear_term(rng: random.Random, max_depth: int) -> lam.LambdaTerm:
    """A closed term in which every variable occurs exactly once."""
    counter = itertools.count()

    def go(depth: int, must: list[str]) -> lam.LambdaTerm:
        if depth <= 0:
            if not must:
                x = f"x{next(counter)}"
                return lam.Abs(x, lam.Var(x))
            term: lam.LambdaTerm = lam.Var(must[0])
            for name in must[1:]:
                term = lam.App(term, lam.Var(name))
            return term
        roll = rng.random()
        if len(must) == 1 and roll < 0.3:
            return lam.Var(must[0])
        if roll < 0.6:
            x = f"x{next(counter)}"
            return lam.Abs(x, go(depth - 1, must + [x]))
        shuffled = list(must)
        rng.shuffle(shuffled)
        cut = rng.randint(0, len(shuffled))
        return lam.App(go(depth - 1, shuffled[:cut]), go(depth - 1, shuffled[cut:]))

    while True:
        term = go(max_depth, [])
        if _depth(term) <= max_depth + 1:
            return term


def _depth(m: lam.LambdaTerm) -> int:
    match m:
        case lam.Var(_):
            return 1
        case lam.Abs(_, body):
            return 1 + _depth(body)
        case lam.App(fun, arg):
            return 1 + max(_depth(fun), _depth(arg))


def strip_outer_binders(rng: random.Random, m: lam.LambdaTerm) -> lam.LambdaTerm:
    """Drop a random number of leading abstractions, opening the term."""
    while isinstance(m, lam.Abs) and rng.random() < 0.5:
        m = m.body
    return m


def _gen_cl_term(
    rng: random.Random, max_depth: int, var_pool: list[str], closed: bool
) -> cl.CLTerm:
    pool = list(var_pool)

    def go(depth: int) -> cl.CLTerm:
        if depth <= 0 or rng.random() < 0.35:
            if pool and not closed and rng.random() < 0.45:
                return cl.CVar(pool.pop(rng.randrange(len(pool))))
            return cl.Comb(rng.choice(cl.COMBINATOR_NAMES))
        return cl.CApp(go(depth - 1), go(depth - 1))

    return go(max_depth)


# --- type generators -------------------------------------------------------


def _gen_shape(rng: random.Random, max_depth: int) -> list[tuple[str, ...]]:
    """Leaf paths of a random tree shape."""
    paths: list[tuple[str, ...]] = []

    def go(depth: int, path: tuple[str, ...]) -> None:
        if depth <= 0 or rng.random() < 0.38:
            paths.append(path)
            return
        go(depth - 1, path + ("l",))
        go(depth - 1, path + ("r",))

    go(max_depth, ())
    return paths


def _assemble_type(assignment: dict[tuple[str, ...], str]) -> Type:
    def build(path: tuple[str, ...]) -> Type:
        if path in assignment:
            return Leaf(assignment[path])
        return Arrow(build(path + ("l",)), build(path + ("r",)))

    return build(())


def _gen_binary_type(rng: random.Random, max_depth: int, prefix: str) -> Type:
    """A type in which every variable occurs once or twice."""
    paths = _gen_shape(rng, max_depth)
    rng.shuffle(paths)
    assignment: dict[tuple[str, ...], str] = {}
    counter = itertools.count()
    while paths:
        if len(paths) >= 2 and rng.random() < 0.6:
            name = f"{prefix}{next(counter)}"
            assignment[paths.pop()] = name
            assignment[paths.pop()] = name
        else:
            assignment[paths.pop()] = f"{prefix}{next(counter)}"
    return _assemble_type(assignment)


def _gen_strictly_binary_type(rng: random.Random, max_depth: int, prefix: str) -> Type:
    """A type in which every variable occurs exactly twice."""
    while True:
        paths = _gen_shape(rng, max_depth)
        if len(paths) >= 2 and len(paths) % 2 == 0:
            break
    rng.shuffle(paths)
    assignment: dict[tuple[str, ...], str] = {}
    counter = itertools.count()
    while paths:
        name = f"{prefix}{next(counter)}"
        assignment[paths.pop()] = name
        assignment[paths.pop()] = name
    return _assemble_type(assignment)


def _gen_substitution(
    rng: random.Random, names: list[str], max_depth: int, prefix: str
) -> Substitution:
    counter = itertools.count()

    def small_type(depth: int) -> Type:
        if depth <= 0 or rng.random() < 0.5:
            return Leaf(f"{prefix}{rng.randrange(max(1, len(names)))}")
        return Arrow(small_type(depth - 1), small_type(depth - 1))

    mapping = {}
    for name in names:
        if rng.random() < 0.7:
            mapping[name] = small_type(rng.randint(0, max_depth))
        _ = next(counter)
    return Substitution(mapping)


def generate(cfg: GenConfig) -> Iterator[object]:
    """Reproducible stream of samples; identical configs give identical
    streams."""
    rng = random.Random(cfg.seed)
    for _ in range(cfg.count):
        if cfg.mode == "affine":
            yield _gen_affine_term(rng, cfg.max_depth)
        elif cfg.mode == "linear":
            yield _gen_linear_term(rng, cfg.max_depth)
        elif cfg.mode == "binary-type":
            yield _gen_binary_type(rng, cfg.max_depth, "a")
        elif cfg.mode == "strictly-binary-type-pair":
            yield (
                _gen_strictly_binary_type(rng, cfg.max_depth, "a"),
                _gen_strictly_binary_type(rng, cfg.max_depth, "b"),
            )
        else:
            raise ValueError(f"unknown mode {cfg.mode!r}")


# --- exhaustive enumeration of closed affine normal forms ------------------


def enumerate_normal_forms(max_nodes: int) -> list[lam.LambdaTerm]:
    """All closed affine beta-normal forms with at most ``max_nodes`` nodes,
    one representative per alpha-class (binders named by nesting level).

    Enumeration tracks, for each subterm, the set of enclosing binders it
    uses; application arms must use disjoint sets, which is exactly the
    affinity constraint once the whole term is closed.
    """
    neutral_memo: dict[tuple[int, int], list] = {}
    normal_memo: dict[tuple[int, int], list] = {}

    def neutrals(size: int, scope: int) -> list:
        # neutral: a variable applied to normal arguments; never an abstraction
        key = (size, scope)
        if key not in neutral_memo:
            out = []
            if size == 1:
                out = [
                    (lam.Var(f"x{i}"), frozenset((f"x{i}",))) for i in range(scope)
                ]
            else:
                for fun_size in range(1, size - 1):
                    for fun, fun_used in neutrals(fun_size, scope):
                        for arg, arg_used in normals(size - 1 - fun_size, scope):
                            if fun_used & arg_used:
                                continue
                            out.append((lam.App(fun, arg), fun_used | arg_used))
            neutral_memo[key] = out
        return neutral_memo[key]

    def normals(size: int, scope: int) -> list:
        key = (size, scope)
        if key not in normal_memo:
            out = list(neutrals(size, scope))
            if size >= 2:
                binder = f"x{scope}"
                for body, used in normals(size - 1, scope + 1):
                    out.append((lam.Abs(binder, body), used - {binder}))
            normal_memo[key] = out
        return normal_memo[key]

    out = []
    for size in range(1, max_nodes + 1):
        for term, used in normals(size, 0):
            if not used:
                out.append(term)
    return out


# --- properties ------------------------------------------------------------

FULL_CONVERSION_WITNESS = lam.parse_lambda("\\x. \\y. \\z. (\\w. x) (y z)")


def _show_inv(f: Involution) -> str:
    return format_involution(f).replace("\n", " ; ")


def _prop_main_theorem(cfg: GenConfig) -> CheckReport:
    report = CheckReport("main-theorem", cfg.count)
    for term in generate(replace(cfg, mode="affine")):
        semantic = goi_semantics_lambda(term)
        typed = involution_of_type(principal_type(term).ty)
        if semantic != typed:
            report.add_failure(lam.format_lambda(term), _show_inv(typed), _show_inv(semantic))
    return report


def _prop_abstraction(cfg: GenConfig) -> CheckReport:
    report = CheckReport("abstraction", cfg.count)
    rng = random.Random(cfg.seed)
    for _ in range(cfg.count):
        body = _gen_cl_term(rng, cfg.max_depth, ["x", "y", "z"], closed=False)
        while cl.cl_occurrence_count("x", body) > 1:
            body = _gen_cl_term(rng, cfg.max_depth, ["x", "y", "z"], closed=False)
        operand = _gen_cl_term(rng, max(1, cfg.max_depth - 1), [], closed=True)
        applied = cl.cl_normalize(cl.CApp(cl.abstract("x", body), operand))
        substituted = cl.cl_normalize(cl.cl_substitute(body, "x", operand))
        if applied != substituted:
            report.add_failure(
                f"x, {cl.format_cl(body)}, {cl.format_cl(operand)}",
                cl.format_cl(substituted),
                cl.format_cl(applied),
            )
    return report


def _conversion_report(name: str, cfg: GenConfig, mode: Mode, reduce_mode) -> CheckReport:
    report = CheckReport(name, cfg.count)
    for term in generate(replace(cfg, mode=mode)):
        before = principal_type(term)
        reduced = lam.normalize(term, reduce_mode)
        after = principal_type(reduced)
        if not equal_up_to_renaming(before, after):
            report.add_failure(
                lam.format_lambda(term), format_judgement(before), format_judgement(after)
            )
    return report


def _prop_toplevel_conversion(cfg: GenConfig) -> CheckReport:
    return _conversion_report("toplevel-conversion", cfg, "affine", "top-level")


def _prop_linear_conversion(cfg: GenConfig) -> CheckReport:
    return _conversion_report("linear-conversion", cfg, "linear", "full")


def _prop_affine_full_reduction(cfg: GenConfig) -> CheckReport:
    """Negative control: full subject conversion fails on the affine witness.

    The witness erases an argument only after applying a variable to it, so
    its principal type is a strict instance of the reduct's.  The report
    records that strictness as a failure; seeing it is the expected outcome.
    """
    report = CheckReport("affine-full-reduction", 1)
    term = FULL_CONVERSION_WITNESS
    before = principal_type(term)
    after = principal_type(lam.normalize(term, "full"))
    if not equal_up_to_renaming(before, after):
        report.add_failure(
            lam.format_lambda(term), format_judgement(after), format_judgement(before)
        )
    return report


def _prop_bck_laws(cfg: GenConfig) -> CheckReport:
    report = CheckReport("bck-laws", cfg.count)
    rng = random.Random(cfg.seed)
    for _ in range(cfg.count):
        x, y, z = (
            goi_semantics_lambda(_gen_affine_term(rng, cfg.max_depth)) for _ in range(3)
        )
        b, c, i, k = (combinator_denotation(n) for n in "BCIK")
        laws = [
            ("B x y z = x (y z)",
             linear_apply(linear_apply(linear_apply(b, x), y), z),
             linear_apply(x, linear_apply(y, z))),
            ("C x y z = (x z) y",
             linear_apply(linear_apply(linear_apply(c, x), y), z),
             linear_apply(linear_apply(x, z), y)),
            ("I x = x", linear_apply(i, x), x),
            ("K x y = x", linear_apply(linear_apply(k, x), y), x),
        ]
        for label, lhs, rhs in laws:
            if lhs != rhs:
                report.add_failure(
                    f"{label} with x={_show_inv(x)} y={_show_inv(y)} z={_show_inv(z)}",
                    _show_inv(rhs),
                    _show_inv(lhs),
                )
    return report


def _prop_unif_equivalence(cfg: GenConfig) -> CheckReport:
    report = CheckReport("unif-equivalence", cfg.count)
    for sigma, tau in generate(replace(cfg, mode="strictly-binary-type-pair")):
        shown = f"{format_type(sigma)}  vs  {format_type(tau)}"
        try:
            standard = mgu([(sigma, tau)])
        except UnifyFailure:
            standard = None
        goi_result = goi_unifiable(sigma, tau)
        if bool(goi_result) != (standard is not None):
            report.add_failure(shown, f"unifiable={standard is not None}", f"goi={bool(goi_result)}")
            continue
        if standard is None:
            continue
        occurrence_unifier = goi_mgu(sigma, tau)
        for name in sorted(var_counts(sigma)):
            mine = occurrence_unifier.get(name)
            reference = standard.get(name)
            if not types_equal_up_to_renaming(mine, reference):
                report.add_failure(
                    f"{shown} at {name}", format_type(reference), format_type(mine)
                )
    return report


def _prop_nf_determination(cfg: GenConfig) -> CheckReport:
    forms = enumerate_normal_forms(9)
    report = CheckReport("nf-determination", len(forms))
    seen: dict[str, lam.LambdaTerm] = {}
    for term in forms:
        key = format_type(principal_type(term).ty)
        if key in seen and not lam.alpha_eq(seen[key], term):
            report.add_failure(
                f"{lam.format_lambda(seen[key])}  vs  {lam.format_lambda(term)}",
                "distinct principal types",
                key,
            )
        seen.setdefault(key, term)
    return report


def _prop_resolution_lemma(cfg: GenConfig) -> CheckReport:
    report = CheckReport("resolution-lemma", cfg.count)
    rng = random.Random(cfg.seed)
    for _ in range(cfg.count):
        operator, operand, unifier = _gen_resolvable_pair(rng, cfg.max_depth)
        shown = f"{format_type(operator)}  applied to  {format_type(operand)}"
        applied = linear_apply(involution_of_type(operator), involution_of_type(operand))
        expected = involution_of_type(apply_subst(unifier, operator.right))
        if applied != expected:
            report.add_failure(shown, _show_inv(expected), _show_inv(applied))
    return report


def _gen_resolvable_pair(rng: random.Random, max_depth: int):
    """A binary arrow type and a binary operand whose left sides unify."""
    while True:
        operator = _gen_binary_type(rng, max_depth, "a")
        if not isinstance(operator, Arrow):
            continue
        operand = _gen_binary_type(rng, max_depth, "b")
        try:
            unifier = mgu([(operator.left, operand)])
        except UnifyFailure:
            continue
        return operator, operand, unifier


def _prop_binary_judgements(cfg: GenConfig) -> CheckReport:
    report = CheckReport("binary-judgements", cfg.count)
    rng = random.Random(cfg.seed)
    for term in generate(replace(cfg, mode="affine")):
        opened = strip_outer_binders(rng, term)
        judgement = principal_type(opened)
        counts: dict[str, int] = {}
        for ty in [*judgement.ctx.values(), judgement.ty]:
            for name, k in var_counts(ty).items():
                counts[name] = counts.get(name, 0) + k
        bad = {name: k for name, k in counts.items() if k > 2}
        if bad:
            report.add_failure(
                lam.format_lambda(opened),
                "every type variable at most twice",
                f"{format_judgement(judgement)} ({bad})",
            )
    return report


def _prop_translation_invariance(cfg: GenConfig) -> CheckReport:
    report = CheckReport("translation-invariance", cfg.count)
    for term in generate(replace(cfg, mode="affine")):
        direct = principal_type(term)
        through_cl = principal_type_cl(cl.to_cl(term))
        if not equal_up_to_renaming(direct, through_cl):
            report.add_failure(
                lam.format_lambda(term),
                format_judgement(direct),
                format_judgement(through_cl),
            )
    return report


def _prop_mgu_oracle(cfg: GenConfig) -> CheckReport:
    """Unifier laws on constructed instances, and guaranteed occur failures.

    A solvable pair is a skeleton against an instance of its own renaming,
    so the instance substitution is a known unifier the computed one must
    generalize.  Failure cases equate a variable with a type containing it.
    """
    report = CheckReport("mgu-oracle", cfg.count)
    rng = random.Random(cfg.seed)
    for index in range(cfg.count):
        if index % 5 == 2:  # occurs-check construction
            host = _gen_binary_type(rng, max(2, cfg.max_depth), "o")
            while not isinstance(host, Arrow):
                host = _gen_binary_type(rng, max(2, cfg.max_depth), "o")
            name = sorted(var_counts(host))[rng.randrange(len(var_counts(host)))]
            shown = f"{name}  vs  {format_type(host)}"
            try:
                mgu([(Leaf(name), host)])
                report.add_failure(shown, "occurs-check failure", "unifier found")
            except UnifyFailure:
                pass
            continue
        skeleton = _gen_binary_type(rng, cfg.max_depth, "s")
        renaming = Substitution(
            {name: Leaf(f"r{i}") for i, name in enumerate(sorted(var_counts(skeleton)))}
        )
        instantiation = _gen_substitution(
            rng, [f"r{i}" for i in range(len(var_counts(skeleton)))], 2, "n"
        )
        known = compose_subst(instantiation, renaming)
        target = apply_subst(known, skeleton)
        shown = f"{format_type(skeleton)}  vs  {format_type(target)}"
        try:
            computed = mgu([(skeleton, target)])
        except UnifyFailure:
            report.add_failure(shown, "unifier", "failure")
            continue
        if apply_subst(computed, skeleton) != apply_subst(computed, target):
            report.add_failure(shown, "computed unifier equates the pair", format_substitution(computed))
        idempotent = all(
            apply_subst(computed, ty) == ty for _, ty in computed.items()
        )
        if not idempotent:
            report.add_failure(shown, "idempotent unifier", format_substitution(computed))
        if not more_general(computed, known):
            report.add_failure(
                shown,
                f"at least as general as {format_substitution(known)}",
                format_substitution(computed),
            )
    return report


PROPERTIES: dict[str, Callable[[GenConfig], CheckReport]] = {
    "main-theorem": _prop_main_theorem,
    "abstraction": _prop_abstraction,
    "toplevel-conversion": _prop_toplevel_conversion,
    "linear-conversion": _prop_linear_conversion,
    "affine-full-reduction": _prop_affine_full_reduction,
    "bck-laws": _prop_bck_laws,
    "unif-equivalence": _prop_unif_equivalence,
    "nf-determination": _prop_nf_determination,
    "resolution-lemma": _prop_resolution_lemma,
    "binary-judgements": _prop_binary_judgements,
    "translation-invariance": _prop_translation_invariance,
    "mgu-oracle": _prop_mgu_oracle,
}


def run_property(name: str, cfg: GenConfig) -> CheckReport:
    """Evaluate a named property over ``cfg.count`` samples."""
    if name not in PROPERTIES:
        known = ", ".join(sorted(PROPERTIES))
        raise ValueError(f"unknown property {name!r}; known: {known}")
    return PROPERTIES[name](cfg)

"""Affine lambda calculus, principal types, and partial involutions.

The package has three layers:

* syntax and reduction (``lam``, ``cl``): affine lambda terms, affine
  combinatory logic, bracket abstraction, and the translations between them;
* typing (``typesys``, ``inference``): arrow types, unification, and
  principal type inference with canonical renaming;
* semantics (``involutions``): the algebra of partial involutions, where
  application is a feedback composition of path pairs, plus the induced
  occurrence-oriented unification procedure.

``harness`` ties the layers together with seeded generators and checkers
for the structural theorems relating them; ``cli`` is a thin command-line
front end.
"""

from .cl import B, C, CApp, CVar, CLTerm, Comb, I, K, abstract, cl_normalize, parse_cl, to_cl, to_lambda
from .inference import (
    Judgement,
    canonical_rename,
    combinator_principal_type,
    derivable,
    equal_up_to_renaming,
    format_judgement,
    is_instance,
    principal_type,
    principal_type_cl,
)
from .involutions import (
    DivergenceError,
    Involution,
    Trajectory,
    compose_hat,
    format_involution,
    format_trajectory,
    goi_mgu,
    goi_semantics_cl,
    goi_semantics_lambda,
    goi_unifiable,
    involution,
    involution_of_type,
    linear_apply,
    project,
    trajectories,
    type_of_involution,
)
from .lam import (
    Abs,
    App,
    LambdaTerm,
    NotAffineError,
    Var,
    alpha_eq,
    format_lambda,
    is_affine,
    is_linear,
    normalize,
    occurrence_count,
    parse_lambda,
    substitute,
)
from .parsing import ParseError
from .typesys import (
    Arrow,
    FreshSupply,
    Leaf,
    Occurrence,
    Substitution,
    Type,
    UnifyFailure,
    apply_subst,
    compose_subst,
    format_type,
    merge_unifiers,
    mgu,
    more_general,
    occ_unifier,
    occurrences,
    parse_type,
    theta_free_ancestor,
    type_of_occurrences,
)

__all__ = [name for name in dir() if not name.startswith("_")]

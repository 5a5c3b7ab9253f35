"""Partial involutions on l/r paths and their linear application.

A binary type induces a symmetric, irreflexive set of path pairs: one pair
per variable that labels two leaves.  These pair sets compose by a feedback
loop ("linear application"): a pair entering on the right of the operator
either exits immediately (both ends under ``r``) or bounces between the
operand and the left side of the operator until it exits.  Each completed
bounce sequence is a trajectory; its two endpoint paths, extended by the
suffixes picked up along the way, form one output pair.

Composition of two pairs is a pure path operation: when one pair's exit is
a prefix of the next pair's entry (or vice versa), the leftover suffix is
carried over to the far ends.  This is exactly the action of the most
general unifier of the two one-occurrence trees around those paths; the
substitution-level reading is kept as a test oracle.

A bounce sequence that revisits a directed pair it has already used, with
the carried paths extended or unchanged, can never complete; such regress
signals that the underlying types do not unify and raises DivergenceError.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import cl, lam
from .typesys import (
    Arrow,
    FreshSupply,
    Leaf,
    Occurrence,
    Path,
    Substitution,
    Type,
    UnifyFailure,
    format_path,
    format_substitution,
    is_binary,
    is_prefix,
    mgu,
    occurrences,
    type_of_occurrences,
    var_counts,
)

DirectedPair = tuple[Path, Path]


class InvolutionError(ValueError):
    """Raised when a pair set violates the involution invariants."""


class DivergenceError(RuntimeError):
    """Raised when trajectory search enters a provably endless regress."""


@dataclass(frozen=True)
class Involution:
    """Symmetric, irreflexive set of directed path pairs.

    The carrier is prefix-free and every path belongs to exactly one
    unordered pair, as for the repeated variables of a binary type.
    """

    pairs: frozenset[DirectedPair]

    def __str__(self) -> str:
        return format_involution(self)

    @property
    def carrier(self) -> frozenset[Path]:
        return frozenset(p for pair in self.pairs for p in pair)

    def unordered(self) -> list[tuple[Path, Path]]:
        """The unordered pairs, each listed once as (smaller, larger)."""
        return sorted({(min(p, q), max(p, q)) for p, q in self.pairs})

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


def involution(pairs) -> Involution:
    """Build an Involution from directed or unordered pairs, adding mirror
    images and checking the invariants."""
    directed: set[DirectedPair] = set()
    for p, q in pairs:
        p, q = tuple(p), tuple(q)
        if p == q:
            raise InvolutionError(f"reflexive pair at {format_path(p)}")
        directed.add((p, q))
        directed.add((q, p))
    partner: dict[Path, Path] = {}
    for p, q in directed:
        if partner.setdefault(p, q) != q:
            raise InvolutionError(f"path {format_path(p)} belongs to two pairs")
    paths = sorted(partner)
    for a, b in zip(paths, paths[1:]):
        if is_prefix(a, b):
            raise InvolutionError(
                f"carrier path {format_path(a)} is a prefix of {format_path(b)}"
            )
    return Involution(frozenset(directed))


def involution_of_type(ty: Type) -> Involution:
    """Pair up the two occurrences of each repeated variable of a binary
    type; variables occurring once contribute nothing."""
    counts = var_counts(ty)
    for name, count in sorted(counts.items()):
        if count > 2:
            raise InvolutionError(f"variable {name} occurs {count} times; at most 2 allowed")
    by_var: dict[str, list[Path]] = {}
    for occ in sorted(occurrences(ty)):
        by_var.setdefault(occ.var, []).append(occ.path)
    return involution(
        (paths[0], paths[1]) for paths in by_var.values() if len(paths) == 2
    )


def type_of_involution(f: Involution, fresh: FreshSupply | None = None) -> Type:
    """The least binary type whose repeated variables realize exactly ``f``.

    Paired paths share a variable; leaf positions the pairs do not reach are
    filled with distinct fresh variables.  The empty involution yields a
    bare fresh variable.
    """
    if fresh is None:
        fresh = FreshSupply()
    occs = []
    for i, (p, q) in enumerate(f.unordered()):
        name = f"a{i}"
        occs.append(Occurrence(p, name))
        occs.append(Occurrence(q, name))
    return type_of_occurrences(occs, fresh)


def project(f: Involution, i: str, j: str) -> frozenset[DirectedPair]:
    """Directed pairs of ``f`` whose ends start with ``i`` and ``j``, with
    those first letters stripped.  Not symmetric in general.
    """
    if i not in ("l", "r") or j not in ("l", "r"):
        raise ValueError("projection sides must be 'l' or 'r'")
    return frozenset(
        (p[1:], q[1:]) for p, q in f.pairs if p and q and p[0] == i and q[0] == j
    )


def compose_pair(first: DirectedPair, second: DirectedPair) -> DirectedPair | None:
    """Compose two directed pairs by suffix transport.

    The meeting point is the first pair's exit against the second pair's
    entry; whichever is shallower absorbs the other's leftover suffix,
    which reappears on the corresponding far end.  Incomparable paths do
    not compose.
    """
    a, b = first
    v, w = second
    if is_prefix(b, v):
        return (a + v[len(b):], w)
    if is_prefix(v, b):
        return (a, w + b[len(v):])
    return None


def compose_hat(first, second) -> frozenset[DirectedPair]:
    """Pairwise composition of two directed pair sets."""
    out = set()
    for p in first:
        for q in second:
            r = compose_pair(p, q)
            if r is not None:
                out.add(r)
    return frozenset(out)


def _token_cap(f: Involution, g: Involution) -> int:
    """Bound on carried path length before a chain counts as a regress.

    A terminating chain's token stays within the unified type's paths,
    whose depth is bounded by the combined carrier depth; a regress grows
    its token every cycle and blows past any such bound.
    """
    depths = [len(p) for inv in (f, g) for pair in inv.pairs for p in pair]
    return 4 * max(depths, default=0) + 16


@dataclass(frozen=True)
class TrajectoryStep:
    source: str  # "f_rr" | "f_rl" | "g" | "f_ll" | "f_lr"
    pair: DirectedPair


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[TrajectoryStep, ...]
    output: DirectedPair
    unifier: Substitution


def _apply_outputs(f: Involution, g: Involution) -> tuple[set[DirectedPair], bool]:
    """Output pairs of the feedback composition.

    Breadth-first over distinct (token, next source) states: a chain's
    future depends on nothing else, so states are explored once.  The state
    space is finite exactly when no chain pumps its token forever; a token
    outgrowing the cap flags divergence and is not expanded.
    """
    f_rl = sorted(project(f, "r", "l"))
    f_ll = sorted(project(f, "l", "l"))
    f_lr = sorted(project(f, "l", "r"))
    g_pairs = sorted(g.pairs)
    cap = _token_cap(f, g)

    outputs: set[DirectedPair] = set(project(f, "r", "r"))
    diverged = False
    seen: set[tuple[DirectedPair, str]] = set()
    queue: deque = deque()

    def push(token: DirectedPair, stage: str) -> None:
        nonlocal diverged
        if len(token[0]) > cap or len(token[1]) > cap:
            diverged = True
            return
        if (token, stage) not in seen:
            seen.add((token, stage))
            queue.append((token, stage))

    for pair in f_rl:
        push(pair, "g")
    while queue:
        token, stage = queue.popleft()
        if stage == "g":
            for pair in g_pairs:
                next_token = compose_pair(token, pair)
                if next_token is not None:
                    push(next_token, "exit")
        else:  # close with f_lr, or bounce through f_ll and return to g
            for pair in f_lr:
                result = compose_pair(token, pair)
                if result is not None:
                    outputs.add(result)
            for pair in f_ll:
                next_token = compose_pair(token, pair)
                if next_token is not None:
                    push(next_token, "g")
    return outputs, diverged


def linear_apply(f: Involution, g: Involution) -> Involution:
    """The feedback composition of two involutions.

    Pairs of ``f`` living entirely on the right pass through; every other
    output arises from a trajectory entering the operand.  The output pair
    set is again an involution: mirror trajectories guarantee symmetry, and
    outputs of distinct trajectories never sit on comparable paths.
    """
    outputs, diverged = _apply_outputs(f, g)
    if diverged:
        raise DivergenceError("feedback composition entered a regress")
    for p, q in outputs:
        if (q, p) not in outputs:
            raise InvolutionError(
                f"output {format_path(p)} -> {format_path(q)} lacks its mirror"
            )
    return involution(outputs)


def _trajectory_unifier(steps: tuple[TrajectoryStep, ...]) -> Substitution:
    """Most general unifier of the junction constraints along a trajectory.

    Step ``i`` contributes the one-occurrence tree around its exit path,
    to be unified with the tree around step ``i+1``'s entry path; filler
    leaves are fresh throughout.
    """
    fresh = FreshSupply()
    pairs = []
    for i in range(len(steps) - 1):
        exit_occ = Occurrence(steps[i].pair[1], f"a{i + 1}")
        entry_occ = Occurrence(steps[i + 1].pair[0], f"a{i + 2}")
        pairs.append(
            (type_of_occurrences([exit_occ], fresh), type_of_occurrences([entry_occ], fresh))
        )
    return mgu(pairs)


def trajectories(f: Involution, g: Involution) -> list[Trajectory]:
    """All completed trajectories of ``f`` applied to ``g``, each with the
    unifier of its junction constraints and its output pair.

    Unlike ``linear_apply`` this keeps whole step sequences, so branches
    are explored separately; a branch meeting its own earlier state again
    is cut (its continuations replay), and a token outgrowing the cap is a
    regress.
    """
    f_rl = sorted(project(f, "r", "l"))
    f_ll = sorted(project(f, "l", "l"))
    f_lr = sorted(project(f, "l", "r"))
    g_pairs = sorted(g.pairs)
    cap = _token_cap(f, g)

    raw: list[tuple[tuple[TrajectoryStep, ...], DirectedPair]] = []
    for pair in sorted(project(f, "r", "r")):
        raw.append(((TrajectoryStep("f_rr", pair),), pair))

    queue: deque = deque()
    for pair in f_rl:
        queue.append((pair, (TrajectoryStep("f_rl", pair),), frozenset(((pair, "g"),)), "g"))
    while queue:
        token, steps, visited, stage = queue.popleft()
        if len(token[0]) > cap or len(token[1]) > cap:
            raise DivergenceError("trajectory search entered a regress")
        if stage == "g":
            for pair in g_pairs:
                next_token = compose_pair(token, pair)
                if next_token is None or (next_token, "exit") in visited:
                    continue
                queue.append(
                    (
                        next_token,
                        steps + (TrajectoryStep("g", pair),),
                        visited | {(next_token, "exit")},
                        "exit",
                    )
                )
        else:  # close with f_lr, or bounce through f_ll and return to g
            for pair in f_lr:
                result = compose_pair(token, pair)
                if result is not None:
                    raw.append((steps + (TrajectoryStep("f_lr", pair),), result))
            for pair in f_ll:
                next_token = compose_pair(token, pair)
                if next_token is None or (next_token, "g") in visited:
                    continue
                queue.append(
                    (
                        next_token,
                        steps + (TrajectoryStep("f_ll", pair),),
                        visited | {(next_token, "g")},
                        "g",
                    )
                )
    result = [
        Trajectory(steps, output, _trajectory_unifier(steps)) for steps, output in raw
    ]
    result.sort(key=lambda t: (len(t.steps), [(s.source, s.pair) for s in t.steps]))
    return result


# --- semantics of closed terms --------------------------------------------

_BASE_DENOTATIONS = {
    "B": ((("r", "r", "r"), ("l", "r")),
          (("l", "l"), ("r", "l", "r")),
          (("r", "l", "l"), ("r", "r", "l"))),
    "I": ((("l",), ("r",)),),
    "C": ((("l", "l"), ("r", "r", "l")),
          (("l", "r", "l"), ("r", "l")),
          (("l", "r", "r"), ("r", "r", "r"))),
    "K": ((("l",), ("r", "r")),),
}


def combinator_denotation(name: str) -> Involution:
    if name not in _BASE_DENOTATIONS:
        raise ValueError(f"unknown combinator {name!r}")
    return involution(_BASE_DENOTATIONS[name])


def goi_semantics_cl(m: cl.CLTerm) -> Involution:
    """Interpret a closed combinatory term: combinators get their fixed
    pair sets, application is ``linear_apply``.

    DivergenceError cannot occur for closed terms; if it surfaces, it is an
    internal-consistency failure, not a property of the input.
    """
    match m:
        case cl.Comb(name):
            return combinator_denotation(name)
        case cl.CApp(fun, arg):
            return linear_apply(goi_semantics_cl(fun), goi_semantics_cl(arg))
        case cl.CVar(name):
            raise ValueError(f"term is not closed: free variable {name}")


def goi_semantics_lambda(m: lam.LambdaTerm) -> Involution:
    """Interpret a closed affine lambda term through its combinatory image."""
    if lam.free_vars(m):
        raise ValueError(f"term is not closed: {lam.format_lambda(m)}")
    return goi_semantics_cl(cl.to_cl(m))


# --- unification through the feedback closure ------------------------------


@dataclass(frozen=True)
class GoiUnifyResult:
    unifiable: bool
    diverged: bool

    def __bool__(self) -> bool:
        return self.unifiable


def _require_strictly_binary_pair(sigma: Type, tau: Type) -> None:
    for label, ty in (("first", sigma), ("second", tau)):
        bad = {n: c for n, c in var_counts(ty).items() if c != 2}
        if bad:
            raise ValueError(
                f"{label} type must use every variable exactly twice, got {sorted(bad)}"
            )
    shared = set(var_counts(sigma)) & set(var_counts(tau))
    if shared:
        raise ValueError(f"types must not share variables, got {sorted(shared)}")


def _covered(state: DirectedPair, pair: DirectedPair) -> bool:
    """Whether ``state`` extends ``pair`` on both ends by one common suffix."""
    (a, b), (u, v) = state, pair
    return is_prefix(u, a) and is_prefix(v, b) and a[len(u):] == b[len(v):]


def _closure_covers(f: Involution, g: Involution) -> tuple[bool, bool]:
    """Check every pair of ``f`` against the closure g ; (f ; g)*.

    Closure states are collected breadth-first over distinct (token, next
    source) states; a token outgrowing the cap flags divergence.  Returns
    (all pairs covered, some chain diverged).
    """
    states: set[DirectedPair] = set(g.pairs)
    diverged = False
    cap = _token_cap(f, g)
    seen: set[tuple[DirectedPair, str]] = set()
    queue: deque = deque()

    def push(token: DirectedPair, stage: str) -> None:
        nonlocal diverged
        if len(token[0]) > cap or len(token[1]) > cap:
            diverged = True
            return
        if (token, stage) not in seen:
            seen.add((token, stage))
            queue.append((token, stage))

    for pair in sorted(g.pairs):
        push(pair, "f")
    while queue:
        token, stage = queue.popleft()
        source = f if stage == "f" else g
        next_stage = "g" if stage == "f" else "f"
        for pair in sorted(source.pairs):
            next_token = compose_pair(token, pair)
            if next_token is None:
                continue
            if next_stage == "f":  # just completed a (f ; g) block
                states.add(next_token)
            push(next_token, next_stage)
    ok = all(
        any(_covered(state, pair) for state in states) for pair in sorted(f.pairs)
    )
    return ok, diverged


def goi_unifiable(sigma: Type, tau: Type) -> GoiUnifyResult:
    """Decide unifiability of two strictly-binary types by pair coverage.

    Each side's pairs must reappear, extended by a common suffix, in the
    feedback closure built from the other side.  Divergent search branches
    are cut and reported through the ``diverged`` flag; they arise exactly
    when the occurs check would bite.
    """
    _require_strictly_binary_pair(sigma, tau)
    f = involution_of_type(sigma)
    g = involution_of_type(tau)
    ok_f, div_f = _closure_covers(f, g)
    ok_g, div_g = _closure_covers(g, f)
    return GoiUnifyResult(ok_f and ok_g, div_f or div_g)


def _distinct_name(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "x"
    return name


def _replace_leaf_at(ty: Type, path: Path, name: str) -> Type:
    if not path:
        assert isinstance(ty, Leaf)
        return Leaf(name)
    assert isinstance(ty, Arrow)
    if path[0] == "l":
        return Arrow(_replace_leaf_at(ty.left, path[1:], name), ty.right)
    return Arrow(ty.left, _replace_leaf_at(ty.right, path[1:], name))


def goi_mgu(sigma: Type, tau: Type) -> Substitution:
    """Read a most general unifier of strictly-binary types off trajectories.

    For each variable of ``sigma``, its two occurrences are split into
    fresh copies and exposed as the result ``copy1 -> copy2`` of an
    auxiliary operator, which is then applied to the other side's pair set.
    The output pairs reconstruct the two exposed images as one binary type;
    unifying the images (the split copies name the same variable) gives the
    variable's binding.  Agrees with the rewrite-based unifier up to
    renaming, one variable at a time.
    """
    result = goi_unifiable(sigma, tau)
    if not result:
        detail = " (divergent regress)" if result.diverged else ""
        raise UnifyFailure(f"types do not GoI-unify{detail}")
    g = involution_of_type(tau)
    taken = set(var_counts(sigma)) | set(var_counts(tau))
    fresh = FreshSupply("z")
    bindings: dict[str, Type] = {}
    by_var: dict[str, list[Path]] = {}
    for occ in sorted(occurrences(sigma)):
        by_var.setdefault(occ.var, []).append(occ.path)
    for name, paths in sorted(by_var.items()):
        first, second = sorted(paths)
        copy1 = _distinct_name(f"{name}1", taken)
        copy2 = _distinct_name(f"{name}2", taken)
        split = _replace_leaf_at(_replace_leaf_at(sigma, first, copy1), second, copy2)
        exposed = Arrow(split, Arrow(Leaf(copy1), Leaf(copy2)))
        try:
            out = linear_apply(involution_of_type(exposed), g)
        except DivergenceError as exc:
            raise UnifyFailure("divergent regress while reading bindings") from exc
        image = type_of_involution(out, fresh)
        if isinstance(image, Arrow):
            merge = mgu([(image.left, image.right)])
            bindings[name] = merge(image.left)
        else:
            # no pair reached the exposed copies: both images are unconstrained
            bindings[name] = image
    return Substitution(bindings)


# --- text formats ----------------------------------------------------------


def _format_involution_path(path: Path) -> str:
    return " ".join(path) if path else "e"


def format_involution(f: Involution) -> str:
    lines = [
        f"{_format_involution_path(p)} <-> {_format_involution_path(q)}"
        for p, q in f.unordered()
    ]
    return "\n".join(lines) if lines else "(empty)"


def format_trajectory(t: Trajectory) -> str:
    lines = []
    for i, step in enumerate(t.steps):
        var = f"a{i + 1}"
        lines.append(
            f"{step.source}: {format_path(step.pair[0])}[{var}]"
            f" -> {format_path(step.pair[1])}[{var}]"
        )
    lines.append(
        f"output: {_format_involution_path(t.output[0])}"
        f" <-> {_format_involution_path(t.output[1])}"
    )
    lines.append("unifier:")
    for line in format_substitution(t.unifier).splitlines():
        lines.append(f"  {line}")
    return "\n".join(lines)

"""Arrow types, variable occurrences, substitutions, and unification.

Types are binary trees whose leaves are variables.  An occurrence addresses
a leaf by its l/r path from the root; a type is *binary* when no variable
labels more than two leaves.  Unification follows the Martelli-Montanari
rewrite rules on a set of pairs, run under a fixed deterministic schedule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

from .parsing import ParseError, TokenStream, tokenize

Path = tuple[str, ...]  # letters "l"/"r"; () addresses the root


@dataclass(frozen=True)
class Leaf:
    name: str

    def __str__(self) -> str:
        return format_type(self)


@dataclass(frozen=True)
class Arrow:
    left: "Type"
    right: "Type"

    def __str__(self) -> str:
        return format_type(self)


Type = Leaf | Arrow


class Occurrence(NamedTuple):
    path: Path
    var: str

    def __str__(self) -> str:
        return f"{format_path(self.path)}[{self.var}]"


class UnifyFailure(Exception):
    """Raised when a pair set has no unifier (occurs check)."""


def format_path(path: Path) -> str:
    return "".join(path) if path else "e"


def parse_path(text: str) -> Path:
    if text == "e":
        return ()
    if not text or set(text) - {"l", "r"}:
        raise ValueError(f"not a path: {text!r}")
    return tuple(text)


def type_vars(ty: Type) -> Iterator[str]:
    """Variables of ``ty`` in left-to-right leaf order, with repetitions."""
    match ty:
        case Leaf(name):
            yield name
        case Arrow(left, right):
            yield from type_vars(left)
            yield from type_vars(right)


def var_counts(ty: Type) -> dict[str, int]:
    counts: dict[str, int] = {}
    for name in type_vars(ty):
        counts[name] = counts.get(name, 0) + 1
    return counts


def is_binary(ty: Type) -> bool:
    """No variable occurs more than twice."""
    return all(k <= 2 for k in var_counts(ty).values())


def occurrences(ty: Type) -> frozenset[Occurrence]:
    """One occurrence per leaf; the bare variable sits at the empty path."""
    acc = []

    def walk(t: Type, path: Path) -> None:
        match t:
            case Leaf(name):
                acc.append(Occurrence(path, name))
            case Arrow(left, right):
                walk(left, path + ("l",))
                walk(right, path + ("r",))

    walk(ty, ())
    return frozenset(acc)


def is_prefix(p: Path, q: Path) -> bool:
    return len(p) <= len(q) and q[: len(p)] == p


class FreshSupply:
    """Deterministic stream of fresh variable names: z0, z1, ..."""

    def __init__(self, prefix: str = "z", start: int = 0):
        self.prefix = prefix
        self.counter = start

    def fresh(self) -> str:
        name = f"{self.prefix}{self.counter}"
        self.counter += 1
        return name


def type_of_occurrences(occs: Iterable[Occurrence], fresh: FreshSupply | None = None) -> Type:
    """Rebuild the least tree realizing a prefix-free occurrence set.

    Leaf positions forced by the tree shape but absent from the set are
    filled with pairwise-distinct names drawn from ``fresh``.  The empty set
    yields a single fresh leaf.
    """
    if fresh is None:
        fresh = FreshSupply()
    occs = sorted(set(occs))
    for a, b in zip(occs, occs[1:]):
        if a.path == b.path or is_prefix(a.path, b.path):
            raise ValueError(f"occurrence {a} overlaps {b}")

    def build(group: list[Occurrence]) -> Type:
        if not group:
            return Leaf(fresh.fresh())
        if len(group) == 1 and group[0].path == ():
            return Leaf(group[0].var)
        left = [Occurrence(o.path[1:], o.var) for o in group if o.path[0] == "l"]
        right = [Occurrence(o.path[1:], o.var) for o in group if o.path[0] == "r"]
        return Arrow(build(left), build(right))

    return build(occs)


def theta_free_ancestor(ty: Type, theta: frozenset[str] | set[str], fresh: FreshSupply | None = None) -> Type:
    """Collapse every maximal subtree whose variables all lie in ``theta``
    to a fresh leaf, leaving the rest of the tree intact.

    The result instantiates back to ``ty`` by substituting only the fresh
    leaves, so it is an ancestor of ``ty``.
    """
    if fresh is None:
        fresh = FreshSupply()
    theta = frozenset(theta)

    def build(t: Type) -> Type:
        # every type has a leaf, so the subset test never fires vacuously
        if set(type_vars(t)) <= theta:
            return Leaf(fresh.fresh())
        match t:
            case Leaf(_):
                return t
            case Arrow(left, right):
                return Arrow(build(left), build(right))

    return build(ty)


class Substitution:
    """Finite map from variables to types, identity elsewhere.

    Application is leaf-wise.  Instances built by ``mgu`` are idempotent.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[str, Type] | Iterable[tuple[str, Type]] = ()):
        self._map = {k: v for k, v in dict(mapping).items() if v != Leaf(k)}

    def __call__(self, ty: Type) -> Type:
        match ty:
            case Leaf(name):
                return self._map.get(name, ty)
            case Arrow(left, right):
                return Arrow(self(left), self(right))

    def get(self, name: str) -> Type:
        return self._map.get(name, Leaf(name))

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    def items(self) -> list[tuple[str, Type]]:
        return sorted(self._map.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Substitution):
            return NotImplemented
        return self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k} := {format_type(v)}" for k, v in self.items())
        return f"{{{inner}}}"

    def __str__(self) -> str:
        return format_substitution(self)


identity = Substitution()


def apply_subst(subst: Substitution, ty: Type) -> Type:
    return subst(ty)


def compose_subst(outer: Substitution, inner: Substitution) -> Substitution:
    """The substitution acting as ``outer`` after ``inner``."""
    mapping = {name: outer(ty) for name, ty in inner.items()}
    for name, ty in outer.items():
        mapping.setdefault(name, ty)
    return Substitution(mapping)


def format_substitution(subst: Substitution) -> str:
    lines = [f"{name} := {format_type(ty)}" for name, ty in subst.items()]
    return "\n".join(lines) if lines else "(identity)"


def _pair_key(pair: tuple[Type, Type]) -> tuple[str, str]:
    return (format_type(pair[0]), format_type(pair[1]))


def mgu(pairs: Iterable[tuple[Type, Type]]) -> Substitution:
    """Most general unifier of a set of type pairs.

    Rewrites the pair set until solved: arrow pairs decompose, trivial
    variable pairs vanish, arrow-against-variable pairs flip, and a solved
    variable is eliminated from the rest of the set.  A variable equated
    with a type properly containing it has no unifier: UnifyFailure.

    The pair to rewrite is always the textually least one, so results are
    reproducible; any schedule yields the same unifier up to renaming.
    """
    work: set[tuple[Type, Type]] = set(pairs)
    while True:
        action = None
        for pair in sorted(work, key=_pair_key):
            s, t = pair
            if isinstance(s, Arrow) and isinstance(t, Arrow):
                action = ("decompose", pair)
                break
            if isinstance(s, Leaf) and s == t:
                action = ("drop", pair)
                break
            if isinstance(s, Arrow) and isinstance(t, Leaf):
                action = ("flip", pair)
                break
            assert isinstance(s, Leaf)
            if s.name in set(type_vars(t)):
                raise UnifyFailure(f"{s.name} occurs in {format_type(t)}")
            rest = work - {pair}
            if any(s.name in set(type_vars(a)) | set(type_vars(b)) for a, b in rest):
                action = ("eliminate", pair)
                break
        if action is None:
            return Substitution({s.name: t for s, t in work})  # type: ignore[union-attr]
        kind, pair = action
        s, t = pair
        work.discard(pair)
        if kind == "decompose":
            work.add((s.left, t.left))  # type: ignore[union-attr]
            work.add((s.right, t.right))  # type: ignore[union-attr]
        elif kind == "flip":
            work.add((t, s))
        elif kind == "eliminate":
            elim = Substitution({s.name: t})  # type: ignore[union-attr]
            work = {(elim(a), elim(b)) for a, b in work}
            work.add(pair)
        # "drop": nothing further


def unifiable(pairs: Iterable[tuple[Type, Type]]) -> bool:
    try:
        mgu(pairs)
        return True
    except UnifyFailure:
        return False


def _match_types(pattern: Type, target: Type, binding: dict[str, Type]) -> bool:
    """One-sided unification: instantiate pattern variables only."""
    match pattern:
        case Leaf(name):
            if name in binding:
                return binding[name] == target
            binding[name] = target
            return True
        case Arrow(left, right):
            if not isinstance(target, Arrow):
                return False
            return _match_types(left, target.left, binding) and _match_types(
                right, target.right, binding
            )


def matching(pairs: Iterable[tuple[Type, Type]]) -> Substitution | None:
    """Substitution sending each left side to its right side, or None."""
    binding: dict[str, Type] = {}
    for pattern, target in pairs:
        if not _match_types(pattern, target, binding):
            return None
    return Substitution(binding)


def more_general(u: Substitution, v: Substitution) -> bool:
    """Whether some ``w`` composed after ``u`` acts as ``v``.

    The witness is found by matching ``u``'s action against ``v``'s on the
    union of their domains; only the ``v`` side may be instantiated.
    """
    names = sorted(u.domain | v.domain)
    return matching([(u.get(n), v.get(n)) for n in names]) is not None


def merge_unifiers(u1: Substitution, u2: Substitution) -> Substitution:
    """Least substitution refining both ``u1`` and ``u2``.

    Unifies the two images of every variable they touch, then composes the
    result over ``u1`` so both are instantiated simultaneously.  Raises
    UnifyFailure when the images cannot be reconciled.
    """
    names = sorted(u1.domain | u2.domain)
    w = mgu([(u1.get(n), u2.get(n)) for n in names])
    return compose_subst(w, u1)


def occ_unifier(u: Occurrence, v: Occurrence) -> Substitution | None:
    """Most general unifier of the one-occurrence trees around ``u`` and ``v``.

    Defined exactly when one path is a prefix of the other; returns None
    otherwise.  Fresh filler leaves are named z0, z1, ... on the ``u`` side
    and continue on the ``v`` side.
    """
    if not (is_prefix(u.path, v.path) or is_prefix(v.path, u.path)):
        return None
    fresh = FreshSupply()
    left = type_of_occurrences([u], fresh)
    right = type_of_occurrences([v], fresh)
    return mgu([(left, right)])


def occ_unifier_action(u: Occurrence, v: Occurrence, other: Occurrence) -> Occurrence:
    """Transport ``other`` (an occurrence of ``u``'s variable elsewhere)
    along the occ-unifier of ``u`` and ``v``.

    When ``v`` extends ``u`` by ``w``, the variable at ``u`` becomes a tree
    carrying ``v``'s variable at relative path ``w``, so ``other`` moves to
    ``other.path + w`` and is relabelled; otherwise it is unchanged.
    """
    if other.var != u.var:
        raise ValueError("occurrence does not mention the unified variable")
    if is_prefix(u.path, v.path) and u.path != v.path:
        suffix = v.path[len(u.path):]
        return Occurrence(other.path + suffix, v.var)
    return other


# --- text format ---------------------------------------------------------
#
# type ::= atom ('->' type)?   (right-assoc)
# atom ::= ident | '(' type ')'


def parse_type(src: str) -> Type:
    tokens = tokenize(src, ("->", "(", ")"))
    stream = TokenStream(tokens, len(src))
    ty = _parse_type(stream)
    stream.done()
    return ty


def _parse_type(stream: TokenStream) -> Type:
    left = _parse_type_atom(stream)
    tok = stream.peek()
    if tok is not None and tok.kind == "->":
        stream.next()
        return Arrow(left, _parse_type(stream))
    return left


def _parse_type_atom(stream: TokenStream) -> Type:
    tok = stream.next()
    if tok.kind == "ident":
        return Leaf(tok.text)
    if tok.kind == "(":
        ty = _parse_type(stream)
        stream.expect(")")
        return ty
    raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def format_type(ty: Type) -> str:
    match ty:
        case Leaf(name):
            return name
        case Arrow(left, right):
            left_text = format_type(left)
            if isinstance(left, Arrow):
                left_text = f"({left_text})"
            return f"{left_text} -> {format_type(right)}"

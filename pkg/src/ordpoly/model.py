"""Constraint sets over [0,1]-valued variables.

A constraint set holds order constraints ``x <= y`` and pinned exact values
``x = v`` with v rational in [0, 1].  Closing a set under implication
materializes the global bounds as two reserved pinned variables (0 and 1),
inserts the order edge between every comparable pinned pair, and stores the
full transitive closure as per-variable bitsets.  The reserved bound
variables are hidden from every user-facing view.

On top of the closed form this module provides consistency checking (via
reachability between pinned values), persistent-tie collapsing (strongly
connected components), Hasse covers, polytope dimension, independence
decomposition of the unknowns, and shape classification of the parts
(total-order / tree / reverse-tree / general).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import networkx as nx

from .errors import (
    ContradictionError,
    MalformedInputError,
    PersistentTieError,
)
from .poly import RationalLike, parse_rational

VarLike = Union["VariableId", str, int]

SHAPE_TOTAL_ORDER = "total-order"
SHAPE_TREE = "tree"
SHAPE_REVERSE_TREE = "reverse-tree"
SHAPE_GENERAL = "general"


@dataclass(frozen=True)
class VariableId:
    """A variable: dense integer id within one constraint set, unique name."""

    id: int
    name: str

    def __str__(self) -> str:
        return self.name


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class ConstraintSet:
    """Immutable set of order and exact-value constraints.

    Construct with variable names, order pairs ``(a, b)`` meaning a <= b,
    and an exact-value map.  The set starts unclosed; ``close_under_implication``
    returns the closed form used by every engine.
    """

    __slots__ = (
        "variables",
        "exact_values",
        "closed",
        "reserved",
        "_base_edges",
        "_succ",
        "_pred",
        "_order_edges",
        "_name_to_id",
    )

    def __init__(
        self,
        variables: Sequence[str],
        order: Iterable[tuple[str, str]] = (),
        exact: Mapping[str, RationalLike] | None = None,
    ):
        names = list(variables)
        if any(not isinstance(n, str) or not n for n in names):
            raise MalformedInputError("variable names must be non-empty strings")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise MalformedInputError(f"duplicate variable names: {dup}")
        vs = tuple(VariableId(i, n) for i, n in enumerate(names))
        lookup = {n: i for i, n in enumerate(names)}

        edges: set[tuple[int, int]] = set()
        for pair in order:
            a, b = pair
            if a not in lookup or b not in lookup:
                missing = [x for x in (a, b) if x not in lookup]
                raise MalformedInputError(f"order constraint uses unknown variable: {missing}")
            if a != b:
                edges.add((lookup[a], lookup[b]))

        values: dict[int, Fraction] = {}
        for name, raw in (exact or {}).items():
            if name not in lookup:
                raise MalformedInputError(f"exact value for unknown variable: {name!r}")
            try:
                v = parse_rational(raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise MalformedInputError(f"bad rational for {name!r}: {raw!r}") from exc
            if not 0 <= v <= 1:
                raise MalformedInputError(f"exact value out of [0, 1]: {name} = {v}")
            values[lookup[name]] = v

        self.variables = vs
        self.exact_values = MappingProxyType(values)
        self.closed = False
        self.reserved = frozenset()
        self._base_edges = tuple(sorted(edges))
        self._succ = None
        self._pred = None
        self._order_edges = frozenset(edges)
        self._name_to_id = lookup

    @classmethod
    def _assemble(
        cls,
        variables: tuple[VariableId, ...],
        base_edges: tuple[tuple[int, int], ...],
        exact_values: dict[int, Fraction],
        *,
        closed: bool,
        reserved: frozenset[int],
        succ: list[int] | None,
    ) -> "ConstraintSet":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.exact_values = MappingProxyType(exact_values)
        obj.closed = closed
        obj.reserved = reserved
        obj._base_edges = base_edges
        obj._succ = succ
        obj._pred = None
        obj._order_edges = None
        obj._name_to_id = {v.name: v.id for v in variables}
        return obj

    # -- lookups ---------------------------------------------------------

    def resolve(self, x: VarLike) -> VariableId:
        if isinstance(x, VariableId):
            got = self.variables[x.id] if x.id < len(self.variables) else None
            if got is None or got.name != x.name:
                raise MalformedInputError(f"variable {x} does not belong to this set")
            return x
        if isinstance(x, int):
            return self.variables[x]
        if x in self._name_to_id:
            return self.variables[self._name_to_id[x]]
        raise MalformedInputError(f"unknown variable: {x!r}")

    def value_of(self, x: VarLike) -> Fraction | None:
        return self.exact_values.get(self.resolve(x).id)

    @property
    def order_edges(self) -> frozenset[tuple[int, int]]:
        if self._order_edges is None:
            succ = self._succ
            edges = set()
            for i in range(len(self.variables)):
                for j in _bits(succ[i]):
                    if i != j:
                        edges.add((i, j))
            self._order_edges = frozenset(edges)
        return self._order_edges

    def reaches(self, i: int, j: int) -> bool:
        self._require_closed()
        return bool(self._succ[i] >> j & 1)

    def _require_closed(self) -> None:
        if not self.closed:
            raise ValueError("operation requires a closed constraint set")

    def _preds(self) -> list[int]:
        if self._pred is None:
            self._require_closed()
            pred = [0] * len(self.variables)
            for i, mask in enumerate(self._succ):
                bit = 1 << i
                for j in _bits(mask):
                    pred[j] |= bit
            self._pred = pred
        return self._pred

    def visible(self) -> tuple[VariableId, ...]:
        return tuple(v for v in self.variables if v.id not in self.reserved)

    def unknowns(self) -> tuple[VariableId, ...]:
        return tuple(v for v in self.variables if v.id not in self.exact_values)

    def sorted_exacts(self) -> list[tuple[Fraction, VariableId]]:
        return sorted(
            ((val, self.variables[i]) for i, val in self.exact_values.items()),
            key=lambda pair: (pair[0], pair[1].id),
        )

    def has_persistent_tie(self) -> bool:
        self._require_closed()
        return any(mask >> i & 1 for i, mask in enumerate(self._succ))

    # -- user-facing re-construction -------------------------------------

    def user_view(self) -> tuple[list[str], list[tuple[str, str]], dict[str, Fraction]]:
        """Names, order pairs, and exact values with reserved bounds hidden."""
        keep = [v for v in self.variables if v.id not in self.reserved]
        names = [v.name for v in keep]
        kept_ids = {v.id for v in keep}
        edges = sorted(
            (self.variables[i].name, self.variables[j].name)
            for i, j in self.order_edges
            if i in kept_ids and j in kept_ids
        )
        exact = {
            self.variables[i].name: val
            for i, val in self.exact_values.items()
            if i in kept_ids
        }
        return names, edges, exact

    def with_exact(self, x: VarLike, value: RationalLike) -> "ConstraintSet":
        """A fresh unclosed copy with ``x`` additionally pinned to ``value``."""
        names, edges, exact = self.user_view()
        exact[self.resolve(x).name] = parse_rational(value)
        return ConstraintSet(names, edges, exact)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.order_edges == other.order_edges
            and dict(self.exact_values) == dict(other.exact_values)
            and self.closed == other.closed
        )

    def __hash__(self) -> int:
        return hash((self.variables, self.closed))

    def __repr__(self) -> str:
        tag = "closed" if self.closed else "open"
        return (
            f"ConstraintSet({tag}, {len(self.variables)} vars, "
            f"{len(self._base_edges)} base edges, {len(self.exact_values)} exact)"
        )


def _fresh_bound_names(taken: Iterable[str]) -> tuple[str, str]:
    taken = set(taken)
    bot, top = "⊥", "⊤"  # ⊥, ⊤
    while bot in taken:
        bot += "_"
    while top in taken:
        top += "_"
    return bot, top


def _reachability(n: int, edges: set[tuple[int, int]]) -> list[int]:
    """Per-node successor bitsets for the transitive closure of ``edges``.

    Condenses strongly connected components (cycles arise from equal pinned
    values or contradictory input) and accumulates reachability in reverse
    topological order, so the cost is linear in the number of edges rather
    than cubic in the number of variables.  Members of a nontrivial
    component reach every co-member, themselves included.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    comp_of: dict[int, int] = {}
    members: list[list[int]] = []
    for comp in nx.strongly_connected_components(graph):
        idx = len(members)
        members.append(sorted(comp))
        for node in comp:
            comp_of[node] = idx
    cond = nx.DiGraph()
    cond.add_nodes_from(range(len(members)))
    cond.add_edges_from(
        (comp_of[a], comp_of[b]) for a, b in edges if comp_of[a] != comp_of[b]
    )
    member_mask = [sum(1 << m for m in group) for group in members]
    comp_succ = [0] * len(members)
    for c in reversed(list(nx.topological_sort(cond))):
        acc = 0
        for d in cond.successors(c):
            acc |= comp_succ[d] | member_mask[d]
        comp_succ[c] = acc
    succ = [0] * n
    for idx, group in enumerate(members):
        bits = comp_succ[idx]
        if len(group) > 1:
            bits |= member_mask[idx]
        for m in group:
            succ[m] = bits
    return succ


def close_under_implication(cs: ConstraintSet) -> ConstraintSet:
    """Transitive closure with materialized bounds and exact-pair edges.

    Adds two reserved pinned variables 0 and 1 below/above everything,
    inserts the edge between every comparable pinned pair (both directions
    when the values are equal, which later collapses to a tie class), and
    stores full reachability.  Idempotent; never rejects an inconsistent
    set (consistency is a separate check).
    """
    if cs.closed:
        return cs
    n_user = len(cs.variables)
    bot_name, top_name = _fresh_bound_names(v.name for v in cs.variables)
    bot, top = n_user, n_user + 1
    variables = cs.variables + (
        VariableId(bot, bot_name),
        VariableId(top, top_name),
    )
    exact = dict(cs.exact_values)
    exact[bot] = Fraction(0)
    exact[top] = Fraction(1)

    base: set[tuple[int, int]] = set(cs._base_edges)
    for i in range(n_user):
        base.add((bot, i))
        base.add((i, top))
    base.add((bot, top))
    # Chain the pinned variables in value order; transitivity implies the
    # rest.  Equal values get edges both ways — a persistent tie.
    pinned = sorted(exact.items(), key=lambda kv: (kv[1], kv[0]))
    for (ia, va), (ib, vb) in zip(pinned, pinned[1:]):
        base.add((ia, ib))
        if va == vb:
            base.add((ib, ia))

    n = n_user + 2
    succ = _reachability(n, base)

    return ConstraintSet._assemble(
        variables,
        tuple(sorted(base)),
        exact,
        closed=True,
        reserved=frozenset({bot, top}),
        succ=succ,
    )


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of the consistency check; failure carries a witness chain."""

    ok: bool
    witness: tuple[VariableId, ...] | None = None
    message: str = "consistent"


def check_consistency(cs: ConstraintSet) -> ConsistencyReport:
    """Decide whether the admissible polytope is non-empty.

    The polytope is empty exactly when some pinned variable reaches a
    strictly smaller pinned value through the closed order.  The witness is
    the shortest such chain over the direct (pre-closure) edges.
    """
    closed = close_under_implication(cs)
    succ = closed._succ
    pinned = sorted(
        closed.exact_values.items(), key=lambda kv: (-kv[1], closed.variables[kv[0]].name)
    )
    for i, vi in pinned:
        for j, vj in reversed(pinned):
            if vj >= vi:
                break
            if succ[i] >> j & 1:
                chain = _witness_chain(closed, i, j)
                names = " <= ".join(v.name for v in chain)
                return ConsistencyReport(
                    ok=False,
                    witness=chain,
                    message=(
                        f"chain {names} forces {vi} <= {vj}, but "
                        f"{closed.variables[i].name} = {vi} and "
                        f"{closed.variables[j].name} = {vj}"
                    ),
                )
    return ConsistencyReport(ok=True)


def _witness_chain(closed: ConstraintSet, start: int, goal: int) -> tuple[VariableId, ...]:
    adj: dict[int, list[int]] = {}
    for a, b in closed._base_edges:
        adj.setdefault(a, []).append(b)
    parent = {start: start}
    frontier = [start]
    while frontier:
        nxt: list[int] = []
        for u in frontier:
            for v in sorted(adj.get(u, ())):
                if v not in parent:
                    parent[v] = u
                    nxt.append(v)
            if goal in parent:
                break
        if goal in parent:
            break
        frontier = nxt
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return tuple(closed.variables[i] for i in reversed(path))


@dataclass(frozen=True)
class TieQuotient:
    """Result of collapsing persistent ties (mutually ordered variables)."""

    quotient: ConstraintSet
    class_of: Mapping[int, VariableId]
    representatives: Mapping[int, tuple[VariableId, ...]]

    def quotient_of(self, source: ConstraintSet, x: VarLike) -> VariableId:
        return self.class_of[source.resolve(x).id]


def collapse_ties(cs: ConstraintSet) -> TieQuotient:
    """Merge every persistent-tie class into a single variable.

    The quotient is closed, tie-free, and carries the class's unique exact
    value when one exists.  Interpolating a variable in the original set
    equals interpolating its class in the quotient (equal-value worlds
    differ on a measure-zero set only).  Inconsistent input is rejected.
    """
    closed = close_under_implication(cs)
    report = check_consistency(closed)
    if not report.ok:
        raise ContradictionError(report.message, tuple(v.name for v in report.witness))

    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(closed.variables)))
    graph.add_edges_from(closed._base_edges)
    classes = sorted(
        (sorted(scc) for scc in nx.strongly_connected_components(graph)),
        key=lambda members: members[0],
    )

    member_class = {}
    for idx, members in enumerate(classes):
        for m in members:
            member_class[m] = idx

    variables = []
    exact: dict[int, Fraction] = {}
    reserved = set()
    for idx, members in enumerate(classes):
        user_names = sorted(
            closed.variables[m].name for m in members if m not in closed.reserved
        )
        if user_names:
            name = user_names[0]
        else:
            name = closed.variables[members[0]].name
            reserved.add(idx)
        variables.append(VariableId(idx, name))
        values = {closed.exact_values[m] for m in members if m in closed.exact_values}
        if values:
            assert len(values) == 1, "tie class with two exact values is inconsistent"
            exact[idx] = values.pop()

    qbase = {
        (member_class[a], member_class[b])
        for a, b in closed._base_edges
        if member_class[a] != member_class[b]
    }
    qsucc = _reachability(len(classes), qbase)

    quotient = ConstraintSet._assemble(
        tuple(variables),
        tuple(qbase),
        exact,
        closed=True,
        reserved=frozenset(reserved),
        succ=qsucc,
    )
    class_of = {
        m: quotient.variables[idx] for idx, members in enumerate(classes) for m in members
    }
    representatives = {
        idx: tuple(closed.variables[m] for m in members)
        for idx, members in enumerate(classes)
    }
    return TieQuotient(quotient, MappingProxyType(class_of), MappingProxyType(representatives))


@dataclass(frozen=True)
class HasseDiagram:
    """Covering relation of the closed, tie-free partial order."""

    nodes: tuple[VariableId, ...]
    cover_edges: frozenset[tuple[int, int]]

    def edges_by_name(self) -> set[tuple[str, str]]:
        by_id = {v.id: v.name for v in self.nodes}
        return {(by_id[a], by_id[b]) for a, b in self.cover_edges}


def _cover_edges(closed: ConstraintSet) -> frozenset[tuple[int, int]]:
    # Every cover x ⋖ y must appear among the base edges: if it were only
    # implied transitively, the implying chain would put an element strictly
    # between x and y.  So only base edges need the no-intermediate test.
    # Callers pass tie-free (collapsed) sets.
    succ = closed._succ
    pred = closed._preds()
    covers = set()
    for i, j in closed._base_edges:
        if i != j and not (succ[i] & pred[j]):
            covers.add((i, j))
    return frozenset(covers)


def _check_user_ties(closed: ConstraintSet, tq: TieQuotient) -> None:
    """Reject tie classes that merge two or more user variables.

    Closing a set whose pinned values include 0 or 1 ties those variables
    with the reserved bounds; such single-user-variable classes are an
    implementation artifact and pass silently.  A class with two or more
    user variables is a real persistent tie.
    """
    for members in tq.representatives.values():
        user_members = [m for m in members if m.id not in closed.reserved]
        if len(user_members) > 1:
            names = ", ".join(sorted(m.name for m in user_members))
            raise PersistentTieError(
                f"persistent tie among {{{names}}}; collapse_ties first"
            )


def _tie_checked_quotient(cs: ConstraintSet) -> ConstraintSet:
    closed = close_under_implication(cs)
    tq = collapse_ties(closed)
    _check_user_ties(closed, tq)
    return tq.quotient


def hasse(cs: ConstraintSet, include_bounds: bool = False) -> HasseDiagram:
    """Cover pairs of the closed order; rejects persistent user ties.

    The transitive closure of the cover edges reproduces the full order.
    With ``include_bounds`` the reserved 0/1 bound variables appear too;
    by default they are hidden.
    """
    quotient = _tie_checked_quotient(cs)
    covers = _cover_edges(quotient)
    if include_bounds:
        return HasseDiagram(quotient.variables, covers)
    hidden = quotient.reserved
    nodes = tuple(v for v in quotient.variables if v.id not in hidden)
    kept = frozenset(
        (a, b) for a, b in covers if a not in hidden and b not in hidden
    )
    return HasseDiagram(nodes, kept)


@dataclass(frozen=True)
class UninfluenceDecomposition:
    """Partition of the unknowns into independent constraint sets.

    Two unknowns share a class when they are connected through cover edges
    that touch unknowns only; each part holds one class plus every pinned
    variable, so part volumes multiply to the whole volume and per-part
    interpolation agrees with whole-set interpolation.
    """

    classes: tuple[tuple[VariableId, ...], ...]
    parts: tuple[ConstraintSet, ...]
    part_index: Mapping[str, int] = field(repr=False)

    def part_of(self, name: str) -> ConstraintSet:
        return self.parts[self.part_index[name]]


def decompose(cs: ConstraintSet) -> UninfluenceDecomposition:
    """Split along the covering relation restricted to unknowns."""
    quotient = _tie_checked_quotient(cs)
    covers = _cover_edges(quotient)
    unknown_ids = [v.id for v in quotient.variables if v.id not in quotient.exact_values]
    parent = {i: i for i in unknown_ids}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in covers:
        if a in parent and b in parent:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for i in unknown_ids:
        groups.setdefault(find(i), []).append(i)
    ordered = sorted(groups.values(), key=lambda members: members[0])

    visible_exact = [
        quotient.variables[i]
        for i in sorted(quotient.exact_values)
        if i not in quotient.reserved
    ]
    classes = []
    parts = []
    part_index: dict[str, int] = {}
    for part_no, members in enumerate(ordered):
        class_vars = tuple(quotient.variables[i] for i in sorted(members))
        classes.append(class_vars)
        part_ids = set(members) | {v.id for v in visible_exact}
        names = [quotient.variables[i].name for i in sorted(part_ids)]
        # Projecting base edges (not the full closure) is enough: any closure
        # relation between part members is witnessed by cover chains through
        # the part's own class plus the chain of pinned variables, both of
        # which survive the projection.
        edges = [
            (quotient.variables[a].name, quotient.variables[b].name)
            for a, b in quotient._base_edges
            if a in part_ids and b in part_ids
        ]
        exact = {v.name: quotient.exact_values[v.id] for v in visible_exact}
        parts.append(ConstraintSet(names, edges, exact))
        for v in class_vars:
            part_index[v.name] = part_no

    return UninfluenceDecomposition(
        tuple(classes), tuple(parts), MappingProxyType(part_index)
    )


def polytope_dimension(cs: ConstraintSet) -> int:
    """Number of genuinely free coordinates after collapsing ties."""
    tq = collapse_ties(cs)  # rejects inconsistent input
    q = tq.quotient
    return sum(1 for v in q.variables if v.id not in q.exact_values)


@dataclass(frozen=True)
class PartSkeleton:
    """Cleaned Hasse structure of one decomposition part.

    Cover edges between two pinned variables are dropped (they constrain
    nothing once both endpoints are pinned and consistency holds) and
    pinned variables isolated by the drop are removed.  What remains is the
    structure the shape tags and the tree engine operate on.
    """

    part: ConstraintSet
    quotient: ConstraintSet
    nodes: tuple[VariableId, ...]
    children: Mapping[int, tuple[int, ...]]
    parents: Mapping[int, tuple[int, ...]]
    shape: str

    def node_by_name(self, name: str) -> VariableId:
        for v in self.nodes:
            if v.name == name:
                return v
        raise MalformedInputError(f"variable {name!r} is not part of this component")


def part_skeleton(part: ConstraintSet) -> PartSkeleton:
    """Cleaned Hasse skeleton plus shape tag for one decomposition part."""
    quotient = collapse_ties(part).quotient
    covers = _cover_edges(quotient)
    exact_ids = set(quotient.exact_values)
    kept = [(a, b) for a, b in covers if not (a in exact_ids and b in exact_ids)]
    touched = {a for a, _ in kept} | {b for _, b in kept}
    node_ids = sorted(
        v.id
        for v in quotient.variables
        if v.id not in exact_ids or v.id in touched
    )
    children: dict[int, list[int]] = {i: [] for i in node_ids}
    parents: dict[int, list[int]] = {i: [] for i in node_ids}
    for a, b in kept:
        children[a].append(b)
        parents[b].append(a)
    name_of = {v.id: v.name for v in quotient.variables}
    for i in node_ids:
        children[i].sort(key=lambda j: name_of[j])
        parents[i].sort(key=lambda j: name_of[j])

    shape = _shape_of(node_ids, children, parents, exact_ids)
    return PartSkeleton(
        part=part,
        quotient=quotient,
        nodes=tuple(quotient.variables[i] for i in node_ids),
        children=MappingProxyType({i: tuple(c) for i, c in children.items()}),
        parents=MappingProxyType({i: tuple(p) for i, p in parents.items()}),
        shape=shape,
    )


def _tree_violation(
    node_ids: list[int],
    children: Mapping[int, Sequence[int]],
    parents: Mapping[int, Sequence[int]],
    exact_ids: set[int],
) -> str | None:
    roots = [i for i in node_ids if not parents[i]]
    if len(roots) != 1:
        return f"{len(roots)} minimal elements (need exactly one root)"
    root = roots[0]
    if root not in exact_ids:
        return "root is not pinned to an exact value"
    if len(children[root]) != 1:
        return f"root has {len(children[root])} children (need exactly one)"
    if any(len(parents[i]) != 1 for i in node_ids if i != root):
        return "a non-root node has more than one parent"
    leaves = [i for i in node_ids if not children[i]]
    if any(i not in exact_ids for i in leaves):
        return "a leaf is not pinned to an exact value"
    internal = [i for i in node_ids if children[i] and i != root]
    if any(i in exact_ids for i in internal):
        return "an internal node is pinned to an exact value"
    return None


def _shape_of(
    node_ids: list[int],
    children: Mapping[int, Sequence[int]],
    parents: Mapping[int, Sequence[int]],
    exact_ids: set[int],
) -> str:
    if all(len(children[i]) <= 1 and len(parents[i]) <= 1 for i in node_ids):
        return SHAPE_TOTAL_ORDER
    if _tree_violation(node_ids, children, parents, exact_ids) is None:
        return SHAPE_TREE
    if _tree_violation(node_ids, parents, children, exact_ids) is None:
        return SHAPE_REVERSE_TREE
    return SHAPE_GENERAL


def classify_shape(cs: ConstraintSet) -> list[str]:
    """Shape tag for each decomposition part, in decomposition order."""
    return [part_skeleton(p).shape for p in decompose(cs).parts]


def flip_constraints(cs: ConstraintSet) -> ConstraintSet:
    """Mirror the set through v -> 1 - v.

    Order edges reverse and every pinned value alpha becomes 1 - alpha;
    expected values of the flipped set are 1 minus the originals.
    """
    names, edges, exact = cs.user_view()
    return ConstraintSet(
        names,
        [(b, a) for a, b in edges],
        {n: 1 - v for n, v in exact.items()},
    )

"""Polynomial-time engine for tree-shaped constraint sets.

A constraint set is tree-shaped when its cleaned Hasse diagram is a
directed tree whose root is pinned and has exactly one child, and whose
pinned variables are exactly the root and the leaves.  For such sets the
subtree volume below a node x, as a function of the value v' of x's
parent, is a single polynomial

    V_x(v') = integral from v' to m_x of  prod_i V_{x_i}(v) dv,

where the product runs over x's unknown children and m_x is the smallest
pinned leaf value in x's subtree (the polynomial is valid on [0, m_x] and
the true volume is zero beyond).  The whole volume is the root child's
polynomial evaluated at the root value — quadratic time overall, no
extension enumeration.

Marginals factor as V(C | x=v) = V'_x(v) * prod_i V_{x_i}(v), where the
environment factor V'_x re-solves the tree with x turned into a pinned
leaf of value v.  On each interval between consecutive pinned values the
marginal is one polynomial, so it is recovered exactly by evaluating at
enough rational sample points and interpolating.

Reverse-tree-shaped sets (the mirror image) are handled by flipping
v -> 1 - v, and independent components by the decomposition dispatcher.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from types import MappingProxyType
from typing import Mapping

from .errors import MalformedInputError, ShapeError
from .model import (
    SHAPE_GENERAL,
    SHAPE_REVERSE_TREE,
    ConstraintSet,
    PartSkeleton,
    VariableId,
    _tree_violation,
    collapse_ties,
    decompose,
    flip_constraints,
    part_skeleton,
)
from .poly import (
    POLY_ONE,
    PiecewisePolynomial,
    Polynomial,
    interpolating_polynomial,
    pw_expectation,
)

# ---------------------------------------------------------------------------
# integer-scaled polynomials
#
# Bottom-up volume passes on large trees produce polynomials whose rational
# coefficients share factorial-sized denominators.  Keeping one integer
# denominator per polynomial (normalized once per node) avoids a gcd per
# coefficient operation, which is what makes 1000-node trees fast.

_IPoly = tuple[list[int], int]  # (integer coefficients, positive denominator)

_IP_ONE: _IPoly = ([1], 1)


def _ip_normalize(coeffs: list[int], den: int) -> _IPoly:
    # Cheap probe first: most products have trivial content, and two gcds
    # settle that without touching every coefficient.
    g = gcd(den, coeffs[-1], coeffs[0])
    if g == 1:
        return coeffs, den
    g = gcd(den, *coeffs)
    if g > 1:
        coeffs = [c // g for c in coeffs]
        den //= g
    return coeffs, den


def _ip_mul(a: _IPoly, b: _IPoly) -> _IPoly:
    ca, da = a
    cb, db = b
    out = [0] * (len(ca) + len(cb) - 1)
    for i, ai in enumerate(ca):
        if ai:
            for j, bj in enumerate(cb):
                if bj:
                    out[i + j] += ai * bj
    return out, da * db


def _ip_antideriv(a: _IPoly) -> _IPoly:
    coeffs, den = a
    scale = 1
    for i in range(1, len(coeffs) + 1):
        scale = scale * i // gcd(scale, i)
    out = [0] * (len(coeffs) + 1)
    for i, c in enumerate(coeffs):
        out[i + 1] = c * (scale // (i + 1))
    return out, den * scale


def _ip_eval(a: _IPoly, at: Fraction) -> Fraction:
    coeffs, den = a
    if not coeffs:
        return Fraction(0)
    p, q = at.numerator, at.denominator
    acc = coeffs[-1]
    qpow = 1
    for c in reversed(coeffs[:-1]):
        qpow *= q
        acc = acc * p + c * qpow
    return Fraction(acc, den * qpow)


def _ip_to_polynomial(a: _IPoly) -> Polynomial:
    coeffs, den = a
    return Polynomial.of(Fraction(c, den) for c in coeffs)


# ---------------------------------------------------------------------------
# the tree itself


@dataclass(frozen=True)
class ConstraintTree:
    """Validated tree form of a single decomposition part.

    Nodes are the variables of the part's tie-collapsed skeleton; edges
    point from the pinned root upward through the unknowns to the pinned
    leaves.  ``min_leaf_below`` holds m_x, the smallest pinned leaf value
    in each node's subtree, which is both the upper integration limit and
    the point beyond which the subtree volume is zero.
    """

    source: ConstraintSet
    variables: tuple[VariableId, ...]
    root: VariableId
    root_value: Fraction
    children: Mapping[VariableId, tuple[VariableId, ...]]
    parent: Mapping[VariableId, VariableId]
    leaf_values: Mapping[VariableId, Fraction]
    min_leaf_below: Mapping[VariableId, Fraction]

    def node(self, x) -> VariableId:
        if isinstance(x, VariableId):
            for v in self.variables:
                if v == x:
                    return v
            raise MalformedInputError(f"variable {x} is not a node of this tree")
        for v in self.variables:
            if v.name == x:
                return v
        raise MalformedInputError(f"unknown tree node: {x!r}")

    def is_unknown(self, v: VariableId) -> bool:
        return v not in self.leaf_values and v != self.root

    def unknown_nodes(self) -> tuple[VariableId, ...]:
        return tuple(v for v in self.variables if self.is_unknown(v))

    @property
    def root_child(self) -> VariableId:
        return self.children[self.root][0]


@dataclass(frozen=True)
class SubtreeVolumeFn:
    """Per-node volume polynomial V_x(v'), valid on [0, valid_to]."""

    node: VariableId
    poly: Polynomial
    valid_to: Fraction

    def __call__(self, v: Fraction) -> Fraction:
        v = Fraction(v)
        if v >= self.valid_to:
            return Fraction(0)
        return self.poly(v)


def as_tree(cs: ConstraintSet) -> ConstraintTree:
    """Build a ConstraintTree from a constraint set with one component."""
    parts = decompose(cs).parts
    if len(parts) != 1:
        raise ShapeError(
            f"constraint set splits into {len(parts)} independent components; "
            "build one tree per decomposition part"
        )
    return tree_from_part(parts[0])


def tree_from_part(part: ConstraintSet) -> ConstraintTree:
    """Validate one decomposition part as a tree, or explain why not."""
    return _tree_from_skeleton(part_skeleton(part))


def _tree_from_skeleton(skel: PartSkeleton) -> ConstraintTree:
    node_ids = [v.id for v in skel.nodes]
    exact_ids = set(skel.quotient.exact_values)
    violation = _tree_violation(node_ids, skel.children, skel.parents, exact_ids)
    if violation is not None:
        reverse_ok = (
            _tree_violation(node_ids, skel.parents, skel.children, exact_ids) is None
        )
        if reverse_ok:
            raise ShapeError(
                "reverse-tree-shaped: flip the constraints (v -> 1-v), solve "
                "on the flipped tree, and flip the results back"
            )
        raise ShapeError(f"not tree-shaped: {violation}")

    by_id = {v.id: v for v in skel.nodes}
    children = {
        by_id[i]: tuple(by_id[c] for c in skel.children[i]) for i in node_ids
    }
    parent = {
        by_id[c]: by_id[i] for i in node_ids for c in skel.children[i]
    }
    root = next(v for v in skel.nodes if v not in parent)
    values = skel.quotient.exact_values
    leaf_values = {
        by_id[i]: values[i] for i in node_ids if not skel.children[i] and i != root.id
    }

    min_leaf: dict[VariableId, Fraction] = {}

    # Iterative bottom-up (deep chains overflow the recursion limit).
    stack = [root]
    post: list[VariableId] = []
    while stack:
        v = stack.pop()
        post.append(v)
        stack.extend(children[v])
    for v in reversed(post):
        if v in leaf_values:
            min_leaf[v] = leaf_values[v]
        else:
            min_leaf[v] = min(min_leaf[c] for c in children[v])

    root_value = values[root.id]
    assert root_value <= min_leaf[root], "inconsistent tree survived validation"
    assert min_leaf[root] > 0, "zero-valued leaf must have collapsed into the root"

    return ConstraintTree(
        source=skel.part,
        variables=skel.nodes,
        root=root,
        root_value=root_value,
        children=MappingProxyType(children),
        parent=MappingProxyType(parent),
        leaf_values=MappingProxyType(leaf_values),
        min_leaf_below=MappingProxyType(min_leaf),
    )


# ---------------------------------------------------------------------------
# volume


def _volume_polys(t: ConstraintTree) -> dict[VariableId, _IPoly]:
    """Bottom-up V_x(v') for every unknown node, children before parents."""
    stack = [t.root]
    post: list[VariableId] = []
    while stack:
        v = stack.pop()
        post.append(v)
        stack.extend(t.children[v])
    polys: dict[VariableId, _IPoly] = {}
    for v in reversed(post):
        if not t.is_unknown(v):
            continue
        prod = _IP_ONE
        for c in t.children[v]:
            if c in polys:
                prod = _ip_mul(prod, polys[c])
        anti = _ip_antideriv(prod)
        upper = _ip_eval(anti, t.min_leaf_below[v])
        coeffs, den = anti
        scale = upper.denominator
        out = [-c * scale for c in coeffs]
        out[0] = upper.numerator * den
        polys[v] = _ip_normalize(out, den * scale)
    return polys


def subtree_volume_fns(t: ConstraintTree) -> dict[VariableId, SubtreeVolumeFn]:
    """The per-node volume polynomials as public, exact-rational objects."""
    return {
        v: SubtreeVolumeFn(v, _ip_to_polynomial(p), t.min_leaf_below[v])
        for v, p in _volume_polys(t).items()
    }


def volume_tree(t: ConstraintTree) -> Fraction:
    """Exact polytope volume of the tree: root child's V evaluated at the root."""
    polys = _volume_polys(t)
    return _ip_eval(polys[t.root_child], t.root_value)


# ---------------------------------------------------------------------------
# marginal and interpolation


def _env_volume(
    t: ConstraintTree,
    fpolys: Mapping[VariableId, Polynomial],
    x: VariableId,
    v: Fraction,
) -> Fraction:
    """Volume of the tree with subtree(x) removed and x pinned to v."""
    node = x
    carried_poly: Polynomial | None = None  # replaces node's cached poly
    carried_m = v
    while node != t.root_child:
        p = t.parent[node]
        prod = POLY_ONE
        bound = carried_m
        for c in t.children[p]:
            if c == node:
                if carried_poly is not None:
                    prod = prod * carried_poly
            elif c in t.leaf_values:
                bound = min(bound, t.leaf_values[c])
            else:
                prod = prod * fpolys[c]
                bound = min(bound, t.min_leaf_below[c])
        anti = prod.antideriv()
        poly = Polynomial.constant(anti(bound)) - anti
        carried_poly, carried_m, node = poly, bound, p
    if carried_poly is None:
        return Fraction(1)
    return carried_poly(t.root_value)


def marginal_tree(t: ConstraintTree, x) -> PiecewisePolynomial:
    """Exact marginal density of unknown node ``x``; mass exactly 1.

    Support is [root value, m_x]; on each interval between consecutive
    pinned values the density is one polynomial, recovered by exact
    evaluation at rational sample points followed by interpolation.
    """
    xv = t.node(x)
    if not t.is_unknown(xv):
        raise MalformedInputError(
            f"{xv.name!r} is pinned; only unknown nodes have a density"
        )
    total = volume_tree(t)
    fpolys = {v: _ip_to_polynomial(p) for v, p in _volume_polys(t).items()}

    lo, hi = t.root_value, t.min_leaf_below[xv]
    cuts = {lo, hi}
    cuts.update(v for v in t.leaf_values.values() if lo < v < hi)
    grid = sorted(cuts)

    child_factors = [
        fpolys[c] for c in t.children[xv] if c not in t.leaf_values
    ]
    degree_cap = len(t.unknown_nodes()) + 1

    def density_at(v: Fraction) -> Fraction:
        val = _env_volume(t, fpolys, xv, v)
        for f in child_factors:
            val *= f(v)
        return val / total

    breakpoints: list[Fraction] = [Fraction(0)] if lo > 0 else []
    pieces: list[Polynomial] = [Polynomial()] if lo > 0 else []
    breakpoints.append(lo)
    for a, b in zip(grid, grid[1:]):
        count = degree_cap + 2
        points = []
        for j in range(1, count + 1):
            s = a + (b - a) * Fraction(j, count + 1)
            points.append((s, density_at(s)))
        pieces.append(interpolating_polynomial(points))
        breakpoints.append(b)
    if hi < 1:
        pieces.append(Polynomial())
        breakpoints.append(Fraction(1))
    return PiecewisePolynomial(tuple(breakpoints), tuple(pieces)).canonical()


def interpolate_tree(t: ConstraintTree, x) -> Fraction:
    """Exact expected value of unknown node ``x``."""
    return pw_expectation(marginal_tree(t, x))


# ---------------------------------------------------------------------------
# decomposition dispatch


def _single_extension_value(skel: PartSkeleton, name: str) -> Fraction:
    """Expected value in a totally ordered part (exactly one extension)."""
    order: list[int] = []
    current = [v.id for v in skel.nodes if not skel.parents[v.id]]
    while current:
        assert len(current) == 1, "totally ordered part expected"
        i = current[0]
        order.append(i)
        current = list(skel.children[i])
    values = skel.quotient.exact_values
    names = {i: skel.quotient.variables[i].name for i in order}
    positions = [pos for pos, i in enumerate(order) if i in values]
    k = next(pos for pos, i in enumerate(order) if names[i] == name)
    p = max(pos for pos in positions if pos < k)
    q = min(pos for pos in positions if pos > k)
    alpha, beta = values[order[p]], values[order[q]]
    n = q - p - 1
    return alpha + Fraction(k - p, n + 1) * (beta - alpha)


def interpolate_decomposed(cs: ConstraintSet, x) -> Fraction:
    """Expected value of ``x`` via its decomposition part.

    Pinned variables return their value; tree-shaped parts use the tree
    engine; reverse-tree-shaped parts are flipped (v -> 1-v), solved, and
    flipped back; totally ordered parts have a single linear extension and
    a closed form.  General parts raise ``ShapeError``.
    """
    tq = collapse_ties(cs)
    target = tq.quotient_of(cs, x)
    pinned = tq.quotient.exact_values.get(target.id)
    if pinned is not None:
        return pinned
    part = decompose(tq.quotient).part_of(target.name)
    skel = part_skeleton(part)
    if skel.shape == SHAPE_GENERAL:
        raise ShapeError(
            f"the component containing {target.name!r} is general-shaped; "
            "use the exact engine (interpolate_exact) or the sampler"
        )
    node_ids = [v.id for v in skel.nodes]
    exact_ids = set(skel.quotient.exact_values)
    if _tree_violation(node_ids, skel.children, skel.parents, exact_ids) is None:
        return interpolate_tree(_tree_from_skeleton(skel), target.name)
    if skel.shape == SHAPE_REVERSE_TREE:
        flipped = flip_constraints(part)
        return 1 - interpolate_tree(tree_from_part(flipped), target.name)
    # Totally ordered with interior pinned values: one extension, closed form.
    return _single_extension_value(skel, target.name)


def marginal_decomposed(cs: ConstraintSet, x) -> PiecewisePolynomial:
    """Marginal density of ``x`` via its decomposition part (tree shapes)."""
    tq = collapse_ties(cs)
    target = tq.quotient_of(cs, x)
    if target.id in tq.quotient.exact_values:
        raise MalformedInputError(
            f"{target.name!r} is pinned; only unknowns have a density"
        )
    part = decompose(tq.quotient).part_of(target.name)
    skel = part_skeleton(part)
    node_ids = [v.id for v in skel.nodes]
    exact_ids = set(skel.quotient.exact_values)
    if _tree_violation(node_ids, skel.children, skel.parents, exact_ids) is None:
        return marginal_tree(_tree_from_skeleton(skel), target.name)
    if _tree_violation(node_ids, skel.parents, skel.children, exact_ids) is None:
        flipped = marginal_tree(tree_from_part(flip_constraints(part)), target.name)
        # density of 1-X: reflect each piece through t -> 1-t
        breakpoints = tuple(1 - b for b in reversed(flipped.breakpoints))
        pieces = tuple(
            p.compose_affine(Fraction(1), Fraction(-1))
            for p in reversed(flipped.pieces)
        )
        return PiecewisePolynomial(breakpoints, pieces).canonical()
    raise ShapeError(
        f"the component containing {target.name!r} is not (reverse-)tree-shaped; "
        "use marginal_exact"
    )

"""Stable interpolation scheme on trees."""
import random
from fractions import Fraction

import pytest

import gen
from ordpoly import (
    ConstraintSet,
    MalformedInputError,
    ShapeError,
    as_tree,
    check_stability,
    stable_interpolate,
)

F = Fraction


def lemma_tree() -> ConstraintSet:
    return ConstraintSet(
        ["x_r", "x_a", "x_b", "x_c", "x_d", "x_e"],
        [("x_r", "x_a"), ("x_a", "x_b"), ("x_b", "x_c"), ("x_a", "x_d"), ("x_d", "x_e")],
        {"x_r": F(0), "x_c": F(1, 2), "x_e": F(1)},
    )


class TestValues:
    def test_lemma_tree_values(self):
        sa = stable_interpolate(as_tree(lemma_tree()))
        assert sa.value_of("x_a") == F(1, 6)
        assert sa.value_of("x_b") == F(1, 3)
        assert sa.value_of("x_d") == F(7, 12)

    def test_balanced_midpoint_base_case(self):
        rng = random.Random(61)
        for _ in range(30):
            doc = gen.single_unknown_tree_doc(rng)
            names, order, exact = doc
            t = as_tree(gen.to_cs(doc))
            lower = exact["r"]
            upper = min(v for n, v in exact.items() if n != "r")
            assert stable_interpolate(t).value_of("x") == (lower + upper) / 2

    def test_direct_child_leaf_dominates_deeper_leaves(self):
        # x has leaf 1/2 directly and leaf 1 at distance 2; the minimum
        # candidate is the midpoint toward the direct leaf
        cs = ConstraintSet(
            ["r", "x", "y", "l1", "l2"],
            [("r", "x"), ("x", "l1"), ("x", "y"), ("y", "l2")],
            {"r": F(0), "l1": F(1, 2), "l2": F(1)},
        )
        sa = stable_interpolate(as_tree(cs))
        assert sa.value_of("x") == F(1, 4)

    def test_monotone_and_bounded(self):
        rng = random.Random(67)
        for _ in range(30):
            cs = gen.to_cs(gen.tree_doc(rng, rng.randint(1, 8)))
            t = as_tree(cs)
            sa = stable_interpolate(t)
            for v in t.unknown_nodes():
                val = sa.value_of(v)
                assert t.root_value < val < t.min_leaf_below[v]
                parent = t.parent[v]
                if t.is_unknown(parent):
                    assert sa.value_of(parent) <= val

    def test_child_order_permutation_invariance(self):
        base = lemma_tree()
        names, order, exact = base.user_view()
        rng = random.Random(71)
        for _ in range(5):
            shuffled_order = order[:]
            rng.shuffle(shuffled_order)
            shuffled_names = names[:]
            rng.shuffle(shuffled_names)
            other = ConstraintSet(shuffled_names, shuffled_order, exact)
            sa = stable_interpolate(as_tree(other))
            assert sa.value_of("x_a") == F(1, 6)
            assert sa.value_of("x_b") == F(1, 3)
            assert sa.value_of("x_d") == F(7, 12)


class TestStability:
    def test_lemma_tree_is_stable_everywhere(self):
        t = as_tree(lemma_tree())
        for v in t.unknown_nodes():
            report = check_stability(t, v)
            assert report.stable, report.mismatches

    def test_random_trees_are_stable(self):
        rng = random.Random(73)
        for _ in range(25):
            t = as_tree(gen.to_cs(gen.tree_doc(rng, rng.randint(1, 7))))
            for v in t.unknown_nodes():
                assert check_stability(t, v).stable

    def test_pinned_variable_is_rejected(self):
        t = as_tree(lemma_tree())
        with pytest.raises(MalformedInputError):
            check_stability(t, "x_c")


class TestShapeLimits:
    def test_general_shape_has_no_stable_scheme(self):
        cs = ConstraintSet(
            ["x", "y", "z", "g"],
            [("x", "y"), ("y", "z"), ("x", "g"), ("g", "z")],
            {"g": F(1, 2)},
        )
        with pytest.raises(ShapeError):
            as_tree(cs)

"""Independent reference computations the suite checks the library against.

Everything here is deliberately naive and shares no code with the
package: candidate orders are filtered one permutation at a time,
volumes come from summing closed-form products over explicit gap
assignments, feasibility goes through scipy's LP solver, and means come
from plain rejection sampling in the unit cube.  Slow, small, and
obviously correct — which is the point.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import linprog

Order = Sequence[tuple[str, str]]
Exact = dict[str, Fraction]


# ---------------------------------------------------------------------------
# feasibility by linear programming


def lp_feasible(names: Sequence[str], order: Order, exact: Exact) -> bool:
    """Whether the admissible region is nonempty, decided by an LP solve."""
    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    a_ub: list[list[float]] = []
    for a, b in order:
        row = [0.0] * n
        row[idx[a]], row[idx[b]] = 1.0, -1.0
        a_ub.append(row)
    a_eq: list[list[float]] = []
    b_eq: list[float] = []
    for name, val in exact.items():
        row = [0.0] * n
        row[idx[name]] = 1.0
        a_eq.append(row)
        b_eq.append(float(val))
    res = linprog(
        c=[0.0] * n,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=[0.0] * len(a_ub) if a_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=b_eq if a_eq else None,
        bounds=[(0.0, 1.0)] * n,
        method="highs",
    )
    return res.status == 0


# ---------------------------------------------------------------------------
# exact volume and means by brute enumeration
#
# A world is classified by (a) the ascending order of its unknown values
# and (b) which gap between consecutive pinned values each unknown falls
# into.  Within one class the unknowns of a gap (width w, m of them) are
# ordered uniform points, so the class volume is the product of w^m/m!
# and the expected value of the unknown ranked r among those m is
# lo + (hi-lo) * r/(m+1).  Summing classes is exponential but exact.


def _admissible_unknown_orders(
    names: Sequence[str], order: Order, exact: Exact
) -> Iterator[tuple[str, ...]]:
    unknowns = [n for n in names if n not in exact]
    pairs = [(a, b) for a, b in order if a not in exact and b not in exact]
    for perm in itertools.permutations(unknowns):
        pos = {n: i for i, n in enumerate(perm)}
        if all(pos[a] <= pos[b] for a, b in pairs):
            yield perm


def _direct_bounds(
    names: Sequence[str], order: Order, exact: Exact
) -> tuple[dict[str, Fraction], dict[str, Fraction]]:
    lo = {n: Fraction(0) for n in names if n not in exact}
    hi = {n: Fraction(1) for n in names if n not in exact}
    for a, b in order:
        if a in exact and b not in exact:
            lo[b] = max(lo[b], exact[a])
        elif b in exact and a not in exact:
            hi[a] = min(hi[a], exact[b])
    return lo, hi


def _gaps(exact: Exact) -> list[tuple[Fraction, Fraction]]:
    cuts = sorted({Fraction(0), Fraction(1), *exact.values()})
    return list(zip(cuts, cuts[1:]))


def _monotone_assignments(
    perm: Sequence[str],
    gaps: Sequence[tuple[Fraction, Fraction]],
    lo: dict[str, Fraction],
    hi: dict[str, Fraction],
) -> Iterator[tuple[int, ...]]:
    """Gap index per unknown, nondecreasing along the ascending order."""

    def rec(i: int, g_min: int) -> Iterator[tuple[int, ...]]:
        if i == len(perm):
            yield ()
            return
        u = perm[i]
        for g in range(g_min, len(gaps)):
            a, b = gaps[g]
            if a < lo[u] or b > hi[u]:
                continue
            for rest in rec(i + 1, g):
                yield (g, *rest)

    yield from rec(0, 0)


def _pin_pin_consistent(names: Sequence[str], order: Order, exact: Exact) -> bool:
    pairs = [(a, b) for a, b in order if a in exact and b in exact]
    # one round of direct checks plus transitive chains through pins only
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(exact)
    g.add_edges_from(pairs)
    for a in exact:
        for b in nx.descendants(g, a):
            if exact[a] > exact[b]:
                return False
    return True


def brute_volume_and_means(
    names: Sequence[str], order: Order, exact: Exact
) -> tuple[Fraction, dict[str, Fraction]]:
    """Exact volume and per-unknown expected values by full enumeration."""
    if not _pin_pin_consistent(names, order, exact):
        return Fraction(0), {}
    gaps = _gaps(exact)
    lo, hi = _direct_bounds(names, order, exact)
    unknowns = [n for n in names if n not in exact]
    total = Fraction(0)
    weighted = {u: Fraction(0) for u in unknowns}
    for perm in _admissible_unknown_orders(names, order, exact):
        for assign in _monotone_assignments(perm, gaps, lo, hi):
            counts = Counter(assign)
            vol = Fraction(1)
            for g, m in counts.items():
                width = gaps[g][1] - gaps[g][0]
                vol *= width**m / math.factorial(m)
            if not vol:
                continue
            total += vol
            rank_in_gap: Counter[int] = Counter()
            for u, g in zip(perm, assign):
                rank_in_gap[g] += 1
                a, b = gaps[g]
                mean = a + (b - a) * Fraction(rank_in_gap[g], counts[g] + 1)
                weighted[u] += vol * mean
    if not total:
        return Fraction(0), {}
    return total, {u: weighted[u] / total for u in unknowns}


def brute_volume(names: Sequence[str], order: Order, exact: Exact) -> Fraction:
    return brute_volume_and_means(names, order, exact)[0]


def brute_mean(
    names: Sequence[str], order: Order, exact: Exact, var: str
) -> Fraction:
    if var in exact:
        return exact[var]
    return brute_volume_and_means(names, order, exact)[1][var]


def brute_expected_rank(
    names: Sequence[str], order: Order, var: str
) -> Fraction:
    """Average 1-based rank over all admissible orders (pure-order sets)."""
    perms = list(_admissible_unknown_orders(names, order, {}))
    return Fraction(sum(p.index(var) + 1 for p in perms), len(perms))


def count_orders(names: Sequence[str], order: Order) -> int:
    return sum(1 for _ in _admissible_unknown_orders(names, order, {}))


# ---------------------------------------------------------------------------
# rejection sampling in the unit cube


def rejection_mean(
    names: Sequence[str],
    order: Order,
    exact: Exact,
    var: str,
    accepted_target: int,
    seed: int,
    batch: int = 200_000,
    max_proposals: int = 200_000_000,
) -> tuple[float, float]:
    """Mean of ``var`` over accepted cube points, with its standard error."""
    unknowns = [n for n in names if n not in exact]
    col = {n: i for i, n in enumerate(unknowns)}
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    got = 0
    proposed = 0
    while got < accepted_target:
        if proposed >= max_proposals:
            raise RuntimeError("acceptance rate too low for the proposal cap")
        pts = rng.random((batch, len(unknowns)))
        proposed += batch
        mask = np.ones(batch, dtype=bool)
        for a, b in order:
            va = pts[:, col[a]] if a in col else float(exact[a])
            vb = pts[:, col[b]] if b in col else float(exact[b])
            mask &= va <= vb
        sel = pts[mask, col[var]]
        kept.append(sel)
        got += sel.size
    vals = np.concatenate(kept)[:accepted_target]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


# ---------------------------------------------------------------------------
# Beta order-statistic density, expanded to exact coefficients


def _poly_mul(p: list[Fraction], q: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def beta_rescaled_coeffs(
    i: int, n: int, a: Fraction, b: Fraction
) -> list[Fraction]:
    """Ascending coefficients of the rank-i-of-n density mapped to [a, b].

    The i-th smallest of n uniform points on [a, b] has density
    C (t-a)^(i-1) (b-t)^(n-i) with C = n! / ((i-1)! (n-i)! (b-a)^n).
    """
    width = b - a
    c = Fraction(
        math.factorial(n), math.factorial(i - 1) * math.factorial(n - i)
    ) / width**n
    rising = [
        Fraction(math.comb(i - 1, j)) * (-a) ** (i - 1 - j) for j in range(i)
    ]
    falling = [
        Fraction(math.comb(n - i, j)) * b ** (n - i - j) * (-1) ** j
        for j in range(n - i + 1)
    ]
    return [c * coef for coef in _poly_mul(rising, falling)]


# ---------------------------------------------------------------------------
# tie-free rewriting (for checking the tie-collapse quotient)


def merge_ties(
    names: Sequence[str], order: Order, exact: Exact
) -> tuple[list[str], list[tuple[str, str]], Exact, dict[str, str]]:
    """Rewrite a constraint set with cyclic order constraints tie-free.

    Every strongly connected component of the order digraph is replaced
    by its lexicographically smallest member; a component containing a
    pinned variable pins its representative (ambiguity between distinct
    pinned values means the input was inconsistent — not handled here).
    Returns the rewritten document plus the member -> representative map.
    """
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(names)
    g.add_edges_from(order)
    rep: dict[str, str] = {}
    new_exact: Exact = {}
    for comp in nx.strongly_connected_components(g):
        r = min(comp)
        for m in comp:
            rep[m] = r
        pinned = {exact[m] for m in comp if m in exact}
        if len(pinned) > 1:
            raise ValueError("contradictory pins inside a tie class")
        if pinned:
            new_exact[r] = next(iter(pinned))
    new_names = sorted({rep[n] for n in names})
    new_order = sorted(
        {(rep[a], rep[b]) for a, b in order if rep[a] != rep[b]}
    )
    return new_names, new_order, new_exact, rep

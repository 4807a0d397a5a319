"""Exact top-k evaluation under three semantics, plus containment checks.

Given a selection of variables, "which k are on top?" has no single
answer when values are only partially known.  Three semantics are
implemented, all exact:

* local:  rank variables by their interpolated (expected) values and
  return the k best.
* u:      treat each admissible world as inducing a descending value
  sequence over the selected variables; return the length-k sequence
  with the highest probability.
* global: per variable, compute the probability that it ranks among the
  k highest selected values; return the k most probable variables.

The u and global semantics aggregate over the linear-extension
enumeration: within one extension's simplex fragment product, the
coordinate order is almost surely the extension order, so every
extension contributes its exact volume to one induced sequence.  The
semantics genuinely disagree, and only the local one satisfies the
containment property (each answer a strict prefix of the next longer
one); ``check_containment`` tests that property for any semantics.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    BudgetExceededError,
    LimitExceededError,
    MalformedInputError,
)
from .exact import DEFAULT_BUDGET, _count_extensions, _prepare, _Prep, _walk, interpolate_all
from .model import (
    SHAPE_GENERAL,
    SHAPE_REVERSE_TREE,
    SHAPE_TOTAL_ORDER,
    SHAPE_TREE,
    ConstraintSet,
    VariableId,
    decompose,
    flip_constraints,
    part_skeleton,
)
from .tree import _single_extension_value, interpolate_tree, tree_from_part

__all__ = [
    "SEMANTICS_LOCAL",
    "SEMANTICS_U",
    "SEMANTICS_GLOBAL",
    "SelectionPredicate",
    "TopKResult",
    "ContainmentReport",
    "select",
    "local_topk",
    "u_topk",
    "u_sequence_probabilities",
    "global_topk",
    "check_containment",
]

SEMANTICS_LOCAL = "local"
SEMANTICS_U = "u"
SEMANTICS_GLOBAL = "global"

_SEQUENCE_TABLE_LIMIT = 1_000_000


@dataclass(frozen=True)
class SelectionPredicate:
    """The set of variables competing for the top (𝒳_σ)."""

    selected: frozenset[VariableId]

    def __post_init__(self) -> None:
        if not self.selected:
            raise MalformedInputError("selection must not be empty")

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(v.name for v in self.selected))


def select(cs: ConstraintSet, names: Iterable[str]) -> SelectionPredicate:
    """Build a selection over ``cs`` from variable names."""
    return SelectionPredicate(frozenset(cs.resolve(n) for n in names))


@dataclass(frozen=True)
class TopKResult:
    """Ordered answer entries under one semantics.

    The annotation is the expected value (local), the probability of the
    whole returned sequence (u; every entry carries the same number), or
    the per-variable probability of ranking in the top k (global).
    """

    semantics: str
    k: int
    entries: tuple[tuple[VariableId, Fraction], ...]

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v, _ in self.entries)


@dataclass(frozen=True)
class ContainmentReport:
    """Whether answers grow by strict prefix as k increases.

    When they do not, ``violated_at`` is the first k where the k-answer
    is not a prefix of the (k+1)-answer, and the two lists are recorded.
    """

    semantics: str
    holds: bool
    violated_at: int | None
    shorter: tuple[str, ...]
    longer: tuple[str, ...]


def _selection_vars(cs: ConstraintSet, sel: SelectionPredicate | Iterable[str]) -> list[VariableId]:
    if not isinstance(sel, SelectionPredicate):
        sel = select(cs, sel)
    out = []
    for v in sorted(sel.selected, key=lambda v: v.name):
        resolved = cs.resolve(v.name)
        if resolved != v:
            raise MalformedInputError(
                f"selected variable {v.name!r} does not belong to this constraint set"
            )
        out.append(resolved)
    return out


def _require_k(k: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise MalformedInputError(f"k must be a positive integer, got {k!r}")


def _with_estimate_hint(err: BudgetExceededError) -> BudgetExceededError:
    out = BudgetExceededError(err.budget, err.lower_bound)
    out.args = (
        f"{err.args[0]}; estimate_topk computes a sampled answer without "
        "enumerating extensions",
    )
    return out


# ---------------------------------------------------------------------------
# local semantics: ranked expected values


def _part_values(part: ConstraintSet, wanted: set[str], budget: int, threads: int) -> dict[str, Fraction]:
    """Expected values of ``wanted`` unknowns inside one decomposition part."""
    skel = part_skeleton(part)
    if skel.shape == SHAPE_TREE:
        t = tree_from_part(part)
        return {n: interpolate_tree(t, n) for n in wanted}
    if skel.shape == SHAPE_REVERSE_TREE:
        t = tree_from_part(flip_constraints(part))
        return {n: 1 - interpolate_tree(t, n) for n in wanted}
    if skel.shape == SHAPE_TOTAL_ORDER:
        return {n: _single_extension_value(skel, n) for n in wanted}
    assert skel.shape == SHAPE_GENERAL
    vals = interpolate_all(part, budget=budget, threads=threads)
    return {n: vals[n] for n in wanted}


def local_topk(
    cs: ConstraintSet,
    sel: SelectionPredicate | Iterable[str],
    k: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> TopKResult:
    """The k selected variables with the highest expected values."""
    _require_k(k)
    chosen = _selection_vars(cs, sel)
    values: dict[str, Fraction] = {}
    by_part: dict[int, set[str]] = {}
    decomposition = None
    for v in chosen:
        if v.id in cs.exact_values:
            values[v.name] = cs.exact_values[v.id]
            continue
        if decomposition is None:
            decomposition = decompose(cs)
        by_part.setdefault(decomposition.part_index[v.name], set()).add(v.name)
    try:
        for part_no, wanted in sorted(by_part.items()):
            part = decomposition.parts[part_no]
            values.update(_part_values(part, wanted, budget, threads))
    except BudgetExceededError as err:
        raise _with_estimate_hint(err) from None
    ranked = sorted(chosen, key=lambda v: (-values[v.name], v.name))
    entries = tuple((v, values[v.name]) for v in ranked[:k])
    return TopKResult(SEMANTICS_LOCAL, k, entries)


# ---------------------------------------------------------------------------
# u and global semantics: one enumeration pass over extensions


@dataclass
class _SelTally:
    volume: Fraction
    count: int
    sequences: dict[tuple[int, ...], Fraction] | None
    ranks: dict[int, dict[int, Fraction]] | None


def _fold_selected(
    prep: _Prep,
    prefix: Sequence[int],
    sel_ids: frozenset[int],
    k: int | None,
    want_sequences: bool,
    want_ranks: bool,
    budget: int | None,
) -> _SelTally:
    sequences: dict[tuple[int, ...], Fraction] | None = {} if want_sequences else None
    ranks: dict[int, dict[int, Fraction]] | None = (
        {i: {} for i in sel_ids} if want_ranks else None
    )
    volume = Fraction(0)
    count = 0
    for order, vol, _assign, _sizes in _walk(prep, prefix):
        count += 1
        if budget is not None and count > budget:
            raise BudgetExceededError(budget, count)
        volume += vol
        descending = [i for i in reversed(order) if i in sel_ids]
        if sequences is not None:
            seq = tuple(descending if k is None else descending[:k])
            if seq in sequences:
                sequences[seq] += vol
            else:
                if len(sequences) >= _SEQUENCE_TABLE_LIMIT:
                    raise LimitExceededError(
                        f"more than {_SEQUENCE_TABLE_LIMIT} distinct top-k "
                        "sequences; lower k or use estimate_topk"
                    )
                sequences[seq] = vol
        if ranks is not None:
            for r, i in enumerate(descending, start=1):
                bucket = ranks[i]
                if r in bucket:
                    bucket[r] += vol
                else:
                    bucket[r] = vol
    return _SelTally(volume, count, sequences, ranks)


def _selected_tally(
    cs: ConstraintSet,
    chosen: Sequence[VariableId],
    k: int | None,
    want_sequences: bool,
    want_ranks: bool,
    budget: int,
    threads: int,
) -> tuple[_Prep, _SelTally]:
    prep = _prepare(cs, reject_user_ties=True)
    try:
        known = _count_extensions(prep, budget)
    except BudgetExceededError as err:
        raise _with_estimate_hint(err) from None
    if known is not None and known > budget:
        raise _with_estimate_hint(BudgetExceededError(budget, known)) from None
    sel_ids = frozenset(
        prep.class_of[cs.resolve(v.name).id].id for v in chosen
    )
    run_budget = None if known is not None else budget
    try:
        if known is None or threads <= 1:
            return prep, _fold_selected(
                prep, (), sel_ids, k, want_sequences, want_ranks, run_budget
            )
        choices = prep.first_choices()
        if len(choices) <= 1:
            return prep, _fold_selected(
                prep, (), sel_ids, k, want_sequences, want_ranks, None
            )
        bottom = prep.bottom
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda c: _fold_selected(
                        prep, (bottom, c), sel_ids, k, want_sequences, want_ranks, None
                    ),
                    choices,
                )
            )
    except BudgetExceededError as err:
        raise _with_estimate_hint(err) from None
    merged = _SelTally(
        Fraction(0),
        0,
        {} if want_sequences else None,
        {i: {} for i in sel_ids} if want_ranks else None,
    )
    for part in parts:
        merged.volume += part.volume
        merged.count += part.count
        if merged.sequences is not None:
            for seq, vol in part.sequences.items():
                merged.sequences[seq] = merged.sequences.get(seq, Fraction(0)) + vol
        if merged.ranks is not None:
            for i, bucket in part.ranks.items():
                out = merged.ranks[i]
                for r, vol in bucket.items():
                    out[r] = out.get(r, Fraction(0)) + vol
    return prep, merged


def _sequence_argmax(
    prep: _Prep, sequences: dict[tuple[int, ...], Fraction], volume: Fraction
) -> tuple[tuple[VariableId, ...], Fraction]:
    def names_of(seq: tuple[int, ...]) -> tuple[str, ...]:
        return tuple(prep.quotient.variables[i].name for i in seq)

    best_seq = min(sequences, key=lambda s: (-sequences[s], names_of(s)))
    prob = sequences[best_seq] / volume
    return tuple(prep.quotient.variables[i] for i in best_seq), prob


def u_topk(
    cs: ConstraintSet,
    sel: SelectionPredicate | Iterable[str],
    k: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> TopKResult:
    """The most probable descending length-k sequence of selected variables."""
    _require_k(k)
    chosen = _selection_vars(cs, sel)
    prep, tally = _selected_tally(
        cs, chosen, min(k, len(chosen)), True, False, budget, threads
    )
    seq, prob = _sequence_argmax(prep, tally.sequences, tally.volume)
    entries = tuple((v, prob) for v in seq)
    return TopKResult(SEMANTICS_U, k, entries)


def u_sequence_probabilities(
    cs: ConstraintSet,
    sel: SelectionPredicate | Iterable[str],
    k: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> dict[tuple[str, ...], Fraction]:
    """Probability of every possible descending length-k sequence.

    The returned probabilities sum to 1; ``u_topk`` answers with the
    argmax of this table (ties broken toward the lexicographically
    smallest name sequence).
    """
    _require_k(k)
    chosen = _selection_vars(cs, sel)
    prep, tally = _selected_tally(
        cs, chosen, min(k, len(chosen)), True, False, budget, threads
    )
    return {
        tuple(prep.quotient.variables[i].name for i in seq): vol / tally.volume
        for seq, vol in tally.sequences.items()
    }


def _global_ranking(
    prep: _Prep, tally: _SelTally, chosen: Sequence[VariableId], k: int
) -> list[tuple[VariableId, Fraction]]:
    scored = []
    for v in chosen:
        qid = prep.class_of[v.id].id if v.id in prep.class_of else v.id
        bucket = tally.ranks[qid]
        p = sum((vol for r, vol in bucket.items() if r <= k), Fraction(0))
        scored.append((v, p / tally.volume))
    scored.sort(key=lambda pair: (-pair[1], pair[0].name))
    return scored


def global_topk(
    cs: ConstraintSet,
    sel: SelectionPredicate | Iterable[str],
    k: int,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> TopKResult:
    """The k selected variables most likely to rank among the k highest."""
    _require_k(k)
    chosen = _selection_vars(cs, sel)
    prep, tally = _selected_tally(cs, chosen, None, False, True, budget, threads)
    scored = _global_ranking(prep, tally, chosen, k)
    return TopKResult(SEMANTICS_GLOBAL, k, tuple(scored[:k]))


# ---------------------------------------------------------------------------
# containment


def check_containment(
    cs: ConstraintSet,
    sel: SelectionPredicate | Iterable[str],
    semantics: str,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ContainmentReport:
    """Test that the k-answer is a strict prefix of the (k+1)-answer for
    every k up to |selection| - 1."""
    chosen = _selection_vars(cs, sel)
    m = len(chosen)
    if m < 2:
        return ContainmentReport(semantics, True, None, (), ())
    if semantics == SEMANTICS_LOCAL:
        full = local_topk(cs, chosen, m, budget, threads)
        answers = [full.names()[:k] for k in range(1, m + 1)]
    elif semantics == SEMANTICS_U:
        prep, tally = _selected_tally(cs, chosen, None, True, False, budget, threads)
        answers = []
        for k in range(1, m + 1):
            grouped: dict[tuple[int, ...], Fraction] = {}
            for seq, vol in tally.sequences.items():
                head = seq[:k]
                grouped[head] = grouped.get(head, Fraction(0)) + vol
            seq_vars, _ = _sequence_argmax(prep, grouped, tally.volume)
            answers.append(tuple(v.name for v in seq_vars))
    elif semantics == SEMANTICS_GLOBAL:
        prep, tally = _selected_tally(cs, chosen, None, False, True, budget, threads)
        answers = [
            tuple(v.name for v, _ in _global_ranking(prep, tally, chosen, k)[:k])
            for k in range(1, m + 1)
        ]
    else:
        raise MalformedInputError(
            f"unknown semantics {semantics!r}; expected one of "
            f"{SEMANTICS_LOCAL!r}, {SEMANTICS_U!r}, {SEMANTICS_GLOBAL!r}"
        )
    for k in range(1, m):
        if answers[k][: k] != answers[k - 1]:
            return ContainmentReport(
                semantics, False, k, answers[k - 1], answers[k]
            )
    return ContainmentReport(semantics, True, None, answers[m - 2], answers[m - 1])

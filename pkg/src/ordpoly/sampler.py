"""Hit-and-run sampling and Monte-Carlo estimation.

For constraint sets whose linear-extension count defeats the exact
engine, expected values are estimated by sampling the admissible
polytope almost uniformly: from an interior point, each step picks a
random direction inside the unknown-coordinate subspace, intersects the
line with every order constraint and box bound to get the feasible
chord, and jumps to a uniform point on that chord.  Averaging
N = ceil(2 ln(2/delta) / epsilon^2) (near-)independent samples gives an
estimate within epsilon of the true expected value with probability at
least 1 - delta — up to the walk's mixing quality, which burn-in and
thinning control.

Ties collapse before sampling (tied variables share one coordinate) and
pinned variables are constants, so the walk runs in the genuinely free
dimensions only.  All sampling is in 64-bit floats; sampled streams are
deterministic per seed, and parallel chains derive their seeds as
seed + chain index, merging estimates by sample-count-weighted average.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from ._kernels import CHORD_EPS, STALLED, stepper
from .errors import MalformedInputError, SamplerError
from .model import ConstraintSet, VariableId, _bits, close_under_implication, collapse_ties
from .topk import SelectionPredicate

__all__ = [
    "SamplerConfig",
    "SamplePoint",
    "EstimateResult",
    "interior_point",
    "hit_and_run_sample",
    "estimate_expected_value",
    "estimate_topk",
    "rejection_sample_mean",
]

POINT_TOLERANCE = 1e-12
_CHUNK_ROWS = 32768
_RETRY_ROW_PAD = 128


@dataclass(frozen=True)
class SamplerConfig:
    """Accuracy targets and walk parameters.

    ``burn_in`` and ``thinning`` default (when None) to 1000 * dimension
    and dimension, respectively, once the dimension is known.
    """

    epsilon: float = 0.05
    delta: float = 0.05
    burn_in: int | None = None
    thinning: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.epsilon < 1):
            raise MalformedInputError("epsilon must be strictly between 0 and 1")
        if not (0 < self.delta < 1):
            raise MalformedInputError("delta must be strictly between 0 and 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise MalformedInputError("burn_in must be >= 0")
        if self.thinning is not None and self.thinning < 1:
            raise MalformedInputError("thinning must be >= 1")

    def sample_count(self) -> int:
        """N = ceil(2 ln(2/delta) / epsilon^2), the Hoeffding sample size."""
        return math.ceil(2 * math.log(2 / self.delta) / self.epsilon**2)

    def resolved(self, dimension: int) -> tuple[int, int]:
        burn_in = 1000 * dimension if self.burn_in is None else self.burn_in
        thinning = max(1, dimension) if self.thinning is None else self.thinning
        return burn_in, thinning


@dataclass(frozen=True)
class SamplePoint:
    """One feasible world: a float value per visible variable."""

    values: Mapping[VariableId, float]

    def value_of(self, name: str) -> float:
        for v, val in self.values.items():
            if v.name == name:
                return val
        raise MalformedInputError(f"unknown variable: {name!r}")

    def as_dict(self) -> dict[str, float]:
        return {v.name: val for v, val in self.values.items()}


@dataclass(frozen=True)
class EstimateResult:
    """A Monte-Carlo estimate and the number of samples behind it."""

    value: float
    samples: int


class _Walk:
    """Quotient geometry shared by every sampler entry point."""

    def __init__(self, cs: ConstraintSet):
        closed = close_under_implication(cs)
        tq = collapse_ties(closed)
        q = tq.quotient
        self.quotient = q
        self.class_of = tq.class_of
        self.visible = closed.visible()
        self.unknown_ids = [v.id for v in q.variables if v.id not in q.exact_values]
        self.column = {qid: c for c, qid in enumerate(self.unknown_ids)}
        self.dimension = len(self.unknown_ids)
        values = q.exact_values
        succ = q._succ
        pred = q._preds()
        self.box_lo = np.empty(self.dimension)
        self.box_hi = np.empty(self.dimension)
        for c, qid in enumerate(self.unknown_ids):
            lows = [values[e] for e in _bits(pred[qid]) if e in values]
            highs = [values[e] for e in _bits(succ[qid]) if e in values]
            self.box_lo[c] = float(max(lows))
            self.box_hi[c] = float(min(highs))
        pairs = sorted(
            (self.column[a], self.column[b])
            for a, b in q._base_edges
            if a in self.column and b in self.column and not _implied(q, a, b)
        )
        self.pair_a = np.array([a for a, _ in pairs], dtype=np.int64)
        self.pair_b = np.array([b for _, b in pairs], dtype=np.int64)

    def interior(self) -> np.ndarray:
        """Strictly feasible start: topological midpoint assignment."""
        q = self.quotient
        values = q.exact_values
        succ = q._succ
        pred = q._preds()
        order = sorted(self.unknown_ids, key=lambda i: (pred[i].bit_count(), i))
        x = np.empty(self.dimension)
        assigned: dict[int, float] = {}

        def sweep() -> float:
            slack = math.inf
            for qid in order:
                lo = max(
                    (
                        assigned[e] if e in assigned else float(values[e])
                        for e in _bits(pred[qid])
                        if e in values or e in assigned
                    ),
                    default=0.0,
                )
                hi = min(
                    (
                        assigned[e] if e in assigned else float(values[e])
                        for e in _bits(succ[qid])
                        if e in values or e in assigned
                    ),
                    default=1.0,
                )
                assigned[qid] = (lo + hi) / 2
                slack = min(slack, hi - lo)
            return slack

        if sweep() < 1e-9:
            sweep()
        for c, qid in enumerate(self.unknown_ids):
            x[c] = assigned[qid]
        return x

    def point_from(self, coords: Sequence[float] | None) -> SamplePoint:
        """Expand quotient coordinates to every visible source variable
        (tied variables share their class's coordinate)."""
        q = self.quotient
        out: dict[VariableId, float] = {}
        for v in self.visible:
            cls = self.class_of[v.id]
            if cls.id in q.exact_values:
                out[v] = float(q.exact_values[cls.id])
            else:
                out[v] = float(coords[self.column[cls.id]])
        return SamplePoint(MappingProxyType(out))


def _implied(q: ConstraintSet, a: int, b: int) -> bool:
    """True when base edge a<=b is implied by a longer path, so the chord
    computation can skip it.  Only cover edges are kept."""
    return bool(q._succ[a] & q._preds()[b])


def interior_point(cs: ConstraintSet) -> SamplePoint:
    """A strictly feasible start point (the unique point when pinned flat)."""
    walk = _Walk(cs)
    if walk.dimension == 0:
        return walk.point_from(None)
    return walk.point_from(walk.interior())


def _raw_samples(walk: _Walk, cfg: SamplerConfig, count: int, seed: int) -> np.ndarray:
    """``count`` thinned post-burn-in points as a (count, dimension) array."""
    d = walk.dimension
    burn_in, thinning = cfg.resolved(d)
    total_steps = burn_in + count * thinning
    rng = np.random.default_rng(seed)
    x = walk.interior()
    out = np.empty((count, d))
    kernel = stepper()
    step = kept = retries = 0
    while step < total_steps:
        rows = min(_CHUNK_ROWS, (total_steps - step) + _RETRY_ROW_PAD)
        dirs = rng.standard_normal((rows, d))
        unifs = rng.random(rows)
        _, step, kept, retries, status = kernel(
            x, dirs, unifs, walk.pair_a, walk.pair_b,
            walk.box_lo, walk.box_hi,
            total_steps, burn_in, thinning, out, step, kept, retries,
        )
        if status == STALLED:
            raise SamplerError(
                f"no feasible chord after {retries} direction retries "
                f"(chord tolerance {CHORD_EPS})"
            )
    assert kept == count, "stepper must emit exactly the requested points"
    return out


def hit_and_run_sample(
    cs: ConstraintSet, cfg: SamplerConfig, count: int
) -> Iterator[SamplePoint]:
    """Yield ``count`` almost-uniform feasible points."""
    if count < 0:
        raise MalformedInputError("count must be >= 0")
    walk = _Walk(cs)
    if walk.dimension == 0:
        unique = walk.point_from(None)
        for _ in range(count):
            yield unique
        return
    check = _point_checker(cs)
    coords = _raw_samples(walk, cfg, count, cfg.seed)
    for row in coords:
        point = walk.point_from(row)
        check(point)
        yield point


def _point_checker(cs: ConstraintSet):
    """Validator enforcing the emission tolerance on every constraint."""
    _, edges, exact = cs.user_view()

    def check(point: SamplePoint) -> None:
        vals = point.as_dict()
        for name, val in vals.items():
            if not (-POINT_TOLERANCE <= val <= 1 + POINT_TOLERANCE):
                raise SamplerError(f"sample left the unit box at {name}")
        for a, b in edges:
            if vals[a] > vals[b] + POINT_TOLERANCE:
                raise SamplerError(f"sample violates {a} <= {b}")
        for name, pin in exact.items():
            if abs(vals[name] - float(pin)) > POINT_TOLERANCE:
                raise SamplerError(f"sample moved the pinned variable {name}")

    return check


def _chain_means(
    walk: _Walk, cfg: SamplerConfig, total: int, chains: int
) -> tuple[np.ndarray, int]:
    """Column means over ``total`` samples split across chains."""
    chains = max(1, min(chains, total))
    counts = [total // chains + (1 if c < total % chains else 0) for c in range(chains)]

    def run(c: int) -> np.ndarray:
        return _raw_samples(walk, cfg, counts[c], cfg.seed + c)

    if chains == 1:
        sums = run(0).sum(axis=0)
    else:
        with ThreadPoolExecutor(max_workers=chains) as pool:
            blocks = list(pool.map(run, range(chains)))
        sums = np.sum([b.sum(axis=0) for b in blocks], axis=0)
    return sums / total, total


def estimate_expected_value(
    cs: ConstraintSet, x, cfg: SamplerConfig | None = None, chains: int = 1
) -> EstimateResult:
    """Monte-Carlo estimate of E[x] from N Hoeffding-sized samples."""
    cfg = cfg or SamplerConfig()
    walk = _Walk(cs)
    cls = walk.class_of[cs.resolve(x).id]
    if cls.id in walk.quotient.exact_values:
        return EstimateResult(float(walk.quotient.exact_values[cls.id]), 0)
    means, used = _chain_means(walk, cfg, cfg.sample_count(), chains)
    return EstimateResult(float(means[walk.column[cls.id]]), used)


def estimate_topk(
    cs: ConstraintSet,
    selection: SelectionPredicate | Iterable[str],
    k: int,
    cfg: SamplerConfig | None = None,
    chains: int = 1,
) -> list[tuple[VariableId, float]]:
    """Sampled analogue of local top-k: one shared stream estimates all
    selected unknowns, exact values join as constants, sort, truncate."""
    if k < 1:
        raise MalformedInputError(f"k must be a positive integer, got {k!r}")
    if isinstance(selection, SelectionPredicate):
        names = [v.name for v in selection.selected]
    else:
        names = list(selection)
    if not names:
        return []
    cfg = cfg or SamplerConfig()
    walk = _Walk(cs)
    chosen = sorted((cs.resolve(n) for n in names), key=lambda v: v.name)
    values: dict[VariableId, float] = {}
    needs_sampling = False
    for v in chosen:
        cls = walk.class_of[v.id]
        if cls.id in walk.quotient.exact_values:
            values[v] = float(walk.quotient.exact_values[cls.id])
        else:
            needs_sampling = True
    if needs_sampling:
        means, _ = _chain_means(walk, cfg, cfg.sample_count(), chains)
        for v in chosen:
            cls = walk.class_of[v.id]
            if cls.id not in walk.quotient.exact_values:
                values[v] = float(means[walk.column[cls.id]])
    ranked = sorted(chosen, key=lambda v: (-values[v], v.name))
    return [(v, values[v]) for v in ranked[:k]]


def rejection_sample_mean(
    cs: ConstraintSet,
    x,
    accepted: int,
    seed: int = 0,
    max_proposals: int | None = None,
) -> tuple[float, float, float]:
    """Naive oracle: draw uniform cube points until ``accepted`` of them
    satisfy the constraints, then average ``x`` over the accepted points.

    Returns (mean, acceptance rate, standard error of the mean).  Only
    usable when the polytope is a decent fraction of the cube;
    ``max_proposals`` (default ``4096 * accepted``) caps the work, and a
    too-thin polytope raises ``SamplerError`` instead of spinning.
    """
    if accepted <= 0:
        raise MalformedInputError("accepted sample count must be positive")
    walk = _Walk(cs)
    vid = cs.resolve(x)
    cls = walk.class_of[vid.id]
    if cls.id in walk.quotient.exact_values:
        return float(walk.quotient.exact_values[cls.id]), 1.0, 0.0
    col = walk.column[cls.id]
    rng = np.random.default_rng(seed)
    d = walk.dimension
    cap = 4096 * accepted if max_proposals is None else max_proposals
    got = 0
    total_drawn = 0
    acc_sum = 0.0
    acc_sq = 0.0
    batch = 65536
    while got < accepted:
        take = min(batch, cap - total_drawn)
        if take <= 0:
            raise SamplerError(
                f"rejection sampler found {got} feasible points in "
                f"{total_drawn} proposals; the polytope is too thin"
            )
        pts = rng.random((take, d))
        ok = np.ones(take, dtype=bool)
        ok &= np.all(pts >= walk.box_lo, axis=1) & np.all(pts <= walk.box_hi, axis=1)
        if walk.pair_a.shape[0]:
            ok &= np.all(pts[:, walk.pair_a] <= pts[:, walk.pair_b], axis=1)
        vals = pts[ok, col]
        got += vals.size
        acc_sum += float(vals.sum())
        acc_sq += float(np.square(vals).sum())
        total_drawn += take
    mean = acc_sum / got
    variance = max(acc_sq / got - mean * mean, 0.0) * got / (got - 1) if got > 1 else 0.0
    return mean, got / total_drawn, math.sqrt(variance / got)

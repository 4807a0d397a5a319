"""Exact rational, polynomial, and piecewise-polynomial arithmetic.

Rationals are ``fractions.Fraction`` (always in lowest terms, positive
denominator); ``Rational`` is exported as an alias.  Polynomials are dense
coefficient tuples in ascending degree with no trailing zero, the zero
polynomial being the empty tuple.  A piecewise polynomial attaches one
polynomial to each interval between consecutive breakpoints and is zero
outside the covered span; all its arithmetic is exact.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence, Union

Rational = Fraction

RationalLike = Union[Fraction, int, float, str]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``value`` into an exact rational.

    Strings may be "p/q" or decimal text; decimals convert exactly
    ("0.45" -> 9/20).  Floats go through their shortest decimal repr, so a
    literal that survived JSON parsing round-trips exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical "p/q" text (integers render without the denominator)."""
    return str(value)


class NonNormalizedError(ValueError):
    """A density whose total mass is not exactly 1.  Carries the mass."""

    def __init__(self, mass: Fraction):
        super().__init__(f"density has total mass {mass}, expected 1")
        self.mass = mass


def _strip(coeffs: Iterable[Fraction]) -> tuple[Fraction, ...]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class Polynomial:
    """Dense univariate polynomial with exact rational coefficients."""

    coeffs: tuple[Fraction, ...] = ()

    @staticmethod
    def of(coeffs: Iterable[RationalLike]) -> "Polynomial":
        return Polynomial(_strip(parse_rational(c) for c in coeffs))

    @staticmethod
    def constant(c: RationalLike) -> "Polynomial":
        return Polynomial.of([c])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, t: RationalLike) -> Fraction:
        t = parse_rational(t)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(_strip(out))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | RationalLike") -> "Polynomial":
        if not isinstance(other, Polynomial):
            k = parse_rational(other)
            if k == 0:
                return Polynomial()
            return Polynomial(tuple(c * k for c in self.coeffs))
        if self.is_zero or other.is_zero:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(_strip(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self) -> "Polynomial":
        return Polynomial(
            _strip(i * c for i, c in enumerate(self.coeffs) if i >= 1)
        )

    def antideriv(self) -> "Polynomial":
        """Antiderivative with zero constant term."""
        return Polynomial(
            _strip(
                [Fraction(0)]
                + [c / (i + 1) for i, c in enumerate(self.coeffs)]
            )
        )

    def integrate(self, a: RationalLike, b: RationalLike) -> Fraction:
        a, b = parse_rational(a), parse_rational(b)
        if a > b:
            raise ValueError(f"empty integration range [{a}, {b}]")
        anti = self.antideriv()
        return anti(b) - anti(a)

    def compose_affine(self, c0: RationalLike, c1: RationalLike) -> "Polynomial":
        """The polynomial t -> p(c0 + c1*t)."""
        c0, c1 = parse_rational(c0), parse_rational(c1)
        arg = Polynomial.of([c0, c1])
        acc = Polynomial()
        for c in reversed(self.coeffs):
            acc = acc * arg + Polynomial.constant(c)
        return acc


POLY_ZERO = Polynomial()
POLY_ONE = Polynomial.constant(1)
POLY_T = Polynomial.of([0, 1])


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    """Exact product; degree adds unless an operand is zero."""
    return p * q


def poly_antideriv(p: Polynomial) -> Polynomial:
    """Antiderivative with zero constant term."""
    return p.antideriv()


def poly_integrate(p: Polynomial, a: RationalLike, b: RationalLike) -> Fraction:
    """Exact definite integral of ``p`` over [a, b]; requires a <= b."""
    return p.integrate(a, b)


def order_statistic_density(rank: int, n: int, a: Fraction, b: Fraction) -> Polynomial:
    """Density of the ``rank``-th smallest of ``n`` uniform samples on [a, b].

    With u = (t-a)/(b-a) this is the classic
    n!/((r-1)!(n-r)!) * u^(r-1) * (1-u)^(n-r) / (b-a), supported on [a, b].
    Requires 1 <= rank <= n and a < b.
    """
    if not 1 <= rank <= n:
        raise ValueError(f"rank {rank} out of range for {n} samples")
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    w = b - a
    coef = Fraction(factorial(n), factorial(rank - 1) * factorial(n - rank))
    u = Polynomial.of([-a / w, 1 / w])
    one_minus_u = Polynomial.constant(1) - u
    return (u ** (rank - 1)) * (one_minus_u ** (n - rank)) * (coef / w)


def interpolating_polynomial(
    points: Sequence[tuple[RationalLike, RationalLike]]
) -> Polynomial:
    """The unique polynomial of degree < len(points) through the points.

    Exact Lagrange interpolation; the abscissas must be pairwise distinct.
    """
    xs = [parse_rational(x) for x, _ in points]
    ys = [parse_rational(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate interpolation node")
    # Newton form: divided differences keep intermediate degrees minimal.
    coef = list(ys)
    for level in range(1, len(xs)):
        for i in range(len(xs) - 1, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level])
    poly = Polynomial()
    for i in reversed(range(len(xs))):
        poly = poly * Polynomial.of([-xs[i], 1]) + Polynomial.constant(coef[i])
    return poly


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Piecewise polynomial over [0, 1], zero outside its breakpoint span.

    ``breakpoints`` are strictly increasing rationals b0 < ... < br within
    [0, 1]; piece i is valid on [b_i, b_{i+1}].  The empty function (no
    pieces) is the zero function.
    """

    breakpoints: tuple[Fraction, ...] = ()
    pieces: tuple[Polynomial, ...] = ()

    def __post_init__(self) -> None:
        bps, pcs = self.breakpoints, self.pieces
        if bps or pcs:
            if len(bps) != len(pcs) + 1:
                raise ValueError("need exactly one more breakpoint than pieces")
            if any(b1 >= b2 for b1, b2 in zip(bps, bps[1:])):
                raise ValueError("breakpoints must be strictly increasing")
            if bps[0] < 0 or bps[-1] > 1:
                raise ValueError("breakpoints must lie within [0, 1]")

    @staticmethod
    def of(
        breakpoints: Iterable[RationalLike], pieces: Iterable[Polynomial]
    ) -> "PiecewisePolynomial":
        return PiecewisePolynomial(
            tuple(parse_rational(b) for b in breakpoints), tuple(pieces)
        )

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.pieces)

    def __call__(self, t: RationalLike) -> Fraction:
        t = parse_rational(t)
        bps = self.breakpoints
        if not bps or t < bps[0] or t > bps[-1]:
            return Fraction(0)
        i = bisect.bisect_right(bps, t) - 1
        if i == len(self.pieces):  # right endpoint
            i -= 1
        return self.pieces[i](t)

    def mass(self) -> Fraction:
        """Total integral over the covered span."""
        return sum(
            (
                p.integrate(a, b)
                for p, a, b in zip(self.pieces, self.breakpoints, self.breakpoints[1:])
            ),
            Fraction(0),
        )

    def moment(self) -> Fraction:
        """Integral of t * f(t) over the covered span."""
        return sum(
            (
                (p * POLY_T).integrate(a, b)
                for p, a, b in zip(self.pieces, self.breakpoints, self.breakpoints[1:])
            ),
            Fraction(0),
        )

    def scale(self, k: RationalLike) -> "PiecewisePolynomial":
        k = parse_rational(k)
        return PiecewisePolynomial(
            self.breakpoints, tuple(p * k for p in self.pieces)
        )

    def _refined_with(
        self, other: "PiecewisePolynomial"
    ) -> tuple[tuple[Fraction, ...], list[Polynomial], list[Polynomial]]:
        cuts = sorted(set(self.breakpoints) | set(other.breakpoints))
        mids = [(a + b) / 2 for a, b in zip(cuts, cuts[1:])]

        def piece_at(f: "PiecewisePolynomial", t: Fraction) -> Polynomial:
            if not f.breakpoints or t < f.breakpoints[0] or t > f.breakpoints[-1]:
                return POLY_ZERO
            i = bisect.bisect_right(f.breakpoints, t) - 1
            return f.pieces[min(i, len(f.pieces) - 1)]

        return (
            tuple(cuts),
            [piece_at(self, m) for m in mids],
            [piece_at(other, m) for m in mids],
        )

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        if not self.pieces:
            return other
        if not other.pieces:
            return self
        cuts, mine, theirs = self._refined_with(other)
        return PiecewisePolynomial(cuts, tuple(a + b for a, b in zip(mine, theirs)))

    def __mul__(self, other: "PiecewisePolynomial | Polynomial | RationalLike"):
        if isinstance(other, PiecewisePolynomial):
            if not self.pieces or not other.pieces:
                return PiecewisePolynomial()
            cuts, mine, theirs = self._refined_with(other)
            return PiecewisePolynomial(
                cuts, tuple(a * b for a, b in zip(mine, theirs))
            )
        if isinstance(other, Polynomial):
            return PiecewisePolynomial(
                self.breakpoints, tuple(p * other for p in self.pieces)
            )
        return self.scale(other)

    __rmul__ = __mul__

    def canonical(self) -> "PiecewisePolynomial":
        """Merge adjacent equal pieces and trim zero pieces at both ends.

        Canonical forms compare structurally, which is how cross-engine
        equality of marginal densities is tested.
        """
        bps = list(self.breakpoints)
        pcs = list(self.pieces)
        while pcs and pcs[0].is_zero:
            pcs.pop(0)
            bps.pop(0)
        while pcs and pcs[-1].is_zero:
            pcs.pop()
            bps.pop()
        if not pcs:
            return PiecewisePolynomial()
        out_b = [bps[0]]
        out_p: list[Polynomial] = []
        for b, p in zip(bps[1:], pcs):
            if out_p and out_p[-1] == p:
                out_b[-1] = b
            else:
                out_p.append(p)
                out_b.append(b)
        return PiecewisePolynomial(tuple(out_b), tuple(out_p))


def pw_expectation(f: PiecewisePolynomial) -> Fraction:
    """Expected value of the density ``f``; rejects non-normalized input."""
    mass = f.mass()
    if mass != 1:
        raise NonNormalizedError(mass)
    return f.moment()

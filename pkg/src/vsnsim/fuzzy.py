"""Ordered trapezoidal fuzzy numbers.

A fuzzy number is a quadruple ``(q1, q2, q3, q4)``. Arithmetic is applied
component by component and never reorders the result, so subtraction or
``min`` compositions can produce *improper* quadruples; call
:func:`normalize` before measuring or comparing them.

Comparisons treat a non-crisp number as a random variable whose density is
its membership function scaled to unit area, and a crisp number as a point
mass.
"""

from __future__ import annotations

import math
import operator
from typing import Callable, Iterator, Sequence

__all__ = [
    "FuzzyNumber",
    "crisp",
    "apply_binary",
    "fmin",
    "fmax",
    "normalize",
    "uncertainty",
    "is_crisp",
    "cdf",
    "density",
    "prob_less",
    "prob_greater",
    "prob_equal",
    "prob_geq",
    "fuzzy_argmax",
]


class FuzzyNumber:
    """Immutable 4-tuple with component-wise arithmetic.

    Plain numbers mixed into arithmetic are lifted to crisp quadruples.
    """

    __slots__ = ("q1", "q2", "q3", "q4")

    def __init__(self, q1, q2, q3, q4):
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "q2", q2)
        object.__setattr__(self, "q3", q3)
        object.__setattr__(self, "q4", q4)

    def __setattr__(self, name, value):
        raise AttributeError("FuzzyNumber is immutable")

    def __iter__(self) -> Iterator[float]:
        yield self.q1
        yield self.q2
        yield self.q3
        yield self.q4

    def __getitem__(self, k):
        return (self.q1, self.q2, self.q3, self.q4)[k]

    def __len__(self):
        return 4

    def astuple(self) -> tuple:
        return (self.q1, self.q2, self.q3, self.q4)

    def __eq__(self, other):
        if isinstance(other, FuzzyNumber):
            return self.astuple() == other.astuple()
        if isinstance(other, tuple):
            return self.astuple() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.astuple())

    def __repr__(self):
        return f"FuzzyNumber({self.q1!r}, {self.q2!r}, {self.q3!r}, {self.q4!r})"

    def __add__(self, other):
        return apply_binary(self, other, operator.add)

    __radd__ = __add__

    def __sub__(self, other):
        return apply_binary(self, other, operator.sub)

    def __rsub__(self, other):
        return apply_binary(other, self, operator.sub)

    def __mul__(self, other):
        return apply_binary(self, other, operator.mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return apply_binary(self, other, operator.truediv)

    def __rtruediv__(self, other):
        return apply_binary(other, self, operator.truediv)

    def __neg__(self):
        return FuzzyNumber(-self.q1, -self.q2, -self.q3, -self.q4)

    @property
    def is_proper(self) -> bool:
        return self.q1 <= self.q2 <= self.q3 <= self.q4

    @property
    def is_crisp(self) -> bool:
        return self.q1 == self.q2 == self.q3 == self.q4


def crisp(x) -> FuzzyNumber:
    return FuzzyNumber(x, x, x, x)


def _lift(x) -> FuzzyNumber:
    if isinstance(x, FuzzyNumber):
        return x
    if isinstance(x, (tuple, list)):
        if len(x) != 4:
            raise ValueError(f"expected a 4-tuple, got {len(x)} values")
        return FuzzyNumber(*x)
    return FuzzyNumber(x, x, x, x)


def apply_binary(a, b, op: Callable) -> FuzzyNumber:
    """Apply ``op`` to each pair of components; no reordering is done.

    Any error raised by ``op`` (e.g. ``ZeroDivisionError``) propagates.
    """
    a = _lift(a)
    b = _lift(b)
    return FuzzyNumber(op(a.q1, b.q1), op(a.q2, b.q2), op(a.q3, b.q3), op(a.q4, b.q4))


def fmin(a, b) -> FuzzyNumber:
    return apply_binary(a, b, min)


def fmax(a, b) -> FuzzyNumber:
    return apply_binary(a, b, max)


def normalize(a) -> FuzzyNumber:
    """Sort the components ascending."""
    a = _lift(a)
    if a.q1 <= a.q2 <= a.q3 <= a.q4:
        return a
    return FuzzyNumber(*sorted(a.astuple()))


def uncertainty(a) -> float:
    """Area under the membership function of a proper quadruple."""
    a = _lift(a)
    return 0.5 * abs(a.q1 - a.q2) + abs(a.q2 - a.q3) + 0.5 * abs(a.q3 - a.q4)


def is_crisp(a) -> bool:
    a = _lift(a)
    return a.q1 == a.q2 == a.q3 == a.q4


# --- probabilistic comparison -------------------------------------------------

def density(a, x: float) -> float:
    """Unit-area membership density of a proper, non-crisp number."""
    q1, q2, q3, q4 = _lift(a).astuple()
    area = 0.5 * (q2 - q1) + (q3 - q2) + 0.5 * (q4 - q3)
    if area <= 0:
        raise ValueError("density undefined for a crisp number")
    if x < q1 or x > q4:
        return 0.0
    if x < q2:
        return (x - q1) / (q2 - q1) / area
    if x <= q3:
        return 1.0 / area
    return (q4 - x) / (q4 - q3) / area


def cdf(a, x: float) -> float:
    """P(A <= x) for a proper number; crisp numbers are point masses."""
    q1, q2, q3, q4 = _lift(a).astuple()
    if x >= q4:
        return 1.0
    if x < q1:
        return 0.0
    area = 0.5 * (q2 - q1) + (q3 - q2) + 0.5 * (q4 - q3)
    if x < q2:
        return (x - q1) ** 2 / (2.0 * (q2 - q1)) / area
    if x <= q3:
        return (0.5 * (q2 - q1) + (x - q2)) / area
    return 1.0 - (q4 - x) ** 2 / (2.0 * (q4 - q3)) / area


# 3-point Gauss-Legendre on [0, 1]; exact for the cubic integrand below.
_GL_NODES = (0.5 - 0.5 * math.sqrt(0.6), 0.5, 0.5 + 0.5 * math.sqrt(0.6))
_GL_WEIGHTS = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


def _integrate_cdf_against_density(a: FuzzyNumber, b: FuzzyNumber) -> float:
    # P(A < B) = integral of F_A(x) f_B(x) over the support of B. Both factors
    # are polynomial between the merged breakpoints.
    lo, hi = b.q1, b.q4
    knots = sorted({lo, hi, b.q2, b.q3} | {q for q in a.astuple() if lo < q < hi})
    total = 0.0
    for x0, x1 in zip(knots, knots[1:]):
        width = x1 - x0
        if width <= 0:
            continue
        acc = 0.0
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            x = x0 + node * width
            acc += weight * cdf(a, x) * density(b, x)
        total += acc * width
    return min(max(total, 0.0), 1.0)


def prob_less(a, b) -> float:
    """P(A < B). Operands must be proper."""
    a = _lift(a)
    b = _lift(b)
    a_crisp = a.is_crisp
    b_crisp = b.is_crisp
    if a_crisp and b_crisp:
        return 1.0 if a.q1 < b.q1 else 0.0
    if a.q4 <= b.q1:
        return 1.0
    if b.q4 <= a.q1:
        return 0.0
    if a_crisp:
        # P(B > c) with B continuous
        return 1.0 - cdf(b, a.q1)
    if b_crisp:
        return cdf(a, b.q1)
    return _integrate_cdf_against_density(a, b)


def prob_greater(a, b) -> float:
    return prob_less(b, a)


def prob_equal(a, b) -> float:
    a = _lift(a)
    b = _lift(b)
    if a.is_crisp and b.is_crisp and a.q1 == b.q1:
        return 1.0
    return 0.0


def prob_geq(a, b) -> float:
    """P(A >= B) = 1 - P(A < B)."""
    return 1.0 - prob_less(a, b)


def fuzzy_argmax(values: Sequence) -> tuple[int, float]:
    """Index whose worst pairwise P(>=) is largest, with that probability.

    Ties go to the lowest index.
    """
    if not values:
        raise ValueError("fuzzy_argmax of an empty sequence")
    values = [_lift(v) for v in values]
    best_index, best_conf = 0, -1.0
    for i, vi in enumerate(values):
        conf = 1.0
        for j, vj in enumerate(values):
            if i != j:
                conf = min(conf, prob_geq(vi, vj))
        if conf > best_conf + 1e-12:
            best_index, best_conf = i, conf
    return best_index, best_conf

"""Digit-restricted Waring counts.

Representation counts R(n) of integers as ordered sums of s k-th powers of
ellipsephic members, the represented-integer count N up to a bound, and the
exact Cauchy-Schwarz lower bound N >= (sum R)^2 / (sum R^2).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .digits import DigitSet, iter_members
from .errors import BudgetError, ValidationError
from .meanvalue import Budget, DEFAULT_BUDGET

__all__ = [
    "RepresentationTable",
    "CauchyCheck",
    "integer_root",
    "representation_table",
    "represented_count",
    "cauchy_bound_check",
]


def integer_root(n: int, k: int) -> int:
    """Exact floor of n**(1/k) for n >= 0, k >= 1."""
    if n < 0 or k < 1:
        raise ValidationError("integer_root needs n >= 0 and k >= 1")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = int(round(n ** (1.0 / k)))
    while x > 0 and x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


@dataclass(frozen=True)
class RepresentationTable:
    """Sparse table n -> R(n) of ordered s-fold k-th power representations.

    ``overflow`` counts the ordered tuples whose power sum exceeded the bound,
    so counts and overflow always reconcile: sum R(n) + overflow = Y**s.
    """

    s: int
    k: int
    bound: int
    y: int
    counts: dict[int, int]
    overflow: int

    def total(self) -> int:
        return sum(self.counts.values())

    def sum_squares(self) -> int:
        return sum(v * v for v in self.counts.values())


def representation_table(
    digit_set: DigitSet,
    s: int,
    k: int,
    bound: int,
    *,
    budget: Budget = DEFAULT_BUDGET,
) -> RepresentationTable:
    """Exact R(n) for all n <= bound, by multiset enumeration of members.

    Only members with x**k <= bound can occur in a representation, so the
    member list is the ellipsephic enumeration up to the integer k-th root.
    """
    if s < 1 or k < 1:
        raise ValidationError("representation_table needs s >= 1 and k >= 1")
    if bound < 1:
        raise ValidationError("bound must be >= 1")
    members = list(iter_members(digit_set, integer_root(bound, k)))
    y = len(members)
    n_multisets = math.comb(y + s - 1, s) if y else 0
    if n_multisets > budget.max_tuples:
        raise BudgetError(
            f"{n_multisets} multisets exceed the tuple budget {budget.max_tuples}"
        )
    powers = [m**k for m in members]
    s_fact = math.factorial(s)
    counts: dict[int, int] = {}
    overflow = 0
    for combo in itertools.combinations_with_replacement(range(y), s):
        total = 0
        for idx in combo:
            total += powers[idx]
        mult = s_fact
        run = 1
        for a, b in zip(combo, combo[1:]):
            run = run + 1 if a == b else 1
            if run > 1:
                mult //= run
        if total <= bound:
            counts[total] = counts.get(total, 0) + mult
        else:
            overflow += mult
    return RepresentationTable(s, k, bound, y, counts, overflow)


def represented_count(table: RepresentationTable) -> int:
    """Number of integers up to the bound with at least one representation."""
    return len(table.counts)


@dataclass(frozen=True)
class CauchyCheck:
    lhs: int  # (sum R)^2
    rhs: int  # N * sum R^2
    holds: bool
    lower_bound: Fraction  # implied bound N >= (sum R)^2 / (sum R^2)


def cauchy_bound_check(table: RepresentationTable) -> CauchyCheck:
    """Verify (sum R)^2 <= N * sum R^2 in exact integers and report the bound."""
    total = table.total()
    squares = table.sum_squares()
    n_repr = represented_count(table)
    lhs = total * total
    rhs = n_repr * squares
    bound = Fraction(lhs, squares) if squares else Fraction(0)
    return CauchyCheck(lhs, rhs, lhs <= rhs, bound)

"""Digit-restricted ("ellipsephic") integer sets.

An ellipsephic set over an odd prime base p is the set of positive integers
whose base-p expansion only uses digits from a prescribed digit set.  This
module constructs digit sets (either explicit or truncated from an integer
source such as the squares), enumerates and tests membership, and measures
the additive representation profile of a digit source, i.e. how many ordered
t-tuples of source elements sum to each integer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import BudgetError, ValidationError

__all__ = [
    "DigitSet",
    "DigitSource",
    "Enumeration",
    "RepProfile",
    "EtStarReport",
    "parse_digit_set",
    "digit_set_text",
    "iter_members",
    "enumerate_members",
    "is_member",
    "count_members",
    "base_digits",
    "rep_profile",
    "et_star_report",
]

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for word-sized n."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def base_digits(n: int, base: int) -> list[int]:
    """Base-`base` digits of n, least significant first. base_digits(0) == []."""
    out = []
    while n:
        n, d = divmod(n, base)
        out.append(d)
    return out


@dataclass(frozen=True)
class DigitSet:
    """A prime base together with the permitted digits in [0, base).

    With ``strict`` (the default) the digit count r must satisfy
    2 <= r <= base - 1: r = 0 and {0} are trivial, r = base is the
    unrestricted classical case, and r = 1 is rejected outright.
    """

    base: int
    digits: tuple[int, ...]
    strict: bool = True

    def __post_init__(self) -> None:
        if self.base < 3 or self.base % 2 == 0 or not _is_prime(self.base):
            raise ValidationError(f"base not an odd prime: {self.base}")
        digits = tuple(sorted(self.digits))
        if len(set(digits)) != len(digits):
            raise ValidationError(f"duplicate digits: {self.digits}")
        for d in digits:
            if not 0 <= d < self.base:
                raise ValidationError(f"digit {d} out of range [0, {self.base})")
        if self.strict:
            if len(digits) == 1:
                raise ValidationError(
                    "single-digit sets are excluded in strict mode (r = 1)"
                )
            if not 2 <= len(digits) <= self.base - 1:
                raise ValidationError(
                    f"strict mode needs 2 <= #digits <= base-1, got {len(digits)}"
                )
        elif not digits:
            raise ValidationError("empty digit set")
        object.__setattr__(self, "digits", digits)

    @property
    def r(self) -> int:
        """Number of permitted digits."""
        return len(self.digits)


def parse_digit_set(text: str, strict: bool = True) -> DigitSet:
    """Parse the text form ``p=11;digits=0,1,4,9`` (no spaces)."""
    fields: dict[str, str] = {}
    for part in text.split(";"):
        if "=" not in part:
            raise ValidationError(f"malformed digit-set field: {part!r}")
        key, _, value = part.partition("=")
        if key in fields:
            raise ValidationError(f"repeated digit-set field: {key!r}")
        fields[key] = value
    if set(fields) != {"p", "digits"}:
        raise ValidationError(f"digit-set text needs exactly p and digits: {text!r}")
    try:
        base = int(fields["p"])
        digits = tuple(int(d) for d in fields["digits"].split(","))
    except ValueError as exc:
        raise ValidationError(f"non-integer in digit-set text: {text!r}") from exc
    return DigitSet(base, digits, strict)


def digit_set_text(ds: DigitSet) -> str:
    """Canonical text form; round-trips through parse_digit_set."""
    return f"p={ds.base};digits={','.join(str(d) for d in ds.digits)}"


@dataclass(frozen=True)
class DigitSource:
    """An increasing integer sequence used to derive digit sets.

    Kinds: ``explicit`` (a finite list), ``squares``, and ``powers`` (k-th
    powers for a fixed exponent).  Generated sequences start at 0 or 1.
    """

    kind: str
    values: tuple[int, ...] = ()
    exponent: int = 0

    def __post_init__(self) -> None:
        if self.kind == "explicit":
            vals = self.values
            if not vals:
                raise ValidationError("explicit source needs at least one value")
            if vals[0] not in (0, 1):
                raise ValidationError("source must start at 0 or 1")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValidationError("source values must be strictly increasing")
        elif self.kind == "squares":
            pass
        elif self.kind == "powers":
            if self.exponent < 1:
                raise ValidationError("powers source needs exponent >= 1")
        else:
            raise ValidationError(f"unknown source kind: {self.kind!r}")

    @classmethod
    def explicit(cls, values) -> "DigitSource":
        return cls("explicit", tuple(values))

    @classmethod
    def squares(cls) -> "DigitSource":
        return cls("squares")

    @classmethod
    def powers(cls, exponent: int) -> "DigitSource":
        return cls("powers", exponent=exponent)

    def up_to(self, bound: int) -> list[int]:
        """All source values <= bound, increasing."""
        if bound < 0:
            return []
        if self.kind == "explicit":
            return [v for v in self.values if v <= bound]
        k = 2 if self.kind == "squares" else self.exponent
        out = []
        i = 0
        while i**k <= bound:
            out.append(i**k)
            i += 1
        return out

    def digit_set(self, base: int, strict: bool = True) -> DigitSet:
        """Truncate the source to [0, base) and build a DigitSet."""
        return DigitSet(base, tuple(self.up_to(base - 1)), strict)


@dataclass(frozen=True)
class Enumeration:
    """The sorted members of an ellipsephic set inside [1, bound]."""

    digit_set: DigitSet
    bound: int
    members: tuple[int, ...]

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def iter_members(digit_set: DigitSet, bound: int) -> Iterator[int]:
    """Yield the ellipsephic members of [1, bound] in increasing order.

    Digit strings are generated most-significant-first in lexicographic digit
    order, which is numeric order within each length, so the output is sorted
    without a sort pass.  Within a fixed length and leading digit the values
    increase, so generation stops early once the bound is passed.
    """
    if bound < 1:
        raise ValidationError(f"bound must be >= 1, got {bound}")
    p = digit_set.base
    digits = digit_set.digits
    leads = [d for d in digits if d != 0]
    length = 1
    pow_high = 1  # p**(length-1)
    while pow_high <= bound:
        for lead in leads:
            if lead * pow_high > bound:
                break
            for rest in itertools.product(digits, repeat=length - 1):
                value = lead
                for d in rest:
                    value = value * p + d
                if value > bound:
                    break
                yield value
        length += 1
        pow_high *= p


def enumerate_members(digit_set: DigitSet, bound: int) -> Enumeration:
    """Materialise iter_members into an Enumeration."""
    return Enumeration(digit_set, bound, tuple(iter_members(digit_set, bound)))


def is_member(digit_set: DigitSet, n: int) -> bool:
    """True iff every base-p digit of n is permitted. Requires n >= 1."""
    if n < 1:
        raise ValidationError(f"membership is defined for n >= 1, got {n}")
    p = digit_set.base
    allowed = set(digit_set.digits)
    while n:
        n, d = divmod(n, p)
        if d not in allowed:
            return False
    return True


def count_members(digit_set: DigitSet, bound: int) -> int:
    """#(ellipsephic members in [1, bound]); always <= r**(floor(log_p bound)+1)."""
    return sum(1 for _ in iter_members(digit_set, bound))


# --- Additive representation profiles -------------------------------------

@dataclass(frozen=True)
class RepProfile:
    """counts[n] = number of ordered t-tuples of source elements summing to n."""

    source: DigitSource
    t: int
    horizon: int
    counts: tuple[int, ...] = field(repr=False)

    def count(self, n: int) -> int:
        return self.counts[n]


def rep_profile(
    source: DigitSource,
    t: int,
    horizon: int,
    *,
    max_bytes: int = 1 << 28,
) -> RepProfile:
    """Exact ordered t-tuple representation counts for all 0 <= n <= horizon.

    Computed by iterated truncated convolution of the source indicator.  Counts
    use a 64-bit numpy path when the a-priori bound (#source)**t rules out
    overflow, and fall back to Python integers otherwise.
    """
    if t < 2:
        raise ValidationError(f"t must be >= 2, got {t}")
    if horizon < 0:
        raise ValidationError(f"horizon must be >= 0, got {horizon}")
    need = (horizon + 1) * 8 * 2
    if need > max_bytes:
        raise BudgetError(
            f"profile of horizon {horizon} needs ~{need} bytes > budget {max_bytes}"
        )
    elems = source.up_to(horizon)
    if len(elems) ** t < 1 << 62:
        ind = np.zeros(horizon + 1, dtype=np.int64)
        if elems:
            ind[np.asarray(elems)] = 1
        counts = ind.copy()
        for _ in range(t - 1):
            nxt = np.zeros(horizon + 1, dtype=np.int64)
            for a in elems:
                if a > horizon:
                    break
                nxt[a:] += counts[: horizon + 1 - a]
            counts = nxt
        table = tuple(int(c) for c in counts)
    else:
        # big-integer fallback; exactness over speed
        counts_l = [0] * (horizon + 1)
        for a in elems:
            counts_l[a] = 1
        for _ in range(t - 1):
            nxt_l = [0] * (horizon + 1)
            for a in elems:
                for n in range(a, horizon + 1):
                    if counts_l[n - a]:
                        nxt_l[n] += counts_l[n - a]
            counts_l = nxt_l
        table = tuple(counts_l)
    return RepProfile(source, t, horizon, table)


@dataclass(frozen=True)
class EtStarReport:
    """Growth summary of a representation profile over doubling windows.

    The slope is the least-squares fit of log(window max) against
    log(window start); a slope near zero is consistent with the few-
    representations property, but no verdict is asserted -- the property
    itself is asymptotic.
    """

    max_count: int
    max_at: int
    windows: tuple[tuple[int, int], ...]  # (window start, max count in window)
    slope: float
    intercept: float


def et_star_report(profile: RepProfile) -> EtStarReport:
    """Window maxima of a representation profile and their fitted growth."""
    if profile.horizon < 16:
        raise ValidationError("et_star_report needs horizon >= 16")
    counts = profile.counts
    max_count = max(counts)
    max_at = counts.index(max_count)
    windows = []
    start = 1
    while start <= profile.horizon:
        stop = min(2 * start, profile.horizon + 1)
        windows.append((start, max(counts[start:stop])))
        start *= 2
    pts = [(s, m) for s, m in windows if m > 0]
    if len(pts) < 2:
        raise ValidationError("fewer than two nonzero windows; nothing to fit")
    xs = np.log([float(s) for s, _ in pts])
    ys = np.log([float(m) for _, m in pts])
    design = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, ys, rcond=None)
    return EtStarReport(max_count, max_at, tuple(windows), float(slope), float(intercept))

"""Congruence mean values over residue classes of a weighted member set.

Weighted exponential sums restricted to congruence classes modulo powers of
the base prime, the discrete integral over the rational grid u/p^B (equal by
orthogonality to a congruence count, which is the default evaluation path),
single-class and two-class congruence mean values, and the finite
restriction-ratio diagnostic.

Exact arithmetic policy: counting paths carry Fraction weights end to end;
grid paths are double-precision complex and are held to 1e-9 relative
agreement with the counting paths.  Class norms are stored squared so the
rational paths never need square roots.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .digits import DigitSet, count_members
from .errors import BudgetError, InvariantError, ValidationError
from .meanvalue import Budget, DEFAULT_BUDGET, SpacedSystem, multiplicity_table

__all__ = [
    "GRID_BUDGET",
    "WeightAssignment",
    "ClassNorms",
    "GridPoint",
    "MeanValueSpec",
    "class_norms",
    "class_split",
    "restricted_exp_sum",
    "discrete_integral",
    "congruence_mean_value",
    "two_class_mean_value",
    "normalized_two_class",
    "RestrictionRatio",
    "restriction_ratio",
    "RefinementCheck",
    "class_refinement_check",
]

GRID_BUDGET = 10**6  # grid mode is refused above this many grid points


@dataclass(frozen=True)
class WeightAssignment:
    """Finitely supported weights in [0, 1] on positive integers.

    Integer and Fraction inputs run in exact rational mode; any float input
    switches the whole assignment to float mode.  Zero-weight entries are
    dropped, and the total weight must be positive.
    """

    entries: tuple[tuple[int, object], ...]
    exact: bool

    @classmethod
    def from_pairs(cls, pairs) -> "WeightAssignment":
        items = [(int(x), w) for x, w in (pairs.items() if isinstance(pairs, Mapping) else pairs)]
        exact = all(isinstance(w, (int, Fraction)) for _, w in items)
        seen = set()
        entries = []
        for x, w in sorted(items):
            if x < 1:
                raise ValidationError(f"support values must be >= 1, got {x}")
            if x in seen:
                raise ValidationError(f"repeated support value {x}")
            seen.add(x)
            wv = Fraction(w) if exact else float(w)
            if not 0 <= wv <= 1:
                raise ValidationError(f"weight for {x} outside [0, 1]: {w}")
            if wv != 0:
                entries.append((x, wv))
        if not entries:
            raise ValidationError("total weight must be positive")
        return cls(tuple(entries), exact)

    @classmethod
    def unit(cls, members: Sequence[int]) -> "WeightAssignment":
        return cls.from_pairs([(x, 1) for x in members])

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.entries)

    @property
    def rho0_sq(self):
        """Sum of squared weights (the squared normalising norm)."""
        return sum(w * w for _, w in self.entries)

    def mapping(self) -> dict[int, object]:
        return dict(self.entries)


@dataclass(frozen=True)
class ClassNorms:
    """Squared class norms rho_a(xi)^2 indexed by residue xi = x mod base**level.

    Residues are those realised by the support ("class 0" appears whenever a
    support element is divisible by base**level), so the partition identity
    sum_xi rho_a(xi)^2 = rho_0^2 holds exactly for every digit set.
    """

    base: int
    level: int
    table: dict[int, object]

    @property
    def modulus(self) -> int:
        return self.base**self.level

    def norm_sq(self, residue: int):
        return self.table.get(residue % self.modulus, 0)


def class_split(
    weights: WeightAssignment, base: int, level: int
) -> dict[int, list[tuple[int, object]]]:
    """Support entries grouped by residue class modulo base**level."""
    if level < 0:
        raise ValidationError("level must be >= 0")
    modulus = base**level
    out: dict[int, list[tuple[int, object]]] = {}
    for x, w in weights.entries:
        out.setdefault(x % modulus, []).append((x, w))
    return out


def class_norms(weights: WeightAssignment, base: int, level: int) -> ClassNorms:
    table = {
        residue: sum(w * w for _, w in part)
        for residue, part in class_split(weights, base, level).items()
    }
    return ClassNorms(base, level, table)


@dataclass(frozen=True)
class GridPoint:
    """The point alpha = u / modulus with componentwise 1 <= u_j <= modulus."""

    u: tuple[int, ...]
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValidationError("modulus must be >= 1")
        u = tuple(int(v) for v in self.u)
        for v in u:
            if not 1 <= v <= self.modulus:
                raise ValidationError(f"grid coordinate {v} outside [1, {self.modulus}]")
        object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class MeanValueSpec:
    """Parameters of a congruence mean value.

    ``modulus_level`` is the exponent B of the congruence modulus base**B;
    ``class_level`` is the exponent h of the class restriction (0 = none).
    """

    system: SpacedSystem
    weights: WeightAssignment
    s: int
    modulus_level: int
    class_level: int = 0

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValidationError("s must be >= 1")
        if self.modulus_level < 1:
            raise ValidationError("modulus level must be >= 1")
        if not 0 <= self.class_level <= self.modulus_level:
            raise ValidationError("need 0 <= class level <= modulus level")

    @property
    def base(self) -> int:
        return self.system.base

    @property
    def modulus(self) -> int:
        return self.base**self.modulus_level


def restricted_exp_sum(
    system: SpacedSystem,
    weights: WeightAssignment,
    point: GridPoint,
    level: int,
    residue: int,
) -> complex:
    """The class-restricted normalised exponential sum f_level(alpha, residue).

    Empty classes return 0 by convention.  At level 0 this is the full sum f.
    """
    if len(point.u) != system.k:
        raise ValidationError(
            f"grid point has {len(point.u)} coordinates for a k={system.k} system"
        )
    norms = class_norms(weights, system.base, level)
    rho_sq = norms.norm_sq(residue)
    if rho_sq == 0:
        return 0j
    modulus = point.modulus
    classes = class_split(weights, system.base, level)
    total = 0j
    for x, w in classes[residue % system.base**level]:
        phase = sum(point.u[j - 1] * system.phi(j, x) for j in range(1, system.k + 1))
        total += float(w) * cmath.exp(2j * cmath.pi * (phase % modulus) / modulus)
    return total / math.sqrt(float(rho_sq))


def _grid_points(modulus: int, k: int) -> np.ndarray:
    """All u in [1, modulus]^k as an (modulus**k, k) int array, in canonical order."""
    axes = [np.arange(1, modulus + 1, dtype=np.int64)] * k
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _grid_class_power_mean(
    system: SpacedSystem,
    entries: list[tuple[int, object]],
    rho_sq,
    modulus: int,
    power: int,
) -> np.ndarray:
    """|f_class(u/modulus)|**(2*power) over the full grid, as a float vector."""
    k = system.k
    pts = _grid_points(modulus, k)
    phi_mat = np.array(
        [[system.phi(j, x) % modulus for j in range(1, k + 1)] for x, _ in entries],
        dtype=np.int64,
    ).T  # shape (k, n_members)
    wvec = np.array([float(w) for _, w in entries])
    roots = np.exp(2j * np.pi * np.arange(modulus) / modulus)
    out = np.empty(len(pts))
    step = max(1, (1 << 23) // max(1, len(entries)))
    for lo in range(0, len(pts), step):
        phases = (pts[lo : lo + step] @ phi_mat) % modulus
        sums = roots[phases] @ wvec
        abs2 = sums.real**2 + sums.imag**2
        out[lo : lo + step] = abs2**power
    return out / float(rho_sq) ** power


def discrete_integral(
    spec: MeanValueSpec,
    residue: int | None = None,
    *,
    mode: str = "count",
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
):
    """Grid average of |f_h(alpha, residue)|**(2s) over alpha = u/base**B.

    With residue None the unrestricted sum f is integrated (h = 0).  The
    default "count" mode evaluates the equal-by-orthogonality congruence
    count exactly; "grid" mode averages over the p**(kB) grid points and is
    refused above GRID_BUDGET points.
    """
    system, weights = spec.system, spec.weights
    if residue is None:
        level = 0
        residue = 0
    else:
        level = spec.class_level
    split = class_split(weights, system.base, level)
    key = residue % system.base**level
    if key not in split:
        return Fraction(0) if weights.exact else 0.0
    entries = split[key]
    rho_sq = sum(w * w for _, w in entries)
    if mode == "count":
        table = multiplicity_table(
            system,
            spec.s,
            [x for x, _ in entries],
            dict(entries),
            modulus=spec.modulus,
            budget=budget,
            workers=workers,
        )
        raw = sum(v * v for v in table.values())
        return raw / rho_sq**spec.s
    if mode == "grid":
        n_points = spec.modulus**system.k
        if n_points > GRID_BUDGET:
            raise BudgetError(
                f"grid mode needs {n_points} points > {GRID_BUDGET}; use counting mode"
            )
        vals = _grid_class_power_mean(system, entries, rho_sq, spec.modulus, spec.s)
        return float(np.mean(vals))
    raise ValidationError(f"unknown mode {mode!r}")


def congruence_mean_value(
    spec: MeanValueSpec,
    *,
    mode: str = "count",
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
):
    """The class-averaged congruence mean value at the spec's class level h.

    rho_0^{-2} * sum_xi rho_h(xi)^2 * (grid average of |f_h(., xi)|^{2s}); at
    h = 0 there is a single class and this is the plain mean value over the
    full congruence system.  Exact (Fraction) in rational mode.
    """
    weights = spec.weights
    norms = class_norms(weights, spec.base, spec.class_level)
    total = Fraction(0) if weights.exact else 0.0
    for residue in sorted(norms.table):
        rho_sq = norms.table[residue]
        if rho_sq == 0:
            continue
        part = discrete_integral(spec, residue, mode=mode, budget=budget, workers=workers)
        total = total + rho_sq * part
    return total / weights.rho0_sq


def two_class_mean_value(
    spec: MeanValueSpec,
    t: int,
    r: int,
    a: int,
    b: int,
    nu: int = 0,
    xi: int | None = None,
    eta: int | None = None,
    *,
    mode: str = "count",
    budget: Budget = DEFAULT_BUDGET,
):
    """Two-class congruence mean value with block sizes R and s - R.

    R = t*r*(r+1)/2 of the s variable pairs are confined to the level-a class
    xi and the remaining s - R pairs to the level-b class eta; the two blocks'
    power sums must agree modulo base**B.  With xi and eta given the single
    pair value is returned; otherwise the rho-weighted aggregate over all
    class pairs with xi != eta mod base**nu (no exclusion when nu = 0).
    Counting mode is exact with rational weights.
    """
    system, weights, s = spec.system, spec.weights, spec.s
    if not 0 <= r <= system.k:
        raise ValidationError(f"need 0 <= r <= k, got r={r}")
    if t < 2:
        raise ValidationError("t must be >= 2")
    if nu < 0:
        raise ValidationError("nu must be >= 0")
    big_r = t * r * (r + 1) // 2
    if big_r > s:
        raise ValidationError(f"R = t*r(r+1)/2 = {big_r} exceeds s = {s}")

    split_a = class_split(weights, spec.base, a)
    split_b = class_split(weights, spec.base, b)
    norms_a = {res: sum(w * w for _, w in part) for res, part in split_a.items()}
    norms_b = {res: sum(w * w for _, w in part) for res, part in split_b.items()}

    def pair_value(res_a: int, res_b: int):
        if mode == "grid":
            n_points = spec.modulus**system.k
            if n_points > GRID_BUDGET:
                raise BudgetError(
                    f"grid mode needs {n_points} points > {GRID_BUDGET}"
                )
            va = _grid_class_power_mean(
                system, split_a[res_a], norms_a[res_a], spec.modulus, big_r
            )
            vb = _grid_class_power_mean(
                system, split_b[res_b], norms_b[res_b], spec.modulus, s - big_r
            )
            return float(np.mean(va * vb))
        table_a = multiplicity_table(
            system,
            big_r,
            [x for x, _ in split_a[res_a]],
            dict(split_a[res_a]),
            modulus=spec.modulus,
            budget=budget,
        )
        table_b = multiplicity_table(
            system,
            s - big_r,
            [x for x, _ in split_b[res_b]],
            dict(split_b[res_b]),
            modulus=spec.modulus,
            budget=budget,
        )
        combined: dict = {}
        for ka, va in table_a.items():
            for kb, vb in table_b.items():
                key = tuple((x + yv) % spec.modulus for x, yv in zip(ka, kb))
                if key in combined:
                    combined[key] = combined[key] + va * vb
                else:
                    combined[key] = va * vb
        raw = sum(v * v for v in combined.values())
        return raw / (norms_a[res_a] ** big_r * norms_b[res_b] ** (s - big_r))

    if (xi is None) != (eta is None):
        raise ValidationError("give both xi and eta or neither")
    if xi is not None:
        res_a = xi % spec.base**a
        res_b = eta % spec.base**b
        if res_a not in split_a or res_b not in split_b:
            return Fraction(0) if weights.exact else 0.0
        return pair_value(res_a, res_b)

    exclusion = spec.base**nu
    total = Fraction(0) if weights.exact else 0.0
    for res_a in sorted(norms_a):
        for res_b in sorted(norms_b):
            if nu >= 1 and (res_a - res_b) % exclusion == 0:
                continue
            total = total + norms_a[res_a] * norms_b[res_b] * pair_value(res_a, res_b)
    return total / weights.rho0_sq**2


def normalized_two_class(k_value, delta: float, r: int, k: int, u_bh, q_h: int) -> float:
    """(K / (q_h**delta * U^{B,H}))**((k-1)/(r(k-r))); undefined at k = 1."""
    if k < 2:
        raise ValidationError("normalisation exponent is undefined for k = 1")
    if not 1 <= r <= k - 1:
        raise ValidationError(f"need 1 <= r <= k-1, got r={r}")
    if delta < 0:
        raise ValidationError("delta must be >= 0")
    if u_bh <= 0:
        raise ValidationError("U^{B,H} must be positive")
    exponent = (k - 1) / (r * (k - r))
    return (float(k_value) / (q_h**delta * float(u_bh))) ** exponent


@dataclass(frozen=True)
class RestrictionRatio:
    """Finite-level cost of restricting all variables to a congruence class.

    ``ratio`` is log(U^B / U^{B,H}) / log(q^H) with q = #members in [1, base];
    ``ratio_by_classes`` renormalises by the number of populated classes at
    level H.  ``eps_hat`` is the exact slack in the ratio <= s bound implied
    by the constant-free Hoelder chain.
    """

    u_b: object
    u_bh: object
    level: int  # H
    q: int
    n_classes: int
    ratio: float
    ratio_by_classes: float | None
    eps_hat: float


def restriction_ratio(
    spec: MeanValueSpec,
    digit_set: DigitSet,
    *,
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
) -> RestrictionRatio:
    """Compute U^B and U^{B,H} at H = ceil(B/k) and their log ratio."""
    level = -(-spec.modulus_level // spec.system.k)
    u_b = congruence_mean_value(
        MeanValueSpec(spec.system, spec.weights, spec.s, spec.modulus_level, 0),
        budget=budget,
        workers=workers,
    )
    u_bh = congruence_mean_value(
        MeanValueSpec(spec.system, spec.weights, spec.s, spec.modulus_level, level),
        budget=budget,
        workers=workers,
    )
    if u_bh <= 0:
        raise ValidationError("degenerate weights: U^{B,H} is zero")
    q = count_members(digit_set, digit_set.base)
    if q < 2:
        raise ValidationError(f"q = #members in [1, base] is {q}; ratio needs q >= 2")
    n_classes = len(
        [1 for v in class_norms(spec.weights, spec.base, level).table.values() if v > 0]
    )
    log_ratio = math.log(float(u_b)) - math.log(float(u_bh))
    ratio = log_ratio / (level * math.log(q))
    ratio_classes = log_ratio / math.log(n_classes) if n_classes > 1 else None
    bound = spec.s * (
        math.log(n_classes) / (level * math.log(q)) if n_classes > 1 else 0.0
    )
    eps_hat = max(0.0, bound - spec.s)
    if ratio > spec.s + eps_hat + 1e-9:
        raise InvariantError(
            f"restriction ratio {ratio} exceeds s + eps_hat = {spec.s + eps_hat}"
        )
    return RestrictionRatio(
        u_b, u_bh, level, q, n_classes, ratio, ratio_classes, eps_hat
    )


@dataclass(frozen=True)
class RefinementCheck:
    """Sampled verification that coarse-class sums are dominated by refinements."""

    passed: bool
    worst_margin: float
    split_factor: int
    n_points: int


def class_refinement_check(
    system: SpacedSystem,
    weights: WeightAssignment,
    a: int,
    b: int,
    w: int,
    xi: int,
    modulus_level: int,
    points: Sequence[GridPoint] | None = None,
    samples: int = 100,
    rng: random.Random | None = None,
) -> RefinementCheck:
    """Check rho_a(xi)^2 |f_a|^{2w} <= C^{w(b-a)} * sum over refining classes.

    C is the largest number of populated level-(l+1) classes over a populated
    level-l class for a <= l < b, so C^(b-a) bounds how many level-b classes
    refine any level-a class.  The inequality is a finite Hoelder step and
    must hold at every point; the worst RHS/LHS margin is reported.
    """
    if a > b:
        raise ValidationError("need a <= b")
    if w < 1:
        raise ValidationError("need w >= 1")
    base = system.base
    split_factor = 1
    for level in range(a, b):
        parents = class_split(weights, base, level)
        children = class_split(weights, base, level + 1)
        per_parent: dict[int, int] = {res: 0 for res in parents}
        for res in children:
            per_parent[res % base**level] += 1
        if per_parent:
            split_factor = max(split_factor, max(per_parent.values()))

    if points is None:
        rng = rng or random.Random(0)
        modulus = base**modulus_level
        points = [
            GridPoint(tuple(rng.randint(1, modulus) for _ in range(system.k)), modulus)
            for _ in range(samples)
        ]

    norms_a = class_norms(weights, base, a)
    norms_b = class_norms(weights, base, b)
    res_a = xi % base**a
    refining = [res for res in norms_b.table if res % base**a == res_a]
    factor = float(split_factor) ** (w * (b - a))
    rho_a = float(norms_a.norm_sq(res_a))
    worst = math.inf
    passed = True
    for point in points:
        fa = restricted_exp_sum(system, weights, point, a, res_a)
        lhs = rho_a * abs(fa) ** (2 * w)
        rhs = 0.0
        for res in refining:
            fb = restricted_exp_sum(system, weights, point, b, res)
            rhs += float(norms_b.norm_sq(res)) * abs(fb) ** (2 * w)
        rhs *= factor
        if lhs > rhs * (1 + 1e-9):
            passed = False
        if lhs > 0:
            worst = min(worst, rhs / lhs)
    return RefinementCheck(passed, worst, split_factor, len(points))

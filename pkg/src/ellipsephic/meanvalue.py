"""Exact solution counting for Vinogradov-type systems over member lists.

Counts 2s-tuples (x, y) with phi_j(x_1)+...+phi_j(x_s) = phi_j(y_1)+...+phi_j(y_s)
for j = 1..k, where the variables run over a finite sorted member list (an
ellipsephic enumeration in the intended use).  Two counters are provided:

* brute_force_count -- scans every (x, y) tuple pair; the ground-truth oracle.
* mitm_count -- meet-in-the-middle: builds the multiplicity table m(v) of
  power-sum keys over one tuple side and returns sum_v m(v)^2.  The tuple side
  enumerates unordered multisets with multinomial weights, which is what makes
  larger runs feasible; brute-force equality guards its correctness.

Keys may optionally be reduced modulo a fixed modulus (congruence counting)
or capped componentwise (Waring reconciliation).
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetError, ValidationError
from .digits import _is_prime

__all__ = [
    "SpacedSystem",
    "Budget",
    "CountResult",
    "FitResult",
    "brute_force_count",
    "mitm_count",
    "multiplicity_table",
    "diagonal_count",
    "lower_bound_reference",
    "fit_exponent",
    "key_hex",
]

_LOG = logging.getLogger(__name__)

_CHUNK = 64  # leading-index block size; fixed so results never depend on worker count


@dataclass(frozen=True)
class SpacedSystem:
    """k integer polynomials phi_j with phi_j(z) = z^j modulo base**spacing.

    ``coeffs[j-1]`` holds the coefficients of phi_j in ascending order.
    ``spacing=None`` is the exact pure-power system (infinite spacing).
    ``spacing=0`` puts no constraint on the coefficients; it is used for
    single-equation counting such as phi(z) = z^k with one equation.
    """

    k: int
    base: int
    coeffs: tuple[tuple[int, ...], ...]
    spacing: int | None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.base < 3 or not _is_prime(self.base) or self.base % 2 == 0:
            raise ValidationError(f"base not an odd prime: {self.base}")
        if len(self.coeffs) != self.k:
            raise ValidationError("need one coefficient list per equation")
        coeffs = tuple(tuple(int(c) for c in row) for row in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.spacing is None:
            for j, row in enumerate(coeffs, start=1):
                if row != (0,) * j + (1,):
                    raise ValidationError(
                        "infinite spacing requires exact pure powers phi_j = z^j"
                    )
        else:
            if self.spacing < 0:
                raise ValidationError("spacing must be >= 0")
            q = self.base**self.spacing
            for j, row in enumerate(coeffs, start=1):
                for i, c in enumerate(row):
                    delta = c - 1 if i == j else c
                    if delta % q != 0:
                        raise ValidationError(
                            f"phi_{j} - z^{j} has coefficient {delta} at degree {i}, "
                            f"not divisible by {self.base}^{self.spacing}"
                        )

    @classmethod
    def pure_powers(cls, k: int, base: int) -> "SpacedSystem":
        """The Vinogradov system phi_j(z) = z^j, j = 1..k."""
        return cls(k, base, tuple((0,) * j + (1,) for j in range(1, k + 1)), None)

    @classmethod
    def single_power(cls, degree: int, base: int) -> "SpacedSystem":
        """One equation with phi(z) = z^degree (spacing 0)."""
        if degree < 1:
            raise ValidationError("degree must be >= 1")
        return cls(1, base, ((0,) * degree + (1,),), 0)

    @classmethod
    def perturbed(
        cls, base: int, spacing: int, perturbations: Sequence[Sequence[int]]
    ) -> "SpacedSystem":
        """phi_j(z) = z^j + base**spacing * psi_j(z) for the given psi coefficients."""
        if spacing < 1:
            raise ValidationError("perturbed systems need spacing >= 1")
        q = base**spacing
        rows = []
        for j, psi in enumerate(perturbations, start=1):
            width = max(j + 1, len(psi))
            row = [0] * width
            row[j] = 1
            for i, c in enumerate(psi):
                row[i] += q * int(c)
            rows.append(tuple(row))
        return cls(len(rows), base, tuple(rows), spacing)

    def phi(self, j: int, x: int) -> int:
        """Evaluate phi_j(x) exactly (Horner)."""
        value = 0
        for c in reversed(self.coeffs[j - 1]):
            value = value * x + c
        return value

    def key(self, xs: Sequence[int]) -> tuple[int, ...]:
        """Power-sum key (sum phi_1(x_i), ..., sum phi_k(x_i))."""
        return tuple(sum(self.phi(j, x) for x in xs) for j in range(1, self.k + 1))

    def phi_bound(self, x_max: int) -> int:
        """Upper bound for max_j |phi_j(x)| over 0 <= x <= x_max."""
        return max(
            sum(abs(c) * x_max**i for i, c in enumerate(row)) for row in self.coeffs
        )


@dataclass(frozen=True)
class Budget:
    """Resource limits; exceeding any of them is a refusal, never a partial result."""

    max_tuples: int = 10**9
    max_table_bytes: int = 4 << 30


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class CountResult:
    count: object  # int exactly, Fraction or float in weighted modes
    s: int
    k: int
    x_bound: int
    y: int
    method: str
    seconds: float


def _phi_columns(system: SpacedSystem, members: Sequence[int]):
    return [[system.phi(j, x) for x in members] for j in range(1, system.k + 1)]


# --- brute force oracle ----------------------------------------------------

def brute_force_count(
    system: SpacedSystem,
    s: int,
    members: Sequence[int],
    *,
    budget: Budget = DEFAULT_BUDGET,
    x_bound: int | None = None,
) -> CountResult:
    """Count solutions by comparing every x-side tuple against every y-side tuple.

    Costs Y**(2s) key comparisons and refuses to start beyond the tuple budget.
    This is the oracle the meet-in-the-middle engine is validated against.
    """
    if s < 1:
        raise ValidationError(f"s must be >= 1, got {s}")
    t0 = time.perf_counter()
    mem = sorted(set(int(m) for m in members))
    y = len(mem)
    if y and y ** (2 * s) > budget.max_tuples:
        raise BudgetError(
            f"brute force needs {y}**{2 * s} = {y ** (2 * s)} tuple comparisons "
            f"> budget {budget.max_tuples}"
        )
    bound = x_bound if x_bound is not None else (mem[-1] if mem else 0)
    if y == 0:
        return CountResult(0, s, system.k, bound, 0, "brute", time.perf_counter() - t0)

    cols = _phi_columns(system, mem)
    key_mag = s * system.phi_bound(mem[-1])
    dtype = np.int64 if key_mag < 1 << 62 else object
    tuple_keys = []
    for col in cols:
        arr = np.asarray(col, dtype=dtype)
        keys = np.zeros(1, dtype=dtype)
        for _ in range(s):
            keys = (keys[:, None] + arr[None, :]).ravel()
        tuple_keys.append(keys)

    n = len(tuple_keys[0])
    total = 0
    step = max(1, (1 << 22) // n)
    for lo in range(0, n, step):
        eq = tuple_keys[0][lo : lo + step, None] == tuple_keys[0][None, :]
        for keys in tuple_keys[1:]:
            eq &= keys[lo : lo + step, None] == keys[None, :]
        total += int(np.count_nonzero(eq))
    return CountResult(total, s, system.k, bound, y, "brute", time.perf_counter() - t0)


# --- meet-in-the-middle engine ----------------------------------------------

def _weight_mode(weights: Mapping[int, object] | None) -> str:
    if weights is None:
        return "unit"
    if all(isinstance(w, (int, Fraction)) for w in weights.values()):
        return "exact"
    return "float"


def _chunk_ranges(y: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _CHUNK, y)) for lo in range(0, y, _CHUNK)]


def _chunk_table(args) -> dict:
    """Multiplicity table over multisets whose leading index lies in [lo, hi).

    Enumerates non-decreasing index tuples; each multiset contributes its
    multinomial ordered count times the product of its member weights.
    """
    cols, wvec, s, modulus, lo, hi = args
    y = len(cols[0])
    k = len(cols)
    s_fact = math.factorial(s)
    table: dict = {}

    def emit(key, wprod, denom):
        mult = s_fact // denom
        val = mult if wvec is None else wprod * mult
        if key in table:
            table[key] = table[key] + val
        else:
            table[key] = val

    def rec(prev, depth, key, wprod, denom, run):
        if depth == s:
            emit(key, wprod, denom)
            return
        for idx in range(prev, y):
            if idx == prev:
                nrun = run + 1
                ndenom = denom * nrun
            else:
                nrun = 1
                ndenom = denom
            if modulus is None:
                nkey = tuple(key[j] + cols[j][idx] for j in range(k))
            else:
                nkey = tuple((key[j] + cols[j][idx]) % modulus for j in range(k))
            nw = wprod if wvec is None else wprod * wvec[idx]
            rec(idx, depth + 1, nkey, nw, ndenom, nrun)

    for i in range(lo, hi):
        if modulus is None:
            key0 = tuple(cols[j][i] for j in range(k))
        else:
            key0 = tuple(cols[j][i] % modulus for j in range(k))
        w0 = 1 if wvec is None else wvec[i]
        rec(i, 1, key0, w0, 1, 1)
    return table


def multiplicity_table(
    system: SpacedSystem,
    s: int,
    members: Sequence[int],
    weights: Mapping[int, object] | None = None,
    *,
    modulus: int | None = None,
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
) -> dict:
    """Map power-sum key -> (weighted) number of ordered s-tuples with that key.

    Zero-weight members are dropped.  Work is split into fixed leading-index
    blocks merged in block order, so the result is identical for any worker
    count: exactly equal in unit/rational modes and bitwise equal for floats.
    """
    if s < 0:
        raise ValidationError(f"s must be >= 0, got {s}")
    mem = sorted(set(int(m) for m in members))
    if weights is not None:
        mem = [m for m in mem if weights.get(m, 0) != 0]
    y = len(mem)
    if s == 0 or y == 0:
        return {(0,) * system.k: 1} if s == 0 else {}
    n_multisets = math.comb(y + s - 1, s)
    if n_multisets > budget.max_tuples:
        raise BudgetError(
            f"{n_multisets} multisets exceed the tuple budget {budget.max_tuples}"
        )

    cols = [tuple(col) for col in _phi_columns(system, mem)]
    mode = _weight_mode(weights)
    if mode == "unit":
        wvec = None
    elif mode == "exact":
        wvec = tuple(Fraction(weights[m]) for m in mem)
    else:
        wvec = tuple(float(weights[m]) for m in mem)

    jobs = [(cols, wvec, s, modulus, lo, hi) for lo, hi in _chunk_ranges(y)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_table, jobs))
    else:
        parts = [_chunk_table(job) for job in jobs]

    table: dict = {}
    size_check = 0
    for part in parts:
        for key, val in part.items():
            if key in table:
                table[key] = table[key] + val
            else:
                table[key] = val
                size_check += 1
                if size_check % 65536 == 0 and size_check * 150 > budget.max_table_bytes:
                    raise BudgetError("multiplicity table exceeds the memory budget")
    return table


def _fast_unit_table_k1(phi: list[int], s: int, budget: Budget) -> np.ndarray:
    """Unit-weight k=1 table as a dense int64 array indexed by key value.

    Same multiset-with-multinomials enumeration as _chunk_table, with the last
    multiset slot vectorised.  Exactness: every accumulated float is an integer
    below 2**53 because Y**s stays under the tuple budget.
    """
    y = len(phi)
    top = s * max(phi)
    if (top + 1) * 8 > budget.max_table_bytes:
        raise BudgetError("dense key table exceeds the memory budget")
    table = np.zeros(top + 1, dtype=np.float64)
    s_fact = math.factorial(s)
    arr = np.asarray(phi, dtype=np.int64)
    buf_k: list[np.ndarray] = []
    buf_w: list[np.ndarray] = []
    buf_n = 0

    def flush():
        nonlocal buf_n
        if buf_n:
            kk = np.concatenate(buf_k)
            ww = np.concatenate(buf_w)
            table[:] += np.bincount(kk, weights=ww, minlength=top + 1)
            buf_k.clear()
            buf_w.clear()
            buf_n = 0

    def rec(prev, depth, partial, denom, run):
        nonlocal buf_n
        if depth == s - 1:
            same = s_fact // (denom * (run + 1))
            buf_k.append(np.array([partial + phi[prev]], dtype=np.int64))
            buf_w.append(np.array([float(same)]))
            buf_n += 1
            if prev + 1 < y:
                rest = partial + arr[prev + 1 :]
                buf_k.append(rest)
                buf_w.append(np.full(len(rest), float(s_fact // denom)))
                buf_n += len(rest)
            if buf_n >= 1 << 20:
                flush()
            return
        for idx in range(prev, y):
            if idx == prev:
                rec(idx, depth + 1, partial + phi[idx], denom * (run + 1), run + 1)
            else:
                rec(idx, depth + 1, partial + phi[idx], denom, 1)

    for i in range(y):
        if s == 1:
            buf_k.append(np.array([phi[i]], dtype=np.int64))
            buf_w.append(np.array([1.0]))
            buf_n += 1
        else:
            rec(i, 1, phi[i], 1, 1)
    flush()
    return table.astype(np.int64)


def mitm_count(
    system: SpacedSystem,
    s: int,
    members: Sequence[int],
    weights: Mapping[int, object] | None = None,
    *,
    modulus: int | None = None,
    key_cap: int | None = None,
    budget: Budget = DEFAULT_BUDGET,
    workers: int = 1,
    x_bound: int | None = None,
) -> CountResult:
    """Meet-in-the-middle count: sum over keys v of m(v)**2.

    Equals brute_force_count exactly with unit weights, and to rational
    exactness with Fraction weights.  ``modulus`` reduces keys mod that value;
    ``key_cap`` drops keys with any component above the cap before summing.
    """
    if s < 1:
        raise ValidationError(f"s must be >= 1, got {s}")
    t0 = time.perf_counter()
    mem = sorted(set(int(m) for m in members))
    if weights is not None:
        mem = [m for m in mem if weights.get(m, 0) != 0]
    y = len(mem)
    bound = x_bound if x_bound is not None else (mem[-1] if mem else 0)
    if y == 0:
        return CountResult(0, s, system.k, bound, 0, "mitm", time.perf_counter() - t0)

    use_fast = (
        weights is None
        and system.k == 1
        and modulus is None
        and key_cap is None
        and s >= 2
    )
    if use_fast:
        phi = [system.phi(1, x) for x in mem]
        key_mag = s * max(abs(v) for v in phi)
        if min(phi) < 0 or key_mag >= 1 << 62 or y**s * math.factorial(s) >= 1 << 53:
            use_fast = False
            _LOG.info(
                "key magnitude %d exceeds the fixed-width fast path; "
                "using arbitrary-precision tables",
                key_mag,
            )
        if use_fast and math.comb(y + s - 1, s) > budget.max_tuples:
            raise BudgetError(
                f"{math.comb(y + s - 1, s)} multisets exceed the tuple budget"
            )
    if use_fast:
        dense = _fast_unit_table_k1(phi, s, budget)
        if int(dense.sum()) != y**s:
            raise ValidationError("internal: table mass mismatch")  # pragma: no cover
        if y ** (2 * s) < 1 << 62:
            total: object = int(np.dot(dense, dense))
        else:
            total = sum(int(v) ** 2 for v in dense if v)
    else:
        table = multiplicity_table(
            system, s, mem, weights, modulus=modulus, budget=budget, workers=workers
        )
        if key_cap is not None:
            items = (v for key, v in table.items() if all(c <= key_cap for c in key))
        else:
            items = iter(table.values())
        total = sum(v * v for v in items)
    return CountResult(total, s, system.k, bound, y, "mitm", time.perf_counter() - t0)


# --- reference quantities ---------------------------------------------------

def _partitions(n: int, largest: int | None = None):
    """Non-increasing integer partitions of n."""
    if n == 0:
        yield ()
        return
    top = n if largest is None else min(n, largest)
    for first in range(top, 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def diagonal_count(s: int, y: int) -> int:
    """Number of pairs (x, y) in members^s x members^s with y a permutation of x.

    Depends only on s and the member count y: sum over multisets of the squared
    multinomial, evaluated per partition shape.  Always >= y**s.
    """
    if s < 1 or y < 1:
        raise ValidationError("diagonal_count needs s >= 1 and y >= 1")
    s_fact = math.factorial(s)
    total = 0
    for shape in _partitions(s):
        parts = len(shape)
        if parts > y:
            continue
        assignments = math.perm(y, parts)
        for size in set(shape):
            assignments //= math.factorial(shape.count(size))
        ordered = s_fact
        for part in shape:
            ordered //= math.factorial(part)
        total += assignments * ordered * ordered
    return total


def lower_bound_reference(s: int, k: int, x: int, y: int) -> float:
    """Reference curve y**(2s) * x**(-k(k+1)/2); no constant is asserted."""
    if x < 1 or y < 1:
        raise ValidationError("x and y must be >= 1")
    return math.exp(2 * s * math.log(y) - k * (k + 1) / 2 * math.log(x))


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float  # root-mean-square residual of the fit


def fit_exponent(points: Sequence[tuple[int, int, object]]) -> FitResult:
    """Least-squares slope of log(count) against log(Y) for (X, Y, count) points."""
    if len(points) < 3:
        raise ValidationError("fit needs at least 3 points")
    ys = [p[1] for p in points]
    if any(b <= a for a, b in zip(ys, ys[1:])):
        raise ValidationError("Y values must be strictly increasing")
    counts = [p[2] for p in points]
    if any(c <= 0 for c in counts):
        raise ValidationError("counts must be positive to fit exponents")
    lx = np.array([math.log(v) for v in ys])
    ly = np.array([math.log(c) for c in counts])
    design = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    fitted = design @ np.array([slope, intercept])
    rms = float(np.sqrt(np.mean((ly - fitted) ** 2)))
    return FitResult(float(slope), float(intercept), rms)


def key_hex(key: tuple[int, ...]) -> str:
    """Colon-separated signed hex of the key components; exact and sortable back."""
    return ":".join(format(v, "x") if v >= 0 else "-" + format(-v, "x") for v in key)

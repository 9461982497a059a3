"""Certified exact root counting in finite-precision extension rings.

The counter reduces a polynomial to the residue field, takes simple
residue roots as certified (each lifts to exactly one root, whatever the
unseen digits are), and descends into repeated residue roots by the
substitution x -> a + pi*y followed by division by the pi-content.  A
count is reported Exact only when every branch ends in such a certified
base case, so an Exact count is valid for *every* polynomial whose
truncation matches the input.  Anything else is Inconclusive with a
reason: the precision ran out, the recursion depth budget was hit, or
the branch multiplicities refuse to decrease (the signature of a genuine
multiple root, which finite precision can never certify).

Counts are with multiplicity.  Since only simple-root base cases are
certifiable, every Exact count is in fact a count of simple roots; true
multiple roots always surface as Inconclusive.

Counting over the whole field uses the degree-n reversal: roots of P
outside the unit ball correspond to roots of the reversed polynomial
inside the maximal ideal.  This requires the constant and leading
coefficients of P to be visibly nonzero; otherwise a phantom root at
zero of the reversal (equivalently, a drop of degree) cannot be excluded
and the count is Inconclusive.

New-root tables classify roots by the unramified extension they
generate: all(d) counts roots in the degree-d field, and the counts of
roots generating exactly degree r follow by Moebius inversion over the
divisors of r.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .arith import PadicDigits
from .formulas import divisors, mobius
from .gf import (
    FqPoly,
    fp_deriv,
    fp_gcd,
    fp_normalize,
    fp_pow_mod,
    get_field,
)
from .rings import EisensteinRing, ExtensionRing, make_unramified

__all__ = [
    "CountBudget",
    "InconclusiveReason",
    "RootCountResult",
    "NewRootTable",
    "DEFAULT_BUDGET",
    "count_integral_roots",
    "count_maximal_ideal_roots",
    "count_field_roots",
    "new_counts_unramified",
    "new_count_ramified_quadratic",
    "mobius_combine",
    "unramified_count_data",
]


class InconclusiveReason(str, Enum):
    PRECISION_EXHAUSTED = "precision-exhausted"
    DEPTH_EXCEEDED = "depth-exceeded"
    NON_SEPARABLE_SUSPECT = "non-separable-suspect"


@dataclass(frozen=True)
class CountBudget:
    max_depth: int = 12
    min_remaining_digits: int = 2

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.min_remaining_digits < 1:
            raise ValueError("budget fields must be positive")


DEFAULT_BUDGET = CountBudget()


@dataclass(frozen=True)
class RootCountResult:
    """Either Exact(count) or Inconclusive(reason), with the maximal
    pi-precision spent along any branch."""

    count: int | None
    reason: InconclusiveReason | None
    digits_consumed: int = 0

    @classmethod
    def exact(cls, count: int, consumed: int = 0) -> "RootCountResult":
        return cls(count=count, reason=None, digits_consumed=consumed)

    @classmethod
    def inconclusive(
        cls, reason: InconclusiveReason, consumed: int = 0
    ) -> "RootCountResult":
        return cls(count=None, reason=reason, digits_consumed=consumed)

    @property
    def is_exact(self) -> bool:
        return self.count is not None

    def __repr__(self) -> str:
        if self.is_exact:
            return f"Exact({self.count}, spent={self.digits_consumed})"
        return f"Inconclusive({self.reason.value}, spent={self.digits_consumed})"


@dataclass
class NewRootTable:
    """Per-degree counts: all roots living in the degree-d unramified field
    and the part generating exactly degree r (Moebius inversion)."""

    model: str
    region: str  # "field" or "integral"
    all_counts: dict[int, RootCountResult]
    new_counts: dict[int, RootCountResult]


# ---------------------------------------------------------------------------
# Coefficient intake.
# ---------------------------------------------------------------------------


def _as_int_coeffs(F, precision: int | None) -> tuple[list[int], int]:
    coeffs = list(F)
    if not coeffs:
        raise ValueError("empty polynomial")
    if isinstance(coeffs[0], PadicDigits):
        k = min(c.known_digits for c in coeffs)
        return [c.value for c in coeffs], k
    if precision is None:
        raise ValueError("plain integer coefficients need precision=")
    return [int(c) for c in coeffs], precision


def _strip_content(
    ints: Sequence[int], p: int, k_eff: int
) -> tuple[list[int], int] | None:
    """Divide out the visible p-content; the root set is unchanged.

    None when every coefficient vanishes to working precision (nothing
    is certifiable about such a truncation).
    """
    q = p**k_eff
    v = None
    for c in ints:
        x = c % q
        if x == 0:
            continue
        w = 0
        while x % p == 0:
            x //= p
            w += 1
        if v is None or w < v:
            v = w
            if v == 0:
                return list(ints), k_eff
    if v is None:
        return None
    return [c // p**v for c in ints], k_eff - v


# ---------------------------------------------------------------------------
# Working-polynomial helpers (coefficients are ring elements).
# ---------------------------------------------------------------------------


def _embed(ring: ExtensionRing, int_coeffs: Sequence[int]) -> list:
    return [ring.from_int(c) for c in int_coeffs]


def _residue_poly(ring: ExtensionRing, coeffs: Sequence) -> FqPoly:
    K = ring.residue_field
    return FqPoly(K, [ring.residue(c) for c in coeffs])


def _taylor_shift(ring: ExtensionRing, coeffs: Sequence, a) -> list:
    """Coefficients of F(a + y)."""
    out = list(coeffs)
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] = ring.add(out[j], ring.mul(out[j + 1], a))
    return out


def _pi_scale(ring: ExtensionRing, coeffs: Sequence) -> list:
    """Coefficients of F(pi * y)."""
    return [ring.mul_pi_pow(c, j) if j else c for j, c in enumerate(coeffs)]


def _visible_content(ring: ExtensionRing, coeffs: Sequence, k_eff: int) -> int | None:
    best: int | None = None
    for c in coeffs:
        v = ring.visible_pi_valuation(c, k_eff)
        if v is None:
            continue
        if best is None or v < best:
            best = v
            if best == 0:
                return 0
    return best


class _Tracker:
    __slots__ = ("min_k",)

    def __init__(self, k: int):
        self.min_k = k

    def visit(self, k: int) -> None:
        if k < self.min_k:
            self.min_k = k


# ---------------------------------------------------------------------------
# The recursive engine.
# ---------------------------------------------------------------------------


def _descend(
    ring: ExtensionRing,
    coeffs: Sequence,
    k_eff: int,
    alpha,
    mult: int,
    depth: int,
    streak: int,
    budget: CountBudget,
    tracker: _Tracker,
) -> tuple[int | None, InconclusiveReason | None]:
    """Count roots of F in the disc a + pi*O (a the lift of alpha).

    A budget failure is reported as NonSeparableSuspect when the branch
    multiplicities failed to strictly decrease across the last two
    levels: that pattern is how a genuine multiple root looks, whereas
    mere precision starvation keeps making progress until digits run
    out.  The label is diagnostic; both are Inconclusive.
    """
    suspect = streak >= 2
    if depth >= budget.max_depth:
        return None, (
            InconclusiveReason.NON_SEPARABLE_SUSPECT
            if suspect
            else InconclusiveReason.DEPTH_EXCEEDED
        )
    work = coeffs
    if alpha is not None:
        work = _taylor_shift(ring, work, ring.lift_residue(alpha))
    work = _pi_scale(ring, work)
    v = _visible_content(ring, work, k_eff)
    if v is None:
        tracker.visit(0)
        return None, (
            InconclusiveReason.NON_SEPARABLE_SUSPECT
            if suspect
            else InconclusiveReason.PRECISION_EXHAUSTED
        )
    k_next = k_eff - ring.pi_pow_digit_cost(v)
    tracker.visit(k_next)
    if k_next < budget.min_remaining_digits:
        return None, (
            InconclusiveReason.NON_SEPARABLE_SUSPECT
            if suspect
            else InconclusiveReason.PRECISION_EXHAUSTED
        )
    work = [ring.div_pi_pow(c, v) for c in work] if v else list(work)
    return _count_all(ring, work, k_next, depth + 1, mult, streak, budget, tracker)


def _count_all(
    ring: ExtensionRing,
    coeffs: Sequence,
    k_eff: int,
    depth: int,
    prev_mult: int | None,
    streak: int,
    budget: CountBudget,
    tracker: _Tracker,
) -> tuple[int | None, InconclusiveReason | None]:
    """Count roots over the whole ring of integers; pi-content of coeffs
    has been divided out by the caller."""
    rbar = _residue_poly(ring, coeffs)
    if rbar.is_zero():
        # cannot happen after content division; treat defensively
        return None, InconclusiveReason.PRECISION_EXHAUSTED
    if rbar.degree == 0:
        return 0, None
    total = 0
    for alpha, m in rbar.roots():
        if m == 1:
            total += 1
            continue
        new_streak = streak + 1 if (prev_mult is not None and m >= prev_mult) else 0
        sub, reason = _descend(
            ring, coeffs, k_eff, alpha, m, depth, new_streak, budget, tracker
        )
        if sub is None:
            return None, reason
        total += sub
    return total, None


def _count_zero_branch(
    ring: ExtensionRing,
    coeffs: Sequence,
    k_eff: int,
    budget: CountBudget,
    tracker: _Tracker,
) -> tuple[int | None, InconclusiveReason | None]:
    """Count roots inside the maximal ideal (residue class of 0 only)."""
    K = ring.residue_field
    t = 0
    for c in coeffs:
        if ring.residue(c) != K.zero:
            break
        t += 1
    if t >= len(coeffs):
        return None, InconclusiveReason.PRECISION_EXHAUSTED
    if t == 0:
        return 0, None
    if t == 1:
        return 1, None
    return _descend(ring, coeffs, k_eff, None, t, 0, 0, budget, tracker)


def _prepare(
    ring: ExtensionRing,
    int_coeffs: Sequence[int],
    k_eff: int,
    budget: CountBudget,
    tracker: _Tracker,
) -> tuple[list | None, int]:
    """Embed and divide out the top-level pi-content (roots are unchanged)."""
    coeffs = _embed(ring, int_coeffs)
    v = _visible_content(ring, coeffs, k_eff)
    if v is None:
        tracker.visit(0)
        return None, 0
    if v:
        k_eff -= ring.pi_pow_digit_cost(v)
        tracker.visit(k_eff)
        if k_eff < budget.min_remaining_digits:
            return None, k_eff
        coeffs = [ring.div_pi_pow(c, v) for c in coeffs]
    return coeffs, k_eff


# ---------------------------------------------------------------------------
# Public operations.
# ---------------------------------------------------------------------------


def count_integral_roots(
    F,
    ring: ExtensionRing,
    budget: CountBudget = DEFAULT_BUDGET,
    *,
    precision: int | None = None,
) -> RootCountResult:
    """Roots of F in the ring of integers, counted with multiplicity."""
    ints, k = _as_int_coeffs(F, precision)
    k_eff = min(k, ring.k)
    tracker = _Tracker(k_eff)
    start = k_eff
    coeffs, k_eff = _prepare(ring, ints, k_eff, budget, tracker)
    if coeffs is None:
        return RootCountResult.inconclusive(
            InconclusiveReason.PRECISION_EXHAUSTED, ring.e * start
        )
    count, reason = _count_all(ring, coeffs, k_eff, 0, None, 0, budget, tracker)
    consumed = ring.e * (start - tracker.min_k)
    if count is None:
        return RootCountResult.inconclusive(reason, consumed)
    return RootCountResult.exact(count, consumed)


def count_maximal_ideal_roots(
    F,
    ring: ExtensionRing,
    budget: CountBudget = DEFAULT_BUDGET,
    *,
    precision: int | None = None,
) -> RootCountResult:
    """Roots of F with positive valuation, counted with multiplicity."""
    ints, k = _as_int_coeffs(F, precision)
    k_eff = min(k, ring.k)
    tracker = _Tracker(k_eff)
    start = k_eff
    coeffs, k_eff = _prepare(ring, ints, k_eff, budget, tracker)
    if coeffs is None:
        return RootCountResult.inconclusive(
            InconclusiveReason.PRECISION_EXHAUSTED, ring.e * start
        )
    count, reason = _count_zero_branch(ring, coeffs, k_eff, budget, tracker)
    consumed = ring.e * (start - tracker.min_k)
    if count is None:
        return RootCountResult.inconclusive(reason, consumed)
    return RootCountResult.exact(count, consumed)


def count_field_roots(
    P,
    ring: ExtensionRing,
    budget: CountBudget = DEFAULT_BUDGET,
    *,
    precision: int | None = None,
) -> RootCountResult:
    """Roots of P anywhere in the fraction field: integral roots plus, via
    the degree-n reversal, roots outside the unit ball.

    Inconclusive when the constant or leading coefficient vanishes to
    working precision: the reversal then degenerates (a root of P at 0,
    or a phantom root of the reversal at 0, cannot be separated).
    """
    ints, k = _as_int_coeffs(P, precision)
    k_eff = min(k, ring.k)
    stripped = _strip_content(ints, ring.p, k_eff)
    if stripped is None:
        return RootCountResult.inconclusive(
            InconclusiveReason.PRECISION_EXHAUSTED, ring.e * k_eff
        )
    ints, k_eff = stripped
    q = ring.p**k_eff
    if ints[0] % q == 0 or ints[-1] % q == 0:
        return RootCountResult.inconclusive(InconclusiveReason.PRECISION_EXHAUSTED, 0)
    inner = count_integral_roots(ints, ring, budget, precision=k_eff)
    outer = count_maximal_ideal_roots(ints[::-1], ring, budget, precision=k_eff)
    consumed = max(inner.digits_consumed, outer.digits_consumed)
    if not inner.is_exact:
        return RootCountResult.inconclusive(inner.reason, consumed)
    if not outer.is_exact:
        return RootCountResult.inconclusive(outer.reason, consumed)
    return RootCountResult.exact(inner.count + outer.count, consumed)


def mobius_combine(
    all_counts: dict[int, RootCountResult], r: int
) -> RootCountResult:
    """new(r) = sum_{d | r} mu(r/d) * all(d); Inconclusive inputs propagate."""
    total = 0
    consumed = 0
    for d in divisors(r):
        res = all_counts[d]
        consumed = max(consumed, res.digits_consumed)
        if not res.is_exact:
            return RootCountResult.inconclusive(res.reason, consumed)
        total += mobius(r // d) * res.count
    return RootCountResult.exact(total, consumed)


# ---------------------------------------------------------------------------
# Shared-residue fast path for per-degree tables.
# ---------------------------------------------------------------------------


def _one_root_in_extension(g: Sequence[int], p: int, d: int):
    """One root (coordinate tuple) of an irreducible g over F_p inside
    F_{p^d}; deterministic (smallest by coordinate order)."""
    K = get_field(p, d)
    lifted = FqPoly.from_int_coeffs(K, list(g))
    roots = lifted.roots()
    if not roots:
        raise AssertionError("no root although degree divides d")
    return roots[0][0]


def unramified_count_data(
    int_coeffs: Sequence[int],
    k_poly: int,
    model: str,
    r_max: int,
    p: int,
    ring_k: int,
    budget: CountBudget = DEFAULT_BUDGET,
) -> tuple[dict[int, RootCountResult], dict[int, RootCountResult] | None]:
    """all(d) tables for d = 1..r_max in one pass over the residue data.

    Returns (integral_all, field_all); field_all is None for the matrix
    model, where eigenvalues are integral and the two regions coincide.
    The residue factorization over F_p is shared across all degrees;
    conjugate residue roots of a repeated factor contribute identical
    branch counts (the construction commutes with the Galois action), so
    only one root per factor is descended into.
    """
    if model not in ("matrix", "poly"):
        raise ValueError("model must be 'matrix' or 'poly'")
    ints = [int(c) for c in int_coeffs]
    k_eff = min(k_poly, ring_k)
    n_formal = len(ints) - 1
    rings = {d: make_unramified(p, d, ring_k) for d in range(1, r_max + 1)}

    stripped = _strip_content(ints, p, k_eff)
    if stripped is None:
        res = RootCountResult.inconclusive(InconclusiveReason.PRECISION_EXHAUSTED, 0)
        blank = {d: res for d in range(1, r_max + 1)}
        return blank, (dict(blank) if model == "poly" else None)
    ints, k_eff = stripped

    fbar = fp_normalize([c % p for c in ints], p)
    assert fbar, "content was stripped"

    integral_all: dict[int, RootCountResult] = {}
    if len(fbar) == 1:
        # unit constant residue: no integral roots anywhere
        for d in range(1, r_max + 1):
            integral_all[d] = RootCountResult.exact(0, 0)
    else:
        der = fp_deriv(fbar, p)
        sqfree = bool(der) and len(fp_gcd(fbar, der, p)) == 1
        if sqfree:
            h = [0, 1]
            for d in range(1, r_max + 1):
                h = fp_pow_mod(h, p, fbar, p)
                diff = list(h)
                while len(diff) < 2:
                    diff.append(0)
                diff[1] = (diff[1] - 1) % p
                roots_d = len(fp_gcd(diff, fbar, p)) - 1
                integral_all[d] = RootCountResult.exact(max(roots_d, 0), 0)
        else:
            field_p = get_field(p, 1)
            factors = [
                ([c[0] for c in g.coeffs], m)
                for g, m in FqPoly.from_int_coeffs(field_p, fbar).factor()
            ]
            base = {d: 0 for d in range(1, r_max + 1)}
            extra = {d: 0 for d in range(1, r_max + 1)}
            spent_by_d = {d: 0 for d in range(1, r_max + 1)}
            failed: dict[int, RootCountResult] = {}
            for g, m in factors:
                dg = len(g) - 1
                if m == 1:
                    for d in range(1, r_max + 1):
                        if d % dg == 0:
                            base[d] += dg
                    continue
                for d in range(1, r_max + 1):
                    if d % dg != 0 or d in failed:
                        continue
                    ring = rings[d]
                    alpha = (
                        _one_root_in_extension(g, p, d)
                        if dg > 1
                        else ring.residue_field.from_int(-g[0] % p)
                    )
                    tracker = _Tracker(k_eff)
                    coeffs = _embed(ring, ints)
                    cnt, reason = _descend(
                        ring, coeffs, k_eff, alpha, m, 0, 0, budget, tracker
                    )
                    spent = ring.e * (k_eff - tracker.min_k)
                    if cnt is None:
                        failed[d] = RootCountResult.inconclusive(reason, spent)
                    else:
                        extra[d] += cnt * dg
                        spent_by_d[d] = max(spent_by_d[d], spent)
            for d in range(1, r_max + 1):
                integral_all[d] = failed.get(d) or RootCountResult.exact(
                    base[d] + extra[d], spent_by_d[d]
                )

    if model == "matrix":
        return integral_all, None

    # polynomial model: add the outside-unit-ball part via the reversal
    q = p**k_eff
    field_all: dict[int, RootCountResult] = {}
    if ints[0] % q == 0 or ints[-1] % q == 0:
        res = RootCountResult.inconclusive(InconclusiveReason.PRECISION_EXHAUSTED, 0)
        for d in range(1, r_max + 1):
            field_all[d] = res
        return integral_all, field_all
    t = n_formal - (len(fbar) - 1)
    rev = ints[::-1]
    for d in range(1, r_max + 1):
        inner = integral_all[d]
        if not inner.is_exact:
            field_all[d] = inner
            continue
        if t == 0:
            field_all[d] = inner
        elif t == 1:
            field_all[d] = RootCountResult.exact(
                inner.count + 1, inner.digits_consumed
            )
        else:
            outer = count_maximal_ideal_roots(
                rev, rings[d], budget, precision=k_eff
            )
            spent = max(inner.digits_consumed, outer.digits_consumed)
            if outer.is_exact:
                field_all[d] = RootCountResult.exact(inner.count + outer.count, spent)
            else:
                field_all[d] = RootCountResult.inconclusive(outer.reason, spent)
    return integral_all, field_all


def new_counts_unramified(
    F,
    model: str,
    r_max: int,
    p: int,
    k: int,
    budget: CountBudget = DEFAULT_BUDGET,
    *,
    region: str | None = None,
    precision: int | None = None,
) -> NewRootTable:
    """Per-degree all/new tables over the unramified tower up to r_max.

    ``region`` selects where roots are counted for the polynomial model:
    "field" (default; anywhere in the degree-d field) or "integral"
    (ring of integers only).  The matrix model is always integral.
    """
    ints, k_in = _as_int_coeffs(F, precision)
    k_eff = min(k_in, k)
    integral_all, field_all = unramified_count_data(
        ints, k_eff, model, r_max, p, k, budget
    )
    if model == "matrix":
        region = "integral"
        all_counts = integral_all
    else:
        region = region or "field"
        if region == "field":
            all_counts = field_all
        elif region == "integral":
            all_counts = integral_all
        else:
            raise ValueError(f"unknown region {region!r}")
    new_counts = {r: mobius_combine(all_counts, r) for r in range(1, r_max + 1)}
    return NewRootTable(
        model=model, region=region, all_counts=all_counts, new_counts=new_counts
    )


def new_count_ramified_quadratic(
    P,
    ring: EisensteinRing,
    budget: CountBudget = DEFAULT_BUDGET,
    *,
    precision: int | None = None,
) -> RootCountResult:
    """Roots generating a fixed ramified quadratic extension: every root of
    the field that is not rational generates it, so the new count is the
    field count minus the base-field count."""
    if ring.e != 2 or ring.f != 1:
        raise ValueError("ring must be a ramified quadratic extension")
    ints, k = _as_int_coeffs(P, precision)
    whole = count_field_roots(ints, ring, budget, precision=k)
    base = count_field_roots(
        ints, make_unramified(ring.p, 1, ring.k), budget, precision=k
    )
    consumed = max(whole.digits_consumed, base.digits_consumed)
    if not whole.is_exact:
        return RootCountResult.inconclusive(whole.reason, consumed)
    if not base.is_exact:
        return RootCountResult.inconclusive(base.reason, consumed)
    return RootCountResult.exact(whole.count - base.count, consumed)

"""Independent brute-force oracles at desk scale.

Everything here is exhaustive enumeration or an elementary closed form,
deliberately sharing no machinery with the engines it validates: the
determinant census evaluates polynomials of matrices and eliminates over
F_p directly (no characteristic polynomials), the generator census walks
every field element through explicit Frobenius matrices (no Moebius
function), and the residue-level root census certifies roots one residue
at a time straight from the Hensel criterion.  Budgets are hard caps
with clear errors; an oracle that silently samples is not an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import PadicDigits
from .formulas import det_singular_prob_bound
from .gf import canonical_irreducible, fp_mulmod, fp_pow_mod
from .rings import ExtensionRing

__all__ = [
    "EnumerationReport",
    "CensusResult",
    "ENUMERATION_BUDGET",
    "RESIDUE_CENSUS_BUDGET",
    "det_singular_census",
    "generator_census",
    "exact_linear_root_prob",
    "residue_root_census",
]

ENUMERATION_BUDGET = 2**26
RESIDUE_CENSUS_BUDGET = 2**22
GENERATOR_CENSUS_BUDGET = 2**20


class BudgetExceededError(ValueError):
    """The requested enumeration is larger than the hard cap."""


@dataclass(frozen=True)
class EnumerationReport:
    """Outcome of an exhaustive census compared against a proven bound."""

    total_cases: int
    hit_count: int
    probability: Fraction
    bound: Fraction
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "total_cases": self.total_cases,
            "hit_count": self.hit_count,
            "probability": f"{self.probability.numerator}/{self.probability.denominator}",
            "probability_decimal": float(self.probability),
            "bound": f"{self.bound.numerator}/{self.bound.denominator}",
            "bound_decimal": float(self.bound),
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True)
class CensusResult:
    """Exact residue-census root count; decisive means every solution at
    working precision carried a Hensel certificate."""

    count: int
    decisive: bool
    uncertified: int


def _inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv[x] = pow(x, -1, p)
    return inv


def _batch_det_mod_p(mats: np.ndarray, p: int, inv: np.ndarray) -> np.ndarray:
    """Determinants mod p of a (B, n, n) batch, by vectorized elimination."""
    m = (mats % p).astype(np.int64)
    B, n, _ = m.shape
    det = np.ones(B, dtype=np.int64)
    rows = np.arange(B)
    for col in range(n):
        sub = m[:, col:, col]
        nz = sub != 0
        has = nz.any(axis=1)
        det[~has] = 0
        piv_off = np.argmax(nz, axis=1)
        piv_rows = col + piv_off
        swap = (piv_off > 0) & has
        if swap.any():
            r = rows[swap]
            pr = piv_rows[swap]
            tmp = m[r, pr].copy()
            m[r, pr] = m[r, col]
            m[r, col] = tmp
            det[swap] = (-det[swap]) % p
        pivot = m[:, col, col]
        det = det * pivot % p
        if col + 1 < n:
            factor = m[:, col + 1 :, col] * inv[pivot][:, None] % p
            m[:, col + 1 :, :] = (
                m[:, col + 1 :, :] - factor[:, :, None] * m[:, col : col + 1, :]
            ) % p
    return det


def det_singular_census(
    p: int,
    n: int,
    z_coeffs: Sequence[int] | None = None,
    r: int | None = None,
    chunk: int = 1 << 16,
) -> EnumerationReport:
    """Exact probability over all of Mat_n(F_p) that Z(A) is singular,
    for Z monic irreducible of degree r, against the proven bound.

    Enumerates every matrix (budget permitting), evaluates Z(A) by
    Horner, and takes determinants by batched elimination over F_p.
    """
    if z_coeffs is None:
        if r is None:
            raise ValueError("give z_coeffs or r")
        z_coeffs = canonical_irreducible(p, r)
    z = [c % p for c in z_coeffs]
    r_deg = len(z) - 1
    total = p ** (n * n)
    if total > ENUMERATION_BUDGET:
        raise BudgetExceededError(
            f"p^(n^2) = {total} exceeds enumeration budget {ENUMERATION_BUDGET}"
        )
    inv = _inverse_table(p)
    powers = p ** np.arange(n * n, dtype=np.int64)
    eye = np.eye(n, dtype=np.int64)
    hits = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % p
        mats = digits.reshape(-1, n, n)
        acc = np.broadcast_to(eye * z[r_deg], mats.shape).copy()
        for c in range(r_deg - 1, -1, -1):
            acc = np.matmul(acc, mats) % p
            if z[c]:
                acc = acc + eye * z[c]
        dets = _batch_det_mod_p(acc % p, p, inv)
        hits += int((dets == 0).sum())
    prob = Fraction(hits, total)
    bound = det_singular_prob_bound(p, n, r_deg)
    return EnumerationReport(
        total_cases=total,
        hit_count=hits,
        probability=prob,
        bound=bound,
        satisfied=prob <= bound,
    )


def generator_census(p: int, r: int) -> int:
    """Exhaustive count of elements of F_{p^r} generating it over F_p.

    An element generates unless it is fixed by the Frobenius power
    cutting out a maximal proper subfield; those maps are F_p-linear and
    applied to all q elements at once.
    """
    q = p**r
    if q > GENERATOR_CENSUS_BUDGET:
        raise BudgetExceededError(f"p^r = {q} exceeds budget {GENERATOR_CENSUS_BUDGET}")
    T = canonical_irreducible(p, r)
    idx = np.arange(q, dtype=np.int64)
    powers = p ** np.arange(r, dtype=np.int64)
    coords = (idx[:, None] // powers[None, :]) % p  # (q, r), low coord first
    if r == 1:
        return p  # every element generates the prime field
    prime_divs = []
    m = r
    d = 2
    while d * d <= m:
        if m % d == 0:
            prime_divs.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        prime_divs.append(m)
    is_generator = np.ones(q, dtype=bool)
    for ell in prime_divs:
        dsub = r // ell
        # matrix of x -> x^(p^dsub): columns are (w^i)^(p^dsub) mod T
        h = fp_pow_mod([0, 1], p**dsub, T, p)
        col = [1] + [0] * (r - 1)
        F = np.zeros((r, r), dtype=np.int64)
        cur = col
        for i in range(r):
            for j, c in enumerate(cur):
                F[j, i] = c
            cur = fp_mulmod(cur, h, T, p)
        fixed = ((coords @ F.T) % p == coords).all(axis=1)
        is_generator &= ~fixed
    return int(is_generator.sum())


def exact_linear_root_prob(p: int) -> Fraction:
    """Probability that a degree-1 Haar polynomial has an integral root.

    The root -a0/a1 is integral iff v(a0) >= v(a1); summing the
    geometric series sum_j (1 - 1/p) p^-j * p^-j gives p/(p+1).
    """
    return Fraction(p, p + 1)


def _reduce_mod_pi_power(ring: ExtensionRing, x, m: int):
    """Canonical coordinates of x modulo pi^m (dedup key for root classes)."""
    p = ring.p
    if ring.e == 1:
        q = p**m
        return tuple(c % q for c in x)
    out = []
    for i, c in enumerate(x):
        digits = max(0, -(-(m - i) // ring.e))  # ceil((m - i)/e), floored at 0
        q = p**digits
        out.append(tuple(cc % q for cc in c))
    return tuple(out)


def residue_root_census(
    F,
    ring: ExtensionRing,
    *,
    precision: int | None = None,
) -> CensusResult:
    """Count roots of F in the ring by enumerating all residues mod pi^N
    and keeping those with a Hensel certificate (2 v(F'(x)) < N at an
    exact zero of F); certified residues pointing at the same root are
    deduplicated by their class modulo pi^(N - v)."""
    coeffs = list(F)
    if coeffs and isinstance(coeffs[0], PadicDigits):
        k = min(c.known_digits for c in coeffs)
        ints = [c.value for c in coeffs]
    else:
        ints = [int(c) for c in coeffs]
        k = ring.k if precision is None else precision
    k = min(k, ring.k)
    size = ring.p ** (ring.e * ring.f * k)
    if size > RESIDUE_CENSUS_BUDGET:
        raise BudgetExceededError(
            f"|O/pi^N| = {size} exceeds census budget {RESIDUE_CENSUS_BUDGET}"
        )
    n_pi = ring.e * k
    dints = [i * c for i, c in enumerate(ints)][1:]
    certified: set = set()
    uncertified = 0
    for x in ring.enumerate_elements():
        fx = ring.eval_poly(ints, x)
        if ring.visible_pi_valuation(fx, k) is not None:
            continue  # F(x) != 0 mod pi^N
        if dints:
            dfx = ring.eval_poly(dints, x)
            v = ring.visible_pi_valuation(dfx, k)
        else:
            v = None
        if v is None or 2 * v >= n_pi:
            uncertified += 1
            continue
        certified.add(_reduce_mod_pi_power(ring, x, n_pi - v))
    return CensusResult(
        count=len(certified), decisive=(uncertified == 0), uncertified=uncertified
    )

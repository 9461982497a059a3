"""Exact evaluation of the closed forms, constants and two-sided bands
used to judge Monte Carlo estimates.

Every finitely-expressible quantity is an exact ``Fraction``; the two
infinite objects (the q-Pochhammer product and the degree constant built
from it) are returned as a :class:`CertifiedValue`, an exact partial sum
together with a proven bound on the truncation error.  Verdicts made
from these numbers are therefore never confounded by floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Context, Decimal, getcontext
from fractions import Fraction
from math import isqrt

__all__ = [
    "FormulaBand",
    "CertifiedValue",
    "mobius",
    "divisor_count",
    "divisors",
    "generator_count",
    "q_pochhammer_tail",
    "matrix_degree_constant",
    "poly_degree_constant",
    "outside_un_bound",
    "serre_mass",
    "ramified_quadratic_poly_expectation",
    "unramified_poly_band",
    "poly_not_unramified_upper",
    "matrix_unramified_band",
    "matrix_fixed_extension_band",
    "orbital_ratio_bound",
    "gaussian_binomial",
    "gl_order",
    "det_singular_prob_bound",
    "fraction_to_decimal_str",
]


@dataclass(frozen=True)
class FormulaBand:
    """A reference value with a two-sided interval around it."""

    center: Fraction
    lower: Fraction
    upper: Fraction
    provenance: str = ""

    def __post_init__(self) -> None:
        if not (self.lower <= self.center <= self.upper):
            raise ValueError("band must satisfy lower <= center <= upper")

    def contains(self, x: Fraction) -> bool:
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class CertifiedValue:
    """An exact rational approximation with |true - value| <= error_bound."""

    value: Fraction
    error_bound: Fraction

    def as_band(self, provenance: str = "") -> FormulaBand:
        return FormulaBand(
            center=self.value,
            lower=self.value - self.error_bound,
            upper=self.value + self.error_bound,
            provenance=provenance,
        )


# ---------------------------------------------------------------------------
# Elementary multiplicative functions.
# ---------------------------------------------------------------------------


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    result = 1
    for _, e in _factorize(n):
        if e > 1:
            return 0
        result = -result
    return result


def divisor_count(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    out = 1
    for _, e in _factorize(n):
        out *= e + 1
    return out


def divisors(n: int) -> list[int]:
    out = [1]
    for q, e in _factorize(n):
        out = [d * q**i for d in out for i in range(e + 1)]
    return sorted(out)


def generator_count(p: int, r: int) -> int:
    """Number of elements of F_{p^r} generating it over F_p."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return sum(mobius(r // d) * p**d for d in divisors(r))


# ---------------------------------------------------------------------------
# Infinite products and series with certified truncation.
# ---------------------------------------------------------------------------


def q_pochhammer_tail(p: int, m: int, target_digits: int = 15) -> CertifiedValue:
    """The infinite product prod_{k>=0} (1 - p^(-m-k)) as an exact partial
    product whose tail error is provably below 10^(-target_digits).

    The partial product overestimates the limit; the defect is at most
    sum_{j > m+K} p^(-j), by the product analogue of Bernoulli's
    inequality.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    tol = Fraction(1, 10**target_digits)
    # tail(K) = p^(-(m+K)) / (p-1); pick the smallest adequate K
    K = 0
    while Fraction(1, p ** (m + K) * (p - 1)) >= tol:
        K += 1
    partial = Fraction(1)
    for j in range(m, m + K + 1):
        partial *= 1 - Fraction(1, p**j)
    tail = Fraction(1, p ** (m + K) * (p - 1))
    return CertifiedValue(value=partial, error_bound=partial * tail)


def matrix_degree_constant(p: int, target_digits: int = 12) -> CertifiedValue:
    """sum_{m>=1} (1 - (p^-m; p^-1)_infty), certified below 10^-target_digits."""
    tol = Fraction(1, 10**target_digits)
    # sum over m > M is at most p * p^(-M) / (p-1)^2
    M = 1
    while Fraction(p, p**M * (p - 1) ** 2) >= tol / 2:
        M += 1
    total = Fraction(0)
    err = Fraction(0)
    per_term_digits = target_digits + len(str(M)) + 1
    for m in range(1, M + 1):
        cv = q_pochhammer_tail(p, m, per_term_digits)
        total += 1 - cv.value
        err += cv.error_bound
    err += Fraction(p, p**M * (p - 1) ** 2)
    return CertifiedValue(value=total, error_bound=err)


def poly_degree_constant(p: int) -> Fraction:
    return Fraction(1, p - 1)


def outside_un_bound(model: str, p: int) -> Fraction:
    """Upper bound for the limiting expected count outside the maximal
    unramified extension."""
    if model == "matrix":
        return Fraction(p * (4 * p - 3), (p - 1) ** 3)
    if model == "poly":
        return Fraction(4 * p - 3, (p - 1) ** 2)
    raise ValueError(f"model must be 'matrix' or 'poly', got {model!r}")


def serre_mass(p: int, e: int, f: int) -> Fraction:
    """Sum of discriminant norms over all totally ramified degree-e
    extensions of the degree-f unramified field."""
    if e < 1 or f < 1:
        raise ValueError("e, f must be >= 1")
    return Fraction(e, p ** ((e - 1) * f))


def ramified_quadratic_poly_expectation(
    p: int, disc_norm: Fraction | None = None
) -> Fraction:
    """Exact expected number of degree-generating roots in a fixed ramified
    quadratic extension, valid for polynomial degree n >= 3."""
    if disc_norm is None:
        if p == 2:
            raise ValueError("p = 2 requires an explicit discriminant norm")
        disc_norm = Fraction(1, p)
    disc_norm = Fraction(disc_norm)
    return disc_norm * Fraction(
        p**2 * (p**2 + 1), p**4 + p**3 + p**2 + p + 1
    )


def unramified_poly_band(p: int, r: int, n: int) -> FormulaBand:
    """Two-sided band for the expected new-root count in the degree-r
    unramified extension, polynomial model of degree n >= r.

    The finite-n formula stabilizes at n = 2r-1, and that substitution is
    baked in so the band is valid for every n >= r.
    """
    if r < 1 or n < r:
        raise ValueError("need 1 <= r <= n")
    n_eff = min(n, 2 * r - 1)
    center = Fraction(p ** (n_eff + 1) - p**r, p ** (n_eff + 1) - 1) * Fraction(
        generator_count(p, r), p**r
    )
    eps = Fraction(1, p**r)
    return FormulaBand(
        center=center,
        lower=center - eps,
        upper=center + 4 * eps,
        provenance=f"unramified poly band p={p} r={r} n={n}",
    )


def poly_not_unramified_upper(p: int, f: int, disc_norm: Fraction) -> Fraction:
    """Upper bound (1 + 4 p^-f) * ||Disc|| for new-root counts in a ramified
    extension with inertia degree f, polynomial model."""
    disc_norm = Fraction(disc_norm)
    return (1 + Fraction(4, p**f)) * disc_norm


def matrix_unramified_band(p: int, r: int, n: int) -> FormulaBand:
    """Bounds for the expected count of eigenvalues generating the degree-r
    unramified extension, matrix size n.

    The lower bound carries the constant 1000 and is vacuous (clamped to
    zero) until p^(r/2) exceeds 1000.  For odd r it is evaluated through
    the integer square root, rounding in the safe direction.
    """
    if r < 1 or n < r:
        raise ValueError("need 1 <= r <= n")
    product = Fraction(1)
    for i in range(r):
        product *= 1 - Fraction(1, p ** (n - i))
    scale = 1 / (1 - Fraction(1, p**r))
    upper = scale * product
    if r % 2 == 0:
        coef = 1 - Fraction(1000, p ** (r // 2))
    else:
        # isqrt rounds down, so 1000/isqrt >= 1000*p^(-r/2): still a lower bound
        coef = 1 - Fraction(1000, isqrt(p**r))
    lower = max(Fraction(0), coef * scale * product)
    center = (lower + upper) / 2
    return FormulaBand(
        center=center,
        lower=lower,
        upper=upper,
        provenance=f"matrix unramified band p={p} r={r} n={n}",
    )


def matrix_fixed_extension_band(p: int, e: int, f: int, disc_val: int) -> FormulaBand:
    """Band around the limiting expected eigenvalue count for a fixed
    extension with inertia degree f and discriminant valuation disc_val."""
    if e < 1 or f < 1 or disc_val < 0:
        raise ValueError("bad extension shape")
    disc_norm = Fraction(1, p**disc_val)
    center = disc_norm * sum(
        mobius(f // d) * Fraction(p**d, p**f) for d in divisors(f)
    )
    eps = Fraction(1, p**f)
    lower = center - disc_norm * eps
    upper = center + disc_norm * eps * Fraction(1 + divisor_count(f)) / (1 - eps)
    return FormulaBand(
        center=center,
        lower=lower,
        upper=upper,
        provenance=f"fixed extension limit band p={p} e={e} f={f} disc_val={disc_val}",
    )


def orbital_ratio_bound(p: int, d: int) -> Fraction:
    """p^-d + 2 p^-2d, the lattice-count ratio bound for residue degree d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return Fraction(1, p**d) + Fraction(2, p ** (2 * d))


def gaussian_binomial(n: int, r: int, p: int) -> int:
    """Number of r-dimensional subspaces of F_p^n."""
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    num = 1
    den = 1
    for i in range(r):
        num *= p**n - p**i
        den *= p**r - p**i
    assert num % den == 0
    return num // den


def gl_order(p: int, r: int) -> int:
    """|GL_r(F_p)|."""
    out = 1
    for i in range(r):
        out *= p**r - p**i
    return out


def det_singular_prob_bound(p: int, n: int, r: int) -> Fraction:
    """Probability bound prod_{i<r}(1 - p^(i-n)) / (p^r - 1) for a matrix to
    make an irreducible degree-r polynomial of itself singular mod p."""
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    product = Fraction(1)
    for i in range(r):
        product *= 1 - Fraction(1, p ** (n - i))
    return product / (p**r - 1)


def fraction_to_decimal_str(x: Fraction, digits: int = 15) -> str:
    """Decimal rendering with the requested number of significant digits."""
    if x == 0:
        return "0"
    getcontext().prec = digits + 5
    d = Decimal(x.numerator) / Decimal(x.denominator)
    ctx = Context(prec=digits)
    return str(ctx.create_decimal(d))

"""Polynomial algebra over residue fields F_{p^f}.

Two layers live here.  The bottom layer is a set of ``fp_*`` helpers on
plain coefficient lists over the prime field F_p (low-order coefficient
first, no trailing zeros, ``[]`` is the zero polynomial); these are the
hot path of the root counter.  On top sits :class:`FqField` /
:class:`FqPoly`, a generic implementation of F_{p^f} arithmetic,
distinct-degree plus equal-degree factorization, and root finding, used
wherever residue fields of extensions appear.

Field moduli are canonical: the lexicographically smallest monic
irreducible of the requested degree, coefficients compared low-to-high.
Two constructions of F_{p^f} are therefore identical, and embeddings
between fields are computed on demand by root-finding the smaller
modulus inside the larger field (taking the lexicographically smallest
root, so the embedding is canonical as well).

Equal-degree splitting draws its randomness from a generator seeded by
the polynomial's own coefficients, so factorizations are reproducible
run-to-run and across processes.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "FqField",
    "FqPoly",
    "canonical_irreducible",
    "is_irreducible",
    "factor",
    "roots_in_subextension",
]


# ---------------------------------------------------------------------------
# F_p[x] on plain int lists (low-order first).
# ---------------------------------------------------------------------------


def fp_normalize(c: list[int], p: int) -> list[int]:
    c = [x % p for x in c]
    while c and c[-1] == 0:
        c.pop()
    return c


def fp_add(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i, x in enumerate(a):
        out[i] = x
    for i, x in enumerate(b):
        out[i] = (out[i] + x) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def fp_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return fp_normalize(out, p)


def fp_divmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = [x % p for x in a]
    while r and r[-1] == 0:
        r.pop()
    db, lb = len(b) - 1, b[-1]
    inv_lb = pow(lb, -1, p)
    q: list[int] = [0] * max(0, len(r) - db)
    while len(r) - 1 >= db and r:
        shift = len(r) - 1 - db
        coef = r[-1] * inv_lb % p
        q[shift] = coef
        for i in range(db + 1):
            r[shift + i] = (r[shift + i] - coef * b[i]) % p
        while r and r[-1] == 0:
            r.pop()
    return q, r


def fp_mod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    return fp_divmod(a, b, p)[1]


def fp_gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = fp_normalize(list(a), p)
    b = fp_normalize(list(b), p)
    while b:
        a, b = b, fp_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def fp_deriv(a: Sequence[int], p: int) -> list[int]:
    return fp_normalize([i * a[i] for i in range(1, len(a))], p)


def fp_monic(a: Sequence[int], p: int) -> list[int]:
    a = fp_normalize(list(a), p)
    if a and a[-1] != 1:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def fp_mulmod(a: Sequence[int], b: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    return fp_mod(fp_mul(a, b, p), m, p)


def fp_pow_mod(a: Sequence[int], e: int, m: Sequence[int], p: int) -> list[int]:
    """a^e mod m over F_p."""
    result = [1]
    base = fp_mod(a, m, p)
    while e:
        if e & 1:
            result = fp_mulmod(result, base, m, p)
        base = fp_mulmod(base, base, m, p)
        e >>= 1
    return result


def fp_eval(a: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc


def fp_frobenius_power(m: Sequence[int], p: int, d: int) -> list[int]:
    """x^(p^d) mod m, by iterating the p-th power map d times."""
    h = fp_mod([0, 1], m, p)
    for _ in range(d):
        h = fp_pow_mod(h, p, m, p)
    return h


def fp_is_irreducible(g: Sequence[int], p: int) -> bool:
    """Rabin irreducibility test over F_p (g of degree >= 1)."""
    g = fp_monic(g, p)
    n = len(g) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    h = fp_frobenius_power(g, p, n)
    if fp_normalize(fp_add(h, [0, p - 1], p), p):
        return False  # x^(p^n) != x (mod g)
    for ell in _prime_divisors(n):
        h = fp_frobenius_power(g, p, n // ell)
        if len(fp_gcd(fp_add(h, [0, p - 1], p), g, p)) != 1:
            return False
    return True


def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def _canonical_irreducible_cached(p: int, f: int) -> tuple[int, ...]:
    # Enumerate monic degree-f polynomials with c_0 as primary sort key
    # (coefficients compared low-to-high), return the first irreducible.
    start = 0 if f == 1 else p ** (f - 1)  # c_0 = 0 is divisible by x
    for m in range(start, p**f):
        coeffs = [0] * (f + 1)
        coeffs[f] = 1
        t = m
        for i in range(f - 1, -1, -1):
            coeffs[f - 1 - i] = t // p**i
            t %= p**i
        if fp_is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError("no irreducible polynomial found")  # unreachable


def canonical_irreducible(p: int, f: int) -> list[int]:
    """Smallest monic irreducible of degree f over F_p, low-to-high lex order."""
    if f < 1:
        raise ValueError("degree must be >= 1")
    return list(_canonical_irreducible_cached(p, f))


def _seed_from_coeffs(p: int, flat: Iterable[int]) -> int:
    # Stable fold, independent of interpreter hash randomization.
    h = 0x9E3779B97F4A7C15 ^ p
    for c in flat:
        h = (h * 0x100000001B3 + c + 1) % (1 << 64)
    return h


# ---------------------------------------------------------------------------
# F_{p^f}: elements are coordinate tuples in the power basis of the modulus.
# ---------------------------------------------------------------------------


class FqField:
    """The finite field F_{p^f} with the canonical modulus for (p, f)."""

    def __init__(self, p: int, f: int):
        if f < 1:
            raise ValueError("f must be >= 1")
        self.p = p
        self.f = f
        self.q = p**f
        self.modulus = tuple(_canonical_irreducible_cached(p, f))
        # reduction rows: x^(f+i) mod T as coordinate tuples, i = 0..f-2
        rows: list[tuple[int, ...]] = []
        cur = [(-c) % p for c in self.modulus[:f]]  # x^f mod T
        for _ in range(max(0, f - 1)):
            rows.append(tuple(cur))
            lead = cur[-1]
            cur = [0] + cur[:-1]
            if lead:
                cur = [(cur[i] + lead * rows[0][i]) % p for i in range(f)]
        self._red = rows
        self.zero = (0,) * f
        self.one = tuple([1] + [0] * (f - 1))

    def __repr__(self) -> str:
        return f"FqField(p={self.p}, f={self.f})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FqField) and (self.p, self.f) == (other.p, other.f)

    def __hash__(self) -> int:
        return hash((self.p, self.f))

    # -- element constructors -----------------------------------------------

    def from_int(self, n: int) -> tuple[int, ...]:
        return tuple([n % self.p] + [0] * (self.f - 1))

    def from_coords(self, coords: Sequence[int]) -> tuple[int, ...]:
        if len(coords) > self.f:
            raise ValueError("too many coordinates")
        out = [c % self.p for c in coords] + [0] * (self.f - len(coords))
        return tuple(out)

    def elements(self):
        """All q elements, coordinate counter order (small fields only)."""
        p, f = self.p, self.f
        for m in range(self.q):
            coords = []
            t = m
            for _ in range(f):
                coords.append(t % p)
                t //= p
            yield tuple(coords)

    # -- arithmetic -----------------------------------------------------------

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple((-x) % p for x in a)

    def scalar_mul(self, c: int, a):
        p = self.p
        c %= p
        return tuple(c * x % p for x in a)

    def mul(self, a, b):
        p, f = self.p, self.f
        if f == 1:
            return (a[0] * b[0] % p,)
        conv = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        for j in range(2 * f - 2, f - 1, -1):
            c = conv[j] % p
            if c:
                row = self._red[j - f]
                for i in range(f):
                    conv[i] += c * row[i]
        return tuple(conv[i] % p for i in range(f))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("inverting 0 in F_q")
        if self.f == 1:
            return (pow(a[0], -1, self.p),)
        return self.pow(a, self.q - 2)

    def frobenius(self, a, times: int = 1):
        """a^(p^times)."""
        out = a
        for _ in range(times):
            out = self.pow(out, self.p)
        return out

    def is_zero(self, a) -> bool:
        return a == self.zero

    # -- embeddings -----------------------------------------------------------

    @lru_cache(maxsize=None)
    def _embedding_powers(self, other: "FqField") -> tuple:
        if other.f % self.f != 0 or other.p != self.p:
            raise ValueError(f"no embedding of F_{self.q} into F_{other.q}")
        if other.f == self.f:
            return tuple(other.from_coords([0] * i + [1]) for i in range(self.f))
        lifted = FqPoly(other, [other.from_int(c) for c in self.modulus])
        roots = sorted(r for r, _ in lifted.roots())
        beta = roots[0]
        pows = [other.one]
        for _ in range(self.f - 1):
            pows.append(other.mul(pows[-1], beta))
        return tuple(pows)

    def embed(self, a, other: "FqField"):
        """Canonical embedding of a into the larger field F_{p^(f*m)}."""
        pows = self._embedding_powers(other)
        out = other.zero
        for c, w in zip(a, pows):
            if c:
                out = other.add(out, other.scalar_mul(c, w))
        return out


@lru_cache(maxsize=None)
def get_field(p: int, f: int) -> FqField:
    return FqField(p, f)


# ---------------------------------------------------------------------------
# Polynomials over F_q.
# ---------------------------------------------------------------------------


class FqPoly:
    """Dense polynomial over an FqField; no trailing zero coefficients."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FqField, coeffs: Sequence):
        self.field = field
        cs = list(coeffs)
        while cs and field.is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def from_int_coeffs(cls, field: FqField, coeffs: Sequence[int]) -> "FqPoly":
        return cls(field, [field.from_int(c) for c in coeffs])

    @classmethod
    def x(cls, field: FqField) -> "FqPoly":
        return cls(field, [field.zero, field.one])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FqPoly)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.field, self.coeffs))

    def __repr__(self) -> str:
        return f"FqPoly(q={self.field.q}, {list(self.coeffs)})"

    def sort_key(self):
        return (self.degree, self.coeffs)

    # -- rings ops -------------------------------------------------------------

    def add(self, other: "FqPoly") -> "FqPoly":
        K = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for i in range(n):
            a = self.coeffs[i] if i < len(self.coeffs) else K.zero
            b = other.coeffs[i] if i < len(other.coeffs) else K.zero
            out.append(K.add(a, b))
        return FqPoly(K, out)

    def sub(self, other: "FqPoly") -> "FqPoly":
        K = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for i in range(n):
            a = self.coeffs[i] if i < len(self.coeffs) else K.zero
            b = other.coeffs[i] if i < len(other.coeffs) else K.zero
            out.append(K.sub(a, b))
        return FqPoly(K, out)

    def mul(self, other: "FqPoly") -> "FqPoly":
        K = self.field
        if self.is_zero() or other.is_zero():
            return FqPoly(K, [])
        out = [K.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not K.is_zero(a):
                for j, b in enumerate(other.coeffs):
                    out[i + j] = K.add(out[i + j], K.mul(a, b))
        return FqPoly(K, out)

    def scalar_mul(self, c) -> "FqPoly":
        K = self.field
        return FqPoly(K, [K.mul(c, a) for a in self.coeffs])

    def divmod(self, other: "FqPoly") -> tuple["FqPoly", "FqPoly"]:
        K = self.field
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        inv_lead = K.inv(other.coeffs[-1])
        q = [K.zero] * max(0, len(r) - db)
        while len(r) - 1 >= db and r:
            coef = K.mul(r[-1], inv_lead)
            shift = len(r) - 1 - db
            q[shift] = coef
            for i in range(db + 1):
                r[shift + i] = K.sub(r[shift + i], K.mul(coef, other.coeffs[i]))
            while r and K.is_zero(r[-1]):
                r.pop()
        return FqPoly(K, q), FqPoly(K, r)

    def mod(self, other: "FqPoly") -> "FqPoly":
        return self.divmod(other)[1]

    def exact_div(self, other: "FqPoly") -> "FqPoly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ValueError("division is not exact")
        return q

    def monic(self) -> "FqPoly":
        if self.is_zero():
            return self
        K = self.field
        lead = self.coeffs[-1]
        if lead == K.one:
            return self
        return self.scalar_mul(K.inv(lead))

    def gcd(self, other: "FqPoly") -> "FqPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.mod(b)
        return a.monic()

    def deriv(self) -> "FqPoly":
        K = self.field
        return FqPoly(
            K,
            [K.scalar_mul(i, self.coeffs[i]) for i in range(1, len(self.coeffs))],
        )

    def pow_mod(self, e: int, modulus: "FqPoly") -> "FqPoly":
        result = FqPoly(self.field, [self.field.one])
        base = self.mod(modulus)
        while e:
            if e & 1:
                result = result.mul(base).mod(modulus)
            base = base.mul(base).mod(modulus)
            e >>= 1
        return result

    def evaluate(self, x):
        K = self.field
        acc = K.zero
        for c in reversed(self.coeffs):
            acc = K.add(K.mul(acc, x), c)
        return acc

    def shift_up(self, m: int) -> "FqPoly":
        """Multiply by x^m."""
        if self.is_zero():
            return self
        return FqPoly(self.field, [self.field.zero] * m + list(self.coeffs))

    # -- structure ---------------------------------------------------------------

    def is_irreducible(self) -> bool:
        K = self.field
        n = self.degree
        if n < 1:
            return False
        if n == 1:
            return True
        f = self.monic()
        x = FqPoly.x(K)
        h = x.pow_mod(K.q**n, f)
        if not h.sub(x).is_zero():
            return False
        for ell in _prime_divisors(n):
            h = x.pow_mod(K.q ** (n // ell), f)
            if h.sub(x).gcd(f).degree != 0:
                return False
        return True

    def _pth_root(self) -> "FqPoly":
        # Only called when the derivative vanishes: coefficients sit at
        # indices divisible by p, and c^(p^(f-1)) is the p-th root in F_q.
        K = self.field
        p = K.p
        out = []
        for i in range(0, len(self.coeffs), p):
            out.append(K.frobenius(self.coeffs[i], K.f - 1) if K.f > 1 else self.coeffs[i])
        return FqPoly(K, out)

    def squarefree_decomposition(self) -> list[tuple["FqPoly", int]]:
        """[(squarefree monic factor, multiplicity)], multiplicities distinct."""
        K = self.field
        p = K.p
        f = self.monic()
        if f.degree < 1:
            return []
        out: list[tuple[FqPoly, int]] = []
        d = f.deriv()
        if d.is_zero():
            return [(g, m * p) for g, m in f._pth_root().squarefree_decomposition()]
        c = f.gcd(d)
        w = f.exact_div(c)
        i = 1
        while w.degree > 0:
            y = w.gcd(c)
            fac = w.exact_div(y)
            if fac.degree > 0:
                out.append((fac, i))
            w = y
            c = c.exact_div(y)
            i += 1
        if c.degree > 0:
            out.extend((g, m * p) for g, m in c._pth_root().squarefree_decomposition())
        return out

    def _ddf(self) -> list[tuple["FqPoly", int]]:
        """Distinct-degree split of a squarefree monic polynomial."""
        K = self.field
        out = []
        fstar = self
        x = FqPoly.x(K)
        h = x.mod(fstar)
        i = 1
        while fstar.degree >= 2 * i:
            h = h.pow_mod(K.q, fstar)
            g = h.sub(x).gcd(fstar)
            if g.degree > 0:
                out.append((g, i))
                fstar = fstar.exact_div(g)
                h = h.mod(fstar)
            i += 1
        if fstar.degree > 0:
            out.append((fstar, fstar.degree))
        return out

    def _equal_degree_split(self, d: int, rng: random.Random) -> list["FqPoly"]:
        """Split a product of distinct irreducibles, all of degree d."""
        K = self.field
        if self.degree == d:
            return [self]
        q = K.q
        while True:
            a = FqPoly(
                K,
                [
                    K.from_coords([rng.randrange(K.p) for _ in range(K.f)])
                    for _ in range(self.degree)
                ],
            )
            if K.p == 2:
                # trace map: a + a^2 + a^4 + ... splits in characteristic 2
                t = a.mod(self)
                b = t
                for _ in range(d * K.f - 1):
                    t = t.mul(t).mod(self)
                    b = b.add(t)
                g = b.gcd(self)
            else:
                b = a.pow_mod((q**d - 1) // 2, self)
                g = b.sub(FqPoly(K, [K.one])).gcd(self)
            if 0 < g.degree < self.degree:
                return g._equal_degree_split(d, rng) + self.exact_div(g)._equal_degree_split(d, rng)

    def factor(self) -> list[tuple["FqPoly", int]]:
        """Monic irreducible factors with exact multiplicities.

        Multiplicities are confirmed by repeated exact division of the
        original polynomial, not inferred from the squarefree pass.
        """
        if self.degree < 1:
            raise ValueError("factor() needs degree >= 1")
        K = self.field
        flat = [c for coeff in self.coeffs for c in coeff]
        rng = random.Random(_seed_from_coeffs(K.q, flat))
        irreducibles: list[FqPoly] = []
        for sqfree, _ in self.squarefree_decomposition():
            for block, d in sqfree._ddf():
                irreducibles.extend(block._equal_degree_split(d, rng))
        out = []
        for g in sorted(set(irreducibles), key=FqPoly.sort_key):
            m = 0
            rest = self.monic()
            while True:
                q, r = rest.divmod(g)
                if not r.is_zero():
                    break
                m += 1
                rest = q
            out.append((g, m))
        return out

    def roots(self) -> list[tuple[tuple, int]]:
        """Roots in the coefficient field, with multiplicities."""
        K = self.field
        if self.degree < 1:
            return []
        out = []
        # restrict to the part splitting over F_q before factoring
        for sqfree, mult in self.squarefree_decomposition():
            x_q = FqPoly.x(K).pow_mod(K.q, sqfree)
            lin = x_q.sub(FqPoly.x(K)).gcd(sqfree)
            if lin.degree < 1:
                continue
            if lin.degree == 1:
                out.append((K.neg(lin.coeffs[0]), mult))
                continue
            flat = [c for coeff in lin.coeffs for c in coeff]
            rng = random.Random(_seed_from_coeffs(K.q, flat))
            for factor_ in lin._equal_degree_split(1, rng):
                out.append((K.neg(factor_.monic().coeffs[0]), mult))
        out.sort(key=lambda t: t[0])
        return out


# ---------------------------------------------------------------------------
# Module-level convenience wrappers.
# ---------------------------------------------------------------------------


def is_irreducible(g: FqPoly) -> bool:
    return g.is_irreducible()


def factor(g: FqPoly) -> list[tuple[FqPoly, int]]:
    return g.factor()


def roots_in_subextension(g, d: int, p: int | None = None) -> list[tuple[tuple, int]]:
    """Roots of a prime-field polynomial inside F_{p^d}, with multiplicities.

    ``g`` is either an FqPoly over F_p or a plain int coefficient list
    (then ``p`` is required).  Returned roots are coordinate tuples in the
    canonical F_{p^d}.
    """
    if isinstance(g, FqPoly):
        if g.field.f != 1:
            raise ValueError("g must be defined over the prime field")
        p = g.field.p
        int_coeffs = [c[0] for c in g.coeffs]
    else:
        if p is None:
            raise ValueError("p required for int-list input")
        int_coeffs = fp_normalize(list(g), p)
    K = get_field(p, d)
    lifted = FqPoly.from_int_coeffs(K, int_coeffs)
    return lifted.roots()

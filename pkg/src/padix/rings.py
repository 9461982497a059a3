"""Finite-precision models of rings of integers of extensions of Q_p.

A ring here is either the unramified ring Z_p[w]/(T(w)) truncated to k
base digits (T the canonical irreducible of degree f lifted to Z), or an
Eisenstein layer on top of it: O = U[x]/(E(x)) with E monic Eisenstein of
degree e, in which the class of x is a uniformizer pi with pi^e = p*unit.
Elements are coordinate tuples over Z/p^k: a flat tuple of f integers in
the unramified case, a tuple of e such tuples in the ramified case.
All elements are known modulo pi^N with N = e*k.

Precision is a caller-side concern: arithmetic is always performed modulo
p^k, while operations that *spend* digits (division by powers of pi)
report their cost through :meth:`ExtensionRing.pi_pow_digit_cost` so the
root counter can keep an auditable account of what is still certain.
Valuations are read through an explicit effective precision ``k_eff`` so
that digits already spent are never trusted.

Descriptors have a canonical text form used by the CLI: ``unram:f`` and
``eis:e:f:<E-coeffs>`` with low-order-first integer coefficients
(``eis:2:1:-3,0,1`` is x^2 - 3 over Q_3).  Wildly ramified rings (p | e)
need an explicitly supplied discriminant valuation and are constructible
through the API only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .arith import PadicDigits, PrimeBase, ValuationVerdict
from .gf import FqField, canonical_irreducible, get_field

__all__ = [
    "RingDescriptor",
    "ExtensionRing",
    "UnramifiedRing",
    "EisensteinRing",
    "make_unramified",
    "make_eisenstein",
    "parse_descriptor",
    "ring_from_descriptor",
    "MAX_EXTENSION_DEGREE",
]

MAX_EXTENSION_DEGREE = 16


@dataclass(frozen=True)
class RingDescriptor:
    """Shape of an extension: prime, inertia degree f, ramification index e,
    defining Eisenstein polynomial (absent iff e == 1), and the valuation
    of the discriminant over Q_p."""

    p: int
    f: int
    e: int
    eisenstein: tuple[int, ...] | None
    disc_val: int

    def __post_init__(self) -> None:
        PrimeBase(self.p)  # validates primality
        if self.f < 1 or self.e < 1:
            raise ValueError("need f >= 1 and e >= 1")
        if self.e * self.f > MAX_EXTENSION_DEGREE:
            raise ValueError(
                f"degree e*f = {self.e * self.f} exceeds supported maximum "
                f"{MAX_EXTENSION_DEGREE}"
            )
        if (self.e > 1) != (self.eisenstein is not None):
            raise ValueError("eisenstein polynomial present iff e > 1")
        if self.e == 1 and self.disc_val != 0:
            raise ValueError("unramified extensions have disc_val = 0")
        if self.disc_val < 0:
            raise ValueError("disc_val must be non-negative")

    @property
    def degree(self) -> int:
        return self.e * self.f

    @property
    def text_form(self) -> str:
        if self.e == 1:
            return f"unram:{self.f}"
        coeffs = ",".join(str(c) for c in self.eisenstein)
        return f"eis:{self.e}:{self.f}:{coeffs}"

    def __str__(self) -> str:
        return self.text_form


def parse_descriptor(text: str, p: int) -> RingDescriptor:
    """Parse the canonical text form for the given prime.

    Only tame ramification can be described in text (the discriminant
    valuation is then forced); wild rings need :func:`make_eisenstein`
    with an explicit disc_val.
    """
    parts = text.strip().split(":")
    if parts[0] == "unram" and len(parts) == 2:
        return RingDescriptor(p=p, f=int(parts[1]), e=1, eisenstein=None, disc_val=0)
    if parts[0] == "eis" and len(parts) == 4:
        e = int(parts[1])
        f = int(parts[2])
        coeffs = tuple(int(c) for c in parts[3].split(","))
        if len(coeffs) != e + 1 or coeffs[-1] != 1:
            raise ValueError("eisenstein coefficients must be monic of length e+1")
        if e % p == 0:
            raise ValueError(
                "wildly ramified descriptor needs explicit disc_val; "
                "use make_eisenstein() directly"
            )
        return RingDescriptor(
            p=p, f=f, e=e, eisenstein=coeffs, disc_val=(e - 1) * f
        )
    raise ValueError(f"unparseable ring descriptor {text!r}")


class ExtensionRing:
    """Common interface of the two ring shapes."""

    descriptor: RingDescriptor
    p: int
    e: int
    f: int
    k: int
    modulus_int: int  # p^k
    residue_field: FqField

    @property
    def pi_precision(self) -> int:
        return self.e * self.k

    def pi_pow_digit_cost(self, m: int) -> int:
        """Base digits spent by dividing by pi^m."""
        return -(-m // self.e)  # ceil

    # -- spec-level wrappers ---------------------------------------------------

    def pi_valuation(self, x) -> ValuationVerdict:
        v = self.visible_pi_valuation(x, self.k)
        if v is None:
            return ValuationVerdict.at_least(self.pi_precision)
        return ValuationVerdict.exactly(v)

    def eval_poly(self, coeffs: Sequence, x):
        """Horner evaluation; coefficients are ints, PadicDigits, or elements."""
        acc = self.zero
        for c in reversed(list(coeffs)):
            acc = self.mul(acc, x)
            if isinstance(c, int):
                acc = self.add_scalar(acc, c)
            elif isinstance(c, PadicDigits):
                acc = self.add_scalar(acc, c.value)
            else:
                acc = self.add(acc, c)
        return acc

    # subclasses provide: zero, one, from_int, add, sub, neg, mul, add_scalar,
    # scalar_mul, residue, lift_residue, visible_pi_valuation, mul_pi_pow,
    # div_pi_pow, invert_unit, enumerate_elements


class UnramifiedRing(ExtensionRing):
    """Z_p[w]/(T(w)) mod p^k: elements are tuples of f ints below p^k."""

    def __init__(self, p: int, f: int, k: int):
        if k < 1:
            raise ValueError("precision k must be >= 1")
        self.descriptor = RingDescriptor(p=p, f=f, e=1, eisenstein=None, disc_val=0)
        self.p = p
        self.e = 1
        self.f = f
        self.k = k
        self.modulus_int = p**k
        self.residue_field = get_field(p, f)
        self.modulus_poly = tuple(canonical_irreducible(p, f))
        M = self.modulus_int
        rows: list[tuple[int, ...]] = []
        cur = [(-c) % M for c in self.modulus_poly[:f]]
        for _ in range(max(0, f - 1)):
            rows.append(tuple(cur))
            lead = cur[-1]
            cur = [0] + cur[:-1]
            if lead:
                cur = [(cur[i] + lead * rows[0][i]) % M for i in range(f)]
        self._red = rows
        self.zero = (0,) * f
        self.one = tuple([1] + [0] * (f - 1))

    def __repr__(self) -> str:
        return f"UnramifiedRing(p={self.p}, f={self.f}, k={self.k})"

    def from_int(self, n: int):
        return tuple([n % self.modulus_int] + [0] * (self.f - 1))

    def add(self, a, b):
        M = self.modulus_int
        return tuple((x + y) % M for x, y in zip(a, b))

    def sub(self, a, b):
        M = self.modulus_int
        return tuple((x - y) % M for x, y in zip(a, b))

    def neg(self, a):
        M = self.modulus_int
        return tuple((-x) % M for x in a)

    def add_scalar(self, a, n: int):
        M = self.modulus_int
        return ((a[0] + n) % M,) + a[1:]

    def scalar_mul(self, n: int, a):
        M = self.modulus_int
        n %= M
        return tuple(n * x % M for x in a)

    def mul(self, a, b):
        M = self.modulus_int
        f = self.f
        if f == 1:
            return (a[0] * b[0] % M,)
        conv = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        for j in range(2 * f - 2, f - 1, -1):
            c = conv[j] % M
            if c:
                row = self._red[j - f]
                for i in range(f):
                    conv[i] += c * row[i]
        return tuple(conv[i] % M for i in range(f))

    def residue(self, a):
        p = self.p
        return tuple(x % p for x in a)

    def lift_residue(self, alpha):
        return tuple(int(x) for x in alpha)

    def visible_pi_valuation(self, a, k_eff: int) -> int | None:
        q = self.p**k_eff
        best: int | None = None
        for x in a:
            x %= q
            if x == 0:
                continue
            v = 0
            while x % self.p == 0:
                x //= self.p
                v += 1
            if best is None or v < best:
                best = v
                if best == 0:
                    return 0
        return best

    def mul_pi_pow(self, a, m: int):
        return self.scalar_mul(self.p**m, a)

    def div_pi_pow(self, a, m: int):
        q = self.p**m
        if any(x % q for x in a):
            raise ValueError(f"element not divisible by p^{m}")
        return tuple(x // q for x in a)

    def invert_unit(self, a):
        K = self.residue_field
        r = K.inv(self.residue(a))
        x = self.lift_residue(r)
        digits = 1
        while digits < self.k:
            # Newton step doubles the number of correct digits
            x = self.sub(self.scalar_mul(2, x), self.mul(a, self.mul(x, x)))
            digits *= 2
        return x

    def enumerate_elements(self) -> Iterator[tuple[int, ...]]:
        M = self.modulus_int
        f = self.f
        idx = [0] * f
        while True:
            yield tuple(idx)
            j = 0
            while j < f:
                idx[j] += 1
                if idx[j] < M:
                    break
                idx[j] = 0
                j += 1
            if j == f:
                return


class EisensteinRing(ExtensionRing):
    """U[x]/(E(x)) for U unramified mod p^k and E Eisenstein of degree e.

    Elements are tuples of e unramified-layer elements (pi-power
    coordinates low to high); pi is the class of x and pi^e = p * w for
    the precomputed unit w.
    """

    def __init__(self, base: UnramifiedRing, eisenstein: Sequence[int], disc_val: int | None = None):
        E = tuple(int(c) for c in eisenstein)
        if len(E) < 3 or E[-1] != 1:
            raise ValueError("E must be monic of degree >= 2")
        e = len(E) - 1
        p = base.p
        if any(c % p for c in E[:-1]):
            raise ValueError("E is not Eisenstein: lower coefficients must be divisible by p")
        if E[0] % (p * p) == 0:
            raise ValueError("E is not Eisenstein: constant term has valuation > 1")
        if e % p == 0:
            if disc_val is None:
                raise ValueError("wild ramification: disc_val must be supplied")
        else:
            tame = (e - 1) * base.f
            if disc_val is None:
                disc_val = tame
            elif disc_val != tame:
                raise ValueError(
                    f"tame disc_val must be (e-1)*f = {tame}, got {disc_val}"
                )
        self.base = base
        self.descriptor = RingDescriptor(
            p=p, f=base.f, e=e, eisenstein=E, disc_val=disc_val
        )
        self.p = p
        self.e = e
        self.f = base.f
        self.k = base.k
        self.modulus_int = base.modulus_int
        self.residue_field = base.residue_field
        self.eisenstein_coeffs = E
        bz = base.zero
        self.zero = tuple(bz for _ in range(e))
        self.one = tuple([base.one] + [bz] * (e - 1))
        # pi^e = -(E_0 + E_1 pi + ... + E_{e-1} pi^{e-1}) = p * w
        self._pi_e = tuple(base.from_int(-E[i]) for i in range(e))
        self._w = tuple(base.from_int(-(E[i] // p)) for i in range(e))
        self._w_inv = self.invert_unit(self._w)

    def __repr__(self) -> str:
        return (
            f"EisensteinRing(p={self.p}, e={self.e}, f={self.f}, k={self.k}, "
            f"E={list(self.eisenstein_coeffs)})"
        )

    def from_int(self, n: int):
        return tuple([self.base.from_int(n)] + [self.base.zero] * (self.e - 1))

    def add(self, a, b):
        U = self.base
        return tuple(U.add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        U = self.base
        return tuple(U.sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        U = self.base
        return tuple(U.neg(x) for x in a)

    def add_scalar(self, a, n: int):
        return (self.base.add_scalar(a[0], n),) + a[1:]

    def scalar_mul(self, n: int, a):
        U = self.base
        return tuple(U.scalar_mul(n, x) for x in a)

    def mul(self, a, b):
        U = self.base
        e = self.e
        conv = [U.zero] * (2 * e - 1)
        for i, x in enumerate(a):
            if x != U.zero:
                for j, y in enumerate(b):
                    conv[i + j] = U.add(conv[i + j], U.mul(x, y))
        E = self.eisenstein_coeffs
        for j in range(2 * e - 2, e - 1, -1):
            c = conv[j]
            if c != U.zero:
                # x^j = x^(j-e) * x^e with x^e = -(E_0 + ... + E_{e-1} x^{e-1})
                for i in range(e):
                    if E[i]:
                        conv[j - e + i] = U.sub(conv[j - e + i], U.scalar_mul(E[i], c))
        return tuple(conv[:e])

    def residue(self, a):
        return self.base.residue(a[0])

    def lift_residue(self, alpha):
        return tuple([self.base.lift_residue(alpha)] + [self.base.zero] * (self.e - 1))

    def visible_pi_valuation(self, a, k_eff: int) -> int | None:
        best: int | None = None
        for i, c in enumerate(a):
            v = self.base.visible_pi_valuation(c, k_eff)
            if v is None:
                continue
            val = self.e * v + i
            if best is None or val < best:
                best = val
        return best

    def mul_by_pi(self, a):
        U = self.base
        lead = a[-1]
        out = [U.zero] + list(a[:-1])
        if lead != U.zero:
            for i in range(self.e):
                pe = self._pi_e[i]
                if pe != U.zero:
                    out[i] = U.add(out[i], U.mul(lead, pe))
        return tuple(out)

    def mul_pi_pow(self, a, m: int):
        # pi^e = p*w, so split m = t*e + s and use the cheap scalar part
        t, s = divmod(m, self.e)
        if t:
            a = self.scalar_mul(self.p**t, a)
            wt = self._pow_unit(self._w, t)
            a = self.mul(a, wt)
        for _ in range(s):
            a = self.mul_by_pi(a)
        return a

    def _pow_unit(self, u, t: int):
        out = self.one
        base = u
        while t:
            if t & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            t >>= 1
        return out

    def div_pi_pow(self, a, m: int):
        """Divide by pi^m (requires pi-valuation >= m); costs ceil(m/e) digits."""
        e = self.e
        s_up = (e - m % e) % e
        t = (m + s_up) // e
        if s_up:
            a = self.mul_pi_pow(a, s_up)
        if t:
            a = self.mul(a, self._pow_unit(self._w_inv, t))
            U = self.base
            a = tuple(U.div_pi_pow(c, t) for c in a)
        return a

    def invert_unit(self, a):
        K = self.residue_field
        r = K.inv(self.residue(a))
        x = self.lift_residue(r)
        digits = 1
        target = self.pi_precision
        while digits < target:
            x = self.sub(self.scalar_mul(2, x), self.mul(a, self.mul(x, x)))
            digits *= 2
        return x

    def enumerate_elements(self) -> Iterator[tuple]:
        def rec(i: int, prefix: list):
            if i == self.e:
                yield tuple(prefix)
                return
            for c in self.base.enumerate_elements():
                prefix.append(c)
                yield from rec(i + 1, prefix)
                prefix.pop()

        yield from rec(0, [])


@lru_cache(maxsize=None)
def make_unramified(p: int, f: int, k: int) -> UnramifiedRing:
    """Model of the ring of integers of the degree-f unramified extension,
    truncated to k base digits."""
    if f * 1 > MAX_EXTENSION_DEGREE:
        raise ValueError(f"f exceeds supported maximum {MAX_EXTENSION_DEGREE}")
    return UnramifiedRing(p, f, k)


def make_eisenstein(
    base: UnramifiedRing,
    eisenstein: Sequence[int],
    k: int | None = None,
    disc_val: int | None = None,
) -> EisensteinRing:
    """Totally ramified layer over an unramified base ring.

    The discriminant valuation follows the tame formula (e-1)*f when p
    does not divide e; wild cases must supply it (the fixtures carry the
    classically known values)."""
    if k is not None and k != base.k:
        base = make_unramified(base.p, base.f, k)
    return EisensteinRing(base, eisenstein, disc_val)


def ring_from_descriptor(desc: "RingDescriptor | str", p: int, k: int) -> ExtensionRing:
    """Build a ring from a descriptor (or its text form) at precision k."""
    if isinstance(desc, str):
        desc = parse_descriptor(desc, p)
    if desc.e == 1:
        return make_unramified(desc.p, desc.f, k)
    base = make_unramified(desc.p, desc.f, k)
    return EisensteinRing(base, desc.eisenstein, desc.disc_val)

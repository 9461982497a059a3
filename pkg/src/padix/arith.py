"""Exact arithmetic in Z/p^k with explicit precision bookkeeping.

A value of Z_p truncated to k base-p digits is held as a ``PadicDigits``:
a non-negative integer below p^k together with the digit count k and the
prime base.  Every operation propagates the minimum known-digit count of
its inputs, so a result never claims more digits than its inputs justify.
Division is split in two: units are inverted with a modular inverse,
while powers of p are removed only through :func:`exact_div_pow`, which
spends precision explicitly.  This keeps the ring total and makes every
precision loss visible to callers (the root counter audits these losses
to certify its counts).

Values are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "PadicError",
    "BaseMismatchError",
    "PrecisionExhaustedError",
    "InexactDivisionError",
    "PrimeBase",
    "PadicDigits",
    "ValuationVerdict",
    "is_prime",
]


class PadicError(ValueError):
    """Base class for arithmetic contract violations."""


class BaseMismatchError(PadicError):
    """Operands live over different primes."""


class PrecisionExhaustedError(PadicError):
    """An operation would need more known digits than are available."""


class InexactDivisionError(PadicError):
    """Requested division by p^m does not divide the value exactly."""


# Deterministic Miller-Rabin witnesses, valid for all n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_MAX_PRIME = 1 << 31


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24 (we only need n < 2^31)."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeBase:
    """The prime p underlying a family of truncated p-adic values."""

    p: int

    def __post_init__(self) -> None:
        if not (2 <= self.p < _MAX_PRIME):
            raise PadicError(f"prime must satisfy 2 <= p < 2^31, got {self.p}")
        if not is_prime(self.p):
            raise PadicError(f"{self.p} is not prime")

    def __repr__(self) -> str:
        return f"PrimeBase({self.p})"


@dataclass(frozen=True)
class ValuationVerdict:
    """Either an exact valuation Finite(v), or AtLeast(k) when the value
    vanishes to the full known precision.

    ``Finite(v)`` certifies that p^v divides the value and p^(v+1) does
    not; ``AtLeast(k)`` only certifies divisibility by p^k.
    """

    finite: bool
    amount: int

    @classmethod
    def exactly(cls, v: int) -> "ValuationVerdict":
        return cls(True, v)

    @classmethod
    def at_least(cls, k: int) -> "ValuationVerdict":
        return cls(False, k)

    def __repr__(self) -> str:
        if self.finite:
            return f"Finite({self.amount})"
        return f"AtLeast({self.amount})"


class PadicDigits:
    """An element of Z/p^k: ``value`` in [0, p^k) with k known digits."""

    __slots__ = ("base", "known_digits", "value")

    def __init__(self, base: PrimeBase, known_digits: int, value: int):
        if known_digits < 1:
            raise PadicError("known_digits must be positive")
        self.base = base
        self.known_digits = known_digits
        self.value = value % (base.p ** known_digits)

    # -- helpers -----------------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.base.p ** self.known_digits

    def _check_same_base(self, other: "PadicDigits") -> None:
        if self.base.p != other.base.p:
            raise BaseMismatchError(
                f"mixed bases p={self.base.p} and p={other.base.p}"
            )

    def truncate(self, k: int) -> "PadicDigits":
        """Forget digits beyond the first k (k must not exceed what is known)."""
        if k > self.known_digits:
            raise PrecisionExhaustedError(
                f"cannot extend {self.known_digits} known digits to {k}"
            )
        return PadicDigits(self.base, k, self.value)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "PadicDigits") -> "PadicDigits":
        self._check_same_base(other)
        k = min(self.known_digits, other.known_digits)
        return PadicDigits(self.base, k, self.value + other.value)

    def __sub__(self, other: "PadicDigits") -> "PadicDigits":
        self._check_same_base(other)
        k = min(self.known_digits, other.known_digits)
        return PadicDigits(self.base, k, self.value - other.value)

    def __neg__(self) -> "PadicDigits":
        return PadicDigits(self.base, self.known_digits, -self.value)

    def __mul__(self, other: "PadicDigits") -> "PadicDigits":
        self._check_same_base(other)
        k = min(self.known_digits, other.known_digits)
        return PadicDigits(self.base, k, self.value * other.value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PadicDigits):
            return NotImplemented
        return (
            self.base.p == other.base.p
            and self.known_digits == other.known_digits
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.base.p, self.known_digits, self.value))

    def __repr__(self) -> str:
        return f"PadicDigits(p={self.base.p}, k={self.known_digits}, {self.value})"

    # -- valuation and division --------------------------------------------

    def valuation(self) -> ValuationVerdict:
        """p-adic valuation, certified only up to the known precision."""
        if self.value == 0:
            return ValuationVerdict.at_least(self.known_digits)
        v = 0
        x = self.value
        p = self.base.p
        while x % p == 0:
            x //= p
            v += 1
        return ValuationVerdict.exactly(v)

    def unit_inverse(self) -> "PadicDigits":
        """Inverse of a unit (valuation 0); full known precision is kept."""
        if self.value % self.base.p == 0:
            raise InexactDivisionError("only units can be inverted")
        return PadicDigits(
            self.base, self.known_digits, pow(self.value, -1, self.modulus)
        )

    def exact_div_pow(self, m: int) -> "PadicDigits":
        """Divide by p^m, spending m digits of precision.

        Requires v(value) >= m (a value that is 0 to full precision also
        qualifies, since divisibility by p^m is then visible).
        """
        if m < 0:
            raise PadicError("m must be non-negative")
        if m == 0:
            return self
        if m >= self.known_digits:
            raise PrecisionExhaustedError(
                f"dividing by p^{m} leaves no known digits (k={self.known_digits})"
            )
        q = self.base.p ** m
        if self.value % q != 0:
            raise InexactDivisionError(f"p^{m} does not divide {self.value}")
        return PadicDigits(self.base, self.known_digits - m, self.value // q)


def add(a: PadicDigits, b: PadicDigits) -> PadicDigits:
    return a + b


def mul(a: PadicDigits, b: PadicDigits) -> PadicDigits:
    return a * b


def valuation(a: PadicDigits) -> ValuationVerdict:
    return a.valuation()


def exact_div_pow(a: PadicDigits, m: int) -> PadicDigits:
    return a.exact_div_pow(m)

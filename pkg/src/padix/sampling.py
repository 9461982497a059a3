"""Reproducible Haar sampling of matrices and polynomials over Z/p^k.

Randomness comes from a counter-based generator (Philox, keyed by the
master seed and the sample index), so any digit is a pure function of
the address (sample, coefficient, digit): results do not depend on
evaluation order, worker count, or how much precision was requested.
Every coefficient always draws a fixed block of ``STREAM_DIGITS`` base-p
digits; requesting k digits reads a prefix of the block, which makes
precision escalation trivially coherent with the original sample.

Characteristic polynomials are computed by the Berkowitz vector
recurrences, which are division-free: Z/p^k has zero divisors, so
elimination-based methods do not apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arith import PadicDigits, PrimeBase

__all__ = [
    "STREAM_DIGITS",
    "DigitStream",
    "HaarMatrixSample",
    "HaarPolySample",
    "sample_matrix",
    "sample_poly",
    "escalate",
    "char_poly",
]

STREAM_DIGITS = 64  # digits drawn per coefficient; also the precision cap


class DigitStream:
    """Address-keyed uniform base-p digits: (sample, coeff, digit) -> digit."""

    def __init__(self, master_seed: int, p: int):
        if not 0 <= master_seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        self.master_seed = master_seed
        self.p = p

    def block(self, sample_index: int, n_coeffs: int) -> np.ndarray:
        """The (n_coeffs, STREAM_DIGITS) digit block of one sample."""
        bg = np.random.Philox(
            key=np.array([self.master_seed, sample_index], dtype=np.uint64)
        )
        gen = np.random.Generator(bg)
        flat = gen.integers(0, self.p, size=n_coeffs * STREAM_DIGITS, dtype=np.uint32)
        return flat.reshape(n_coeffs, STREAM_DIGITS)

    def digit(self, sample_index: int, coeff_index: int, digit_index: int) -> int:
        if digit_index >= STREAM_DIGITS:
            raise ValueError(f"digit index beyond stream depth {STREAM_DIGITS}")
        block = self.block(sample_index, coeff_index + 1)
        return int(block[coeff_index, digit_index])


def _values_from_block(block: np.ndarray, p: int, k: int) -> list[int]:
    out = []
    for row in block:
        acc = 0
        for t in range(k - 1, -1, -1):
            acc = acc * p + int(row[t])
        out.append(acc)
    return out


@dataclass(frozen=True, eq=False)
class _HaarSample:
    p: int
    k: int
    n: int
    seed: int
    index: int
    block: np.ndarray = field(repr=False)

    def coefficient_values(self, k: int | None = None) -> list[int]:
        """Coefficient integers mod p^k (prefix of each digit block)."""
        k = self.k if k is None else k
        if k > STREAM_DIGITS:
            raise ValueError(f"precision {k} exceeds stream depth {STREAM_DIGITS}")
        return _values_from_block(self.block, self.p, k)

    def with_precision(self, k: int) -> "_HaarSample":
        if k > STREAM_DIGITS:
            raise ValueError(f"precision {k} exceeds stream depth {STREAM_DIGITS}")
        return type(self)(self.p, k, self.n, self.seed, self.index, self.block)


class HaarMatrixSample(_HaarSample):
    """n x n Haar matrix over Z/p^k; entry (i, j) is coefficient i*n + j."""

    def entries(self) -> list[list[int]]:
        vals = self.coefficient_values()
        n = self.n
        return [vals[i * n : (i + 1) * n] for i in range(n)]

    def padic_entries(self) -> list[list[PadicDigits]]:
        base = PrimeBase(self.p)
        return [
            [PadicDigits(base, self.k, v) for v in row] for row in self.entries()
        ]


class HaarPolySample(_HaarSample):
    """Haar polynomial of formal degree n: coefficients a_0 .. a_n."""

    def coefficients(self) -> list[int]:
        return self.coefficient_values()

    def padic_coefficients(self) -> list[PadicDigits]:
        base = PrimeBase(self.p)
        return [PadicDigits(base, self.k, v) for v in self.coefficients()]


def sample_matrix(p: int, k: int, n: int, seed: int, index: int) -> HaarMatrixSample:
    """Uniform matrix over Mat_n(Z/p^k), reproducible from (seed, index)."""
    stream = DigitStream(seed, p)
    return HaarMatrixSample(p, k, n, seed, index, stream.block(index, n * n))


def sample_poly(p: int, k: int, n: int, seed: int, index: int) -> HaarPolySample:
    """Uniform polynomial with n+1 coefficients over Z/p^k."""
    stream = DigitStream(seed, p)
    return HaarPolySample(p, k, n, seed, index, stream.block(index, n + 1))


def escalate(sample: _HaarSample, k_new: int) -> _HaarSample:
    """Extend a sample to higher precision from the same digit stream."""
    if k_new < sample.k:
        raise ValueError("escalation cannot reduce precision")
    return sample.with_precision(k_new)


def char_poly(A: "HaarMatrixSample | list[list[int]]", p: int | None = None, k: int | None = None) -> list[int]:
    """Coefficients (low to high, monic) of det(x*I - A) mod p^k, computed
    division-free via the Berkowitz recurrences."""
    if isinstance(A, HaarMatrixSample):
        entries = A.entries()
        q = A.p**A.k
    else:
        if p is None or k is None:
            raise ValueError("plain matrices need p= and k=")
        entries = A
        q = p**k
    high_first = _berkowitz(entries, q)
    return high_first[::-1]


def _berkowitz(a: list[list[int]], q: int) -> list[int]:
    """Characteristic polynomial coefficients, highest degree first."""
    n = len(a)
    coeffs = [1]
    for r in range(1, n + 1):
        diag = a[r - 1][r - 1]
        row = a[r - 1][: r - 1]
        col = [a[i][r - 1] for i in range(r - 1)]
        t = [1, (-diag) % q]
        v = col
        for step in range(r - 1):
            dot = 0
            for x, y in zip(row, v):
                dot += x * y
            t.append((-dot) % q)
            if step < r - 2:
                v = [
                    sum(a[i][j] * v[j] for j in range(r - 1)) % q
                    for i in range(r - 1)
                ]
        # lower-triangular Toeplitz product: new[i] = sum_j t[i-j] * coeffs[j]
        new = [0] * (r + 1)
        for i in range(r + 1):
            acc = 0
            lo = max(0, i - len(t) + 1)
            for j in range(lo, min(i, r - 1) + 1):
                acc += t[i - j] * coeffs[j]
            new[i] = acc % q
        coeffs = new
    return coeffs

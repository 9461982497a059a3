"""Declarative Monte Carlo experiments with deterministic parallelism.

An :class:`ExperimentSpec` names a model (matrix or poly), the sampling
parameters, and a list of targets ``(ring descriptor, scope)``.  Scopes
select what is counted in the target extension:

* ``all``       every root in the extension (field for the polynomial
                model, ring of integers for the matrix model); this is
                the raw input of the Moebius inversion and carries no
                reference band.
* ``new``       roots generating exactly that extension, in the model's
                natural region (whole field for polynomials, integral
                for matrices).
* ``integral``  new roots restricted to the ring of integers.  For the
                matrix model this coincides with ``new`` (eigenvalues of
                integral matrices are integral).
* ``field``     new roots anywhere in the field; for the polynomial
                model this is an alias of ``new``.

Per-sample counts are pure functions of (seed, sample index), so the
sample range can be split across any number of worker processes and
merged in index order: the output is byte-identical for every worker
count.  A sample whose requested counts are Inconclusive is retried at
doubled precision up to ``k_max`` before being excluded; exclusions are
reported per row and capped by the check verb's inconclusive-rate policy.

Verdicts compare the exact-rational sample mean against a reference band
widened by three standard errors, entirely in rational arithmetic, so a
verdict can never be an artifact of floating point.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from multiprocessing import get_context
from typing import Iterable

from . import __version__
from .counting import (
    CountBudget,
    DEFAULT_BUDGET,
    RootCountResult,
    count_field_roots,
    count_integral_roots,
    mobius_combine,
    new_count_ramified_quadratic,
    unramified_count_data,
)
from .formulas import (
    FormulaBand,
    divisors,
    matrix_unramified_band,
    outside_un_bound,
    poly_not_unramified_upper,
    ramified_quadratic_poly_expectation,
    unramified_poly_band,
)
from .rings import RingDescriptor, parse_descriptor, ring_from_descriptor
from .sampling import STREAM_DIGITS, char_poly, sample_matrix, sample_poly

__all__ = [
    "ExperimentSpec",
    "EstimateRow",
    "ReportBundle",
    "run_experiment",
    "derive_outside_un",
    "write_report",
    "check_report",
    "load_report_rows",
    "CSV_HEADER",
    "SCOPES",
    "INCONCLUSIVE_RATE_CAP",
]

CSV_HEADER = [
    "model", "p", "n", "k", "target", "scope", "mean", "stderr",
    "n_eff", "n_inconclusive", "lower", "upper", "verdict", "seed",
]
SCOPES = ("all", "new", "integral", "field")
INCONCLUSIVE_RATE_CAP = Fraction(1, 1000)
OUTSIDE_TARGET = "outside-un"


@dataclass(frozen=True)
class ExperimentSpec:
    model: str
    p: int
    n: int
    k: int
    k_max: int
    samples: int
    seed: int
    targets: tuple[tuple[str, str], ...]
    budget: CountBudget = DEFAULT_BUDGET
    workers: int = 1
    paranoid: bool = False
    derive_outside: bool = False
    digest: bool = False

    def __post_init__(self) -> None:
        if self.model not in ("matrix", "poly"):
            raise ValueError("model must be 'matrix' or 'poly'")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not (1 <= self.k <= self.k_max <= STREAM_DIGITS):
            raise ValueError(f"need 1 <= k <= k_max <= {STREAM_DIGITS}")
        if not self.targets and not self.derive_outside:
            raise ValueError("no targets given")
        for text, scope in self.targets:
            if scope not in SCOPES:
                raise ValueError(f"unknown scope {scope!r}")
            desc = parse_descriptor(text, self.p)  # raises if unparseable
            if desc.e > 1 and scope == "new" and not (desc.e == 2 and desc.f == 1):
                raise ValueError(
                    "scope 'new' on ramified targets is supported for "
                    "quadratic (e=2, f=1) extensions only"
                )
            if desc.degree > self.n:
                raise ValueError(
                    f"target degree {desc.degree} exceeds model degree {self.n}"
                )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["targets"] = [list(t) for t in self.targets]
        d["budget"] = {
            "max_depth": self.budget.max_depth,
            "min_remaining_digits": self.budget.min_remaining_digits,
        }
        return d


@dataclass
class EstimateRow:
    target: str
    scope: str
    mean: float
    stderr: float
    n_eff: int
    n_inconclusive: int
    escalations: int
    lower: Fraction | None
    upper: Fraction | None
    verdict: str

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "scope": self.scope,
            "mean": self.mean,
            "stderr": self.stderr,
            "n_eff": self.n_eff,
            "n_inconclusive": self.n_inconclusive,
            "escalations": self.escalations,
            "lower": None if self.lower is None else str(self.lower),
            "upper": None if self.upper is None else str(self.upper),
            "lower_decimal": None if self.lower is None else float(self.lower),
            "upper_decimal": None if self.upper is None else float(self.upper),
            "verdict": self.verdict,
        }


@dataclass
class ReportBundle:
    spec: dict
    rows: list[EstimateRow]
    wall_time_s: float
    version: str
    samples_digest: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema": "padix-report-v1",
            "version": self.version,
            "spec": self.spec,
            "wall_time_s": self.wall_time_s,
            "samples_digest": self.samples_digest,
            "rows": [r.to_dict() for r in self.rows],
        }


# ---------------------------------------------------------------------------
# Execution plan and per-sample evaluation.
# ---------------------------------------------------------------------------


@dataclass
class _Plan:
    """Preprocessed spec: which degrees and rings every sample must count."""

    spec: ExperimentSpec
    unram_targets: list[tuple[str, str, int]]       # (text, scope, degree)
    ram_targets: list[tuple[str, str, RingDescriptor]]
    checked_degrees: set[int]                       # escalate if inconclusive
    r_max: int
    slots: list[tuple[str, str]]                    # output order

    @classmethod
    def from_spec(cls, spec: ExperimentSpec) -> "_Plan":
        unram: list[tuple[str, str, int]] = []
        ram: list[tuple[str, str, RingDescriptor]] = []
        for text, scope in spec.targets:
            desc = parse_descriptor(text, spec.p)
            if desc.e == 1:
                unram.append((text, scope, desc.f))
            else:
                ram.append((text, scope, desc))
        needed: set[int] = set()
        for _, scope, d in unram:
            if scope == "all":
                needed.add(d)
            else:
                needed.update(divisors(d))
        if spec.derive_outside or spec.paranoid:
            for r in range(1, spec.n + 1):
                needed.update(divisors(r))
        r_max = max(needed, default=0)
        slots = [(text, scope) for text, scope, _ in unram]
        slots += [(text, scope) for text, scope, _ in ram]
        if spec.derive_outside:
            slots.append((OUTSIDE_TARGET, "derived"))
        return cls(
            spec=spec,
            unram_targets=unram,
            ram_targets=ram,
            checked_degrees=needed,
            r_max=r_max,
            slots=slots,
        )


def _eval_sample(plan: _Plan, index: int) -> tuple[tuple[int | None, ...], int]:
    """Counts for one sample in slot order, plus the escalation count."""
    spec = plan.spec
    k = spec.k
    escalations = 0
    while True:
        values, decisive = _eval_sample_at(plan, index, k)
        if decisive or k >= spec.k_max:
            return tuple(values), escalations
        k = min(2 * k, spec.k_max)
        escalations += 1


def _eval_sample_at(plan: _Plan, index: int, k: int) -> tuple[list[int | None], bool]:
    spec = plan.spec
    if spec.model == "matrix":
        sample = sample_matrix(spec.p, k, spec.n, spec.seed, index)
        coeffs = char_poly(sample)
    else:
        sample = sample_poly(spec.p, k, spec.n, spec.seed, index)
        coeffs = sample.coefficients()

    decisive = True
    integral_all: dict[int, RootCountResult] = {}
    field_all: dict[int, RootCountResult] | None = None
    if plan.r_max:
        integral_all, field_all = unramified_count_data(
            coeffs, k, spec.model, plan.r_max, spec.p, k, spec.budget
        )
        natural = integral_all if spec.model == "matrix" else field_all
        for d in plan.checked_degrees:
            if not natural[d].is_exact:
                decisive = False
        if spec.model == "poly":
            for _, scope, d in plan.unram_targets:
                if scope == "integral":
                    for dd in divisors(d):
                        if not integral_all[dd].is_exact:
                            decisive = False

    values: list[int | None] = []
    natural = integral_all if spec.model == "matrix" else field_all
    for _, scope, d in plan.unram_targets:
        if scope == "all":
            res = natural[d]
        elif scope == "integral" and spec.model == "poly":
            res = mobius_combine(integral_all, d)
        else:  # new / field / matrix-integral
            res = mobius_combine(natural, d)
        values.append(res.count)

    ram_new: list[int] = []
    for _, scope, desc in plan.ram_targets:
        ring = ring_from_descriptor(desc, spec.p, k)
        if scope == "new":
            res = new_count_ramified_quadratic(coeffs, ring, spec.budget, precision=k)
            if res.is_exact:
                ram_new.append(res.count)
        elif scope == "integral" or spec.model == "matrix":
            res = count_integral_roots(coeffs, ring, spec.budget, precision=k)
        else:  # field / all, polynomial model
            res = count_field_roots(coeffs, ring, spec.budget, precision=k)
        if not res.is_exact:
            decisive = False
        values.append(res.count)

    if spec.derive_outside:
        news = [mobius_combine(natural, r) for r in range(1, spec.n + 1)]
        if all(r.is_exact for r in news):
            values.append(spec.n - sum(r.count for r in news))
        else:
            values.append(None)
            decisive = False

    if spec.paranoid and plan.r_max:
        _paranoid_checks(plan, index, natural, spec.n, ram_new)

    return values, decisive


def _paranoid_checks(plan, index, natural, n, ram_new=()) -> None:
    news = {}
    for r in sorted(plan.checked_degrees):
        if not natural[r].is_exact:
            return
        news[r] = mobius_combine(natural, r)
    for r, res in news.items():
        if not res.is_exact:
            return
        back = sum(news[d].count for d in divisors(r) if d in news)
        if set(divisors(r)) <= set(news):
            if back != natural[r].count:
                raise AssertionError(
                    f"sample {index}: Moebius identity failed at degree {r}: "
                    f"sum of new-counts {back} != all-count {natural[r].count}"
                )
        if res.count < 0:
            raise AssertionError(
                f"sample {index}: negative new-count {res.count} at degree {r}"
            )
    # measured targets are disjoint root classes: unramified new-counts plus
    # any ramified new-counts cannot exceed the total root count
    total = sum(res.count for res in news.values()) + sum(ram_new)
    if total > n:
        raise AssertionError(
            f"sample {index}: counted {total} roots, exceeding degree {n}"
        )


def _worker(args: tuple) -> list[tuple[tuple[int | None, ...], int]]:
    spec_dict, lo, hi = args
    spec = _spec_from_dict(spec_dict)
    plan = _Plan.from_spec(spec)
    return [_eval_sample(plan, i) for i in range(lo, hi)]


def _spec_from_dict(d: dict) -> ExperimentSpec:
    budget = d.get("budget") or {}
    return ExperimentSpec(
        model=d["model"],
        p=d["p"],
        n=d["n"],
        k=d["k"],
        k_max=d["k_max"],
        samples=d["samples"],
        seed=d["seed"],
        targets=tuple((t[0], t[1]) for t in d["targets"]),
        budget=CountBudget(
            max_depth=budget.get("max_depth", DEFAULT_BUDGET.max_depth),
            min_remaining_digits=budget.get(
                "min_remaining_digits", DEFAULT_BUDGET.min_remaining_digits
            ),
        ),
        workers=d.get("workers", 1),
        paranoid=d.get("paranoid", False),
        derive_outside=d.get("derive_outside", False),
        digest=d.get("digest", False),
    )


# ---------------------------------------------------------------------------
# Bands and verdicts.
# ---------------------------------------------------------------------------


def _band_for(spec: ExperimentSpec, target: str, scope: str) -> FormulaBand | None:
    if target == OUTSIDE_TARGET:
        return FormulaBand(
            center=outside_un_bound(spec.model, spec.p) / 2,
            lower=Fraction(0),
            upper=outside_un_bound(spec.model, spec.p),
            provenance="outside unramified bound",
        )
    desc = parse_descriptor(target, spec.p)
    if scope == "all":
        return None
    if desc.e == 1:
        r = desc.f
        if spec.model == "poly":
            if scope in ("new", "field"):
                return unramified_poly_band(spec.p, r, spec.n)
            return None  # integral region: no reference band
        return matrix_unramified_band(spec.p, r, spec.n)
    # ramified target
    disc_norm = Fraction(1, spec.p**desc.disc_val)
    if scope != "new":
        return None
    if spec.model == "poly":
        if desc.e == 2 and desc.f == 1 and spec.n >= 3:
            v = ramified_quadratic_poly_expectation(spec.p, disc_norm)
            return FormulaBand(v, v, v, provenance="ramified quadratic exact value")
        up = poly_not_unramified_upper(spec.p, desc.f, disc_norm)
        return FormulaBand(up / 2, Fraction(0), up, provenance="ramified upper bound")
    # matrix model: integral upper bound with the discriminant factor
    product = Fraction(1)
    for i in range(desc.degree):
        product *= 1 - Fraction(1, spec.p ** (spec.n - i))
    up = disc_norm / (1 - Fraction(1, spec.p**desc.f)) * product
    return FormulaBand(up / 2, Fraction(0), up, provenance="matrix ramified upper bound")


def _exceeds(diff: Fraction, variance: Fraction, mult: int = 3) -> bool:
    """diff > mult * sqrt(variance), exactly."""
    if diff <= 0:
        return False
    return diff * diff > mult * mult * variance


def _aggregate(
    spec: ExperimentSpec,
    target: str,
    scope: str,
    counts: Iterable[int | None],
    escalations: int,
) -> EstimateRow:
    s1 = 0
    s2 = 0
    n_eff = 0
    n_inc = 0
    for c in counts:
        if c is None:
            n_inc += 1
        else:
            n_eff += 1
            s1 += c
            s2 += c * c
    band = _band_for(spec, target, scope)
    if n_eff == 0:
        return EstimateRow(
            target, scope, float("nan"), float("nan"), 0, n_inc, escalations,
            band.lower if band else None, band.upper if band else None, "no-band",
        )
    mean = Fraction(s1, n_eff)
    if n_eff > 1:
        var_num = Fraction(s2) - Fraction(s1 * s1, n_eff)
        sample_var = var_num / (n_eff - 1)
        stderr_sq = sample_var / n_eff
    else:
        stderr_sq = Fraction(0)
    if band is None:
        verdict = "no-band"
        lower = upper = None
    else:
        lower, upper = band.lower, band.upper
        if _exceeds(mean - upper, stderr_sq):
            verdict = "above"
        elif _exceeds(lower - mean, stderr_sq):
            verdict = "below"
        else:
            verdict = "within"
    stderr_f = float(stderr_sq) ** 0.5
    return EstimateRow(
        target, scope, s1 / n_eff, stderr_f, n_eff, n_inc, escalations,
        lower, upper, verdict,
    )


# ---------------------------------------------------------------------------
# The runner.
# ---------------------------------------------------------------------------


def run_experiment(spec: ExperimentSpec) -> ReportBundle:
    t0 = time.perf_counter()
    plan = _Plan.from_spec(spec)
    n = spec.samples
    workers = max(1, spec.workers)
    spec_dict = spec.to_dict()
    if workers == 1 or n < 4 * workers:
        records = _worker((spec_dict, 0, n))
    else:
        chunk = max(1, -(-n // (workers * 4)))
        jobs = [(spec_dict, lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        ctx = get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_worker, jobs)
        records = [rec for part in parts for rec in part]

    digest = None
    if spec.digest:
        h = hashlib.blake2b(digest_size=16)
        for rec, esc in records:
            h.update(repr((rec, esc)).encode())
        digest = h.hexdigest()

    total_esc = sum(esc for _, esc in records)
    rows = []
    for j, (target, scope) in enumerate(plan.slots):
        counts = (rec[j] for rec, _ in records)
        rows.append(_aggregate(spec, target, scope, counts, total_esc))
    return ReportBundle(
        spec=spec_dict,
        rows=rows,
        wall_time_s=time.perf_counter() - t0,
        version=__version__,
        samples_digest=digest,
    )


def derive_outside_un(spec: ExperimentSpec) -> EstimateRow:
    """Run the experiment with per-sample new-counts over degrees 1..n and
    aggregate the derived outside-unramified count n - sum_r new(r)."""
    spec2 = ExperimentSpec(
        model=spec.model, p=spec.p, n=spec.n, k=spec.k, k_max=spec.k_max,
        samples=spec.samples, seed=spec.seed, targets=spec.targets,
        budget=spec.budget, workers=spec.workers, paranoid=spec.paranoid,
        derive_outside=True, digest=False,
    )
    bundle = run_experiment(spec2)
    for row in bundle.rows:
        if row.target == OUTSIDE_TARGET:
            return row
    raise AssertionError("derived row missing")


# ---------------------------------------------------------------------------
# Reports: write, load, check.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    """Fixed-width scientific form with 15 significant digits."""
    return f"{x:.14e}"


def write_report(bundle: ReportBundle, fmt: str, path: str) -> None:
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(bundle.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        return
    if fmt != "csv":
        raise ValueError("format must be 'csv' or 'json'")
    spec = bundle.spec
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in bundle.rows:
            writer.writerow(
                [
                    spec["model"], spec["p"], spec["n"], spec["k"],
                    row.target, row.scope,
                    _fmt(row.mean), _fmt(row.stderr),
                    row.n_eff, row.n_inconclusive,
                    "" if row.lower is None else _fmt(float(row.lower)),
                    "" if row.upper is None else _fmt(float(row.upper)),
                    row.verdict, spec["seed"],
                ]
            )


def load_report_rows(path: str) -> list[dict]:
    """Rows as dicts with floats; accepts both report formats."""
    with open(path) as fh:
        head = fh.read(1)
        fh.seek(0)
        if head == "{":
            data = json.load(fh)
            out = []
            for r in data["rows"]:
                out.append(
                    {
                        "target": r["target"],
                        "scope": r["scope"],
                        "mean": float(r["mean"]),
                        "stderr": float(r["stderr"]),
                        "n_eff": int(r["n_eff"]),
                        "n_inconclusive": int(r["n_inconclusive"]),
                        "lower": None if r["lower_decimal"] is None else float(r["lower_decimal"]),
                        "upper": None if r["upper_decimal"] is None else float(r["upper_decimal"]),
                        "verdict": r["verdict"],
                    }
                )
            return out
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        out = []
        for r in reader:
            out.append(
                {
                    "target": r["target"],
                    "scope": r["scope"],
                    "mean": float(r["mean"]),
                    "stderr": float(r["stderr"]),
                    "n_eff": int(r["n_eff"]),
                    "n_inconclusive": int(r["n_inconclusive"]),
                    "lower": float(r["lower"]) if r["lower"] else None,
                    "upper": float(r["upper"]) if r["upper"] else None,
                    "verdict": r["verdict"],
                }
            )
        return out


def check_report(path: str, rate_cap: Fraction = INCONCLUSIVE_RATE_CAP) -> tuple[int, list[str]]:
    """Re-evaluate verdicts: 0 all within/no-band, 1 band violation,
    3 inconclusive rate above the cap."""
    rows = load_report_rows(path)
    violations = []
    rate_exceeded = []
    for r in rows:
        label = f"{r['target']}@{r['scope']}"
        if r["lower"] is not None and r["n_eff"] > 0:
            tol = 3 * r["stderr"]
            if r["mean"] > r["upper"] + tol:
                violations.append(f"{label}: mean {r['mean']:.6g} above {r['upper']:.6g} + 3se")
            elif r["mean"] < r["lower"] - tol:
                violations.append(f"{label}: mean {r['mean']:.6g} below {r['lower']:.6g} - 3se")
        total = r["n_eff"] + r["n_inconclusive"]
        if total and Fraction(r["n_inconclusive"], total) > rate_cap:
            rate_exceeded.append(
                f"{label}: inconclusive rate {r['n_inconclusive']}/{total} above cap"
            )
    if violations:
        return 1, violations
    if rate_exceeded:
        return 3, rate_exceeded
    return 0, []


def default_workers() -> int:
    env = os.environ.get("PADIX_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1

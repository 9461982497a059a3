"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

These are Monte Carlo runs at the prescribed sample sizes plus exact
enumeration checks, so the module takes several minutes; run it with
``pytest tests/test_acceptance.py -v -s`` to watch the lines appear.
"""

import filecmp
import math
import random
from fractions import Fraction

from padix.counting import count_field_roots, count_integral_roots
from padix.formulas import (
    divisors,
    generator_count,
    serre_mass,
    unramified_poly_band,
    outside_un_bound,
)
from padix.harness import ExperimentSpec, default_workers, run_experiment, write_report
from padix.oracle import (
    det_singular_census,
    exact_linear_root_prob,
    generator_census,
    residue_root_census,
)
from padix.rings import make_eisenstein, make_unramified
from padix.sampling import escalate, sample_poly

WORKERS = default_workers()


def _verdict(ok: bool, num: int, text: str) -> None:
    line = f"ACCEPTANCE {num:02d}: {'PASS' if ok else 'FAIL'} - {text}"
    print(line)
    assert ok, line


def _mc(model, p, n, k, samples, seed, targets, **kw):
    spec = ExperimentSpec(
        model=model, p=p, n=n, k=k, k_max=64, samples=samples, seed=seed,
        targets=targets, workers=WORKERS, **kw,
    )
    return run_experiment(spec)


def test_criterion_01_det_lemma_census():
    cases = [(2, n, r) for n in (2, 3, 4) for r in range(2, n + 1)] + [(3, 2, 2)]
    all_ok = True
    for p, n, r in cases:
        rep = det_singular_census(p, n, r=r)
        all_ok &= rep.satisfied
        if (p, n, r) == (2, 2, 2):
            all_ok &= rep.probability == Fraction(1, 8) == rep.bound
            all_ok &= rep.hit_count == 2 and rep.total_cases == 16
    _verdict(
        all_ok, 1,
        f"determinant census: probability <= bound on {len(cases)} cases, "
        "with exact equality at (p=2, n=2, r=2)",
    )


def test_criterion_02_generator_counts():
    ok = True
    for p in (2, 3, 5):
        r_cap = min(8, int(math.log(2**20, p)))
        for r in range(1, r_cap + 1):
            ok &= generator_census(p, r) == generator_count(p, r)
    _verdict(ok, 2, "generator censuses equal the closed form for p in {2,3,5}, r <= 8")


def test_criterion_03_mean_one_matrix():
    bundle = _mc("matrix", 2, 5, 16, 200_000, 31337, (("unram:1", "integral"),))
    row = bundle.rows[0]
    ok = abs(row.mean - 1.0) <= 3 * row.stderr and row.stderr < 0.01
    rate_ok = row.n_inconclusive <= 0.001 * 200_000
    _verdict(
        ok and rate_ok, 3,
        f"matrix p=2 n=5: mean rational-eigenvalue count {row.mean:.5f} "
        f"within 3*{row.stderr:.5f} of 1 (inconclusive {row.n_inconclusive})",
    )


def test_criterion_04_unramified_poly_band():
    bundle = _mc("poly", 3, 3, 16, 100_000, 777, (("unram:2", "new"),))
    row = bundle.rows[0]
    band = unramified_poly_band(3, 2, 3)
    ok = row.verdict == "within"
    _verdict(
        ok, 4,
        f"poly p=3 n=3 new-in-degree-2 mean {row.mean:.4f} inside "
        f"[{float(band.lower):.4f}, {float(band.upper):.4f}] widened by 3se",
    )


def test_criterion_05_stabilization():
    rows = {}
    for n in (3, 6):
        bundle = _mc("poly", 3, n, 16, 100_000, 424242, (("unram:2", "new"),))
        rows[n] = bundle.rows[0]
    diff = abs(rows[3].mean - rows[6].mean)
    combined = math.sqrt(rows[3].stderr ** 2 + rows[6].stderr ** 2)
    ok = diff <= 3 * combined
    _verdict(
        ok, 5,
        f"stabilization: means at n=3 and n=6 differ by {diff:.5f} "
        f"<= 3*{combined:.5f}",
    )


def test_criterion_06_ramified_quadratic_exact():
    bundle = _mc("poly", 3, 3, 16, 200_000, 99991, (("eis:2:1:-3,0,1", "new"),))
    row = bundle.rows[0]
    target = 30 / 121
    ok = abs(row.mean - target) <= 3 * row.stderr and row.verdict == "within"
    _verdict(
        ok, 6,
        f"ramified quadratic: mean {row.mean:.5f} within 3*{row.stderr:.5f} "
        f"of 30/121 = {target:.5f}",
    )


def test_criterion_07_matrix_unramified_bands():
    targets = tuple((f"unram:{r}", "integral") for r in range(1, 7))
    bundle = _mc("matrix", 3, 12, 24, 20_000, 5150, targets)
    ok = all(row.verdict == "within" for row in bundle.rows)
    detail = ", ".join(f"r={i+1}:{row.mean:.4f}" for i, row in enumerate(bundle.rows))
    _verdict(ok, 7, f"matrix p=3 n=12 bands hold for r=1..6 ({detail})")


def test_criterion_08_outside_unramified_bounds():
    results = {}
    for model, n, samples in (("poly", 8, 40_000), ("matrix", 8, 20_000)):
        bundle = _mc(model, 3, n, 16, samples, 2718, (), derive_outside=True)
        results[model] = bundle.rows[-1]
    poly_row, matrix_row = results["poly"], results["matrix"]
    poly_ok = (
        poly_row.mean > 0
        and poly_row.mean <= float(outside_un_bound("poly", 3)) + 3 * poly_row.stderr
        and poly_row.mean >= 30 / 121 - 3 * poly_row.stderr
    )
    matrix_ok = (
        matrix_row.mean > 0
        and matrix_row.mean
        <= float(outside_un_bound("matrix", 3)) + 3 * matrix_row.stderr
    )
    _verdict(
        poly_ok and matrix_ok, 8,
        f"outside-unramified means: poly {poly_row.mean:.4f} in (30/121 - 3se, 9/4 + 3se], "
        f"matrix {matrix_row.mean:.4f} in (0, 27/8 + 3se]",
    )


def test_criterion_09_per_sample_invariants():
    targets = tuple((f"unram:{r}", s) for r in (1, 2, 3, 4, 6) for s in ("all", "new"))
    ok = True
    for p in (2, 3):
        for model in ("poly", "matrix"):
            bundle = _mc(model, p, 6, 16, 10_000, 1000 + p, targets, paranoid=True)
            for row in bundle.rows:
                ok &= row.n_eff + row.n_inconclusive == 10_000
    _verdict(
        ok, 9,
        "paranoid runs (10^4 samples, p in {2,3}, both models) completed with "
        "zero Moebius/total violations",
    )


def test_criterion_10_determinism_and_certificates(tmp_path):
    # byte-identical reports across 1/4/8 workers
    paths = []
    for workers in (1, 4, 8):
        spec = ExperimentSpec(
            model="poly", p=3, n=3, k=8, k_max=64, samples=400, seed=314,
            targets=(("unram:1", "new"), ("unram:2", "new")), workers=workers,
        )
        path = tmp_path / f"w{workers}.csv"
        write_report(run_experiment(spec), "csv", str(path))
        paths.append(str(path))
    same = filecmp.cmp(paths[0], paths[1], shallow=False) and filecmp.cmp(
        paths[0], paths[2], shallow=False
    )

    # 10^3 exact results stable under precision escalation to 2k
    stable = True
    checked_escalation = 0
    i = 0
    while checked_escalation < 1000:
        s = sample_poly(3, 8, 4, 161803, i)
        i += 1
        res = count_field_roots(s.coefficients(), make_unramified(3, 1, 8), precision=8)
        if not res.is_exact:
            continue
        s2 = escalate(s, 16)
        res2 = count_field_roots(
            s2.coefficients(), make_unramified(3, 1, 16), precision=16
        )
        stable &= res2.is_exact and res2.count == res.count
        checked_escalation += 1

    # 10^3 root-counter vs residue-census agreements
    rng = random.Random(27182818)
    rings = []
    for _ in range(800):
        p = rng.choice([2, 3])
        k = rng.choice([3, 4, 5])
        rings.append((make_unramified(p, 1, k), p, k))
    for _ in range(100):
        rings.append((make_unramified(3, 2, rng.choice([2, 3])), 3, None))
    eis = make_eisenstein(make_unramified(3, 1, 3), [-3, 0, 1])
    for _ in range(100):
        rings.append((eis, 3, 3))
    agreements = 0
    agree_ok = True
    examined = 0
    while agreements < 1000 and examined < 4000:
        ring, p, _ = rings[examined % len(rings)]
        examined += 1
        deg = rng.choice([1, 2, 3, 4])
        coeffs = [rng.randrange(ring.modulus_int) for _ in range(deg + 1)]
        counter = count_integral_roots(coeffs, ring, precision=ring.k)
        census = residue_root_census(coeffs, ring, precision=ring.k)
        if counter.is_exact and census.decisive:
            agree_ok &= counter.count == census.count
            agreements += 1
    _verdict(
        same and stable and agree_ok and agreements >= 1000, 10,
        f"byte-identical CSV across 1/4/8 workers; {checked_escalation} exact counts "
        f"unchanged after escalation; {agreements} census agreements",
    )


def test_criterion_11_formula_cross_checks():
    ok = True
    for p in (2, 3, 5, 7):
        ok &= unramified_poly_band(p, 1, 1).center == exact_linear_root_prob(p)
    for p in (2, 3, 5):
        for r in range(1, 13):
            ok &= sum(generator_count(p, d) for d in divisors(r)) == p**r
    # the six ramified quadratic extensions of Q_2: discriminant valuations
    # 2, 2, 3, 3, 3, 3 (classical census)
    fixture = 2 * Fraction(1, 4) + 4 * Fraction(1, 8)
    ok &= fixture == serre_mass(2, 2, 1) == 1
    _verdict(
        ok, 11,
        "band center = exact degree-1 root probability; sum of generator "
        "counts over divisors = p^r (r <= 12); quadratic mass fixture = 1",
    )

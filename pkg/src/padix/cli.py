"""Command line interface.

Verbs:
  mc        run a Monte Carlo experiment and write a CSV/JSON report
  formulas  print any named closed-form quantity, exact and decimal
  oracle    exhaustive censuses (det-census, gen-census, root-census)
  check     re-evaluate a report's verdicts; exit code tells the outcome
  report    pretty-print a report file

Exit codes: 0 ok, 1 band violation, 2 usage error, 3 inconclusive-rate
exceeded.  Seeds are accepted in decimal or 0x-hex.  Flag values override
the TOML config file (``--config``), which overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, formulas as fm
from .counting import CountBudget, DEFAULT_BUDGET, count_integral_roots
from .harness import (
    ExperimentSpec,
    check_report,
    default_workers,
    load_report_rows,
    run_experiment,
    write_report,
)
from .oracle import det_singular_census, generator_census, residue_root_census
from .rings import ring_from_descriptor

USAGE_ERROR = 2


def _parse_seed(text: str) -> int:
    return int(text, 0)


def _parse_targets(text: str) -> tuple[tuple[str, str], ...]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "@" in part:
            desc, scope = part.rsplit("@", 1)
        else:
            desc, scope = part, "new"
        out.append((desc.strip(), scope.strip()))
    return tuple(out)


# ---------------------------------------------------------------------------
# formulas registry: name -> (argument names, callable)
# ---------------------------------------------------------------------------


def _frac(x: str) -> Fraction:
    return Fraction(x)

FORMULA_REGISTRY = {
    "mobius": (("n",), lambda n: fm.mobius(int(n))),
    "divisor-count": (("n",), lambda n: fm.divisor_count(int(n))),
    "generator-count": (("p", "r"), lambda p, r: fm.generator_count(int(p), int(r))),
    "q-pochhammer": (
        ("p", "m", "[digits]"),
        lambda p, m, digits="15": fm.q_pochhammer_tail(int(p), int(m), int(digits)),
    ),
    "matrix-degree-constant": (
        ("p", "[digits]"),
        lambda p, digits="12": fm.matrix_degree_constant(int(p), int(digits)),
    ),
    "poly-degree-constant": (("p",), lambda p: fm.poly_degree_constant(int(p))),
    "outside-un-bound": (
        ("model", "p"),
        lambda model, p: fm.outside_un_bound(model, int(p)),
    ),
    "serre-mass": (
        ("p", "e", "f"),
        lambda p, e, f: fm.serre_mass(int(p), int(e), int(f)),
    ),
    "ramified-quadratic-expectation": (
        ("p", "[disc_norm]"),
        lambda p, disc_norm=None: fm.ramified_quadratic_poly_expectation(
            int(p), None if disc_norm is None else _frac(disc_norm)
        ),
    ),
    "unramified-poly-band": (
        ("p", "r", "n"),
        lambda p, r, n: fm.unramified_poly_band(int(p), int(r), int(n)),
    ),
    "poly-not-unramified-upper": (
        ("p", "f", "disc_norm"),
        lambda p, f, d: fm.poly_not_unramified_upper(int(p), int(f), _frac(d)),
    ),
    "matrix-unramified-band": (
        ("p", "r", "n"),
        lambda p, r, n: fm.matrix_unramified_band(int(p), int(r), int(n)),
    ),
    "matrix-fixed-extension-band": (
        ("p", "e", "f", "disc_val"),
        lambda p, e, f, d: fm.matrix_fixed_extension_band(int(p), int(e), int(f), int(d)),
    ),
    "orbital-ratio-bound": (
        ("p", "d"),
        lambda p, d: fm.orbital_ratio_bound(int(p), int(d)),
    ),
    "gaussian-binomial": (
        ("n", "r", "p"),
        lambda n, r, p: fm.gaussian_binomial(int(n), int(r), int(p)),
    ),
    "gl-order": (("p", "r"), lambda p, r: fm.gl_order(int(p), int(r))),
    "det-singular-prob-bound": (
        ("p", "n", "r"),
        lambda p, n, r: fm.det_singular_prob_bound(int(p), int(n), int(r)),
    ),
}


def _formula_payload(name: str, args: list[str], value) -> dict:
    payload: dict = {"name": name, "args": args}
    if isinstance(value, fm.FormulaBand):
        payload["center"] = str(value.center)
        payload["lower"] = str(value.lower)
        payload["upper"] = str(value.upper)
        payload["center_decimal"] = fm.fraction_to_decimal_str(value.center)
        payload["lower_decimal"] = fm.fraction_to_decimal_str(value.lower)
        payload["upper_decimal"] = fm.fraction_to_decimal_str(value.upper)
    elif isinstance(value, fm.CertifiedValue):
        payload["value"] = str(value.value)
        payload["value_decimal"] = fm.fraction_to_decimal_str(value.value)
        payload["error_bound"] = fm.fraction_to_decimal_str(value.error_bound, 3)
    elif isinstance(value, Fraction):
        payload["exact"] = str(value)
        payload["decimal"] = fm.fraction_to_decimal_str(value)
    else:
        payload["exact"] = value
    return payload


def _cmd_formulas(args: argparse.Namespace) -> int:
    name = args.name
    if name not in FORMULA_REGISTRY:
        known = ", ".join(sorted(FORMULA_REGISTRY))
        print(f"unknown quantity {name!r}; known: {known}", file=sys.stderr)
        return USAGE_ERROR
    params, fn = FORMULA_REGISTRY[name]
    required = [q for q in params if not q.startswith("[")]
    if len(args.args) < len(required) or len(args.args) > len(params):
        print(f"usage: padix formulas {name} {' '.join(params)}", file=sys.stderr)
        return USAGE_ERROR
    try:
        value = fn(*args.args)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    payload = _formula_payload(name, args.args, value)
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        body = {k: v for k, v in payload.items() if k not in ("name", "args")}
        pieces = ", ".join(f"{k}={v}" for k, v in body.items())
        print(f"{name}({', '.join(args.args)}): {pieces}")
    return 0


# ---------------------------------------------------------------------------
# oracle verbs
# ---------------------------------------------------------------------------


def _cmd_oracle(args: argparse.Namespace) -> int:
    if args.verb == "det-census":
        z = [int(c) for c in args.z.split(",")] if args.z else None
        rep = det_singular_census(args.p, args.n, z_coeffs=z, r=args.r)
        print(json.dumps(rep.to_dict(), sort_keys=True))
        return 0
    if args.verb == "gen-census":
        count = generator_census(args.p, args.r)
        expected = fm.generator_count(args.p, args.r)
        print(
            json.dumps(
                {"p": args.p, "r": args.r, "count": count,
                 "expected": expected, "match": count == expected},
                sort_keys=True,
            )
        )
        return 0
    if args.verb == "root-census":
        coeffs = [int(c) for c in args.coeffs.split(",")]
        ring = ring_from_descriptor(args.ring, args.p, args.precision)
        census = residue_root_census(coeffs, ring, precision=args.precision)
        counter = count_integral_roots(coeffs, ring, precision=args.precision)
        print(
            json.dumps(
                {
                    "ring": args.ring,
                    "census_count": census.count,
                    "census_decisive": census.decisive,
                    "uncertified_residues": census.uncertified,
                    "counter": None if not counter.is_exact else counter.count,
                    "counter_status": "exact" if counter.is_exact else counter.reason.value,
                },
                sort_keys=True,
            )
        )
        return 0
    print(f"unknown oracle verb {args.verb}", file=sys.stderr)
    return USAGE_ERROR


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------

_MC_DEFAULTS = {
    "model": None,
    "p": None,
    "n": None,
    "precision": 16,
    "precision_max": 64,
    "samples": 10000,
    "seed": 1,
    "targets": "",
    "workers": None,
    "format": "csv",
    "out": None,
    "paranoid": False,
    "derive_outside": False,
    "digest": False,
    "budget_depth": DEFAULT_BUDGET.max_depth,
    "budget_min_digits": DEFAULT_BUDGET.min_remaining_digits,
}


def _cmd_mc(args: argparse.Namespace) -> int:
    settings = dict(_MC_DEFAULTS)
    if args.config:
        with open(args.config, "rb") as fh:
            cfg = tomllib.load(fh)
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if key not in settings:
                print(f"unknown config key {key!r}", file=sys.stderr)
                return USAGE_ERROR
            if key == "targets" and isinstance(value, list):
                value = ";".join(value)
            settings[key] = value
    for key in settings:
        cli_val = getattr(args, key, None)
        if cli_val is not None and cli_val is not False:
            settings[key] = cli_val
    missing = [k for k in ("model", "p", "n") if settings[k] is None]
    if missing:
        print(f"missing required settings: {', '.join(missing)}", file=sys.stderr)
        return USAGE_ERROR
    seed = settings["seed"]
    if isinstance(seed, str):
        seed = _parse_seed(seed)
    workers = settings["workers"]
    if workers is None:
        workers = default_workers()
    try:
        spec = ExperimentSpec(
            model=settings["model"],
            p=int(settings["p"]),
            n=int(settings["n"]),
            k=int(settings["precision"]),
            k_max=int(settings["precision_max"]),
            samples=int(settings["samples"]),
            seed=seed,
            targets=_parse_targets(settings["targets"]),
            budget=CountBudget(
                max_depth=int(settings["budget_depth"]),
                min_remaining_digits=int(settings["budget_min_digits"]),
            ),
            workers=int(workers),
            paranoid=bool(settings["paranoid"]),
            derive_outside=bool(settings["derive_outside"]),
            digest=bool(settings["digest"]),
        )
    except ValueError as exc:
        print(f"invalid experiment: {exc}", file=sys.stderr)
        return USAGE_ERROR
    bundle = run_experiment(spec)
    fmt = settings["format"]
    out = settings["out"]
    if out:
        write_report(bundle, fmt, out)
        print(f"wrote {out} ({len(bundle.rows)} rows, {bundle.wall_time_s:.1f} s)")
    _print_rows([r.to_dict() | {"n": spec.n, "p": spec.p} for r in bundle.rows])
    worst = 0
    for row in bundle.rows:
        if row.verdict in ("above", "below"):
            worst = 1
    return worst


def _print_rows(rows: list[dict]) -> None:
    fmtcols = "{:<22} {:<9} {:>12} {:>10} {:>9} {:>6} {:>9}"
    print(fmtcols.format("target", "scope", "mean", "stderr", "n_eff", "inc", "verdict"))
    for r in rows:
        print(
            fmtcols.format(
                str(r["target"])[:22],
                r["scope"],
                "nan" if r["mean"] != r["mean"] else f"{r['mean']:.6f}",
                f"{r['stderr']:.6f}" if r["stderr"] == r["stderr"] else "nan",
                r["n_eff"],
                r["n_inconclusive"],
                r["verdict"],
            )
        )


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        code, messages = check_report(args.path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot check {args.path}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    for msg in messages:
        print(msg)
    if code == 0:
        print("ok: all verdicts within bands (or no band)")
    return code


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        rows = load_report_rows(args.path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read {args.path}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    _print_rows(rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padix",
        description="Monte Carlo laboratory for p-adic eigenvalue and root statistics",
    )
    parser.add_argument("--version", action="version", version=f"padix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    mc = sub.add_parser("mc", help="run a Monte Carlo experiment")
    mc.add_argument("--model", choices=("matrix", "poly"))
    mc.add_argument("--p", type=int)
    mc.add_argument("--n", type=int)
    mc.add_argument("--precision", type=int, default=None)
    mc.add_argument("--precision-max", dest="precision_max", type=int, default=None)
    mc.add_argument("--samples", type=int, default=None)
    mc.add_argument("--seed", type=str, default=None)
    mc.add_argument(
        "--targets",
        type=str,
        default=None,
        help="semicolon-separated ring descriptors, each with optional @scope "
        "(all|new|integral|field), e.g. 'unram:1@new;eis:2:1:-3,0,1@new'",
    )
    mc.add_argument("--workers", type=int, default=None)
    mc.add_argument("--out", type=str, default=None)
    mc.add_argument("--format", choices=("csv", "json"), default=None)
    mc.add_argument("--config", type=str, default=None)
    mc.add_argument("--paranoid", action="store_true", default=False)
    mc.add_argument("--derive-outside", dest="derive_outside", action="store_true", default=False)
    mc.add_argument("--digest", action="store_true", default=False)
    mc.add_argument("--budget-depth", dest="budget_depth", type=int, default=None)
    mc.add_argument("--budget-min-digits", dest="budget_min_digits", type=int, default=None)
    mc.set_defaults(func=_cmd_mc)

    fms = sub.add_parser("formulas", help="evaluate a named closed form")
    fms.add_argument("name")
    fms.add_argument("args", nargs="*")
    fms.add_argument("--json", action="store_true")
    fms.set_defaults(func=_cmd_formulas)

    orc = sub.add_parser("oracle", help="exhaustive censuses")
    orc.add_argument("verb", choices=("det-census", "gen-census", "root-census"))
    orc.add_argument("--p", type=int, required=True)
    orc.add_argument("--n", type=int)
    orc.add_argument("--r", type=int)
    orc.add_argument("--z", type=str, help="comma-separated polynomial coefficients")
    orc.add_argument("--ring", type=str, help="ring descriptor for root-census")
    orc.add_argument("--precision", type=int, default=3)
    orc.add_argument("--coeffs", type=str, help="polynomial for root-census")
    orc.set_defaults(func=_cmd_oracle)

    chk = sub.add_parser("check", help="verify a report's verdicts")
    chk.add_argument("path")
    chk.set_defaults(func=_cmd_check)

    rep = sub.add_parser("report", help="pretty-print a report")
    rep.add_argument("path")
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

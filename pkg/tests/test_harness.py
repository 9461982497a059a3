import filecmp
import json
import os
import subprocess
import sys

import pytest

from padix.cli import _parse_targets, main as cli_main
from padix.harness import (
    CSV_HEADER,
    ExperimentSpec,
    check_report,
    load_report_rows,
    run_experiment,
    write_report,
)


def small_spec(**kw):
    base = dict(
        model="poly", p=3, n=2, k=8, k_max=32, samples=200, seed=5,
        targets=(("unram:1", "new"), ("unram:2", "new")), workers=1,
    )
    base.update(kw)
    return ExperimentSpec(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        small_spec(model="tensor")
    with pytest.raises(ValueError):
        small_spec(samples=0)
    with pytest.raises(ValueError):
        small_spec(k=40, k_max=20)
    with pytest.raises(ValueError):
        small_spec(targets=(("unram:1", "weird"),))
    with pytest.raises(ValueError):
        small_spec(targets=(("unram:5", "new"),))  # degree 5 > n
    with pytest.raises(ValueError):
        small_spec(n=4, targets=(("eis:4:1:-12,0,0,0,1", "new"),))  # non-quadratic new
    with pytest.raises(ValueError):
        small_spec(targets=())


def test_target_parsing():
    t = _parse_targets("unram:1@new; unram:2@all;eis:2:1:-3,0,1@new")
    assert t == (("unram:1", "new"), ("unram:2", "all"), ("eis:2:1:-3,0,1", "new"))
    assert _parse_targets("unram:2") == (("unram:2", "new"),)


def test_worker_determinism(tmp_path):
    paths = []
    for workers in (1, 4):
        b = run_experiment(small_spec(workers=workers))
        path = tmp_path / f"w{workers}.csv"
        write_report(b, "csv", str(path))
        paths.append(path)
    assert filecmp.cmp(paths[0], paths[1], shallow=False)


def test_csv_round_trip_and_check(tmp_path):
    b = run_experiment(small_spec())
    path = tmp_path / "r.csv"
    write_report(b, "csv", str(path))
    rows = load_report_rows(str(path))
    assert len(rows) == 2
    assert {r["target"] for r in rows} == {"unram:1", "unram:2"}
    code, msgs = check_report(str(path))
    assert code == 0 and msgs == []
    with open(path) as fh:
        header = fh.readline().strip()
    assert header == ",".join(CSV_HEADER)


def test_csv_significant_digits(tmp_path):
    b = run_experiment(small_spec())
    path = tmp_path / "r.csv"
    write_report(b, "csv", str(path))
    import csv as csvmod

    with open(path) as fh:
        for row in csvmod.DictReader(fh):
            for fieldname in ("mean", "stderr", "lower", "upper"):
                text = row[fieldname]
                if not text:
                    continue
                mantissa = text.split("e")[0].replace("-", "").replace(".", "")
                assert len(mantissa.lstrip("0")) >= 12 or float(text) == 0.0


def test_check_detects_fabricated_violation(tmp_path):
    b = run_experiment(small_spec())
    path = tmp_path / "bad.csv"
    write_report(b, "csv", str(path))
    lines = open(path).read().splitlines()
    parts = lines[1].split(",")
    parts[6] = "9.00000000000000e+00"  # mean far above any band
    lines[1] = ",".join(parts)
    open(path, "w").write("\n".join(lines) + "\n")
    code, msgs = check_report(str(path))
    assert code == 1 and msgs


def test_check_detects_inconclusive_rate(tmp_path):
    b = run_experiment(small_spec())
    path = tmp_path / "inc.csv"
    write_report(b, "csv", str(path))
    lines = open(path).read().splitlines()
    parts = lines[1].split(",")
    parts[8], parts[9] = "900", "100"  # 10% inconclusive
    lines[1] = ",".join(parts)
    open(path, "w").write("\n".join(lines) + "\n")
    code, msgs = check_report(str(path))
    assert code == 3 and msgs


def test_json_report_schema(tmp_path):
    import jsonschema

    b = run_experiment(small_spec(digest=True))
    path = tmp_path / "r.json"
    write_report(b, "json", str(path))
    schema_path = os.path.join(
        os.path.dirname(sys.modules["padix"].__file__), "schemas", "report.schema.json"
    )
    schema = json.load(open(schema_path))
    jsonschema.validate(json.load(open(path)), schema)
    assert b.samples_digest and len(b.samples_digest) == 32


def test_digest_stable_across_workers():
    d1 = run_experiment(small_spec(digest=True, workers=1)).samples_digest
    d2 = run_experiment(small_spec(digest=True, workers=3)).samples_digest
    assert d1 == d2


def test_derive_outside_row():
    spec = small_spec(n=3, targets=(), derive_outside=True, samples=300)
    b = run_experiment(spec)
    row = b.rows[-1]
    assert row.target == "outside-un"
    assert row.lower == 0 and float(row.upper) == 2.25
    assert 0 <= row.mean <= 3


def test_paranoid_mode_runs():
    spec = small_spec(
        n=4, samples=300, paranoid=True,
        targets=(("unram:1", "new"), ("unram:2", "all"), ("unram:4", "new")),
    )
    b = run_experiment(spec)
    assert all(r.n_eff + r.n_inconclusive == 300 for r in b.rows)


def test_stderr_scaling():
    se = {}
    for n_samples in (600, 2400):
        b = run_experiment(small_spec(samples=n_samples, seed=99))
        se[n_samples] = b.rows[0].stderr
    ratio = se[600] / se[2400]
    assert 1.6 <= ratio <= 2.4  # quadrupling N halves stderr within 20%


def test_escalations_counted():
    # k=1 forces escalation on most samples with repeated residue roots
    spec = small_spec(k=2, k_max=16, samples=300)
    b = run_experiment(spec)
    assert b.rows[0].escalations > 0
    assert all(r.n_inconclusive == 0 for r in b.rows)


def test_matrix_rows():
    spec = ExperimentSpec(
        model="matrix", p=2, n=3, k=12, k_max=48, samples=400, seed=4,
        targets=(("unram:1", "integral"), ("unram:2", "new"), ("unram:3", "all")),
        workers=1,
    )
    b = run_experiment(spec)
    by = {(r.target, r.scope): r for r in b.rows}
    assert by[("unram:1", "integral")].verdict in ("within", "above", "below")
    assert by[("unram:3", "all")].verdict == "no-band"
    # integral and new coincide for the matrix model at degree 1
    assert by[("unram:1", "integral")].lower is not None


def test_cli_end_to_end(tmp_path):
    out = tmp_path / "out.csv"
    code = cli_main(
        [
            "mc", "--model", "poly", "--p", "3", "--n", "2",
            "--samples", "150", "--seed", "0x10", "--targets", "unram:1@new",
            "--workers", "1", "--out", str(out),
        ]
    )
    assert code == 0 and out.exists()
    assert cli_main(["check", str(out)]) == 0
    assert cli_main(["report", str(out)]) == 0


def test_cli_usage_errors(tmp_path):
    assert cli_main(["mc", "--p", "3", "--n", "2"]) == 2  # missing model
    assert cli_main(["formulas", "unknown-thing"]) == 2
    assert cli_main(["check", str(tmp_path / "missing.csv")]) == 2
    r = subprocess.run(
        [sys.executable, "-m", "padix.cli", "mc", "--bogus-flag"],
        capture_output=True,
    )
    assert r.returncode == 2


def test_cli_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        'model = "poly"\np = 3\nn = 2\nsamples = 120\nseed = 9\n'
        'targets = ["unram:1@new"]\nworkers = 1\n'
    )
    out1 = tmp_path / "a.csv"
    code = cli_main(["mc", "--config", str(cfg), "--out", str(out1)])
    assert code == 0
    rows = load_report_rows(str(out1))
    assert rows[0]["n_eff"] + rows[0]["n_inconclusive"] == 120
    # CLI flag wins over config
    out2 = tmp_path / "b.csv"
    code = cli_main(
        ["mc", "--config", str(cfg), "--samples", "80", "--out", str(out2)]
    )
    assert code == 0
    rows = load_report_rows(str(out2))
    assert rows[0]["n_eff"] + rows[0]["n_inconclusive"] == 80


def test_formulas_cli_json(capsys):
    assert cli_main(["formulas", "serre-mass", "3", "2", "1", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["exact"] == "2/3"


def test_workers_env_override(monkeypatch):
    from padix.harness import default_workers

    monkeypatch.setenv("PADIX_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("PADIX_WORKERS")
    assert default_workers() >= 1


def test_field_scope_alias():
    b1 = run_experiment(small_spec(targets=(("unram:2", "field"),)))
    b2 = run_experiment(small_spec(targets=(("unram:2", "new"),)))
    assert b1.rows[0].mean == b2.rows[0].mean
    assert b1.rows[0].lower == b2.rows[0].lower


def test_integral_scope_poly():
    # integral-region new counts are bounded by field-region new counts
    spec = small_spec(
        samples=600,
        targets=(("unram:2", "integral"), ("unram:2", "new")),
    )
    b = run_experiment(spec)
    by = {r.scope: r for r in b.rows}
    assert by["integral"].mean <= by["new"].mean + 1e-12
    assert by["integral"].verdict == "no-band"


def test_single_sample_run():
    b1 = run_experiment(small_spec(samples=1))
    b2 = run_experiment(small_spec(samples=1, workers=4))
    assert [r.mean for r in b1.rows] == [r.mean for r in b2.rows]
    assert all(r.stderr == 0.0 for r in b1.rows if r.n_eff == 1)

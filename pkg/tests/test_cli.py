import csv
import json
import math

import pytest

from qiforce.cli import main
from qiforce.io import SCAN_HEADER
from qiforce.numerics import RngStream
from qiforce.tomography import (
    PAULI_SETTINGS,
    bell_state,
    maximally_mixed,
    pure_density,
    settings_from_labels,
    simulate_counts,
)
from qiforce.io import write_tomo_counts

from conftest import AMPLITUDE, DELTA, SIGMA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_scan_defaults(tmp_path, capsys):
    code, out, _ = run(capsys, "scan", "--out", tmp_path)
    assert code == 0
    summary = json.loads(out)
    assert summary == json.loads((tmp_path / "summary.json").read_text())
    by_t2 = {s["theta2_deg"]: s for s in summary["settings"]}
    assert set(by_t2) == {0.0, 45.0, 90.0}
    assert by_t2[45.0]["empirical_mean_momentum"] == pytest.approx(-1.88, abs=0.02)
    assert by_t2[45.0]["model_mean_momentum"] == pytest.approx(-1.879176487016802, rel=1e-12)
    assert by_t2[90.0]["empirical_mean_momentum"] == pytest.approx(0.0, abs=1e-12)
    for s in summary["settings"]:
        with open(tmp_path / s["file"], newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == SCAN_HEADER
        assert len(rows) == 42
    assert json.loads((tmp_path / "manifest.json").read_text())["version"]


def test_scan_is_seeded(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert run(capsys, "scan", "--noise", "poisson", "--seed", 7, "--out", d)[0] == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    d = tmp_path / "c"
    run(capsys, "scan", "--noise", "poisson", "--seed", 8, "--out", d)
    assert (d / "scan_theta2_45.csv").read_bytes() != outs[0]["scan_theta2_45.csv"]


def test_manifest_reproduces_run(tmp_path, capsys):
    first = tmp_path / "first"
    run(capsys, "scan", "--noise", "poisson", "--seed", 3, "--aperture", "window", "--out", first)
    manifest = tmp_path / "manifest.json"
    manifest.write_text((first / "manifest.json").read_text())
    second = tmp_path / "second"
    assert run(capsys, "scan", "--config", manifest, "--out", second)[0] == 0
    for p in first.iterdir():
        assert (second / p.name).read_bytes() == p.read_bytes()


def test_fit_round_trip(tmp_path, capsys):
    run(capsys, "scan", "--out", tmp_path)
    files = sorted(tmp_path.glob("scan_*.csv"))
    code, out, _ = run(capsys, "fit", *files, "--out", tmp_path)
    assert code == 0
    rep = json.loads(out)
    assert rep["converged"] and rep["identifiable"]
    got = rep["params"]
    assert got["amplitude_A"] == pytest.approx(AMPLITUDE, rel=1e-6)
    assert got["sigma"] == pytest.approx(SIGMA, rel=1e-6)
    assert got["delta"] == pytest.approx(DELTA, rel=1e-6)
    assert json.loads((tmp_path / "fit.json").read_text()) == rep


def test_fit_poisson_files(tmp_path, capsys):
    run(capsys, "scan", "--noise", "poisson", "--seed", 7, "--out", tmp_path)
    code, out, _ = run(capsys, "fit", *sorted(tmp_path.glob("scan_*.csv")))
    assert code == 0
    got = json.loads(out)["params"]
    assert abs(got["sigma"] / SIGMA - 1) < 0.05
    assert abs(got["delta"] / DELTA - 1) < 0.05


def test_fit_missing_column(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("theta1_deg,theta2_deg,slit_x_mm,model_rate,observed_counts\n62,45,0,1,1\n")
    code, _, err = run(capsys, "fit", path)
    assert code == 2
    assert "p1_hbar_per_mm" in err


def test_fit_malformed_row(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text(",".join(SCAN_HEADER) + "\n62,45,0,0,10,9\n62,45,0.1,1.9,x,9\n")
    code, _, err = run(capsys, "fit", path)
    assert code == 2
    assert "line 3" in err and "model_rate" in err


def test_fit_missing_file(tmp_path, capsys):
    assert run(capsys, "fit", tmp_path / "nope.csv")[0] == 2


def test_invalid_config_names_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"source": {"sigma": -1}}))
    code, _, err = run(capsys, "scan", "--config", cfg, "--out", tmp_path)
    assert code == 1
    assert "source.sigma" in err
    cfg.write_text(json.dumps({"scan": {"stride": 2}}))
    code, _, err = run(capsys, "scan", "--config", cfg, "--out", tmp_path)
    assert code == 1 and "scan.stride" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["scan", "--noise", "gaussian"])
    assert info.value.code == 1


def test_tomo_demo(capsys):
    code, out, _ = run(capsys, "tomo", "demo")
    assert code == 0
    rep = json.loads(out)
    assert rep["counts_per_setting"] == 1e6
    assert 0.89 <= rep["purity"] <= 0.93
    assert rep["true_purity"] == pytest.approx(0.91, rel=1e-12)
    assert rep["n_settings"] == 36


def _counts_file(tmp_path, rho, labels=PAULI_SETTINGS):
    path = tmp_path / "counts.csv"
    write_tomo_counts(path, simulate_counts(rho, 1e6, settings_from_labels(labels)))
    return path


def test_tomo_invert_bell(tmp_path, capsys):
    path = _counts_file(tmp_path, pure_density(bell_state(0.0)))
    code, out, _ = run(capsys, "tomo", "invert", "--counts", path)
    rep = json.loads(out)
    assert code == 0
    assert rep["purity"] == pytest.approx(1.0, abs=1e-6)
    assert rep["fidelity_to_bell"] == pytest.approx(1.0, abs=1e-6)


def test_tomo_invert_mixed(tmp_path, capsys):
    path = _counts_file(tmp_path, maximally_mixed())
    rep = json.loads(run(capsys, "tomo", "invert", "--counts", path)[1])
    assert rep["purity"] == pytest.approx(0.25, abs=1e-6)


def test_tomo_invert_incomplete(tmp_path, capsys):
    path = _counts_file(tmp_path, maximally_mixed(), ["HH", "HV", "VH", "VV"])
    code, _, err = run(capsys, "tomo", "invert", "--counts", path)
    assert code == 2
    assert "missing" in err and "DD" in err


def test_tomo_invert_needs_counts(capsys):
    assert run(capsys, "tomo", "invert")[0] == 1


def test_synth_feeds_fit_and_tomo(tmp_path, capsys):
    code, out, _ = run(capsys, "synth", "--seed", 5, "--out", tmp_path)
    assert code == 0
    listing = json.loads(out)
    assert listing["noise"] == "poisson" and len(listing["scan_files"]) == 3
    fit = json.loads(run(capsys, "fit", *[tmp_path / f for f in listing["scan_files"]])[1])
    assert math.isfinite(fit["params"]["sigma"])
    tomo = json.loads(run(capsys, "tomo", "invert", "--counts", tmp_path / listing["tomo_file"])[1])
    assert 0.89 <= tomo["purity"] <= 0.93
    again = tmp_path / "again"
    run(capsys, "synth", "--seed", 5, "--out", again)
    for name in listing["scan_files"] + [listing["tomo_file"]]:
        assert (again / name).read_bytes() == (tmp_path / name).read_bytes()

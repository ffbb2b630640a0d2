import hashlib
import json

import numpy as np
import pytest

from sobfig.cli import FAMILIES, main
from sobfig.core import SchemaError, read_csv


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _series_csv(n=200, period=40.0):
    t = np.arange(n) * 0.25
    rho = 0.3 + 0.3 * np.sign(np.sin(2 * np.pi * t / period))
    lines = ["t,rho_mean,n_mean"]
    lines += [f"{ti},{ri},{2.0 + 0.1 * np.sin(2 * np.pi * ti / period)}"
              for ti, ri in zip(t, rho)]
    return "\n".join(lines) + "\n"


@pytest.fixture
def data_dir(tmp_path):
    d = tmp_path / "data"
    _write(d / "mf" / "mf.json", json.dumps({
        "lambda": 3.2e-3,
        "fixed_point": {"rho": 0.32, "n": 2.4, "kind": "unstable-node",
                        "unstable": True},
        "spinodals": {"n_low": 2.31, "n_high": 2.83}}))
    t = np.linspace(0, 100, 50)
    _write(d / "mf" / "mf_trajectory.csv", "t,rho,n\n" + "\n".join(
        f"{ti},{0.1 + 0.05 * np.sin(ti)},{2.0 + 0.3 * np.cos(ti)}" for ti in t) + "\n")
    _write(d / "mf" / "mf_periods.csv",
           "lambda,period\n0.001,900\n0.002,480\n0.004,260\n")
    for l in (8, 16):
        base = d / f"ctc_L{l}"
        _write(base / "series.csv", _series_csv())
        _write(base / "events.csv",
               "direction,t_event,n_at_event,rho_before,rho_after\n"
               "up,10.0,2.8,0.01,0.5\ndown,30.0,2.3,0.5,0.01\n")
        _write(base / "spectrum.csv", "omega,magnitude\n" + "\n".join(
            f"{0.01 * k},{1.0 / (1 + k)}" for k in range(50)) + "\n")
        _write(base / "autocorrelation.csv", "lag,g\n" + "\n".join(
            f"{0.25 * k},{1 + 0.2 * np.cos(0.15 * k)}" for k in range(80)) + "\n")
        _write(base / "coherence.json", json.dumps(
            {"omega_m": 0.157, "tau_ctc": 3.0, "t_mean": 40.0}))
        _write(base / "avalanches.json", json.dumps(
            {"p_king": 0.1 / l, "total_count": 10 * l, "king_count": 2}))
    _write(d / "scaling.csv",
           "L,t_mean,t_std,tau_ctc\n8,42.0,12.0,3.5\n16,40.0,8.0,5.0\n")
    _write(d / "potential" / "potential_1_2.csv", "rho,phi,count\n" + "\n".join(
        f"{0.01 * k},{(0.01 * k - 0.3) ** 2},{100}" for k in range(60)) + "\n")
    _write(d / "potential" / "potential_3_2.6.csv", "rho,phi,count\n" + "\n".join(
        f"{0.01 * k},{np.cos(0.2 * k) + 1},{50}" for k in range(60)) + "\n")
    _write(d / "potential" / "phase_diagram.csv",
           "d,n,n_minima,barrier_height\n1,2.0,1,0\n3,2.6,2,3.4\n")
    return d


def test_make_all(data_dir, tmp_path):
    out = tmp_path / "figs"
    assert main(["--input-dir", str(data_dir), "--output-dir", str(out)]) == 0
    for mod in FAMILIES.values():
        assert (out / mod.SPEC.output_name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) == set(FAMILIES)


def test_rerun_is_byte_identical(data_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--input-dir", str(data_dir), "--output-dir", str(a)]) == 0
    assert main(["--input-dir", str(data_dir), "--output-dir", str(b)]) == 0
    for mod in FAMILIES.values():
        name = mod.SPEC.output_name
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_manifest_hashes_inputs(data_dir, tmp_path):
    out = tmp_path / "figs"
    assert main(["fig4efg_scaling", "--input-dir", str(data_dir),
                 "--output-dir", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    entry = manifest["fig4efg_scaling"]["inputs"]
    digest = hashlib.sha256((data_dir / "scaling.csv").read_bytes()).hexdigest()
    assert entry["scaling.csv"] == digest


def test_empty_but_valid_csv_is_ok(data_dir, tmp_path):
    (data_dir / "scaling.csv").write_text("L,t_mean,t_std,tau_ctc\n")
    out = tmp_path / "figs"
    assert main(["fig4efg_scaling", "--input-dir", str(data_dir),
                 "--output-dir", str(out)]) == 0
    assert (out / "fig4efg_scaling.svg").exists()


def test_schema_mismatch_names_column(data_dir, tmp_path):
    (data_dir / "scaling.csv").write_text("L,tmean\n8,42\n")
    with pytest.raises(SchemaError, match="t_mean"):
        read_csv(data_dir / "scaling.csv", ["L", "t_mean", "t_std", "tau_ctc"])
    rc = main(["fig4efg_scaling", "--input-dir", str(data_dir),
               "--output-dir", str(tmp_path / "figs")])
    assert rc == 4      # the only requested family failed


def test_missing_inputs_skip(data_dir, tmp_path):
    (data_dir / "scaling.csv").unlink()
    rc = main(["--input-dir", str(data_dir), "--output-dir", str(tmp_path / "f")])
    assert rc == 3      # other families still made figures


def test_missing_input_dir(tmp_path):
    assert main(["--input-dir", str(tmp_path / "nope"),
                 "--output-dir", str(tmp_path / "f")]) == 4

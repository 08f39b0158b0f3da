import json
import subprocess
import sys

import numpy as np
import pytest

from surfwave import kernels
from surfwave.cli import main
from surfwave.io import read_snapshot, write_snapshot
from surfwave.spectral import AmplitudeState, SpectralGrid, single_mode


def cfg_file(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text("schema_version: 1\n" + text)
    return str(path)


def table_rows(out):
    return [line for line in out.splitlines() if line and not line.startswith("#")][1:]


def test_roots_no_root(tmp_path, capsys):
    assert main(["roots", "--config", cfg_file(tmp_path, "physical: {v1: 0, b1: 5, h1: 1, nu: 0.5}\n")]) == 0
    out = capsys.readouterr().out
    assert "regime=NoRoot" in out and table_rows(out) == []


def test_roots_two_rows(tmp_path, capsys):
    assert main(["roots", "--config", cfg_file(tmp_path, "physical: {v1: 0, b1: 0, h1: 1, nu: 0.5}\n")]) == 0
    rows = table_rows(capsys.readouterr().out)
    assert len(rows) == 2
    lam = sorted(float(r.split("\t")[1]) for r in rows)
    assert lam == pytest.approx([-0.9395649, 0.9395649], abs=1e-7)


@pytest.mark.parametrize("text", ["physical: {v1: [\n", "schema_version: 7\n"])
def test_malformed_config(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    assert main(["roots", "--config", str(path)]) == 2


def test_unknown_flag():
    assert main(["roots", "--bogus"]) == 2


def test_simulate_t_end_zero(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--out", str(out), "--n-modes", "32", "--t-end", "0"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["reason"] == "t_end" and record["steps"] == 0
    snaps = sorted((out / "snapshots").glob("*.bin"))
    assert len(snaps) == 1
    manifest = json.loads((out / "manifest.json").read_text())
    snap = read_snapshot(snaps[0])
    assert snap.manifest_hash == manifest["config_hash"] and snap.state.tau == 0.0
    for line in (out / "diagnostics.ndjson").read_text().splitlines():
        assert json.loads(line)["manifest"] == manifest["config_hash"]


@pytest.mark.parametrize("physical,index", [("{v1: 0, b1: 5, h1: 1, nu: 0.5}", 0), ("{v1: 0, b1: 2, h1: 1, nu: 1}", 0),
                                            ("{v1: 0, b1: 0, h1: 1, nu: 0.5}", 2)])
def test_simulate_unusable_root(tmp_path, physical, index):
    path = cfg_file(tmp_path, f"physical: {physical}\nroot_index: {index}\n")
    assert main(["simulate", "--config", path, "--out", str(tmp_path / "o"), "--n-modes", "32"]) == 3


def test_simulate_deterministic(tmp_path, capsys):
    args = ["--n-modes", "32", "--t-end", "0.05", "--snapshot-every", "0.025", "--seed", "3"]
    path = cfg_file(tmp_path, "profile: {name: random-bandlimited, amplitude: 0.1}\nsolver: {diag_every: 1}\n")
    streams = []
    for name in ("a", "b"):
        assert main(["simulate", "--config", path, "--out", str(tmp_path / name), *args]) == 0
        streams.append((tmp_path / name / "diagnostics.ndjson").read_bytes())
    assert streams[0] == streams[1] and len(streams[0].splitlines()) > 3
    assert len(list((tmp_path / "a" / "snapshots").glob("*.bin"))) == 3
    capsys.readouterr()


@pytest.mark.slow
def test_simulate_cosine_blows_up(tmp_path, capsys):
    path = cfg_file(tmp_path, "solver: {gradient_factor: 5, t_end: 2.0}\nprofile: {name: cosine}\n")
    assert main(["simulate", "--config", path, "--out", str(tmp_path / "o"), "--n-modes", "256"]) == 0
    assert json.loads(capsys.readouterr().out)["reason"] == "blowup_gradient"


def test_simulate_bad_profile(tmp_path):
    path = cfg_file(tmp_path, "profile: {name: square}\n")
    assert main(["simulate", "--config", path, "--out", str(tmp_path / "o"), "--n-modes", "32"]) == 2


def test_verify_quick_passes(capsys):
    assert main(["verify", "--quick", "--suite", "kernels", "--suite", "cross_formulation",
                 "--suite", "interpolation"]) == 0
    out = capsys.readouterr().out
    rows = [r.split("\t") for r in out.splitlines() if r and not r.startswith(("#", "suite"))]
    assert rows and all(r[-1] == "pass" for r in rows)
    assert all(len(r) == 5 for r in rows)


def test_verify_alias_and_sigma_rejection(tmp_path):
    assert main(["verify-kernels", "--config", cfg_file(tmp_path, "verify: {sigmas: [0.0]}\n")]) == 2
    assert main(["verify", "--config", cfg_file(tmp_path, "verify: {sigmas: [1.2]}\n", "b.yaml")]) == 2
    assert main(["verify", "--suite", "nonsense"]) == 2


def test_verify_localizes_mutation(monkeypatch, capsys):
    original = kernels.lambda_plus
    monkeypatch.setattr(kernels, "lambda_plus", lambda k, l, ctx: -np.asarray(original(k, l, ctx)))
    assert main(["verify", "--quick"]) == 1
    out = capsys.readouterr().out
    failed = [r.split("\t")[:2] for r in out.splitlines() if r.endswith("\tFAIL")]
    assert failed
    assert all(name.startswith("symmetrization.plus") or name == "Lambda0.plus" for _, name in failed)
    assert "# symmetrization: FAIL" in out
    for suite in ("cross_formulation", "conservation", "interpolation"):
        assert f"# {suite}: pass" in out


def _snapshot(tmp_path, state, grid, name="s.bin"):
    path = tmp_path / name
    write_snapshot(path, state, grid)
    return str(path)


def test_fields_zero_snapshot(tmp_path, capsys):
    g = SpectralGrid(32)
    snap = _snapshot(tmp_path, AmplitudeState(np.zeros(32)), g)
    assert main(["fields", "--snapshot", snap, "--n-modes", "32", "--out", str(tmp_path / "f")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["jump_pass"] and report["decay_pass"]
    rows = [line.split(",") for line in (tmp_path / "f" / "field_v1.csv").read_text().splitlines()[2:]]
    assert all(float(r[2]) == 0.0 for r in rows)


def test_fields_single_mode(tmp_path, capsys):
    g = SpectralGrid(32)
    snap = _snapshot(tmp_path, single_mode(g, 2, 0.5), g)
    assert main(["fields", "--snapshot", snap, "--n-modes", "32", "--out", str(tmp_path / "f")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["jump_pass"] and report["decay_pass"]
    assert report["decay_rates"]["v1"] == pytest.approx(2.0, rel=1e-2)
    assert report["decay_rates"]["E"] == pytest.approx(2.0 * report["root"]["sigma"], rel=1e-2)
    assert json.loads((tmp_path / "f" / "fields_report.json").read_text()) == report


def test_fields_mismatch(tmp_path):
    g = SpectralGrid(32)
    snap = _snapshot(tmp_path, single_mode(g, 1, 0.5), g)
    assert main(["fields", "--snapshot", snap, "--n-modes", "64", "--out", str(tmp_path / "f")]) == 4
    (tmp_path / "junk.bin").write_bytes(b"junk")
    assert main(["fields", "--snapshot", str(tmp_path / "junk.bin"), "--out", str(tmp_path / "f")]) == 4


def test_analyze(tmp_path, capsys):
    g = SpectralGrid(32)
    paths = [_snapshot(tmp_path, single_mode(g, 1, a), g, f"s{i}.bin") for i, a in enumerate((0.5, 1.0))]
    assert main(["analyze", *paths, "--out", str(tmp_path / "a")]) == 0
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(records) == 2
    assert records[1]["psi_l2"] == pytest.approx(2 * records[0]["psi_l2"])
    assert records[0]["oscillation"] == pytest.approx(2.0)
    assert all(v["pass"] for v in records[0]["interpolation"].values())
    assert (tmp_path / "a" / "analysis.ndjson").exists()


def test_bench_single_size(tmp_path, capsys):
    path = cfg_file(tmp_path, "bench: {repeats: 2, min_time: 0.001}\n")
    assert main(["bench", "--config", path, "--sizes", "64", "--out", str(tmp_path / "b")]) == 0
    out = capsys.readouterr().out
    rows = table_rows(out)
    assert sorted(r.split("\t")[0] for r in rows) == ["convolution", "spatial", "spatial_single"]
    report = json.loads((tmp_path / "b" / "bench.json").read_text())
    assert all(r["cold_ns"] > 0 and r["warm_ns"] > 0 for r in report["rows"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "surfwave", "roots"], capture_output=True, text=True)
    assert proc.returncode == 0 and "regime=TwoRoots" in proc.stdout

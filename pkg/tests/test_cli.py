import json

import numpy as np
import pytest

from phonocool import SystemParams, phonon_spectrum, plane_wave, save_mode_field
from phonocool.cli import CliError, RunConfig, main, run


def invoke(argv, capsys=None):
    code = main(argv)
    if capsys is not None:
        return code, capsys.readouterr()
    return code


def test_cooling_ratio_uncoupled_prints_one(capsys):
    code, out = invoke(["cooling-ratio", "--mode", "1", "--g1", "0", "--g2", "0",
                     "--gamma1", "0.01", "--gamma2", "0.01", "--nbar1", "5"],
                    capsys)
    assert code == 0
    assert "R=1.000" in out.out


def test_spectrum_reproduces_library_values(tmp_path):
    out = tmp_path / "blue.csv"
    code = invoke(["spectrum", "--mode", "1", "--g1", "0.3", "--g2", "0.5",
                "--gamma1", "0.01", "--gamma2", "0.01", "--omega", "0.1",
                "--delta", "0", "--nbar1", "100", "--normalized",
                "--count", "101", "--output", str(out)])
    assert code == 0
    data = np.loadtxt(out, delimiter=",")
    p = SystemParams(kappa2=1.0, omega=0.1, gamma1=0.01, gamma2=0.01,
                     g1=0.3, g2=0.5, nbar1=100.0)
    ref = phonon_spectrum(p, 1, np.linspace(-1.5, 1.5, 101),
                          normalized=True).values
    assert np.allclose(data[:, 1], ref, rtol=1e-15)
    meta = json.loads((tmp_path / "blue.csv.meta.json").read_text())
    assert meta["command"] == "spectrum"
    assert meta["config"]["normalized"] is True


def test_validation_failure_exits_one(capsys):
    code, out = invoke(["cooling-ratio", "--gamma1=-0.01", "--nbar1", "1"], capsys)
    assert code == 1
    assert "gamma1" in out.err
    assert out.err.count("\n") == 1  # single-line diagnostic


def test_numerical_failure_exits_two(tmp_path, capsys):
    # gamma1 = 0 with a grid point exactly on the resonance pole
    out = tmp_path / "sing.csv"
    code, cap = invoke(["spectrum", "--gamma1", "0", "--gamma2", "0.01",
                     "--omega", "0.5", "--count", "5",
                     "--omega-min=-1", "--omega-max", "1",
                     "--output", str(out)], capsys)
    assert code == 2
    assert "pole" in cap.err


def test_unknown_flag_exits_one(capsys):
    code, cap = invoke(["cooling-ratio", "--no-such-flag", "1"], capsys)
    assert code == 1
    assert cap.err.strip()


def test_sweep_tracks_paper_values(tmp_path):
    out = tmp_path / "sweep.csv"
    code = invoke(["sweep", "--axis", "g2", "--from", "0", "--to", "0.6",
                "--count", "25", "--metric", "cooling-ratio:1",
                "--g1", "0.3", "--gamma1", "0.01", "--gamma2", "0.01",
                "--omega", "0.1", "--nbar1", "100", "--output", str(out)])
    assert code == 0
    data = np.loadtxt(out, delimiter=",")
    assert data.shape == (25, 2)
    assert data[0, 1] == pytest.approx(0.110, abs=0.02)
    g2_half = np.argmin(np.abs(data[:, 0] - 0.5))
    assert data[g2_half, 1] == pytest.approx(0.288, abs=0.02)
    assert np.all(np.diff(data[:, 1]) > 0)  # reheating grows with g2


def test_sweep_rejects_unknown_axis(tmp_path, capsys):
    code, cap = invoke(["sweep", "--axis", "kappa2", "--from", "1", "--to", "2",
                     "--count", "3", "--output", str(tmp_path / "x.csv")],
                    capsys)
    assert code == 1
    assert "axis" in cap.err


def test_round_trip_from_sidecar(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    base = ["spectrum", "--mode", "2", "--g1", "0.3", "--g2", "0.5",
            "--gamma1", "0.01", "--gamma2", "0.01", "--omega", "0.1",
            "--nbar1", "100", "--count", "51"]
    assert invoke(base + ["--output", str(first)]) == 0
    assert invoke(["spectrum", "--config", str(first) + ".meta.json",
                "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_flat_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# figure parameters\n"
        "g1 = 0.3\n"
        "gamma1 = 0.01\n"
        "gamma2 = 0.01\n"
        "omega = 0.1\n"
        "nbar1 = 100\n")
    code, cap = invoke(["cooling-ratio", "--config", str(cfg)], capsys)
    assert code == 0
    assert "R=0.110" in cap.out
    # explicit flag overrides the config value
    code, cap = invoke(["cooling-ratio", "--config", str(cfg), "--g1", "0"],
                    capsys)
    assert code == 0
    assert "R=1.000" in cap.out


def test_simulate_writes_stats_and_prints_seed(tmp_path, capsys):
    out = tmp_path / "mc.json"
    code, cap = invoke(["simulate", "--gamma1", "0.05", "--gamma2", "0.05",
                     "--omega", "0.1", "--nbar1", "20", "--n-traj", "16",
                     "--t-end", "400", "--dt", "0.5", "--burn-in", "200",
                     "--seed", "4", "--output", str(out)], capsys)
    assert code == 0
    assert "seed=4" in cap.out
    stats = json.loads(out.read_text())
    assert stats["n_traj"] == 16
    assert stats["scheme"] == "exact_exponential"
    # deterministic rerun produces identical bytes
    out2 = tmp_path / "mc2.json"
    invoke(["simulate", "--config", str(out) + ".meta.json",
         "--output", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_collective_output(tmp_path, capsys):
    out = tmp_path / "coll.json"
    code, cap = invoke(["collective", "--g1", "0.3", "--g2", "0.3",
                     "--omega", "0", "--gamma1", "0", "--gamma2", "0",
                     "--output", str(out)], capsys)
    assert code == 0
    assert "labeling=collective" in cap.out
    payload = json.loads(out.read_text())
    assert payload["rate_plus"][0] == pytest.approx(0.18, abs=1e-12)
    assert abs(payload["rate_minus"][0]) < 1e-12


def test_three_wave_trajectory_csv(tmp_path):
    # the CLI pins kappa2 = 1 (unit convention), so check decay against
    # the known exponential rather than the lossless invariants
    out = tmp_path / "tw.csv"
    code = invoke(["three-wave", "--a1=1.0", "--a2=0.5", "--kappa1", "0.3",
                "--gamma", "0.1", "--t-end", "5", "--dt", "0.01",
                "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert "time unit: 1/kappa2" in lines[0]
    assert lines[1].startswith("# t, Re(a1)")
    data = np.loadtxt(out, delimiter=",")
    assert data.shape == (501, 7)
    a2 = np.hypot(data[:, 3], data[:, 4])
    assert np.allclose(a2, 0.5 * np.exp(-data[:, 0]), atol=1e-9)


def test_coupling_command_from_mode_files(tmp_path, capsys):
    n = 24
    ax = np.linspace(0.0, 1.0, n)
    axes = (ax, ax, ax)
    q = 0.1
    k1 = np.array([0.7, 0.0, 0.0])
    save_mode_field(tmp_path / "phi1.txt",
                    plane_wave(axes, k1, [0, 1, 0]))
    save_mode_field(tmp_path / "phi2.txt",
                    plane_wave(axes, k1 + [q, 0, 0], [0, 1, 0]))
    save_mode_field(tmp_path / "psi.txt",
                    plane_wave(axes, [q, 0, 0], [1, 0, 0]))
    code, cap = invoke(["coupling",
                     "--phi1", str(tmp_path / "phi1.txt"),
                     "--phi2", str(tmp_path / "phi2.txt"),
                     "--psi", str(tmp_path / "psi.txt"),
                     "--gamma-e", "2.0", "--omega-c1", "3.0",
                     "--omega-c2", "4.0", "--eps1", "1.5", "--eps2", "2.5"],
                    capsys)
    assert code == 0
    pref = 0.5 * 2.0 * np.sqrt(4.0 * 3.0 / (2.5 * 1.5))
    line = [ln for ln in cap.out.splitlines() if ln.startswith("abs=")][0]
    got = float(line.split()[0].split("=")[1])
    assert got == pytest.approx(pref * q, rel=1e-4)


def test_input_files_are_not_mutated(tmp_path):
    cfg = tmp_path / "run.cfg"
    text = "g1 = 0.1\nnbar1 = 3\n"
    cfg.write_text(text)
    invoke(["cooling-ratio", "--config", str(cfg), "--gamma1", "0.01",
         "--gamma2", "0.01"])
    assert cfg.read_text() == text


def test_run_config_direct_invocation(capsys):
    code = run(RunConfig("cooling-ratio",
                         {"gamma1": 0.01, "gamma2": 0.01, "nbar1": 5.0}))
    assert code == 0
    assert "R=1.000" in capsys.readouterr().out


def test_run_config_rejects_unknown_command():
    with pytest.raises(CliError, match="unknown command"):
        RunConfig("no-such-command")


def test_run_config_reports_missing_required(capsys):
    code = run(RunConfig("sweep", {"axis": "g2"}))
    assert code == 1
    assert "missing required" in capsys.readouterr().err


def test_run_config_rejects_unknown_option(capsys):
    code = run(RunConfig("cooling-ratio", {"bogus": 1}))
    assert code == 1
    assert "unknown option" in capsys.readouterr().err

"""End-to-end command-line runs: files, manifests, exit codes, determinism."""
import json

import numpy as np
import pytest

from moire_ladder.cli import main, resolve_config
from moire_ladder.fileio import read_csv_strict, read_pgm, sha256_of


def run(tmp_path, *argv):
    out = tmp_path / "run"
    code = main([*argv, "--out", str(out)])
    return code, out


def check_manifest(outdir):
    manifest = json.loads((outdir / "manifest.json").read_text())
    for entry in manifest["files"]:
        path = outdir / entry["name"]
        assert path.exists()
        assert sha256_of(path) == entry["sha256"]
        assert path.stat().st_size == entry["bytes"]
    for name in ("tool", "version", "backend", "command", "config",
                 "duration_seconds"):
        assert name in manifest
    return manifest


def check_all_csvs(outdir):
    for path in outdir.glob("*.csv"):
        header, rows = read_csv_strict(path)
        assert header and rows is not None


class TestSpectrumCommand:
    def test_tetramerized_real_bands(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--model", "tetramerized",
                        "--w", "0.5", "--v", "0.1", "--kappa", "1",
                        "--gamma", "0.395", "--k-points", "64")
        assert code == 0
        manifest = check_manifest(out)
        assert manifest["extra"]["nonreal_bands"] == 0
        header, rows = read_csv_strict(out / "dispersion.csv")
        assert header == ["k", "band", "re", "im", "nonreal"]
        assert len(rows) == 64 * 4
        assert all(float(r[3]) == 0.0 for r in rows)

    def test_crossover_flags_nonreal(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--model", "crossover",
                        "--w", "0.3", "--v", "0.3", "--kappa-prime", "0.37",
                        "--gamma", "0.01", "--k-points", "64")
        assert code == 0
        manifest = check_manifest(out)
        assert manifest["extra"]["nonreal_bands"] > 0
        _, rows = read_csv_strict(out / "dispersion.csv")
        assert any(r[4] == "1" for r in rows)

    def test_zero_gamma_all_real(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--model", "dimerized",
                        "--gamma", "0", "--k-points", "64")
        assert code == 0
        _, rows = read_csv_strict(out / "dispersion.csv")
        assert all(float(r[3]) == 0.0 for r in rows)

    def test_finite_eigenvalues(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--model", "tetramerized",
                        "--gamma", "0.395", "--cells", "4", "--k-points", "64",
                        "--finite")
        assert code == 0
        header, rows = read_csv_strict(out / "eigenvalues.csv")
        assert header == ["index", "re", "im"]
        assert len(rows) == 16


class TestPhaseDiagramCommand:
    def test_small_tetramerized_grid(self, tmp_path):
        code, out = run(tmp_path, "phase-diagram", "--model", "tetramerized",
                        "--resolution", "7", "--k-points", "64")
        assert code == 0
        manifest = check_manifest(out)
        assert manifest["extra"]["saturated_cells"] == 0
        header, rows = read_csv_strict(out / "phase_diagram.csv")
        assert len(rows) == 49
        for row in rows:
            v, w, gc = float(row[0]), float(row[1]), float(row[2])
            assert gc == pytest.approx(abs(w - v), abs=1e-5)
        pixels, comment = read_pgm(out / "phase_diagram.pgm")
        assert pixels.shape == (7, 7)
        assert "max=" in comment

    def test_csv_only_format(self, tmp_path):
        code, out = run(tmp_path, "phase-diagram", "--model", "tetramerized",
                        "--resolution", "3", "--k-points", "64",
                        "--format", "csv")
        assert code == 0
        assert not (out / "phase_diagram.pgm").exists()


class TestClusterCommand:
    def test_all_reference_cases(self, tmp_path):
        code, out = run(tmp_path, "cluster", "--t-max", "10", "--dt", "0.05")
        assert code == 0
        names = sorted(p.name for p in out.glob("cluster_*.csv"))
        assert names == [
            "cluster_case1_tetramer_oscillating.csv",
            "cluster_case2_tetramer_growing.csv",
            "cluster_case3_tetramer_ep.csv",
            "cluster_case4_dimer_oscillating.csv",
        ]
        manifest = check_manifest(out)
        assert manifest["extra"]["max_abs_diff"] < 1e-6
        header, rows = read_csv_strict(out / "cluster_case3_tetramer_ep.csv")
        assert header == ["t", "P_formula", "P_numeric", "abs_diff"]
        last = rows[-1]
        assert float(last[1]) == pytest.approx(51.0)  # 1 + 2 g^2 t^2 at t=10

    def test_single_case(self, tmp_path):
        code, out = run(tmp_path, "cluster", "--case", "4", "--t-max", "5",
                        "--dt", "0.05")
        assert code == 0
        assert (out / "cluster_case4_dimer_oscillating.csv").exists()

    def test_custom_dimer_broken_rejected(self, tmp_path):
        code, _ = run(tmp_path, "cluster", "--cluster", "dimer",
                      "--gamma", "1.2", "--kappa", "1.0")
        assert code == 2


class TestEvolveCommand:
    def test_cluster_model(self, tmp_path):
        code, out = run(tmp_path, "evolve", "--model", "tetramer-cluster",
                        "--gamma", "0.395", "--t-max", "10")
        assert code == 0
        check_manifest(out)
        check_all_csvs(out)
        header, rows = read_csv_strict(out / "trajectory_total.csv")
        assert header == ["t", "P_total"]
        assert len(rows) == 201
        pixels, _ = read_pgm(out / "heatmap_global.pgm")
        assert pixels.shape == (201, 2)

    def test_hermitian_ladder_conserves_probability(self, tmp_path):
        code, out = run(tmp_path, "evolve", "--model", "dimerized",
                        "--gamma", "0", "--cells", "4", "--t-max", "5")
        assert code == 0
        _, rows = read_csv_strict(out / "trajectory_total.csv")
        totals = np.array([float(r[1]) for r in rows])
        assert np.max(np.abs(totals - 1.0)) < 1e-9

    def test_truncation_reported(self, tmp_path):
        code, out = run(tmp_path, "evolve", "--model", "dimer-cluster",
                        "--kappa", "0.3", "--gamma", "5.0", "--t-max", "100")
        assert code == 0
        manifest = check_manifest(out)
        assert manifest["extra"]["truncated"] is True

    def test_numerical_failure_exit_code(self, tmp_path):
        # gamma so large the one-step propagator overflows in expm
        code, _ = run(tmp_path, "evolve", "--model", "dimer-cluster",
                      "--kappa", "0.3", "--gamma", "1e7", "--t-max", "1")
        assert code == 3


class TestMoireCommand:
    def test_small_pipeline(self, tmp_path):
        code, out = run(tmp_path, "moire", "--sites", "224", "--mismatch",
                        "1/51", "--gamma", "0.2", "--t-max", "5")
        assert code == 0
        manifest = check_manifest(out)
        assert manifest["extra"]["label_period"] == 100
        assert manifest["extra"]["sites_chain1"] == 224
        for name in ("couplings.csv", "regions.csv", "region_probabilities.csv",
                     "trajectory_total.csv", "trajectory_sites.csv",
                     "heatmap_global.pgm", "heatmap_perslice.pgm"):
            assert (out / name).exists(), name
        check_all_csvs(out)

    def test_fraction_mismatch_parsing(self, tmp_path):
        cfg = resolve_config("moire", None, {"mismatch": "1/301"})
        assert cfg["mismatch"] == pytest.approx(1.0 / 301.0)

    def test_too_few_periods_rejected(self, tmp_path):
        code, _ = run(tmp_path, "moire", "--sites", "60", "--mismatch", "1/51",
                      "--t-max", "1")
        assert code == 2


class TestConfigHandling:
    def test_config_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"model": "tetramerized", "gamma": 0.1,
                                        "k_points": 64}))
        out = tmp_path / "o"
        code = main(["spectrum", "--config", str(cfg_path), "--gamma", "0.2",
                     "--out", str(out)])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["gamma"] == 0.2
        assert manifest["config"]["k_points"] == 64

    def test_unknown_key_rejected(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"model": "tetramerized", "bogus": 1}))
        code = main(["spectrum", "--config", str(cfg_path),
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_invalid_model_rejected(self, tmp_path):
        code, _ = run(tmp_path, "spectrum", "--model", "pentamerized")
        assert code == 2

    def test_manifest_config_round_trips(self, tmp_path):
        code, out = run(tmp_path, "spectrum", "--model", "crossover",
                        "--gamma", "0.17", "--k-points", "64")
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        echo_path = tmp_path / "echo.json"
        echo_path.write_text(json.dumps(manifest["config"]))
        again = resolve_config("spectrum", echo_path, {})
        assert again == manifest["config"]

    def test_reproducible_data_files(self, tmp_path):
        hashes = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            code = main(["moire", "--sites", "104", "--mismatch", "1/51",
                         "--gamma", "0.2", "--t-max", "2", "--out", str(out)])
            assert code == 0
            manifest = json.loads((out / "manifest.json").read_text())
            hashes.append({e["name"]: e["sha256"] for e in manifest["files"]})
        assert hashes[0] == hashes[1]

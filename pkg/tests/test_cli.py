"""End-to-end command-line tests driving the in-process service."""

import json

import numpy as np
import pytest

from spikecca import ModelConfig, SampleSeed, SpikeSpec, sample_spiked
from spikecca.cli import main

SPECTRUM = "0.829 0.520 0.359 0.107 0.094 0.038"


def _fmt_rows(matrix):
    return "\n".join(",".join(f"{v:.10f}" for v in row) for row in matrix) + "\n"


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli-data")
    pair = sample_spiked(ModelConfig(4, 3, 120), SpikeSpec((0.6,)), SampleSeed(99))
    obs = np.hstack([pair.x.T, pair.y.T])  # observations in rows

    (d / "combined.csv").write_text(
        "x1,x2,x3,x4,y1,y2,y3\n" + _fmt_rows(obs))
    (d / "combined_noheader.csv").write_text(_fmt_rows(obs))
    (d / "combined_semicolon.csv").write_text(_fmt_rows(obs).replace(",", ";"))
    (d / "x.csv").write_text(_fmt_rows(obs[:, :4]))
    (d / "y.csv").write_text(_fmt_rows(obs[:, 4:]))
    (d / "xt.csv").write_text(_fmt_rows(obs[:, :4].T))
    (d / "yt.csv").write_text(_fmt_rows(obs[:, 4:].T))
    (d / "spectrum.txt").write_text(SPECTRUM + "\n")
    (d / "missing.csv").write_text("1.0,2.0,3.0\n4.0,,6.0\n")
    (d / "nonnumeric.csv").write_text("1.0,2.0,3.0\n4.0,five,6.0\n")
    (d / "zero_x.csv").write_text(
        "\n".join(f"0.0,0.0,{a:.6f},{b:.6f}" for a, b in
                  np.random.default_rng(3).normal(size=(40, 2))) + "\n")
    (d / "k0.json").write_text(json.dumps({
        "study": "k0",
        "scenarios": [{"p": 10, "q": 5, "n": 100, "spikes": [0.8]}],
        "reps": 3,
        "seed": 4,
    }))
    (d / "fluct.json").write_text(json.dumps({
        "study": "fluctuation",
        "scenarios": [{"p": 30, "q": 15, "n": 300, "spikes": [0.7]}],
        "reps": 4,
        "seed": 5,
    }))
    (d / "bad.json").write_text("{oops")
    return d


class TestLsd:
    def test_constants(self, capsys):
        assert main(["lsd", "--c1", "0.1", "--c2", "0.2"]) == 0
        out = capsys.readouterr().out
        assert "d_minus = 0.020000" in out
        assert "d_plus = 0.500000" in out
        assert "r_c = 0.166667" in out

    def test_grid(self, capsys):
        assert main(["lsd", "--c1", "0.1", "--c2", "0.2", "--grid", "5"]) == 0
        lines = capsys.readouterr().out.splitlines()
        start = lines.index("x,density")
        assert len(lines) - (start + 1) == 5

    def test_json(self, capsys):
        assert main(["lsd", "--c1", "0.1", "--c2", "0.2", "--json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["d_plus"] == pytest.approx(0.5)

    def test_domain_error_exit_code(self, capsys):
        assert main(["lsd", "--c1", "0.7", "--c2", "0.5"]) == 2
        assert "model_domain" in capsys.readouterr().err


class TestEstimateSpectrum:
    def test_pipeline_output(self, data_dir, capsys):
        rc = main(["estimate", "--spectrum", str(data_dir / "spectrum.txt"),
                   "--p", "8", "--q", "6", "--n", "44"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "p = 8, q = 6, effective n = 44" in out
        assert "test independence: statistic 4.7465" in out
        assert "-> reject, p = 4.14e-05" in out
        assert "k_hat = 1" in out
        assert "rho_hat_1 = 0.8637" in out

    def test_spectrum_needs_dimensions(self, data_dir, capsys):
        rc = main(["estimate", "--spectrum", str(data_dir / "spectrum.txt"),
                   "--p", "8"])
        assert rc == 2
        assert "--spectrum needs" in capsys.readouterr().err

    def test_saturated_dimensions_exit_code(self, data_dir, capsys):
        rc = main(["estimate", "--spectrum", str(data_dir / "spectrum.txt"),
                   "--p", "8", "--q", "6", "--n", "14"])
        assert rc == 3
        assert "data_shape" in capsys.readouterr().err


class TestEstimateCsv:
    def _run(self, argv, capsys):
        rc = main(argv)
        captured = capsys.readouterr()
        assert rc == 0, captured.err
        return captured.out

    def test_header_names_with_complement(self, data_dir, capsys):
        out = self._run(["estimate", "--data", str(data_dir / "combined.csv"),
                         "--header", "--x-cols", "x1,x2,x3,x4"], capsys)
        assert "p = 4, q = 3, effective n = 119" in out

    def test_index_ranges_match_header_route(self, data_dir, capsys):
        by_name = self._run(["estimate", "--data", str(data_dir / "combined.csv"),
                             "--header", "--x-cols", "x1,x2,x3,x4"], capsys)
        by_range = self._run(["estimate", "--data", str(data_dir / "combined_noheader.csv"),
                              "--x-cols", "0-3", "--y-cols", "4-6"], capsys)
        assert by_range == by_name

    def test_two_file_route_matches(self, data_dir, capsys):
        combined = self._run(["estimate", "--data", str(data_dir / "combined_noheader.csv"),
                              "--x-cols", "0-3"], capsys)
        split = self._run(["estimate", "--x-file", str(data_dir / "x.csv"),
                           "--y-file", str(data_dir / "y.csv")], capsys)
        assert split == combined

    def test_transpose_route_matches(self, data_dir, capsys):
        normal = self._run(["estimate", "--x-file", str(data_dir / "x.csv"),
                            "--y-file", str(data_dir / "y.csv")], capsys)
        transposed = self._run(["estimate", "--x-file", str(data_dir / "xt.csv"),
                                "--y-file", str(data_dir / "yt.csv"),
                                "--transpose"], capsys)
        assert transposed == normal

    def test_custom_delimiter(self, data_dir, capsys):
        out = self._run(["estimate", "--data", str(data_dir / "combined_semicolon.csv"),
                         "--delimiter", ";", "--x-cols", "0-3"], capsys)
        assert "p = 4, q = 3" in out

    def test_no_center_keeps_n(self, data_dir, capsys):
        out = self._run(["estimate", "--data", str(data_dir / "combined_noheader.csv"),
                         "--x-cols", "0-3", "--no-center"], capsys)
        assert "effective n = 120" in out

    def test_missing_value_exit_code(self, data_dir, capsys):
        rc = main(["estimate", "--data", str(data_dir / "missing.csv"),
                   "--x-cols", "0"])
        assert rc == 3
        assert "missing value" in capsys.readouterr().err

    def test_non_numeric_exit_code(self, data_dir, capsys):
        rc = main(["estimate", "--data", str(data_dir / "nonnumeric.csv"),
                   "--x-cols", "0"])
        assert rc == 3
        assert "non-numeric" in capsys.readouterr().err

    def test_column_errors(self, data_dir, capsys):
        path = str(data_dir / "combined_noheader.csv")
        assert main(["estimate", "--data", path,
                     "--x-cols", "0-3", "--y-cols", "3-6"]) == 3
        assert "overlap" in capsys.readouterr().err
        assert main(["estimate", "--data", path, "--x-cols", "0,0"]) == 3
        assert "duplicate" in capsys.readouterr().err
        assert main(["estimate", "--data", path, "--x-cols", "0-9"]) == 3
        assert "out of range" in capsys.readouterr().err
        assert main(["estimate", "--data", path]) == 2

    def test_x_file_needs_y_file(self, data_dir, capsys):
        assert main(["estimate", "--x-file", str(data_dir / "x.csv")]) == 2
        assert "together" in capsys.readouterr().err

    def test_rank_deficiency_exit_code(self, data_dir, capsys):
        rc = main(["estimate", "--data", str(data_dir / "zero_x.csv"),
                   "--x-cols", "0,1"])
        assert rc == 4
        assert "rank_deficiency" in capsys.readouterr().err


class TestStudy:
    def test_preset_writes_deterministic_outputs(self, tmp_path, capsys):
        for sub in ("a", "b"):
            rc = main(["study", "--preset", "table2-small", "--reps", "2",
                       "--seed", "7", "--out-dir", str(tmp_path / sub),
                       "--prefix", "run"])
            assert rc == 0
        out = capsys.readouterr().out
        assert "wrote" in out
        first = (tmp_path / "a" / "run.csv").read_bytes()
        second = (tmp_path / "b" / "run.csv").read_bytes()
        assert first == second
        assert (tmp_path / "a" / "run_summary.txt").exists()

    def test_simulate_alias_with_config(self, data_dir, tmp_path, capsys):
        rc = main(["simulate", "--config", str(data_dir / "k0.json"),
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        # default prefix falls back to the study kind
        assert (tmp_path / "k0.csv").exists()
        assert "true count 1" in (tmp_path / "k0_summary.txt").read_text()

    def test_fluctuation_writes_histograms(self, data_dir, tmp_path, capsys):
        rc = main(["study", "--config", str(data_dir / "fluct.json"),
                   "--out-dir", str(tmp_path), "--prefix", "f"])
        assert rc == 0
        hist = json.loads((tmp_path / "f_histograms.json").read_text())
        assert "outlier_stat_1" in hist

    def test_json_mode_writes_no_files(self, data_dir, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rc = main(["study", "--config", str(data_dir / "k0.json"), "--json"])
        assert rc == 0
        body = json.loads(capsys.readouterr().out)
        assert body["study"] == "k0"
        assert list(tmp_path.iterdir()) == []

    def test_preset_xor_config(self, data_dir, capsys):
        assert main(["study"]) == 2
        assert main(["study", "--preset", "null-esd",
                     "--config", str(data_dir / "k0.json")]) == 2

    def test_unknown_preset_lists_available(self, capsys):
        assert main(["study", "--preset", "table99"]) == 5
        err = capsys.readouterr().err
        assert "table99" in err and "table1" in err

    def test_bad_config_json(self, data_dir, capsys):
        assert main(["study", "--config", str(data_dir / "bad.json")]) == 5
        assert "not valid JSON" in capsys.readouterr().err

    def test_reps_override_applies(self, data_dir, capsys):
        rc = main(["study", "--config", str(data_dir / "k0.json"),
                   "--reps", "5", "--json"])
        assert rc == 0
        body = json.loads(capsys.readouterr().out)
        assert body["meta"]["reps"] == 5


class TestPresetsCommand:
    def test_lists_names(self, capsys):
        assert main(["presets"]) == 0
        names = capsys.readouterr().out.split()
        assert "table1" in names and "figure2" in names

    def test_json(self, capsys):
        assert main(["presets", "--json"]) == 0
        names = json.loads(capsys.readouterr().out)
        assert "table4" in names


class TestSeedEnvironment:
    def test_env_seed_used_when_flag_absent(self, data_dir, capsys, monkeypatch):
        monkeypatch.setenv("SPIKECCA_SEED", "123")
        rc = main(["study", "--config", str(data_dir / "k0.json"), "--json"])
        assert rc == 0
        body = json.loads(capsys.readouterr().out)
        assert body["meta"]["root_seed"] == 123

    def test_flag_beats_environment(self, data_dir, capsys, monkeypatch):
        monkeypatch.setenv("SPIKECCA_SEED", "123")
        rc = main(["study", "--config", str(data_dir / "k0.json"),
                   "--seed", "321", "--json"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["meta"]["root_seed"] == 321

    def test_invalid_env_seed(self, data_dir, capsys, monkeypatch):
        monkeypatch.setenv("SPIKECCA_SEED", "later")
        assert main(["study", "--config", str(data_dir / "k0.json")]) == 5
        assert "SPIKECCA_SEED" in capsys.readouterr().err

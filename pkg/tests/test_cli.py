import json

import pytest

from lambdapulse import save_params
from lambdapulse.cli import main

from conftest import FAST_STEPS


@pytest.fixture()
def params_file(ref, tmp_path):
    path = tmp_path / "params.json"
    save_params(ref, path)
    return str(path)


@pytest.fixture()
def zeroed_file(ref, tmp_path):
    path = tmp_path / "zeroed.json"
    save_params(ref.with_sines([0.0] * 8), path)
    return str(path)


class TestValidate:
    def test_reference_passes(self, params_file, capsys):
        assert main(["validate", "--params", params_file]) == 0
        out = capsys.readouterr().out
        assert "res14 = 0.4999" in out
        assert "boundary-safe: yes" in out

    def test_zeroed_coefficients_fail(self, zeroed_file):
        assert main(["validate", "--params", zeroed_file]) == 1

    def test_missing_file(self, tmp_path):
        assert main(["validate", "--params", str(tmp_path / "nope.json")]) == 2

    def test_malformed_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["validate", "--params", str(bad)]) == 2


class TestSingleCommands:
    def test_synth(self, params_file, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["synth", "--params", params_file, "-o", str(out), "--samples", "101"]) == 0
        text = (out / "waveform.csv").read_text()
        assert text.startswith("t_us,omega_p_rad_per_us,omega_s_rad_per_us\n")
        assert len(text.splitlines()) == 102
        assert "MHz" in capsys.readouterr().out

    def test_propagate(self, params_file, tmp_path, capsys):
        out = tmp_path / "o"
        code = main(
            ["propagate", "--params", params_file, "-o", str(out), "--steps", str(FAST_STEPS)]
        )
        assert code == 0
        assert (out / "trajectory.csv").exists()
        text = capsys.readouterr().out
        assert "P1 = 0.47" in text
        assert "P0 = 0.52" in text

    def test_propagate_step_too_coarse_exits_one(self, params_file, tmp_path, capsys):
        code = main(
            [
                "propagate",
                "--params",
                params_file,
                "-o",
                str(tmp_path),
                "--steps",
                "100",
                "--detuning-khz",
                "5000",
                "--rabi-scale",
                "5.0",
            ]
        )
        assert code == 1
        assert "StepTooCoarse" in capsys.readouterr().err

    def test_sweep_detuning_rows(self, params_file, tmp_path):
        out = tmp_path / "o"
        code = main(
            [
                "sweep-detuning", "--params", params_file, "-o", str(out),
                "--min-khz", "-100", "--max-khz", "100", "--points", "3",
                "--steps", str(FAST_STEPS),
            ]
        )
        assert code == 0
        lines = (out / "sweep_detuning.csv").read_text().splitlines()
        assert lines[0] == "detuning_khz,fidelity,p1,pe,p0"
        assert len(lines) == 4

    def test_sensitivity_prints_qs(self, params_file, tmp_path, capsys):
        assert main(["sensitivity", "--params", params_file, "-o", str(tmp_path)]) == 0
        assert "qs_numeric = 0.0136" in capsys.readouterr().out

    def test_beam_single_point(self, params_file, tmp_path, capsys):
        code = main(
            [
                "beam", "--params", params_file, "-o", str(tmp_path),
                "--r-over-w0", "0.001", "--rings", "10", "--steps", str(FAST_STEPS),
            ]
        )
        assert code == 0
        assert "effective fidelity" in capsys.readouterr().out

    def test_optimize_writes_artifacts(self, params_file, tmp_path):
        out = tmp_path / "o"
        code = main(
            [
                "optimize", "--params", params_file, "-o", str(out),
                "--budget", "52", "--seed", "4", "--steps", str(FAST_STEPS),
            ]
        )
        assert code == 0
        assert (out / "optimized_params.json").exists()
        trace = (out / "optimize_trace.csv").read_text().splitlines()
        assert trace[0].startswith("iteration,scalar,band_infid,leak,qs,a3")

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["sweep-detuning", "--points", "x"])
        assert exc.value.code == 2


class TestReproduce:
    def test_quick_run_with_skip(self, tmp_path, capsys):
        out = tmp_path / "repro"
        code = main(["reproduce", "-o", str(out), "--quick", "--skip", "fig6"])
        assert code == 0
        present = {p.name for p in out.iterdir()}
        assert "fig6_beam.csv" not in present
        for name in (
            "fig2_waveform.csv",
            "fig2_populations.csv",
            "fig3_4_detuning.csv",
            "fig5_rabi.csv",
            "fig7_a2.csv",
            "fig8_c1.csv",
            "summary.json",
        ):
            assert name in present
        summary = json.loads((out / "summary.json").read_text())
        assert summary["checks"] == {k: True for k in summary["checks"]}
        assert 0.0117 <= summary["metrics"]["qs"] <= 0.0157
        assert summary["metrics"]["band_min_fidelity"] >= 0.995
        assert "frequency_convention" in summary

    def test_rerun_is_bit_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["reproduce", "--quick", "--skip", "fig6", "--skip", "fig5", "--skip", "fig7"]
        assert main(args + ["-o", str(a)]) == 0
        assert main(args + ["-o", str(b)]) == 0
        for name in ("fig2_waveform.csv", "fig3_4_detuning.csv", "fig8_c1.csv", "summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_outdir_env_var(self, params_file, tmp_path, monkeypatch):
        monkeypatch.setenv("LAMBDAPULSE_OUTDIR", str(tmp_path / "envout"))
        assert main(["synth", "--params", params_file, "--samples", "11"]) == 0
        assert (tmp_path / "envout" / "waveform.csv").exists()

import json
import math
import os

import pytest

import fato.cli as cli
from fato.dynamics import NoConvergence

PI = math.pi


def run(capsys, *argv):
    code = cli.main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_help_exits_zero():
    for argv in (["--help"], ["synth", "--help"], ["waveform", "--help"],
                 ["fidelity", "--help"], ["sweep", "--help"],
                 ["swap2q", "--help"]):
        with pytest.raises(SystemExit) as exc:
            cli.main(argv)
        assert exc.value.code == 0


def test_synth_weak_x(capsys):
    code, out, _ = run(capsys, "synth", "--gate", "x", "--theta-frac", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert len(doc["bangs"]) == 5
    levels = [b["level"] for b in doc["bangs"]]
    assert levels == [1.0, -1.0, 1.0, -1.0, 1.0]
    omega = doc["params"]["omega"]
    assert doc["total_time"] == pytest.approx(5 * PI / omega, rel=1e-12)
    assert abs(doc["gate_fidelity_check"] - 1.0) < 1e-12


def test_synth_strong_y_middle_off(capsys):
    code, out, _ = run(capsys, "synth", "--gate", "y", "--theta",
                       repr(PI / 3))
    assert code == 0
    doc = json.loads(out)
    levels = [b["level"] for b in doc["bangs"]]
    assert levels == [1.0, 0.0, -1.0]
    assert doc["t2x_parsing"] is None


def test_synth_strong_x_reports_parsing(capsys):
    code, out, _ = run(capsys, "synth", "--gate", "x", "--theta",
                       repr(PI / 3))
    assert code == 0
    doc = json.loads(out)
    assert doc["t2x_parsing"] is not None


def test_synth_theta_frac_equals_theta(capsys):
    _, frac_out, _ = run(capsys, "synth", "--gate", "x", "--theta-frac", "5")
    _, theta_out, _ = run(capsys, "synth", "--gate", "x", "--theta",
                          repr(PI / 10))
    assert frac_out == theta_out


def test_synth_missing_gate_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["synth", "--theta-frac", "5"])
    assert exc.value.code == 2


def test_drive_flags_mutually_exclusive(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["synth", "--gate", "x", "--theta", "0.3",
                  "--omega-bar", "0.5"])
    assert exc.value.code == 2
    assert "--theta" in capsys.readouterr().err


def test_waveform_zero_order_even_n_is_zero_line(capsys):
    code, out, _ = run(capsys, "waveform", "--gate", "y", "--theta-frac",
                       "4", "--order", "0", "--samples", "5")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "t,f"
    assert all(line.endswith(",0.0") for line in lines[1:])


def test_waveform_bad_samples(capsys):
    code, _, err = run(capsys, "waveform", "--gate", "x", "--theta-frac",
                       "5", "--order", "3", "--samples", "0")
    assert code == 2
    assert "--samples" in err


def test_waveform_deterministic_bytes(capsys):
    args = ("waveform", "--gate", "x", "--theta-frac", "5",
            "--bandwidth", "3.0", "--samples", "64")
    _, first, err1 = run(capsys, *args)
    _, second, err2 = run(capsys, *args)
    assert first == second
    assert err1 == err2


def test_waveform_sidecar_and_plot(tmp_path, capsys):
    out_path = tmp_path / "wf.csv"
    code, _, _ = run(capsys, "waveform", "--gate", "x", "--theta-frac", "5",
                     "--bandwidth", "3.0", "--samples", "32",
                     "--output", str(out_path), "--plot")
    assert code == 0
    meta = json.loads((tmp_path / "wf.csv.meta.json").read_text())
    assert meta["order"] == 7
    assert meta["tail_error"] > 0.0
    assert meta["gibbs_max"] > 1.0
    assert (tmp_path / "wf.png").stat().st_size > 0
    text = out_path.read_text()
    assert text.startswith("t,f\n") and text.endswith("\n")


def test_plot_requires_output(capsys):
    code, _, err = run(capsys, "waveform", "--gate", "x", "--theta-frac",
                       "5", "--order", "3", "--plot")
    assert code == 2
    assert "--output" in err


def test_fidelity_weak_has_rwa_column(capsys):
    code, out, _ = run(capsys, "fidelity", "--gate", "x", "--theta-frac",
                       "5", "--bandwidth", "3.0")
    assert code == 0
    doc = json.loads(out)
    for key in ("T", "K", "E_K", "F_sim", "F_analytic_main",
                "F_analytic_appendix", "F_rwa"):
        assert key in doc
    assert doc["K"] == 7
    assert doc["F_sim"] == pytest.approx(1.0 - 3.06e-5, abs=2e-5)


def test_fidelity_strong_no_rwa(capsys):
    code, out, _ = run(capsys, "fidelity", "--gate", "y", "--theta",
                       repr(PI / 3), "--bandwidth", "8.0")
    assert code == 0
    doc = json.loads(out)
    assert "F_rwa" not in doc
    assert doc["F_analytic_main"] == doc["F_analytic_appendix"]


def test_sub_fundamental_bandwidth_warns(capsys):
    code, out, err = run(capsys, "fidelity", "--gate", "x", "--theta-frac",
                         "5", "--bandwidth", "0.1")
    assert code == 0
    assert "bandwidth" in err
    assert json.loads(out)["K"] == 1


def test_sweep_grid_parse_errors(capsys):
    code, _, err = run(capsys, "sweep", "--kind", "bandwidth", "--gate",
                       "x", "--theta-frac", "5", "--grid", "1:2")
    assert code == 2
    assert "--grid" in err
    code, _, err = run(capsys, "sweep", "--kind", "bandwidth", "--gate",
                       "x", "--theta-frac", "5", "--grid", "2:1:3")
    assert code == 2


def test_sweep_bandwidth_golden_shape(capsys):
    code, out, _ = run(capsys, "sweep", "--kind", "bandwidth", "--gate",
                       "x", "--theta-frac", "5", "--grid", "2:4:2")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("x,fidelity_sim")
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "2.0"


def test_sweep_determinism_across_workers(capsys):
    args = ("sweep", "--kind", "bandwidth", "--gate", "x", "--theta-frac",
            "5", "--grid", "1.5:3:3")
    _, seq_out, _ = run(capsys, *args, "--workers", "1")
    _, par_out, _ = run(capsys, *args, "--workers", "4")
    assert seq_out == par_out


def test_sweep_theta_defaults_to_family_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--kind", "theta", "--gate", "y",
                       "--order", "4")
    assert code == 0
    rows = out.strip().split("\n")[1:]
    xs = [float(r.split(",")[0]) for r in rows]
    assert len(xs) == 8  # even n in 2..16
    assert xs[-1] == pytest.approx(PI / 4)


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise NoConvergence("refinement budget exhausted", 1e-3, 2 ** 20)
    monkeypatch.setattr(cli, "fato_propagation", boom)
    code, _, err = run(capsys, "fidelity", "--gate", "x", "--theta-frac",
                       "5", "--bandwidth", "3.0")
    assert code == 3
    assert "refinement budget" in err


def test_swap2q_default_report(capsys):
    code, out, _ = run(capsys, "swap2q", "--coupling", "1.0", "--amp",
                       "100.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["zz_time"] == pytest.approx(3 * PI / 2)
    assert doc["pulse_time"] == pytest.approx(4 * PI / 200)
    assert 1.0 - doc["F_rect"] == pytest.approx(2.096492e-4, rel=1e-3)


def test_swap2q_profiles_csv(capsys):
    code, out, _ = run(capsys, "swap2q", "--coupling", "1.0", "--amp",
                       "50.0", "--profiles")
    assert code == 0
    assert out.startswith("duration,amp_x,amp_y\n")
    assert len(out.strip().split("\n")) == 8


def test_swap2q_amp_sweep(capsys):
    code, out, _ = run(capsys, "swap2q", "--coupling", "1.0", "--sweep",
                       "amp", "--grid", "50:100:2")
    assert code == 0
    rows = out.strip().split("\n")[1:]
    infs = [1.0 - float(r.split(",")[1]) for r in rows]
    assert infs[0] > infs[1]


def test_output_file_uses_lf_newlines(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--kind", "bandwidth", "--gate", "x",
                     "--theta-frac", "5", "--grid", "2:3:2",
                     "--output", str(out_path))
    assert code == 0
    raw = out_path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")


def test_sweep_plot_renders(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--kind", "bandwidth", "--gate", "x",
                     "--theta-frac", "5", "--grid", "2:3:2",
                     "--output", str(out_path), "--plot")
    assert code == 0
    assert (tmp_path / "sweep.png").stat().st_size > 0

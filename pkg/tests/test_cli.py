import json

from smoothsgd.cli import main
from smoothsgd.reporting import read_config_header


def run_cli(*argv):
    return main(list(argv))


def test_preset_list(capsys):
    assert run_cli("preset", "list") == 0
    out = capsys.readouterr().out.splitlines()
    assert "figD-large" in out and "smooth-curves" in out


def test_preset_show(capsys):
    assert run_cli("preset", "show", "figD-large") == 0
    out = capsys.readouterr().out
    assert "objective.kind = sym_bump" in out
    assert "eta = 0.2" in out


def test_unknown_preset_lists_catalog(capsys):
    assert run_cli("preset", "show", "missing") == 1
    assert "figC-sep-small" in capsys.readouterr().err


def test_run_writes_deterministic_csvs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    args = ("run", "--preset", "figD-small", "--seed", "9",
            "--set", "run.T=2000", "--set", "run.trials=16")
    assert run_cli(*args, "--out", str(out1)) == 0
    assert run_cli(*args, "--out", str(out2)) == 0
    for name in ("trials.csv", "summary.csv"):
        a = (out1 / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b and len(a) > 0


def test_summary_header_round_trips(tmp_path):
    out1 = tmp_path / "a"
    assert run_cli("run", "--preset", "figD-small", "--seed", "5",
                   "--set", "run.T=2000", "--set", "run.trials=8",
                   "--out", str(out1)) == 0
    header = read_config_header(out1 / "summary.csv")
    cfg_path = tmp_path / "replay.cfg"
    cfg_path.write_text("".join(f"{k} = {v}\n" for k, v in header.items()))
    out2 = tmp_path / "b"
    assert run_cli("run", "--config", str(cfg_path), "--out", str(out2)) == 0
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
    assert (out1 / "trials.csv").read_bytes() == (out2 / "trials.csv").read_bytes()


def test_certify_subcommand(tmp_path, capsys):
    cfg = tmp_path / "q.cfg"
    cfg.write_text(
        "objective.kind = quadratic\nobjective.center = 1.0\n"
        "noise.kind = uniform\nnoise.r = 1.0\neta = 0.3\nseed = 1\n")
    assert run_cli("certify", "--config", str(cfg), "--out", str(tmp_path / "o")) == 0
    out = capsys.readouterr().out
    assert "c = " in out and "regime_ok = None" in out
    text = (tmp_path / "o" / "certificate.csv").read_text()
    assert text.splitlines()[-1].startswith("quadratic,")


def test_bounds_subcommand(tmp_path):
    cfg = tmp_path / "q.cfg"
    cfg.write_text(
        "objective.kind = quadratic\nobjective.center = 1.0\n"
        "noise.kind = uniform\nnoise.r = 1.0\neta = 0.3\nseed = 1\nrun.T = 1000\n")
    assert run_cli("bounds", "--config", str(cfg), "--out", str(tmp_path / "o")) == 0
    lines = (tmp_path / "o" / "bounds.csv").read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header.split(",")[:4] == ["problem", "eta", "T", "init_term"]


def test_landscape_subcommand(tmp_path):
    assert run_cli("landscape", "--preset", "smooth-curves",
                   "--grid-n", "101", "--out", str(tmp_path)) == 0
    lines = (tmp_path / "landscape.csv").read_text().splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "v,f,F,Fgrad"
    assert len(data) == 102


def test_unknown_config_key_is_an_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("objective.kidn = quadratic\n")
    assert run_cli("run", "--config", str(cfg), "--out", str(tmp_path)) == 1


def test_missing_inputs_is_usage_error(tmp_path):
    assert run_cli("run", "--out", str(tmp_path)) == 1


def test_selftest_passes(capsys):
    assert run_cli("selftest") == 0
    out = capsys.readouterr().out
    assert "quadrature_vs_closed_form: ok" in out


def test_selftest_fault_injection(capsys):
    assert run_cli("selftest", "--break-quadrature") == 1
    captured = capsys.readouterr()
    assert "quadrature_vs_closed_form" in captured.err


def test_selftest_json(capsys):
    assert run_cli("selftest", "--json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["phi_roundtrip"]["ok"] is True


def test_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("SMOOTHSGD_SEED", "321")
    out = tmp_path / "o"
    assert run_cli("run", "--preset", "figD-small",
                   "--set", "run.T=500", "--set", "run.trials=4",
                   "--out", str(out)) == 0
    header = read_config_header(out / "summary.csv")
    assert header["seed"] == "321"


def test_sweep_subcommand(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(
        "objective.kind = quadratic\nobjective.center = 1.0\n"
        "noise.kind = uniform\nnoise.r = 1.0\neta = 0.1\nseed = 2\n"
        "run.T = 4000\nrun.trials = 8\nrun.w0.kind = fixed\nrun.w0.value = 1.0\n"
        "sweep.etas = 0.2,0.1,0.05,0.025\n")
    assert run_cli("sweep", "--config", str(cfg), "--out", str(tmp_path / "o")) == 0
    lines = (tmp_path / "o" / "sweep.csv").read_text().splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "eta,mean_abs_tailavg,se,sqrt_time_avg_mse,se2"
    assert len(data) == 5


def test_strict_exit_on_verdict_failure(tmp_path):
    # a short noisy run seeded off-center has a tail mean visibly away from
    # the minimizer while the quadratic's averaged bound is exactly zero, so
    # verdict B fails and --strict maps that to exit 2
    cfg = tmp_path / "strict.cfg"
    cfg.write_text(
        "objective.kind = quadratic\nobjective.center = 1.0\n"
        "noise.kind = uniform\nnoise.r = 1.0\neta = 0.1\nseed = 6\n"
        "run.T = 20\nrun.trials = 16\nrun.w0.kind = fixed\n"
        "run.w0.value = 2.0\n")
    assert run_cli("run", "--config", str(cfg), "--out", str(tmp_path / "a")) == 0
    assert run_cli("run", "--config", str(cfg), "--strict",
                   "--out", str(tmp_path / "b")) == 2


def test_multi_eta_preset_run(tmp_path):
    out = tmp_path / "o"
    assert run_cli("run", "--preset", "fig2-sweep", "--seed", "3",
                   "--set", "run.T=1500", "--set", "run.trials=8",
                   "--out", str(out)) == 0
    assert (out / "sweep.csv").exists()
    assert (out / "trials_eta0.1.csv").exists()
    summary = [l for l in (out / "summary.csv").read_text().splitlines()
               if not l.startswith("#")]
    assert len(summary) == 6  # header + one row per eta

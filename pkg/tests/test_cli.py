import numpy as np
import pytest

from ensemblemix.cli import main
from ensemblemix.runner import run_config
from ensemblemix.scenarios import ConfigError, RunConfig, parse_config_text
from ensemblemix.series import TimeSeries

SMALL = ["--N", "10", "--cutoff", "4", "--beta", "1", "--omega", "0.5", "--delta-omega", "5",
         "--t-end", "0.2", "--sample-interval", "0.01"]


def run(*argv):
    return main(["run", "custom", *argv])


def test_zero_drive_gives_zero_excitation(tmp_path):
    out = tmp_path / "zero.csv"
    assert run(*SMALL, "--omega1", "0", "--omega2", "0", "--eta", "0", "-o", str(out)) == 0
    s = TimeSeries.from_csv(out)
    assert np.all(s["Ne1"] == 0) and np.all(s["Ne2"] == 0)


def test_output_roundtrip_and_header(tmp_path):
    out = tmp_path / "a.csv"
    assert run(*SMALL, "-o", str(out)) == 0
    text = out.read_text()
    assert text.startswith("# units")
    assert "# eta=0.5" in text and "resolved_cutoffs=4,4" in text
    s = TimeSeries.from_csv(out)
    cfg = RunConfig().with_updates({"N": 10, "cutoff": 4, "beta": 1.0, "omega": 0.5, "delta_omega": 5.0,
                                     "t_end": 0.2, "sample_interval": 0.01})
    ref = run_config(cfg).series
    for col in ("Ne1", "Ne2", "Imix_over_Ngamma", "trace_err"):
        assert np.array_equal(s[col], ref[col])


def test_bit_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(*SMALL, "-o", str(a)) == 0
    assert run(*SMALL, "-o", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("# small run\nN = 10\ncutoff=4\nbeta=1\nomega=0.5\nt_end=0.2\n"
                    "sample_interval=0.01\ndelta_omega=5\neta=0.1\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("--config", str(conf), "-o", str(a)) == 0
    assert "# eta=0.1" in a.read_text()
    assert run("--config", str(conf), "--eta", "0.5", "-o", str(b)) == 0
    assert "# eta=0.5" in b.read_text()
    direct = tmp_path / "d.csv"
    assert run(*SMALL, "-o", str(direct)) == 0
    assert np.array_equal(TimeSeries.from_csv(b)["Ne1"], TimeSeries.from_csv(direct)["Ne1"])


@pytest.mark.parametrize("argv", [
    ["--eta", "1.5"],
    ["--t-end", "-1"],
    ["--probe-times", "0.3333"],
    ["--order", "2"],
    ["--cutoff", "many"],
])
def test_bad_configuration_exits_2(argv, tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        code = run(*SMALL, *argv, "-o", str(tmp_path / "x.csv"))
        raise SystemExit(code)
    assert info.value.code == 2


def test_bad_config_file(tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("nonsense_key=3\n")
    assert run("--config", str(conf)) == 2
    with pytest.raises(ConfigError):
        parse_config_text("eta 0.5\n")


def test_unknown_scenario():
    assert main(["run", "fig9"]) == 2


def test_distribution_output(tmp_path):
    out = tmp_path / "d.csv"
    assert run(*SMALL, "--distribution", "--probe-times", "0.1,0.2", "-o", str(out)) == 0
    dist = (tmp_path / "d.dist.csv").read_text().splitlines()
    rows = [line.split(",") for line in dist if line and not line.startswith("#")]
    assert rows[0] == ["t_probe", "i", "P1", "P2"]
    body = np.array(rows[1:], dtype=float)
    assert set(body[:, 0]) == {0.1, 0.2}
    for t in (0.1, 0.2):
        block = body[body[:, 0] == t]
        assert block[:, 2].sum() == pytest.approx(1.0, abs=1e-10)
    assert any("poisson_distance1=" in line for line in dist)


def test_sweep_consistent_with_runs(tmp_path):
    sweep = tmp_path / "s.csv"
    assert main(["sweep", "custom", *SMALL, "--grid", "0,0.5", "--probe-times", "0.1,0.2",
                 "-o", str(sweep)]) == 0
    lines = [line for line in sweep.read_text().splitlines() if not line.startswith("#")]
    assert lines[0] == "eta,t_probe,Ne1"
    table = np.array([line.split(",") for line in lines[1:]], dtype=float)
    assert table[:, 0].tolist() == [0, 0, 0.5, 0.5]
    for eta in (0.0, 0.5):
        single = tmp_path / f"r{eta}.csv"
        assert run(*SMALL, "--eta", str(eta), "-o", str(single)) == 0
        s = TimeSeries.from_csv(single)
        for _, t, ne1 in table[table[:, 0] == eta]:
            assert ne1 == s.value_at("Ne1", t)


def test_cutoff_guard_exit_code(tmp_path):
    out = tmp_path / "g.csv"
    code = run("--N", "10", "--cutoff", "2", "--beta", "1", "--omega", "4", "--t-end", "1",
               "--sample-interval", "0.01", "-o", str(out))
    assert code == 3
    text = out.read_text()
    assert "aborted: CutoffExceeded" in text
    assert len(TimeSeries.from_csv(out)) >= 1


def test_validity_guard_exit_code(tmp_path):
    code = run("--N", "4", "--cutoff", "4", "--beta", "0", "--omega", "3", "--eta", "0", "--t-end", "1",
               "--sample-interval", "0.01", "--cutoff-guard", "off", "-o", str(tmp_path / "v.csv"))
    assert code == 4


def test_moment_oracle_report(tmp_path):
    out = tmp_path / "o.csv"
    assert run(*SMALL, "--order", "0", "--cutoff", "7", "--dt", "1e-3", "--oracle", "moments",
               "-o", str(out)) == 0
    report = [line for line in (tmp_path / "o.oracle.csv").read_text().splitlines()
              if not line.startswith("#")]
    diffs = np.array([line.split(",") for line in report[1:]], dtype=float)
    assert np.abs(diffs[:, -2:]).max() < 1e-7


def test_moment_oracle_needs_zeroth_order(tmp_path):
    assert run(*SMALL, "--oracle", "moments", "-o", str(tmp_path / "o.csv")) == 2


def test_list(capsys):
    assert main(["list"]) == 0
    names = {line.split()[0] for line in capsys.readouterr().out.splitlines()}
    assert {"fig2", "fig3", "fig4", "fig5", "custom"} <= names

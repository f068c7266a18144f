import numpy as np
import pytest

from lqcharge.cli import main
from lqcharge.harness import parse_csv
from lqcharge.scenario import load_scenario

SCENARIO_TOML = """\
label = "{label}"

[simulation]
ts = 1.0
seed = 3
feedback = "kalman"

[objective]
initial_soc = 0.30
target_soc = 0.40
duration = 300.0

[strategy]
name = "{name}"

[noise]
enabled = {noise}
"""


def write_scenario(path, name, noise="false", label=""):
    path.write_text(SCENARIO_TOML.format(name=name, noise=noise, label=label))
    return path


class TestLoadScenario:
    def test_parses_fields(self, tmp_path):
        p = write_scenario(tmp_path / "a.toml", "lqcwfts", label="demo")
        sc = load_scenario(p)
        assert sc.strategy == "lqcwfts"
        assert sc.label == "demo"
        assert sc.seed == 3
        assert sc.noise is None
        assert sc.objective.target_soc == 0.40

    def test_missing_required_key(self, tmp_path):
        from lqcharge.errors import InvalidParameterError

        p = tmp_path / "bad.toml"
        p.write_text('[strategy]\nname = "lqt"\n')
        with pytest.raises(InvalidParameterError):
            load_scenario(p)

    def test_unknown_strategy(self, tmp_path):
        from lqcharge.errors import InvalidParameterError

        p = write_scenario(tmp_path / "a.toml", "bogus")
        with pytest.raises(InvalidParameterError):
            load_scenario(p)


class TestRunCommand:
    def test_writes_trace_and_reports(self, tmp_path, capsys):
        p = write_scenario(tmp_path / "a.toml", "lqcwfts")
        out = tmp_path / "trace.csv"
        rc = main(["run", str(p), "--out", str(out)])
        captured = capsys.readouterr()
        assert rc == 0
        assert out.exists()
        assert "final SoC" in captured.err
        trace = parse_csv(out)
        assert len(trace.k) == 301
        assert trace.soc[-1] == pytest.approx(0.40, abs=1e-3)

    def test_seed_override_changes_noisy_output(self, tmp_path):
        p = write_scenario(tmp_path / "a.toml", "lqcwfts", noise="true")
        out1, out2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
        assert main(["run", str(p), "--out", str(out1), "--seed", "1"]) == 0
        assert main(["run", str(p), "--out", str(out2), "--seed", "2"]) == 0
        t1, t2 = parse_csv(out1), parse_csv(out2)
        assert not np.array_equal(t1.y, t2.y)

    def test_missing_file_exits_nonzero(self, tmp_path, capsys):
        rc = main(["run", str(tmp_path / "nope.toml")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        p = write_scenario(tmp_path / "a.toml", "bogus")
        rc = main(["run", str(p)])
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestCompareCommand:
    def test_table_on_stdout(self, tmp_path, capsys):
        write_scenario(tmp_path / "a.toml", "lqcwfts")
        write_scenario(tmp_path / "b.toml", "constant-current")
        rc = main(["compare", str(tmp_path)])
        captured = capsys.readouterr()
        assert rc == 0
        # Labels default to the file stems.
        assert "a" in captured.out and "b" in captured.out
        assert "final_soc" in captured.out

    def test_table_to_file(self, tmp_path, capsys):
        write_scenario(tmp_path / "a.toml", "ss-lqt")
        out = tmp_path / "summary.txt"
        rc = main(["compare", str(tmp_path), "--out", str(out)])
        assert rc == 0
        assert "final_soc" in out.read_text()

    def test_empty_directory_fails(self, tmp_path, capsys):
        rc = main(["compare", str(tmp_path)])
        assert rc == 1
        assert "no scenario files" in capsys.readouterr().err


class TestGainsCommand:
    @pytest.mark.parametrize("name", ["lqcwfts", "lqt", "ss-lqt"])
    def test_writes_schedule(self, tmp_path, capsys, name):
        p = write_scenario(tmp_path / "a.toml", name)
        out = tmp_path / "gains.csv"
        rc = main(["gains", str(p), "--out", str(out)])
        captured = capsys.readouterr()
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 301  # header + one row per step
        assert "wrote" in captured.err

    def test_constant_current_has_no_gains(self, tmp_path, capsys):
        p = write_scenario(tmp_path / "a.toml", "constant-current")
        rc = main(["gains", str(p)])
        assert rc == 1
        assert "no gain schedule" in capsys.readouterr().err


class TestShippedScenarios:
    def test_all_load(self):
        from pathlib import Path

        root = Path(__file__).resolve().parents[1] / "scenarios"
        paths = sorted(root.glob("*.toml"))
        assert len(paths) >= 3
        for p in paths:
            sc = load_scenario(p)
            assert sc.objective.horizon(sc.ts) == 7200

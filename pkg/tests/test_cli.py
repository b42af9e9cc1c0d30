import csv

import pytest

from xchan import __version__
from xchan.cli import DEFAULT_SEED, dispatch


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# xchan")
    rows = list(csv.reader(lines[1:]))
    return lines[0], rows[0], rows[1:]


@pytest.fixture
def co1_mix(tmp_path):
    path = tmp_path / "co1.toml"
    path.write_text("z1 = 0.5\nz2 = 0.5\n")
    return path


@pytest.fixture
def small_scenario(tmp_path):
    path = tmp_path / "scenario.toml"
    body = ["[sim]", "duration_s = 30000.0", "dt_s = 10.0", ""]
    orbs = [(300.0, 92.6, 0.0, 90.0), (300.0, 92.6, 90.0, 90.0),
            (400.0, 93.1, 180.0, 270.0), (400.0, 93.1, 270.0, 270.0)]
    for k, (alt, inc, raan, anom) in enumerate(orbs, 1):
        body += [f"[orbiter.{k}]", f"altitude_km = {alt}", f"inclination_deg = {inc}",
                 f"raan_deg = {raan}", f"anomaly_deg = {anom}", ""]
    body += ["[rover.1]", "latitude_deg = 76.0", "longitude_deg = -5.0", "",
             "[rover.2]", "latitude_deg = 76.0", "longitude_deg = 5.0", ""]
    path.write_text("\n".join(body))
    return path


class TestDof:
    def test_exact_pair_mix(self, co1_mix, capsys):
        assert dispatch(["dof", "--mix", str(co1_mix)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[1] == "lower,upper,exact,tdma,co1_gain,co2_gain"
        assert out[2] == "1.5,1.5,1.5,1.0,0.5,0.0"

    def test_malformed_mix_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("z1 = 0.5\nz2 = 0.4\n")
        assert dispatch(["dof", "--mix", str(bad)]) == 3
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "0.9" in err

    def test_missing_mix_file(self, tmp_path, capsys):
        assert dispatch(["dof", "--mix", str(tmp_path / "nope.toml")]) == 4

    def test_gap_stats(self, tmp_path):
        out = tmp_path / "stats.csv"
        code = dispatch(["dof", "--gap-stats", "--budgets", "0.2,0.5",
                         "--nmc", "2000", "--seed", "7", "--out", str(out)])
        assert code == 0
        _, header, rows = read_csv(out)
        assert header == ["budget", "max_gap", "mean_gap"]
        assert len(rows) == 2
        assert float(rows[0][1]) <= 0.1  # max gap at budget 0.2 is below 1/2 budget

    def test_requires_mix_or_stats(self, capsys):
        assert dispatch(["dof"]) == 3


class TestSchedule:
    def test_plan_csv(self, tmp_path, capsys):
        seq = tmp_path / "seq.txt"
        seq.write_text("z1\nz2\ns1\n")
        assert dispatch(["schedule", "--sequence", str(seq)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert "empirical_dof" in out[0]
        assert out[1] == "group_kind,slots,symbols"
        assert out[2] == "pair12,0;1,3"
        assert out[3] == "solo,2,1"


class TestRates:
    def test_columns_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["rates", "--model", "uniform", "--pgrid", "0,10", "--nmc", "5000",
                "--seed", "7"]
        assert dispatch(args + ["--out", str(a)]) == 0
        assert dispatch(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        comment, header, rows = read_csv(a)
        assert f"v{__version__}" in comment and "seed=7" in comment
        assert header[:8] == ["model", "P_dB", "A", "B", "C", "D", "E", "F"]
        assert float(rows[0][2]) == 1.0  # uniform A at 0 dB

    def test_bad_pgrid(self, capsys):
        assert dispatch(["rates", "--pgrid", "10,5", "--nmc", "10"]) == 3


class TestGap:
    def test_columns(self, co1_mix, tmp_path):
        out = tmp_path / "gap.csv"
        code = dispatch(["gap", "--mix", str(co1_mix), "--model", "uniform",
                         "--pgrid", "0,20", "--nmc", "20000", "--seed", "3",
                         "--out", str(out)])
        assert code == 0
        _, header, rows = read_csv(out)
        assert header == ["P_dB", "R_sum", "U1", "U2", "U3", "gap", "sigma"]
        for row in rows:
            assert float(row[5]) <= 6.2 + 3 * float(row[6])

    def test_asymmetric_mix_rejected(self, tmp_path, capsys):
        bad = tmp_path / "asym.toml"
        bad.write_text("z1 = 0.6\nz3 = 0.4\n")
        assert dispatch(["gap", "--mix", str(bad), "--nmc", "100"]) == 3
        assert "symmetric" in capsys.readouterr().err


class TestGainCurves:
    def test_columns(self, tmp_path):
        out = tmp_path / "gains.csv"
        code = dispatch(["gain-curves", "--model", "rayleigh", "--pgrid", "0,30",
                         "--nmc", "20000", "--seed", "5", "--out", str(out)])
        assert code == 0
        _, header, rows = read_csv(out)
        assert header == ["model", "P_dB", "gain_co1", "gain_co2", "sigma"]
        assert all(float(r[2]) > 0.3 for r in rows)


class TestOrbitCommands:
    def test_orbit_outputs(self, small_scenario, tmp_path):
        mixes = tmp_path / "mixes.csv"
        trace = tmp_path / "trace.csv"
        code = dispatch(["orbit", "--scenario", str(small_scenario),
                         "--out", str(mixes), "--trace-out", str(trace)])
        assert code == 0
        _, header, rows = read_csv(mixes)
        assert header[:2] == ["pair", "steps"] and header[2:] == [
            "s1", "s2", "s3", "s4", "m1", "m2", "b1", "b2",
            "z1", "z2", "z3", "z4", "i1", "i2", "f"]
        for row in rows:
            assert sum(float(v) for v in row[2:]) == pytest.approx(1.0, abs=1e-9)
        _, theader, trows = read_csv(trace)
        assert theader == ["t_s", "r1o1", "r1o2", "r1o3", "r1o4",
                           "r2o1", "r2o2", "r2o3", "r2o4"]
        assert len(trows) == 3000

    def test_compare_deterministic(self, small_scenario, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["compare", "--scenario", str(small_scenario), "--seed", "11"]
        assert dispatch(args + ["--out", str(a)]) == 0
        assert dispatch(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        _, header, rows = read_csv(a)
        assert rows[0][0] == "overall"
        assert header[4] == "dof_gain_percent"

    def test_builtin_scenario(self, tmp_path):
        out = tmp_path / "cmp.csv"
        code = dispatch(["compare", "--separation-km", "500", "--out", str(out)])
        assert code == 0
        _, _, rows = read_csv(out)
        assert 0.0 <= float(rows[0][4]) <= 20.0


class TestSeeding:
    def test_env_seed_when_flag_absent(self, co1_mix, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("XCHAN_SEED", "99")
        dispatch(["dof", "--mix", str(co1_mix)])
        assert "seed=99" in capsys.readouterr().out

    def test_flag_beats_env(self, co1_mix, monkeypatch, capsys):
        monkeypatch.setenv("XCHAN_SEED", "99")
        dispatch(["dof", "--mix", str(co1_mix), "--seed", "5"])
        assert "seed=5" in capsys.readouterr().out

    def test_default_seed(self, co1_mix, monkeypatch, capsys):
        monkeypatch.delenv("XCHAN_SEED", raising=False)
        dispatch(["dof", "--mix", str(co1_mix)])
        assert f"seed={DEFAULT_SEED}" in capsys.readouterr().out


class TestParser:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            dispatch(["frobnicate"])
        assert exc.value.code == 2

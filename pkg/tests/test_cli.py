import json

import numpy as np
import pytest

from cadproj import cli, load_instance


def run(argv):
    return cli.main(argv)


def strip_runtime(csv_text):
    """Drop the runtime_ms column, the only nondeterministic one."""
    out = []
    for line in csv_text.strip().splitlines():
        cells = line.split(",")
        del cells[9]
        out.append(",".join(cells))
    return "\n".join(out)


@pytest.fixture()
def lp_files(tmp_path):
    out = tmp_path / "inst"
    assert run([
        "gen", "--family", "lp", "--n", "10", "--m", "8", "--d", "3",
        "--seed", "7", "--count", "3", "--out", str(out),
    ]) == 0
    files = sorted(out.glob("*.json"))
    assert len(files) == 3
    return files


class TestGen:
    def test_reproducible_bytes(self, tmp_path):
        for sub in ("a", "b"):
            assert run([
                "gen", "--family", "lp", "--n", "6", "--m", "4",
                "--seed", "1", "--count", "2", "--out", str(tmp_path / sub),
            ]) == 0
        for f in (tmp_path / "a").glob("*.json"):
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_missing_n_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run(["gen", "--family", "lp", "--m", "4"])
        assert exc.value.code != 0

    def test_power_family_m_derived(self, tmp_path):
        assert run([
            "gen", "--family", "power", "--n", "5", "--out", str(tmp_path),
        ]) == 0
        inst = load_instance(next(tmp_path.glob("power_*.json")))
        assert inst.system.m == 15
        assert run([
            "gen", "--family", "power", "--n", "5", "--m", "9",
            "--out", str(tmp_path),
        ]) == 2

    def test_round_trip_through_reader(self, lp_files, tmp_path):
        from cadproj import save_instance

        inst = load_instance(lp_files[0])
        copy = tmp_path / "copy.json"
        save_instance(inst, copy)
        assert copy.read_bytes() == lp_files[0].read_bytes()


class TestProject:
    def test_csv_deterministic_modulo_runtime(self, lp_files, tmp_path):
        texts = []
        for name in ("r1.csv", "r2.csv"):
            path = tmp_path / name
            assert run(
                ["project"] + [str(f) for f in lp_files]
                + ["--alg", "cad", "--eps", "1e-8", "--repeats", "2",
                   "--seed", "5", "--csv", str(path)]
            ) == 0
            texts.append(strip_runtime(path.read_text()))
        assert texts[0] == texts[1]

    def test_jobs_do_not_change_results(self, lp_files, tmp_path):
        outs = {}
        for jobs in ("1", "8"):
            csv_path = tmp_path / f"j{jobs}.csv"
            pts_path = tmp_path / f"p{jobs}.json"
            assert run(
                ["project"] + [str(f) for f in lp_files]
                + ["--alg", "cad", "--repeats", "3", "--seed", "2",
                   "--jobs", jobs, "--csv", str(csv_path),
                   "--points-out", str(pts_path)]
            ) == 0
            outs[jobs] = (strip_runtime(csv_path.read_text()), pts_path.read_bytes())
        assert outs["1"][0] == outs["8"][0]
        assert outs["1"][1] == outs["8"][1]

    def test_verify_against_oracle(self, lp_files):
        assert run(
            ["project"] + [str(f) for f in lp_files]
            + ["--alg", "cad", "--eps", "1e-10", "--csv", "/dev/null", "--verify"]
        ) == 0

    def test_unconverged_runs_still_exit_zero(self, lp_files, tmp_path):
        csv_path = tmp_path / "cap.csv"
        assert run(
            ["project", str(lp_files[0]),
             "--alg", "simul", "--eps", "1e-12", "--max-iters", "3",
             "--delta", "6", "--csv", str(csv_path)]
        ) == 0
        assert ",false," in csv_path.read_text()

    def test_unknown_flag_is_error(self, lp_files):
        with pytest.raises(SystemExit):
            run(["project", str(lp_files[0]), "--fancy-mode"])


class TestVerifyCommand:
    def test_small_suites_pass(self):
        assert run(["verify", "--suite", "svc", "--trials", "5"]) == 0
        assert run(["verify", "--suite", "theorem1", "--trials", "5"]) == 0

    def test_tamper_hook_fails_with_seed(self, capsys):
        code = run([
            "verify", "--suite", "theorem1", "--trials", "5", "--self-test-tamper",
        ])
        out = capsys.readouterr().out
        assert code != 0
        assert "seed=" in out


class TestDescendCommand:
    def test_paired_traces_share_grid(self, tmp_path):
        assert run([
            "descend", "--family", "lp", "--n", "6", "--m", "5",
            "--grad", "both", "--steps", "12", "--seed", "3",
            "--out", str(tmp_path),
        ]) == 0
        s = (tmp_path / "trace_lp_seed3_surrogate.csv").read_text().splitlines()
        e = (tmp_path / "trace_lp_seed3_exact.csv").read_text().splitlines()
        assert len(s) == len(e) == 13
        assert [row.split(",")[0] for row in s] == [row.split(",")[0] for row in e]

    def test_descend_on_saved_instance(self, lp_files, tmp_path):
        assert run([
            "descend", "--instance", str(lp_files[0]), "--steps", "5",
            "--out", str(tmp_path),
        ]) == 0
        assert (tmp_path / f"trace_{lp_files[0].stem}_surrogate.csv").exists()


def test_out_dir_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("CADPROJ_OUT", str(tmp_path / "envout"))
    assert run(["gen", "--family", "lp", "--n", "4", "--m", "3", "--seed", "0"]) == 0
    assert list((tmp_path / "envout").glob("lp_*.json"))

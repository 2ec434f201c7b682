import json

import pytest

from qglab import cli
from qglab.exceptions import ParameterOutOfRangeError
from qglab.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    SummaryError,
    load_records,
    run_experiment,
    run_trial,
    summarize,
    summarize_records,
    summary_csv,
)


def run(tmp_path, name="out.jsonl", **kw):
    path = tmp_path / name
    cfg = ExperimentConfig(output_path=str(path), **kw)
    summary, records = run_experiment(cfg)
    return summary, records, path


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(experiment="nope", n=3),
        dict(experiment="qg-aut", n=3, d=9),
        dict(experiment="qg-aut", n=3, d=1, p=0.5),
        dict(experiment="qg-aut", n=3, trials=0),
        dict(experiment="graph-rigidity", n=10),
        dict(experiment="gm-demo", n=9, r=2),
        dict(experiment="explicit-tuple", n=5, d=6),
        dict(experiment="qg-aut", n=3, tolerances={"bogus": 1.0}),
        dict(experiment="qg-aut", n=3, seed=-1),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ParameterOutOfRangeError):
            ExperimentConfig(**kw)

    def test_from_dict_unknown_key(self):
        with pytest.raises(ParameterOutOfRangeError):
            ExperimentConfig.from_dict({"experiment": "qg-aut", "n": 3, "colour": 1})


class TestRun:
    def test_qg_aut_trivial(self, tmp_path):
        summary, _, _ = run(tmp_path, experiment="qg-aut", n=3, d=3, trials=200, seed=7)
        m = summary["metrics"]
        assert m["trivial"]["fraction_true"] == 1.0 and m["stabilizer_dim"]["max"] == 0

    def test_qg_duality(self, tmp_path):
        summary, _, _ = run(tmp_path, experiment="qg-duality", n=4, trials=100)
        assert summary["metrics"]["dims_agree"]["fraction_true"] == 1.0

    def test_qg_axioms(self, tmp_path):
        summary, _, _ = run(tmp_path, experiment="qg-axioms", n=3, trials=20)
        assert summary["metrics"]["laws_hold"]["fraction_true"] == 1.0

    def test_qg_degree_qgnp(self, tmp_path):
        summary, _, _ = run(tmp_path, experiment="qg-degree", n=4, p=0.5, trials=20)
        assert summary["errors"] == 0 and summary["metrics"]["d"]["count"] == 20

    def test_graph_rigidity_and_gm(self, tmp_path):
        s1, _, _ = run(tmp_path, "a.jsonl", experiment="graph-rigidity", n=20, p=0.5, trials=10)
        assert s1["metrics"]["quantum_trivial"]["count"] == 10
        s2, _, _ = run(tmp_path, "b.jsonl", experiment="gm-demo", n=20, r=3, trials=5)
        assert s2["metrics"]["isospectral"]["fraction_true"] == 1.0

    def test_explicit_tuple(self, tmp_path):
        summary, _, _ = run(tmp_path, experiment="explicit-tuple", n=7, d=8, trials=2)
        assert summary["metrics"]["certified_trivial"]["fraction_true"] == 1.0

    def test_deterministic_across_workers(self, tmp_path):
        kw = dict(experiment="qg-aut", n=3, trials=40, seed=3)
        _, _, a = run(tmp_path, "a.jsonl", workers=1, **kw)
        _, _, b = run(tmp_path, "b.jsonl", workers=3, **kw)
        _, _, c = run(tmp_path, "c.jsonl", workers=1, **kw)
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_trial_independent_of_position(self):
        cfg = ExperimentConfig(experiment="qg-aut", n=3, trials=10, seed=5)
        assert run_trial(cfg, 7) == run_trial(cfg, 7)

    def test_crash_isolation(self, tmp_path, monkeypatch):
        import qglab.experiments as ex

        original = ex.TRIALS["qg-aut"]

        def flaky(cfg, rng):
            out = original(cfg, rng)
            if out["d"] == 2:
                raise RuntimeError("boom")
            return out

        monkeypatch.setitem(ex.TRIALS, "qg-aut", flaky)
        summary, records, _ = run(tmp_path, experiment="qg-aut", n=2, trials=30)
        failed = [r for r in records if r["error"]]
        assert failed and summary["errors"] == len(failed)
        assert len(records) == 30 and "boom" in failed[0]["error"]

    def test_records_are_finite_json(self, tmp_path):
        _, _, path = run(tmp_path, experiment="qg-aut", n=2, trials=10)
        for line in path.read_text().splitlines():
            json.loads(line, parse_constant=lambda c: pytest.fail(f"non-finite {c}"))

    def test_timings_flag(self, tmp_path):
        _, records, _ = run(tmp_path, experiment="qg-aut", n=2, trials=2, timings=True)
        assert records[0]["measured"]["elapsed_ms"] >= 0


class TestSummarize:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "e.jsonl"
        p.write_text("")
        with pytest.raises(SummaryError):
            summarize(p)

    def test_single_record(self):
        s = summarize_records([{"measured": {"x": 2.5, "ok": True}, "error": None}])
        assert s["metrics"]["x"]["mean"] == 2.5 and s["metrics"]["ok"]["fraction_true"] == 1.0

    def test_malformed_line_number(self, tmp_path):
        p = tmp_path / "m.jsonl"
        p.write_text('{"measured": {}}\n{oops\n')
        with pytest.raises(SummaryError, match=":2:"):
            load_records(p)

    def test_recompute_matches(self, tmp_path):
        summary, _, path = run(tmp_path, experiment="qg-aut", n=3, d=3, trials=200, seed=7)
        assert summarize(path) == summary

    def test_verdict_fractions(self):
        recs = [{"measured": {"verdict": v}, "error": None} for v in ["A", "B", "A", "A"]]
        m = summarize_records(recs)["metrics"]
        assert m["verdict=A"]["fraction_true"] == 0.75 and m["verdict=B"]["count"] == 4

    def test_csv_stable(self, tmp_path):
        summary, _, _ = run(tmp_path, experiment="qg-aut", n=2, trials=5)
        text = summary_csv(summary)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        names = [ln.split(",")[0] for ln in lines[1:]]
        assert names == sorted(names)
        assert text == summary_csv(summary)


class TestCli:
    def test_run_and_summarize(self, tmp_path, capsys):
        out = tmp_path / "r.jsonl"
        assert cli.main(["qg-aut", "--n", "3", "--d", "3", "--trials", "20", "--seed", "7", "--out", str(out)]) == 0
        assert "stabilizer_dim" in capsys.readouterr().out
        assert cli.main(["summarize", str(out), "--csv"]) == 0
        assert capsys.readouterr().out.startswith("metric,count")

    def test_config_error_exit_1(self, tmp_path, capsys):
        assert cli.main(["qg-aut", "--n", "3", "--d", "30", "--out", str(tmp_path / "x")]) == 1
        assert "invalid configuration" in capsys.readouterr().err

    def test_missing_file_exit_1(self, tmp_path):
        assert cli.main(["summarize", str(tmp_path / "none.jsonl")]) == 1

    def test_trial_errors_exit_2(self, tmp_path, monkeypatch):
        import qglab.experiments as ex

        def broken(cfg, rng):
            raise ValueError("nope")

        monkeypatch.setitem(ex.TRIALS, "qg-aut", broken)
        assert cli.main(["qg-aut", "--n", "2", "--trials", "2", "--out", str(tmp_path / "x")]) == 2

    def test_config_file_and_override(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"n": 3, "d": 2, "trials": 3, "seed": 1}))
        out = tmp_path / "o.jsonl"
        assert cli.main(["qg-aut", "--config", str(conf), "--d", "4", "--out", str(out)]) == 0
        recs = load_records(out)
        assert len(recs) == 3 and recs[0]["params"]["d"] == 4 and recs[0]["params"]["n"] == 3

    def test_tolerance_flag(self, tmp_path):
        out = tmp_path / "o.jsonl"
        assert cli.main(["qg-aut", "--n", "2", "--tol", "tol_solve=1e-9", "--out", str(out)]) == 0
        with pytest.raises(SystemExit):
            cli.main(["qg-aut", "--n", "2", "--tol", "junk=1"])

    def test_workers_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QGLAB_WORKERS", "2")
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert cli.main(["qg-aut", "--n", "3", "--trials", "12", "--out", str(a)]) == 0
        monkeypatch.delenv("QGLAB_WORKERS")
        assert cli.main(["qg-aut", "--n", "3", "--trials", "12", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_explicit_tuple_command(self, tmp_path, capsys):
        out = tmp_path / "t.json"
        assert cli.main(["explicit-tuple", "--n", "7", "--d", "8", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["report"]["certified_trivial"] and doc["system"]["dim"] == 9
        from qglab.operator_system import OperatorSystem

        assert OperatorSystem.from_dict(doc["system"]).dim == 9

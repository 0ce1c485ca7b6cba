import json
import math

import pytest

from axistokes import experiment
from axistokes.cli import main, read_config
from axistokes.errors import SingularSystem
from axistokes.experiment import ExperimentConfig, emit_report, run_experiment
from axistokes.norms import RateTable


def _cfg(tmp_path, **kw):
    base = dict(domain="omega1", k=1, kappa=0.2, levels=3, t0="coarse", out_dir=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_writes_report(tmp_path):
    rep = run_experiment(_cfg(tmp_path))
    assert rep.complete
    assert rep.table.levels == [1, 2, 3]
    assert all(e > 0 for e in rep.table.error_u)
    assert RateTable.from_csv((tmp_path / "rates.csv").read_text()) == rep.table
    md = (tmp_path / "rates.md").read_text()
    assert RateTable.from_markdown(md).levels == [1, 2, 3]
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["kappa"] == 0.2 and meta["kappa_per_vertex"] == {"3": 0.2}
    assert meta["exponents"][0]["eta"] == pytest.approx(0.90912, abs=1e-5)
    assert [lv["level"] for lv in meta["levels"]] == [0, 1, 2, 3]
    assert all(lv["n_unknowns"] > 0 and lv["solve_time"] >= 0 for lv in meta["levels"])


def test_reruns_are_bit_identical(tmp_path):
    a = run_experiment(_cfg(tmp_path / "a", levels=2))
    b = run_experiment(_cfg(tmp_path / "b", levels=2))
    assert (tmp_path / "a" / "rates.csv").read_bytes() == (tmp_path / "b" / "rates.csv").read_bytes()
    assert a.table == b.table


def test_manufactured_data_hits_floor(tmp_path):
    rep = run_experiment(_cfg(tmp_path, domain="unit_square", kappa=0.5, data="manufactured"))
    assert max(rep.table.error_u) < 1e-9
    assert all(math.isnan(r) for r in rep.table.rate_u + rep.table.rate_p)
    assert "x" in (tmp_path / "rates.md").read_text()


def test_zero_data(tmp_path):
    rep = run_experiment(_cfg(tmp_path, data="zero", levels=2))
    assert rep.table.error_u == [0.0, 0.0]


def test_auto_kappa_per_vertex(tmp_path):
    rep = run_experiment(_cfg(tmp_path, domain="omega2", kappa="auto", levels=2))
    assert rep.metadata["kappa"] == pytest.approx(2 ** (-2 / (0.95 * 1.211)))
    assert rep.metadata["exponents"][0]["source"] == "Default"


def test_partial_results_flushed(tmp_path, monkeypatch):
    real = experiment.solve_saddle
    calls = {"n": 0}

    def flaky(system, **kw):
        calls["n"] += 1
        if calls["n"] == 4:
            raise SingularSystem("injected failure")
        return real(system, **kw)

    monkeypatch.setattr(experiment, "solve_saddle", flaky)
    with pytest.raises(SingularSystem):
        run_experiment(_cfg(tmp_path))
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["status"] == "failed" and meta["failed_level"] == 3
    assert "injected" in meta["error"]
    assert RateTable.from_csv((tmp_path / "rates.csv").read_text()).levels == [1, 2]


def test_empty_report_is_header_only(tmp_path):
    rep = experiment.ExperimentReport(RateTable(), {})
    emit_report(rep, tmp_path)
    assert (tmp_path / "rates.csv").read_text() == "level,error_u,rate_u,error_p,rate_p\n"
    assert len((tmp_path / "rates.md").read_text().strip().splitlines()) == 2


@pytest.mark.parametrize("bad", [dict(levels=1), dict(kappa=0.7), dict(kappa=0.0), dict(data="nope"),
                                 dict(rel_tol=2.0), dict(k=0), dict(emit=("pdf",))])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig(**bad).validate()


def test_cli_run(tmp_path, capsys):
    code = main(["run", "--domain", "omega1", "--kappa", "0.2", "--levels", "2", "--t0", "coarse",
                 "--out-dir", str(tmp_path), "--emit", "csv", "--dump-mesh"])
    assert code == 0
    out = capsys.readouterr().out
    assert "rate_u" in out
    assert (tmp_path / "rates.csv").exists() and not (tmp_path / "rates.md").exists()
    assert (tmp_path / "mesh_level2.txt").exists()


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\ndomain = omega2\nkappa = auto\nlevels = 2\nt0 = coarse\n"
                   f"out_dir = {tmp_path / 'out'}\nvertex_omega_overrides = 0=0.711\n")
    assert read_config(cfg)["vertex_omega"] == [(0, 0.711)]
    assert main(["run", "--config", str(cfg), "--levels", "2"]) == 0
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["config"]["domain"] == "omega2" and meta["exponents"][0]["source"] == "UserSupplied"


def test_cli_errors(tmp_path, capsys):
    # no marked vertex: auto grading needs exponents at the on-axis corners
    assert main(["run", "--domain", "unit_square", "--kappa", "auto", "--levels", "2"]) == 1
    assert "MissingOnAxisOmega" in capsys.readouterr().err
    assert main(["run", "--domain", str(tmp_path / "missing.json")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["run", "--kappa", "big"])
    assert exc.value.code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["run", "--config", str(bad)]) == 1


def test_cli_grading(capsys):
    assert main(["grading", "--domain", "omega1"]) == 0
    out = capsys.readouterr().out
    assert "0.909121" in out and "0.200863" in out
    assert main(["grading", "--domain", "omega1", "--vertex-omega", "0=1.2"]) == 0
    assert "UserSupplied" in capsys.readouterr().out
    assert main(["grading", "--domain", "omega1", "--vertex-omega", "9=1.2"]) == 1


def test_cli_domains(capsys):
    assert main(["domains"]) == 0
    out = capsys.readouterr().out
    assert "omega1: (0, 0), (1.0787" in out

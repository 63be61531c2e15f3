import json
import subprocess
import sys

import pytest

from phsplan.cli import main


def test_domains_list(capsys):
    assert main(["domains", "list"]) == 0
    assert "intrusion" in capsys.readouterr().out


def test_validate_default(capsys):
    assert main(["validate"]) == 0
    assert "intrusion: ok" in capsys.readouterr().out


def test_show_prescription(capsys):
    assert main(["show-prescription", "255"]) == 0
    assert capsys.readouterr().out.count("->u1") == 8
    assert main(["show-prescription", "256"]) == 2


def test_oracle_reports_optimum(capsys):
    assert main(["oracle", "--domain", "coord2", "--enumerate"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["optimal_value"] == pytest.approx(0.9)
    assert out["strategies"] == 64
    assert out["routes_agree"] is True


def test_oracle_refuses_large_domain(capsys):
    assert main(["oracle", "--domain", "intrusion", "--horizon", "3"]) == 2


def test_run_writes_csv_and_belief(tmp_path):
    out, belief = tmp_path / "run.csv", tmp_path / "belief.csv"
    code = main(["run", "--seed", "3", "--n-sim", "16", "--particles", "50", "--horizon", "3",
                 "--out", str(out), "--dump-belief", str(belief)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 4
    assert belief.read_text().startswith("# t=1\nx,m1,m2,count")


def test_run_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        main(["run", "--seed", "4", "--n-sim", "16", "--horizon", "3", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_config_file_overrides(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"domain": "filter8", "planner": {"n_sim": 40}}))
    assert main(["run", "--config", str(cfg), "--horizon", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split(",")[11] == "40"


def test_sweep_rejects_empty_grid(capsys):
    assert main(["sweep", "--grid", ","]) == 2


def test_sweep_writes_rows(tmp_path):
    out, summary = tmp_path / "s.csv", tmp_path / "sum.csv"
    assert main(["sweep", "--grid", "4,8", "--seeds", "0,1", "--checkpoint", "2",
                 "--out", str(out), "--summary", str(summary)]) == 0
    assert len(out.read_text().splitlines()) == 5
    assert summary.read_text().splitlines()[0] == "n_sim,episodes,mean_cost,sem"


def test_verify_lockstep_exit_code(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "phsplan", "verify-lockstep", "--seeds", "1", "--horizon", "2",
         "--n-sim", "16", "--particles", "50", "--out", str(tmp_path / "v.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "lockstep: PASS" in proc.stdout

import csv
import io
import json

import pytest

from pvbqc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_verify_honest(capsys):
    code, out, _ = run(capsys, "verify", "--n", "6", "--seed", "1")
    rows = jsonl(out)
    assert code == 0
    assert rows[0]["accepted"] and rows[0]["K1"] == rows[0]["K2"] == 0
    assert rows[0]["F_low"] is not None and rows[-1]["summary"]


def test_verify_product_zero(capsys):
    code, out, _ = run(capsys, "verify", "--n", "6", "--K", "20", "--strategy", "product_zero", "--trials", "100", "--seed", "2")
    assert code == 0
    assert jsonl(out)[-1]["rejection_rate"] >= 0.99


def test_c_override_accepts_everything(capsys):
    code, out, _ = run(capsys, "verify", "--n", "6", "--K", "10", "--strategy", "product_zero", "--c-override", "20", "--trials", "20", "--seed", "3")
    assert code == 0 and jsonl(out)[-1]["acceptance_rate"] == 1.0


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "verify", "--n", "6")[0] == 2  # seed missing
    assert run(capsys, "verify", "--n", "5", "--seed", "1")[0] == 3
    assert run(capsys, "bounds", "plan", "--n", "5")[0] == 3
    assert run(capsys, "bounds", "trap", "--traps-k", "100", "--p-th", "0.1")[0] == 3
    assert run(capsys, "bounds", "certificate", "--n", "10", "--lambda", "20")[0] == 3
    assert run(capsys, "verify", "--graph", "cycle:5", "--seed", "1")[0] == 2
    assert run(capsys, "verify", "--graph", str(tmp_path / "missing.json"), "--seed", "1")[0] == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"config": {"graph": {"n": 6, "edges": [[1,2]]}, "K": 10, "seed": 1}, "steps": []}\n')
    assert run(capsys, "replay", str(bad))[0] == 4
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--strategy", "nonsense"])
    assert exc.value.code == 2


def test_csv_matches_json(capsys):
    argv = ["protocol", "--n", "6", "--K", "10", "--strategy", "iid_pauli", "--q", "0.2", "--trials", "8", "--seed", "4", "--dispute-policy", "always"]
    _, js, _ = run(capsys, *argv)
    _, cs, err = run(capsys, *argv, "--format", "csv")
    rows = jsonl(js)[:-1]
    table = list(csv.DictReader(io.StringIO(cs)))
    assert len(table) == len(rows) == 8
    for r, c in zip(rows, table):
        for key, cell in c.items():
            v = r[key]
            if v is None:
                assert cell == ""
            elif isinstance(v, bool):
                assert cell == str(v)
            elif isinstance(v, float):
                assert float(cell) == v
            else:
                assert cell == str(v)
    assert json.loads(err)["summary"]


def test_protocol_summary_and_replay(capsys, tmp_path):
    out = tmp_path / "runs.jsonl"
    code, _, _ = run(capsys, "protocol", "--n", "6", "--trials", "3", "--seed", "5", "--dispute-policy", "never", "--out", str(out))
    rows = jsonl(out.read_text())
    assert code == 0 and rows[-1]["acceptance_rate"] == 1.0
    assert all(r["master_seed"] == 5 and "seed" in r for r in rows[:-1])
    code, text, _ = run(capsys, "replay", str(out))
    assert code == 0 and json.loads(text) == {"replayed": 3, "identical": True}


def test_row_reproducible_from_its_seed(capsys):
    _, out, _ = run(capsys, "protocol", "--n", "6", "--K", "10", "--strategy", "iid_pauli", "--q", "0.3", "--trials", "4", "--seed", "6")
    third = jsonl(out)[2]
    from pvbqc.protocol import ProtocolConfig, run_protocol

    cfg = ProtocolConfig.from_record(third["transcript"]["config"])
    assert cfg.seed == third["seed"]
    assert json.loads(run_protocol(cfg).to_json()) == third["transcript"]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"n": 6, "K": 10, "seed": 8, "trials": 2, "strategy": "product_zero"}))
    code, out, _ = run(capsys, "--config", str(cfg), "verify")
    rows = jsonl(out)
    assert code == 0 and len(rows) == 3 and rows[-1]["acceptance_rate"] == 0.0
    # flags win over the file
    code, out, _ = run(capsys, "--config", str(cfg), "verify", "--strategy", "honest")
    assert jsonl(out)[-1]["acceptance_rate"] == 1.0


def test_bounds_queries(capsys):
    _, out, _ = run(capsys, "bounds", "plan", "--n", "6")
    plan = jsonl(out)[0]
    assert plan["K"] == 65 and plan["C_arbiter"] == 8.125
    assert plan["C_client"] == pytest.approx(5.4167, abs=1e-4)
    _, out, _ = run(capsys, "bounds", "certificate", "--n", "10", "--lambda", "1", "--variant", "both")
    a, t = jsonl(out)
    assert a["fidelity_bound"] == pytest.approx(0.5850, abs=1e-4) and t["fidelity_bound"] == pytest.approx(0.6)
    _, out, _ = run(capsys, "bounds", "cost", "--n", "6")
    cost = jsonl(out)[0]
    assert cost["our_copies"] == 325 and int(cost["sato_copies"]) > 10**16
    _, out, _ = run(capsys, "bounds", "serfling", "--N", "260", "--K", "65", "--v", "0.1", "--format", "csv")
    assert float(list(csv.DictReader(io.StringIO(out)))[0]["bound"]) == pytest.approx(0.6409, abs=1e-4)


def test_sweep_n_honest(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "n", "--values", "6,8,10", "--K", "12", "--trials", "5", "--seed", "9", "--dispute-policy", "never")
    assert code == 0 and [r["acceptance_rate"] for r in jsonl(out)] == [1.0, 1.0, 1.0]


def test_sweep_C_step_function(capsys):
    # product_zero with K=10: failures are large, so acceptance flips from 0 to 1 as C reaches 2K
    code, out, _ = run(capsys, "sweep", "--axis", "C", "--values", "0,19.99,20", "--n", "6", "--K", "10", "--strategy", "product_zero", "--trials", "5", "--seed", "10", "--dispute-policy", "never")
    rates = [r["acceptance_rate"] for r in jsonl(out)]
    assert rates[0] == 0.0 and rates[-1] == 1.0


def test_figures_written(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    fig = tmp_path / "sweep.png"
    code, _, _ = run(capsys, "sweep", "--axis", "q", "--values", "0:0.4:0.2", "--n", "6", "--K", "10", "--trials", "10", "--seed", "11", "--figure", str(fig))
    assert code == 0 and fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    hist = tmp_path / "hist.png"
    code, _, _ = run(capsys, "verify", "--n", "6", "--K", "10", "--trials", "10", "--seed", "12", "--figure", str(hist))
    assert code == 0 and hist.stat().st_size > 0

import json
import jsonschema
import pytest
import main
from config import CONFIG_ENV
from errors import EscalationExhausted
from main import run


@pytest.fixture(autouse=True)
def no_config_file(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def documents(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.splitlines()
            if line.strip()]


def test_eval(capsys):
    assert run(["eval", "--spec", "x^(3/2)", "--n", "10", "--order", "0"]) == 0
    (record,) = documents(capsys)
    assert record["floor"] == "31"
    assert record["order"] == 0


def test_eval_all_orders(capsys):
    assert run(["eval", "--spec", "x^(3/2)", "--n", "4"]) == 0
    assert [r["floor"] for r in documents(capsys)] == ["8", "3", "0"]


def test_precision_cap_exit_code(capsys):
    code = run(["eval", "--spec", "x^(3/2) - 2*x^(1/2)", "--n", "2",
                "--order", "0", "--precision-cap", "256"])
    assert code == 3
    (record,) = documents(capsys)
    assert record["error"] == "precision-cap-exceeded"
    assert record["exit_code"] == 3


def test_verify_negative(capsys):
    assert run(["verify", "--spec", "x^(3/2)", "--n", "4", "--H", "2"]) == 2
    (record,) = documents(capsys)
    assert record["floors"] == ["11", "14"]
    assert record["coprime"] is True
    assert {"h1_frac_f1", "h2_divisible"} <= set(record["failed"])


def test_output_is_deterministic(capsys):
    run(["verify", "--spec", "x", "--n", "2", "--H", "2"])
    first = capsys.readouterr().out
    run(["verify", "--spec", "x", "--n", "2", "--H", "2"])
    assert capsys.readouterr().out == first


def test_oracle_csv(capsys):
    assert run(["oracle", "--a", "2", "--len", "3", "--output", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "a,len,size,witness"
    assert lines[1].split(",")[:3] == ["2", "3", "2"]


def test_oracle_too_long(capsys):
    assert run(["oracle", "--a", "1", "--len", "33"]) == 1
    assert documents(capsys)[0]["error"] == "interval-too-long"


@pytest.mark.parametrize("argv, error", [
    (["eval", "--spec", "2*y", "--n", "3"], "spec-syntax"),
    (["eval", "--spec", "x"], "usage"),
    (["frobnicate"], "usage"),
    (["eval", "--n", "3", "--precision-cap", "8"], "usage"),
    (["scan", "--spec", "x", "--range", "1-9", "--H", "1"], "usage"),
])
def test_usage_errors(capsys, argv, error):
    assert run(argv) == 1
    assert documents(capsys)[-1]["error"] == error


def test_seek_not_admissible(capsys):
    assert run(["seek", "--spec", "x", "--L", "1"]) == 2
    assert documents(capsys)[0]["error"] == "not-admissible"


def test_seek_with_trace(capsys):
    assert run(["seek", "--spec", "x^(3/2)", "--L", "1", "--trace"]) == 0
    records = documents(capsys)
    assert records[0]["trace"]["stage"] == "x0"
    assert all("trace" in r for r in records[:-1])
    assert records[-1]["certificate"]["coprime"] is True
    assert "timings" not in records[-1]


def test_scan_budget_and_resume(capsys):
    code = run(["scan", "--spec", "x", "--range", "1..100", "--H", "1",
                "--budget", "30"])
    assert code == 4
    records = documents(capsys)
    hits = [r for r in records if "floors" in r]
    assert len(hits) == 30
    assert records[-2]["summary"]["n_hi"] == "30"
    cursor = records[-1]["cursor"]
    assert records[-1]["error"] == "budget-exceeded"

    assert run(["scan", "--resume", cursor]) == 0
    records = documents(capsys)
    assert [r["n"] for r in records[:-1]] == [str(n) for n in range(31, 101)]
    assert records[-1]["summary"]["hit_count"] == 70


def test_verify_out_then_recheck(capsys, tmp_path):
    target = tmp_path / "certificate.json"
    assert run(["verify", "--spec", "x^(3/2)", "--n", "10", "--H", "4",
                "--out", str(target)]) == 2
    assert capsys.readouterr().out == ""
    assert run(["recheck", "--file", str(target)]) == 0
    (record,) = documents(capsys)
    assert record["recheck"] == "ok"
    assert record["floors"] == ["41", "46", "52"]


def test_recheck_tampered(capsys, tmp_path):
    target = tmp_path / "certificate.json"
    run(["verify", "--spec", "x^(3/2)", "--n", "10", "--H", "4", "--out", str(target)])
    document = json.loads(target.read_text(encoding="utf-8"))
    document["n"] = "11"
    target.write_text(json.dumps(document), encoding="utf-8")
    assert run(["recheck", "--file", str(target)]) == 2
    assert documents(capsys)[-1]["error"] == "certificate-mismatch"


def test_schema(capsys):
    assert run(["schema"]) == 0
    (record,) = documents(capsys)
    assert {"BlockCertificate", "ProofWitness", "ScanReport", "RunConfig"} <= set(record)
    assert "properties" in record["BlockCertificate"]


def test_config_file_flag(capsys, tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("spec = 2*x\noutput = csv\n", encoding="utf-8")
    assert run(["eval", "--config", str(path), "--n", "5", "--order", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,order,floor,frac_lo,frac_hi,frac_bits"
    assert lines[1].startswith("5,1,2,")


def test_timings_on_request(capsys):
    assert run(["seek", "--spec", "x^(3/2)", "--L", "1"]) == 0
    (witness,) = documents(capsys)
    assert "timings" not in witness
    assert run(["seek", "--spec", "x^(3/2)", "--L", "1", "--timings"]) == 0
    again, timings = documents(capsys)
    assert again == witness
    assert {"x0", "verify", "total"} <= set(timings["timings"])


def test_trace_kept_when_seek_fails(capsys, monkeypatch):
    def failing_seek(spec, L, retries, trace):
        trace({"stage": "x0", "x0": "2304000000000000"})
        raise EscalationExhausted("连续 26 个素数 q 均失败")

    monkeypatch.setattr(main, "seek_witness", failing_seek)
    assert run(["seek", "--spec", "x^(3/2)", "--L", "1", "--trace"]) == 4
    records = documents(capsys)
    assert records[0] == {"trace": {"stage": "x0", "x0": "2304000000000000"}}
    assert records[-1]["error"] == "escalation-exhausted"


def test_documents_match_published_schema(capsys, tmp_path):
    assert run(["schema"]) == 0
    (schemas,) = documents(capsys)
    target = tmp_path / "certificate.json"
    run(["verify", "--spec", "x^(3/2)", "--n", "10", "--H", "4", "--out", str(target)])
    jsonschema.validate(json.loads(target.read_text(encoding="utf-8")),
                        schemas["BlockCertificate"])
    assert run(["seek", "--spec", "x^(3/2)", "--L", "1"]) == 0
    (witness,) = documents(capsys)
    jsonschema.validate(witness, schemas["ProofWitness"])
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({**witness, "n": 5}, schemas["ProofWitness"])

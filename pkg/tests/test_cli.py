import json

from click.testing import CliRunner

from govcore.cli import main
from govcore.replay import replay_case


def test_run_prints_disposition_and_tier():
    runner = CliRunner()
    result = runner.invoke(
        main, ["run", "--domain", "appeal", "--case", "A001", "--backend", "scripted"]
    )
    assert result.exit_code == 0, result.output
    assert result.output.strip() == "OVERTURN SPOT_CHECK"


def test_run_unknown_case_fails():
    runner = CliRunner()
    result = runner.invoke(main, ["run", "--case", "NOPE"])
    assert result.exit_code == 1
    assert "unknown case" in result.output


def test_unknown_subcommand_exits_2_with_usage():
    runner = CliRunner()
    result = runner.invoke(main, ["frobnicate"])
    assert result.exit_code == 2
    assert "Usage" in result.output


def test_verify_ledger_valid_and_tampered(tmp_path):
    path = str(tmp_path / "ledger.ndjson")
    replay_case("A001", ledger_path=path)
    runner = CliRunner()
    ok = runner.invoke(main, ["verify-ledger", path])
    assert ok.exit_code == 0 and "valid" in ok.output

    lines = open(path).read().splitlines()
    record = json.loads(lines[5])
    record["content"]["timestamp"] = "2031-01-01T00:00:00Z"
    lines[5] = json.dumps(record, sort_keys=True, separators=(",", ":"))
    open(path, "w").write("\n".join(lines) + "\n")

    bad = runner.invoke(main, ["verify-ledger", path])
    assert bad.exit_code == 1
    assert "INVALID at index 5" in bad.output


def test_bench_text_output():
    runner = CliRunner()
    result = runner.invoke(main, ["bench", "--format", "text"])
    assert result.exit_code == 0, result.output
    assert "cc_scripted: 10/11 correct, 0 silent errors" in result.output
    assert "react: 6/11 correct, 5 silent errors" in result.output


def test_bench_json_output():
    runner = CliRunner()
    result = runner.invoke(main, ["bench", "--system", "cc_scripted", "--format", "json"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["cc_scripted"]["silent_errors"] == 0


def test_list_command(tmp_path):
    from govcore.store import InstanceStore

    store = InstanceStore(str(tmp_path))
    store.upsert(
        {"instance_id": "inst-1", "case_id": "A001", "status": "completed",
         "tier": "SPOT_CHECK", "disposition": "OVERTURN"},
        "2026-01-01T00:00:00Z", "2026-01-01T00:00:00Z",
    )
    store.close()
    runner = CliRunner()
    result = runner.invoke(main, ["list", "--data-dir", str(tmp_path)])
    assert result.exit_code == 0
    assert "inst-1" in result.output and "SPOT_CHECK" in result.output

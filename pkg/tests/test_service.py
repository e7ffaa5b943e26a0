import json
import threading

import pytest
from fastapi.testclient import TestClient

from govcore.service import create_app, qa_sample, trace_event

OP = {"Authorization": "Bearer op-tok"}
REV = {"Authorization": "Bearer rev-tok"}
TOKENS = {"op-tok": "operator", "rev-tok": "reviewer"}


@pytest.fixture
def client(tmp_path):
    app = create_app(str(tmp_path), tokens=TOKENS, heartbeat_seconds=600.0)
    with TestClient(app, base_url="http://svc") as client:
        yield client


def start(client, case_id):
    response = client.post("/api/start", json={"case_id": case_id}, headers=OP)
    assert response.status_code == 200, response.text
    return response.json()


def test_requires_auth(client):
    assert client.get("/api/instances").status_code == 401
    bad = {"Authorization": "Bearer nope"}
    assert client.get("/api/instances", headers=bad).status_code == 401


def test_start_returns_instance_and_stream_url(client):
    body = start(client, "A001")
    assert body["instance_id"].startswith("inst-")
    assert body["stream_url"].endswith("/trace")
    listing = client.get("/api/instances", headers=OP).json()["instances"]
    assert any(i["instance_id"] == body["instance_id"] for i in listing)


def test_unknown_case_404(client):
    response = client.post("/api/start", json={"case_id": "ZZZ"}, headers=OP)
    assert response.status_code == 404


def test_instance_detail_includes_ledger(client):
    instance_id = start(client, "A001")["instance_id"]
    detail = client.get(f"/api/instances/{instance_id}", headers=OP).json()
    assert detail["status"] == "completed"
    assert detail["tier"] == "SPOT_CHECK"
    assert len(detail["ledger"]) > 20
    assert detail["ledger"][0]["content"]["event"] == "instance_started"


def test_unknown_instance_404(client):
    assert client.get("/api/instances/nothere", headers=OP).status_code == 404


def test_verify_endpoint_detects_tamper(client, tmp_path):
    instance_id = start(client, "A001")["instance_id"]
    ok = client.get(f"/api/instances/{instance_id}/verify", headers=OP).json()
    assert ok["chain_valid"] and ok["first_broken_index"] is None

    path = tmp_path / "ledgers" / f"{instance_id}.ndjson"
    lines = path.read_text().splitlines()
    record = json.loads(lines[7])
    record["content"]["timestamp"] = "1999-01-01T00:00:00Z"
    lines[7] = json.dumps(record, sort_keys=True, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")

    bad = client.get(f"/api/instances/{instance_id}/verify", headers=OP).json()
    assert not bad["chain_valid"]
    assert bad["first_broken_index"] == 7


def test_review_flow_approve(client):
    instance_id = start(client, "D001")["instance_id"]
    detail = client.get(f"/api/instances/{instance_id}", headers=OP).json()
    assert detail["status"] == "suspended" and detail["tier"] == "GATE"

    denied = client.post(
        f"/api/instances/{instance_id}/review/accept", json={}, headers=OP
    )
    assert denied.status_code == 403  # operator cannot review

    accepted = client.post(
        f"/api/instances/{instance_id}/review/accept",
        json={"actor": "rev-1"}, headers=REV,
    )
    assert accepted.status_code == 200
    assert accepted.json()["hitl_state"] == "under_review"

    approved = client.post(
        f"/api/instances/{instance_id}/review/approve",
        json={"actor": "rev-1"}, headers=REV,
    )
    assert approved.status_code == 200
    body = approved.json()
    assert body["status"] == "completed" and body["disposition"] == "REMAND"

    detail = client.get(f"/api/instances/{instance_id}", headers=OP).json()
    transitions = [
        e["content"]["to"] for e in detail["ledger"]
        if e["entry_type"] == "hitl_transition"
    ]
    assert transitions == ["pending_review", "assigned", "under_review",
                           "approved", "resumed"]
    verify = client.get(f"/api/instances/{instance_id}/verify", headers=OP).json()
    assert verify["chain_valid"]


def test_export_streams_ndjson(client, tmp_path):
    instance_id = start(client, "A001")["instance_id"]
    response = client.get(f"/api/instances/{instance_id}/export", headers=OP)
    assert response.status_code == 200
    assert "ndjson" in response.headers["content-type"]
    on_disk = (tmp_path / "ledgers" / f"{instance_id}.ndjson").read_text()
    assert response.text == on_disk  # export streams the persisted format


def test_review_illegal_transition_409(client):
    instance_id = start(client, "D001")["instance_id"]
    response = client.post(
        f"/api/instances/{instance_id}/review/approve", json={}, headers=REV
    )
    assert response.status_code == 409  # approve without accept


def test_review_on_completed_instance_409(client):
    instance_id = start(client, "A001")["instance_id"]
    response = client.post(
        f"/api/instances/{instance_id}/review/approve", json={}, headers=REV
    )
    assert response.status_code == 409


def test_reject_terminates(client):
    instance_id = start(client, "G004")["instance_id"]
    client.post(f"/api/instances/{instance_id}/review/accept", json={}, headers=REV)
    rejected = client.post(
        f"/api/instances/{instance_id}/review/reject",
        json={"note": "insufficient basis"}, headers=REV,
    )
    assert rejected.status_code == 200
    assert rejected.json()["status"] == "terminated"


def test_reject_resume_unavailable_after_restart(client):
    """Re-entry needs the live backend; a runtime restored from the ledger
    can only be approved, terminated, or requeued."""
    instance_id = start(client, "D001")["instance_id"]
    service_state = client.app.state.service
    with service_state.lock:
        del service_state.runtimes[instance_id]  # simulate process restart
    client.post(f"/api/instances/{instance_id}/review/accept", json={}, headers=REV)
    blocked = client.post(
        f"/api/instances/{instance_id}/review/reject",
        json={"resume": True, "note": "redo"}, headers=REV,
    )
    assert blocked.status_code == 409
    assert "restored" in blocked.json()["detail"]
    # plain termination still works on the restored runtime
    terminated = client.post(
        f"/api/instances/{instance_id}/review/reject",
        json={"note": "terminate"}, headers=REV,
    )
    assert terminated.status_code == 200
    assert terminated.json()["status"] == "terminated"


def test_run_error_is_surfaced_not_lost(client, tmp_path, monkeypatch):
    """A script/runtime fault mid-run leaves a terminated row and a ledger
    note, never a stuck 'running' instance."""
    import shutil

    from govcore.replay import packaged_data_dir

    fixture_dir = tmp_path / "fixtures"
    shutil.copytree(packaged_data_dir(), fixture_dir)
    script_path = fixture_dir / "scripts" / "A001.json"
    body = json.loads(script_path.read_text())
    body["chooser"] = body["chooser"][:3]  # orchestrator script runs dry
    script_path.write_text(json.dumps(body))

    from govcore.service import create_app

    app = create_app(str(tmp_path / "store"), tokens=TOKENS,
                     fixture_dir=str(fixture_dir))
    with TestClient(app, base_url="http://svc") as broken_client:
        instance_id = broken_client.post(
            "/api/start", json={"case_id": "A001"}, headers=OP
        ).json()["instance_id"]
        detail = broken_client.get(
            f"/api/instances/{instance_id}", headers=OP
        ).json()
        assert detail["status"] == "terminated"
        reasons = [
            e["content"].get("reason", "") for e in detail["ledger"]
            if e["entry_type"] == "system"
        ]
        assert any("run error" in r for r in reasons)


def test_redaction_map_requires_reviewer(client):
    instance_id = start(client, "A001")["instance_id"]
    assert (
        client.get(f"/api/instances/{instance_id}/redaction-map", headers=OP)
        .status_code == 403
    )
    tokens = client.get(
        f"/api/instances/{instance_id}/redaction-map", headers=REV
    ).json()["tokens"]
    assert any("PII:name" in token for token in tokens)


def test_trace_html_page(client):
    instance_id = start(client, "A001")["instance_id"]
    page = client.get(f"/instances/{instance_id}/trace", headers=OP)
    assert page.status_code == 200
    assert "text/html" in page.headers["content-type"]
    assert "step_completed" in page.text


def read_sse(client, url, headers, max_events=200):
    events = []
    with client.stream("GET", url, headers={**headers, "Accept": "text/event-stream"}) as response:
        assert response.status_code == 200
        event = {}
        for line in response.iter_lines():
            if line.startswith("id:"):
                event["id"] = int(line[3:].strip())
            elif line.startswith("event:"):
                event["event"] = line[6:].strip()
            elif line.startswith("data:"):
                event["data"] = json.loads(line[5:].strip())
            elif not line and event:
                events.append(event)
                if event.get("event") == "completed" or len(events) >= max_events:
                    return events
                event = {}
    return events


def test_sse_replays_decision_before_each_step(client):
    instance_id = start(client, "A001")["instance_id"]
    events = read_sse(client, f"/instances/{instance_id}/trace", OP)
    assert events[-1]["event"] == "completed"
    sequence = [e["id"] for e in events]
    assert sequence == sorted(sequence)
    pending = {}
    step_events = 0
    for event in events:
        if event["event"] == "orchestrator_decision":
            name = event["data"]["payload"].get("step_name")
            if name:
                pending[name] = event["id"]
        elif event["event"] == "step_completed":
            step_events += 1
            name = event["data"]["payload"]["step_name"]
            assert name in pending and pending[name] < event["id"]
    assert step_events == 13


def test_sse_last_event_id_resumes(client):
    instance_id = start(client, "A001")["instance_id"]
    full = read_sse(client, f"/instances/{instance_id}/trace", OP)
    cut = full[4]["id"]
    resumed = read_sse(
        client, f"/instances/{instance_id}/trace?last_event_id={cut}", OP
    )
    assert resumed[0]["id"] > cut
    assert [e["id"] for e in resumed] == [e["id"] for e in full if e["id"] > cut]


def test_sse_stays_open_on_suspension_then_resumes(client):
    instance_id = start(client, "D001")["instance_id"]
    collected = []
    done = threading.Event()

    def consume():
        with TestClient(client.app, base_url="http://svc") as stream_client:
            events = read_sse(
                stream_client, f"/instances/{instance_id}/trace", OP
            )
            collected.extend(events)
            done.set()

    thread = threading.Thread(target=consume, daemon=True)
    thread.start()
    import time
    time.sleep(0.4)  # let the replay reach the suspension point
    client.post(f"/api/instances/{instance_id}/review/accept", json={}, headers=REV)
    client.post(f"/api/instances/{instance_id}/review/approve", json={}, headers=REV)
    assert done.wait(timeout=10.0)
    kinds = [e["event"] for e in collected]
    assert "suspended" in kinds
    assert "resumed" in kinds
    assert kinds[-1] == "completed"


def test_qa_sample_deterministic(client):
    ids = [f"inst-{i:03d}" for i in range(100)]
    first = qa_sample(ids, 0.10, seed=99)
    second = qa_sample(ids, 0.10, seed=99)
    assert first == second and len(first) == 10
    assert qa_sample(ids, 0.0, seed=99) == []
    assert qa_sample(ids, 1.0, seed=99) == sorted(ids)


def test_qa_endpoint_marks_sampled(client):
    for _ in range(3):
        start(client, "A001")
    body = client.get("/api/qa/sample?rate=1.0&seed=5", headers=OP).json()
    assert len(body["sampled"]) == 3
    listing = client.get("/api/instances", headers=OP).json()["instances"]
    assert all(i.get("qa_sampled") for i in listing)


def test_trace_event_mapping_covers_types():
    from govcore.ledger import LedgerEntry, entry_hash, CHAIN_SEED

    def entry(entry_type, content):
        return LedgerEntry(0, entry_type, content, CHAIN_SEED,
                           entry_hash(CHAIN_SEED, content))

    assert trace_event(entry("orchestrator_decision", {"a": 1}))[0] == (
        "orchestrator_decision"
    )
    assert trace_event(entry("step_completed", {"a": 1}))[0] == "step_completed"
    assert trace_event(
        entry("governance_action", {"action": "determination"})
    )[0] == "governance_action"
    assert trace_event(entry("governance_action", {"action": "tier_proposal_noop"})) is None
    assert trace_event(entry("system", {"event": "instance_suspended"}))[0] == "suspended"
    assert trace_event(entry("system", {"event": "instance_completed"}))[0] == "completed"
    assert trace_event(entry("hitl_transition", {"to": "resumed"}))[0] == "resumed"
    assert trace_event(entry("hitl_transition", {"to": "assigned"})) is None

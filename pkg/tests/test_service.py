import json

import pytest
from fastapi.testclient import TestClient

from frogger_rationale import corpus, env
from frogger_rationale.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def _start_collecting(client):
    sid = client.post("/sessions").json()["id"]
    assert client.post(f"/sessions/{sid}/phase", json={"phase": "collecting"}).status_code == 200
    return sid


def test_session_starts_in_tutorial(client):
    data = client.post("/sessions").json()
    assert data["phase"] == "tutorial"
    assert data["state"]["lives"] == 3
    assert len(data["state"]["grid"]) == 13 * 11


def test_phase_machine_forward_only(client):
    sid = client.post("/sessions").json()["id"]
    assert client.post(f"/sessions/{sid}/phase", json={"phase": "review"}).status_code == 409
    assert client.post(f"/sessions/{sid}/phase", json={"phase": "collecting"}).status_code == 200
    assert client.post(f"/sessions/{sid}/phase", json={"phase": "tutorial"}).status_code == 409
    assert client.post(f"/sessions/{sid}/phase", json={"phase": "nope"}).status_code == 400


def test_action_requires_collecting_phase(client):
    sid = client.post("/sessions").json()["id"]
    assert client.post(f"/sessions/{sid}/action", json={"action": "up"}).status_code == 409


def test_action_rationale_export_round_trip(client, tmp_path):
    sid = _start_collecting(client)
    r = client.post(f"/sessions/{sid}/action", json={"action": "up"})
    assert r.status_code == 200
    assert r.json()["pause_seconds"] == 10
    assert client.post(f"/sessions/{sid}/rationale", json={"text": "going up"}).status_code == 200
    export = client.get(f"/sessions/{sid}/export")
    path = tmp_path / "export.jsonl"
    path.write_text(export.text)
    records = corpus.load_jsonl(str(path))
    assert len(records) == 1
    assert records[0].action == env.Action.UP
    assert records[0].rationale == "going up"


def test_action_while_pending_conflicts(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "left"})
    assert client.post(f"/sessions/{sid}/action", json={"action": "up"}).status_code == 409


def test_rationale_without_pending_conflicts(client):
    sid = _start_collecting(client)
    assert client.post(f"/sessions/{sid}/rationale", json={"text": "hi"}).status_code == 409


def test_empty_rationale_rejected(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "up"})
    assert client.post(f"/sessions/{sid}/rationale", json={"text": "   "}).status_code == 400


def test_redo_recycles_repeated_action(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "left"})
    client.post(f"/sessions/{sid}/rationale", json={"text": "dodging the car"})
    client.post(f"/sessions/{sid}/action", json={"action": "left"})
    r = client.post(f"/sessions/{sid}/redo")
    assert r.status_code == 200
    records = client.get(f"/sessions/{sid}/records").json()["records"]
    assert len(records) == 2
    assert records[0]["rationale"] == records[1]["rationale"]
    assert records[1]["redo_of"] == records[0]["id"]


def test_redo_rejected_for_different_action(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "left"})
    client.post(f"/sessions/{sid}/rationale", json={"text": "dodging"})
    client.post(f"/sessions/{sid}/action", json={"action": "up"})
    assert client.post(f"/sessions/{sid}/redo").status_code == 409


def test_redo_without_history_conflicts(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "up"})
    assert client.post(f"/sessions/{sid}/redo").status_code == 409


def test_patch_edits_record(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "up"})
    rid = client.post(f"/sessions/{sid}/rationale", json={"text": "first"}).json()["record"]["id"]
    r = client.patch(f"/sessions/{sid}/records/{rid}", json={"text": "better wording"})
    assert r.status_code == 200
    rec = client.get(f"/sessions/{sid}/records").json()["records"][0]
    assert rec["rationale"] == "better wording"
    assert rec["edited"] is True
    assert client.patch(f"/sessions/{sid}/records/nope", json={"text": "x"}).status_code == 404


def test_unknown_session_404(client):
    assert client.post("/sessions/nope/action", json={"action": "up"}).status_code == 404
    assert client.get("/sessions/nope/records").status_code == 404


def test_records_include_board_snapshots(client):
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "up"})
    client.post(f"/sessions/{sid}/rationale", json={"text": "snap"})
    rec = client.get(f"/sessions/{sid}/records").json()["records"][0]
    board = rec["board"].split("\n")
    assert len(board) == 11 and all(len(line) == 13 for line in board)
    assert "F" in rec["board"]


def test_journal_written(tmp_path):
    client = TestClient(create_app(journal_dir=str(tmp_path)))
    sid = _start_collecting(client)
    client.post(f"/sessions/{sid}/action", json={"action": "up"})
    client.post(f"/sessions/{sid}/rationale", json={"text": "logged"})
    journal = tmp_path / f"{sid}.jsonl"
    assert journal.exists()
    assert json.loads(journal.read_text().splitlines()[0])["rationale"] == "logged"

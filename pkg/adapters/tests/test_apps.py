import json

from _adapter_support import TRANSCRIPT_DIR
from mrgd_adapters import AdapterError, create_app
from mrgd_adapters.config import CAPABILITY_PATHS
from mrgd_adapters.replay import load_transcript

from fastapi.testclient import TestClient


def test_replay_round_trips(replay_client):
    capability, client = replay_client
    for record in load_transcript(TRANSCRIPT_DIR / f"{capability}.jsonl"):
        reply = client.post(record["endpoint"], json=record["request"])
        assert reply.status_code == 200
        assert reply.json() == record["response"]


def test_wrong_version_rejected(replay_client):
    capability, client = replay_client
    records = load_transcript(TRANSCRIPT_DIR / f"{capability}.jsonl")
    request = dict(records[0]["request"], version="mrgd/2")
    reply = client.post(records[0]["endpoint"], json=request)
    assert reply.status_code == 400
    assert "error" in reply.json()


def test_non_json_body_rejected(replay_client):
    capability, client = replay_client
    reply = client.post(CAPABILITY_PATHS[capability], content=b"not json")
    assert reply.status_code == 400


def test_unrecorded_request_is_service_reported():
    app = create_app("score", lambda request: (_ for _ in ()).throw(
        AdapterError("no recorded response")
    ))
    client = TestClient(app)
    reply = client.post("/v1/score", json={
        "version": "mrgd/1", "image_ref": "x", "instruction": "y", "text": "z",
    })
    assert reply.status_code == 500
    assert "no recorded response" in reply.json()["error"]


def test_out_of_contract_engine_reply_is_blocked():
    app = create_app("score", lambda request: {"version": "mrgd/1", "score": 1.7})
    client = TestClient(app)
    reply = client.post("/v1/score", json={
        "version": "mrgd/1", "image_ref": "x", "instruction": "y", "text": "z",
    })
    assert reply.status_code == 500
    assert "invalid reply" in reply.json()["error"]


def test_non_unit_embedding_is_blocked():
    app = create_app("embed", lambda request: {
        "version": "mrgd/1", "vectors": [[1.0, 1.0]],
    })
    client = TestClient(app)
    reply = client.post("/v1/embed", json={"version": "mrgd/1", "labels": ["cat"]})
    assert reply.status_code == 500
    assert "norm" in reply.json()["error"]


def test_generate_reply_has_no_null_reason():
    app = create_app("generate", lambda request: {
        "version": "mrgd/1",
        "candidates": [{"text": "A cat.", "finished": True, "token_count": 2}],
    })
    client = TestClient(app)
    reply = client.post("/v1/generate", json={
        "version": "mrgd/1", "image_ref": "i", "instruction": "q", "prefix": "",
        "num_samples": 1, "temperature": 1.0, "stop": {"to_eos": True},
        "max_tokens": 8, "seed": 0,
    })
    assert reply.status_code == 200
    assert "reason" not in json.loads(reply.content)

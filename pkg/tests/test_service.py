import pytest
from fastapi.testclient import TestClient

from voxlang.service import SessionRegistry, create_app


@pytest.fixture()
def client():
    return TestClient(create_app(SessionRegistry()))


def submit(client, utterance, user="amy", session="default"):
    resp = client.post("/submit", json={
        "user": user, "utterance": utterance, "session": session})
    assert resp.status_code == 200
    return resp.json()


def accept(client, index=1, user="amy", session="default"):
    resp = client.post("/accept", json={
        "user": user, "index": index, "session": session})
    assert resp.status_code == 200
    return resp.json()


# -- session management -----------------------------------------------------------


def test_default_session_exists(client):
    resp = client.get("/sessions")
    assert resp.json() == {"sessions": ["default"]}


def test_create_named_and_generated_sessions(client):
    assert client.post("/session", json={"session": "team"}).json() \
        == {"session": "team"}
    assert client.post("/session", json={}).json() == {"session": "s1"}
    assert client.post("/session", json={}).json() == {"session": "s2"}
    assert client.get("/sessions").json()["sessions"] \
        == ["default", "s1", "s2", "team"]


def test_duplicate_session_name_conflicts(client):
    assert client.post("/session", json={"session": "team"}).status_code == 200
    assert client.post("/session", json={"session": "team"}).status_code == 409


def test_unknown_session_is_404(client):
    resp = client.post("/submit", json={
        "user": "amy", "utterance": "add red", "session": "ghost"})
    assert resp.status_code == 404
    assert client.get("/state", params={"session": "ghost"}).status_code == 404


def test_sessions_are_isolated(client):
    client.post("/session", json={"session": "other"})
    submit(client, "add red")
    accept(client)
    default_world = client.get("/state").json()["world"]
    other_world = client.get("/state", params={"session": "other"}).json()["world"]
    assert default_world["voxels"]
    assert not other_world["voxels"]


# -- the interaction loop over HTTP ---------------------------------------------------


def test_submit_payload_shape(client):
    payload = submit(client, "add red top")
    assert payload["status"] == "candidates"
    assert payload["utterance"] == "add red top"
    assert payload["define_depth"] == 0
    candidate = payload["candidates"][0]
    assert candidate["index"] == 1
    # programs carry their scope wrapper; brackets mean plain block scope
    assert candidate["program"] == "[ add red top ]"
    assert candidate["core_only"] is True
    assert candidate["rules"] == sorted(set(candidate["rules"]))
    assert candidate["diff"]["added"]
    assert isinstance(candidate["score"], (int, float))


def test_accept_returns_world_and_diff(client):
    submit(client, "add red top")
    payload = accept(client)
    assert payload["accepted"] == 1
    assert payload["program"] == "[ add red top ]"
    assert payload["world"]["voxels"]
    assert payload["diff"]["added"]
    assert payload["define_depth"] == 0
    state = client.get("/state").json()
    assert state["world"] == payload["world"]
    assert state["interactions"] == 1


def test_accept_without_candidates_is_409(client):
    resp = client.post("/accept", json={"user": "amy", "index": 1})
    assert resp.status_code == 409
    detail = resp.json()["detail"]
    assert detail["code"] == "no_candidates"
    assert detail["message"]


def test_stale_index_is_409(client):
    submit(client, "add red")
    resp = client.post("/accept", json={"user": "amy", "index": 99})
    assert resp.status_code == 409
    assert resp.json()["detail"]["code"] == "stale_candidate"


def test_reject_opens_definition(client):
    submit(client, "add red")
    resp = client.post("/reject", json={"user": "amy"})
    assert resp.status_code == 200
    assert resp.json()["status"] == "unparsable"
    assert resp.json()["define_depth"] == 1
    resp = client.post("/define/cancel", json={"user": "amy"})
    assert resp.json() == {"define_depth": 0}


def test_define_flow_over_http(client):
    payload = submit(client, "red tower")
    assert payload["status"] == "unparsable"
    assert payload["define_depth"] == 1

    step = client.post("/define/step", json={
        "user": "amy", "utterance": "add red top"}).json()
    assert step["status"] == "candidates"
    assert step["define_depth"] == 1
    accept(client)

    done = client.post("/define/accept", json={"user": "amy"}).json()
    assert done["head"] == "red tower"
    assert done["redundant"] is False
    assert done["define_depth"] == 0
    assert done["rules"]
    rule = done["rules"][0]
    assert set(rule) == {"id", "lhs", "rhs", "template", "author", "core",
                         "use_count", "used_by_other", "citations"}
    assert rule["author"] == "amy"
    assert rule["core"] is False
    assert done["world"]["voxels"]  # scratch world committed

    # the definition is immediately usable
    assert submit(client, "red tower")["status"] == "candidates"

    listed = client.get("/grammar", params={"induced_only": True}).json()["rules"]
    assert {r["id"] for r in listed} == {r["id"] for r in done["rules"]}
    full = client.get("/grammar").json()["rules"]
    assert len(full) > len(listed)


def test_define_accept_without_context_is_409(client):
    resp = client.post("/define/accept", json={"user": "amy"})
    assert resp.status_code == 409
    assert resp.json()["detail"]["code"] == "no_define_context"


def test_define_by_demonstration_over_http(client):
    submit(client, "add red top")
    accept(client)
    submit(client, "add red top")
    accept(client)
    done = client.post("/define/accept", json={
        "user": "amy", "head": "double stack", "last": 2}).json()
    assert done["head"] == "double stack"
    assert done["rules"]
    assert submit(client, "double stack")["status"] == "candidates"


def test_define_start_endpoint(client):
    resp = client.post("/define/start", json={"user": "amy", "head": "red tower"})
    assert resp.json()["status"] == "unparsable"
    assert resp.json()["define_depth"] == 1
    state = client.get("/state").json()
    assert state["define_depths"] == {"amy": 1}


def test_metrics_endpoint(client):
    submit(client, "add red")
    accept(client)
    report = client.get("/metrics", params={"window": 2}).json()
    assert report["window_size"] == 2
    assert report["count"] == 1
    assert report["frac_core"] == 1.0


def test_state_tracks_pending_users(client):
    submit(client, "add red", user="amy")
    submit(client, "add blue", user="bob")
    state = client.get("/state").json()
    assert state["pending_users"] == ["amy", "bob"]


def test_empty_user_is_rejected(client):
    resp = client.post("/submit", json={"user": "", "utterance": "add red"})
    assert resp.status_code == 422

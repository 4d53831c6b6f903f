import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from coactive.learner import rank, zero_weights
from coactive.service.app import create_app
from coactive.service.schemas import SessionPayload, SessionState
from coactive.service.sessions import SessionManager, solve_wrist_ik
from coactive.world import wrist_positions

from conftest import make_scene


@pytest.fixture
def client():
    return TestClient(create_app())


def new_session(client, **overrides):
    body = {"scenario_seed": 3, "family": "manipulation", "seed": 3,
            "candidates": 12, "k": 5}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestCreate:
    def test_fresh_session_state(self, client):
        payload = new_session(client)
        assert payload["iteration"] == 1
        state = client.get(f"/sessions/{payload['session_id']}").json()
        assert np.allclose(state["weights"]["motion"], 0.0)
        assert np.allclose(state["weights"]["interaction"], 0.0)
        assert len(payload["top"]) == 5
        ranks = [t["rank"] for t in payload["top"]]
        assert ranks == [1, 2, 3, 4, 5]
        # zero weights tie: ranked by insertion order
        assert [t["index"] for t in payload["top"]] == [0, 1, 2, 3, 4]

    def test_payload_round_trips_schema(self, client):
        import jsonschema

        payload = new_session(client)
        jsonschema.validate(payload, SessionPayload.model_json_schema())
        state = client.get(f"/sessions/{payload['session_id']}").json()
        jsonschema.validate(state, SessionState.model_json_schema())

    def test_scene_document_accepted(self, client):
        from coactive.world import scene_to_dict

        scene = make_scene(objects=())
        payload = new_session(client, scene=scene_to_dict(scene), scenario_seed=None)
        assert payload["scene"]["manipulated_id"] == "carried"

    def test_invalid_scene_rejected(self, client):
        resp = client.post("/sessions", json={"scene": {"bogus": 1}, "seed": 0})
        assert resp.status_code == 422
        assert "error" in resp.json()

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/doesnotexist").status_code == 404


class TestRerank:
    def test_click_rank_one_keeps_weights(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        before = payload["weight_hash"]
        resp = client.post(f"/sessions/{sid}/rerank", json={"rank": 1}).json()
        assert resp["update"]["accepted"] is True
        assert resp["update"]["weight_delta_norm"] == 0.0
        assert resp["update"]["weight_hash"] == before
        assert resp["next"]["iteration"] == 2

    def test_click_rank_three_moves_weights(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        resp = client.post(f"/sessions/{sid}/rerank", json={"rank": 3}).json()
        assert resp["update"]["weight_delta_norm"] > 0.0
        assert resp["next"]["iteration"] == 2

    def test_out_of_range_rank_rejected(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        resp = client.post(f"/sessions/{sid}/rerank", json={"rank": 6})
        assert resp.status_code == 422
        state = client.get(f"/sessions/{sid}").json()
        assert state["iteration"] == 1

    def test_identical_clicks_identical_weights(self, client):
        a = new_session(client)
        b = new_session(client)
        for sid in (a["session_id"], b["session_id"]):
            for r in (3, 2, 4, 1, 2):
                resp = client.post(f"/sessions/{sid}/rerank", json={"rank": r})
                assert resp.status_code == 200
        state_a = client.get(f"/sessions/{a['session_id']}").json()
        state_b = client.get(f"/sessions/{b['session_id']}").json()
        assert state_a["weight_hash"] == state_b["weight_hash"]
        ev_a = client.get(f"/sessions/{a['session_id']}/events").json()["events"]
        ev_b = client.get(f"/sessions/{b['session_id']}/events").json()["events"]
        assert ev_a == ev_b


class TestEdit:
    def test_noop_edit_accepted(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        top = payload["top"][0]
        target = top["wrist"][4]
        resp = client.post(f"/sessions/{sid}/edit", json={"index": 4, "target": target})
        assert resp.status_code == 200, resp.text
        body = resp.json()
        assert body["update"]["accepted"] is True
        assert body["update"]["weight_delta_norm"] == 0.0
        assert body["next"]["iteration"] == 2

    def test_reachable_target_accepted(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        top = payload["top"][0]
        wrist = np.array(top["wrist"][5])
        target = (wrist + np.array([0.0, 0.0, 0.08])).tolist()
        resp = client.post(f"/sessions/{sid}/edit", json={"index": 5, "target": target})
        assert resp.status_code == 200, resp.text
        assert resp.json()["update"]["accepted"] is True

    def test_unreachable_target_rejected_without_update(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        resp = client.post(
            f"/sessions/{sid}/edit", json={"index": 4, "target": [4.0, 4.0, 1.0]}
        )
        assert resp.status_code == 409
        assert "error" in resp.json()
        state = client.get(f"/sessions/{sid}").json()
        assert state["iteration"] == 1
        assert len(state["history"]) == 1  # only the created event

    def test_boundary_waypoints_rejected(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        top = payload["top"][0]
        resp = client.post(
            f"/sessions/{sid}/edit", json={"index": 29, "target": top["wrist"][29]}
        )
        assert resp.status_code == 422


class TestIk:
    def test_converges_on_sampled_reachable_targets(self):
        scene = make_scene()
        rng = np.random.default_rng(0)
        start = np.asarray(scene.start_config, dtype=float)
        wrist0 = wrist_positions(scene.arm, start[None, :])[0]
        origin = np.asarray(scene.arm.shoulder_origin)
        for _ in range(25):
            raw = wrist0 + rng.uniform(-0.12, 0.12, size=3)
            # clamp the sample into the comfortably reachable shell
            radial = raw - origin
            reach = np.linalg.norm(radial)
            target = origin + radial * min(0.88, reach) / reach
            q, residual = solve_wrist_ik(scene.arm, start, target)
            assert residual < 0.02, f"target {target} residual {residual}"

    def test_current_position_is_fixed_point(self):
        scene = make_scene()
        start = np.asarray(scene.start_config, dtype=float)
        wrist0 = wrist_positions(scene.arm, start[None, :])[0]
        q, residual = solve_wrist_ik(scene.arm, start, wrist0)
        assert residual < 1e-9
        assert np.allclose(q, start)


class TestStateConsistency:
    def test_ranking_matches_fresh_rank_call(self):
        manager = SessionManager()
        session = manager.create(5, "manipulation", None, 5, 5, 10)
        view = manager.top_view(session)
        fresh = rank(session.weights, session.features)
        assert [v["index"] for v in view] == fresh[:5]

    def test_history_length_tracks_iterations(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        for r in (2, 3):
            client.post(f"/sessions/{sid}/rerank", json={"rank": r})
        state = client.get(f"/sessions/{sid}").json()
        assert state["iteration"] == 3
        feedback_events = [e for e in state["history"] if e["event"] == "rerank"]
        assert len(feedback_events) == state["iteration"] - 1

    def test_state_read_is_side_effect_free(self, client):
        payload = new_session(client)
        sid = payload["session_id"]
        a = client.get(f"/sessions/{sid}").json()
        b = client.get(f"/sessions/{sid}").json()
        assert a == b

    def test_manifest_included(self, client):
        payload = new_session(client)
        state = client.get(f"/sessions/{payload['session_id']}").json()
        assert len(state["manifest"]) == 219
        assert {e["vector"] for e in state["manifest"]} == {"interaction", "motion"}

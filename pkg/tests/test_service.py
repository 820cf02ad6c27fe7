"""The /v1 wire API: envelopes, lifecycle endpoints, idempotency, clock."""

from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from conftest import make_policy
from featfade.harness import ScenarioConfig, ScenarioKind, run_scenario
from featfade.service import create_app
from featfade.world import WorldConfig


@pytest.fixture
def world():
    return WorldConfig(
        seed=99, requests_per_day=800, holdout_per_day=800, n_days=40,
        latent_cardinality=100,
    )


@pytest.fixture
def client(world):
    app = create_app(world)
    with TestClient(app) as c:
        yield c


def policy_body(features, start_day=1, rate=0.1, mode="coverage"):
    return {
        "features": features,
        "schedule": {
            "start_day": start_day,
            "rate_per_day": rate,
            "initial_coverage": 1.0,
            "target_coverage": 0.0,
            "mode": mode,
        },
        "max_daily_ne_increase": 10.0,
        "max_cumulative_ne_increase": 10.0,
        "max_duration_days": 1000,
    }


class TestStateAndEnvelope:
    def test_fresh_server_day_zero_empty_rollouts(self, client):
        state = client.get("/v1/state").json()
        assert state["day"] == 0
        assert state["payload"]["day"] == 0
        assert state["payload"]["rollout_count"] == 0
        rollouts = client.get("/v1/rollouts").json()
        assert rollouts["payload"]["rollouts"] == []

    def test_envelope_echoes_request_id(self, client):
        body = client.get("/v1/state", headers={"X-Request-Id": "req-7"}).json()
        assert body["echo_id"] == "req-7"

    def test_snapshot_version_monotone_across_mutations(self, client):
        versions = [client.get("/v1/state").json()["snapshot_version"]]
        client.post("/v1/rollouts", json=policy_body(["sparse_00"]))
        versions.append(client.get("/v1/state").json()["snapshot_version"])
        client.post("/v1/clock/step", params={"days": 2})
        versions.append(client.get("/v1/state").json()["snapshot_version"])
        assert versions == sorted(versions)
        assert versions[0] < versions[-1]


class TestRolloutLifecycle:
    def test_create_then_list(self, client):
        created = client.post("/v1/rollouts", json=policy_body(["sparse_00"]))
        assert created.status_code == 200
        assert created.json()["payload"]["state"] == "Pending"
        listing = client.get("/v1/rollouts").json()["payload"]["rollouts"]
        assert len(listing) == 1
        assert listing[0]["features"] == ["sparse_00"]

    def test_step_activates_and_tracks_coverage(self, client):
        client.post("/v1/rollouts", json=policy_body(["sparse_00"], start_day=1, rate=0.1))
        client.post("/v1/clock/step", params={"days": 3})
        rollout = client.get("/v1/rollouts").json()["payload"]["rollouts"][0]
        assert rollout["state"] == "Active"
        # cross-checked against the schedule module: 1.0 - 0.1 * (3 - 1)
        assert rollout["current_coverage"] == pytest.approx(0.8)

    def test_pause_resume_rollback_transitions(self, client):
        rid = client.post("/v1/rollouts", json=policy_body(["sparse_00"])).json()[
            "payload"
        ]["id"]
        client.post("/v1/clock/step")
        assert client.post(f"/v1/rollouts/{rid}/pause").json()["payload"]["state"] == "Paused"
        assert client.post(f"/v1/rollouts/{rid}/resume").json()["payload"]["state"] == "Active"
        assert client.post(f"/v1/rollouts/{rid}/rollback").json()["payload"]["state"] == "RolledBack"

    def test_get_single_rollout(self, client):
        rid = client.post("/v1/rollouts", json=policy_body(["dense_0"])).json()[
            "payload"
        ]["id"]
        got = client.get(f"/v1/rollouts/{rid}")
        assert got.status_code == 200
        assert got.json()["payload"]["id"] == rid

    def test_unknown_rollout_404_with_code(self, client):
        resp = client.get("/v1/rollouts/ro-nope")
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "unknown-rollout"

    def test_unknown_feature_400_names_feature(self, client):
        resp = client.post("/v1/rollouts", json=policy_body(["sparse_99"]))
        assert resp.status_code == 400
        body = resp.json()
        assert body["error"]["code"] == "unknown-feature"
        assert "sparse_99" in body["error"]["message"]

    def test_feature_conflict_409(self, client):
        client.post("/v1/rollouts", json=policy_body(["sparse_00"]))
        resp = client.post("/v1/rollouts", json=policy_body(["sparse_00"]))
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "feature-conflict"

    def test_distribution_on_sparse_rejected(self, client):
        resp = client.post(
            "/v1/rollouts", json=policy_body(["sparse_00"], mode="distribution")
        )
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "invalid-schedule"

    def test_malformed_body_is_structured_422(self, client):
        resp = client.post("/v1/rollouts", json={"features": []})
        assert resp.status_code == 422

    def test_illegal_transition_409(self, client):
        rid = client.post("/v1/rollouts", json=policy_body(["sparse_00"])).json()[
            "payload"
        ]["id"]
        resp = client.post(f"/v1/rollouts/{rid}/resume")
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "illegal-transition"


class TestRateAdjustment:
    def test_pending_rate_patch(self, client):
        rid = client.post(
            "/v1/rollouts", json=policy_body(["sparse_00"], start_day=10)
        ).json()["payload"]["id"]
        resp = client.patch(f"/v1/rollouts/{rid}/rate", json={"rate_per_day": 0.05})
        assert resp.status_code == 200
        assert resp.json()["payload"]["schedule"]["rate_per_day"] == 0.05

    def test_active_requires_pause_first(self, client):
        rid = client.post("/v1/rollouts", json=policy_body(["sparse_00"])).json()[
            "payload"
        ]["id"]
        client.post("/v1/clock/step")
        resp = client.patch(f"/v1/rollouts/{rid}/rate", json={"rate_per_day": 0.05})
        assert resp.status_code == 409
        assert "pause" in resp.json()["error"]["message"]


class TestMetrics:
    def test_since_day_cursor(self, client):
        client.post("/v1/clock/step", params={"days": 4})
        all_points = client.get("/v1/metrics").json()["payload"]["points"]
        assert [p["day"] for p in all_points] == [1, 2, 3, 4]
        tail = client.get("/v1/metrics", params={"since_day": 2}).json()["payload"][
            "points"
        ]
        assert [p["day"] for p in tail] == [3, 4]

    def test_metric_points_carry_coverage_and_verdict(self, client):
        client.post("/v1/rollouts", json=policy_body(["sparse_00"], rate=0.5))
        client.post("/v1/clock/step", params={"days": 2})
        point = client.get("/v1/metrics").json()["payload"]["points"][-1]
        assert point["guardrail_verdict"] == "ok"
        assert "sparse_00" in point["coverage_snapshot"]


class TestIdempotency:
    def test_create_not_double_applied(self, client):
        headers = {"Idempotency-Key": "abc-1"}
        first = client.post(
            "/v1/rollouts", json=policy_body(["sparse_00"]), headers=headers
        )
        second = client.post(
            "/v1/rollouts", json=policy_body(["sparse_00"]), headers=headers
        )
        assert first.json() == second.json()
        rollouts = client.get("/v1/rollouts").json()["payload"]["rollouts"]
        assert len(rollouts) == 1

    def test_step_not_double_applied(self, client):
        headers = {"Idempotency-Key": "step-1"}
        client.post("/v1/clock/step", params={"days": 3}, headers=headers)
        client.post("/v1/clock/step", params={"days": 3}, headers=headers)
        assert client.get("/v1/state").json()["day"] == 3

    def test_rollback_replay_returns_cached_not_error(self, client):
        rid = client.post("/v1/rollouts", json=policy_body(["sparse_00"])).json()[
            "payload"
        ]["id"]
        client.post("/v1/clock/step")
        headers = {"Idempotency-Key": "rb-1"}
        first = client.post(f"/v1/rollouts/{rid}/rollback", headers=headers)
        replay = client.post(f"/v1/rollouts/{rid}/rollback", headers=headers)
        assert first.status_code == replay.status_code == 200
        assert first.json() == replay.json()

    def test_distinct_keys_apply_separately(self, client):
        client.post("/v1/clock/step", headers={"Idempotency-Key": "a"})
        client.post("/v1/clock/step", headers={"Idempotency-Key": "b"})
        assert client.get("/v1/state").json()["day"] == 2


class TestClock:
    def test_step_returns_verdicts(self, client):
        resp = client.post("/v1/clock/step", params={"days": 2}).json()
        assert resp["payload"]["days_run"] == 2
        assert resp["payload"]["guardrail_verdicts"] == ["ok", "ok"]

    def test_auto_step_advances_and_stops(self, client):
        client.post("/v1/clock/auto", json={"seconds_per_day": 0.05})
        time.sleep(0.6)
        client.delete("/v1/clock/auto")
        day = client.get("/v1/state").json()["day"]
        assert day >= 1
        time.sleep(0.3)
        assert client.get("/v1/state").json()["day"] == day

    def test_auto_state_reported(self, client):
        client.post("/v1/clock/auto", json={"seconds_per_day": 5.0})
        assert client.get("/v1/state").json()["payload"][
            "auto_step_seconds_per_day"
        ] == 5.0
        client.delete("/v1/clock/auto")
        assert (
            client.get("/v1/state").json()["payload"]["auto_step_seconds_per_day"]
            is None
        )


class TestApiCliEquality:
    def test_api_steps_equal_batch_run(self, world):
        """The API day loop and the batch harness produce identical metrics."""
        features = tuple(
            f for f in world.features() if f.name in world.informative_names
        )
        policy = make_policy(features, start_day=6, rate=0.1)
        scenario = ScenarioConfig(
            name="parity", kind=ScenarioKind.FADING, policies=(policy,),
            warmup_days=6,
        )
        batch_report = run_scenario(world, scenario)

        app = create_app(world, scenario)
        with TestClient(app) as client:
            client.post("/v1/clock/step", params={"days": world.n_days})
            api_points = client.get("/v1/metrics").json()["payload"]["points"]

        batch_points = [p.to_dict() for p in batch_report.series]
        assert api_points == batch_points

import json
import time

import pytest
from fastapi.testclient import TestClient

from crux.climber import PopulationSpec
from crux.corpus import CorpusStore
from crux.format import route_to_json
from crux.model import GradeLabel
from crux.service import create_app
from conftest import ladder_route

POP = {"size": 150, "ability_mean": 1.35, "ability_std": 0.5, "seed": 42}


@pytest.fixture()
def client(tmp_path):
    store = CorpusStore(tmp_path / "corpus")
    for k, (diff, grade) in enumerate([(0.2, "5.8"), (0.55, "5.10a"), (0.9, "5.12a")]):
        for j in range(2):
            route, wall = ladder_route(f"c{k}{j}", diff + 0.01 * j, GradeLabel.parse(grade))
            store.save_route(route, wall)
    work_route, work_wall = ladder_route("work", 0.5, None)
    store.put_document(work_wall, (work_route,))
    app = create_app(store, population_spec=PopulationSpec(size=150, ability_mean=1.35,
                                                           ability_std=0.5, seed=42))
    with TestClient(app) as c:
        c.store = store
        yield c


def test_get_wall(client):
    r = client.get("/api/wall")
    assert r.status_code == 200
    body = r.json()
    assert body["wall"]["width_m"] == 3.0
    assert body["routes"][0]["name"] == "work"


def test_put_wall_roundtrip(client):
    doc = client.get("/api/wall").json()
    r = client.put("/api/wall", json=doc)
    assert r.status_code == 200
    assert r.json() == doc


def test_put_wall_validation_error(client):
    doc = client.get("/api/wall").json()
    doc["routes"][0]["finish_hold_id"] = "nope"
    r = client.put("/api/wall", json=doc)
    assert r.status_code == 422
    assert r.json()["code"] == "INVALID_ROUTE"
    assert any("FINISH" in i["code"] for i in r.json()["detail"])


def test_put_wall_shape_error_names_path(client):
    r = client.put("/api/wall", json={"wall": {"width_m": 3.0}})
    assert r.status_code == 422
    assert "height_m" in json.dumps(r.json())


def test_beta_endpoint(client):
    doc = client.get("/api/wall").json()
    r = client.post("/api/beta", json={"route": doc["routes"][0]})
    assert r.status_code == 200
    body = r.json()
    assert body["beta"]["total_cost"] > 0
    assert 0 < body["success_probability"] < 1
    assert len(body["beta"]["states"]) == len(body["beta"]["moves"]) + 1


def test_beta_unreachable_409(client):
    doc = client.get("/api/wall").json()
    route = dict(doc["routes"][0])
    route["hold_ids"] = ["work_0", "work_5"]
    route["start_hold_ids"] = ["work_0"]
    route["finish_hold_id"] = "work_5"
    r = client.post("/api/beta", json={"route": route})
    assert r.status_code == 409
    assert r.json()["code"] == "UNREACHABLE"


def test_beta_invalid_route_422(client):
    r = client.post("/api/beta", json={"route": {"name": "x", "hold_ids": ["zz"],
                                                 "start_hold_ids": ["zz"],
                                                 "finish_hold_id": "zz"}})
    assert r.status_code == 422


def test_beta_bad_json_400(client):
    r = client.post("/api/beta", content=b"{not json",
                    headers={"content-type": "application/json"})
    assert r.status_code == 400


def test_grade_endpoint_and_determinism(client):
    doc = client.get("/api/wall").json()
    body = {"route": doc["routes"][0], "seed": 7}
    r1 = client.post("/api/grade", json=body)
    r2 = client.post("/api/grade", json=body)
    assert r1.status_code == 200
    assert r1.json() == r2.json()
    assert r1.json()["grade"] in ("5.8", "5.10a", "5.12a")
    assert len(r1.json()["scores"]) == 3


def test_grade_locked_409(client):
    for _ in range(50):
        client.post("/api/ascents", json={"route_name": "c00"})
    locked_route, _ = client.store.find_route("c00")
    assert locked_route.grade_locked
    r = client.post("/api/grade", json={"route": route_to_json(locked_route)})
    assert r.status_code == 409
    assert r.json()["code"] == "LOCKED"


def test_ascents_endpoint(client):
    r = client.post("/api/ascents", json={"route_name": "c10"})
    assert r.status_code == 200
    assert r.json() == {"route_name": "c10", "exposure_count": 1, "grade_locked": False}
    r404 = client.post("/api/ascents", json={"route_name": "ghost"})
    assert r404.status_code == 404


def test_vary_endpoint(client):
    doc = client.get("/api/wall").json()
    body = {"route": doc["routes"][0], "intensity": 0.4, "seed": 5}
    r1 = client.post("/api/vary", json=body)
    r2 = client.post("/api/vary", json=body)
    assert r1.status_code == 200
    assert r1.json() == r2.json()
    assert r1.json()["route"]["name"] == "work"
    assert "holds" in r1.json()["wall"]


def test_generate_job_lifecycle(client):
    body = {"target_grade": "5.10a", "max_iterations": 25, "seed": 1,
            "hold_budget": 6, "in_loop_population": 40}
    r = client.post("/api/generate", json=body)
    assert r.status_code == 202
    job_id = r.json()["job_id"]
    deadline = time.time() + 120
    while time.time() < deadline:
        jr = client.get(f"/api/jobs/{job_id}").json()
        if jr["status"] in ("done", "failed", "cancelled"):
            break
        time.sleep(0.05)
    assert jr["status"] == "done", jr
    rep = jr["result"]["report"]
    assert rep["iterations"] == 25
    assert jr["result"]["document"]["routes"][0]["name"] == "generated"
    # trace monotone
    trace = rep["objective_trace"]
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_generate_job_cancel(client):
    body = {"target_grade": "5.10a", "max_iterations": 5000, "seed": 2,
            "hold_budget": 6, "in_loop_population": 40}
    job_id = client.post("/api/generate", json=body).json()["job_id"]
    time.sleep(0.3)
    r = client.post(f"/api/jobs/{job_id}/cancel")
    assert r.status_code == 200
    deadline = time.time() + 120
    while time.time() < deadline:
        jr = client.get(f"/api/jobs/{job_id}").json()
        if jr["status"] in ("done", "cancelled", "failed"):
            break
        time.sleep(0.05)
    assert jr["status"] == "cancelled"
    assert jr["result"] is not None  # best-so-far is reported
    assert jr["result"]["report"]["iterations"] < 5000


def test_job_not_found(client):
    assert client.get("/api/jobs/deadbeef").status_code == 404
    assert client.post("/api/jobs/deadbeef/cancel").status_code == 404

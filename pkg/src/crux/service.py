"""HTTP service: the JSON face of the engine for the setter workbench and batch users."""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .climber import PopulationSpec, sample_population
from .corpus import CorpusError, CorpusStore
from .format import (
    JsonShapeError,
    from_json_object,
    route_from_json,
    route_to_json,
    to_json_object,
)
from .generator import GenerationConfig, generate_route
from .grading import GradingError, assign_grade
from .model import ClimberProfile, uniform_exposure, validate_route
from .params import DEFAULT_PARAMS, EngineParams
from .planner import Beta, PlannerError, UnreachableError, plan_beta
from .style import vary_route

DEFAULT_PORT = 8977
DEFAULT_POPULATION = PopulationSpec(size=200, seed=0)


def beta_to_json(beta: Beta) -> dict:
    return {
        "states": [
            {"lh": s.lh, "rh": s.rh, "lf": s.lf, "rf": s.rf} for s in beta.states
        ],
        "moves": [
            {
                "limb": m.limb,
                "from_hold": m.from_hold,
                "to_hold": m.to_hold,
                "distance": m.distance,
                "move_type": m.move_type.value,
                "cost": m.cost,
                "success_probability": m.success_probability,
            }
            for m in beta.moves
        ],
        "total_cost": beta.total_cost,
    }


def climber_from_json(obj: Optional[dict]) -> ClimberProfile:
    obj = obj or {}
    return ClimberProfile(
        ability=float(obj.get("ability", 1.0)),
        height=float(obj.get("height", 1.75)),
        arm_span=float(obj.get("arm_span", obj.get("height", 1.75))),
        fear_sensitivity=float(obj.get("fear_sensitivity", 0.5)),
        exposure=uniform_exposure(),
    )


class Job:
    def __init__(self, job_id: str):
        self.id = job_id
        self.status = "queued"
        self.progress: dict = {"iteration": 0, "best_objective": None}
        self.result: Optional[dict] = None
        self.error: Optional[str] = None
        self.cancel_event = threading.Event()
        self.lock = threading.Lock()

    def to_json(self) -> dict:
        with self.lock:
            return {
                "id": self.id,
                "status": self.status,
                "progress": dict(self.progress),
                "result": self.result,
                "error": self.error,
            }


class JobManager:
    def __init__(self, max_workers: int = 2):
        self.executor = ThreadPoolExecutor(max_workers=max_workers)
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()

    def submit(self, fn) -> Job:
        job = Job(uuid.uuid4().hex[:12])
        with self.lock:
            self.jobs[job.id] = job

        def run():
            with job.lock:
                if job.status == "cancelled":
                    return
                job.status = "running"
            try:
                result = fn(job)
            except Exception as e:  # noqa: BLE001 - job errors become payloads
                with job.lock:
                    job.status = "failed"
                    job.error = str(e)
                return
            with job.lock:
                job.status = "cancelled" if job.cancel_event.is_set() else "done"
                job.result = result

        self.executor.submit(run)
        return job

    def get(self, job_id: str) -> Optional[Job]:
        with self.lock:
            return self.jobs.get(job_id)


def create_app(store: CorpusStore, params: EngineParams = DEFAULT_PARAMS,
               population_spec: PopulationSpec = DEFAULT_POPULATION,
               max_jobs: int = 2, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="crux", version="0.1.0")
    jobs = JobManager(max_workers=max_jobs)
    app.state.store = store
    app.state.jobs = jobs

    def error(status: int, code: str, detail=None):
        body = {"code": code}
        if detail is not None:
            body["detail"] = detail
        return JSONResponse(status_code=status, content=body)

    async def read_json(request: Request) -> Optional[dict]:
        try:
            body = await request.json()
        except Exception:
            return None
        return body if isinstance(body, dict) else None

    def request_population(body: dict):
        spec = population_spec
        if body.get("population"):
            spec = PopulationSpec.from_json(body["population"])
        seed = spec.seed if spec.seed is not None else int(body.get("seed", 0))
        return sample_population(spec, seed)

    @app.get("/api/wall")
    def get_wall():
        wall, routes = store.current_document()
        return to_json_object(wall, routes)

    @app.put("/api/wall")
    async def put_wall(request: Request):
        body = await read_json(request)
        if body is None:
            return error(400, "BAD_JSON")
        try:
            wall, routes = from_json_object(body)
        except JsonShapeError as e:
            return error(422, "INVALID_DOCUMENT", [str(e)])
        issues = []
        for r in routes:
            report = validate_route(r, wall)
            issues.extend(
                {"route": r.name, "code": i.code, "message": i.message, "hold_id": i.hold_id}
                for i in report.issues
            )
        if issues:
            return error(422, "INVALID_ROUTE", issues)
        store.put_document(wall, routes)
        return to_json_object(wall, routes)

    @app.post("/api/beta")
    async def post_beta(request: Request):
        body = await read_json(request)
        if body is None or "route" not in body:
            return error(400, "BAD_JSON")
        wall, _ = store.current_document()
        try:
            route = route_from_json(body["route"])
        except JsonShapeError as e:
            return error(422, "INVALID_ROUTE", [str(e)])
        report = validate_route(route, wall)
        if not report.ok:
            return error(422, "INVALID_ROUTE",
                         [{"code": i.code, "message": i.message, "hold_id": i.hold_id}
                          for i in report.issues])
        climber = climber_from_json(body.get("climber"))
        try:
            beta = plan_beta(route, wall, climber, params=params)
        except UnreachableError:
            return error(409, "UNREACHABLE")
        except PlannerError as e:
            return error(422, e.code, str(e))
        return {
            "beta": beta_to_json(beta),
            "success_probability": beta.success_probability(),
        }

    @app.post("/api/grade")
    async def post_grade(request: Request):
        body = await read_json(request)
        if body is None or "route" not in body:
            return error(400, "BAD_JSON")
        wall, _ = store.current_document()
        try:
            route = route_from_json(body["route"])
        except JsonShapeError as e:
            return error(422, "INVALID_ROUTE", [str(e)])
        if store.is_locked(route.name):
            return error(409, "LOCKED")
        report = validate_route(route, wall)
        if not report.ok:
            return error(422, "INVALID_ROUTE",
                         [{"code": i.code, "message": i.message, "hold_id": i.hold_id}
                          for i in report.issues])
        seed = int(body.get("seed", 0))
        p = params
        if body.get("threshold") is not None:
            p = p.with_overrides(threshold=float(body["threshold"]))
        try:
            corpus = store.grade_sets()
            assignment = assign_grade(
                route, wall, corpus, request_population(body),
                tnorm_kind=body.get("tnorm"), seed=seed, params=p)
        except GradingError as e:
            if e.code == "LOCKED":
                return error(409, "LOCKED")
            return error(422, e.code, str(e))
        except (PlannerError, CorpusError) as e:
            return error(422, getattr(e, "code", "INVALID"), str(e))
        return assignment.to_json()

    @app.post("/api/generate")
    async def post_generate(request: Request):
        body = await read_json(request)
        if body is None:
            return error(400, "BAD_JSON")
        try:
            config = GenerationConfig.from_json(body)
        except (KeyError, ValueError) as e:
            return error(422, "INVALID_CONFIG", str(e))
        wall, current_routes = store.current_document()
        seed_route = None
        if body.get("seed_route"):
            try:
                seed_route = route_from_json(body["seed_route"], "$.seed_route")
            except JsonShapeError as e:
                return error(422, "INVALID_ROUTE", [str(e)])
        try:
            corpus = store.grade_sets()
        except CorpusError as e:
            return error(422, e.code, str(e))
        if not corpus:
            return error(422, "EMPTY_CORPUS", "corpus has no graded routes")
        population = request_population(body)

        def run(job: Job):
            def on_progress(iteration: int, best: float):
                with job.lock:
                    job.progress = {"iteration": iteration, "best_objective": best}

            result = generate_route(
                wall, seed_route, config, corpus, population, params=params,
                progress=on_progress, cancelled=job.cancel_event.is_set)
            return {
                "document": to_json_object(result.wall, (result.route,)),
                "route": route_to_json(result.route),
                "beta": beta_to_json(result.beta) if result.beta else None,
                "report": result.report.to_json(),
            }

        job = jobs.submit(run)
        return JSONResponse(status_code=202, content={"job_id": job.id})

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return error(404, "NOT_FOUND")
        return job.to_json()

    @app.post("/api/jobs/{job_id}/cancel")
    def cancel_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return error(404, "NOT_FOUND")
        job.cancel_event.set()
        with job.lock:
            if job.status == "queued":
                job.status = "cancelled"
        return job.to_json()

    @app.post("/api/vary")
    async def post_vary(request: Request):
        body = await read_json(request)
        if body is None or "route" not in body:
            return error(400, "BAD_JSON")
        wall, _ = store.current_document()
        try:
            route = route_from_json(body["route"])
        except JsonShapeError as e:
            return error(422, "INVALID_ROUTE", [str(e)])
        report = validate_route(route, wall)
        if not report.ok:
            return error(422, "INVALID_ROUTE",
                         [{"code": i.code, "message": i.message, "hold_id": i.hold_id}
                          for i in report.issues])
        intensity = float(body.get("intensity", 0.3))
        seed = int(body.get("seed", 0))
        climber = climber_from_json(body.get("climber"))
        try:
            beta = plan_beta(route, wall, climber, params=params)
        except (UnreachableError, PlannerError):
            return error(409, "UNREACHABLE")
        varied_route, varied_wall = vary_route(route, wall, beta, intensity, seed)
        return {
            "route": route_to_json(varied_route),
            "wall": to_json_object(varied_wall, (varied_route,))["wall"],
        }

    @app.post("/api/ascents")
    async def post_ascent(request: Request):
        body = await read_json(request)
        if body is None or "route_name" not in body:
            return error(400, "BAD_JSON")
        try:
            route = store.record_ascent(str(body["route_name"]),
                                        lock_threshold=params.lock_threshold)
        except CorpusError as e:
            if e.code == "NOT_FOUND":
                return error(404, "NOT_FOUND")
            return error(422, e.code, str(e))
        return {
            "route_name": route.name,
            "exposure_count": route.exposure_count,
            "grade_locked": route.grade_locked,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

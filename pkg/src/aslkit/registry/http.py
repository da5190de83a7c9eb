"""HTTP surface of the registry; a thin JSON adapter over :class:`Registry`."""
from __future__ import annotations

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .core import Registry, RegistryError


def create_app(registry: Registry) -> FastAPI:
    app = FastAPI(title="adaptable-service registry")

    @app.exception_handler(RegistryError)
    async def _registry_error(_request: Request, exc: RegistryError):
        return JSONResponse(status_code=exc.status, content=exc.to_json())

    @app.post("/services", status_code=201)
    def publish(descriptor: dict = Body(...)):
        service_id = registry.publish(descriptor)
        return {"service_id": service_id}

    @app.get("/services")
    def list_services():
        return {"services": registry.list_services()}

    @app.post("/discover")
    def discover(query: dict = Body(...)):
        for field in ("functionality", "supply", "requested_sls"):
            if field not in query:
                raise RegistryError("bad_request", f"missing field {field!r}", 400, field)
        return registry.discover(
            query["functionality"], query["supply"], query["requested_sls"]
        )

    @app.post("/sessions/{session_id}/counter")
    def counter(session_id: str, body: dict = Body(...)):
        if "requested_sls" not in body:
            raise RegistryError("bad_request", "missing field 'requested_sls'", 400)
        return registry.counter(session_id, body["requested_sls"])

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str, body: dict = Body(...)):
        if "alternative_key" not in body:
            raise RegistryError("bad_request", "missing field 'alternative_key'", 400)
        return registry.accept(session_id, body["alternative_key"])

    @app.post("/sessions/{session_id}/abort")
    def abort(session_id: str):
        return registry.abort(session_id)

    @app.get("/services/{service_id}/alternatives/{alternative_key}/artifact")
    def artifact(service_id: str, alternative_key: str, session_id: str):
        data, digest = registry.fetch_artifact(service_id, alternative_key, session_id)
        return Response(
            content=data,
            media_type="application/octet-stream",
            headers={"X-Artifact-Digest": digest},
        )

    return app

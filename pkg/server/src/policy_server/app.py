"""FastAPI application serving the policy wire protocol.

Endpoints: POST /v1/propose, POST /v1/propose_route, GET /v1/health.
Handlers are stateless; the table loads once at startup. SMARTS strings
go out as stored -- the consuming engine validates them.
"""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, ValidationError

from .config import ServerConfig
from .table import TableBackend, smiles_looks_valid


class ProposeRequest(BaseModel):
    smiles: str = Field(min_length=1)
    k: int | None = Field(default=None, ge=1)
    condition: str | None = None


class ProposeRouteRequest(BaseModel):
    smiles: str = Field(min_length=1)
    n_samples: int | None = Field(default=None, ge=1)
    condition: str | None = None


def create_app(config: ServerConfig) -> FastAPI:
    if config.model_path is not None:
        raise NotImplementedError(
            "model backends are a plug point; this server ships the table "
            "backend only")
    backend = TableBackend.load(config.table_path)
    app = FastAPI(title="policy-server", version="0.1.0")

    async def _parse_body(request: Request, model):
        try:
            payload = await request.json()
        except Exception:
            return None, JSONResponse(
                {"error": "malformed JSON body"}, status_code=400)
        try:
            return model.model_validate(payload), None
        except ValidationError as e:
            return None, JSONResponse(
                {"error": f"invalid request: {e.errors()[0]['msg']}",
                 "field": list(e.errors()[0]["loc"])},
                status_code=400)

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "products": len(backend.products),
                "routes": len(backend.routes)}

    @app.post("/v1/propose")
    async def propose(request: Request):
        req, error = await _parse_body(request, ProposeRequest)
        if error is not None:
            return error
        if not smiles_looks_valid(req.smiles):
            return JSONResponse(
                {"error": f"unparseable SMILES: {req.smiles!r}"},
                status_code=422)
        k = req.k if req.k is not None else config.default_k
        try:
            proposals = backend.propose(req.smiles, k)
        except Exception as e:  # backend failure
            return JSONResponse({"error": str(e)}, status_code=500)
        return {"proposals": proposals}

    @app.post("/v1/propose_route")
    async def propose_route(request: Request):
        req, error = await _parse_body(request, ProposeRouteRequest)
        if error is not None:
            return error
        if not smiles_looks_valid(req.smiles):
            return JSONResponse(
                {"error": f"unparseable SMILES: {req.smiles!r}"},
                status_code=422)
        n = req.n_samples if req.n_samples is not None else \
            config.default_n_samples
        try:
            routes, warning = backend.propose_route(req.smiles, n,
                                                    req.condition)
        except Exception as e:
            return JSONResponse({"error": str(e)}, status_code=500)
        headers = {}
        if warning:
            headers["X-Condition-Warning"] = warning
        return JSONResponse({"routes": routes}, headers=headers)

    return app

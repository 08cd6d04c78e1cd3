"""HTTP JSON API over a built engine directory.

A thin adapter: every endpoint serializes the result of the corresponding
library call and never computes similarity itself. Errors carry a machine
code plus a human message: 404 unknown_document, 400 bad_query,
422 unknown_context, 500 internal.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..corpus import DocumentNotFound, document_to_record
from ..ctxsim import UnknownContext
from ..queryeng import (
    DEFAULT_K,
    DEFAULT_TAU_DIS,
    DEFAULT_TAU_SIM,
    AnalogicalQuery,
    QueryParseError,
    answer,
)
from .engine import Engine, EngineConfig, items_to_list


class ApiError(Exception):
    """Error response contract: HTTP status + machine code + message."""

    def __init__(self, status: int, code: str, message: str):
        assert status in (400, 404, 422, 500)
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def create_app(engine: Engine, cors: bool = True) -> FastAPI:
    app = FastAPI(
        title="ctxrec",
        description="Context-aware literature recommendations",
        version="0.1.0",
    )
    if cors:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad_query", "message": str(exc.errors()[:1])},
        )

    @app.exception_handler(Exception)
    async def internal_handler(_request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"code": "internal", "message": str(exc)},
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/contexts")
    def contexts() -> dict:
        return {"contexts": list(engine.config().contexts.labels)}

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        try:
            doc = engine.corpus().get(doc_id)
        except DocumentNotFound:
            raise ApiError(404, "unknown_document", f"no document {doc_id!r}")
        return document_to_record(doc)

    @app.get("/documents/{doc_id}/recommendations")
    def recommendations(
        doc_id: str, mode: str = "diverse", context: str | None = None, k: int = DEFAULT_K
    ) -> dict:
        if mode not in ("diverse", "focused"):
            raise ApiError(400, "bad_query", f"unknown mode {mode!r}")
        if mode == "focused" and context is None:
            raise ApiError(400, "bad_query", "focused mode needs a context parameter")
        if k < 1:
            raise ApiError(400, "bad_query", f"k must be >= 1, got {k}")
        if context is not None and context not in engine.config().contexts:
            raise ApiError(422, "unknown_context", f"unknown context {context!r}")
        try:
            items = engine.recommend(doc_id, mode=mode, context=context, k=k)
        except DocumentNotFound as exc:
            raise ApiError(404, "unknown_document", str(exc))
        return {
            "seed": doc_id,
            "mode": mode,
            "context": context,
            "k": k,
            "items": items_to_list(items, engine),
        }

    @app.post("/query")
    def post_query(payload: dict = Body(...)) -> dict:
        query = _parse_query_payload(payload, engine)
        try:
            items = answer(engine.context_graph(), query)
        except DocumentNotFound as exc:
            raise ApiError(404, "unknown_document", str(exc))
        return {
            "query": {
                "seed": query.seed,
                "require": query.require,
                "exclude": query.exclude,
                "k": query.k,
                "tau_sim": query.tau_sim,
                "tau_dis": query.tau_dis,
            },
            "items": items_to_list(items, engine),
        }

    return app


def _parse_query_payload(payload: dict, engine: Engine) -> AnalogicalQuery:
    if not isinstance(payload, dict):
        raise ApiError(400, "bad_query", "body must be a JSON object")
    seed = payload.get("seed")
    if not isinstance(seed, str) or not seed:
        raise ApiError(400, "bad_query", "missing seed")
    require = payload.get("require", [])
    exclude = payload.get("exclude", [])
    for name, value in (("require", require), ("exclude", exclude)):
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ApiError(400, "bad_query", f"{name} must be a list of context labels")
    try:
        query = AnalogicalQuery(
            seed=seed,
            require=list(require),
            exclude=list(exclude),
            k=int(payload.get("k", DEFAULT_K)),
            tau_sim=float(payload.get("tau_sim", DEFAULT_TAU_SIM)),
            tau_dis=float(payload.get("tau_dis", DEFAULT_TAU_DIS)),
        )
    except (TypeError, ValueError):
        raise ApiError(400, "bad_query", "k/tau_sim/tau_dis must be numeric")
    try:
        query.validate(engine.config().contexts)
    except UnknownContext as exc:
        raise ApiError(422, "unknown_context", str(exc))
    except QueryParseError as exc:
        raise ApiError(400, "bad_query", str(exc))
    return query


def serve(config: EngineConfig) -> None:
    """Run the API with uvicorn (blocking)."""
    import uvicorn

    config.validate()
    engine = Engine(config.directory)
    engine.context_graph()  # fail fast if stages are missing
    uvicorn.run(create_app(engine, cors=config.cors), host=config.host, port=config.port)

"""HTTP service exposing the same handlers as the CLI.

Run with:  uvicorn ascoh.service:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import pipeline
from .errors import AscohError, ConfigError, FieldTooSmall, PrecisionExhausted

app = FastAPI(
    title="ascoh",
    description=(
        "Exact de Rham cohomology of double covers in characteristic 2: "
        "Dieudonne modules, final types, V-types, predictions and bounds."
    ),
)


class CurveRequest(BaseModel):
    config: str = Field(description="curve config text")
    field: str | None = Field(default=None, description="field override")
    n: int | None = Field(default=None, description="pole-bound override")
    dump_module: bool = False


class VerifyRequest(CurveRequest):
    mode: str


class PredictRequest(BaseModel):
    mode: str
    d: int | None = None
    g_x: int = 0
    f_x: int = 0
    breaks: list[int] | None = None
    a_x: list[int] | None = None
    mu: int | None = None
    max_perps: int = 2
    max_exp: int = 3


class SearchRequest(BaseModel):
    config: str
    d: int
    count: int = 100
    seed: int = 0
    field: str | None = None


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except (FieldTooSmall, PrecisionExhausted) as exc:
        raise HTTPException(status_code=409, detail=str(exc)) from exc
    except AscohError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/compute")
def compute(req: CurveRequest):
    def run():
        curve, cfg, _ = pipeline.load_curve(req.config, field=req.field)
        return pipeline.compute_report(
            curve, name=cfg.name, n=req.n, dump_module=req.dump_module
        )

    return _guard(run)


@app.post("/verify")
def verify(req: VerifyRequest):
    def run():
        curve, _, _ = pipeline.load_curve(req.config, field=req.field)
        return pipeline.verify(curve, req.mode, n=req.n)

    return _guard(run)


@app.post("/predict")
def predict(req: PredictRequest):
    return _guard(
        pipeline.predict,
        req.mode,
        d=req.d,
        g_x=req.g_x,
        f_x=req.f_x,
        breaks=req.breaks,
        a_x=req.a_x,
        mu=req.mu,
        max_perps=req.max_perps,
        max_exp=req.max_exp,
    )


@app.post("/search")
def search(req: SearchRequest):
    def run():
        base, _, _ = pipeline.load_curve(req.config, field=req.field)
        return pipeline.search(base, req.d, req.count, req.seed)

    return _guard(run)


@app.post("/selftest")
def selftest(quick: bool = False):
    return pipeline.selftest(quick=quick)

"""HTTP service exposing the estimation pipeline and study harness.

The CLI talks to this app in-process through an ASGI transport, so the
same handlers serve both local commands and a deployed instance
(`spikecca serve`).  Handlers are synchronous on purpose: every
operation is CPU-bound and deterministic.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..cca import SampleSpectrum, cca_eigenvalues
from ..errors import ConfigError, DataShapeError, SpikeCCAError
from ..inference import default_epsilon, estimate_ccc_pipeline
from ..montecarlo import run_study, study_config_from_dict
from ..presets import get_preset
from ..rmt import ModelConfig, edges, lsd_density, xi_tracy_widom
from . import schemas

_ERROR_STATUS = {
    "model_domain": 400,
    "data_shape": 400,
    "rank_deficiency": 422,
    "numerical": 500,
    "config": 400,
    "error": 500,
}


def _matrix(rows, name: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise DataShapeError(f"{name} must be a nonempty 2-D array of numbers")
    return arr


def _spectrum_from_request(req: schemas.EstimateRequest) -> SampleSpectrum:
    if req.eigenvalues is not None:
        if req.x is not None or req.y is not None:
            raise DataShapeError("pass either eigenvalues or data blocks, not both")
        if req.p is None or req.q is None or req.n is None:
            raise DataShapeError("eigenvalue input needs explicit p, q, and n")
        lam = np.sort(np.asarray(req.eigenvalues, dtype=float))[::-1]
        return SampleSpectrum(lambdas=lam, effective_n=req.n,
                              config=ModelConfig(p=req.p, q=req.q, n=req.n))
    if req.x is None or req.y is None:
        raise DataShapeError("estimate needs both x and y blocks (or eigenvalues)")
    x = _matrix(req.x, "x")
    y = _matrix(req.y, "y")
    return cca_eigenvalues(x, y, centered=not req.center)


def create_app() -> FastAPI:
    app = FastAPI(title="spikecca", version=__version__)

    @app.exception_handler(SpikeCCAError)
    async def _domain_error(_: Request, exc: SpikeCCAError):
        status = _ERROR_STATUS.get(exc.category, 500)
        body = schemas.ErrorResponse(
            error=schemas.ErrorBody(category=exc.category, message=str(exc)))
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/api/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/api/lsd", response_model=schemas.LsdResponse)
    def lsd(req: schemas.LsdRequest):
        con = edges(req.c1, req.c2)
        resp = schemas.LsdResponse(
            c1=req.c1, c2=req.c2, d_minus=con.d_minus, d_plus=con.d_plus,
            r_c=con.r_c, xi_tw=xi_tracy_widom(req.c1, req.c2))
        if req.grid_points:
            # Open grid: the density can diverge at the endpoints when
            # d- = 0 or d+ = 1, so sample strictly inside the support.
            width = con.d_plus - con.d_minus
            xs = con.d_minus + width * (np.arange(req.grid_points) + 0.5) / req.grid_points
            resp.grid_x = xs.tolist()
            resp.grid_density = [lsd_density(float(v), req.c1, req.c2) for v in xs]
        return resp

    @app.post("/api/estimate", response_model=schemas.EstimateResponse)
    def estimate(req: schemas.EstimateRequest):
        spectrum = _spectrum_from_request(req)
        cfg = spectrum.config
        eps = req.epsilon if req.epsilon is not None else default_epsilon(spectrum.effective_n)
        est, reports = estimate_ccc_pipeline(spectrum, alpha=req.alpha, epsilon=eps)
        con = cfg.constants()
        return schemas.EstimateResponse(
            p=cfg.p, q=cfg.q, effective_n=spectrum.effective_n,
            eigenvalues=spectrum.lambdas.tolist(),
            constants=schemas.ConstantsModel(
                c1=cfg.c1, c2=cfg.c2, d_minus=con.d_minus, d_plus=con.d_plus,
                r_c=con.r_c, xi_tw=xi_tracy_widom(cfg.c1, cfg.c2), epsilon_n=eps),
            estimate=schemas.SpikeEstimateModel(
                k_hat=est.k_hat, epsilon_n=est.epsilon_n,
                r_hat=list(est.r_hat), rho_hat=list(est.rho_hat),
                groups=[list(g) for g in est.groups],
                clamp_flags=list(est.clamp_flags)),
            reports=[schemas.TestReportModel(
                name=r.name, statistic=r.statistic, quantile=r.quantile,
                alpha=r.alpha, reject=r.reject, p_value=r.p_value,
                p_value_clamped=r.p_value_clamped, inputs=r.inputs)
                for r in reports],
        )

    @app.post("/api/study", response_model=schemas.StudyResponse)
    def study(req: schemas.StudyRequest):
        if (req.preset is None) == (req.config is None):
            raise ConfigError("pass exactly one of preset or config")
        if req.preset is not None:
            config = get_preset(req.preset, seed=req.seed, reps=req.reps,
                                workers=req.workers, alpha=req.alpha)
        else:
            payload = dict(req.config)
            for key, value in (("seed", req.seed), ("reps", req.reps),
                               ("workers", req.workers), ("alpha", req.alpha)):
                if value is not None:
                    payload[key] = value
            config = study_config_from_dict(payload)
        result = run_study(config)
        return schemas.StudyResponse(
            study=result.study, rows=result.rows, csv=result.csv,
            summary=result.summary, histograms=result.histograms,
            meta=result.meta)

    return app

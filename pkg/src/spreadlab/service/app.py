"""FastAPI application wrapping the simulation lab.

Endpoints mirror the CLI subcommands: /simulate, /parity-sweep, /analyze and
/ingest, plus cheap closed-form analytics lookups. Responses carry CSV blobs;
persistence is the client's concern.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analytics import (
    coupling_boundary,
    general_parity,
    mean_relative_spread_change,
)
from ..deposition import mechanism_from_name
from ..engine import SimConfig, run
from ..errors import DomainError, EmptySeries, SpreadLabError
from ..estimators import (
    SpreadEventSeries,
    acf_abs_returns,
    alpha_estimate,
    conditional_parity_frequency,
    delta_s_distribution,
    odd_fraction,
    spread_relaxation,
)
from ..parity_chain import sweep, sweep_csv
from ..tape import ingest
from . import reports
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    HealthResponse,
    IngestRequest,
    IngestResponse,
    MechanismSpec,
    ParityTableOut,
    ScalarOut,
    SimSummary,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
    SweepRowOut,
)


def create_app() -> FastAPI:
    app = FastAPI(title="spreadlab", version=__version__)

    @app.exception_handler(SpreadLabError)
    async def _domain_error(request: Request, exc: SpreadLabError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "error": type(exc).__name__},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/analytics/parity", response_model=ParityTableOut)
    def parity(
        s: int = Query(ge=2),
        mechanism: str = "uniform",
        alpha: float | None = Query(default=None, gt=0.0, lt=1.0),
    ):
        table = general_parity(mechanism_from_name(mechanism, alpha), s)
        return ParityTableOut(
            s=table.s,
            parity=table.parity,
            p_odd=float(table.p_odd()),
            **{k: v for k, v in table.as_dict().items() if k != "s"},
        )

    @app.get("/analytics/mean-spread-change", response_model=ScalarOut)
    def mean_spread_change(
        s: int = Query(ge=2),
        mechanism: str = "uniform",
        alpha: float | None = Query(default=None, gt=0.0, lt=1.0),
    ):
        mech = mechanism_from_name(mechanism, alpha)
        return ScalarOut(value=float(mean_relative_spread_change(mech, s)))

    @app.get("/analytics/coupling-boundary", response_model=ScalarOut)
    def boundary(alpha: float = Query(gt=0.0, lt=1.0)):
        return ScalarOut(value=float(coupling_boundary(alpha)))

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        config = SimConfig(
            pi=req.pi,
            k=req.k,
            mechanism=req.mechanism.to_mechanism(),
            cancel_rate=req.cancel_rate,
            steps=req.steps,
            warmup=req.warmup,
            seed=req.seed,
            window=req.window,
            initial_depth=req.initial_depth,
            spread_ceiling=req.spread_ceiling,
        )
        traj = run(config)
        effective = config.as_dict()
        summary = traj.summary()
        comments = dict(effective)
        response = SimulateResponse(
            summary=SimSummary(**{k: summary[k] for k in SimSummary.model_fields}),
            config=effective,
        )
        if req.include_trajectory:
            response.trajectory_csv = traj.to_csv(comments)
        if req.include_quote_tape:
            tape_comments = dict(comments, tick_size=req.tape_tick_size)
            response.quote_tape_csv = traj.quote_tape_csv(req.tape_tick_size, tape_comments)
        if req.include_events:
            response.events_csv = traj.event_series().to_csv(comments, include_mid=True)
        return response

    @app.post("/parity-sweep", response_model=SweepResponse)
    def parity_sweep(req: SweepRequest):
        mechs = [m.to_mechanism() for m in req.mechanisms]
        rows = sweep(
            means=req.means,
            mechanisms=mechs,
            n_samples=req.n_samples,
            seed=req.seed,
            spread_dist=req.spread_dist,
            threads=req.threads,
        )
        effective = {
            "means": req.means,
            "mechanisms": [m.name for m in mechs],
            "alphas": [getattr(m, "alpha", None) for m in mechs],
            "n_samples": req.n_samples,
            "seed": req.seed,
            "spread_dist": req.spread_dist,
        }
        return SweepResponse(
            rows=[SweepRowOut(**row.__dict__) for row in rows],
            csv=sweep_csv(rows, effective),
            config=effective,
        )

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest):
        series = SpreadEventSeries.from_csv(req.events_csv)
        selected = req.selected()
        explicit = "all" not in req.estimators
        outputs: dict[str, str] = {}
        notes: list[str] = []

        def attempt(name, fn):
            try:
                outputs[name] = fn()
            except (SpreadLabError, ValueError) as exc:
                if explicit:
                    raise
                notes.append(f"{name} skipped: {exc}")

        if "odd_fraction" in selected:
            attempt("odd_fraction",
                    lambda: reports.odd_fraction_csv(odd_fraction(series), len(series)))
        if "conditional_parity" in selected:
            attempt("conditional_parity",
                    lambda: reports.conditional_parity_csv(
                        conditional_parity_frequency(series, req.min_count)))
        if "delta_s" in selected:

            def _delta_s():
                s = req.delta_s_spread
                if s is None:
                    down = series.s_pre[series.s_post < series.s_pre]
                    if len(down) == 0:
                        raise EmptySeries("no spread-reducing events")
                    values, counts = np.unique(down, return_counts=True)
                    s = int(values[np.argmax(counts)])
                return reports.delta_s_csv(delta_s_distribution(series, s))

            attempt("delta_s", _delta_s)
        if "alpha" in selected:
            attempt("alpha", lambda: reports.alpha_csv(alpha_estimate(series)))
        if "acf" in selected:

            def _acf():
                if series.mid2 is None:
                    raise DomainError("events CSV has no mid column; ACF needs it")
                result = acf_abs_returns(series.mid2, req.acf_max_lag)
                return reports.acf_csv(result, len(series))

            attempt("acf", _acf)
        if "relaxation" in selected:
            attempt("relaxation",
                    lambda: reports.relaxation_csv(
                        spread_relaxation(series, req.relax_delta, req.relax_max_lag)))
        effective = {
            "estimators": selected,
            "min_count": req.min_count,
            "delta_s_spread": req.delta_s_spread,
            "relax_delta": req.relax_delta,
            "relax_max_lag": req.relax_max_lag,
            "acf_max_lag": req.acf_max_lag,
            "n_events": len(series),
        }
        return AnalyzeResponse(outputs=outputs, notes=notes, config=effective)

    @app.post("/ingest", response_model=IngestResponse)
    def ingest_tape(req: IngestRequest):
        series, metadata = ingest(
            req.quotes_csv,
            tick_size=req.tick_size,
            tolerance=req.tolerance,
            strict=req.strict,
        )
        effective = {
            "tick_size": req.tick_size,
            "tolerance": req.tolerance,
            "strict": req.strict,
        }
        comments = dict(effective)
        comments.update(metadata)
        return IngestResponse(
            events_csv=series.to_csv(comments),
            metadata=metadata,
            config=effective,
        )

    return app


app = create_app()

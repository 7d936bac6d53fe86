"""FastAPI surface over the interpolation library.

The heavy construction steps (CBC search, FEM solves, fitting) run inside
the request handlers; fitted surrogates are kept in an in-memory store so
clients can evaluate them repeatedly without paying the construction cost
again.  Requests are synchronous by design: this is a compute service for
desk-scale workloads, not a job queue.
"""

from __future__ import annotations

import math
import threading
import time
import uuid
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__, checks, experiments, interp, lattice, pde
from ..weights import derive_params
from . import schemas


@dataclass
class StoredSurrogate:
    surrogate: experiments.NodalSurrogate
    problem: pde.FemProblem
    field: pde.FieldSpec
    meta: schemas.SurrogateOut


class SurrogateStore:
    def __init__(self):
        self._lock = threading.Lock()
        self._items: dict[str, StoredSurrogate] = {}

    def add(self, item: StoredSurrogate) -> None:
        with self._lock:
            self._items[item.meta.id] = item

    def get(self, key: str) -> StoredSurrogate:
        with self._lock:
            item = self._items.get(key)
        if item is None:
            raise HTTPException(status_code=404, detail=f"no surrogate {key!r}")
        return item

    def remove(self, key: str) -> None:
        with self._lock:
            if key not in self._items:
                raise HTTPException(status_code=404, detail=f"no surrogate {key!r}")
            del self._items[key]

    def list(self) -> list[schemas.SurrogateOut]:
        with self._lock:
            return [item.meta for item in self._items.values()]


def _record_out(r: experiments.ConvergenceRecord) -> schemas.RecordOut:
    return schemas.RecordOut(
        theta=r.theta, c=r.c, p=r.p, s=r.s, alpha=r.alpha, lam=r.lam,
        weights=r.weights, n=r.n,
        error=(None if not math.isfinite(r.error) else r.error),
        seconds=r.seconds, status=r.status,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="latkern", version=__version__)
    store = SurrogateStore()
    app.state.surrogates = store

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ArithmeticError)
    async def _numeric_error(request: Request, exc: ArithmeticError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(pde.SolverError)
    async def _solver_error(request: Request, exc: pde.SolverError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/params/derive", response_model=schemas.DerivedOut)
    def params_derive(body: schemas.ProblemIn):
        derived = derive_params(body.to_params())
        return schemas.DerivedOut(
            alpha=derived.alpha, lam=derived.lam,
            a_min=derived.a_min, a_max=derived.a_max,
            b_first=[float(v) for v in derived.b[:8]],
            b_last=float(derived.b[-1]),
        )

    @app.post("/cbc", response_model=schemas.CbcOut)
    def cbc(body: schemas.CbcIn):
        params = body.to_params()
        derived = derive_params(params)
        scheme = experiments.make_scheme(body.weights, derived)
        start = time.perf_counter()
        gv = lattice.cbc_construct(
            body.n, params.s, derived.alpha, scheme,
            lambda_power=derived.lam if body.lambda_power else None,
            order_factor=body.order_factor,
        )
        crit = lattice.criterion_value(
            gv, derived.alpha, scheme,
            lambda_power=derived.lam if body.lambda_power else None,
            order_factor=body.order_factor,
        )
        return schemas.CbcOut(
            n=gv.n, s=gv.s, z=[int(v) for v in gv.z], criterion=crit,
            seconds=time.perf_counter() - start,
        )

    @app.post("/convergence", response_model=schemas.ConvergenceOut)
    def convergence(body: schemas.ConvergenceIn):
        cfg = experiments.ExperimentConfig(
            params=body.to_params(),
            weight_variant=body.weights,
            n_list=body.n,
            mesh_exponent=body.mesh_exponent,
            L=body.L,
            eval_source=body.eval_source,
            sobol_path=body.sobol_path,
            seed=body.seed,
            vector_cache=body.vector_cache,
            cbc_lambda_power=body.lambda_power,
            cbc_order_factor=body.order_factor,
        )
        records = experiments.run_convergence(cfg)
        rate = None
        try:
            fitted = experiments.fit_rate(records)
            rate = schemas.RateOut(slope=fitted.slope, theoretical=fitted.theoretical)
        except ValueError:
            pass  # fewer than 3 usable rows
        return schemas.ConvergenceOut(
            records=[_record_out(r) for r in records],
            csv=experiments.render_csv(records),
            rate=rate,
        )

    @app.post("/checks/transform", response_model=schemas.TransformCheckOut)
    def check_transform(body: schemas.TransformCheckIn):
        return checks.transform_check(body.samples, body.seed)

    @app.post("/checks/fem", response_model=schemas.FemCheckOut)
    def check_fem(body: schemas.FemCheckIn):
        return checks.fem_check(tuple(body.mesh_exponents))

    @app.post("/checks/kernel", response_model=schemas.KernelCheckOut)
    def check_kernel(body: schemas.KernelCheckIn):
        return checks.kernel_check(body.seed)

    @app.post("/surrogates", response_model=schemas.SurrogateOut)
    def surrogate_fit(body: schemas.SurrogateFitIn):
        params = body.to_params()
        derived = derive_params(params)
        scheme = experiments.make_scheme(body.weights, derived)
        cfg = experiments.ExperimentConfig(
            params=params, weight_variant=body.weights, n_list=[body.n],
            mesh_exponent=body.mesh_exponent, L=1,
            vector_cache=body.vector_cache,
        )
        start = time.perf_counter()
        gv = experiments.obtain_vector(cfg, derived, scheme, body.n)
        fp = pde.FemProblem(body.mesh_exponent)
        fs = pde.FieldSpec(params, derived)
        table = fp.psi_table(fs)
        node_values = fp.solve_batch(
            table, np.sin(2.0 * np.pi * lattice.nodes(gv))
        )
        spec = interp.KernelSpec(alpha=derived.alpha, scheme=scheme, s=params.s)
        surrogate = experiments.NodalSurrogate.fit(spec, gv, node_values)
        meta = schemas.SurrogateOut(
            id=uuid.uuid4().hex[:12], n=body.n, s=params.s,
            weights=body.weights, mesh_exponent=body.mesh_exponent,
            n_interior=fp.n_interior, seconds=time.perf_counter() - start,
        )
        store.add(StoredSurrogate(surrogate=surrogate, problem=fp,
                                  field=fs, meta=meta))
        return meta

    @app.get("/surrogates", response_model=list[schemas.SurrogateOut])
    def surrogate_list():
        return store.list()

    @app.post("/surrogates/{key}/evaluate", response_model=schemas.SurrogateEvalOut)
    def surrogate_evaluate(key: str, body: schemas.SurrogateEvalIn):
        item = store.get(key)
        points = np.asarray(body.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != item.meta.s:
            raise HTTPException(
                status_code=422,
                detail=f"points must be rows of dimension {item.meta.s}",
            )
        values = item.surrogate.eval_at(points)
        return schemas.SurrogateEvalOut(
            integrals=[item.problem.integral(v) for v in values],
            l2_norms=[item.problem.l2_norm(v) for v in values],
            nodal=(values.tolist() if body.include_nodal else None),
        )

    @app.delete("/surrogates/{key}")
    def surrogate_delete(key: str):
        store.remove(key)
        return {"deleted": key}

    return app


app = create_app()

"""Stateless compute service exposing the toolkit over HTTP.

Each endpoint is a pure function of its request body; artifacts (CSV
fields, sweep outputs) are returned inline so clients decide where to
write them. Domain errors map to 422 with the error class name; input
errors map to 400.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..cell2d import solve_cell
from ..curves import geodesic_distance
from ..errors import DgmmError, InputError
from ..io import curve_to_csv, profile_to_csv, rows_to_csv
from ..potentials import (
    SamplingSpec,
    from_config,
    inverse_quadratic_constant,
    estimate_perturbation_sigma,
    verify_growth,
)
from ..profile1d import equipartition_report, solve_profile_1d
from ..verify import certify_perturbation_class, run_sweep, verify_hypothesis
from . import schemas as S


def create_app() -> FastAPI:
    app = FastAPI(title="dgmm", version=__version__)

    @app.exception_handler(DgmmError)
    async def _domain_error(request: Request, exc: DgmmError):
        status = 400 if isinstance(exc, InputError) else 422
        return JSONResponse(status_code=status, content={
            "error": type(exc).__name__, "message": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/potential/check",
              response_model=S.PotentialCheckResponse)
    def potential_check(req: S.PotentialCheckRequest):
        W = from_config(req.potential.to_config())
        spec = SamplingSpec(seed=req.seed)
        return S.PotentialCheckResponse(
            growth=verify_growth(W, spec),
            inverse_quadratic=inverse_quadratic_constant(W, req.alpha, spec),
            perturbation=estimate_perturbation_sigma(W, spec),
        )

    @app.post("/geodesic", response_model=S.GeodesicResponse)
    def geodesic(req: S.GeodesicRequest):
        W = from_config(req.potential.to_config())
        res = geodesic_distance(W, W.wells.A, W.wells.B,
                                n_points=req.n_points, refine=req.refine)
        return S.GeodesicResponse(
            distance=res.distance, diagnostics=_plain(res.diagnostics),
            curve_csv=curve_to_csv(res.curve) if req.include_curve else None)

    @app.post("/profile1d", response_model=S.Profile1DResponse)
    def profile1d(req: S.Profile1DRequest):
        W = from_config(req.potential.to_config())
        p = solve_profile_1d(W, half_len=req.half_len, n_points=req.n_points)
        eq = equipartition_report(p, W)
        return S.Profile1DResponse(
            K=p.energy, potential_part=p.potential_part,
            derivative_part=p.derivative_part,
            equipartition_ratio=eq["ratio"], n_iter=p.n_iter,
            profile_csv=(profile_to_csv(p.s, p.g)
                         if req.include_profile else None))

    @app.post("/cell2d", response_model=S.Cell2DResponse)
    def cell2d(req: S.Cell2DRequest):
        W = from_config(req.potential.to_config())
        cell = solve_cell(W, grid=req.grid)
        field_csv = None
        if req.include_field:
            f = cell.field
            rows = [(f.x1[i], f.x2[j], f.values[i, j, 0], f.values[i, j, 1])
                    for i in range(f.x1.size) for j in range(f.x2.size)]
            field_csv = rows_to_csv(("x1", "x2", "u1", "u2"), rows)
        return S.Cell2DResponse(energy=cell.energy, scale_L=cell.scale_L,
                                e_w=cell.e_w, e_h=cell.e_h,
                                n_iter=cell.n_iter, field_csv=field_csv)

    @app.post("/glue", response_model=S.GlueResponse)
    def glue(req: S.GlueRequest):
        report = _run_glue(req)
        return S.GlueResponse(construction=req.construction,
                              report=_plain(report))

    @app.post("/verify", response_model=S.VerifyResponse)
    def verify(req: S.VerifyRequest):
        W = from_config(req.potential.to_config())
        rep = verify_hypothesis(W, grid=req.grid, n_geo=req.n_geo,
                                label=req.potential.kind,
                                skip_cell=req.skip_cell)
        return S.VerifyResponse(report=_plain(rep.as_dict()),
                                verdict=rep.verdict)

    @app.post("/sweep", response_model=S.SweepResponse)
    def sweep(req: S.SweepRequest):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = run_sweep(req.config, tmp, seed=req.seed)
            files = {}
            for p in sorted(Path(tmp).iterdir()):
                files[p.name] = p.read_text()
        return S.SweepResponse(manifest=_plain(manifest), files=files)

    return app


def _plain(obj):
    """Recursively convert numpy scalars/arrays into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if hasattr(obj, "as_dict"):
        return _plain(obj.as_dict())
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def _run_glue(req: "S.GlueRequest") -> dict:
    from ..cell2d import (
        cell_from_field,
        default_cell_grid,
        embedded_profile_init,
        energy_E_eps,
        rescale_to_strip,
    )
    from ..glue import (
        build_combined_interpolant,
        build_same_midpoint_interpolant,
        build_translation_interpolant,
        construct_periodic_recovery,
    )
    from ..verify import make_admissible_trace

    W = from_config(req.potential.to_config())
    p = dict(req.params)
    eps = p.get("eps", 0.05)
    x2 = np.linspace(-0.5, 0.5, int(p.get("n2", 513)))

    if req.construction == "translate":
        tr = make_admissible_trace(W, x2, p.get("width", 0.05),
                                   shift=p.get("shift", 0.0))
        f = build_translation_interpolant(tr, p.get("beta", 0.05),
                                          p.get("halfwidth", 0.25), eps)
        base = build_translation_interpolant(tr, 0.0, p.get("halfwidth", 0.25),
                                             eps)
        E = energy_E_eps(f, W, eps).total
        E0 = energy_E_eps(base, W, eps).total
        return {"energy": E, "baseline": E0, "excess": E - E0}

    if req.construction == "midpoint":
        shift = p.get("shift", 0.0)
        phi = make_admissible_trace(W, x2, p.get("width_phi", 0.04),
                                    shift=shift)
        psi = make_admissible_trace(W, x2, p.get("width_psi", 0.07),
                                    shift=shift)
        f = build_same_midpoint_interpolant(
            phi, psi, p.get("halfwidth", 0.25), eps, p.get("h", 0.45),
            p.get("K", 5.0), W)
        return {"energy": energy_E_eps(f, W, eps).total}

    if req.construction == "combined":
        phi = make_admissible_trace(W, x2, p.get("width_phi", 0.04),
                                    shift=p.get("shift_phi", 0.0))
        psi = make_admissible_trace(W, x2, p.get("width_psi", 0.05),
                                    shift=p.get("shift_psi", 0.01))
        f = build_combined_interpolant(
            phi, psi, p.get("halfwidth", 0.25), eps, p.get("h", 0.45),
            p.get("h_tilde", 1.0), p.get("K", 5.0), W)
        return {"energy": energy_E_eps(f, W, eps).total}

    # recovery
    n = int(p.get("grid", 64))
    if p.get("use_solver", False):
        cell = solve_cell(W, grid=n)
    else:
        x1g, x2g = default_cell_grid(n)
        u0 = embedded_profile_init(W, x1g, x2g,
                                   half_len=p.get("half_len", 2.0))
        cell = cell_from_field(u0, W)
    eps_r = p.get("eps", 0.25 / cell.scale_L)
    z0 = rescale_to_strip(cell, eps_r,
                          n_grid=tuple(p.get("n_grid", (128, 256))))
    h = eps_r * cell.scale_L / 2.0
    _, rep = construct_periodic_recovery(
        z0, W, eps_r, delta=p.get("delta", 0.125), tau=p.get("tau", 1.5),
        h=h, K_ref=cell.energy)
    return rep

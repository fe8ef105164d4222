"""The 2D periodic cell problem and the rescaling construction.

The cell functional is L * int W(grad u) + (1/L) * int |hess u|^2 over the
unit cube Q, with grad u 1-periodic in x1 and pinned to the two-well affine
data on the strips |x2| in (1/4, 1/2). Since the pinned strips carry no x1
dependence, u itself is stored 1-periodic in x1 with no loss of generality,
and plain wrap-around differences apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from types import SimpleNamespace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import minimize

from .discretize import d1_matrix, d2_matrix, identity, trapezoid_weights
from .errors import (
    BoundaryViolation,
    DegenerateField,
    InputError,
    LayerTooWide,
    NoConvergence,
)
from .potentials import Potential, outer_e2
from .profile1d import solve_profile_1d

Array = np.ndarray


@dataclass
class Field2D:
    """Grid-sampled map u: rectangle -> R^2, optionally 1-periodic in x1.

    For periodic fields ``x1`` holds n1 nodes covering one period without
    the duplicate right edge; for non-periodic fields both edges are nodes.
    """

    x1: Array
    x2: Array
    values: Array  # (n1, n2, 2)
    periodic_x1: bool = False

    def __post_init__(self):
        self.x1 = np.asarray(self.x1, dtype=float)
        self.x2 = np.asarray(self.x2, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.x1.size, self.x2.size, 2):
            raise InputError("values must have shape (n1, n2, 2)")

    @property
    def h1(self) -> float:
        return float(self.x1[1] - self.x1[0])

    @property
    def h2(self) -> float:
        return float(self.x2[1] - self.x2[0])

    def gradient(self) -> Array:
        """grad u as (n1, n2, 2, 2): entry [k, l] is d_l u_k."""
        ops = _operators(self.x1.size, self.x2.size, self.h1, self.h2,
                         self.periodic_x1)
        n = self.x1.size * self.x2.size
        flat = self.values.reshape(n, 2)
        G = np.empty((n, 2, 2))
        for k in range(2):
            G[:, k, 0] = ops.D1 @ flat[:, k]
            G[:, k, 1] = ops.D2 @ flat[:, k]
        return G.reshape(self.x1.size, self.x2.size, 2, 2)

    def hessian(self) -> tuple[Array, Array, Array]:
        """(d11 u, d12 u, d22 u), each (n1, n2, 2)."""
        ops = _operators(self.x1.size, self.x2.size, self.h1, self.h2,
                         self.periodic_x1)
        n = self.x1.size * self.x2.size
        flat = self.values.reshape(n, 2)
        shp = (self.x1.size, self.x2.size, 2)
        return ((ops.D11 @ flat).reshape(shp), (ops.D12 @ flat).reshape(shp),
                (ops.D22 @ flat).reshape(shp))


@lru_cache(maxsize=16)
def _operators(n1: int, n2: int, h1: float, h2: float, periodic: bool):
    Dx1 = d1_matrix(n1, h1, periodic)
    Dx2 = d2_matrix(n1, h1, periodic)
    Dy1 = d1_matrix(n2, h2, False)
    Dy2 = d2_matrix(n2, h2, False)
    I1, I2 = identity(n1), identity(n2)
    return SimpleNamespace(
        D1=sp.kron(Dx1, I2, format="csr"),
        D2=sp.kron(I1, Dy1, format="csr"),
        D11=sp.kron(Dx2, I2, format="csr"),
        D12=sp.kron(Dx1, Dy1, format="csr"),
        D22=sp.kron(I1, Dy2, format="csr"),
    )


def quadrature_weights(u: Field2D, x1_range=None, x2_range=None) -> Array:
    """Tensor trapezoid node weights, optionally restricted to a rectangle
    aligned with the grid (nearest-node boundaries)."""
    w1 = trapezoid_weights(u.x1.size, u.h1, u.periodic_x1).copy()
    w2 = trapezoid_weights(u.x2.size, u.h2, False).copy()
    if x1_range is not None:
        inside = (u.x1 >= x1_range[0] - 1e-12) & (u.x1 <= x1_range[1] + 1e-12)
        w1 = _restrict_weights(w1, inside, u.h1, u.periodic_x1)
    if x2_range is not None:
        inside = (u.x2 >= x2_range[0] - 1e-12) & (u.x2 <= x2_range[1] + 1e-12)
        w2 = _restrict_weights(w2, inside, u.h2, False)
    return np.outer(w1, w2)


def _restrict_weights(w: Array, inside: Array, h: float, periodic: bool) -> Array:
    if inside.all():
        return w
    # a proper sub-band is a closed interval: trapezoid half-weights at its
    # edge nodes regardless of the axis being periodic
    out = np.zeros_like(w)
    out[inside] = h
    idx = np.flatnonzero(inside)
    if idx.size:
        out[idx[0]] = 0.5 * h
        out[idx[-1]] = 0.5 * h
    return out


@dataclass
class EnergyReport:
    eps: float
    potential_term: float
    hessian_term: float
    total: float
    regions: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "potential_term": self.potential_term,
            "hessian_term": self.hessian_term,
            "total": self.total,
            "regions": self.regions,
        }


def _energy_densities(u: Field2D, W: Potential) -> tuple[Array, Array]:
    """Pointwise W(grad u) and |hess u|^2 on the grid."""
    G = u.gradient()
    H11, H12, H22 = u.hessian()
    wdens = np.maximum(W(G), 0.0)
    hdens = np.sum(H11**2 + 2.0 * H12**2 + H22**2, axis=-1)
    return wdens, hdens


def energy_E_eps(u: Field2D, W: Potential, eps: float, region=None,
                 regions: Optional[dict] = None) -> EnergyReport:
    """Trapezoid quadrature of (1/eps) W(grad u) + eps |hess u|^2.

    ``region`` is an optional ((x1_lo, x1_hi), (x2_lo, x2_hi)) rectangle;
    ``regions`` maps names to such rectangles for a per-region breakdown.
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    wdens, hdens = _energy_densities(u, W)

    def integrate(rect):
        x1r, x2r = rect if rect is not None else (None, None)
        w = quadrature_weights(u, x1r, x2r)
        return float(np.sum(w * wdens) / eps), float(eps * np.sum(w * hdens))

    pot, hes = integrate(region)
    breakdown = {}
    for name, rect in (regions or {}).items():
        p, h = integrate(rect)
        breakdown[name] = {"potential_term": p, "hessian_term": h,
                           "total": p + h}
    return EnergyReport(eps=eps, potential_term=pot, hessian_term=hes,
                        total=pot + hes, regions=breakdown)


def field_energy_split(u: Field2D, W: Potential) -> tuple[float, float]:
    """(E_W, E_H) = (int W(grad u), int |hess u|^2) over the whole grid."""
    wdens, hdens = _energy_densities(u, W)
    w = quadrature_weights(u)
    return float(np.sum(w * wdens)), float(np.sum(w * hdens))


# ---------------------------------------------------------------------------
# the cell problem


@dataclass
class CellSolution:
    field: Field2D
    scale_L: float
    energy: float
    e_w: float
    e_h: float
    W: Potential
    lower_const: Array = None
    n_iter: int = 0

    def breakdown(self) -> dict:
        return {"E_W": self.e_w, "E_H": self.e_h, "scale_L": self.scale_L,
                "energy": self.energy}


def strip_violation(u: Field2D, wells, margin_cells: int = 3) -> float:
    """Max deviation of grad u from the affine well data on the pinned
    strips, skipping ``margin_cells`` rows next to |x2| = 1/4 so the check
    does not see stencil bleed from the free region."""
    G = u.gradient()
    A = outer_e2(wells.a)
    h2 = u.h2
    up = u.x2 >= 0.25 + margin_cells * h2
    lo = u.x2 <= -0.25 - margin_cells * h2
    dev = 0.0
    if up.any():
        dev = max(dev, float(np.max(np.abs(G[:, up] - A))))
    if lo.any():
        dev = max(dev, float(np.max(np.abs(G[:, lo] + A))))
    return dev


def cell_energy(u: Field2D, scale_L: float, W: Potential,
                strip_tol: float = 1e-6) -> float:
    """scale_L * E_W + E_H / scale_L with the strip condition enforced."""
    if scale_L <= 0:
        raise InputError("scale_L must be positive")
    if not u.periodic_x1:
        raise BoundaryViolation("cell fields must be periodic in x1")
    dev = strip_violation(u, W.wells)
    if dev > strip_tol:
        raise BoundaryViolation(f"strip gradient deviates by {dev:.3g}")
    e_w, e_h = field_energy_split(u, W)
    return float(scale_L * e_w + e_h / scale_L)


def optimal_scale(u: Field2D, W: Potential) -> tuple[float, float]:
    """Closed-form optimum of L |-> L E_W + E_H / L."""
    e_w, e_h = field_energy_split(u, W)
    if e_w <= 1e-14:
        raise DegenerateField("potential term vanishes; no interface present")
    L = float(np.sqrt(e_h / e_w))
    return L, float(2.0 * np.sqrt(e_w * e_h))


def cell_from_field(u: Field2D, W: Potential, scale_L: float = None,
                    strip_tol: float = 1e-6) -> CellSolution:
    """Wrap an admissible field as a CellSolution without optimizing it,
    at its own optimal scale unless ``scale_L`` is given."""
    e_w, e_h = field_energy_split(u, W)
    if scale_L is None:
        scale_L, _ = optimal_scale(u, W)
    energy = cell_energy(u, scale_L, W, strip_tol=strip_tol)
    lower = u.x2 <= -0.25 + 1e-12
    a = W.wells.a
    c = np.mean(u.values[:, lower, :] + a[None, None, :] * u.x2[lower][None, :, None],
                axis=(0, 1))
    return CellSolution(field=u, scale_L=scale_L, energy=energy, e_w=e_w,
                        e_h=e_h, W=W, lower_const=c)


def default_cell_grid(n: int = 64) -> tuple[Array, Array]:
    """Periodic x1 nodes and closed x2 nodes on Q = (-1/2, 1/2)^2."""
    x1 = -0.5 + np.arange(n) / n
    x2 = np.linspace(-0.5, 0.5, n + 1)
    return x1, x2


def embedded_profile_init(W: Potential, x1: Array, x2: Array,
                          half_len: float = 6.0, n_profile: int = 400,
                          ripple: float = 0.0, seed: int = 0) -> Field2D:
    """x1-independent initial field: the 1D transition profile compressed
    into |x2| < 1/4, affine well data outside, optional seeded x1-ripple."""
    p = solve_profile_1d(W, half_len=half_len, n_points=n_profile)
    scale = half_len / 0.25
    s = np.clip(x2 * scale, -half_len, half_len)
    phi = np.empty((x2.size, 2))
    for k in range(2):
        phi[:, k] = np.interp(s, p.s, p.g[:, k])
    # antiderivative with the upper-strip gauge V(x2) = a*x2 for x2 >= 1/4
    V = _cumtrapz(phi, x2)
    V += (W.wells.a * 0.5 - V[-1])[None, :]
    vals = np.broadcast_to(V[None, :, :], (x1.size, x2.size, 2)).copy()
    if ripple > 0.0:
        rng = np.random.default_rng(seed)
        ph = rng.uniform(0, 2 * np.pi)
        # compactly supported in |x2| < 1/4 with two vanishing derivatives
        bump = np.where(np.abs(x2) < 0.25, np.cos(2.0 * np.pi * x2) ** 3, 0.0)
        vals += ripple * np.cos(2 * np.pi * (x1[:, None] - x1[0]) + ph)[
            :, :, None] * bump[None, :, None]
    return Field2D(x1=x1, x2=x2, values=vals, periodic_x1=True)


def _cumtrapz(y: Array, x: Array) -> Array:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x)[:, None], axis=0)
    return out


def cell_objective(W: Potential, grid: int | tuple[int, int] = 64,
                   init: Optional[Field2D] = None, pin_tol: float = 1e-12):
    """Reduced objective for the cell problem: 2 sqrt(E_W * E_H) over the
    free nodes (|x2| < 1/4) plus the lower-strip constant, with analytic
    gradient. Returns (energy_grad, z0, assemble) where assemble maps a
    free vector back to (full node values, lower constant).

    The objective equals the cell energy at the per-field optimal scale, so
    no alternation over the scale is needed; its gradient is
    L* grad E_W + (1/L*) grad E_H with L* = sqrt(E_H / E_W).
    """
    if isinstance(grid, int):
        n1 = n2m1 = grid
    else:
        n1, n2m1 = grid
    if n1 < 32 or n2m1 < 32:
        raise InputError("grid resolution must be at least 32x32")
    x1 = -0.5 + np.arange(n1) / n1
    x2 = np.linspace(-0.5, 0.5, n2m1 + 1)
    n2 = x2.size
    a = W.wells.a

    if init is None:
        init = embedded_profile_init(W, x1, x2)
    elif init.values.shape != (n1, n2, 2) or not init.periodic_x1:
        raise InputError("init field does not match the requested grid")

    upper = x2 >= 0.25 - pin_tol
    lower = x2 <= -0.25 + pin_tol
    free = ~(upper | lower)
    n_free = int(free.sum())

    base = np.zeros((n1, n2, 2))
    base[:, upper, :] = (a[None, :] * x2[upper, None])[None, :, :]
    base[:, lower, :] = (-a[None, :] * x2[lower, None])[None, :, :]
    # initial lower constant from the init field
    c0 = np.mean(init.values[:, lower, :] - base[:, lower, :], axis=(0, 1))

    ops = _operators(n1, n2, float(x1[1] - x1[0]), float(x2[1] - x2[0]), True)
    wq = quadrature_weights(Field2D(x1, x2, base, True)).ravel()
    n_nodes = n1 * n2
    lower_flat = np.tile(lower, n1)

    def assemble(z):
        vals = base.copy()
        vals[:, free, :] = z[: n_free * n1 * 2].reshape(n1, n_free, 2)
        c = z[-2:]
        vals[:, lower, :] += c[None, None, :]
        return vals, c

    def energy_grad(z):
        vals, _ = assemble(z)
        flat = vals.reshape(n_nodes, 2)
        G = np.empty((n_nodes, 2, 2))
        H11 = np.empty((n_nodes, 2))
        H12 = np.empty((n_nodes, 2))
        H22 = np.empty((n_nodes, 2))
        for k in range(2):
            G[:, k, 0] = ops.D1 @ flat[:, k]
            G[:, k, 1] = ops.D2 @ flat[:, k]
            H11[:, k] = ops.D11 @ flat[:, k]
            H12[:, k] = ops.D12 @ flat[:, k]
            H22[:, k] = ops.D22 @ flat[:, k]
        e_w = float(np.sum(wq * np.maximum(W(G), 0.0)))
        e_h = float(np.sum(wq * np.sum(H11**2 + 2 * H12**2 + H22**2, axis=1)))
        if e_w <= 1e-14:
            raise DegenerateField("potential term vanished during the solve")
        L = np.sqrt(e_h / e_w)
        P = W.grad(G)
        g_nodes = np.empty((n_nodes, 2))
        for k in range(2):
            gw = ops.D1.T @ (wq * P[:, k, 0]) + ops.D2.T @ (wq * P[:, k, 1])
            gh = 2.0 * (ops.D11.T @ (wq * H11[:, k])
                        + 2.0 * ops.D12.T @ (wq * H12[:, k])
                        + ops.D22.T @ (wq * H22[:, k]))
            g_nodes[:, k] = L * gw + gh / L
        grad = np.empty_like(z)
        grad[: n_free * n1 * 2] = g_nodes.reshape(n1, n2, 2)[:, free, :].ravel()
        grad[-2:] = g_nodes[lower_flat].sum(axis=0)
        return float(2.0 * np.sqrt(e_w * e_h)), grad

    z0 = np.empty(n_free * n1 * 2 + 2)
    z0[: n_free * n1 * 2] = init.values[:, free, :].ravel()
    z0[-2:] = c0
    return energy_grad, z0, lambda z: (assemble(z), (x1, x2))


def solve_cell(W: Potential, grid: int | tuple[int, int] = 64,
               init: Optional[Field2D] = None, max_iter: int = 50_000,
               gtol: float = 1e-8, pin_tol: float = 1e-12) -> CellSolution:
    """Minimize the reduced cell objective with a quasi-Newton method from
    an embedded 1D-profile initial field (or the given one)."""
    energy_grad, z0, unpack = cell_objective(W, grid, init=init,
                                             pin_tol=pin_tol)
    res = minimize(energy_grad, z0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": gtol, "ftol": 1e-14,
                            "maxcor": 20})
    if not res.success and np.linalg.norm(res.jac, np.inf) > 1e-4:
        raise NoConvergence(f"cell solve stalled: {res.message}")
    (vals, c), (x1, x2) = unpack(res.x)
    u = Field2D(x1=x1, x2=x2, values=vals, periodic_x1=True)
    L, energy = optimal_scale(u, W)
    e_w, e_h = field_energy_split(u, W)
    return CellSolution(field=u, scale_L=L, energy=energy, e_w=e_w, e_h=e_h,
                        W=W, lower_const=c, n_iter=res.nit)


# ---------------------------------------------------------------------------
# rescaling to the eps-strip


def _periodic_spline(u: Field2D, pad: int = 4):
    """Cubic spline interpolants of the two components with wrap padding."""
    x1p = np.concatenate([u.x1[-pad:] - 1.0, u.x1, u.x1[:pad] + 1.0])
    vals = np.concatenate([u.values[-pad:], u.values, u.values[:pad]], axis=0)
    return [RectBivariateSpline(x1p, u.x2, vals[:, :, k]) for k in range(2)]


def rescale_to_strip(cell: CellSolution, eps: float,
                     n_grid: tuple[int, int] = (256, 256)) -> Field2D:
    """The rescaled map z with grad z = grad u(x / (eps L)) inside the layer
    |x2| <= eps L / 2 and the affine well data outside, on Q."""
    L = cell.scale_L
    if eps * L > 1.0:
        raise LayerTooWide(f"eps*scale_L = {eps * L:.3g} exceeds 1")
    u = cell.field
    a = cell.W.wells.a
    c = cell.lower_const if cell.lower_const is not None else np.zeros(2)
    s = eps * L
    half = s / 2.0

    n1z, n2z = n_grid
    x1 = -0.5 + np.arange(n1z) / n1z
    x2 = np.linspace(-0.5, 0.5, n2z + 1)
    splines = _periodic_spline(u)

    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    inner = np.abs(X2) <= half
    # map into u's periodic cell
    q1 = ((X1[inner] / s) + 0.5) % 1.0 - 0.5
    q2 = X2[inner] / s
    vals = np.empty((n1z, x2.size, 2))
    for k in range(2):
        comp = np.empty_like(X1)
        comp[inner] = s * splines[k](q1, q2, grid=False)
        comp[X2 > half] = a[k] * X2[X2 > half]
        low = X2 < -half
        comp[low] = -a[k] * X2[low] + s * c[k]
        vals[:, :, k] = comp
    return Field2D(x1=x1, x2=x2, values=vals, periodic_x1=True)


def riemann_lebesgue_check(cell: CellSolution, eps_seq=None,
                           n_grid: tuple[int, int] = (256, 256)) -> dict:
    """E_eps of the rescaled maps along an eps sequence, compared with the
    cell energy (averaging gap, no monotonicity claim).

    The default sequence is (1/2, 1/4, 1/8) / scale_L so the transition
    layer always fits in the cube regardless of the cell's scale.
    """
    if eps_seq is None:
        eps_seq = [f / cell.scale_L for f in (0.5, 0.25, 0.125)]
    rows = []
    for eps in eps_seq:
        z = rescale_to_strip(cell, eps, n_grid=n_grid)
        rep = energy_E_eps(z, cell.W, eps)
        gap = abs(rep.total - cell.energy) / max(cell.energy, 1e-300)
        rows.append({"eps": float(eps), "energy": rep.total,
                     "cell_energy": cell.energy, "relative_gap": gap})
    return {"entries": rows,
            "final_gap": rows[-1]["relative_gap"] if rows else None}

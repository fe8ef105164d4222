"""Curves in 2x2 matrix space: lengths, 1D energies, geodesics,
admissibility constants and phase-separating points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from .errors import (
    HypothesisViolated,
    InputError,
    MidpointMismatch,
    NoConvergence,
    NonWellTails,
    NotAdmissible,
)
from .potentials import Potential, WellPair, frobenius, sobol_ball_4d

Array = np.ndarray

_LEN_FLOOR = 1e-14
_SQRT_FLOOR = 1e-12


@dataclass
class Curve:
    """Piecewise-linear curve: strictly increasing params, 2x2 values."""

    params: Array
    values: Array

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.params.ndim != 1 or self.params.size < 2:
            raise InputError("curve needs at least 2 samples")
        if np.any(np.diff(self.params) <= 0):
            raise InputError("curve params must be strictly increasing")
        if self.values.shape != (self.params.size, 2, 2):
            raise InputError("curve values must have shape (P, 2, 2)")

    @property
    def n_points(self) -> int:
        return self.params.size

    def at(self, s: Array) -> Array:
        """Piecewise-linear interpolation, constant beyond the ends."""
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape + (2, 2))
        flat = self.values.reshape(self.n_points, 4)
        for k in range(4):
            out.reshape(s.shape + (4,))[..., k] = np.interp(
                s, self.params, flat[:, k]
            )
        return out

    def resampled(self, params: Array) -> "Curve":
        return Curve(params=np.asarray(params, dtype=float), values=self.at(params))

    def reversed(self) -> "Curve":
        return Curve(params=-self.params[::-1], values=self.values[::-1])


def constant_curve(M: Array, s_lo: float = -1.0, s_hi: float = 1.0,
                   n: int = 2) -> Curve:
    vals = np.broadcast_to(np.asarray(M, float), (n, 2, 2)).copy()
    return Curve(params=np.linspace(s_lo, s_hi, n), values=vals)


def segment_curve(M: Array, N: Array, n: int = 201,
                  s_lo: float = -1.0, s_hi: float = 1.0) -> Curve:
    t = np.linspace(0.0, 1.0, n)
    vals = (1 - t)[:, None, None] * np.asarray(M, float) + \
        t[:, None, None] * np.asarray(N, float)
    return Curve(params=np.linspace(s_lo, s_hi, n), values=vals)


def curve_length_LW(phi: Curve, W: Potential) -> float:
    """Discrete W-length: midpoint rule of 2 sqrt(W) |phi'| over segments."""
    mids = 0.5 * (phi.values[1:] + phi.values[:-1])
    seg = frobenius(phi.values[1:] - phi.values[:-1])
    return float(np.sum(2.0 * np.sqrt(np.maximum(W(mids), 0.0)) * seg))


def curve_energy_I_eps(phi: Curve, W: Potential, eps: float,
                       tail_tol: float = 1e-6) -> float:
    """1D scaled energy int (1/eps) W(phi) + eps |phi'|^2 ds.

    The curve must sit at a well near both endpoints so the truncation of
    the real-line integral is exact; otherwise :class:`NonWellTails`.
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    ends = np.stack([phi.values[0], phi.values[-1]])
    dmin = np.minimum(frobenius(ends - W.wells.A), frobenius(ends - W.wells.B))
    if np.any(dmin > tail_tol):
        raise NonWellTails(
            f"curve endpoints deviate from the wells by {dmin.max():.3g}"
        )
    ds = np.diff(phi.params)
    w = np.maximum(W(phi.values), 0.0)
    pot = np.sum(0.5 * ds * (w[1:] + w[:-1]))  # trapezoid
    seg2 = frobenius(phi.values[1:] - phi.values[:-1]) ** 2
    der = np.sum(seg2 / ds)  # exact for the piecewise-linear interpolant
    return float(pot / eps + eps * der)


# ---------------------------------------------------------------------------
# geodesic distance by discrete curve relaxation


@dataclass
class GeodesicResult:
    distance: float
    curve: Curve
    diagnostics: dict = field(default_factory=dict)


def _length_and_grad(x: Array, W: Potential):
    """Discrete L_W of the polyline x (P,2,2) and its gradient."""
    diff = x[1:] - x[:-1]
    seg = np.maximum(frobenius(diff), _LEN_FLOOR)
    mids = 0.5 * (x[1:] + x[:-1])
    w = np.maximum(W(mids), 0.0)
    sq = np.sqrt(np.maximum(w, _SQRT_FLOOR**2))
    length = float(np.sum(2.0 * np.sqrt(w) * seg))

    gW = W.grad(mids)
    unit = diff / seg[:, None, None]
    # contribution of segment i to its two endpoints
    c_mid = (seg / sq)[:, None, None] * gW  # d(2 sqrt(w) seg)/d mid
    c_dir = 2.0 * sq[:, None, None] * unit
    grad = np.zeros_like(x)
    grad[:-1] += 0.5 * c_mid - c_dir
    grad[1:] += 0.5 * c_mid + c_dir
    return length, grad


def _redistribute(x: Array) -> Array:
    """Resample the polyline at uniform Euclidean arc length."""
    seg = frobenius(x[1:] - x[:-1])
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] <= 0:
        return x
    target = np.linspace(0.0, s[-1], x.shape[0])
    out = np.empty_like(x)
    flat = x.reshape(x.shape[0], 4)
    for k in range(4):
        out.reshape(x.shape[0], 4)[:, k] = np.interp(target, s, flat[:, k])
    out[0], out[-1] = x[0], x[-1]
    return out


def _relax_curve(x0: Array, W: Potential, max_rounds: int, inner_iter: int,
                 rtol: float) -> tuple[Array, float, int]:
    x = x0.copy()
    P = x.shape[0]

    def objective(z):
        full = x.copy()
        full[1:-1] = z.reshape(P - 2, 2, 2)
        val, grad = _length_and_grad(full, W)
        return val, grad[1:-1].ravel()

    prev = _length_and_grad(x, W)[0]
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        res = minimize(objective, x[1:-1].ravel(), jac=True, method="L-BFGS-B",
                       options={"maxiter": inner_iter})
        x[1:-1] = res.x.reshape(P - 2, 2, 2)
        x = _redistribute(x)
        cur = _length_and_grad(x, W)[0]
        if prev - cur < rtol * max(abs(prev), 1.0):
            return x, cur, rounds
        prev = cur
    return x, prev, rounds


def geodesic_distance(W: Potential, M: Array, N: Array,
                      n_points: int = 201, max_rounds: int = 40,
                      inner_iter: int = 60, rtol: float = 1e-9,
                      refine: bool = False, init: Optional[Curve] = None,
                      fail_rtol: float = 1e-4) -> GeodesicResult:
    """Upper bound on the geodesic distance d_W(M, N) by curve relaxation.

    The returned value converges to d_W from above under refinement of
    ``n_points``; with ``refine=True`` a second solve at 2P-1 points is run
    and the diagnostics carry the refinement gap as an uncertainty.
    """
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    if np.allclose(M, N):
        return GeodesicResult(0.0, constant_curve(M), {"refinement_gap": 0.0})

    if init is None:
        x0 = segment_curve(M, N, n=n_points).values
    else:
        x0 = init.resampled(np.linspace(init.params[0], init.params[-1],
                                        n_points)).values
    x, length, rounds = _relax_curve(x0, W, max_rounds, inner_iter, rtol)
    if rounds >= max_rounds:
        # final stall check: one more round must not improve materially
        x2, l2, _ = _relax_curve(x, W, 1, inner_iter, rtol)
        if length - l2 > fail_rtol * max(abs(length), 1.0):
            raise NoConvergence("geodesic relaxation still decreasing at "
                                f"max_rounds={max_rounds}")
        x, length = x2, l2

    curve = Curve(params=np.linspace(-1.0, 1.0, x.shape[0]), values=x)
    diag = {"rounds": rounds, "n_points": n_points}
    if refine:
        fine0 = curve.resampled(np.linspace(-1.0, 1.0, 2 * n_points - 1)).values
        xf, lf, _ = _relax_curve(fine0, W, max_rounds, inner_iter, rtol)
        diag["distance_coarse"] = length
        diag["distance_fine"] = lf
        diag["refinement_gap"] = abs(length - lf)
        curve = Curve(params=np.linspace(-1.0, 1.0, xf.shape[0]), values=xf)
        length = lf
    return GeodesicResult(distance=float(length), curve=curve, diagnostics=diag)


def lipschitz_constant_estimate(W: Potential, R: float, n_samples: int = 20_000,
                                seed: int = 0) -> float:
    """Upper envelope 2 sup_{B_R(0)} sqrt(W) for the local Lipschitz
    constant of d_W, sampled quasi-randomly in the Frobenius ball."""
    if R <= 0:
        raise InputError("R must be positive")
    M = R * sobol_ball_4d(n_samples, seed).reshape(-1, 2, 2)
    return float(2.0 * np.sqrt(np.maximum(W(M), 0.0).max()))


def admissibility_gamma(M: Array, N: Array, W: Potential, phi: Curve,
                        d: Optional[float] = None,
                        lip: Optional[float] = None) -> float:
    """The admissibility threshold gamma(M, N, W, phi)."""
    M = np.asarray(M, float)
    N = np.asarray(N, float)
    if d is None:
        d = geodesic_distance(W, M, N).distance
    length = curve_length_LW(phi, W)
    if length >= 3.0 * d:
        raise HypothesisViolated(f"L_W(phi)={length:.6g} >= 3 d_W={3 * d:.6g}")
    if lip is None:
        R = 2.0 * max(frobenius(M), frobenius(N))
        lip = lipschitz_constant_estimate(W, R)
    return float(min(frobenius(M - N) / 2.0, (3.0 * d - length) / (8.0 * lip)))


def alpha_K(wells: WellPair, W: Potential, K: float,
            d: Optional[float] = None, lip: Optional[float] = None) -> float:
    """alpha_K = min((3 d_W(A,B) - K) / (12 L), |A - B| / 8)."""
    if d is None:
        d = geodesic_distance(W, wells.A, wells.B).distance
    if K >= 3.0 * d:
        raise HypothesisViolated(f"K={K:.6g} >= 3 d_W(A,B)={3 * d:.6g}")
    if lip is None:
        R = 2.0 * max(frobenius(wells.A), frobenius(wells.B))
        lip = lipschitz_constant_estimate(W, R)
    return float(min((3.0 * d - K) / (12.0 * lip), wells.separation / 8.0))


def _ball_intervals(phi: Curve, center: Array, alpha: float):
    """Parameter intervals where the PL interpolant lies in B_alpha(center),
    with exact segment/sphere intersection roots."""
    c = np.asarray(center, float)
    P = phi.n_points
    intervals = []
    for i in range(P - 1):
        p = phi.values[i] - c
        v = phi.values[i + 1] - phi.values[i]
        a = float(np.sum(v * v))
        b = 2.0 * float(np.sum(p * v))
        c0 = float(np.sum(p * p)) - alpha**2
        if a <= _LEN_FLOOR**2:
            if c0 < 0:
                intervals.append((phi.params[i], phi.params[i + 1]))
            continue
        disc = b * b - 4 * a * c0
        if disc <= 0:
            continue
        r = np.sqrt(disc)
        t0, t1 = (-b - r) / (2 * a), (-b + r) / (2 * a)
        lo, hi = max(t0, 0.0), min(t1, 1.0)
        if lo < hi:
            s0 = phi.params[i] + lo * (phi.params[i + 1] - phi.params[i])
            s1 = phi.params[i] + hi * (phi.params[i + 1] - phi.params[i])
            intervals.append((s0, s1))
    return intervals


def phase_separating_point(phi: Curve, alpha: float, M: Array, N: Array) -> float:
    """Midpoint of (sup preimage of B_alpha(M), inf preimage of B_alpha(N)).

    Preimages are taken on the piecewise-linear interpolant with exact
    segment/ball intersections. Raises :class:`NotAdmissible` if the order
    property sup < inf fails.
    """
    iM = _ball_intervals(phi, M, alpha)
    iN = _ball_intervals(phi, N, alpha)
    if not iM or not iN:
        raise NotAdmissible("curve never enters one of the alpha-balls")
    sup_M = max(s1 for _, s1 in iM)
    inf_N = min(s0 for s0, _ in iN)
    if not sup_M < inf_N:
        raise NotAdmissible(
            f"sup preimage {sup_M:.6g} not below inf preimage {inf_N:.6g}"
        )
    return float(0.5 * (sup_M + inf_N))


def difference_bound_check(phi: Curve, psi: Curve, alpha: float, W: Potential,
                           M: Array, N: Array, s_tol: float = 1e-8,
                           slack: float = 1e-12) -> dict:
    """Empirical constant of |phi - psi|^2 <= C_alpha (W(phi) + W(psi)) for
    admissible pairs with matching phase-separating points."""
    s_phi = phase_separating_point(phi, alpha, M, N)
    s_psi = phase_separating_point(psi, alpha, M, N)
    if abs(s_phi - s_psi) > s_tol:
        raise MidpointMismatch(
            f"s_phi={s_phi:.6g} and s_psi={s_psi:.6g} differ beyond {s_tol:g}"
        )
    s = np.union1d(phi.params, psi.params)
    a = phi.at(s)
    b = psi.at(s)
    num = frobenius(a - b) ** 2
    den = np.maximum(W(a), 0.0) + np.maximum(W(b), 0.0)
    valid = ~((den < slack) & (num < slack))
    ratio = np.where(den[valid] > slack, num[valid] / np.maximum(den[valid], slack),
                     0.0)
    c_emp = float(np.max(ratio)) if ratio.size else 0.0
    return {
        "alpha": alpha,
        "s_sep": s_phi,
        "C_alpha_empirical": c_emp,
        "n_samples": int(valid.sum()),
    }


# ---------------------------------------------------------------------------
# traces and the midpoint-distance bound


@dataclass
class TraceProfile:
    """Restriction of a planar field to a vertical line: values u(x2),
    first-variable derivative d1u and vertical derivative d2u."""

    x2: Array
    u: Array
    d1u: Array
    d2u: Array

    def __post_init__(self):
        self.x2 = np.asarray(self.x2, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.d1u = np.asarray(self.d1u, dtype=float)
        self.d2u = np.asarray(self.d2u, dtype=float)
        n = self.x2.size
        for arr, name in ((self.u, "u"), (self.d1u, "d1u"), (self.d2u, "d2u")):
            if arr.shape != (n, 2):
                raise InputError(f"trace field {name} must have shape ({n}, 2)")

    def zeta(self) -> Curve:
        """The gradient trace (d1u, d2u) assembled as a matrix-valued curve."""
        vals = np.stack([self.d1u, self.d2u], axis=-1)
        return Curve(params=self.x2, values=vals)

    def derivative_consistency(self) -> float:
        """Max deviation of d2u from the discrete derivative of u."""
        du = np.gradient(self.u, self.x2, axis=0)
        return float(np.max(np.abs(du - self.d2u)))


def midpoint_bound_check(zeta_phi: TraceProfile, zeta_psi: TraceProfile,
                         h: float, eps: float, K: float, W: Potential,
                         alpha: Optional[float] = None) -> dict:
    """Distance of the phase-separating points of two gradient traces and
    its normalisation by sqrt(h) sqrt(eps) sqrt(1 + I_eps + I_eps)."""
    cp = zeta_phi.zeta()
    cq = zeta_psi.zeta()
    i_phi = curve_energy_I_eps(cp, W, eps)
    i_psi = curve_energy_I_eps(cq, W, eps)
    if i_phi >= K or i_psi >= K:
        raise HypothesisViolated(
            f"trace energies ({i_phi:.4g}, {i_psi:.4g}) not below K={K:.4g}"
        )
    if alpha is None:
        alpha = alpha_K(W.wells, W, K)
    B, A = W.wells.B, W.wells.A
    s_phi = phase_separating_point(cp, alpha, B, A)
    s_psi = phase_separating_point(cq, alpha, B, A)
    dist = abs(s_phi - s_psi)
    norm = np.sqrt(h) * np.sqrt(eps) * np.sqrt(1.0 + i_phi + i_psi)
    return {
        "distance": dist,
        "ratio": dist / norm,
        "s_phi": s_phi,
        "s_psi": s_psi,
        "I_eps_phi": i_phi,
        "I_eps_psi": i_psi,
        "alpha": alpha,
    }

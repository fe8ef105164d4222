"""Double-well potentials on 2x2 matrices and their growth constants.

Matrices are plain numpy arrays of shape ``(..., 2, 2)``; the two columns
``m1 = M[..., :, 0]`` and ``m2 = M[..., :, 1]`` play distinct roles: the
reference potential is

    W0(M) = |m1|^2 + min(|m2 - a|^2, |m2 + a|^2)
          = min(|M - A|^2, |M - B|^2),

with wells A = a (x) e2 and B = -A.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .errors import InputError, NotDoubleWell

Array = np.ndarray


def frobenius(M: Array) -> Array:
    """Frobenius norm over the trailing 2x2 axes."""
    return np.sqrt(np.sum(M * M, axis=(-2, -1)))


def outer_e2(a: Array) -> Array:
    """The matrix a (x) e2, i.e. first column zero, second column a."""
    A = np.zeros((2, 2))
    A[:, 1] = a
    return A


@dataclass(frozen=True)
class WellPair:
    """The two wells A = a (x) e2 and B = -A."""

    a: Array
    A: Array = field(init=False)
    B: Array = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (2,) or np.linalg.norm(a) == 0.0:
            raise InputError("well vector a must be a nonzero 2-vector")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", outer_e2(a))
        object.__setattr__(self, "B", -outer_e2(a))

    @property
    def separation(self) -> float:
        """|A - B| = 2|a|."""
        return 2.0 * float(np.linalg.norm(self.a))


def eval_W0(M: Array, wells: WellPair) -> Array:
    """Reference quadratic potential W0(M) = |m1|^2 + min|m2 -+ a|^2."""
    M = np.asarray(M, dtype=float)
    m1 = M[..., :, 0]
    m2 = M[..., :, 1]
    d_minus = np.sum((m2 - wells.a) ** 2, axis=-1)
    d_plus = np.sum((m2 + wells.a) ** 2, axis=-1)
    return np.sum(m1 * m1, axis=-1) + np.minimum(d_minus, d_plus)


def grad_W0(M: Array, wells: WellPair, softness: float = 0.0) -> Array:
    """Gradient of W0.

    W0 is non-differentiable on the tie set {m2 . a = 0}; ties are broken
    toward the A-branch. ``softness > 0`` switches to a smooth-min blend of
    the two branches for robustness studies.
    """
    M = np.asarray(M, dtype=float)
    g = np.zeros(np.broadcast_shapes(M.shape, (2, 2)), dtype=float)
    m1 = M[..., :, 0]
    m2 = M[..., :, 1]
    g[..., :, 0] = 2.0 * m1
    d_minus = np.sum((m2 - wells.a) ** 2, axis=-1)
    d_plus = np.sum((m2 + wells.a) ** 2, axis=-1)
    if softness > 0.0:
        # smooth-min weights: w in [0,1], w=1 on the A-branch
        w = 1.0 / (1.0 + np.exp((d_minus - d_plus) / softness))
        g[..., :, 1] = 2.0 * (
            w[..., None] * (m2 - wells.a) + (1.0 - w[..., None]) * (m2 + wells.a)
        )
    else:
        take_minus = d_minus <= d_plus
        g[..., :, 1] = np.where(
            take_minus[..., None], 2.0 * (m2 - wells.a), 2.0 * (m2 + wells.a)
        )
    return g


@dataclass
class Potential:
    """A double-well potential W with its well data and growth metadata.

    ``fn`` evaluates W on arrays of shape (..., 2, 2) and returns (...,).
    ``grad`` is optional; when absent gradients fall back to central finite
    differences on the four matrix entries.
    """

    wells: WellPair
    fn: Callable[[Array], Array]
    kind: str = "custom"
    growth_c: Optional[float] = None
    grad_fn: Optional[Callable[[Array], Array]] = None
    fd_step: float = 1e-6

    def __call__(self, M: Array) -> Array:
        return self.fn(np.asarray(M, dtype=float))

    def grad(self, M: Array) -> Array:
        if self.grad_fn is not None:
            return self.grad_fn(np.asarray(M, dtype=float))
        return self._fd_grad(np.asarray(M, dtype=float))

    def _fd_grad(self, M: Array) -> Array:
        h = self.fd_step
        g = np.zeros(np.broadcast_shapes(M.shape, (2, 2)), dtype=float)
        for i in range(2):
            for j in range(2):
                Mp = M.copy()
                Mm = M.copy()
                Mp[..., i, j] += h
                Mm[..., i, j] -= h
                g[..., i, j] = (self.fn(Mp) - self.fn(Mm)) / (2.0 * h)
        return g

    def restricted_1d(self) -> "Potential":
        """The potential W~(m2) = W((0, m2)) on the subspace {m1 = 0}."""

        def fn(M: Array) -> Array:
            M = np.array(M, dtype=float, copy=True)
            M[..., :, 0] = 0.0
            return self.fn(M)

        grad_fn = None
        if self.grad_fn is not None:
            base = self.grad_fn

            def grad_fn(M: Array) -> Array:
                M = np.array(M, dtype=float, copy=True)
                M[..., :, 0] = 0.0
                g = base(M)
                g[..., :, 0] = 0.0
                return g

        return Potential(
            wells=self.wells,
            fn=fn,
            kind=self.kind + "|restricted",
            growth_c=self.growth_c,
            grad_fn=grad_fn,
        )


def make_w0(a=(0.0, 1.0), softness: float = 0.0) -> Potential:
    wells = WellPair(np.asarray(a, dtype=float))
    return Potential(
        wells=wells,
        fn=lambda M: eval_W0(M, wells),
        kind="w0",
        growth_c=1.0,
        grad_fn=lambda M: grad_W0(M, wells, softness=softness),
    )


def make_scaled(factor: float, a=(0.0, 1.0)) -> Potential:
    """c * W0 for a constant c > 0."""
    if factor <= 0:
        raise InputError("scale factor must be positive")
    wells = WellPair(np.asarray(a, dtype=float))
    return Potential(
        wells=wells,
        fn=lambda M: factor * eval_W0(M, wells),
        kind=f"scaled:{factor:g}",
        growth_c=max(factor, 1.0 / factor),
        grad_fn=lambda M: factor * grad_W0(M, wells),
    )


def make_ripple(sigma: float, seed: int, a=(0.0, 1.0)) -> Potential:
    """A seeded multiplicative perturbation W = (1 + p(M))^2 W0.

    p(M) = sigma * cos(<Omega, M> + phase) with a seeded random frequency
    matrix Omega, so |sqrt(W) - sqrt(W0)| = |p| sqrt(W0) <= sigma sqrt(W0)
    holds exactly and the bound is attained on generic sample sets.
    """
    if not 0.0 <= sigma < 1.0:
        raise InputError("ripple amplitude sigma must be in [0, 1)")
    wells = WellPair(np.asarray(a, dtype=float))
    rng = np.random.default_rng(seed)
    omega = rng.normal(scale=2.0, size=(2, 2))
    phase = rng.uniform(0.0, 2.0 * np.pi)

    def p(M: Array) -> Array:
        return sigma * np.cos(np.sum(omega * M, axis=(-2, -1)) + phase)

    def fn(M: Array) -> Array:
        return (1.0 + p(M)) ** 2 * eval_W0(M, wells)

    c = (1.0 + sigma) ** 2
    return Potential(
        wells=wells,
        fn=fn,
        kind=f"ripple:sigma={sigma:g},seed={seed}",
        growth_c=max(c, 1.0 / (1.0 - sigma) ** 2),
    )


_REGISTRY: dict[str, Callable[..., Potential]] = {}


def register_potential(name: str, factory: Callable[..., Potential]) -> None:
    """Register a named potential factory for CLI/config lookup."""
    _REGISTRY[name] = factory


def from_config(cfg: dict) -> Potential:
    """Build a potential from a JSON-style config dict.

    Recognised kinds: ``w0``, ``scaled`` (factor), ``ripple`` (sigma, seed),
    plus anything registered via :func:`register_potential`.
    """
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise InputError("potential config must be a dict with a 'kind' key")
    kind = cfg["kind"]
    a = tuple(cfg.get("a", (0.0, 1.0)))
    if kind == "w0":
        return make_w0(a=a, softness=float(cfg.get("softness", 0.0)))
    if kind == "scaled":
        return make_scaled(float(cfg["factor"]), a=a)
    if kind == "ripple":
        return make_ripple(float(cfg["sigma"]), int(cfg.get("seed", 0)), a=a)
    if kind in _REGISTRY:
        kwargs = {k: v for k, v in cfg.items() if k != "kind"}
        return _REGISTRY[kind](**kwargs)
    raise InputError(f"unknown potential kind {kind!r}")


@dataclass(frozen=True)
class SamplingSpec:
    """Quasi-random sampling plan in matrix space.

    ``n_ball`` Sobol points in the Frobenius ball of radius
    ``radius_factor * |a|`` plus ``n_segment`` points on the segment
    {(0, t a)} where the theory is active.
    """

    n_ball: int = 100_000
    n_segment: int = 1_000
    radius_factor: float = 4.0
    seed: int = 0

    def samples(self, wells: WellPair) -> Array:
        rad = self.radius_factor * float(np.linalg.norm(wells.a))
        pts = sobol_ball_4d(self.n_ball, self.seed)
        ball = rad * pts.reshape(-1, 2, 2)
        t = np.linspace(-2.0, 2.0, self.n_segment)
        seg = np.zeros((self.n_segment, 2, 2))
        seg[:, :, 1] = t[:, None] * wells.a[None, :]
        return np.concatenate([ball, seg], axis=0)


def sobol_ball_4d(n: int, seed: int) -> Array:
    """n quasi-random points in the closed unit ball of R^4.

    Draws the next power of two (Sobol balance) and radially projects cube
    points outside the ball onto the sphere, keeping the count fixed.
    """
    m = max(int(np.ceil(np.log2(max(n, 2)))), 1)
    sob = qmc.Sobol(d=4, scramble=True, seed=seed)
    pts = sob.random_base2(m)[:n] * 2.0 - 1.0
    norms = np.linalg.norm(pts, axis=1)
    out = norms > 1.0
    pts[out] /= norms[out, None]
    return pts


def _well_distance(M: Array, wells: WellPair) -> Array:
    dA = frobenius(M - wells.A)
    dB = frobenius(M - wells.B)
    return np.minimum(dA, dB)


def verify_growth(W: Potential, samples: SamplingSpec | Array | None = None,
                  well_tol: float = 1e-9) -> dict:
    """Estimate the two-sided quadratic growth constant C with
    W0 / C <= W <= C W0 on the sample set.

    Raises :class:`NotDoubleWell` if W vanishes off the wells on a sample.
    """
    M = _resolve_samples(W, samples)
    w0 = eval_W0(M, W.wells)
    w = W(M)
    off_wells = w0 > well_tol
    if np.any((w[off_wells] <= 0.0)):
        raise NotDoubleWell("W vanishes (or is negative) off the wells")
    if np.any(w[~off_wells] > well_tol):
        raise NotDoubleWell("W does not vanish at the wells")
    ratio = w[off_wells] / w0[off_wells]
    c = float(max(np.max(ratio), np.max(1.0 / ratio)))
    return {"C": c, "n_samples": int(M.shape[0]),
            "max_ratio": float(np.max(ratio)), "min_ratio": float(np.min(ratio))}


def inverse_quadratic_constant(W: Potential, alpha: float,
                               samples: SamplingSpec | Array | None = None) -> dict:
    """Fit the constant of max|M -+ A|^2 <= C W(M) outside B_alpha({A, B}).

    Returns the sample-wise smallest valid C together with the envelope
    C_alpha = max(2, C / alpha).
    """
    if alpha <= 0:
        raise InputError("alpha must be positive")
    M = _resolve_samples(W, samples)
    dist = _well_distance(M, W.wells)
    keep = dist > alpha
    M = M[keep]
    if M.shape[0] == 0:
        return {"alpha": alpha, "C": 0.0, "C_alpha": 2.0, "n_samples": 0}
    dA2 = frobenius(M - W.wells.A) ** 2
    dB2 = frobenius(M - W.wells.B) ** 2
    max_side = np.maximum(dA2, dB2)
    w = W(M)
    c = float(np.max(max_side / w))
    return {
        "alpha": alpha,
        "C": c,
        "C_alpha": max(2.0, c / alpha),
        "n_samples": int(M.shape[0]),
    }


def estimate_perturbation_sigma(W: Potential,
                                samples: SamplingSpec | Array | None = None,
                                well_tol: float = 1e-9) -> dict:
    """sup over samples of |sqrt(W) - sqrt(W0)| / sqrt(W0), wells excluded.

    ``passed`` requires sigma < 1/2, the gate of the perturbation-class
    certificate.
    """
    M = _resolve_samples(W, samples)
    w0 = eval_W0(M, W.wells)
    keep = w0 > well_tol
    w = np.maximum(W(M[keep]), 0.0)
    s0 = np.sqrt(w0[keep])
    sigma = float(np.max(np.abs(np.sqrt(w) - s0) / s0))
    return {"sigma": sigma, "passed": bool(sigma < 0.5), "n_samples": int(keep.sum())}


def _resolve_samples(W: Potential, samples: SamplingSpec | Array | None) -> Array:
    if samples is None:
        samples = SamplingSpec()
    if isinstance(samples, SamplingSpec):
        return samples.samples(W.wells)
    M = np.asarray(samples, dtype=float)
    if M.ndim == 2:
        M = M[None]
    return M.reshape(-1, 2, 2)

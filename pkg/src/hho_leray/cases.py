"""Manufactured test cases: exact solutions, degeneracy fields, sources.

Four families on the unit square, each exercising a different corner of
the degeneracy theory:

* ``nondeg-flux``      u = sin(pi x) sin(pi y), constant delta > 0
* ``nondeg-potential`` u = sin(pi x) sin(pi y) + (pi+1)(x+y), delta = 0,
                       so |grad u| >= 1 everywhere
* ``nondeg-couple``    u = sin(pi x) sin(pi y), delta = a sum of compactly
                       supported bumps covering the critical points of u
* ``degenerate``       u = (1/10) exp(-10(|x-1/2|^beta + |y-1/2|^beta)),
                       beta = p + (k+2)/4, delta = 0: the gradient
                       vanishes on the center lines

Every case carries analytic gradient and Hessian evaluators, the scalar
zeta0 = ess sup (delta + |grad u|) used as the stabilization field, and
(where finite) the |u|_{W^{k+2,inf}} constant entering the regime
classifier.  All cases use mu = a = 1.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .flux import FluxModel

CASE_NAMES = ("nondeg-flux", "nondeg-potential", "nondeg-couple", "degenerate")

PI = math.pi

#: bump centers and inverse-square radius of the coupled case's delta
BUMP_CENTERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0],
                         [0.5, 0.5]])
BUMP_INV_R2 = 25.0  # radius 0.2


@dataclass(frozen=True)
class CaseSpec:
    """One manufactured problem bound to a (p, k) pair."""

    name: str
    p: float
    k: int
    u: Callable
    grad_u: Callable
    hessian_u: Callable
    delta: object                      # constant or callable field
    grad_delta: Optional[Callable]     # None means identically zero
    zeta0: float
    wk2inf: Optional[float]            # |u|_{W^{k+2,inf}}; None if unbounded
    homogeneous_bc: bool
    nonsingular_mask: Callable         # where the FD source oracle is valid

    @property
    def g(self):
        """Dirichlet trace: the exact solution (zero when homogeneous)."""
        return None if self.homogeneous_bc else self.u

    def flux_model(self):
        return FluxModel(p=self.p, mu=1.0, a=1.0, delta=self.delta,
                         grad_delta=self.grad_delta)


def _sin_u(pts):
    return np.sin(PI * pts[..., 0]) * np.sin(PI * pts[..., 1])


def _sin_grad(pts):
    sx = np.sin(PI * pts[..., 0])
    sy = np.sin(PI * pts[..., 1])
    cx = np.cos(PI * pts[..., 0])
    cy = np.cos(PI * pts[..., 1])
    return PI * np.stack([cx * sy, sx * cy], axis=-1)


def _sin_hess(pts):
    sx = np.sin(PI * pts[..., 0])
    sy = np.sin(PI * pts[..., 1])
    cx = np.cos(PI * pts[..., 0])
    cy = np.cos(PI * pts[..., 1])
    h = np.empty(pts.shape[:-1] + (2, 2))
    h[..., 0, 0] = -PI * PI * sx * sy
    h[..., 1, 1] = -PI * PI * sx * sy
    h[..., 0, 1] = PI * PI * cx * cy
    h[..., 1, 0] = h[..., 0, 1]
    return h


def _smooth_curvature_constant(k):
    # sup over the unit square of the k+2 order derivative tensor norm of
    # sin(pi x) sin(pi y), in the normalization used by the regime check
    return 2.0 ** ((k - 1) / 2.0) * PI ** k


def bump_delta(pts):
    """Sum of C-infinity bumps exp(1 - 1/(1 - 25 r^2)) on r < 0.2."""
    pts = np.asarray(pts, dtype=float)
    out = np.zeros(pts.shape[:-1])
    for c in BUMP_CENTERS:
        r2 = ((pts - c) ** 2).sum(axis=-1)
        w = 1.0 - BUMP_INV_R2 * r2
        inside = w > 1e-9
        val = np.zeros_like(out)
        val[inside] = np.exp(1.0 - 1.0 / w[inside])
        out += val
    return out


def bump_delta_grad(pts):
    pts = np.asarray(pts, dtype=float)
    out = np.zeros(pts.shape)
    for c in BUMP_CENTERS:
        rel = pts - c
        r2 = (rel ** 2).sum(axis=-1)
        w = 1.0 - BUMP_INV_R2 * r2
        inside = w > 1e-9
        coef = np.zeros(pts.shape[:-1])
        coef[inside] = (-2.0 * BUMP_INV_R2 * np.exp(1.0 - 1.0 / w[inside])
                        / w[inside] ** 2)
        out += coef[..., None] * rel
    return out


def _case4_beta(p, k):
    return p + (k + 2) / 4.0


def _make_case4_evaluators(beta):
    def parts(pts):
        tx = pts[..., 0] - 0.5
        ty = pts[..., 1] - 0.5
        ax, ay = np.abs(tx), np.abs(ty)
        u = 0.1 * np.exp(-10.0 * (ax ** beta + ay ** beta))
        return tx, ty, ax, ay, u

    def u(pts):
        return parts(np.asarray(pts, dtype=float))[-1]

    def grad(pts):
        tx, ty, ax, ay, uv = parts(np.asarray(pts, dtype=float))
        gx = -10.0 * beta * np.sign(tx) * ax ** (beta - 1.0) * uv
        gy = -10.0 * beta * np.sign(ty) * ay ** (beta - 1.0) * uv
        return np.stack([gx, gy], axis=-1)

    def hess(pts):
        pts = np.asarray(pts, dtype=float)
        tx, ty, ax, ay, uv = parts(pts)
        # |t|^{beta-2} is continuous here because beta >= 2 for p > 1.25
        # or k >= 1; at beta = 2 exactly it degenerates to the constant 1
        pxx = (-10.0 * beta * (beta - 1.0) * ax ** (beta - 2.0)
               + 100.0 * beta ** 2 * ax ** (2.0 * beta - 2.0)) * uv
        pyy = (-10.0 * beta * (beta - 1.0) * ay ** (beta - 2.0)
               + 100.0 * beta ** 2 * ay ** (2.0 * beta - 2.0)) * uv
        pxy = (100.0 * beta ** 2 * np.sign(tx) * np.sign(ty)
               * ax ** (beta - 1.0) * ay ** (beta - 1.0)) * uv
        h = np.empty(pts.shape[:-1] + (2, 2))
        h[..., 0, 0] = pxx
        h[..., 1, 1] = pyy
        h[..., 0, 1] = pxy
        h[..., 1, 0] = pxy
        return h

    return u, grad, hess


def _case4_zeta0(beta):
    # deterministic dense sampling of |grad u|; the field is symmetric in
    # (|x - 1/2|, |y - 1/2|) so sampling one quadrant suffices
    s = np.linspace(0.0, 0.5, 1201)
    S, T = np.meshgrid(s, s, indexing="ij")
    uv = 0.1 * np.exp(-10.0 * (S ** beta + T ** beta))
    g = 10.0 * beta * uv * np.hypot(S ** (beta - 1.0), T ** (beta - 1.0))
    return float(g.max())


def get_case(name, p=1.5, k=1, delta=1.0):
    """Build the named CaseSpec bound to (p, k).

    ``delta`` sets the constant degeneracy field of ``nondeg-flux`` and is
    ignored by the other cases.
    """
    if name == "nondeg-flux":
        dconst = float(delta)
        if dconst < 0:
            raise ValueError("constant degeneracy field must be >= 0")

        def mask(pts):
            g = _sin_grad(pts)
            return dconst + np.hypot(g[..., 0], g[..., 1]) > 0.1

        return CaseSpec(
            name=name, p=p, k=k, u=_sin_u, grad_u=_sin_grad,
            hessian_u=_sin_hess, delta=dconst, grad_delta=None,
            zeta0=dconst + PI, wk2inf=_smooth_curvature_constant(k),
            homogeneous_bc=True, nonsingular_mask=mask)

    if name == "nondeg-potential":
        q = PI + 1.0

        def u(pts):
            pts = np.asarray(pts, dtype=float)
            return _sin_u(pts) + q * (pts[..., 0] + pts[..., 1])

        def grad(pts):
            return _sin_grad(np.asarray(pts, dtype=float)) + q

        return CaseSpec(
            name=name, p=p, k=k, u=u, grad_u=grad, hessian_u=_sin_hess,
            delta=0.0, grad_delta=None,
            zeta0=math.hypot(2.0 * PI + 1.0, PI + 1.0),
            wk2inf=_smooth_curvature_constant(k), homogeneous_bc=False,
            nonsingular_mask=lambda pts: np.ones(
                np.asarray(pts).shape[:-1], dtype=bool))

    if name == "nondeg-couple":
        def mask(pts):
            pts = np.asarray(pts, dtype=float)
            g = _sin_grad(pts)
            ok = bump_delta(pts) + np.hypot(g[..., 0], g[..., 1]) > 0.1
            # keep the FD stencil away from the support circles, where
            # high derivatives of the bumps blow up
            for c in BUMP_CENTERS:
                r = np.sqrt(((pts - c) ** 2).sum(axis=-1))
                ok &= np.abs(r - 0.2) > 0.02
            return ok

        return CaseSpec(
            name=name, p=p, k=k, u=_sin_u, grad_u=_sin_grad,
            hessian_u=_sin_hess, delta=bump_delta,
            grad_delta=bump_delta_grad, zeta0=PI,
            wk2inf=_smooth_curvature_constant(k), homogeneous_bc=True,
            nonsingular_mask=mask)

    if name == "degenerate":
        beta = _case4_beta(p, k)
        u, grad, hess = _make_case4_evaluators(beta)

        def mask(pts, grad=grad):
            pts = np.asarray(pts, dtype=float)
            g = grad(pts)
            return ((np.abs(pts[..., 0] - 0.5) > 0.05)
                    & (np.abs(pts[..., 1] - 0.5) > 0.05)
                    & (np.hypot(g[..., 0], g[..., 1]) > 1e-2))

        return CaseSpec(
            name=name, p=p, k=k, u=u, grad_u=grad, hessian_u=hess,
            delta=0.0, grad_delta=None, zeta0=_case4_zeta0(beta),
            wk2inf=None, homogeneous_bc=False, nonsingular_mask=mask)

    raise ValueError(f"unknown case name {name!r}; choose from {CASE_NAMES}")


def case_catalog(p=1.5, k=1, delta=1.0):
    """All four CaseSpecs bound to (p, k)."""
    return {name: get_case(name, p, k, delta) for name in CASE_NAMES}


def source_from_manufactured(case, x):
    """Source f = -div sigma(., grad u) via the chain rule (a = 1, mu = 1).

    f = -[(p-2)(d + |g|)^{p-3} (grad d . g + g^T H g / |g|)
          + (d + |g|)^{p-2} tr H]

    The direction term is dropped where |g| <= 1e-13, and f is set to 0
    where the whole base d + |g| vanishes; both sets are measure zero for
    the shipped cases and never contain quadrature points.
    """
    pts = np.asarray(x, dtype=float)
    p = case.p
    g = case.grad_u(pts)
    H = case.hessian_u(pts)
    lap = H[..., 0, 0] + H[..., 1, 1]
    ng = np.hypot(g[..., 0], g[..., 1])
    if callable(case.delta):
        d = case.delta(pts)
    else:
        d = np.full(pts.shape[:-1], float(case.delta))
    base = d + ng

    Hg = np.einsum("...ij,...j->...i", H, g)
    gHg = (Hg * g).sum(axis=-1)
    dir_term = np.where(ng > 1e-13, gHg / np.where(ng > 1e-13, ng, 1.0), 0.0)
    if case.grad_delta is not None:
        dir_term = dir_term + (case.grad_delta(pts) * g).sum(axis=-1)

    ok = base > 1e-13
    safe = np.where(ok, base, 1.0)
    fac_m3 = np.where(ok, safe ** (p - 3.0), 0.0)
    fac_m2 = np.where(ok, safe ** (p - 2.0), 1.0 if p == 2.0 else 0.0)
    return -((p - 2.0) * fac_m3 * dir_term + fac_m2 * lap)

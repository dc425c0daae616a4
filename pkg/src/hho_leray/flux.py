"""Degenerate shear-thinning flux and the matching face stabilization.

The flux family is

    sigma(x, xi) = mu(x) (delta(x)^a + |xi|^a)^{(p-2)/a} xi,

with exponent p in (1, 2], consistency field mu, transition exponent a
and degeneracy field delta >= 0.  delta = 0 and a = 1 recover the
p-Laplacian.  The stabilization function has the same power structure in
one variable,

    S(x, w) = gamma (zeta(x)^p + |w|^p)^{(p-2)/p} w,

with a face field zeta >= 0 and a per-element coefficient gamma chosen
between the framing constants sigma_sm and sigma_hc.

Values use the exact formulas (continuously extended by 0 at the
degenerate origin).  Derivatives used inside Newton clamp the base
delta^a + |xi|^a at eps^a so the linearization stays bounded when the
p-Laplacian branch is singular; values are never clamped.

The _core functions work on plain arrays of precomputed field values;
they are shared with the assembly kernels.
"""

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

Field = Union[float, Callable]

#: Base magnitudes below this are treated as the exact origin.
TINY = 1e-280


def eval_field(field, points):
    """Evaluate a constant-or-callable spatial field at points (..., 2)."""
    if callable(field):
        return np.asarray(field(points), dtype=float)
    return np.full(np.asarray(points).shape[:-1], float(field))


@dataclass(frozen=True)
class FluxModel:
    """Flux parameters: exponent p, fields mu, a, delta, and grad_delta
    (the latter only needed to manufacture source terms)."""

    p: float
    mu: Field = 1.0
    a: Field = 1.0
    delta: Field = 0.0
    grad_delta: Union[Callable, None] = None

    def __post_init__(self):
        if not 1.0 < self.p <= 2.0:
            raise ValueError(f"exponent p must be in (1, 2], got {self.p}")


@dataclass(frozen=True)
class StabModel:
    """Stabilization parameters: exponent p, coefficient gamma in
    [sigma_sm, sigma_hc], face field zeta >= 0."""

    p: float
    gamma: float
    zeta: Field = 0.0


def _sigma_core(xi, delta, mu, p, a):
    nxi = np.hypot(xi[..., 0], xi[..., 1])
    base = delta ** a + nxi ** a
    scale = np.where(base > TINY,
                     mu * np.power(np.maximum(base, TINY), (p - 2.0) / a),
                     0.0)
    return scale[..., None] * xi


def _sigma_jacobian_core(xi, delta, mu, p, a, eps):
    nxi = np.hypot(xi[..., 0], xi[..., 1])
    base = delta ** a + nxi ** a
    floored = np.maximum(base, np.maximum(eps ** a, TINY))
    phi = mu * np.power(floored, (p - 2.0) / a)
    # rank-one term is active only where the floor does not bind and xi != 0
    active = (base >= floored) & (nxi > TINY)
    nxi_safe = np.where(nxi > TINY, nxi, 1.0)
    coef = np.where(active,
                    (p - 2.0) * mu * np.power(floored, (p - 2.0) / a - 1.0)
                    * np.power(nxi_safe, a - 2.0),
                    0.0)
    out = phi[..., None, None] * np.eye(2)
    out += coef[..., None, None] * (xi[..., :, None] * xi[..., None, :])
    return out


def _stab_core(w, zeta, gamma, p):
    base = zeta ** p + np.abs(w) ** p
    scale = np.where(base > TINY,
                     gamma * np.power(np.maximum(base, TINY), (p - 2.0) / p),
                     0.0)
    return scale * w


def _stab_derivative_core(w, zeta, gamma, p, eps):
    base = zeta ** p + np.abs(w) ** p
    floored = np.maximum(base, np.maximum(eps ** p, TINY))
    phi = gamma * np.power(floored, (p - 2.0) / p)
    active = base >= floored
    extra = np.where(active,
                     gamma * (p - 2.0) * np.power(floored, (p - 2.0) / p - 1.0)
                     * np.abs(w) ** p,
                     0.0)
    return phi + extra


def sigma(model, x, xi):
    """Flux value at points x (..., 2) and gradients xi (..., 2)."""
    xi = np.asarray(xi, dtype=float)
    return _sigma_core(xi, eval_field(model.delta, x), eval_field(model.mu, x),
                       model.p, eval_field(model.a, x))


def sigma_jacobian(model, x, xi, eps=0.0):
    """Derivative of the flux in xi: (..., 2, 2).

    With eps > 0 the base delta^a + |xi|^a is floored at eps^a and the
    rank-one term dropped on the floored set, which is the exact
    derivative of the floored flux.  eps = 0 gives the true Jacobian
    away from the degenerate origin.
    """
    xi = np.asarray(xi, dtype=float)
    return _sigma_jacobian_core(xi, eval_field(model.delta, x),
                                eval_field(model.mu, x), model.p,
                                eval_field(model.a, x), max(eps, 0.0))


def stab_value(model, x, w):
    """Stabilization function value at face points x for scalars w."""
    w = np.asarray(w, dtype=float)
    return _stab_core(w, eval_field(model.zeta, x), model.gamma, model.p)


def stab_derivative(model, x, w, eps=0.0):
    """Derivative of the stabilization function in w (same shape as w)."""
    w = np.asarray(w, dtype=float)
    return _stab_derivative_core(w, eval_field(model.zeta, x), model.gamma,
                                 model.p, max(eps, 0.0))


def framing_constants(model):
    """Closed-form framing pair (sigma_hc, sigma_sm) for constant mu, a."""
    if callable(model.mu) or callable(model.a):
        raise ValueError("framing constants require constant mu and a")
    p, mu, a = model.p, float(model.mu), float(model.a)
    neg = min(1.0 / a - 1.0 / p, 0.0)
    pos = max(1.0 / a - 1.0 / p, 0.0)
    sigma_hc = mu / (p - 1.0) * 2.0 ** ((-neg - 1.0) * (p - 2.0) + 1.0 / p)
    sigma_sm = mu * (p - 1.0) * 2.0 ** (pos * (p - 2.0))
    return sigma_hc, sigma_sm


def check_prolongement(p, alpha, x, y, rtol=1e-12):
    """Whether (alpha + |x| + |y|)^{p-2} |x - y| <= |x - y|^{p-1} holds,
    with both sides read as 0 at the degenerate origin.  A relative
    roundoff slack covers exact-equality cases."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim and x.shape[-1] == 2:
        nx = np.hypot(x[..., 0], x[..., 1])
        ny = np.hypot(y[..., 0], y[..., 1])
        d = x - y
        nd = np.hypot(d[..., 0], d[..., 1])
    else:
        nx, ny, nd = np.abs(x), np.abs(y), np.abs(x - y)
    base = alpha + nx + ny
    lhs = np.where(base > TINY, np.power(np.maximum(base, TINY), p - 2.0), 0.0) * nd
    rhs = np.where(nd > TINY, np.power(np.maximum(nd, TINY), p - 1.0), 0.0)
    return bool(np.all(lhs <= rhs * (1.0 + rtol) + TINY))


def default_stab_model(flux_model, zeta):
    """Stabilization with gamma at the continuity constant sigma_hc."""
    sigma_hc, _ = framing_constants(flux_model)
    return StabModel(p=flux_model.p, gamma=sigma_hc, zeta=zeta)

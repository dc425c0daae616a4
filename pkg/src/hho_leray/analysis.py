"""Error measures, convergence rates, and degeneracy diagnostics.

The regime classification follows the a priori theory: with C the
W^{k+2,inf} seminorm of the exact solution and D the smallest sampled
value of min(delta + |grad u|, zeta), the indicator eta = C h^{k+1} / D
separates a degenerate regime (eta >= 1, rates may drop towards
(k+1)(p-1)) from a non-degenerate one (D >= 1, full rate k+1).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .flux import eval_field
from .local_ops import HybridVector, interpolate, seminorm_w1q


@dataclass
class ErrorRecord:
    """One row of a convergence study."""
    case: str
    p: float
    k: int
    n: int
    h: float
    ndof: int
    error: float
    eoc: float            # nan on the first level of a series
    newton_iters: int
    eta_tilde: float
    regime: str
    wall_ms: float


@dataclass
class RegimeReport:
    D_elem: np.ndarray            # per-element degeneracy measure
    D_min: float
    eta_tilde: float
    label: str                    # degenerate / non-degenerate / intermediate
    rate_bracket: tuple           # predicted EOC range (lo, hi)
    h: float
    curvature: Optional[float]    # the constant C; None if unknown
    eta_elem: Optional[np.ndarray] = None


def energy_error(uh, case, mesh, k, degree=None):
    """W^{1,p}-seminorm distance between uh and the interpolated exact
    solution; returns (error, per-element p-th powers)."""
    ih = interpolate(mesh, k, case.u, degree)
    diff = HybridVector(uh.elem - ih.elem, uh.face - ih.face)
    return seminorm_w1q(mesh, k, diff, case.p, degree)


def eoc(errors, hs):
    """Observed convergence rates between consecutive levels.

    The first entry is nan (no previous level); entries where either error
    is not strictly positive, or the mesh sizes coincide, are nan too.
    """
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    out = np.full(errors.shape, np.nan)
    for i in range(1, len(errors)):
        if errors[i] > 0.0 and errors[i - 1] > 0.0 and hs[i] != hs[i - 1]:
            out[i] = (math.log(errors[i - 1] / errors[i])
                      / math.log(hs[i - 1] / hs[i]))
    return out


def _barycentric_lattice(m):
    ij = [(i, j) for i in range(m + 1) for j in range(m + 1 - i)]
    lam = np.array([(i / m, j / m) for i, j in ij])
    return np.column_stack([1.0 - lam[:, 0] - lam[:, 1], lam])


def degeneracy_numbers(case, mesh, k, density=20, face_samples=64,
                       elem_seminorm=None):
    """Sampled degeneracy measure per element and the global regime label.

    D_T is the minimum over a barycentric lattice (i + j <= density) of
    delta + |grad u| and over uniform face samples of zeta.  eta_tilde =
    C h^{k+1} / min_T D_T with the conventions eta = +inf when the
    measure vanishes and C is positive or unknown, and eta = 0 when both
    vanish.  Per-element indicators are filled only when elem_seminorm
    (values of |u|_{W^{k+2,p}(T)}) is supplied.
    """
    lam = _barycentric_lattice(density)                    # (nl, 3)
    tri = mesh.vertices[mesh.elements]                     # (ne, 3, 2)
    pts = np.einsum("lc,ecd->eld", lam, tri)
    g = case.grad_u(pts)
    vals = eval_field(case.delta, pts) + np.hypot(g[..., 0], g[..., 1])
    D_elem = vals.min(axis=1)

    t = np.linspace(0.0, 1.0, face_samples)
    va = mesh.vertices[mesh.faces[:, 0]]
    vb = mesh.vertices[mesh.faces[:, 1]]
    fpts = va[:, None, :] + t[None, :, None] * (vb - va)[:, None, :]
    zmin = eval_field(case.zeta0, fpts).min(axis=1)
    D_elem = np.minimum(D_elem, zmin[mesh.elem_faces].min(axis=1))

    D_min = float(D_elem.min())
    C = case.wk2inf
    hk1 = mesh.h ** (k + 1)
    if D_min == 0.0:
        if C is not None and C == 0.0:
            eta = 0.0
        else:
            eta = math.inf
    elif C is None:
        eta = math.inf
    else:
        eta = C * hk1 / D_min

    lo, hi = (k + 1) * (case.p - 1.0), float(k + 1)
    if eta >= 1.0:
        label, bracket = "degenerate", (lo, lo)
    elif D_min >= 1.0:
        label, bracket = "non-degenerate", (hi, hi)
    else:
        label, bracket = "intermediate", (lo, hi)

    eta_elem = None
    if elem_seminorm is not None:
        sem = np.asarray(elem_seminorm, dtype=float)
        num = mesh.h_elem ** (k + 1) * sem
        den = mesh.areas ** (1.0 / case.p) * D_elem
        with np.errstate(divide="ignore", invalid="ignore"):
            eta_elem = np.where(den > 0.0, num / den,
                                np.where(num > 0.0, np.inf, 0.0))

    return RegimeReport(D_elem=D_elem, D_min=D_min, eta_tilde=eta,
                        label=label, rate_bracket=bracket, h=mesh.h,
                        curvature=C, eta_elem=eta_elem)

"""Pure numpy assembly kernels (reference implementation).

Every kernel consumes precomputed per-quadrature-point evaluation
tensors:

    A     (ne, nq, 2, nl)   reconstructed-gradient evaluation rows
    w     (ne, nq)          element quadrature weights
    Dv    (ne, nfq, nl)     boundary-difference evaluation rows, stacked
                            over the three faces
    wf    (ne, nfq)         face quadrature weights, already scaled by h_T
    delta, mu, a, zeta      field values at the matching points
    gamma (ne,)             stabilization coefficient per element

and a local coefficient matrix uloc (ne, nl).  Outputs are per-element
residual vectors (ne, nl) or Jacobian matrices (ne, nl, nl); the global
scatter happens in the caller with a fixed summation order.
"""

import numpy as np

from .flux import (_sigma_core, _sigma_jacobian_core, _stab_core,
                   _stab_derivative_core)

NAME = "numpy"


def flux_residual(A, w, delta, mu, a, uloc, p):
    gu = np.einsum("eqcj,ej->eqc", A, uloc, optimize=True)
    s = _sigma_core(gu, delta, mu, p, a)
    return np.einsum("eqcj,eq,eqc->ej", A, w, s, optimize=True)


def flux_jacobian(A, w, delta, mu, a, uloc, p, eps):
    ne, nq, _, nl = A.shape
    gu = np.einsum("eqcj,ej->eqc", A, uloc, optimize=True)
    J = _sigma_jacobian_core(gu, delta, mu, p, a, eps)
    B = np.einsum("eq,eqcd,eqdj->eqcj", w, J, A, optimize=True)
    At = A.reshape(ne, nq * 2, nl)
    Bt = B.reshape(ne, nq * 2, nl)
    return At.transpose(0, 2, 1) @ Bt


def stab_residual(Dv, wf, zeta, gamma, uloc, p):
    du = np.einsum("eqj,ej->eq", Dv, uloc, optimize=True)
    s = _stab_core(du, zeta, gamma[:, None], p)
    return np.einsum("eqj,eq,eq->ej", Dv, wf, s, optimize=True)


def stab_jacobian(Dv, wf, zeta, gamma, uloc, p, eps):
    du = np.einsum("eqj,ej->eq", Dv, uloc, optimize=True)
    ds = _stab_derivative_core(du, zeta, gamma[:, None], p, eps)
    return np.einsum("eqi,eq,eqj->eij", Dv, wf * ds, Dv, optimize=True)

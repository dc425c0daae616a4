"""Numba-accelerated assembly kernels.

Same contracts as kernels_numpy; the nonlinear scalar math is inlined so
each element is processed in one parallel loop iteration writing to its
own output slot (deterministic regardless of thread count).
"""

import numpy as np
from numba import njit, prange

NAME = "numba"

TINY = 1e-280


@njit(cache=True, parallel=True)
def flux_residual(A, w, delta, mu, a, uloc, p):
    ne, nq, _, nl = A.shape
    out = np.zeros((ne, nl))
    for e in prange(ne):
        for q in range(nq):
            g0 = 0.0
            g1 = 0.0
            for j in range(nl):
                g0 += A[e, q, 0, j] * uloc[e, j]
                g1 += A[e, q, 1, j] * uloc[e, j]
            n = np.hypot(g0, g1)
            base = delta[e, q] ** a[e, q] + n ** a[e, q]
            if base > TINY:
                s = mu[e, q] * base ** ((p - 2.0) / a[e, q])
            else:
                s = 0.0
            c0 = w[e, q] * s * g0
            c1 = w[e, q] * s * g1
            for j in range(nl):
                out[e, j] += A[e, q, 0, j] * c0 + A[e, q, 1, j] * c1
    return out


@njit(cache=True, parallel=True)
def flux_jacobian(A, w, delta, mu, a, uloc, p, eps):
    ne, nq, _, nl = A.shape
    out = np.zeros((ne, nl, nl))
    for e in prange(ne):
        for q in range(nq):
            g0 = 0.0
            g1 = 0.0
            for j in range(nl):
                g0 += A[e, q, 0, j] * uloc[e, j]
                g1 += A[e, q, 1, j] * uloc[e, j]
            n = np.hypot(g0, g1)
            aa = a[e, q]
            base = delta[e, q] ** aa + n ** aa
            floor = max(eps ** aa, TINY)
            floored = max(base, floor)
            phi = mu[e, q] * floored ** ((p - 2.0) / aa)
            if base >= floored and n > TINY:
                coef = ((p - 2.0) * mu[e, q]
                        * floored ** ((p - 2.0) / aa - 1.0)
                        * n ** (aa - 2.0))
            else:
                coef = 0.0
            wq = w[e, q]
            for i in range(nl):
                ai0 = A[e, q, 0, i]
                ai1 = A[e, q, 1, i]
                gai = g0 * ai0 + g1 * ai1
                for j in range(nl):
                    aj0 = A[e, q, 0, j]
                    aj1 = A[e, q, 1, j]
                    gaj = g0 * aj0 + g1 * aj1
                    out[e, i, j] += wq * (phi * (ai0 * aj0 + ai1 * aj1)
                                          + coef * gai * gaj)
    return out


@njit(cache=True, parallel=True)
def stab_residual(Dv, wf, zeta, gamma, uloc, p):
    ne, nfq, nl = Dv.shape
    out = np.zeros((ne, nl))
    for e in prange(ne):
        for q in range(nfq):
            du = 0.0
            for j in range(nl):
                du += Dv[e, q, j] * uloc[e, j]
            base = zeta[e, q] ** p + abs(du) ** p
            if base > TINY:
                s = gamma[e] * base ** ((p - 2.0) / p)
            else:
                s = 0.0
            c = wf[e, q] * s * du
            for j in range(nl):
                out[e, j] += Dv[e, q, j] * c
    return out


@njit(cache=True, parallel=True)
def stab_jacobian(Dv, wf, zeta, gamma, uloc, p, eps):
    ne, nfq, nl = Dv.shape
    out = np.zeros((ne, nl, nl))
    for e in prange(ne):
        for q in range(nfq):
            du = 0.0
            for j in range(nl):
                du += Dv[e, q, j] * uloc[e, j]
            base = zeta[e, q] ** p + abs(du) ** p
            floored = max(base, max(eps ** p, TINY))
            ds = gamma[e] * floored ** ((p - 2.0) / p)
            if base >= floored:
                ds += (gamma[e] * (p - 2.0)
                       * floored ** ((p - 2.0) / p - 1.0) * abs(du) ** p)
            c = wf[e, q] * ds
            for i in range(nl):
                di = Dv[e, q, i] * c
                for j in range(nl):
                    out[e, i, j] += di * Dv[e, q, j]
    return out

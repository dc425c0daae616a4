"""Scaled monomial bases and quadrature on triangles and segments.

Element bases are monomials in the locally rescaled coordinate
((x - x_T) / h_T), ordered by total degree and, within a degree, by
decreasing power of the first coordinate: 1, X, Y, X^2, XY, Y^2, ...
Face bases are powers of the signed arclength coordinate
s = (x - midpoint) . tangent / h_F, which takes values in [-1/2, 1/2].

Triangle rules: closed-form symmetric rules for degrees up to 5, a
conical product rule (Gauss-Jacobi x Gauss-Legendre through the Duffy
map) above that.  All weights are positive and all points interior.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

QUAD_DEGREE_CAP = 50


def n_modes(l):
    """Dimension of bivariate polynomials of total degree <= l."""
    return (l + 1) * (l + 2) // 2


def monomial_exponents(l):
    """Exponent pairs of the degree-l element basis, in basis order."""
    out = []
    for deg in range(l + 1):
        for ax in range(deg, -1, -1):
            out.append((ax, deg - ax))
    return np.array(out, dtype=np.int64)


def _power_table(t, l):
    # t ** j for j = 0..l along a trailing axis
    out = np.empty(t.shape + (l + 1,))
    out[..., 0] = 1.0
    for j in range(1, l + 1):
        out[..., j] = out[..., j - 1] * t
    return out


def element_basis(points, centers, h, l, grad=False):
    """Evaluate the scaled monomial basis (and optionally its gradient).

    points : (..., npts, 2), centers : (..., 2), h : (...)
    Returns values (..., npts, N) and, if grad, gradients (..., npts, N, 2).
    """
    points = np.asarray(points, dtype=float)
    centers = np.asarray(centers, dtype=float)
    h = np.asarray(h, dtype=float)
    xi = (points - centers[..., None, :]) / h[..., None, None]
    px = _power_table(xi[..., 0], l)
    py = _power_table(xi[..., 1], l)
    exps = monomial_exponents(l)
    vals = px[..., exps[:, 0]] * py[..., exps[:, 1]]
    if not grad:
        return vals

    grads = np.zeros(vals.shape + (2,))
    ax, ay = exps[:, 0], exps[:, 1]
    hx = h[..., None, None]
    mx = ax > 0
    grads[..., mx, 0] = (ax[mx] * px[..., ax[mx] - 1] * py[..., ay[mx]]) / hx
    my = ay > 0
    grads[..., my, 1] = (ay[my] * px[..., ax[my]] * py[..., ay[my] - 1]) / hx
    return vals, grads


def face_basis(points, mids, tangents, lengths, l):
    """Evaluate the face basis s^j, j = 0..l, at points on the face.

    points : (..., npts, 2); mids, tangents : (..., 2); lengths : (...).
    Returns (..., npts, l + 1).
    """
    points = np.asarray(points, dtype=float)
    mids = np.asarray(mids, dtype=float)
    tangents = np.asarray(tangents, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    rel = points - mids[..., None, :]
    s = (rel * tangents[..., None, :]).sum(axis=-1) / lengths[..., None]
    return _power_table(s, l)


def _rule_degree_2():
    pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
    return pts, np.full(3, 1 / 6)


def _rule_degree_5():
    r15 = math.sqrt(15.0)
    a1 = (6.0 + r15) / 21.0
    a2 = (6.0 - r15) / 21.0
    w1 = (155.0 + r15) / 2400.0
    w2 = (155.0 - r15) / 2400.0
    pts = [[1 / 3, 1 / 3]]
    wts = [9.0 / 80.0]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1.0 - 2.0 * a
        pts += [[a, a], [b, a], [a, b]]
        wts += [w, w, w]
    return np.array(pts), np.array(wts)


def _rule_conical(degree):
    n = (degree + 2) // 2
    tj, wj = roots_jacobi(n, 1.0, 0.0)
    tl, wl = leggauss(n)
    xi = 0.5 * (1.0 + tj)
    eta = 0.5 * (1.0 + tl)
    X = np.repeat(xi, n)
    Y = np.tile(eta, n) * (1.0 - X)
    W = np.repeat(wj, n) * np.tile(wl, n) / 8.0
    return np.column_stack([X, Y]), W


def triangle_rule(degree):
    """Quadrature on the reference triangle {x, y >= 0, x + y <= 1}.

    Exact for polynomials of total degree <= degree; weights sum to 1/2.
    """
    if degree > QUAD_DEGREE_CAP:
        raise ValueError(
            f"quadrature degree {degree} exceeds the supported cap {QUAD_DEGREE_CAP}")
    degree = max(degree, 1)
    if degree == 1:
        return np.array([[1 / 3, 1 / 3]]), np.array([0.5])
    if degree == 2:
        return _rule_degree_2()
    if degree <= 5:
        return _rule_degree_5()
    return _rule_conical(degree)


def segment_rule(degree):
    """Gauss-Legendre rule on [0, 1]; weights sum to 1."""
    if degree > QUAD_DEGREE_CAP:
        raise ValueError(
            f"quadrature degree {degree} exceeds the supported cap {QUAD_DEGREE_CAP}")
    n = (max(degree, 1) + 2) // 2
    t, w = leggauss(n)
    return 0.5 * (1.0 + t), 0.5 * w


@dataclass(frozen=True)
class QuadRule:
    """Physical quadrature points and weights on one element or face."""
    points: np.ndarray
    weights: np.ndarray
    degree: int


def element_quadrature(mesh, degree, elem=None):
    """Physical quadrature on every element: points (ne, nq, 2), weights
    (ne, nq); with elem given, the rule for that single element."""
    ref, wref = triangle_rule(degree)
    v0 = mesh.vertices[mesh.elements[:, 0]]
    v1 = mesh.vertices[mesh.elements[:, 1]]
    v2 = mesh.vertices[mesh.elements[:, 2]]
    pts = (v0[:, None, :]
           + ref[None, :, 0, None] * (v1 - v0)[:, None, :]
           + ref[None, :, 1, None] * (v2 - v0)[:, None, :])
    w = 2.0 * mesh.areas[:, None] * wref[None, :]
    if elem is not None:
        return QuadRule(points=pts[elem], weights=w[elem], degree=degree)
    return pts, w


def face_quadrature(mesh, degree, face=None):
    """Physical quadrature on every face: points (nf, nq, 2), weights
    (nf, nq); with face given, the rule for that single face."""
    t, wref = segment_rule(degree)
    fv = mesh.vertices[mesh.faces]
    pts = fv[:, None, 0, :] + t[None, :, None] * (fv[:, 1] - fv[:, 0])[:, None, :]
    w = mesh.face_len[:, None] * wref[None, :]
    if face is not None:
        return QuadRule(points=pts[face], weights=w[face], degree=degree)
    return pts, w


@dataclass(frozen=True)
class ElementBasis:
    """Scaled monomial basis of one element, centered at its centroid."""
    center: tuple
    h: float
    degree: int

    @property
    def dimension(self):
        return n_modes(self.degree)


@dataclass(frozen=True)
class FaceBasis:
    """Scaled 1D monomials in the tangential coordinate of one face."""
    mid: tuple
    tangent: tuple
    length: float
    degree: int

    @property
    def dimension(self):
        return self.degree + 1


def basis_for_element(mesh, e, degree):
    return ElementBasis(center=tuple(mesh.centroids[e]),
                        h=float(mesh.h_elem[e]), degree=degree)


def basis_for_face(mesh, f, degree):
    return FaceBasis(mid=tuple(mesh.face_mid[f]),
                     tangent=tuple(mesh.face_tangent[f]),
                     length=float(mesh.face_len[f]), degree=degree)


def eval_basis(basis, points):
    """Values of every basis function at points (..., 2): (..., dim)."""
    pts = np.asarray(points, dtype=float)
    if isinstance(basis, FaceBasis):
        return face_basis(pts, np.asarray(basis.mid),
                          np.asarray(basis.tangent), basis.length,
                          basis.degree)
    return element_basis(pts, np.asarray(basis.center), basis.h, basis.degree)


def eval_basis_grad(basis, points):
    """Gradients (..., dim, 2) for an element basis; the tangential
    derivative (..., dim) for a face basis."""
    pts = np.asarray(points, dtype=float)
    if isinstance(basis, FaceBasis):
        s = ((pts - np.asarray(basis.mid)) @ np.asarray(basis.tangent)
             / basis.length)
        j = np.arange(basis.degree + 1)
        with np.errstate(invalid="ignore"):
            ds = np.where(j > 0, j * s[..., None] ** np.maximum(j - 1, 0), 0.0)
        return ds / basis.length
    return element_basis(pts, np.asarray(basis.center), basis.h,
                         basis.degree, grad=True)[1]


def mass_condition(mesh, l, degree=None):
    """Per-element 2-norm condition numbers of the degree-l mass matrix;
    roughly refinement-invariant thanks to the centroid/diameter scaling."""
    M = element_mass(mesh, l, degree)
    return np.linalg.cond(M)


def element_mass(mesh, l, degree=None):
    """Batched element mass matrices of the degree-l basis: (ne, N, N)."""
    if degree is None:
        degree = 2 * l
    pts, w = element_quadrature(mesh, degree)
    vals = element_basis(pts, mesh.centroids, mesh.h_elem, l)
    return np.einsum("eq,eqi,eqj->eij", w, vals, vals, optimize=True)


def gram_schmidt_transform(mass):
    """Coefficients C with C M C^T = I, for experiments with an orthonormal
    basis in place of the raw monomials. Batched over leading axes."""
    L = np.linalg.cholesky(mass)
    eye = np.broadcast_to(np.eye(mass.shape[-1]), mass.shape)
    return np.linalg.solve(L, eye.copy())

import math

import numpy as np
import pytest

from hho_leray.mesh import Mesh, build_structured_triangular
from hho_leray.polyquad import (basis_for_element, basis_for_face,
                                element_basis, element_mass,
                                element_quadrature, eval_basis,
                                eval_basis_grad, face_quadrature,
                                mass_condition, monomial_exponents, n_modes,
                                segment_rule, triangle_rule)


def tri_monomial_integral(v, a, b):
    """Exact integral plus a cancellation bound for the tolerance.

    Affine map to the reference triangle and the factorial formula
    int_ref xi^i eta^j = i! j! / (i + j + 2)!; the second return value is
    the sum of term magnitudes, which controls the oracle's own roundoff.
    """
    x0, y0 = v[0]
    u1, w1 = v[1] - v[0]
    u2, w2 = v[2] - v[0]
    det = abs(u1 * w2 - u2 * w1)
    fa = math.factorial
    total = mag = 0.0
    for i in range(a + 1):
        for j in range(a - i + 1):
            ca = (fa(a) // (fa(i) * fa(j) * fa(a - i - j))
                  * x0 ** (a - i - j) * u1 ** i * u2 ** j)
            for m in range(b + 1):
                for nn in range(b - m + 1):
                    cb = (fa(b) // (fa(m) * fa(nn) * fa(b - m - nn))
                          * y0 ** (b - m - nn) * w1 ** m * w2 ** nn)
                    term = (ca * cb * fa(i + m) * fa(j + nn)
                            / fa(i + m + j + nn + 2))
                    total += term
                    mag += abs(term)
    return det * total, det * mag


def _signed_area2(v):
    d1, d2 = v[1] - v[0], v[2] - v[0]
    return d1[0] * d2[1] - d1[1] * d2[0]


def test_n_modes():
    assert [n_modes(l) for l in range(5)] == [1, 3, 6, 10, 15]


def test_monomial_exponents_order():
    exps = monomial_exponents(2)
    assert exps.tolist() == [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]


@pytest.mark.parametrize("degree", range(0, 13))
def test_triangle_rule_integrates_monomials(degree):
    rng = np.random.default_rng(degree)
    v = rng.uniform(-1.0, 2.0, (3, 2))
    while abs(_signed_area2(v)) < 0.1:
        v = rng.uniform(-1.0, 2.0, (3, 2))
    mesh = Mesh(v, np.array([[0, 1, 2]]))
    pts, w = element_quadrature(mesh, degree)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            got = float((w[0] * pts[0, :, 0] ** a * pts[0, :, 1] ** b).sum())
            ref, mag = tri_monomial_integral(
                mesh.vertices[mesh.elements[0]], a, b)
            assert abs(got - ref) <= 1e-13 * max(1.0, mag)


def test_triangle_rule_weights_positive():
    for degree in range(0, 13):
        rule = triangle_rule(degree)
        assert (rule[1] > 0).all()
        assert float(rule[1].sum()) == pytest.approx(0.5, rel=1e-13)


def test_triangle_rule_degree_capped():
    triangle_rule(50)
    with pytest.raises(ValueError, match="cap"):
        triangle_rule(51)


def test_segment_rule_polynomials():
    pts, w = segment_rule(9)
    for q in range(10):
        got = float((w * pts ** q).sum())
        assert got == pytest.approx(1.0 / (q + 1.0), rel=1e-13)


def test_face_quadrature_lengths():
    mesh = build_structured_triangular(2)
    pts, w = face_quadrature(mesh, 3)
    assert w.shape[0] == mesh.n_faces
    assert np.allclose(w.sum(axis=1), mesh.face_len, rtol=1e-13)


def test_single_entity_quadrature_matches_batch():
    mesh = build_structured_triangular(2)
    pts, w = element_quadrature(mesh, 4)
    rule = element_quadrature(mesh, 4, elem=3)
    assert np.array_equal(rule.points, pts[3])
    assert np.array_equal(rule.weights, w[3])
    assert rule.degree == 4
    fpts, fw = face_quadrature(mesh, 4)
    frule = face_quadrature(mesh, 4, face=5)
    assert np.array_equal(frule.points, fpts[5])
    assert np.array_equal(frule.weights, fw[5])


def test_eval_basis_element_values():
    mesh = build_structured_triangular(2)
    basis = basis_for_element(mesh, 0, 2)
    assert basis.dimension == 6
    pts = np.array([[0.1, 0.2], [0.3, 0.05]])
    vals = eval_basis(basis, pts)
    sx = (pts[:, 0] - basis.center[0]) / basis.h
    sy = (pts[:, 1] - basis.center[1]) / basis.h
    assert np.allclose(vals[:, 0], 1.0)
    assert np.allclose(vals[:, 1], sx)
    assert np.allclose(vals[:, 2], sy)
    assert np.allclose(vals[:, 4], sx * sy)


def test_eval_basis_grad_fd():
    mesh = build_structured_triangular(2)
    basis = basis_for_element(mesh, 1, 3)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.0, 0.5, (20, 2))
    g = eval_basis_grad(basis, pts)
    h = 1e-7
    for c in range(2):
        dp = np.zeros((1, 2))
        dp[0, c] = h
        fd = (eval_basis(basis, pts + dp) - eval_basis(basis, pts - dp)) / (2 * h)
        assert np.allclose(g[..., c], fd, atol=1e-6)


def test_face_basis_tangential():
    mesh = build_structured_triangular(2)
    basis = basis_for_face(mesh, 0, 2)
    assert basis.dimension == 3
    pts, w = face_quadrature(mesh, 4, face=0).points, None
    vals = eval_basis(basis, pts)
    s = ((pts - basis.mid) * basis.tangent).sum(axis=-1) / basis.length
    assert np.allclose(vals[:, 1], s)
    assert np.allclose(vals[:, 2], s ** 2)


def test_mass_condition_refinement_invariant():
    # scaled monomials keep the mass conditioning mesh-independent
    c2 = float(np.max(mass_condition(build_structured_triangular(2), 2)))
    c16 = float(np.max(mass_condition(build_structured_triangular(16), 2)))
    assert c2 == pytest.approx(c16, rel=1e-8)


def test_element_mass_spd():
    mesh = build_structured_triangular(3)
    M = element_mass(mesh, 2)
    assert np.allclose(M, np.swapaxes(M, 1, 2), atol=1e-15)
    eig = np.linalg.eigvalsh(M)
    assert (eig > 0).all()

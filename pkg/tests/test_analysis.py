import math

import numpy as np
import pytest

from hho_leray.analysis import (degeneracy_numbers, energy_error, eoc,
                                _barycentric_lattice)
from hho_leray.cases import get_case
from hho_leray.local_ops import interpolate
from hho_leray.mesh import build_structured_triangular


def test_eoc_basic():
    hs = [0.5, 0.25, 0.125]
    errors = [4.0, 1.0, 0.25]
    rates = eoc(errors, hs)
    assert math.isnan(rates[0])
    assert rates[1] == pytest.approx(2.0, rel=1e-13)
    assert rates[2] == pytest.approx(2.0, rel=1e-13)


def test_eoc_sentinels():
    rates = eoc([1.0, 0.0, 0.1, 0.1], [0.5, 0.25, 0.125, 0.125])
    assert math.isnan(rates[1])  # zero error
    assert math.isnan(rates[2])  # previous error zero
    assert math.isnan(rates[3])  # equal meshsizes


def test_barycentric_lattice_counts():
    lam = _barycentric_lattice(20)
    assert lam.shape == (231, 3)
    assert np.allclose(lam.sum(axis=1), 1.0, atol=1e-15)
    assert (lam >= -1e-15).all()


def test_energy_error_of_exact_interpolate_is_zero():
    mesh = build_structured_triangular(4)
    case = get_case("nondeg-flux", p=1.5, delta=1.0)
    ih = interpolate(mesh, 1, case.u)
    err, per_elem = energy_error(ih, case, mesh, 1)
    assert err == 0.0
    assert per_elem.shape == (mesh.n_elements,)


def test_energy_error_positive_for_perturbation():
    mesh = build_structured_triangular(4)
    case = get_case("nondeg-flux", p=1.5, delta=1.0)
    ih = interpolate(mesh, 1, case.u)
    ih.elem[3, 1] += 0.1
    err, _ = energy_error(ih, case, mesh, 1)
    assert err > 0.0


def test_offset_case_eta_formula():
    # constant delta keeps D pinned at delta + min |grad u| = delta, so
    # eta = C h^{k+1} / delta exactly
    for k in (1, 2):
        case = get_case("nondeg-flux", p=1.75, k=k, delta=1.0)
        for n in (8, 16):
            mesh = build_structured_triangular(n)
            rep = degeneracy_numbers(case, mesh, k)
            assert rep.D_min == 1.0
            want = 2.0 ** ((k - 1) / 2.0) * math.pi ** k * mesh.h ** (k + 1)
            assert rep.eta_tilde == pytest.approx(want, rel=1e-12)
            assert rep.label == "non-degenerate"
            assert rep.rate_bracket == (float(k + 1), float(k + 1))


def test_degenerate_case_unbounded_curvature():
    mesh = build_structured_triangular(8)
    case = get_case("degenerate", p=1.5, k=1)
    rep = degeneracy_numbers(case, mesh, 1)
    assert rep.curvature is None
    assert math.isinf(rep.eta_tilde)
    assert rep.label == "degenerate"
    lo = 2.0 * 0.5
    assert rep.rate_bracket == (lo, lo)
    assert rep.D_min >= 0.0


def test_labels_transition_with_delta():
    # shrinking delta walks the offset case towards the degenerate label
    mesh = build_structured_triangular(8)
    order = []
    for delta in (2.0, 1e-1, 1e-4):
        case = get_case("nondeg-flux", p=1.5, k=1, delta=delta)
        order.append(degeneracy_numbers(case, mesh, 1).eta_tilde)
    assert order[0] < order[1] < order[2]
    case = get_case("nondeg-flux", p=1.5, k=1, delta=1e-4)
    assert degeneracy_numbers(case, mesh, 1).label == "degenerate"
    case = get_case("nondeg-flux", p=1.5, k=1, delta=2.0)
    assert degeneracy_numbers(case, mesh, 1).label == "non-degenerate"


def test_intermediate_label():
    # small but positive D with eta < 1: refine until eta drops below one
    case = get_case("nondeg-flux", p=1.5, k=1, delta=0.5)
    mesh = build_structured_triangular(32)
    rep = degeneracy_numbers(case, mesh, 1)
    assert rep.eta_tilde < 1.0
    assert rep.D_min == 0.5
    assert rep.label == "intermediate"
    assert rep.rate_bracket == (1.0, 2.0)


def test_density_stability():
    # doubling the sampling density does not move the offset-case numbers
    case = get_case("nondeg-flux", p=1.5, k=1, delta=1.0)
    mesh = build_structured_triangular(8)
    a = degeneracy_numbers(case, mesh, 1, density=20)
    b = degeneracy_numbers(case, mesh, 1, density=40)
    assert a.D_min == b.D_min
    assert a.eta_tilde == b.eta_tilde


def test_elem_seminorm_indicator():
    case = get_case("nondeg-flux", p=1.5, k=1, delta=1.0)
    mesh = build_structured_triangular(4)
    sem = np.ones(mesh.n_elements)
    rep = degeneracy_numbers(case, mesh, 1, elem_seminorm=sem)
    assert rep.eta_elem is not None
    assert rep.eta_elem.shape == (mesh.n_elements,)
    assert np.isfinite(rep.eta_elem).all()
    want = mesh.h_elem ** 2 / (mesh.areas ** (1.0 / 1.5) * rep.D_elem)
    assert np.allclose(rep.eta_elem, want, rtol=1e-13)


def test_couple_case_nondegenerate_at_corner():
    # the bump field keeps D >= 1 at the critical points, with exact
    # equality at the corners
    case = get_case("nondeg-couple", p=1.5, k=1)
    mesh = build_structured_triangular(8)
    rep = degeneracy_numbers(case, mesh, 1)
    assert rep.D_min == 1.0
    assert rep.label == "non-degenerate"

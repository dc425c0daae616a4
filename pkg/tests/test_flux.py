import math

import numpy as np
import pytest

from hho_leray.flux import (FluxModel, StabModel, check_prolongement,
                            default_stab_model, eval_field,
                            framing_constants, sigma, sigma_jacobian,
                            stab_derivative, stab_value)


def test_sigma_reference_value():
    # p = 3/2, mu = a = delta = 1, xi = (1, 0):
    # (1 + 1)^{-1/2} * 1 = 1/sqrt(2)
    model = FluxModel(p=1.5, mu=1.0, a=1.0, delta=1.0)
    val = sigma(model, np.zeros((1, 2)), np.array([[1.0, 0.0]]))
    assert val[0, 0] == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)
    assert val[0, 1] == 0.0


def test_sigma_zero_at_origin():
    for p in (1.25, 1.5, 2.0):
        model = FluxModel(p=p, delta=0.0)
        val = sigma(model, np.zeros((3, 2)), np.zeros((3, 2)))
        assert (val == 0.0).all()
        assert np.isfinite(val).all()


def test_sigma_p2_is_linear():
    # at p = 2 the prefactor collapses to mu for every delta
    rng = np.random.default_rng(0)
    xi = rng.standard_normal((50, 2))
    x = rng.uniform(0.0, 1.0, (50, 2))
    for delta in (0.0, 0.7, 3.0):
        model = FluxModel(p=2.0, mu=2.5, delta=delta)
        assert np.allclose(sigma(model, x, xi), 2.5 * xi, rtol=1e-14)


def test_sigma_spatial_fields():
    model = FluxModel(p=1.5, mu=lambda q: 1.0 + q[..., 0],
                      delta=lambda q: q[..., 1])
    x = np.array([[0.5, 0.25]])
    xi = np.array([[2.0, 0.0]])
    want = 1.5 * (0.25 + 2.0) ** (-0.5) * 2.0
    assert sigma(model, x, xi)[0, 0] == pytest.approx(want, rel=1e-14)


def test_flux_model_rejects_bad_exponent():
    with pytest.raises(ValueError):
        FluxModel(p=1.0)
    with pytest.raises(ValueError):
        FluxModel(p=2.5)


def test_jacobian_symmetry_and_fd():
    rng = np.random.default_rng(1)
    x = rng.uniform(0.0, 1.0, (30, 2))
    xi = rng.standard_normal((30, 2)) * rng.uniform(0.2, 2.0, (30, 1))
    for p in (1.25, 1.5, 2.0):
        for delta in (0.0, 0.4):
            model = FluxModel(p=p, delta=delta)
            J = sigma_jacobian(model, x, xi)
            assert np.allclose(J, np.swapaxes(J, -1, -2), atol=1e-14)
            h = 1e-7
            for c in range(2):
                d = np.zeros_like(xi)
                d[:, c] = h
                fd = (sigma(model, x, xi + d) - sigma(model, x, xi - d)) / (2 * h)
                assert np.abs(fd - J[..., c]).max() < 1e-5


def test_jacobian_positive_definite_with_clamp():
    # the eps clamp keeps the linearization SPD even at the origin
    model = FluxModel(p=1.25, delta=0.0)
    xi = np.array([[0.0, 0.0], [1e-12, 0.0], [0.5, -0.2]])
    J = sigma_jacobian(model, np.zeros((3, 2)), xi, eps=1e-8)
    eig = np.linalg.eigvalsh(J)
    assert (eig > 0).all()
    assert np.isfinite(J).all()


def test_jacobian_clamp_matches_exact_above_floor():
    model = FluxModel(p=1.5, delta=0.0)
    xi = np.array([[0.3, 0.4]])
    x = np.zeros((1, 2))
    assert np.allclose(sigma_jacobian(model, x, xi, eps=1e-8),
                       sigma_jacobian(model, x, xi, eps=0.0), rtol=1e-14)


def test_framing_constants_p2():
    # at p = 2 the pair collapses to (mu sqrt 2, mu)
    hc, sm = framing_constants(FluxModel(p=2.0, mu=3.0))
    assert hc == pytest.approx(3.0 * math.sqrt(2.0), rel=1e-15)
    assert sm == pytest.approx(3.0, rel=1e-15)


def test_framing_constants_reference_value():
    hc, sm = framing_constants(FluxModel(p=1.5, mu=1.0, a=1.0))
    assert sm == pytest.approx(0.44544935907016964, rel=1e-15)
    assert hc > sm


def test_framing_order():
    for p in (1.25, 1.5, 1.75, 2.0):
        for a in (1.0, 2.0):
            hc, sm = framing_constants(FluxModel(p=p, a=a))
            assert 0.0 < sm <= hc


def test_stab_value_and_derivative():
    model = StabModel(p=1.5, gamma=0.8, zeta=0.3)
    x = np.zeros((4, 2))
    w = np.array([-1.2, 0.0, 0.4, 2.0])
    v = stab_value(model, x, w)
    assert v[1] == 0.0
    assert (np.sign(v) == np.sign(w)).all()
    d = stab_derivative(model, x, w)
    h = 1e-7
    fd = (stab_value(model, x, w + h) - stab_value(model, x, w - h)) / (2 * h)
    assert np.abs(d - fd).max() < 1e-6


def test_stab_derivative_positive_with_clamp():
    model = StabModel(p=1.25, gamma=1.0, zeta=0.0)
    d = stab_derivative(model, np.zeros((3, 2)),
                        np.array([0.0, 1e-14, 0.2]), eps=1e-8)
    assert (d > 0).all()
    assert np.isfinite(d).all()


def test_monotonicity_of_sigma():
    # (sigma(xi) - sigma(eta)) . (xi - eta) >= 0
    rng = np.random.default_rng(2)
    for p in (1.25, 1.5, 2.0):
        model = FluxModel(p=p, delta=0.1)
        xi = rng.standard_normal((200, 2))
        eta = rng.standard_normal((200, 2))
        x = rng.uniform(0.0, 1.0, (200, 2))
        ds = sigma(model, x, xi) - sigma(model, x, eta)
        assert ((ds * (xi - eta)).sum(axis=-1) >= -1e-14).all()


def test_check_prolongement():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((500, 2))
    y = rng.standard_normal((500, 2))
    for p in (1.25, 1.5, 1.75, 2.0):
        alpha = np.hypot(x[:, 0], x[:, 1]) * 0.0
        assert check_prolongement(p, alpha, x, y)
    # scalar branch
    assert check_prolongement(1.5, np.zeros(500), x[:, 0], y[:, 0])
    # genuinely violated instance (negative alpha shrinks the base)
    assert not check_prolongement(1.5, -0.9, np.array([0.5, 0.0]),
                                  np.array([-0.5, 0.0]))


def test_eval_field():
    pts = np.zeros((4, 2))
    assert np.array_equal(eval_field(2.0, pts), np.full(4, 2.0))
    assert np.array_equal(eval_field(lambda q: q[..., 0] + 1.0, pts),
                          np.ones(4))


def test_default_stab_model_uses_continuity_constant():
    fm = FluxModel(p=1.5, mu=2.0)
    sm = default_stab_model(fm, 0.4)
    hc, _ = framing_constants(fm)
    assert sm.gamma == hc
    assert sm.p == 1.5
    assert sm.zeta == 0.4

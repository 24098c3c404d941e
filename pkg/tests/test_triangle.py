import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from oracles import central_jacobian, mu_infinity_ref, mu_ref, u_ref
from simpcoord.errors import DomainError, OutOfRangeError
from simpcoord.triangle import (
    corner_angles, coupling_matrix, l_of_u, lengths_from_angles, mixed_partial_residual, mu,
    mu_infinity, mu_inverse, mu_prime, triangle_gradient, triangle_hessian, u_min, u_of_l,
    u_prime, x_invariants,
)

lengths3 = st.lists(st.floats(-5, 5), min_size=3, max_size=3)


def test_corner_angles_examples():
    assert np.array_equal(corner_angles([0.0, 0.0, 0.0]), [1.0, 1.0, 1.0])
    np.testing.assert_allclose(corner_angles([2.0, 0.0, 0.0]), [math.e, 1 / math.e, 1 / math.e],
                               rtol=1e-15)


def test_corner_angles_overflow():
    with pytest.raises(OutOfRangeError):
        corner_angles([1500.0, 0.0, 0.0])
    with pytest.raises(OutOfRangeError):
        corner_angles([np.nan, 0.0, 0.0])


@given(lengths3)
def test_cosine_and_sine_law(l):
    th = corner_angles(l)
    el = np.exp(l)
    for i, j, k in [(0, 1, 2), (1, 0, 2), (2, 0, 1)]:
        assert el[i] * th[j] * th[k] == pytest.approx(1.0, rel=1e-12)
    ratio = th / el
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)


@given(lengths3)
def test_lengths_recovered_from_angles(l):
    np.testing.assert_allclose(lengths_from_angles(corner_angles(l)), l, atol=1e-12)


def test_x_invariant_examples():
    np.testing.assert_allclose(x_invariants([1.0, 1.0, 1.0]), [0.5, 0.5, 0.5])
    e = math.e
    np.testing.assert_allclose(x_invariants([e, 1 / e, 1 / e]), [(2 / e - e) / 2, e / 2, e / 2],
                               rtol=1e-15)
    np.testing.assert_allclose(x_invariants([e, 1 / e, 1 / e]), [-0.991261, 1.359141, 1.359141],
                               atol=1e-6)


@given(st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=3))
def test_x_invariant_pair_sums(theta):
    x = x_invariants(theta)
    for i, j, k in [(0, 1, 2), (1, 2, 0), (0, 2, 1)]:
        assert x[i] + x[j] == pytest.approx(theta[k], rel=1e-14)
    assert x.sum() == pytest.approx(sum(theta) / 2, rel=1e-14)


def test_mu_examples():
    assert mu(0.0, 0.7) == 0.7
    assert mu(-1.0, 1.0) == pytest.approx(0.746824132812427, rel=1e-13)
    assert mu(-1.0, 1.0) == pytest.approx(math.sqrt(math.pi) / 2 * math.erf(1.0), rel=1e-13)
    assert mu(-1.0, np.inf) == pytest.approx(0.886226925452758, rel=1e-13)


@pytest.mark.parametrize("h", [-3.0, -1.0, -0.2, 0.3, 1.0, 2.0])
@pytest.mark.parametrize("x", [0.01, 0.5, 1.3, 2.7])
def test_mu_matches_quadrature_oracle(h, x):
    assert mu(h, x) == pytest.approx(mu_ref(h, x), rel=1e-12)


@given(st.floats(-2, 2), st.floats(0, 3))
def test_mu_odd(h, x):
    assert mu(h, -x) == -mu(h, x)


@pytest.mark.parametrize("h", [-2.0, -0.5, 0.0, 0.5, 2.0])
def test_mu_increasing_on_grid(h):
    x = np.linspace(-3, 3, 301)
    assert np.all(np.diff(mu(h, x)) > 0)


def test_mu_overflow():
    with pytest.raises(OutOfRangeError):
        mu(1.0, 40.0)
    with pytest.raises(OutOfRangeError):
        mu(1.0, np.nan)


def test_mu_infinity_examples():
    assert mu_infinity(0.0) == math.inf
    assert mu_infinity(1.0) == math.inf
    assert mu_infinity(-1.0) == pytest.approx(0.886227, abs=1e-6)
    assert mu_infinity(-4.0) == pytest.approx(0.443113, abs=1e-6)
    assert mu_infinity(-4.0) == pytest.approx(mu_infinity(-1.0) / 2, rel=1e-13)


def test_mu_infinity_monotone_and_vanishing():
    hs = -np.logspace(-2, 4, 40)[::-1]
    vals = [mu_infinity(float(h)) for h in hs]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[0] < 0.01


@pytest.mark.parametrize("h", [-0.01, -0.5, -3.0, -50.0])
def test_mu_infinity_oracle(h):
    assert mu_infinity(h) == pytest.approx(mu_infinity_ref(h), rel=1e-12)


@pytest.mark.parametrize("h", [-2.0, -1.0, -0.3, 0.4, 1.0])
def test_mu_inverse_round_trip(h):
    x = np.linspace(-2.5, 2.5, 23)
    np.testing.assert_allclose(mu_inverse(h, mu(h, x)), x, rtol=1e-10, atol=1e-12)


def test_mu_inverse_rejects_out_of_range():
    with pytest.raises(DomainError):
        mu_inverse(-1.0, 1.0)
    with pytest.raises(OutOfRangeError):
        mu_inverse(1.0, 1e308)


def test_u_examples():
    assert u_of_l(0.0, 1.7) == 1.7
    assert u_of_l(-1.0, 0.0) == 0.0
    assert u_of_l(-1.0, 1.0) == pytest.approx(u_ref(-1.0, 1.0), rel=1e-12)
    for h in (-1.0, 0.5):
        assert l_of_u(h, u_of_l(h, -2.5)) == pytest.approx(-2.5, abs=1e-10)


def test_mu_infinity_subnormal_h():
    for h in (-1e-300, -2.2e-309, -5e-324):
        expected = math.sqrt(math.pi) / (2 * math.sqrt(-h))
        assert mu_infinity(h) == pytest.approx(expected, rel=1e-12)
        assert mu(h, 1.0) == pytest.approx(1.0, rel=1e-15)


def test_u_min_tiny_h():
    assert math.isfinite(u_min(5e-324))


def test_u_min():
    assert u_min(-1.0) == -math.inf
    assert u_min(0.0) == -math.inf
    for h in (0.3, 1.0, 2.0):
        # -int_{-inf}^0 e^{-h e^{-t}} dt = -E1(h)
        assert u_min(h) == pytest.approx(-float(__import__("mpmath").e1(h)), rel=1e-10)


def test_l_of_u_domain():
    with pytest.raises(DomainError):
        l_of_u(1.0, u_min(1.0) - 0.1)
    with pytest.raises(DomainError):
        l_of_u(-1.0, np.inf)


@given(st.floats(-2, 2), st.floats(-3, 3))
def test_u_round_trip(h, l):
    u = u_of_l(h, l)
    # for h > 0 and very negative l, u may round onto its infimum
    assume(h <= 0 or u > u_min(h))
    # one rounding of u moves l by spacing(u) / u'(l)
    slack = 4 * np.spacing(abs(u)) * math.exp(h * math.exp(-l))
    assert l_of_u(h, u) == pytest.approx(l, abs=1e-10 + slack)


@given(st.floats(-2, 2), st.floats(-3, 3), st.floats(1e-3, 1.0))
def test_u_increasing(h, l, dl):
    assert u_of_l(h, l + dl) > u_of_l(h, l)


def test_gradient_symmetric_point():
    for h in (-1.0, 0.0, 1.5):
        np.testing.assert_allclose(triangle_gradient(h, [0, 0, 0]), [mu(h, 0.5)] * 3, rtol=1e-15)
    np.testing.assert_allclose(triangle_gradient(0.0, [2, 0, 0]), [-0.991261, 1.359141, 1.359141],
                               atol=1e-6)


def test_hessian_symmetric_point_h0():
    th = triangle_hessian(0.0, [0.0, 0.0, 0.0])
    M = np.array([[-1.5, 0.5, 0.5], [0.5, -1.5, 0.5], [0.5, 0.5, -1.5]])
    np.testing.assert_allclose(th.M, M)
    np.testing.assert_allclose(np.linalg.eigvalsh(th.M), [-2.0, -2.0, -0.5], atol=1e-14)
    np.testing.assert_allclose(th.H, M / 2, atol=1e-15)


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.floats(-2, 2))
def test_hessian_factorization(l, h):
    th = triangle_hessian(h, l)
    H = th.H
    assert np.max(np.abs(H - H.T)) < 1e-12 * max(1.0, np.max(np.abs(H)))
    cdmd = th.c * th.D[:, None] * th.M * th.D[None, :]
    np.testing.assert_allclose(cdmd, H, rtol=1e-9, atol=1e-300)
    assert np.all(th.D > 0) and th.c > 0


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.floats(-2, 2))
def test_hessian_negative_definite(l, h):
    H = triangle_hessian(h, l).H
    assert np.linalg.eigvalsh(H).max() < 0


@pytest.mark.parametrize("seed", range(5))
def test_hessian_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    l = rng.uniform(-2, 2, 3)
    h = float(rng.uniform(-2, 2))
    u = u_of_l(h, l)
    # the stencil must stay inside the u-domain, which is bounded below for h > 0
    step = min(1e-4, 1e-3 * float(np.min(u - u_min(h))))
    J = central_jacobian(lambda uu: triangle_gradient(h, l_of_u(h, uu)), u, step)
    H = triangle_hessian(h, l).H
    # entries far below the largest one are lost to cancellation in the
    # differences, so the error is measured against the matrix scale
    assert np.max(np.abs(J - H)) < 1e-7 * np.max(np.abs(H))


def test_hessian_overflow_reported():
    with pytest.raises(OutOfRangeError):
        triangle_hessian(2.0, [1.0, -1.0, -5.0])


def test_coupling_matrix_layout():
    M = coupling_matrix([1.0, 2.0, 3.0])
    assert M[0, 1] == 3.0 and M[0, 2] == 2.0 and M[1, 2] == 1.0
    assert np.all(np.diag(M) == -6.0)


def test_mixed_partials():
    rng = np.random.default_rng(7)
    for _ in range(20):
        l = rng.uniform(-2, 2, 3)
        h = float(rng.uniform(-2, 2))
        res = mixed_partial_residual(l, lambda x: mu_prime(h, x), lambda t: u_prime(h, t))
        assert res < 1e-10
    bad = mixed_partial_residual([0.3, -0.2, 0.5], lambda x: 3 * np.square(x),
                                 lambda t: u_prime(-1.0, t))
    assert bad > 1e-3

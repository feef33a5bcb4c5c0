import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopsurf.errors import SingularLoop, TwistViolation
from loopsurf.loops import (
    OFF_AXIS,
    CirclePoint,
    allowed_mask,
    circle_samples,
    eval_loop,
    eval_on_samples,
    band_from_samples,
    exp_axis,
    identity_loop,
    inverse,
    loop_distance,
    make_loop,
    mul,
    star,
    theta_derivative,
    unitarity_defect,
)

A = OFF_AXIS
I2 = np.eye(2)


def random_loop(rng, trunc=6, scale=1.0):
    """Random parity-valid loop with decaying coefficients."""
    band = scale * (rng.standard_normal((2 * trunc + 1, 2, 2))
                    + 1j * rng.standard_normal((2 * trunc + 1, 2, 2)))
    decay = 0.5 ** np.abs(np.arange(-trunc, trunc + 1))
    band *= decay[:, None, None]
    band[~allowed_mask(trunc)] = 0.0
    return make_loop({k: band[k + trunc] for k in range(-trunc, trunc + 1)}, trunc)


def test_make_loop_identity():
    g = make_loop({0: I2}, 4)
    assert loop_distance(g, identity_loop(4)) == 0.0


def test_make_loop_accepts_odd_offdiagonal():
    g = make_loop({-1: A}, 4)
    assert np.allclose(g.coefficient(-1), A)
    assert g.coefficient(0).max() == 0.0


def test_make_loop_rejects_parity_violation():
    with pytest.raises(TwistViolation):
        make_loop({0: A}, 4)


def test_mul_identity():
    rng = np.random.default_rng(0)
    g = random_loop(rng)
    assert loop_distance(mul(identity_loop(g.trunc), g), g) < 1e-15


def test_mul_shift_squares():
    g = make_loop({-1: A}, 4)
    gg = mul(g, g)
    assert np.allclose(gg.coefficient(-2), I2)
    assert abs(gg.coeffs).sum() == pytest.approx(2.0)


def test_mul_matches_pointwise_product():
    # Oracle: evaluation is a homomorphism up to the truncated tail.
    rng = np.random.default_rng(1)
    a = random_loop(rng, trunc=8)
    b = random_loop(rng, trunc=8)
    ab = mul(a, b)
    tail = 2.0 * a.norm() * b.norm() * (2 * 8 + 1) * 0.5 ** 8
    for lam in circle_samples(64):
        direct = eval_loop(a, lam) @ eval_loop(b, lam)
        assert np.max(np.abs(eval_loop(ab, lam) - direct)) < tail


def test_inverse_identity_and_exp():
    assert loop_distance(inverse(identity_loop(6)), identity_loop(6)) < 1e-14
    g = exp_axis({-1: 0.3 + 0.1j}, 12)
    ginv = exp_axis({-1: -(0.3 + 0.1j)}, 12)
    assert loop_distance(inverse(g), ginv) < 1e-12


def test_inverse_of_unitary_equals_star():
    # exp(xA) with star(x) = -x is unitary-valued on the circle.
    c = 0.4 - 0.2j
    g = exp_axis({-1: c, 1: -np.conj(c)}, 16)
    assert unitarity_defect(g) < 1e-12
    assert loop_distance(inverse(g), star(g)) < 1e-11


def test_inverse_rejects_singular():
    g = make_loop({1: np.array([[0, 1], [0, 0]])}, 4)
    with pytest.raises(SingularLoop):
        inverse(g)


def test_star_involution_and_shift():
    g = make_loop({-1: A}, 4)
    assert loop_distance(star(g), make_loop({1: A}, 4)) == 0.0
    rng = np.random.default_rng(2)
    h = random_loop(rng)
    assert loop_distance(star(star(h)), h) == 0.0


def test_star_antihomomorphism():
    rng = np.random.default_rng(3)
    a = random_loop(rng, trunc=5)
    b = random_loop(rng, trunc=5)
    lhs = star(mul(a, b))
    rhs = mul(star(b), star(a))
    # Identical truncation windows make this exact up to rounding.
    assert loop_distance(lhs, rhs) < 1e-13


def test_eval_examples():
    g = make_loop({-1: A}, 4)
    assert np.allclose(eval_loop(g, CirclePoint(0.0)), A)
    assert np.allclose(eval_loop(g, 1j), -1j * A)
    assert np.allclose(eval_loop(identity_loop(4), CirclePoint(2.1)), I2)


def test_exp_axis_zero_and_closed_form():
    assert loop_distance(exp_axis({}, 8), identity_loop(8)) == 0.0
    g = exp_axis({-1: 1.0}, 20)
    val = eval_loop(g, 1.0)
    expected = np.array([[np.cosh(1.0), np.sinh(1.0)],
                         [np.sinh(1.0), np.cosh(1.0)]])
    assert np.max(np.abs(val - expected)) < 1e-14


def test_exp_axis_rejects_even_degree():
    with pytest.raises(TwistViolation):
        exp_axis({0: 1.0}, 8)


def test_exp_axis_matches_pointwise_fft_oracle():
    # Oracle: exponentiate pointwise on 256 circle samples, FFT back.
    trunc = 24
    for z in (2.0, -1.1 + 1.4j, 0.5j):
        g = exp_axis({-1: z, 1: -np.conj(z)}, trunc)
        count = 256
        lams = circle_samples(count)
        xs = z / lams - np.conj(z) * lams
        vals = (np.cosh(xs)[:, None, None] * I2[None]
                + np.sinh(xs)[:, None, None] * A[None])
        band = band_from_samples(vals, trunc)
        assert np.max(np.abs(band - g.coeffs)) < 1e-12


def test_theta_derivative_examples():
    assert theta_derivative(identity_loop(4)).norm() == 0.0
    g = make_loop({-1: A}, 4)
    assert loop_distance(theta_derivative(g), make_loop({-1: -1j * A}, 4)) == 0.0


def test_theta_derivative_matches_finite_difference():
    rng = np.random.default_rng(4)
    g = random_loop(rng, trunc=6)
    dg = theta_derivative(g)
    h = 1e-4
    for theta in (0.3, 1.7, 4.0):
        fd = (eval_loop(g, CirclePoint(theta + h))
              - eval_loop(g, CirclePoint(theta - h))) / (2 * h)
        assert np.max(np.abs(fd - eval_loop(dg, CirclePoint(theta)))) < 1e-6


def test_theta_derivative_product_rule():
    rng = np.random.default_rng(5)
    a = random_loop(rng, trunc=5)
    b = random_loop(rng, trunc=5)
    lhs = theta_derivative(mul(a, b))
    rhs_band = (mul(theta_derivative(a), b).coeffs
                + mul(a, theta_derivative(b)).coeffs)
    # Truncation drops the same outer degrees on both sides.
    assert np.max(np.abs(lhs.coeffs - rhs_band)) < 1e-12


def test_eval_on_samples_round_trip():
    rng = np.random.default_rng(6)
    g = random_loop(rng, trunc=7)
    vals = eval_on_samples(g.coeffs, 64)
    back = band_from_samples(vals, 7)
    assert np.max(np.abs(back - g.coeffs)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=-5, max_value=5), st.integers(min_value=-5, max_value=5))
def test_parity_closure_under_mul(i, j):
    rng = np.random.default_rng(abs(100 * i + j))
    a = random_loop(rng, trunc=5)
    b = random_loop(rng, trunc=5)
    for g in (mul(a, b), star(a), theta_derivative(b)):
        assert np.all(g.coeffs[~allowed_mask(g.trunc)] == 0.0)

import numpy as np
import pytest

from loopsurf.errors import OutsideBigCell
from loopsurf.factorization import (
    BirkhoffPair,
    birkhoff,
    iwasawa,
    positive_part_coefficient,
)
from loopsurf.loops import (
    allowed_mask,
    exp_axis,
    identity_loop,
    loop_distance,
    make_loop,
    mul,
    star,
    unitarity_defect,
    circle_samples,
    eval_loop,
)


def cylinder_minus(z, trunc=24):
    return exp_axis({-1: z}, trunc)


def cylinder_unitary(z, trunc=24):
    return exp_axis({-1: z, 1: -np.conj(z)}, trunc)


def cylinder_plus(z, trunc=24):
    return exp_axis({1: np.conj(z)}, trunc)


def random_plus_loop(rng, trunc=12, scale=0.3):
    band = {}
    for k in range(1, 7):
        m = scale * 0.5 ** k * (rng.standard_normal((2, 2))
                                + 1j * rng.standard_normal((2, 2)))
        if k % 2 == 0:
            m[0, 1] = m[1, 0] = 0.0
        else:
            m[0, 0] = m[1, 1] = 0.0
        band[k] = m
    band[0] = np.eye(2)
    return make_loop(band, trunc)


def test_iwasawa_identity():
    pair = iwasawa(identity_loop(8))
    assert loop_distance(pair.unitary_factor, identity_loop(8)) < 1e-12
    assert loop_distance(pair.plus_factor, identity_loop(8)) < 1e-12


def test_iwasawa_constant_unitary():
    u = make_loop({0: np.diag([np.exp(0.7j), np.exp(-0.7j)])}, 8)
    pair = iwasawa(u)
    assert loop_distance(pair.unitary_factor, u) < 1e-12
    assert loop_distance(pair.plus_factor, identity_loop(8)) < 1e-12


@pytest.mark.parametrize("z", [0.3, 0.7 + 0.2j, 1.5j])
def test_iwasawa_cylinder_closed_form(z):
    # Closed form through A^2 = I: exp(z A / lambda) = F * plus with
    # F = exp((z/lambda - conj(z) lambda) A), plus = exp(conj(z) lambda A).
    trunc = 24
    pair = iwasawa(cylinder_minus(z, trunc))
    assert loop_distance(pair.unitary_factor, cylinder_unitary(z, trunc)) < 1e-8
    assert loop_distance(pair.plus_factor, cylinder_plus(z, trunc)) < 1e-8


def test_iwasawa_round_trip_and_uniqueness():
    rng = np.random.default_rng(7)
    unitary = cylinder_unitary(0.4 - 0.3j, 12)
    plus = random_plus_loop(rng, 12)
    g = mul(unitary, plus)
    pair = iwasawa(g)
    assert loop_distance(mul(pair.unitary_factor, pair.plus_factor), g) < 1e-8
    assert unitarity_defect(pair.unitary_factor) < 1e-8
    pair2 = iwasawa(g)
    assert loop_distance(pair.unitary_factor, pair2.unitary_factor) == 0.0


def test_iwasawa_normalization_and_positive_relation():
    rng = np.random.default_rng(8)
    g = mul(cylinder_unitary(0.2 + 0.5j, 12), random_plus_loop(rng, 12))
    pair = iwasawa(g)
    p0 = positive_part_coefficient(pair)
    # twist parity makes the lambda^0 coefficient diagonal; B demands
    # real positive diagonal entries
    assert abs(p0[0, 1]) < 1e-10 and abs(p0[1, 0]) < 1e-10
    assert p0[0, 0].real > 0 and p0[1, 1].real > 0
    assert abs(p0[0, 0].imag) < 1e-10
    lhs = mul(star(pair.plus_factor), pair.plus_factor)
    rhs = mul(star(g), g)
    assert loop_distance(lhs, rhs) < 1e-7


def test_iwasawa_factors_keep_parity_and_det():
    g = cylinder_minus(1.1 + 0.4j, 16)
    pair = iwasawa(g)
    for fac in (pair.unitary_factor, pair.plus_factor):
        assert np.all(fac.coeffs[~allowed_mask(fac.trunc)] == 0.0)
        for lam in circle_samples(16):
            assert abs(np.linalg.det(eval_loop(fac, lam)) - 1.0) < 1e-7


def test_birkhoff_identity_and_plus_only():
    pair = birkhoff(identity_loop(8))
    assert loop_distance(pair.minus_factor, identity_loop(8)) < 1e-13
    rng = np.random.default_rng(9)
    plus = random_plus_loop(rng, 10)
    pair = birkhoff(plus)
    assert isinstance(pair, BirkhoffPair)
    assert loop_distance(pair.minus_factor, identity_loop(10)) < 1e-13
    assert loop_distance(pair.plus_factor, plus) < 1e-13


def test_birkhoff_round_trip():
    rng = np.random.default_rng(10)
    minus = cylinder_minus(0.8 - 0.2j, 16)
    plus = random_plus_loop(rng, 16)
    g = mul(minus, plus)
    pair = birkhoff(g)
    assert loop_distance(pair.minus_factor, minus) < 1e-9
    assert loop_distance(pair.plus_factor, plus) < 1e-9
    assert loop_distance(mul(pair.minus_factor, pair.plus_factor), g) < 1e-9
    assert np.allclose(pair.minus_factor.coefficient(0), np.eye(2))


def test_birkhoff_outside_big_cell():
    # The antidiagonal loop sits off the big cell; its splitting system is
    # exactly singular.
    w = make_loop({-1: np.array([[0.0, 1.0], [0.0, 0.0]]),
                   1: np.array([[0.0, 0.0], [-1.0, 0.0]])}, 8)
    assert abs(np.linalg.det(eval_loop(w, 1.0)) - 1.0) < 1e-14
    with pytest.raises(OutsideBigCell):
        birkhoff(w)

import math

import mpmath
import numpy as np
import pytest
from scipy import special as sp
from scipy.stats import norm

from charquantile import charfns, moments
from charquantile.errors import DivergenceError

CLOSED = [
    charfns.make_gaussian(0.0),
    charfns.make_student(3),
    charfns.make_student(7.5),
    charfns.make_stable_symmetric(0.9),
    charfns.make_stable_symmetric(1.5),
    charfns.make_stable_symmetric(2.0),
    charfns.make_sgh(-0.5, 1.0, 1.0),
    charfns.make_sgh(1.0, 2.0, 0.5),
]


@pytest.mark.parametrize("cf", CLOSED, ids=lambda c: f"{c.name}{c.params}")
def test_quadrature_matches_closed_moments(cf):
    for k in range(6 if math.isinf(cf.moment_order) else min(cf.moment_order // 2, 5) + 1):
        assert moments.even_moment(cf, k) == pytest.approx(cf.closed_moments(k), rel=1e-10)


def test_stable_closed_moments_by_gamma():
    # E_k = Gamma((2k+1)/alpha) / (alpha pi), independent of the package's helper
    for a in (0.9, 1.5, 2.0):
        cf = charfns.make_stable_symmetric(a)
        for k in range(6):
            assert cf.closed_moments(k) == pytest.approx(math.gamma((2 * k + 1) / a) / (a * math.pi), rel=1e-14)


def test_gaussian_examples():
    g = charfns.make_gaussian(0.0)
    assert moments.even_moment(g, 1) == pytest.approx(math.sqrt(2) * math.gamma(1.5) / math.pi, rel=1e-12)
    assert moments.even_moment(g, 1) == pytest.approx(0.3989422804, abs=1e-10)
    assert moments.derivative_at_zero(g, 2) == pytest.approx(-0.3989422804, abs=1e-10)
    assert moments.derivative_at_zero(g, 3) == 0.0
    shifted = charfns.make_gaussian(1.0)
    assert moments.derivative_at_zero(shifted, 0) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-12)
    assert moments.derivative_at_zero(shifted, 0) == pytest.approx(0.2419707245, abs=1e-10)
    # f'(0) of N(1, 1) is x e^{-x^2/2}/sqrt(2 pi) at x = 1
    assert moments.derivative_at_zero(shifted, 1) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-10)


def test_stable_three_halves_example():
    e0 = moments.even_moment(charfns.make_stable_symmetric(1.5), 0)
    assert e0 == pytest.approx(2 / 3 * math.gamma(2 / 3) / math.pi, rel=1e-12)
    assert 1 / (2 * e0) == pytest.approx(1.7400216197, abs=1e-10)


def test_divergent_moment_message():
    vg = charfns.make_variance_gamma(1.0)
    with pytest.raises(DivergenceError, match="moment does not exist"):
        moments.even_moment(vg, 2)
    with pytest.raises(DivergenceError):
        moments.build_moment_vector(vg, 4)
    assert moments.derivative_at_zero(vg, 0) == pytest.approx(moments.density(vg, 0.0), rel=1e-8)


def test_moment_vector_provenance():
    mv = moments.build_moment_vector(charfns.make_gaussian(0.0), 6)
    assert set(mv.provenance) <= {"closed-form", "symmetry"}
    assert all(mv.dvals[k] == 0 for k in (1, 3, 5))
    mv = moments.build_moment_vector(charfns.make_levy_area_p(1.0), 6)
    assert set(p for p in mv.provenance if p != "symmetry") == {"quadrature"}
    assert mv.dvals[0] > 0


def test_moment_vector_quadrature_vs_closed():
    cf = charfns.make_stable_symmetric(1.5)
    closed = moments.build_moment_vector(cf, 6)
    quad = moments.build_moment_vector(cf, 6, prefer_closed=False)
    for k in range(0, 7, 2):
        assert quad.dvals[k] == pytest.approx(closed.dvals[k], rel=1e-10)
        assert closed.evals()[k // 2] == pytest.approx(cf.closed_moments(k // 2), rel=1e-15)
    assert closed.bvals()[0] == -closed.dvals[1]


def test_extended_precision_moments():
    cf = charfns.make_stable_symmetric(1.5)
    with mpmath.workdps(40):
        for k in (0, 4, 10):
            got = moments.derivative_at_zero_mp(cf, k, 40)
            j = k // 2
            ref = (-1) ** j * mpmath.gamma(mpmath.mpf(2 * j + 1) / mpmath.mpf(1.5)) / (mpmath.mpf(1.5) * mpmath.pi)
            assert abs(got / ref - 1) < mpmath.mpf(10) ** -30


def test_extended_precision_asymmetric():
    # f^{(k)}(0) of N(1, 1): He-polynomial closed form, sign (-1)^k He_k(-1) phi(-1)
    cf = charfns.make_gaussian(1.0)
    with mpmath.workdps(30):
        for k in range(6):
            got = moments.derivative_at_zero_mp(cf, k, 30)
            ref = (-1) ** k * sp.eval_hermitenorm(k, -1.0) * math.exp(-0.5) / math.sqrt(2 * math.pi)
            assert float(got) == pytest.approx(ref, rel=1e-13, abs=1e-15)


def test_gil_pelaez_examples():
    cauchy = charfns.make_stable_symmetric(1.0)
    g = charfns.make_gaussian(0.0)
    assert moments.gil_pelaez_cdf(cauchy, 1.0) == pytest.approx(0.75, abs=1e-12)
    assert moments.gil_pelaez_cdf(g, 0.0) == 0.5
    assert moments.gil_pelaez_cdf(g, 1.0) == pytest.approx(0.5 * (1 + math.erf(1 / math.sqrt(2))), abs=1e-12)
    assert moments.gil_pelaez_cdf(g, 1.0) == pytest.approx(0.8413447461, abs=1e-10)


@pytest.mark.parametrize("cf", [charfns.make_stable_symmetric(1.0), charfns.make_stable_symmetric(1.5),
                                charfns.make_student(3), charfns.make_gaussian(0.0)], ids=lambda c: c.name)
def test_gil_pelaez_symmetry_and_monotone(cf):
    xs = np.linspace(-6, 6, 49)
    F = moments.gil_pelaez_cdf(cf, xs)
    assert np.all(np.diff(F) > 0)
    assert np.max(np.abs(F + F[::-1] - 1)) < 1e-10


def test_gil_pelaez_far_tail_cauchy():
    cauchy = charfns.make_stable_symmetric(1.0)
    for x in (10.0, 300.0, 1e4):
        assert moments.gil_pelaez_cdf(cauchy, x) == pytest.approx(0.5 + math.atan(x) / math.pi, abs=1e-11)


def test_gil_pelaez_asymmetric_gaussian():
    cf = charfns.make_gaussian(1.0)
    xs = np.array([-2.0, 0.0, 0.7, 3.0])
    assert np.allclose(moments.gil_pelaez_cdf(cf, xs), norm.cdf(xs - 1.0), atol=1e-11, rtol=0)


def test_zero_location():
    assert moments.zero_location(charfns.make_stable_symmetric(1.5)) == 0.5
    assert moments.zero_location(charfns.make_gaussian(1.0)) == pytest.approx(norm.cdf(-1.0), abs=1e-10)
    assert moments.zero_location(charfns.make_gaussian(1.0)) == pytest.approx(0.1586552539, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.75, 1.5])
@pytest.mark.parametrize("beta", [-0.5, 0.5, 1.0])
def test_zero_location_skewed_stable(alpha, beta):
    cf = charfns.make_stable(alpha, beta)
    ref = 0.5 - math.atan(beta * math.tan(math.pi * alpha / 2)) / (math.pi * alpha)
    assert moments.zero_location(cf) == pytest.approx(ref, abs=1e-8)


def test_density_matches_closed_forms():
    assert moments.density(charfns.make_stable_symmetric(1.0), 2.0) == pytest.approx(1 / (5 * math.pi), rel=1e-10)
    assert moments.density(charfns.make_gaussian(1.0), 0.3) == pytest.approx(norm.pdf(-0.7), rel=1e-10)

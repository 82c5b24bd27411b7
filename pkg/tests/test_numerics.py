import math

import numpy as np
import pytest

from qiforce.numerics import (
    NonFiniteObjectiveError,
    QuadratureSpec,
    RngStream,
    integrate,
    minimize,
    poisson_draw,
    poisson_draws,
)


def test_integrate_constant_is_exact():
    assert integrate(lambda x: np.ones_like(x), QuadratureSpec(0.0, 1.0, 3)) == 1.0


def test_integrate_gaussian():
    val = integrate(lambda x: np.exp(-(x**2)), QuadratureSpec(-10, 10, 2001))
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_integrate_refinement_reduces_error():
    f = lambda x: np.sin(x) ** 2 * np.exp(x)
    exact = (math.exp(2) * (5 - 2 * math.sin(4) - math.cos(4)) - 5 + 2 * math.sin(0) + math.cos(0)) / 10
    errors = [abs(integrate(f, QuadratureSpec(0.0, 2.0, n)) - exact) for n in (11, 21, 41)]
    assert errors[0] > errors[1] > errors[2]


def test_integrate_reports_bad_node():
    with pytest.raises(FloatingPointError, match="node 2"), np.errstate(divide="ignore"):
        integrate(lambda x: 1.0 / (x - 0.5), QuadratureSpec(0.0, 1.0, 5))


@pytest.mark.parametrize("nodes", [2, 4, 100])
def test_quadrature_spec_needs_odd_nodes(nodes):
    with pytest.raises(ValueError):
        QuadratureSpec(0.0, 1.0, nodes)


def test_quadrature_spec_bounds():
    with pytest.raises(ValueError):
        QuadratureSpec(1.0, 1.0, 5)


def test_poisson_zero_mean():
    s = RngStream(3)
    assert all(poisson_draw(s, 0.0, i) == 0 for i in range(50))


def test_poisson_negative_mean_rejected():
    with pytest.raises(ValueError):
        poisson_draw(RngStream(0), -1.0)
    with pytest.raises(ValueError):
        poisson_draw(RngStream(0), math.inf)


def test_poisson_moments_large_mean():
    d = poisson_draws(RngStream(11), [312.7] * 100_000)
    assert d.mean() == pytest.approx(312.7, rel=0.01)
    assert d.var() == pytest.approx(312.7, rel=0.03)


@pytest.mark.parametrize("mean", [0.3, 2.5, 9.9, 10.0, 40.0])
def test_poisson_moments_across_methods(mean):
    d = poisson_draws(RngStream(5, 2), [mean] * 20_000)
    se = math.sqrt(mean / d.size)
    assert abs(d.mean() - mean) < 5 * se
    assert d.var() == pytest.approx(mean, rel=0.06)


def test_poisson_is_reproducible_and_order_free():
    s = RngStream(42, 1)
    forward = [poisson_draw(s, 50.0, i) for i in range(200)]
    backward = [poisson_draw(s, 50.0, i) for i in reversed(range(200))][::-1]
    assert forward == backward
    assert forward == list(poisson_draws(RngStream(42, 1), [50.0] * 200))
    assert forward != list(poisson_draws(RngStream(42, 2), [50.0] * 200))


def test_minimize_quadratic():
    r = minimize(lambda x: (x[0] - 3.0) ** 2, [0.0])
    assert r.converged
    assert r.params[0] == pytest.approx(3.0, abs=1e-8)


def test_minimize_rosenbrock():
    r = minimize(lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2, [-1.2, 1.0])
    np.testing.assert_allclose(r.params, [1.0, 1.0], atol=1e-4)
    assert np.all(np.diff(r.trace) <= 0)


def test_minimize_respects_bounds():
    r = minimize(lambda x: x[0] ** 2, [1.5], bounds=[(1.0, 2.0)])
    assert r.params[0] == pytest.approx(1.0, abs=1e-12)


def test_minimize_is_deterministic():
    f = lambda x: (x[0] - 1) ** 4 + (x[1] + 2) ** 2 + x[0] * x[1]
    a = minimize(f, [0.3, 0.3])
    b = minimize(f, [0.3, 0.3])
    assert np.array_equal(a.params, b.params) and a.trace == b.trace


def test_minimize_non_finite_objective():
    with pytest.raises(NonFiniteObjectiveError) as info:
        minimize(lambda x: math.log(x[0]) if x[0] > 0 else math.nan, [0.5])
    assert info.value.params.shape == (1,)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qiforce.numerics import QuadratureSpec, integrate
from qiforce.wavefunction import (
    DegenerateStateError,
    GaussianTerm,
    MomentumGrid,
    TermSum,
    evaluate,
    gaussian,
    mean_momentum,
    momentum_variance,
    norm_squared,
    overlap,
    sample,
    two_port_states,
)

from conftest import DELTA, SIGMA

# frozen from direct arithmetic and 8001-node quadrature on [-40, 40]
PSI1_AT_ZERO = 0.3472650148528915
PSI1_NORM_FACTOR = 0.12130083834764749  # norm / (sqrt(pi) sigma)
PSI1_MEAN = -1.879176487016802


def psi1_terms(a, b):
    return TermSum([GaussianTerm(a, 0.0, SIGMA), GaussianTerm(-b, DELTA, SIGMA)])


def test_unit_gaussian_peak():
    assert evaluate(gaussian(0.0, 1.0), 0.0) == 1.0


def test_one_sigma_point():
    assert evaluate(gaussian(0.0, SIGMA), SIGMA).real == pytest.approx(math.exp(-0.5), rel=1e-15)


def test_psi1_value_at_zero(reference_ab):
    a, b = reference_ab
    wf = psi1_terms(a, b)
    assert evaluate(wf, 0.0).real == pytest.approx(PSI1_AT_ZERO, rel=1e-14)
    sampled = sample(wf, MomentumGrid(-10, 10, 2001))
    assert sampled.amplitudes[1000].real == pytest.approx(PSI1_AT_ZERO, rel=1e-14)


def test_empty_sum_is_zero_everywhere():
    p = np.linspace(-5, 5, 11)
    assert np.all(evaluate(TermSum(), p) == 0)
    assert np.all(sample(TermSum(), MomentumGrid(-1, 1, 7)).amplitudes == 0)


def test_sample_matches_evaluate(reference_ab):
    wf = psi1_terms(*reference_ab)
    grid = MomentumGrid(-20, 20, 401)
    s = sample(wf, grid)
    np.testing.assert_array_equal(s.amplitudes, [evaluate(wf, p) for p in grid.points])


def test_sampled_unit_gaussian_norm():
    s = sample(gaussian(0.0, 1.0), MomentumGrid(-30, 30, 4001))
    assert s.norm_squared() == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_norm_single_term():
    assert norm_squared(gaussian(0.0, 1.0)) == pytest.approx(math.sqrt(math.pi), rel=1e-15)


def test_norm_psi1(reference_ab):
    a, b = reference_ab
    g = math.exp(-DELTA**2 / (4 * SIGMA**2))
    closed = math.sqrt(math.pi) * SIGMA * (a * a + b * b - 2 * a * b * g)
    assert norm_squared(psi1_terms(a, b)) == pytest.approx(closed, rel=1e-13)
    assert norm_squared(psi1_terms(a, b)) / (math.sqrt(math.pi) * SIGMA) == pytest.approx(PSI1_NORM_FACTOR, rel=1e-10)


def test_norm_orthogonal_phases():
    wf = TermSum([GaussianTerm(1.0, 0.3, 2.0), GaussianTerm(1j, 0.3, 2.0)])
    assert norm_squared(wf) == pytest.approx(2 * math.sqrt(math.pi) * 2.0, rel=1e-14)


def test_norm_empty_raises():
    with pytest.raises(DegenerateStateError):
        norm_squared(TermSum())


def test_mean_symmetric_and_translated():
    assert mean_momentum(gaussian(0.0, SIGMA)) == 0.0
    assert mean_momentum(gaussian(DELTA, SIGMA)) == pytest.approx(DELTA, rel=1e-15)


def test_psi1_mean_is_negative(reference_ab):
    a, b = reference_ab
    g = math.exp(-DELTA**2 / (4 * SIGMA**2))
    closed = DELTA * (b * b - a * b * g) / (a * a + b * b - 2 * a * b * g)
    m = mean_momentum(psi1_terms(a, b))
    assert m == pytest.approx(closed, rel=1e-13)
    assert m == pytest.approx(PSI1_MEAN, rel=1e-8)
    assert m < 0


def test_mean_of_cancelled_state_raises():
    wf = TermSum([GaussianTerm(1.0, 1.0, 2.0), GaussianTerm(-1.0, 1.0, 2.0)])
    with pytest.raises(DegenerateStateError):
        mean_momentum(wf)


def test_overlap_cases():
    g = gaussian(0.0, SIGMA)
    assert overlap(g, g) == pytest.approx(math.sqrt(math.pi) * SIGMA, rel=1e-15)
    shifted = gaussian(DELTA, SIGMA)
    expected = math.sqrt(math.pi) * SIGMA * math.exp(-DELTA**2 / (4 * SIGMA**2))
    assert overlap(g, shifted) == pytest.approx(expected, rel=1e-14)
    # frozen 8001-node quadrature of the same product
    assert overlap(g, shifted).real == pytest.approx(7.756406749486413, rel=1e-10)
    assert overlap(g, TermSum()) == 0


def test_overlap_is_conjugate_linear_in_first_argument():
    f = TermSum([GaussianTerm(1 + 2j, 0.5, 1.3)])
    g = TermSum([GaussianTerm(0.7 - 1j, -0.2, 2.1)])
    assert overlap(f.scaled(1j), g) == pytest.approx(-1j * overlap(f, g), rel=1e-14)
    assert overlap(g, f) == pytest.approx(np.conj(overlap(f, g)), rel=1e-14)


def test_variance_of_single_gaussian():
    # |psi|^2 has standard deviation sigma / sqrt(2)
    assert momentum_variance(gaussian(1.0, 3.0)) == pytest.approx(4.5, rel=1e-13)


def test_two_port_states_add_to_classical(reference_ab):
    a, b = reference_ab
    c, d = two_port_states(a, b, SIGMA, DELTA)
    nc, nd = norm_squared(c), norm_squared(d)
    weighted = (nc * mean_momentum(c) + nd * mean_momentum(d)) / (nc + nd)
    assert weighted == pytest.approx(DELTA * b * b / (a * a + b * b), rel=1e-12)


def test_invalid_widths_and_grids():
    with pytest.raises(ValueError):
        GaussianTerm(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        MomentumGrid(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        MomentumGrid(0.0, 1.0, 1)


# -- properties against independent quadrature ------------------------------

terms = st.builds(
    GaussianTerm,
    coefficient=st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False).filter(
        lambda c: abs(c) > 1e-3
    ),
    center=st.floats(-10, 10),
    width_sigma=st.floats(0.5, 10),
)
term_sums = st.lists(terms, min_size=1, max_size=5).map(TermSum)


def quad_grid(*wfs):
    mu = max(abs(t.center) for wf in wfs for t in wf.terms)
    s = max(t.width_sigma for wf in wfs for t in wf.terms)
    half = mu + 10 * s
    return MomentumGrid(-half, half, 4001)


def scale(wf):
    # magnitude of |psi|^2 without cancellations, used as the relative reference
    return float(np.sum(np.abs(wf.coefficients) ** 2 * np.sqrt(np.pi) * wf.widths))


@given(term_sums)
def test_norm_matches_trapezoid(wf):
    s = sample(wf, quad_grid(wf))
    assert abs(norm_squared(wf) - s.norm_squared()) <= 1e-8 * scale(wf)
    assert norm_squared(wf) >= 0


@given(term_sums)
def test_mean_matches_trapezoid(wf):
    n = norm_squared(wf)
    if n < 1e-3 * scale(wf):
        return  # heavy cancellation; relative comparison meaningless
    s = sample(wf, quad_grid(wf))
    m = mean_momentum(wf)
    ref = max(abs(m), max(t.width_sigma for t in wf.terms))
    assert abs(m - s.mean_momentum()) <= 1e-8 * ref


@given(term_sums, term_sums)
def test_overlap_matches_trapezoid(f, g):
    grid = quad_grid(f, g)
    q = sample(f, grid).overlap(sample(g, grid))
    ref = math.sqrt(scale(f) * scale(g))
    assert abs(overlap(f, g) - q) <= 1e-8 * ref


@given(term_sums)
def test_simpson_agrees_with_closed_form_norm(wf):
    grid = quad_grid(wf)
    val = integrate(lambda p: np.abs(evaluate(wf, p)) ** 2, QuadratureSpec(grid.p_min, grid.p_max, 4001))
    assert abs(val - norm_squared(wf)) <= 1e-8 * scale(wf)


@given(term_sums, st.floats(-20, 20))
def test_mean_is_translation_covariant(wf, shift):
    if norm_squared(wf) < 1e-3 * scale(wf):
        return
    m0 = mean_momentum(wf)
    m1 = mean_momentum(wf.shifted(shift))
    assert m1 - m0 == pytest.approx(shift, abs=1e-12 * max(1.0, abs(m0), abs(shift)))


@given(term_sums, st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_mean_ignores_global_factor(wf, factor):
    if norm_squared(wf) < 1e-3 * scale(wf):
        return
    m0 = mean_momentum(wf)
    assert mean_momentum(wf.scaled(factor)) == pytest.approx(m0, abs=1e-12 * max(1.0, abs(m0)))

"""One-dimensional momentum wavefunctions built from shifted Gaussians.

A wavefunction is a :class:`TermSum`, i.e. a finite sum

    psi(p) = sum_i c_i * exp(-(p - mu_i)**2 / (2 * sigma_i**2))

Every quadratic functional we need (norm, first moment, overlap) has a
closed form for such sums, so nothing here discretizes unless asked to via
:func:`sample`. Momenta are in units of hbar/mm throughout. Sums are kept
non-normalized; statistics divide by the norm when they need it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DegenerateStateError(ValueError):
    """A statistic was requested for a state with zero (or no) norm."""


@dataclass(frozen=True)
class GaussianTerm:
    coefficient: complex
    center: float
    width_sigma: float

    def __post_init__(self):
        if not self.width_sigma > 0:
            raise ValueError(f"width_sigma must be > 0, got {self.width_sigma!r}")
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "width_sigma", float(self.width_sigma))

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        return self.coefficient * np.exp(-((p - self.center) ** 2) / (2.0 * self.width_sigma**2))

    def scaled(self, factor: complex) -> "GaussianTerm":
        return GaussianTerm(self.coefficient * factor, self.center, self.width_sigma)

    def shifted(self, offset: float) -> "GaussianTerm":
        return GaussianTerm(self.coefficient, self.center + offset, self.width_sigma)


@dataclass(frozen=True)
class TermSum:
    terms: tuple[GaussianTerm, ...] = ()

    def __init__(self, terms: Iterable[GaussianTerm] = ()):
        object.__setattr__(self, "terms", tuple(terms))

    def __call__(self, p):
        return evaluate(self, p)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "TermSum") -> "TermSum":
        return TermSum(self.terms + other.terms)

    def scaled(self, factor: complex) -> "TermSum":
        return TermSum(t.scaled(factor) for t in self.terms)

    def shifted(self, offset: float) -> "TermSum":
        return TermSum(t.shifted(offset) for t in self.terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms], dtype=complex)

    @property
    def centers(self) -> np.ndarray:
        return np.array([t.center for t in self.terms], dtype=float)

    @property
    def widths(self) -> np.ndarray:
        return np.array([t.width_sigma for t in self.terms], dtype=float)

    def simplified(self, atol: float = 0.0) -> "TermSum":
        """Merge terms sharing (center, width) and drop ones with ``|c| <= atol``."""
        merged: dict[tuple[float, float], complex] = {}
        for t in self.terms:
            key = (t.center, t.width_sigma)
            merged[key] = merged.get(key, 0j) + t.coefficient
        return TermSum(
            GaussianTerm(c, mu, s) for (mu, s), c in merged.items() if abs(c) > atol
        )


def gaussian(center: float, sigma: float, coefficient: complex = 1.0) -> TermSum:
    return TermSum([GaussianTerm(coefficient, center, sigma)])


@dataclass(frozen=True)
class MomentumGrid:
    p_min: float
    p_max: float
    n_points: int

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ValueError(f"need p_min < p_max, got [{self.p_min}, {self.p_max}]")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.p_max - self.p_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_points)


@dataclass(frozen=True)
class SampledWaveFunction:
    grid: MomentumGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_squared(self) -> float:
        return float(np.trapezoid(self.density, dx=self.grid.spacing))

    def mean_momentum(self) -> float:
        norm = self.norm_squared()
        if norm <= 0.0:
            raise DegenerateStateError("sampled wavefunction has zero norm")
        return float(np.trapezoid(self.grid.points * self.density, dx=self.grid.spacing)) / norm

    def overlap(self, other: "SampledWaveFunction") -> complex:
        if other.grid != self.grid:
            raise ValueError("overlap needs both wavefunctions on the same grid")
        return complex(np.trapezoid(np.conj(self.amplitudes) * other.amplitudes, dx=self.grid.spacing))


def evaluate(wf: TermSum, p):
    """Value of ``wf`` at momentum ``p`` (scalar or array)."""
    p_arr = np.asarray(p, dtype=float)
    out = np.zeros(p_arr.shape, dtype=complex)
    for t in wf.terms:
        out = out + t(p_arr)
    if out.ndim == 0:
        return complex(out)
    return out


def sample(wf: TermSum, grid: MomentumGrid) -> SampledWaveFunction:
    return SampledWaveFunction(grid, np.asarray(evaluate(wf, grid.points), dtype=complex))


def _pair_moments(wf1: TermSum, wf2: TermSum):
    """Pairwise zeroth and first moments of conj(term_i) * term_j.

    For Gaussians of widths s_i, s_j the product is a Gaussian with inverse
    variance ``alpha = 1/(2 s_i^2) + 1/(2 s_j^2)`` centred on the precision
    weighted mean ``m_ij``; its integral is
    ``sqrt(pi/alpha) * exp(-(mu_i - mu_j)^2 / (2 (s_i^2 + s_j^2)))``.
    """
    mu1, s1 = wf1.centers[:, None], wf1.widths[:, None]
    mu2, s2 = wf2.centers[None, :], wf2.widths[None, :]
    w1 = 1.0 / (2.0 * s1**2)
    w2 = 1.0 / (2.0 * s2**2)
    alpha = w1 + w2
    center = (w1 * mu1 + w2 * mu2) / alpha
    integral = np.sqrt(np.pi / alpha) * np.exp(-((mu1 - mu2) ** 2) / (2.0 * (s1**2 + s2**2)))
    weights = np.conj(wf1.coefficients)[:, None] * wf2.coefficients[None, :]
    return weights, integral, center


def overlap(wf1: TermSum, wf2: TermSum) -> complex:
    """Closed-form inner product <wf1|wf2> = integral of conj(wf1) * wf2."""
    if not wf1.terms or not wf2.terms:
        return 0j
    weights, integral, _ = _pair_moments(wf1, wf2)
    return complex(np.sum(weights * integral))


def norm_squared(wf: TermSum) -> float:
    if not wf.terms:
        raise DegenerateStateError("norm of an empty TermSum is undefined")
    weights, integral, _ = _pair_moments(wf, wf)
    return max(float(np.real(np.sum(weights * integral))), 0.0)


def _norm_scale(wf: TermSum) -> float:
    # size of the norm had there been no cancellation between terms
    return float(np.sum(np.abs(wf.coefficients) ** 2 * np.sqrt(np.pi) * wf.widths))


def is_degenerate(wf: TermSum, rtol: float = 1e-13) -> bool:
    if not wf.terms:
        return True
    return norm_squared(wf) <= rtol * _norm_scale(wf)


def first_moment(wf: TermSum) -> float:
    """Integral of p |wf(p)|^2, without normalization."""
    if not wf.terms:
        return 0.0
    weights, integral, center = _pair_moments(wf, wf)
    return float(np.real(np.sum(weights * integral * center)))


def mean_momentum(wf: TermSum) -> float:
    """Expectation value of p in the normalized version of ``wf``."""
    if is_degenerate(wf):
        raise DegenerateStateError("mean momentum of a zero-norm state is undefined")
    return first_moment(wf) / norm_squared(wf)


def momentum_variance(wf: TermSum) -> float:
    if is_degenerate(wf):
        raise DegenerateStateError("variance of a zero-norm state is undefined")
    weights, integral, center = _pair_moments(wf, wf)
    s1, s2 = wf.widths[:, None], wf.widths[None, :]
    alpha = 1.0 / (2.0 * s1**2) + 1.0 / (2.0 * s2**2)
    second = float(np.real(np.sum(weights * integral * (center**2 + 1.0 / (2.0 * alpha)))))
    mean = mean_momentum(wf)
    return second / norm_squared(wf) - mean**2


def two_port_states(
    a: float, b: float, sigma: float, delta: float
) -> tuple[TermSum, TermSum]:
    """Exit-port wavefunctions a*G(p) - b*G(p - delta) and a*G(p) + b*G(p - delta).

    ``G`` is a unit-height Gaussian of width ``sigma``; the first port is the
    one where the unshifted and shifted amplitudes interfere destructively.
    """
    g0 = GaussianTerm(a, 0.0, sigma)
    return (
        TermSum([g0, GaussianTerm(-b, delta, sigma)]),
        TermSum([g0, GaussianTerm(b, delta, sigma)]),
    )


def terms_from_arrays(
    coefficients: Sequence[complex], centers: Sequence[float], widths: Sequence[float]
) -> TermSum:
    return TermSum(GaussianTerm(c, m, s) for c, m, s in zip(coefficients, centers, widths))


def gaussian_norm(sigma: float) -> float:
    """Integral of exp(-p^2/sigma^2): the norm of a unit-height Gaussian."""
    return math.sqrt(math.pi) * sigma

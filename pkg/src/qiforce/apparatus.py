"""Laboratory geometry and the coincidence-count model.

Slit positions at the focal plane of a lens map to transverse momenta via
``p = 2*pi*x / (lambda*f)`` (in units of hbar, so ``p`` is a wavenumber).
Momenta are in hbar/mm, positions in mm, wavelengths in nm and focal
lengths in cm, matching how the apparatus is usually described.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate as _integrate

from .biphoton import phasor, sincos_deg
from .numerics import RngStream, poisson_draw
from .wavefunction import DegenerateStateError, GaussianTerm, TermSum, first_moment, norm_squared


class ModelInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class LensGeometry:
    wavelength: float = 810.0  # nm
    focal_length: float = 40.0  # cm

    def __post_init__(self):
        if not (self.wavelength > 0 and self.focal_length > 0):
            raise ValueError("wavelength and focal_length must be > 0")

    @property
    def momentum_per_mm(self) -> float:
        """hbar/mm of transverse momentum per mm of focal-plane displacement."""
        wavelength_mm = self.wavelength * 1e-6
        focal_mm = self.focal_length * 10.0
        return 2.0 * math.pi / (wavelength_mm * focal_mm)


@dataclass(frozen=True)
class ApertureConfig:
    kind: str
    size: float  # um, full width (slit) or diameter (pinhole)
    geometry: LensGeometry

    def __post_init__(self):
        if self.kind not in ("slit", "pinhole"):
            raise ValueError(f"aperture kind must be 'slit' or 'pinhole', got {self.kind!r}")
        if not self.size > 0:
            raise ValueError(f"aperture size must be > 0, got {self.size!r}")

    @property
    def momentum_width(self) -> float:
        return position_to_momentum(self.size * 1e-3, self.geometry)


@dataclass(frozen=True)
class CoincidenceModelParams:
    amplitude_A: float
    sigma: float
    delta: float
    visibility: float = 1.0

    def __post_init__(self):
        if not self.amplitude_A >= 0:
            raise ValueError(f"amplitude_A must be >= 0, got {self.amplitude_A!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility!r}")
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")

    def as_array(self, with_visibility: bool = True) -> np.ndarray:
        vals = [self.amplitude_A, self.sigma, self.delta]
        if with_visibility:
            vals.append(self.visibility)
        return np.array(vals, dtype=float)


PATH1_LENS = LensGeometry(wavelength=810.0, focal_length=40.0)
PATH2_LENS = LensGeometry(wavelength=810.0, focal_length=50.0)
SLIT = ApertureConfig("slit", 200.0, PATH1_LENS)
PINHOLE = ApertureConfig("pinhole", 400.0, PATH2_LENS)
REFERENCE_PARAMS = CoincidenceModelParams(amplitude_A=401.0, sigma=4.79, delta=2.88, visibility=1.0)
REFERENCE_THETA1 = 62.0
REFERENCE_THETA2 = (90.0, 0.0, 45.0)


@dataclass
class ScanRecord:
    slit_position_x: float | None
    momentum_p1: float
    model_rate: float
    observed_counts: int | None = None


def position_to_momentum(x, geom: LensGeometry):
    """Transverse momentum (hbar/mm) selected at focal-plane offset ``x`` (mm)."""
    if isinstance(x, np.ndarray):
        return x * geom.momentum_per_mm
    return float(x) * geom.momentum_per_mm


def momentum_to_position(p, geom: LensGeometry):
    if isinstance(p, np.ndarray):
        return p / geom.momentum_per_mm
    return float(p) / geom.momentum_per_mm


def coincidence_rate(theta1, theta2, p1, params: CoincidenceModelParams, p2=0.0, relative_phase=math.pi):
    """Expected coincidences with the photon-1 slit at momentum ``p1``.

    A * [V (a G0 - b Gd)^2 + (1 - V)(a^2 G0^2 + b^2 Gd^2)] with
    a = sin t1 sin t2, b = cos t1 cos t2 and G0, Gd unit Gaussians centred
    on 0 and delta (shifted by -p2). Expanding gives the usual
    a^2 G0^2 + b^2 Gd^2 - 2 V a b G0 Gd; the grouped form is non-negative
    term by term.

    ``relative_phase`` is the phase of |HH> relative to |VV> after the SLM;
    the default pi is the compensated setting. Other values replace
    ``-b Gd`` by ``exp(i*phase) b Gd`` inside the coherent part.
    """
    s1, c1 = sincos_deg(theta1)
    s2, c2 = sincos_deg(theta2)
    a = s1 * s2
    b = c1 * c2
    q = np.asarray(p1, dtype=float) + p2
    two_s2 = 2.0 * params.sigma**2
    g0 = np.exp(-(q**2) / two_s2)
    gd = np.exp(-((q - params.delta) ** 2) / two_s2)
    v = params.visibility
    z = phasor(relative_phase)
    coherent = (a * g0 - b * gd) ** 2 if z == -1 else np.abs(a * g0 + z * b * gd) ** 2
    rate = params.amplitude_A * (v * coherent + (1.0 - v) * ((a * g0) ** 2 + (b * gd) ** 2))
    if rate.ndim == 0:
        return float(rate)
    return rate


def _window_average(theta1, theta2, p1, half1, half2, params, nodes, relative_phase=math.pi):
    # Simpson mean over p1 +- half1 and p2 in +-half2; a zero half-width samples the point
    u = np.linspace(-1.0, 1.0, nodes)
    q1 = p1[:, None] + (half1 * u if half1 > 0 else np.zeros(1))[None, :]
    q2 = half2 * u if half2 > 0 else np.zeros(1)
    r = coincidence_rate(
        theta1, theta2, q1[:, :, None], params, p2=q2[None, None, :], relative_phase=relative_phase
    )
    if half2 > 0:
        r = _integrate.simpson(r, x=u, axis=-1) / 2.0
    else:
        r = r[..., 0]
    if half1 > 0:
        r = _integrate.simpson(r, x=u, axis=-1) / 2.0
    else:
        r = r[..., 0]
    return r


def windowed_rate(
    theta1,
    theta2,
    x_center,
    aperture: ApertureConfig,
    params: CoincidenceModelParams,
    nodes: int = 33,
    pinhole: ApertureConfig | None = None,
):
    """Coincidence rate averaged over the slit's momentum window.

    Simpson average over ``[p(x - w/2), p(x + w/2)]``; with ``pinhole`` the
    photon-2 momentum is averaged over the pinhole window around 0 as well.
    """
    if nodes < 33:
        raise ValueError(f"use at least 33 quadrature nodes, got {nodes}")
    nodes += 1 - nodes % 2
    x = np.atleast_1d(np.asarray(x_center, dtype=float))
    half2 = 0.5 * pinhole.momentum_width if pinhole is not None else 0.0
    avg = _window_average(
        theta1,
        theta2,
        position_to_momentum(x, aperture.geometry),
        0.5 * aperture.momentum_width,
        half2,
        params,
        nodes,
    )
    if np.ndim(x_center) == 0:
        return float(avg[0])
    return avg


def simulate_scan(
    positions: Sequence[float],
    theta1: float,
    theta2: float,
    params: CoincidenceModelParams,
    geometry: LensGeometry = PATH1_LENS,
    aperture: ApertureConfig | None = None,
    noise: RngStream | None = None,
    pinhole: ApertureConfig | None = None,
    relative_phase: float = math.pi,
) -> list[ScanRecord]:
    """One record per slit position.

    ``aperture`` switches from point sampling to slit-window averaging. With
    ``noise`` set, observed counts are Poisson draws around the model rate;
    draw ``i`` uses stream index ``i``, so results do not depend on the
    evaluation order.
    """
    x = np.asarray(positions, dtype=float)
    if x.size == 0:
        raise ValueError("positions must be non-empty")
    p = position_to_momentum(x, geometry)
    if aperture is None and pinhole is None:
        rates = np.atleast_1d(coincidence_rate(theta1, theta2, p, params, relative_phase=relative_phase))
    else:
        half1 = 0.5 * aperture.momentum_width if aperture is not None else 0.0
        half2 = 0.5 * pinhole.momentum_width if pinhole is not None else 0.0
        rates = _window_average(theta1, theta2, p, half1, half2, params, 33, relative_phase)
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise ModelInvariantError("coincidence model produced a negative or non-finite rate")
    records = []
    for i, (xi, pi, ri) in enumerate(zip(x, p, rates)):
        counts = poisson_draw(noise, float(ri), i) if noise is not None else None
        records.append(ScanRecord(float(xi), float(pi), float(ri), counts))
    return records


def scan_positions(x_min: float = -0.6, x_max: float = 0.6, step: float = 0.03) -> np.ndarray:
    """Evenly spaced slit positions including both ends (to within step/1000)."""
    if step <= 0 or x_max < x_min:
        raise ValueError("need step > 0 and x_max >= x_min")
    n = int(math.floor((x_max - x_min) / step + 1e-3)) + 1
    return np.round(x_min + step * np.arange(n), 12)


def model_mean_momentum(
    theta1: float, theta2: float, params: CoincidenceModelParams, relative_phase: float = math.pi
) -> float:
    """Closed-form mean of p1 under the (unwindowed) coincidence model."""
    s1, c1 = sincos_deg(theta1)
    s2, c2 = sincos_deg(theta2)
    a, b = s1 * s2, c1 * c2
    g0 = GaussianTerm(a, 0.0, params.sigma)
    gd = GaussianTerm(b * phasor(relative_phase), params.delta, params.sigma)
    coherent = TermSum([g0, gd])
    parts = [(params.visibility, coherent), (1.0 - params.visibility, TermSum([g0])),
             (1.0 - params.visibility, TermSum([gd]))]
    norm = sum(w * norm_squared(wf) for w, wf in parts if w > 0)
    first = sum(w * first_moment(wf) for w, wf in parts if w > 0)
    if not norm > 1e-300:
        raise DegenerateStateError("coincidence model vanishes for this setting")
    return first / norm

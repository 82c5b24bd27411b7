"""Biphoton momentum-polarization state: source, SLM and post-selection.

The pair state is a sum of at most four joint terms

    c * psi(p1 - shift1 + p2 - shift2) |pol1, pol2>

integrated over p1 and p2, where ``psi`` is the pump angular spectrum, a
unit-height Gaussian of width ``sigma``. Momentum conservation shows up as
the dependence on ``p1 + p2`` only. Angles at the public interface are in
degrees; analyzers project onto ``sin(theta)|V> + cos(theta)|H>``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace

from .wavefunction import GaussianTerm, TermSum, evaluate, is_degenerate, mean_momentum, norm_squared

SQRT2 = math.sqrt(2.0)
_SNAP = 1e-12


class Pol(str, enum.Enum):
    H = "H"
    V = "V"


def sincos_deg(theta: float) -> tuple[float, float]:
    """(sin, cos) of an angle in degrees, exact at multiples of 90."""
    q = theta / 90.0
    if q == round(q):
        return [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)][int(round(q)) % 4]
    rad = math.radians(theta)
    return math.sin(rad), math.cos(rad)


def phasor(phase: float) -> complex:
    """exp(i*phase), snapped to exact values within 1e-12 rad of a quarter turn."""
    q = phase / (math.pi / 2.0)
    k = round(q)
    if abs(q - k) * (math.pi / 2.0) < _SNAP:
        return [1 + 0j, 1j, -1 + 0j, -1j][int(k) % 4]
    return cmath.exp(1j * phase)


@dataclass(frozen=True)
class SourceConfig:
    sigma: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")


@dataclass(frozen=True)
class SlmConfig:
    delta: float
    phase_mask_2: float = math.pi

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.phase_mask_2)):
            raise ValueError("SLM parameters must be finite")

    @classmethod
    def compensating(cls, source: SourceConfig, delta: float) -> "SlmConfig":
        """Mask that turns the source phase ``phi`` into ``pi`` on |HH>."""
        return cls(delta=delta, phase_mask_2=math.pi - source.phi)


@dataclass(frozen=True)
class PolarizationAnalyzer:
    theta: float

    def amplitude(self, pol: Pol) -> float:
        s, c = sincos_deg(self.theta)
        return s if pol is Pol.V else c

    def orthogonal(self) -> "PolarizationAnalyzer":
        return PolarizationAnalyzer(self.theta + 90.0)


@dataclass(frozen=True)
class JointTerm:
    pol1: Pol
    pol2: Pol
    magnitude: float
    phase: float = 0.0
    shift1: float = 0.0
    shift2: float = 0.0

    @property
    def coefficient(self) -> complex:
        return self.magnitude * phasor(self.phase)


@dataclass(frozen=True)
class BiphotonState:
    terms: tuple[JointTerm, ...]
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) > 4:
            raise ValueError("a biphoton state has at most one term per polarization pair")
        if len({(t.pol1, t.pol2) for t in self.terms}) != len(self.terms):
            raise ValueError("duplicate polarization pair in biphoton state")

    def term(self, pol1: Pol, pol2: Pol) -> JointTerm | None:
        for t in self.terms:
            if t.pol1 is pol1 and t.pol2 is pol2:
                return t
        return None


@dataclass(frozen=True)
class ConditionalState:
    """Single-photon state left after projecting the partner photon.

    Each polarization component is a momentum wavefunction. Components carry
    a factor sqrt(2) relative to the joint amplitude, which removes the Bell
    state's 1/sqrt(2) and reproduces the textbook conditional state term by
    term.
    """

    v_component: TermSum = field(default_factory=TermSum)
    h_component: TermSum = field(default_factory=TermSum)

    def component(self, pol: Pol) -> TermSum:
        return self.v_component if pol is Pol.V else self.h_component


Photon1ConditionalState = ConditionalState


def build_source(cfg: SourceConfig) -> BiphotonState:
    """(|VV> + e^{i phi}|HH>)/sqrt(2) with pump-spectrum momentum correlation."""
    return BiphotonState(
        terms=(
            JointTerm(Pol.V, Pol.V, 1.0 / SQRT2, 0.0),
            JointTerm(Pol.H, Pol.H, 1.0 / SQRT2, cfg.phi),
        ),
        sigma=cfg.sigma,
    )


def apply_slm(state: BiphotonState, slm: SlmConfig) -> BiphotonState:
    """Grating kick ``delta`` on photon 1's H amplitude, uniform phase on photon 2's H.

    Terms with photon 1 horizontal are translated by ``delta`` in p1; terms
    with photon 2 horizontal pick up ``phase_mask_2``. Vertical components
    pass untouched.
    """
    out = []
    for t in state.terms:
        if t.pol1 is Pol.H:
            t = replace(t, shift1=t.shift1 + slm.delta)
        if t.pol2 is Pol.H:
            t = replace(t, phase=t.phase + slm.phase_mask_2)
        out.append(t)
    return BiphotonState(tuple(out), state.sigma)


def _condition(state: BiphotonState, analyzer: PolarizationAnalyzer, p: float, on: int) -> ConditionalState:
    comps: dict[Pol, list[GaussianTerm]] = {Pol.V: [], Pol.H: []}
    for t in state.terms:
        measured, kept = (t.pol2, t.pol1) if on == 2 else (t.pol1, t.pol2)
        weight = analyzer.amplitude(measured)
        if weight == 0.0:
            continue
        # psi(p_kept + p - shift1 - shift2) is centred at shift1 + shift2 - p
        center = t.shift1 + t.shift2 - p
        comps[kept].append(GaussianTerm(SQRT2 * weight * t.coefficient, center, state.sigma))
    return ConditionalState(TermSum(comps[Pol.V]), TermSum(comps[Pol.H]))


def condition_on_photon2(
    state: BiphotonState, analyzer2: PolarizationAnalyzer, p2: float = 0.0
) -> ConditionalState:
    """Photon-1 state after photon 2 is found with momentum ``p2`` and passes ``analyzer2``."""
    return _condition(state, analyzer2, p2, on=2)


def condition_on_photon1(
    state: BiphotonState, analyzer1: PolarizationAnalyzer, p1: float = 0.0
) -> ConditionalState:
    """Mirror of :func:`condition_on_photon2`: photon-2 state given a photon-1 outcome."""
    return _condition(state, analyzer1, p1, on=1)


def project(cond: ConditionalState, analyzer: PolarizationAnalyzer) -> TermSum:
    """Momentum wavefunction after the remaining photon passes ``analyzer``."""
    terms = []
    for pol in (Pol.V, Pol.H):
        w = analyzer.amplitude(pol)
        if w != 0.0:
            terms.extend(cond.component(pol).scaled(w).terms)
    return TermSum(terms).simplified()


project_photon1 = project


def joint_amplitude(
    state: BiphotonState,
    analyzer1: PolarizationAnalyzer,
    analyzer2: PolarizationAnalyzer,
    p1: float,
    p2: float,
) -> complex:
    """<p1, a1; p2, a2 | state>, summed directly over the joint terms."""
    amp = 0j
    s2 = 2.0 * state.sigma**2
    for t in state.terms:
        arg = p1 - t.shift1 + p2 - t.shift2
        amp += (
            analyzer1.amplitude(t.pol1)
            * analyzer2.amplitude(t.pol2)
            * t.coefficient
            * math.exp(-arg * arg / s2)
        )
    return amp


def joint_detection_probability(
    state: BiphotonState,
    analyzer1: PolarizationAnalyzer,
    analyzer2: PolarizationAnalyzer,
    p1: float,
    p2: float,
    order: str = "photon2_first",
) -> float:
    """Coincidence probability density for the two projections.

    ``order`` picks which photon is measured first; the result does not
    depend on it. The sqrt(2) carried by conditional states is divided back
    out so both orders return ``|joint_amplitude|**2``.
    """
    if order == "photon2_first":
        wf = project(condition_on_photon2(state, analyzer2, p2), analyzer1)
        amp = evaluate(wf, p1)
    elif order == "photon1_first":
        wf = project(condition_on_photon1(state, analyzer1, p1), analyzer2)
        amp = evaluate(wf, p2)
    else:
        raise ValueError(f"order must be 'photon2_first' or 'photon1_first', got {order!r}")
    return abs(amp) ** 2 / 2.0


def polarization_marginal(cond: ConditionalState, p):
    """Momentum density with the remaining photon's polarization traced out."""
    v = evaluate(cond.v_component, p)
    h = evaluate(cond.h_component, p)
    return abs(v) ** 2 + abs(h) ** 2


def port_pair_mean_momentum(cond: ConditionalState, analyzer1: PolarizationAnalyzer) -> float:
    """Count-weighted mean momentum over the two orthogonal outputs of ``analyzer1``."""
    total = 0.0
    weighted = 0.0
    for a in (analyzer1, analyzer1.orthogonal()):
        wf = project(cond, a)
        if is_degenerate(wf):
            continue
        n = norm_squared(wf)
        total += n
        weighted += n * mean_momentum(wf)
    return weighted / total


def post_grating_state(sigma: float, delta: float, phi: float = 0.0) -> BiphotonState:
    """Source followed by the SLM with its photon-2 mask compensating ``phi``."""
    src = SourceConfig(sigma=sigma, phi=phi)
    return apply_slm(build_source(src), SlmConfig.compensating(src, delta))


def photon1_wavefunction(theta1: float, theta2: float, sigma: float, delta: float, p2: float = 0.0) -> TermSum:
    """sin t1 sin t2 G(p) - cos t1 cos t2 G(p - delta) for the compensated state."""
    cond = condition_on_photon2(post_grating_state(sigma, delta), PolarizationAnalyzer(theta2), p2)
    return project(cond, PolarizationAnalyzer(theta1))

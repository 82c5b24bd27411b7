"""Two-qubit polarization tomography.

Basis order is {HH, HV, VH, VV} with H = (1, 0) and V = (0, 1). Counts for a
setting are modelled as ``N * <p1 p2| rho |p1 p2>`` for an unknown common
scale ``N``; linear inversion solves for ``N * rho`` and normalizes the trace.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .numerics import RngStream, poisson_draw

SQ = 1.0 / math.sqrt(2.0)
STATES: dict[str, np.ndarray] = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([SQ, SQ], dtype=complex),
    "A": np.array([SQ, -SQ], dtype=complex),
    "R": np.array([SQ, -1j * SQ], dtype=complex),
    "L": np.array([SQ, 1j * SQ], dtype=complex),
}

PAULI = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]
# two-qubit Pauli products, a Hilbert-Schmidt orthogonal basis: Tr(P_i P_j) = 4 delta_ij
PAULI2 = [np.kron(a, b) for a in PAULI for b in PAULI]

PAULI_SETTINGS = ["".join(p) for p in itertools.product("HVDARL", repeat=2)]
# James, Kwiat, Munro & White minimal set
MINIMAL_SETTINGS = [
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
    "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
]


class TomographyInputError(ValueError):
    pass


class DensityMatrix2Q:
    """4x4 Hermitian, unit-trace matrix; PSD is checked separately."""

    def __init__(self, entries, atol: float = 1e-12):
        m = np.array(entries, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0, atol=atol):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > atol:
            raise ValueError(f"density matrix trace is {np.trace(m).real!r}, not 1")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self.entries = m

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix2Q(purity={purity(self):.6f})"

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def is_physical(self, atol: float = 1e-10) -> bool:
        return bool(self.eigenvalues().min() >= -atol)


@dataclass(frozen=True)
class TomoSetting:
    proj1: np.ndarray
    proj2: np.ndarray
    label: str = ""

    def __post_init__(self):
        for name in ("proj1", "proj2"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.shape != (2,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a unit 2-vector")
            object.__setattr__(self, name, v)

    @classmethod
    def from_label(cls, label: str) -> "TomoSetting":
        label = label.strip().upper()
        if len(label) != 2 or any(ch not in STATES for ch in label):
            raise TomographyInputError(f"unknown setting label {label!r}; use two of HVDARL")
        return cls(STATES[label[0]], STATES[label[1]], label)

    @property
    def ket(self) -> np.ndarray:
        return np.kron(self.proj1, self.proj2)


@dataclass
class TomoCounts:
    settings: list[TomoSetting]
    counts: list[float]

    def __post_init__(self):
        if len(self.settings) != len(self.counts):
            raise ValueError("one count per setting required")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.settings]


def bell_state(phase: float = 0.0) -> np.ndarray:
    """(|VV> + e^{i phase}|HH>)/sqrt(2) as a 4-vector."""
    psi = np.zeros(4, dtype=complex)
    psi[3] = SQ
    psi[0] = SQ * complex(math.cos(phase), math.sin(phase))
    return psi


def pure_density(psi) -> DensityMatrix2Q:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix2Q(np.outer(psi, psi.conj()))


def werner_state(v: float, phase: float = 0.0) -> DensityMatrix2Q:
    """v |Phi><Phi| + (1 - v) I/4 around the Bell state with relative phase ``phase``."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {v!r}")
    psi = bell_state(phase)
    return DensityMatrix2Q(v * np.outer(psi, psi.conj()) + (1.0 - v) * np.eye(4) / 4.0)


def maximally_mixed() -> DensityMatrix2Q:
    return DensityMatrix2Q(np.eye(4) / 4.0)


def predict_counts(rho: DensityMatrix2Q, setting: TomoSetting, scale: float = 1.0) -> float:
    k = setting.ket
    return float(scale * np.real(k.conj() @ np.asarray(rho) @ k))


def _design_matrix(settings: Sequence[TomoSetting]) -> np.ndarray:
    # row k, column j: <k| P_j |k> / 4, so counts = design @ (N * r) for rho = sum r_j P_j / 4
    rows = []
    for s in settings:
        k = s.ket
        rows.append([np.real(k.conj() @ P @ k) / 4.0 for P in PAULI2])
    return np.array(rows)


def _missing_for_completeness(labels: Iterable[str]) -> list[str]:
    have = set(labels)
    return [lab for lab in PAULI_SETTINGS if lab not in have]


def linear_inversion(data: TomoCounts) -> DensityMatrix2Q:
    """Least-squares Born-rule inversion, normalized to unit trace.

    The result is Hermitian but may have small negative eigenvalues under
    noise; pass it through :func:`ml_project` for a physical state.
    """
    design = _design_matrix(data.settings)
    rank = np.linalg.matrix_rank(design, tol=1e-10)
    if rank < 16:
        missing = _missing_for_completeness(data.labels)
        raise TomographyInputError(
            f"settings are not informationally complete (design rank {rank} < 16); "
            f"missing standard settings: {', '.join(missing) if missing else 'none listed'}"
        )
    y = np.asarray(data.counts, dtype=float)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    if not coeffs[0] > 0:
        raise TomographyInputError("inverted trace is not positive; counts are all zero?")
    coeffs = coeffs / coeffs[0]
    m = sum(c * P for c, P in zip(coeffs, PAULI2)) / 4.0
    return DensityMatrix2Q(m, atol=1e-9)


def ml_project(raw: DensityMatrix2Q) -> DensityMatrix2Q:
    """Nearest (Frobenius) unit-trace PSD matrix by sorted eigenvalue clipping.

    Smolin, Gambetta & Smith: walk the eigenvalues from smallest up, zeroing
    negatives and spreading their deficit evenly over the ones that remain.
    """
    vals, vecs = np.linalg.eigh(np.asarray(raw))
    lam = vals[::-1].astype(float)
    vecs = vecs[:, ::-1]
    n = lam.size
    out = np.zeros(n)
    acc = 0.0
    i = n
    while i > 0 and lam[i - 1] + acc / i < 0:
        acc += lam[i - 1]
        i -= 1
    out[:i] = lam[:i] + acc / i
    m = (vecs * out) @ vecs.conj().T
    m = m / np.trace(m).real
    return DensityMatrix2Q(0.5 * (m + m.conj().T), atol=1e-10)


def purity(rho) -> float:
    m = np.asarray(rho)
    return float(np.real(np.trace(m @ m)))


def fidelity_to_bell(rho, phase: float = 0.0) -> float:
    psi = bell_state(phase)
    return float(np.real(psi.conj() @ np.asarray(rho) @ psi))


def max_fidelity_to_bell(rho) -> tuple[float, float]:
    """(fidelity, phase) of the best state (|VV> + e^{i phase}|HH>)/sqrt(2)."""
    m = np.asarray(rho)
    coherence = m[0, 3]  # <HH| rho |VV>
    phase = float(np.angle(coherence)) if abs(coherence) > 0 else 0.0
    return 0.5 * float(np.real(m[0, 0] + m[3, 3])) + float(abs(coherence)), phase


def settings_from_labels(labels: Iterable[str]) -> list[TomoSetting]:
    return [TomoSetting.from_label(lab) for lab in labels]


def simulate_counts(
    rho: DensityMatrix2Q,
    counts_per_setting: float,
    settings: Sequence[TomoSetting] | None = None,
    noise: RngStream | None = None,
) -> TomoCounts:
    """Expected (or Poisson-sampled) counts for each setting.

    ``counts_per_setting`` is the scale N in ``N * <p1 p2|rho|p1 p2>``.
    """
    if settings is None:
        settings = settings_from_labels(PAULI_SETTINGS)
    means = [predict_counts(rho, s, counts_per_setting) for s in settings]
    if noise is None:
        counts = [max(m, 0.0) for m in means]
    else:
        counts = [poisson_draw(noise, max(m, 0.0), i) for i, m in enumerate(means)]
    return TomoCounts(list(settings), counts)


def reconstruct(data: TomoCounts) -> DensityMatrix2Q:
    return ml_project(linear_inversion(data))


def random_density(rng: np.random.Generator, rank: int = 4) -> DensityMatrix2Q:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return DensityMatrix2Q(m / np.trace(m).real, atol=1e-10)

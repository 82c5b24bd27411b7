"""Joint least-squares fit of the coincidence model to slit scans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .apparatus import CoincidenceModelParams, ScanRecord, coincidence_rate
from .numerics import minimize
from .wavefunction import DegenerateStateError

# singular-value ratio below which the scaled Jacobian is treated as rank deficient
IDENTIFIABILITY_RTOL = 1e-8


class FitInputError(ValueError):
    pass


@dataclass
class Dataset:
    theta1: float
    theta2: float
    records: list[ScanRecord]


@dataclass
class FitInput:
    datasets: list[Dataset]

    def validate(self) -> None:
        if not self.datasets:
            raise FitInputError("no datasets to fit")
        momenta = set()
        for ds in self.datasets:
            for i, r in enumerate(ds.records):
                if r.observed_counts is None:
                    raise FitInputError(
                        f"record {i} of dataset theta2={ds.theta2} has no observed_counts"
                    )
                if r.observed_counts < 0:
                    raise FitInputError(f"record {i} has negative counts")
                momenta.add(r.momentum_p1)
        if len(momenta) < 2:
            raise FitInputError("need at least two distinct momenta to fit")

    def arrays(self):
        """(theta1, theta2, p, counts) as flat arrays in a canonical order.

        Sorting makes the objective's summation order independent of how the
        records and datasets were listed.
        """
        rows = sorted(
            (ds.theta1, ds.theta2, r.momentum_p1, r.observed_counts)
            for ds in self.datasets
            for r in ds.records
        )
        t1, t2, p, c = (np.array(col, dtype=float) for col in zip(*rows))
        return t1, t2, p, c


@dataclass
class FitResult:
    params: CoincidenceModelParams
    residual_sum_squares: float
    iterations: int
    converged: bool
    identifiable: bool = True
    condition_number: float = 1.0
    trace: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "params": {
                "amplitude_A": self.params.amplitude_A,
                "sigma": self.params.sigma,
                "delta": self.params.delta,
                "visibility": self.params.visibility,
            },
            "residual_sum_squares": self.residual_sum_squares,
            "iterations": self.iterations,
            "converged": self.converged,
            "identifiable": self.identifiable,
            "condition_number": self.condition_number,
        }


def _model(theta1, theta2, p, x, visibility):
    A, sigma, delta = x[0], x[1], x[2]
    v = x[3] if x.size > 3 else visibility
    params = CoincidenceModelParams(A, sigma, delta, v)
    out = np.empty_like(p)
    # group by setting; the model is vectorized over momentum only
    for key in set(zip(theta1.tolist(), theta2.tolist())):
        m = (theta1 == key[0]) & (theta2 == key[1])
        out[m] = coincidence_rate(key[0], key[1], p[m], params)
    return out


def _jacobian(resid, x, rel_step=1e-6):
    cols = []
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((resid(xp) - resid(xm)) / (2 * h))
    return np.column_stack(cols)


def fit(
    data: FitInput,
    initial: CoincidenceModelParams,
    fix_visibility: bool = True,
    weighting: str = "none",
    max_iter: int = 20000,
) -> FitResult:
    """Minimize sum (observed - model)^2 jointly over every dataset.

    (A, sigma, delta) are shared across settings; visibility is fitted only
    when ``fix_visibility`` is False. ``weighting='poisson'`` divides each
    squared residual by ``max(observed, 1)``. After the search the Jacobian
    is inspected: a parameter the data cannot constrain (for instance delta
    when only theta2 = 90 deg is present) sets ``identifiable=False``.
    """
    data.validate()
    if not (initial.amplitude_A > 0 and initial.sigma > 0):
        raise FitInputError("initial amplitude_A and sigma must be > 0")
    if weighting not in ("none", "poisson"):
        raise ValueError(f"weighting must be 'none' or 'poisson', got {weighting!r}")
    t1, t2, p, counts = data.arrays()
    w = np.ones_like(counts) if weighting == "none" else 1.0 / np.sqrt(np.maximum(counts, 1.0))

    x0 = initial.as_array(with_visibility=not fix_visibility)
    bounds = [(1e-12, None), (1e-12, None), (None, None)]
    if not fix_visibility:
        bounds.append((0.0, 1.0))

    lo = np.array([b[0] if b[0] is not None else -np.inf for b in bounds])
    hi = np.array([b[1] if b[1] is not None else np.inf for b in bounds])

    def resid(x):
        x = np.clip(x, lo, hi)
        return w * (counts - _model(t1, t2, p, x, initial.visibility))

    def objective(x):
        r = resid(x)
        return float(r @ r)

    res = minimize(objective, x0, bounds, max_iter=max_iter)
    x = res.params

    jac = _jacobian(resid, x) * np.maximum(np.abs(x), 1e-12)[None, :]
    sv = np.linalg.svd(jac, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    identifiable = bool(sv[-1] > IDENTIFIABILITY_RTOL * sv[0])

    visibility = float(x[3]) if not fix_visibility else initial.visibility
    params = CoincidenceModelParams(float(x[0]), float(x[1]), float(x[2]), visibility)
    return FitResult(
        params=params,
        residual_sum_squares=res.value,
        iterations=res.iterations,
        converged=res.converged,
        identifiable=identifiable,
        condition_number=cond,
        trace=res.trace,
    )


def empirical_mean_momentum(records: Sequence[ScanRecord]) -> float:
    """Count-weighted mean of the slit momenta.

    Uses observed counts when every record has them, otherwise model rates.
    """
    if not records:
        raise DegenerateStateError("no records")
    if all(r.observed_counts is not None for r in records):
        c = np.array([r.observed_counts for r in records], dtype=float)
    else:
        c = np.array([r.model_rate for r in records], dtype=float)
    p = np.array([r.momentum_p1 for r in records], dtype=float)
    total = c.sum()
    if not total > 0:
        raise DegenerateStateError("total counts are zero; mean momentum undefined")
    return float(p @ c / total)


def chi_square_report(data: FitInput, params: CoincidenceModelParams) -> float:
    """Sum of (observed - model)^2 / max(model, 1) over every point."""
    data.validate()
    t1, t2, p, counts = data.arrays()
    model = _model(t1, t2, p, params.as_array(), params.visibility)
    return float(np.sum((counts - model) ** 2 / np.maximum(model, 1.0)))


def fit_single_gaussian(p, counts) -> tuple[float, float, float]:
    """(height, center, width) of the Gaussian through positive counts.

    Fits a parabola to log(counts), weighting each point by its count, which
    is exact for noiseless Gaussian data.
    """
    p = np.asarray(p, dtype=float)
    c = np.asarray(counts, dtype=float)
    keep = c > 0
    if keep.sum() < 3:
        raise FitInputError("need at least three positive points for a Gaussian fit")
    p, c = p[keep], c[keep]
    coeffs = np.polyfit(p, np.log(c), 2, w=np.sqrt(c))
    a2, a1, a0 = coeffs
    if a2 >= 0:
        raise FitInputError("counts are not peaked; no Gaussian fits")
    center = -a1 / (2 * a2)
    width = math.sqrt(-1.0 / (2 * a2))
    height = math.exp(a0 - a1 * a1 / (4 * a2))
    return height, center, width


def datasets_from_scans(scans: dict[tuple[float, float], list[ScanRecord]]) -> FitInput:
    return FitInput([Dataset(t1, t2, recs) for (t1, t2), recs in scans.items()])

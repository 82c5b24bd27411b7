"""Brute-force numerical machinery: Simpson quadrature, counter-based Poisson
sampling and a bounded, deterministic minimizer.

These routines are deliberately independent of the closed-form Gaussian
algebra in :mod:`qiforce.wavefunction` so they can serve as test oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class QuadratureSpec:
    lower: float
    upper: float
    nodes: int = 2001

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ValueError(f"Simpson needs an odd node count >= 3, got {self.nodes}")

    def points(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.nodes)


def integrate(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec) -> float:
    """Composite Simpson estimate of the integral of ``f`` over ``spec``.

    ``f`` is called once with the full node array and must return an array of
    the same shape (scalar functions are broadcast).
    """
    x = spec.points()
    y = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        i = int(bad[0])
        raise FloatingPointError(f"integrand is not finite at node {i} (x={x[i]!r}): {y[i]!r}")
    return float(_integrate.simpson(y, x=x))


# ---------------------------------------------------------------------------
# random numbers


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream.

    Every draw is addressed by ``(seed, stream_id, index)``: the uniforms for
    draw ``index`` come from a Philox4x64 generator keyed on
    ``(seed, stream_id)`` with its counter block set to ``index``. Draws can
    therefore be produced in any order, or in parallel, with identical
    results.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")

    def generator(self, index: int) -> np.random.Generator:
        if index < 0:
            raise ValueError(f"draw index must be non-negative, got {index}")
        key = np.array([self.seed & _U64, self.stream_id & _U64], dtype=np.uint64)
        counter = np.array([0, index & _U64, 0, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


# below this mean the sequential inversion search is cheap and exact
_INVERSION_LIMIT = 10.0


def _poisson_inversion(lam: float, uniform: Callable[[], float]) -> int:
    u = uniform()
    k = 0
    p = math.exp(-lam)
    cdf = p
    while u > cdf:
        k += 1
        p *= lam / k
        cdf += p
        if p == 0.0 and cdf < u:  # float tail exhausted
            break
    return k


def _poisson_ptrs(lam: float, uniform: Callable[[], float]) -> int:
    # Hoermann (1993) transformed rejection with squeeze
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = uniform() - 0.5
        v = uniform()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
        rhs = -lam + k * loglam - math.lgamma(k + 1.0)
        if lhs <= rhs:
            return int(k)


def poisson_draw(stream: RngStream, mean: float, index: int = 0) -> int:
    """Poisson variate for draw ``index`` of ``stream``.

    Inversion for ``mean < 10``, PTRS transformed rejection above.
    """
    if not math.isfinite(mean):
        raise ValueError(f"Poisson mean must be finite, got {mean!r}")
    if mean < 0:
        raise ValueError(f"Poisson mean must be >= 0, got {mean!r}")
    if mean == 0:
        return 0
    gen = stream.generator(index)
    if mean < _INVERSION_LIMIT:
        return _poisson_inversion(mean, gen.random)
    return _poisson_ptrs(mean, gen.random)


def poisson_draws(stream: RngStream, means: Sequence[float], start: int = 0) -> np.ndarray:
    """Vector of independent draws, element ``i`` using index ``start + i``."""
    return np.array(
        [poisson_draw(stream, float(m), start + i) for i, m in enumerate(means)],
        dtype=np.int64,
    )


# ---------------------------------------------------------------------------
# minimization


@dataclass
class MinimizeResult:
    params: np.ndarray
    value: float
    iterations: int
    converged: bool
    trace: list[float] = field(default_factory=list)
    message: str = ""


class NonFiniteObjectiveError(FloatingPointError):
    def __init__(self, params, value):
        super().__init__(f"objective returned {value!r} at params {list(map(float, params))}")
        self.params = np.asarray(params, dtype=float)
        self.value = value


def minimize(
    objective: Callable[[np.ndarray], float],
    initial: Sequence[float],
    bounds: Sequence[tuple[float | None, float | None]] | None = None,
    *,
    xtol: float = 1e-10,
    ftol: float = 1e-12,
    max_iter: int = 20000,
    max_restarts: int = 8,
) -> MinimizeResult:
    """Bounded Nelder-Mead with restarts.

    The search runs in coordinates scaled by ``|initial|`` (1 where the
    initial value is 0), so ``xtol`` is a relative step tolerance. ``ftol`` is
    relative to the objective value, with an absolute floor of ``ftol**2``.
    A fresh simplex is started at the incumbent until a restart no longer
    improves the objective by more than ``ftol``. ``trace`` holds the best
    objective value after every iteration and is non-increasing.
    """
    x0 = np.asarray(initial, dtype=float)
    n = x0.size
    scale = np.where(x0 != 0.0, np.abs(x0), 1.0)
    if bounds is None:
        bounds = [(None, None)] * n
    if len(bounds) != n:
        raise ValueError(f"got {len(bounds)} bounds for {n} parameters")
    lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
    hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
    if np.any(lo > hi):
        raise ValueError("lower bound above upper bound")
    x0 = np.clip(x0, lo, hi)

    def f_scaled(z):
        x = np.clip(z * scale, lo, hi)
        val = float(objective(x))
        if not math.isfinite(val):
            raise NonFiniteObjectiveError(x, val)
        return val

    z = x0 / scale
    best = f_scaled(z)
    trace = [best]
    iterations = 0
    converged = False
    message = ""
    zbounds = _optimize.Bounds(lo / scale, hi / scale)

    def record(intermediate_result):
        trace.append(float(intermediate_result.fun))

    for _ in range(max_restarts + 1):
        fatol = max(ftol * abs(best), ftol * ftol)
        res = _optimize.minimize(
            f_scaled,
            z,
            method="Nelder-Mead",
            bounds=zbounds,
            callback=record,
            options={
                "xatol": xtol,
                "fatol": fatol,
                "maxiter": max(1, max_iter - iterations),
                "maxfev": 10 * max_iter,
                "adaptive": n > 2,
            },
        )
        iterations += int(res.nit)
        message = str(res.message)
        improved = best - float(res.fun)
        if float(res.fun) <= best:
            z = np.asarray(res.x, dtype=float)
            best = float(res.fun)
        if iterations >= max_iter:
            break
        if res.success and improved <= max(ftol * abs(best), ftol * ftol):
            converged = True
            break

    return MinimizeResult(
        params=np.clip(z * scale, lo, hi),
        value=best,
        iterations=iterations,
        converged=converged,
        trace=trace,
        message=message,
    )

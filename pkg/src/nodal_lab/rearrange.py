"""Rearrangements of weighted samples and the bathtub principle.

Functions here act on finitely many samples with positive cell measures,
which is how grid fields are represented elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .specfun import unit_ball_volume

MC_SAMPLES = 200_000


@dataclass(frozen=True, eq=False)
class WeightedSamples:
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if v.shape != w.shape:
            raise ValueError("values and weights must have the same length")
        if v.size == 0:
            raise ValueError("need at least one sample")
        if np.any(v < 0):
            raise ValueError("values must be non-negative (pass |u|)")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def from_field(cls, field) -> "WeightedSamples":
        return cls(np.abs(field.values), field.weights)


def distribution_function(s: WeightedSamples, t: float) -> float:
    """mu(t): measure of the samples with value > t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return float(s.weights[s.values > t].sum())


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Non-increasing step function on (0, breaks[-1]].

    Takes ``levels[k]`` on (breaks[k-1], breaks[k]], with breaks[-1] = 0
    implied, so it is left-continuous.
    """

    breaks: np.ndarray
    levels: np.ndarray

    def __call__(self, sigma):
        s = np.asarray(sigma, dtype=float)
        k = np.searchsorted(self.breaks, s, side="left")
        k = np.clip(k, 0, len(self.levels) - 1)
        out = np.where((s >= 0) & (s <= self.breaks[-1]), self.levels[k], 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.breaks]))

    def integral(self) -> float:
        return float(np.dot(self.levels, self.widths))


def decreasing_rearrangement(s: WeightedSamples) -> StepFunction:
    """u*(sigma) = inf{t : mu(t) < sigma} as a step function.

    Equal values keep their original sample order.
    """
    order = np.lexsort((np.arange(s.values.size), -s.values))
    return StepFunction(np.cumsum(s.weights[order]), s.values[order])


def integrate_product(f: StepFunction, g: StepFunction) -> float:
    """Integral of f*g over the common support of two step functions."""
    top = min(f.breaks[-1], g.breaks[-1])
    cuts = np.union1d(f.breaks, g.breaks)
    cuts = cuts[cuts <= top]
    left = np.concatenate([[0.0], cuts[:-1]])
    mid = 0.5 * (left + cuts)
    return float(np.sum(f(mid) * g(mid) * (cuts - left)))


def hardy_littlewood_check(u: WeightedSamples, v: WeightedSamples) -> tuple[float, float]:
    """(sum u v w, integral of u* v*); the first never exceeds the second."""
    if u.values.shape != v.values.shape or not np.array_equal(u.weights, v.weights):
        raise ValueError("u and v must share one sample layout")
    lhs = float(np.sum(u.values * v.values * u.weights))
    rhs = integrate_product(decreasing_rearrangement(u), decreasing_rearrangement(v))
    return lhs, rhs


@dataclass(frozen=True)
class RadialProfile:
    """A non-negative, strictly decreasing function of the distance to a centre."""

    f: Callable

    def check(self, distances) -> None:
        r = np.unique(np.asarray(distances, dtype=float))
        vals = np.asarray(self.f(r), dtype=float)
        if np.any(vals < 0) or np.any(np.diff(vals) >= 0):
            raise ValueError("profile must be non-negative and strictly decreasing")


def bathtub_supremum(f: RadialProfile, distances, weights, capacity: float) -> tuple[float, float]:
    """Largest integral of f(r) over a sample set of measure ``capacity``.

    Cells are taken in order of increasing distance (ties by index) and the
    last one fractionally, which is the exact optimum of this continuous
    knapsack.  Returns (value, selected measure).
    """
    d = np.asarray(distances, dtype=float)
    w = np.asarray(weights, dtype=float)
    total = float(w.sum())
    if capacity > total * (1 + 1e-12):
        raise ValueError(f"capacity {capacity} exceeds total measure {total}")
    if capacity < 0:
        raise ValueError("capacity must be non-negative")
    f.check(d)
    order = np.lexsort((np.arange(d.size), d))
    vals = np.asarray(f.f(d[order]), dtype=float)
    cw = np.cumsum(w[order])
    full = int(np.searchsorted(cw, capacity, side="right"))
    value = float(np.dot(vals[:full], w[order][:full]))
    taken = float(cw[full - 1]) if full else 0.0
    if full < d.size and capacity > taken:
        value += vals[full] * (capacity - taken)
        taken = capacity
    return value, taken


def fractional_fill_value(values, weights, order, capacity: float) -> float:
    """Integral over cells taken in ``order`` up to ``capacity``, last one fractionally."""
    v = np.asarray(values, dtype=float)[order]
    w = np.asarray(weights, dtype=float)[order]
    cw = np.cumsum(w)
    full = int(np.searchsorted(cw, capacity, side="right"))
    value = float(np.dot(v[:full], w[:full]))
    taken = float(cw[full - 1]) if full else 0.0
    if full < v.size and capacity > taken:
        value += v[full] * (capacity - taken)
    return value


def newtonian_potential_sup(n: int, region_volume: float) -> float:
    """Upper bound Vol^{2/n} / (2 (n-2) alpha_n^{2/n}) on the Newtonian potential
    of a region; attained at the centre of a ball."""
    if n < 3:
        raise ValueError("the bound is stated for n >= 3")
    if region_volume < 0:
        raise ValueError("volume must be non-negative")
    return region_volume ** (2 / n) / (2 * (n - 2) * unit_ball_volume(n) ** (2 / n))


def newtonian_potential_mc(indicator: Callable, reach: float, samples: int = MC_SAMPLES,
                           seed: int = 0) -> tuple[float, float]:
    """Quasi-Monte-Carlo estimate of int_Omega Phi(y) dy at the origin, n = 3.

    ``indicator`` maps an (m, 3) array of points to a boolean mask; Omega
    must lie in the ball of radius ``reach``.  Points are drawn as
    y = r * omega with r uniform on [0, reach] and omega uniform on the unit
    sphere, so the 1/r singularity cancels against the r^2 Jacobian and the
    integrand is bounded.  Returns (estimate, standard error).
    """
    pts = qmc.Halton(d=3, scramble=True, seed=seed).random(samples)
    r = reach * pts[:, 0]
    z = 2 * pts[:, 1] - 1
    ang = 2 * math.pi * pts[:, 2]
    s = np.sqrt(np.clip(1 - z * z, 0, None))
    omega = np.stack([s * np.cos(ang), s * np.sin(ang), z], axis=1)
    inside = np.asarray(indicator(r[:, None] * omega), dtype=bool)
    # Phi(y) dy = r dr dS / (n (n-2) alpha_n) and |S| = n alpha_n, so the mean is reach * E[chi r]
    integrand = np.where(inside, r, 0.0) * reach
    return float(integrand.mean()), float(integrand.std(ddof=1) / math.sqrt(samples))

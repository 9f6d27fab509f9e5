"""Bessel functions of the first kind, their zeros, ball volumes and quadrature.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

# power series below, Miller backward recurrence above; the series loses
# ~3e-13 absolute to cancellation by x = 12, Miller stays at ~1e-16 down to x ~ 0.5
SERIES_CUTOFF = 4.0

_SERIES_MAX_TERMS = 400


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < 0:
        raise ValueError(f"Bessel order must be finite and >= 0, got {nu}")
    return nu


def _series(nu: float, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        log_lead = nu * np.log(half) - math.lgamma(nu + 1.0)
    term = np.exp(log_lead) if nu > 0 else np.ones_like(x)
    total = term.copy()
    biggest = np.abs(term)
    q = -half * half
    for k in range(1, _SERIES_MAX_TERMS):
        term = term * q / (k * (k + nu))
        total += term
        a = np.abs(term)
        biggest = np.maximum(biggest, a)
        if k * k > np.max(-q) and np.all(a <= 1e-17 * biggest):
            break
    return total


def _miller(nu: float, x: np.ndarray) -> np.ndarray:
    xmax = float(np.max(x))
    n_start = int(xmax + 20.0 * xmax ** (1.0 / 3.0) + 30.0)
    n_start += n_start % 2

    # normalisation coefficients (nu + 2j) Gamma(nu + j) / j!, divided by Gamma(nu + 1)
    coef = np.empty(n_start // 2 + 1)
    coef[0] = 1.0
    g = 1.0
    for j in range(1, n_start // 2 + 1):
        if j > 1:
            g *= (nu + j - 1) / j
        coef[j] = (nu + 2 * j) * g

    f_next = np.zeros_like(x)
    f_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(n_start, 0, -1):
        if k % 2 == 0:
            norm += coef[k // 2] * f_cur
        f_prev = (2.0 * (nu + k) / x) * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        # growth per step is bounded well below 1e7, so checking every 8 steps is safe
        if k % 8 == 0 and (big := np.abs(f_cur) > 1e250).any():
            scale = np.where(big, 1e-250, 1.0)
            f_cur *= scale
            f_next *= scale
            norm *= scale
    norm += coef[0] * f_cur
    lead = np.exp(nu * np.log(0.5 * x) - math.lgamma(nu + 1.0))
    return f_cur * lead / norm


def bessel_j(nu: float, x):
    """J_nu(x) for real order nu >= 0 and x >= 0.

    Accepts a scalar or an array for ``x``; returns the same shape.
    """
    nu = _check_order(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0):
        raise ValueError("bessel_j is defined here for finite x >= 0 only")
    flat = xa.ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_CUTOFF
    if np.any(small):
        out[small] = _series(nu, flat[small])
    if np.any(~small):
        out[~small] = _miller(nu, flat[~small])
    if xa.ndim == 0:
        return float(out[0])
    return out.reshape(xa.shape)


def bessel_j_derivative(nu: float, x):
    """dJ_nu/dx via J'_nu = (nu/x) J_nu - J_{nu+1}."""
    xa = np.asarray(x, dtype=float)
    if nu == 0:
        return -bessel_j(1.0, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = nu / xa * bessel_j(nu, xa) - bessel_j(nu + 1.0, xa)
    # J'_nu(0) is 1/2 for nu = 1 and 0 for nu > 1 (and for 0 < nu < 1 it diverges)
    val = np.where(xa == 0, 0.5 if nu == 1 else (0.0 if nu > 1 else np.inf), val)
    return float(val) if val.ndim == 0 else val


def _refine_zero(nu: float, lo: float, hi: float) -> float:
    f_lo = bessel_j(nu, lo)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(nu, mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(2):
        d = -bessel_j(nu + 1.0, x) + nu / x * bessel_j(nu, x)
        if d != 0:
            x -= bessel_j(nu, x) / d
    return x


def bessel_first_zero(nu: float) -> float:
    """First positive zero j_nu of J_nu, 0 <= nu <= 10.

    The zero lies in (nu, nu + pi + 1), so the bracket [nu + 1, nu + 10] is
    scanned for the first sign change before bisection and two Newton steps.
    """
    nu = _check_order(nu)
    if nu > 10:
        raise ValueError("bessel_first_zero supports 0 <= nu <= 10")
    grid = np.linspace(nu + 1.0, nu + 10.0, 181)
    vals = bessel_j(nu, grid)
    change = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if change.size == 0:
        raise RuntimeError(f"no sign change of J_{nu} in [{nu + 1}, {nu + 10}]")
    i = int(change[0])
    return _refine_zero(nu, float(grid[i]), float(grid[i + 1]))


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """The first ``count`` positive zeros of J_nu, any order nu >= 0."""
    nu = _check_order(nu)
    zeros: list[float] = []
    step = 0.1
    lo = max(nu, step)
    f_lo = bessel_j(nu, lo)
    while len(zeros) < count:
        block = lo + step * np.arange(1, 201)
        vals = bessel_j(nu, block)
        prev_x, prev_f = lo, f_lo
        for xb, fb in zip(block, vals):
            if fb == 0.0 or (fb > 0) != (prev_f > 0):
                zeros.append(brentq(lambda x: bessel_j(nu, x), prev_x, float(xb),
                                    xtol=1e-14, rtol=4 * np.finfo(float).eps))
                if len(zeros) == count:
                    break
            prev_x, prev_f = float(xb), fb
        lo, f_lo = float(block[-1]), float(vals[-1])
    return np.array(zeros)


def unit_ball_volume(n: int) -> float:
    """Volume alpha_n of the unit ball in R^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __call__(self, f: Callable) -> float:
        vals = np.broadcast_to(np.asarray(f(self.nodes), dtype=float), self.nodes.shape)
        return float(np.dot(self.weights, vals))


def gauss_legendre(a: float, b: float, order: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``order`` nodes mapped onto (a, b)."""
    t, w = leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureRule(nodes=a + half * (t + 1.0), weights=half * w, order=order)


class QuadratureError(RuntimeError):
    pass


def adaptive_quad(f: Callable, a: float, b: float, tol: float = 1e-10, order: int = 10,
                  max_panels: int = 20000, singular_left: bool = False) -> tuple[float, float]:
    """Adaptive Gauss-Legendre integration returning (value, error estimate).

    Each panel is compared with its two halves; panels whose difference exceeds
    their share of ``tol`` are split.  ``f`` must accept numpy arrays.

    With ``singular_left`` the substitution r = a + t**2 is applied first,
    which removes integrable r**s singularities at ``a`` for s > -1.
    """
    if not a < b:
        raise ValueError("need a < b")
    if singular_left:
        g = f
        f = lambda t: 2.0 * t * np.asarray(g(a + t * t), dtype=float)  # noqa: E731
        a, b = 0.0, math.sqrt(b - a)

    t, w = leggauss(order)

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        x = lo + half * (t + 1.0)
        vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
        return half * float(np.dot(w, vals))

    length = b - a
    stack = [(a, b, panel(a, b))]
    total = 0.0
    err = 0.0
    panels = 0
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        diff = abs(left + right - whole)
        if diff <= tol * (hi - lo) / length or hi - lo < 1e-13 * length:
            total += left + right
            err += diff
            continue
        panels += 1
        if panels > max_panels:
            raise QuadratureError(f"no convergence after {max_panels} subdivisions")
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return total, err


def integrate(f: Callable, a: float, b: float, tol: float = 1e-10, **kwargs) -> float:
    """Definite integral of ``f`` over [a, b] to absolute accuracy ``tol``."""
    return adaptive_quad(f, a, b, tol, **kwargs)[0]

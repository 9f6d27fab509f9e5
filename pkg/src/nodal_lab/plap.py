"""First Dirichlet eigenpairs of the p-Laplacian on intervals and disks.

The ODE is integrated in the flux variable w = |u'|^{p-2} u', which stays
smooth where u' vanishes, with a fixed-step classical Runge-Kutta scheme.
The first two terms of the power series at the starting point replace the
first step, where |u|^{p-2} u or |w|^{1/(p-1)} fail to be smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from .bounds import BoundCheckReport
from .specfun import unit_ball_volume
from .spectra import DomainSpec, Grid, ScalarField

STEP = 1e-4
PROFILE_POINTS = 1025  # odd, so the midpoint is a sample


def _phi(s: float, q: float) -> float:
    # |s|^{q-2} s
    return math.copysign(abs(s) ** (q - 1), s)


@dataclass(frozen=True, eq=False)
class PLapEigenPair:
    p: float
    lam: float
    profile: ScalarField
    radius: float | None = None
    length: float | None = None
    n: int = 1

    @property
    def volume(self) -> float:
        if self.length is not None:
            return self.length
        return unit_ball_volume(self.n) * self.radius ** self.n

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.profile.values)))


def _check_p(p: float) -> None:
    if not 1 < p <= 10:
        raise ValueError("p must lie in (1, 10]")


def _interval_run(p: float, lam: float, half: float, record: bool = False):
    """RK4 from x = 0 (u = 0, u' = 1) to x = half.  Returns (w(half), u(half), int u^p, traj)."""
    n_steps = max(int(math.ceil(half / STEP)), 50)
    h = half / n_steps
    q = p / (p - 1)  # u' = |w|^{q-2} w
    # series start: u = x - lam x^{p+1} / (p (p-1) (p+1)), w = 1 - lam x^p / p
    x = h
    u = x - lam * x ** (p + 1) / (p * (p - 1) * (p + 1))
    w = 1 - lam * x ** p / p
    integ = x ** (p + 1) / (p + 1)
    xs, us, ds = [0.0, x], [0.0, u], [1.0, _phi(w, q)]

    def rhs(uu, ww):
        return _phi(ww, q), -lam * _phi(uu, p), abs(uu) ** p

    for _ in range(n_steps - 1):
        k1 = rhs(u, w)
        k2 = rhs(u + 0.5 * h * k1[0], w + 0.5 * h * k1[1])
        k3 = rhs(u + 0.5 * h * k2[0], w + 0.5 * h * k2[1])
        k4 = rhs(u + h * k3[0], w + h * k3[1])
        u += h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6
        w += h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6
        integ += h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6
        x += h
        if record:
            xs.append(x)
            us.append(u)
            ds.append(_phi(w, q))
    traj = (np.array(xs), np.array(us), np.array(ds)) if record else None
    return w, u, integ, traj


def _hermite(xs, us, ds, x):
    """Cubic Hermite interpolation of trajectory samples at points ``x``."""
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    h = xs[i + 1] - xs[i]
    t = (x - xs[i]) / h
    h00 = 2 * t ** 3 - 3 * t ** 2 + 1
    h10 = t ** 3 - 2 * t ** 2 + t
    h01 = -2 * t ** 3 + 3 * t ** 2
    h11 = t ** 3 - t ** 2
    return h00 * us[i] + h10 * h * ds[i] + h01 * us[i + 1] + h11 * h * ds[i + 1]


def _bracket(g, seed: float, factor: float = 1.5) -> tuple[float, float]:
    lo = hi = seed
    if g(seed) > 0:
        while g(hi) > 0:
            lo, hi = hi, hi * factor
            if hi > 1e12:
                raise RuntimeError("shooting bracket search diverged")
    else:
        while g(lo) <= 0:
            lo, hi = lo / factor, lo
            if lo < 1e-12:
                raise RuntimeError("shooting bracket search diverged")
    return lo, hi


def _line_grid(x: np.ndarray, weights: np.ndarray, domain: DomainSpec) -> Grid:
    n = len(x)
    edges = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
    boundary = np.zeros(n, bool)
    boundary[[0, -1]] = True
    return Grid(domain, x[:, None], weights, edges, boundary, (float(x[1] - x[0]),))


def sinp_eigenpair(p: float, length: float = 1.0) -> PLapEigenPair:
    """First Dirichlet eigenpair of (|u'|^{p-2} u')' + lam |u|^{p-2} u = 0 on (0, length).

    Shoots from u(0) = 0, u'(0) = 1.  The first eigenfunction is symmetric
    about the midpoint, so u(length) = 0 with no interior zero is equivalent
    to the flux w vanishing exactly at length / 2; lam is found by a
    bracketed root search on w(length / 2).  The profile is normalised to
    unit L^p norm and sampled at 1025 points.
    """
    _check_p(p)
    if length <= 0:
        raise ValueError("length must be positive")
    half = 0.5 * length

    def g(lam):
        return _interval_run(p, lam, half)[0]

    lo, hi = _bracket(g, (math.pi / length) ** 2)
    lam = brentq(g, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=200)
    _, umax, integ, (xs, us, ds) = _interval_run(p, lam, half, record=True)
    scale = (2 * integ) ** (-1 / p)

    x = np.linspace(0.0, length, PROFILE_POINTS)
    folded = np.minimum(x, length - x)
    values = scale * _hermite(xs, us, ds, folded)
    values[[0, -1]] = 0.0
    values[np.argmin(np.abs(x - half))] = max(values.max(), scale * umax)
    dx = x[1] - x[0]
    weights = np.full(PROFILE_POINTS, dx)
    weights[[0, -1]] = dx / 2
    domain = _interval_domain(length)
    return PLapEigenPair(p, lam, ScalarField(_line_grid(x, weights, domain), values), length=length)


def _interval_domain(length: float) -> DomainSpec:
    # a 1-cell-wide masked strip stands in for the interval; only volume/kind are consulted
    return DomainSpec("masked_grid", mask=np.ones((1, 1), bool), h=length)


def _radial_run(p: float, lam: float, radius: float, n: int, record: bool = False):
    """RK4 from r = 0 (u = 1, u' = 0).  Returns (g, int r^{n-1} u^p, traj).

    g is u(radius) if u stays positive, else the most negative value seen.
    """
    n_steps = max(int(math.ceil(radius / STEP)), 50)
    h = radius / n_steps
    q = p / (p - 1)
    r = h
    # W = r^{n-1} |u'|^{p-2} u' ~ -lam r^n / n,  u ~ 1 - (p-1)/p (lam/n)^{1/(p-1)} r^{p/(p-1)}
    c = (lam / n) ** (1 / (p - 1))
    u = 1 - (p - 1) / p * c * r ** q
    big_w = -lam * r ** n / n
    integ = r ** n / n
    lowest = u
    rs, us, ds = [0.0, r], [1.0, u], [0.0, -c * r ** (1 / (p - 1))]

    def rhs(rr, uu, ww):
        return _phi(ww / rr ** (n - 1), q), -lam * rr ** (n - 1) * _phi(uu, p), rr ** (n - 1) * abs(uu) ** p

    for _ in range(n_steps - 1):
        k1 = rhs(r, u, big_w)
        k2 = rhs(r + h / 2, u + 0.5 * h * k1[0], big_w + 0.5 * h * k1[1])
        k3 = rhs(r + h / 2, u + 0.5 * h * k2[0], big_w + 0.5 * h * k2[1])
        k4 = rhs(r + h, u + h * k3[0], big_w + h * k3[1])
        u += h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6
        big_w += h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6
        integ += h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6
        r += h
        lowest = min(lowest, u)
        if record:
            rs.append(r)
            us.append(u)
            ds.append(_phi(big_w / r ** (n - 1), q))
    g = u if lowest > 0 or lowest == u else lowest
    traj = (np.array(rs), np.array(us), np.array(ds)) if record else None
    return g, integ, traj


def radial_plap_eigenpair(p: float, radius: float = 1.0, n: int = 2) -> PLapEigenPair:
    """First radial Dirichlet eigenpair of the p-Laplacian on the n-ball.

    Shoots (r^{n-1} |u'|^{p-2} u')' + lam r^{n-1} |u|^{p-2} u = 0 from
    u(0) = 1, u'(0) = 0 and locates the lam whose first zero is ``radius``.
    """
    _check_p(p)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n < 2:
        raise ValueError("use sinp_eigenpair for n = 1")

    def g(lam):
        return _radial_run(p, lam, radius, n)[0]

    lo, hi = _bracket(g, (2.4 / radius) ** 2)
    lam = brentq(g, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=200)
    _, integ, (rs, us, ds) = _radial_run(p, lam, radius, n, record=True)
    area = n * unit_ball_volume(n)
    scale = (area * integ) ** (-1 / p)

    r = np.linspace(0.0, radius, PROFILE_POINTS)
    values = scale * _hermite(rs, us, ds, r)
    values[0] = scale
    values[-1] = 0.0
    dr = r[1] - r[0]
    shell = np.full(PROFILE_POINTS, dr)
    shell[[0, -1]] = dr / 2
    weights = area * np.maximum(r, dr / 4) ** (n - 1) * shell
    domain = DomainSpec("disk", radius=float(radius))
    return PLapEigenPair(p, lam, ScalarField(_line_grid(r, weights, domain), values),
                         radius=radius, n=n)


def check_lindqvist(e: PLapEigenPair, n: int, domain_volume: float) -> BoundCheckReport:
    """sup|u| <= 4^n Vol^{1-1/p} lam^{n/p} for an L^p-normalised first eigenfunction."""
    lhs = e.sup
    rhs = 4.0 ** n * domain_volume ** (1 - 1 / e.p) * e.lam ** (n / e.p)
    return BoundCheckReport("Thm1.14", e.lam, lhs, rhs, "explicit", tolerance=0.0,
                            extra={"p": e.p, "n": n, "slack_ratio": rhs / lhs})


def count_bound_plap(m_values, a: float, lam: float, n: int, p: float,
                     domain_volume: float = 1.0) -> tuple[int, float]:
    """(number of m >= a, 4^n Vol^{1-1/p} a^{-1} lam^{n/p})."""
    if a <= 0:
        raise ValueError("a must be positive")
    count = int(np.count_nonzero(np.asarray(m_values, dtype=float) >= a))
    bound = 4.0 ** n * domain_volume ** (1 - 1 / p) * lam ** (n / p) / a
    return count, bound


def rayleigh_descent_eigenvalue(p: float, length: float = 1.0, points: int = 200) -> float:
    """Minimise int |v'|^p / int |v|^p over piecewise-linear v with ``points``
    interior nodes and zero end values.  An independent check on the shooting
    eigenvalue: it converges to it from above as the mesh is refined."""
    _check_p(p)
    h = length / (points + 1)
    gq, gw = np.polynomial.legendre.leggauss(6)
    t = 0.5 * (gq + 1)
    wq = 0.5 * gw

    def parts(v):
        full = np.concatenate([[0.0], v, [0.0]])
        d = np.diff(full) / h
        num = h * np.sum(np.abs(d) ** p)
        # d num / d v_i = p (phi(d_{i-1}) - phi(d_i)) with phi(s) = |s|^{p-2} s
        flux = p * np.abs(d) ** (p - 1) * np.sign(d)
        g_num = flux[:-1] - flux[1:]
        left, right = full[:-1, None], full[1:, None]
        vq = left * (1 - t) + right * t
        den = h * np.sum(wq * np.abs(vq) ** p)
        dv = p * np.abs(vq) ** (p - 1) * np.sign(vq) * wq * h
        g_den_full = np.zeros(points + 2)
        g_den_full[:-1] += np.sum(dv * (1 - t), axis=1)
        g_den_full[1:] += np.sum(dv * t, axis=1)
        return num, g_num, den, g_den_full[1:-1]

    def objective(v):
        num, g_num, den, g_den = parts(v)
        return num / den, (g_num * den - num * g_den) / den ** 2

    x = h * np.arange(1, points + 1)
    v0 = np.sin(np.pi * x / length)
    res = minimize(objective, v0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 20000, "ftol": 1e-15, "gtol": 1e-12})
    return float(res.fun)

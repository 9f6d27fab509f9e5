"""Explicit constants, L^p exponents and the inequality-checking engine.

Checks come in two flavours.  Where a constant is known in closed form the
inequality is evaluated row by row ("explicit").  Where only the existence
of a constant is known, the engine fits a log-log slope against the
eigenvalue and compares it with the claimed exponent ("fitted"), reporting
the empirical constant instead of asserting one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .nodal import NodalDecomposition, faber_krahn_constant, superlevel_volumes
from .specfun import adaptive_quad, bessel_first_zero, bessel_j, unit_ball_volume
from .spectra import EigenPair, lp_norm

SLOPE_TOLERANCE = 0.1
GRID_SLACK = 0.05
MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class BoundCheckReport:
    """One instance of an inequality lhs <= rhs."""

    claim: str
    lam: float
    lhs: float
    rhs: float
    provenance: str  # "explicit" or "fitted"
    tolerance: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def row(self) -> dict:
        return {"lambda": self.lam, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "pass": self.passed}


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of log(quantity) = slope * log(lambda) + intercept."""

    lams: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    stderr: float

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)

    @classmethod
    def fit(cls, lams, values) -> "ScalingFit":
        x = np.asarray(lams, dtype=float)
        y = np.asarray(values, dtype=float)
        if x.shape != y.shape or x.size < MIN_FIT_POINTS:
            raise ValueError(f"a scaling fit needs at least {MIN_FIT_POINTS} (lambda, value) pairs")
        if np.any(np.diff(x) <= 0):
            raise ValueError("lambda values must be strictly increasing")
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("lambda and the fitted quantity must be positive")
        lx, ly = np.log(x), np.log(y)
        design = np.stack([lx, np.ones_like(lx)], axis=1)
        coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
        resid = ly - design @ coef
        dof = x.size - 2
        sxx = float(np.sum((lx - lx.mean()) ** 2))
        stderr = math.sqrt(float(resid @ resid) / dof / sxx) if sxx > 0 else math.inf
        return cls(x, y, float(coef[0]), float(coef[1]), stderr)


def distinct_worst(lams, values, rel: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Collapse repeated eigenvalues to one point each, keeping the largest value.

    Eigenvalues within ``rel`` of each other count as equal.  Upper-bound
    fits then see the worst eigenfunction of every eigenspace.
    """
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(lams, kind="stable")
    out_l: list[float] = []
    out_v: list[float] = []
    for lam, v in zip(lams[order], values[order]):
        if out_l and abs(lam - out_l[-1]) <= rel * max(abs(lam), 1.0):
            out_v[-1] = max(out_v[-1], v)
        else:
            out_l.append(float(lam))
            out_v.append(float(v))
    return np.array(out_l), np.array(out_v)


# -- constants ------------------------------------------------------------


@dataclass(frozen=True)
class ChitiConstant:
    n: int
    p: float
    value: float
    quad_error: float


@lru_cache(maxsize=None)
def chiti_constant(n: int, p: float) -> ChitiConstant:
    """K_{n,p}, the reverse Hoelder constant attained by the ball.

    K = 2^{1-n/2} (n alpha_n)^{-1/p} / (Gamma(n/2) I^{1/p}) with
    I = int_0^j r^{p - np/2 + n - 1} J_{n/2-1}(r)^p dr and j the first zero
    of J_{n/2-1}.  The integrand is evaluated as (r^{1-n/2} J)^p r^{n-1},
    which is bounded near r = 0.
    """
    if n < 2 or p < 1:
        raise ValueError("need n >= 2 and p >= 1")
    nu = n / 2 - 1
    j = bessel_first_zero(nu)

    def integrand(r):
        r = np.asarray(r, dtype=float)
        radial = r ** (-nu) * bessel_j(nu, r)
        return np.abs(radial) ** p * r ** (n - 1)

    integral, err = adaptive_quad(integrand, 0.0, j, tol=1e-13, order=12)
    value = 2 ** (1 - n / 2) * (n * unit_ball_volume(n)) ** (-1 / p) / (
        math.gamma(n / 2) * integral ** (1 / p))
    # dK/K = -(1/p) dI/I
    return ChitiConstant(n, float(p), value, value * err / (p * integral))


def extremal_z(n: int, lam: float, x_norm: float) -> float:
    """z(x) = |x|^{1-n/2} J_{n/2-1}(sqrt(lam) |x|) on the ball of radius j/sqrt(lam)."""
    nu = n / 2 - 1
    radius = bessel_first_zero(nu) / math.sqrt(lam)
    if x_norm < 0 or x_norm > radius * (1 + 1e-12):
        raise ValueError(f"|x| = {x_norm} lies outside the ball of radius {radius}")
    if x_norm == 0:
        return lam ** (n / 4 - 0.5) / (2 ** nu * math.gamma(n / 2))
    return x_norm ** (-nu) * bessel_j(nu, min(math.sqrt(lam) * x_norm, radius * math.sqrt(lam)))


def lemma12_bound(n: int, delta: float, lam: float) -> float:
    """(1 - delta)^{n/2} (2(n-2))^{n/2} alpha_n lam^{-n/2}."""
    if n < 3:
        raise ValueError("the superlevel volume bound needs n >= 3")
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    return ((1 - delta) * 2 * (n - 2)) ** (n / 2) * unit_ball_volume(n) * lam ** (-n / 2)


# -- exponents ------------------------------------------------------------


def sogge_breakpoint(n: int) -> float:
    return 2 * (n + 1) / (n - 1)


def smith_sogge_breakpoint(n: int) -> float:
    return (6 * n + 4) / (3 * n - 4)


def _high_branch(n: int, p: float) -> float:
    return n / 2 * (0.5 - 1 / p) - 0.25


def sogge_delta(n: int, p: float) -> float:
    """Exponent delta(p) of the closed-manifold bound ||u||_p <= C lam^delta ||u||_2."""
    if n < 2:
        raise ValueError("need n >= 2")
    if p < 2:
        raise ValueError("delta(p) is defined for p >= 2")
    if p <= sogge_breakpoint(n):
        return (n - 1) / 4 * (0.5 - 1 / p)
    return _high_branch(n, p)


def smith_sogge_alpha(n: int, p: float) -> float:
    """Conjectured exponent alpha(p) for manifolds with boundary."""
    if n < 3:
        raise ValueError("alpha(p) needs n >= 3")
    if p < 2:
        raise ValueError("alpha(p) is defined for p >= 2")
    if p <= smith_sogge_breakpoint(n):
        return (2 / 3 + (n - 2) / 2) * (0.25 - 1 / (2 * p))
    return _high_branch(n, p)


def closed_extrema_exponent(n: int, p: float) -> float:
    """Exponent of lam in sum m^p on closed manifolds: n/2 + p delta(p).

    p = 1 is the corollary obtained through Cauchy-Schwarz (exponent n/2);
    p = inf returns the sup-norm exponent delta(inf).
    """
    if p == 1:
        return n / 2
    if p == math.inf:
        return sogge_delta(n, p)
    return n / 2 + p * sogge_delta(n, p)


def boundary_extrema_exponent(n: int, p: float) -> float:
    """Exponent of lam in sum m^p on manifolds with boundary.

    Proven for p in {1, 2} (n/2) and for p >= 5 (n = 3) or p >= 4 (n >= 4);
    other p raise ValueError since only the conjectured exponent exists there.
    """
    if p in (1, 2):
        return n / 2
    if n < 3:
        raise ValueError("the boundary L^p exponent is stated for n >= 3")
    threshold = 5 if n == 3 else 4
    if p < threshold:
        raise ValueError(f"boundary exponent for n={n} requires p >= {threshold}; "
                         "use conjectured_extrema_exponent for smaller p")
    return n / 2 + n * p / 2 * (0.5 - 1 / p) - p / 4


def conjectured_extrema_exponent(n: int, p: float) -> float:
    return n / 2 + p * smith_sogge_alpha(n, p)


# -- checks ---------------------------------------------------------------


def _require_euclidean_dirichlet(domain) -> None:
    if not domain.euclidean or domain.bc != "dirichlet":
        raise ValueError("explicit Chiti-type checks need a Euclidean Dirichlet domain")


def check_chiti_inequality(e: EigenPair, p: float, tolerance: float = 0.0) -> BoundCheckReport:
    """||u||_inf <= K_{n,p} lam^{n/(2p)} ||u||_p for a first Dirichlet eigenfunction."""
    _require_euclidean_dirichlet(e.domain)
    n = e.domain.dim
    k = chiti_constant(n, p)
    lhs = lp_norm(e.field, math.inf)
    rhs = k.value * e.lam ** (n / (2 * p)) * lp_norm(e.field, p)
    return BoundCheckReport("Chiti-eq", e.lam, lhs, rhs, "explicit", tolerance,
                            {"p": p, "n": n, "K": k.value, "ratio": lhs / rhs})


def check_extrema_sums(spectrum: list[NodalDecomposition], p: float, exponent: float | None = None,
                       mode: str = "explicit", claim: str | None = None,
                       slack: float = GRID_SLACK) -> tuple[list[BoundCheckReport], ScalingFit | None]:
    """Compare sum_i m_{A_i}^p with its claimed growth in lam.

    explicit: p in {1, 2} on a Euclidean Dirichlet domain, one row per
    eigenfunction against K_{n,1} Vol^{1/2} lam^{n/2} ||u||_2 or
    K_{n,2}^2 lam^{n/2} ||u||_2^2, with ``slack`` relative grid tolerance.
    fitted: one row comparing the fitted log-log slope with
    ``exponent`` + 0.1; repeated eigenvalues contribute their largest sum.
    """
    if not spectrum:
        raise ValueError("empty spectrum")
    lams = np.array([nd.lam for nd in spectrum])
    if np.any(np.diff(lams) < -1e-9 * np.abs(lams[1:])):
        raise ValueError("decompositions must be ordered by ascending lambda")
    sums = np.array([_power_sum(nd, p) for nd in spectrum])

    if mode == "explicit":
        if p not in (1, 2):
            raise ValueError("explicit constants exist for p = 1 and p = 2 only")
        domain = spectrum[0].field.domain
        _require_euclidean_dirichlet(domain)
        n = domain.dim
        k = chiti_constant(n, p).value
        claim = claim or "Thm1.8"
        reports = []
        for nd, s in zip(spectrum, sums):
            l2 = lp_norm(nd.field, 2)
            if p == 1:
                rhs = k * math.sqrt(domain.volume) * nd.lam ** (n / 2) * l2
            else:
                rhs = k * k * nd.lam ** (n / 2) * l2 * l2
            reports.append(BoundCheckReport(f"{claim}-P{int(p)}", nd.lam, float(s), rhs,
                                            "explicit", slack * rhs, {"domains": len(nd)}))
        fit = None
        dl, dv = distinct_worst(lams, sums)
        if dl.size >= MIN_FIT_POINTS and dl[0] > 0:
            fit = ScalingFit.fit(dl, dv)
        return reports, fit

    if mode != "fitted":
        raise ValueError(f"unknown mode {mode!r}")
    if exponent is None:
        raise ValueError("fitted mode needs the claimed exponent")
    keep = lams > 1e-9
    dl, dv = distinct_worst(lams[keep], sums[keep])
    if dl.size < MIN_FIT_POINTS:
        raise ValueError(f"fitted mode needs at least {MIN_FIT_POINTS} distinct eigenvalues")
    fit = ScalingFit.fit(dl, dv)
    report = slope_report(claim or "Thm1.5", fit, exponent)
    return [report], fit


def _power_sum(nd: NodalDecomposition, p: float) -> float:
    m = nd.extrema
    return float(m.max()) if p == math.inf else float(np.sum(m ** p))


def slope_report(claim: str, fit: ScalingFit, exponent: float,
                 tolerance: float = SLOPE_TOLERANCE) -> BoundCheckReport:
    """Fitted slope versus the claimed exponent, passing when slope <= exponent + tolerance."""
    ratios = fit.values / fit.lams ** exponent
    return BoundCheckReport(claim, float(fit.lams[-1]), fit.slope, exponent, "fitted", tolerance,
                            {"stderr": fit.stderr, "empirical_constant": float(ratios.max()),
                             "lambda_stable": stable_from(fit, exponent, tolerance)})


def stable_from(fit: ScalingFit, exponent: float, tolerance: float = SLOPE_TOLERANCE) -> float | None:
    """Smallest lam such that every tail fit starting there keeps slope <= exponent + tol."""
    n = fit.lams.size
    best = None
    for start in range(n - MIN_FIT_POINTS, -1, -1):
        tail = ScalingFit.fit(fit.lams[start:], fit.values[start:])
        if tail.slope > exponent + tolerance:
            break
        best = float(fit.lams[start])
    return best


def check_neumann(spectrum: list[NodalDecomposition], tolerance: float = SLOPE_TOLERANCE):
    """Fitted checks of sum m <= C mu and sum m^2 <= K mu on planar Neumann spectra.

    Returns (report for sum m, report for sum m^2, fit of the number of
    boundary-touching nodal domains against mu, whose slope is expected
    near 1/2).  The constant mode mu = 0 is skipped.
    """
    nds = [nd for nd in spectrum if nd.lam > 1e-9]
    if len(nds) < MIN_FIT_POINTS:
        raise ValueError(f"need at least {MIN_FIT_POINTS} non-constant Neumann modes")
    domain = nds[0].field.domain
    if domain.bc != "neumann":
        raise ValueError("check_neumann needs Neumann spectra")
    mus = np.array([nd.lam for nd in nds])
    s1 = np.array([_power_sum(nd, 1) for nd in nds])
    s2 = np.array([_power_sum(nd, 2) for nd in nds])
    touching = np.array([sum(d.touches_boundary for d in nd.domains) for nd in nds], float)
    r1 = slope_report("Thm1.9-N1", ScalingFit.fit(*distinct_worst(mus, s1)), 1.0, tolerance)
    r2 = slope_report("Thm1.9-N2", ScalingFit.fit(*distinct_worst(mus, s2)), 1.0, tolerance)
    touch_fit = ScalingFit.fit(*distinct_worst(mus, np.maximum(touching, 1e-300)))
    return r1, r2, touch_fit


def check_lemma12(nd: NodalDecomposition, deltas, slack: float = GRID_SLACK) -> list[BoundCheckReport]:
    """Vol(V_delta^i) >= lemma12_bound for every domain; one row per delta (worst domain)."""
    domain = nd.field.domain
    if not domain.euclidean or domain.dim < 3:
        raise ValueError("the superlevel volume bound is checked on Euclidean domains with n >= 3")
    stats = superlevel_volumes(nd, deltas)
    out = []
    for j, d in enumerate(stats.deltas):
        bound = lemma12_bound(domain.dim, float(d), nd.lam)
        worst = float(stats.volumes[:, j].min())
        out.append(BoundCheckReport("Lem1.2", nd.lam, bound, worst, "explicit", slack * bound,
                                    {"delta": float(d)}))
    return out


def superlevel_constants(spectrum: list[NodalDecomposition], deltas) -> tuple[np.ndarray, list[BoundCheckReport]]:
    """Empirical c(delta) = min over lam and domains of Vol(V_delta^i) lam^{n/2}.

    Returns (c per delta, rows asserting c > 0 per eigenfunction and delta).
    """
    deltas = np.asarray(deltas, dtype=float)
    c = np.full(deltas.size, math.inf)
    rows = []
    for nd in spectrum:
        if nd.lam <= 1e-9:
            continue
        n = nd.field.domain.dim
        stats = superlevel_volumes(nd, deltas)
        scaled = stats.volumes.min(axis=0) * nd.lam ** (n / 2)
        c = np.minimum(c, scaled)
        for d, v in zip(deltas, scaled):
            rows.append(BoundCheckReport("Thm1.3", nd.lam, 0.0, float(v), "fitted", 0.0,
                                         {"delta": float(d)}))
    return c, rows


def check_faber_krahn(nd: NodalDecomposition, slack: float = GRID_SLACK) -> BoundCheckReport:
    """Smallest nodal domain volume against (j^2)^{n/2} alpha_n lam^{-n/2}."""
    domain = nd.field.domain
    if not domain.euclidean:
        raise ValueError("Faber-Krahn check needs a Euclidean domain")
    n = domain.dim
    bound = faber_krahn_constant(n) * nd.lam ** (-n / 2)
    worst = float(nd.volumes.min())
    return BoundCheckReport("FK", nd.lam, bound, worst, "explicit", slack * bound,
                            {"domains": len(nd)})


def superlevel_chain(nd: NodalDecomposition, p: float) -> tuple[float, float, float]:
    """The three sides of the summation step with delta = 1/2.

    Returns (int |u|^p, sum (m_i/2)^p Vol(V_{1/2}^i), c lam^{-n/2} sum m_i^p)
    with c = min_i Vol(V_{1/2}^i) lam^{n/2} 2^{-p}; each term is at least
    the next on any grid.
    """
    n = nd.field.domain.dim
    vols = superlevel_volumes(nd, [0.5]).volumes[:, 0]
    m = nd.extrema
    total = float(np.sum(np.abs(nd.field.values) ** p * nd.field.weights))
    middle = float(np.sum((m / 2) ** p * vols))
    c = float(vols.min()) * nd.lam ** (n / 2) * 2.0 ** (-p)
    lower = c * nd.lam ** (-n / 2) * float(np.sum(m ** p))
    return total, middle, lower


def check_superlevel_chain(nd: NodalDecomposition, p: float) -> list[BoundCheckReport]:
    total, middle, lower = superlevel_chain(nd, p)
    tol = 1e-12 * max(total, 1.0)
    return [BoundCheckReport("Thm1.5-chain", nd.lam, middle, total, "explicit", tol, {"p": p}),
            BoundCheckReport("Thm1.5-chain", nd.lam, lower, middle, "explicit", tol, {"p": p})]


def check_cauchy_schwarz(nd: NodalDecomposition) -> BoundCheckReport:
    """sum m <= (sum m^2 * |domains|)^{1/2}."""
    m = nd.extrema
    lhs = float(m.sum())
    rhs = math.sqrt(float(np.sum(m * m)) * len(m))
    return BoundCheckReport("Cor1.6", nd.lam, lhs, rhs, "explicit", 1e-12 * rhs, {"domains": len(m)})

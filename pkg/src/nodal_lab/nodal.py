"""Nodal domains of sampled eigenfunctions and their extrema.

Two grid points belong to the same nodal domain when they are joined by a
chain of grid edges along which the field keeps a strict sign.  Edges come
from the grid topology (4/6-neighbour lattices, periodic wrap on tori,
longitude wrap and pole fans on the sphere).  Diagonal contact never joins
points: it is where nodal lines cross.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .specfun import bessel_first_zero, unit_ball_volume
from .spectra import EigenPair, ScalarField

DEFAULT_RELATIVE_TOLERANCE = 1e-9
DEFAULT_RELATIVE_MIN_PEAK = 1e-6


@dataclass(frozen=True, eq=False)
class NodalDomain:
    points: np.ndarray
    sign: int
    volume: float
    max_abs: float
    argmax: int
    touches_boundary: bool


@dataclass(frozen=True, eq=False)
class NodalDecomposition:
    domains: list
    zero_tolerance: float
    source: EigenPair | None
    field: ScalarField
    labels: np.ndarray  # domain index per grid point, -1 on the zero set

    def __len__(self) -> int:
        return len(self.domains)

    @property
    def lam(self) -> float:
        if self.source is None:
            raise ValueError("decomposition has no source eigenpair")
        return self.source.lam

    @property
    def extrema(self) -> np.ndarray:
        return np.array([d.max_abs for d in self.domains])

    @property
    def volumes(self) -> np.ndarray:
        return np.array([d.volume for d in self.domains])


def decompose(e: EigenPair | ScalarField, zero_tolerance: float | None = None,
              min_peak: float | None = None) -> NodalDecomposition:
    """Split the support of an eigenfunction into signed connected components.

    Points with |u| <= zero_tolerance form the zero set.  The default
    tolerance is 1e-9 * max|u|; anything above 1% of max|u| is rejected.
    Components whose largest |u| is at most min_peak (default 1e-6 * max|u|)
    are unresolved slivers where several nodal lines meet between grid
    points; they join the zero set.  Domains come back sorted by decreasing
    volume (ties: lowest point index).
    """
    if isinstance(e, EigenPair):
        source, f = e, e.field
    else:
        source, f = None, e
    u = f.values
    top = float(np.max(np.abs(u)))
    if top == 0:
        raise ValueError("cannot decompose a zero field")
    if zero_tolerance is None:
        zero_tolerance = DEFAULT_RELATIVE_TOLERANCE * top
    if not 0 <= zero_tolerance <= 0.01 * top:
        raise ValueError("zero_tolerance must lie in [0, 0.01 * max|u|]")
    if min_peak is None:
        min_peak = DEFAULT_RELATIVE_MIN_PEAK * top
    if not 0 <= min_peak <= 0.01 * top:
        raise ValueError("min_peak must lie in [0, 0.01 * max|u|]")

    g = f.grid
    n = g.size
    pos = u > zero_tolerance
    neg = u < -zero_tolerance
    a, b = g.edges[:, 0], g.edges[:, 1]
    keep = (pos[a] & pos[b]) | (neg[a] & neg[b])
    graph = sp.csr_matrix((np.ones(int(keep.sum())), (a[keep], b[keep])), shape=(n, n))
    ncomp, comp = connected_components(graph, directed=False)

    absu = np.abs(u)
    active = pos | neg
    peak = np.zeros(ncomp)
    np.maximum.at(peak, comp[active], absu[active])
    active &= peak[comp] > min_peak
    idx = np.nonzero(active)[0]
    uniq, local = np.unique(comp[idx], return_inverse=True)
    k = len(uniq)
    volume = np.bincount(local, weights=g.weights[idx], minlength=k)
    # first point of each component after sorting by (label, -|u|, index)
    order = np.lexsort((idx, -absu[idx], local))
    first = np.ones(len(order), bool)
    first[1:] = local[order][1:] != local[order][:-1]
    argmax = idx[order[first]]
    start = np.zeros(k, np.int64)
    members = idx[np.argsort(local, kind="stable")]
    counts = np.bincount(local, minlength=k)
    start[1:] = np.cumsum(counts)[:-1]
    lowest = members[start]
    touches = np.bincount(local, weights=g.boundary[idx].astype(float), minlength=k) > 0

    ranking = np.lexsort((lowest, -volume))
    new_label = np.empty(k, np.int64)
    new_label[ranking] = np.arange(k)
    labels = np.full(n, -1, np.int64)
    labels[idx] = new_label[local]

    domains = []
    for c in ranking:
        pts = members[start[c]:start[c] + counts[c]]
        am = int(argmax[c])
        domains.append(NodalDomain(points=pts, sign=1 if u[am] > 0 else -1,
                                   volume=float(volume[c]), max_abs=float(absu[am]),
                                   argmax=am, touches_boundary=bool(touches[c])))
    return NodalDecomposition(domains, float(zero_tolerance), source, f, labels)


@dataclass(frozen=True)
class SuperlevelStats:
    deltas: np.ndarray
    volumes: np.ndarray  # (domains, deltas)

    def per_domain(self, i: int) -> list[tuple[float, float]]:
        return list(zip(self.deltas.tolist(), self.volumes[i].tolist()))


def superlevel_volumes(nd: NodalDecomposition, deltas) -> SuperlevelStats:
    """Measure of {x in A_i : |u(x)| >= delta * m_{A_i}} for each domain and delta."""
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) < 0):
        raise ValueError("deltas must be sorted ascending")
    if np.any((deltas <= 0) | (deltas >= 1)):
        raise ValueError("deltas must lie in (0, 1)")
    f = nd.field
    lab = nd.labels
    inside = lab >= 0
    local = lab[inside]
    absu = np.abs(f.values[inside])
    w = f.weights[inside]
    m = nd.extrema
    k = len(nd.domains)
    out = np.empty((k, len(deltas)))
    for j, d in enumerate(deltas):
        hit = absu >= d * m[local]
        out[:, j] = np.bincount(local[hit], weights=w[hit], minlength=k)
    return SuperlevelStats(deltas, out)


def extrema_power_sum(nd: NodalDecomposition, p: float) -> float:
    """Sum over nodal domains of m_A^p; ``p = inf`` gives max m_A."""
    m = nd.extrema
    if p == math.inf:
        return float(m.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.sum(m ** p))


def count_high_extrema(nd: NodalDecomposition, a: float, n: int) -> int:
    """Number of nodal domains with m_A >= a * lambda^((n-1)/4)."""
    if a <= 0:
        raise ValueError("a must be positive")
    threshold = a * nd.lam ** ((n - 1) / 4)
    return int(np.count_nonzero(nd.extrema >= threshold))


def faber_krahn_constant(n: int) -> float:
    """lambda_1(B)^{n/2} |B| for the unit ball B in R^n."""
    j = bessel_first_zero(n / 2 - 1)
    return j ** n * unit_ball_volume(n)


def faber_krahn_check(nd: NodalDecomposition, n: int) -> list[tuple[float, float]]:
    """(volume, Faber-Krahn lower bound) for each nodal domain."""
    if nd.source is None or not nd.field.domain.euclidean:
        raise ValueError("Faber-Krahn check needs a Euclidean eigenpair")
    bound = faber_krahn_constant(n) * nd.lam ** (-n / 2)
    return [(d.volume, bound) for d in nd.domains]

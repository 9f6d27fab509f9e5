"""Eigenpairs of the Laplacian on model domains.

Closed forms are sampled on structured grids (rectangle, box, flat torus,
disk, round sphere); masked planar grids get a five-point finite-difference
eigensolver with Dirichlet or Neumann conditions.  Everything downstream
(nodal decomposition, rearrangement, bound checks) sees only ``ScalarField``
objects, so both routes are interchangeable.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg
from scipy.sparse.csgraph import connected_components

from . import specfun

ANALYTIC_KINDS = ("rectangle", "box", "flat_torus", "disk", "sphere")
KINDS = ANALYTIC_KINDS + ("masked_grid",)

DEFAULT_RESOLUTION_2D = 256
DEFAULT_RESOLUTION_3D = 64
DEFAULT_SPHERE_INTERVALS = 256

DENSE_LIMIT = 5000
MAX_FD_POINTS = 20000
MAX_FD_COUNT = 200


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """A model domain plus the grid it is sampled on.

    ``resolution`` is points per unit length for rectangle, box, torus and
    disk, and the number of latitude intervals for the sphere.  Masked grids
    carry their own lattice (``mask``, ``h``, ``origin``): mask[i, j] marks
    the active point origin + (i*h, j*h).
    """

    kind: str
    sides: tuple = ()
    radius: float = 1.0
    bc: str = "dirichlet"
    resolution: float | None = None
    h: float | None = None
    mask: np.ndarray | None = None
    origin: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if any(s <= 0 for s in self.sides) or self.radius <= 0:
            raise ValueError("side lengths and radius must be positive")
        if self.kind == "rectangle" and len(self.sides) != 2:
            raise ValueError("rectangle needs two sides")
        if self.kind == "box" and len(self.sides) != 3:
            raise ValueError("box needs three sides")
        if self.kind == "masked_grid":
            if self.mask is None or self.h is None or self.h <= 0:
                raise ValueError("masked_grid needs a mask and a positive spacing h")
            m = np.asarray(self.mask, dtype=bool)
            if m.ndim != 2 or not m.any():
                raise ValueError("mask must be a non-empty 2-D boolean array")
            object.__setattr__(self, "mask", m)
            if not self.origin:
                object.__setattr__(self, "origin", (0.0, 0.0))

    @property
    def dim(self) -> int:
        if self.kind in ("rectangle", "box", "flat_torus"):
            return len(self.sides)
        return 2

    @property
    def closed(self) -> bool:
        return self.kind in ("flat_torus", "sphere")

    @property
    def euclidean(self) -> bool:
        return self.kind in ("rectangle", "box", "disk", "masked_grid")

    @property
    def volume(self) -> float:
        if self.kind in ("rectangle", "box", "flat_torus"):
            return float(np.prod(self.sides))
        if self.kind == "disk":
            return math.pi * self.radius ** 2
        if self.kind == "sphere":
            return 4 * math.pi
        return float(self.mask.sum()) * self.h ** 2

    def canonical(self) -> dict:
        out = {"kind": self.kind, "bc": self.bc}
        if self.kind in ("rectangle", "box", "flat_torus"):
            out["sides"] = [float(s) for s in self.sides]
        if self.kind == "disk":
            out["radius"] = float(self.radius)
        if self.kind == "masked_grid":
            m = self.mask
            out.update(h=float(self.h), origin=[float(o) for o in self.origin],
                       shape=list(m.shape), mask=np.packbits(m.ravel()).tobytes().hex())
        else:
            out["resolution"] = None if self.resolution is None else float(self.resolution)
        return out

    def key(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @cached_property
    def grid(self) -> "Grid":
        return build_grid(self)


def rectangle(a: float, b: float, bc: str = "dirichlet", resolution=None) -> DomainSpec:
    return DomainSpec("rectangle", sides=(float(a), float(b)), bc=bc, resolution=resolution)


def box(a: float, b: float, c: float, resolution=None) -> DomainSpec:
    return DomainSpec("box", sides=(float(a), float(b), float(c)), resolution=resolution)


def flat_torus(*sides: float, resolution=None) -> DomainSpec:
    return DomainSpec("flat_torus", sides=tuple(float(s) for s in sides), resolution=resolution)


def disk(radius: float = 1.0, resolution=None) -> DomainSpec:
    return DomainSpec("disk", radius=float(radius), resolution=resolution)


def sphere(intervals: int | None = None) -> DomainSpec:
    return DomainSpec("sphere", resolution=intervals)


def masked_grid(mask, h: float, bc: str = "dirichlet", origin=(0.0, 0.0)) -> DomainSpec:
    return DomainSpec("masked_grid", mask=np.asarray(mask, dtype=bool), h=float(h), bc=bc,
                      origin=tuple(float(o) for o in origin))


def square_grid(h: float, side: float = 1.0, bc: str = "dirichlet") -> DomainSpec:
    """(0, side)^2: interior nodes for Dirichlet, cell centres for Neumann."""
    m = int(round(side / h))
    if bc == "dirichlet":
        return masked_grid(np.ones((m - 1, m - 1), bool), h, bc, origin=(h, h))
    return masked_grid(np.ones((m, m), bool), h, bc, origin=(h / 2, h / 2))


def lshape_grid(h: float, bc: str = "dirichlet") -> DomainSpec:
    """(0,2)^2 minus [1,2]^2."""
    m = int(round(2 / h))
    if bc == "dirichlet":
        idx = np.arange(1, m)
        x, y = np.meshgrid(idx * h, idx * h, indexing="ij")
        keep = ~((x >= 1 - 1e-12) & (y >= 1 - 1e-12))
        return masked_grid(keep, h, bc, origin=(h, h))
    c = (np.arange(m) + 0.5) * h
    x, y = np.meshgrid(c, c, indexing="ij")
    return masked_grid(~((x > 1) & (y > 1)), h, bc, origin=(h / 2, h / 2))


def disk_grid(radius: float, h: float, bc: str = "dirichlet") -> DomainSpec:
    """Staircase disk of lattice points (Dirichlet) or cells (Neumann) inside radius."""
    m = int(math.ceil(radius / h)) + 1
    if bc == "dirichlet":
        idx = np.arange(-m, m + 1) * h
    else:
        idx = (np.arange(-m, m) + 0.5) * h
    x, y = np.meshgrid(idx, idx, indexing="ij")
    return masked_grid(x ** 2 + y ** 2 < radius ** 2, h, bc, origin=(idx[0], idx[0]))


@dataclass(eq=False)
class Grid:
    """Sample points of a domain with quadrature weights and a neighbour graph.

    ``coords`` holds Cartesian coordinates, or (theta, phi) on the sphere.
    ``lattice`` maps every lattice site to its point index (-1 if inactive);
    it is None on the sphere.
    """

    domain: DomainSpec
    coords: np.ndarray
    weights: np.ndarray
    edges: np.ndarray
    boundary: np.ndarray
    spacing: tuple
    lattice: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def adjacency(self) -> sp.csr_matrix:
        n = self.size
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def _lattice_edges(lattice: np.ndarray, periodic: bool) -> np.ndarray:
    pairs = []
    for axis in range(lattice.ndim):
        a = lattice
        b = np.roll(lattice, -1, axis=axis)
        if not periodic:
            sl = [slice(None)] * lattice.ndim
            sl[axis] = slice(0, -1)
            a, b = a[tuple(sl)], b[tuple(sl)]
        ok = (a >= 0) & (b >= 0)
        pairs.append(np.stack([a[ok], b[ok]], axis=1))
    return np.concatenate(pairs).astype(np.int64)


def _boundary_flags(active: np.ndarray) -> np.ndarray:
    padded = np.pad(active, 1, constant_values=False)
    near = np.zeros_like(active)
    for axis in range(active.ndim):
        for shift in (-1, 1):
            rolled = np.roll(padded, shift, axis=axis)
            near |= ~rolled[tuple(slice(1, -1) for _ in range(active.ndim))]
    return near[active]


def _lattice_grid(domain, active, axes, spacing, weights_axes=None, periodic=False,
                  boundary=None) -> Grid:
    lattice = np.full(active.shape, -1, dtype=np.int64)
    n = int(active.sum())
    lattice[active] = np.arange(n)
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m[active] for m in mesh], axis=1)
    if weights_axes is None:
        weights = np.full(n, float(np.prod(spacing)))
    else:
        wmesh = np.meshgrid(*weights_axes, indexing="ij")
        weights = np.prod(np.stack([w[active] for w in wmesh], axis=1), axis=1)
    if boundary is None:
        boundary = np.zeros(n, bool) if periodic else _boundary_flags(active)
    return Grid(domain, coords, weights, _lattice_edges(lattice, periodic), boundary,
                tuple(spacing), lattice)


def _clenshaw_curtis(n: int) -> np.ndarray:
    """Weights for int_{-1}^{1} F(t) dt at t_j = cos(j pi / n), j = 0..n (n even)."""
    theta = np.pi * np.arange(n + 1) / n
    w = np.ones(n + 1)
    for k in range(1, n // 2 + 1):
        b = 1.0 if k == n // 2 else 2.0
        w -= b * np.cos(2 * k * theta) / (4 * k * k - 1)
    c = np.full(n + 1, 2.0)
    c[0] = c[-1] = 1.0
    return c * w / n


def _sphere_grid(domain: DomainSpec) -> Grid:
    n = int(domain.resolution or DEFAULT_SPHERE_INTERVALS)
    if n % 2:
        raise ValueError("sphere needs an even number of latitude intervals")
    nphi = 2 * n
    dphi = 2 * np.pi / nphi
    theta = np.pi * np.arange(n + 1) / n
    phi = dphi * np.arange(nphi)
    cc = _clenshaw_curtis(n)
    rings = n - 1
    size = 2 + rings * nphi
    coords = np.empty((size, 2))
    weights = np.empty(size)
    coords[0] = (0.0, 0.0)
    coords[-1] = (np.pi, 0.0)
    weights[0] = weights[-1] = 2 * np.pi * cc[0]
    th, ph = np.meshgrid(theta[1:-1], phi, indexing="ij")
    coords[1:-1, 0] = th.ravel()
    coords[1:-1, 1] = ph.ravel()
    weights[1:-1] = np.repeat(cc[1:-1] * dphi, nphi)

    ring_idx = 1 + np.arange(rings * nphi).reshape(rings, nphi)
    along = np.stack([ring_idx.ravel(), np.roll(ring_idx, -1, axis=1).ravel()], axis=1)
    across = np.stack([ring_idx[:-1].ravel(), ring_idx[1:].ravel()], axis=1)
    north = np.stack([np.zeros(nphi, np.int64), ring_idx[0]], axis=1)
    south = np.stack([np.full(nphi, size - 1, np.int64), ring_idx[-1]], axis=1)
    edges = np.concatenate([along, across, north, south]).astype(np.int64)
    return Grid(domain, coords, weights, edges, np.zeros(size, bool), (np.pi / n, dphi))


def build_grid(domain: DomainSpec) -> Grid:
    kind = domain.kind
    if kind == "sphere":
        return _sphere_grid(domain)
    if kind == "masked_grid":
        h = domain.h
        axes = [domain.origin[i] + h * np.arange(domain.mask.shape[i]) for i in range(2)]
        return _lattice_grid(domain, domain.mask, axes, (h, h))
    if kind == "disk":
        res = domain.resolution or DEFAULT_RESOLUTION_2D
        h = 1.0 / res
        m = int(math.ceil(domain.radius / h))
        # cell centres: the centre itself is not sampled, so sup |u| is
        # underestimated by O(h^2) rather than the L^p quadrature deciding
        # the sign of the equality-case error
        idx = h * (np.arange(-m, m) + 0.5)
        x, y = np.meshgrid(idx, idx, indexing="ij")
        return _lattice_grid(domain, x ** 2 + y ** 2 < domain.radius ** 2, [idx, idx], (h, h))

    res = domain.resolution or (DEFAULT_RESOLUTION_3D if len(domain.sides) == 3
                                else DEFAULT_RESOLUTION_2D)
    periodic = kind == "flat_torus"
    axes, spacing, waxes = [], [], []
    for side in domain.sides:
        m = max(2, int(round(side * res)))
        h = side / m
        spacing.append(h)
        if periodic:
            axes.append(h * np.arange(m))
            waxes.append(np.full(m, h))
        elif domain.bc == "dirichlet":
            axes.append(h * np.arange(1, m))
            waxes.append(np.full(m - 1, h))
        else:
            axes.append(h * np.arange(m + 1))
            w = np.full(m + 1, h)
            w[0] = w[-1] = h / 2
            waxes.append(w)
    active = np.ones(tuple(len(a) for a in axes), bool)
    boundary = None
    if kind != "flat_torus" and domain.bc == "neumann":
        # points on the boundary itself are the boundary-touching ones
        on = np.zeros(active.shape, bool)
        for axis in range(active.ndim):
            sl = [slice(None)] * active.ndim
            for end in (0, -1):
                sl[axis] = end
                on[tuple(sl)] = True
        boundary = on.ravel()
    return _lattice_grid(domain, active, axes, spacing, waxes, periodic, boundary)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.grid.size:
            raise ValueError("field length does not match grid")

    @property
    def domain(self) -> DomainSpec:
        return self.grid.domain

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: float
    field: ScalarField
    index: int
    norm_l2: float = 1.0
    label: tuple = ()

    @property
    def domain(self) -> DomainSpec:
        return self.field.domain


def lp_norm(f: ScalarField, p: float) -> float:
    """Discrete L^p norm; ``p`` may be ``math.inf``."""
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.sum(np.abs(f.values) ** p * f.weights) ** (1.0 / p))


def normalize(e: EigenPair) -> EigenPair:
    """Scale the field to unit discrete L^2 norm.

    On closed domains a non-constant mode must already have zero mean.
    """
    f = e.field
    norm = lp_norm(f, 2)
    if norm == 0:
        raise ValueError("cannot normalise a zero field")
    values = f.values / norm
    if f.domain.closed and e.lam > 1e-9:
        mean = float(np.dot(values, f.weights)) / f.grid.measure
        if abs(mean) > 1e-8:
            raise ValueError(f"non-constant mode on a closed domain has mean {mean:.3e}")
    return EigenPair(e.lam, ScalarField(f.grid, values), e.index, 1.0, e.label)


# -- closed forms ---------------------------------------------------------


def _product_modes(domain: DomainSpec, count: int) -> list[tuple[float, tuple]]:
    sides = domain.sides
    if domain.kind == "flat_torus":
        freq = [2 * np.pi / s for s in sides]
        cut = (count + 1) * max(f * f for f in freq)
        while True:
            per_axis = []
            for f in freq:
                kmax = int(math.sqrt(cut) / f) + 1
                opts = [(0, "c")] + [(k, t) for k in range(1, kmax + 1) for t in ("c", "s")]
                per_axis.append(opts)
            modes = []
            for combo in _cartesian(per_axis):
                lam = sum((k * f) ** 2 for (k, _), f in zip(combo, freq))
                if lam <= cut:
                    modes.append((lam, combo))
            if len(modes) >= count:
                break
            cut *= 2
    else:
        freq = [np.pi / s for s in sides]
        lo = 1 if domain.bc == "dirichlet" else 0
        cut = (count + len(sides)) * max(f * f for f in freq) * 2
        while True:
            per_axis = [list(range(lo, int(math.sqrt(cut) / f) + 2)) for f in freq]
            modes = []
            for combo in _cartesian(per_axis):
                lam = sum((k * f) ** 2 for k, f in zip(combo, freq))
                if lam <= cut:
                    modes.append((lam, tuple(combo)))
            if len(modes) >= count:
                break
            cut *= 2
    modes.sort(key=lambda m: (round(m[0], 9), m[1]))
    modes = modes[:count]
    # tied eigenvalues summed in different orders differ in the last bits
    for i in range(1, len(modes)):
        if round(modes[i][0], 9) == round(modes[i - 1][0], 9):
            modes[i] = (modes[i - 1][0], modes[i][1])
    return modes


def _cartesian(lists):
    out = [()]
    for opts in lists:
        out = [o + (x,) for o in out for x in opts]
    return out


def _disk_modes(domain: DomainSpec, count: int) -> list[tuple[float, tuple]]:
    cut = 2.0 * math.sqrt(count) + 6.0
    while True:
        modes = []
        m = 0
        while True:
            zeros = specfun.bessel_zeros(m, max(1, int(cut / math.pi) + 2))
            zeros = zeros[zeros < cut]
            if zeros.size == 0:
                break
            for s, j in enumerate(zeros, start=1):
                lam = (j / domain.radius) ** 2
                if m == 0:
                    modes.append((lam, (0, s, "c"), j))
                else:
                    modes.append((lam, (m, s, "c"), j))
                    modes.append((lam, (m, s, "s"), j))
            m += 1
        if len(modes) >= count:
            break
        cut *= 1.5
    modes.sort(key=lambda m: (round(m[0], 9), m[1]))
    return [(lam, label + (j,)) for lam, label, j in modes[:count]]


def _sphere_modes(count: int) -> list[tuple[float, tuple]]:
    modes = []
    l = 0
    while len(modes) < count:
        for m in range(-l, l + 1):
            modes.append((float(l * (l + 1)), (l, m)))
        l += 1
    return modes[:count]


def legendre_normalized(lmax: int, m: int, t: np.ndarray) -> np.ndarray:
    """Orthonormal associated Legendre functions (no Condon-Shortley phase).

    Row l - m holds sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(t) for l = m..lmax,
    so that P * cos(m phi) * sqrt(2) integrates to one over the sphere.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.clip(1 - t * t, 0, None))
    out = np.zeros((lmax - m + 1,) + t.shape)
    pmm = np.full_like(t, math.sqrt(1 / (4 * math.pi)))
    for k in range(1, m + 1):
        pmm = pmm * s * math.sqrt((2 * k + 1) / (2 * k))
    out[0] = pmm
    if lmax == m:
        return out
    out[1] = math.sqrt(2 * m + 3) * t * pmm
    for l in range(m + 2, lmax + 1):
        a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        out[l - m] = a * (t * out[l - m - 1] - b * out[l - m - 2])
    return out


def real_spherical_harmonic(l: int, m: int, theta, phi) -> np.ndarray:
    """Real orthonormal Y_l^m: cos(m phi) for m > 0, sin(|m| phi) for m < 0."""
    am = abs(m)
    p = legendre_normalized(l, am, np.cos(theta))[l - am]
    if m == 0:
        return p
    ang = np.cos(am * phi) if m > 0 else np.sin(am * phi)
    return math.sqrt(2) * p * ang


def _sample(domain: DomainSpec, label: tuple, grid: Grid, cache: dict | None = None) -> np.ndarray:
    kind = domain.kind
    c = grid.coords
    if kind == "flat_torus":
        u = np.ones(grid.size)
        for i, ((k, t), side) in enumerate(zip(label, domain.sides)):
            if k == 0:
                continue
            arg = 2 * np.pi * k * c[:, i] / side
            u = u * (np.cos(arg) if t == "c" else np.sin(arg))
        return u
    if kind in ("rectangle", "box"):
        u = np.ones(grid.size)
        trig = np.sin if domain.bc == "dirichlet" else np.cos
        for i, (k, side) in enumerate(zip(label, domain.sides)):
            if k:
                u = u * trig(k * np.pi * c[:, i] / side)
        return u
    if kind == "disk":
        m, s, t, j = label
        key = (m, s)
        if cache is not None and key in cache:
            radial = cache[key]
        else:
            r = np.hypot(c[:, 0], c[:, 1])
            radial = specfun.bessel_j(m, j * r / domain.radius)
            if cache is not None:
                cache[key] = radial
        if m == 0:
            return radial
        ang = np.arctan2(c[:, 1], c[:, 0])
        return radial * (np.cos(m * ang) if t == "c" else np.sin(m * ang))
    if kind == "sphere":
        l, m = label
        return real_spherical_harmonic(l, m, c[:, 0], c[:, 1])
    raise ValueError(f"no closed form for {kind!r}")


def _modes(domain: DomainSpec, count: int):
    if domain.kind in ("rectangle", "box", "flat_torus"):
        return _product_modes(domain, count)
    if domain.kind == "disk":
        if domain.bc != "dirichlet":
            raise ValueError("only Dirichlet disk modes are catalogued")
        return _disk_modes(domain, count)
    if domain.kind == "sphere":
        return _sphere_modes(count)
    raise ValueError(f"analytic_spectrum does not support {domain.kind!r}")


def mode_catalog(domain: DomainSpec, count: int) -> list[tuple[float, tuple]]:
    """(eigenvalue, label) of the ``count`` lowest closed-form modes, unsampled."""
    return [(float(lam), label) for lam, label in _modes(domain, count)]


def count_below(domain: DomainSpec, lam_max: float) -> int:
    """Number of closed-form modes (with multiplicity) with eigenvalue <= lam_max."""
    count = 16
    while True:
        lams = [lam for lam, _ in _modes(domain, count)]
        if lams[-1] > lam_max * (1 + 1e-12):
            return sum(lam <= lam_max * (1 + 1e-12) for lam in lams)
        count *= 2


def mode_eigenvalue(domain: DomainSpec, label: tuple) -> float:
    kind = domain.kind
    if kind == "flat_torus":
        return sum((2 * np.pi * k / s) ** 2 for (k, _), s in zip(label, domain.sides))
    if kind in ("rectangle", "box"):
        return sum((np.pi * k / s) ** 2 for k, s in zip(label, domain.sides))
    if kind == "disk":
        m, s = label[:2]
        j = label[3] if len(label) > 3 else specfun.bessel_zeros(m, s)[-1]
        return (j / domain.radius) ** 2
    if kind == "sphere":
        return float(label[0] * (label[0] + 1))
    raise ValueError(f"no closed form for {kind!r}")


def analytic_mode(domain: DomainSpec, label: tuple, normalized: bool = True,
                  index: int = 0) -> EigenPair:
    """Sample one catalogued mode, e.g. ``(3, 2)`` on a rectangle or
    ``((m, 's'), (m, 's'))`` on a torus.  Disk labels are (m, s, 'c'|'s')."""
    if domain.kind == "disk" and len(label) == 3:
        m, s, t = label
        label = (m, s, t, float(specfun.bessel_zeros(m, s)[-1]))
    f = ScalarField(domain.grid, _sample(domain, label, domain.grid))
    pair = EigenPair(mode_eigenvalue(domain, label), f, index, lp_norm(f, 2), label)
    return normalize(pair) if normalized else pair


def analytic_spectrum(domain: DomainSpec, count: int) -> list[EigenPair]:
    """The ``count`` lowest closed-form eigenpairs, normalised, ascending.

    Multiplicities are enumerated in a fixed order (eigenvalue, then mode
    label), so repeated calls give identical output.
    """
    if domain.kind not in ANALYTIC_KINDS:
        raise ValueError(f"analytic_spectrum does not support {domain.kind!r}")
    if count < 1:
        raise ValueError("count must be >= 1")
    grid = domain.grid
    radial_cache: dict = {}
    out = []
    for i, (lam, label) in enumerate(_modes(domain, count), start=1):
        values = _sample(domain, label, grid, radial_cache)
        f = ScalarField(grid, values)
        out.append(normalize(EigenPair(lam, f, i, lp_norm(f, 2), label)))
    return out


# -- finite differences ---------------------------------------------------


def fd_matrix(domain: DomainSpec) -> sp.csr_matrix:
    """Five-point negative Laplacian on the active points of a masked grid.

    Dirichlet: inactive lattice neighbours count as zeros.  Neumann: missing
    neighbours are dropped (mirror condition), giving a graph Laplacian.
    """
    if domain.kind != "masked_grid":
        raise ValueError("fd_matrix needs a masked_grid domain")
    g = domain.grid
    adj = g.adjacency()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    diag = np.full(g.size, 4.0) if domain.bc == "dirichlet" else deg
    return (sp.diags(diag) - adj).tocsr() / domain.h ** 2


def _sign_fix(v: np.ndarray) -> np.ndarray:
    big = np.abs(v) > 1e-8 * np.max(np.abs(v))
    first = int(np.argmax(big))
    return -v if v[first] < 0 else v


def fd_spectrum(domain: DomainSpec, count: int) -> list[EigenPair]:
    """Lowest ``count`` eigenpairs of the five-point Laplacian on a masked grid.

    Dense symmetric solve up to 5000 points, shift-invert Lanczos above.
    """
    if domain.kind != "masked_grid":
        raise ValueError("fd_spectrum needs a masked_grid domain")
    g = domain.grid
    n = g.size
    if n > MAX_FD_POINTS:
        raise ValueError(f"{n} active points exceeds the limit of {MAX_FD_POINTS}")
    if not 1 <= count <= min(n, MAX_FD_COUNT):
        raise ValueError(f"count must be in [1, {min(n, MAX_FD_COUNT)}]")
    ncomp, _ = connected_components(g.adjacency(), directed=False)
    if ncomp != 1:
        raise ValueError(f"mask has {ncomp} connected components, expected one")
    a = fd_matrix(domain)
    if n <= DENSE_LIMIT:
        lam, vec = scipy.linalg.eigh(a.toarray(), subset_by_index=[0, count - 1])
    else:
        rng = np.random.default_rng(0)
        lam, vec = scipy.sparse.linalg.eigsh(a.tocsc(), k=count, sigma=-1.0, which="LM",
                                             v0=rng.standard_normal(n), tol=0)
        if not np.all(np.isfinite(lam)):
            raise RuntimeError("Lanczos iteration did not converge")
    order = np.argsort(lam, kind="stable")
    out = []
    for i, k in enumerate(order, start=1):
        v = _sign_fix(vec[:, k])
        f = ScalarField(g, v)
        out.append(normalize(EigenPair(float(lam[k]), f, i, lp_norm(f, 2), ("fd", i))))
    return out


def spectrum(domain: DomainSpec, count: int) -> list[EigenPair]:
    if domain.kind == "masked_grid":
        return fd_spectrum(domain, count)
    return analytic_spectrum(domain, count)


def discrete_laplacian(f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Apply the grid's finite-difference -Laplacian to ``f``.

    Returns (values, defined): lattice grids use zero values outside the
    domain (Dirichlet closure); on the sphere only points at least two rings
    from a pole are evaluated.
    """
    g = f.grid
    u = f.values
    if g.lattice is not None:
        lat = g.lattice
        full = np.zeros(lat.shape)
        full[lat >= 0] = u[lat[lat >= 0]]
        periodic = g.domain.kind == "flat_torus"
        out = np.zeros(lat.shape)
        defined = lat >= 0
        for axis, h in enumerate(g.spacing):
            if periodic:
                nb = np.roll(full, 1, axis) + np.roll(full, -1, axis)
            else:
                pad = np.pad(full, [(1, 1) if a == axis else (0, 0) for a in range(lat.ndim)])
                sl_lo = [slice(None)] * lat.ndim
                sl_hi = [slice(None)] * lat.ndim
                sl_lo[axis] = slice(0, -2)
                sl_hi[axis] = slice(2, None)
                nb = pad[tuple(sl_lo)] + pad[tuple(sl_hi)]
            out += (2 * full - nb) / h ** 2
        if g.domain.bc == "neumann" and not periodic:
            defined = defined & ~np.isin(lat, np.nonzero(g.boundary)[0])
        # lattice indices were assigned in C order, so boolean selection keeps point order
        return out[lat >= 0], defined[lat >= 0]
    # sphere
    n = int(round(np.pi / g.spacing[0]))
    nphi = 2 * n
    dth, dph = g.spacing
    rings = u[1:-1].reshape(n - 1, nphi)
    theta = np.pi * np.arange(1, n) / n
    out = np.full(rings.shape, np.nan)
    t = theta[1:-1, None]
    up, mid, dn = rings[:-2], rings[1:-1], rings[2:]
    sp_plus = np.sin(t + dth / 2)
    sp_minus = np.sin(t - dth / 2)
    lap = (sp_plus * (dn - mid) - sp_minus * (mid - up)) / (np.sin(t) * dth ** 2)
    lap += (np.roll(mid, 1, 1) - 2 * mid + np.roll(mid, -1, 1)) / (np.sin(t) ** 2 * dph ** 2)
    out[1:-1] = -lap
    vals = np.concatenate([[np.nan], out.ravel(), [np.nan]])
    return np.nan_to_num(vals), np.isfinite(vals)

import math
from collections import deque

import numpy as np
import pytest
from scipy import integrate

from nodal_lab import nodal, spectra


def flood_fill_labels(values, periodic=False):
    """Independent oracle: 4-neighbour BFS on a 2-D array of signs."""
    sign = np.sign(values).astype(int)
    nx, ny = sign.shape
    labels = -np.ones(sign.shape, int)
    count = 0
    for i in range(nx):
        for j in range(ny):
            if sign[i, j] == 0 or labels[i, j] >= 0:
                continue
            labels[i, j] = count
            queue = deque([(i, j)])
            while queue:
                a, b = queue.popleft()
                for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    c, d = a + da, b + db
                    if periodic:
                        c, d = c % nx, d % ny
                    elif not (0 <= c < nx and 0 <= d < ny):
                        continue
                    if labels[c, d] < 0 and sign[c, d] == sign[a, b]:
                        labels[c, d] = count
                        queue.append((c, d))
            count += 1
    return labels, count


def same_partition(a, b):
    # a bijection between label sets, with the zero set (-1) fixed
    pairs = set(zip(a.tolist(), b.tolist()))
    left = {x for x, _ in pairs}
    right = {y for _, y in pairs}
    return len(pairs) == len(left) == len(right) and all((x < 0) == (y < 0) for x, y in pairs)


@pytest.mark.parametrize("seed", range(5))
def test_labels_match_flood_fill_on_random_fields(seed):
    rng = np.random.default_rng(seed)
    d = spectra.rectangle(1.0, 1.0, resolution=20)
    g = d.grid
    shape = g.lattice.shape
    vals = rng.standard_normal(shape).cumsum(axis=0).cumsum(axis=1)
    vals -= vals.mean()
    nd = nodal.decompose(spectra.ScalarField(g, vals.ravel()), zero_tolerance=0.0, min_peak=0.0)
    oracle, count = flood_fill_labels(vals)
    assert len(nd) == count
    assert same_partition(nd.labels, oracle.ravel())


@pytest.mark.parametrize("seed", range(3))
def test_labels_match_flood_fill_on_torus(seed):
    rng = np.random.default_rng(100 + seed)
    d = spectra.flat_torus(1.0, 1.0, resolution=16)
    g = d.grid
    vals = rng.standard_normal(g.lattice.shape)
    nd = nodal.decompose(spectra.ScalarField(g, vals.ravel()), zero_tolerance=0.0, min_peak=0.0)
    oracle, count = flood_fill_labels(vals, periodic=True)
    assert len(nd) == count
    assert same_partition(nd.labels, oracle.ravel())


@pytest.mark.parametrize("k,l", [(1, 1), (2, 3), (4, 4), (5, 2)])
def test_rectangle_mode_domain_count(k, l):
    e = spectra.analytic_mode(spectra.rectangle(1.0, 1.0, resolution=128), (k, l))
    nd = nodal.decompose(e)
    assert len(nd) == k * l
    # nodal lines on grid points drop into the zero set, a strip of width h per line
    assert np.allclose(nd.volumes, 1 / (k * l), rtol=(k + l) * 2 / 128)
    assert sorted(set(d.sign for d in nd.domains)) == ([1] if k * l == 1 else [-1, 1])


def test_torus_mode_domain_count():
    m = 3
    d = spectra.flat_torus(2 * math.pi, 2 * math.pi, resolution=96 / (2 * math.pi))
    nd = nodal.decompose(spectra.analytic_mode(d, ((m, "s"), (m, "s")), normalized=False))
    assert len(nd) == 4 * m * m
    assert nd.extrema == pytest.approx(np.ones(4 * m * m))


def test_sphere_zonal_and_sectoral_counts():
    d = spectra.sphere(128)
    for l in (1, 4, 7):
        assert len(nodal.decompose(spectra.analytic_mode(d, (l, 0)))) == l + 1
        assert len(nodal.decompose(spectra.analytic_mode(d, (l, l)))) == 2 * l


def test_disk_mode_domain_counts():
    d = spectra.disk(1.0, resolution=128)
    assert len(nodal.decompose(spectra.analytic_mode(d, (0, 3, "c")))) == 3
    assert len(nodal.decompose(spectra.analytic_mode(d, (2, 2, "s")))) == 8


def test_unresolved_centre_slivers_join_the_zero_set():
    # 2m nodal lines meet at the centre, where |u| ~ r^m leaves cells of tiny magnitude
    # cut off from their sector
    d = spectra.disk(1.0, resolution=128)
    for label, count in (((4, 1, "c"), 8), ((6, 1, "s"), 12)):
        e = spectra.analytic_mode(d, label)
        assert len(nodal.decompose(e)) == count
        assert len(nodal.decompose(e, min_peak=0.0)) > count
    with pytest.raises(ValueError):
        nodal.decompose(e, min_peak=1.0)


def test_volumes_and_ordering():
    e = spectra.analytic_mode(spectra.rectangle(2.0, 1.0, resolution=64), (3, 1))
    nd = nodal.decompose(e)
    assert nd.volumes.sum() == pytest.approx(e.field.grid.measure - np.sum(
        e.field.weights[nd.labels < 0]))
    assert np.all(np.diff(nd.volumes) <= 1e-15)
    for i, dom in enumerate(nd.domains):
        assert np.all(nd.labels[dom.points] == i)
        assert dom.max_abs == pytest.approx(np.max(np.abs(e.field.values[dom.points])))


def test_decompose_rejects_bad_input():
    g = spectra.rectangle(1.0, 1.0, resolution=8).grid
    with pytest.raises(ValueError):
        nodal.decompose(spectra.ScalarField(g, np.zeros(g.size)))
    with pytest.raises(ValueError):
        nodal.decompose(spectra.ScalarField(g, np.ones(g.size)), zero_tolerance=0.5)
    nd = nodal.decompose(spectra.ScalarField(g, np.ones(g.size)))
    with pytest.raises(ValueError):
        nd.lam


def test_superlevel_volumes():
    e = spectra.analytic_mode(spectra.rectangle(1.0, 1.0, resolution=128), (2, 1))
    nd = nodal.decompose(e)
    stats = nodal.superlevel_volumes(nd, [0.1, 0.5, 0.9])
    assert stats.volumes.shape == (2, 3)
    assert np.all(np.diff(stats.volumes, axis=1) <= 0)
    assert np.all(stats.volumes[:, 0] <= nd.volumes + 1e-15)
    # each half is a copy of sin(pi x) sin(pi y) scaled by 1/2 in x
    y0 = math.asin(0.5) / math.pi
    exact, _ = integrate.quad(
        lambda y: 1 - 2 / math.pi * math.asin(0.5 / math.sin(math.pi * y)), y0, 1 - y0)
    assert stats.volumes[0, 1] == pytest.approx(0.5 * exact, rel=0.02)
    assert stats.per_domain(0)[0][0] == 0.1
    with pytest.raises(ValueError):
        nodal.superlevel_volumes(nd, [0.5, 0.1])
    with pytest.raises(ValueError):
        nodal.superlevel_volumes(nd, [0.0])


def test_extrema_power_sums_and_counts():
    d = spectra.rectangle(1.0, 1.0, resolution=64)
    nd = nodal.decompose(spectra.analytic_mode(d, (2, 2), normalized=False))
    assert nodal.extrema_power_sum(nd, 1) == pytest.approx(4.0)
    assert nodal.extrema_power_sum(nd, math.inf) == pytest.approx(1.0)
    assert nodal.count_high_extrema(nd, 0.1, 2) == 4
    assert nodal.count_high_extrema(nd, 10.0, 2) == 0
    with pytest.raises(ValueError):
        nodal.extrema_power_sum(nd, 0.5)
    with pytest.raises(ValueError):
        nodal.count_high_extrema(nd, 0.0, 2)


def test_faber_krahn_constant():
    assert nodal.faber_krahn_constant(2) == pytest.approx(2.404825557695773 ** 2 * math.pi)
    assert nodal.faber_krahn_constant(3) == pytest.approx(math.pi ** 3 * 4 * math.pi / 3)
    e = spectra.analytic_mode(spectra.disk(1.0, resolution=128), (0, 1, "c"))
    (vol, bound), = nodal.faber_krahn_check(nodal.decompose(e), 2)
    assert vol == pytest.approx(bound, rel=0.01)

"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from nodal_lab import bounds, nodal, plap, rearrange, spectra
from nodal_lab.claims import RunConfig, bathtub_trial, chiti_rows, claim_newtonian, \
    hardy_littlewood_trials

DELTAS = tuple(round(0.1 * k, 1) for k in range(1, 10))


@pytest.fixture
def say(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def square50():
    pairs = spectra.analytic_spectrum(spectra.rectangle(1.0, 1.0, resolution=256), 50)
    return [nodal.decompose(e) for e in pairs]


@pytest.fixture(scope="module")
def lshape50():
    pairs = spectra.spectrum(spectra.lshape_grid(1 / 64), 50)
    return [nodal.decompose(e) for e in pairs]


@pytest.fixture(scope="module")
def disk30():
    pairs = spectra.analytic_spectrum(spectra.disk(1.0, resolution=128), 30)
    return [nodal.decompose(e) for e in pairs]


def chiti_n3_oracle(p):
    # on the unit ball u(r) = sin(pi r) / (pi r), lam = pi^2, sup u = 1, and with s = pi r
    # ||u||_p^p = 4 pi pi^-3 int_0^pi |sin s|^p s^(2-p) ds
    val, _ = integrate.quad(lambda s: math.sin(s) ** p * s ** (2 - p), 0, math.pi,
                            epsabs=1e-14, epsrel=1e-13)
    norm_p = (4 * math.pi * val / math.pi ** 3) ** (1 / p)
    lam = math.pi ** 2
    return 1.0 / (lam ** (3 / (2 * p)) * norm_p)


def test_criterion_01_chiti_constant(say):
    got = {p: bounds.chiti_constant(3, p).value for p in (1, 2)}
    closed = {1: 1 / (4 * math.pi ** 2), 2: 1 / (math.pi * math.sqrt(2))}
    errs = [max(abs(got[p] - closed[p]), abs(got[p] - chiti_n3_oracle(p))) for p in (1, 2)]
    ok = say(1, max(errs) < 1e-8, f"K(3,1)={got[1]:.12g} K(3,2)={got[2]:.12g} max err {max(errs):.2e}")
    assert ok


def test_criterion_02_chiti_equality_on_disk(say):
    t0 = time.perf_counter()
    disk_rows, square_rows = chiti_rows(ps=(1.0, 2.0))
    elapsed = time.perf_counter() - t0
    disk = [r.extra["ratio"] for r in disk_rows if r.claim == "Chiti-eq"]
    square = {r.extra["p"]: r.extra["ratio"] for r in square_rows}
    ok = all(0.995 <= x <= 1.0 for x in disk) and all(x < 1.0 for x in square.values()) \
        and elapsed < 5
    ok = say(2, ok, f"disk ratios {disk}, square ratios {square} (strictly < 1), {elapsed:.2f}s")
    assert ok


@pytest.mark.parametrize("p", [
    1.0,
    # exact value for sin(pi x) sin(pi y) is 0.99613; see notes in the README
    pytest.param(2.0, marks=pytest.mark.xfail(strict=True, reason="square ratio at p=2 is 0.996")),
])
def test_criterion_02_square_ratio_below_099(say, p):
    _, square_rows = chiti_rows(ps=(p,))
    ratio = square_rows[0].extra["ratio"]
    ok = say(2, ratio <= 0.99, f"unit square p={p:g} ratio {ratio:.6f} <= 0.99")
    assert ok


def test_criterion_03_explicit_extrema_sums(say, square50, lshape50):
    t0 = time.perf_counter()
    worst = {}
    for name, nds in (("square", square50), ("lshape", lshape50)):
        for p in (1, 2):
            reports, _ = bounds.check_extrema_sums(nds, p, mode="explicit")
            assert len(reports) == 50
            worst[name, p] = min(r.margin / r.rhs for r in reports)
            assert all(r.passed for r in reports)
    elapsed = time.perf_counter() - t0
    ok = min(worst.values()) >= 0 and elapsed < 90
    ok = say(3, ok, "min relative margins " + ", ".join(f"{k[0]}/P{k[1]}={v:.4f}"
                                                       for k, v in worst.items()))
    assert ok


def superlevel_oracle(delta):
    # volume of {sin(pi x) sin(pi y) sin(pi z) >= delta} in the unit cube: the x-section is
    # exact, and for each y the z-range is where sin(pi y) sin(pi z) > delta
    def inner(z, y):
        s = math.sin(math.pi * y) * math.sin(math.pi * z)
        return 1 - 2 / math.pi * math.asin(min(1.0, delta / s))

    def z_lo(y):
        return math.asin(min(1.0, delta / math.sin(math.pi * y))) / math.pi

    y0 = math.asin(delta) / math.pi
    val, _ = integrate.dblquad(inner, y0, 1 - y0, z_lo, lambda y: 1 - z_lo(y),
                               epsabs=1e-10, epsrel=1e-10)
    return val


def superlevel_error(resolution, oracle):
    e = spectra.analytic_mode(spectra.box(1, 1, 1, resolution=resolution), (1, 1, 1))
    stats = nodal.superlevel_volumes(nodal.decompose(e), list(oracle))
    return max(abs(v - oracle[d]) / oracle[d] for d, v in zip(oracle, stats.volumes[0]))


def test_criterion_04_superlevel_volumes(say):
    domain = spectra.box(1, 1, 1)
    count = spectra.count_below(domain, 300.0)
    worst = math.inf
    for e in spectra.analytic_spectrum(domain, count):
        rows = bounds.check_lemma12(nodal.decompose(e), DELTAS)
        assert all(r.passed for r in rows), [(r.lam, r.extra) for r in rows if not r.passed]
        worst = min(worst, min(r.margin / r.lhs for r in rows))
    oracle = {d: superlevel_oracle(d) for d in (0.1, 0.3, 0.5, 0.7, 0.9)}
    errs = {r: superlevel_error(r, oracle) for r in (32, 64, 128)}
    halves = errs[32] / errs[64] >= 2 and errs[64] / errs[128] >= 2
    ok = say(4, halves, f"{count} modes, worst relative margin {worst:.3f}; grid error "
             + ", ".join(f"res {r}: {v:.2e}" for r, v in errs.items()))
    assert ok


def test_criterion_05_torus_sharpness(say):
    lams, sums = [], []
    for m in range(1, 11):
        # 32 m points per period puts every extremum on a grid point
        d = spectra.flat_torus(2 * math.pi, 2 * math.pi, resolution=32 * m / (2 * math.pi))
        e = spectra.analytic_mode(d, ((m, "s"), (m, "s")), normalized=False)
        nd = nodal.decompose(e)
        s = nodal.extrema_power_sum(nd, 1)
        assert len(nd) == 4 * m * m
        assert s == pytest.approx(4 * m * m, rel=1e-12)
        lams.append(e.lam)
        sums.append(s)
    assert lams == pytest.approx([2 * m * m for m in range(1, 11)])
    fit = bounds.ScalingFit.fit(lams, sums)
    ok = say(5, abs(fit.slope - 1.0) <= 0.02, f"sum m = 4m^2 exactly, slope {fit.slope:.6f}")
    assert ok


def test_criterion_06_sogge_exponents(say):
    jumps = []
    for n in range(2, 7):
        pc = bounds.sogge_breakpoint(n)
        assert pc == pytest.approx(2 * (n + 1) / (n - 1))
        jumps.append(abs(bounds.sogge_delta(n, pc * (1 - 1e-15))
                         - bounds.sogge_delta(n, pc * (1 + 1e-15))))
    d = spectra.sphere(256)
    lams, sups = [], []
    for l in range(2, 13):
        e = spectra.analytic_mode(d, (l, 0))
        lams.append(e.lam)
        sups.append(spectra.lp_norm(e.field, math.inf) / spectra.lp_norm(e.field, 2))
    fit = bounds.ScalingFit.fit(lams, sups)
    target = bounds.sogge_delta(2, math.inf)
    ok = max(jumps) < 1e-12 and abs(fit.slope - target) <= 0.03
    ok = say(6, ok, f"max jump {max(jumps):.1e}; zonal slope {fit.slope:.4f} vs {target}")
    assert ok


def test_criterion_07_courant(say, square50, lshape50, disk30):
    groups = {
        "square": square50[:40],
        "disk": disk30,
        "lshape": lshape50[:40],
        "torus": [nodal.decompose(e) for e in spectra.analytic_spectrum(
            spectra.flat_torus(2 * math.pi, 2 * math.pi, resolution=64 / (2 * math.pi)), 20)],
        "sphere": [nodal.decompose(e) for e in spectra.analytic_spectrum(spectra.sphere(128), 36)],
    }
    total, violations = 0, []
    for name, nds in groups.items():
        for nd in nds:
            total += 1
            if len(nd) > nd.source.index:
                violations.append((name, nd.source.index, len(nd)))
    ok = say(7, total >= 150 and not violations, f"{total} eigenfunctions, violations {violations}")
    assert ok


def test_criterion_08_faber_krahn(say, square50, lshape50, disk30):
    rows = [bounds.check_faber_krahn(nd) for nd in square50 + lshape50 + disk30]
    worst = min(r.margin / r.lhs for r in rows)
    ground = disk30[0]
    bound = nodal.faber_krahn_constant(2) / ground.lam
    rel = abs(ground.volumes[0] - bound) / bound
    ok = all(r.passed for r in rows) and rel <= 0.02
    ok = say(8, ok, f"{len(rows)} eigenfunctions, worst relative margin {worst:.4f}; "
             f"disk ground state within {rel:.2e}")
    assert ok


def test_criterion_09_bathtub_and_hardy_littlewood(say):
    greedy, others = bathtub_trial(seed=0)
    pairs = hardy_littlewood_trials(seed=0, trials=1000)
    hl_bad = sum(lhs > rhs + 1e-12 * max(1.0, rhs) for lhs, rhs in pairs)
    ok = others.size == 200 and bool(np.all(others <= greedy)) and len(pairs) == 1000 and hl_bad == 0
    ok = say(9, ok, f"greedy {greedy:.6g} vs best random {others.max():.6g}; "
             f"HL violations {hl_bad}/1000")
    assert ok


def test_criterion_10_newtonian_potential(say):
    (res,) = claim_newtonian(RunConfig(seed=0))
    ellipsoids = [r for r in res.rows if r["claim"] == "Prop2.1"]
    ball = res.notes["ball"]
    bound = rearrange.newtonian_potential_sup(3, 4 * math.pi / 3)
    ok = len(ellipsoids) == 50 and all(r["pass"] for r in ellipsoids) and abs(ball - 0.5) <= 0.005
    ok = say(10, ok, f"max estimate {max(r['lhs'] for r in ellipsoids):.5f} vs "
             f"1.01 bound {1.01 * bound:.5f}; ball {ball:.5f}")
    assert ok


def test_criterion_11_p_laplacian(say):
    base = plap.sinp_eigenpair(2.0, 1.0)
    rows = [plap.check_lindqvist(plap.sinp_eigenpair(p, 1.0), 1, 1.0) for p in (1.5, 2.0, 3.0, 5.0)]
    radial = plap.radial_plap_eigenpair(2.0, 1.0)
    rows.append(plap.check_lindqvist(radial, 2, radial.volume))
    agree = {}
    for p in (1.5, 2.0, 3.0, 5.0):
        shoot = plap.sinp_eigenpair(p, 1.0).lam
        agree[p] = abs(plap.rayleigh_descent_eigenvalue(p, 1.0) - shoot) / shoot
    ok = abs(base.lam - math.pi ** 2) < 1e-6 and all(r.passed for r in rows) \
        and max(agree.values()) < 1e-3
    ok = say(11, ok, f"|lam - pi^2| = {abs(base.lam - math.pi ** 2):.1e}; descent agreement "
             + ", ".join(f"p={p:g}: {v:.1e}" for p, v in agree.items()))
    assert ok


def test_criterion_12_fd_convergence(say):
    exact = 2 * math.pi ** 2
    err = {h: abs(spectra.spectrum(spectra.square_grid(h), 1)[0].lam - exact)
           for h in (1 / 32, 1 / 64)}
    ratio = err[1 / 32] / err[1 / 64]
    ok = say(12, ratio >= 3.5, f"error ratio {ratio:.4f}")
    assert ok


def test_criterion_13_neumann(say):
    mus, s1, s2, touching = [], [], [], []
    for m in range(1, 13):
        # N points per side with N a multiple of m keeps every extremum on the grid
        n_pts = 24 * m
        d = spectra.rectangle(math.pi, math.pi, "neumann", resolution=n_pts / math.pi)
        e = spectra.analytic_mode(d, (m, m), normalized=False)
        nd = nodal.decompose(e)
        assert nodal.extrema_power_sum(nd, 1) == pytest.approx((m + 1) ** 2, rel=1e-12)
        mus.append(e.lam)
        s1.append(nodal.extrema_power_sum(nd, 1))
        s2.append(nodal.extrema_power_sum(nd, 2))
        touching.append(sum(dom.touches_boundary for dom in nd.domains))
    assert touching == [4 * m for m in range(1, 13)]
    f1 = bounds.ScalingFit.fit(mus, s1)
    f2 = bounds.ScalingFit.fit(mus, s2)
    ft = bounds.ScalingFit.fit(mus, touching)
    ok = f1.slope <= 1.05 and f2.slope <= 1.05 and abs(ft.slope - 0.5) <= 0.1
    ok = say(13, ok, f"slopes sum m {f1.slope:.4f}, sum m^2 {f2.slope:.4f}, "
             f"touching {ft.slope:.4f}")
    assert ok

import numpy as np

from nodal_lab import cache, spectra


def small_domain():
    return spectra.rectangle(1.0, 2.0, resolution=16)


def test_round_trip_is_bit_identical(tmp_path):
    d = small_domain()
    first, hit = cache.cached_spectrum(d, 5, tmp_path)
    assert not hit
    second, hit = cache.cached_spectrum(d, 5, tmp_path)
    assert hit
    for a, b in zip(first, second):
        assert a.lam == b.lam
        assert a.label == b.label
        assert a.index == b.index
        assert a.norm_l2 == b.norm_l2
        assert np.array_equal(a.field.values, b.field.values)


def test_file_layout(tmp_path):
    d = small_domain()
    cache.cached_spectrum(d, 3, tmp_path)
    path = cache.cache_path(tmp_path, d, 3)
    raw = path.read_bytes()
    assert raw.startswith(cache.MAGIC)
    assert path.name.endswith("-3.spec")
    assert not list(tmp_path.glob(".tmp-*"))


def test_corruption_forces_recompute(tmp_path):
    d = small_domain()
    pairs, _ = cache.cached_spectrum(d, 4, tmp_path)
    path = cache.cache_path(tmp_path, d, 4)
    raw = bytearray(path.read_bytes())
    raw[-3] ^= 0xFF
    path.write_bytes(bytes(raw))
    assert cache.load_spectrum(path, d, 4) is None
    again, hit = cache.cached_spectrum(d, 4, tmp_path)
    assert not hit
    assert [e.lam for e in again] == [e.lam for e in pairs]
    assert cache.load_spectrum(path, d, 4) is not None


def test_mismatches_are_rejected(tmp_path):
    d = small_domain()
    cache.cached_spectrum(d, 4, tmp_path)
    path = cache.cache_path(tmp_path, d, 4)
    assert cache.load_spectrum(path, d, 5) is None
    assert cache.load_spectrum(path, spectra.rectangle(1.0, 2.0, resolution=32), 4) is None
    assert cache.load_spectrum(tmp_path / "missing.spec", d, 4) is None
    path.write_bytes(b"garbage")
    assert cache.load_spectrum(path, d, 4) is None


def test_no_cache_dir_always_computes():
    pairs, hit = cache.cached_spectrum(small_domain(), 2)
    assert not hit and len(pairs) == 2

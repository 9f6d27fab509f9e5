"""On-disk spectrum cache.

File layout: the magic line ``NODALLAB-SPECTRUM\\n``, an 8-byte little-endian
header length, a UTF-8 JSON header, then the payload of little-endian
float64 values (all eigenvalues, then each field in turn).  The header
records the format version, the canonical domain, grid spacing, count,
number of points, mode labels and a sha256 of the payload.  A file that
fails any check is ignored and the spectrum recomputed.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .spectra import DomainSpec, EigenPair, ScalarField, spectrum

MAGIC = b"NODALLAB-SPECTRUM\n"
FORMAT_VERSION = 1
_LE_F8 = np.dtype("<f8")


def cache_path(cache_dir, domain: DomainSpec, count: int) -> Path:
    return Path(cache_dir) / f"{domain.key()[:32]}-{count}.spec"


def _tupled(x):
    if isinstance(x, list):
        return tuple(_tupled(v) for v in x)
    return x


def _spacing(domain: DomainSpec) -> list[float]:
    return [float(s) for s in domain.grid.spacing]


def save_spectrum(path, domain: DomainSpec, pairs: list[EigenPair]) -> None:
    lams = np.array([e.lam for e in pairs], dtype=_LE_F8)
    fields = np.stack([e.field.values for e in pairs]).astype(_LE_F8)
    payload = lams.tobytes() + fields.tobytes()
    header = {
        "format_version": FORMAT_VERSION,
        "domain": domain.canonical(),
        "h": _spacing(domain),
        "count": len(pairs),
        "points": int(fields.shape[1]),
        "labels": [list(e.label) for e in pairs],
        "norms": [float(e.norm_l2) for e in pairs],
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(payload)
    os.replace(tmp, path)


def load_spectrum(path, domain: DomainSpec, count: int) -> list[EigenPair] | None:
    """Pairs stored at ``path`` for exactly this domain and count, else None."""
    try:
        raw = Path(path).read_bytes()
    except OSError:
        return None
    if not raw.startswith(MAGIC) or len(raw) < len(MAGIC) + 8:
        return None
    pos = len(MAGIC)
    (hlen,) = struct.unpack("<Q", raw[pos:pos + 8])
    pos += 8
    try:
        header = json.loads(raw[pos:pos + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError):
        return None
    payload = raw[pos + hlen:]
    grid = domain.grid
    if (header.get("format_version") != FORMAT_VERSION
            or header.get("domain") != domain.canonical()
            or header.get("h") != _spacing(domain)
            or header.get("count") != count
            or header.get("points") != grid.size
            or len(payload) != 8 * count * (grid.size + 1)
            or hashlib.sha256(payload).hexdigest() != header.get("sha256")):
        return None
    data = np.frombuffer(payload, dtype=_LE_F8).astype(float)
    lams = data[:count]
    fields = data[count:].reshape(count, grid.size)
    return [EigenPair(float(lam), ScalarField(grid, fields[i].copy()), i + 1,
                      header["norms"][i], _tupled(header["labels"][i]))
            for i, lam in enumerate(lams)]


def cached_spectrum(domain: DomainSpec, count: int, cache_dir=None) -> tuple[list[EigenPair], bool]:
    """(pairs, hit): reuse a valid cache file or compute and store a new one."""
    if cache_dir is None:
        return spectrum(domain, count), False
    path = cache_path(cache_dir, domain, count)
    pairs = load_spectrum(path, domain, count)
    if pairs is not None:
        return pairs, True
    pairs = spectrum(domain, count)
    save_spectrum(path, domain, pairs)
    return pairs, False

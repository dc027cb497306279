"""On-disk cache of eigen-data and plus-space bases, plus the in-process provider.

Entries are JSON documents::

    {"schema_version": 1, "kind": "eigen", "key": {...}, "payload": {...},
     "content_hash": "<sha256 of the canonical payload>"}

Exact rationals are stored as "num/den" strings; reals as
[hex significand, binary exponent] pairs, so a round trip is bitwise exact.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from mpmath import mp, mpf
from mpmath.libmp import from_man_exp

from .eigenforms import HeckeEigenform, eigenforms
from .specialfn import DEFAULT_PREC

SCHEMA_VERSION = 1
CACHE_ENV = "LVALUES_CACHE_DIR"

log = logging.getLogger(__name__)

_cache_dir: Path | None = Path(os.environ[CACHE_ENV]) if os.environ.get(CACHE_ENV) else None
_memory: dict[tuple, list[HeckeEigenform]] = {}


def set_cache_dir(path) -> None:
    global _cache_dir
    _cache_dir = Path(path) if path else None


def get_cache_dir() -> Path | None:
    return _cache_dir


# ---------------------------------------------------------------------------
# encoding


def encode_real(x: mpf) -> list[str]:
    sign, man, exp, _ = x._mpf_
    if not man:
        # zero and the special values keep their raw tuple
        return ["0x0", str(exp)] if x == 0 else ["nan", "0"]
    return [("-" if sign else "") + hex(int(man)), str(int(exp))]


def decode_real(v) -> mpf:
    h, e = v
    if h == "nan":
        return mpf("nan")
    m = int(h, 16)
    if m == 0:
        return mpf(0)
    # no rounding: the stored significand is restored exactly
    return mp.make_mpf(from_man_exp(m, int(e)))


def encode_fraction(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def decode_fraction(s: str) -> Fraction:
    n, d = s.split("/")
    return Fraction(int(n), int(d))


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(payload) -> str:
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


def encode_eigenform(f: HeckeEigenform) -> dict:
    return {
        "k": f.k,
        "eigen_index": f.eigen_index,
        "prec_bits": f.prec_bits,
        "fricke_sign": f.fricke_sign,
        "lam": [encode_real(x) for x in f.lam],
        "lam_err": [encode_real(x) for x in f.lam_err],
    }


def decode_eigenform(d: dict) -> HeckeEigenform:
    return HeckeEigenform(
        k=d["k"],
        lam=tuple(decode_real(x) for x in d["lam"]),
        lam_err=tuple(decode_real(x) for x in d["lam_err"]),
        eigen_index=d["eigen_index"],
        prec_bits=d["prec_bits"],
        fricke_sign=d["fricke_sign"],
    )


def make_entry(kind: str, key: dict, payload) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "key": key,
        "payload": payload,
        "content_hash": content_hash(payload),
    }


def entry_path(kind: str, key: dict) -> Path:
    if _cache_dir is None:
        raise RuntimeError("no cache directory configured")
    parts = "_".join(f"{k}{key[k]}" for k in sorted(key))
    return _cache_dir / f"{kind}_{parts}_v{SCHEMA_VERSION}.json"


def write_entry(kind: str, key: dict, payload) -> Path:
    path = entry_path(kind, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp_", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(make_entry(kind, key, payload), fh, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_entry(kind: str, key: dict):
    """Payload of a cached entry, or None if missing, stale, or corrupted."""
    if _cache_dir is None:
        return None
    path = entry_path(kind, key)
    if not path.exists():
        return None
    try:
        with open(path) as fh:
            entry = json.load(fh)
    except (OSError, ValueError):
        log.warning("unreadable cache entry %s; recomputing", path)
        return None
    if entry.get("schema_version") != SCHEMA_VERSION or entry.get("kind") != kind or entry.get("key") != key:
        return None
    if content_hash(entry.get("payload")) != entry.get("content_hash"):
        log.warning("hash mismatch in %s; recomputing", path)
        return None
    return entry["payload"]


# ---------------------------------------------------------------------------
# eigen-data provider


def canonical_nmax(n: int) -> int:
    return max(100, -(-n // 100) * 100)


def get_eigenforms(k: int, nmax: int, prec_bits: int = DEFAULT_PREC) -> list[HeckeEigenform]:
    """Eigenforms of S_k(1) with lambda known at least up to nmax (memory, then disk, then compute)."""
    n = canonical_nmax(nmax)
    mkey = (k, n, prec_bits)
    if mkey in _memory:
        return _memory[mkey]
    for (k2, n2, p2), forms in _memory.items():
        if k2 == k and p2 == prec_bits and n2 >= n:
            return forms
    key = {"k": k, "nmax": n, "prec_bits": prec_bits}
    payload = read_entry("eigen", key)
    if payload is not None:
        forms = [decode_eigenform(d) for d in payload]
    else:
        forms = eigenforms(k, n, prec_bits)
        if _cache_dir is not None:
            write_entry("eigen", key, [encode_eigenform(f) for f in forms])
    _memory[mkey] = forms
    return forms


def clear_memory() -> None:
    _memory.clear()

"""Dense Fock-matrix builder kernels.

Two interchangeable backends build the same matrices:

* a pure-numpy path based on vectorized key lookups (``searchsorted``),
* numba ``@njit`` twins of the same loops for the hot builders.

The backend is chosen once at import time from the ``BOGO_KERNELS``
environment variable: ``numba`` (require numba, error if missing),
``numpy`` (force the fallback), or ``auto``/unset (numba when
importable).  ``benchmarks/bench_kernels.py`` times the two paths
against each other.

Basis states are rows of an ``(B, d)`` int64 array; each row is encoded
into a single mixed-radix key with radix ``Nmax + 1`` so that index
lookup is a binary search over the sorted key array.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("BOGO_KERNELS", "auto").strip().lower()
if _env not in ("auto", "numba", "numpy"):
    raise ValueError(f"BOGO_KERNELS must be 'auto', 'numba' or 'numpy', got {_env!r}")

if _env == "numpy":
    _numba = None
else:
    try:
        import numba as _numba
    except ImportError:
        if _env == "numba":
            raise
        _numba = None

USE_NUMBA = _numba is not None


def encode_keys(basis: np.ndarray, radix: int) -> np.ndarray:
    """Mixed-radix key of every occupation row."""
    d = basis.shape[1]
    weights = radix ** np.arange(d, dtype=np.int64)
    return basis @ weights


def lookup_keys(sorted_keys: np.ndarray, perm: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Basis indices of the given keys, -1 where a key is not in the basis."""
    pos = np.searchsorted(sorted_keys, keys)
    pos = np.minimum(pos, len(sorted_keys) - 1)
    found = sorted_keys[pos] == keys
    return np.where(found, perm[pos], -1)


# ---------------------------------------------------------------------------
# numpy backend


def _ladder_raise_np(basis, sorted_keys, perm, radix, f):
    """Dense matrix of ``sum_j f_j a*_j``."""
    B, d = basis.shape
    nmax = radix - 1
    totals = basis.sum(axis=1)
    keys = encode_keys(basis, radix)
    out = np.zeros((B, B), dtype=np.complex128)
    src_ok = totals < nmax
    src = np.nonzero(src_ok)[0]
    for j in range(d):
        if f[j] == 0:
            continue
        tgt = lookup_keys(sorted_keys, perm, keys[src] + radix**j)
        out[tgt, src] += f[j] * np.sqrt(basis[src, j] + 1.0)
    return out


def _dgamma_np(basis, sorted_keys, perm, radix, h):
    """Dense matrix of the second quantization ``sum_jk h_jk a*_j a_k``."""
    B, d = basis.shape
    keys = encode_keys(basis, radix)
    out = np.zeros((B, B), dtype=np.complex128)
    out[np.arange(B), np.arange(B)] = basis @ np.diag(h)
    for j in range(d):
        for k in range(d):
            if j == k or h[j, k] == 0:
                continue
            src = np.nonzero(basis[:, k] >= 1)[0]
            tgt = lookup_keys(sorted_keys, perm, keys[src] + radix**j - radix**k)
            vals = h[j, k] * np.sqrt(basis[src, k] * (basis[src, j] + 1.0))
            out[tgt, src] += vals
    return out


def _quad_raise_np(basis, sorted_keys, perm, radix, v):
    """Dense matrix of ``sum_jk v_jk a*_j a*_k``."""
    B, d = basis.shape
    nmax = radix - 1
    totals = basis.sum(axis=1)
    keys = encode_keys(basis, radix)
    out = np.zeros((B, B), dtype=np.complex128)
    src = np.nonzero(totals <= nmax - 2)[0]
    if src.size == 0:
        return out
    for j in range(d):
        for k in range(d):
            if v[j, k] == 0:
                continue
            tgt = lookup_keys(sorted_keys, perm, keys[src] + radix**j + radix**k)
            amp = np.sqrt(basis[src, k] + 1.0) * np.sqrt(basis[src, j] + 1.0 + (1.0 if j == k else 0.0))
            out[tgt, src] += v[j, k] * amp
    return out


def _gamma_np(basis, sorted_keys, perm, radix, q):
    """Dense matrix of ``Gamma(q)`` (the n-fold tensor power, sector by sector).

    Column recursion: if mode ``j`` is the first occupied mode of ``m``,
    then ``col(m) = a*(q e_j) col(m - e_j) / sqrt(m_j)``.  Every
    intermediate state stays inside the cutoff, so each block is exact.
    """
    B, d = basis.shape
    keys = encode_keys(basis, radix)
    out = np.zeros((B, B), dtype=np.complex128)
    out[0, 0] = 1.0

    # Raising structure of each bare mode: target index and amplitude.
    totals = basis.sum(axis=1)
    src_ok = np.nonzero(totals < radix - 1)[0]
    tgt_of = np.full((B, d), -1, dtype=np.int64)
    amp_of = np.zeros((B, d))
    for k in range(d):
        tgt_of[src_ok, k] = lookup_keys(sorted_keys, perm, keys[src_ok] + radix**k)
        amp_of[src_ok, k] = np.sqrt(basis[src_ok, k] + 1.0)

    for col in range(1, B):
        occ = basis[col]
        j = int(np.nonzero(occ)[0][0])
        parent = lookup_keys(sorted_keys, perm, np.array([keys[col] - radix**j]))[0]
        x = out[:, parent]
        support = np.nonzero(x)[0]
        y = np.zeros(B, dtype=np.complex128)
        for k in range(d):
            if q[k, j] == 0:
                continue
            rows = tgt_of[support, k]
            y[rows] += q[k, j] * amp_of[support, k] * x[support]
        out[:, col] = y / np.sqrt(occ[j])
    return out


# ---------------------------------------------------------------------------
# numba backend

if USE_NUMBA:
    _njit = _numba.njit(cache=True)

    @_njit
    def _find(sorted_keys, perm, key):
        lo, hi = 0, len(sorted_keys)
        while lo < hi:
            mid = (lo + hi) // 2
            if sorted_keys[mid] < key:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(sorted_keys) and sorted_keys[lo] == key:
            return perm[lo]
        return -1

    @_njit
    def _ladder_raise_nb(basis, sorted_keys, perm, radix, f):
        B, d = basis.shape
        nmax = radix - 1
        out = np.zeros((B, B), dtype=np.complex128)
        for i in range(B):
            total = 0
            key = 0
            w = 1
            for j in range(d):
                total += basis[i, j]
                key += basis[i, j] * w
                w *= radix
            if total >= nmax:
                continue
            w = 1
            for j in range(d):
                if f[j] != 0:
                    tgt = _find(sorted_keys, perm, key + w)
                    out[tgt, i] += f[j] * np.sqrt(basis[i, j] + 1.0)
                w *= radix
        return out

    @_njit
    def _dgamma_nb(basis, sorted_keys, perm, radix, h):
        B, d = basis.shape
        out = np.zeros((B, B), dtype=np.complex128)
        for i in range(B):
            key = 0
            w = 1
            diag = 0.0 + 0.0j
            for j in range(d):
                key += basis[i, j] * w
                w *= radix
                diag += basis[i, j] * h[j, j]
            out[i, i] = diag
            for k in range(d):
                if basis[i, k] < 1:
                    continue
                for j in range(d):
                    if j == k or h[j, k] == 0:
                        continue
                    tgt = _find(sorted_keys, perm, key + radix**j - radix**k)
                    out[tgt, i] += h[j, k] * np.sqrt(basis[i, k] * (basis[i, j] + 1.0))
        return out

    @_njit
    def _quad_raise_nb(basis, sorted_keys, perm, radix, v):
        B, d = basis.shape
        nmax = radix - 1
        out = np.zeros((B, B), dtype=np.complex128)
        for i in range(B):
            total = 0
            key = 0
            w = 1
            for j in range(d):
                total += basis[i, j]
                key += basis[i, j] * w
                w *= radix
            if total > nmax - 2:
                continue
            for j in range(d):
                for k in range(d):
                    if v[j, k] == 0:
                        continue
                    tgt = _find(sorted_keys, perm, key + radix**j + radix**k)
                    extra = 1.0 if j == k else 0.0
                    amp = np.sqrt(basis[i, k] + 1.0) * np.sqrt(basis[i, j] + 1.0 + extra)
                    out[tgt, i] += v[j, k] * amp
        return out

    @_njit
    def _gamma_nb(basis, sorted_keys, perm, radix, q):
        B, d = basis.shape
        nmax = radix - 1
        keys = np.zeros(B, dtype=np.int64)
        totals = np.zeros(B, dtype=np.int64)
        for i in range(B):
            w = 1
            for j in range(d):
                keys[i] += basis[i, j] * w
                totals[i] += basis[i, j]
                w *= radix
        tgt_of = np.full((B, d), -1, dtype=np.int64)
        amp_of = np.zeros((B, d))
        for i in range(B):
            if totals[i] >= nmax:
                continue
            w = 1
            for k in range(d):
                tgt_of[i, k] = _find(sorted_keys, perm, keys[i] + w)
                amp_of[i, k] = np.sqrt(basis[i, k] + 1.0)
                w *= radix

        out = np.zeros((B, B), dtype=np.complex128)
        out[0, 0] = 1.0
        y = np.zeros(B, dtype=np.complex128)
        for col in range(1, B):
            j = 0
            while basis[col, j] == 0:
                j += 1
            parent = _find(sorted_keys, perm, keys[col] - radix**j)
            for i in range(B):
                y[i] = 0.0
            for i in range(B):
                x = out[i, parent]
                if x == 0:
                    continue
                for k in range(d):
                    if q[k, j] != 0:
                        y[tgt_of[i, k]] += q[k, j] * amp_of[i, k] * x
            inv = 1.0 / np.sqrt(basis[col, j])
            for i in range(B):
                out[i, col] = y[i] * inv
        return out

    ladder_raise = _ladder_raise_nb
    dgamma = _dgamma_nb
    quad_raise = _quad_raise_nb
    gamma_power = _gamma_nb
else:
    ladder_raise = _ladder_raise_np
    dgamma = _dgamma_np
    quad_raise = _quad_raise_np
    gamma_power = _gamma_np

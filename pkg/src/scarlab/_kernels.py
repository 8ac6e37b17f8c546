"""Hot inner-loop kernels with numba acceleration and pure-numpy fallbacks.

Set ``SCARLAB_NO_NUMBA=1`` to force the numpy path (the numba path is the
default whenever numba imports). Both implementations are exported so the
benchmark suite can time them against each other; the module-level aliases
``count_patterns``, ``pattern_bitmask``, ``orbit_scan`` and ``csr_matvec``
point at the selected path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SCARLAB_NO_NUMBA", "") not in (
    "1",
    "true",
    "yes",
)


# ---------------------------------------------------------------------------
# pattern counting: number of cyclic (digit=d-1, next digit=0) adjacencies
# ---------------------------------------------------------------------------

def count_patterns_numpy(codes, d, N):
    codes = np.asarray(codes, dtype=np.int64)
    digits = [(codes // d ** l) % d for l in range(N)]
    out = np.zeros(codes.size, dtype=np.int64)
    for l in range(N):
        out += (digits[l] == d - 1) & (digits[(l + 1) % N] == 0)
    return out


def pattern_bitmask_numpy(codes, d, N):
    codes = np.asarray(codes, dtype=np.int64)
    digits = [(codes // d ** l) % d for l in range(N)]
    out = np.zeros(codes.size, dtype=np.int64)
    for l in range(N):
        out |= ((digits[l] == d - 1) & (digits[(l + 1) % N] == 0)).astype(np.int64) << l
    return out


def orbit_scan_numpy(codes, d, N):
    """Minimal translated code and translation period for each code.

    Returns ``(mins, periods)``. The codes need not be sorted; translation
    moves the digit at site l to site l+1 (cyclic).
    """
    codes = np.asarray(codes, dtype=np.int64)
    dtop = d ** (N - 1)
    cur = codes.copy()
    mins = codes.copy()
    periods = np.full(codes.size, N, dtype=np.int64)
    for r in range(1, N):
        cur = (cur % dtop) * d + cur // dtop
        hit = (cur == codes) & (periods == N)
        periods[hit] = r
        np.minimum(mins, cur, out=mins)
    return mins, periods


def csr_matvec_numpy(data, indices, indptr, x, out):
    """Row-compressed matvec. The numpy fallback allocates a temporary."""
    prod = data * x[indices]
    acc = np.concatenate((np.zeros(1, dtype=prod.dtype), np.cumsum(prod)))
    out[:] = acc[indptr[1:]] - acc[indptr[:-1]]
    return out


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def count_patterns_numba(codes, d, N):
        out = np.zeros(codes.size, dtype=np.int64)
        for i in prange(codes.size):
            c = codes[i]
            first = c % d
            prev = first
            cnt = 0
            for _ in range(N - 1):
                c //= d
                cur = c % d
                if prev == d - 1 and cur == 0:
                    cnt += 1
                prev = cur
            if prev == d - 1 and first == 0:
                cnt += 1
            out[i] = cnt
        return out

    @njit(cache=True, parallel=True)
    def pattern_bitmask_numba(codes, d, N):
        out = np.zeros(codes.size, dtype=np.int64)
        for i in prange(codes.size):
            c = codes[i]
            first = c % d
            prev = first
            mask = 0
            for l in range(1, N):
                c //= d
                cur = c % d
                if prev == d - 1 and cur == 0:
                    mask |= 1 << (l - 1)
                prev = cur
            if prev == d - 1 and first == 0:
                mask |= 1 << (N - 1)
            out[i] = mask
        return out

    @njit(cache=True, parallel=True)
    def orbit_scan_numba(codes, d, N):
        dtop = d ** (N - 1)
        mins = codes.copy()
        periods = np.full(codes.size, N, dtype=np.int64)
        for i in prange(codes.size):
            c0 = codes[i]
            c = c0
            for r in range(1, N):
                c = (c % dtop) * d + c // dtop
                if c == c0 and periods[i] == N:
                    periods[i] = r
                if c < mins[i]:
                    mins[i] = c
        return mins, periods

    @njit(cache=True, parallel=True)
    def csr_matvec_numba(data, indices, indptr, x, out):
        for i in prange(out.size):
            acc = 0.0 + 0.0j
            for p in range(indptr[i], indptr[i + 1]):
                acc += data[p] * x[indices[p]]
            out[i] = acc
        return out

else:  # pragma: no cover
    count_patterns_numba = None
    pattern_bitmask_numba = None
    orbit_scan_numba = None
    csr_matvec_numba = None


if USE_NUMBA:
    count_patterns = count_patterns_numba
    pattern_bitmask = pattern_bitmask_numba
    orbit_scan = orbit_scan_numba
    csr_matvec = csr_matvec_numba
else:
    count_patterns = count_patterns_numpy
    pattern_bitmask = pattern_bitmask_numpy
    orbit_scan = orbit_scan_numpy
    csr_matvec = csr_matvec_numpy

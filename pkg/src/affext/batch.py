"""Vectorised batch evaluation of x -> A * x^d.

Three interchangeable implementations, all bit-identical:

  * "numba"  - Montgomery-arithmetic kernel, odd moduli below 2**31.  Work is
    chunked so the exponent-bit loop sits outside tight SIMD-friendly inner
    loops; the matrix product is fused in to avoid materialising the powered
    batch.
  * "numpy"  - column-wise square-and-multiply in uint64, moduli below 2**32.
  * "python" - plain loops over Python ints, any supported modulus.

Dispatch is by modulus size with "auto"; callers can pin an implementation
for testing.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


_NUMBA_MAX_Q = 1 << 31  # Montgomery kernel uses R = 2**32 and 64-bit products
_NUMPY_MAX_Q = 1 << 32  # uint64 holds (q-1)**2 exactly below 2**32

_CHUNK = 2048  # rows per chunk; keeps the power buffer L2-resident


@njit(cache=True)
def _mont_eval(out, base, exps, arows, q, qinv_neg, r1, r2):  # pragma: no cover - jit
    """out[b, i] = sum_j A[i, j] * base[b, j]**exps[j] mod q.

    The power buffer is kept in Montgomery form (value * R mod q), so one
    Montgomery product against the normal-form A entry lands the term back
    in normal form: (p*R) * a * R^-1 = p*a mod q.
    """
    total, n = base.shape
    m = arows.shape[0]
    mask = np.uint64(0xFFFFFFFF)
    t32 = np.uint64(32)
    x = np.empty(_CHUNK, dtype=np.uint64)
    acc = np.empty(_CHUNK, dtype=np.uint64)
    pbuf = np.empty((n, _CHUNK), dtype=np.uint64)
    for s in range(0, total, _CHUNK):
        hi = min(s + _CHUNK, total)
        w = hi - s
        for j in range(n):
            # lift the column into Montgomery form: x = base * R mod q
            for i in range(w):
                t = base[s + i, j] * r2
                mm = ((t & mask) * qinv_neg) & mask
                v = (t + mm * q) >> t32
                x[i] = v - q if v >= q else v
                acc[i] = r1
            e = exps[j]
            while e > 0:
                if e & 1:
                    for i in range(w):
                        t = acc[i] * x[i]
                        mm = ((t & mask) * qinv_neg) & mask
                        v = (t + mm * q) >> t32
                        acc[i] = v - q if v >= q else v
                e >>= 1
                if e > 0:
                    for i in range(w):
                        t = x[i] * x[i]
                        mm = ((t & mask) * qinv_neg) & mask
                        v = (t + mm * q) >> t32
                        x[i] = v - q if v >= q else v
            for i in range(w):
                pbuf[j, i] = acc[i]
        for r in range(m):
            for i in range(w):
                acc[i] = np.uint64(0)
            for j in range(n):
                a = arows[r, j]
                for i in range(w):
                    t = a * pbuf[j, i]
                    mm = ((t & mask) * qinv_neg) & mask
                    v = (t + mm * q) >> t32
                    acc[i] += v - q if v >= q else v  # sum < n*q < 2**43
            for i in range(w):
                out[s + i, r] = acc[i] % q


def _eval_numba(xs: np.ndarray, exps, rows, q: int) -> np.ndarray:
    total = xs.shape[0]
    m = len(rows)
    qinv = pow(q, -1, 1 << 32)
    qinv_neg = ((1 << 32) - qinv) & 0xFFFFFFFF
    r1 = (1 << 32) % q
    r2 = pow(1 << 32, 2, q)
    arows = np.array([[a % q for a in row] for row in rows], dtype=np.uint64)
    out = np.empty((total, m), dtype=np.uint64)
    _mont_eval(
        out,
        np.ascontiguousarray(xs, dtype=np.uint64),
        np.asarray(exps, dtype=np.uint64),
        arows,
        np.uint64(q),
        np.uint64(qinv_neg),
        np.uint64(r1),
        np.uint64(r2),
    )
    return out.astype(np.int64)


def _pow_column_numpy(col: np.ndarray, e: int, q: int) -> np.ndarray:
    """Square-and-multiply on a uint64 column; q < 2**32 keeps products exact."""
    qq = np.uint64(q)
    acc = np.full(col.shape, np.uint64(1 % q), dtype=np.uint64)
    x = col.copy()
    while e > 0:
        if e & 1:
            acc *= x
            acc %= qq
        e >>= 1
        if e > 0:
            x *= x
            x %= qq
    return acc


def _eval_numpy(xs: np.ndarray, exps, rows, q: int) -> np.ndarray:
    xs = np.ascontiguousarray(xs, dtype=np.uint64)
    total, n = xs.shape
    powed = np.empty((total, n), dtype=np.uint64)
    for j in range(n):
        powed[:, j] = _pow_column_numpy(xs[:, j], int(exps[j]), q)
    m = len(rows)
    out = np.empty((total, m), dtype=np.uint64)
    qq = np.uint64(q)
    for r in range(m):
        acc = np.zeros(total, dtype=np.uint64)
        for j in range(n):
            t = powed[:, j] * np.uint64(rows[r][j])
            t %= qq
            acc += t  # n terms, each < q < 2**32: no overflow before reduce
            acc %= qq
        out[:, r] = acc
    return out.astype(np.int64)


def _eval_python(xs, exps, rows, q: int) -> np.ndarray:
    rows = [tuple(int(a) for a in row) for row in rows]
    out = np.empty((len(xs), len(rows)), dtype=np.int64)
    for b, x in enumerate(xs):
        powed = [pow(int(v), int(e), q) for v, e in zip(x, exps)]
        for r, row in enumerate(rows):
            out[b, r] = sum(a * p for a, p in zip(row, powed)) % q
    return out


def pick_impl(q: int, impl: str = "auto") -> str:
    """Resolve an implementation name for modulus q."""
    if impl == "auto":
        if HAVE_NUMBA and q % 2 == 1 and q < _NUMBA_MAX_Q:
            return "numba"
        if q < _NUMPY_MAX_Q:
            return "numpy"
        return "python"
    if impl not in ("numba", "numpy", "python"):
        raise ValueError(f"unknown implementation {impl!r}")
    if impl == "numba" and not (HAVE_NUMBA and q % 2 == 1 and q < _NUMBA_MAX_Q):
        raise ValueError(f"numba kernel requires an odd modulus below 2**31, got {q}")
    if impl == "numpy" and q >= _NUMPY_MAX_Q:
        raise ValueError(f"numpy kernel requires a modulus below 2**32, got {q}")
    return impl


def batch_apply(xs, exps, rows, q: int, impl: str = "auto") -> np.ndarray:
    """Apply x -> A * x^d to a batch; returns an int64 array of shape (B, m).

    xs is an array-like of shape (B, n) of canonical residues, exps the n
    exponents, rows the m rows of A.
    """
    chosen = pick_impl(q, impl)
    if chosen == "python":
        return _eval_python(xs, exps, rows, q)
    xs = np.asarray(xs, dtype=np.uint64)
    if xs.ndim != 2:
        raise ValueError(f"batch must be two-dimensional, got shape {xs.shape}")
    if chosen == "numba":
        return _eval_numba(xs, exps, rows, q)
    return _eval_numpy(xs, exps, rows, q)

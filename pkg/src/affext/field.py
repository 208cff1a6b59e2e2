"""Exact arithmetic in prime fields F_q.

Field elements are plain Python integers in canonical form 0 <= a < q; the
modulus travels as a separate argument instead of being wrapped per element,
which keeps equality checks, hashing and counting loops trivial.  Moduli are
capped below 2**61 so products fit comfortably in 128-bit intermediates and
the vectorised kernels in batch.py stay exact.

Scalar operations here assume canonical inputs and do not validate them;
validation belongs at the parsing boundary.  power(0, 0, q) is defined as 1.
"""

from __future__ import annotations

from typing import Sequence

MAX_MODULUS = 1 << 61


def check_modulus(q: int) -> None:
    """Reject moduli outside the supported range [2, 2**61)."""
    if not isinstance(q, int) or isinstance(q, bool):
        raise TypeError(f"modulus must be an int, got {type(q).__name__}")
    if q < 2:
        raise ValueError(f"modulus must be at least 2, got {q}")
    if q >= MAX_MODULUS:
        raise ValueError(f"modulus must be below 2**61, got {q}")


def check_element(a: int, q: int) -> None:
    """Reject non-canonical residues."""
    if not isinstance(a, int) or isinstance(a, bool):
        raise TypeError(f"field element must be an int, got {type(a).__name__}")
    if not 0 <= a < q:
        raise ValueError(f"element {a} is not a canonical residue modulo {q}")


def add(a: int, b: int, q: int) -> int:
    return (a + b) % q


def sub(a: int, b: int, q: int) -> int:
    return (a - b) % q


def mul(a: int, b: int, q: int) -> int:
    return (a * b) % q


def neg(a: int, q: int) -> int:
    return (-a) % q


def inv(a: int, q: int) -> int:
    """Multiplicative inverse of a nonzero residue; q must be prime."""
    if a % q == 0:
        raise ZeroDivisionError(f"0 has no inverse modulo {q}")
    return pow(a, -1, q)


def power(a: int, e: int, q: int) -> int:
    """a**e mod q by square-and-multiply; e >= 0, and power(0, 0, q) = 1."""
    if e < 0:
        raise ValueError(f"exponent must be nonnegative, got {e}")
    return pow(a, e, q)


def power_vector(x: Sequence[int], d: Sequence[int], q: int) -> tuple[int, ...]:
    """Coordinate-wise powers (x_1**d_1, ..., x_n**d_n) mod q."""
    if len(x) != len(d):
        raise ValueError(f"vector length {len(x)} does not match exponent count {len(d)}")
    return tuple(pow(xj, dj, q) for xj, dj in zip(x, d))


def dot(a: Sequence[int], b: Sequence[int], q: int) -> int:
    """Inner product mod q."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(ai * bi for ai, bi in zip(a, b)) % q


def vector_mod(x: Sequence[int], q: int) -> tuple[int, ...]:
    """Reduce an integer vector to canonical residues."""
    return tuple(v % q for v in x)

"""Carry-free (XOR) arithmetic on the binary expansions of non-negative integers."""

from __future__ import annotations

import operator

# One machine word is enough for every block size used here (block exponents
# stay far below 63); larger values are rejected rather than silently promoted.
MAX_INDEX = 1 << 63


def as_index(x) -> int:
    """Coerce x to a valid index: an integer with 0 <= x < 2**63."""
    value = operator.index(x)
    if value < 0:
        raise ValueError(f"index must be non-negative, got {value}")
    if value >= MAX_INDEX:
        raise ValueError(f"index must be below 2**63, got {value}")
    return value


def bits(x: int, m: int) -> tuple[int, ...]:
    """The m low binary digits (x_0, ..., x_{m-1}) of x, least significant first."""
    x = as_index(x)
    if m < 0:
        raise ValueError("digit count must be non-negative")
    return tuple((x >> i) & 1 for i in range(m))


def from_bits(digits) -> int:
    """Reassemble an index from its binary digits, least significant first."""
    value = 0
    for i, d in enumerate(digits):
        if d not in (0, 1):
            raise ValueError(f"binary digit must be 0 or 1, got {d!r}")
        value |= d << i
    return as_index(value)


def dyadic_add(x: int, y: int) -> int:
    """Digit-wise sum without carries: sum of |x_i - y_i| * 2**i, i.e. XOR."""
    return as_index(x) ^ as_index(y)


def is_carry_free(x: int, y: int) -> bool:
    """True iff x + y equals the dyadic sum, i.e. the binary supports are disjoint."""
    return (as_index(x) & as_index(y)) == 0

"""Walsh, trigonometric, Dirichlet and key-function evaluation with L_p norms.

Conventions.  Walsh functions use the right-continuous (finite) binary
expansion at dyadic rationals, so w_m is constant on half-open cells
[c/2**g, (c+1)/2**g) whenever m < 2**g and the t-integral is a finite sum.
The s-integral uses the equispaced rule on [0,1), which integrates
trigonometric polynomials of degree below the point count exactly; for even
p the integrand |F|**p is such a polynomial, giving exact norms up to
rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import as_index
from .orderings import Ordering, OrderingError

VARIANTS = ("full", "tail")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class KeyFunctionSpec:
    """Data defining the bivariate kernel sum over e_k(s) * w_sigma(k)(t).

    variant "full" sums k over [2**n]; "tail" over 2**n + [2**n] (the upper
    half of the next block), so the ordering must cover [2**(n+1)] there.
    """

    n: int
    ordering: Ordering
    variant: str = "full"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.ordering.size < self.index_stop:
            raise OrderingError(
                f"ordering covers [0, {self.ordering.size}) but the {self.variant} "
                f"variant at n={self.n} needs indices below {self.index_stop}"
            )

    @property
    def index_start(self) -> int:
        return 0 if self.variant == "full" else 1 << self.n

    @property
    def index_stop(self) -> int:
        return (1 << self.n) if self.variant == "full" else 1 << (self.n + 1)

    @property
    def term_count(self) -> int:
        return 1 << self.n

    def images(self) -> list[int]:
        return [self.ordering.images[k] for k in range(self.index_start, self.index_stop)]


@dataclass(frozen=True)
class NormResult:
    p: float
    value: float
    method: str
    grid_s_points: int
    grid_t_cells: int
    exact: bool

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": self.value,
            "method": self.method,
            "grid_s_points": self.grid_s_points,
            "grid_t_cells": self.grid_t_cells,
            "exact": self.exact,
        }


def walsh_eval(k: int, t: float) -> int:
    """Value of the k-th Walsh function at t in [0,1): (-1)**sum(k_i * t_i)."""
    k = as_index(k)
    if not 0.0 <= t < 1.0:
        raise ValueError(f"t must lie in [0, 1), got {t}")
    # Multiplying a float by 2**64 only shifts the exponent, so this extracts
    # the first 64 binary digits of t exactly; k < 2**63 never needs more.
    frac = int(t * (1 << 64))
    parity = 0
    while k:
        i = (k & -k).bit_length() - 1
        parity ^= (frac >> (63 - i)) & 1
        k &= k - 1
    return 1 - 2 * parity


def key_function_eval(spec: KeyFunctionSpec, s: float, t: float) -> complex:
    """Pointwise sum of e_k(s) * w_sigma(k)(t) over the variant's index range."""
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must lie in [0, 1), got {s}")
    total = 0j
    for k in range(spec.index_start, spec.index_stop):
        total += cmath.exp(2j * cmath.pi * k * s) * walsh_eval(spec.ordering.images[k], t)
    return total


def _bit_reverse(x: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def walsh_cell_values(indices, grid_t: int) -> np.ndarray:
    """Matrix of w_m(c / grid_t) over cells c, one row per index m.

    grid_t must be a power of two exceeding every index, so each function is
    constant on the cells.
    """
    if grid_t < 1 or grid_t & (grid_t - 1):
        raise GridError(f"grid_t must be a power of two, got {grid_t}")
    g = grid_t.bit_length() - 1
    cells = np.arange(grid_t, dtype=np.int64)
    rows = []
    for m in indices:
        if m >= grid_t:
            raise GridError(f"walsh index {m} not constant on 1/{grid_t} cells")
        rev = _bit_reverse(int(m), g)
        rows.append(1 - 2 * (np.bitwise_count(rev & cells).astype(np.int64) & 1))
    return np.array(rows, dtype=np.float64)


def key_function_grid(spec: KeyFunctionSpec, grid_s: int, grid_t: int) -> np.ndarray:
    """Sample the kernel on the (s, t) product grid; shape (grid_s, grid_t)."""
    if grid_s < 1:
        raise GridError(f"grid_s must be positive, got {grid_s}")
    ks = np.arange(spec.index_start, spec.index_stop, dtype=np.float64)
    s = np.arange(grid_s, dtype=np.float64) / grid_s
    exponential = np.exp(2j * np.pi * np.outer(s, ks))
    walsh = walsh_cell_values(spec.images(), grid_t)
    return exponential @ walsh


def default_grids(spec: KeyFunctionSpec, p: float) -> tuple[int, int]:
    """Grids meeting the even-p exactness thresholds with headroom."""
    return math.ceil(p) * (1 << (spec.n + 1)), 1 << (spec.n + 1)


def _min_grid_t(spec: KeyFunctionSpec) -> int:
    return (1 << spec.n) if spec.variant == "full" else (1 << (spec.n + 1))


def lp_norm_key(spec: KeyFunctionSpec, p: float,
                grid_s: int | None = None, grid_t: int | None = None) -> NormResult:
    """L_p norm of the kernel on [0,1)**2 by grid quadrature.

    Exact (up to rounding) for even integer p once grid_s > p * max index and
    the t-cells resolve every Walsh factor; other p are approximate-only and
    the result is flagged accordingly.
    """
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if grid_s is None or grid_t is None:
        ds, dt = default_grids(spec, p)
        grid_s = ds if grid_s is None else grid_s
        grid_t = dt if grid_t is None else grid_t
    if grid_t < _min_grid_t(spec):
        raise GridError(
            f"grid_t={grid_t} below {_min_grid_t(spec)}: integrand not constant per cell"
        )
    values = key_function_grid(spec, grid_s, grid_t)
    power = np.abs(values) ** p
    value = float(power.mean() ** (1.0 / p))
    even = p == int(p) and int(p) % 2 == 0
    max_index = spec.index_stop - 1
    exact = bool(even and grid_s > p * max_index)
    return NormResult(p=p, value=value, method="grid",
                      grid_s_points=grid_s, grid_t_cells=grid_t, exact=exact)


def dirichlet_lp_norm(n: int, p: float, grid_s: int | None = None) -> float:
    """L_p norm of sum_{k<n} e_k on [0,1); exact for even p, grid_s > p*(n-1)."""
    if n < 1:
        raise ValueError(f"term count must be positive, got {n}")
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if grid_s is None:
        grid_s = max(64, math.ceil(p) * 2 * n)
    if grid_s < 1:
        raise GridError(f"grid_s must be positive, got {grid_s}")
    s = np.arange(grid_s, dtype=np.float64) / grid_s
    kernel = np.exp(2j * np.pi * np.outer(s, np.arange(n))).sum(axis=1)
    return float((np.abs(kernel) ** p).mean() ** (1.0 / p))


def rp_lower_bound(spec: KeyFunctionSpec, p: float,
                   grid_s: int | None = None, grid_t: int | None = None) -> float:
    """Constant-free lower bound on the norm-transfer constant from the
    trigonometric block to the rearranged Walsh block: the Dirichlet-kernel
    norm over the kernel norm."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    numerator = dirichlet_lp_norm(spec.term_count, p, grid_s)
    denominator = lp_norm_key(spec, p, grid_s, grid_t).value
    return numerator / denominator

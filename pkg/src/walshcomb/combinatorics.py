"""Exact cardinalities of the mixed ordinary/dyadic witness sets.

Every counter enumerates its full index range (vectorized in contiguous
chunks whose partial sums are exact integers, so any chunking gives the same
result).  The grouped A-counter is an optional faster route that buckets
pairs by sum and XOR value; it is cross-checked against plain enumeration.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .orderings import Ordering, OrderingError, block_is_linear, restriction_is_linear

TRIPLE_KINDS = ("A", "A_v", "A_tilde", "A_hat_v")
PAIR_KINDS = ("B", "psi_pairs")


@dataclass(frozen=True)
class CountResult:
    """Exact count of one witness set plus its decay ratios and bound verdict.

    bound is the proven cap when one applies (6**n for A-type sets under a
    dyadically linear map, piecewise-linear for the shifted variant; 3**n for
    pair sets) and None otherwise; bound_holds compares count against it.
    """

    set_kind: str
    n: int
    v: Optional[int]
    count: int
    ratio8: float
    ratio8_logadj: float
    bound: Optional[int]
    bound_holds: Optional[bool]

    def __post_init__(self):
        cap = 8**self.n if self.set_kind in TRIPLE_KINDS else 4**self.n
        if not 0 <= self.count <= cap:
            raise ValueError(f"count {self.count} outside [0, {cap}]")

    def to_dict(self) -> dict:
        return {
            "set_kind": self.set_kind,
            "n": self.n,
            "v": self.v,
            "count": self.count,
            "ratio8": self.ratio8,
            "ratio8_logadj": self.ratio8_logadj,
            "bound": self.bound,
            "bound_holds": self.bound_holds,
        }


def _result(set_kind: str, n: int, v: Optional[int], count: int,
            bound: Optional[int]) -> CountResult:
    ratio8 = count / 8**n
    return CountResult(
        set_kind=set_kind,
        n=n,
        v=v,
        count=count,
        ratio8=ratio8,
        ratio8_logadj=n * n * ratio8,
        bound=bound,
        bound_holds=None if bound is None else count <= bound,
    )


def _images_array(sigma: Ordering, need_size: int) -> np.ndarray:
    if sigma.size < need_size:
        raise OrderingError(
            f"ordering covers [0, {sigma.size}), need [0, {need_size})"
        )
    return np.asarray(sigma.images, dtype=np.int64)


def _count_triples(sig: np.ndarray, n: int, v_img: int, lo: int) -> int:
    """#{(k,l,m) in (lo+[2**n])**3 : k+l-m in lo+[2**n], xor condition}.

    One outer index at a time keeps the working set at 4**n cells.
    """
    size = 1 << n
    idx = np.arange(lo, lo + size, dtype=np.int64)
    sig_l = sig[idx][:, None]
    sig_m = sig[idx][None, :]
    total = 0
    for k in idx:
        target = (k + idx)[:, None] - idx[None, :]
        valid = (target >= lo) & (target < lo + size)
        lhs = (sig[k] ^ sig_l ^ sig_m) ^ v_img
        rhs = sig[np.clip(target, lo, lo + size - 1)]
        total += int(np.count_nonzero(valid & (lhs == rhs)))
    return total


def _count_triples_grouped(sig: np.ndarray, n: int, v_img: int, lo: int) -> int:
    """Same count via pair histograms: for each sum s, bucket ordered pairs
    (k,l), k+l=s, by sigma(k)^sigma(l); a triple needs sigma(m)^sigma(s-m) to
    hit the bucket value xor v, and (m, s-m) runs over the same pairs.
    """
    size = 1 << n
    total = 0
    for s in range(2 * lo, 2 * lo + 2 * size - 1):
        k_lo = max(lo, s - (lo + size - 1))
        k_hi = min(lo + size - 1, s - lo)
        hist = Counter(
            int(sig[k] ^ sig[s - k]) for k in range(k_lo, k_hi + 1)
        )
        if v_img == 0:
            total += sum(c * c for c in hist.values())
        else:
            total += sum(c * hist.get(u ^ v_img, 0) for u, c in hist.items())
    return total


def count_A(n: int, sigma: Ordering, v: int = 0, *,
            method: str = "triple") -> CountResult:
    """#A_n^sigma(v): triples with k+l-m in range and the four-term XOR of
    images equal to sigma(v); v = 0 is the plain witness set."""
    size = 1 << n
    if not 0 <= v < size:
        raise OrderingError(f"offset v={v} outside [0, {size})")
    sig = _images_array(sigma, size)
    counter = {"triple": _count_triples, "grouped": _count_triples_grouped}[method]
    count = counter(sig, n, int(sig[v]), 0)
    bound = 6**n if restriction_is_linear(sigma, n) else None
    return _result("A" if v == 0 else "A_v", n, None if v == 0 else v, count, bound)


def count_A_tilde(n: int, sigma: Ordering, *, method: str = "triple") -> CountResult:
    """#A~_n^sigma over the shifted block 2**n + [2**n].

    sigma must cover [2**(n+1)]; the proven 6**n cap applies when sigma maps
    the shifted block to itself by an affine-shifted GF(2)-linear map, which
    is all the piecewise-linear argument uses.
    """
    sig = _images_array(sigma, 1 << (n + 1))
    count = _count_triples(sig, n, 0, 1 << n)
    bound = 6**n if block_is_linear(sigma, n) else None
    return _result("A_tilde", n, None, count, bound)


def count_B(n: int, sigma: Ordering) -> CountResult:
    """#{(k,l) in [2**n]**2 : k+l in [2**n], sigma(k)^sigma(l) == sigma(k+l)}.

    The 3**n cap is proven for (piecewise-)linear maps and conjectured for
    all, so it is always recorded.
    """
    size = 1 << n
    sig = _images_array(sigma, size)
    idx = np.arange(size, dtype=np.int64)
    total = idx[:, None] + idx[None, :]
    valid = total < size
    lhs = sig[idx][:, None] ^ sig[idx][None, :]
    rhs = sig[np.minimum(total, size - 1)]
    count = int(np.count_nonzero(valid & (lhs == rhs)))
    return _result("B", n, None, count, 3**n)


def count_A_hat(n: int, sigma: Ordering, v: int = 0) -> CountResult:
    """#{(x,y,z) in [2**n]**3 : sigma(x)+sigma(y)-sigma(z)+v == sigma(x^y^z)}."""
    size = 1 << n
    sig = _images_array(sigma, size)
    idx = np.arange(size, dtype=np.int64)
    count = 0
    for x in range(size):
        lhs = sig[x] + sig[idx][:, None] - sig[idx][None, :] + v
        rhs = sig[x ^ idx[:, None] ^ idx[None, :]]
        count += int(np.count_nonzero(lhs == rhs))
    bound = 6**n if restriction_is_linear(sigma, n) else None
    return _result("A_hat_v", n, v, count, bound)


def count_psi_pairs(n: int, psi: Sequence[int]) -> CountResult:
    """#{(x,y) in [2**n]**2 : psi(x^y) == x+y} for an arbitrary integer map."""
    size = 1 << n
    psi_arr = np.asarray(psi, dtype=np.int64)
    if psi_arr.shape != (size,):
        raise ValueError(f"psi must have {size} entries, got shape {psi_arr.shape}")
    idx = np.arange(size, dtype=np.int64)
    count = int(
        np.count_nonzero(psi_arr[idx[:, None] ^ idx[None, :]]
                         == idx[:, None] + idx[None, :])
    )
    return _result("psi_pairs", n, None, count, 3**n)


def random_psi_map(n: int, rng: np.random.Generator) -> np.ndarray:
    # Values in [-2**(n+1), 2**(n+2)] straddle the reachable sums so both
    # empty and dense fibers occur.
    size = 1 << n
    return rng.integers(-(2 ** (n + 1)), 2 ** (n + 2) + 1, size=size, dtype=np.int64)


def decay_report(n_max: int, sigma_family: Callable[[int], Ordering],
                 *, method: str = "triple") -> list[CountResult]:
    """count_A rows for n = 0..n_max of a per-exponent ordering family."""
    return [count_A(n, sigma_family(n), 0, method=method) for n in range(n_max + 1)]

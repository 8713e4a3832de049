"""Deviation-controlled comparisons between two rearrangements.

Checks both halves of each perturbation statement: the triple-by-triple
inclusion of one witness set in a finite union of offset sets, and the
resulting cardinality inequality, reporting the attained slack since the
statements come with no tightness information.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .combinatorics import count_A, count_A_hat
from .orderings import (
    Ordering,
    OrderingError,
    abs_deviation,
    compose,
    from_table,
    make_named_ordering,
    restriction_is_linear,
    subset_scramble,
    xor_deviation,
)


@dataclass(frozen=True)
class PerturbationReport:
    """Outcome of one inclusion/cardinality check between sigma and pi."""

    flavor: str  # "xor" for the dyadic-deviation form, "abs" for the dual one
    n: int
    deviation_max: int
    factor: int
    count_sigma: int
    count_pi: int
    bound_rhs: int
    inclusion_holds: bool
    inequality_holds: bool
    slack: Optional[float]  # bound_rhs / count_sigma, None when count_sigma = 0
    bad_triple: Optional[tuple[int, int, int]] = None

    @property
    def ok(self) -> bool:
        return self.inclusion_holds and self.inequality_holds

    def to_dict(self) -> dict:
        return asdict(self)


def _members_A(n: int, sigma: Ordering) -> list[tuple[int, int, int]]:
    size = 1 << n
    img = sigma.images
    out = []
    for x in range(size):
        for y in range(size):
            s = x + y
            for z in range(max(0, s - size + 1), min(size - 1, s) + 1):
                if img[x] ^ img[y] ^ img[z] == img[s - z]:
                    out.append((x, y, z))
    return out


def _members_A_hat(n: int, sigma: Ordering) -> list[tuple[int, int, int]]:
    size = 1 << n
    img = sigma.images
    return [
        (x, y, z)
        for x in range(size)
        for y in range(size)
        for z in range(size)
        if img[x] + img[y] - img[z] == img[x ^ y ^ z]
    ]


def verify_perturbation_A(n: int, sigma: Ordering, pi: Ordering) -> PerturbationReport:
    """Membership and cardinality form of the dyadic-deviation comparison:
    every triple of sigma's witness set lands in pi's offset set at some v
    with pi(v) <= 4 * max deviation, and the counts obey the (4f*+1) factor.
    """
    if sigma.n != pi.n:
        raise OrderingError(f"block exponents differ: {sigma.n} != {pi.n}")
    f_star = xor_deviation(pi, sigma).max_over_block(n)
    factor = 4 * f_star + 1
    size = 1 << n
    pi_img = pi.images
    pi_inv = [0] * pi.size
    for k, v in enumerate(pi_img):
        pi_inv[v] = k

    inclusion = True
    bad = None
    members = _members_A(n, sigma)
    for (x, y, z) in members:
        w = pi_img[x] ^ pi_img[y] ^ pi_img[z] ^ pi_img[x + y - z]
        v = pi_inv[w]
        in_offset_set = (pi_img[x] ^ pi_img[y] ^ pi_img[z] ^ pi_img[v]
                         == pi_img[x + y - z])
        if w > 4 * f_star or not in_offset_set:
            inclusion = False
            bad = (x, y, z)
            break

    count_sigma = len(members)
    count_pi = count_A(n, pi).count
    rhs = factor * count_pi
    return PerturbationReport(
        flavor="xor",
        n=n,
        deviation_max=f_star,
        factor=factor,
        count_sigma=count_sigma,
        count_pi=count_pi,
        bound_rhs=rhs,
        inclusion_holds=inclusion,
        inequality_holds=count_sigma <= rhs,
        slack=rhs / count_sigma if count_sigma else None,
        bad_triple=bad,
    )


def verify_perturbation_A_hat(n: int, sigma: Ordering, pi: Ordering) -> PerturbationReport:
    """Dual form with absolute deviation: offsets are plain integers v with
    |v| <= 4 * max deviation and the factor is (8f*+1)."""
    if sigma.n != pi.n:
        raise OrderingError(f"block exponents differ: {sigma.n} != {pi.n}")
    f_star = abs_deviation(pi, sigma).max_over_block(n)
    factor = 8 * f_star + 1
    pi_img = pi.images

    inclusion = True
    bad = None
    members = _members_A_hat(n, sigma)
    for (x, y, z) in members:
        v = pi_img[x ^ y ^ z] - pi_img[x] - pi_img[y] + pi_img[z]
        in_offset_set = pi_img[x] + pi_img[y] - pi_img[z] + v == pi_img[x ^ y ^ z]
        if abs(v) > 4 * f_star or not in_offset_set:
            inclusion = False
            bad = (x, y, z)
            break

    count_sigma = len(members)
    count_pi = count_A_hat(n, pi).count
    rhs = factor * count_pi
    return PerturbationReport(
        flavor="abs",
        n=n,
        deviation_max=f_star,
        factor=factor,
        count_sigma=count_sigma,
        count_pi=count_pi,
        bound_rhs=rhs,
        inclusion_holds=inclusion,
        inequality_holds=count_sigma <= rhs,
        slack=rhs / count_sigma if count_sigma else None,
        bad_triple=bad,
    )


@dataclass(frozen=True)
class SubsetExampleReport:
    """Chained bound for a scramble confined to a set of bit positions."""

    n: int
    bits: tuple[int, ...]
    m: int
    seed: int
    count_sigma: int
    count_composed: int  # witness count of the bit-shuffle composed after sigma
    count_pi: int  # witness count of the bit-shuffle itself
    deviation_max: int
    deviation_cap: int  # 2**m - 1
    pi_linear: bool
    composition_invariant: bool  # count_composed == count_sigma
    pi_matches_identity_count: bool
    step_bound_holds: bool  # count_composed <= 4 * 2**m * count_pi
    bound: int  # 4 * 2**m * 6**n
    bound_holds: bool
    ratio8: float

    @property
    def ok(self) -> bool:
        return (self.pi_linear and self.composition_invariant
                and self.step_bound_holds and self.bound_holds)

    def to_dict(self) -> dict:
        return asdict(self)


def scramble_companion_shuffle(bit_set, n: int) -> Ordering:
    """The linear bit permutation sending the scrambled positions to the low
    coordinates (scrambled bits first, untouched bits after, both in order)."""
    positions = sorted(set(bit_set))
    rest = [b for b in range(n) if b not in positions]
    source = positions + rest
    size = 1 << n
    images = []
    for x in range(size):
        y = 0
        for i, b in enumerate(source):
            y |= ((x >> b) & 1) << i
        images.append(y)
    return from_table(images, n)


def verify_subset_example(n: int, bit_set, seed: int) -> SubsetExampleReport:
    """Builds the seeded scramble on bit_set, its companion bit shuffle, and
    checks the full chain behind the 4 * 2**m * 6**n cap, recording the
    observed 8**-n density along the way."""
    positions = tuple(sorted(set(bit_set)))
    m = len(positions)
    sigma = subset_scramble(positions, n, seed)
    pi = scramble_companion_shuffle(positions, n)
    composed = compose(pi, sigma)

    count_sigma = count_A(n, sigma).count
    count_composed = count_A(n, composed).count
    count_pi = count_A(n, pi).count
    count_identity = count_A(n, make_named_ordering("identity", n)).count

    deviation = xor_deviation(composed, pi).max_over_block(n)
    bound = 4 * (1 << m) * 6**n
    return SubsetExampleReport(
        n=n,
        bits=positions,
        m=m,
        seed=seed,
        count_sigma=count_sigma,
        count_composed=count_composed,
        count_pi=count_pi,
        deviation_max=deviation,
        deviation_cap=(1 << m) - 1,
        pi_linear=restriction_is_linear(pi, n),
        composition_invariant=count_composed == count_sigma,
        pi_matches_identity_count=count_pi == count_identity,
        step_bound_holds=count_composed <= 4 * (1 << m) * count_pi,
        bound=bound,
        bound_holds=count_sigma <= bound,
        ratio8=count_sigma / 8**n,
    )

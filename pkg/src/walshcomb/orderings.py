"""Rearrangements of dyadic blocks: construction, composition, and deviation.

A rearrangement is held as its full image table on [2**n]; every constructor
validates bijectivity before handing the table out.  GF(2) matrices are stored
as int bitsets, one row per output bit.
"""

from __future__ import annotations

import operator
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .dyadic import as_index

MAX_BLOCK_EXPONENT = 20

NAMED_ORDERINGS = ("identity", "paley", "original_walsh", "kaczmarz", "kronecker")


class OrderingError(ValueError):
    pass


class SingularMatrixError(OrderingError):
    """Matrix is not invertible over GF(2); carries a nonzero kernel vector."""

    def __init__(self, kernel_witness: int):
        self.kernel_witness = kernel_witness
        super().__init__(
            f"matrix is singular over GF(2): kernel contains {kernel_witness:#b}"
        )


class NonBijectiveTableError(OrderingError):
    """Image table is not a bijection; carries the first duplicated value."""

    def __init__(self, duplicate: int):
        self.duplicate = duplicate
        super().__init__(f"image table is not a bijection: value {duplicate} repeats")


def _check_block_exponent(n: int) -> int:
    n = operator.index(n)
    if not 0 <= n <= MAX_BLOCK_EXPONENT:
        raise OrderingError(
            f"block exponent must be in [0, {MAX_BLOCK_EXPONENT}], got {n}"
        )
    return n


@dataclass(frozen=True)
class LinearMatrix:
    """Invertibility-checked n x n matrix over GF(2).

    rows[i] holds row i as a bitmask over input bits: bit j of rows[i] is the
    coefficient t_{i,j}, so the image of x has bit i = parity(rows[i] & x).
    """

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        n = _check_block_exponent(self.n)
        if len(self.rows) != n:
            raise OrderingError(f"expected {n} rows, got {len(self.rows)}")
        mask = (1 << n) - 1
        for row in self.rows:
            if row < 0 or row & ~mask:
                raise OrderingError(f"row {row:#b} has bits outside dimension {n}")
        witness = _kernel_vector(self.rows, n)
        if witness is not None:
            raise SingularMatrixError(witness)

    def apply(self, x: int) -> int:
        y = 0
        for i, row in enumerate(self.rows):
            y |= ((row & x).bit_count() & 1) << i
        return y

    def image_table(self) -> tuple[int, ...]:
        # Extend the basis images linearly; cheaper than n popcounts per entry.
        size = 1 << self.n
        basis = [self.apply(1 << i) for i in range(self.n)]
        table = [0] * size
        for x in range(1, size):
            lsb = x & -x
            table[x] = table[x ^ lsb] ^ basis[lsb.bit_length() - 1]
        return tuple(table)


def _kernel_vector(rows: Sequence[int], n: int) -> Optional[int]:
    """A nonzero x with Mx = 0, or None when M is invertible.

    Gaussian elimination on columns of M, i.e. rows of the transpose: the
    transpose row for input bit j is the mask of outputs fed by x_j.  Tracking
    the combination of input bits behind each reduced row turns a dependency
    into an explicit kernel vector.
    """
    cols = []
    for j in range(n):
        col = 0
        for i, row in enumerate(rows):
            col |= ((row >> j) & 1) << i
        cols.append(col)
    reduced: list[tuple[int, int]] = []  # (column value, input-bit combination)
    for j in range(n):
        value, combo = cols[j], 1 << j
        for rv, rc in reduced:
            if value & (rv & -rv):
                value ^= rv
                combo ^= rc
        if value == 0:
            return combo
        reduced.append((value, combo))
        reduced.sort(key=lambda t: t[0] & -t[0])
    return None


def identity_matrix(n: int) -> LinearMatrix:
    return LinearMatrix(n, tuple(1 << i for i in range(n)))


def original_walsh_matrix(n: int) -> LinearMatrix:
    """Band matrix t_{i,j} = 1 iff j == i or j == i + 1."""
    rows = []
    for i in range(n):
        row = 1 << i
        if i + 1 < n:
            row |= 1 << (i + 1)
        rows.append(row)
    return LinearMatrix(n, tuple(rows))


def bit_reversal_matrix(n: int) -> LinearMatrix:
    return LinearMatrix(n, tuple(1 << (n - 1 - i) for i in range(n)))


def _bit_reverse(x: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


@dataclass(frozen=True)
class Ordering:
    """A bijection of [2**n], materialized as its image table.

    kind is one of "named", "table", "linear", "piecewise", "composite";
    images[k] is the image of k.
    """

    n: int
    kind: str
    images: tuple[int, ...]
    name: Optional[str] = None
    matrix: Optional[LinearMatrix] = None

    def __post_init__(self):
        n = _check_block_exponent(self.n)
        size = 1 << n
        if len(self.images) != size:
            raise OrderingError(
                f"image table has {len(self.images)} entries, expected {size}"
            )
        seen = bytearray(size)
        for value in self.images:
            if not 0 <= value < size:
                raise OrderingError(f"image {value} outside [0, {size})")
            if seen[value]:
                raise NonBijectiveTableError(value)
            seen[value] = 1

    @property
    def size(self) -> int:
        return 1 << self.n

    def __call__(self, k: int) -> int:
        return self.images[k]


def make_named_ordering(name: str, n: int) -> Ordering:
    """One of the standard rearrangements on [2**n].

    identity/paley: the identity.  original_walsh: the banded GF(2) map
    sigma(x)_i = x_i xor x_{i+1} (binary-to-Gray).  kaczmarz: blockwise bit
    reversal, sigma(2**k + m) = 2**k + reverse_k(m).  kronecker: bit reversal
    on n bits.
    """
    n = _check_block_exponent(n)
    size = 1 << n
    if name in ("identity", "paley"):
        images = tuple(range(size))
    elif name == "original_walsh":
        images = tuple(x ^ (x >> 1) for x in range(size))
    elif name == "kaczmarz":
        table = [0] * size
        for k in range(n):
            base = 1 << k
            for m in range(base):
                table[base + m] = base + _bit_reverse(m, k)
        images = tuple(table)
    elif name == "kronecker":
        images = tuple(_bit_reverse(x, n) for x in range(size))
    else:
        raise OrderingError(f"unknown ordering name {name!r}")
    return Ordering(n=n, kind="named", images=images, name=name)


def from_matrix(m: LinearMatrix) -> Ordering:
    return Ordering(n=m.n, kind="linear", images=m.image_table(), matrix=m)


def from_table(images: Iterable[int], n: int) -> Ordering:
    values = tuple(as_index(v) for v in images)
    return Ordering(n=n, kind="table", images=values)


def piecewise_linear_from_blocks(blocks: Sequence[LinearMatrix]) -> Ordering:
    """Ordering with sigma(0) = 0 and sigma(2**k + m) = 2**k + blocks[k](m).

    blocks[k] must be k x k; len(blocks) = n yields an ordering of [2**n].
    """
    n = _check_block_exponent(len(blocks))
    for k, block in enumerate(blocks):
        if block.n != k:
            raise OrderingError(f"block {k} has dimension {block.n}, expected {k}")
    size = 1 << n
    table = [0] * size
    for k, block in enumerate(blocks):
        base = 1 << k
        sub = block.image_table()
        for m in range(base):
            table[base + m] = base + sub[m]
    return Ordering(n=n, kind="piecewise", images=tuple(table))


def compose(outer: Ordering, inner: Ordering) -> Ordering:
    """Pointwise composition k -> outer(inner(k))."""
    if outer.n != inner.n:
        raise OrderingError(f"block exponents differ: {outer.n} != {inner.n}")
    images = tuple(outer.images[v] for v in inner.images)
    return Ordering(n=outer.n, kind="composite", images=images)


def invert(o: Ordering) -> Ordering:
    table = [0] * o.size
    for k, v in enumerate(o.images):
        table[v] = k
    return Ordering(n=o.n, kind="composite", images=tuple(table))


def is_dyadically_linear(o: Ordering) -> tuple[bool, Optional[tuple[int, int]]]:
    """Whether sigma(x xor y) == sigma(x) xor sigma(y) everywhere.

    Builds the linear extension of the basis images and compares it against
    the full table; the first mismatching x yields the witness pair
    (lowest bit of x, rest of x), which necessarily violates linearity.
    """
    if o.images[0] != 0:
        return False, (0, 0)
    basis = [o.images[1 << i] for i in range(o.n)]
    for x in range(1, o.size):
        if o.images[x] != _linear_value(basis, x):
            lsb = x & -x
            return False, (lsb, x ^ lsb)
    return True, None


def _linear_value(basis: Sequence[int], x: int) -> int:
    value = 0
    while x:
        lsb = x & -x
        value ^= basis[lsb.bit_length() - 1]
        x ^= lsb
    return value


def restriction_is_linear(o: Ordering, n: int) -> bool:
    """Whether o restricted to [2**n] is a GF(2)-linear (injective) map."""
    size = 1 << n
    if size > o.size:
        raise OrderingError(f"ordering on [2**{o.n}] cannot be restricted to [2**{n}]")
    if o.images[0] != 0:
        return False
    basis = [o.images[1 << i] for i in range(n)]
    return all(o.images[x] == _linear_value(basis, x) for x in range(size))


def is_piecewise_linear(o: Ordering) -> bool:
    """sigma(0) == 0, every block {2**k,...,2**(k+1)-1} invariant, blocks linear."""
    if o.images[0] != 0:
        return False
    for k in range(o.n):
        if not block_is_linear(o, k):
            return False
    return True


def block_is_linear(o: Ordering, k: int) -> bool:
    """Whether o maps 2**k + m to 2**k + lambda(m) with lambda GF(2)-linear."""
    base = 1 << k
    if o.size < 2 * base:
        raise OrderingError(f"ordering on [2**{o.n}] has no block at exponent {k}")
    sub = [o.images[base + m] - base for m in range(base)]
    if any(not 0 <= v < base for v in sub):
        return False
    if sub[0] != 0:
        return False
    basis = [sub[1 << i] for i in range(k)]
    return all(sub[m] == _linear_value(basis, m) for m in range(base))


@dataclass(frozen=True)
class DeviationProfile:
    """Pointwise deviation between two rearrangements on a shared block.

    flavor "xor": u -> pi(u) xor sigma(u); flavor "abs": u -> |pi(u) - sigma(u)|.
    """

    flavor: str
    values: tuple[int, ...]

    def max_over_block(self, n: int) -> int:
        size = 1 << n
        if size > len(self.values):
            raise OrderingError(f"profile covers only {len(self.values)} points")
        return max(self.values[:size])


def xor_deviation(pi: Ordering, sigma: Ordering) -> DeviationProfile:
    if pi.n != sigma.n:
        raise OrderingError(f"block exponents differ: {pi.n} != {sigma.n}")
    values = tuple(a ^ b for a, b in zip(pi.images, sigma.images))
    return DeviationProfile(flavor="xor", values=values)


def abs_deviation(pi: Ordering, sigma: Ordering) -> DeviationProfile:
    if pi.n != sigma.n:
        raise OrderingError(f"block exponents differ: {pi.n} != {sigma.n}")
    values = tuple(abs(a - b) for a, b in zip(pi.images, sigma.images))
    return DeviationProfile(flavor="abs", values=values)


def subset_scramble(bit_set: Iterable[int], n: int, seed: int) -> Ordering:
    """Seeded permutation acting only on the coordinates in bit_set.

    For each fixed value of the untouched coordinates, the bit_set coordinate
    patterns are permuted by a bijection keyed on (seed, untouched value);
    bits outside bit_set pass through unchanged.
    """
    n = _check_block_exponent(n)
    positions = sorted(set(bit_set))
    for b in positions:
        if not 0 <= b < n:
            raise OrderingError(f"bit position {b} outside [0, {n})")
    m = len(positions)
    size = 1 << n
    mask = 0
    for b in positions:
        mask |= 1 << b
    patterns = 1 << m

    def pack(x: int) -> int:
        packed = 0
        for i, b in enumerate(positions):
            packed |= ((x >> b) & 1) << i
        return packed

    def unpack(packed: int) -> int:
        x = 0
        for i, b in enumerate(positions):
            x |= ((packed >> i) & 1) << b
        return x

    table = [0] * size
    shuffles: dict[int, list[int]] = {}
    for x in range(size):
        rest = x & ~mask
        perm = shuffles.get(rest)
        if perm is None:
            perm = list(range(patterns))
            random.Random(f"subset-scramble:{seed}:{rest}").shuffle(perm)
            shuffles[rest] = perm
        table[x] = rest | unpack(perm[pack(x)])
    return Ordering(n=n, kind="table", images=tuple(table))


# --- file formats ----------------------------------------------------------
#
# Permutation table file: line i (0-based) holds the decimal value sigma(i);
# exactly 2**n lines, trailing newline optional.
# Matrix file: n lines of n characters '0'/'1'; line i is row i (output bit
# i), column j is input bit j.


def read_table_file(path, n: int) -> Ordering:
    lines = Path(path).read_text().splitlines()
    values = [line.strip() for line in lines if line.strip() != ""]
    size = 1 << n
    if len(values) != size:
        raise OrderingError(
            f"{path}: expected {size} lines for block exponent {n}, got {len(values)}"
        )
    try:
        images = [int(v) for v in values]
    except ValueError as exc:
        raise OrderingError(f"{path}: non-integer table entry: {exc}") from None
    return from_table(images, n)


def write_table_file(path, o: Ordering) -> None:
    Path(path).write_text("".join(f"{v}\n" for v in o.images))


def read_matrix_file(path) -> LinearMatrix:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    n = len(lines)
    rows = []
    for i, line in enumerate(lines):
        entry = line.strip()
        if len(entry) != n or any(c not in "01" for c in entry):
            raise OrderingError(
                f"{path}: line {i} must be {n} characters of 0/1, got {entry!r}"
            )
        row = 0
        for j, c in enumerate(entry):
            row |= (c == "1") << j
        rows.append(row)
    return LinearMatrix(n, tuple(rows))


def write_matrix_file(path, m: LinearMatrix) -> None:
    lines = []
    for row in m.rows:
        lines.append("".join("1" if (row >> j) & 1 else "0" for j in range(m.n)))
    Path(path).write_text("".join(line + "\n" for line in lines))

"""Exhaustive and pruned search for the maximal homomorphism-pair count.

The searched quantity is the number of pairs (k,l) with k+l in range whose
images satisfy sigma(k) xor sigma(l) == sigma(k+l).  Left composition with
any invertible GF(2)-linear map lambda preserves that pair set (lambda is
injective and xor-linear), so the pruned search expands one representative
per left-GL(n,2) orbit: a partial image sequence is grown only while no
lambda maps it to a lexicographically smaller sequence.

Work is organized around canonical prefixes of a fixed split depth (the
"classes").  Classes are enumerated statically; the searcher walks them in
order, so a checkpoint is the number of finished classes plus the exact DFS
position inside the current one.  nodes_visited counts accepted assignments
past the split depth; resumed runs replay their saved path without
recounting it, keeping node totals additive across interruptions.  Node
budgets are exact and deterministic; wall-clock budgets are best effort.
Worker processes are only used for unbudgeted fresh runs, where the
class-order merge makes the outcome independent of the worker count.
Pruning never relies on results from other classes, for the same reason.
"""

from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .combinatorics import count_B
from .orderings import make_named_ordering

CHECKPOINT_VERSION = "bsearch-1"

MAX_EXHAUSTIVE_N = 3
MAX_PRUNED_N = 5

BOUND_STRATEGIES = ("simple", "fiber")


class CheckpointError(ValueError):
    pass


class SearchError(ValueError):
    pass


@dataclass
class SearchCheckpoint:
    version: str
    n: int
    prefix: list[int]
    best_count: int
    witness: Optional[list[int]]
    nodes_visited: int
    canonical_class_cursor: int

    def validate(self) -> None:
        if self.version != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint version {self.version!r}, "
                f"expected {CHECKPOINT_VERSION!r}"
            )
        size = 1 << self.n
        if len(set(self.prefix)) != len(self.prefix):
            raise CheckpointError("checkpoint prefix entries are not distinct")
        if any(not 0 <= v < size for v in self.prefix):
            raise CheckpointError(f"checkpoint prefix entries outside [0, {size})")
        floor = -1 if self.witness is None else 0  # -1 marks "no leaf seen yet"
        if not floor <= self.best_count <= 4**self.n:
            raise CheckpointError(f"best_count {self.best_count} outside [{floor}, 4**n]")
        if self.nodes_visited < 0 or self.canonical_class_cursor < 0:
            raise CheckpointError("negative counters in checkpoint")


def checkpoint_to_json(cp: SearchCheckpoint) -> str:
    return json.dumps(
        {
            "version": cp.version,
            "n": cp.n,
            "prefix": list(cp.prefix),
            "best_count": cp.best_count,
            "witness": None if cp.witness is None else list(cp.witness),
            "nodes_visited": cp.nodes_visited,
            "canonical_class_cursor": cp.canonical_class_cursor,
        },
        indent=2,
    )


def checkpoint_from_json(text: str) -> SearchCheckpoint:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from None
    try:
        cp = SearchCheckpoint(
            version=raw["version"],
            n=raw["n"],
            prefix=list(raw["prefix"]),
            best_count=raw["best_count"],
            witness=None if raw.get("witness") is None else list(raw["witness"]),
            nodes_visited=raw["nodes_visited"],
            canonical_class_cursor=raw["canonical_class_cursor"],
        )
    except KeyError as exc:
        raise CheckpointError(f"checkpoint is missing field {exc}") from None
    cp.validate()
    return cp


def checkpoint_roundtrip(cp: SearchCheckpoint) -> SearchCheckpoint:
    return checkpoint_from_json(checkpoint_to_json(cp))


# --- quotient group tables ----------------------------------------------------


def _linear_extension(basis: Sequence[int]) -> list[int]:
    size = 1 << len(basis)
    table = [0] * size
    for x in range(1, size):
        lsb = x & -x
        table[x] = table[x ^ lsb] ^ basis[lsb.bit_length() - 1]
    return table


@lru_cache(maxsize=None)
def _quotient_tables(n: int, kind: str) -> tuple[tuple[int, ...], ...]:
    """Value tables of the left-composition group used for quotienting.

    kind "gl" is all of GL(n,2); "bitperm" the bit-permutation subgroup
    (used at n=5, where GL has ~10**7 elements); "none" just the identity.
    Any subgroup is sound, it only merges fewer orbits.
    """
    size = 1 << n
    if kind == "none":
        return (tuple(range(size)),)
    if kind == "bitperm":
        tables = [
            tuple(_linear_extension([1 << perm[i] for i in range(n)]))
            for perm in itertools.permutations(range(n))
        ]
        return tuple(sorted(tables))
    if kind != "gl":
        raise SearchError(f"unknown quotient kind {kind!r}")

    tables = []
    basis = [0] * n

    def rec(i: int, span: frozenset[int]) -> None:
        if i == n:
            tables.append(tuple(_linear_extension(basis)))
            return
        for v in range(1, size):
            if v in span:
                continue
            basis[i] = v
            rec(i + 1, span | {s ^ v for s in span})

    rec(0, frozenset({0}))
    return tuple(sorted(tables))


def _quotient_kind(n: int, quotient: bool) -> str:
    if not quotient:
        return "none"
    return "gl" if n <= 4 else "bitperm"


def _default_split_depth(n: int) -> int:
    return min(1 << n, 4 if n >= 3 else n)


# --- pair bookkeeping -----------------------------------------------------------


@lru_cache(maxsize=None)
def _pair_structure(n: int):
    """All ordered pairs (k,l) with k+l in range, plus index adjacency."""
    size = 1 << n
    pairs = tuple(
        (k, l, k + l) for k in range(size) for l in range(size) if k + l < size
    )
    adjacency: list[list[int]] = [[] for _ in range(size)]
    involved = []
    for p, (k, l, s) in enumerate(pairs):
        idx = sorted({k, l, s})
        involved.append(tuple(idx))
        for i in idx:
            adjacency[i].append(p)
    return pairs, tuple(involved), tuple(tuple(a) for a in adjacency)


def exhaustive_max_B(n: int) -> tuple[int, tuple[int, ...]]:
    """Exact maximum of the pair count over every permutation of [2**n]."""
    if not 0 <= n <= MAX_EXHAUSTIVE_N:
        raise SearchError(
            f"exhaustive mode supports 0 <= n <= {MAX_EXHAUSTIVE_N}, got {n} "
            f"({1 << n}! permutations is out of reach)"
        )
    size = 1 << n
    pairs, _, _ = _pair_structure(n)
    best = -1
    witness: tuple[int, ...] = tuple(range(size))
    for perm in itertools.permutations(range(size)):
        c = 0
        for k, l, s in pairs:
            if perm[k] ^ perm[l] == perm[s]:
                c += 1
        if c > best:
            best = c
            witness = perm
    return best, witness


# --- canonical class enumeration -------------------------------------------------


def canonical_class_prefixes(n: int, depth: int, kind: str) -> list[tuple[int, ...]]:
    """Lexicographically ordered canonical injective prefixes at the split
    depth; every canonical complete table extends exactly one of them."""
    size = 1 << n
    depth = min(depth, size)
    out: list[tuple[int, ...]] = []
    path: list[int] = []
    used = [False] * size

    def rec(d: int, lams: list[tuple[int, ...]]) -> None:
        if d == depth:
            out.append(tuple(path))
            return
        for w in range(size):
            if used[w]:
                continue
            child = []
            dominated = False
            for lam in lams:
                lw = lam[w]
                if lw < w:
                    dominated = True
                    break
                if lw == w:
                    child.append(lam)
            if dominated:
                continue
            used[w] = True
            path.append(w)
            rec(d + 1, child)
            path.pop()
            used[w] = False

    rec(0, list(_quotient_tables(n, kind)))
    return out


# --- depth-first search ------------------------------------------------------------


class _BudgetExhausted(Exception):
    pass


class _Searcher:
    """One class subtree at a time; see the module docstring for the scheme.

    prune_ref stays fixed for the lifetime of a run: a branch is cut when its
    satisfied count plus the cap on undecided pairs cannot exceed it.  Keeping
    it fixed (rather than raising it at improving leaves) makes the visited
    node set a pure function of the parameters, which resume and any worker
    split rely on; with the identity seed the reference is already the
    conjectured maximum, so nothing is lost.
    """

    def __init__(self, n: int, kind: str, strategy: str, prune_ref: int):
        if strategy not in BOUND_STRATEGIES:
            raise SearchError(f"unknown bound strategy {strategy!r}")
        self.n = n
        self.size = 1 << n
        self.kind = kind
        self.strategy = strategy
        self.prune_ref = prune_ref
        self.pairs, self.involved, self.adjacency = _pair_structure(n)
        self.nodes = 0
        self.node_budget: Optional[int] = None
        self.deadline: Optional[float] = None
        self.tick: Callable[[], None] = lambda: None
        self.reset()

    def reset(self) -> None:
        self.sig = [-1] * self.size
        self.used = [False] * self.size
        self.path: list[int] = []
        self.missing = [len(ix) for ix in self.involved]
        self.satisfied = 0
        self.undecided = len(self.pairs)
        self.decided_stack: list[list[int]] = []
        self.best_local = -1
        self.best_witness: Optional[tuple[int, ...]] = None

    def assign(self, index: int, value: int) -> None:
        self.sig[index] = value
        self.used[value] = True
        self.path.append(value)
        sig = self.sig
        newly = []
        for p in self.adjacency[index]:
            self.missing[p] -= 1
            if self.missing[p] == 0:
                k, l, s = self.pairs[p]
                if sig[k] ^ sig[l] == sig[s]:
                    self.satisfied += 1
                self.undecided -= 1
                newly.append(p)
        self.decided_stack.append(newly)

    def unassign(self, index: int) -> None:
        sig = self.sig
        for p in self.decided_stack.pop():
            k, l, s = self.pairs[p]
            if sig[k] ^ sig[l] == sig[s]:
                self.satisfied -= 1
            self.undecided += 1
            self.missing[p] += 1
        value = self.path.pop()
        self.used[value] = False
        self.sig[index] = -1

    def future_cap(self) -> int:
        if self.strategy == "simple":
            return self.undecided
        return self._fiber_cap()

    def _fiber_cap(self) -> int:
        """Per-sum cap on undecided pairs.  All pairs with sum s must match
        the single image of s: with that image still open, decided-operand
        pairs contribute at most the top multiplicity of an unused xor value;
        pairs with one open operand need a specific, still-unused value."""
        sig = self.sig
        used = self.used
        size = self.size
        cap = 0
        for s in range(size):
            target = sig[s]
            open_pairs = 0
            if target < 0:
                hist: dict[int, int] = {}
                for k in range(s + 1):
                    a, b = sig[k], sig[s - k]
                    if a >= 0 and b >= 0:
                        v = a ^ b
                        hist[v] = hist.get(v, 0) + 1
                    else:
                        open_pairs += 1
                best_mult = 0
                for v, mult in hist.items():
                    if mult > best_mult and not used[v]:
                        best_mult = mult
                cap += best_mult + open_pairs
            else:
                for k in range(s + 1):
                    a, b = sig[k], sig[s - k]
                    if a >= 0 and b >= 0:
                        continue
                    if a >= 0 or b >= 0:
                        known = a if a >= 0 else b
                        if not used[known ^ target]:
                            open_pairs += 1
                    else:
                        open_pairs += 1
                cap += open_pairs
        return cap

    def replay_prefix(self, values: Sequence[int]) -> list[list[tuple[int, ...]]]:
        """Assign a class prefix, rebuilding the lambda stack; not counted."""
        lam_stack = [list(_quotient_tables(self.n, self.kind))]
        for d, w in enumerate(values):
            lam_stack.append([lam for lam in lam_stack[-1] if lam[w] == w])
            self.assign(d, w)
        return lam_stack

    def expand(self, depth: int, lam_stack: list,
               resume: Optional[Sequence[int]]) -> None:
        if depth == self.size:
            if self.satisfied > self.best_local:
                self.best_local = self.satisfied
                self.best_witness = tuple(self.path)
            return
        resume_w = resume[0] if resume else None
        lams = lam_stack[-1]
        for w in range(self.size):
            if self.used[w]:
                continue
            if resume_w is not None and w < resume_w:
                continue  # finished before the interruption
            replaying = resume_w is not None and w == resume_w
            child = []
            dominated = False
            for lam in lams:
                lw = lam[w]
                if lw < w:
                    dominated = True
                    break
                if lw == w:
                    child.append(lam)
            if dominated and not replaying:
                continue
            self.assign(depth, w)
            if not replaying:
                self.nodes += 1
                self.tick()
                if self.node_budget is not None and self.nodes >= self.node_budget:
                    raise _BudgetExhausted
                if self.deadline is not None and self.nodes % 256 == 0 \
                        and time.monotonic() >= self.deadline:
                    raise _BudgetExhausted
            # Interior resume nodes were already expanded past their bound
            # check; the final one (the interruption point) was not.
            descend = (replaying and len(resume) > 1) \
                or self.satisfied + self.future_cap() > self.prune_ref
            if descend:
                lam_stack.append(child)
                self.expand(depth + 1, lam_stack,
                            resume[1:] if replaying and len(resume) > 1 else None)
                lam_stack.pop()
            self.unassign(depth)
            resume_w = None
        return


# --- drivers ------------------------------------------------------------------------


def _run_class(args) -> tuple[int, int, Optional[tuple[int, ...]]]:
    """Search one class subtree to completion: (nodes, best, witness)."""
    n, kind, strategy, prefix, init_best = args
    searcher = _Searcher(n, kind, strategy, prune_ref=init_best)
    lam_stack = searcher.replay_prefix(prefix)
    searcher.expand(len(prefix), lam_stack, None)
    return searcher.nodes, searcher.best_local, searcher.best_witness


def is_complete(cp: SearchCheckpoint, *, quotient: bool = True,
                split_depth: Optional[int] = None) -> bool:
    kind = _quotient_kind(cp.n, quotient)
    depth = split_depth if split_depth is not None else _default_split_depth(cp.n)
    total = len(canonical_class_prefixes(cp.n, depth, kind))
    return not cp.prefix and cp.canonical_class_cursor >= total


def pruned_search(
    n: int,
    *,
    node_budget: Optional[int] = None,
    time_budget: Optional[float] = None,
    checkpoint: Optional[SearchCheckpoint] = None,
    workers: int = 1,
    split_depth: Optional[int] = None,
    bound_strategy: str = "simple",
    quotient: bool = True,
    seed_identity: bool = True,
    checkpoint_interval: Optional[int] = None,
    on_checkpoint: Optional[Callable[[SearchCheckpoint], None]] = None,
) -> SearchCheckpoint:
    """Branch-and-bound maximum of the pair count over permutations of [2**n].

    Resumes from a checkpoint when given (same split depth, quotient and
    strategy as the original run); emits intermediate checkpoints through
    on_checkpoint every checkpoint_interval accepted nodes.  The returned
    checkpoint carries the exact maximum once is_complete holds; a budget
    interruption is a normal return.
    """
    if not 0 <= n <= MAX_PRUNED_N:
        raise SearchError(f"pruned search supports 0 <= n <= {MAX_PRUNED_N}, got {n}")
    kind = _quotient_kind(n, quotient)
    depth = split_depth if split_depth is not None else _default_split_depth(n)
    classes = canonical_class_prefixes(n, depth, kind)

    # The class-local pruning reference is the seed value, never the carried
    # best: pruning against results of other classes (or of an interrupted
    # run) would make the visited node set depend on scheduling history.
    if seed_identity:
        identity = make_named_ordering("identity", n)
        init_best = count_B(n, identity).count
        seed_witness = list(identity.images)
    else:
        init_best = -1
        seed_witness = None

    if checkpoint is not None:
        checkpoint.validate()
        if checkpoint.n != n:
            raise CheckpointError(f"checkpoint is for n={checkpoint.n}, requested n={n}")
        cursor = checkpoint.canonical_class_cursor
        if cursor > len(classes):
            raise CheckpointError("checkpoint cursor beyond the class enumeration")
        resume_path = list(checkpoint.prefix)
        if resume_path and (cursor >= len(classes)
                            or tuple(resume_path[:depth]) != classes[cursor]):
            raise CheckpointError(
                "checkpoint prefix does not match the class enumeration "
                "(different split depth or quotient?)"
            )
        best = checkpoint.best_count
        witness = checkpoint.witness
        nodes_so_far = checkpoint.nodes_visited
    else:
        cursor = 0
        resume_path = []
        nodes_so_far = 0
        best = init_best
        witness = seed_witness

    if workers > 1 and node_budget is None and time_budget is None and not resume_path:
        merged_nodes = nodes_so_far
        merged_best = best
        merged_witness = witness
        todo = classes[cursor:]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = ((n, kind, bound_strategy, prefix, init_best) for prefix in todo)
            for class_nodes, class_best, class_witness in pool.map(
                _run_class, jobs, chunksize=max(1, len(todo) // (8 * workers))
            ):
                merged_nodes += class_nodes
                if class_best > merged_best and class_witness is not None:
                    merged_best = class_best
                    merged_witness = list(class_witness)
        return SearchCheckpoint(
            version=CHECKPOINT_VERSION,
            n=n,
            prefix=[],
            best_count=merged_best,
            witness=merged_witness,
            nodes_visited=merged_nodes,
            canonical_class_cursor=len(classes),
        )

    searcher = _Searcher(n, kind, bound_strategy, prune_ref=init_best)
    searcher.nodes = nodes_so_far
    searcher.node_budget = node_budget
    if time_budget is not None:
        searcher.deadline = time.monotonic() + time_budget

    state = {"cursor": cursor, "best": best, "witness": witness}

    def snapshot() -> SearchCheckpoint:
        current_best = state["best"]
        current_witness = state["witness"]
        if searcher.best_local > current_best and searcher.best_witness is not None:
            current_best = searcher.best_local
            current_witness = list(searcher.best_witness)
        return SearchCheckpoint(
            version=CHECKPOINT_VERSION,
            n=n,
            prefix=list(searcher.path),
            best_count=current_best,
            witness=current_witness,
            nodes_visited=searcher.nodes,
            canonical_class_cursor=state["cursor"],
        )

    if checkpoint_interval is not None and on_checkpoint is not None:
        interval = max(1, checkpoint_interval)

        def tick() -> None:
            if searcher.nodes % interval == 0:
                on_checkpoint(snapshot())

        searcher.tick = tick

    try:
        for class_index in range(cursor, len(classes)):
            searcher.reset()
            searcher.prune_ref = init_best
            lam_stack = searcher.replay_prefix(classes[class_index])
            resume = None
            if resume_path and class_index == cursor:
                resume = resume_path[depth:] or None
            searcher.expand(depth, lam_stack, resume)
            if searcher.best_local > state["best"] and searcher.best_witness is not None:
                state["best"] = searcher.best_local
                state["witness"] = list(searcher.best_witness)
            state["cursor"] = class_index + 1
    except _BudgetExhausted:
        return snapshot()

    searcher.reset()  # clears the last class prefix: an empty path marks completion
    return snapshot()


def search_report(cp: SearchCheckpoint, mode: str, wall_seconds: float,
                  *, complete: Optional[bool] = None) -> dict:
    bound = 3**cp.n
    return {
        "n": cp.n,
        "mode": mode,
        "max_count": cp.best_count,
        "bound_3n": bound,
        "conjecture_holds": cp.best_count <= bound,
        "complete": is_complete(cp) if complete is None else complete,
        "nodes_visited": cp.nodes_visited,
        "wall_seconds": wall_seconds,
        "witness": cp.witness,
        "canonical_class_cursor": cp.canonical_class_cursor,
    }

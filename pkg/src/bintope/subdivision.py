"""Regular simplicial subdivisions from a lifting, and the degree they count.

The lower cells of a lifted configuration are found by two cooperating
searches over the LP kernel:

* extension walks the DAG of lower faces, growing a sorted node by one point
  at a time (a node extends only by indices above its maximum, so every face
  has exactly one parent);
* pivoting walks the flip graph, crossing one facet of a known cell at a time.

Work proceeds in synchronous rounds: a FIFO slice of waiting nodes is
extended while a random sample of cells with unexplored facets is pivoted,
then the coordinator merges results in task order.  Results therefore never
depend on the number of workers.

With pivoting enabled two extra rules keep the search small.  A node is
skipped once every cell containing it is known and every facet of those
cells that still contains the node has been crossed (the cells through a
lower face form a connected flip graph, so nothing is missing).  The search
stops as soon as every facet of every known cell has been crossed, since the
whole flip graph is connected.
"""
from __future__ import annotations

import random
import threading
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .binomial import BinomialSystem, InconsistentSystemError, analyze
from .intlinalg import det_exact
from .lpkernel import (
    DegenerateLiftingError,
    LiftedPointSet,
    cell_normal,
    check_certificate,
    extend_feasible,
    pivot_step,
)

__all__ = [
    "Node",
    "Cell",
    "Subdivision",
    "NodeStore",
    "DegreeResult",
    "LiftingExhaustedError",
    "dedup_insert",
    "subdivide",
    "degree",
    "support_points",
    "simplex_nvol",
    "MAX_RELIFTS",
]

MAX_RELIFTS = 32


class LiftingExhaustedError(RuntimeError):
    """Every lifting tried was degenerate."""


@dataclass(frozen=True, order=True)
class Node:
    """A sorted, duplicate-free set of point indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError(f"node {idx} has repeated indices")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def mask(self) -> int:
        return _mask(self.indices)


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


class NodeStore:
    """Set of canonical nodes with an atomic check-and-insert."""

    def __init__(self):
        self._seen: set[tuple[int, ...]] = set()
        self._lock = threading.Lock()

    def insert(self, node) -> bool:
        key = node.indices if isinstance(node, Node) else tuple(sorted(node))
        with self._lock:
            if key in self._seen:
                return False
            self._seen.add(key)
            return True

    def __contains__(self, node) -> bool:
        key = node.indices if isinstance(node, Node) else tuple(sorted(node))
        return key in self._seen

    def __len__(self) -> int:
        return len(self._seen)


def dedup_insert(store: NodeStore, node) -> bool:
    """True exactly once per distinct node."""
    return store.insert(node)


def simplex_nvol(points: Sequence[Sequence[int]]) -> int:
    """``|det(a_1 - a_0, ..., a_d - a_0)|`` for d+1 integer points."""
    a0 = points[0]
    return abs(det_exact([[x - y for x, y in zip(p, a0)] for p in points[1:]]))


@dataclass(frozen=True)
class Cell:
    node: Node
    nvol: int
    support: LiftedPointSet = field(repr=False, compare=False)

    @property
    def indices(self) -> tuple[int, ...]:
        return self.node.indices

    @property
    def points(self) -> list[tuple[int, ...]]:
        return [self.support.points[i] for i in self.indices]

    @cached_property
    def normal(self) -> tuple[Fraction, ...]:
        """Exact alpha with ``<a, alpha> + w(a)`` minimal exactly on the cell."""
        return cell_normal(self.support, self.indices)

    def verify(self) -> bool:
        return check_certificate(self.support, self.indices, self.normal)


@dataclass(frozen=True)
class Subdivision:
    cells: tuple[Cell, ...]
    support: LiftedPointSet
    lifting_seed: int | None
    stats: dict
    complete: bool = True

    @property
    def total_nvol(self) -> int:
        return sum(c.nvol for c in self.cells)

    def index_sets(self) -> list[tuple[int, ...]]:
        return [c.indices for c in self.cells]

    def __len__(self) -> int:
        return len(self.cells)


# ---------------------------------------------------------------- worker side

_WORKER_STATE: dict = {}


def _init_worker(S: LiftedPointSet, mode: str):
    _WORKER_STATE["S"] = S
    _WORKER_STATE["mode"] = mode


def _run_task(task):
    return _execute(_WORKER_STATE["S"], _WORKER_STATE["mode"], task)


def _execute(S: LiftedPointSet, mode: str, task):
    kind, node, basis, items = task
    out = []
    if kind == "x":
        for a in items:
            ans = extend_feasible(S, node, a, basis=basis, mode=mode, check=False)
            out.append((a, ans.status, ans.basis))
    else:
        for leave in items:
            ans = pivot_step(S, node, leave, mode=mode, check=False)
            out.append((leave, ans.status, ans.basis))
    return out


class _Pool:
    def __init__(self, S: LiftedPointSet, mode: str, workers: int):
        self.S, self.mode, self.workers = S, mode, workers
        self._ex = None
        if workers > 1:
            self._ex = ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker, initargs=(S, mode)
            )

    def map(self, tasks: list) -> list:
        if self._ex is None:
            return [_execute(self.S, self.mode, t) for t in tasks]
        chunk = max(1, len(tasks) // (4 * self.workers))
        return list(self._ex.map(_run_task, tasks, chunksize=chunk))

    def close(self):
        if self._ex is not None:
            self._ex.shutdown(cancel_futures=True)


# ---------------------------------------------------------------- coordinator

class _CellState:
    __slots__ = ("mask", "open")

    def __init__(self, mask: int, indices):
        self.mask = mask
        self.open = set(indices)


class _Search:
    def __init__(self, S: LiftedPointSet, pivoting: bool, batch: int, rng: random.Random):
        self.S = S
        self.d1 = S.dim + 1
        self.pivoting = pivoting
        self.batch = batch
        self.ell = min(self.d1, 10)
        self.rng = rng
        self.cells: dict[tuple[int, ...], _CellState] = {}
        self.nvol: dict[tuple[int, ...], int] = {}
        self.by_point: list[list[int]] = [[] for _ in range(S.n)]
        self.facet_owner: dict[int, tuple[int, ...]] = {}
        self.open_list: list[tuple[int, ...]] = []
        self.open_pos: dict[tuple[int, ...], int] = {}
        self.open_facets = 0
        self.infeasible: set[int] = set()
        self.store = NodeStore()
        self.waiting: deque = deque([((), None)])
        self.stats = dict(
            rounds=0,
            extension_lps=0,
            pivot_lps=0,
            nodes_explored=0,
            nodes_pruned=0,
            shortcut_feasible=0,
            shortcut_infeasible=0,
        )

    # cell bookkeeping
    def add_cell(self, cell: tuple[int, ...]) -> bool:
        if cell in self.cells:
            return False
        if len(cell) != self.d1:
            raise RuntimeError(f"kernel returned a basis of size {len(cell)}")
        vol = simplex_nvol([self.S.points[i] for i in cell])
        if vol == 0:
            raise RuntimeError(f"flat cell {cell}")
        mask = _mask(cell)
        st = _CellState(mask, cell)
        self.cells[cell] = st
        self.nvol[cell] = vol
        for i in cell:
            self.by_point[i].append(mask)
        self.open_pos[cell] = len(self.open_list)
        self.open_list.append(cell)
        self.open_facets += len(cell)
        for p in cell:
            f = mask & ~(1 << p)
            other = self.facet_owner.pop(f, None)
            if other is None:
                self.facet_owner[f] = cell
            else:
                q = (self.cells[other].mask & ~f).bit_length() - 1
                self.resolve(other, q)
                self.resolve(cell, p)
        return True

    def resolve(self, cell, leave: int):
        st = self.cells[cell]
        if leave not in st.open:
            return
        st.open.discard(leave)
        self.open_facets -= 1
        f = st.mask & ~(1 << leave)
        if self.facet_owner.get(f) == cell:
            del self.facet_owner[f]
        if not st.open:
            pos = self.open_pos.pop(cell)
            last = self.open_list.pop()
            if pos < len(self.open_list):
                self.open_list[pos] = last
                self.open_pos[last] = pos

    def containing(self, mask: int) -> list[int]:
        i = min(
            (b for b in range(mask.bit_length()) if mask >> b & 1),
            key=lambda b: len(self.by_point[b]),
        )
        return [c for c in self.by_point[i] if c & mask == mask]

    def covered(self, node: tuple[int, ...]) -> bool:
        if not node:
            return False
        mask = _mask(node)
        found = self.containing(mask)
        if not found:
            return False
        for cm in found:
            cell = tuple(b for b in range(cm.bit_length()) if cm >> b & 1)
            if any(p not in node for p in self.cells[cell].open):
                return False
        return True

    # one round
    def extension_tasks(self):
        tasks, direct = [], []
        while self.waiting and len(tasks) + len(direct) < self.batch:
            node, basis = self.waiting.popleft()
            if self.pivoting and self.covered(node):
                self.stats["nodes_pruned"] += 1
                continue
            self.stats["nodes_explored"] += 1
            nmask = _mask(node)
            start = node[-1] + 1 if node else 0
            lp = []
            for a in range(start, self.S.n):
                m = nmask | (1 << a)
                if node and any((m & ~(1 << g)) in self.infeasible for g in node):
                    self.infeasible.add(m)
                    self.stats["shortcut_infeasible"] += 1
                    continue
                owners = self.containing(m) if node else []
                if owners:
                    cm = owners[0]
                    cell = tuple(b for b in range(cm.bit_length()) if cm >> b & 1)
                    direct.append((node, a, cell))
                    self.stats["shortcut_feasible"] += 1
                    continue
                lp.append(a)
            if lp:
                tasks.append(("x", node, basis, tuple(lp)))
        return tasks, direct

    def pivot_tasks(self):
        if not self.pivoting or not self.open_list:
            return []
        k = min(self.batch, len(self.open_list))
        picked = self.rng.sample(range(len(self.open_list)), k)
        tasks = []
        for pos in picked:
            cell = self.open_list[pos]
            leaves = sorted(self.cells[cell].open)
            leaves = self.rng.sample(leaves, min(self.ell, len(leaves)))
            tasks.append(("p", cell, None, tuple(leaves)))
        return tasks

    def child(self, node, a, basis):
        new = tuple(sorted(node + (a,)))
        if len(new) < self.d1 and dedup_insert(self.store, new):
            self.waiting.append((new, basis))

    def merge(self, tasks, results, direct):
        for node, a, cell in direct:
            self.child(node, a, cell)
        for (kind, node, _, _), out in zip(tasks, results):
            if kind == "x":
                self.stats["extension_lps"] += len(out)
                nmask = _mask(node)
                for a, status, basis in out:
                    if status == "feasible":
                        self.add_cell(basis)
                        self.child(node, a, basis)
                    elif status == "infeasible":
                        self.infeasible.add(nmask | (1 << a))
                    else:
                        raise RuntimeError(f"extension of {node} reported {status}")
            else:
                self.stats["pivot_lps"] += len(out)
                for leave, status, basis in out:
                    if status == "boundary":
                        self.resolve(node, leave)
                    else:
                        self.add_cell(basis)
                        self.resolve(node, leave)

    def finished(self) -> bool:
        if self.pivoting and self.cells and self.open_facets == 0:
            return True
        return not self.waiting and (not self.pivoting or self.open_facets == 0)

    def run(self, pool: _Pool, deadline: float | None = None) -> bool:
        """Search to completion; False if ``deadline`` passed first."""
        while not self.finished():
            if deadline is not None and time.monotonic() > deadline:
                return False
            self.stats["rounds"] += 1
            xt, direct = self.extension_tasks()
            pt = self.pivot_tasks()
            tasks = xt + pt
            results = pool.map(tasks) if tasks else []
            self.merge(tasks, results, direct)
        return True


def _derive_seed(base: int | None, attempt: int) -> int:
    ss = np.random.SeedSequence([0 if base is None else int(base) & 0xFFFFFFFFFFFFFFFF, attempt])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def subdivide(
    S: LiftedPointSet,
    workers: int = 1,
    *,
    mode: str = "float",
    pivoting: bool = True,
    batch: int = 32,
    max_relifts: int = MAX_RELIFTS,
    time_budget: float | None = None,
) -> Subdivision:
    """All lower cells of the lifted configuration ``S``.

    A degenerate lifting (a lower face with more than d+1 points) triggers a
    fresh lifting with a seed derived from the original one; after
    ``max_relifts`` failures :class:`LiftingExhaustedError` is raised.  If
    ``time_budget`` seconds pass first, the cells found so far are returned
    with ``complete=False``.
    """
    if S.n < S.dim + 1:
        raise ValueError(f"need at least {S.dim + 1} points in dimension {S.dim}, got {S.n}")
    if mode not in ("float", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    if batch < 1:
        raise ValueError("batch must be positive")
    workers = max(1, int(workers))
    base_seed = S.seed
    relifts = 0
    deadline = None if time_budget is None else time.monotonic() + time_budget
    while True:
        rng = random.Random(_derive_seed(S.seed, 0))
        search = _Search(S, pivoting, batch, rng)
        pool = _Pool(S, mode, workers)
        try:
            complete = search.run(pool, deadline)
            break
        except DegenerateLiftingError:
            relifts += 1
            if relifts > max_relifts:
                raise LiftingExhaustedError(
                    f"{max_relifts} consecutive liftings were degenerate"
                ) from None
            S = S.relift(_derive_seed(base_seed, relifts))
        finally:
            pool.close()
    cells = tuple(
        Cell(Node(c), search.nvol[c], S) for c in sorted(search.cells)
    )
    stats = dict(search.stats)
    stats["relifts"] = relifts
    stats["cells"] = len(cells)
    return Subdivision(cells, S, S.seed, stats, complete)


# ---------------------------------------------------------------- degree

@dataclass(frozen=True)
class DegreeResult:
    dimension: int
    component_count: int
    degree: int
    subdivision: Subdivision | None = None


def support_points(system: BinomialSystem, structure=None) -> list[tuple[int, ...]]:
    """Columns of ``P_0`` plus the origin: the support whose volume is the degree."""
    structure = structure or analyze(system)
    P0 = structure.snf.P_0
    if P0 is None:
        raise ValueError("zero-dimensional system has no positive-dimensional support")
    return [tuple(c) for c in P0.columns()] + [(0,) * P0.nrows]


def degree(
    system: BinomialSystem,
    workers: int = 1,
    *,
    seed: int = 0,
    mode: str = "float",
    pivoting: bool = True,
) -> DegreeResult:
    """Dimension, component count and degree of each component of ``x^A = b``."""
    structure = analyze(system)
    if not structure.consistent:
        raise InconsistentSystemError("system has no torus solutions")
    count = structure.component_count
    if structure.dimension == 0:
        return DegreeResult(0, count, 1)
    pts = support_points(system, structure)
    S = LiftedPointSet.from_points(pts, seed)
    if S.n == S.dim + 1:
        # a single simplex; no lifting can be degenerate
        vol = simplex_nvol(list(S.points))
        cell = Cell(Node(tuple(range(S.n))), vol, S)
        sub = Subdivision((cell,), S, S.seed, {"cells": 1, "relifts": 0})
        return DegreeResult(structure.dimension, count, vol, sub)
    sub = subdivide(S, workers, mode=mode, pivoting=pivoting)
    return DegreeResult(structure.dimension, count, sub.total_nvol, sub)

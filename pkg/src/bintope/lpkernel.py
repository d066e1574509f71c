"""Simplex kernel for lower faces of a lifted point configuration.

Every LP here lives on the polyhedron

    Q = {(alpha, beta) : <a, alpha> + w(a) - beta >= 0 for all a in S}

whose vertices are exactly the lower cells of the lifted configuration (a
vertex is cut out by d+1 tight points) and whose edges are simplicial pivots.
A basis is a list of d+1 point indices; its tight constraints fix the vertex
``z = (alpha, beta)``.  The slack of point ``a`` at ``z`` is
``<a, alpha> + w(a) - beta``, i.e. the lifted height of ``a`` above the
supporting hyperplane with inner normal ``(alpha, 1)``.

Two arithmetic backends share one code path: numpy float64 and numpy object
arrays of ``Fraction``.  The float backend refuses to decide anything that
falls in an ambiguity band and the caller reruns the LP exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "LiftedPointSet",
    "LpAnswer",
    "DegenerateLiftingError",
    "InfeasibleStartError",
    "extend_feasible",
    "pivot_step",
    "initial_vertex",
    "cell_normal",
    "check_certificate",
    "ZERO_TOL",
    "AMBIGUOUS_TOL",
]

DEFAULT_LIFTING_BOUND = 1 << 20
ZERO_TOL = 1e-7
AMBIGUOUS_TOL = 1e-5
_REFACTOR_EVERY = 24


class DegenerateLiftingError(RuntimeError):
    """More than d+1 lifted points lie on one lower supporting hyperplane."""


class InfeasibleStartError(ValueError):
    """A supplied basis is not a lower cell of the lifted configuration."""


class _Ambiguous(Exception):
    """Float arithmetic cannot settle a sign; rerun exactly."""


@dataclass(frozen=True, eq=False)
class LiftedPointSet:
    """Distinct integer points with integer liftings.

    ``index_map[i]`` is the position in ``points`` of the i-th input point,
    so callers can merge data attached to duplicated inputs.
    """

    points: tuple[tuple[int, ...], ...]
    lifting: tuple[int, ...]
    seed: int | None = None
    index_map: tuple[int, ...] = ()
    bound: int = DEFAULT_LIFTING_BOUND
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.points:
            raise ValueError("empty point set")
        d = len(self.points[0])
        if d < 1 or any(len(p) != d for p in self.points):
            raise ValueError("points must share a positive dimension")
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be distinct; use LiftedPointSet.from_points")
        if len(self.lifting) != len(self.points):
            raise ValueError("one lifting value per point is required")
        if not self.index_map:
            object.__setattr__(self, "index_map", tuple(range(len(self.points))))

    @classmethod
    def from_points(
        cls,
        points: Sequence[Sequence[int]],
        seed: int | None = 0,
        *,
        lifting: Sequence[int] | None = None,
        bound: int = DEFAULT_LIFTING_BOUND,
    ) -> "LiftedPointSet":
        """Merge duplicate points and draw liftings uniformly from ``[0, bound)``.

        Explicit ``lifting`` values refer to the input points; for duplicates
        the first occurrence wins.
        """
        uniq: dict[tuple[int, ...], int] = {}
        index_map = []
        first = []
        for i, p in enumerate(points):
            key = tuple(int(v) for v in p)
            if key not in uniq:
                uniq[key] = len(uniq)
                first.append(i)
            index_map.append(uniq[key])
        pts = tuple(uniq)
        if lifting is None:
            rng = np.random.default_rng(seed)
            lift = tuple(int(v) for v in rng.integers(0, bound, size=len(pts)))
        else:
            if len(lifting) != len(points):
                raise ValueError("one lifting value per input point is required")
            lift = tuple(int(lifting[i]) for i in first)
        return cls(pts, lift, seed, tuple(index_map), bound)

    def relift(self, seed: int, bound: int | None = None) -> "LiftedPointSet":
        bound = self.bound if bound is None else bound
        rng = np.random.default_rng(seed)
        lift = tuple(int(v) for v in rng.integers(0, bound, size=self.n))
        return LiftedPointSet(self.points, lift, seed, self.index_map, bound)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def n(self) -> int:
        return len(self.points)

    def arrays(self, exact: bool):
        """(normals, lifting) with one normal row ``(a, -1)`` per point."""
        key = "exact" if exact else "float"
        if key not in self._cache:
            if exact:
                N = np.array([[Fraction(v) for v in p] + [Fraction(-1)] for p in self.points], dtype=object)
                w = np.array([Fraction(v) for v in self.lifting], dtype=object)
            else:
                N = np.array([list(p) + [-1] for p in self.points], dtype=float)
                w = np.array(self.lifting, dtype=float)
            self._cache[key] = (N, w)
        return self._cache[key]


@dataclass(frozen=True)
class LpAnswer:
    """Outcome of one kernel call.

    ``status`` is one of ``"feasible"``, ``"infeasible"``,
    ``"parent-infeasible"`` (the node itself is not a lower face) or
    ``"boundary"`` (pivoting left the lower hull).  ``basis`` is the sorted
    tight set of the final vertex, ``normal`` its ``alpha`` and ``objective``
    the optimal value (extension LPs only).
    """

    feasible: bool
    status: str
    normal: tuple = ()
    basis: tuple[int, ...] = ()
    objective: object = None
    pivots: int = 0
    exact: bool = False


# ---------------------------------------------------------------- linear algebra

def _inv_exact(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    A = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise np.linalg.LinAlgError("singular basis")
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [v / piv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return np.array([row[n:] for row in A], dtype=object)


def _null_vector_exact(K: np.ndarray, size: int) -> np.ndarray:
    """A nonzero u with K @ u == 0 (K has fewer rows than columns)."""
    rows = [list(r) for r in K]
    pivots = []
    r = 0
    for c in range(size):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = next(c for c in range(size) if c not in pivots)
    u = [Fraction(0)] * size
    u[free] = Fraction(1)
    for i, c in enumerate(pivots):
        u[c] = -rows[i][free]
    return np.array(u, dtype=object)


def _null_vector_float(K: np.ndarray, size: int) -> np.ndarray:
    if K.shape[0] == 0:
        u = np.zeros(size)
        u[-1] = 1.0
        return u
    _, s, vt = np.linalg.svd(K)
    return vt[-1]


# ---------------------------------------------------------------- walker

class _Walker:
    """A vertex of Q with its basis inverse; columns of ``inv`` are edge directions."""

    def __init__(self, S: LiftedPointSet, exact: bool):
        self.S = S
        self.exact = exact
        self.N, self.w = S.arrays(exact)
        self.d1 = S.dim + 1
        self.pivots = 0
        self._since_refactor = 0

    # three-zone sign used for every decision
    def sign(self, x) -> int:
        if self.exact:
            return (x > 0) - (x < 0)
        ax = abs(x)
        if ax < ZERO_TOL:
            return 0
        if ax <= AMBIGUOUS_TOL:
            raise _Ambiguous
        return 1 if x > 0 else -1

    def degenerate(self, msg: str):
        if not self.exact:
            raise _Ambiguous
        raise DegenerateLiftingError(msg)

    def set_basis(self, basis: Sequence[int]):
        self.basis = list(basis)
        NB = self.N[self.basis]
        try:
            self.inv = _inv_exact(NB) if self.exact else np.linalg.inv(NB)
        except np.linalg.LinAlgError:
            raise InfeasibleStartError(f"points {sorted(basis)} are affinely dependent") from None
        if not self.exact and np.abs(self.inv).max() * np.abs(NB).max() > 1e10:
            raise _Ambiguous
        self._since_refactor = 0
        self._update_z()

    def _update_z(self):
        self.z = self.inv @ (-self.w[self.basis])
        self.slack = self.N @ self.z + self.w

    def check_vertex(self):
        """The current basis must be a simple vertex of Q."""
        inb = set(self.basis)
        for i, g in enumerate(self.slack):
            s = self.sign(g)
            if i in inb:
                continue
            if s < 0:
                raise InfeasibleStartError(f"basis {sorted(self.basis)} is not a lower cell")
            if s == 0:
                self.degenerate(f"points {sorted(self.basis + [i])} share a lower supporting hyperplane")

    def ratio_test(self, u):
        """Entering index when moving along u, or None if the ray never leaves Q."""
        rates = self.N @ u
        inb = set(self.basis)
        best = None
        ties = []
        for i in range(len(rates)):
            if i in inb or self.sign(rates[i]) >= 0:
                continue
            g = self.slack[i]
            if self.sign(g) <= 0:
                self.degenerate("zero-length pivot step")
            t = g / -rates[i]
            if best is None:
                best = (t, i)
                continue
            if self.exact:
                if t < best[0]:
                    best, ties = (t, i), []
                elif t == best[0]:
                    ties.append(i)
            else:
                gap = abs(t - best[0])
                scale = max(1.0, abs(t), abs(best[0]))
                if gap <= 1e-9 * scale:
                    raise _Ambiguous
                if t < best[0]:
                    best = (t, i)
        if best is None:
            return None, rates
        if ties:
            self.degenerate(f"points {sorted([best[1]] + ties)} enter the basis simultaneously")
        return best[1], rates

    def exchange(self, pos: int, entering: int, rates):
        r_e = rates[entering]
        inv = self.inv
        u = inv[:, pos].copy()
        coef = self.N[entering] @ inv
        new = inv - np.outer(u, coef) / r_e
        new[:, pos] = u / r_e
        self.inv = new
        self.basis[pos] = entering
        self.pivots += 1
        self._since_refactor += 1
        if not self.exact and self._since_refactor >= _REFACTOR_EVERY:
            self.set_basis(self.basis)
        else:
            self._update_z()

    def minimize(self, c, fixed: set[int], target: int | None = None):
        """Simplex phase two for ``min c.z`` keeping ``fixed`` points tight.

        Leaving position by Bland's rule (smallest point index among
        improving ones).  Stops early once ``target`` enters the basis.
        """
        while True:
            if target is not None and target in self.basis:
                return
            lam = c @ self.inv
            cand = [
                (self.basis[p], p)
                for p in range(self.d1)
                if self.basis[p] not in fixed and self.sign(lam[p]) < 0
            ]
            if not cand:
                return
            _, pos = min(cand)
            entering, rates = self.ratio_test(self.inv[:, pos])
            if entering is None:
                raise RuntimeError("objective unbounded on a bounded-below LP")
            self.exchange(pos, entering, rates)

    def normal(self):
        if self.exact:
            return tuple(self.z[:-1])
        return tuple(float(v) for v in self.z[:-1])


def initial_vertex(S: LiftedPointSet, *, mode: str = "float") -> tuple[int, ...]:
    """Some lower cell, reached from ``alpha = 0`` by successive ratio tests."""
    if mode == "float":
        try:
            return _initial_vertex(S, False)
        except _Ambiguous:
            pass
    return _initial_vertex(S, True)


def _initial_vertex(S: LiftedPointSet, exact: bool) -> tuple[int, ...]:
    N, w = S.arrays(exact)
    walker = _Walker(S, exact)
    d1 = walker.d1
    zero = Fraction(0) if exact else 0.0
    z = np.array([zero] * d1, dtype=object if exact else float)
    low = min(range(S.n), key=lambda i: (S.lifting[i], i))
    z[-1] = w[low]
    basis = [low]
    while len(basis) < d1:
        K = N[basis]
        u = _null_vector_exact(K, d1) if exact else _null_vector_float(K, d1)
        rates = N @ u
        inb = set(basis)
        if not any(walker.sign(rates[i]) < 0 for i in range(S.n) if i not in inb):
            u = -u
            rates = -rates
        slack = N @ z + w
        best = None
        for i in range(S.n):
            if i in inb or walker.sign(rates[i]) >= 0:
                continue
            g = slack[i]
            t = zero if walker.sign(g) <= 0 else g / -rates[i]
            if best is None or t < best[0] or (t == best[0] and i < best[1]):
                best = (t, i)
        if best is None:
            raise ValueError("points do not affinely span the ambient space")
        z = z + best[0] * u
        basis.append(best[1])
    walker.set_basis(basis)
    walker.check_vertex()
    return tuple(sorted(basis))


def _run(S, exact, fn):
    walker = _Walker(S, exact)
    return fn(walker)


def _with_fallback(S: LiftedPointSet, mode: str, fn):
    if mode not in ("float", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "float":
        try:
            return _run(S, False, fn)
        except _Ambiguous:
            pass
    return _run(S, True, fn)


def _answer(walker: _Walker, status: str, feasible: bool, objective=None) -> LpAnswer:
    return LpAnswer(
        feasible=feasible,
        status=status,
        normal=walker.normal(),
        basis=tuple(sorted(walker.basis)),
        objective=objective,
        pivots=walker.pivots,
        exact=walker.exact,
    )


def extend_feasible(
    S: LiftedPointSet,
    node: Sequence[int],
    candidate: int,
    *,
    basis: Sequence[int] | None = None,
    mode: str = "float",
    check: bool = True,
) -> LpAnswer:
    """Can the lower face ``node`` be extended by ``candidate``?

    Minimizes the lifted height of ``candidate`` above supporting hyperplanes
    of ``node``; the minimum is 0 exactly when ``node + [candidate]`` is a
    lower face.  ``basis`` may be any lower cell containing ``node`` (for
    example the answer basis of the parent node) and skips phase one;
    ``check=False`` trusts it without re-verification.
    When feasible, the returned basis is a lower cell containing the extended
    node.
    """
    node = [int(i) for i in node]
    candidate = int(candidate)
    if len(set(node)) != len(node):
        raise ValueError("node indices must be distinct")
    if candidate in node:
        raise ValueError("candidate already belongs to the node")

    def fn(walker: _Walker):
        if basis is not None:
            walker.set_basis(basis)
            if check:
                walker.check_vertex()
            if not set(node) <= set(walker.basis):
                raise InfeasibleStartError("warm-start basis does not contain the node")
        else:
            walker.set_basis(_initial_vertex(S, walker.exact))
            if node:
                c = walker.N[node].sum(axis=0)
                walker.minimize(c, fixed=set())
                tight = [walker.sign(walker.slack[i]) == 0 for i in node]
                if not all(tight):
                    return _answer(walker, "parent-infeasible", False)
                if not set(node) <= set(walker.basis):
                    walker.degenerate("node is tight but not basic")
        walker.minimize(walker.N[candidate], fixed=set(node), target=candidate)
        obj = walker.slack[candidate]
        s = walker.sign(obj)
        if s < 0:
            raise RuntimeError("negative extension objective")
        if s == 0 and candidate not in walker.basis:
            walker.degenerate("candidate tight but not basic")
        feasible = s == 0
        return _answer(walker, "feasible" if feasible else "infeasible", feasible, obj)

    return _with_fallback(S, mode, fn)


def pivot_step(
    S: LiftedPointSet,
    cell: Sequence[int],
    leave: int,
    *,
    mode: str = "float",
    check: bool = True,
) -> LpAnswer:
    """Pivot the lower cell ``cell`` across the facet opposite ``leave``.

    The released constraint becomes strictly slack; the first constraint to
    become tight enters.  ``status == "boundary"`` when no point ever does,
    i.e. the facet lies on the boundary of ``conv S``.  ``check=False`` skips
    re-verifying that ``cell`` is a lower cell (for cells already certified).
    """
    cell = [int(i) for i in cell]
    if leave not in cell:
        raise ValueError("leaving index must belong to the cell")
    if len(cell) != S.dim + 1:
        raise ValueError(f"a cell has {S.dim + 1} points")

    def fn(walker: _Walker):
        walker.set_basis(cell)
        if check:
            walker.check_vertex()
        pos = walker.basis.index(leave)
        entering, rates = walker.ratio_test(walker.inv[:, pos])
        if entering is None:
            return _answer(walker, "boundary", False)
        walker.exchange(pos, entering, rates)
        return _answer(walker, "feasible", True)

    return _with_fallback(S, mode, fn)


def cell_normal(S: LiftedPointSet, cell: Sequence[int]) -> tuple[Fraction, ...]:
    """Exact ``alpha`` of the lower cell."""
    walker = _Walker(S, True)
    walker.set_basis(list(cell))
    return walker.normal()


def check_certificate(S: LiftedPointSet, cell: Sequence[int], normal: Sequence) -> bool:
    """Exact re-check of a lower-cell certificate.

    With ``h(a) = <a, normal> + w(a)`` every point of the cell must share one
    value of ``h`` and every other point must lie strictly above it.
    """
    alpha = [Fraction(v) for v in normal]
    h = [sum(Fraction(p) * a for p, a in zip(pt, alpha)) + w for pt, w in zip(S.points, S.lifting)]
    cell = set(cell)
    base = {h[i] for i in cell}
    if len(base) != 1:
        return False
    b = base.pop()
    return all(h[i] > b for i in range(S.n) if i not in cell)

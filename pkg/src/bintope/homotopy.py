"""Witness sets of binomial components by polyhedral homotopy.

A component ``V`` of ``x^A = b`` is the image of ``t -> (xi, t)^P``.  Cutting
it with ``d = dim V`` generic affine equations ``sum_j c_ij x_j = c_i0`` gives
a square Laurent system in ``t`` whose monomials are the columns of ``P_0``
(plus the constant term).  Each cell of a regular subdivision of that support
yields a start system which is itself binomial; its solutions are tracked
from ``s = 0`` to ``s = 1``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .binomial import (
    BinomialSystem,
    ComponentParametrization,
    InconsistentSystemError,
    analyze,
    component,
    enumerate_components,
    evaluate_parametrization,
    residual as binomial_residual,
)
from .lpkernel import LiftedPointSet, check_certificate
from .subdivision import Cell, subdivide, support_points

__all__ = [
    "WitnessProblem",
    "HomotopyDescriptor",
    "TrackedPath",
    "WitnessSet",
    "InvalidCellError",
    "SingularStartError",
    "build_homotopy",
    "start_system",
    "binomial_start_system",
    "start_solutions",
    "track",
    "witness_set",
    "WITNESS_LIFTING_BOUND",
]

WITNESS_LIFTING_BOUND = 16
NEWTON_TOL = 1e-10
MIN_STEP = 1e-14
MAX_NORM = 1e14
DEDUP_TOL = 1e-6


class InvalidCellError(ValueError):
    """The cell is not a lower cell of the problem's lifted support."""


class SingularStartError(ValueError):
    """Coefficients are not generic enough to build a start system."""


def unit_circle(rng: np.random.Generator, shape) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(shape))


@dataclass(frozen=True, eq=False)
class WitnessProblem:
    """A component together with a random affine cut of complementary dimension.

    ``coefficients[i, 0]`` is ``c_i0`` and ``coefficients[i, j]`` multiplies
    ``x_j``.  ``merged[i, a]`` is the coefficient of ``t^a`` in the cut
    equation ``i`` after the torsion point is absorbed, for each distinct
    point ``a`` of ``support``; the constant is moved to the left.
    """

    system: BinomialSystem
    component: ComponentParametrization
    coefficients: np.ndarray
    support: LiftedPointSet
    merged: np.ndarray
    seed: int

    @property
    def dimension(self) -> int:
        return self.component.dimension

    @classmethod
    def create(
        cls,
        system: BinomialSystem,
        indices: Sequence[int] | None = None,
        *,
        seed: int = 0,
        lifting_bound: int = WITNESS_LIFTING_BOUND,
    ) -> "WitnessProblem":
        st = analyze(system)
        if not st.consistent:
            raise InconsistentSystemError("system has no torus solutions")
        if st.dimension == 0:
            raise ValueError("zero-dimensional system: its solutions are points, not a witness set")
        if indices is None:
            indices = (0,) * len(st.snf.divisors)
        comp = component(st, indices)
        d, n = st.dimension, system.num_vars
        rng = np.random.default_rng(seed)
        coeffs = unit_circle(rng, (d, n + 1))
        pts = support_points(system, st)
        S = LiftedPointSet.from_points(pts, seed, bound=lifting_bound)
        xi = comp.torsion_point
        Pr = st.snf.P_r
        merged = np.zeros((d, S.n), dtype=complex)
        for j in range(n):
            scale = complex(np.prod([xi[i] ** Pr[i, j] for i in range(len(xi))])) if xi else 1.0
            merged[:, S.index_map[j]] += coeffs[:, j + 1] * scale
        merged[:, S.index_map[n]] -= coeffs[:, 0]
        return cls(system, comp, coeffs, S, merged, seed)

    def cut_residual(self, x: Sequence[complex]) -> float:
        x = np.asarray(x, dtype=complex)
        vals = self.coefficients[:, 1:] @ x - self.coefficients[:, 0]
        return float(np.abs(vals).max())

    def target_residual(self, t: Sequence[complex]) -> float:
        """Residual of the cut equations written in the parameters ``t``."""
        A = np.array(self.support.points, dtype=float)
        mon = np.exp(A @ np.log(np.asarray(t, dtype=complex)))
        return float(np.abs(self.merged @ mon).max())


@dataclass(frozen=True, eq=False)
class HomotopyDescriptor:
    """``H(y, u) = sum_a c_a y^a u^{E_a}`` for one cell.

    ``shifts[a]`` is the rational exponent ``<a, alpha> + w(a) - beta`` and
    ``exponents = M * shifts`` with ``M`` the lcm of their denominators
    (``s = u^M``).  The cell's points are exactly those with exponent 0.
    """

    cell: tuple[int, ...]
    points: np.ndarray
    coefficients: np.ndarray
    shifts: tuple[Fraction, ...]
    exponents: np.ndarray
    M: int

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def _parts(self, y, u):
        logy = np.log(y)
        mon = np.exp(self.points @ logy)
        E = self.exponents
        if u == 0:
            uE = (E == 0).astype(float)
            dE = (E == 1).astype(float)
        else:
            uE = u ** E
            dE = np.where(E > 0, E * u ** np.maximum(E - 1, 0), 0.0)
        return mon, uE, dE

    def value(self, y, u) -> np.ndarray:
        mon, uE, _ = self._parts(y, u)
        return self.coefficients @ (mon * uE)

    def jacobians(self, y, u):
        """``(H, dH/dy, dH/du)`` at ``(y, u)``."""
        mon, uE, dE = self._parts(y, u)
        w = self.coefficients * (mon * uE)
        H = w.sum(axis=1)
        Jy = (w @ self.points) / y
        Ju = self.coefficients @ (mon * dE)
        return H, Jy, Ju


def build_homotopy(problem: WitnessProblem, cell: Cell | Sequence[int]) -> HomotopyDescriptor:
    S = problem.support
    idx = tuple(sorted(cell.indices if isinstance(cell, Cell) else cell))
    if len(idx) != S.dim + 1:
        raise InvalidCellError(f"a cell has {S.dim + 1} points, got {len(idx)}")
    try:
        alpha = Cell(_node(idx), 1, S).normal
    except Exception as exc:  # singular basis
        raise InvalidCellError(f"{idx} is not a simplex") from exc
    if not check_certificate(S, idx, alpha):
        raise InvalidCellError(f"{idx} is not a lower cell of the lifted support")
    heights = [
        sum(Fraction(p) * a for p, a in zip(pt, alpha)) + w
        for pt, w in zip(S.points, S.lifting)
    ]
    beta = heights[idx[0]]
    shifts = tuple(h - beta for h in heights)
    M = math.lcm(*(s.denominator for s in shifts))
    exps = np.array([int(s * M) for s in shifts], dtype=np.int64)
    g = math.gcd(*map(int, exps))
    if g > 1:
        exps //= g
    return HomotopyDescriptor(
        cell=idx,
        points=np.array(S.points, dtype=float),
        coefficients=problem.merged,
        shifts=shifts,
        exponents=exps,
        M=M,
    )


def _node(idx):
    from .subdivision import Node

    return Node(idx)


def binomial_start_system(coeffs: np.ndarray, gamma: Sequence[Sequence[int]]) -> BinomialSystem:
    """Binomial form of ``C (y^Gamma)^T = 0`` for a d x (d+1) matrix ``C``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    d = coeffs.shape[0]
    if coeffs.shape != (d, d + 1) or len(gamma) != d + 1:
        raise ValueError("need a d x (d+1) coefficient matrix and d+1 points")
    head = coeffs[:, :d]
    if np.linalg.cond(head) > 1e12:
        raise SingularStartError("coefficient block is singular")
    g = np.linalg.solve(head, coeffs[:, d])
    ad = gamma[d]
    cols = [[int(a) - int(b) for a, b in zip(gamma[i], ad)] for i in range(d)]
    return BinomialSystem.from_columns(cols, [complex(-v) for v in g])


def start_system(problem: WitnessProblem, cell: Cell | Sequence[int]) -> BinomialSystem:
    """The binomial system whose solutions start the homotopy of ``cell``.

    After elimination ``G C = [I | G c_d]`` each row reads
    ``y^{a_i} + g_i y^{a_d} = 0``, i.e. ``y^{a_i - a_d} = -g_i``.
    """
    idx = tuple(sorted(cell.indices if isinstance(cell, Cell) else cell))
    gamma = [problem.support.points[i] for i in idx]
    return binomial_start_system(problem.merged[:, idx], gamma)


def start_solutions(system: BinomialSystem) -> list[np.ndarray]:
    """All torus solutions of a square nonsingular binomial system, Newton-polished."""
    st = analyze(system)
    if st.dimension != 0:
        raise SingularStartError("start system is not zero-dimensional")
    A = np.array(system.exponents.rows, dtype=float)
    b = np.array([complex(v) for v in system.rhs])
    out = []
    for comp in enumerate_components(st):
        y = np.array(evaluate_parametrization(comp, []), dtype=complex)
        out.append(_polish_binomial(A, b, y))
    return out


def _polish_binomial(A, b, y, iters: int = 3):
    # y^A = b in log form: A^T log y = log b
    for _ in range(iters):
        vals = np.exp(A.T @ np.log(y))
        r = vals - b
        if np.abs(r).max() < 1e-15:
            break
        J = (A.T * vals[:, None]) / y[None, :]
        try:
            y = y - np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            break
    return y


@dataclass(frozen=True)
class TrackedPath:
    start: tuple[complex, ...]
    end: tuple[complex, ...]
    status: str
    residual: float
    steps: int
    cell: tuple[int, ...] = ()


def _newton(desc: HomotopyDescriptor, y, u, max_iter: int):
    """Newton at fixed u; returns (y, converged, iterations)."""
    prev = None
    for it in range(1, max_iter + 1):
        H, Jy, _ = desc.jacobians(y, u)
        try:
            dy = np.linalg.solve(Jy, -H)
        except np.linalg.LinAlgError:
            return y, False, it
        size = np.abs(dy).max()
        if prev is not None and size > 0.5 * prev:
            return y, False, it
        y = y + dy
        if not np.all(np.isfinite(y)) or np.any(y == 0):
            return y, False, it
        if size <= NEWTON_TOL * (1 + np.abs(y).max()):
            return y, True, it
        prev = size
    return y, False, max_iter


def track(
    desc: HomotopyDescriptor,
    start: Sequence[complex],
    *,
    initial_step: float = 1e-2,
    max_steps: int = 100000,
) -> TrackedPath:
    """Euler predictor, Newton corrector from ``u = 0`` to ``u = 1``."""
    y = np.array(start, dtype=complex)
    y, _, _ = _newton(desc, y, 0.0, 5)
    u, h = 0.0, initial_step
    streak = 0
    steps = 0
    status = "failed"
    while steps < max_steps:
        steps += 1
        if np.abs(y).max() > MAX_NORM or np.abs(y).min() < 1 / MAX_NORM:
            status = "diverged"
            break
        h = min(h, 1.0 - u)
        _, Jy, Ju = desc.jacobians(y, u)
        try:
            tangent = np.linalg.solve(Jy, -Ju)
        except np.linalg.LinAlgError:
            tangent = None
        ok = False
        if tangent is not None:
            guess = y + h * tangent
            if np.all(np.isfinite(guess)) and not np.any(guess == 0):
                ynew, ok, iters = _newton(desc, guess, u + h, 3)
                ok = ok and iters <= 3
        if ok:
            y, u = ynew, u + h
            if u >= 1.0:
                status = "converged"
                break
            streak += 1
            if streak >= 3:
                h *= 2.0
                streak = 0
        else:
            streak = 0
            h *= 0.5
            if h < MIN_STEP:
                break
    if status == "converged":
        y, _, _ = _newton(desc, y, 1.0, 8)
    res = float(np.abs(desc.value(y, 1.0)).max()) if np.all(np.isfinite(y)) and not np.any(y == 0) else math.inf
    if status == "converged" and not res < 1e-8:
        status = "failed"
    return TrackedPath(
        tuple(complex(v) for v in start),
        tuple(complex(v) for v in y),
        status,
        res,
        steps,
        desc.cell,
    )


@dataclass(frozen=True)
class WitnessSet:
    points: tuple[tuple[complex, ...], ...]
    parameters: tuple[tuple[complex, ...], ...]
    system_residuals: tuple[float, ...]
    cut_residuals: tuple[float, ...]
    degree: int
    complete: bool
    paths: dict = field(default_factory=dict)
    problem: WitnessProblem | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)


def _track_task(args):
    desc, start = args
    return track(desc, start)


def _dedup(points: list[np.ndarray], tol: float = DEDUP_TOL) -> list[int]:
    keep = []
    for i, p in enumerate(points):
        scale = max(1.0, float(np.abs(p).max()))
        if all(np.abs(p - points[j]).max() > tol * scale for j in keep):
            keep.append(i)
    return keep


def witness_set(
    system: BinomialSystem,
    component_indices: Sequence[int] | None = None,
    workers: int = 1,
    *,
    seed: int = 0,
    lifting_bound: int = WITNESS_LIFTING_BOUND,
) -> WitnessSet:
    """Witness points of one component of ``x^A = b``.

    Runs subdivision, one homotopy per cell, path tracking and the map back
    to ``x``.  Failed paths leave ``complete=False`` and are counted in
    ``paths``.
    """
    problem = WitnessProblem.create(system, component_indices, seed=seed, lifting_bound=lifting_bound)
    sub = subdivide(problem.support, workers)
    if sub.support is not problem.support:
        # the subdivision re-lifted; the homotopy must use the same lifting
        problem = WitnessProblem(
            problem.system, problem.component, problem.coefficients, sub.support, problem.merged, problem.seed
        )
    jobs = []
    for cell in sub.cells:
        desc = build_homotopy(problem, cell)
        for y0 in start_solutions(start_system(problem, cell)):
            jobs.append((desc, y0))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            paths = list(ex.map(_track_task, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        paths = [_track_task(j) for j in jobs]
    good = [p for p in paths if p.status == "converged"]
    ts = [np.array(p.end) for p in good]
    keep = _dedup(ts)
    params, xs, rs, cs = [], [], [], []
    for i in keep:
        t = ts[i]
        x = evaluate_parametrization(problem.component, t)
        params.append(tuple(complex(v) for v in t))
        xs.append(tuple(x))
        rs.append(binomial_residual(system, x))
        cs.append(problem.cut_residual(x))
    order = sorted(range(len(xs)), key=lambda i: (xs[i][0].real, xs[i][0].imag))
    counts = {
        "total": len(paths),
        "converged": len(good),
        "diverged": sum(p.status == "diverged" for p in paths),
        "failed": sum(p.status == "failed" for p in paths),
        "duplicates": len(good) - len(keep),
        "cells": len(sub),
        "steps": sum(p.steps for p in paths),
        "lifting_seed": sub.lifting_seed,
    }
    return WitnessSet(
        points=tuple(xs[i] for i in order),
        parameters=tuple(params[i] for i in order),
        system_residuals=tuple(rs[i] for i in order),
        cut_residuals=tuple(cs[i] for i in order),
        degree=sub.total_nvol,
        complete=len(keep) == sub.total_nvol,
        paths=counts,
        problem=problem,
    )

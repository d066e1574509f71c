"""Gradient systems of the periodic superpotential W_{m,k} and a benchmark harness.

    W_{m,k} = sum_{i,j} x_{i,j} y_{i+1,j} z_{i+1,j+1} - y_{i,j} x_{i,j+1} z_{i+1,j+1}

with the first subscript taken mod m and the second mod k.  Each variable
occurs in exactly two monomials, so every partial derivative is a binomial.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Iterable

from .binomial import BinomialSystem, analyze
from .intlinalg import IntMatrix

__all__ = [
    "MasterSpaceSpec",
    "superpotential",
    "partial_derivative",
    "generate",
    "BenchmarkRow",
    "benchmark",
    "write_csv",
]


@dataclass(frozen=True)
class MasterSpaceSpec:
    m: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be positive")
        if (self.m, self.k) == (1, 1):
            raise ValueError("W_{1,1} is excluded: its gradient is not a binomial system")

    @property
    def num_vars(self) -> int:
        return 3 * self.m * self.k

    def variables(self) -> list[tuple[str, int, int]]:
        return [(s, i, j) for s in "xyz" for i in range(self.m) for j in range(self.k)]

    def index(self, name: str, i: int, j: int) -> int:
        block = "xyz".index(name)
        return block * self.m * self.k + (i % self.m) * self.k + (j % self.k)

    def variable_names(self) -> list[str]:
        return [f"{s}_{i},{j}" for s, i, j in self.variables()]


Polynomial = dict  # exponent tuple -> integer coefficient


def superpotential(spec: MasterSpaceSpec) -> Polynomial:
    n = spec.num_vars
    poly: Polynomial = {}
    for i in range(spec.m):
        for j in range(spec.k):
            for coeff, factors in (
                (1, [("x", i, j), ("y", i + 1, j), ("z", i + 1, j + 1)]),
                (-1, [("y", i, j), ("x", i, j + 1), ("z", i + 1, j + 1)]),
            ):
                e = [0] * n
                for f in factors:
                    e[spec.index(*f)] += 1
                key = tuple(e)
                poly[key] = poly.get(key, 0) + coeff
    return {e: c for e, c in poly.items() if c}


def partial_derivative(poly: Polynomial, var: int) -> Polynomial:
    out: Polynomial = {}
    for e, c in poly.items():
        if e[var]:
            d = list(e)
            d[var] -= 1
            key = tuple(d)
            out[key] = out.get(key, 0) + c * e[var]
    return {e: c for e, c in out.items() if c}


def generate(spec: MasterSpaceSpec) -> BinomialSystem:
    """The system dW/dv = 0 for every variable v, as ``x^A = 1``.

    Each partial ``c1 x^alpha + c2 x^beta`` (positive term first) becomes the
    column ``alpha - beta`` with right-hand side ``-c2/c1 = 1``.
    """
    W = superpotential(spec)
    cols = []
    for v in range(spec.num_vars):
        dW = partial_derivative(W, v)
        if len(dW) != 2:
            raise ValueError(f"partial derivative in variable {v} has {len(dW)} terms")
        (a, ca), (b, cb) = sorted(dW.items(), key=lambda t: -t[1])
        if ca != -cb:
            raise ValueError(f"partial derivative in variable {v} is not a pure difference")
        cols.append([x - y for x, y in zip(a, b)])
    return BinomialSystem(IntMatrix.from_columns(cols), (1,) * len(cols))


@dataclass(frozen=True)
class BenchmarkRow:
    m: int
    k: int
    dimension: int
    components: int
    degree: int
    exact: bool
    cells: int
    seconds: float
    extension_lps: int
    pivot_lps: int

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "dim": self.dimension,
            "components": self.components,
            "degree": self.degree if self.exact else f">={self.degree}",
            "cells": self.cells,
            "time": f"{self.seconds:.3f}",
            "extension_lps": self.extension_lps,
            "pivot_lps": self.pivot_lps,
        }


def benchmark(
    max_m: int,
    max_k: int | None = None,
    budget: float = 600.0,
    threads: int = 1,
    *,
    seed: int = 0,
    mode: str = "float",
    pairs: Iterable[tuple[int, int]] | None = None,
) -> list[BenchmarkRow]:
    """Dimension and degree for ``m <= k`` up to the given bounds.

    The degree table is symmetric in (m, k), so only ``m <= k`` is run.  An
    entry that exceeds ``budget`` seconds reports its cell count so far as a
    lower bound on the degree.
    """
    from .subdivision import subdivide, support_points
    from .lpkernel import LiftedPointSet

    max_k = max_m if max_k is None else max_k
    if pairs is None:
        pairs = [(m, k) for m in range(1, max_m + 1) for k in range(m, max_k + 1) if (m, k) != (1, 1)]
    rows = []
    for m, k in pairs:
        t0 = time.perf_counter()
        system = generate(MasterSpaceSpec(m, k))
        st = analyze(system)
        S = LiftedPointSet.from_points(support_points(system, st), seed)
        sub = subdivide(S, threads, mode=mode, time_budget=budget)
        stats = sub.stats
        value = sub.total_nvol if sub.complete else len(sub)
        rows.append(
            BenchmarkRow(
                m,
                k,
                st.dimension,
                st.component_count,
                value,
                sub.complete,
                len(sub),
                time.perf_counter() - t0,
                stats.get("extension_lps", 0),
                stats.get("pivot_lps", 0),
            )
        )
    return rows


def write_csv(rows: list[BenchmarkRow], fh) -> None:
    fields = ["m", "k", "dim", "components", "degree", "cells", "time", "extension_lps", "pivot_lps"]
    w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_dict())

"""Estimator-style wrappers around the functional core.

``RegularSubdivision`` fits a lifted subdivision to an integer point array
and locates query points in its cells.  ``BinomialSolver`` fits the solution
structure of ``x^A = b`` and maps parameters onto a chosen component.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_exponent_matrix, check_lattice_points, check_rhs
from .binomial import BinomialSystem, analyze, component, evaluate_parametrization
from .lpkernel import LiftedPointSet
from .subdivision import degree, subdivide

__all__ = ["RegularSubdivision", "BinomialSolver"]


class RegularSubdivision(BaseEstimator):
    """Regular simplicial subdivision of a lattice point set.

    Parameters
    ----------
    seed : int
        Seed of the random integer lifting.
    lifting : array-like of int, optional
        Explicit lifting, one value per input point; overrides ``seed``.
    workers, mode, pivoting, batch
        Forwarded to :func:`bintope.subdivision.subdivide`.

    Attributes
    ----------
    cells_ : ndarray of shape (n_cells, d + 1)
        Point indices of each cell, into the de-duplicated ``points_``.
    nvol_ : ndarray of shape (n_cells,)
    normalized_volume_ : int
    """

    def __init__(self, seed=0, lifting=None, workers=1, mode="float", pivoting=True, batch=32):
        self.seed = seed
        self.lifting = lifting
        self.workers = workers
        self.mode = mode
        self.pivoting = pivoting
        self.batch = batch

    def fit(self, X, y=None):
        X = check_lattice_points(X)
        S = LiftedPointSet.from_points(
            [tuple(r) for r in X.tolist()],
            self.seed,
            lifting=None if self.lifting is None else list(self.lifting),
        )
        sub = subdivide(S, self.workers, mode=self.mode, pivoting=self.pivoting, batch=self.batch)
        self.subdivision_ = sub
        self.points_ = np.array(sub.support.points, dtype=np.int64)
        self.cells_ = np.array(sub.index_sets(), dtype=np.int64)
        self.nvol_ = np.array([c.nvol for c in sub.cells], dtype=object)
        self.normalized_volume_ = sub.total_nvol
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X, tol: float = 1e-9):
        """Index of a cell containing each query point, -1 outside the hull."""
        check_is_fitted(self, "cells_")
        Q = np.asarray(X, dtype=float)
        if Q.ndim != 2 or Q.shape[1] != self.n_features_in_:
            raise ValueError(f"expected points with {self.n_features_in_} coordinates")
        out = np.full(len(Q), -1, dtype=np.int64)
        for c, idx in enumerate(self.cells_):
            V = self.points_[idx].astype(float)
            T = (V[1:] - V[0]).T
            lam = np.linalg.solve(T, (Q - V[0]).T).T
            inside = (lam >= -tol).all(axis=1) & (lam.sum(axis=1) <= 1 + tol) & (out < 0)
            out[inside] = c
        return out


class BinomialSolver(TransformerMixin, BaseEstimator):
    """Solution structure of ``x^A = b``.

    ``fit(A, b)`` takes the n x m exponent matrix (one column per equation)
    and the right-hand sides (ones when omitted).  ``transform(T)`` maps rows
    of parameters onto the component selected by ``component``.

    Attributes
    ----------
    dimension_, rank_, component_count_, divisors_
    degree_ : int or None
        Filled when ``compute_degree`` is set.
    """

    def __init__(self, component=None, compute_degree=False, seed=0, workers=1, mode="float"):
        self.component = component
        self.compute_degree = compute_degree
        self.seed = seed
        self.workers = workers
        self.mode = mode

    def fit(self, A, b=None):
        A = check_exponent_matrix(A)
        rhs = check_rhs(b, A.shape[1])
        system = BinomialSystem(A.tolist(), rhs)
        st = analyze(system)
        self.system_ = system
        self.structure_ = st
        self.consistent_ = st.consistent
        self.rank_ = st.rank
        self.dimension_ = st.dimension
        self.component_count_ = st.component_count
        self.divisors_ = tuple(st.snf.divisors)
        self.degree_ = None
        if st.consistent:
            idx = self.component if self.component is not None else (0,) * len(self.divisors_)
            self.parametrization_ = component(st, idx)
            if self.compute_degree:
                self.degree_ = degree(system, self.workers, seed=self.seed, mode=self.mode).degree
        return self

    def transform(self, T):
        check_is_fitted(self, "parametrization_")
        T = np.asarray(T, dtype=complex)
        if T.ndim == 1:
            T = T.reshape(-1, self.dimension_) if self.dimension_ else T.reshape(len(T), 0)
        if T.shape[1] != self.dimension_:
            raise ValueError(f"expected {self.dimension_} parameters per row, got {T.shape[1]}")
        return np.array([evaluate_parametrization(self.parametrization_, row) for row in T])

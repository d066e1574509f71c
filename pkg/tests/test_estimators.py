import itertools

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bintope.estimators import BinomialSolver, RegularSubdivision
from bintope.mspace import MasterSpaceSpec, generate

from oracles import fan_volume

CUBE = np.array(list(itertools.product([0, 1], repeat=3)))


def test_subdivision_estimator_fit():
    est = RegularSubdivision(seed=3).fit(CUBE)
    assert est.normalized_volume_ == fan_volume(CUBE.tolist()) == 6
    assert est.cells_.shape[1] == 4
    assert est.nvol_.sum() == 6
    assert est.n_features_in_ == 3


def test_subdivision_estimator_predict():
    est = RegularSubdivision(seed=1).fit([[0, 0], [2, 0], [0, 2], [2, 2]])
    labels = est.predict([[0.5, 0.5], [1.5, 1.9], [3, 3], [-0.1, 0]])
    assert labels[0] >= 0 and labels[1] >= 0
    assert list(labels[2:]) == [-1, -1]
    with pytest.raises(ValueError):
        est.predict([[1, 1, 1]])


def test_subdivision_estimator_params_and_clone():
    est = RegularSubdivision(seed=9, pivoting=False)
    assert est.get_params()["seed"] == 9
    c = clone(est)
    assert c.get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        c.predict([[0, 0, 0]])


def test_subdivision_estimator_validates_input():
    with pytest.raises(ValueError):
        RegularSubdivision().fit([[0.5, 0], [1, 0], [0, 1]])
    with pytest.raises(ValueError):
        RegularSubdivision().fit([[0, np.nan]])


def test_solver_structure():
    est = BinomialSolver().fit([[2, 0], [0, 3]], [1, 1])
    assert (est.dimension_, est.component_count_) == (0, 6)
    sys_ = generate(MasterSpaceSpec(2, 2))
    A = np.array(sys_.exponents.rows)
    est = BinomialSolver(compute_degree=True).fit(A)
    assert (est.dimension_, est.degree_) == (6, 14)


def test_solver_transform_lands_on_the_variety():
    A = np.array([[1], [1]])
    est = BinomialSolver().fit(A, [3.0])
    X = est.transform([[2.0], [1j]])
    assert np.allclose(X[:, 0] * X[:, 1], 3.0)
    with pytest.raises(ValueError):
        est.transform([[1.0, 2.0]])


def test_solver_inconsistent_is_not_transformable():
    est = BinomialSolver().fit([[1, 1], [1, 1]], [1, 2])
    assert not est.consistent_ and est.component_count_ == 0
    with pytest.raises(NotFittedError):
        est.transform([[1.0]])

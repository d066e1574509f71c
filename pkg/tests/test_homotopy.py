import dataclasses
import itertools
from fractions import Fraction

import numpy as np
import pytest

from bintope.binomial import BinomialSystem, analyze, residual
from bintope.homotopy import (
    HomotopyDescriptor,
    InvalidCellError,
    WitnessProblem,
    binomial_start_system,
    build_homotopy,
    start_solutions,
    start_system,
    track,
    unit_circle,
    witness_set,
)
from bintope.intlinalg import IntMatrix
from bintope.lpkernel import LiftedPointSet
from bintope.mspace import MasterSpaceSpec, generate
from bintope.subdivision import subdivide

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def square_problem(seed=0, lifting=(1, 0, 1, 0)):
    """Two generic equations supported on the unit square, as a bare WitnessProblem."""
    S = LiftedPointSet.from_points(SQUARE, lifting=list(lifting))
    merged = unit_circle(np.random.default_rng(seed), (2, 4))
    return WitnessProblem(None, None, merged, S, merged, seed)


def square_roots_oracle(C):
    """Solve sum_a C[i, a] t^a = 0 on the square support by elimination to a quadratic.

    Each equation is linear in t2: t2 = -(c00 + c10 t1) / (c01 + c11 t1).
    """
    (a0, a1, a2, a3), (b0, b1, b2, b3) = C  # columns ordered as SQUARE
    # (a0 + a1 t1) + t2 (a3 + a2 t1) = 0, same for b; eliminate t2
    # (a0 + a1 t1)(b3 + b2 t1) - (b0 + b1 t1)(a3 + a2 t1) = 0
    quad = [a1 * b2 - b1 * a2, a0 * b2 + a1 * b3 - b0 * a2 - b1 * a3, a0 * b3 - b0 * a3]
    out = []
    for t1 in np.roots(quad):
        t2 = -(a0 + a1 * t1) / (a3 + a2 * t1)
        out.append(np.array([t1, t2]))
    return out


def test_zero_exponents_are_the_cell():
    P = square_problem()
    desc = build_homotopy(P, (0, 1, 3))
    assert [i for i, e in enumerate(desc.exponents) if e == 0] == [0, 1, 3]
    assert all(e > 0 for i, e in enumerate(desc.exponents) if i not in (0, 1, 3))
    assert desc.shifts[2] == Fraction(2)


def test_every_cell_has_d_plus_one_zero_exponents():
    P = WitnessProblem.create(generate(MasterSpaceSpec(2, 2)), seed=1)
    sub = subdivide(P.support)
    # small witness liftings may be re-drawn; the homotopy must follow the subdivision's lifting
    P = dataclasses.replace(P, support=sub.support)
    for cell in sub.cells:
        desc = build_homotopy(P, cell)
        assert int((desc.exponents == 0).sum()) == P.dimension + 1
        assert desc.exponents.min() >= 0


def test_exponents_invariant_under_constant_lifting_shift():
    a = build_homotopy(square_problem(lifting=(1, 0, 1, 0)), (0, 1, 3))
    b = build_homotopy(square_problem(lifting=(6, 5, 6, 5)), (0, 1, 3))
    assert a.shifts == b.shifts and (a.exponents == b.exponents).all()


def test_invalid_cell_rejected():
    P = square_problem()
    with pytest.raises(InvalidCellError):
        build_homotopy(P, (0, 1, 2))  # the upper diagonal
    with pytest.raises(InvalidCellError):
        build_homotopy(P, (0, 1))


def test_start_system_toy():
    # 1 - 2 y = 0 with Gamma = (0, 1) has the single solution y = 1/2
    sys_ = binomial_start_system(np.array([[1, -2]]), [(0,), (1,)])
    (y,) = start_solutions(sys_)
    assert y[0] == pytest.approx(0.5)
    # with the points listed the other way round the same matrix reads y - 2 = 0
    (y,) = start_solutions(binomial_start_system(np.array([[1, -2]]), [(1,), (0,)]))
    assert y[0] == pytest.approx(2.0)


def test_start_system_solution_count_is_nvol():
    rng = np.random.default_rng(3)
    gamma = [(0, 0), (2, 0), (0, 1)]
    sys_ = binomial_start_system(unit_circle(rng, (2, 3)), gamma)
    assert analyze(sys_).component_count == 2
    sols = start_solutions(sys_)
    assert len(sols) == 2
    for y in sols:
        assert residual(sys_, y) < 1e-10


def test_square_start_systems_one_solution_each():
    P = square_problem(seed=5)
    total = 0
    for cell in subdivide(P.support).cells:
        sols = start_solutions(start_system(P, cell))
        assert len(sols) == cell.nvol == 1
        # the start point solves the cell's part of the system at u = 0
        desc = build_homotopy(P, cell)
        assert np.abs(desc.value(sols[0], 0.0)).max() < 1e-10
        total += len(sols)
    assert total == 2


def test_constant_homotopy_ends_where_it_starts():
    desc = HomotopyDescriptor(
        cell=(0, 1),
        points=np.array([[1.0], [0.0]]),
        coefficients=np.array([[1.0, -2.0]], dtype=complex),
        shifts=(Fraction(0), Fraction(0)),
        exponents=np.array([0, 0]),
        M=1,
    )
    path = track(desc, [2.0])
    assert path.status == "converged"
    assert path.end[0] == pytest.approx(2.0)


def test_square_paths_against_elimination_oracle():
    for seed in range(5):
        P = square_problem(seed)
        ends = []
        for cell in subdivide(P.support).cells:
            desc = build_homotopy(P, cell)
            for y0 in start_solutions(start_system(P, cell)):
                path = track(desc, y0)
                assert path.status == "converged" and path.residual < 1e-8
                ends.append(np.array(path.end))
        assert len(ends) == 2
        assert np.abs(ends[0] - ends[1]).max() > 1e-6
        oracle = square_roots_oracle(P.merged)
        for e in ends:
            assert min(np.abs(e - o).max() for o in oracle) < 1e-8


@pytest.mark.parametrize("m,k,deg", [(1, 2, 2), (1, 3, 4), (2, 2, 14)])
def test_witness_sets(m, k, deg):
    sys_ = generate(MasterSpaceSpec(m, k))
    W = witness_set(sys_, seed=2)
    assert W.complete and len(W) == W.degree == deg
    assert max(W.system_residuals) < 1e-6
    assert max(W.cut_residuals) < 1e-6
    for x, y in itertools.combinations(W.points, 2):
        assert np.abs(np.array(x) - np.array(y)).max() > 1e-6
    assert W.paths["converged"] >= deg


def test_endpoint_count_independent_of_seed():
    sys_ = generate(MasterSpaceSpec(1, 3))
    assert {len(witness_set(sys_, seed=s)) for s in range(3)} == {4}


def test_witness_of_torsion_component():
    # x^2 y^2 = 1 has two components x y = 1 and x y = -1, each of degree 2
    sys_ = BinomialSystem(IntMatrix([[2], [2]]), (1,))
    seen = []
    for k in range(2):
        W = witness_set(sys_, (k,), seed=1)
        assert W.complete and len(W) == 2
        assert max(W.system_residuals) < 1e-8
        seen.append({round((x[0] * x[1]).real) for x in W.points})
    assert sorted(s.pop() for s in seen) == [-1, 1]


def test_zero_dimensional_system_rejected():
    with pytest.raises(ValueError):
        witness_set(BinomialSystem(IntMatrix.identity(2), (1, 1)))


def test_witness_parallel_matches_serial():
    sys_ = generate(MasterSpaceSpec(1, 3))
    a = witness_set(sys_, seed=4)
    b = witness_set(sys_, workers=2, seed=4)
    assert np.allclose(np.array(a.points), np.array(b.points))

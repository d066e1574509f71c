import random
from fractions import Fraction

import pytest

from bintope.lpkernel import (
    DegenerateLiftingError,
    InfeasibleStartError,
    LiftedPointSet,
    cell_normal,
    check_certificate,
    extend_feasible,
    initial_vertex,
    pivot_step,
)

from oracles import affine_rank, brute_force_lower_cells

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def square(lifting=(1, 0, 1, 0)):
    return LiftedPointSet.from_points(SQUARE, lifting=list(lifting))


def random_instance(rng, d=None, n=None):
    while True:
        dd = d or rng.randint(1, 4)
        nn = n or rng.randint(dd + 1, 12)
        pts = {tuple(rng.randint(-5, 5) for _ in range(dd)) for _ in range(nn)}
        pts = sorted(pts)
        if len(pts) > dd and affine_rank(pts) == dd:
            lift = [rng.randint(0, 999) for _ in pts]
            return LiftedPointSet.from_points(pts, lifting=lift)


def faces_from_cells(cells):
    out = set()
    for c in cells:
        for mask in range(1, 1 << len(c)):
            out.add(frozenset(c[i] for i in range(len(c)) if mask >> i & 1))
    return out


def test_square_extension_examples():
    S = square()
    assert extend_feasible(S, [0], 1).feasible
    assert extend_feasible(S, [0], 3).feasible
    # the diagonal (0,0)-(1,1) is lifted above the other diagonal
    assert not extend_feasible(S, [0], 2).feasible
    for mode in ("float", "exact"):
        assert extend_feasible(S, [0], 1, mode=mode).feasible
        assert not extend_feasible(S, [0], 2, mode=mode).feasible


def test_square_pivot_examples():
    S = square()
    cells = brute_force_lower_cells(S.points, S.lifting)
    assert cells == [(0, 1, 3), (1, 2, 3)]
    r = pivot_step(S, (0, 1, 3), 0)
    assert r.feasible and r.basis == (1, 2, 3)
    r = pivot_step(S, (0, 1, 3), 1)
    assert not r.feasible and r.status == "boundary"


def test_coplanar_square_lifting_is_degenerate():
    # lifting 1,0,0,1 in this point order puts all four lifted points on one plane
    S = square((1, 0, 0, 1))
    with pytest.raises(DegenerateLiftingError):
        extend_feasible(S, [0, 1], 2, mode="exact")
    with pytest.raises(DegenerateLiftingError):
        initial_vertex(S, mode="exact")


def test_one_dimensional_examples():
    S = LiftedPointSet.from_points([(0,), (1,), (2,)], lifting=[0, 0, 1])
    assert extend_feasible(S, [0], 1).feasible
    assert not extend_feasible(S, [0], 2).feasible
    S = LiftedPointSet.from_points([(0,), (1,), (2,)], lifting=[0, 1, 0])
    assert brute_force_lower_cells(S.points, S.lifting) == [(0, 2)]
    assert pivot_step(S, (0, 2), 0).status == "boundary"
    assert pivot_step(S, (0, 2), 2).status == "boundary"


def test_parent_infeasible_node():
    S = square()
    r = extend_feasible(S, [0, 2], 1)
    assert not r.feasible and r.status == "parent-infeasible"


def test_bad_arguments():
    S = square()
    with pytest.raises(ValueError):
        extend_feasible(S, [0, 0], 1)
    with pytest.raises(ValueError):
        extend_feasible(S, [0], 0)
    with pytest.raises(ValueError):
        pivot_step(S, (0, 1, 3), 2)
    with pytest.raises(ValueError):
        pivot_step(S, (0, 1), 0)
    with pytest.raises(InfeasibleStartError):
        extend_feasible(S, [2], 1, basis=(0, 1, 3))


def test_duplicates_are_merged():
    S = LiftedPointSet.from_points([(0, 0), (1, 0), (0, 0), (0, 1)], lifting=[3, 1, 9, 2])
    assert S.n == 3
    assert S.index_map == (0, 1, 0, 2)
    assert S.lifting == (3, 1, 2)
    with pytest.raises(ValueError):
        LiftedPointSet(((0,), (0,)), (1, 2))


def test_relift_is_seeded():
    S = LiftedPointSet.from_points(SQUARE, seed=4)
    assert S.relift(5).lifting == S.relift(5).lifting
    assert all(0 <= v < S.bound for v in S.lifting)
    assert all(0 <= v < 16 for v in S.relift(1, bound=16).lifting)


def test_random_instances_against_brute_force():
    """Both arithmetic modes agree with the enumeration oracle on every query."""
    rng = random.Random(2024)
    checked = degenerate = 0
    while checked < 500:
        S = random_instance(rng)
        cells = brute_force_lower_cells(S.points, S.lifting)
        faces = faces_from_cells(cells)
        node = list(rng.choice(cells))
        rng.shuffle(node)
        node = sorted(node[: rng.randint(1, S.dim)])
        cand = rng.choice([i for i in range(S.n) if i not in node])
        try:
            f = extend_feasible(S, node, cand, mode="float")
            e = extend_feasible(S, node, cand, mode="exact")
        except DegenerateLiftingError:
            degenerate += 1
            continue
        truth = frozenset(node + [cand]) in faces
        assert f.feasible == e.feasible == truth, (S, node, cand)
        assert e.objective >= 0 and f.objective >= -1e-7
        if e.feasible:
            assert tuple(e.basis) in cells
            assert check_certificate(S, e.basis, e.normal)
        checked += 1
    # random integer liftings in [0, 1000) are almost always generic
    assert degenerate < 25


def test_pivot_against_brute_force_and_involution():
    rng = random.Random(77)
    done = 0
    while done < 150:
        S = random_instance(rng)
        cells = brute_force_lower_cells(S.points, S.lifting)
        cell = rng.choice(cells)
        leave = rng.choice(cell)
        try:
            r = pivot_step(S, cell, leave, mode="float")
            e = pivot_step(S, cell, leave, mode="exact")
        except DegenerateLiftingError:
            continue
        assert (r.status, r.basis) == (e.status, e.basis)
        facet = set(cell) - {leave}
        neighbours = [c for c in cells if c != cell and facet <= set(c)]
        if r.status == "boundary":
            assert neighbours == []
        else:
            assert [r.basis] == neighbours
            (entering,) = set(r.basis) - facet
            back = pivot_step(S, r.basis, entering)
            assert back.basis == tuple(cell)
        done += 1


def test_certificates_from_cell_normal():
    rng = random.Random(5)
    for _ in range(40):
        S = random_instance(rng, d=rng.randint(1, 3))
        for c in brute_force_lower_cells(S.points, S.lifting):
            normal = cell_normal(S, c)
            assert all(isinstance(v, Fraction) for v in normal)
            assert check_certificate(S, c, normal)
            # nudging the normal breaks tightness
            bumped = list(normal)
            bumped[0] += Fraction(1, 7)
            assert not check_certificate(S, c, bumped) or len(set(S.points[i][0] for i in c)) == 1


def test_initial_vertex_is_a_lower_cell():
    rng = random.Random(8)
    for _ in range(60):
        S = random_instance(rng)
        try:
            v = initial_vertex(S, mode="float")
        except DegenerateLiftingError:
            continue
        assert v in brute_force_lower_cells(S.points, S.lifting)

import random

from cohomcsp import (IntLattice, IntMatrix, SparseEchelon, det_bareiss,
                      dump_system, hermite_normal_form, solve_diophantine)
from oracles import box_solve


def is_row_hnf(h: IntMatrix, rank: int, pivots) -> bool:
    rows = h.to_rows()
    last = -1
    for i in range(rank):
        j = pivots[i]
        if j <= last:
            return False
        last = j
        if rows[i][j] <= 0:
            return False
        if any(rows[i][t] != 0 for t in range(j)):
            return False
        for above in range(i):
            if not (0 <= rows[above][j] < rows[i][j]):
                return False
    return all(all(v == 0 for v in rows[i]) for i in range(rank, h.rows))


def test_hnf_identity():
    m = IntMatrix.identity(3)
    res = hermite_normal_form(m)
    assert res.H == m and res.U == m and res.rank == 3


def test_hnf_worked_example():
    m = IntMatrix.from_rows([[2, 4], [6, 8]])
    res = hermite_normal_form(m)
    assert res.H.to_rows() == [[2, 0], [0, 4]]
    assert res.U.matmul(m) == res.H
    assert abs(det_bareiss(res.U)) == 1


def test_hnf_zero_matrix():
    m = IntMatrix.zero(2, 3)
    res = hermite_normal_form(m)
    assert res.H == m and res.rank == 0


def test_hnf_random_round_trip():
    rng = random.Random(7)
    for _ in range(200):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 6)
        m = IntMatrix.from_rows([[rng.randint(-5, 5) for _ in range(cols)]
                                 for _ in range(rows)])
        res = hermite_normal_form(m)
        assert res.U.matmul(m) == res.H
        assert abs(det_bareiss(res.U)) == 1
        assert is_row_hnf(res.H, res.rank, res.pivots)


def test_solve_simple():
    assert solve_diophantine(IntMatrix.from_rows([[2]]), [2]) == [1]
    assert solve_diophantine(IntMatrix.from_rows([[2]]), [1]) is None
    # x + y = 1, x - y = 0  forces 2x = 1
    m = IntMatrix.from_rows([[1, 1], [1, -1]])
    assert solve_diophantine(m, [1, 0]) is None


def test_solve_verifies_and_matches_box_oracle():
    rng = random.Random(11)
    for _ in range(300):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        m = IntMatrix.from_rows([[rng.randint(-4, 4) for _ in range(cols)]
                                 for _ in range(rows)])
        b = [rng.randint(-6, 6) for _ in range(rows)]
        x = solve_diophantine(m, b)
        if x is not None:
            assert m.matvec(x) == b
        else:
            assert box_solve(m, b, 6) is None


def test_sparse_echelon_matches_dense_solver():
    rng = random.Random(13)
    for _ in range(200):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 6)
        dense = [[rng.choice([0, 0, 0, 1, -1, 2, -2]) for _ in range(cols)]
                 for _ in range(rows)]
        b = [rng.randint(-4, 4) for _ in range(rows)]
        m = IntMatrix.from_rows(dense)
        sparse_rows = [{j: v for j, v in enumerate(r) if v} for r in dense]
        ech = SparseEchelon(cols, sparse_rows, track_combos=True)
        rhs = {i: v for i, v in enumerate(b) if v}
        dense_sol = solve_diophantine(m, b)
        assert ech.feasible(rhs) == (dense_sol is not None)
        x = ech.solve(rhs)
        if dense_sol is None:
            assert x is None
        else:
            assert x is not None and m.matvec(x) == b


def test_sparse_kernel_basis_spans_kernel():
    rng = random.Random(17)
    for _ in range(100):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 5)
        dense = [[rng.choice([0, 0, 1, -1, 2]) for _ in range(cols)]
                 for _ in range(rows)]
        m = IntMatrix.from_rows(dense)
        sparse_rows = [{j: v for j, v in enumerate(r) if v} for r in dense]
        ech = SparseEchelon(cols, sparse_rows, track_combos=True)
        basis = ech.kernel_basis()
        lattice = IntLattice(cols)
        for vec in basis:
            dense_vec = [vec.get(j, 0) for j in range(cols)]
            assert m.matvec(dense_vec) == [0] * rows
            lattice.add(dense_vec)
        # every small integer kernel vector must lie in the spanned lattice
        import itertools
        for x in itertools.product(range(-2, 3), repeat=cols):
            if m.matvec(list(x)) == [0] * rows:
                assert lattice.contains(list(x))


def test_int_lattice_membership():
    lat = IntLattice(2)
    lat.add([2, 0])
    lat.add([0, 3])
    assert lat.contains([4, 3])
    assert not lat.contains([1, 0])
    lat.add([1, 1])
    # span{[2,0],[0,3],[1,1]} is all of Z^2: 3*[1,1]-[0,3]=[3,0], gcd(3,2)=1
    assert lat.contains([1, 1])
    assert lat.contains([1, 0])
    assert lat.contains([0, 1])


def test_int_lattice_gcd_combination():
    lat = IntLattice(1)
    lat.add([4])
    lat.add([6])
    assert lat.contains([2]) and not lat.contains([1])


def test_from_triplets_and_dump():
    m = IntMatrix.from_triplets(2, 2, [(0, 0, 2), (0, 0, 1), (1, 1, -4)])
    assert m.to_rows() == [[3, 0], [0, -4]]
    assert dump_system(m, [5, 6]) == "2 2\n3 0 5\n0 -4 6\n"


def test_coefficient_growth_50x50_completes():
    rng = random.Random(23)
    m = IntMatrix.from_rows([[rng.randint(-10, 10) for _ in range(50)]
                             for _ in range(50)])
    res = hermite_normal_form(m)
    assert res.U.matmul(m) == res.H
    assert is_row_hnf(res.H, res.rank, res.pivots)

"""Exact integer linear algebra: Hermite normal form, Diophantine systems.

Everything here works over arbitrary-precision Python ints.  The dense
routines (`hermite_normal_form`, `solve_diophantine`) implement one fixed
convention: row-style HNF, pivots positive, entries above a pivot reduced into
[0, pivot), zero rows last.  The sparse routines back the compatibility-system
solving in the cohomology engine, where systems are large but each equation
touches only a handful of variables.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix, row-major entries."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entries length must be rows * cols")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]]) -> "IntMatrix":
        m = len(rows)
        n = len(rows[0]) if m else 0
        if any(len(r) != n for r in rows):
            raise ValueError("ragged rows")
        return IntMatrix(m, n, tuple(int(x) for r in rows for x in r))

    @staticmethod
    def from_triplets(rows: int, cols: int,
                      triplets: Iterable[tuple[int, int, int]]) -> "IntMatrix":
        entries = [0] * (rows * cols)
        for i, j, v in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"triplet ({i},{j}) out of range")
            entries[i * cols + j] += int(v)
        return IntMatrix(rows, cols, tuple(entries))

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        e = [0] * (n * n)
        for i in range(n):
            e[i * n + i] = 1
        return IntMatrix(n, n, tuple(e))

    @staticmethod
    def zero(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(rows, cols, (0,) * (rows * cols))

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        rows = self.to_rows()
        return IntMatrix.from_rows([[rows[i][j] for i in range(self.rows)]
                                    for j in range(self.cols)])

    def matmul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        a, b = self.to_rows(), other.to_rows()
        out = [[sum(a[i][k] * b[k][j] for k in range(self.cols))
                for j in range(other.cols)] for i in range(self.rows)]
        return IntMatrix.from_rows(out) if out else IntMatrix.zero(0, other.cols)

    def matvec(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        return [sum(self.row(i)[j] * x[j] for j in range(self.cols))
                for i in range(self.rows)]


@dataclass(frozen=True)
class HnfResult:
    """Row-style Hermite normal form H = U * M with unimodular U."""

    H: IntMatrix
    U: IntMatrix
    rank: int
    pivots: tuple[int, ...]  # pivot column of each of the first `rank` rows


def hermite_normal_form(m: IntMatrix) -> HnfResult:
    """Compute the row HNF of m with its unimodular transform.

    Pivot columns are chosen left to right, pivots are normalised positive and
    entries above each pivot are reduced into [0, pivot).  Entries are reduced
    during elimination, which keeps intermediate growth in check.
    """
    h = m.to_rows()
    nrows, ncols = m.rows, m.cols
    u = IntMatrix.identity(nrows).to_rows()
    r = 0
    pivots = []
    for j in range(ncols):
        # gcd-eliminate column j below row r
        while True:
            nz = [i for i in range(r, nrows) if h[i][j] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: (abs(h[i][j]), i))
            if i0 != r:
                h[r], h[i0] = h[i0], h[r]
                u[r], u[i0] = u[i0], u[r]
            p = h[r][j]
            done = True
            for i in range(r + 1, nrows):
                if h[i][j] != 0:
                    q = h[i][j] // p
                    if q:
                        hi, hr = h[i], h[r]
                        for t in range(j, ncols):
                            hi[t] -= q * hr[t]
                        ui, ur = u[i], u[r]
                        for t in range(nrows):
                            ui[t] -= q * ur[t]
                    if h[i][j] != 0:
                        done = False
            if done:
                break
        if r < nrows and h[r][j] != 0:
            if h[r][j] < 0:
                h[r] = [-x for x in h[r]]
                u[r] = [-x for x in u[r]]
            p = h[r][j]
            for i in range(r):
                q = h[i][j] // p
                if q:
                    hi, hr = h[i], h[r]
                    for t in range(j, ncols):
                        hi[t] -= q * hr[t]
                    ui, ur = u[i], u[r]
                    for t in range(nrows):
                        ui[t] -= q * ur[t]
            pivots.append(j)
            r += 1
            if r == nrows:
                break
    return HnfResult(IntMatrix.from_rows(h) if h else IntMatrix.zero(0, ncols),
                     IntMatrix.from_rows(u) if u else IntMatrix.zero(0, 0),
                     r, tuple(pivots))


def det_bareiss(m: IntMatrix) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def solve_diophantine(m: IntMatrix, b: Sequence[int]) -> Optional[list[int]]:
    """Solve m * x = b exactly over the integers.

    Returns a witness x or None when no integer solution exists.  The method
    is HNF of the transposed matrix: the HNF rows form an echelon basis of the
    column lattice of m, so membership of b is decided by forward reduction
    (a non-divisible pivot or a nonzero residual certifies infeasibility).
    """
    if len(b) != m.rows:
        raise ValueError("right-hand side length must equal row count")
    res = hermite_normal_form(m.transpose())
    h = res.H.to_rows()
    residual = [int(x) for x in b]
    coeff = [0] * res.H.rows
    ncols = res.H.cols
    pivot_at = {res.pivots[i]: i for i in range(res.rank)}
    for j in range(ncols):
        if residual[j] == 0:
            continue
        i = pivot_at.get(j)
        if i is None:
            return None
        q, rem = divmod(residual[j], h[i][j])
        if rem:
            return None
        coeff[i] = q
        hi = h[i]
        for t in range(j, ncols):
            residual[t] -= q * hi[t]
    if any(residual):
        return None
    # x = U^T * coeff
    u = res.U.to_rows()
    n = m.cols
    x = [0] * n
    for i in range(res.rank):
        c = coeff[i]
        if c:
            ui = u[i]
            for k in range(n):
                x[k] += c * ui[k]
    return x


def dump_system(m: IntMatrix, b: Sequence[int]) -> str:
    """Debug dump: `m n` on the first line, then m rows of n+1 integers."""
    lines = [f"{m.rows} {m.cols}"]
    for i in range(m.rows):
        lines.append(" ".join(str(x) for x in (*m.row(i), b[i])))
    return "\n".join(lines) + "\n"


# --- sparse machinery -------------------------------------------------------

def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, u, v) with u*a + v*b = g = gcd(a, b), g > 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class SparseEchelon:
    """Column echelon form of a sparse integer matrix over Z.

    Built once from the rows of a homogeneous coefficient matrix, the echelon
    then answers ``feasible(rhs)`` queries (is M x = rhs solvable over Z?) by
    forward substitution along the recorded pivot order, and can emit an
    integer basis of the kernel lattice when ``track_combos`` is on.

    Columns are mutated by unimodular column operations, so the column lattice
    and kernel are those of the input matrix.  Rows are processed greedily by
    current fill (fewest active columns first), which keeps fill-in low on the
    marginalisation-style systems this is used for.
    """

    def __init__(self, n_cols: int, rows: Sequence[dict[int, int]],
                 track_combos: bool = False):
        self.n_cols = n_cols
        self.track = track_combos
        # columns as sparse dicts row -> value
        self.cols: list[dict[int, int]] = [dict() for _ in range(n_cols)]
        # for each not-yet-processed row, the live columns touching it
        self._row_index: list[set[int]] = [set() for _ in range(len(rows))]
        self._done: list[bool] = [False] * len(rows)
        for r, row in enumerate(rows):
            for c, v in row.items():
                if v:
                    self.cols[c][r] = v
                    self._row_index[r].add(c)
        self.combos: list[dict[int, int]] = (
            [{c: 1} for c in range(n_cols)] if track_combos else [])
        self.live: set[int] = set(range(n_cols))
        # (row, pivot_col or None) in processing order
        self.pivot_order: list[tuple[int, Optional[int]]] = []
        self._eliminate()

    def _set_entry(self, col: int, r: int, v: int) -> None:
        cd = self.cols[col]
        if v:
            if r not in cd and not self._done[r]:
                self._row_index[r].add(col)
            cd[r] = v
        else:
            if cd.pop(r, None) is not None and not self._done[r]:
                self._row_index[r].discard(col)

    def _addmul(self, dst: int, src: int, q: int) -> None:
        """col[dst] += q * col[src]."""
        if q == 0:
            return
        cd = self.cols[dst]
        for r, v in self.cols[src].items():
            self._set_entry(dst, r, cd.get(r, 0) + q * v)
        if self.track:
            kd, ks = self.combos[dst], self.combos[src]
            for c, v in ks.items():
                nv = kd.get(c, 0) + q * v
                if nv:
                    kd[c] = nv
                else:
                    kd.pop(c, None)

    def _combine(self, acc: int, other: int, r: int) -> None:
        """Unimodular 2-column update zeroing col[other] at row r."""
        a = self.cols[acc].get(r, 0)
        v = self.cols[other].get(r, 0)
        if v == 0:
            return
        if a != 0 and v % a == 0:
            self._addmul(other, acc, -(v // a))
            return
        g, u, w = _ext_gcd(a, v)
        aa, bb = a // g, v // g
        keys = set(self.cols[acc]) | set(self.cols[other])
        old_a = dict(self.cols[acc])
        old_o = dict(self.cols[other])
        for k in keys:
            x, y = old_a.get(k, 0), old_o.get(k, 0)
            self._set_entry(acc, k, u * x + w * y)
            self._set_entry(other, k, -bb * x + aa * y)
        if self.track:
            ka, ko = self.combos[acc], self.combos[other]
            nka: dict[int, int] = {}
            nko: dict[int, int] = {}
            for k in set(ka) | set(ko):
                x, y = ka.get(k, 0), ko.get(k, 0)
                s = u * x + w * y
                t = -bb * x + aa * y
                if s:
                    nka[k] = s
                if t:
                    nko[k] = t
            self.combos[acc] = nka
            self.combos[other] = nko

    def _eliminate(self) -> None:
        nrows = len(self._row_index)
        heap = [(len(self._row_index[r]), r) for r in range(nrows)]
        heapq.heapify(heap)
        while heap:
            size, r = heapq.heappop(heap)
            if self._done[r]:
                continue
            active = self._row_index[r]
            if len(active) != size:
                heapq.heappush(heap, (len(active), r))
                continue
            if not active:
                self._done[r] = True
                self.pivot_order.append((r, None))
                continue
            acc = min(active, key=lambda c: (abs(self.cols[c].get(r, 0)),
                                             len(self.cols[c]), c))
            for other in sorted(active - {acc}):
                self._combine(acc, other, r)
            self._done[r] = True
            self.pivot_order.append((r, acc))
            self.live.discard(acc)
            # acc is frozen: drop it from the index of remaining rows
            for rr in self.cols[acc]:
                if not self._done[rr]:
                    self._row_index[rr].discard(acc)

    def feasible(self, rhs: dict[int, int]) -> bool:
        """Decide integer solvability of M x = rhs (rhs sparse over rows)."""
        return self._solve(rhs, want_witness=False) is not False

    def solve(self, rhs: dict[int, int]) -> Optional[list[int]]:
        """Return x with M x = rhs, or None.  Requires track_combos=True."""
        if not self.track:
            raise ValueError("witness extraction requires track_combos=True")
        out = self._solve(rhs, want_witness=True)
        if out is False:
            return None
        x = [0] * self.n_cols
        for c, v in out.items():  # type: ignore[union-attr]
            x[c] = v
        return x

    def _solve(self, rhs: dict[int, int], want_witness: bool):
        residual = dict(rhs)
        witness: dict[int, int] = {}
        for r, piv in self.pivot_order:
            val = residual.get(r, 0)
            if val == 0:
                continue
            if piv is None:
                return False
            p = self.cols[piv][r]
            q, rem = divmod(val, p)
            if rem:
                return False
            for rr, v in self.cols[piv].items():
                nv = residual.get(rr, 0) - q * v
                if nv:
                    residual[rr] = nv
                else:
                    residual.pop(rr, None)
            if want_witness and q:
                for c, v in self.combos[piv].items():
                    nv = witness.get(c, 0) + q * v
                    if nv:
                        witness[c] = nv
                    else:
                        witness.pop(c, None)
        if residual:
            return False
        return witness if want_witness else True

    def kernel_basis(self) -> list[dict[int, int]]:
        """Integer basis of {x : M x = 0} as sparse coefficient dicts."""
        if not self.track:
            raise ValueError("kernel extraction requires track_combos=True")
        return [self.combos[c] for c in sorted(self.live)]


class IntLattice:
    """Incremental echelon generating set for a sublattice of Z^p.

    Supports adding generator vectors and testing membership; used for the
    projections of kernel lattices onto the coordinates of one context.
    """

    def __init__(self, dim: int):
        self.dim = dim
        # echelon rows keyed by leading (pivot) coordinate
        self.rows: dict[int, list[int]] = {}

    def add(self, vec: Sequence[int]) -> None:
        v = list(vec)
        for j in range(self.dim):
            if v[j] == 0:
                continue
            row = self.rows.get(j)
            if row is None:
                self.rows[j] = v
                return
            a, b = row[j], v[j]
            if b % a == 0:
                q = b // a
                for t in range(j, self.dim):
                    v[t] -= q * row[t]
            else:
                g, u, w = _ext_gcd(a, b)
                aa, bb = a // g, b // g
                new_row = [u * row[t] + w * v[t] for t in range(self.dim)]
                v = [-bb * row[t] + aa * v[t] for t in range(self.dim)]
                self.rows[j] = new_row

    def contains(self, vec: Sequence[int]) -> bool:
        v = list(vec)
        for j in range(self.dim):
            if v[j] == 0:
                continue
            row = self.rows.get(j)
            if row is None:
                return False
            q, rem = divmod(v[j], row[j])
            if rem:
                return False
            for t in range(j, self.dim):
                v[t] -= q * row[t]
        return True

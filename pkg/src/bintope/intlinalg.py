"""Exact integer matrices, Smith normal form and fraction-free determinants.

All arithmetic is exact integer arithmetic, so nothing here can overflow or
round.  When gmpy2 is installed, determinants and products of matrices with
large entries use its integers, which are several times faster once entries
grow to hundreds of digits.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

try:
    from gmpy2 import mpz as _big
except ImportError:  # pragma: no cover - optional accelerator
    _big = int

__all__ = [
    "IntMatrix",
    "SnfResult",
    "DimensionError",
    "smith_normal_form",
    "det_exact",
    "unimodular_check",
    "xgcd",
    "parse_matrix_text",
    "format_matrix_text",
]


class DimensionError(ValueError):
    """Raised when a matrix has the wrong shape for an operation."""


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``g = s*a + t*b = gcd(a, b) >= 0``."""
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


class IntMatrix:
    """Immutable integer matrix stored as a tuple of row tuples."""

    __slots__ = ("_rows", "_ncols")

    def __init__(self, rows: Iterable[Iterable[int]]):
        data = tuple(tuple(int(v) for v in row) for row in rows)
        if not data or not data[0]:
            raise DimensionError("IntMatrix needs at least one row and one column")
        ncols = len(data[0])
        if any(len(row) != ncols for row in data):
            raise DimensionError("ragged rows")
        self._rows = data
        self._ncols = ncols

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n: int, m: int) -> "IntMatrix":
        return cls([[0] * m for _ in range(n)])

    @classmethod
    def diag(cls, values: Sequence[int], n: int | None = None, m: int | None = None) -> "IntMatrix":
        n = len(values) if n is None else n
        m = len(values) if m is None else m
        rows = [[0] * m for _ in range(n)]
        for i, v in enumerate(values):
            rows[i][i] = v
        return cls(rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "IntMatrix":
        return cls(zip(*columns))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), self._ncols

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return self._rows

    def row(self, i: int) -> tuple[int, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self._rows)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.col(j) for j in range(self._ncols)]

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        return self._rows[i][j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        return f"IntMatrix({[list(r) for r in self._rows]})"

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(zip(*self._rows))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self._ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        left, right = self._rows, other._rows
        if max(self.max_abs(), other.max_abs()).bit_length() > 62:
            left = [[_big(v) for v in row] for row in left]
            right = [[_big(v) for v in row] for row in right]
        cols = list(zip(*right))
        return IntMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in left]
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix([[-v for v in row] for row in self._rows])

    def submatrix(self, rows: slice = slice(None), cols: slice = slice(None)) -> "IntMatrix":
        return IntMatrix([row[cols] for row in self._rows[rows]])

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self._rows]

    def is_square(self) -> bool:
        return self.nrows == self._ncols

    def max_abs(self) -> int:
        return max(abs(v) for row in self._rows for v in row)


@dataclass(frozen=True)
class SnfResult:
    """``P @ A @ Q`` equals ``diag(divisors)`` padded with zeros.

    ``P`` is n x n and ``Q`` is m x m, both unimodular.  The slices
    ``P_r``/``P_0`` (top ``rank`` rows / remaining rows of ``P``) and
    ``Q_r``/``Q_0`` (left ``rank`` columns / remaining columns of ``Q``)
    are what the binomial solver works with.
    """

    P: IntMatrix
    Q: IntMatrix
    divisors: tuple[int, ...]
    rank: int

    @property
    def P_r(self) -> IntMatrix | None:
        return self.P.submatrix(rows=slice(0, self.rank)) if self.rank else None

    @property
    def P_0(self) -> IntMatrix | None:
        n = self.P.nrows
        return self.P.submatrix(rows=slice(self.rank, n)) if self.rank < n else None

    @property
    def Q_r(self) -> IntMatrix | None:
        return self.Q.submatrix(cols=slice(0, self.rank)) if self.rank else None

    @property
    def Q_0(self) -> IntMatrix | None:
        m = self.Q.nrows
        return self.Q.submatrix(cols=slice(self.rank, m)) if self.rank < m else None

    def diagonal_form(self) -> IntMatrix:
        return IntMatrix.diag(self.divisors, self.P.nrows, self.Q.nrows)


def _combine_rows(M, i, j, a, b, c, d):
    """Replace rows i, j of M with (a*ri + b*rj, c*ri + d*rj)."""
    ri, rj = M[i], M[j]
    M[i] = [a * x + b * y for x, y in zip(ri, rj)]
    M[j] = [c * x + d * y for x, y in zip(ri, rj)]


def _combine_cols(M, i, j, a, b, c, d):
    """Replace columns i, j of M with (a*ci + b*cj, c*ci + d*cj)."""
    for row in M:
        x, y = row[i], row[j]
        row[i] = a * x + b * y
        row[j] = c * x + d * y


def _round_div(b: int, a: int) -> int:
    """Nearest-integer quotient, so that |b - q*a| <= |a|/2."""
    q, r = divmod(b, a)
    if 2 * abs(r) > abs(a):
        q += 1
    return q


def _sub_row_multiple(M, i, t, q):
    rt = M[t]
    M[i] = [x - q * y for x, y in zip(M[i], rt)]


class _Reducer:
    """Mutable working state for one SNF computation."""

    def __init__(self, A: IntMatrix, workers: int):
        self.M = A.tolist()
        self.n, self.m = A.shape
        self.P = IntMatrix.identity(self.n).tolist()
        # Q is kept transposed so column operations become row list updates
        self.QT = IntMatrix.identity(self.m).tolist()
        self.workers = max(1, int(workers))
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    # row operations act on M and P; column operations act on M and Q

    def swap_rows(self, i, j):
        if i != j:
            self.M[i], self.M[j] = self.M[j], self.M[i]
            self.P[i], self.P[j] = self.P[j], self.P[i]

    def swap_cols(self, i, j):
        if i != j:
            for row in self.M:
                row[i], row[j] = row[j], row[i]
            self.QT[i], self.QT[j] = self.QT[j], self.QT[i]

    def negate_row(self, i):
        self.M[i] = [-v for v in self.M[i]]
        self.P[i] = [-v for v in self.P[i]]

    def rows_op(self, i, j, a, b, c, d):
        _combine_rows(self.M, i, j, a, b, c, d)
        _combine_rows(self.P, i, j, a, b, c, d)

    def cols_op(self, i, j, a, b, c, d):
        _combine_cols(self.M, i, j, a, b, c, d)
        _combine_rows(self.QT, i, j, a, b, c, d)

    def _eliminate_rows(self, t, targets):
        """Subtract multiples of row t from each target row (independent updates)."""

        def work(block):
            for i, q in block:
                _sub_row_multiple(self.M, i, t, q)
                _sub_row_multiple(self.P, i, t, q)

        if self._pool is None or len(targets) < 2 * self.workers:
            work(targets)
            return
        size = -(-len(targets) // self.workers)
        blocks = [targets[k:k + size] for k in range(0, len(targets), size)]
        list(self._pool.map(work, blocks))

    def pick_pivot(self, t):
        best = None
        for i in range(t, self.n):
            row = self.M[i]
            for j in range(t, self.m):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        return best
        return best

    def clear_column(self, t) -> bool:
        """Reduce M[i][t], i > t, modulo the pivot; True if a remainder is left."""
        M = self.M
        a = M[t][t]
        targets = [(i, _round_div(M[i][t], a)) for i in range(t + 1, self.n) if M[i][t]]
        targets = [(i, q) for i, q in targets if q]
        if targets:
            self._eliminate_rows(t, targets)
        return any(M[i][t] for i in range(t + 1, self.n))

    def clear_row(self, t) -> bool:
        """Reduce M[t][j], j > t, modulo the pivot; True if a remainder is left."""
        M = self.M
        a = M[t][t]
        qs = [(j, _round_div(M[t][j], a)) for j in range(t + 1, self.m) if M[t][j]]
        qs = [(j, q) for j, q in qs if q]
        if qs:
            for row in M:
                x = row[t]
                if x:
                    for j, q in qs:
                        row[j] -= q * x
            for j, q in qs:
                _sub_row_multiple(self.QT, j, t, q)
        return any(M[t][j] for j in range(t + 1, self.m))

    def _repivot(self, t):
        """Move the smallest remainder in row t or column t onto the diagonal."""
        M = self.M
        best = (abs(M[t][t]), None, None)
        for i in range(t + 1, self.n):
            v = abs(M[i][t])
            if v and v < best[0]:
                best = (v, i, None)
        for j in range(t + 1, self.m):
            v = abs(M[t][j])
            if v and v < best[0]:
                best = (v, None, j)
        _, i, j = best
        if i is not None:
            self.swap_rows(t, i)
        elif j is not None:
            self.swap_cols(t, j)

    def run(self) -> int:
        t = 0
        while t < min(self.n, self.m):
            pivot = self.pick_pivot(t)
            if pivot is None:
                break
            _, i, j = pivot
            self.swap_rows(t, i)
            self.swap_cols(t, j)
            while True:
                left_col = self.clear_column(t)
                left_row = self.clear_row(t)
                if not (left_col or left_row):
                    break
                # remainders are smaller than the pivot, so this terminates
                self._repivot(t)
            if self.M[t][t] < 0:
                self.negate_row(t)
            t += 1
        return t

    def enforce_divisibility(self, r):
        M = self.M
        done = False
        while not done:
            done = True
            for i in range(r):
                for j in range(i + 1, r):
                    di, dj = M[i][i], M[j][j]
                    if dj % di == 0:
                        continue
                    done = False
                    g, s, u = xgcd(di, dj)
                    self.rows_op(i, j, 1, 1, 0, 1)            # row_i += row_j
                    self.cols_op(i, j, s, u, -(dj // g), di // g)
                    q = M[j][i] // M[i][i]
                    self.rows_op(i, j, 1, 0, -q, 1)
                    if M[i][i] < 0:
                        self.negate_row(i)
                    if M[j][j] < 0:
                        self.negate_row(j)


def smith_normal_form(A: IntMatrix, *, divisibility: bool = False, workers: int = 1) -> SnfResult:
    """Diagonalize ``A`` with unimodular row and column transforms.

    Pivots are the smallest nonzero entry (in absolute value) of the active
    submatrix.  The pivot row and column are reduced by nearest-integer
    quotients; while a remainder survives, the smallest one becomes the new
    pivot (a Euclidean descent to the gcd that keeps entries small).  With
    ``workers > 1`` the independent row eliminations of one step are split
    into row blocks on a thread pool; the result is identical to ``workers=1``.

    The divisor chain ``d1 | d2 | ...`` is only enforced when
    ``divisibility=True``.  Divisors are always reported positive.
    """
    if not isinstance(A, IntMatrix):
        A = IntMatrix(A)
    red = _Reducer(A, workers)
    try:
        r = red.run()
        if divisibility and r > 1:
            red.enforce_divisibility(r)
    finally:
        red.close()
    divisors = tuple(int(red.M[i][i]) for i in range(r))
    return SnfResult(IntMatrix(red.P), IntMatrix(red.QT).T, divisors, r)


def det_exact(M: IntMatrix | Sequence[Sequence[int]]) -> int:
    """Determinant by Bareiss fraction-free elimination."""
    rows = [[_big(int(v)) for v in r] for r in (M.rows if isinstance(M, IntMatrix) else M)]
    n = len(rows)
    if n == 0:
        return 1
    if any(len(r) != n for r in rows):
        raise DimensionError("determinant of a non-square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for i in range(k + 1, n):
                if rows[i][k]:
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = rows[k][k]
        rk = rows[k]
        tail = rk[k + 1:]
        for i in range(k + 1, n):
            ri = rows[i]
            f = ri[k]
            rows[i] = ri[:k + 1] + [(x * pivot - f * y) // prev for x, y in zip(ri[k + 1:], tail)]
        prev = pivot
    return int(sign * rows[n - 1][n - 1])


def unimodular_check(M: IntMatrix | Sequence[Sequence[int]]) -> bool:
    return abs(det_exact(M)) == 1


def parse_matrix_text(text: str) -> IntMatrix:
    """Read ``n m`` followed by n rows of m integers."""
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix text must start with 'n m'")
    n, m = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if n < 1 or m < 1 or len(body) != n * m:
        raise ValueError(f"expected {n}x{m} entries, found {len(body)}")
    vals = [int(v) for v in body]
    return IntMatrix([vals[i * m:(i + 1) * m] for i in range(n)])


def format_matrix_text(M: IntMatrix) -> str:
    lines = [f"{M.nrows} {M.ncols}"]
    lines.extend(" ".join(str(v) for v in row) for row in M.rows)
    return "\n".join(lines) + "\n"

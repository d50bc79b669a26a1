"""Dense matrix algebra over GF(q).

Matrices are immutable-by-convention row-major lists of canonical field
integers; every operation here is a pure function that never mutates its
operands, so matrices can be shared across threads freely.  Zero-row and
zero-column matrices are first-class values: nodes holding no data produce
genuinely empty factor matrices.  Elimination always pivots on the first
nonzero entry in column order, so every decomposition here is deterministic
and reproducible.
"""

from __future__ import annotations

from math import comb

from .finite_field import Field


class SingularMatrixError(ValueError):
    """Matrix inversion requested for a rank-deficient square matrix."""


class InconsistentSystemError(ValueError):
    """Linear system has no solution."""


class UnderdeterminedSystemError(ValueError):
    """Linear system coefficient matrix is column-rank deficient."""


class FieldTooSmallError(ValueError):
    """The field has too few elements for the requested construction."""


class ShapeMismatchError(ValueError):
    """Operand dimensions are incompatible."""


class Matrix:
    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, rows: int, cols: int, data=None):
        self.field = field
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [[0] * cols for _ in range(rows)]
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise ShapeMismatchError(f"data does not match shape {rows}x{cols}")
            self.data = [[field.validate(v) for v in row] for row in data]

    @classmethod
    def from_rows(cls, field: Field, data: list[list[int]]) -> "Matrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(field, rows, cols, data)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        m = cls(field, n, n)
        for i in range(n):
            m.data[i][i] = 1
        return m

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, rows, cols)

    # -- structure ---------------------------------------------------------

    def copy(self) -> "Matrix":
        out = Matrix(self.field, self.rows, self.cols)
        out.data = [row[:] for row in self.data]
        return out

    def __getitem__(self, key) -> int:
        i, j = key
        return self.data[i][j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and other.field == self.field
            and other.rows == self.rows
            and other.cols == self.cols
            and other.data == self.data
        )

    __hash__ = None  # mutable container

    def __repr__(self) -> str:
        return f"Matrix({self.field!r}, {self.rows}x{self.cols}, {self.data})"

    def row(self, i: int) -> list[int]:
        return self.data[i][:]

    def col(self, j: int) -> list[int]:
        return [self.data[i][j] for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        out = Matrix(self.field, self.cols, self.rows)
        for i in range(self.rows):
            for j in range(self.cols):
                out.data[j][i] = self.data[i][j]
        return out

    def take_rows(self, idxs) -> "Matrix":
        out = Matrix(self.field, len(idxs), self.cols)
        out.data = [self.data[i][:] for i in idxs]
        return out

    def take_cols(self, idxs) -> "Matrix":
        out = Matrix(self.field, self.rows, len(idxs))
        out.data = [[self.data[i][j] for j in idxs] for i in range(self.rows)]
        return out

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.data for v in row)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        add = self.field.add
        out = Matrix(self.field, self.rows, self.cols)
        out.data = [
            [add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)
        ]
        return out

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        sub = self.field.sub
        out = Matrix(self.field, self.rows, self.cols)
        out.data = [
            [sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)
        ]
        return out

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ShapeMismatchError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        f = self.field
        out = Matrix(f, self.rows, other.cols)
        for i in range(self.rows):
            srow = self.data[i]
            orow = out.data[i]
            for t in range(self.cols):
                a = srow[t]
                if a == 0:
                    continue
                brow = other.data[t]
                for j in range(other.cols):
                    b = brow[j]
                    if b:
                        orow[j] = f.add(orow[j], f.mul(a, b))
        return out

    def scale(self, c: int) -> "Matrix":
        f = self.field
        out = Matrix(f, self.rows, self.cols)
        out.data = [[f.mul(c, v) for v in row] for row in self.data]
        return out

    def apply(self, vec: list[int]) -> list[int]:
        """Matrix-vector product on a plain symbol list."""
        if len(vec) != self.cols:
            raise ShapeMismatchError(f"vector length {len(vec)} != cols {self.cols}")
        f = self.field
        out = [0] * self.rows
        for i, row in enumerate(self.data):
            acc = 0
            for a, x in zip(row, vec):
                if a and x:
                    acc = f.add(acc, f.mul(a, x))
            out[i] = acc
        return out

    def _check_same_shape(self, other: "Matrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ShapeMismatchError(
                f"shape {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )


def hstack(field: Field, blocks: list[Matrix]) -> Matrix:
    """Concatenate blocks left-to-right; zero-column blocks are skipped."""
    eff = [b for b in blocks if b.cols > 0]
    rows = eff[0].rows if eff else (blocks[0].rows if blocks else 0)
    if any(b.rows != rows for b in eff):
        raise ShapeMismatchError("hstack blocks disagree on row count")
    out = Matrix(field, rows, sum(b.cols for b in eff))
    for i in range(rows):
        merged = []
        for b in eff:
            merged.extend(b.data[i])
        out.data[i] = merged
    return out


def vstack(field: Field, blocks: list[Matrix]) -> Matrix:
    """Concatenate blocks top-to-bottom; zero-row blocks are skipped."""
    eff = [b for b in blocks if b.rows > 0]
    cols = eff[0].cols if eff else (blocks[0].cols if blocks else 0)
    if any(b.cols != cols for b in eff):
        raise ShapeMismatchError("vstack blocks disagree on column count")
    out = Matrix(field, sum(b.rows for b in eff), cols)
    out.data = [row[:] for b in eff for row in b.data]
    return out


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form and pivot columns.

    Pivot selection is the first nonzero entry scanning rows top-down within
    each column left-to-right, which makes the result (and everything built
    on it) deterministic.
    """
    f = m.field
    r = m.copy()
    pivots: list[int] = []
    prow = 0
    for col in range(r.cols):
        if prow >= r.rows:
            break
        src = next((i for i in range(prow, r.rows) if r.data[i][col] != 0), None)
        if src is None:
            continue
        if src != prow:
            r.data[prow], r.data[src] = r.data[src], r.data[prow]
        lead = r.data[prow][col]
        if lead != 1:
            inv = f.inv(lead)
            r.data[prow] = [f.mul(inv, v) for v in r.data[prow]]
        prow_data = r.data[prow]
        for i in range(r.rows):
            if i == prow:
                continue
            c = r.data[i][col]
            if c:
                row = r.data[i]
                r.data[i] = [f.sub(v, f.mul(c, w)) for v, w in zip(row, prow_data)]
        pivots.append(col)
        prow += 1
    return r, pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def invert(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ShapeMismatchError(f"cannot invert {m.rows}x{m.cols} matrix")
    if m.rows == 0:
        return Matrix(m.field, 0, 0)
    aug = hstack(m.field, [m, Matrix.identity(m.field, m.rows)])
    red, pivots = rref(aug)
    own_rank = sum(1 for p in pivots if p < m.rows)
    if own_rank < m.rows:
        raise SingularMatrixError(f"matrix of rank {own_rank} is singular")
    return red.take_cols(range(m.rows, 2 * m.rows))


def full_rank_decompose(m: Matrix) -> tuple[Matrix, Matrix]:
    """Factor m into (tall, wide) with both factors of rank equal to rank(m).

    The wide factor is the nonzero rows of the reduced row-echelon form, so
    it contains an identity submatrix on the pivot columns, and the tall
    factor is the corresponding column-submatrix of m itself.  Rank 0 yields
    a pair of empty factors.
    """
    red, pivots = rref(m)
    r = len(pivots)
    wide = red.take_rows(range(r))
    tall = m.take_cols(pivots)
    return tall, wide


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Solve a @ x = b for the unique x; b may carry several right-hand sides."""
    if a.rows != b.rows:
        raise ShapeMismatchError(f"lhs has {a.rows} rows, rhs has {b.rows}")
    aug = hstack(a.field, [a, b])
    red, pivots = rref(aug)
    lhs_pivots = [p for p in pivots if p < a.cols]
    if len(lhs_pivots) < len(pivots):
        raise InconsistentSystemError("system has no solution")
    if len(lhs_pivots) < a.cols:
        raise UnderdeterminedSystemError(
            f"column rank {len(lhs_pivots)} < {a.cols} unknowns"
        )
    x = Matrix(a.field, a.cols, b.cols)
    x.data = [red.data[i][a.cols :] for i in range(a.cols)]
    return x


def solve_vec(a: Matrix, b: list[int]) -> list[int]:
    rhs = Matrix(a.field, len(b), 1, [[v] for v in b])
    return [row[0] for row in solve(a, rhs).data]


SELECTION_CHECK_LIMIT = 10**4


def vandermonde_columns(field: Field, r: int, c: int) -> Matrix:
    """r x c matrix whose every selection of r columns is invertible.

    Column j is (1, a_j, a_j^2, ..., a_j^(r-1)) on the j-th element of the
    deterministic field enumeration 0, 1, g, g^2, ...; distinct evaluation
    points make every r-column minor a nonzero Vandermonde determinant.
    The property is re-verified exhaustively while that stays cheap.
    """
    if c > field.q:
        raise FieldTooSmallError(
            f"need {c} distinct evaluation points but GF({field.q}) has only {field.q}"
        )
    points = []
    for el in field.elements():
        if len(points) == c:
            break
        points.append(el)
    out = Matrix(field, r, c)
    for j, a in enumerate(points):
        v = 1
        for i in range(r):
            out.data[i][j] = v
            v = field.mul(v, a)
    if r <= c and comb(c, r) <= SELECTION_CHECK_LIMIT:
        from itertools import combinations

        for sel in combinations(range(c), r):
            invert(out.take_cols(sel))
    return out


def column_weights(m: Matrix) -> list[int]:
    return [sum(1 for i in range(m.rows) if m.data[i][j]) for j in range(m.cols)]

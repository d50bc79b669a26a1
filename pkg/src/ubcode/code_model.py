"""Irregular array codes: parameters, metrics, closed-form bounds, verification.

An irregular array code stores, in node j, a data vector of m_j symbols and
a parity vector of p_j symbols; the parities are linear in all data vectors
through per-edge construction matrices (grid entry [i][j] maps node i's data
into node j's parity).  Any k of the n columns must suffice to recover every
data symbol.

Codewords are plain lists of n columns, each column a list of canonical
field integers laid out data-then-parity.  All metric values that the theory
pins down as rationals (update bandwidth, update complexity) are returned as
exact ``fractions.Fraction`` values, never floats.  Code objects are
immutable once constructed and the metric/verification functions are pure,
so subset checks may run concurrently over shared instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

from .finite_field import Field, GF
from .linalg import (
    Matrix,
    UnderdeterminedSystemError,
    InconsistentSystemError,
    full_rank_decompose,
    rank,
    solve,
    vstack,
)

FEASIBILITY_SUBSET_LIMIT = 10**6
MDS_SUBSET_LIMIT = 10**4


class InvalidParamsError(ValueError):
    """Code parameters violate 1 <= k < n, nonnegativity, or B > 0."""


class EnumerationTooLargeError(ValueError):
    """A brute-force check would need to enumerate too many subsets."""


@dataclass(frozen=True)
class CodeParams:
    """Shape of an irregular array code: node count, threshold, symbol counts."""

    n: int
    k: int
    m: tuple[int, ...]
    p: tuple[int, ...]
    q: int

    def __post_init__(self):
        validate_dimensions(self.n, self.k, self.m)
        if len(self.p) != self.n or any(v < 0 for v in self.p):
            raise InvalidParamsError(f"parity profile {self.p} invalid for n={self.n}")

    @property
    def total_data(self) -> int:
        return sum(self.m)

    @property
    def col_lens(self) -> tuple[int, ...]:
        return tuple(mi + pi for mi, pi in zip(self.m, self.p))


def validate_dimensions(n: int, k: int, m) -> None:
    if n < 2 or not 1 <= k < n:
        raise InvalidParamsError(f"need 1 <= k < n with n >= 2, got n={n} k={k}")
    if len(m) != n or any(v < 0 for v in m):
        raise InvalidParamsError(f"data profile {tuple(m)} invalid for n={n}")
    if sum(m) == 0:
        raise InvalidParamsError("code must store at least one data symbol")


class IrregularArrayCode:
    """A concrete code: construction matrices plus their factor pairs.

    ``construction[i][j]`` is the p_j x m_i map from node i's data into node
    j's parity.  For i != j it factors as ``B[i][j] @ A[i][j]`` with both
    factors of full rank equal to the per-edge update bandwidth: A computes
    the intermediate vector the sender ships, B folds it into the parity.
    Diagonal entries carry no bandwidth and have no factor pair.
    """

    def __init__(self, field: Field, params: CodeParams, construction,
                 A=None, B=None):
        if field.q != params.q:
            raise InvalidParamsError(f"field GF({field.q}) != params q={params.q}")
        self.field = field
        self.params = params
        n = params.n
        for i in range(n):
            for j in range(n):
                mm = construction[i][j]
                if (mm.rows, mm.cols) != (params.p[j], params.m[i]):
                    raise InvalidParamsError(
                        f"construction[{i}][{j}] is {mm.rows}x{mm.cols}, "
                        f"expected {params.p[j]}x{params.m[i]}"
                    )
        self.construction = construction
        if A is None or B is None:
            A = [[None] * n for _ in range(n)]
            B = [[None] * n for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    tall, wide = full_rank_decompose(construction[i][j])
                    B[i][j], A[i][j] = tall, wide
        else:
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    if B[i][j] @ A[i][j] != construction[i][j]:
                        raise InvalidParamsError(
                            f"factor pair at [{i}][{j}] does not multiply back"
                        )
        self.A = A
        self.B = B
        self._column_maps = None

    # -- shape -----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def m(self) -> tuple[int, ...]:
        return self.params.m

    @property
    def p(self) -> tuple[int, ...]:
        return self.params.p

    @property
    def col_lens(self) -> tuple[int, ...]:
        return self.params.col_lens

    def data_rows(self, j: int) -> list[int]:
        return list(range(self.params.m[j]))

    def parity_rows(self, j: int) -> list[int]:
        return list(range(self.params.m[j], self.params.m[j] + self.params.p[j]))

    def data_offsets(self) -> list[int]:
        offs = [0]
        for mi in self.params.m:
            offs.append(offs[-1] + mi)
        return offs

    def as_irregular_code(self) -> "IrregularArrayCode":
        return self

    # -- codec -----------------------------------------------------------

    def encode(self, data: list[list[int]]) -> list[list[int]]:
        """Columns [x_j ; p_j] with p_j the sum of per-node contributions."""
        f = self.field
        if len(data) != self.n or any(
            len(x) != mi for x, mi in zip(data, self.params.m)
        ):
            raise InvalidParamsError("data vectors do not match the data profile")
        columns = []
        for j in range(self.n):
            parity = [0] * self.params.p[j]
            for i in range(self.n):
                mm = self.construction[i][j]
                if mm.rows == 0 or mm.cols == 0 or mm.is_zero():
                    continue
                contrib = mm.apply(data[i])
                parity = [f.add(a, b) for a, b in zip(parity, contrib)]
            columns.append(list(data[j]) + parity)
        return columns

    def column_maps(self) -> list[Matrix]:
        """Per-column matrices mapping the global data vector to the stored symbols."""
        if self._column_maps is None:
            offs = self.data_offsets()
            total = offs[-1]
            maps = []
            for j in range(self.n):
                s = Matrix(self.field, self.params.col_lens[j], total)
                for r in range(self.params.m[j]):
                    s.data[r][offs[j] + r] = 1
                for i in range(self.n):
                    mm = self.construction[i][j]
                    for r in range(mm.rows):
                        row = s.data[self.params.m[j] + r]
                        for c in range(mm.cols):
                            row[offs[i] + c] = mm.data[r][c]
                maps.append(s)
            self._column_maps = maps
        return self._column_maps

    def decode_columns(self, known: dict[int, list[int]]) -> list[list[int]]:
        """Recover the full codeword from the surviving columns by linear solve."""
        data = solve_data_from_columns(self, known)
        return self.encode(data)

    def repair(self, failed: int, fetch, helpers=None) -> list[int]:
        """Rebuild one column by downloading k full surviving columns."""
        order = [j for j in (helpers or range(self.n)) if j != failed]
        chosen = order[: self.k]
        known = {j: fetch(j, list(range(self.params.col_lens[j]))) for j in chosen}
        return self.decode_columns(known)[failed]


def solve_data_from_columns(code, known: dict[int, list[int]]) -> list[list[int]]:
    """Solve for every data vector given a subset of intact columns.

    Works for any object exposing ``field``, ``m``, ``col_lens`` and
    ``column_maps``; raises Underdetermined/Inconsistent errors when the
    surviving columns do not pin the data down.
    """
    maps = code.column_maps()
    idxs = sorted(known)
    for j in idxs:
        if len(known[j]) != code.col_lens[j]:
            raise InvalidParamsError(f"column {j} has wrong length")
    lhs = vstack(code.field, [maps[j] for j in idxs])
    rhs = Matrix(
        code.field,
        lhs.rows,
        1,
        [[v] for j in idxs for v in known[j]],
    )
    flat = [row[0] for row in solve(lhs, rhs).data]
    out = []
    pos = 0
    for mi in code.m:
        out.append(flat[pos : pos + mi])
        pos += mi
    return out


# -- metrics -----------------------------------------------------------------


def update_bandwidth(code: IrregularArrayCode):
    """Per-edge minimum symbol counts and their node average, exact.

    Entry [i][j] is the rank of the construction matrix from i into j, the
    fewest symbols an update of node i must ship to node j; the average over
    source nodes is the code's update bandwidth.
    """
    n = code.n
    grid = [[0] * n for _ in range(n)]
    total = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            r = rank(code.construction[i][j])
            grid[i][j] = r
            total += r
    return grid, Fraction(total, n)


def redundancy(code: IrregularArrayCode) -> int:
    return sum(code.p)


def zero_diagonal(code: IrregularArrayCode) -> IrregularArrayCode:
    """Equivalent code with every node's own-data parity contribution removed.

    Off-diagonal matrices (and hence redundancy and update bandwidth) are
    unchanged; codewords map bijectively by subtracting the diagonal term
    from each parity vector.
    """
    if all(code.construction[i][i].is_zero() for i in range(code.n)):
        return code
    n = code.n
    grid = [
        [
            Matrix.zeros(code.field, code.p[j], code.m[i])
            if i == j
            else code.construction[i][j]
            for j in range(n)
        ]
        for i in range(n)
    ]
    return IrregularArrayCode(code.field, code.params, grid, code.A, code.B)


def update_complexity(code: IrregularArrayCode) -> Fraction:
    """Average number of parity symbols rewritten per single-symbol change.

    Counts nonzero entries of the off-diagonal construction matrices (the
    zero-diagonal normal form charges nothing for a node's own column).
    """
    touched = 0
    for i in range(code.n):
        for j in range(code.n):
            if i == j:
                continue
            touched += sum(
                1 for row in code.construction[i][j].data for v in row if v
            )
    return Fraction(touched, code.params.total_data)


# -- closed-form bounds -------------------------------------------------------


@dataclass(frozen=True)
class BoundsReport:
    """Closed-form optima for an (n, k, m) parameter set, in input node order.

    water_level drives the minimum-redundancy profile; min_update_bandwidth
    and update_complexity_bound are exact rationals.  The fields tied to the
    divisibility condition (min_redundancy_at_min_bandwidth and its unique
    profile) are None when the theory leaves them open.
    """

    n: int
    k: int
    m: tuple[int, ...]
    water_level: int
    min_redundancy: int
    min_update_bandwidth: Fraction
    min_redundancy_at_min_bandwidth: int | None
    update_complexity_bound: Fraction
    redundancy_profile: tuple[int, ...]
    bandwidth_profile: tuple[int, ...] | None
    bandwidth_assignment: tuple[tuple[int, ...], ...]


def bounds(n: int, k: int, m) -> BoundsReport:
    """Water level, minimum redundancy, minimum update bandwidth and their
    achieving profiles for an (n, k, m) irregular array code."""
    validate_dimensions(n, k, m)
    m = tuple(m)
    big_b = sum(m)
    order = sorted(range(n), key=lambda i: (-m[i], i))
    ms = [m[i] for i in order]

    mu = max(ms[n - k - 1], -(-big_b // k))
    r_min = sum(max(mu - ms[i], 0) + ms[i] for i in range(n - k))

    # A minimum-redundancy parity profile: the first n-k ranks are forced,
    # the rest absorb the displaced data greedily up to their headroom.
    ps = [max(mu - ms[i], 0) for i in range(n - k)] + [0] * k
    remaining = sum(ms[: n - k])
    for i in range(n - k, n):
        take = min(max(mu - ms[i], 0), remaining)
        ps[i] = take
        remaining -= take
    if remaining:
        raise AssertionError("water-level profile failed to absorb all data")
    redundancy_profile = _unsort(ps, order)

    gamma_min = Fraction(big_b, n) + Fraction(n - k - 1, n) * sum(
        -(-mi // k) for mi in m
    )

    # Bandwidth-optimal per-edge assignment, built in sorted rank order: the
    # w_r cyclically-nearest successor ranks receive the floor share, all
    # other destinations the ceiling share.
    assign_sorted = [[0] * n for _ in range(n)]
    for r in range(n):
        lo, hi = ms[r] // k, -(-ms[r] // k)
        w = k * hi - ms[r]
        floor_ranks = {(r + d) % n for d in range(1, w + 1)}
        for c in range(n):
            if c == r:
                continue
            assign_sorted[r][c] = lo if c in floor_ranks else hi
    assignment = [[0] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            if r != c:
                assignment[order[r]][order[c]] = assign_sorted[r][c]

    if k == n - 1:
        r_sma = r_min
        bandwidth_profile = redundancy_profile
    elif all(mi % k == 0 for mi in m):
        r_sma = ((n - 1) * sum(ms[: n - k]) + (n - k) * ms[n - k]) // k
        bandwidth_profile = bandwidth_optimal_profile(n, k, m)
    else:
        r_sma = None
        bandwidth_profile = None

    return BoundsReport(
        n=n,
        k=k,
        m=m,
        water_level=mu,
        min_redundancy=r_min,
        min_update_bandwidth=gamma_min,
        min_redundancy_at_min_bandwidth=r_sma,
        update_complexity_bound=Fraction(n - k) + Fraction(k - 1, k),
        redundancy_profile=redundancy_profile,
        bandwidth_profile=bandwidth_profile,
        bandwidth_assignment=tuple(tuple(row) for row in assignment),
    )


def _unsort(values, order) -> tuple[int, ...]:
    out = [0] * len(values)
    for ranked, original in enumerate(order):
        out[original] = values[ranked]
    return tuple(out)


def bandwidth_optimal_profile(n: int, k: int, m) -> tuple[int, ...]:
    """Parity profile supporting optimal update bandwidth, in input order.

    Node j must be able to absorb the per-edge shares of any n-k
    simultaneously erased peers, so its parity count is the largest such
    share sum: (sum of the n-k+1 largest data counts minus its own) / k for
    the n-k largest nodes, (sum of the n-k largest) / k for the rest.
    Requires k to divide every data count.
    """
    validate_dimensions(n, k, m)
    if any(mi % k for mi in m):
        raise InvalidParamsError(f"k={k} must divide every entry of {tuple(m)}")
    order = sorted(range(n), key=lambda i: (-m[i], i))
    ms = [m[i] for i in order]
    head = sum(ms[: n - k + 1])
    tail = sum(ms[: n - k])
    ps = [(head - ms[j]) // k if j < n - k else tail // k for j in range(n)]
    return _unsort(ps, order)


# -- existence / feasibility ---------------------------------------------------


@dataclass(frozen=True)
class Admissibility:
    """Whether both optima are simultaneously reachable for (n, k, m)."""

    verdict: str  # "admissible" | "not_admissible" | "undetermined"
    data_profile: tuple[int, ...] | None = None
    parity_profile: tuple[int, ...] | None = None
    detail: str = ""

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"


def mrmub_admissible(n: int, k: int, m) -> Admissibility:
    """Decide whether a code can reach minimum redundancy and minimum update
    bandwidth at once, returning the forced (m, p) shape when it can.

    For 1 < k < n-1 the answer is only established when k divides every m_i:
    the data profile must be all-equal or all-zero-but-one.  The edge orders
    k = 1 and k = n-1 are always admissible.
    """
    validate_dimensions(n, k, m)
    m = tuple(m)
    big_b = sum(m)
    if k == 1:
        return Admissibility(
            "admissible",
            m,
            tuple(big_b - mi for mi in m),
            "threshold 1: every node mirrors all foreign data",
        )
    if k == n - 1:
        rep = bounds(n, k, m)
        return Admissibility(
            "admissible",
            m,
            rep.redundancy_profile,
            "threshold n-1: minimum redundancy is reachable at minimum bandwidth",
        )
    if any(mi % k for mi in m):
        return Admissibility(
            "undetermined",
            detail=f"k={k} does not divide every node size in {m}",
        )
    if all(mi == m[0] for mi in m):
        pj = (n - k) * big_b // (n * k)
        return Admissibility("admissible", m, tuple([pj] * n), "balanced data profile")
    nonzero = [i for i, mi in enumerate(m) if mi]
    if len(nonzero) == 1:
        p = [big_b // k] * n
        p[nonzero[0]] = 0
        return Admissibility(
            "admissible", m, tuple(p), "single-node data profile"
        )
    rep = bounds(n, k, m)
    return Admissibility(
        "not_admissible",
        detail=(
            f"minimum redundancy at minimum bandwidth is "
            f"{rep.min_redundancy_at_min_bandwidth} > {rep.min_redundancy}"
        ),
    )


@dataclass(frozen=True)
class Feasibility:
    """Outcome of the exhaustive erased-subset necessary-condition check."""

    feasible: bool
    witness: tuple[int, ...] | None = None
    violated: str | None = None  # "access" | "capacity"
    detail: str = ""


def feasible(n: int, k: int, m, p, bandwidth_matrix) -> Feasibility:
    """Check the two necessary conditions over every erased subset of size n-k.

    For each candidate erased set E the survivors must offer every erased
    node enough per-edge bandwidth to re-derive its data (access), and the
    survivors' parity capacity must cover all erased data (capacity).
    Returns the first violated subset as a witness.
    """
    validate_dimensions(n, k, m)
    if comb(n, n - k) > FEASIBILITY_SUBSET_LIMIT:
        raise EnumerationTooLargeError(
            f"C({n},{n - k}) subsets exceed {FEASIBILITY_SUBSET_LIMIT}"
        )
    g = bandwidth_matrix
    for erased in combinations(range(n), n - k):
        survivors = [j for j in range(n) if j not in erased]
        for i in erased:
            if sum(g[i][j] for j in survivors) < m[i]:
                return Feasibility(
                    False,
                    erased,
                    "access",
                    f"node {i} cannot push {m[i]} symbols to the survivors",
                )
        capacity = sum(
            min(p[j], sum(g[i][j] for i in erased)) for j in survivors
        )
        need = sum(m[i] for i in erased)
        if need > capacity:
            return Feasibility(
                False,
                erased,
                "capacity",
                f"erased data {need} exceeds surviving capacity {capacity}",
            )
    return Feasibility(True)


# -- MDS verification -----------------------------------------------------------


@dataclass(frozen=True)
class MdsReport:
    is_mds: bool
    witness: tuple[int, ...] | None = None
    insufficient_subset: tuple[int, ...] | None = None
    detail: str = ""


def verify_mds(code, fills: int = 20, seed: int = 2024) -> MdsReport:
    """Brute-force the reconstruction threshold.

    Every k-subset of columns must determine every data symbol (checked by
    solving for ``fills`` random codewords at once), and some (k-1)-subset
    must fail, either by raw symbol count or by rank deficiency, so the code
    is exactly (n, k).
    """
    n, k = code.n, code.k
    if comb(n, k) > MDS_SUBSET_LIMIT:
        raise EnumerationTooLargeError(f"C({n},{k}) exceeds {MDS_SUBSET_LIMIT}")
    field = code.field
    total = sum(code.m)
    maps = code.column_maps()
    rng = random.Random(seed)
    data = Matrix(
        field, total, fills,
        [[rng.randrange(field.q) for _ in range(fills)] for _ in range(total)],
    )
    stored = [maps[j] @ data for j in range(n)]

    for subset in combinations(range(n), k):
        lhs = vstack(field, [maps[j] for j in subset])
        rhs = vstack(field, [stored[j] for j in subset])
        try:
            recovered = solve(lhs, rhs)
        except (UnderdeterminedSystemError, InconsistentSystemError) as exc:
            return MdsReport(False, subset, None, f"columns {subset}: {exc}")
        if recovered != data:
            return MdsReport(False, subset, None, f"columns {subset}: wrong data")

    for subset in combinations(range(n), k - 1):
        symbols = sum(code.col_lens[j] for j in subset)
        if symbols < total:
            return MdsReport(True, None, subset, "symbol count below data size")
        lhs = vstack(field, [maps[j] for j in subset])
        if rank(lhs) < total:
            return MdsReport(True, None, subset, "rank deficient")
    return MdsReport(
        False, None, None, f"every {k - 1}-subset already determines the data"
    )


# -- serialization ---------------------------------------------------------------


def matrix_to_json(m: Matrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "entries": [row[:] for row in m.data]}


def matrix_from_json(field: Field, obj: dict) -> Matrix:
    return Matrix(field, obj["rows"], obj["cols"], obj["entries"])


def code_to_json(code: IrregularArrayCode) -> dict:
    """Code-spec document: field, params, and the two factor grids.

    Construction matrices are re-derived as B @ A on load; diagonal entries
    are stored as empty matrices, so the code must be in zero-diagonal form.
    """
    if any(not code.construction[i][i].is_zero() for i in range(code.n)):
        raise InvalidParamsError(
            "serialize zero_diagonal(code): diagonal contributions cannot be stored"
        )
    n = code.n
    empty = {"rows": 0, "cols": 0, "entries": []}
    return {
        "field": code.field.to_json(),
        "params": {
            "n": n,
            "k": code.k,
            "m": list(code.m),
            "p": list(code.p),
            "q": code.params.q,
        },
        "matrices": {
            "A": [
                [empty if i == j else matrix_to_json(code.A[i][j]) for j in range(n)]
                for i in range(n)
            ],
            "B": [
                [empty if i == j else matrix_to_json(code.B[i][j]) for j in range(n)]
                for i in range(n)
            ],
        },
    }


def code_from_json(obj: dict) -> IrregularArrayCode:
    field = GF(obj["field"]["q"])
    stored = obj["field"]
    if stored.get("primitive") not in (None, field.primitive) or (
        stored.get("modulus") or None
    ) != (list(field.modulus) if field.modulus else None):
        raise InvalidParamsError("field tables in file do not match this build")
    pr = obj["params"]
    params = CodeParams(pr["n"], pr["k"], tuple(pr["m"]), tuple(pr["p"]), pr["q"])
    n = params.n
    grid_a = [[None] * n for _ in range(n)]
    grid_b = [[None] * n for _ in range(n)]
    construction = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                construction[i][j] = Matrix.zeros(field, params.p[j], params.m[i])
                continue
            grid_a[i][j] = matrix_from_json(field, obj["matrices"]["A"][i][j])
            grid_b[i][j] = matrix_from_json(field, obj["matrices"]["B"][i][j])
            construction[i][j] = grid_b[i][j] @ grid_a[i][j]
    return IrregularArrayCode(field, params, construction, grid_a, grid_b)

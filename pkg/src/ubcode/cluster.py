"""Deterministic simulated storage cluster with full symbol accounting.

A cluster owns one code instance, the current per-node columns, and the
ground-truth data vectors.  Updates ship exactly the per-edge intermediate
vectors of the update protocol; repairs fetch symbols through a deduplicating
download counter; every completed operation leaves the columns equal to a
fresh encode of the ground truth (re-checked internally, and auditable on
demand).

Randomness is always drawn from ``random.Random(seed)`` (the stdlib Mersenne
Twister), so identical seeds reproduce identical clusters, workloads and
logs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .code_model import InvalidParamsError


class NodeOutOfRangeError(IndexError):
    """A node index outside 0..n-1 was addressed."""


class ClusterStateError(RuntimeError):
    """Stored columns diverged from the encode of the ground truth."""


class RepairMismatchError(RuntimeError):
    """A repaired column differs from the lost one."""


@dataclass(frozen=True)
class TransferRecord:
    op: str
    src: int
    dst: int
    count: int


@dataclass
class TransferLog:
    records: list[TransferRecord] = dc_field(default_factory=list)

    def add(self, op: str, src: int, dst: int, count: int) -> None:
        if count < 0:
            raise ValueError("negative transfer count")
        self.records.append(TransferRecord(op, src, dst, count))

    def total(self, op: str | None = None) -> int:
        return sum(r.count for r in self.records if op is None or r.op == op)

    def extend(self, other: "TransferLog") -> None:
        self.records.extend(other.records)

    def lines(self) -> list[str]:
        return [f"{r.op},{r.src},{r.dst},{r.count}" for r in self.records]


@dataclass(frozen=True)
class AuditResult:
    ok: bool
    location: tuple[int, int] | None = None  # (node, row)
    detail: str = ""


class Cluster:
    """Single-owner mutable state machine around an immutable code object."""

    def __init__(self, code, data=None, seed: int | None = None):
        self.code = code
        self.view = code.as_irregular_code()
        self.field = code.field
        if data is None:
            rng = random.Random(0 if seed is None else seed)
            data = [
                [rng.randrange(self.field.q) for _ in range(mi)] for mi in code.m
            ]
        else:
            if len(data) != code.n or any(
                len(x) != mi for x, mi in zip(data, code.m)
            ):
                raise InvalidParamsError("data does not match the code's data profile")
            data = [list(x) for x in data]
        self.truth = data
        self.columns = code.encode(data)
        self.log = TransferLog()

    @property
    def n(self) -> int:
        return self.code.n

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.n:
            raise NodeOutOfRangeError(f"node {node} outside 0..{self.n - 1}")

    # -- update ---------------------------------------------------------------

    def apply_update(self, node: int, new_data: list[int]) -> TransferLog:
        """Replace node's data vector; ship one intermediate vector per edge.

        The edge i -> j carries exactly rank(construction[i][j]) symbols
        regardless of the delta's value: the protocol is data-oblivious.
        """
        self._check_node(node)
        f = self.field
        if len(new_data) != self.code.m[node]:
            raise InvalidParamsError(
                f"update vector length {len(new_data)} != {self.code.m[node]}"
            )
        old = self.truth[node]
        delta = [f.sub(a, b) for a, b in zip(new_data, old)]
        oplog = TransferLog()

        for j in range(self.n):
            if j == node:
                continue
            a_map = self.view.A[node][j]
            if a_map is None or a_map.rows == 0:
                continue
            payload = a_map.apply(delta)
            oplog.add("update", node, j, len(payload))
            addend = self.view.B[node][j].apply(payload)
            rows = self.code.parity_rows(j)
            col = self.columns[j]
            for r, v in zip(rows, addend):
                col[r] = f.add(col[r], v)

        own = self.columns[node]
        for r, v in zip(self.code.data_rows(node), new_data):
            own[r] = v
        diag = self.view.construction[node][node]
        if not diag.is_zero():
            addend = diag.apply(delta)
            for r, v in zip(self.code.parity_rows(node), addend):
                own[r] = f.add(own[r], v)

        self.truth[node] = list(new_data)
        self._assert_consistent("update")
        self.log.extend(oplog)
        return oplog

    # -- repair ---------------------------------------------------------------

    def fail_and_repair(self, node: int) -> TransferLog:
        """Erase a column, rebuild it from survivors, count every download.

        A physical symbol is charged once even when several recovery steps
        read it; the rebuilt column must match the lost one bitwise.
        """
        self._check_node(node)
        lost = self.columns[node]
        fetched: dict[tuple[int, int], int] = {}

        def fetch(src: int, rows) -> list[int]:
            if src == node:
                raise NodeOutOfRangeError(f"cannot download from failed node {src}")
            self._check_node(src)
            out = []
            for r in rows:
                key = (src, r)
                if key not in fetched:
                    fetched[key] = self.columns[src][r]
                out.append(fetched[key])
            return out

        restored = self.code.repair(node, fetch)
        if restored != lost:
            raise RepairMismatchError(f"repair of node {node} altered the column")
        self.columns[node] = restored

        oplog = TransferLog()
        per_src: dict[int, int] = {}
        for src, _ in fetched:
            per_src[src] = per_src.get(src, 0) + 1
        for src in sorted(per_src):
            oplog.add("repair", src, node, per_src[src])
        self.log.extend(oplog)
        return oplog

    # -- verification ------------------------------------------------------------

    def audit(self) -> AuditResult:
        """Recompute the encode of the ground truth and compare symbol-for-symbol."""
        expect = self.code.encode(self.truth)
        for j, (got, want) in enumerate(zip(self.columns, expect)):
            for r, (a, b) in enumerate(zip(got, want)):
                if a != b:
                    return AuditResult(False, (j, r), f"node {j} row {r}: {a} != {b}")
        return AuditResult(True)

    def _assert_consistent(self, op: str) -> None:
        result = self.audit()
        if not result.ok:
            raise ClusterStateError(f"after {op}: {result.detail}")

    # -- workloads ----------------------------------------------------------------

    def run_workload(self, updates: int, repairs: int, seed: int = 0) -> dict:
        """Round-robin updates with random fills, then random-node repairs.

        Returns exact measured statistics: mean symbols per update (a
        Fraction), per-node update totals, and per-repair download counts.
        """
        rng = random.Random(seed)
        per_node = [0] * self.n
        total = 0
        for t in range(updates):
            node = t % self.n
            fresh = [rng.randrange(self.field.q) for _ in range(self.code.m[node])]
            sent = self.apply_update(node, fresh).total()
            per_node[node] += sent
            total += sent
        repair_counts = []
        for _ in range(repairs):
            node = rng.randrange(self.n)
            repair_counts.append((node, self.fail_and_repair(node).total()))
        return {
            "updates": updates,
            "repairs": repairs,
            "total_update_symbols": total,
            "mean_update_symbols": Fraction(total, updates) if updates else Fraction(0),
            "per_node_update_symbols": per_node,
            "repair_downloads": repair_counts,
            "audit_ok": self.audit().ok,
        }

"""Command-line front end: bounds, construction, codec, simulation, demos.

Node indices on the command line are 0-based.  Codeword files hold one
column per line, each symbol a fixed-width 4-digit hex integer.  Machine
output is available behind --json; exit status is 0 on success, 1 on a
verification failure, 2 on a usage error.  The UBCODE_SEED environment
variable supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from .finite_field import GF
from .code_model import (
    bounds,
    code_from_json,
    code_to_json,
    feasible,
    redundancy,
    update_bandwidth,
    update_complexity,
    verify_mds,
)
from .construct import InternalRankFailureError, build_mrmub, build_mub, fig1b, fig3
from .transform import TransformedCode, iterate_transform
from .cluster import Cluster, ClusterStateError, RepairMismatchError
from .linalg import rank

SYMBOL_WIDTH = 4  # hex digits, enough for any element of a q <= 2^16 field


def default_seed() -> int:
    env = os.environ.get("UBCODE_SEED")
    return int(env) if env else 0


def frac_str(x: Fraction) -> str:
    return str(x)


# -- codeword files ------------------------------------------------------------


def dump_columns(columns: list[list[int]]) -> str:
    return "\n".join(
        "".join(format(v, f"0{SYMBOL_WIDTH}x") for v in col) for col in columns
    ) + "\n"


def parse_columns(text: str, col_lens) -> list[list[int]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != len(col_lens):
        raise ValueError(f"expected {len(col_lens)} columns, found {len(lines)}")
    columns = []
    for ln, want in zip(lines, col_lens):
        if len(ln) != want * SYMBOL_WIDTH:
            raise ValueError(f"column line has {len(ln)} chars, expected {want * SYMBOL_WIDTH}")
        columns.append(
            [int(ln[i * SYMBOL_WIDTH : (i + 1) * SYMBOL_WIDTH], 16) for i in range(want)]
        )
    return columns


# -- spec files -----------------------------------------------------------------


def save_spec(code, path: str) -> None:
    if isinstance(code, TransformedCode):
        base = code.base
        while isinstance(base, TransformedCode):
            base = base.base
        doc = code_to_json(base.as_irregular_code())
        doc["transform"] = {"pairs": [list(p) for p in code.pairs], "g": code.g}
    else:
        doc = code_to_json(code.as_irregular_code())
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_spec(path: str):
    with open(path) as fh:
        doc = json.load(fh)
    code = code_from_json(doc)
    if "transform" in doc:
        g = doc["transform"]["g"]
        for pair in doc["transform"]["pairs"]:
            code = TransformedCode(code, tuple(pair), g)
    return code


def random_data(code, seed: int) -> list[list[int]]:
    rng = random.Random(seed)
    return [[rng.randrange(code.field.q) for _ in range(mi)] for mi in code.m]


# -- subcommands -----------------------------------------------------------------


def parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v != ""]


def cmd_bounds(args) -> int:
    rep = bounds(args.n, args.k, parse_int_list(args.m))
    payload = {
        "n": rep.n,
        "k": rep.k,
        "m": list(rep.m),
        "water_level": rep.water_level,
        "min_redundancy": rep.min_redundancy,
        "min_update_bandwidth": frac_str(rep.min_update_bandwidth),
        "min_redundancy_at_min_bandwidth": rep.min_redundancy_at_min_bandwidth,
        "update_complexity_bound": frac_str(rep.update_complexity_bound),
        "redundancy_profile": list(rep.redundancy_profile),
        "bandwidth_profile": (
            None if rep.bandwidth_profile is None else list(rep.bandwidth_profile)
        ),
        "bandwidth_assignment": [list(r) for r in rep.bandwidth_assignment],
    }
    if args.json:
        print(json.dumps(payload, indent=1))
        return 0
    print(f"water level          mu      = {rep.water_level}")
    print(f"min redundancy       R_min   = {rep.min_redundancy}")
    print(f"min update bandwidth         = {frac_str(rep.min_update_bandwidth)}")
    if rep.min_redundancy_at_min_bandwidth is not None:
        print(f"min redundancy at min bw     = {rep.min_redundancy_at_min_bandwidth}")
    else:
        print("min redundancy at min bw     = open (k does not divide every m_i)")
    print(f"update complexity bound      = {frac_str(rep.update_complexity_bound)}")
    print(f"redundancy profile           = {list(rep.redundancy_profile)}")
    if rep.bandwidth_profile is not None:
        print(f"bandwidth-optimal profile    = {list(rep.bandwidth_profile)}")
    print("bandwidth assignment:")
    for row in rep.bandwidth_assignment:
        print("  " + " ".join(str(v) for v in row))
    return 0


def cmd_construct(args) -> int:
    m_list = parse_int_list(args.m)
    field = GF(args.q) if args.q else None
    if args.kind == "mrmub":
        if any(v != m_list[0] for v in m_list):
            print("mrmub construction needs a uniform data profile", file=sys.stderr)
            return 2
        code = build_mrmub(args.n, args.k, m_list[0], field=field)
    else:
        code = build_mub(args.n, args.k, m_list, field=field)
    if args.transform_rounds:
        code = iterate_transform(code, args.transform_rounds)
    save_spec(code, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_encode(args) -> int:
    code = load_spec(args.spec)
    if args.data:
        with open(args.data) as fh:
            raw = [ln for ln in fh.read().splitlines() if ln.strip()]
        data = [
            [int(ln[i * SYMBOL_WIDTH : (i + 1) * SYMBOL_WIDTH], 16) for i in range(mi)]
            for ln, mi in zip(raw, code.m)
        ]
    else:
        data = random_data(code, args.seed)
    columns = code.encode(data)
    with open(args.out, "w") as fh:
        fh.write(dump_columns(columns))
    print(f"wrote {args.out}")
    return 0


def cmd_decode(args) -> int:
    code = load_spec(args.spec)
    with open(args.infile) as fh:
        columns = parse_columns(fh.read(), code.col_lens)
    erased = set(parse_int_list(args.erased))
    known = {j: columns[j] for j in range(code.n) if j not in erased}
    restored = code.decode_columns(known)
    for j in range(code.n):
        if j not in erased and restored[j] != columns[j]:
            print(f"surviving column {j} inconsistent with decode", file=sys.stderr)
            return 1
    with open(args.out, "w") as fh:
        fh.write(dump_columns(restored))
    print(f"recovered {sorted(erased)} -> {args.out}")
    return 0


def _cluster_from_files(args):
    code = load_spec(args.spec)
    with open(args.infile) as fh:
        columns = parse_columns(fh.read(), code.col_lens)
    data = [[columns[j][r] for r in code.data_rows(j)] for j in range(code.n)]
    cluster = Cluster(code, data=data)
    if cluster.columns != columns:
        raise ValueError("codeword file is not a valid codeword of this spec")
    return cluster


def cmd_update(args) -> int:
    try:
        cluster = _cluster_from_files(args)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.data:
        new_data = parse_int_list(args.data)
    else:
        rng = random.Random(args.seed)
        new_data = [
            rng.randrange(cluster.field.q) for _ in range(cluster.code.m[args.node])
        ]
    log = cluster.apply_update(args.node, new_data)
    for line in log.lines():
        print(line)
    print(f"total,{log.total()}")
    with open(args.out, "w") as fh:
        fh.write(dump_columns(cluster.columns))
    return 0


def cmd_repair(args) -> int:
    try:
        cluster = _cluster_from_files(args)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        log = cluster.fail_and_repair(args.node)
    except RepairMismatchError as exc:
        print(exc, file=sys.stderr)
        return 1
    for line in log.lines():
        print(line)
    print(f"total,{log.total()}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dump_columns(cluster.columns))
    return 0


def cmd_verify(args) -> int:
    code = load_spec(args.spec)
    view = code.as_irregular_code()
    checks: list[tuple[str, bool, str]] = []

    grid, average = update_bandwidth(view)
    factor_ok = True
    detail = ""
    for i in range(view.n):
        for j in range(view.n):
            if i == j:
                continue
            a_m, b_m = view.A[i][j], view.B[i][j]
            if (
                a_m.rows != grid[i][j]
                or rank(a_m) != a_m.rows
                or rank(b_m) != b_m.cols
                or b_m.cols != a_m.rows
            ):
                factor_ok = False
                detail = f"factor pair at [{i}][{j}] is not a minimal full-rank pair"
    checks.append(("factor-grids", factor_ok, detail))

    mds = verify_mds(code)
    checks.append(
        (
            "mds",
            mds.is_mds,
            mds.detail if not mds.is_mds else f"insufficient {mds.insufficient_subset}",
        )
    )

    feas = feasible(view.n, view.k, view.m, view.p, grid)
    checks.append(("feasibility", feas.feasible, feas.detail))

    try:
        cluster = Cluster(code, seed=default_seed())
        cluster.run_workload(updates=2 * view.n, repairs=1, seed=default_seed())
        checks.append(("workload-audit", cluster.audit().ok, ""))
    except (RepairMismatchError, ClusterStateError, InternalRankFailureError) as exc:
        checks.append(("workload-audit", False, str(exc)))

    payload = {
        "update_bandwidth": frac_str(average),
        "redundancy": redundancy(view),
        "checks": [
            {"name": name, "ok": ok, "detail": det} for name, ok, det in checks
        ],
    }
    if args.json:
        print(json.dumps(payload, indent=1))
    else:
        for name, ok, det in checks:
            mark = "ok" if ok else "FAIL"
            print(f"{name:16s} {mark}" + (f"  {det}" if det else ""))
    return 0 if all(ok for _, ok, _ in checks) else 1


def cmd_simulate(args) -> int:
    if args.spec:
        code = load_spec(args.spec)
    else:
        code = fig1b()
    cluster = Cluster(code, seed=args.seed)
    result = cluster.run_workload(args.updates, args.repairs, seed=args.seed)
    view = code.as_irregular_code()
    theory = bounds(view.n, view.k, view.m)
    payload = {
        "updates": result["updates"],
        "repairs": result["repairs"],
        "mean_update_symbols": frac_str(result["mean_update_symbols"]),
        "min_update_bandwidth": frac_str(theory.min_update_bandwidth),
        "update_complexity": frac_str(update_complexity(view)),
        "per_node_update_symbols": result["per_node_update_symbols"],
        "repair_downloads": result["repair_downloads"],
        "audit_ok": result["audit_ok"],
    }
    if args.json:
        print(json.dumps(payload, indent=1))
        return 0 if result["audit_ok"] else 1
    print(f"updates              = {payload['updates']}")
    print(f"repairs              = {payload['repairs']}")
    print(f"measured mean update = {payload['mean_update_symbols']}")
    print(f"optimal bandwidth    = {payload['min_update_bandwidth']}")
    print(f"update complexity    = {payload['update_complexity']}")
    print(f"per-node update sym  = {payload['per_node_update_symbols']}")
    for node, count in payload["repair_downloads"]:
        print(f"repair node {node}: {count} symbols")
    print(f"audit                = {'pass' if payload['audit_ok'] else 'FAIL'}")
    return 0 if result["audit_ok"] else 1


def symbol_names(code) -> list[str]:
    names = []
    for i, mi in enumerate(code.m):
        for l in range(mi):
            names.append(f"x{i + 1},{l + 1}")
    return names


def render_cells(code) -> list[list[str]]:
    names = symbol_names(code)
    maps = code.column_maps()
    grid = []
    for j in range(code.n):
        col = []
        for r in range(code.col_lens[j]):
            row = maps[j].data[r]
            terms = []
            for c, v in enumerate(row):
                if v == 0:
                    continue
                terms.append(names[c] if v == 1 else f"{v}*{names[c]}")
            col.append("+".join(terms) if terms else "0")
        grid.append(col)
    return grid


def render_intermediates(built) -> list[str]:
    names = symbol_names(built)
    lines = []
    offs = [0]
    for mi in built.m:
        offs.append(offs[-1] + mi)
    for i in range(built.n):
        if built.m[i] == 0:
            for d in range(1, built.n):
                lines.append(f"p[{i}->{(i + d) % built.n}] = ()")
            continue
        for j, _vec in built.intermediates(i, [0] * built.m[i]):
            a_map = built.code.A[i][j]
            comps = []
            for r in range(a_map.rows):
                terms = [
                    (names[offs[i] + c] if v == 1 else f"{v}*{names[offs[i] + c]}")
                    for c, v in enumerate(a_map.data[r])
                    if v
                ]
                comps.append("+".join(terms) if terms else "0")
            lines.append(f"p[{i}->{j}] = (" + "; ".join(comps) + ")")
    return lines


def cmd_demo(args) -> int:
    built = fig1b() if args.which == "fig1b" else fig3()
    view = built.code
    grid, average = update_bandwidth(view)
    cells = render_cells(built)
    height = max(built.col_lens)
    print(f"demo {args.which}: (n={built.n}, k={built.k}, m={list(built.m)}) "
          f"over GF({built.field.q})")
    print("stored grid (column j of the array is node j):")
    widths = [max(len(cells[j][r]) for r in range(len(cells[j]))) for j in range(built.n)]
    for r in range(height):
        row = []
        for j in range(built.n):
            cell = cells[j][r] if r < len(cells[j]) else ""
            row.append(cell.ljust(widths[j]))
        print("  | " + " | ".join(row) + " |")
    print("intermediate vectors:")
    for line in render_intermediates(built):
        print("  " + line)
    print(f"update bandwidth     = {frac_str(average)}")
    print(f"redundancy           = {redundancy(view)}")
    print(f"update complexity    = {frac_str(update_complexity(view))}")
    cluster = Cluster(built, seed=default_seed())
    repair_counts = []
    for node in range(built.n):
        repair_counts.append(cluster.fail_and_repair(node).total())
    print(f"repair downloads     = {repair_counts}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ubcode",
        description="irregular array codes with minimum update bandwidth",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="closed-form optima for (n, k, m)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", required=True, help="comma-separated data profile")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("construct", help="build a code and write its spec file")
    p.add_argument("--kind", choices=["mrmub", "mub"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", required=True, help="comma-separated data profile")
    p.add_argument("--q", type=int, default=0, help="field size override")
    p.add_argument("--transform-rounds", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("encode", help="encode data into a codeword file")
    p.add_argument("--spec", required=True)
    p.add_argument("--data", help="data file (one node per line, hex symbols)")
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="recover erased columns of a codeword file")
    p.add_argument("--spec", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--erased", required=True, help="comma-separated node indices")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("update", help="update one node's data vector")
    p.add_argument("--spec", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--data", help="comma-separated new data vector")
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("repair", help="fail one node and rebuild it")
    p.add_argument("--spec", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("verify", help="run all checks against a spec file")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="seeded workload with symbol accounting")
    p.add_argument("--spec")
    p.add_argument("--updates", type=int, default=8)
    p.add_argument("--repairs", type=int, default=1)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("demo", help="rebuild a worked-example code and print it")
    p.add_argument("which", choices=["fig1b", "fig3"])
    p.set_defaults(func=cmd_demo)

    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (RepairMismatchError, ClusterStateError, InternalRankFailureError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

import json
from pathlib import Path

import pytest

from ubcode.cli import dump_columns, parse_columns, run

GOLDEN = Path(__file__).parent / "golden"


def run_capture(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# -- bounds -----------------------------------------------------------------------


def test_bounds_human(capsys):
    code, out, _ = run_capture(capsys, ["bounds", "--n", "4", "--k", "2", "--m", "4,2,2,0"])
    assert code == 0
    assert "mu      = 4" in out
    assert "R_min   = 8" in out
    assert "min update bandwidth         = 3" in out
    assert "min redundancy at min bw     = 11" in out


def test_bounds_json(capsys):
    code, out, _ = run_capture(
        capsys, ["bounds", "--n", "4", "--k", "2", "--m", "2,2,2,2", "--json"]
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["min_update_bandwidth"] == "3"
    assert doc["min_redundancy"] == 8
    assert doc["min_redundancy_at_min_bandwidth"] == 8


def test_bounds_open_case(capsys):
    code, out, _ = run_capture(capsys, ["bounds", "--n", "4", "--k", "2", "--m", "3,2,2,0"])
    assert code == 0
    assert "open" in out


# -- construct / verify round trips ---------------------------------------------------


@pytest.mark.parametrize(
    "argv_extra",
    [
        ["--kind", "mrmub", "--n", "4", "--k", "2", "--m", "2,2,2,2"],
        ["--kind", "mub", "--n", "4", "--k", "2", "--m", "4,2,2,0"],
        ["--kind", "mrmub", "--n", "4", "--k", "2", "--m", "2,2,2,2",
         "--transform-rounds", "1"],
        ["--kind", "mrmub", "--n", "4", "--k", "2", "--m", "2,2,2,2",
         "--transform-rounds", "2"],
    ],
)
def test_construct_verify_round_trip(tmp_path, capsys, argv_extra):
    spec = tmp_path / "spec.json"
    code, out, err = run_capture(capsys, ["construct", *argv_extra, "--out", str(spec)])
    assert code == 0, err
    code, out, err = run_capture(capsys, ["verify", str(spec)])
    assert code == 0, out + err
    assert "FAIL" not in out


def test_verify_corrupted_spec_fails(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    run_capture(capsys, [
        "construct", "--kind", "mrmub", "--n", "4", "--k", "2", "--m", "2,2,2,2",
        "--out", str(spec),
    ])
    doc = json.loads(spec.read_text())
    # zero out one sender-side matrix: the code loses its MDS property
    block = doc["matrices"]["A"][0][1]
    block["entries"] = [[0 for _ in row] for row in block["entries"]]
    spec.write_text(json.dumps(doc))
    code, out, err = run_capture(capsys, ["verify", str(spec)])
    assert code == 1
    assert "FAIL" in out


def test_usage_error_exit_2(capsys):
    assert run(["bounds", "--n", "4"]) == 2
    assert run(["nonsense"]) == 2


# -- codeword file flows -----------------------------------------------------------------


@pytest.fixture
def spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    assert run([
        "construct", "--kind", "mub", "--n", "4", "--k", "2", "--m", "4,2,2,0",
        "--out", str(spec),
    ]) == 0
    capsys.readouterr()
    return spec


def test_encode_decode_flow(tmp_path, capsys, spec_file):
    cw = tmp_path / "codeword.txt"
    code, *_ = run_capture(capsys, [
        "encode", "--spec", str(spec_file), "--seed", "5", "--out", str(cw)
    ])
    assert code == 0
    recovered = tmp_path / "recovered.txt"
    code, out, err = run_capture(capsys, [
        "decode", "--spec", str(spec_file), "--in", str(cw),
        "--erased", "0,1", "--out", str(recovered),
    ])
    assert code == 0, err
    assert recovered.read_text() == cw.read_text()


def test_update_then_repair_flow(tmp_path, capsys, spec_file):
    cw = tmp_path / "codeword.txt"
    run_capture(capsys, ["encode", "--spec", str(spec_file), "--seed", "7", "--out", str(cw)])
    updated = tmp_path / "updated.txt"
    code, out, err = run_capture(capsys, [
        "update", "--spec", str(spec_file), "--in", str(cw),
        "--node", "0", "--data", "1,2,3,4", "--out", str(updated),
    ])
    assert code == 0, err
    assert "update,0,1,2" in out and "total,6" in out
    assert updated.read_text() != cw.read_text()
    code, out, err = run_capture(capsys, [
        "repair", "--spec", str(spec_file), "--in", str(updated), "--node", "2",
    ])
    assert code == 0, err
    assert "total," in out


def test_transformed_spec_update_and_repair_flow(tmp_path, capsys):
    spec = tmp_path / "tspec.json"
    assert run([
        "construct", "--kind", "mrmub", "--n", "4", "--k", "2", "--m", "2,2,2,2",
        "--transform-rounds", "1", "--out", str(spec),
    ]) == 0
    cw = tmp_path / "cw.txt"
    assert run(["encode", "--spec", str(spec), "--seed", "3", "--out", str(cw)]) == 0
    capsys.readouterr()
    out2 = tmp_path / "cw2.txt"
    code, out, err = run_capture(capsys, [
        "update", "--spec", str(spec), "--in", str(cw),
        "--node", "2", "--seed", "4", "--out", str(out2),
    ])
    assert code == 0, err
    assert "total,6" in out  # 2 symbols on each of 3 edges
    code, out, err = run_capture(capsys, [
        "repair", "--spec", str(spec), "--in", str(out2), "--node", "3",
    ])
    assert code == 0, err
    assert "total,12" in out  # paired node at the repair optimum


def test_update_rejects_corrupt_codeword(tmp_path, capsys, spec_file):
    cw = tmp_path / "codeword.txt"
    run_capture(capsys, ["encode", "--spec", str(spec_file), "--seed", "9", "--out", str(cw)])
    lines = cw.read_text().splitlines()
    # flip one parity symbol of node 0 (last 4 hex digits of line 0)
    first = lines[0]
    tweak = "0001" if first[-4:] == "0000" else "0000"
    lines[0] = first[:-4] + tweak
    cw.write_text("\n".join(lines) + "\n")
    code, out, err = run_capture(capsys, [
        "update", "--spec", str(spec_file), "--in", str(cw),
        "--node", "0", "--data", "1,2,3,4", "--out", str(cw),
    ])
    assert code == 1
    assert "not a valid codeword" in err


def test_columns_round_trip_format():
    cols = [[0, 1, 255], [4096, 2]]
    text = dump_columns(cols)
    assert text == "0000000100ff\n10000002\n"
    assert parse_columns(text, [3, 2]) == cols


# -- simulate ------------------------------------------------------------------------


def test_simulate_deterministic(tmp_path, capsys, spec_file):
    argv = ["simulate", "--spec", str(spec_file), "--updates", "12", "--repairs", "2",
            "--seed", "3", "--json"]
    code1, out1, _ = run_capture(capsys, argv)
    code2, out2, _ = run_capture(capsys, argv)
    assert code1 == code2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["mean_update_symbols"] == "3"
    assert doc["audit_ok"] is True


def test_simulate_env_seed(monkeypatch, capsys, spec_file):
    monkeypatch.setenv("UBCODE_SEED", "77")
    code1, out1, _ = run_capture(
        capsys, ["simulate", "--spec", str(spec_file), "--updates", "4", "--json"]
    )
    monkeypatch.delenv("UBCODE_SEED")
    code2, out2, _ = run_capture(
        capsys,
        ["simulate", "--spec", str(spec_file), "--updates", "4", "--seed", "77", "--json"],
    )
    assert out1 == out2


def test_simulate_default_fixture(capsys):
    code, out, _ = run_capture(capsys, ["simulate", "--updates", "8", "--repairs", "1"])
    assert code == 0
    assert "measured mean update = 3" in out


# -- demos ----------------------------------------------------------------------------


def test_demo_fig1b_matches_golden(capsys):
    code, out, _ = run_capture(capsys, ["demo", "fig1b"])
    assert code == 0
    assert out == (GOLDEN / "demo_fig1b.txt").read_text()


def test_demo_fig3_matches_golden(capsys):
    code, out, _ = run_capture(capsys, ["demo", "fig3"])
    assert code == 0
    assert out == (GOLDEN / "demo_fig3.txt").read_text()

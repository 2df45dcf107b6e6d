import json

import pytest

from hirota_kdv import cli
from hirota_kdv.dynamics import ReductionSpec, State, kdv_step
from tests.test_quiver import BEX_T2, BHAT_T2


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exchange_prints_printed_matrices(capsys):
    code, out, _ = run(capsys, "exchange", "--family", "t2", "--N", "4", "--M", "3")
    d = json.loads(out)
    assert code == 0
    assert d["B"] == BEX_T2 and d["reduced"] == BHAT_T2 and d["period_one"]


def test_ubracket(capsys):
    code, out, _ = run(capsys, "ubracket", "--N", "5", "--M", "3")
    d = json.loads(out)
    assert code == 0 and d["a"] == ["0", "0", "1", "0", "-1"] and d["route"] == "relations"


def test_ubracket_tableau(capsys):
    code, out, _ = run(capsys, "ubracket", "--N", "16", "--M", "9", "--tableau")
    assert code == 0 and "(24)" in out


def test_iterate_matches_library(capsys):
    code, out, _ = run(capsys, "iterate", "--system", "kdv", "--N", "4", "--M", "3", "--alpha=-1/2",
                       "--steps", "3", "--init", "1,2,3,4,5,6,7")
    assert code == 0
    d = json.loads(out)
    spec = ReductionSpec(4, 3, "-1/2")
    s = State("v", [1, 2, 3, 4, 5, 6, 7])
    for _ in range(3):
        s = kdv_step(spec, s)
    assert d["values"][-1] == s.to_strings()


@pytest.mark.parametrize("argv", [
    ["exchange", "--N", "4", "--M", "2"],
    ["ubracket", "--N", "3", "--M", "3"],
    ["iterate", "--system", "w", "--N", "4", "--M", "3", "--init", "1,1,1,1,1,1"],
    ["iterate", "--system", "kdv", "--N", "4", "--M", "3", "--init", "1,1"],
    ["verify", "--suite", "nonsense"],
    ["iterate", "--init", "1/0"],
])
def test_bad_input_exits_2(capsys, argv):
    assert cli.main(argv) == 2


def test_singular_orbit_exits_1(capsys):
    code, _, err = run(capsys, "iterate", "--system", "kdv", "--N", "4", "--M", "3", "--init", "1,1,1,0,1,1,1")
    assert code == 1 and "singular" in err


def test_verify_writes_certificates(capsys, tmp_path):
    out = tmp_path / "certs.jsonl"
    code, _, err = run(capsys, "verify", "--suite", "cluster", "--N", "5", "--M", "2", "--out", str(out))
    assert code == 0
    certs = [json.loads(line) for line in out.read_text().splitlines()]
    assert certs and all(c["result"] == "pass" for c in certs)
    assert "pass" in err.lower()


def test_verify_poisson_suite_odd(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "poisson", "--N", "4", "--M", "3", "--samples", "2")
    assert code == 0
    checks = {json.loads(line)["check"] for line in out.splitlines()}
    assert {"jacobi", "poisson_map", "lifted_recurrence"} <= checks


def test_verify_flags_m1(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "poisson", "--N", "4", "--M", "1", "--samples", "1")
    assert code == 0
    notes = [n for line in out.splitlines() for n in json.loads(line).get("notes", [])]
    assert any("M = 1" in n for n in notes)


def test_verify_even53_reports_the_sign_conflict(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "even53", "--N", "5", "--M", "3", "--samples", "2")
    certs = [json.loads(line) for line in out.splitlines()]
    failed = [c for c in certs if c["result"] != "pass"]
    assert code == 1
    assert len(failed) == 1 and failed[0]["family"] == "KDV3->W3_53"


def test_wave_csv(capsys, tmp_path):
    out = tmp_path / "wave.csv"
    code, _, _ = run(capsys, "wave", "--N", "4", "--M", "3", "--alpha", "-1", "--init", "1,1,1,1,1,1,3",
                     "--kmax", "5", "--lmax", "4", "--offset", "10", "--decimal", "4", "--out", str(out))
    lines = out.read_text().splitlines()
    assert code == 0 and lines[0] == "k,l,value" and len(lines) == 1 + 6 * 5


def test_sweep_small(capsys):
    code, out, _ = run(capsys, "sweep", "--max-sum", "8")
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert {(r["N"], r["M"]) for r in rows} >= {(2, 1), (3, 1), (4, 3), (5, 3), (7, 1)}
    assert {r["route"] for r in rows if (r["N"], r["M"]) == (3, 1)} == {"preservation"}


def test_coprime_pairs():
    pairs = cli.coprime_pairs(7)
    assert (4, 3) in pairs and (4, 2) not in pairs and (3, 3) not in pairs
    assert all(N > M for N, M in pairs)

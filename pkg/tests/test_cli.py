import json
from fractions import Fraction

import pytest

from betatakagi.cli import main
from betatakagi.takagi import takagi_classical


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def doc(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0, out
    d = json.loads(out)
    assert d["schema_version"] == 1 and d["command"] == argv[0]
    return d["result"]


def test_digits_examples(capsys):
    r = doc(capsys, "digits", "--beta", "2", "--x", "1/3", "--depth", "8")
    assert r["digits"] == "01010101" and r["certified"] is True
    r = doc(capsys, "digits", "--beta", "golden", "--x", "1", "--depth", "4")
    assert (r["digits"], r["certified"], r["simple"]) == ("1100", True, "yes")
    r = doc(capsys, "digits", "--beta", "2", "--x", "[0,1,1]", "--depth", "5")
    assert r["digits"] == "01100" and r["source"] == "user-supplied"


def test_exit_codes(capsys):
    code, out, _ = run(capsys, "digits", "--beta", "2.5", "--x", "1/3")
    assert code == 3 and json.loads(out)["error"]["error"] == "domain_error"
    code, out, _ = run(capsys, "eval", "--beta", "golden", "--x", "0.3", "--depth", "2000", "--precision-bits", "128")
    assert code == 4
    code, out, _ = run(capsys, "witness", "--beta", "2", "--x", "0", "--n-max", "3")
    assert code in (3, 7)
    code, _, err = run(capsys, "digits", "--beta", "2")
    assert code == 2 and "usage" in json.loads(err)["error"]["error"]
    code, _, err = run(capsys, "clt", "--beta", "2", "--workers", "0")
    assert code == 2


def test_eval_examples(capsys):
    r = doc(capsys, "eval", "--beta", "2", "--x", "1/3")
    assert abs(float(r["value"]["value"]) - 2 / 3) < 1e-15
    assert r["routes_agree"] and r["classical_agree"]
    assert float(r["classical_delta"]) <= float(r["value"]["radius"]) + float(r["classical"]["radius"])
    r = doc(capsys, "eval", "--beta", "2", "--x", "0")
    assert float(r["value"]["value"]) == 0
    r = doc(capsys, "eval", "--beta", "golden", "--x", "0.25", "--depth", "200")
    assert float(r["value"]["radius"]) < 1e-20 and r["routes_agree"]


def test_measure_golden(capsys):
    r = doc(capsys, "measure", "--beta", "golden")
    phi = (1 + 5**0.5) / 2
    assert abs(float(r["F"]["value"]) - (1 + 1 / phi**2)) < 1e-12
    assert abs(float(r["M"]["value"]) - 1 / (1 + phi**2)) < 1e-12


def test_curve_matches_classical(capsys):
    code, out, _ = run(capsys, "curve", "--beta", "2", "--points", "1024", "--format", "csv")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "x,value,radius,depth" and len(rows) == 1025
    for i, row in enumerate(rows[1:]):
        _, v, rad, _ = row.split(",")
        ref = takagi_classical(Fraction(i, 1023), 200, 256)
        assert abs(float(v) - float(ref.value)) <= float(rad) + float(ref.radius) + 1e-17


def test_witness_quotient_column(capsys):
    r = doc(capsys, "witness", "--beta", "2", "--x", "1/3", "--n-max", "10")
    assert len(r["rows"]) == 10
    assert all(float(row["quotient_direct"]) == 2 for row in r["rows"])


def test_lemma_commands(capsys):
    r = doc(capsys, "lemma2", "--beta", "2", "--x", "1/3", "--y", "1/4")
    assert r["N"] == 4 and r["holds"] is True
    r = doc(capsys, "lemma3", "--beta", "2", "--x", "1/3", "--n-max", "20")
    assert (r["n_max"], r["count_A"], r["count_B"], r["last_event"]) == (20, 1, 1, 1)


def test_out_file(tmp_path, capsys):
    path = tmp_path / "digits.json"
    code, out, _ = run(capsys, "digits", "--beta", "2", "--x", "1/3", "--depth", "4", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["result"]["digits"] == "0101"


@pytest.mark.parametrize(
    "argv",
    [
        ["holder", "--beta", "golden", "--x", "0.3", "--samples", "40", "--alpha", "0.5,0.9", "--seed", "3"],
        ["clt", "--beta", "2", "--n", "200", "--m", "1500", "--seed", "3"],
        ["curve", "--beta", "golden", "--points", "64", "--format", "csv"],
        ["witness", "--beta", "golden", "--x", "0.3", "--n-max", "30"],
    ],
)
def test_byte_identical_across_workers(argv, capsys):
    outs = []
    for w in ("1", "3", "1"):
        code, out, _ = run(capsys, *argv, "--workers", w)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]

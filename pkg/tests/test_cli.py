import json
import math

import pytest

from spectral_bounds.cli import (EXIT_COMPUTE, EXIT_FAIL, EXIT_INPUT, EXIT_OK, CliConfig, InputError, main,
                                 parse_k_range, run)
from spectral_bounds.geometry import Disk
from spectral_bounds.spectra import analytic_spectrum

SQUARE_SPEC = '{"type": "box", "lengths": [1, 1]}'


@pytest.fixture
def square_file(tmp_path):
    p = tmp_path / "square.json"
    p.write_text(SQUARE_SPEC)
    return str(p)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_geometry_disk(capsys):
    code, out = run_json(capsys, ["geometry", "--domain", '{"type":"disk","radius":1}'])
    assert code == EXIT_OK and out["volume"] == math.pi


def test_spectrum_square_neumann(capsys, square_file):
    code, out = run_json(capsys, ["spectrum", "--domain", square_file, "--bc", "neumann", "--count", "5"])
    pi2 = math.pi**2
    assert code == EXIT_OK and out["values"] == pytest.approx([0, pi2, pi2, 2 * pi2, 4 * pi2], rel=1e-15)


def test_verify_square_exit_zero(capsys, square_file):
    assert main(["verify", "--domain", square_file, "--bc", "dirichlet", "--k", "1:100"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["failed"] == 0


def test_verify_exit_one_on_violation(capsys, tmp_path, square_file):
    bogus = tmp_path / "spec.json"
    bogus.write_text(json.dumps({"bc": "dirichlet", "values": [0.5 * j for j in range(1, 60)]}))
    code = main(["verify", "--domain", square_file, "--k", "1:10", "--theorems", "bly", "--spectrum", str(bogus)])
    assert code == EXIT_FAIL
    capsys.readouterr()


def test_malformed_inputs_exit_two(capsys, square_file):
    assert main(["geometry", "--domain", '{"type": "hexagon"}']) == EXIT_INPUT
    assert main(["geometry", "--domain", "{not json"]) == EXIT_INPUT
    assert main(["bounds", "--domain", square_file, "--k", "5:1"]) == EXIT_INPUT
    assert main(["verify", "--domain", square_file, "--theorems", "thm9.9"]) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_computation_failure_exit_three(capsys, square_file):
    assert main(["riesz", "--domain", square_file, "--count", "5", "--z", "1000"]) == EXIT_COMPUTE
    assert "computation failed" in capsys.readouterr().err


def test_riesz_table(capsys, square_file):
    code, out = run_json(capsys, ["riesz", "--domain", square_file, "--count", "20", "--z", "30", "--k", "3",
                                  "--w", "3"])
    got = {row["functional"]: row["value"] for row in out}
    assert got["counting"] == 1 and got["legendre"] == pytest.approx(12 * math.pi**2)
    assert got["riesz1"] == pytest.approx(30 - 2 * math.pi**2)


def test_seventeen_digit_round_trip(capsys, square_file):
    code, out = run_json(capsys, ["spectrum", "--domain", '{"type":"disk","radius":1}', "--count", "30"])
    want = analytic_spectrum(Disk(1.0), "dirichlet", 30).values
    assert [float(v) for v in out["values"]] == list(want)


def test_geometry_overrides_reproduce_bounds(capsys, tmp_path, square_file):
    argv = ["bounds", "--domain", '{"type":"disk","radius":1}', "--k", "1,10,100", "--z", "50",
            "--theorems", "thm2.4,thm2.9,cor2.10,thm2.11"]
    _, direct = run_json(capsys, argv)
    _, geom = run_json(capsys, ["geometry", "--domain", '{"type":"disk","radius":1}'])
    g = tmp_path / "geom.json"
    g.write_text(json.dumps(geom))
    _, again = run_json(capsys, argv + ["--geometry", str(g)])
    assert direct == again


def test_csv_and_out(tmp_path, square_file, capsys):
    out = tmp_path / "r.csv"
    assert main(["verify", "--domain", square_file, "--k", "1:5", "--theorems", "bly", "--format", "csv",
                 "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "theorem_id,query,bound,reference,margin,applicable,pass"
    assert len(lines) == 6 and all(line.endswith("true") for line in lines[1:])


def test_report_writes_tsv(tmp_path, square_file, capsys):
    out = tmp_path / "rep.txt"
    assert main(["report", "--domain", square_file, "--k", "1:20", "--theorems", "bly,thm2.4",
                 "--out", str(out)]) == EXIT_OK
    tsv = out.with_suffix(".tsv").read_text().splitlines()
    assert tsv[0].split("\t")[:2] == ["k", "average"] and len(tsv) == 21


def test_parse_k_range_and_config():
    assert parse_k_range("1:10:3") == [1, 4, 7, 10]
    assert parse_k_range("2,5") == [2, 5]
    with pytest.raises(InputError):
        parse_k_range("a:b")
    code, text = run(CliConfig("geometry", domain=None))
    assert code == EXIT_INPUT
    with pytest.raises(InputError):
        CliConfig("dance")

import io
import json
import math

import numpy as np
import pytest

from ccbif import cli, families, nbody


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), stdout=out)
    return code, out.getvalue()


def test_parse_number():
    assert cli.parse_number("sqrt2/7") == math.sqrt(2) / 7
    assert cli.parse_number("pi/3") == math.pi / 3
    assert cli.parse_number("0.2020") == 0.202
    assert cli.parse_number("-sqrt3") == -math.sqrt(3)
    with pytest.raises(cli.UsageError):
        cli.parse_number("seven")


def test_verify_family_points():
    code, out = run("verify", "--family", "two-squares", "--param", "0.2020")
    assert code == 0 and "PASS" in out
    code, out = run("verify", "--family", "rosette", "--param", "1.0,1.0")
    assert code == 0 and "m2" in out
    assert repr(float(families.rosette_point(1.0, 1.0).masses[6])) in out


def test_verify_file(tmp_path):
    good = tmp_path / "good.json"
    nbody.write_configuration(good, [1.0, 0.0, -1.0, 0.0], [1.0, 1.0])
    code, out = run("verify", "--file", str(good), "--out", str(tmp_path / "v.json"))
    assert code == 0
    doc = json.loads((tmp_path / "v.json").read_text())
    assert doc["lambda"] == 0.25 and doc["pass"] and "config" in doc

    bad = tmp_path / "perturbed.json"
    nbody.write_configuration(bad, [1.0, 0.0, -1.0, 0.3, 0.2, 0.9], [1.0, 1.0, 2.0])
    code, out = run("verify", "--file", str(bad))
    assert code == 3 and "FAIL" in out and "residual" in out


def test_usage_errors(tmp_path):
    assert run("verify", "--family", "two-squares")[0] == 2
    assert run("verify", "--file", str(tmp_path / "missing.json"))[0] == 2
    assert run("verify", "--family", "two-squares", "--param", "0.5")[0] == 2
    assert run("scan", "--family", "two-squares", "--range", "0.29:0.20")[0] == 2
    assert run("scan", "--family", "two-squares", "--range", "0.2:0.2")[0] == 2
    assert run("scan", "--family", "rosette", "--range", "0.1:1")[0] == 2
    assert run("map", "--grid", "1x5")[0] == 2
    assert run("frobnicate")[0] == 2


@pytest.mark.parametrize("param, morse", [("sqrt2/7", 1), ("sqrt2/6", 3), ("sqrt2/5", 4)])
def test_spectrum(param, morse):
    code, out = run("spectrum", "--family", "two-squares", "--param", param)
    assert code == 0
    doc = json.loads(out)
    assert doc["kernel_dim"] == 1
    assert doc["morse_index_full"] == doc["morse_index_b"] == morse
    ev = np.array(doc["hessian"]["eigenvalues"])
    assert np.sum(np.abs(ev) <= doc["hessian"]["zero_tolerance_used"]) == doc["kernel_dim"]
    assert doc["config"]["param"] == param


def test_spectrum_csv():
    code, out = run("spectrum", "--family", "two-squares", "--param", "sqrt2/6", "--format", "csv")
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "parameter,kernel_dim,morse_index,det_B,min_abs_eig"
    assert lines[2].split(",")[1:3] == ["1", "3"]


def test_scan_and_dump_roundtrip(tmp_path):
    out, dump = tmp_path / "events.json", tmp_path / "grid.csv"
    code, _ = run("scan", "--family", "two-squares", "--range", "0.20:0.29", "--steps", "64",
                  "--out", str(out), "--dump", str(dump))
    assert code == 0
    doc = json.loads(out.read_text())
    assert [e["classification"] for e in doc["events"]] == ["local", "global"]
    assert doc["events"][1]["bif_index"] == {"SO(2)/Id": 2}
    assert doc["index_sum"] == {"SO(2)/Id": 2}
    pts = families.csv_family_load(dump)
    assert len(pts) == 64
    assert pts[0].parameter == 0.2 and pts[-1].parameter == 0.29
    ref = families.two_squares_point(pts[10].parameter)
    assert np.array_equal(pts[10].masses, ref.masses)
    assert np.array_equal(pts[10].positions, ref.positions)
    assert (tmp_path / "grid.csv.spectra.csv").exists()

    code, text = run("scan", "--family", "csv", "--file", str(dump))
    assert code == 0
    assert [e["classification"] for e in json.loads(text)["events"]] == ["local", "global"]


def test_scan_strict_mode():
    args = ("scan", "--family", "two-squares", "--range", "0.20:0.29", "--steps", "2")
    assert run(*args)[0] == 0
    assert run(*args, "--strict")[0] == 4


def test_scan_rosette_csv_format():
    code, out = run("scan", "--family", "rosette", "--m0", "1", "--range", "0.1:10",
                    "--steps", "128", "--format", "csv")
    assert code == 0
    rows = out.splitlines()[2:]
    assert len(rows) == 4
    assert [r.split(",")[5] for r in rows] == ["local", "global", "local", "local"]


def test_map_outputs(tmp_path):
    out = tmp_path / "map.csv"
    code, _ = run("map", "--range", "0.3:3", "--grid", "12x12", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "m0,m1,morse_index,kernel_flag,det_B"
    assert len(lines) == 2 + 144
    summary = json.loads((tmp_path / "map.regions.json").read_text())
    assert summary["excluded_cells"] == 0
    assert set(summary["index_set"]) <= {0, 2, 3, 5}
    assert summary["config"]["grid"] == "12x12"


def test_map_is_byte_identical(tmp_path, monkeypatch):
    texts = []
    for threads in ("1", "3"):
        monkeypatch.setenv("CC_BIF_THREADS", threads)
        path = tmp_path / f"m{threads}.csv"
        run("map", "--range", "0.3:3", "--grid", "8x9", "--out", str(path),
            "--regions", str(tmp_path / "r.json"))
        texts.append(path.read_text().replace(str(path), "OUT"))
    assert texts[0] == texts[1]


def test_family_info():
    code, out = run("family-info", "--family", "two-squares", "--param", "sqrt2/7")
    doc = json.loads(out)
    assert code == 0 and doc["trivial_isotropy"]
    assert doc["residual"] <= 1e-9 and len(doc["positions"]) == 8
    assert abs(doc["r0"] - 0.37602) < 5e-5

import csv
import io
import json
import math

import pytest

from grushin.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    rc = run(list(argv), out, err)
    return rc, out.getvalue(), err.getvalue()


def table(text):
    rows = list(csv.reader(io.StringIO(text, newline="")))
    return rows[0], rows[1:]


# -- golden outputs ----------------------------------------------------------


def test_kmax_golden():
    rc, out, _ = call("kmax", "--space", "hyperbolic:alpha=1,beta=2", "--N", "inf")
    assert rc == 0
    assert out == (
        '{"feasible":true,"kmax":0.0,"binding":"xx+yy","attained":true,'
        '"margins":{"A":0.0,"B":0.0},"space":"hyperbolic:alpha=1,beta=2","N":"inf"}\n'
    )


def test_kmax_csv_golden():
    rc, out, _ = call("kmax", "--space", "sphere:alpha=1,beta=4", "--N", "10", "--K", "0",
                      "--format", "csv")
    assert rc == 0
    assert out == ('space,N,feasible,kmax,binding,attained\r\n'
                   '"sphere:alpha=1,beta=4",10,true,2,xx,true\r\n')


def test_kmax_infeasible():
    rc, out, _ = call("kmax", "--space", "infinity:beta=3,gamma=1", "--N", "7")
    doc = json.loads(out)
    assert rc == 0 and doc["feasible"] is False and doc["kmax"] is None


def test_kmax_bound_flag():
    _, out, _ = call("kmax", "--space", "hyperbolic:alpha=2,beta=6", "--N", "-34", "--K", "0")
    assert json.loads(out)["bounds"] is True


def test_ricci_round_sphere():
    rc, out, _ = call("ricci", "--space", "sphere:alpha=0,beta=0", "--x", "0.7", "--N", "2")
    doc = json.loads(out)
    assert rc == 0 and doc["rxx"] == pytest.approx(1.0, abs=1e-12)
    assert doc["ryy"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("method", ["lemma", "closed", "fd"])
def test_ricci_methods_agree(method):
    _, out, _ = call("ricci", "--space", "infinity:beta=3,gamma=1", "--x", "1", "--N", "inf",
                     "--method", method)
    doc = json.loads(out)
    assert (doc["rxx"], doc["ryy"]) == pytest.approx((6.0, 2.0), abs=1e-6)


def test_region_scan_sphere_threshold():
    rc, out, _ = call("region-scan", "--family", "sphere", "--alpha", "1", "--beta", "1:7:0.1",
                      "--N", "10")
    header, rows = table(out)
    assert rc == 0
    assert header == ["family", "alpha", "beta", "gamma", "N", "feasible", "kmax", "binding"]
    assert len(rows) == 61
    feasible = [float(r[2]) for r in rows if r[5] == "true"]
    assert feasible == [4.0]


def test_region_scan_skips_invalid_cells():
    _, out, _ = call("region-scan", "--family", "plane", "--alpha", "0:2:1", "--beta", "0:2:1",
                     "--N", "inf")
    _, rows = table(out)
    assert all(float(r[2]) >= float(r[1]) for r in rows) and len(rows) == 6


def test_region_scan_infinity_needs_gamma():
    rc, _, err = call("region-scan", "--family", "infinity", "--beta", "3", "--N", "inf")
    assert rc == 2 and "gamma" in err


def test_csv_floats_roundtrip():
    _, out, _ = call("dim-exponent", "--space", "plane:alpha=1,beta=1", "--delta", "0.01")
    _, rows = table(out)
    d = float(rows[0][1])
    assert d == pytest.approx(math.sqrt(2 * math.pi * 0.01), rel=1e-8)
    assert format(d, ".17g") == rows[0][1]


def test_distance_methods():
    rc, out, _ = call("distance", "--space", "plane:alpha=1,beta=1", "--from", "1,0", "--to", "2,0")
    doc = json.loads(out)
    assert rc == 0 and doc["d"] == pytest.approx(1.0, abs=1e-10)
    assert doc["seed"] == 20240917 and doc["method"] == "shooting"
    _, out, _ = call("distance", "--space", "plane:alpha=1,beta=1", "--from", "1,0", "--to", "2,0",
                     "--method", "graph")
    assert json.loads(out)["d"] == pytest.approx(1.0, abs=0.01)


def test_geodesic_from_covector():
    rc, out, _ = call("geodesic", "--space", "plane:alpha=1,beta=1", "--from", "1,0",
                      "--covector", "1,0", "--T", "1")
    header, rows = table(out)
    assert rc == 0 and header == ["t", "x", "y", "u", "v"]
    assert float(rows[-1][0]) == 1.0 and float(rows[-1][1]) == pytest.approx(2.0, abs=1e-12)


def test_geodesic_between_points():
    rc, out, _ = call("geodesic", "--space", "plane:alpha=1,beta=1", "--from", "1,0", "--to", "1,1")
    _, rows = table(out)
    assert rc == 0
    assert (float(rows[-1][1]), float(rows[-1][2])) == pytest.approx((1.0, 1.0), abs=1e-8)


def test_cd_check_output():
    rc, out, _ = call("cd-check", "--space", "plane:alpha=1,beta=2", "--K", "0", "--N", "inf",
                      "--bump0", "1.5,0.5", "--bump1", "3.5,0.5", "--grid", "3")
    doc = json.loads(out)
    assert rc == 0 and doc["pass"] is True and doc["t"] == [0.0, 0.5, 1.0]
    assert doc["margins"][0] == 0.0 and doc["w2"] == 2.0


def test_deterministic_output():
    argv = ("distance", "--space", "hyperbolic:alpha=1,beta=2", "--from", "0.5,0", "--to", "0.9,0.4")
    assert call(*argv)[1] == call(*argv)[1]


# -- errors ------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    [],
    ["kmax", "--space", "plane:alpha=2,beta=1", "--N", "inf"],
    ["kmax", "--space", "plane:alpha=1,beta=2", "--N", "1"],
    ["kmax", "--space", "torus:alpha=1,beta=2", "--N", "inf"],
    ["ricci", "--space", "plane:alpha=1,beta=2", "--x", "-1", "--N", "inf"],
    ["ricci", "--space", "plane:alpha=1,beta=2", "--x", "1", "--N", "2"],
    ["region-scan", "--family", "sphere", "--beta", "3:1:0.1", "--N", "10"],
    ["distance", "--space", "plane:alpha=1,beta=1", "--from", "1", "--to", "2,0"],
    ["cd-check", "--space", "plane:alpha=1,beta=2", "--K", "0", "--N", "inf",
     "--bump0", "0.5,1", "--bump1", "3,0.5"],
    ["cd-check", "--space", "plane:alpha=1,beta=2", "--K", "0", "--N", "inf",
     "--bump0", "1.5,0.5", "--bump1", "3,0.5", "--grid", "1"],
    ["geodesic", "--space", "plane:alpha=1,beta=1", "--from", "1,0"],
    ["dim-exponent", "--space", "sphere:alpha=1,beta=1"],
])
def test_usage_errors(argv):
    rc, out, err = call(*argv)
    assert rc == 2 and out == "" and err


def test_numeric_failure_reports_json():
    rc, out, err = call("geodesic", "--space", "hyperbolic:alpha=1,beta=1", "--from", "1,0",
                        "--covector", "0,50", "--T", "100000")
    doc = json.loads(err)
    assert rc == 3 and out == "" and doc["error"] == "IntegrationError" and doc["message"]

"""CSV formatting, JSON schema envelope, and the dependency-free SVG writer."""

import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from cslab.report import format_value, svg_line_plot, write_csv, write_report_json


def test_format_value_float_roundtrips():
    for v in (0.1, 1.0 / 3.0, 1e-300, 6.02e23, math.pi, -0.0):
        assert float(format_value(v)) == v
    assert format_value(np.float64(0.25)) == "0.25"


def test_format_value_other_types():
    assert format_value(True) == "true" and format_value(False) == "false"
    assert format_value(7) == "7" and format_value(np.int64(-3)) == "-3"
    assert format_value("text,with comma") == "text,with comma"


def test_write_csv_bytes(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b"], [(1, 0.5), (2, float("inf"))])
    assert p.read_bytes() == b"a,b\n1,0.5\n2,inf\n"


def test_report_json_envelope_and_numpy(tmp_path):
    p = tmp_path / "r.json"
    write_report_json(p, {
        "flag": np.bool_(True),
        "count": np.int64(4),
        "x": np.float64(0.5),
        "arr": np.arange(3.0),
    })
    body = json.loads(p.read_text())
    assert body["schema_version"] == 1
    assert body["flag"] is True
    assert body["count"] == 4 and body["x"] == 0.5
    assert body["arr"] == [0.0, 1.0, 2.0]
    with pytest.raises(TypeError):
        write_report_json(tmp_path / "bad.json", {"f": lambda: None})


def test_svg_structure(tmp_path):
    p = tmp_path / "plot.svg"
    x = np.geomspace(1.0, 1e4, 30)
    svg_line_plot(
        p, [(x, np.log(x), "one"), (x, np.sqrt(x), "two")],
        title="demo", xlabel="t", ylabel="v", xlog=True, ylog=True,
    )
    root = ET.fromstring(p.read_text())
    assert root.tag.endswith("svg")
    ns = "{http://www.w3.org/2000/svg}"
    polys = root.findall(f"{ns}polyline")
    assert len(polys) == 2
    texts = [t.text for t in root.findall(f"{ns}text")]
    assert "demo" in texts and "t" in texts and "v" in texts


def test_svg_drops_nonfinite_and_rejects_empty(tmp_path):
    p = tmp_path / "drop.svg"
    x = np.array([1.0, 2.0, 3.0, 4.0])
    y = np.array([1.0, float("nan"), -1.0, 2.0])
    svg_line_plot(p, [(x, y, "s")], title="d", xlabel="x", ylabel="y", ylog=True)
    root = ET.fromstring(p.read_text())
    ns = "{http://www.w3.org/2000/svg}"
    pts = root.find(f"{ns}polyline").get("points").split()
    assert len(pts) == 2  # nan and the log-invalid point are gone
    with pytest.raises(ValueError):
        svg_line_plot(tmp_path / "e.svg", [(x, np.full(4, np.nan), "s")],
                      title="", xlabel="", ylabel="")

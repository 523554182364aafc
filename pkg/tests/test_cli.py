import json

import pytest

from quant_helly.cli import parse_args, run
from quant_helly.geom_core import AxisBox, HPolytope
from quant_helly.utils import body_to_dict, write_json


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


def _cli(out_dir, *argv):
    return run(["--output-dir", str(out_dir), *argv])


def _result(path):
    return json.loads(path.read_text())["result"]


@pytest.fixture
def square_problem(tmp_path):
    path = tmp_path / "square.json"
    write_json(path, {"problem": {"family": [body_to_dict(HPolytope.box([0.0, 0.0], [1.0, 1.0]))]}})
    return path


def test_parse_defaults(tmp_path):
    args = parse_args(["--output-dir", str(tmp_path), "helly-test", "--theorem", "box"])
    assert args.seed == 0
    assert args.trials == 200
    assert args.d == 2


def test_solve_box(out_dir, square_problem, capsys):
    out = out_dir / "box.json"
    assert _cli(out_dir, "solve-box", "--in", str(square_problem), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert data["result"]["objective_value"] == pytest.approx(1.0, abs=1e-6)
    assert data["config"]["command"] == "solve-box"
    assert data["rng"] == "Philox"
    assert "SOLVE-BOX MODE" in capsys.readouterr().out


def test_output_is_reproducible(out_dir, square_problem):
    out = out_dir / "ellipse.json"
    assert _cli(out_dir, "solve-ellipsoid", "--in", str(square_problem), "--out", str(out)) == 0
    first = out.read_bytes()
    assert _cli(out_dir, "solve-ellipsoid", "--in", str(square_problem), "--out", str(out)) == 0
    assert out.read_bytes() == first


def test_approx(out_dir, square_problem):
    out = out_dir / "approx.json"
    assert _cli(out_dir, "approx", "--in", str(square_problem), "--out", str(out)) == 0
    assert _result(out)["eps"] == pytest.approx(0.0, abs=1e-6)


def test_malformed_input_exits_2(out_dir, tmp_path, capsys):
    garbage = tmp_path / "garbage.json"
    garbage.write_text("[1, 2")
    assert _cli(out_dir, "verify", "--cert", str(garbage)) == 2
    assert _cli(out_dir, "solve-box", "--in", str(tmp_path / "missing.json")) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"problem": {"family": [{"type": "ball"}]}}))
    assert _cli(out_dir, "solve-box", "--in", str(bad)) == 2
    assert "✗ Invalid input file" in capsys.readouterr().err


def test_tverberg_then_verify(out_dir, tmp_path):
    witnesses = tmp_path / "boxes.json"
    write_json(witnesses, {"witnesses": [body_to_dict(AxisBox([0.5, 0.5], [0.5, 0.5]))] * 5})
    cert = out_dir / "cert.json"
    assert _cli(out_dir, "tverberg", "--chart", "zonotope", "--r", "2", "--in", str(witnesses),
                "--out", str(cert)) == 0
    assert _result(cert)["objective_value"] == pytest.approx(1.0, abs=1e-6)
    assert _cli(out_dir, "verify", "--cert", str(cert)) == 0


def test_tverberg_needs_chart(out_dir, tmp_path):
    witnesses = tmp_path / "boxes.json"
    write_json(witnesses, {"witnesses": [body_to_dict(AxisBox([0.5, 0.5], [0.5, 0.5]))] * 5})
    assert _cli(out_dir, "tverberg", "--in", str(witnesses)) == 2


def test_tverberg_points(out_dir, tmp_path):
    points = tmp_path / "points.json"
    write_json(points, {"points": [[0.0, 0.0], [2.0, 2.0], [0.0, 2.0], [2.0, 0.0]]})
    out = out_dir / "radon.json"
    assert _cli(out_dir, "tverberg", "--points", "--in", str(points), "--out", str(out)) == 0
    assert _result(out)["common_point"] == pytest.approx([1.0, 1.0], abs=1e-9)


def test_missed_partition_is_dumped(out_dir, tmp_path):
    points = tmp_path / "triangle.json"
    write_json(points, {"points": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]})
    assert _cli(out_dir, "tverberg", "--points", "--in", str(points)) == 1
    dump = json.loads((out_dir / "tverberg-violation.json").read_text())
    assert dump["instance"]["r"] == 2


def test_helly_suite(out_dir):
    out = out_dir / "suite.json"
    assert _cli(out_dir, "helly-test", "--theorem", "box", "--trials", "2", "--out", str(out)) == 0
    assert _result(out)["summary"]["violations"] == 0


def test_lptype_bench_writes_csv(out_dir):
    out = out_dir / "bench.json"
    assert _cli(out_dir, "lptype-bench", "--sizes", "10", "20", "--trials", "2", "--out", str(out)) == 0
    assert out.with_suffix(".csv").read_text().startswith("n,trial,seed")
    assert [row["n"] for row in _result(out)["table"]] == [10, 20]


def test_counterexample(out_dir):
    out = out_dir / "john.json"
    assert _cli(out_dir, "counterexample", "--out", str(out)) == 0
    result = _result(out)
    assert len(result["family"]) == 5
    assert result["certificate"]["min_subset_gap"] > 1e-3


@pytest.mark.slow
def test_ellipsoid_suite_exits_clean(out_dir):
    assert _cli(out_dir, "helly-test", "--theorem", "ellipsoid", "--d", "2", "--trials", "200", "--seed", "1") == 0


def test_bad_thread_setting_exits_2(out_dir, monkeypatch, capsys):
    monkeypatch.setenv("QH_THREADS", "many")
    assert _cli(out_dir, "helly-test", "--theorem", "box", "--d", "2", "--trials", "2") == 2
    assert "QH_THREADS" in capsys.readouterr().err

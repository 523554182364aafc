import json

import numpy as np
import pytest

from quant_helly.errors import InvalidInput
from quant_helly.geom_core import AxisBox, HPolytope
from quant_helly.tverberg_lab import ZonotopeChart, quantitative_tverberg, volume_tverberg
from quant_helly.utils import write_json
from quant_helly.verify import audit_certificate, verify_certificate


@pytest.fixture
def box_certificate():
    boxes = [AxisBox([0.5, 0.5], [0.5, 0.5])] * 5
    return quantitative_tverberg(boxes, ZonotopeChart(np.eye(2)), 2, 1.0).to_dict()


def test_valid_certificate(tmp_path, box_certificate, capsys):
    path = tmp_path / "cert.json"
    write_json(path, box_certificate)
    assert verify_certificate(path)
    assert "✓ Certificate verified" in capsys.readouterr().out


def test_run_file_is_unwrapped(tmp_path, box_certificate):
    path = tmp_path / "run.json"
    write_json(path, {"config": {"command": "tverberg"}, "version": "0", "result": box_certificate})
    assert verify_certificate(path)


def test_ellipse_certificate_audits_clean():
    squares = [HPolytope.box([0.0, 0.0], [1.0, 1.0])] * 7
    assert audit_certificate(volume_tverberg(squares, 2).to_dict()) == []


def test_recorded_objective_must_match(box_certificate):
    box_certificate["objective_value"] = 2.0
    problems = audit_certificate(box_certificate)
    assert len(problems) == 1
    assert "recorded objective" in problems[0]


def test_oversized_witness_fails(tmp_path, box_certificate, capsys):
    box_certificate["decoded_witness"] = {"type": "axisbox", "center": [0.5, 0.5], "halfwidths": [0.6, 0.6]}
    box_certificate["objective_value"] = 1.44
    path = tmp_path / "cert.json"
    write_json(path, box_certificate)
    assert not verify_certificate(path)
    out = capsys.readouterr().out
    assert "sticks out" in out
    assert "✗ Certificate failed" in out


def test_threshold_is_checked(box_certificate):
    box_certificate["threshold"] = 1.5
    assert any("below threshold" in p for p in audit_certificate(box_certificate))


def test_malformed_files(tmp_path, capsys):
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    with pytest.raises(InvalidInput):
        verify_certificate(garbage)

    shapeless = tmp_path / "shapeless.json"
    shapeless.write_text(json.dumps({"r": 2}))
    with pytest.raises(InvalidInput):
        verify_certificate(shapeless)
    assert "✗ Invalid certificate file" in capsys.readouterr().out

    with pytest.raises(InvalidInput):
        verify_certificate(tmp_path / "missing.json")

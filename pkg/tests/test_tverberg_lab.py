import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quant_helly.errors import (
    DimensionTooLarge,
    DirectionMismatch,
    InvalidInput,
    NotFound,
    TheoremArityMismatch,
)
from quant_helly.geom_core import AxisBox, Ellipsoid, HConvexSet, HPolytope, Segment, Zonotope
from quant_helly.tverberg_lab import (
    ChartKind,
    EllipsoidDetChart,
    EllipsoidSumChart,
    HConvexChart,
    SegmentChart,
    ZonotopeChart,
    _is_prime_power,
    _partitions,
    containment_audit,
    det_combination,
    largest_orientation_class,
    make_chart,
    orientation_classes,
    quantitative_tverberg,
    random_unit_boxes,
    random_unit_ellipses,
    tverberg_points,
    volume_tverberg,
)
from quant_helly.utils import make_rng, spawn_seeds

HEXAGON = np.column_stack([np.cos(np.pi * np.arange(6) / 3), np.sin(np.pi * np.arange(6) / 3)])

positive = st.floats(min_value=0.1, max_value=3.0, allow_nan=False, allow_infinity=False)
coord = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


def _spd(rng, d=2):
    M = rng.standard_normal((d, d))
    return M @ M.T + 0.2 * np.eye(d)


# ---------------------------------------------------------------------------
# Point partitions


def test_partition_order():
    labels = list(_partitions(4, 2))
    # Stirling number S(4, 2)
    assert len(labels) == 7
    assert len(set(labels)) == 7
    assert labels[0] == (0, 0, 1, 1)
    assert all(lab[0] == 0 for lab in labels)


def test_median_on_a_line():
    partition, point = tverberg_points([0.0, 1.0, 2.0], 2)
    assert partition == ((0, 2), (1,))
    assert point[0] == pytest.approx(1.0)


def test_radon_diagonals():
    partition, point = tverberg_points([[0.0, 0.0], [2.0, 2.0], [0.0, 2.0], [2.0, 0.0]], 2)
    assert partition == ((0, 1), (2, 3))
    np.testing.assert_allclose(point, [1.0, 1.0], atol=1e-9)


def test_radon_inner_point():
    partition, point = tverberg_points([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]], 2)
    assert partition == ((0, 1, 2), (3,))
    np.testing.assert_allclose(point, [1.0, 1.0], atol=1e-9)


def test_three_parts_in_the_plane(rng):
    points = rng.uniform(0.0, 1.0, size=(7, 2))
    partition, point = tverberg_points(points, 3)
    assert len(partition) == 3
    assert sorted(i for part in partition for i in part) == list(range(7))


def test_too_few_points_is_not_found():
    with pytest.raises(NotFound) as info:
        tverberg_points([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 2)
    assert info.value.instance["r"] == 2


def test_partition_budget():
    with pytest.raises(InvalidInput):
        tverberg_points(np.zeros((30, 2)), 2)
    with pytest.raises(InvalidInput):
        tverberg_points([[0.0], [1.0]], 1)


def test_prime_powers():
    assert [r for r in range(1, 13) if _is_prime_power(r)] == [2, 3, 4, 5, 7, 8, 9, 11]


# ---------------------------------------------------------------------------
# Charts


def _check_zonotope_round_trip(cx, cy, a, b, c):
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    chart = ZonotopeChart(dirs)
    zono = Zonotope([cx, cy], dirs, [a, b, c])
    back = chart.decode(chart.lift(zono))
    np.testing.assert_allclose(back.center, zono.center, atol=1e-12)
    np.testing.assert_allclose(back.coeffs, zono.coeffs, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(cx=coord, cy=coord, a=positive, b=positive, c=positive)
def test_zonotope_chart_round_trip(cx, cy, a, b, c):
    _check_zonotope_round_trip(cx, cy, a, b, c)


@pytest.mark.slow
@settings(max_examples=1000, deadline=None)
@given(cx=coord, cy=coord, a=positive, b=positive, c=positive)
def test_zonotope_chart_round_trip_long(cx, cy, a, b, c):
    _check_zonotope_round_trip(cx, cy, a, b, c)


def test_zonotope_chart_takes_boxes():
    chart = ZonotopeChart(np.eye(2))
    lifted = chart.lift(AxisBox([1.0, 2.0], [0.5, 0.25]))
    np.testing.assert_allclose(lifted, [1.0, 2.0, 1.0, 0.5])
    assert chart.count(2) == 5
    with pytest.raises(DirectionMismatch):
        chart.lift(Zonotope([0.0, 0.0], [[1.0, 0.0], [1.0, 1.0]], [1.0, 1.0]))


def test_ellipsoid_charts_round_trip(rng):
    shape = _spd(rng)
    sum_chart = EllipsoidSumChart(2)
    back = sum_chart.decode(sum_chart.lift(Ellipsoid([0.0, 0.0], shape)))
    np.testing.assert_allclose(back.shape, shape, atol=1e-9)
    with pytest.raises(InvalidInput):
        sum_chart.lift(Ellipsoid([1.0, 0.0], shape))

    det_chart = EllipsoidDetChart(2)
    center = rng.normal(size=2)
    back = det_chart.decode(det_chart.lift(Ellipsoid(center, shape)))
    np.testing.assert_allclose(back.center, center, atol=1e-12)
    np.testing.assert_allclose(back.shape, shape, atol=1e-12)
    assert det_chart.count(2) == 7
    assert det_chart.min_count(2) == 6


def test_segment_chart_round_trip_and_reflection():
    chart = SegmentChart(2, signs=[1, -1])
    seg = Segment([0.0, 1.0], [2.0, -1.0])
    back = chart.decode(chart.lift(seg))
    np.testing.assert_allclose(back.start, seg.start)
    np.testing.assert_allclose(back.end, seg.end)
    with pytest.raises(InvalidInput):
        chart.lift(Segment([0.0, 0.0], [1.0, 1.0]))
    trimmed = SegmentChart(2).trim(Segment([0.0, 0.0], [2.0, 2.0]), 1.0)
    assert trimmed.l1_length == pytest.approx(1.0)


def test_hconvex_chart_round_trip():
    chart = HConvexChart(HEXAGON)
    body = HConvexSet(HEXAGON, np.ones(6))
    np.testing.assert_allclose(chart.lift(body), np.ones(6), atol=1e-9)
    assert chart.count(2) == 7


def _check_transport(lam, seed):
    rng = make_rng(seed)
    chart = ZonotopeChart(np.eye(2))
    p, q = (AxisBox(rng.uniform(-1, 1, 2), rng.uniform(0.1, 1.0, 2)) for _ in range(2))
    mixed = chart.decode(lam * chart.lift(p) + (1 - lam) * chart.lift(q))
    audit = containment_audit(mixed, [[p, q]], directions=128)
    assert audit.min_gap >= -1e-7


transport_lam = st.sampled_from([0.0, 0.25, 0.5, 1.0])
transport_seed = st.integers(min_value=0, max_value=10_000)


@settings(max_examples=25, deadline=None)
@given(lam=transport_lam, seed=transport_seed)
def test_affine_transport_stays_in_hull(lam, seed):
    _check_transport(lam, seed)


@pytest.mark.slow
@settings(max_examples=1000, deadline=None)
@given(lam=transport_lam, seed=transport_seed)
def test_affine_transport_stays_in_hull_long(lam, seed):
    _check_transport(lam, seed)


def test_det_combination_hits_target(rng):
    mats = np.array([_spd(rng) for _ in range(3)])
    mats /= np.sqrt(np.linalg.det(mats))[:, None, None]
    C, det = det_combination(mats, [0.2, 0.3, 0.5], 1.0)
    assert np.linalg.det(C) == pytest.approx(1.0)
    assert det >= 1 - 1e-9


def test_make_chart():
    assert make_chart(ChartKind.ZONOTOPE, 2).count(2) == 5
    assert make_chart("ellipsoid-sum", 2).count(2) == 4
    assert make_chart("segment", 2).count(2) == 5
    with pytest.raises(InvalidInput):
        make_chart(ChartKind.HCONVEX, 2)


# ---------------------------------------------------------------------------
# Audit


def test_audit_of_single_body():
    box = AxisBox([0.5, 0.5], [0.5, 0.5])
    audit = containment_audit(box, [[box]])
    assert audit.directions == 360
    assert audit.min_gap >= -1e-12
    assert audit.to_dict()["vertex_distances"][0] == pytest.approx(0.0, abs=1e-7)


def test_audit_positive_gap_for_small_witness():
    fat = AxisBox([0.0, 0.0], [1.0, 1.0])
    tiny = AxisBox([0.0, 0.0], [0.1, 0.1])
    assert containment_audit(tiny, [[fat]]).min_gap > 0.8


def test_audit_tangent_witness():
    disc = Ellipsoid([0.0, 0.0], np.eye(2))
    box = AxisBox([0.0, 0.0], [1.0, 1.0])
    audit = containment_audit(disc, [[box]])
    assert abs(audit.min_gap) < 1e-6


def test_audit_detects_sticking_out():
    small = AxisBox([0.0, 0.0], [0.5, 0.5])
    big = AxisBox([0.0, 0.0], [1.0, 1.0])
    audit = containment_audit(big, [[small], [big]])
    assert audit.per_part_min_gap[0] < -0.4
    assert audit.per_part_min_gap[1] == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(InvalidInput):
        containment_audit(big, [[big]], directions=10)


# ---------------------------------------------------------------------------
# Certificates


def test_identical_boxes():
    boxes = [AxisBox([0.5, 0.5], [0.5, 0.5])] * 5
    cert = quantitative_tverberg(boxes, ZonotopeChart(np.eye(2)), 2, 1.0)
    assert cert.objective_value == pytest.approx(1.0, abs=1e-7)
    assert len(cert.partition) == 2
    assert cert.extras["route"] == "lp"
    data = cert.to_dict()
    assert data["kind"] == "tverberg-certificate"
    assert data["chart"] == "zonotope"


def test_random_unit_boxes():
    for seed in spawn_seeds(3, 10):
        boxes = random_unit_boxes(5, make_rng(seed))
        cert = quantitative_tverberg(boxes, ZonotopeChart(np.eye(2)), 2, 1.0 - 1e-9)
        assert cert.objective_value >= 1 - 1e-6
        assert cert.audit.min_gap >= -1e-6


@pytest.mark.slow
def test_hundred_unit_box_instances():
    for seed in spawn_seeds(100, 100):
        boxes = random_unit_boxes(5, make_rng(seed))
        cert = quantitative_tverberg(boxes, ZonotopeChart(np.eye(2)), 2, 1.0 - 1e-9)
        assert cert.objective_value >= 1 - 1e-6


def test_random_unit_ellipses():
    for seed in spawn_seeds(5, 3):
        ellipses = random_unit_ellipses(7, make_rng(seed))
        cert = quantitative_tverberg(ellipses, EllipsoidDetChart(2), 2, 1.0 - 1e-6)
        assert cert.objective_value >= 1 - 1e-6
        assert cert.extras["route"] == "lp"
        assert cert.audit.directions == 360


@pytest.mark.slow
def test_fifty_unit_ellipse_instances():
    for seed in spawn_seeds(50, 50):
        cert = quantitative_tverberg(random_unit_ellipses(7, make_rng(seed)), EllipsoidDetChart(2), 2, 1.0 - 1e-6)
        assert cert.objective_value >= 1 - 1e-6


def test_projected_gradient_route():
    shape = np.diag([2.0, 0.5]) / math.sqrt(math.pi)
    ellipses = [Ellipsoid([1.0, 1.0], shape)] * 6
    cert = quantitative_tverberg(ellipses, EllipsoidDetChart(2), 2, 1.0 - 1e-6)
    assert cert.extras["route"] == "projected-gradient"
    assert cert.extras["prime_power"] is True
    assert cert.lifted_common_point is None
    assert cert.objective_value == pytest.approx(1.0, abs=1e-6)


def test_centered_ellipses_sum_chart(rng):
    ellipses = []
    for _ in range(4):
        shape = _spd(rng)
        ellipses.append(Ellipsoid([0.0, 0.0], shape / math.sqrt(math.pi * np.linalg.det(shape))))
    cert = quantitative_tverberg(ellipses, EllipsoidSumChart(2), 2, 1.0 - 1e-6)
    assert cert.objective_value >= 1 - 1e-6


def test_increasing_segments(rng):
    segments = [Segment(s, s + rng.uniform(0.2, 1.0, 2)) for s in rng.uniform(0.0, 2.0, (5, 2))]
    threshold = min(seg.l1_length for seg in segments)
    cert = quantitative_tverberg(segments, SegmentChart(2), 2, threshold)
    assert cert.objective_value == pytest.approx(threshold, abs=1e-6)


def test_hconvex_identical_inputs():
    body = HConvexSet(HEXAGON, np.ones(6))
    cert = quantitative_tverberg([body] * 7, HConvexChart(HEXAGON), 2, body.volume() - 1e-9)
    assert cert.objective_value == pytest.approx(body.volume(), abs=1e-6)


def test_preconditions():
    boxes = [AxisBox([0.5, 0.5], [0.5, 0.5])] * 4
    with pytest.raises(TheoremArityMismatch):
        quantitative_tverberg(boxes, ZonotopeChart(np.eye(2)), 2, 1.0)
    with pytest.raises(InvalidInput):
        quantitative_tverberg(boxes + boxes[:1], ZonotopeChart(np.eye(2)), 2, 2.0)


def test_volume_tverberg_unit_squares(rng):
    corners = rng.uniform(0.0, 3.0, (7, 2))
    squares = [HPolytope.box(c, c + 1.0) for c in corners]
    cert = volume_tverberg(squares, 2)
    assert cert.objective_value >= 0.25 * (1 - 1e-4)
    assert cert.extras["volume_bound"] == pytest.approx(0.25)
    assert len(cert.extras["bodies"]) == 7


def test_volume_tverberg_identical_squares(unit_square):
    cert = volume_tverberg([unit_square] * 7, 2)
    assert cert.objective_value == pytest.approx(math.pi / 4, abs=1e-5)


def test_volume_tverberg_centered():
    rects = [HPolytope.box([-a, -0.25 / a], [a, 0.25 / a]) for a in (0.5, 0.7, 1.0, 1.3)]
    cert = volume_tverberg(rects, 2, centered=True)
    assert cert.objective_value >= 0.5 * (1 - 1e-4)
    assert cert.chart is ChartKind.ELLIPSOID_SUM


def test_volume_tverberg_rejects_small_body():
    bodies = [HPolytope.box([0.0, 0.0], [1.0, 1.0])] * 6 + [HPolytope.box([0.0, 0.0], [1.0, 0.5])]
    with pytest.raises(InvalidInput):
        volume_tverberg(bodies, 2)


# ---------------------------------------------------------------------------
# Orientation classes


def test_orientation_classes():
    segments = [
        Segment([0.0, 0.0], [1.0, 1.0]),
        Segment([0.0, 0.0], [1.0, -1.0]),
        Segment([1.0, 1.0], [0.0, 0.0]),
    ]
    assert orientation_classes(segments) == {(1, 1): [0, 2], (1, -1): [1]}
    assert largest_orientation_class(segments) == ((1, 1), [0, 2])
    with pytest.raises(DimensionTooLarge):
        orientation_classes([Segment(np.zeros(4), np.ones(4))])

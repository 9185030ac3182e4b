import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liquidskin.errors import DegenerateInputError, DomainError, InfeasiblePackingError
from liquidskin.geometry import (
    CellId,
    Network,
    Point2,
    Rect,
    all_cells,
    cell_of_point,
    cell_rectangle,
    delaunay,
    edges_under_cell,
    generate_random_points,
)


def circumcircle(a: Point2, b: Point2, c: Point2):
    ax, ay, bx, by, cx, cy = a.x, a.y, b.x, b.y, c.x, c.y
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    return ux, uy, math.hypot(ax - ux, ay - uy)


class TestCellId:
    def test_parse_round_trip(self):
        for label in ("A1", "L9", "P20", "a1"):
            assert CellId.parse(label).label == label.upper()

    def test_rejects_bad_labels(self):
        for label in ("Q1", "A0", "A21", "9A", "A", ""):
            with pytest.raises(DomainError):
                CellId.parse(label)

    def test_grid_has_320_cells(self):
        cells = list(all_cells())
        assert len(cells) == 320
        assert len(set(cells)) == 320

    def test_cell_rectangle_matches_point_lookup(self):
        for cell in all_cells():
            rect = cell_rectangle(cell)
            centre = Point2((rect.x0 + rect.x1) / 2, (rect.y0 + rect.y1) / 2)
            assert cell_of_point(centre) == cell

    def test_row_a_is_at_the_bottom(self):
        rect = cell_rectangle(CellId.parse("A1"))
        assert rect.y0 == 0.0 and rect.x0 == 0.0


class TestRandomPoints:
    def test_deterministic(self):
        assert generate_random_points(3, 30) == generate_random_points(3, 30)

    def test_respects_bounds_and_separation(self):
        pts = generate_random_points(5, 40, min_separation=10.0)
        assert len(pts) == 40
        for p in pts:
            assert 0 <= p.x < 200 and 0 <= p.y < 160
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                assert p.distance_to(q) >= 10.0

    def test_infeasible_packing_raises(self):
        with pytest.raises(InfeasiblePackingError):
            generate_random_points(0, 500, min_separation=30.0)


class TestDelaunay:
    def test_empty_circumcircle_over_seeds(self):
        for seed in range(20):
            pts = generate_random_points(seed, 30, min_separation=5.0)
            tri = delaunay(pts)
            for t in tri.triangles:
                ux, uy, r = circumcircle(*(pts[i] for i in t))
                for j, p in enumerate(pts):
                    if j in t:
                        continue
                    assert math.hypot(p.x - ux, p.y - uy) >= r * (1 - 1e-9)

    def test_euler_characteristic(self):
        pts = generate_random_points(11, 40, min_separation=5.0)
        tri = delaunay(pts)
        assert len(tri.nodes) - len(tri.edges) + len(tri.triangles) == 1

    def test_cocircular_square_uses_smallest_diagonal(self):
        square = [Point2(0, 0), Point2(10, 0), Point2(10, 10), Point2(0, 10)]
        tri = delaunay(square)
        assert (0, 2) in tri.edges
        assert (1, 3) not in tri.edges

    def test_deterministic(self):
        pts = generate_random_points(2, 35, min_separation=5.0)
        assert delaunay(pts) == delaunay(pts)

    def test_too_few_points_raises(self):
        with pytest.raises(DegenerateInputError):
            delaunay([Point2(0, 0), Point2(1, 1)])

    def test_collinear_points_raise(self):
        with pytest.raises(DegenerateInputError):
            delaunay([Point2(0, 0), Point2(5, 5), Point2(10, 10)])


class TestNetwork:
    def test_default_edge_lengths_within_bounds(self, network):
        for i in range(len(network.triangulation.edges)):
            assert 15.0 <= network.edge_length_mm(i) <= 140.0

    def test_three_electrodes(self, network):
        assert set(network.electrodes) == {"BL", "C", "TR"}

    def test_edges_under_cell_returns_clipped_subsegments(self, network):
        found_any = False
        for cell in all_cells():
            for edge_index, (p, q) in edges_under_cell(network, cell):
                found_any = True
                rect = cell_rectangle(cell)
                half = network.channel_width_mm / 2
                grown = Rect(rect.x0 - half, rect.y0 - half, rect.x1 + half, rect.y1 + half)
                for pt in (p, q):
                    assert grown.x0 - 1e-9 <= pt.x <= grown.x1 + 1e-9
                    assert grown.y0 - 1e-9 <= pt.y <= grown.y1 + 1e-9
                assert p.distance_to(q) <= network.edge_length_mm(edge_index) + 1e-9
        assert found_any

    def test_network_requires_positive_cross_section(self, network):
        with pytest.raises(DomainError):
            Network(
                triangulation=network.triangulation,
                channel_width_mm=0.0,
                electrodes=network.electrodes,
            )


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_point_generation_always_inside_skin(seed):
    for p in generate_random_points(seed, 10):
        assert 0 <= p.x < 200 and 0 <= p.y < 160

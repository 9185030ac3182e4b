"""Planar geometry of the sensing skin.

Random point generation, Delaunay triangulation of the channel network, and
the letter/number grid of 1 cm cells printed on the membrane.

Grid convention: rows are letters A-P along the 160 mm side with row A at the
bottom (y in [0, 10) mm), columns are numbers 1-20 along the 200 mm side with
column 1 at the left (x in [0, 10) mm).
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError, InfeasiblePackingError

GRID_ROWS = 16
GRID_COLS = 20
CELL_MM = 10.0
SKIN_WIDTH_MM = 200.0
SKIN_HEIGHT_MM = 160.0

ROW_LETTERS = string.ascii_uppercase[:GRID_ROWS]

#: Relative tolerance of the in-circle predicate; scaled by the fourth power
#: of the local coordinate magnitude (the determinant has length^4 units).
INCIRCLE_RELATIVE_EPS = 1e-9

#: Attempts allowed per point before min-separation sampling is declared infeasible.
POINT_ATTEMPT_BUDGET = 10_000


@dataclass(frozen=True, order=True)
class Point2:
    """A point on the skin, millimetres from the bottom-left corner."""

    x: float
    y: float

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x1) x [y0, y1) in mm."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> Point2:
        return Point2((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains(self, p: Point2) -> bool:
        return self.x0 <= p.x <= self.x1 and self.y0 <= p.y <= self.y1

    def inflated(self, margin: float) -> "Rect":
        return Rect(self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin)


@dataclass(frozen=True, order=True)
class CellId:
    """One 10 mm checkerboard square, addressed like "L9"."""

    row: str
    col: int

    def __post_init__(self):
        if self.row not in ROW_LETTERS:
            raise DomainError(f"cell row must be one of {ROW_LETTERS[0]}-{ROW_LETTERS[-1]}, got {self.row!r}")
        if not 1 <= self.col <= GRID_COLS:
            raise DomainError(f"cell column must be 1-{GRID_COLS}, got {self.col}")

    @classmethod
    def parse(cls, label: str) -> "CellId":
        label = label.strip().upper()
        if len(label) < 2 or not label[1:].isdigit():
            raise DomainError(f"malformed cell label {label!r}")
        return cls(label[0], int(label[1:]))

    @property
    def label(self) -> str:
        return f"{self.row}{self.col}"

    def __str__(self) -> str:
        return self.label


def all_cells():
    """All 320 cells in row-major order (A1, A2, ..., P20)."""
    for row in ROW_LETTERS:
        for col in range(1, GRID_COLS + 1):
            yield CellId(row, col)


def cell_rectangle(cell: CellId) -> Rect:
    """The 10 x 10 mm square covered by ``cell``."""
    r = ROW_LETTERS.index(cell.row)
    c = cell.col - 1
    return Rect(c * CELL_MM, r * CELL_MM, (c + 1) * CELL_MM, (r + 1) * CELL_MM)


def cell_of_point(p: Point2) -> CellId:
    """The cell containing ``p`` (points on the skin only)."""
    c = min(int(p.x // CELL_MM), GRID_COLS - 1)
    r = min(int(p.y // CELL_MM), GRID_ROWS - 1)
    if p.x < 0 or p.y < 0:
        raise DomainError(f"point {p} is outside the skin")
    return CellId(ROW_LETTERS[r], c + 1)


# ---------------------------------------------------------------------------
# Random point generation


def generate_random_points(
    seed: int,
    count: int,
    bbox: Rect = Rect(0.0, 0.0, SKIN_WIDTH_MM, SKIN_HEIGHT_MM),
    min_separation: float = 0.0,
    attempt_budget: int = POINT_ATTEMPT_BUDGET,
) -> list[Point2]:
    """Uniform rejection sampling of ``count`` points at pairwise separation.

    Deterministic for a fixed seed.  Raises :class:`InfeasiblePackingError`
    when a point cannot be placed within ``attempt_budget`` attempts.
    """
    if count < 0:
        raise DomainError("count must be >= 0")
    if min_separation < 0:
        raise DomainError("min_separation must be >= 0")
    if bbox.width <= 0 or bbox.height <= 0:
        raise DomainError("bbox must be non-degenerate")
    rng = np.random.default_rng(seed)
    placed: list[Point2] = []
    sep2 = min_separation * min_separation
    for i in range(count):
        for _ in range(attempt_budget):
            x = bbox.x0 + rng.random() * bbox.width
            y = bbox.y0 + rng.random() * bbox.height
            if all((x - q.x) ** 2 + (y - q.y) ** 2 >= sep2 for q in placed):
                placed.append(Point2(x, y))
                break
        else:
            raise InfeasiblePackingError(
                f"could not place point {i + 1}/{count} at separation {min_separation} mm "
                f"after {attempt_budget} attempts"
            )
    return placed


# ---------------------------------------------------------------------------
# Delaunay triangulation (Bowyer-Watson with a deterministic cocircular tie-break)


def _orient(ax, ay, bx, by, cx, cy) -> float:
    """Twice the signed area of triangle abc (>0 when counter-clockwise)."""
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _incircle(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    """In-circle determinant: >0 iff d is inside the circumcircle of ccw abc."""
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    return (
        adx * (bdy * cd2 - bd2 * cdy)
        - ady * (bdx * cd2 - bd2 * cdx)
        + ad2 * (bdx * cdy - bdy * cdx)
    )


def _incircle_tol(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    m = max(abs(ax - dx), abs(ay - dy), abs(bx - dx), abs(by - dy), abs(cx - dx), abs(cy - dy), 1.0)
    return INCIRCLE_RELATIVE_EPS * m**4


def point_in_circumcircle(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    """True iff ``d`` lies strictly inside the circumcircle of triangle abc."""
    o = _orient(a.x, a.y, b.x, b.y, c.x, c.y)
    if o < 0:
        b, c = c, b
    det = _incircle(a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y)
    return det > _incircle_tol(a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y)


@dataclass(frozen=True)
class Triangulation:
    """A Delaunay triangulation: nodes, undirected edges, triangles.

    Edges are sorted index pairs, triangles sorted index triples; both lists
    are sorted so equal inputs produce identical structures.
    """

    nodes: tuple[Point2, ...]
    labels: tuple[str | None, ...]
    edges: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]

    def edge_index(self, a: int, b: int) -> int:
        return self.edges.index((min(a, b), max(a, b)))


def delaunay(points: list[Point2], labels: list[str | None] | None = None) -> Triangulation:
    """Delaunay triangulation of ``points``.

    Cocircular quadrilaterals are resolved toward the lexicographically
    smallest node-index diagonal, so the result is deterministic for a given
    input order.  Raises :class:`DegenerateInputError` for fewer than three
    points or an all-collinear set.
    """
    n = len(points)
    if n < 3:
        raise DegenerateInputError(f"need at least 3 points, got {n}")
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    if _all_collinear(xs, ys):
        raise DegenerateInputError("all points are collinear")

    # Coordinates including the three super-triangle vertices.
    cx = (min(xs) + max(xs)) / 2.0
    cy = (min(ys) + max(ys)) / 2.0
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0) * 64.0
    vx = xs + [cx - span, cx + span, cx]
    vy = ys + [cy - span, cy - span, cy + span]

    triangles: list[tuple[int, int, int]] = [_ccw(n, n + 1, n + 2, vx, vy)]
    for p in range(n):
        bad = []
        for t in triangles:
            a, b, c = t
            det = _incircle(vx[a], vy[a], vx[b], vy[b], vx[c], vy[c], vx[p], vy[p])
            if det > _incircle_tol(vx[a], vy[a], vx[b], vy[b], vx[c], vy[c], vx[p], vy[p]):
                bad.append(t)
        boundary = _boundary_edges(bad)
        triangles = [t for t in triangles if t not in set(bad)]
        for (u, v) in boundary:
            triangles.append(_ccw(u, v, p, vx, vy))

    triangles = [t for t in triangles if all(v < n for v in t)]
    triangles = _apply_cocircular_tiebreak(triangles, vx, vy)

    tri_sorted = tuple(sorted(tuple(sorted(t)) for t in triangles))
    edge_set = set()
    for t in tri_sorted:
        edge_set.update(((t[0], t[1]), (t[0], t[2]), (t[1], t[2])))
    if labels is None:
        labels = [None] * n
    return Triangulation(
        nodes=tuple(points),
        labels=tuple(labels),
        edges=tuple(sorted(edge_set)),
        triangles=tri_sorted,
    )


def _all_collinear(xs, ys) -> bool:
    tol = 1e-9 * max(1.0, max(map(abs, xs + ys))) ** 2
    for i in range(2, len(xs)):
        if abs(_orient(xs[0], ys[0], xs[1], ys[1], xs[i], ys[i])) > tol:
            return False
    return True


def _ccw(a, b, c, vx, vy):
    if _orient(vx[a], vy[a], vx[b], vy[b], vx[c], vy[c]) < 0:
        return (a, c, b)
    return (a, b, c)


def _boundary_edges(bad):
    """Directed edges of the cavity: edges appearing in exactly one bad triangle."""
    count: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []
    for (a, b, c) in bad:
        for e in ((a, b), (b, c), (c, a)):
            key = (min(e), max(e))
            if key in count:
                count[key] += 1
            else:
                count[key] = 1
                order.append(e)
    return [e for e in order if count[(min(e), max(e))] == 1]


def _apply_cocircular_tiebreak(triangles, vx, vy):
    """Flip cocircular quads toward the lexicographically smallest diagonal."""
    triangles = [tuple(t) for t in triangles]
    for _ in range(len(triangles) * 4 + 8):
        flipped = False
        adj: dict[tuple[int, int], list[int]] = {}
        for i, t in enumerate(triangles):
            for e in itertools.combinations(sorted(t), 2):
                adj.setdefault(e, []).append(i)
        for (u, v), owners in sorted(adj.items()):
            if len(owners) != 2:
                continue
            i, j = owners
            p = next(k for k in triangles[i] if k not in (u, v))
            q = next(k for k in triangles[j] if k not in (u, v))
            a, b, c = _ccw(*triangles[i], vx, vy)
            det = _incircle(vx[a], vy[a], vx[b], vy[b], vx[c], vy[c], vx[q], vy[q])
            tol = _incircle_tol(vx[a], vy[a], vx[b], vy[b], vx[c], vy[c], vx[q], vy[q])
            if abs(det) > tol:
                continue  # not cocircular
            current = (u, v)
            alternative = (min(p, q), max(p, q))
            if alternative < current and _is_convex_quad(u, v, p, q, vx, vy):
                triangles[i] = (p, q, u)
                triangles[j] = (p, q, v)
                flipped = True
                break
        if not flipped:
            return triangles
    return triangles


def _is_convex_quad(u, v, p, q, vx, vy) -> bool:
    """True when p and q lie strictly on opposite sides of segment uv."""
    s1 = _orient(vx[u], vy[u], vx[v], vy[v], vx[p], vy[p])
    s2 = _orient(vx[u], vy[u], vx[v], vy[v], vx[q], vy[q])
    return s1 * s2 < 0


# ---------------------------------------------------------------------------
# Segment helpers


def segment_point_distance(p: Point2, q: Point2, r: Point2) -> float:
    """Distance from point r to segment pq."""
    dx, dy = q.x - p.x, q.y - p.y
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return p.distance_to(r)
    t = max(0.0, min(1.0, ((r.x - p.x) * dx + (r.y - p.y) * dy) / L2))
    return math.hypot(p.x + t * dx - r.x, p.y + t * dy - r.y)


def segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    """Proper or touching intersection of segments p1p2 and q1q2."""
    d1 = _orient(q1.x, q1.y, q2.x, q2.y, p1.x, p1.y)
    d2 = _orient(q1.x, q1.y, q2.x, q2.y, p2.x, p2.y)
    d3 = _orient(p1.x, p1.y, p2.x, p2.y, q1.x, q1.y)
    d4 = _orient(p1.x, p1.y, p2.x, p2.y, q2.x, q2.y)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    for (a, b, c, d) in ((q1, q2, p1, d1), (q1, q2, p2, d2), (p1, p2, q1, d3), (p1, p2, q2, d4)):
        if d == 0 and _on_segment(a, b, c):
            return True
    return False


def _on_segment(a: Point2, b: Point2, c: Point2) -> bool:
    return (
        min(a.x, b.x) <= c.x <= max(a.x, b.x)
        and min(a.y, b.y) <= c.y <= max(a.y, b.y)
    )


def segment_segment_distance(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> float:
    if segments_intersect(p1, p2, q1, q2):
        return 0.0
    return min(
        segment_point_distance(p1, p2, q1),
        segment_point_distance(p1, p2, q2),
        segment_point_distance(q1, q2, p1),
        segment_point_distance(q1, q2, p2),
    )


def segment_rect_distance(p: Point2, q: Point2, rect: Rect) -> float:
    """Distance from segment pq to (the closed area of) ``rect``."""
    if rect.contains(p) or rect.contains(q):
        return 0.0
    c0 = Point2(rect.x0, rect.y0)
    c1 = Point2(rect.x1, rect.y0)
    c2 = Point2(rect.x1, rect.y1)
    c3 = Point2(rect.x0, rect.y1)
    return min(
        segment_segment_distance(p, q, c0, c1),
        segment_segment_distance(p, q, c1, c2),
        segment_segment_distance(p, q, c2, c3),
        segment_segment_distance(p, q, c3, c0),
    )


def clip_segment_to_rect(p: Point2, q: Point2, rect: Rect) -> tuple[Point2, Point2] | None:
    """Liang-Barsky clip of segment pq against ``rect``; None when disjoint."""
    dx, dy = q.x - p.x, q.y - p.y
    t0, t1 = 0.0, 1.0
    for (den, num) in (
        (-dx, p.x - rect.x0),
        (dx, rect.x1 - p.x),
        (-dy, p.y - rect.y0),
        (dy, rect.y1 - p.y),
    ):
        if den == 0:
            if num < 0:
                return None
            continue
        t = num / den
        if den < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
    if t0 > t1:
        return None
    return (
        Point2(p.x + t0 * dx, p.y + t0 * dy),
        Point2(p.x + t1 * dx, p.y + t1 * dy),
    )


# ---------------------------------------------------------------------------
# Network


@dataclass(frozen=True)
class Network:
    """The channel network: triangulation plus channel cross-section and electrodes.

    ``electrodes`` maps the three electrode names (BL, C, TR) to node indices.
    """

    triangulation: Triangulation
    channel_width_mm: float = 4.0
    channel_depth_mm: float = 2.0
    electrodes: dict[str, int] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.channel_width_mm <= 0 or self.channel_depth_mm <= 0:
            raise DomainError("channel cross-section must be positive")
        if not self.electrodes:
            raise DomainError("network needs at least one electrode")
        n = len(self.triangulation.nodes)
        for name, idx in self.electrodes.items():
            if not 0 <= idx < n:
                raise DomainError(f"electrode {name} refers to missing node {idx}")

    @property
    def nodes(self) -> tuple[Point2, ...]:
        return self.triangulation.nodes

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.triangulation.edges

    def edge_endpoints(self, i: int) -> tuple[Point2, Point2]:
        a, b = self.triangulation.edges[i]
        return self.triangulation.nodes[a], self.triangulation.nodes[b]

    def edge_length_mm(self, i: int) -> float:
        p, q = self.edge_endpoints(i)
        return p.distance_to(q)

    def electrode_point(self, name: str) -> Point2:
        return self.triangulation.nodes[self.electrodes[name]]


def edges_under_cell(network: Network, cell: CellId) -> list[tuple[int, tuple[Point2, Point2]]]:
    """Edges whose widened channel intersects the cell square.

    An edge qualifies when its centreline lies within channel_width/2 of the
    cell rectangle; the returned sub-segment is the centreline clipped to the
    rectangle inflated by that half-width.
    """
    rect = cell_rectangle(cell)
    half = network.channel_width_mm / 2.0
    out = []
    for i in range(len(network.edges)):
        p, q = network.edge_endpoints(i)
        if segment_rect_distance(p, q, rect) <= half:
            clipped = clip_segment_to_rect(p, q, rect.inflated(half))
            if clipped is None:
                # centreline grazes a rounded corner; report the nearest point
                clipped = _nearest_subsegment(p, q, rect)
            out.append((i, clipped))
    return out


def _nearest_subsegment(p: Point2, q: Point2, rect: Rect) -> tuple[Point2, Point2]:
    best_t, best_d = 0.0, float("inf")
    for k in range(101):
        t = k / 100.0
        pt = Point2(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
        d = segment_rect_distance(pt, pt, rect)
        if d < best_d:
            best_t, best_d = t, d
    pt = Point2(p.x + best_t * (q.x - p.x), p.y + best_t * (q.y - p.y))
    return (pt, pt)

"""Global self-intersection detection for triangulated surfaces.

Broad phase: an axis-aligned bounding-box hierarchy over the triangle
soup.  Narrow phase: orientation-sign gauntlet with exact rational
fallback, so every reported contact is the true intersection of the
given float coordinates.  Contacts between triangles from the same or
vertex-adjacent source faces are excluded from the self-intersection
list, but flagged separately when they extend beyond the cells the
faces legitimately share (a local embedding failure).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mesh import MeshError
from .predicates import orient3d
from .refine import Refinement


class DegenerateTriangleError(MeshError):
    """The soup would contain a zero-area triangle."""


Vec3 = tuple[Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class SoupTriangle:
    """One triangle with provenance back to the refinement source."""

    coords: np.ndarray                 # (3, 3) float64 corner rows
    source_face: int
    corners: tuple[int, int, int]      # derived vertex indices


@dataclass(frozen=True, eq=False)
class TriangleSoup:
    triangles: tuple[SoupTriangle, ...]
    points: np.ndarray                          # derived vertex coordinates
    face_vertices: dict[int, frozenset[int]]    # source face -> source vertex ids
    face_edges: dict[int, frozenset[tuple[int, int]]]

    def __len__(self) -> int:
        return len(self.triangles)


def _is_degenerate(p0, p1, p2) -> bool:
    u = (_rat(p1)[0] - _rat(p0)[0], _rat(p1)[1] - _rat(p0)[1], _rat(p1)[2] - _rat(p0)[2])
    v = (_rat(p2)[0] - _rat(p0)[0], _rat(p2)[1] - _rat(p0)[1], _rat(p2)[2] - _rat(p0)[2])
    c = _cross(u, v)
    return c[0] == 0 and c[1] == 0 and c[2] == 0


def triangle_soup(refinement: Refinement) -> TriangleSoup:
    """Triangle soup of a refinement, with source-face adjacency data.

    Raises DegenerateTriangleError if any derived triangle has zero area
    (exact test), since the narrow phase assumes proper triangles.
    """
    derived = refinement.derived
    pts = derived.vertices
    tris = []
    bad = []
    for ti, face in enumerate(derived.faces):
        a, b, c = face
        if _is_degenerate(pts[a], pts[b], pts[c]):
            bad.append(ti)
            continue
        tris.append(SoupTriangle(
            coords=pts[list(face)],
            source_face=refinement.triangle_sources[ti],
            corners=(a, b, c),
        ))
    if bad:
        raise DegenerateTriangleError(
            f"{len(bad)} zero-area derived triangle(s), first at index {bad[0]}"
        )
    source = refinement.source
    face_vertices = {}
    face_edges = {}
    for fi, face in enumerate(source.faces):
        face_vertices[fi] = frozenset(face)
        face_edges[fi] = frozenset(
            tuple(sorted((face[i], face[(i + 1) % len(face)]))) for i in range(len(face))
        )
    return TriangleSoup(
        triangles=tuple(tris),
        points=pts,
        face_vertices=face_vertices,
        face_edges=face_edges,
    )


def soup_from_arrays(coords: np.ndarray) -> TriangleSoup:
    """Soup of independent triangles (shape (n, 3, 3)), no shared cells.

    Every triangle gets its own source face and corner ids, so no pair is
    excluded as adjacent.  Intended for randomized testing and ad-hoc use.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 3 or coords.shape[1:] != (3, 3):
        raise ValueError(f"expected (n, 3, 3) corner array, got {coords.shape}")
    tris = []
    for ti in range(coords.shape[0]):
        p = coords[ti]
        if _is_degenerate(p[0], p[1], p[2]):
            raise DegenerateTriangleError(f"zero-area triangle at index {ti}")
        tris.append(SoupTriangle(
            coords=p.copy(),
            source_face=ti,
            corners=(3 * ti, 3 * ti + 1, 3 * ti + 2),
        ))
    return TriangleSoup(
        triangles=tuple(tris),
        points=coords.reshape(-1, 3),
        face_vertices={t.source_face: frozenset(t.corners) for t in tris},
        face_edges={
            t.source_face: frozenset(
                tuple(sorted(pair)) for pair in
                ((t.corners[0], t.corners[1]), (t.corners[1], t.corners[2]), (t.corners[2], t.corners[0]))
            )
            for t in tris
        },
    )


# ---------------------------------------------------------------------------
# broad phase

@dataclass(eq=False)
class BvhNode:
    lo: np.ndarray
    hi: np.ndarray
    start: int
    end: int
    left: "BvhNode | None" = None
    right: "BvhNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def count(self) -> int:
        return self.end - self.start


@dataclass(eq=False)
class BoundingHierarchy:
    root: BvhNode
    order: tuple[int, ...]      # leaves partition this permutation by [start, end)
    tri_lo: np.ndarray
    tri_hi: np.ndarray
    leaf_size: int


def build_hierarchy(soup: TriangleSoup, leaf_size: int = 8) -> BoundingHierarchy:
    """Median-split box tree over the soup, split on the longest box axis.

    The split sorts by (box centroid, triangle index), so the tree is a
    pure function of the coordinates and deterministic across runs.
    """
    if len(soup) == 0:
        raise ValueError("empty soup")
    if leaf_size < 1:
        raise ValueError("leaf_size must be >= 1")
    n = len(soup)
    tri_lo = np.stack([t.coords.min(axis=0) for t in soup.triangles])
    tri_hi = np.stack([t.coords.max(axis=0) for t in soup.triangles])
    centroid = 0.5 * (tri_lo + tri_hi)
    order = list(range(n))

    def build(start: int, end: int) -> BvhNode:
        idx = order[start:end]
        lo = tri_lo[idx].min(axis=0)
        hi = tri_hi[idx].max(axis=0)
        node = BvhNode(lo=lo, hi=hi, start=start, end=end)
        if end - start > leaf_size:
            axis = int(np.argmax(hi - lo))
            idx.sort(key=lambda t: (centroid[t, axis], t))
            order[start:end] = idx
            mid = start + (end - start) // 2
            node.left = build(start, mid)
            node.right = build(mid, end)
        return node

    root = build(0, n)
    return BoundingHierarchy(
        root=root, order=tuple(order), tri_lo=tri_lo, tri_hi=tri_hi, leaf_size=leaf_size
    )


def _boxes_overlap(a: BvhNode, b: BvhNode) -> bool:
    return bool(np.all(a.lo <= b.hi) and np.all(b.lo <= a.hi))


def candidate_pairs(h: BoundingHierarchy) -> list[tuple[int, int]]:
    """All triangle index pairs (i < j) whose node boxes overlap (inclusive)."""
    order = h.order
    out: list[tuple[int, int]] = []
    stack: list[tuple[BvhNode, BvhNode]] = [(h.root, h.root)]
    while stack:
        a, b = stack.pop()
        if a is b:
            if a.is_leaf:
                for s in range(a.start, a.end):
                    for t in range(s + 1, a.end):
                        i, j = order[s], order[t]
                        out.append((i, j) if i < j else (j, i))
            else:
                stack.append((a.left, a.left))
                stack.append((a.right, a.right))
                stack.append((a.left, a.right))
            continue
        if not _boxes_overlap(a, b):
            continue
        if a.is_leaf and b.is_leaf:
            for s in range(a.start, a.end):
                for t in range(b.start, b.end):
                    i, j = order[s], order[t]
                    out.append((i, j) if i < j else (j, i))
        elif a.is_leaf or (not b.is_leaf and b.count > a.count):
            stack.append((a, b.left))
            stack.append((a, b.right))
        else:
            stack.append((a.left, b))
            stack.append((a.right, b))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# narrow phase, exact over the rational values of the float coordinates

def _rat(p) -> Vec3:
    return (Fraction(float(p[0])), Fraction(float(p[1])), Fraction(float(p[2])))


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _lerp(a: Vec3, b: Vec3, t: Fraction) -> Vec3:
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2]))


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a: Vec3, b: Vec3) -> Fraction:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@dataclass(frozen=True)
class Contact:
    """Exact intersection of two triangles.

    kind is one of "touch-point", "touch-segment", "transversal",
    "coplanar-overlap"; points holds the witness geometry in exact
    rationals (one point, two segment endpoints, or a polygon ring).
    """

    kind: str
    points: tuple[Vec3, ...]

    def witness(self) -> tuple[tuple[float, float, float], ...]:
        return tuple((float(p[0]), float(p[1]), float(p[2])) for p in self.points)


def _plane_section(tri: tuple[Vec3, Vec3, Vec3], d: tuple[Fraction, ...]) -> list[Vec3]:
    """Points of a triangle's intersection with a plane, given the three
    signed plane values of its corners (not all one strict sign)."""
    pts: list[Vec3] = []
    for k in range(3):
        if d[k] == 0:
            pts.append(tri[k])
    for a, b in ((0, 1), (1, 2), (2, 0)):
        if d[a] * d[b] < 0:
            t = d[a] / (d[a] - d[b])
            pts.append(_lerp(tri[a], tri[b], t))
    uniq: list[Vec3] = []
    for p in pts:
        if p not in uniq:
            uniq.append(p)
    return uniq


def _dominant_axis(n: Vec3) -> int:
    mags = (abs(n[0]), abs(n[1]), abs(n[2]))
    return max(range(3), key=lambda k: mags[k])


def _proj(p: Vec3, axis: int) -> tuple[Fraction, Fraction]:
    if axis == 0:
        return (p[1], p[2])
    if axis == 1:
        return (p[2], p[0])
    return (p[0], p[1])


def _cross2(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _strictly_inside(p: Vec3, tri: tuple[Vec3, Vec3, Vec3], normal: Vec3) -> bool:
    """True when a point of the triangle's plane is strictly interior."""
    axis = _dominant_axis(normal)
    q = _proj(p, axis)
    t2 = tuple(_proj(v, axis) for v in tri)
    sigma = _cross2(t2[0], t2[1], t2[2])
    orient = 1 if sigma > 0 else -1
    for a, b in ((0, 1), (1, 2), (2, 0)):
        s = _cross2(t2[a], t2[b], q)
        if (s > 0) - (s < 0) != orient:
            return False
    return True


def _clip_coplanar(subject: tuple[Vec3, ...], clip: tuple[Vec3, ...], axis: int) -> list[Vec3]:
    """Sutherland-Hodgman clip of subject by a convex clip triangle, both in
    one plane; sidedness is computed on the 2-d projection along axis while
    crossing points are interpolated on the 3-d rationals."""
    clip2 = [_proj(p, axis) for p in clip]
    if _cross2(clip2[0], clip2[1], clip2[2]) < 0:
        clip2.reverse()
    out = list(subject)
    for e in range(3):
        e0, e1 = clip2[e], clip2[(e + 1) % 3]
        if not out:
            break
        inp = out
        out = []
        sides = [_cross2(e0, e1, _proj(q, axis)) for q in inp]
        for k in range(len(inp)):
            cur, nxt = inp[k], inp[(k + 1) % len(inp)]
            scur, snxt = sides[k], sides[(k + 1) % len(inp)]
            if scur >= 0:
                out.append(cur)
            if (scur > 0 and snxt < 0) or (scur < 0 and snxt > 0):
                t = scur / (scur - snxt)
                out.append(_lerp(cur, nxt, t))
    uniq: list[Vec3] = []
    for p in out:
        if p not in uniq:
            uniq.append(p)
    return uniq


def _collinear_extremes(pts: list[Vec3]) -> tuple[Vec3, Vec3]:
    base = pts[0]
    ref = next(p for p in pts if p != base)
    d = _sub(ref, base)
    keyed = sorted((_dot(_sub(p, base), d), p) for p in pts)
    return keyed[0][1], keyed[-1][1]


def triangle_contact(p: np.ndarray, q: np.ndarray) -> Contact | None:
    """Exact contact of two positive-area triangles, or None if disjoint."""
    sq = [orient3d(p[0], p[1], p[2], q[k]) for k in range(3)]
    if all(s > 0 for s in sq) or all(s < 0 for s in sq):
        return None
    sp = [orient3d(q[0], q[1], q[2], p[k]) for k in range(3)]
    if all(s > 0 for s in sp) or all(s < 0 for s in sp):
        return None

    a = (_rat(p[0]), _rat(p[1]), _rat(p[2]))
    b = (_rat(q[0]), _rat(q[1]), _rat(q[2]))
    n1 = _cross(_sub(a[1], a[0]), _sub(a[2], a[0]))
    dq = tuple(_dot(n1, _sub(b[k], a[0])) for k in range(3))

    if dq == (0, 0, 0):
        axis = _dominant_axis(n1)
        poly = _clip_coplanar(b, a, axis)
        if not poly:
            return None
        if len(poly) >= 3:
            p2 = [_proj(v, axis) for v in poly]
            area2 = sum(
                p2[k][0] * p2[(k + 1) % len(p2)][1] - p2[(k + 1) % len(p2)][0] * p2[k][1]
                for k in range(len(p2))
            )
            if area2 != 0:
                return Contact("coplanar-overlap", tuple(poly))
        if len(poly) == 1:
            return Contact("touch-point", (poly[0],))
        lo, hi = _collinear_extremes(poly)
        if lo == hi:
            return Contact("touch-point", (lo,))
        return Contact("touch-segment", (lo, hi))

    n2 = _cross(_sub(b[1], b[0]), _sub(b[2], b[0]))
    dp = tuple(_dot(n2, _sub(a[k], b[0])) for k in range(3))
    s1 = _plane_section(a, dp)
    s2 = _plane_section(b, dq)
    if not s1 or not s2:
        return None

    u = _cross(n1, n2)
    t1 = [(_dot(u, pt), pt) for pt in s1]
    t2 = [(_dot(u, pt), pt) for pt in s2]
    lo = max(min(v for v, _ in t1), min(v for v, _ in t2))
    hi = min(max(v for v, _ in t1), max(v for v, _ in t2))
    if lo > hi:
        return None

    def at(value):
        for v, pt in t1 + t2:
            if v == value:
                return pt
        raise AssertionError("interval endpoint lost")

    if lo == hi:
        return Contact("touch-point", (at(lo),))
    plo, phi = at(lo), at(hi)
    mid = tuple((plo[k] + phi[k]) / 2 for k in range(3))
    if _strictly_inside(mid, a, n1) and _strictly_inside(mid, b, n2):
        return Contact("transversal", (plo, phi))
    return Contact("touch-segment", (plo, phi))


# ---------------------------------------------------------------------------
# shared-cell exclusion

def _point_on_segment(p: Vec3, s0: Vec3, s1: Vec3) -> bool:
    d = _sub(s1, s0)
    w = _sub(p, s0)
    if _cross(w, d) != (0, 0, 0):
        return False
    t = _dot(w, d)
    return 0 <= t <= _dot(d, d)


def _point_allowed(p: Vec3, pts: list[Vec3], segs: list[tuple[Vec3, Vec3]]) -> bool:
    if any(p == q for q in pts):
        return True
    return any(_point_on_segment(p, s0, s1) for s0, s1 in segs)


def _segment_allowed(p: Vec3, q: Vec3, segs: list[tuple[Vec3, Vec3]]) -> bool:
    """True when the whole segment [p, q] lies inside the union of segs."""
    d = _sub(q, p)
    intervals = []
    for s0, s1 in segs:
        if _cross(_sub(s0, p), d) != (0, 0, 0) or _cross(_sub(s1, p), d) != (0, 0, 0):
            continue
        t0, t1 = _dot(_sub(s0, p), d), _dot(_sub(s1, p), d)
        intervals.append((min(t0, t1), max(t0, t1)))
    if not intervals:
        return False
    intervals.sort()
    need_lo, need_hi = Fraction(0), _dot(d, d)
    covered = need_lo
    for lo, hi in intervals:
        if lo > covered:
            return False
        covered = max(covered, hi)
        if covered >= need_hi:
            return True
    return covered >= need_hi


def _allowed_cells(soup: TriangleSoup, i: int, j: int):
    """Shared-cell geometry of an adjacent pair: points and segments the
    two triangles may legitimately have in common."""
    ti, tj = soup.triangles[i], soup.triangles[j]
    pts: list[Vec3] = []
    segs: list[tuple[Vec3, Vec3]] = []
    if ti.source_face == tj.source_face:
        shared = sorted(set(ti.corners) & set(tj.corners))
        pts = [_rat(soup.points[c]) for c in shared]
        for s in range(len(pts)):
            for t in range(s + 1, len(pts)):
                segs.append((pts[s], pts[t]))
    else:
        fv = soup.face_vertices
        fe = soup.face_edges
        for v in sorted(fv[ti.source_face] & fv[tj.source_face]):
            pts.append(_rat(soup.points[v]))
        for u, v in sorted(fe[ti.source_face] & fe[tj.source_face]):
            segs.append((_rat(soup.points[u]), _rat(soup.points[v])))
    return pts, segs


def _beyond_allowed(contact: Contact, pts, segs) -> bool:
    if contact.kind == "coplanar-overlap":
        return True     # positive area never fits in shared vertices/edges
    if len(contact.points) == 1:
        return not _point_allowed(contact.points[0], pts, segs)
    p, q = contact.points
    return not _segment_allowed(p, q, segs)


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class PairContact:
    """A self-intersection between triangles of non-adjacent source faces."""

    i: int
    j: int
    kind: str
    witness: tuple[tuple[float, float, float], ...]


@dataclass(frozen=True)
class LocalOverlap:
    """Adjacent-face contact extending beyond the cells the faces share."""

    i: int
    j: int
    kind: str
    witness: tuple[tuple[float, float, float], ...]


@dataclass(frozen=True)
class IntersectionReport:
    pairs: tuple[PairContact, ...]
    local_overlaps: tuple[LocalOverlap, ...]
    n_candidates: int

    @property
    def intersecting(self) -> bool:
        return bool(self.pairs)

    @property
    def kind_census(self) -> dict[str, int]:
        census: dict[str, int] = {}
        for pc in self.pairs:
            census[pc.kind] = census.get(pc.kind, 0) + 1
        return census


def _adjacent(soup: TriangleSoup, i: int, j: int) -> bool:
    ti, tj = soup.triangles[i], soup.triangles[j]
    if ti.source_face == tj.source_face:
        return True
    return bool(soup.face_vertices[ti.source_face] & soup.face_vertices[tj.source_face])


def self_intersections(
    soup: TriangleSoup, hierarchy: BoundingHierarchy | None = None
) -> IntersectionReport:
    """All contacts between triangles of non-adjacent source faces, plus
    local overlaps of adjacent ones beyond their shared cells.

    The result is a pure set function of the coordinates: pair lists are
    sorted by index and independent of hierarchy shape.
    """
    if hierarchy is None:
        hierarchy = build_hierarchy(soup)
    pairs: list[PairContact] = []
    overlaps: list[LocalOverlap] = []
    cands = candidate_pairs(hierarchy)
    lo, hi = hierarchy.tri_lo, hierarchy.tri_hi
    for i, j in cands:
        if not (np.all(lo[i] <= hi[j]) and np.all(lo[j] <= hi[i])):
            continue
        contact = triangle_contact(soup.triangles[i].coords, soup.triangles[j].coords)
        if contact is None:
            continue
        if _adjacent(soup, i, j):
            pts, segs = _allowed_cells(soup, i, j)
            if _beyond_allowed(contact, pts, segs):
                overlaps.append(LocalOverlap(i, j, contact.kind, contact.witness()))
        else:
            pairs.append(PairContact(i, j, contact.kind, contact.witness()))
    pairs.sort(key=lambda pc: (pc.i, pc.j))
    overlaps.sort(key=lambda ov: (ov.i, ov.j))
    return IntersectionReport(
        pairs=tuple(pairs), local_overlaps=tuple(overlaps), n_candidates=len(cands)
    )


def classify_immersion(locally_embedded: bool, pairs) -> str:
    """Final verdict: embedded, immersed, or not-an-immersion.

    locally_embedded is the flatness module's vertex-link pass; pairs is
    the self-intersection list between non-adjacent faces.
    """
    if not locally_embedded:
        return "not-an-immersion"
    return "embedded" if len(pairs) == 0 else "immersed"

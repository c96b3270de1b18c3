"""Triangle contact classification, bounding hierarchy, self-intersection scan.

The hierarchy is validated against exhaustive pair enumeration (a one-leaf
hierarchy makes the same scan consider every pair), and contact verdicts are
cross-checked with a separating-axis tester on robust configurations.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatcheck import (
    DegenerateTriangleError,
    GeneratorSpec,
    build_complex,
    build_hierarchy,
    candidate_pairs,
    classify_immersion,
    generate,
    self_intersections,
    soup_from_arrays,
    triangle_contact,
    triangle_soup,
    triangulate_faces,
)

from conftest import grid_klein, grid_torus, random_rotation

T_BASE = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [0.0, 4.0, 0.0]])


def _soup_for(label_spec):
    return triangle_soup(triangulate_faces(generate(label_spec)))


def _brute_report(soup):
    """Same scan with a single-leaf hierarchy: every pair is considered."""
    h = build_hierarchy(soup, leaf_size=max(1, len(soup)))
    assert len(candidate_pairs(h)) == len(soup) * (len(soup) - 1) // 2
    return self_intersections(soup, h)


def test_disjoint_triangles():
    far = T_BASE + np.array([10.0, 10.0, 10.0])
    assert triangle_contact(T_BASE, far) is None
    above = T_BASE + np.array([0.0, 0.0, 1.0])
    assert triangle_contact(T_BASE, above) is None


def test_shared_vertex_touch_point():
    other = np.array([[0.0, 0.0, 0.0], [-3.0, 1.0, 1.0], [-3.0, -1.0, 1.0]])
    c = triangle_contact(T_BASE, other)
    assert c is not None and c.kind == "touch-point"
    assert c.points == ((Fraction(0), Fraction(0), Fraction(0)),)


def test_shared_edge_touch_segment():
    roof = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [2.0, -2.0, 2.0]])
    c = triangle_contact(T_BASE, roof)
    assert c is not None and c.kind == "touch-segment"
    pts = {tuple(map(float, p)) for p in c.points}
    assert pts == {(0.0, 0.0, 0.0), (4.0, 0.0, 0.0)}


def test_transversal_crossing_witness():
    # vertical triangle stabbing the base through x in [1, 2] at y = 1
    stab = np.array([[1.0, 1.0, -1.0], [2.0, 1.0, -1.0], [1.5, 1.0, 1.0]])
    c = triangle_contact(T_BASE, stab)
    assert c is not None and c.kind == "transversal"
    pts = {tuple(map(float, p)) for p in c.points}
    assert pts == {(1.25, 1.0, 0.0), (1.75, 1.0, 0.0)}


def test_vertex_resting_on_interior():
    poke = np.array([[1.0, 1.0, 0.0], [2.0, 1.0, 3.0], [1.0, 2.0, 3.0]])
    c = triangle_contact(T_BASE, poke)
    assert c is not None and c.kind == "touch-point"
    assert c.points == ((Fraction(1), Fraction(1), Fraction(0)),)


def test_edge_resting_in_plane():
    # one edge lies inside the base plane, the rest tilts away
    rest = np.array([[1.0, 1.0, 0.0], [2.0, 1.0, 0.0], [1.5, 1.0, 2.0]])
    c = triangle_contact(T_BASE, rest)
    assert c is not None and c.kind == "touch-segment"
    pts = {tuple(map(float, p)) for p in c.points}
    assert pts == {(1.0, 1.0, 0.0), (2.0, 1.0, 0.0)}


def test_coplanar_overlap():
    shifted = T_BASE + np.array([1.0, 1.0, 0.0])
    c = triangle_contact(T_BASE, shifted)
    assert c is not None and c.kind == "coplanar-overlap"


def test_coplanar_exact_tangency():
    mirrored = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [2.0, -4.0, 0.0]])
    c = triangle_contact(T_BASE, mirrored)
    assert c is not None and c.kind == "touch-segment"
    corner = np.array([[4.0, 0.0, 0.0], [8.0, 0.0, 0.0], [4.0, -4.0, 0.0]])
    c2 = triangle_contact(T_BASE, corner)
    assert c2 is not None and c2.kind == "touch-point"
    assert c2.points == ((Fraction(4), Fraction(0), Fraction(0)),)


def test_identical_triangles_overlap():
    c = triangle_contact(T_BASE, T_BASE.copy())
    assert c is not None and c.kind == "coplanar-overlap"


def test_contact_witness_floats():
    stab = np.array([[1.0, 1.0, -1.0], [2.0, 1.0, -1.0], [1.5, 1.0, 1.0]])
    c = triangle_contact(T_BASE, stab)
    w = c.witness()
    assert isinstance(w, tuple)
    assert all(isinstance(x, float) for p in w for x in p)


def test_soup_rejects_degenerate():
    flat = np.array([[[0, 0, 0], [1, 1, 1], [2, 2, 2]]], dtype=float)
    with pytest.raises(DegenerateTriangleError):
        soup_from_arrays(flat)


def test_soup_from_arrays_metadata():
    coords = np.stack([T_BASE, T_BASE + 10.0])
    soup = soup_from_arrays(coords)
    assert len(soup) == 2
    assert soup.triangles[1].corners == (3, 4, 5)
    assert soup.face_vertices[0].isdisjoint(soup.face_vertices[1])


def test_hierarchy_candidates_cover_contacts():
    soup = _soup_for(GeneratorSpec("grid_klein", m=3, n=3))
    cands = set(candidate_pairs(build_hierarchy(soup)))
    report = self_intersections(soup)
    for pair in report.pairs:
        assert (pair.i, pair.j) in cands
    for pair in report.local_overlaps:
        assert (pair.i, pair.j) in cands


def test_hierarchy_matches_brute_on_quotients():
    for spec in (
        GeneratorSpec("grid_klein", m=3, n=3),
        GeneratorSpec("folded_flat_torus", m=4, n=4, folds=2),
        GeneratorSpec("doubled_cone", total_angle=4 * math.pi),
    ):
        soup = _soup_for(spec)
        fast = self_intersections(soup)
        brute = _brute_report(soup)
        assert fast.pairs == brute.pairs, spec.label
        assert fast.local_overlaps == brute.local_overlaps, spec.label


def test_leaf_size_independence():
    soup = _soup_for(GeneratorSpec("grid_klein", m=3, n=3))
    reference = self_intersections(soup, build_hierarchy(soup, leaf_size=8))
    for leaf in (1, 2, 3, 5, 64):
        got = self_intersections(soup, build_hierarchy(soup, leaf_size=leaf))
        assert got.pairs == reference.pairs
        assert got.local_overlaps == reference.local_overlaps


def test_embedded_meshes_are_clean():
    for spec in (
        GeneratorSpec("tetrahedron"),
        GeneratorSpec("cube"),
        GeneratorSpec("icosahedron"),
        GeneratorSpec("grid_torus", m=4, n=5),
    ):
        report = self_intersections(_soup_for(spec))
        assert report.pairs == ()
        assert report.local_overlaps == ()
        assert not report.intersecting


def test_quotient_counts_pinned():
    # regression pins; the values are corroborated by the brute-force scan
    # above and by the embedded controls being clean
    expect = {
        "grid_klein_3x3": (31, 68),
        "grid_klein_5x4": (197, 102),
        "folded_flat_torus_4x4_folds2": (216, 84),
    }
    for spec in (
        GeneratorSpec("grid_klein", m=3, n=3),
        GeneratorSpec("grid_klein", m=5, n=4),
        GeneratorSpec("folded_flat_torus", m=4, n=4, folds=2),
    ):
        report = self_intersections(_soup_for(spec))
        assert (len(report.pairs), len(report.local_overlaps)) == expect[spec.label]


def test_shared_edge_fold_is_local_overlap():
    # two faces share an edge; one folds back exactly onto the other
    verts = [(0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (1.0, 2.0, 0.0), (1.0, 2.0, 0.0)]
    cx = build_complex(verts, [(0, 1, 2), (1, 0, 3)])
    report = self_intersections(triangle_soup(triangulate_faces(cx)))
    assert report.pairs == ()
    assert len(report.local_overlaps) == 1
    assert report.local_overlaps[0].kind == "coplanar-overlap"


def test_shared_edge_roof_is_clean():
    verts = [(0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (1.0, 2.0, 0.0), (1.0, -2.0, 1.0)]
    cx = build_complex(verts, [(0, 1, 2), (1, 0, 3)])
    report = self_intersections(triangle_soup(triangulate_faces(cx)))
    assert report.pairs == ()
    assert report.local_overlaps == ()


def test_shared_vertex_pair_is_clean():
    verts = [
        (0.0, 0.0, 0.0),
        (2.0, 0.0, 0.0),
        (0.0, 2.0, 0.0),
        (-2.0, 0.0, 1.0),
        (0.0, -2.0, 1.0),
    ]
    cx = build_complex(verts, [(0, 1, 2), (0, 3, 4)])
    report = self_intersections(triangle_soup(triangulate_faces(cx)))
    assert report.pairs == ()
    assert report.local_overlaps == ()


def test_distinct_faces_crossing_counted():
    verts = [
        (0.0, 0.0, 0.0),
        (4.0, 0.0, 0.0),
        (0.0, 4.0, 0.0),
        (1.0, 1.0, -1.0),
        (2.0, 1.0, -1.0),
        (1.5, 1.0, 1.0),
    ]
    cx = build_complex(verts, [(0, 1, 2), (3, 4, 5)])
    report = self_intersections(triangle_soup(triangulate_faces(cx)))
    assert len(report.pairs) == 1
    assert report.pairs[0].kind == "transversal"
    assert report.intersecting
    assert report.local_overlaps == ()


def test_insertion_order_independence():
    soup = _soup_for(GeneratorSpec("grid_klein", m=3, n=3))
    coords = np.stack([t.coords for t in soup.triangles])
    base = self_intersections(soup_from_arrays(coords))
    base_set = {(p.i, p.j, p.kind) for p in base.pairs}

    rng = np.random.default_rng(11)
    perm = rng.permutation(len(coords))
    permuted = self_intersections(soup_from_arrays(coords[perm]))
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(len(perm))
    mapped = set()
    for p in permuted.pairs:
        a, b = sorted((int(perm[p.i]), int(perm[p.j])))
        mapped.add((a, b, p.kind))
    assert mapped == base_set


def test_axis_permutation_and_scaling_exact():
    soup = _soup_for(GeneratorSpec("grid_klein", m=3, n=3))
    coords = np.stack([t.coords for t in soup.triangles])
    base = self_intersections(soup_from_arrays(coords))
    base_set = {(p.i, p.j, p.kind) for p in base.pairs}
    # exact float transforms: axis swap, sign flip, power-of-two scale, shift
    moved = coords[:, :, [2, 0, 1]] * np.array([4.0, -0.5, 8.0]) + 3.0
    got = self_intersections(soup_from_arrays(moved))
    assert {(p.i, p.j, p.kind) for p in got.pairs} == base_set


def test_rotation_preserves_contact_structure():
    """Rigid motion keeps the contact structure of robust configurations.

    Exact tangencies are excluded: rotating floats perturbs them by an ulp
    and the exact narrow phase truthfully reports the perturbed geometry.
    General-position crossings and separations survive any rigid motion.
    """
    rng = np.random.default_rng(5)
    coords = rng.uniform(-1.0, 1.0, size=(40, 3, 3))
    base = self_intersections(soup_from_arrays(coords))
    base_set = {(p.i, p.j, p.kind) for p in base.pairs}
    assert base_set, "expected some crossings in a dense random soup"
    assert {k for _, _, k in base_set} == {"transversal"}
    for _ in range(3):
        rot = random_rotation(rng)
        got = self_intersections(soup_from_arrays(coords @ rot.T))
        assert {(p.i, p.j, p.kind) for p in got.pairs} == base_set


def _sat_disjoint_margin(p, q):
    """Separating-axis verdict: (separated, margin).

    margin > 0 with separated=True means a strict gap on some axis; with
    separated=False it is the smallest projection overlap across all axes.
    """
    ep = [p[1] - p[0], p[2] - p[1], p[0] - p[2]]
    eq = [q[1] - q[0], q[2] - q[1], q[0] - q[2]]
    axes = [np.cross(ep[0], ep[1]), np.cross(eq[0], eq[1])]
    axes += [np.cross(a, b) for a in ep for b in eq]
    best_gap = -math.inf
    min_overlap = math.inf
    for axis in axes:
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            continue
        axis = axis / norm
        lo_p, hi_p = np.min(p @ axis), np.max(p @ axis)
        lo_q, hi_q = np.min(q @ axis), np.max(q @ axis)
        gap = max(lo_q - hi_p, lo_p - hi_q)
        if gap > best_gap:
            best_gap = gap
        min_overlap = min(min_overlap, min(hi_p, hi_q) - max(lo_p, lo_q))
    if best_gap > 0:
        return True, best_gap
    return False, min_overlap


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_contact_agrees_with_separating_axes(seed):
    rng = np.random.default_rng(seed)
    coords = rng.uniform(-1.0, 1.0, size=(12, 3, 3))
    scale = float(np.max(np.abs(coords)))
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            separated, margin = _sat_disjoint_margin(coords[i], coords[j])
            if margin < 1e-9 * scale:
                continue  # too close to a touch for a float referee
            contact = triangle_contact(coords[i], coords[j])
            if separated:
                assert contact is None
            else:
                assert contact is not None


def test_classify_immersion_table():
    assert classify_immersion(False, ()) == "not-an-immersion"
    assert classify_immersion(False, ("x",)) == "not-an-immersion"
    assert classify_immersion(True, ()) == "embedded"
    assert classify_immersion(True, ("x",)) == "immersed"


def test_report_census():
    soup = _soup_for(GeneratorSpec("doubled_cone", total_angle=4 * math.pi))
    report = self_intersections(soup)
    census = report.kind_census
    assert sum(census.values()) == len(report.pairs)
    assert report.n_candidates >= len(report.pairs)

"""Built-in test surfaces with analytically known properties.

Positive controls (tetrahedron, cube, icosahedron, round torus) have
honest embedded geometry.  The abstract quotient surfaces carry
degenerate coordinates chosen for combinatorial and topological checks
only: grid_klein is drawn on a flat rectangle (its faces overlap in the
plane), folded_flat_torus is the arc-length-preserving planar zigzag
image of the torus grid (flat but not locally injective on fold lines),
and doubled_cone is a doubled flat disk whose apex link winds
total_angle / 2pi times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import CellComplex, MeshError, build_complex


class GeneratorError(MeshError):
    """Invalid generator parameters."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Which surface to build and with what parameters."""

    kind: str
    m: int | None = None
    n: int | None = None
    folds: int | None = None
    total_angle: float | None = None
    segments: int | None = None

    @property
    def label(self) -> str:
        parts = [self.kind]
        if self.m is not None:
            parts.append(f"{self.m}x{self.n}")
        if self.folds is not None:
            parts.append(f"folds{self.folds}")
        if self.total_angle is not None:
            parts.append(f"angle{self.total_angle:g}")
        return "_".join(parts)


def generate(spec: GeneratorSpec) -> CellComplex:
    """Build the surface a GeneratorSpec describes."""
    kind = spec.kind
    if kind == "tetrahedron":
        return tetrahedron()
    if kind == "cube":
        return cube()
    if kind == "icosahedron":
        return icosahedron()
    if kind == "grid_torus":
        return grid_torus(_require_grid(spec))
    if kind == "grid_klein":
        return grid_klein(_require_grid(spec))
    if kind == "folded_flat_torus":
        m, n = _require_grid(spec)
        if spec.folds is None:
            raise GeneratorError("folded_flat_torus needs folds")
        return folded_flat_torus(m, n, spec.folds)
    if kind == "doubled_cone":
        if spec.total_angle is None:
            raise GeneratorError("doubled_cone needs total_angle")
        return doubled_cone(spec.total_angle, spec.segments)
    raise GeneratorError(f"unknown generator kind {kind!r}")


def _require_grid(spec: GeneratorSpec) -> tuple[int, int]:
    if spec.m is None or spec.n is None:
        raise GeneratorError(f"{spec.kind} needs grid sizes m and n")
    if spec.m < 3 or spec.n < 3:
        # smaller quotients duplicate edges, which the manifold check rejects
        raise GeneratorError(f"{spec.kind} needs m, n >= 3, got {spec.m}x{spec.n}")
    return spec.m, spec.n


def tetrahedron() -> CellComplex:
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64)
    f = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    return build_complex(v, f)


def cube() -> CellComplex:
    # vertex id = 4x + 2y + z over the unit cube corners
    v = np.array(
        [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=np.float64
    )
    f = [
        (0, 1, 3, 2), (4, 6, 7, 5),
        (0, 4, 5, 1), (2, 3, 7, 6),
        (0, 2, 6, 4), (1, 5, 7, 3),
    ]
    return build_complex(v, f)


def icosahedron() -> CellComplex:
    p = (1.0 + math.sqrt(5.0)) / 2.0
    v = np.array([
        [-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
        [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
        [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1],
    ], dtype=np.float64)
    f = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return build_complex(v, f)


def _grid_triangles(m: int, n: int, cls) -> list[tuple[int, int, int]]:
    """Both diagonal triangles of every grid quad, corners via cls(i, j)."""
    tris = []
    for j in range(n):
        for i in range(m):
            c00 = cls(i, j)
            c10 = cls(i + 1, j)
            c11 = cls(i + 1, j + 1)
            c01 = cls(i, j + 1)
            tris.append((c00, c10, c11))
            tris.append((c00, c11, c01))
    return tris


def grid_torus(mn: tuple[int, int], radius_major: float = 2.0, radius_minor: float = 1.0) -> CellComplex:
    """Triangulated m x n torus grid on the round embedded torus."""
    m, n = mn
    v = np.zeros((m * n, 3), dtype=np.float64)
    for j in range(n):
        phi = 2.0 * math.pi * j / n
        ring = radius_major + radius_minor * math.cos(phi)
        for i in range(m):
            theta = 2.0 * math.pi * i / m
            v[j * m + i] = (ring * math.cos(theta), ring * math.sin(theta),
                            radius_minor * math.sin(phi))

    def cls(i: int, j: int) -> int:
        return (j % n) * m + (i % m)

    return build_complex(v, _grid_triangles(m, n, cls))


def _klein_class(m: int, n: int, i: int, j: int) -> int:
    # vertical wrap reverses the horizontal direction
    if j >= n:
        i, j = (m - i) % m, j - n
    return j * m + (i % m)


def grid_klein(mn: tuple[int, int]) -> CellComplex:
    """Triangulated m x n Klein-bottle grid quotient.

    Coordinates place class (i, j) at (i, j, 0); the wrapped faces overlap
    the others in the plane, so only combinatorial and topological claims
    are meaningful for this surface.
    """
    m, n = mn
    v = np.array([[i, j, 0.0] for j in range(n) for i in range(m)], dtype=np.float64)

    def cls(i: int, j: int) -> int:
        return _klein_class(m, n, i, j)

    return build_complex(v, _grid_triangles(m, n, cls))


def _zigzag(x: int, runs: int, run_length: int) -> int:
    """Unit-slope triangle wave: runs alternating monotone runs per period."""
    k, r = divmod(x % (runs * run_length), run_length)
    return r if k % 2 == 0 else run_length - r


def folded_flat_torus(m: int, n: int, folds: int) -> CellComplex:
    """The torus grid mapped through coordinate zigzags (x, y) -> (f(x), g(y), 0).

    Both zigzags have unit slope, so every edge keeps its length and every
    angle its size: all faces stay planar and every vertex keeps angle
    defect zero.  On the fold lines the map doubles back, so vertex links
    there are not embedded; see fold_vertex_ids.
    """
    if folds < 2 or folds % 2 != 0:
        raise GeneratorError(f"folds must be even and >= 2, got {folds}")
    if m % folds != 0 or n % folds != 0:
        raise GeneratorError(f"folds must divide both grid sizes, got {m}x{n} with {folds}")
    if m < 3 or n < 3:
        raise GeneratorError(f"folded_flat_torus needs m, n >= 3, got {m}x{n}")
    lm, ln = m // folds, n // folds
    v = np.array(
        [[_zigzag(i, folds, lm), _zigzag(j, folds, ln), 0.0] for j in range(n) for i in range(m)],
        dtype=np.float64,
    )

    def cls(i: int, j: int) -> int:
        return (j % n) * m + (i % m)

    return build_complex(v, _grid_triangles(m, n, cls))


def fold_vertex_ids(m: int, n: int, folds: int) -> frozenset[int]:
    """Vertices of folded_flat_torus(m, n, folds) lying on a fold line."""
    lm, ln = m // folds, n // folds
    return frozenset(
        j * m + i for j in range(n) for i in range(m)
        if i % lm == 0 or j % ln == 0
    )


def doubled_cone(total_angle: float, segments: int | None = None) -> CellComplex:
    """Double of a flat disk of the given total apex angle, flattened.

    Two cone sheets share the rim; both apexes sit at the origin and the
    rim winds total_angle / 2pi times around the unit circle, so the
    sheets coincide in the plane.  The apex link winds the same number of
    times: embedded for total_angle 2pi, not embedded for 4pi.
    """
    if not total_angle > 0.0:
        raise GeneratorError(f"total_angle must be positive, got {total_angle}")
    k = segments if segments is not None else max(3, math.ceil(2.0 * total_angle / math.pi))
    if k < 3:
        raise GeneratorError(f"segments must be >= 3, got {k}")
    if total_angle / k >= math.pi:
        raise GeneratorError(
            f"segments={k} gives corner angle {total_angle / k:.3f} >= pi; increase segments"
        )
    v = np.zeros((k + 2, 3), dtype=np.float64)
    for t in range(k):
        a = total_angle * t / k
        v[2 + t] = (math.cos(a), math.sin(a), 0.0)
    faces = []
    for t in range(k):
        rim0, rim1 = 2 + t, 2 + (t + 1) % k
        faces.append((0, rim0, rim1))
        faces.append((1, rim1, rim0))
    return build_complex(v, faces)


def standard_corpus() -> tuple[GeneratorSpec, ...]:
    """The fixed family property tests sweep over."""
    return (
        GeneratorSpec("tetrahedron"),
        GeneratorSpec("cube"),
        GeneratorSpec("icosahedron"),
        GeneratorSpec("grid_torus", m=3, n=3),
        GeneratorSpec("grid_torus", m=4, n=5),
        GeneratorSpec("grid_klein", m=3, n=3),
        GeneratorSpec("grid_klein", m=5, n=4),
        GeneratorSpec("folded_flat_torus", m=4, n=4, folds=2),
        GeneratorSpec("doubled_cone", total_angle=2.0 * math.pi),
        GeneratorSpec("doubled_cone", total_angle=4.0 * math.pi),
    )

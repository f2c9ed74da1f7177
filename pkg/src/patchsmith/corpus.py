"""Reference models used by tests, demos and the analysis tooling."""

from __future__ import annotations

import math

import numpy as np

from .mesh import CornerRef, HalfEdgeMesh


def tetrahedron() -> HalfEdgeMesh:
    positions = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    faces = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return HalfEdgeMesh.from_polygons(positions, faces)


def cube(offset=(0.0, 0.0, 0.0)) -> HalfEdgeMesh:
    o = np.asarray(offset, dtype=float)
    positions = [o + np.array(p, dtype=float) for p in [
        (-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
        (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1),
    ]]
    faces = [
        [0, 3, 2, 1],  # bottom
        [4, 5, 6, 7],  # top
        [0, 1, 5, 4],  # front
        [1, 2, 6, 5],  # right
        [2, 3, 7, 6],  # back
        [3, 0, 4, 7],  # left
    ]
    return HalfEdgeMesh.from_polygons(positions, faces)


def cube_with_edge() -> tuple[HalfEdgeMesh, int]:
    """Cube with an edge inserted between its top and bottom faces.

    Merging the two quads yields one ten-sided face and a genus-1 surface.
    Returns the mesh and the inserted edge id.
    """
    mesh = cube()
    eid = mesh.insert_edge(CornerRef(face=1, vertex=6), CornerRef(face=0, vertex=0))
    return mesh, eid


def two_cubes_bridge() -> tuple[HalfEdgeMesh, int]:
    """Two cubes joined by a single edge between facing faces (a bridge)."""
    a_positions = [
        (-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
        (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1),
    ]
    b_positions = [(x + 4.0, y, z) for (x, y, z) in a_positions]
    faces = [
        [0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4],
        [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7],
    ]
    all_faces = faces + [[v + 8 for v in f] for f in faces]
    mesh = HalfEdgeMesh.from_polygons(list(a_positions) + b_positions, all_faces)
    # right face of cube A is id 3; left face of cube B is id 11
    eid = mesh.insert_edge(CornerRef(face=3, vertex=2), CornerRef(face=11, vertex=11))
    return mesh, eid


def torus_grid(nu: int = 4, nv: int = 4, major: float = 2.0, minor: float = 0.7) -> HalfEdgeMesh:
    """Quad torus with nu x nv faces; every vertex is 4-valent."""
    positions = []
    for i in range(nu):
        alpha = 2.0 * math.pi * i / nu
        for j in range(nv):
            beta = 2.0 * math.pi * j / nv
            rad = major + minor * math.cos(beta)
            positions.append((rad * math.cos(alpha), rad * math.sin(alpha), minor * math.sin(beta)))
    def vid(i, j):
        return (i % nu) * nv + (j % nv)
    faces = []
    for i in range(nu):
        for j in range(nv):
            faces.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)])
    return HalfEdgeMesh.from_polygons(positions, faces)


def pentagonal_pyramid() -> HalfEdgeMesh:
    """Closed pyramid over a pentagon; the apex is a 5-valent vertex."""
    positions = [(0.0, 0.0, 1.0)]
    for k in range(5):
        theta = 2.0 * math.pi * k / 5.0
        positions.append((math.cos(theta), math.sin(theta), 0.0))
    faces = [[5, 4, 3, 2, 1]]
    for k in range(5):
        faces.append([0, 1 + k, 1 + (k + 1) % 5])
    return HalfEdgeMesh.from_polygons(positions, faces)


def standard_corpus() -> dict[str, HalfEdgeMesh]:
    """The named model set used by the acceptance suite."""
    return {
        "tetrahedron": tetrahedron(),
        "cube": cube(),
        "cube_edge": cube_with_edge()[0],
        "two_cubes": two_cubes_bridge()[0],
        "torus": torus_grid(),
    }

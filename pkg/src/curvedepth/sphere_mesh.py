"""Antipodally symmetric icosphere meshes.

The base icosahedron is stored so that antipodal vertices are exact
floating-point negations of each other.  Midpoint subdivision preserves
this: the midpoint of the antipodal edge is computed from exactly negated
inputs, and IEEE addition, squaring and division are sign-symmetric, so
v[antipode[i]] == -v[i] holds bitwise at every level.  This makes the
sign pattern of an even/odd homogeneous polynomial exactly antipodally
(anti)symmetric on the mesh, which downstream loop pairing relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_PHI = (1.0 + np.sqrt(5.0)) / 2.0
_NORM = np.sqrt(1.0 + _PHI * _PHI)

_BASE_VERTS = np.array([
    [-1.0, _PHI, 0.0],
    [1.0, _PHI, 0.0],
    [-1.0, -_PHI, 0.0],
    [1.0, -_PHI, 0.0],
    [0.0, -1.0, _PHI],
    [0.0, 1.0, _PHI],
    [0.0, -1.0, -_PHI],
    [0.0, 1.0, -_PHI],
    [_PHI, 0.0, -1.0],
    [_PHI, 0.0, 1.0],
    [-_PHI, 0.0, -1.0],
    [-_PHI, 0.0, 1.0],
]) / _NORM

_BASE_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [5, 4, 9], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
], dtype=np.int64)

# antipodal vertex pairing of the base solid
_BASE_ANTIPODE = np.array([3, 2, 1, 0, 7, 6, 5, 4, 11, 10, 9, 8], dtype=np.int64)


@dataclass(frozen=True)
class SphereMesh:
    vertices: np.ndarray          # (V, 3) unit vectors
    triangles: np.ndarray         # (T, 3) vertex indices
    subdivision_level: int
    antipodal_map: np.ndarray     # (V,) vertex -> antipodal vertex
    edges: np.ndarray             # (E, 2) sorted vertex pairs
    tri_edges: np.ndarray         # (T, 3) edge indices per triangle
    edge_antipode: np.ndarray     # (E,) edge -> antipodal edge
    max_edge_length: float

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)


def _subdivide(verts, faces, antipode):
    verts = list(verts)
    cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        idx = cache.get(key)
        if idx is None:
            m = verts[a] + verts[b]
            m = m / np.sqrt(m @ m)
            idx = len(verts)
            verts.append(m)
            cache[key] = idx
        return idx

    new_faces = np.empty((4 * len(faces), 3), dtype=np.int64)
    for t, (a, b, c) in enumerate(faces):
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_faces[4 * t + 0] = (a, ab, ca)
        new_faces[4 * t + 1] = (b, bc, ab)
        new_faces[4 * t + 2] = (c, ca, bc)
        new_faces[4 * t + 3] = (ab, bc, ca)
    new_antipode = np.empty(len(verts), dtype=np.int64)
    new_antipode[: len(antipode)] = antipode
    for (a, b), idx in cache.items():
        key = (antipode[a], antipode[b])
        key = key if key[0] < key[1] else (key[1], key[0])
        new_antipode[idx] = cache[key]
    return np.array(verts), new_faces, new_antipode


def _edge_tables(verts_n, faces):
    pairs = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    pairs.sort(axis=1)
    keys = pairs[:, 0] * verts_n + pairs[:, 1]
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    if not np.all(counts == 2):
        raise AssertionError("mesh is not watertight: an edge is not shared by 2 triangles")
    edges = np.column_stack([uniq // verts_n, uniq % verts_n])
    tri_edges = inverse.reshape(3, -1).T[:, [0, 1, 2]]
    return edges, tri_edges, uniq


@lru_cache(maxsize=16)
def build_sphere_mesh(level: int) -> SphereMesh:
    """Icosphere after `level` midpoint subdivisions, antipodally exact."""
    if level < 0 or level > 9:
        raise ValueError("subdivision level must be in [0, 9]")
    verts, faces, antipode = _BASE_VERTS.copy(), _BASE_FACES, _BASE_ANTIPODE
    for _ in range(level):
        verts, faces, antipode = _subdivide(verts, faces, antipode)
    if not np.array_equal(verts[antipode], -verts):
        raise AssertionError("antipodal symmetry of the mesh is not exact")
    edges, tri_edges, keys = _edge_tables(len(verts), faces)
    anti_pairs = antipode[edges]
    anti_pairs.sort(axis=1)
    anti_keys = anti_pairs[:, 0] * len(verts) + anti_pairs[:, 1]
    edge_antipode = np.searchsorted(keys, anti_keys)
    if not np.array_equal(keys[edge_antipode], anti_keys):
        raise AssertionError("edge antipodal map is not a bijection")
    lengths = np.linalg.norm(verts[edges[:, 0]] - verts[edges[:, 1]], axis=1)
    verts.setflags(write=False)
    faces.setflags(write=False)
    return SphereMesh(
        vertices=verts,
        triangles=faces,
        subdivision_level=level,
        antipodal_map=antipode,
        edges=edges,
        tri_edges=tri_edges,
        edge_antipode=edge_antipode,
        max_edge_length=float(lengths.max()),
    )


def default_subdivision(curve_degree: int) -> int:
    """Smallest level whose longest edge is below 0.5 / degree.

    Degree-d curve features on the sphere live at scale ~1/d; the factor
    1.2 covers edge-length spread introduced by projecting midpoints.
    """
    need = 0.5 / max(curve_degree, 1)
    level = int(np.ceil(np.log2(1.2 * 1.0515 / need)))
    return min(max(level, 2), 8)

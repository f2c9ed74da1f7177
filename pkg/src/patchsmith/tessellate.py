"""Hierarchical evaluation of a patch set into a crack-free triangle mesh.

Regular patches are evaluated directly as polynomials. Extraordinary patches
are subdivided recursively (modified table by default); children that own no
extraordinary corner become directly-evaluated leaves, so resolution piles up
only around extraordinary vertices. Leaves are sampled on uniform grids and
stitched so that every T-junction created by depth differences is resolved by
refining the coarse side's boundary sampling along the shared curve, which is
identical on both sides of every boundary at every depth.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParamError, TessellationError
from .kernels import QUADRANTS, KernelTable, modified_kernels, subdivide
from .mesh import HalfEdgeMesh
from .patches import BezierPatch, PatchSet, corner_net_index

WELD_TOL_FACTOR = 1e-9  # times the bounding-box diagonal


def thread_count() -> int:
    env = os.environ.get("PATCHSMITH_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# ----------------------------------------------------------------------
# Bezier evaluation


def bernstein3(t):
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    return np.stack([s ** 3, 3 * s * s * t, 3 * s * t * t, t ** 3], axis=-1)


def bernstein3_d1(t):
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    return np.stack([
        -3 * s * s,
        3 * s * s - 6 * s * t,
        6 * s * t - 3 * t * t,
        3 * t * t,
    ], axis=-1)


def bernstein3_d2(t):
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    return np.stack([6 * s, 6 * t - 12 * s, 6 * s - 12 * t, 6 * t], axis=-1)


@dataclass
class SurfaceSample:
    point: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    duu: np.ndarray
    dvv: np.ndarray
    duv: np.ndarray


def evaluate_bezier(patch, u, v) -> SurfaceSample:
    """Evaluate a bicubic net (or patch) with first and second derivatives.

    Scalars give (3,) vectors; equal-length arrays give (n, 3) stacks.
    """
    P = patch.P if isinstance(patch, BezierPatch) else np.asarray(patch, dtype=float)
    bu, bv = bernstein3(u), bernstein3(v)
    du_, dv_ = bernstein3_d1(u), bernstein3_d1(v)
    d2u, d2v = bernstein3_d2(u), bernstein3_d2(v)

    def mix(a, b):
        return np.einsum("...i,ijc,...j->...c", a, P, b)

    return SurfaceSample(
        point=mix(bu, bv),
        du=mix(du_, bv),
        dv=mix(bu, dv_),
        duu=mix(d2u, bv),
        dvv=mix(bu, d2v),
        duv=mix(du_, dv_),
    )


# ----------------------------------------------------------------------
# patch trees


@dataclass
class TreeNode:
    patch: BezierPatch
    depth: int
    u0: float
    v0: float
    size: float
    path: tuple = ()
    children: dict | None = None

    def is_leaf(self) -> bool:
        return self.children is None


@dataclass
class PatchTree:
    root_id: int
    root: TreeNode
    max_depth: int
    table_name: str

    def leaves(self) -> list[TreeNode]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf():
                out.append(node)
            else:
                for q in reversed(QUADRANTS):
                    stack.append(node.children[q])
        return out

    def depth_reached(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def subdivisions(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf():
                count += 1
                stack.extend(node.children.values())
        return count

    def leaf_on_boundary(self, boundary: str, t: float) -> TreeNode:
        """Deepest leaf whose given root boundary contains parameter t."""
        node = self.root
        while not node.is_leaf():
            if boundary in ("u0", "u1"):
                qu = 0 if boundary == "u0" else 1
                qv = 0 if t < node.v0 + node.size / 2.0 else 1
            else:
                qv = 0 if boundary == "v0" else 1
                qu = 0 if t < node.u0 + node.size / 2.0 else 1
            node = node.children[(qu, qv)]
        return node


def build_patch_tree(patch: BezierPatch, table: KernelTable, max_depth: int) -> PatchTree:
    """Recursively subdivide while a node owns an extraordinary corner."""
    if max_depth < 0:
        raise ParamError("max_depth must be >= 0")

    def build(node: TreeNode) -> None:
        if not node.patch.is_extraordinary() or node.depth >= max_depth:
            return
        result = subdivide(node.patch, table)
        node.children = {}
        half = node.size / 2.0
        for q in QUADRANTS:
            qu, qv = q
            child = TreeNode(
                patch=result.child(qu, qv),
                depth=node.depth + 1,
                u0=node.u0 + qu * half,
                v0=node.v0 + qv * half,
                size=half,
                path=node.path + (q,),
            )
            node.children[q] = child
            build(child)

    root = TreeNode(patch=patch, depth=0, u0=0.0, v0=0.0, size=1.0)
    build(root)
    return PatchTree(root_id=patch.id, root=root, max_depth=max_depth, table_name=table.name)


def build_trees(patchset: PatchSet, table: KernelTable, max_depth: int) -> dict[int, PatchTree]:
    return {pid: build_patch_tree(patchset[pid], table, max_depth) for pid in patchset.ids()}


# ----------------------------------------------------------------------
# triangle mesh


@dataclass
class TriMesh:
    positions: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3)
    triangles: np.ndarray  # (T, 3) int64

    def euler_characteristic(self) -> int:
        edges = set()
        for tri in self.triangles:
            for k in range(3):
                a, b = int(tri[k]), int(tri[(k + 1) % 3])
                edges.add((min(a, b), max(a, b)))
        return len(self.positions) - len(edges) + len(self.triangles)

    def is_closed_manifold(self) -> bool:
        directed: dict[tuple[int, int], int] = {}
        for tri in self.triangles:
            for k in range(3):
                a, b = int(tri[k]), int(tri[(k + 1) % 3])
                if a == b:
                    return False
                directed[(a, b)] = directed.get((a, b), 0) + 1
        if any(c != 1 for c in directed.values()):
            return False
        return all((b, a) in directed for (a, b) in directed)

    def genus(self) -> int:
        return (2 - self.euler_characteristic()) // 2


def export_obj(trimesh: TriMesh) -> bytes:
    lines = []
    for p in trimesh.positions:
        lines.append(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}")
    for n in trimesh.normals:
        lines.append(f"vn {n[0]:.6g} {n[1]:.6g} {n[2]:.6g}")
    for tri in trimesh.triangles:
        a, b, c = (int(x) + 1 for x in tri)
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ----------------------------------------------------------------------
# crack-free leaf triangulation


@dataclass
class PatchBuffers:
    """Triangulated samples of one root patch, indices local to the patch."""

    patch_id: int
    params: np.ndarray  # (N, 2) root-space (u, v)
    positions: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3)
    triangles: np.ndarray  # (T, 3)
    leaves: int
    depth_reached: int
    subdivisions: int


# leaf side name -> (line axis, which edge, local frame)
# local frames (s, d) are oriented so CCW triangles in (s, d) are CCW in (u, v)
_SIDES = ("v_lo", "u_hi", "v_hi", "u_lo")


def _side_line(node: TreeNode, side: str):
    """Registry line key and (lo, hi) span of one leaf side."""
    if side == "v_lo":
        return ("v", node.v0), node.u0, node.u0 + node.size
    if side == "v_hi":
        return ("v", node.v0 + node.size), node.u0, node.u0 + node.size
    if side == "u_lo":
        return ("u", node.u0), node.v0, node.v0 + node.size
    if side == "u_hi":
        return ("u", node.u0 + node.size), node.v0, node.v0 + node.size
    raise KeyError(side)


def _side_uv(side: str, node: TreeNode, s: float):
    """Root (u, v) of a perimeter point given its line coordinate s."""
    if side == "v_lo":
        return s, node.v0
    if side == "v_hi":
        return s, node.v0 + node.size
    if side == "u_lo":
        return node.u0, s
    if side == "u_hi":
        return node.u0 + node.size, s
    raise KeyError(side)


def _stitch_strip(outer: list, inner: list, emit) -> None:
    """Triangulate between two polylines sorted by a common coordinate.

    outer/inner entries are (coordinate, vertex_index); emits CCW triangles
    for a strip whose outer line is below the inner line in the local frame.
    """
    i, j = 0, 0
    while i < len(outer) - 1 or j < len(inner) - 1:
        can_o = i < len(outer) - 1
        can_i = j < len(inner) - 1
        if can_o and (not can_i or outer[i + 1][0] + outer[i][0] <= inner[j + 1][0] + inner[j][0]):
            emit(outer[i][1], outer[i + 1][1], inner[j][1])
            i += 1
        else:
            emit(outer[i][1], inner[j + 1][1], inner[j][1])
            j += 1


def _leaf_triangles(node: TreeNode, r: int, edge_samples, vertex_index, emit) -> None:
    """Triangulate one leaf: regular core plus stitched border strips.

    edge_samples maps a line key to the sorted root-space sample positions on
    that line; vertex_index maps root (u, v) to a stable local vertex id.
    """
    grid = node.u0 + node.size * np.arange(r) / (r - 1)
    gridv = node.v0 + node.size * np.arange(r) / (r - 1)

    if r >= 4:
        # interior core cells (entirely inside the inner ring)
        for a in range(1, r - 3 + 1):
            for b in range(1, r - 3 + 1):
                p00 = vertex_index(grid[a], gridv[b])
                p10 = vertex_index(grid[a + 1], gridv[b])
                p11 = vertex_index(grid[a + 1], gridv[b + 1])
                p01 = vertex_index(grid[a], gridv[b + 1])
                emit(p00, p10, p11)
                emit(p00, p11, p01)

    # inner ring polylines per side, in the side's local orientation
    if r == 2:
        cu = node.u0 + node.size / 2.0
        cv = node.v0 + node.size / 2.0
        center = vertex_index(cu, cv)
        inner_lines = {side: [(0.5, center)] for side in _SIDES}
    else:
        lo, hi = 1, r - 2
        inner_lines = {
            "v_lo": [(grid[a], vertex_index(grid[a], gridv[lo])) for a in range(lo, hi + 1)],
            "u_hi": [(gridv[b], vertex_index(grid[hi], gridv[b])) for b in range(lo, hi + 1)],
            "v_hi": [(grid[a], vertex_index(grid[a], gridv[hi])) for a in range(hi, lo - 1, -1)],
            "u_lo": [(gridv[b], vertex_index(grid[lo], gridv[b])) for b in range(hi, lo - 1, -1)],
        }

    for side in _SIDES:
        key, lo_s, hi_s = _side_line(node, side)
        samples = [s for s in edge_samples[key] if lo_s <= s <= hi_s]
        outer = [(s, vertex_index(*_side_uv(side, node, s))) for s in samples]
        reverse = side in ("v_hi", "u_lo")
        if reverse:
            outer = outer[::-1]
        inner = inner_lines[side]
        if reverse and r != 2:
            pass  # inner_lines above are already stored in local orientation
        # local coordinate: flip sign so both lists increase together
        if reverse:
            outer = [(-s, idx) for s, idx in outer]
            inner = [(-s, idx) for s, idx in inner]
        _stitch_strip(outer, inner, emit)


def tessellate_patch(tree: PatchTree, r: int, edge_samples) -> PatchBuffers:
    """Sample and triangulate all leaves of one root patch."""
    params: list[tuple[float, float]] = []
    index: dict[tuple[float, float], int] = {}
    triangles: list[tuple[int, int, int]] = []
    leaves = tree.leaves()

    # EV corner normals come from the frame plane; collect their root params
    ev_normal: dict[tuple[float, float], np.ndarray] = {}
    for leaf in leaves:
        for code, meta in leaf.patch.corners.items():
            if meta.extraordinary and meta.normal is not None:
                i, j = corner_net_index(code)
                u = leaf.u0 + (leaf.size if code[0] else 0.0)
                v = leaf.v0 + (leaf.size if code[1] else 0.0)
                ev_normal[(u, v)] = meta.normal

    pts_chunks: list[np.ndarray] = []
    nrm_chunks: list[np.ndarray] = []

    for leaf in leaves:
        local_params: list[tuple[float, float]] = []

        def vertex_index(u: float, v: float) -> int:
            key = (u, v)
            idx = index.get(key)
            if idx is None:
                idx = len(params)
                index[key] = idx
                params.append(key)
                local_params.append(key)
            return idx

        _leaf_triangles(leaf, r, edge_samples, vertex_index,
                        lambda a, b, c: triangles.append((a, b, c)))
        if local_params:
            arr = np.array(local_params)
            us = (arr[:, 0] - leaf.u0) / leaf.size
            vs = (arr[:, 1] - leaf.v0) / leaf.size
            bu, bv = bernstein3(us), bernstein3(vs)
            dbu, dbv = bernstein3_d1(us), bernstein3_d1(vs)
            P = leaf.patch.P
            pts = np.einsum("ki,ijc,kj->kc", bu, P, bv)
            du = np.einsum("ki,ijc,kj->kc", dbu, P, bv)
            dv = np.einsum("ki,ijc,kj->kc", bu, P, dbv)
            nrm = np.cross(du, dv)
            length = np.linalg.norm(nrm, axis=-1, keepdims=True)
            length[length == 0.0] = 1.0
            nrm = nrm / length
            for k, key in enumerate(local_params):
                override = ev_normal.get(key)
                if override is not None:
                    nrm[k] = override
            pts_chunks.append(pts)
            nrm_chunks.append(nrm)

    positions = np.concatenate(pts_chunks) if pts_chunks else np.zeros((0, 3))
    normals = np.concatenate(nrm_chunks) if nrm_chunks else np.zeros((0, 3))
    return PatchBuffers(
        patch_id=tree.root_id,
        params=np.array(params) if params else np.zeros((0, 2)),
        positions=positions,
        normals=normals,
        triangles=np.array(triangles, dtype=np.int64) if triangles else np.zeros((0, 3), np.int64),
        leaves=len(leaves),
        depth_reached=tree.depth_reached(),
        subdivisions=tree.subdivisions(),
    )


def collect_edge_samples(trees: dict[int, PatchTree], patchset: PatchSet, r: int):
    """Union of boundary sample positions per root patch and grid line.

    Returns {patch_id: {line_key: sorted positions}} with root-boundary lines
    merged across neighboring patches (reversed parameters flipped), so both
    sides of every boundary sample the shared curve identically.
    """
    registry: dict[int, dict, ] = {}
    for pid, tree in trees.items():
        lines: dict[tuple[str, float], set[float]] = {}
        for leaf in tree.leaves():
            ts = leaf.u0 + leaf.size * np.arange(r) / (r - 1)
            tvs = leaf.v0 + leaf.size * np.arange(r) / (r - 1)
            for side in _SIDES:
                key, _, _ = _side_line(leaf, side)
                positions = ts if key[0] == "v" else tvs
                lines.setdefault(key, set()).update(float(t) for t in positions)
        registry[pid] = lines

    boundary_line = {"u0": ("u", 0.0), "u1": ("u", 1.0), "v0": ("v", 0.0), "v1": ("v", 1.0)}
    for pid, bname, nid, nbname, rev in patchset.shared_boundaries():
        la = boundary_line[bname]
        lb = boundary_line[nbname]
        sa = registry[pid].setdefault(la, set())
        sb = registry[nid].setdefault(lb, set())
        mapped_b = {1.0 - t for t in sb} if rev else set(sb)
        mapped_a = {1.0 - t for t in sa} if rev else set(sa)
        sa.update(mapped_b)
        sb.update(mapped_a)

    return {pid: {key: sorted(vals) for key, vals in lines.items()}
            for pid, lines in registry.items()}


def _vertex_identity(patchset: PatchSet, corner_canonical, pid: int, u: float, v: float):
    """Canonical weld key of a sample: shared corners and boundary samples of
    neighboring patches map to one key; interior samples stay private.

    Surfaces may pass through the same 3D position twice (a pinched hole
    waist does), so welding follows the patch adjacency rather than raw
    positions.
    """
    on_u = 0 if u == 0.0 else 1 if u == 1.0 else None
    on_v = 0 if v == 0.0 else 1 if v == 1.0 else None
    if on_u is not None and on_v is not None:
        return ("c",) + corner_canonical[(pid, (on_u, on_v))]
    if on_u is not None or on_v is not None:
        if on_u is not None:
            bname, t = ("u0" if on_u == 0 else "u1"), v
        else:
            bname, t = ("v0" if on_v == 0 else "v1"), u
        link = patchset[pid].neighbors[bname]
        other_t = 1.0 - t if link.reversed else t
        mine = (pid, bname, t)
        theirs = (link.patch, link.boundary, other_t)
        return ("b",) + min(mine, theirs)
    return ("i", pid, u, v)


def weld_buffers(buffers: list[PatchBuffers], patchset: PatchSet, tolerance: float) -> TriMesh:
    """Merge per-patch buffers into one mesh along shared boundaries.

    Welding is combinatorial (corner fans and boundary parameter identity);
    the tolerance only verifies that both sides of every weld agree
    geometrically, raising TessellationError otherwise.
    """
    corner_canonical: dict[tuple[int, tuple[int, int]], tuple] = {}
    for fan in patchset.corner_fans():
        canon = min(fan)
        for member in fan:
            corner_canonical[member] = canon

    index: dict[tuple, int] = {}
    positions: list[np.ndarray] = []
    normals: list[np.ndarray] = []
    triangles: list[np.ndarray] = []
    for buf in buffers:
        remap = np.empty(len(buf.positions), dtype=np.int64)
        for k in range(len(buf.positions)):
            u, v = buf.params[k]
            key = _vertex_identity(patchset, corner_canonical, buf.patch_id, float(u), float(v))
            idx = index.get(key)
            if idx is None:
                idx = len(positions)
                index[key] = idx
                positions.append(buf.positions[k])
                normals.append(buf.normals[k])
            elif np.abs(positions[idx] - buf.positions[k]).max() > tolerance:
                raise TessellationError(
                    f"boundary samples disagree beyond tolerance at {key}")
            remap[k] = idx
        if len(buf.triangles):
            triangles.append(remap[buf.triangles])

    tri = np.concatenate(triangles) if triangles else np.zeros((0, 3), np.int64)
    degenerate = (tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 2] == tri[:, 0])
    if degenerate.any():
        raise TessellationError("welding collapsed a triangle; sampling is inconsistent")
    return TriMesh(
        positions=np.array(positions) if positions else np.zeros((0, 3)),
        normals=np.array(normals) if normals else np.zeros((0, 3)),
        triangles=tri,
    )


def tessellation_stats(buffers: list[PatchBuffers], trimesh: TriMesh) -> dict:
    return {
        "patches": len(buffers),
        "leaves": int(sum(b.leaves for b in buffers)),
        "max_depth_reached": int(max((b.depth_reached for b in buffers), default=0)),
        "subdivisions": int(sum(b.subdivisions for b in buffers)),
        "triangles": int(len(trimesh.triangles)),
        "vertices": int(len(trimesh.positions)),
    }


def tessellate_buffers(patchset: PatchSet, max_depth: int, leaf_resolution: int,
                       table: KernelTable | None = None,
                       threads: int | None = None) -> tuple[list[PatchBuffers], dict[int, PatchTree]]:
    """Per-patch crack-free buffers for every patch, in patch-id order."""
    r = leaf_resolution
    if r < 2 or (r - 1) & (r - 2) != 0:
        raise ParamError(f"leaf_resolution - 1 must be a power of two, got {r}")
    table = table or modified_kernels()
    trees = build_trees(patchset, table, max_depth)
    edge_samples = collect_edge_samples(trees, patchset, r)
    workers = threads if threads is not None else thread_count()
    ids = patchset.ids()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pid: pool.submit(tessellate_patch, trees[pid], r, edge_samples[pid])
                       for pid in ids}
            buffers = [futures[pid].result() for pid in ids]
    else:
        buffers = [tessellate_patch(trees[pid], r, edge_samples[pid]) for pid in ids]
    return buffers, trees


def tessellate(patchset: PatchSet, max_depth: int, leaf_resolution: int,
               table: KernelTable | None = None,
               mesh: HalfEdgeMesh | None = None,
               threads: int | None = None) -> TriMesh:
    """Full pipeline tail: evaluate, stitch, and weld into one TriMesh."""
    buffers, _ = tessellate_buffers(patchset, max_depth, leaf_resolution, table, threads)
    all_pts = np.concatenate([b.positions for b in buffers if len(b.positions)])
    diag = float(np.linalg.norm(all_pts.max(axis=0) - all_pts.min(axis=0)))
    trimesh = weld_buffers(buffers, patchset, WELD_TOL_FACTOR * max(diag, 1e-30))
    if not trimesh.is_closed_manifold():
        raise TessellationError("welded mesh is not a closed manifold; check weld tolerance")
    return trimesh

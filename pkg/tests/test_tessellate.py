import numpy as np
import pytest

from patchsmith import corpus
from patchsmith.errors import ParamError
from patchsmith.frames import assign_frames
from patchsmith.kernels import modified_kernels, standard_kernels
from patchsmith.mesh import load_obj
from patchsmith.patches import BezierPatch, CornerMeta, build_patches
from patchsmith.tessellate import (
    build_patch_tree,
    evaluate_bezier,
    export_obj,
    tessellate,
    tessellate_buffers,
)


def decasteljau_eval(P, u, v):
    cols = []
    for i in range(4):
        pts = list(P[i])
        for r in range(1, 4):
            pts = [(1 - v) * pts[k] + v * pts[k + 1] for k in range(4 - r)]
        cols.append(pts[0])
    for r in range(1, 4):
        cols = [(1 - u) * cols[k] + u * cols[k + 1] for k in range(4 - r)]
    return cols[0]


def finite_difference(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def make_patch(P, valences=(4, 4, 4, 4)):
    corners = {}
    for code, k in zip(((0, 0), (0, 1), (1, 0), (1, 1)), valences):
        corners[code] = CornerMeta(valence=k, extraordinary=(k != 4))
    return BezierPatch(id=0, P=np.asarray(P, dtype=float), corners=corners)


def pipeline(mesh, depth=3, r=5, table=None):
    frames = assign_frames(mesh)
    ps = build_patches(mesh, frames)
    return tessellate(ps, max_depth=depth, leaf_resolution=r, table=table), ps


class TestEvaluateBezier:
    def test_corner_value_and_tangent(self):
        rng = np.random.default_rng(0)
        P = rng.normal(size=(4, 4, 3))
        s = evaluate_bezier(make_patch(P), 0.0, 0.0)
        assert np.allclose(s.point, P[0, 0], atol=0)
        assert np.allclose(s.du, 3 * (P[1, 0] - P[0, 0]), atol=1e-14)
        assert np.allclose(s.dv, 3 * (P[0, 1] - P[0, 0]), atol=1e-14)

    def test_constant_net(self):
        c = np.array([2.0, 0.5, -1.0])
        s = evaluate_bezier(make_patch(np.tile(c, (4, 4, 1))), 0.3, 0.8)
        assert np.allclose(s.point, c, atol=1e-15)
        for d in (s.du, s.dv, s.duu, s.dvv, s.duv):
            assert np.abs(d).max() < 1e-13

    def test_matches_recursive_de_casteljau(self):
        rng = np.random.default_rng(1)
        P = rng.normal(size=(4, 4, 3))
        s = evaluate_bezier(make_patch(P), 0.37, 0.62)
        assert np.linalg.norm(s.point - decasteljau_eval(P, 0.37, 0.62)) < 1e-13

    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(2)
        P = rng.normal(size=(4, 4, 3))
        u0, v0 = 0.41, 0.27
        s = evaluate_bezier(make_patch(P), u0, v0)
        fd_du = finite_difference(lambda u: evaluate_bezier(make_patch(P), u, v0).point, u0)
        fd_dv = finite_difference(lambda v: evaluate_bezier(make_patch(P), u0, v).point, v0)
        fd_duu = finite_difference(lambda u: evaluate_bezier(make_patch(P), u, v0).du, u0)
        fd_duv = finite_difference(lambda v: evaluate_bezier(make_patch(P), u0, v).du, v0)
        assert np.abs(s.du - fd_du).max() < 1e-8
        assert np.abs(s.dv - fd_dv).max() < 1e-8
        assert np.abs(s.duu - fd_duu).max() < 1e-6
        assert np.abs(s.duv - fd_duv).max() < 1e-6


class TestPatchTree:
    def test_regular_patch_is_single_leaf(self):
        rng = np.random.default_rng(3)
        tree = build_patch_tree(make_patch(rng.normal(size=(4, 4, 3))), modified_kernels(), 5)
        assert len(tree.leaves()) == 1
        assert tree.depth_reached() == 0

    @pytest.mark.parametrize("depth", [1, 2, 3, 5])
    def test_single_extraordinary_corner_leaf_count(self, depth):
        rng = np.random.default_rng(4)
        patch = make_patch(rng.normal(size=(4, 4, 3)), valences=(5, 4, 4, 4))
        tree = build_patch_tree(patch, modified_kernels(), depth)
        assert len(tree.leaves()) == 3 * depth + 1

    @pytest.mark.parametrize("depth", [1, 2, 4])
    def test_two_diagonal_extraordinary_corners_leaf_count(self, depth):
        rng = np.random.default_rng(5)
        patch = make_patch(rng.normal(size=(4, 4, 3)), valences=(3, 4, 4, 5))
        tree = build_patch_tree(patch, modified_kernels(), depth)
        assert len(tree.leaves()) == 2 * (3 * (depth - 1) + 1) + 2

    def test_boundary_leaf_lookup(self):
        rng = np.random.default_rng(6)
        patch = make_patch(rng.normal(size=(4, 4, 3)), valences=(5, 4, 4, 4))
        tree = build_patch_tree(patch, modified_kernels(), 3)
        leaf = tree.leaf_on_boundary("v0", 0.01)
        assert leaf.depth == 3 and leaf.u0 == 0.0
        leaf = tree.leaf_on_boundary("v0", 0.9)
        assert leaf.depth == 1 and leaf.u0 == 0.5


class TestTessellate:
    def test_single_regular_patch_counts(self):
        mesh = corpus.torus_grid()
        frames = assign_frames(mesh)
        ps = build_patches(mesh, frames)
        buffers, _ = tessellate_buffers(ps, max_depth=3, leaf_resolution=3)
        one = buffers[0]
        assert len(one.triangles) == 8
        assert len(one.positions) == 9
        assert one.leaves == 1

    def test_corner_positions_interpolate_control_corners(self):
        mesh = corpus.torus_grid()
        ps = build_patches(mesh, assign_frames(mesh))
        buffers, _ = tessellate_buffers(ps, max_depth=2, leaf_resolution=3)
        buf = buffers[0]
        patch = ps[buf.patch_id]
        for code in ((0, 0), (0, 1), (1, 0), (1, 1)):
            u, v = float(code[0]), float(code[1])
            idx = [k for k in range(len(buf.params)) if tuple(buf.params[k]) == (u, v)]
            assert idx, code
            assert np.allclose(buf.positions[idx[0]], patch.corner_point(code), atol=1e-13)

    @pytest.mark.parametrize("name,chi", [("tetrahedron", 2), ("cube", 2),
                                          ("cube_edge", 0), ("two_cubes", 2), ("torus", 0)])
    def test_topology_preserved(self, name, chi):
        mesh = corpus.standard_corpus()[name]
        tm, _ = pipeline(mesh, depth=3, r=5)
        assert tm.is_closed_manifold()
        assert tm.euler_characteristic() == chi

    def test_mixed_depths_are_crack_free(self):
        # tetrahedron: every patch subdivides, neighbors reach equal depth on
        # shared edges but interior ladders still create T-junctions
        for r in (2, 3, 5):
            for depth in (1, 2, 4):
                tm, _ = pipeline(corpus.tetrahedron(), depth=depth, r=r)
                assert tm.is_closed_manifold()
                assert tm.euler_characteristic() == 2

    def test_standard_table_mode(self):
        tm, _ = pipeline(corpus.cube(), depth=2, r=3, table=standard_kernels())
        assert tm.is_closed_manifold() and tm.euler_characteristic() == 2

    def test_depth_zero_direct_evaluation(self):
        mesh = corpus.torus_grid()
        ps = build_patches(mesh, assign_frames(mesh))
        buffers, trees = tessellate_buffers(ps, max_depth=0, leaf_resolution=5)
        assert sum(b.subdivisions for b in buffers) == 0

    def test_determinism(self):
        mesh = corpus.cube()
        a, _ = pipeline(mesh, depth=2, r=3)
        b, _ = pipeline(corpus.cube(), depth=2, r=3)
        assert a.positions.tobytes() == b.positions.tobytes()
        assert a.normals.tobytes() == b.normals.tobytes()
        assert a.triangles.tobytes() == b.triangles.tobytes()

    def test_threads_do_not_change_output(self):
        mesh = corpus.tetrahedron()
        ps = build_patches(mesh, assign_frames(mesh))
        a = tessellate(ps, 2, 3, threads=1)
        b = tessellate(ps, 2, 3, threads=4)
        assert a.positions.tobytes() == b.positions.tobytes()
        assert a.triangles.tobytes() == b.triangles.tobytes()

    def test_bad_resolution_rejected(self):
        mesh = corpus.cube()
        ps = build_patches(mesh, assign_frames(mesh))
        with pytest.raises(ParamError):
            tessellate(ps, 2, 4)

    def test_refinement_converges_geometrically(self):
        # distance between consecutive-depth surfaces of the same patch
        mesh = corpus.tetrahedron()
        ps = build_patches(mesh, assign_frames(mesh))
        pid = ps.ids()[0]
        table = modified_kernels()
        samples = [(u, v) for u in np.linspace(0.05, 0.95, 7) for v in np.linspace(0.05, 0.95, 7)]

        def eval_depth(d):
            tree = build_patch_tree(ps[pid], table, d)
            pts = []
            for u, v in samples:
                node = tree.root
                while not node.is_leaf():
                    qu = 0 if u < node.u0 + node.size / 2 else 1
                    qv = 0 if v < node.v0 + node.size / 2 else 1
                    node = node.children[(qu, qv)]
                lu = (u - node.u0) / node.size
                lv = (v - node.v0) / node.size
                pts.append(evaluate_bezier(node.patch, lu, lv).point)
            return np.array(pts)

        deltas = []
        prev = eval_depth(0)
        for d in range(1, 6):
            cur = eval_depth(d)
            deltas.append(np.linalg.norm(cur - prev, axis=1).max())
            prev = cur
        # geometric decay: pairwise over two-step windows (the sample grid
        # quantizes single steps) and in aggregate over all five depths
        for a, b in zip(deltas, deltas[2:]):
            assert b <= 0.75 ** 2 * a + 1e-15
        assert deltas[-1] <= 0.75 ** 4 * deltas[0] + 1e-15


class TestExportObj:
    def test_counts_single_patch(self):
        mesh = corpus.torus_grid()
        ps = build_patches(mesh, assign_frames(mesh))
        buffers, _ = tessellate_buffers(ps, max_depth=0, leaf_resolution=3)
        from patchsmith.tessellate import TriMesh
        buf = buffers[0]
        tm = TriMesh(buf.positions, buf.normals, buf.triangles)
        text = export_obj(tm).decode()
        assert sum(1 for l in text.splitlines() if l.startswith("v ")) == 9
        assert sum(1 for l in text.splitlines() if l.startswith("f ")) == 8

    def test_reload_preserves_genus(self):
        for name, chi in (("tetrahedron", 2), ("cube_edge", 0)):
            tm, _ = pipeline(corpus.standard_corpus()[name], depth=2, r=3)
            back = load_obj(export_obj(tm))
            assert back.euler_characteristic() == chi
            back.validate()

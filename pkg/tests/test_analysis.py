import numpy as np
import pytest

from patchsmith import corpus
from patchsmith.analysis import (
    boundary_defects,
    child_c2_defect,
    compare_modes,
    defect_summary,
    ev_boundaries,
    patchset_fan,
    ring_defects,
    subdivide_fan,
    synthetic_ring_fan,
)
from patchsmith.frames import assign_frames
from patchsmith.kernels import (
    modified_kernels,
    standard_kernels,
    subdivide,
    unadjusted_modified_kernels,
)
from patchsmith.patches import FAN_CROSSING, BezierPatch, CornerMeta, build_patches
from patchsmith.tessellate import build_trees


def assembled(name):
    mesh = corpus.standard_corpus()[name]
    frames = assign_frames(mesh)
    return mesh, build_patches(mesh, frames)


def make_patch(P, valences=(4, 4, 4, 4)):
    corners = {code: CornerMeta(valence=k, extraordinary=(k != 4))
               for code, k in zip(((0, 0), (0, 1), (1, 0), (1, 1)), valences)}
    return BezierPatch(id=0, P=np.asarray(P, dtype=float), corners=corners)


def ring_closed_form_standard_depth1(K):
    """Expected unbroken-line defect of a regular ring after one standard
    split, from the displacement of the interior points."""
    ks = np.arange(K)
    V = np.stack([np.cos(2 * np.pi * ks / K), np.sin(2 * np.pi * ks / K), np.zeros(K)], axis=1)
    B = (V + np.roll(V, -1, axis=0)) / 2.0
    Y1 = V / 2.0 + (np.roll(V, 1, axis=0) + np.roll(V, -1, axis=0)) / 8.0
    B1 = B / 2.0
    defect = np.linalg.norm(B1 - (Y1 + np.roll(Y1, -1, axis=0)) / 2.0, axis=1).max()
    return defect / np.linalg.norm(Y1, axis=1).mean()


class TestBoundaryDefects:
    def test_assembled_regular_pair_is_c1(self):
        mesh, ps = assembled("torus")
        pid, bname, nid, nbname, rev = ps.shared_boundaries()[0]
        d = boundary_defects(ps[pid], ps[nid], bname, nbname, rev)
        assert d.c1 <= 1e-12
        assert d.g1 <= 1e-12
        # assembled neighbors are only first-order continuous; second
        # derivatives jump across the boundary between distinct patches
        assert d.c2 > 1e-3

    def test_perturbation_scales_linearly(self):
        mesh, ps = assembled("torus")
        pid, bname, nid, nbname, rev = ps.shared_boundaries()[0]
        defects = []
        for eps in (1e-3, 2e-3):
            import copy
            a = copy.deepcopy(ps[pid])
            a.P[1, 1] = a.P[1, 1] + np.array([0.0, 0.0, eps])
            d = boundary_defects(a, ps[nid], bname, nbname, rev)
            defects.append(d.c1)
        assert defects[0] > 1e-6
        assert abs(defects[1] / defects[0] - 2.0) < 1e-2

    def test_five_valent_fan_standard_g1_defect(self):
        mesh = corpus.pentagonal_pyramid()
        ps = build_patches(mesh, assign_frames(mesh))
        fan_ids = next(f for f in ps.corner_fans()
                       if len(f) == 5 and ps[f[0][0]].corners[f[0][1]].extraordinary)
        fan = subdivide_fan(patchset_fan(ps, fan_ids), standard_kernels(), 3)
        (pa, ca), (pb, cb) = fan[0], fan[1]
        ba = FAN_CROSSING[ca]
        link = ps[fan_ids[0][0]].neighbors[ba]
        d = boundary_defects(pa, pb, ba, link.boundary)
        assert d.g1 > 1e-4


class TestRingDefects:
    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_quad_ring_standard_keeps_unbroken_lines(self, depth):
        fan = subdivide_fan(synthetic_ring_fan(4), standard_kernels(), depth)
        assert ring_defects(fan).unbroken_defect <= 1e-12

    def test_triangle_ring_standard_matches_displacement_formula(self):
        fan = subdivide_fan(synthetic_ring_fan(3), standard_kernels(), 1)
        got = ring_defects(fan).unbroken_defect
        expected = ring_closed_form_standard_depth1(3)
        assert abs(got - expected) < 1e-12
        assert got > 1e-3

    @pytest.mark.parametrize("K", [3, 5, 6, 8, 10])
    @pytest.mark.parametrize("depth", [1, 3, 5])
    def test_modified_ring_stays_unbroken_and_planar(self, K, depth):
        fan = subdivide_fan(synthetic_ring_fan(K), modified_kernels(), depth)
        d = ring_defects(fan)
        assert d.unbroken_defect <= 1e-12
        assert d.planarity_residual <= 1e-12

    def test_nonplanar_ring_planarity_never_grows_under_modified(self):
        rng = np.random.default_rng(8)
        offsets = np.zeros((5, 3))
        offsets[:, 2] = rng.normal(scale=0.15, size=5)
        fan = synthetic_ring_fan(5, offsets=offsets)
        before = ring_defects(fan).planarity_residual
        assert before > 1e-3
        for depth in (1, 2, 3, 4, 5):
            after = ring_defects(subdivide_fan(fan, modified_kernels(), depth)).planarity_residual
            assert after <= before + 1e-14


class TestChildC2:
    def test_standard_children_are_c2(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            result = subdivide(make_patch(rng.normal(size=(4, 4, 3))), standard_kernels())
            assert child_c2_defect(result) <= 1e-10

    def test_modified_children_are_c2(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            result = subdivide(make_patch(rng.normal(size=(4, 4, 3))), modified_kernels())
            assert child_c2_defect(result) <= 1e-9

    def test_without_interior_readjustment_c2_breaks(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            result = subdivide(make_patch(rng.normal(size=(4, 4, 3))),
                               unadjusted_modified_kernels())
            assert child_c2_defect(result) > 1e-6


class TestCompareModes:
    def test_tetrahedron_modified_decreases(self):
        _, ps = assembled("tetrahedron")
        cmp = compare_modes(ps, depths=range(1, 5))
        vals = [cmp.c1("modified", d) for d in range(1, 5)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] < vals[0]

    def test_cube_edge_standard_stays_high(self):
        _, ps = assembled("cube_edge")
        cmp = compare_modes(ps, depths=range(1, 5))
        for d in range(1, 5):
            assert cmp.c1("standard", d) > 0.1

    def test_torus_is_exactly_continuous(self):
        _, ps = assembled("torus")
        assert ev_boundaries(ps) == []
        cmp = compare_modes(ps, depths=range(1, 4))
        for d in range(1, 4):
            for mode in ("standard", "modified"):
                assert cmp.c1(mode, d) <= 1e-12
                assert cmp.normal_spread(mode, d) <= 1e-12

    def test_csv_shape(self):
        _, ps = assembled("tetrahedron")
        cmp = compare_modes(ps, depths=range(1, 4))
        lines = cmp.to_csv().strip().splitlines()
        assert lines[0].startswith("depth,mode")
        assert len(lines) == 1 + 3 * 2


class TestDefectSummary:
    def test_summary_keys_and_magnitudes(self):
        _, ps = assembled("cube")
        trees = build_trees(ps, modified_kernels(), 2)
        s = defect_summary(ps, trees)
        assert s["eq1_gap"] == 0.0
        assert s["eq2_residual"] <= 1e-12
        assert s["ev_normal_spread"] <= 1e-9
        assert s["ev_boundary_c1"] > 1e-3  # finite depth leaves a residual near the corner
        assert s["mixed_depth_boundary_c1"] == 0.0  # every cube patch is extraordinary

    def test_mixed_boundary_defect_shrinks_with_frame_regularity(self):
        # where a subdivided patch meets a directly evaluated regular one,
        # the mismatch tracks how far the shared corner blocks are from
        # parallelograms, which extra refinement of the frames improves
        from patchsmith.analysis import mixed_depth_boundaries

        mesh = corpus.standard_corpus()["cube_edge"]
        values = []
        for ds in (1, 2):
            ps = build_patches(mesh, assign_frames(mesh, ds_iterations=ds))
            assert len(mixed_depth_boundaries(ps)) > 0
            trees = build_trees(ps, modified_kernels(), 2)
            values.append(defect_summary(ps, trees)["mixed_depth_boundary_c1"])
        assert values[0] > 1e-3
        assert values[1] < 0.7 * values[0]

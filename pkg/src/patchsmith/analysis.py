"""Quantitative continuity measurements on assembled and subdivided patches.

Defect conventions: C1 compares opposing cross-boundary first derivatives
(zero when the boundary points are midpoints of their flanking interior
points), G1 compares tangent planes, C2 compares second cross-derivatives.
All defects are normalized by local magnitudes so they are invariant under
rigid motion and scale. Corner metrics (normal spread, ring planarity, and
the blue-equals-midpoint-of-yellows defect) are evaluated on control nets,
with the extraordinary corner's tangent plane taken from the patch corner
tangents rather than a parametric normal, which can fold there.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalysisError
from .kernels import KernelTable, SubdivisionResult, modified_kernels, standard_kernels, subdivide
from .patches import (
    BOUNDARY_CORNERS,
    FAN_CROSSING,
    BezierPatch,
    CornerMeta,
    PatchSet,
    boundary_uv,
    inward_direction,
)
from .tessellate import PatchTree, build_trees, evaluate_bezier


def interior_parameters(n: int) -> np.ndarray:
    """n uniformly spaced parameters strictly inside (0, 1).

    The endpoints are corners, where the cross-derivative comparison is
    singular by construction at non-4-valent corners; corners are covered by
    the ring metrics instead.
    """
    return (np.arange(n) + 1.0) / (n + 1.0)


def _cross_state(patch: BezierPatch, boundary: str, t: float):
    u, v = boundary_uv(boundary, t)
    wu, wv = inward_direction(boundary)
    s = evaluate_bezier(patch, u, v)
    d1 = s.du * wu + s.dv * wv
    d2 = s.duu * wu * wu + 2.0 * s.duv * wu * wv + s.dvv * wv * wv
    n = np.cross(s.du, s.dv)
    return s.point, d1, d2, n


@dataclass
class BoundaryDefect:
    patch_a: int
    boundary_a: str
    patch_b: int
    boundary_b: str
    samples: int
    c1: float
    g1: float
    c2: float


def boundary_defects(patch_a: BezierPatch, patch_b: BezierPatch,
                     boundary_a: str, boundary_b: str, reversed_: bool = False,
                     samples: int = 9) -> BoundaryDefect:
    """Defects across one shared boundary, from analytic derivatives at
    uniformly spaced interior boundary parameters."""
    c1 = g1 = c2 = 0.0
    for t in interior_parameters(samples):
        tb = 1.0 - t if reversed_ else t
        pa, d1a, d2a, na = _cross_state(patch_a, boundary_a, t)
        pb, d1b, d2b, nb = _cross_state(patch_b, boundary_b, tb)
        scale = max(np.linalg.norm(pa - pb), 1e-9 * max(np.linalg.norm(d1a), 1.0))
        if np.linalg.norm(pa - pb) > 1e-6 * max(np.linalg.norm(d1a), np.linalg.norm(d1b), 1e-30):
            raise AnalysisError(
                f"boundary orientation mismatch: points diverge at t={t}")
        denom = max(np.linalg.norm(d1a), np.linalg.norm(d1b))
        if denom > 0:
            c1 = max(c1, float(np.linalg.norm(d1a + d1b) / denom))
        if np.linalg.norm(na) > 0 and np.linalg.norm(nb) > 0:
            g1 = max(g1, oriented_angle(na, nb))
        denom2 = max(np.linalg.norm(d2a), np.linalg.norm(d2b))
        if denom2 > 0:
            c2 = max(c2, float(np.linalg.norm(d2a - d2b) / denom2))
    return BoundaryDefect(patch_a.id, boundary_a, patch_b.id, boundary_b, samples, c1, g1, c2)


# ----------------------------------------------------------------------
# corner rings


FanEntry = tuple[BezierPatch, tuple[int, int]]


@dataclass
class CornerDefect:
    valence: int
    normal_spread: float  # max pairwise tangent-plane angle at the corner (radians)
    planarity_residual: float  # ring distance to best plane through corner / ring radius
    unbroken_defect: float  # max |blue - midpoint(yellows)| / ring radius


def plane_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Unsigned angle between two planes given by (unnormalized) normals."""
    cross = np.linalg.norm(np.cross(a, b))
    dot = abs(float(np.dot(a, b)))
    return math.atan2(cross, dot)


def oriented_angle(a: np.ndarray, b: np.ndarray) -> float:
    cross = np.linalg.norm(np.cross(a, b))
    return math.atan2(cross, float(np.dot(a, b)))


def _corner_tangent_plane(patch: BezierPatch, code) -> np.ndarray:
    corner = patch.corner_point(code)
    b1, b2 = [b for b, ends in BOUNDARY_CORNERS.items() if code in ends]
    t1 = patch.corner_boundary_point(code, b1) - corner
    t2 = patch.corner_boundary_point(code, b2) - corner
    candidates = [np.cross(t1, t2)]
    # folded rings can make the corner tangents parallel; the interior
    # diagonal still spans the (planar) ring's plane with either of them
    diag = patch.corner_interior_point(code) - corner
    candidates.append(np.cross(t1, diag))
    candidates.append(np.cross(t2, diag))
    scale = max(np.linalg.norm(t1), np.linalg.norm(t2))
    for n in candidates:
        length = np.linalg.norm(n)
        if length > 1e-9 * scale * scale:
            return n / length
    meta = patch.corners[code]
    if meta.normal is not None:
        return meta.normal
    raise AnalysisError("degenerate corner tangents")


def ring_defects(fan: list[FanEntry]) -> CornerDefect:
    """Corner metrics of a cyclically ordered fan of patches around one corner."""
    origin = fan[0][0].corner_point(fan[0][1])
    yellows = np.array([p.corner_interior_point(code) for p, code in fan])
    blues = np.array([p.corner_boundary_point(code, FAN_CROSSING[code]) for p, code in fan])
    vectors = yellows - origin
    radius = float(np.linalg.norm(vectors, axis=1).mean())
    mid = (yellows + np.roll(yellows, -1, axis=0)) / 2.0
    unbroken = float(np.linalg.norm(blues - mid, axis=1).max() / radius)

    w, vecs = np.linalg.eigh(vectors.T @ vectors)
    plane_n = vecs[:, 0]
    planarity = float(np.abs(vectors @ plane_n).max() / radius)

    spread = 0.0
    normals = [_corner_tangent_plane(p, code) for p, code in fan]
    for i in range(len(normals)):
        for j in range(i + 1, len(normals)):
            spread = max(spread, plane_angle(normals[i], normals[j]))
    return CornerDefect(
        valence=len(fan),
        normal_spread=spread,
        planarity_residual=planarity,
        unbroken_defect=unbroken,
    )


def synthetic_ring_fan(K: int, radius: float = 1.0, offsets=None) -> list[FanEntry]:
    """A fan of K patches sharing the origin with interior diagonals on a
    regular K-gon (optionally displaced by per-corner offsets).

    Patch k crosses to patch k+1 over its row-0 boundary, matching the fan
    walk convention, so ring_defects and subdivide_fan apply directly. The
    nets away from the shared corner are a smooth bilinear completion; ring
    metrics under subdivision depend only on the corner blocks.
    """
    ks = np.arange(K)
    V = np.stack([radius * np.cos(2 * np.pi * ks / K),
                  radius * np.sin(2 * np.pi * ks / K),
                  np.zeros(K)], axis=1)
    if offsets is not None:
        V = V + np.asarray(offsets, dtype=float)
    B = (V + np.roll(V, -1, axis=0)) / 2.0
    fan = []
    for k in range(K):
        b_out, b_in = B[k], B[k - 1]
        corner_mix = V[k] - b_out - b_in
        i_idx = np.arange(4).reshape(4, 1, 1)
        j_idx = np.arange(4).reshape(1, 4, 1)
        P = j_idx * b_out + i_idx * b_in + (i_idx * j_idx) * corner_mix
        meta = {code: CornerMeta(valence=4, extraordinary=False) for code in
                ((0, 1), (1, 0), (1, 1))}
        meta[(0, 0)] = CornerMeta(valence=K, extraordinary=(K != 4),
                                  normal=np.array([0.0, 0.0, 1.0]))
        fan.append((BezierPatch(id=k, P=P, corners=meta), (0, 0)))
    return fan


def subdivide_fan(fan: list[FanEntry], table: KernelTable, depth: int = 1) -> list[FanEntry]:
    """Replace each fan patch by its child owning the shared corner.

    Patches are translated so the shared corner sits at the origin before
    subdividing; every ring metric is translation invariant, and working
    corner-relative keeps deep subdivisions free of cancellation noise from
    large world coordinates.
    """
    from dataclasses import replace as dc_replace

    origin = fan[0][0].corner_point(fan[0][1]).copy()
    out = [(dc_replace(p, P=p.P - origin), code) for p, code in fan]
    for _ in range(depth):
        out = [(subdivide(p, table).child(*code), code) for p, code in out]
    return out


def patchset_fan(patchset: PatchSet, fan_ids) -> list[FanEntry]:
    return [(patchset[pid], code) for pid, code in fan_ids]


def child_c2_defect(result: SubdivisionResult, samples: int = 9) -> float:
    """Largest relative second-derivative jump across the two internal
    boundaries of one subdivision."""
    pairs = [
        ((0, 0), (1, 0), "u1", "u0"),
        ((0, 1), (1, 1), "u1", "u0"),
        ((0, 0), (0, 1), "v1", "v0"),
        ((1, 0), (1, 1), "v1", "v0"),
    ]
    worst = 0.0
    for qa, qb, ba, bb in pairs:
        defect = boundary_defects(result.child(*qa), result.child(*qb), ba, bb,
                                  samples=samples)
        worst = max(worst, defect.c2)
    return worst


# ----------------------------------------------------------------------
# mode comparison over the hierarchy


def _tree_cross_state(tree: PatchTree, boundary: str, t: float):
    leaf = tree.leaf_on_boundary(boundary, t)
    if boundary in ("u0", "u1"):
        local_t = (t - leaf.v0) / leaf.size
    else:
        local_t = (t - leaf.u0) / leaf.size
    point, d1, d2, n = _cross_state(leaf.patch, boundary, local_t)
    return point, d1 / leaf.size, d2 / (leaf.size ** 2), n


def ev_boundaries(patchset: PatchSet):
    """Shared boundaries with an extraordinary corner at either end."""
    out = []
    for pid, bname, nid, nbname, rev in patchset.shared_boundaries():
        patch = patchset[pid]
        ends = BOUNDARY_CORNERS[bname]
        if any(patch.corners[c].extraordinary for c in ends):
            out.append((pid, bname, nid, nbname, rev))
    return out


def mixed_depth_boundaries(patchset: PatchSet):
    """Boundaries without extraordinary endpoints where exactly one side is
    an extraordinary patch: a subdivided hierarchy meets a directly evaluated
    polynomial there. Measured and reported, never gated."""
    out = []
    for pid, bname, nid, nbname, rev in patchset.shared_boundaries():
        patch = patchset[pid]
        ends = BOUNDARY_CORNERS[bname]
        if any(patch.corners[c].extraordinary for c in ends):
            continue
        if patch.is_extraordinary() != patchset[nid].is_extraordinary():
            out.append((pid, bname, nid, nbname, rev))
    return out


def hierarchy_boundary_defects(trees: dict[int, PatchTree], boundaries,
                               samples: int = 9) -> tuple[float, float, float]:
    """Max C1 defect, tangent-plane angle, and C2 jump across root
    boundaries, with each side evaluated on its deepest covering leaf
    (derivatives chain-scaled to root parameters)."""
    max_c1 = 0.0
    max_g1 = 0.0
    max_c2 = 0.0
    for pid, bname, nid, nbname, rev in boundaries:
        for t in interior_parameters(samples):
            tb = 1.0 - t if rev else t
            _, d1a, d2a, na = _tree_cross_state(trees[pid], bname, t)
            _, d1b, d2b, nb = _tree_cross_state(trees[nid], nbname, tb)
            denom = max(np.linalg.norm(d1a), np.linalg.norm(d1b))
            if denom > 0:
                max_c1 = max(max_c1, float(np.linalg.norm(d1a + d1b) / denom))
            if np.linalg.norm(na) > 0 and np.linalg.norm(nb) > 0:
                max_g1 = max(max_g1, oriented_angle(na, nb))
            denom2 = max(np.linalg.norm(d2a), np.linalg.norm(d2b))
            if denom2 > 0:
                max_c2 = max(max_c2, float(np.linalg.norm(d2a - d2b) / denom2))
    return max_c1, max_g1, max_c2


# csv columns per metric family
_METRIC_COLUMNS = {
    "c1": [("max_c1_defect", "max_c1"), ("max_normal_spread", "max_normal_spread")],
    "g1": [("max_g1_defect", "max_g1"), ("max_normal_spread", "max_normal_spread")],
    "c2": [("max_c2_defect", "max_c2")],
    "ring": [("max_unbroken_defect", "max_unbroken"),
             ("max_ring_planarity", "max_ring_planarity"),
             ("max_normal_spread", "max_normal_spread")],
}


@dataclass
class ModeComparison:
    """Defect measures along extraordinary-vertex boundaries and corner
    rings, per depth and kernel mode."""

    entries: dict[tuple[str, int], dict] = field(default_factory=dict)

    def c1(self, mode: str, depth: int) -> float:
        return self.entries[(mode, depth)]["max_c1"]

    def value(self, mode: str, depth: int, key: str) -> float:
        return self.entries[(mode, depth)][key]

    def normal_spread(self, mode: str, depth: int) -> float:
        return self.entries[(mode, depth)]["max_normal_spread"]

    def to_csv(self, metric: str = "c1") -> str:
        columns = _METRIC_COLUMNS[metric]
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["depth", "mode"] + [name for name, _ in columns])
        for (mode, depth) in sorted(self.entries, key=lambda k: (k[1], k[0])):
            e = self.entries[(mode, depth)]
            writer.writerow([depth, mode] + [f"{e[key]:.16e}" for _, key in columns])
        return buf.getvalue()

    def to_json(self) -> str:
        records = [
            {"mode": mode, "depth": depth, **vals}
            for (mode, depth), vals in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        ]
        return json.dumps({"comparison": records}, indent=1)


def compare_modes(patchset: PatchSet, depths, samples: int = 9,
                  tables: dict[str, KernelTable] | None = None) -> ModeComparison:
    """Defect table over depth x kernel mode for one assembled model."""
    tables = tables or {"standard": standard_kernels(), "modified": modified_kernels()}
    boundaries = ev_boundaries(patchset)
    fans = patchset.extraordinary_corners()
    result = ModeComparison()
    for mode, table in tables.items():
        for depth in depths:
            trees = build_trees(patchset, table, depth)
            c1, g1, c2 = hierarchy_boundary_defects(trees, boundaries, samples)
            spread = 0.0
            unbroken = 0.0
            planarity = 0.0
            for fan_ids in fans:
                fan = subdivide_fan(patchset_fan(patchset, fan_ids), table, depth)
                d = ring_defects(fan)
                spread = max(spread, d.normal_spread)
                unbroken = max(unbroken, d.unbroken_defect)
                planarity = max(planarity, d.planarity_residual)
            result.entries[(mode, depth)] = {
                "max_c1": c1,
                "max_g1": g1,
                "max_c2": c2,
                "max_normal_spread": spread,
                "max_unbroken": unbroken,
                "max_ring_planarity": planarity,
            }
    return result


def defect_summary(patchset: PatchSet, trees: dict[int, PatchTree],
                   samples: int = 5) -> dict:
    """Compact defect digest for pipeline stats and session updates."""
    from .patches import check_boundary_conditions

    report = check_boundary_conditions(patchset)
    c1, g1, _ = hierarchy_boundary_defects(trees, ev_boundaries(patchset), samples)
    mixed_c1, mixed_g1, _ = hierarchy_boundary_defects(
        trees, mixed_depth_boundaries(patchset), samples)
    spread = 0.0
    for fan_ids in patchset.extraordinary_corners():
        spread = max(spread, ring_defects(patchset_fan(patchset, fan_ids)).normal_spread)
    return {
        "eq1_gap": report.max_eq1_gap(),
        "eq2_residual": report.max_eq2_residual(),
        "ev_boundary_c1": c1,
        "ev_boundary_g1": g1,
        "mixed_depth_boundary_c1": mixed_c1,
        "mixed_depth_boundary_g1": mixed_g1,
        "ev_normal_spread": spread,
    }

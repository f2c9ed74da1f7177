"""K-sided polygon frames attached to every face, vertex, and edge of a mesh.

A frame's corners are the control handles for the smooth surface near its
owner: the frame centroid becomes a surface point, the frame plane its
tangent plane, and the corner vectors the interior Bezier points of the
surrounding patches. Frames are value objects; every operation returns a new
frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AssemblyError, DegenerateFrameError, ParamError
from .mesh import HalfEdgeMesh, doo_sabin_refine

PLANE_TOL_FACTOR = 1e-9  # times the frame's bounding-box diagonal


@dataclass(frozen=True)
class FrameOwner:
    kind: str  # 'face' | 'vertex' | 'edge'
    id: int


@dataclass(frozen=True)
class PolygonFrame:
    owner: FrameOwner
    corners: np.ndarray  # (K, 3) base polygon, cyclic order
    sectors: tuple[int, ...]  # corner half-edge ids of the owner's mesh, aligned with corners
    scale: float = 1.0
    rotation: float = 0.0
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "corners", np.asarray(self.corners, dtype=float))
        if self.K < 3:
            raise DegenerateFrameError(f"frame needs at least 3 corners, got {self.K}")

    @property
    def K(self) -> int:
        return len(self.corners)

    @property
    def centroid(self) -> np.ndarray:
        return self.corners.mean(axis=0)

    @property
    def vectors(self) -> np.ndarray:
        """Corner vectors relative to the centroid (they sum to zero)."""
        return self.corners - self.centroid

    @property
    def normal(self) -> np.ndarray:
        """Unit Newell normal of the base polygon, following its winding."""
        n = newell_normal(self.corners)
        length = np.linalg.norm(n)
        if length == 0.0:
            raise DegenerateFrameError(f"frame {self.owner} has zero area")
        return n / length

    def plane_normal(self) -> np.ndarray:
        """Unit normal of the frame plane.

        Uses the winding (Newell) normal when it is well conditioned; rings
        whose signed area cancels (saddle configurations) fall back to the
        least-squares plane direction.
        """
        n = newell_normal(self.corners)
        length = float(np.linalg.norm(n))
        scale = self.bbox_diagonal()
        if length > 1e-7 * scale * scale:
            return n / length
        return fit_plane_normal(self.corners)

    def bbox_diagonal(self) -> float:
        return float(np.linalg.norm(self.corners.max(axis=0) - self.corners.min(axis=0)))

    def effective_corners(self) -> np.ndarray:
        """Base corners with scale, rotation about the plane normal, and offset applied."""
        v = self.vectors
        if self.rotation != 0.0:
            v = v @ rotation_matrix(self.plane_normal(), self.rotation).T
        return self.centroid + np.asarray(self.offset, dtype=float) + self.scale * v

    def sector_index(self, corner_key: int) -> int:
        try:
            return self.sectors.index(corner_key)
        except ValueError:
            raise AssemblyError(f"corner key {corner_key} not on frame {self.owner}") from None


def newell_normal(corners: np.ndarray) -> np.ndarray:
    rolled = np.roll(corners, -1, axis=0)
    return 0.5 * np.cross(corners, rolled).sum(axis=0)


def rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    cc = 1.0 - c
    return np.array([
        [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
        [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
        [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
    ])


def fit_plane_normal(corners: np.ndarray) -> np.ndarray:
    """Least-squares plane normal through the centroid (direction of least variance)."""
    centered = corners - corners.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=True)
    if len(s) < 2 or s[1] <= 1e-12 * max(s[0], 1e-300):
        raise DegenerateFrameError("corners are collinear; plane fit is rank-deficient")
    return vt[2]


def _projection_margin(centered: np.ndarray, n: np.ndarray) -> float:
    """Smallest corner separation (mutual and from the centroid) after projecting out n."""
    flat = centered - np.outer(centered @ n, n)
    radius = float(np.linalg.norm(flat, axis=1).min())
    diff = flat[:, None, :] - flat[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, np.inf)
    return min(radius, float(dist.min()))


def _fibonacci_directions(count: int) -> np.ndarray:
    k = np.arange(count)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    z = 1.0 - 2.0 * (k + 0.5) / count
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def planarize(frame: PolygonFrame) -> PolygonFrame:
    """Project corners orthogonally onto their least-squares plane.

    The centroid is unchanged and planar input passes through untouched
    (projection distances are zero). Rings that wrap an axis (merged faces)
    can collapse corner pairs under the least-squares projection; those fall
    back to the direction with the smallest projection residual among a
    deterministic sphere sample that keeps all corners separated.
    """
    centroid = frame.centroid
    centered = frame.corners - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=True)
    if len(s) < 2 or s[1] <= 1e-12 * max(s[0], 1e-300):
        raise DegenerateFrameError("corners are collinear; plane fit is rank-deficient")
    scale = frame.bbox_diagonal()

    def project(n):
        return replace(frame, corners=centroid + centered - np.outer(centered @ n, n))

    if _projection_margin(centered, vt[2]) > 1e-6 * scale:
        return project(vt[2])
    best = None  # (residual, n) among healthy margins
    widest = None  # (margin, n) fallback when nothing is healthy
    for n in _fibonacci_directions(513):
        margin = _projection_margin(centered, n)
        if widest is None or margin > widest[0]:
            widest = (margin, n)
        if margin <= 1e-3 * scale:
            continue
        residual = float(((centered @ n) ** 2).sum())
        if best is None or residual < best[0]:
            best = (residual, n)
    if best is not None:
        return project(best[1])
    if widest is not None and widest[0] > 1e-9 * scale:
        return project(widest[1])
    raise DegenerateFrameError(f"no projection plane keeps frame {frame.owner} non-degenerate")


def regularize_dual(frame: PolygonFrame, iterations: int) -> PolygonFrame:
    """Apply the midpoint-polygon map an even number of times, then restore
    the mean corner radius about the (unchanged) centroid."""
    if iterations <= 0 or iterations % 2 != 0:
        raise ParamError(f"iterations must be even and positive, got {iterations}")
    centroid = frame.centroid
    v = frame.vectors
    before = np.linalg.norm(v, axis=1).mean()
    for _ in range(iterations):
        v = (v + np.roll(v, -1, axis=0)) / 2.0
    after = np.linalg.norm(v, axis=1).mean()
    if after <= 0.0:
        raise DegenerateFrameError("dual map collapsed the polygon")
    return replace(frame, corners=centroid + v * (before / after))


def set_frame_params(frame: PolygonFrame, scale: float = 1.0, rotation: float = 0.0,
                     offset=(0.0, 0.0, 0.0)) -> PolygonFrame:
    """Set the designer parameters: uniform scale about the centroid, rotation
    about the plane normal, and a centroid offset."""
    if scale <= 0.0:
        raise ParamError(f"scale must be positive, got {scale}")
    return replace(frame, scale=float(scale), rotation=float(rotation),
                   offset=tuple(float(x) for x in offset))


@dataclass
class FrameQuality:
    planarity_residual: float  # max plane distance / mean corner radius
    convex: bool
    star: bool
    length_residual: float  # max | |V_k| - mean | / mean
    angle_residual: float  # max | corner step angle - 2*pi/K | (radians)


def frame_quality(frame: PolygonFrame) -> FrameQuality:
    corners = frame.effective_corners()
    centroid = corners.mean(axis=0)
    v = corners - centroid
    radii = np.linalg.norm(v, axis=1)
    mean_r = radii.mean()
    if mean_r <= 0.0:
        raise DegenerateFrameError("frame has zero radius")
    n = fit_plane_normal(corners)
    planarity = float(np.abs(v @ n).max() / mean_r)
    # in-plane angular order about the centroid
    basis_u = v[0] - (v[0] @ n) * n
    basis_u = basis_u / np.linalg.norm(basis_u)
    basis_w = np.cross(n, basis_u)
    angles = np.arctan2(v @ basis_w, v @ basis_u)
    steps = np.diff(np.concatenate([angles, angles[:1]]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    star = bool(np.all(steps > 0) or np.all(steps < 0))
    target = 2.0 * np.pi / frame.K
    angle_residual = float(np.abs(np.abs(steps) - target).max())
    edges = np.roll(corners, -1, axis=0) - corners
    turns = np.cross(edges, np.roll(edges, -1, axis=0)) @ n
    convex = bool(np.all(turns > 0) or np.all(turns < 0))
    length_residual = float(np.abs(radii - mean_r).max() / mean_r)
    return FrameQuality(planarity, convex, star, length_residual, angle_residual)


@dataclass
class FrameSet:
    """One frame per face, vertex, and edge of a mesh."""

    frames: dict[FrameOwner, PolygonFrame] = field(default_factory=dict)

    def __getitem__(self, owner: FrameOwner) -> PolygonFrame:
        return self.frames[owner]

    def __setitem__(self, owner: FrameOwner, frame: PolygonFrame) -> None:
        self.frames[owner] = frame

    def __contains__(self, owner: FrameOwner) -> bool:
        return owner in self.frames

    def __len__(self) -> int:
        return len(self.frames)

    def owners(self) -> list[FrameOwner]:
        order = {"face": 0, "vertex": 1, "edge": 2}
        return sorted(self.frames, key=lambda o: (order[o.kind], o.id))

    def face(self, fid: int) -> PolygonFrame:
        return self.frames[FrameOwner("face", fid)]

    def vertex(self, vid: int) -> PolygonFrame:
        return self.frames[FrameOwner("vertex", vid)]

    def edge(self, eid: int) -> PolygonFrame:
        return self.frames[FrameOwner("edge", eid)]

    def to_json(self) -> str:
        records = []
        for owner in self.owners():
            f = self.frames[owner]
            rec = {
                "owner": {"kind": owner.kind, "id": owner.id},
                "corners": [[float(x) for x in c] for c in f.corners],
                "scale": f.scale,
                "rotation": f.rotation,
            }
            if any(f.offset):
                rec["offset"] = list(f.offset)
            records.append(rec)
        return json.dumps({"frames": records}, indent=1)

    @classmethod
    def from_json(cls, text: str, layout: "FrameSet") -> "FrameSet":
        """Rehydrate against a layout computed from the same mesh.

        The layout supplies the sector keys (which are not serialized); the
        stored corners and parameters override its geometry.
        """
        data = json.loads(text)
        out = cls(dict(layout.frames))
        for rec in data["frames"]:
            owner = FrameOwner(rec["owner"]["kind"], int(rec["owner"]["id"]))
            if owner not in out.frames:
                raise AssemblyError(f"frame {owner} not present on the mesh")
            base = out.frames[owner]
            corners = np.asarray(rec["corners"], dtype=float)
            if len(corners) != base.K:
                raise AssemblyError(f"frame {owner} has {len(corners)} corners, expected {base.K}")
            out.frames[owner] = replace(
                base,
                corners=corners,
                scale=float(rec.get("scale", 1.0)),
                rotation=float(rec.get("rotation", 0.0)),
                offset=tuple(rec.get("offset", (0.0, 0.0, 0.0))),
            )
        return out


def assign_frames(mesh: HalfEdgeMesh, ds_iterations: int = 1, dual_iterations: int = 0) -> FrameSet:
    """Build the frame for every face, vertex, and edge of the mesh.

    Corners come from the owner's polygon after `ds_iterations` rounds of
    Doo-Sabin refinement; non-quad frames are then planarized, and optionally
    regularized with `dual_iterations` midpoint-dual steps.
    """
    if ds_iterations < 1:
        raise ParamError("ds_iterations must be >= 1")
    if dual_iterations % 2 != 0 or dual_iterations < 0:
        raise ParamError("dual_iterations must be even and non-negative")

    refined, prov = doo_sabin_refine(mesh)
    owner_of_face: dict[int, tuple[str, int]] = dict(prov.face_source)
    vertex_key: dict[int, int] = {}
    for fid, keys in prov.corner_keys.items():
        for h, key in zip(refined.face_loop(fid), keys):
            vertex_key[refined.half_edges[h].origin] = key

    for _ in range(ds_iterations - 1):
        nxt, nprov = doo_sabin_refine(refined)
        new_owner: dict[int, tuple[str, int]] = {}
        new_vertex_key: dict[int, int] = {}
        for fid, (kind, src) in nprov.face_source.items():
            if kind == "face" and src in owner_of_face:
                new_owner[fid] = owner_of_face[src]
        for fid, keys in nprov.corner_keys.items():
            loop = nxt.face_loop(fid)
            for h, prev_he in zip(loop, keys):
                origin_prev = refined.half_edges[prev_he].origin
                new_vertex_key[nxt.half_edges[h].origin] = vertex_key[origin_prev]
        refined, owner_of_face, vertex_key = nxt, new_owner, new_vertex_key

    frames = FrameSet()
    for fid in sorted(owner_of_face):
        kind, src = owner_of_face[fid]
        owner = FrameOwner(kind, src)
        loop = refined.face_loop(fid)
        corners = np.array([refined.vertices[refined.half_edges[h].origin].position for h in loop])
        sectors = tuple(vertex_key[refined.half_edges[h].origin] for h in loop)
        if np.linalg.norm(corners.max(axis=0) - corners.min(axis=0)) <= 0.0:
            raise DegenerateFrameError(f"zero-area polygon for {owner}")
        frame = PolygonFrame(owner, corners, sectors)
        if frame.K != 4:
            frame = planarize(frame)
            if dual_iterations:
                frame = regularize_dual(frame, dual_iterations)
        frames[owner] = frame

    expected = mesh.face_count + mesh.vertex_count + mesh.edge_count
    if len(frames) != expected:
        raise AssemblyError(f"frame coverage incomplete: {len(frames)} of {expected}")
    return frames

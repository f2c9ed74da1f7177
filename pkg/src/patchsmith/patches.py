"""Assembly of bicubic Bezier control nets from polygon frames.

One patch per corner of the input mesh (one quad of the vertex-inserted
mesh). Each of the four patch corners contributes a 2x2 block read off its
frame: the frame centroid (corner point), the midpoints of the two frame
edges flanking the sector (boundary points), and the sector's frame corner
(interior point). Neighboring patches therefore share boundary rows
point-for-point, and around every corner the boundary points sit exactly at
the midpoints of the adjacent interior points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError
from .frames import FrameOwner, FrameSet
from .mesh import HalfEdgeMesh

# boundary names: u0/u1 are the rows i=0 and i=3, v0/v1 the columns j=0 and j=3
BOUNDARIES = ("u0", "u1", "v0", "v1")

# corner codes (qu, qv) -> net index (3*qu, 3*qv)
CORNER_CODES = ((0, 0), (0, 1), (1, 0), (1, 1))

# boundary -> (corner at param 0, corner at param 3)
BOUNDARY_CORNERS = {
    "u0": ((0, 0), (0, 1)),
    "u1": ((1, 0), (1, 1)),
    "v0": ((0, 0), (1, 0)),
    "v1": ((0, 1), (1, 1)),
}

# fan rotation: the boundary to cross when walking the patch fan around a corner
FAN_CROSSING = {(0, 0): "u0", (0, 1): "v1", (1, 1): "u1", (1, 0): "v0"}


def corner_net_index(code) -> tuple[int, int]:
    qu, qv = code
    return 3 * qu, 3 * qv


def boundary_slice(P: np.ndarray, name: str) -> np.ndarray:
    if name == "u0":
        return P[0, :]
    if name == "u1":
        return P[3, :]
    if name == "v0":
        return P[:, 0]
    if name == "v1":
        return P[:, 3]
    raise KeyError(name)


def boundary_uv(name: str, t: float) -> tuple[float, float]:
    """Map a boundary parameter to patch (u, v); u follows the i index."""
    if name == "u0":
        return 0.0, t
    if name == "u1":
        return 1.0, t
    if name == "v0":
        return t, 0.0
    if name == "v1":
        return t, 1.0
    raise KeyError(name)


def inward_direction(name: str) -> tuple[float, float]:
    """Unit (du, dv) pointing from the boundary into the patch interior."""
    return {"u0": (1.0, 0.0), "u1": (-1.0, 0.0), "v0": (0.0, 1.0), "v1": (0.0, -1.0)}[name]


@dataclass
class CornerMeta:
    valence: int
    extraordinary: bool
    frame_owner: FrameOwner | None = None
    frame_corner: int | None = None
    normal: np.ndarray | None = None  # frame plane normal when extraordinary


@dataclass
class NeighborLink:
    patch: int
    boundary: str
    reversed: bool = False


@dataclass
class BezierPatch:
    id: int
    P: np.ndarray  # (4, 4, 3)
    corners: dict[tuple[int, int], CornerMeta] = field(default_factory=dict)
    neighbors: dict[str, NeighborLink] = field(default_factory=dict)

    def corner_point(self, code) -> np.ndarray:
        i, j = corner_net_index(code)
        return self.P[i, j]

    def is_extraordinary(self) -> bool:
        return any(m.extraordinary for m in self.corners.values())

    def corner_interior_point(self, code) -> np.ndarray:
        """The interior net point diagonally adjacent to the corner (its 'yellow')."""
        qu, qv = code
        return self.P[1 + qu, 1 + qv]

    def corner_boundary_point(self, code, boundary: str) -> np.ndarray:
        """The boundary point adjacent to the corner along one of its boundaries."""
        pts = boundary_slice(self.P, boundary)
        ends = BOUNDARY_CORNERS[boundary]
        if code == ends[0]:
            return pts[1]
        if code == ends[1]:
            return pts[2]
        raise AssemblyError(f"corner {code} not on boundary {boundary}")


def classify_patch(patch: BezierPatch) -> str:
    return "extraordinary" if patch.is_extraordinary() else "regular"


@dataclass
class PatchSet:
    patches: dict[int, BezierPatch] = field(default_factory=dict)

    def __getitem__(self, pid: int) -> BezierPatch:
        return self.patches[pid]

    def __len__(self) -> int:
        return len(self.patches)

    def ids(self) -> list[int]:
        return sorted(self.patches)

    def shared_boundaries(self) -> list[tuple[int, str, int, str, bool]]:
        """Each interior boundary once: (patch, boundary, neighbor, its boundary, reversed)."""
        seen = set()
        out = []
        for pid in self.ids():
            patch = self.patches[pid]
            for bname, link in patch.neighbors.items():
                key = frozenset({(pid, bname), (link.patch, link.boundary)})
                if key in seen:
                    continue
                seen.add(key)
                out.append((pid, bname, link.patch, link.boundary, link.reversed))
        return out

    def fan_around(self, pid: int, code) -> list[tuple[int, tuple[int, int]]]:
        """The cyclic fan of (patch, corner) pairs around one mesh corner."""
        fan = [(pid, code)]
        cur_pid, cur_code = pid, code
        for _ in range(len(self.patches) * 4):
            bname = FAN_CROSSING[cur_code]
            link = self.patches[cur_pid].neighbors[bname]
            ends = BOUNDARY_CORNERS[bname]
            end_param = 0 if cur_code == ends[0] else 3
            if link.reversed:
                end_param = 3 - end_param
            nends = BOUNDARY_CORNERS[link.boundary]
            cur_pid, cur_code = link.patch, (nends[0] if end_param == 0 else nends[1])
            if (cur_pid, cur_code) == (pid, code):
                return fan
            fan.append((cur_pid, cur_code))
        raise AssemblyError(f"fan around patch {pid} corner {code} does not close")

    def corner_fans(self) -> list[list[tuple[int, tuple[int, int]]]]:
        """All distinct corner fans, each listed once."""
        seen = set()
        fans = []
        for pid in self.ids():
            for code in CORNER_CODES:
                if (pid, code) in seen:
                    continue
                fan = self.fan_around(pid, code)
                seen.update(fan)
                fans.append(fan)
        return fans

    def extraordinary_corners(self) -> list[list[tuple[int, tuple[int, int]]]]:
        return [fan for fan in self.corner_fans()
                if self.patches[fan[0][0]].corners[fan[0][1]].extraordinary]

    def to_json(self) -> str:
        records = []
        for pid in self.ids():
            patch = self.patches[pid]
            records.append({
                "id": pid,
                "P": [[float(x) for x in pt] for pt in patch.P.reshape(16, 3)],
                "corners": [
                    {
                        "code": list(code),
                        "valence": meta.valence,
                        "extraordinary": meta.extraordinary,
                        "frame": {"kind": meta.frame_owner.kind, "id": meta.frame_owner.id}
                        if meta.frame_owner else None,
                        "frame_corner": meta.frame_corner,
                    }
                    for code, meta in sorted(patch.corners.items())
                ],
                "neighbors": [
                    {"boundary": b, "patch": link.patch,
                     "neighbor_boundary": link.boundary, "reversed": link.reversed}
                    for b, link in sorted(patch.neighbors.items())
                ],
            })
        return json.dumps({"patches": records}, indent=1)


def build_patches(mesh: HalfEdgeMesh, frames: FrameSet) -> PatchSet:
    """One patch per mesh corner (half-edge), assembled from the four frames
    of its face, origin vertex, and two incident edges."""
    eff: dict[FrameOwner, np.ndarray] = {}
    cen: dict[FrameOwner, np.ndarray] = {}
    for owner, frame in frames.frames.items():
        corners = frame.effective_corners()
        eff[owner] = corners
        cen[owner] = corners.mean(axis=0)

    def frame_of(kind: str, oid: int):
        owner = FrameOwner(kind, oid)
        if owner not in frames:
            raise AssemblyError(f"missing frame for {owner}")
        return owner, frames[owner]

    patchset = PatchSet()
    he = mesh.half_edges
    for g in sorted(he):
        f = he[g].face
        v = he[g].origin
        p = mesh.prev(g)
        tg = he[g].twin
        ptw = he[p].twin
        ntg = he[tg].next
        ng = he[g].next
        e_in = mesh.edge_key(p)
        e_out = mesh.edge_key(g)

        fo, face_frame = frame_of("face", f)
        vo, vert_frame = frame_of("vertex", v)
        io, in_frame = frame_of("edge", e_in)
        oo, out_frame = frame_of("edge", e_out)

        cf, cv, ci, co = eff[fo], eff[vo], eff[io], eff[oo]
        i_f = face_frame.sector_index(g)
        i_v = vert_frame.sector_index(g)
        i_i = in_frame.sector_index(g)
        i_o = out_frame.sector_index(g)
        K_f = face_frame.K

        P = np.empty((4, 4, 3))
        # face-point block
        P[0, 0] = cen[fo]
        P[0, 1] = (cf[i_f] + cf[(i_f + 1) % K_f]) / 2.0
        P[1, 0] = (cf[i_f] + cf[(i_f - 1) % K_f]) / 2.0
        P[1, 1] = cf[i_f]
        # outgoing-edge block (corner at net (0,3))
        P[0, 3] = cen[oo]
        P[0, 2] = (co[i_o] + co[out_frame.sector_index(ng)]) / 2.0
        P[1, 3] = (co[i_o] + co[out_frame.sector_index(ntg)]) / 2.0
        P[1, 2] = co[i_o]
        # incoming-edge block (corner at net (3,0))
        P[3, 0] = cen[io]
        P[2, 0] = (ci[i_i] + ci[in_frame.sector_index(p)]) / 2.0
        P[3, 1] = (ci[i_i] + ci[in_frame.sector_index(ptw)]) / 2.0
        P[2, 1] = ci[i_i]
        # vertex-point block (corner at net (3,3))
        P[3, 3] = cen[vo]
        P[2, 3] = (cv[i_v] + cv[vert_frame.sector_index(ntg)]) / 2.0
        P[3, 2] = (cv[i_v] + cv[vert_frame.sector_index(ptw)]) / 2.0
        P[2, 2] = cv[i_v]

        def meta(owner, frame, idx):
            k = frame.K
            return CornerMeta(
                valence=k,
                extraordinary=(k != 4),
                frame_owner=owner,
                frame_corner=idx,
                normal=frame.plane_normal() if k != 4 else None,
            )

        patch = BezierPatch(
            id=g,
            P=P,
            corners={
                (0, 0): meta(fo, face_frame, i_f),
                (0, 1): meta(oo, out_frame, i_o),
                (1, 0): meta(io, in_frame, i_i),
                (1, 1): meta(vo, vert_frame, i_v),
            },
            neighbors={
                "v0": NeighborLink(p, "u0"),
                "u0": NeighborLink(ng, "v0"),
                "v1": NeighborLink(ntg, "u1"),
                "u1": NeighborLink(ptw, "v1"),
            },
        )
        patchset.patches[g] = patch
    return patchset


@dataclass
class BoundaryConditionEntry:
    patch: int
    boundary: str
    neighbor: int
    eq1_gap: float


@dataclass
class CornerConditionEntry:
    valence: int
    eq2_residual: float  # max |blue - midpoint(yellows)| / ring radius
    coplanarity_residual: float  # ring distance from the frame plane / ring radius, K != 4


@dataclass
class AssemblyReport:
    boundaries: list[BoundaryConditionEntry] = field(default_factory=list)
    corners: list[CornerConditionEntry] = field(default_factory=list)

    def max_eq1_gap(self) -> float:
        return max((b.eq1_gap for b in self.boundaries), default=0.0)

    def max_eq2_residual(self) -> float:
        return max((c.eq2_residual for c in self.corners), default=0.0)

    def max_coplanarity_residual(self) -> float:
        return max((c.coplanarity_residual for c in self.corners), default=0.0)


def ring_of_fan(patchset: PatchSet, fan) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner point, yellow points, and blue points of a corner fan.

    Blue k is the boundary point between fan members k and k+1.
    """
    origin = patchset[fan[0][0]].corner_point(fan[0][1])
    yellows = np.array([patchset[pid].corner_interior_point(code) for pid, code in fan])
    blues = np.array([
        patchset[pid].corner_boundary_point(code, FAN_CROSSING[code]) for pid, code in fan
    ])
    return origin, yellows, blues


def check_boundary_conditions(patchset: PatchSet) -> AssemblyReport:
    """Verify the shared-boundary identity and the corner midpoint/coplanarity
    conditions the assembly guarantees."""
    report = AssemblyReport()
    for pid, bname, nid, nbname, rev in patchset.shared_boundaries():
        a = boundary_slice(patchset[pid].P, bname)
        b = boundary_slice(patchset[nid].P, nbname)
        if rev:
            b = b[::-1]
        gap = float(np.linalg.norm(a - b, axis=1).max())
        report.boundaries.append(BoundaryConditionEntry(pid, bname, nid, gap))
    for fan in patchset.corner_fans():
        origin, yellows, blues = ring_of_fan(patchset, fan)
        radius = float(np.linalg.norm(yellows - origin, axis=1).mean())
        mid = (yellows + np.roll(yellows, -1, axis=0)) / 2.0
        eq2 = float(np.linalg.norm(blues - mid, axis=1).max() / radius)
        meta = patchset[fan[0][0]].corners[fan[0][1]]
        coplanarity = 0.0
        if meta.extraordinary and meta.normal is not None:
            coplanarity = float(np.abs((yellows - origin) @ meta.normal).max() / radius)
        report.corners.append(CornerConditionEntry(meta.valence, eq2, coplanarity))
    return report

"""Half-edge representation of closed orientable two-manifold polygon meshes.

Provides OBJ I/O, validation, the two topology-editing Euler operators
(insert_edge / delete_edge), and the refinement schemes used by the smoothing
pipeline (vertex insertion and Doo-Sabin), each with a provenance map back to
the elements of the input mesh.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryError,
    CornerError,
    ManifoldError,
    OrientationError,
    TopologyError,
)

# Run the full structural validator after every Euler operator. Cheap at
# editing scale; disabled under `python -O`.
DEBUG_VALIDATE = True


@dataclass
class Vertex:
    id: int
    position: np.ndarray
    half_edge: int = -1  # one outgoing half-edge


@dataclass
class HalfEdge:
    id: int
    origin: int
    twin: int = -1
    next: int = -1
    face: int = -1


@dataclass
class Face:
    id: int
    half_edge: int = -1


@dataclass(frozen=True)
class CornerRef:
    """Addresses the corner of `face` at `vertex`.

    `occurrence` disambiguates vertices that appear more than once on a face
    loop (possible after repeated edits).
    """

    face: int
    vertex: int
    occurrence: int = 0


class HalfEdgeMesh:
    def __init__(self) -> None:
        self.vertices: dict[int, Vertex] = {}
        self.half_edges: dict[int, HalfEdge] = {}
        self.faces: dict[int, Face] = {}
        self._next_vertex_id = 0
        self._next_half_edge_id = 0
        self._next_face_id = 0

    # ------------------------------------------------------------------
    # construction

    def add_vertex(self, position) -> int:
        vid = self._next_vertex_id
        self._next_vertex_id += 1
        self.vertices[vid] = Vertex(vid, np.asarray(position, dtype=float).copy())
        return vid

    def _new_half_edge(self, origin: int) -> HalfEdge:
        hid = self._next_half_edge_id
        self._next_half_edge_id += 1
        he = HalfEdge(hid, origin)
        self.half_edges[hid] = he
        return he

    def _new_face(self) -> Face:
        fid = self._next_face_id
        self._next_face_id += 1
        f = Face(fid)
        self.faces[fid] = f
        return f

    @classmethod
    def from_polygons(cls, positions, face_lists) -> "HalfEdgeMesh":
        """Build a closed mesh from vertex positions and per-face vertex index loops."""
        mesh = cls()
        for p in positions:
            mesh.add_vertex(p)
        directed: dict[tuple[int, int], int] = {}
        undirected_count: dict[tuple[int, int], int] = {}
        for loop in face_lists:
            if len(loop) < 3:
                raise ManifoldError(f"face with {len(loop)} sides")
            face = mesh._new_face()
            hes = [mesh._new_half_edge(v) for v in loop]
            n = len(hes)
            for k, he in enumerate(hes):
                he.next = hes[(k + 1) % n].id
                he.face = face.id
                mesh.vertices[he.origin].half_edge = he.id
            face.half_edge = hes[0].id
            for k, he in enumerate(hes):
                a, b = loop[k], loop[(k + 1) % n]
                if a == b:
                    raise ManifoldError(f"self-loop edge at vertex {a}")
                key = (min(a, b), max(a, b))
                undirected_count[key] = undirected_count.get(key, 0) + 1
                if undirected_count[key] > 2:
                    raise ManifoldError(f"edge {key} has more than two incident faces")
                if (a, b) in directed:
                    if undirected_count[key] <= 2:
                        raise OrientationError(f"edge {a}->{b} traversed twice in the same direction")
                directed[(a, b)] = he.id
        for (a, b), hid in directed.items():
            rev = directed.get((b, a))
            if rev is None:
                raise BoundaryError(f"edge ({a},{b}) has a single incident face")
            mesh.half_edges[hid].twin = rev
        mesh.validate()
        return mesh

    def snapshot(self) -> "HalfEdgeMesh":
        """Value-semantics copy safe to read while the original is edited."""
        return copy.deepcopy(self)

    # ------------------------------------------------------------------
    # queries

    def prev(self, hid: int) -> int:
        h = hid
        while self.half_edges[h].next != hid:
            h = self.half_edges[h].next
        return h

    def head(self, hid: int) -> int:
        return self.half_edges[self.half_edges[hid].next].origin

    def face_loop(self, fid: int) -> list[int]:
        start = self.faces[fid].half_edge
        loop = [start]
        h = self.half_edges[start].next
        while h != start:
            loop.append(h)
            h = self.half_edges[h].next
            if len(loop) > len(self.half_edges):
                raise TopologyError(f"face {fid} loop does not close")
        return loop

    def face_vertices(self, fid: int) -> list[int]:
        return [self.half_edges[h].origin for h in self.face_loop(fid)]

    def face_sides(self, fid: int) -> int:
        return len(self.face_loop(fid))

    def vertex_outgoing(self, vid: int) -> list[int]:
        """Outgoing half-edges around a vertex, in fan rotation order."""
        start = self.vertices[vid].half_edge
        out = [start]
        h = self.half_edges[self.prev(start)].twin
        while h != start:
            out.append(h)
            h = self.half_edges[self.prev(h)].twin
            if len(out) > len(self.half_edges):
                raise ManifoldError(f"vertex {vid} fan does not close")
        return out

    def vertex_valence(self, vid: int) -> int:
        return len(self.vertex_outgoing(vid))

    def edge_key(self, hid: int) -> int:
        """Canonical edge id: the smaller half-edge id of the twin pair."""
        return min(hid, self.half_edges[hid].twin)

    def edge_ids(self) -> list[int]:
        return sorted(h.id for h in self.half_edges.values() if h.id < h.twin)

    def edge_endpoints(self, eid: int) -> tuple[int, int]:
        h = self.half_edges[eid]
        return h.origin, self.head(eid)

    def edge_midpoint(self, eid: int) -> np.ndarray:
        a, b = self.edge_endpoints(eid)
        return (self.vertices[a].position + self.vertices[b].position) / 2.0

    def face_centroid(self, fid: int) -> np.ndarray:
        verts = self.face_vertices(fid)
        return sum(self.vertices[v].position for v in verts) / float(len(verts))

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.half_edges) // 2

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.face_count

    def components(self) -> list[set[int]]:
        """Connected components as sets of face ids."""
        seen: set[int] = set()
        comps = []
        for fid in sorted(self.faces):
            if fid in seen:
                continue
            comp = {fid}
            stack = [fid]
            seen.add(fid)
            while stack:
                f = stack.pop()
                for h in self.face_loop(f):
                    nf = self.half_edges[self.half_edges[h].twin].face
                    if nf not in seen:
                        seen.add(nf)
                        comp.add(nf)
                        stack.append(nf)
            comps.append(comp)
        return comps

    def genus_per_component(self) -> list[int]:
        out = []
        for comp in self.components():
            verts = set()
            hes = 0
            for fid in comp:
                loop = self.face_loop(fid)
                hes += len(loop)
                verts.update(self.half_edges[h].origin for h in loop)
            chi = len(verts) - hes // 2 + len(comp)
            if chi % 2 != 0:
                raise TopologyError(f"component has odd Euler characteristic {chi}")
            out.append((2 - chi) // 2)
        return out

    def genus(self) -> int:
        return sum(self.genus_per_component())

    def bounding_box_diagonal(self) -> float:
        pts = np.array([v.position for v in self.vertices.values()])
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    # ------------------------------------------------------------------
    # validation

    def validate(self) -> None:
        """Check the closed two-manifold invariants; raise on the first violation."""
        for he in self.half_edges.values():
            if he.twin not in self.half_edges:
                raise BoundaryError(f"half-edge {he.id} has no twin")
            twin = self.half_edges[he.twin]
            if twin.twin != he.id or twin.id == he.id:
                raise ManifoldError(f"twin involution broken at half-edge {he.id}")
            if twin.origin != self.head(he.id) or he.origin != self.head(twin.id):
                raise OrientationError(f"twins of half-edge {he.id} do not oppose")
        seen: set[int] = set()
        for fid in self.faces:
            loop = self.face_loop(fid)
            if len(loop) < 3:
                raise TopologyError(f"face {fid} has {len(loop)} sides")
            for h in loop:
                if h in seen:
                    raise ManifoldError(f"half-edge {h} on two face loops")
                seen.add(h)
                if self.half_edges[h].face != fid:
                    raise ManifoldError(f"half-edge {h} face pointer mismatch")
        if seen != set(self.half_edges):
            raise ManifoldError("face loops do not partition the half-edges")
        for vid in self.vertices:
            fan = set(self.vertex_outgoing(vid))
            all_out = {h.id for h in self.half_edges.values() if h.origin == vid}
            if fan != all_out:
                raise ManifoldError(f"vertex {vid} has a split fan")
        for comp in self.components():
            pass  # genus_per_component re-checks evenness
        self.genus_per_component()

    def _debug_validate(self) -> None:
        if __debug__ and DEBUG_VALIDATE:
            self.validate()

    # ------------------------------------------------------------------
    # Euler operators

    def resolve_corner(self, corner: CornerRef) -> int:
        """Return the half-edge whose origin is the corner's vertex on its face."""
        if corner.face not in self.faces:
            raise CornerError(f"no face {corner.face}")
        if corner.vertex not in self.vertices:
            raise CornerError(f"no vertex {corner.vertex}")
        hits = [h for h in self.face_loop(corner.face) if self.half_edges[h].origin == corner.vertex]
        if not hits:
            raise CornerError(f"vertex {corner.vertex} not on face {corner.face}")
        if corner.occurrence >= len(hits):
            raise CornerError(f"occurrence {corner.occurrence} out of range for corner")
        return hits[corner.occurrence]

    def insert_edge(self, c1: CornerRef, c2: CornerRef) -> int:
        """Insert an edge between two corners.

        Same face: splits it in two. Distinct faces: merges them into one,
        adding a handle (or joining components). Returns the new edge id.
        """
        h1 = self.resolve_corner(c1)
        h2 = self.resolve_corner(c2)
        if h1 == h2:
            raise CornerError("corners are identical")
        v1 = self.half_edges[h1].origin
        v2 = self.half_edges[h2].origin
        if v1 == v2:
            raise CornerError("corners share a vertex; self-loop edges are not supported")
        f1 = self.half_edges[h1].face
        f2 = self.half_edges[h2].face
        if f1 == f2 and (self.half_edges[h1].next == h2 or self.half_edges[h2].next == h1):
            raise CornerError("corners are adjacent on the face loop; a two-sided face would result")
        p1 = self.prev(h1)
        p2 = self.prev(h2)
        a = self._new_half_edge(v1)  # v1 -> v2
        b = self._new_half_edge(v2)  # v2 -> v1
        a.twin, b.twin = b.id, a.id
        a.next = h2
        b.next = h1
        self.half_edges[p1].next = a.id
        self.half_edges[p2].next = b.id
        if f1 == f2:
            face_a = self.faces[f1]
            face_a.half_edge = a.id
            face_b = self._new_face()
            face_b.half_edge = b.id
            for fid, start in ((f1, a.id), (face_b.id, b.id)):
                h = start
                while True:
                    self.half_edges[h].face = fid
                    h = self.half_edges[h].next
                    if h == start:
                        break
        else:
            self.faces[f1].half_edge = a.id
            del self.faces[f2]
            h = a.id
            while True:
                self.half_edges[h].face = f1
                h = self.half_edges[h].next
                if h == a.id:
                    break
        self._debug_validate()
        return min(a.id, b.id)

    def delete_edge(self, eid: int) -> None:
        """Remove an edge, merging the two incident faces (or splitting one).

        Exact inverse of insert_edge. Raises TopologyError when removal would
        leave a dangling vertex or a face with fewer than three sides.
        """
        if eid not in self.half_edges:
            raise TopologyError(f"no edge {eid}")
        h = self.half_edges[eid]
        t = self.half_edges[h.twin]
        if self.vertex_valence(h.origin) < 3 or self.vertex_valence(t.origin) < 3:
            raise TopologyError("deletion would isolate a vertex")
        ph, pt = self.prev(h.id), self.prev(t.id)
        if h.face != t.face:
            # merge two faces into one
            keep, drop = h.face, t.face
            if self.face_sides(keep) + self.face_sides(drop) - 2 < 3:
                raise TopologyError("merged face would have fewer than three sides")
            self.half_edges[ph].next = t.next
            self.half_edges[pt].next = h.next
            self.faces[keep].half_edge = h.next
            del self.faces[drop]
            start = h.next
            cur = start
            while True:
                self.half_edges[cur].face = keep
                cur = self.half_edges[cur].next
                if cur == start:
                    break
        else:
            # the edge appears twice on one loop: split the face
            if h.next == t.id or t.next == h.id:
                raise TopologyError("degenerate split; edge sides are consecutive")
            self.half_edges[ph].next = t.next
            self.half_edges[pt].next = h.next
            f_old = self.faces[h.face]
            f_old.half_edge = t.next
            f_new = self._new_face()
            f_new.half_edge = h.next
            for fid, start in ((f_old.id, t.next), (f_new.id, h.next)):
                cur = start
                count = 0
                while True:
                    self.half_edges[cur].face = fid
                    cur = self.half_edges[cur].next
                    count += 1
                    if cur == start:
                        break
                if count < 3:
                    raise TopologyError("split would create a face with fewer than three sides")
        for vid in (h.origin, t.origin):
            v = self.vertices[vid]
            if v.half_edge in (h.id, t.id):
                candidates = [x.id for x in self.half_edges.values()
                              if x.origin == vid and x.id not in (h.id, t.id)]
                v.half_edge = candidates[0]
        del self.half_edges[h.id]
        del self.half_edges[t.id]
        self._debug_validate()

    def move_vertex(self, vid: int, position) -> None:
        self.vertices[vid].position = np.asarray(position, dtype=float).copy()


# ----------------------------------------------------------------------
# OBJ I/O


def load_obj(data) -> HalfEdgeMesh:
    """Parse OBJ text (bytes or str) into a validated mesh.

    Only `v` and `f` records are used; normals and texture coordinates are
    ignored. Faces must be consistently wound and the surface closed.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    positions = []
    face_lists = []
    for raw in data.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            positions.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                s = tok.split("/")[0]
                i = int(s)
                idx.append(i - 1 if i > 0 else len(positions) + i)
            face_lists.append(idx)
    return HalfEdgeMesh.from_polygons(positions, face_lists)


def save_obj(mesh: HalfEdgeMesh) -> bytes:
    """Serialize to OBJ with positions at nine significant digits."""
    vid_order = sorted(mesh.vertices)
    index = {vid: k + 1 for k, vid in enumerate(vid_order)}
    lines = []
    for vid in vid_order:
        x, y, z = mesh.vertices[vid].position
        lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
    for fid in sorted(mesh.faces):
        lines.append("f " + " ".join(str(index[v]) for v in mesh.face_vertices(fid)))
    return ("\n".join(lines) + "\n").encode("utf-8")


def validation_code(mesh_or_error) -> int:
    """Exit code for CLI use: 0 valid, 2 non-manifold, 3 non-orientable, 4 open boundary."""
    if isinstance(mesh_or_error, HalfEdgeMesh):
        try:
            mesh_or_error.validate()
            return 0
        except (ManifoldError, OrientationError, BoundaryError) as err:
            mesh_or_error = err
        except TopologyError:
            return 2
    if isinstance(mesh_or_error, ManifoldError):
        return 2
    if isinstance(mesh_or_error, OrientationError):
        return 3
    if isinstance(mesh_or_error, BoundaryError):
        return 4
    return 2


# ----------------------------------------------------------------------
# refinement schemes


@dataclass
class VertexInsertionMap:
    """Provenance of the all-quad remesh.

    quad_for_corner: original corner half-edge id -> new quad face id.
    vertex_source:   new vertex id -> ('face'|'edge'|'vertex', original id).
    """

    quad_for_corner: dict[int, int] = field(default_factory=dict)
    vertex_source: dict[int, tuple[str, int]] = field(default_factory=dict)


def vertex_insertion_remesh(mesh: HalfEdgeMesh) -> tuple[HalfEdgeMesh, VertexInsertionMap]:
    """All-quad remesh: one quad per face corner, with face/edge/vertex points.

    New positions are placeholders (centroids and midpoints); the patch
    assembly derives the actual geometry from polygon frames.
    """
    out = HalfEdgeMesh()
    prov = VertexInsertionMap()
    face_pt: dict[int, int] = {}
    edge_pt: dict[int, int] = {}
    vert_pt: dict[int, int] = {}
    for vid in sorted(mesh.vertices):
        nv = out.add_vertex(mesh.vertices[vid].position)
        vert_pt[vid] = nv
        prov.vertex_source[nv] = ("vertex", vid)
    for eid in mesh.edge_ids():
        nv = out.add_vertex(mesh.edge_midpoint(eid))
        edge_pt[eid] = nv
        prov.vertex_source[nv] = ("edge", eid)
    for fid in sorted(mesh.faces):
        nv = out.add_vertex(mesh.face_centroid(fid))
        face_pt[fid] = nv
        prov.vertex_source[nv] = ("face", fid)
    quads = []
    corner_ids = []
    for fid in sorted(mesh.faces):
        for g in mesh.face_loop(fid):
            e_in = mesh.edge_key(mesh.prev(g))
            e_out = mesh.edge_key(g)
            v = mesh.half_edges[g].origin
            quads.append([face_pt[fid], edge_pt[e_in], vert_pt[v], edge_pt[e_out]])
            corner_ids.append(g)
    positions = [out.vertices[v].position for v in sorted(out.vertices)]
    built = HalfEdgeMesh.from_polygons(positions, quads)
    for g, fid in zip(corner_ids, sorted(built.faces)):
        prov.quad_for_corner[g] = fid
    return built, prov


@dataclass
class DooSabinMap:
    """Provenance of one Doo-Sabin refinement.

    face_source:   new face id -> ('face'|'vertex'|'edge', original id).
    corner_keys:   new face id -> original corner half-edge id per corner,
                   aligned with the new face's vertex loop.
    """

    face_source: dict[int, tuple[str, int]] = field(default_factory=dict)
    corner_keys: dict[int, list[int]] = field(default_factory=dict)


def doo_sabin_refine(mesh: HalfEdgeMesh) -> tuple[HalfEdgeMesh, DooSabinMap]:
    """One Doo-Sabin step: an n-gon per n-sided face, an m-gon per m-valent
    vertex, and a quad per edge.

    Each new vertex belongs to one original corner (f, v) and sits at the
    average of the vertex, the two incident edge midpoints, and the face
    centroid.
    """
    for vid in sorted(mesh.vertices):
        if mesh.vertex_valence(vid) < 3:
            raise TopologyError(
                f"vertex {vid} has valence {mesh.vertex_valence(vid)}; "
                "refinement needs valences of at least three")
    corner_pos: dict[int, np.ndarray] = {}
    for fid in sorted(mesh.faces):
        centroid = mesh.face_centroid(fid)
        for g in mesh.face_loop(fid):
            v = mesh.half_edges[g].origin
            m_in = mesh.edge_midpoint(mesh.edge_key(mesh.prev(g)))
            m_out = mesh.edge_midpoint(mesh.edge_key(g))
            corner_pos[g] = (mesh.vertices[v].position + m_in + m_out + centroid) / 4.0

    corner_vertex = {g: k for k, g in enumerate(sorted(corner_pos))}
    positions = [corner_pos[g] for g in sorted(corner_pos)]
    face_lists: list[list[int]] = []
    sources: list[tuple[str, int]] = []
    keys: list[list[int]] = []

    for fid in sorted(mesh.faces):
        loop = mesh.face_loop(fid)
        face_lists.append([corner_vertex[g] for g in loop])
        sources.append(("face", fid))
        keys.append(list(loop))
    for vid in sorted(mesh.vertices):
        fan = mesh.vertex_outgoing(vid)
        face_lists.append([corner_vertex[g] for g in fan])
        sources.append(("vertex", vid))
        keys.append(list(fan))
    for eid in mesh.edge_ids():
        h = eid
        t = mesh.half_edges[h].twin
        loop = [mesh.half_edges[h].next, h, mesh.half_edges[t].next, t]
        face_lists.append([corner_vertex[g] for g in loop])
        sources.append(("edge", eid))
        keys.append(list(loop))

    built = HalfEdgeMesh.from_polygons(positions, face_lists)
    prov = DooSabinMap()
    for fid, src, key in zip(sorted(built.faces), sources, keys):
        prov.face_source[fid] = src
        prov.corner_keys[fid] = key
    return built, prov


def dual_mesh(mesh: HalfEdgeMesh) -> HalfEdgeMesh:
    """Dual polyhedron: one vertex per face (at its centroid), one face per vertex."""
    face_vertex = {fid: k for k, fid in enumerate(sorted(mesh.faces))}
    positions = [mesh.face_centroid(fid) for fid in sorted(mesh.faces)]
    face_lists = []
    for vid in sorted(mesh.vertices):
        fan = mesh.vertex_outgoing(vid)
        face_lists.append([face_vertex[mesh.half_edges[g].face] for g in fan])
    return HalfEdgeMesh.from_polygons(positions, face_lists)


# ----------------------------------------------------------------------
# combinatorial isomorphism


def canonical_signature(mesh: HalfEdgeMesh) -> tuple:
    """Orientation-preserving combinatorial signature, independent of labels.

    Two meshes are combinatorially isomorphic iff their signatures are equal.
    """
    hids = sorted(mesh.half_edges)
    best = None
    for start in hids:
        order: dict[int, int] = {start: 0}
        queue = [start]
        sig = []
        k = 0
        while k < len(queue):
            h = queue[k]
            k += 1
            for nb in (mesh.half_edges[h].next, mesh.half_edges[h].twin):
                if nb not in order:
                    order[nb] = len(order)
                    queue.append(nb)
            sig.append((order[mesh.half_edges[h].next], order[mesh.half_edges[h].twin]))
        tup = tuple(sig)
        if best is None or tup < best:
            best = tup
    return best if best is not None else tuple()

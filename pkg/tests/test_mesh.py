import numpy as np
import pytest

from patchsmith import corpus
from patchsmith.errors import (
    BoundaryError,
    CornerError,
    ManifoldError,
    OrientationError,
    TopologyError,
)
from patchsmith.mesh import (
    CornerRef,
    HalfEdgeMesh,
    canonical_signature,
    doo_sabin_refine,
    dual_mesh,
    load_obj,
    save_obj,
    validation_code,
    vertex_insertion_remesh,
)

CUBE_OBJ = b"""
v -1 -1 -1
v 1 -1 -1
v 1 1 -1
v -1 1 -1
v -1 -1 1
v 1 -1 1
v 1 1 1
v -1 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
"""

TETRA_OBJ = b"""
v 1 1 1
v 1 -1 -1
v -1 1 -1
v -1 -1 1
f 1 2 3
f 1 4 2
f 1 3 4
f 2 4 3
"""


def euler_counts(mesh):
    return mesh.vertex_count, mesh.edge_count, mesh.face_count, mesh.euler_characteristic()


class TestLoadObj:
    def test_cube_counts(self):
        mesh = load_obj(CUBE_OBJ)
        assert euler_counts(mesh) == (8, 12, 6, 2)

    def test_tetrahedron_counts(self):
        mesh = load_obj(TETRA_OBJ)
        assert euler_counts(mesh) == (4, 6, 4, 2)

    def test_same_winding_is_rejected(self):
        bad = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 1 2 4\n"
        with pytest.raises(OrientationError):
            load_obj(bad)

    def test_open_boundary_is_rejected(self):
        bad = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"
        with pytest.raises(BoundaryError):
            load_obj(bad)

    def test_nonmanifold_edge_is_rejected(self):
        # three triangles hanging off one shared edge
        bad = (b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 1 1 1\n"
               b"f 1 2 3\nf 2 1 4\nf 1 2 5\n")
        with pytest.raises(ManifoldError):
            load_obj(bad)

    def test_face_index_fields_are_tolerated(self):
        data = CUBE_OBJ.replace(b"f 1 4 3 2", b"f 1/1 4/4 3/3 2/2")
        mesh = load_obj(data)
        assert mesh.face_count == 6


class TestSaveObj:
    def test_cube_line_counts(self):
        out = save_obj(corpus.cube()).decode()
        lines = out.strip().splitlines()
        assert sum(1 for l in lines if l.startswith("v ")) == 8
        assert sum(1 for l in lines if l.startswith("f ")) == 6

    def test_round_trip_tetrahedron_identity(self):
        mesh = corpus.tetrahedron()
        back = load_obj(save_obj(mesh))
        assert [back.face_vertices(f) for f in sorted(back.faces)] == \
            [mesh.face_vertices(f) for f in sorted(mesh.faces)]
        for vid in mesh.vertices:
            assert np.allclose(back.vertices[vid].position, mesh.vertices[vid].position,
                               rtol=1e-9, atol=0)

    def test_round_trip_after_insert_edge(self):
        mesh, _ = corpus.cube_with_edge()
        back = load_obj(save_obj(mesh))
        assert back.face_count == 5
        assert canonical_signature(back) == canonical_signature(mesh)


class TestInsertEdge:
    def test_cube_opposite_faces_opens_handle(self):
        mesh = corpus.cube()
        mesh.insert_edge(CornerRef(face=1, vertex=6), CornerRef(face=0, vertex=0))
        assert euler_counts(mesh) == (8, 13, 5, 0)
        assert mesh.genus() == 1
        assert sorted(mesh.face_sides(f) for f in mesh.faces) == [4, 4, 4, 4, 10]

    def test_same_face_split(self):
        mesh = corpus.cube()
        chi = mesh.euler_characteristic()
        mesh.insert_edge(CornerRef(face=1, vertex=4), CornerRef(face=1, vertex=6))
        assert mesh.euler_characteristic() == chi
        assert mesh.face_count == 7
        assert sorted(mesh.face_sides(f) for f in mesh.faces)[:2] == [3, 3]

    def test_two_cubes_bridge(self):
        mesh, _ = corpus.two_cubes_bridge()
        assert len(mesh.components()) == 1
        assert mesh.euler_characteristic() == 2
        assert mesh.genus() == 0

    def test_invalid_corner(self):
        mesh = corpus.cube()
        with pytest.raises(CornerError):
            mesh.insert_edge(CornerRef(face=0, vertex=6), CornerRef(face=1, vertex=6))

    def test_adjacent_corners_rejected(self):
        mesh = corpus.cube()
        with pytest.raises(CornerError):
            mesh.insert_edge(CornerRef(face=1, vertex=4), CornerRef(face=1, vertex=5))


class TestDeleteEdge:
    def test_delete_restores_cube(self):
        mesh = corpus.cube()
        reference = canonical_signature(mesh)
        eid = mesh.insert_edge(CornerRef(face=1, vertex=6), CornerRef(face=0, vertex=0))
        mesh.delete_edge(eid)
        assert euler_counts(mesh) == (8, 12, 6, 2)
        assert canonical_signature(mesh) == reference

    def test_delete_tetrahedron_edge_merges_triangles(self):
        mesh = corpus.tetrahedron()
        eid = mesh.edge_ids()[0]
        mesh.delete_edge(eid)
        assert euler_counts(mesh) == (4, 5, 3, 2)
        assert sorted(mesh.face_sides(f) for f in mesh.faces) == [3, 3, 4]

    def test_isolating_deletion_rejected(self):
        # deleting two tetrahedron edges at one vertex would leave valence one
        mesh = corpus.tetrahedron()
        first = [e for e in mesh.edge_ids() if 0 in mesh.edge_endpoints(e)]
        mesh.delete_edge(first[0])
        remaining = [e for e in mesh.edge_ids() if 0 in mesh.edge_endpoints(e)]
        with pytest.raises(TopologyError):
            for e in remaining:
                mesh.delete_edge(e)


class TestVertexInsertion:
    def test_cube(self):
        refined, prov = vertex_insertion_remesh(corpus.cube())
        assert refined.vertex_count == 8 + 12 + 6
        assert refined.face_count == 24
        assert all(refined.face_sides(f) == 4 for f in refined.faces)
        kinds = [prov.vertex_source[v][0] for v in sorted(refined.vertices)]
        assert kinds.count("vertex") == 8 and kinds.count("edge") == 12 and kinds.count("face") == 6

    def test_tetrahedron(self):
        refined, _ = vertex_insertion_remesh(corpus.tetrahedron())
        assert refined.vertex_count == 14
        assert refined.face_count == 12

    def test_torus_valence_census(self):
        refined, _ = vertex_insertion_remesh(corpus.torus_grid())
        assert sorted({refined.vertex_valence(v) for v in refined.vertices}) == [4]

    def test_offquad_inputs_map_to_extraordinary_outputs(self):
        mesh = corpus.tetrahedron()
        refined, prov = vertex_insertion_remesh(mesh)
        for vid in refined.vertices:
            if refined.vertex_valence(vid) != 4:
                kind, src = prov.vertex_source[vid]
                if kind == "face":
                    assert mesh.face_sides(src) != 4
                elif kind == "vertex":
                    assert mesh.vertex_valence(src) != 4
                else:
                    pytest.fail("edge points must be 4-valent")


class TestDooSabin:
    def test_cube_face_census(self):
        refined, prov = doo_sabin_refine(corpus.cube())
        assert refined.face_count == 6 + 8 + 12
        sides = sorted(refined.face_sides(f) for f in refined.faces)
        assert sides.count(3) == 8 and sides.count(4) == 18

    def test_tetrahedron_face_census(self):
        refined, _ = doo_sabin_refine(corpus.tetrahedron())
        assert refined.face_count == 4 + 4 + 6

    def test_cube_face_face_is_shrunk_concentric_square(self):
        mesh = corpus.cube()
        refined, prov = doo_sabin_refine(mesh)
        for fid, (kind, src) in prov.face_source.items():
            if kind != "face":
                continue
            old = np.array([mesh.vertices[v].position for v in mesh.face_vertices(src)])
            new = np.array([refined.vertices[v].position for v in refined.face_vertices(fid)])
            assert np.allclose(new.mean(axis=0), old.mean(axis=0), atol=1e-12)
            # quadrant average halves the in-plane extent of a unit square face
            assert np.allclose(new - new.mean(axis=0), (old - old.mean(axis=0)) / 2.0, atol=1e-12)


class TestDual:
    def test_cube_dual_is_octahedron(self):
        d = dual_mesh(corpus.cube())
        assert (d.vertex_count, d.face_count) == (6, 8)
        assert all(d.face_sides(f) == 3 for f in d.faces)

    def test_tetra_self_dual(self):
        t = corpus.tetrahedron()
        assert canonical_signature(dual_mesh(t)) == canonical_signature(t)

    def test_dual_involution_on_cube(self):
        c = corpus.cube()
        assert canonical_signature(dual_mesh(dual_mesh(c))) == canonical_signature(c)


class TestValidationCode:
    def test_codes(self):
        assert validation_code(corpus.cube()) == 0
        assert validation_code(ManifoldError("x")) == 2
        assert validation_code(OrientationError("x")) == 3
        assert validation_code(BoundaryError("x")) == 4


def test_euler_updates_are_exact_over_random_edit_sequences():
    rng = np.random.default_rng(7)
    mesh = corpus.cube()
    inserted = []
    for _ in range(40):
        v, e, f, chi = euler_counts(mesh)
        faces = sorted(mesh.faces)
        do_insert = len(faces) >= 2 and (not inserted or rng.random() < 0.6)
        if do_insert:
            f1, f2 = rng.choice(faces, size=2, replace=False)
            verts1 = mesh.face_vertices(f1)
            verts2 = mesh.face_vertices(f2)
            pairs = [(a, b) for a in verts1 for b in verts2 if a != b]
            rng.shuffle(pairs)
            for a, b in pairs:
                try:
                    eid = mesh.insert_edge(CornerRef(face=f1, vertex=a), CornerRef(face=f2, vertex=b))
                except CornerError:
                    continue
                inserted.append(eid)
                assert mesh.edge_count == e + 1
                assert mesh.face_count == f - 1
                assert mesh.euler_characteristic() == chi - 2
                break
        else:
            eid = inserted.pop()
            mesh.delete_edge(eid)
            assert mesh.edge_count == e - 1
            assert mesh.face_count == f + 1
            assert mesh.euler_characteristic() == chi + 2
        assert all(g >= 0 for g in mesh.genus_per_component())

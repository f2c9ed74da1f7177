"""Acceptance suite: one test per shipping criterion, each at its stated
tolerance, printing one PASS/FAIL line (run with `pytest -v -s` to see them
inline)."""

import asyncio
import json
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from patchsmith import corpus
from patchsmith.analysis import (
    compare_modes,
    child_c2_defect,
    patchset_fan,
    ring_defects,
    subdivide_fan,
    synthetic_ring_fan,
)
from patchsmith.errors import ConflictError
from patchsmith.frames import assign_frames
from patchsmith.kernels import (
    _standard_exact,
    derive_modified_kernels,
    modified_kernels,
    modified_kernels_exact,
    standard_kernels,
    subdivide,
    subdivide_net,
    unadjusted_modified_kernels,
)
from patchsmith.patches import BezierPatch, CornerMeta, build_patches
from patchsmith.pipeline import PipelineConfig
from patchsmith.session import Session
from patchsmith.tessellate import bernstein3, tessellate


@contextmanager
def report(number, description):
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {number}: FAIL - {description}")
        raise
    print(f"ACCEPTANCE {number}: PASS - {description}")


def tensor_eval(P, u, v):
    return np.einsum("i,ijc,j->c", bernstein3(u), P, bernstein3(v))


def make_patch(P, valences=(4, 4, 4, 4)):
    corners = {code: CornerMeta(valence=k, extraordinary=(k != 4))
               for code, k in zip(((0, 0), (0, 1), (1, 0), (1, 1)), valences)}
    return BezierPatch(id=0, P=np.asarray(P, dtype=float), corners=corners)


CORPUS = corpus.standard_corpus()


def assembled(name):
    mesh = CORPUS[name]
    return mesh, build_patches(mesh, assign_frames(mesh))


def test_criterion_01_standard_kernel_exactness():
    with report(1, "standard child reproduces the parent polynomial (100 patches, <1 s)"):
        rng = np.random.default_rng(2024)
        table = standard_kernels()
        grid = np.linspace(0.0, 1.0, 9)
        started = time.perf_counter()
        worst = 0.0
        for _ in range(100):
            P = rng.normal(size=(4, 4, 3))
            child = subdivide_net(P, table)[(0, 0)]
            for u in grid:
                for v in grid:
                    got = tensor_eval(child, u, v)
                    want = tensor_eval(P, u / 2.0, v / 2.0)
                    worst = max(worst, float(np.linalg.norm(got - want)))
        elapsed = time.perf_counter() - started
        assert worst <= 1e-12, f"max deviation {worst}"
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_02_boundary_preservation():
    with report(2, "modified children keep the parent's outer boundary curves (100 patches)"):
        rng = np.random.default_rng(7)
        std, mod = standard_kernels(), modified_kernels()
        ts = np.linspace(0.0, 1.0, 9)
        worst = 0.0
        for _ in range(100):
            P = rng.normal(size=(4, 4, 3))
            a = subdivide_net(P, std)
            b = subdivide_net(P, mod)
            for (qu, qv) in ((0, 0), (0, 1), (1, 0), (1, 1)):
                outer_rows = [a[(qu, qv)][0 if qu == 0 else 3, :],
                              a[(qu, qv)][:, 0 if qv == 0 else 3]]
                outer_rows_b = [b[(qu, qv)][0 if qu == 0 else 3, :],
                                b[(qu, qv)][:, 0 if qv == 0 else 3]]
            for ra, rb in zip(outer_rows, outer_rows_b):
                for t in ts:
                    pa = np.einsum("i,ic->c", bernstein3(t), ra)
                    pb = np.einsum("i,ic->c", bernstein3(t), rb)
                    worst = max(worst, float(np.linalg.norm(pa - pb)))
        assert worst <= 1e-12, f"max boundary deviation {worst}"


def ring_closed_form_standard_depth1(K):
    ks = np.arange(K)
    V = np.stack([np.cos(2 * np.pi * ks / K), np.sin(2 * np.pi * ks / K), np.zeros(K)], axis=1)
    B = (V + np.roll(V, -1, axis=0)) / 2.0
    Y1 = V / 2.0 + (np.roll(V, 1, axis=0) + np.roll(V, -1, axis=0)) / 8.0
    B1 = B / 2.0
    defect = np.linalg.norm(B1 - (Y1 + np.roll(Y1, -1, axis=0)) / 2.0, axis=1).max()
    return float(defect / np.linalg.norm(Y1, axis=1).mean())


def test_criterion_03_unbroken_line_property():
    with report(3, "modified rings stay unbroken to depth 5; standard depth-1 defect "
                   "matches the displacement formula"):
        for K in (3, 5, 6, 8, 10):
            fan = synthetic_ring_fan(K)
            for depth in range(1, 6):
                d = ring_defects(subdivide_fan(fan, modified_kernels(), depth))
                assert d.unbroken_defect <= 1e-12, (K, depth, d.unbroken_defect)
            got = ring_defects(subdivide_fan(fan, standard_kernels(), 1)).unbroken_defect
            expected = ring_closed_form_standard_depth1(K)
            assert abs(got - expected) <= 1e-12, (K, got, expected)
            if K == 3:
                assert got > 1e-3


def test_criterion_04_planarity_preservation():
    with report(4, "ring planarity residual never grows under modified subdivision"):
        cases = []
        for K in (3, 5, 6, 8, 10):
            cases.append(synthetic_ring_fan(K))
        lifted = np.zeros((5, 3))
        lifted[:, 2] = np.array([0.2, -0.1, 0.15, -0.05, 0.1])
        cases.append(synthetic_ring_fan(5, offsets=lifted))
        for name in CORPUS:
            _, ps = assembled(name)
            for fan_ids in ps.extraordinary_corners():
                cases.append(patchset_fan(ps, fan_ids))
        for fan in cases:
            before = ring_defects(fan).planarity_residual
            for depth in range(1, 6):
                after = ring_defects(subdivide_fan(fan, modified_kernels(), depth))
                assert after.planarity_residual <= before + 1e-14, \
                    (len(fan), depth, before, after.planarity_residual)


def test_criterion_05_g1_at_extraordinary_vertices():
    with report(5, "tangent planes agree to 1e-9 rad at every extraordinary corner, "
                   "assembly and depths 1-4"):
        for name in CORPUS:
            _, ps = assembled(name)
            for fan_ids in ps.extraordinary_corners():
                fan = patchset_fan(ps, fan_ids)
                assert ring_defects(fan).normal_spread <= 1e-9, (name, "assembly")
                for table in (modified_kernels(), standard_kernels()):
                    cur = fan
                    for depth in range(1, 5):
                        cur = subdivide_fan(cur, table, 1)
                        spread = ring_defects(cur).normal_spread
                        assert spread <= 1e-9, (name, table.name, depth, spread)


def test_criterion_06_c1_decay_along_ev_edges():
    with report(6, "modified-mode C1 defect decays monotonically below 1e-3 by depth 5; "
                   "standard mode stays 10x higher"):
        for name in CORPUS:
            _, ps = assembled(name)
            cmp = compare_modes(ps, depths=range(1, 6))
            mod = [cmp.c1("modified", d) for d in range(1, 6)]
            std = [cmp.c1("standard", d) for d in range(1, 6)]
            for a, b in zip(mod, mod[1:]):
                assert b <= a + 1e-12, (name, mod)
            assert mod[-1] < 1e-3, (name, mod)
            has_evs = any(ps[p].is_extraordinary() for p in ps.ids())
            if has_evs:
                for d in range(5):
                    assert std[d] >= 10.0 * mod[-1], (name, d + 1, std[d], mod[-1])
            else:
                assert all(x <= 1e-12 for x in std + mod), (name, std, mod)


def test_criterion_07_internal_c2():
    with report(7, "children of the derived table meet with C2; without the interior "
                   "readjustment they do not"):
        rng = np.random.default_rng(99)
        derived = derive_modified_kernels()
        control = unadjusted_modified_kernels()
        over = 0
        for _ in range(100):
            patch = make_patch(rng.normal(size=(4, 4, 3)))
            assert child_c2_defect(subdivide(patch, derived)) <= 1e-9
            if child_c2_defect(subdivide(patch, control)) > 1e-6:
                over += 1
        assert over >= 95, f"negative control exceeded 1e-6 on only {over} of 100"


def test_criterion_08_kernel_derivation_consistency():
    with report(8, "derived kernels equal the frozen table mask-for-mask as exact "
                   "rationals; boundary masks equal standard"):
        derived = derive_modified_kernels()
        frozen = modified_kernels_exact()
        std = _standard_exact()
        for m in range(4):
            for n in range(4):
                mask = derived.masks[m, n]
                for i in range(4):
                    for j in range(4):
                        got = Fraction(mask[i, j]).limit_denominator(1 << 30)
                        assert got == frozen[(m, n)][i][j], (m, n, i, j)
                row_sum = sum(frozen[(m, n)][i][j] for i in range(4) for j in range(4))
                assert row_sum == 1
                if m == 0 or n == 0:
                    assert frozen[(m, n)] == std[(m, n)], (m, n)


def test_criterion_09_topology_end_to_end():
    with report(9, "cube+edge smooths to a closed genus-1 surface, tetrahedron and "
                   "cube to genus 0, each under 5 s at depth 3"):
        for name, chi in (("cube_edge", 0), ("tetrahedron", 2), ("cube", 2)):
            mesh = CORPUS[name]
            started = time.perf_counter()
            ps = build_patches(mesh, assign_frames(mesh))
            tm = tessellate(ps, max_depth=3, leaf_resolution=5)
            elapsed = time.perf_counter() - started
            assert tm.is_closed_manifold(), name
            assert tm.euler_characteristic() == chi, (name, tm.euler_characteristic())
            assert elapsed < 5.0, (name, elapsed)


def _random_edit(session, rng, inserted):
    """Apply one random valid edit to the session; returns a description."""
    from patchsmith.errors import ConflictError as _Conflict
    from patchsmith.errors import PatchsmithError

    for _ in range(40):
        mesh = session.mesh
        ops = ["move", "frame", "frame"]
        if len(mesh.faces) >= 2:
            ops.append("insert")
        if inserted:
            ops.append("delete")
        op = ops[int(rng.integers(0, len(ops)))]
        try:
            if op == "move":
                vid = int(rng.choice(sorted(mesh.vertices)))
                pos = mesh.vertices[vid].position + rng.normal(scale=0.1, size=3)
                session.apply_edit({"revision": session.revision, "op": "move_vertex",
                                    "vertex": vid, "position": pos.tolist()})
                return op
            if op == "frame":
                kind = ["face", "vertex"][int(rng.integers(0, 2))]
                pool = sorted(mesh.faces) if kind == "face" else sorted(mesh.vertices)
                session.apply_edit({
                    "revision": session.revision, "op": "set_frame",
                    "owner": {"kind": kind, "id": int(rng.choice(pool))},
                    "scale": float(rng.uniform(0.7, 1.6)),
                    "rotation": float(rng.uniform(-0.8, 0.8)),
                    "offset": rng.normal(scale=0.05, size=3).tolist(),
                })
                return op
            if op == "insert":
                f1, f2 = rng.choice(sorted(mesh.faces), size=2, replace=False)
                v1 = int(rng.choice(mesh.face_vertices(int(f1))))
                v2 = int(rng.choice(mesh.face_vertices(int(f2))))
                session.apply_edit({
                    "revision": session.revision, "op": "insert_edge",
                    "c1": {"face": int(f1), "vertex": v1},
                    "c2": {"face": int(f2), "vertex": v2},
                })
                inserted.append(max(mesh.half_edges) - 1)
                return op
            if op == "delete":
                eid = inserted[int(rng.integers(0, len(inserted)))]
                session.apply_edit({"revision": session.revision,
                                    "op": "delete_edge", "edge": eid})
                inserted.remove(eid)
                return op
        except _Conflict:
            raise
        except PatchsmithError:
            continue
    raise AssertionError("could not generate a valid edit in 40 attempts")


def test_criterion_10_incremental_equals_batch():
    with report(10, "50 random edit sequences on the cube produce tessellations "
                    "bitwise equal to from-scratch runs"):
        rng = np.random.default_rng(1234)
        for trial in range(50):
            session = Session(corpus.cube(), PipelineConfig(max_depth=1, leaf_resolution=3))
            inserted = []
            for _ in range(int(rng.integers(1, 11))):
                _random_edit(session, rng, inserted)
            fresh = Session(session.mesh.snapshot(), PipelineConfig(
                max_depth=1, leaf_resolution=3, frame_params=dict(session.frame_params)))
            a = session.full_tessellation()
            b = fresh.full_tessellation()
            assert a.positions.tobytes() == b.positions.tobytes(), trial
            assert a.normals.tobytes() == b.normals.tobytes(), trial
            assert a.triangles.tobytes() == b.triangles.tobytes(), trial


def test_criterion_11_secondary_protocol_round_trip():
    from aiohttp.test_utils import TestClient, TestServer

    from patchsmith import save_obj
    from patchsmith.service import decode_buffer, make_app

    async def scripted_client():
        app = make_app()
        client = TestClient(TestServer(app))
        await client.start_server()
        resp = await client.post("/session?depth=2&resolution=3", data=save_obj(corpus.cube()))
        sid = (await resp.json())["session_id"]
        ws = await client.ws_connect(f"/session/{sid}/ws")
        await ws.receive()  # hello

        async def update():
            header = json.loads((await ws.receive()).data)
            frames = [(await ws.receive()).data for _ in header["attachments"]]
            return header, frames

        await ws.send_str(json.dumps({"type": "full_sync"}))
        header0, frames0 = await update()

        await ws.send_str(json.dumps({
            "type": "edit", "revision": 0, "op": "insert_edge",
            "c1": {"face": 1, "vertex": 6}, "c2": {"face": 0, "vertex": 0},
        }))
        header1, frames1 = await update()
        meta = header1["attachments"][-1]
        _, _, idx = decode_buffer(frames1[-1], meta["vertices"], meta["triangles"])
        edges = {(min(int(t[k]), int(t[(k + 1) % 3])), max(int(t[k]), int(t[(k + 1) % 3])))
                 for t in idx for k in range(3)}
        chi = meta["vertices"] - len(edges) + meta["triangles"]
        assert chi == 0, chi

        await ws.send_str(json.dumps({
            "type": "edit", "revision": 1, "op": "set_frame",
            "owner": {"kind": "face", "id": 2},
            "scale": 1.0, "rotation": 0.0, "offset": [0, 0, 0],
        }))
        header2, frames2 = await update()
        assert frames2[-1] == frames1[-1]

        await ws.send_str(json.dumps({
            "type": "edit", "revision": 0, "op": "move_vertex",
            "vertex": 0, "position": [0, 0, 0],
        }))
        err = json.loads((await ws.receive()).data)
        assert err["type"] == "error" and err["error"] == "ConflictError"

        await ws.send_str(json.dumps({"type": "full_sync"}))
        header3, frames3 = await update()
        assert frames3[-1] == frames2[-1]
        await ws.close()
        await client.close()

    with report("11 [secondary interface]",
                "scripted client round-trips edits over the wire protocol"):
        asyncio.new_event_loop().run_until_complete(scripted_client())

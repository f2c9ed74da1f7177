import asyncio
import json

import numpy as np
import pytest
from aiohttp.test_utils import TestClient, TestServer

from patchsmith import corpus, save_obj
from patchsmith.service import decode_buffer, make_app


def run(coro):
    return asyncio.new_event_loop().run_until_complete(coro)


async def make_client():
    app = make_app()
    server = TestServer(app)
    client = TestClient(server)
    await client.start_server()
    return client


async def create_session(client, mesh, **params):
    query = "&".join(f"{k}={v}" for k, v in params.items())
    resp = await client.post(f"/session?{query}", data=save_obj(mesh))
    assert resp.status == 200, await resp.text()
    return await resp.json()


async def receive_update(ws):
    header = json.loads((await ws.receive()).data)
    assert header["type"] == "update", header
    frames = []
    for _ in header["attachments"]:
        msg = await ws.receive()
        frames.append(msg.data)
    return header, frames


def welded_from(header, frames):
    meta = header["attachments"][-1]
    assert meta["kind"] == "welded"
    return decode_buffer(frames[-1], meta["vertices"], meta["triangles"])


def euler_characteristic(indices):
    edges = set()
    for tri in indices:
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            edges.add((min(a, b), max(a, b)))
    return int(indices.max()) + 1 - len(edges) + len(indices)


class TestHttp:
    def test_create_and_export(self):
        async def body():
            client = await make_client()
            created = await create_session(client, corpus.tetrahedron(),
                                           depth=2, resolution=3)
            sid = created["session_id"]
            assert created["patches"] == 12
            resp = await client.get(f"/session/{sid}/export.obj")
            assert resp.status == 200
            text = await resp.text()
            assert text.startswith("v ")
            resp = await client.get(f"/session/{sid}/defects.csv")
            assert resp.status == 200
            lines = (await resp.text()).strip().splitlines()
            assert lines[0].startswith("depth,mode")
            assert len(lines) == 1 + 2 * 2
            await client.close()

        run(body())

    def test_invalid_obj_rejected(self):
        async def body():
            client = await make_client()
            resp = await client.post("/session", data=b"v 0 0 0\nf 1 1 1\n")
            assert resp.status == 422
            payload = await resp.json()
            assert "error" in payload
            await client.close()

        run(body())

    def test_unknown_session_404(self):
        async def body():
            client = await make_client()
            resp = await client.get("/session/nope/export.obj")
            assert resp.status == 404
            await client.close()

        run(body())


class TestWebSocket:
    def test_insert_edge_round_trip(self):
        async def body():
            client = await make_client()
            created = await create_session(client, corpus.cube(), depth=2, resolution=3)
            sid = created["session_id"]
            ws = await client.ws_connect(f"/session/{sid}/ws")
            hello = json.loads((await ws.receive()).data)
            assert hello["type"] == "hello" and hello["revision"] == 0

            await ws.send_str(json.dumps({"type": "full_sync"}))
            header0, frames0 = await receive_update(ws)
            _, _, idx0 = welded_from(header0, frames0)
            assert euler_characteristic(idx0) == 2

            await ws.send_str(json.dumps({
                "type": "edit", "revision": 0, "op": "insert_edge",
                "c1": {"face": 1, "vertex": 6}, "c2": {"face": 0, "vertex": 0},
            }))
            header1, frames1 = await receive_update(ws)
            assert header1["revision"] == 1
            positions, normals, idx1 = welded_from(header1, frames1)
            assert euler_characteristic(idx1) == 0
            assert header1["stats"]["genus"] == 1
            assert len(header1["changed"]) == header1["stats"]["patches"]
            await ws.close()
            await client.close()

        run(body())

    def test_identity_frame_edit_is_byte_identical(self):
        async def body():
            client = await make_client()
            created = await create_session(client, corpus.cube(), depth=2, resolution=3)
            sid = created["session_id"]
            ws = await client.ws_connect(f"/session/{sid}/ws")
            await ws.receive()  # hello
            await ws.send_str(json.dumps({"type": "full_sync"}))
            header0, frames0 = await receive_update(ws)

            await ws.send_str(json.dumps({
                "type": "edit", "revision": 0, "op": "set_frame",
                "owner": {"kind": "face", "id": 0},
                "scale": 1.0, "rotation": 0.0, "offset": [0, 0, 0],
            }))
            header1, frames1 = await receive_update(ws)
            assert header1["revision"] == 1
            assert header1["changed"] == []
            assert frames1[-1] == frames0[-1]  # welded buffers byte-identical

            await ws.send_str(json.dumps({"type": "full_sync"}))
            header2, frames2 = await receive_update(ws)
            assert frames2[-1] == frames0[-1]
            await ws.close()
            await client.close()

        run(body())

    def test_stale_revision_conflict(self):
        async def body():
            client = await make_client()
            created = await create_session(client, corpus.cube(), depth=2, resolution=3)
            sid = created["session_id"]
            ws = await client.ws_connect(f"/session/{sid}/ws")
            await ws.receive()  # hello
            await ws.send_str(json.dumps({"type": "full_sync"}))
            header0, frames0 = await receive_update(ws)

            await ws.send_str(json.dumps({
                "type": "edit", "revision": 5, "op": "move_vertex",
                "vertex": 0, "position": [0, 0, 0],
            }))
            err = json.loads((await ws.receive()).data)
            assert err["type"] == "error" and err["error"] == "ConflictError"
            assert err["revision"] == 0

            await ws.send_str(json.dumps({"type": "full_sync"}))
            header1, frames1 = await receive_update(ws)
            assert frames1[-1] == frames0[-1]  # state unchanged
            await ws.close()
            await client.close()

        run(body())

    def test_topology_error_reported(self):
        async def body():
            client = await make_client()
            created = await create_session(client, corpus.cube(), depth=2, resolution=3)
            sid = created["session_id"]
            ws = await client.ws_connect(f"/session/{sid}/ws")
            await ws.receive()
            await ws.send_str(json.dumps({
                "type": "edit", "revision": 0, "op": "insert_edge",
                "c1": {"face": 0, "vertex": 6}, "c2": {"face": 1, "vertex": 0},
            }))
            err = json.loads((await ws.receive()).data)
            assert err["type"] == "error" and err["error"] == "CornerError"
            await ws.close()
            await client.close()

        run(body())


class TestBufferCodec:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        pos = rng.normal(size=(7, 3)).astype("<f4").astype(np.float64)
        nrm = rng.normal(size=(7, 3)).astype("<f4").astype(np.float64)
        idx = rng.integers(0, 7, size=(4, 3)).astype(np.int64)
        from patchsmith.service import buffer_bytes

        data = buffer_bytes(pos, nrm, idx)
        p2, n2, i2 = decode_buffer(data, 7, 4)
        assert np.array_equal(p2, pos.astype("<f4"))
        assert np.array_equal(n2, nrm.astype("<f4"))
        assert np.array_equal(i2, idx.astype("<u4"))

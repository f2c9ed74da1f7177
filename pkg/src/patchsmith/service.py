"""HTTP + WebSocket service wrapping editing sessions.

Protocol (one session per WebSocket connection):

  client -> server   JSON text frames
      {"type": "edit", "revision": R, "op": "move_vertex", "vertex": id,
       "position": [x, y, z]}
      {"type": "edit", "revision": R, "op": "insert_edge",
       "c1": {"face": f, "vertex": v, "occurrence": 0}, "c2": {...}}
      {"type": "edit", "revision": R, "op": "delete_edge", "edge": id}
      {"type": "edit", "revision": R, "op": "set_frame",
       "owner": {"kind": "face", "id": f}, "scale": s, "rotation": r,
       "offset": [x, y, z]}
      {"type": "edit", "revision": R, "op": "set_config", "config": {...}}
      {"type": "full_sync"}

  server -> client   one JSON text frame followed by binary attachments
      {"type": "update", "revision": R, "changed": [...],
       "defect_summary": {...}, "stats": {...},
       "attachments": [{"kind": "patch", "patch": id, "vertices": n,
                        "triangles": m}, ...,
                       {"kind": "welded", "vertices": n, "triangles": m}]}
      each attachment frame: positions f32le (3n) ++ normals f32le (3n)
                             ++ indices u32le (3m)
      {"type": "error", "error": "ConflictError", "message": ...,
       "revision": R}   (state unchanged)

HTTP endpoints: POST /session (OBJ body, pipeline query params) creates a
session; GET /session/{id}/export.obj and /session/{id}/defects.csv read it
back; GET /session/{id} reports revision and stats.
"""

from __future__ import annotations

import asyncio
import json
import uuid

import numpy as np
from aiohttp import WSMsgType, web

from .analysis import compare_modes
from .errors import ConflictError, PatchsmithError
from .mesh import load_obj
from .pipeline import PipelineConfig
from .session import Session, UpdateMessage
from .tessellate import export_obj


def buffer_bytes(positions: np.ndarray, normals: np.ndarray, indices: np.ndarray) -> bytes:
    return (np.ascontiguousarray(positions, dtype="<f4").tobytes()
            + np.ascontiguousarray(normals, dtype="<f4").tobytes()
            + np.ascontiguousarray(indices, dtype="<u4").tobytes())


def mesh_record(mesh) -> dict:
    """Compact control-mesh description for client-side selection tools."""
    return {
        "vertices": [{"id": vid, "position": [float(x) for x in v.position]}
                     for vid, v in sorted(mesh.vertices.items())],
        "faces": [{"id": fid, "vertices": mesh.face_vertices(fid)}
                  for fid in sorted(mesh.faces)],
        "edges": [{"id": eid, "vertices": list(mesh.edge_endpoints(eid))}
                  for eid in mesh.edge_ids()],
    }


def encode_update(update: UpdateMessage, mesh=None) -> tuple[str, list[bytes]]:
    attachments = []
    frames = []
    for pid in sorted(update.buffers):
        buf = update.buffers[pid]
        attachments.append({
            "kind": "patch",
            "patch": pid,
            "vertices": int(len(buf.positions)),
            "triangles": int(len(buf.triangles)),
        })
        frames.append(buffer_bytes(buf.positions, buf.normals, buf.triangles))
    welded = update.welded
    attachments.append({
        "kind": "welded",
        "vertices": int(len(welded.positions)),
        "triangles": int(len(welded.triangles)),
    })
    frames.append(buffer_bytes(welded.positions, welded.normals, welded.triangles))
    payload = {
        "type": "update",
        "revision": update.revision,
        "changed": update.changed,
        "defect_summary": update.defect_summary,
        "stats": update.stats,
        "attachments": attachments,
    }
    if mesh is not None:
        payload["mesh"] = mesh_record(mesh)
    header = json.dumps(payload, default=float)
    return header, frames


def decode_buffer(data: bytes, vertices: int, triangles: int):
    """Inverse of buffer_bytes, for scripted clients and tests."""
    fl = np.frombuffer(data, dtype="<f4", count=vertices * 6)
    positions = fl[: vertices * 3].reshape(vertices, 3)
    normals = fl[vertices * 3:].reshape(vertices, 3)
    indices = np.frombuffer(data, dtype="<u4",
                            offset=vertices * 24, count=triangles * 3).reshape(triangles, 3)
    return positions, normals, indices


def _config_from_query(query) -> PipelineConfig:
    config = PipelineConfig()
    if "depth" in query:
        config.max_depth = int(query["depth"])
    if "resolution" in query:
        config.leaf_resolution = int(query["resolution"])
    if "mode" in query:
        config.mode = query["mode"]
    if "ds_iterations" in query:
        config.ds_iterations = int(query["ds_iterations"])
    if "dual_iterations" in query:
        config.dual_iterations = int(query["dual_iterations"])
    config.validate()
    return config


HUB_KEY = web.AppKey("hub", "SessionHub")


class SessionHub:
    def __init__(self):
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, asyncio.Lock] = {}

    def create(self, mesh, config) -> str:
        sid = uuid.uuid4().hex[:12]
        self.sessions[sid] = Session(mesh, config)
        self.locks[sid] = asyncio.Lock()
        return sid

    def get(self, sid: str) -> tuple[Session, asyncio.Lock]:
        if sid not in self.sessions:
            raise web.HTTPNotFound(text=f"no session {sid}")
        return self.sessions[sid], self.locks[sid]


async def handle_create(request: web.Request) -> web.Response:
    body = await request.read()
    try:
        mesh = load_obj(body)
        config = _config_from_query(request.query)
        sid = request.app[HUB_KEY].create(mesh, config)
    except PatchsmithError as err:
        return web.json_response(
            {"error": type(err).__name__, "message": str(err)}, status=422)
    session = request.app[HUB_KEY].sessions[sid]
    return web.json_response({
        "session_id": sid,
        "revision": session.revision,
        "patches": len(session.patchset),
    })


async def handle_export(request: web.Request) -> web.Response:
    session, lock = request.app[HUB_KEY].get(request.match_info["sid"])
    async with lock:
        data = export_obj(session.full_tessellation())
    return web.Response(body=data, content_type="text/plain",
                        headers={"Content-Disposition": "attachment; filename=export.obj"})


async def handle_defects(request: web.Request) -> web.Response:
    session, lock = request.app[HUB_KEY].get(request.match_info["sid"])
    async with lock:
        depths = range(1, max(session.config.max_depth, 1) + 1)
        comparison = compare_modes(session.patchset, depths)
    return web.Response(text=comparison.to_csv(), content_type="text/csv")


async def handle_info(request: web.Request) -> web.Response:
    session, _ = request.app[HUB_KEY].get(request.match_info["sid"])
    return web.json_response({
        "revision": session.revision,
        "patches": len(session.patchset),
        "config": {
            "max_depth": session.config.max_depth,
            "leaf_resolution": session.config.leaf_resolution,
            "mode": session.config.mode,
        },
    })


async def _send_update(ws: web.WebSocketResponse, update: UpdateMessage,
                       mesh=None) -> None:
    header, frames = encode_update(update, mesh)
    await ws.send_str(header)
    for frame in frames:
        await ws.send_bytes(frame)


async def handle_ws(request: web.Request) -> web.WebSocketResponse:
    session, lock = request.app[HUB_KEY].get(request.match_info["sid"])
    ws = web.WebSocketResponse(max_msg_size=64 * 1024 * 1024)
    await ws.prepare(request)
    await ws.send_str(json.dumps({
        "type": "hello", "revision": session.revision, "patches": len(session.patchset),
    }))
    async for msg in ws:
        if msg.type != WSMsgType.TEXT:
            continue
        try:
            payload = json.loads(msg.data)
        except json.JSONDecodeError as err:
            await ws.send_str(json.dumps({"type": "error", "error": "BadMessage",
                                          "message": str(err), "revision": session.revision}))
            continue
        kind = payload.get("type")
        try:
            async with lock:
                if kind == "edit":
                    update = session.apply_edit(payload)
                elif kind == "full_sync":
                    update = session.full_sync()
                else:
                    raise PatchsmithError(f"unknown message type {kind!r}")
            await _send_update(ws, update, session.mesh)
        except ConflictError as err:
            await ws.send_str(json.dumps({"type": "error", "error": "ConflictError",
                                          "message": str(err), "revision": session.revision}))
        except PatchsmithError as err:
            await ws.send_str(json.dumps({"type": "error", "error": type(err).__name__,
                                          "message": str(err), "revision": session.revision}))
    return ws


def make_app(static_dir: str | None = None) -> web.Application:
    app = web.Application()
    app[HUB_KEY] = SessionHub()
    app.router.add_post("/session", handle_create)
    app.router.add_get("/session/{sid}", handle_info)
    app.router.add_get("/session/{sid}/export.obj", handle_export)
    app.router.add_get("/session/{sid}/defects.csv", handle_defects)
    app.router.add_get("/session/{sid}/ws", handle_ws)
    if static_dir:
        import pathlib

        index = pathlib.Path(static_dir) / "index.html"

        async def handle_index(_request: web.Request) -> web.Response:
            return web.FileResponse(index)

        app.router.add_get("/", handle_index)
        app.router.add_static("/", static_dir)
    return app


def run_server(host: str = "127.0.0.1", port: int = 8754,
               static_dir: str | None = None) -> None:
    web.run_app(make_app(static_dir), host=host, port=port)

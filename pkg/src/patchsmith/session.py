"""Stateful editing session: apply edits, retessellate only what changed.

The cache invariant: after any edit sequence the per-patch buffers (and the
welded mesh assembled from them) are bitwise identical to a from-scratch
pipeline run on the final mesh, frames, and config. Edits recompute frames
and control nets (cheap) and compare nets bitwise against the previous
revision; only patches whose nets changed are retessellated. Topology and
config edits rebuild everything.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .analysis import defect_summary
from .errors import ConflictError, ParamError
from .frames import FrameOwner, FrameSet, assign_frames
from .mesh import CornerRef, HalfEdgeMesh
from .patches import PatchSet, build_patches
from .pipeline import FrameParams, PipelineConfig, apply_frame_params, weld
from .tessellate import PatchBuffers, TriMesh, collect_edge_samples, build_trees, tessellate_patch


@dataclass
class UpdateMessage:
    revision: int
    changed: list[int]
    buffers: dict[int, PatchBuffers]
    welded: TriMesh
    defect_summary: dict
    stats: dict


class Session:
    def __init__(self, mesh: HalfEdgeMesh, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()
        self.config.validate()
        mesh.validate()
        self.mesh = mesh
        self.revision = 0
        self.frame_params: dict[FrameOwner, FrameParams] = dict(self.config.frame_params)
        self._base_frames: FrameSet | None = None
        self.frames: FrameSet | None = None
        self.patchset: PatchSet | None = None
        self.trees = {}
        self.buffer_cache: dict[int, PatchBuffers] = {}
        self._rebuild(full=True)

    # ------------------------------------------------------------------

    def _recompute_frames(self) -> None:
        self._base_frames = assign_frames(
            self.mesh, self.config.ds_iterations, self.config.dual_iterations)
        self.frame_params = {o: p for o, p in self.frame_params.items()
                             if o in self._base_frames}
        self.frames = apply_frame_params(self._base_frames, self.frame_params)

    def _rebuild(self, full: bool, reuse_frames: bool = False) -> list[int]:
        """Recompute derived state; returns the ids of changed patches."""
        if not reuse_frames:
            self._recompute_frames()
        else:
            self.frames = apply_frame_params(self._base_frames, self.frame_params)
        old = self.patchset
        self.patchset = build_patches(self.mesh, self.frames)
        table = self.config.table()
        self.trees = build_trees(self.patchset, table, self.config.max_depth)
        edge_samples = collect_edge_samples(self.trees, self.patchset,
                                            self.config.leaf_resolution)
        if full or old is None:
            dirty = self.patchset.ids()
        else:
            dirty = []
            for pid in self.patchset.ids():
                prev = old.patches.get(pid)
                if prev is None or prev.P.tobytes() != self.patchset[pid].P.tobytes():
                    dirty.append(pid)
            for pid in list(self.buffer_cache):
                if pid not in self.patchset.patches:
                    del self.buffer_cache[pid]
        for pid in dirty:
            self.buffer_cache[pid] = tessellate_patch(
                self.trees[pid], self.config.leaf_resolution, edge_samples[pid])
        return dirty

    # ------------------------------------------------------------------

    def apply_edit(self, edit: dict) -> UpdateMessage:
        """Apply one edit; stale revisions raise ConflictError.

        Edits are transactional: any failure (bad corner, topology guard,
        degenerate frame) restores the previous state before re-raising.
        """
        started = time.perf_counter()
        if int(edit.get("revision", -1)) != self.revision:
            raise ConflictError(
                f"edit carries revision {edit.get('revision')}, session is at {self.revision}")
        saved = (self.mesh, self._base_frames, self.frames, self.patchset,
                 self.trees, dict(self.buffer_cache), dict(self.frame_params))
        self.mesh = self.mesh.snapshot()
        try:
            dirty = self._dispatch(edit)
        except Exception:
            (self.mesh, self._base_frames, self.frames, self.patchset,
             self.trees, self.buffer_cache, self.frame_params) = saved
            raise
        self.revision += 1
        return self._update(dirty, started)

    def _dispatch(self, edit: dict) -> list[int]:
        op = edit.get("op")
        if op == "move_vertex":
            vid = int(edit["vertex"])
            if vid not in self.mesh.vertices:
                raise ParamError(f"no vertex {vid}")
            self.mesh.move_vertex(vid, edit["position"])
            dirty = self._rebuild(full=False)
        elif op == "insert_edge":
            c1 = CornerRef(int(edit["c1"]["face"]), int(edit["c1"]["vertex"]),
                           int(edit["c1"].get("occurrence", 0)))
            c2 = CornerRef(int(edit["c2"]["face"]), int(edit["c2"]["vertex"]),
                           int(edit["c2"].get("occurrence", 0)))
            self.mesh.insert_edge(c1, c2)
            dirty = self._rebuild(full=True)
        elif op == "delete_edge":
            self.mesh.delete_edge(int(edit["edge"]))
            dirty = self._rebuild(full=True)
        elif op == "set_frame":
            owner = FrameOwner(edit["owner"]["kind"], int(edit["owner"]["id"]))
            if self._base_frames is None or owner not in self._base_frames:
                raise ParamError(f"no frame for {owner}")
            self.frame_params[owner] = FrameParams(
                scale=float(edit.get("scale", 1.0)),
                rotation=float(edit.get("rotation", 0.0)),
                offset=tuple(edit.get("offset", (0.0, 0.0, 0.0))),
            )
            dirty = self._rebuild(full=False, reuse_frames=True)
        elif op == "set_config":
            cfg = edit.get("config", {})
            for key in ("max_depth", "leaf_resolution", "ds_iterations", "dual_iterations"):
                if key in cfg:
                    setattr(self.config, key, int(cfg[key]))
            if "mode" in cfg:
                self.config.mode = str(cfg["mode"])
            self.config.validate()
            dirty = self._rebuild(full=True)
        else:
            raise ParamError(f"unknown edit op {op!r}")
        return dirty

    def full_sync(self) -> UpdateMessage:
        return self._update(self.patchset.ids(), time.perf_counter())

    # ------------------------------------------------------------------

    def _update(self, changed: list[int], started: float) -> UpdateMessage:
        welded = self.full_tessellation()
        summary = defect_summary(self.patchset, self.trees)
        stats = {
            "patches": len(self.patchset),
            "leaves": int(sum(b.leaves for b in self.buffer_cache.values())),
            "triangles": int(len(welded.triangles)),
            "vertices": int(len(welded.positions)),
            "euler_characteristic": welded.euler_characteristic(),
            "genus": welded.genus(),
            "update_ms": (time.perf_counter() - started) * 1000.0,
        }
        return UpdateMessage(
            revision=self.revision,
            changed=sorted(changed),
            buffers={pid: self.buffer_cache[pid] for pid in sorted(changed)},
            welded=welded,
            defect_summary=summary,
            stats=stats,
        )

    def full_tessellation(self) -> TriMesh:
        buffers = [self.buffer_cache[pid] for pid in self.patchset.ids()]
        return weld(buffers, self.patchset)

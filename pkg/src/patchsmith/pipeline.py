"""End-to-end smoothing pipeline: mesh -> frames -> patches -> triangles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import defect_summary
from .errors import ParamError
from .frames import FrameOwner, FrameSet, assign_frames, set_frame_params
from .kernels import KernelTable, modified_kernels, standard_kernels
from .mesh import HalfEdgeMesh
from .patches import PatchSet, build_patches
from .tessellate import (
    PatchBuffers,
    TriMesh,
    WELD_TOL_FACTOR,
    tessellate_buffers,
    tessellation_stats,
    weld_buffers,
)


@dataclass
class FrameParams:
    scale: float = 1.0
    rotation: float = 0.0
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass
class PipelineConfig:
    ds_iterations: int = 1
    dual_iterations: int = 0
    max_depth: int = 4
    leaf_resolution: int = 5
    mode: str = "modified"
    frame_params: dict[FrameOwner, FrameParams] = field(default_factory=dict)
    threads: int | None = None

    def validate(self) -> None:
        if self.ds_iterations < 1:
            raise ParamError("ds_iterations must be >= 1")
        if self.dual_iterations < 0 or self.dual_iterations % 2 != 0:
            raise ParamError("dual_iterations must be even and non-negative")
        if self.max_depth < 0:
            raise ParamError("max_depth must be >= 0")
        r = self.leaf_resolution
        if r < 2 or (r - 1) & (r - 2) != 0:
            raise ParamError("leaf_resolution - 1 must be a power of two")
        if self.mode not in ("modified", "standard"):
            raise ParamError(f"unknown mode {self.mode!r}")

    def table(self) -> KernelTable:
        return modified_kernels() if self.mode == "modified" else standard_kernels()


def apply_frame_params(frames: FrameSet, params: dict[FrameOwner, FrameParams]) -> FrameSet:
    out = FrameSet(dict(frames.frames))
    for owner, p in params.items():
        if owner in out:
            out[owner] = set_frame_params(out[owner], p.scale, p.rotation, p.offset)
    return out


@dataclass
class PipelineResult:
    mesh: HalfEdgeMesh
    frames: FrameSet
    patchset: PatchSet
    buffers: list[PatchBuffers]
    trees: dict
    trimesh: TriMesh
    stats: dict


def weld(buffers: list[PatchBuffers], patchset: PatchSet) -> TriMesh:
    pts = [b.positions for b in buffers if len(b.positions)]
    if not pts:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3), np.int64))
    allp = np.concatenate(pts)
    diag = float(np.linalg.norm(allp.max(axis=0) - allp.min(axis=0)))
    return weld_buffers(buffers, patchset, WELD_TOL_FACTOR * max(diag, 1e-30))


def run_pipeline(mesh: HalfEdgeMesh, config: PipelineConfig | None = None,
                 frames: FrameSet | None = None) -> PipelineResult:
    config = config or PipelineConfig()
    config.validate()
    mesh.validate()
    if frames is None:
        frames = assign_frames(mesh, config.ds_iterations, config.dual_iterations)
        frames = apply_frame_params(frames, config.frame_params)
    patchset = build_patches(mesh, frames)
    buffers, trees = tessellate_buffers(
        patchset, config.max_depth, config.leaf_resolution,
        table=config.table(), threads=config.threads)
    trimesh = weld(buffers, patchset)
    stats = tessellation_stats(buffers, trimesh)
    stats["defect_summary"] = defect_summary(patchset, trees)
    stats["euler_characteristic"] = trimesh.euler_characteristic()
    stats["genus"] = trimesh.genus()
    stats["mode"] = config.mode
    return PipelineResult(mesh, frames, patchset, buffers, trees, trimesh, stats)

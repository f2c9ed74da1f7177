"""patchsmith: piecewise-smooth bicubic Bezier surfaces from manifold meshes.

The pipeline turns a closed orientable polygon mesh into a network of 4x4
Bezier patches whose corners are governed by planar polygon frames, then
evaluates it hierarchically: regular patches directly, extraordinary patches
through a boundary-preserving subdivision that keeps the patchwork tangent
continuous along the edges that meet extraordinary vertices.
"""

from .errors import (
    AnalysisError,
    AssemblyError,
    BoundaryError,
    ConflictError,
    CornerError,
    DegenerateFrameError,
    KernelDerivationError,
    ManifoldError,
    OrientationError,
    ParamError,
    PatchsmithError,
    TessellationError,
    TopologyError,
)
from .mesh import (
    CornerRef,
    HalfEdgeMesh,
    canonical_signature,
    doo_sabin_refine,
    dual_mesh,
    load_obj,
    save_obj,
    vertex_insertion_remesh,
)

__all__ = [
    "AnalysisError",
    "AssemblyError",
    "BoundaryError",
    "ConflictError",
    "CornerError",
    "CornerRef",
    "DegenerateFrameError",
    "HalfEdgeMesh",
    "KernelDerivationError",
    "ManifoldError",
    "OrientationError",
    "ParamError",
    "PatchsmithError",
    "TessellationError",
    "TopologyError",
    "canonical_signature",
    "doo_sabin_refine",
    "dual_mesh",
    "load_obj",
    "save_obj",
    "vertex_insertion_remesh",
]

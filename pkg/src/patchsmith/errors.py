"""Exception types shared across the package."""


class PatchsmithError(Exception):
    """Base class for all package-specific errors."""


class ManifoldError(PatchsmithError):
    """An edge has more or fewer than two incident faces, or a vertex fan is split."""


class OrientationError(PatchsmithError):
    """Two faces traverse a shared edge in the same direction."""


class BoundaryError(PatchsmithError):
    """The mesh has an open boundary; only closed surfaces are supported."""


class TopologyError(PatchsmithError):
    """An edit would break the closed two-manifold structure."""


class CornerError(PatchsmithError):
    """A (face, vertex) corner reference does not resolve on the mesh."""


class DegenerateFrameError(PatchsmithError):
    """A polygon frame has zero area or collinear corners."""


class ParamError(PatchsmithError):
    """An operation parameter is out of its valid range."""


class AssemblyError(PatchsmithError):
    """Patch construction failed due to missing frames or provenance mismatch."""


class KernelDerivationError(PatchsmithError):
    """The derived kernel table violates one of its exact constraints."""


class TessellationError(PatchsmithError):
    """Vertex welding produced a non-manifold triangle mesh."""


class AnalysisError(PatchsmithError):
    """Defect measurement was asked for an inconsistent boundary pairing."""


class ConflictError(PatchsmithError):
    """An edit carried a stale revision; the client must resync."""

"""Midpoint subdivision kernel tables for bicubic Bezier patches.

Two tables are provided. The standard table reproduces the classical
midpoint split (each child is an exact restriction of the parent
polynomial). The modified table keeps every boundary kernel but computes
each child's corner-adjacent interior point by scaling the corner's
diagonal vector to half length instead of bilinear averaging; the remaining
interior kernels follow by rerunning the averaging cascade on the replaced
values, which restores second-order contact between the four children. The
modified table is what keeps boundary points at the exact midpoints of
their flanking interior points under repeated subdivision around corners of
any valence, at the price of the children no longer reproducing a single
polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import KernelDerivationError
from .patches import BezierPatch, CornerMeta

QUADRANTS = ((0, 0), (0, 1), (1, 0), (1, 1))

# 1D midpoint de Casteljau weights for the left half, by output row
ROWS_1D = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.5, 0.5, 0.0, 0.0],
    [0.25, 0.5, 0.25, 0.0],
    [0.125, 0.375, 0.375, 0.125],
])

# Modified quadrant-(0,0) masks as integer numerators over 32; masks not
# listed here coincide with the standard tensor-product table.
_MODIFIED_NUM_32 = {
    (1, 1): [[16, 0, 0, 0], [0, 16, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    (1, 2): [[8, 4, 4, 0], [0, 12, 4, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    (1, 3): [[4, 4, 4, 4], [0, 8, 8, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    (2, 1): [[8, 0, 0, 0], [4, 12, 0, 0], [4, 4, 0, 0], [0, 0, 0, 0]],
    (3, 1): [[4, 0, 0, 0], [4, 8, 0, 0], [4, 8, 0, 0], [4, 0, 0, 0]],
    (2, 2): [[4, 2, 2, 0], [2, 10, 4, 0], [2, 4, 2, 0], [0, 0, 0, 0]],
    (2, 3): [[2, 2, 2, 2], [1, 7, 7, 1], [1, 3, 3, 1], [0, 0, 0, 0]],
    (3, 2): [[2, 1, 1, 0], [2, 7, 3, 0], [2, 7, 3, 0], [2, 1, 1, 0]],
    (3, 3): [[1, 1, 1, 1], [1, 5, 5, 1], [1, 5, 5, 1], [1, 1, 1, 1]],
}


@dataclass(frozen=True)
class KernelTable:
    """16 masks of 4x4 weights for the quadrant containing parent corner (0,0).

    masks[m, n, i, j] weights parent point (i, j) in child point (m, n); the
    other three quadrants follow by index reflection.
    """

    masks: np.ndarray  # (4, 4, 4, 4)
    name: str

    def mask(self, m: int, n: int) -> np.ndarray:
        return self.masks[m, n]


def standard_kernels() -> KernelTable:
    masks = np.einsum("mi,nj->mnij", ROWS_1D, ROWS_1D)
    return KernelTable(masks=masks, name="standard")


def _standard_exact() -> dict[tuple[int, int], list[list[Fraction]]]:
    rows = [[Fraction(1), Fraction(0), Fraction(0), Fraction(0)],
            [Fraction(1, 2), Fraction(1, 2), Fraction(0), Fraction(0)],
            [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4), Fraction(0)],
            [Fraction(1, 8), Fraction(3, 8), Fraction(3, 8), Fraction(1, 8)]]
    return {(m, n): [[rows[m][i] * rows[n][j] for j in range(4)] for i in range(4)]
            for m in range(4) for n in range(4)}


def modified_kernels_exact() -> dict[tuple[int, int], list[list[Fraction]]]:
    """The frozen modified table as exact rationals."""
    table = _standard_exact()
    for key, num in _MODIFIED_NUM_32.items():
        table[key] = [[Fraction(num[i][j], 32) for j in range(4)] for i in range(4)]
    return table


def modified_kernels() -> KernelTable:
    exact = modified_kernels_exact()
    masks = np.array([[[[float(exact[(m, n)][i][j]) for j in range(4)] for i in range(4)]
                       for n in range(4)] for m in range(4)])
    return KernelTable(masks=masks, name="modified")


def unadjusted_modified_kernels() -> KernelTable:
    """Modified column/row kernels with the interior 2x2 left standard.

    Negative control: without rerunning the averaging cascade for the
    interior block, the four children no longer meet with second-order
    contact.
    """
    exact = _standard_exact()
    for key in ((1, 1), (1, 2), (1, 3), (2, 1), (3, 1)):
        num = _MODIFIED_NUM_32[key]
        exact[key] = [[Fraction(num[i][j], 32) for j in range(4)] for i in range(4)]
    masks = np.array([[[[float(exact[(m, n)][i][j]) for j in range(4)] for i in range(4)]
                       for n in range(4)] for m in range(4)])
    return KernelTable(masks=masks, name="modified-unadjusted")


# ----------------------------------------------------------------------
# symbolic derivation


def _onehot(i, j):
    return {(i, j): Fraction(1)}


def _avg(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + v
    return {k: v / 2 for k, v in out.items()}


def _lin(*terms):
    out = {}
    for coef, d in terms:
        for k, v in d.items():
            out[k] = out.get(k, Fraction(0)) + coef * v
    return {k: v for k, v in out.items() if v != 0}


def _u_avg(grid):
    return [[_avg(grid[i][j], grid[i + 1][j]) for j in range(len(grid[0]))]
            for i in range(len(grid) - 1)]


def _v_avg(grid):
    return [[_avg(grid[i][j], grid[i][j + 1]) for j in range(len(grid[0]) - 1)]
            for i in range(len(grid))]


def derive_modified_kernels() -> KernelTable:
    """Rerun the averaging cascade with the four corner bilinear entries
    replaced by the half-diagonal scaling rule, and read off the child masks.

    Verifies exactly (in rational arithmetic) that boundary masks are
    untouched, that every mask is an affine combination, that the four
    children join with second-order contact across both internal boundaries,
    and that the off-corner children are index reflections of the corner
    child. Raises KernelDerivationError on any violation.
    """
    levels: dict[tuple[int, int], list[list[dict]]] = {
        (0, 0): [[_onehot(i, j) for j in range(4)] for i in range(4)]
    }
    for m in range(1, 4):
        levels[(m, 0)] = _u_avg(levels[(m - 1, 0)])
    for n in range(1, 4):
        levels[(0, n)] = _v_avg(levels[(0, n - 1)])

    first = _v_avg(levels[(1, 0)])
    first[0][0] = _avg(_onehot(0, 0), _onehot(1, 1))
    first[0][2] = _avg(_onehot(0, 3), _onehot(1, 2))
    first[2][0] = _avg(_onehot(3, 0), _onehot(2, 1))
    first[2][2] = _avg(_onehot(3, 3), _onehot(2, 2))
    levels[(1, 1)] = first
    for m in range(2, 4):
        levels[(m, 1)] = _u_avg(levels[(m - 1, 1)])
    for n in range(2, 4):
        for m in range(1, 4):
            levels[(m, n)] = _v_avg(levels[(m, n - 1)])

    child00 = [[levels[(m, n)][0][0] for n in range(4)] for m in range(4)]
    child10 = [[levels[(3 - m, n)][m][0] for n in range(4)] for m in range(4)]
    child01 = [[levels[(m, 3 - n)][0][n] for n in range(4)] for m in range(4)]
    child11 = [[levels[(3 - m, 3 - n)][m][n] for n in range(4)] for m in range(4)]

    std = _standard_exact()
    for m in range(4):
        for n in range(4):
            mask = child00[m][n]
            if sum(mask.values()) != 1:
                raise KernelDerivationError(f"mask ({m},{n}) is not affine")
            if any(w < 0 for w in mask.values()):
                raise KernelDerivationError(f"mask ({m},{n}) has negative weights")
            if m == 0 or n == 0:
                expect = {(i, j): std[(m, n)][i][j] for i in range(4) for j in range(4)
                          if std[(m, n)][i][j] != 0}
                if mask != expect:
                    raise KernelDerivationError(f"boundary mask ({m},{n}) changed")

    for n in range(4):  # contact across the internal u boundary
        if _lin((1, child00[3][n]), (-1, child10[0][n])):
            raise KernelDerivationError("children disagree on the shared u row")
        if _lin((1, child00[3][n]), (-1, child00[2][n]),
                (-1, child10[1][n]), (1, child10[0][n])):
            raise KernelDerivationError("first-derivative jump across the u boundary")
        if _lin((1, child00[1][n]), (-2, child00[2][n]), (1, child00[3][n]),
                (-1, child10[2][n]), (2, child10[1][n]), (-1, child10[0][n])):
            raise KernelDerivationError("second-derivative jump across the u boundary")
    for m in range(4):  # and the internal v boundary
        if _lin((1, child00[m][3]), (-1, child01[m][0])):
            raise KernelDerivationError("children disagree on the shared v column")
        if _lin((1, child00[m][3]), (-1, child00[m][2]),
                (-1, child01[m][1]), (1, child01[m][0])):
            raise KernelDerivationError("first-derivative jump across the v boundary")
        if _lin((1, child00[m][1]), (-2, child00[m][2]), (1, child00[m][3]),
                (-1, child01[m][2]), (2, child01[m][1]), (-1, child01[m][0])):
            raise KernelDerivationError("second-derivative jump across the v boundary")

    def reflect_i(mask):
        return {(3 - i, j): w for (i, j), w in mask.items()}

    def reflect_j(mask):
        return {(i, 3 - j): w for (i, j), w in mask.items()}

    for m in range(4):
        for n in range(4):
            if child10[m][n] != reflect_i(child00[3 - m][n]):
                raise KernelDerivationError("u reflection rule broken")
            if child01[m][n] != reflect_j(child00[m][3 - n]):
                raise KernelDerivationError("v reflection rule broken")
            if child11[m][n] != reflect_i(reflect_j(child00[3 - m][3 - n])):
                raise KernelDerivationError("uv reflection rule broken")

    masks = np.zeros((4, 4, 4, 4))
    for m in range(4):
        for n in range(4):
            for (i, j), w in child00[m][n].items():
                masks[m, n, i, j] = float(w)
    return KernelTable(masks=masks, name="derived-modified")


def derived_modified_exact() -> dict[tuple[int, int], list[list[Fraction]]]:
    """Exact rational form of the derived table (for mask-for-mask comparison)."""
    table = derive_modified_kernels()
    out = {}
    for m in range(4):
        for n in range(4):
            out[(m, n)] = [[Fraction(table.masks[m, n, i, j]).limit_denominator(1 << 20)
                            for j in range(4)] for i in range(4)]
    return out


# ----------------------------------------------------------------------
# subdivision


@dataclass
class SubdivisionResult:
    """Four child nets in quadrant order (0,0), (0,1), (1,0), (1,1).

    The parent corner of quadrant q carries its metadata into child q; every
    other child corner is a new, regular (4-valent) corner.
    """

    parent: BezierPatch
    children: dict[tuple[int, int], BezierPatch]

    def child(self, qu: int, qv: int) -> BezierPatch:
        return self.children[(qu, qv)]


def _reflect(P: np.ndarray, qu: int, qv: int) -> np.ndarray:
    out = P
    if qu:
        out = out[::-1, :, :]
    if qv:
        out = out[:, ::-1, :]
    return out


def subdivide_net(P: np.ndarray, table: KernelTable) -> dict[tuple[int, int], np.ndarray]:
    """Split a 4x4 net into its four quadrant nets (parent orientation kept)."""
    out = {}
    for qu, qv in QUADRANTS:
        reflected = _reflect(P, qu, qv)
        child = np.einsum("mnij,ijc->mnc", table.masks, reflected)
        out[(qu, qv)] = np.ascontiguousarray(_reflect(child, qu, qv))
    return out


def subdivide(patch: BezierPatch, table: KernelTable) -> SubdivisionResult:
    nets = subdivide_net(patch.P, table)
    children = {}
    for q in QUADRANTS:
        corners = {}
        for code in QUADRANTS:
            if code == q:
                corners[code] = patch.corners[code]
            else:
                corners[code] = CornerMeta(valence=4, extraordinary=False)
        children[q] = BezierPatch(id=patch.id, P=nets[q], corners=corners)
    return SubdivisionResult(parent=patch, children=children)


@dataclass
class KernelDelta:
    m: int
    n: int
    max_abs_delta: float


def kernel_diff(a: KernelTable, b: KernelTable) -> list[KernelDelta]:
    """Masks that differ between two tables, with the largest weight change."""
    out = []
    for m in range(4):
        for n in range(4):
            delta = float(np.abs(a.masks[m, n] - b.masks[m, n]).max())
            if delta > 0.0:
                out.append(KernelDelta(m, n, delta))
    return out


def tables_by_name() -> dict[str, KernelTable]:
    return {"standard": standard_kernels(), "modified": modified_kernels()}

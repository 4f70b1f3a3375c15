"""Exemplar Ahlfors-regular spaces with explicit dyadic cells.

Three kinds are provided: the unit interval, the unit cube ``[0,1]^Q``
(``Q ≤ 3``, sup-norm metric) and the middle-thirds Cantor set with its
natural probability measure.  Every space owns a complete tree whose
nodes are the cells, numbered level by level.  Cell geometry is exact
(``fractions.Fraction``) for membership questions and floating point for
quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .tree import (
    MAX_NODES,
    BoundarySet,
    TreeMeasure,
    WeightedTree,
    conjugate,
    homogeneous_tree,
    measure_from_masses,
)

__all__ = [
    "DyadicSpace",
    "SetDescriptor",
    "SpaceMeasure",
    "lebesgue",
    "cantor_function",
    "cantor_distance",
    "make_space",
    "weight_pi_s",
    "parse_set_descriptor",
    "discretize_set",
    "kernel_K",
    "ball_mass",
    "continuous_energy",
    "lambda_map",
    "push_forward",
    "pull_back_atomic",
    "pull_back_rays",
    "graph_predecessor_set",
    "ball_capacity_estimate",
    "BallEstimate",
]

KINDS = ("interval", "cube", "cantor")
SNAP_TOL = 1e-12
_SNAP_DENOMINATOR = 1 << 24
# ternary numerators must fit in int64
_MAX_CANTOR_DEPTH = 38


@dataclass(frozen=True, eq=False)
class DyadicSpace:
    """A compact space with its dyadic decomposition truncated at ``depth``.

    Attributes
    ----------
    kind : {"interval", "cube", "cantor"}
    Q : float
        Ahlfors dimension.
    dim : int
        Number of ambient coordinates of a point.
    delta : float
        Side ratio between consecutive levels.
    depth : int
        Deepest level represented in ``tree``.
    tree : WeightedTree
        Cell tree with unit weights.
    """

    kind: str
    Q: float
    dim: int
    delta: float
    depth: int
    tree: WeightedTree

    @property
    def branching(self) -> int:
        return 2 if self.kind == "cantor" else 2**self.dim

    @property
    def base(self) -> int:
        """``1/δ`` as an integer."""
        return 3 if self.kind == "cantor" else 2

    def mass_at_level(self, k) -> np.ndarray | float:
        return np.power(float(self.branching), -np.asarray(k, dtype=float))

    @property
    def masses(self) -> np.ndarray:
        """Cell mass ``m(α)`` at every node."""
        return self.mass_at_level(self.tree.depth)

    def width(self, k: int) -> float:
        return float(self.delta) ** k

    def diameter(self, k: int) -> float:
        # sup-norm diameter; for Cantor cells the two extreme points are in the set
        return self.width(k)

    def locate(self, node: int) -> tuple[int, int]:
        """``(level, index within level)`` of a node."""
        node = self.tree.check_node(node)
        k = int(self.tree.depth[node])
        return k, node - int(self.tree.level_bounds[k])

    def node_at(self, k: int, j: int) -> int:
        if not 0 <= k <= self.depth:
            raise ValueError(f"level {k} outside 0..{self.depth}")
        if not 0 <= j < self.branching**k:
            raise ValueError(f"cell index {j} outside level {k}")
        return int(self.tree.level_bounds[k]) + int(j)

    # integer geometry: lower corners are ``lower_ints / base**k``
    def lower_ints(self, k: int, j=None) -> np.ndarray:
        j = np.arange(self.branching**k, dtype=np.int64) if j is None else np.atleast_1d(np.asarray(j, dtype=np.int64))
        if self.kind == "cantor":
            out = np.zeros(j.shape, dtype=np.int64)
            for lev in range(1, k + 1):
                bit = (j >> (k - lev)) & 1
                out += 2 * bit * 3 ** (k - lev)
            return out[:, None]
        Q = self.dim
        out = np.zeros(j.shape + (Q,), dtype=np.int64)
        for lev in range(1, k + 1):
            digit = (j >> (Q * (k - lev))) & (2**Q - 1)
            for i in range(Q):
                out[:, i] |= ((digit >> i) & 1) << (k - lev)
        return out

    def index_of(self, k: int, coords: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`lower_ints` for the interval and cube kinds."""
        coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        Q = self.dim
        j = np.zeros(coords.shape[0], dtype=np.int64)
        for lev in range(1, k + 1):
            digit = np.zeros_like(j)
            for i in range(Q):
                digit |= ((coords[:, i] >> (k - lev)) & 1) << i
            j = (j << Q) | digit
        return j

    def cell_box(self, node: int) -> list[tuple[Fraction, Fraction]]:
        """Exact closed cell ``[lo, hi]`` per coordinate (the hull for Cantor cells)."""
        k, j = self.locate(node)
        den = self.base**k
        lo = self.lower_ints(k, j)[0]
        return [(Fraction(int(a), den), Fraction(int(a) + 1, den)) for a in lo]

    def cell_lowers(self, k: int) -> np.ndarray:
        return self.lower_ints(k).astype(float) / float(self.base**k)

    def nodes_at(self, k: int) -> np.ndarray:
        return np.arange(int(self.tree.level_bounds[k]), int(self.tree.level_bounds[k + 1]))

    def contains(self, x) -> bool:
        x = _float_point(self, x)
        if np.any(x < -SNAP_TOL) or np.any(x > 1 + SNAP_TOL):
            return False
        if self.kind == "cantor":
            return cantor_distance(float(x[0])) <= 1e-9
        return True


def make_space(kind: str, depth: int, Q: int | None = None,
               delta: float | None = None) -> DyadicSpace:
    """Build an exemplar space truncated at ``depth``.

    ``kind`` is ``"interval"``, ``"cantor"``, ``"cube"`` (with ``Q``) or
    ``"cube-Q"``.  ``delta`` may be passed for validation only, since each
    kind fixes its own ratio.
    """
    kind = str(kind).lower()
    if kind.startswith("cube-"):
        Q = int(kind.split("-", 1)[1])
        kind = "cube"
    if kind not in KINDS:
        raise ValueError(f"invalid kind {kind!r}; expected one of {KINDS}")
    if int(depth) != depth or depth < 0:
        raise ValueError("depth must be a nonnegative integer")
    depth = int(depth)
    if kind == "interval":
        if Q not in (None, 1):
            raise ValueError("the interval has Q=1")
        dim, Qv, d, b = 1, 1.0, 0.5, 2
    elif kind == "cube":
        if Q is None or int(Q) != Q or not 1 <= Q <= 3:
            raise ValueError("cube spaces need an integer Q in 1..3")
        dim, Qv, d, b = int(Q), float(Q), 0.5, 2 ** int(Q)
    else:
        if Q is not None and not math.isclose(float(Q), math.log(2) / math.log(3)):
            raise ValueError("the Cantor set has Q=log2/log3")
        if depth > _MAX_CANTOR_DEPTH:
            raise ValueError(f"cantor depth above {_MAX_CANTOR_DEPTH}")
        dim, Qv, d, b = 1, math.log(2) / math.log(3), 1.0 / 3.0, 2
    if delta is not None:
        if not 0.0 < float(delta) < 1.0:
            raise ValueError(f"delta must lie in (0,1), got {delta}")
        if not math.isclose(float(delta), d):
            raise ValueError(f"kind {kind!r} fixes delta={d}")
    n = (b ** (depth + 1) - 1) // (b - 1)
    if n > MAX_NODES:
        raise ValueError(f"space with {n} cells exceeds the node-count guard {MAX_NODES}")
    tree = homogeneous_tree(b, depth, 1.0, delta=d)
    return DyadicSpace(kind, Qv, dim, d, depth, tree)


def weight_pi_s(space: DyadicSpace, s: float, p: float) -> WeightedTree:
    """The space's tree weighted by ``π_s(α) = m(α)^{(sp'-1)/(p'-1)}``."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    q = conjugate(p)
    expo = (s * q - 1.0) / (q - 1.0)
    per_level = space.mass_at_level(np.arange(space.depth + 1)) ** expo
    return space.tree.with_weights(per_level[space.tree.depth])


# points ---------------------------------------------------------------------

def _to_fraction(x) -> tuple[Fraction, bool]:
    """Exact value of ``x`` and whether a float was snapped."""
    if isinstance(x, (Fraction, int, np.integer)):
        return Fraction(int(x)) if not isinstance(x, Fraction) else x, False
    if isinstance(x, str):
        return Fraction(x.strip()), False
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError(f"non-finite coordinate {x}")
    r = Fraction(xf).limit_denominator(_SNAP_DENOMINATOR)
    if r != Fraction(xf) and abs(float(r) - xf) <= SNAP_TOL:
        return r, True
    return Fraction(xf), False


def _exact_point(space: DyadicSpace, x) -> tuple[tuple[Fraction, ...], bool]:
    coords = list(x) if isinstance(x, (tuple, list, np.ndarray)) else [x]
    if len(coords) != space.dim:
        raise ValueError(f"point needs {space.dim} coordinates, got {len(coords)}")
    vals, snapped = zip(*(_to_fraction(c) for c in coords))
    if any(v < 0 or v > 1 for v in vals):
        raise ValueError(f"point {tuple(map(float, vals))} outside the space")
    if space.kind == "cantor" and not _cantor_member(vals[0]):
        raise ValueError(f"point {float(vals[0])} outside the Cantor set")
    return tuple(vals), any(snapped)


def _float_point(space: DyadicSpace, x) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if space.dim == 1:
        return a
    return a.reshape(-1, space.dim)


def _cantor_member(x: Fraction, levels: int = 64) -> bool:
    """Exact test up to ``levels`` ternary digits; deeper points count as members."""
    for _ in range(levels):
        if x <= Fraction(1, 3):
            x = 3 * x
        elif x >= Fraction(2, 3):
            x = 3 * x - 2
        else:
            return False
        if x in (0, 1):
            return True
    return True


def cantor_distance(x) -> np.ndarray | float:
    """Distance from ``x ∈ [0,1]`` to the middle-thirds Cantor set."""
    y = np.asarray(x, dtype=float).copy()
    dist = np.zeros_like(y)
    done = np.zeros(y.shape, dtype=bool)
    scale = 1.0
    for _ in range(40):
        gap = ~done & (y > 1 / 3) & (y < 2 / 3)
        dist[gap] = np.minimum(y[gap] - 1 / 3, 2 / 3 - y[gap]) * scale
        done |= gap
        y = np.where(y <= 1 / 3, 3 * y, 3 * y - 2)
        scale /= 3
    return dist if dist.ndim else float(dist)


_CHUNK = 11


def _cantor_chunk_table():
    """Per block of ``_CHUNK`` ternary digits: partial value and whether a 1 occurred."""
    n = 3**_CHUNK
    digits = np.zeros((n, _CHUNK), dtype=np.int64)
    c = np.arange(n)
    for i in range(_CHUNK - 1, -1, -1):
        digits[:, i] = c % 3
        c //= 3
    val = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    for i in range(_CHUNK):
        d = digits[:, i]
        w = 0.5 ** (i + 1)
        val[~done & (d == 1)] += w
        val[~done & (d == 2)] += w
        done |= d == 1
    return val, done


_CANTOR_TABLE = None


def cantor_function(x) -> np.ndarray:
    """The Cantor distribution function, i.e. ``m([0, x])`` on the Cantor set.

    Reads ``3 * _CHUNK`` ternary digits through a lookup table; the error
    is below ``2^{-33}``.
    """
    global _CANTOR_TABLE
    if _CANTOR_TABLE is None:
        _CANTOR_TABLE = _cantor_chunk_table()
    val, stop = _CANTOR_TABLE
    y = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = np.zeros_like(y)
    done = y >= 1.0
    out[done] = 1.0
    scale = 1.0
    rest = np.where(done, 0.0, y)
    for _ in range(3):
        t = rest * 3.0**_CHUNK
        c = np.minimum(np.floor(t), 3**_CHUNK - 1).astype(np.int64)
        rest = t - c
        out = np.where(done, out, out + scale * val[c])
        done = done | stop[c]
        scale *= 0.5**_CHUNK
    return out


# measure of balls and the kernel --------------------------------------------

def ball_mass(space: DyadicSpace, x, r) -> np.ndarray:
    """``m(B(x, r))`` (sup-norm balls, clipped to the space)."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if space.kind == "cantor":
        return cantor_function(x + r) - cantor_function(x - r)
    if space.dim == 1:
        return np.clip(np.minimum(x + r, 1.0) - np.maximum(x - r, 0.0), 0.0, None)
    side = np.clip(np.minimum(x + r[..., None], 1.0) - np.maximum(x - r[..., None], 0.0), 0.0, None)
    return np.prod(side, axis=-1)


def _distance(space: DyadicSpace, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d = np.abs(x - y)
    return d if space.dim == 1 else np.max(d, axis=-1)


def _kernel(space: DyadicSpace, x: np.ndarray, y: np.ndarray, s: float) -> np.ndarray:
    r = _distance(space, x, y)
    total = ball_mass(space, x, r) + ball_mass(space, y, r)
    with np.errstate(divide="ignore"):
        out = np.where(r > 0, total ** (-s), np.inf)
    return out


def kernel_K(space: DyadicSpace, x, y, s: float) -> float:
    """``K(x, y) = [m(B(x,ρ)) + m(B(y,ρ))]^{-s}`` with ``ρ = ρ(x, y)``; ``+∞`` on the diagonal."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    for pt in (x, y):
        _exact_point(space, pt)
    xa = np.asarray(x, dtype=float).reshape(space.dim) if space.dim > 1 else np.asarray(float(np.ravel(x)[0]))
    ya = np.asarray(y, dtype=float).reshape(space.dim) if space.dim > 1 else np.asarray(float(np.ravel(y)[0]))
    return float(_kernel(space, xa, ya, s))


# measures on the space --------------------------------------------------------

@dataclass(frozen=True)
class SpaceMeasure:
    """Finite measure on ``X``: uniform pieces on cells plus atoms.

    ``cells`` holds ``(node, mass)`` pairs, ``atoms`` holds
    ``(point, mass)`` pairs with points as tuples of Fractions.
    """

    cells: tuple = ()
    atoms: tuple = ()

    @property
    def total(self) -> float:
        return float(sum(m for _, m in self.cells) + sum(m for _, m in self.atoms))

    def scaled(self, c: float) -> "SpaceMeasure":
        return SpaceMeasure(tuple((v, m * c) for v, m in self.cells),
                            tuple((x, m * c) for x, m in self.atoms))


def lebesgue(space: DyadicSpace) -> SpaceMeasure:
    """The space's own measure ``m`` as one uniform piece on the root cell."""
    return SpaceMeasure(cells=((0, 1.0),))


def _cell_masses(space: DyadicSpace, omega: SpaceMeasure, L: int) -> np.ndarray:
    """Masses of the level-``L`` cells for the cell-uniform part of ``omega``."""
    out = np.zeros(space.branching**L)
    for node, mass in omega.cells:
        k, j = space.locate(node)
        if k > L:
            raise ValueError(f"resolution {L} coarser than a support cell at level {k}")
        span = space.branching ** (L - k)
        out[j * span:(j + 1) * span] += mass / span
    return out


def _quadrature_nodes(space: DyadicSpace, L: int) -> np.ndarray:
    """Sample point per level-``L`` cell: the centre, or ``lo + w/4`` (a Cantor point)."""
    lo = space.cell_lowers(L)
    w = space.width(L)
    pos = 0.25 if space.kind == "cantor" else 0.5
    pts = lo + pos * w
    return pts[:, 0] if space.dim == 1 else pts


def _children_rel(space: DyadicSpace):
    """Child cells of the unit cell as ``(lower corner, width, mass fraction)``."""
    if space.kind == "cantor":
        return [(np.array([0.0]), 1 / 3, 0.5), (np.array([2 / 3]), 1 / 3, 0.5)]
    Q = space.dim
    out = []
    for c in range(2**Q):
        lo = np.array([0.5 * ((c >> i) & 1) for i in range(Q)])
        out.append((lo, 0.5, 1.0 / 2**Q))
    return out


def _refinement_offsets(space: DyadicSpace, z: np.ndarray, levels: int):
    """Quadrature for ``∫_cell f(y) dm(y) / m(cell)`` around a singular point ``z``.

    Works in unit-cell coordinates.  Sub-cells whose closure avoids ``z``
    are evaluated at their sample point; the rest are split again.
    Returns per-level lists of ``(offset from z, weight)``, plus the
    offsets of the final unresolved cells.
    """
    kids = _children_rel(space)
    pos = 0.25 if space.kind == "cantor" else 0.5
    frontier = [(np.zeros(space.dim), 1.0, 1.0)]
    per_level = []
    for _ in range(levels):
        offs, wts, nxt = [], [], []
        for lo, w, m in frontier:
            for clo, cw, cm in kids:
                a = lo + clo * w
                b = w * cw
                if np.all(a - 1e-15 <= z) and np.all(z <= a + b + 1e-15):
                    nxt.append((a, b, m * cm))
                else:
                    offs.append(a + pos * b - z)
                    wts.append(m * cm)
        per_level.append((np.array(offs), np.array(wts)))
        frontier = nxt
        if not frontier:
            break
    rest = [(lo + pos * w - z, m) for lo, w, m in frontier]
    return per_level, rest


def _geometric_tail(terms: list[np.ndarray]) -> np.ndarray:
    """Extrapolated remainder of a series from its last two two-level blocks."""
    if len(terms) < 4:
        return np.zeros_like(terms[-1])
    last = terms[-1] + terms[-2]
    prev = terms[-3] + terms[-4]
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(prev > 0, last / prev, 0.0)
    rho = np.clip(rho, 0.0, 0.99)
    return last * rho / (1.0 - rho)


def _diagonal_average(space: DyadicSpace, nodes: np.ndarray, w: float, s: float,
                      levels: int = 22) -> np.ndarray:
    """Mean of ``K(x_i, ·)`` over the cell of ``x_i`` for every sample point."""
    z = np.full(space.dim, 0.25 if space.kind == "cantor" else 0.5)
    per_level, _ = _refinement_offsets(space, z, levels)
    terms = []
    for offs, wts in per_level:
        if len(wts) == 0:
            terms.append(np.zeros(len(nodes)))
            continue
        if space.dim == 1:
            y = nodes[:, None] + offs[None, :, 0] * w
            x = nodes[:, None]
        else:
            y = nodes[:, None, :] + offs[None, :, :] * w
            x = nodes[:, None, :]
        terms.append(_kernel(space, x, y, s) @ wts)
    return np.sum(terms, axis=0) + _geometric_tail(terms)


def _min_level(space: DyadicSpace, omega: SpaceMeasure) -> int:
    lev = [space.locate(v)[0] for v, _ in omega.cells]
    return max(lev, default=0)


def continuous_energy(space: DyadicSpace, omega, s: float, p: float,
                      resolution: int, truncate: bool = False) -> float:
    """``E_X(ω) = ∫_X (Kω)^{p'} dm`` by cell quadrature at level ``resolution``.

    Parameters
    ----------
    omega : SpaceMeasure, TreeMeasure on ``space.tree``, or list of (point, mass)
        Cell-uniform or atomic (not both).
    resolution : int
        Quadrature level ``L``; it must exceed the deepest support cell.
    truncate : bool
        For atomic measures, skip the refinement around atoms.  Used when the
        energy diverges and only resolution-limited values are compared.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    q = conjugate(p)
    omega = _as_space_measure(space, omega)
    if omega.cells and omega.atoms:
        raise ValueError("mixed cell and atomic measures not supported")
    if omega.total == 0:
        return 0.0
    L = int(resolution)
    if L < _min_level(space, omega) + 1:
        raise ValueError(f"resolution {L} too coarse for support at level {_min_level(space, omega)}")
    n_cells = space.branching**L
    if n_cells > 1 << 14:
        raise ValueError(f"resolution {L} gives {n_cells} quadrature cells (limit 16384)")
    nodes = _quadrature_nodes(space, L)
    w = space.width(L)
    mL = float(space.mass_at_level(L))
    if omega.cells:
        cm = _cell_masses(space, omega, L)
        if space.dim == 1:
            K = _kernel(space, nodes[:, None], nodes[None, :], s)
        else:
            K = _kernel(space, nodes[:, None, :], nodes[None, :, :], s)
        np.fill_diagonal(K, 0.0)
        F = K @ cm + cm * _diagonal_average(space, nodes, w, s)
        return float(mL * np.sum(F**q))
    pts = np.array([[float(c) for c in x] for x, _ in omega.atoms])
    am = np.array([m for _, m in omega.atoms])
    if space.dim == 1:
        pts = pts[:, 0]

    def field(x):
        if space.dim == 1:
            return _kernel(space, x[..., None], pts, s) @ am
        return _kernel(space, x[..., None, :], pts, s) @ am

    if truncate:
        return float(mL * np.sum(field(nodes) ** q))
    # cells holding an atom get a quadrature refined around that atom
    special: dict[int, np.ndarray] = {}
    for x, _ in omega.atoms:
        for j in _closed_cells_containing(space, x, L):
            special.setdefault(j, np.array([float(c) for c in x]))
    plain = np.ones(n_cells, dtype=bool)
    plain[list(special)] = False
    total = mL * float(np.sum(field(nodes[plain]) ** q))
    for j, xf in special.items():
        lo = space.lower_ints(L, j)[0] / float(space.base**L)
        per_level, _ = _refinement_offsets(space, (xf - lo) / w, 22)
        terms = []
        for offs, wts in per_level:
            if len(wts) == 0:
                terms.append(np.zeros(()))
                continue
            y = xf + offs * w if space.dim > 1 else xf[0] + offs[:, 0] * w
            terms.append(np.asarray(mL * (field(y) ** q) @ wts))
        total += float(np.sum(terms)) + float(_geometric_tail(terms))
    return float(total)


def _as_space_measure(space: DyadicSpace, omega) -> SpaceMeasure:
    if isinstance(omega, SpaceMeasure):
        return omega
    if isinstance(omega, TreeMeasure):
        if omega.tree is not space.tree and omega.tree.n_nodes != space.tree.n_nodes:
            raise ValueError("measure lives on a different tree")
        return push_forward(space, omega)
    atoms = []
    for x, m in omega:
        pt, _ = _exact_point(space, x)
        if m < 0:
            raise ValueError("negative mass")
        atoms.append((pt, float(m)))
    return SpaceMeasure(atoms=tuple(atoms))


# sets ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SetDescriptor:
    """A compact set: boxes, an attractor of increasing affine maps, or points.

    ``boxes`` is a tuple of boxes, each a tuple of ``(lo, hi)`` per coordinate.
    ``maps`` is a tuple of ``(ratio, translation)`` pairs.
    ``points`` is a tuple of coordinate tuples.
    """

    kind: str
    boxes: tuple = ()
    maps: tuple = ()
    points: tuple = ()

    def __post_init__(self):
        if self.kind not in ("boxes", "ifs", "points"):
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.kind == "boxes":
            if not self.boxes:
                raise ValueError("empty descriptor")
            for box in self.boxes:
                for lo, hi in box:
                    if not 0 <= lo <= hi <= 1:
                        raise ValueError(f"box side [{lo}, {hi}] not inside [0,1]")
        elif self.kind == "ifs":
            if not self.maps:
                raise ValueError("empty descriptor")
            for r, t in self.maps:
                if not 0 < r < 1:
                    raise ValueError(f"contraction ratio {r} not in (0,1)")
                if t < 0 or r + t > 1:
                    raise ValueError("IFS map does not send [0,1] into itself")
        elif not self.points:
            raise ValueError("empty descriptor")

    @property
    def hull(self) -> tuple[Fraction, Fraction]:
        """Smallest interval containing the attractor (fixed points of the extreme maps)."""
        fixed = [t / (1 - r) for r, t in self.maps]
        return min(fixed), max(fixed)


def parse_set_descriptor(text: str, dim: int = 1) -> SetDescriptor:
    """Parse ``interval a b ...``, ``ifs r1 t1 r2 t2 ...`` or ``points x1 x2 ...``.

    Numbers may be decimals or fractions like ``1/3``.  In ``dim``
    dimensions each box takes ``2*dim`` numbers (``lo hi`` per axis) and
    each point ``dim`` numbers.
    """
    tokens = str(text).split()
    if not tokens:
        raise ValueError("empty descriptor")
    head, rest = tokens[0].lower(), tokens[1:]
    try:
        vals = [Fraction(t) for t in rest]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad number in set descriptor: {exc}") from None
    if not vals:
        raise ValueError("empty descriptor")
    if head in ("interval", "box", "boxes"):
        group = 2 * dim
        if len(vals) % group:
            raise ValueError(f"boxes need multiples of {group} numbers")
        boxes = []
        for i in range(0, len(vals), group):
            chunk = vals[i:i + group]
            boxes.append(tuple((chunk[2 * a], chunk[2 * a + 1]) for a in range(dim)))
        for box in boxes:
            for lo, hi in box:
                if lo > hi:
                    raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
        return SetDescriptor("boxes", boxes=tuple(boxes))
    if head == "ifs":
        if dim != 1:
            raise ValueError("IFS sets are supported on one-dimensional spaces only")
        if len(vals) % 2:
            raise ValueError("ifs needs ratio/translation pairs")
        return SetDescriptor("ifs", maps=tuple(zip(vals[::2], vals[1::2])))
    if head in ("points", "point"):
        if len(vals) % dim:
            raise ValueError(f"points need multiples of {dim} numbers")
        return SetDescriptor("points", points=tuple(tuple(vals[i:i + dim]) for i in range(0, len(vals), dim)))
    raise ValueError(f"unknown set descriptor {head!r}")


CANTOR_IFS = SetDescriptor("ifs", maps=((Fraction(1, 3), Fraction(0)), (Fraction(1, 3), Fraction(2, 3))))


def _attractor_meets(maps, lo: Fraction, hi: Fraction, closed: bool, limit: int = 200) -> bool:
    """Does the attractor meet ``[lo, hi]`` (or ``(lo, hi)`` when not ``closed``)?

    Images of the hull have attractor points at both ends, so a piece is
    decided as soon as an endpoint lands inside; only pieces straddling
    the whole window are split further.
    """
    A = min(t / (1 - r) for r, t in maps)
    B = max(t / (1 - r) for r, t in maps)

    def inside(x):
        return lo <= x <= hi if closed else lo < x < hi

    # each piece is g([A, B]) for a composition g(x) = a x + b of the maps
    stack = [(Fraction(1), Fraction(0), 0)]
    while stack:
        a, b, d = stack.pop()
        u, v = a * A + b, a * B + b
        if v < lo or u > hi or (not closed and (v <= lo or u >= hi)):
            continue
        if inside(u) or inside(v):
            return True
        if d >= limit:
            return True
        for r, t in maps:
            stack.append((a * r, a * t + b, d + 1))
    return False


def _side_indices(lo: Fraction, hi: Fraction, k: int, base: int) -> list[int]:
    """Level-``k`` grid indices of one axis kept by the discretization rule.

    A nondegenerate side keeps cells whose open interior meets it; these
    closed cells already cover the side.  A degenerate side keeps every
    closed cell containing the point.
    """
    n = base**k
    if lo == hi:
        x = lo * n
        if x.denominator == 1:
            j = int(x)
            return [i for i in (j - 1, j) if 0 <= i < n]
        return [int(math.floor(x))]
    j0 = int(math.floor(lo * n))
    j1 = int(math.ceil(hi * n)) - 1
    return list(range(max(j0, 0), min(j1, n - 1) + 1))


def _closed_cells_containing(space: DyadicSpace, x: Sequence[Fraction], k: int) -> list[int]:
    """Level-``k`` cell indices whose closed cell contains the exact point ``x``."""
    if space.kind == "cantor":
        return [_cantor_cell_of(x[0], k)]
    axes = [_side_indices(c, c, k, 2) for c in x]
    return _product_indices(space, axes, k)


def _cantor_cell_of(x: Fraction, k: int) -> int:
    j = 0
    for _ in range(k):
        if x <= Fraction(1, 3):
            j, x = 2 * j, 3 * x
        else:
            j, x = 2 * j + 1, 3 * x - 2
    return j


def _product_indices(space: DyadicSpace, axes: list[list[int]], k: int) -> list[int]:
    grids = np.meshgrid(*[np.asarray(a, dtype=np.int64) for a in axes], indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    if coords.size == 0:
        return []
    return sorted(set(space.index_of(k, coords).tolist()))


def discretize_set(space: DyadicSpace, sd: SetDescriptor | str, depth: int) -> BoundarySet:
    """Antichain of level-``depth`` cells representing a compact set.

    On the interval and cube a cell is kept when its open interior meets
    the set; points of the set not covered that way (isolated points,
    degenerate sides) contribute every closed cell containing them.  On the
    Cantor set, whose cells are disjoint, a cell is kept when it meets the set.
    """
    if isinstance(sd, str):
        sd = parse_set_descriptor(sd, space.dim)
    if not 0 <= depth <= space.depth:
        raise ValueError(f"depth {depth} outside 0..{space.depth}")
    k = int(depth)
    base = space.base
    n = base**k
    if space.kind == "cantor":
        return _discretize_cantor(space, sd, k)
    keep: set[int] = set()
    if sd.kind == "boxes":
        for box in sd.boxes:
            if len(box) != space.dim:
                raise ValueError(f"box has {len(box)} sides, space has dimension {space.dim}")
            keep.update(_product_indices(space, [_side_indices(lo, hi, k, base) for lo, hi in box], k))
    elif sd.kind == "points":
        for x in sd.points:
            pt, _ = _exact_point(space, x)
            keep.update(_closed_cells_containing(space, pt, k))
    else:
        if space.dim != 1:
            raise ValueError("IFS sets are supported on one-dimensional spaces only")
        grid = [Fraction(j, n) for j in range(n + 1)]
        hits = [_attractor_meets(sd.maps, grid[j], grid[j + 1], closed=False) for j in range(n)]
        keep.update(j for j in range(n) if hits[j])
        for j in range(n + 1):
            left_ok = j > 0 and hits[j - 1]
            right_ok = j < n and hits[j]
            if not (left_ok or right_ok) and _attractor_meets(sd.maps, grid[j], grid[j], closed=True):
                keep.update(i for i in (j - 1, j) if 0 <= i < n)
    base_node = int(space.tree.level_bounds[k])
    return BoundarySet(tuple(sorted(base_node + j for j in keep)))


def _discretize_cantor(space: DyadicSpace, sd: SetDescriptor, k: int) -> BoundarySet:
    n = 2**k
    lows = space.lower_ints(k)[:, 0]
    den = 3**k
    keep = []
    for j in range(n):
        lo, hi = Fraction(int(lows[j]), den), Fraction(int(lows[j]) + 1, den)
        if sd.kind == "boxes":
            hit = any(_attractor_meets(CANTOR_IFS.maps, max(a, lo), min(b, hi), closed=True)
                      for ((a, b),) in sd.boxes if max(a, lo) <= min(b, hi))
        elif sd.kind == "points":
            hit = any(lo <= _exact_point(space, x)[0][0] <= hi for x in sd.points)
        else:
            hit = _attractor_meets(sd.maps, lo, hi, closed=True)
        if hit:
            keep.append(j)
    base_node = int(space.tree.level_bounds[k])
    return BoundarySet(tuple(base_node + j for j in keep))


# the boundary map and measure transport ------------------------------------

def _child_maps(space: DyadicSpace):
    """Affine maps ``x ↦ (x + t)/base`` per child digit, per coordinate."""
    if space.kind == "cantor":
        return {0: (Fraction(0),), 1: (Fraction(2),)}
    Q = space.dim
    return {c: tuple(Fraction((c >> i) & 1) for i in range(Q)) for c in range(2**Q)}


def lambda_map(space: DyadicSpace, ray, continuation: str = "left",
               period: Sequence[int] | None = None) -> tuple[Fraction, ...]:
    """Point ``∩ closed cells`` along a ray, exactly.

    Parameters
    ----------
    ray : sequence of child digits, or a node id (int)
        Finite prefix of the ray.
    continuation : {"left", "right"}
        Completion of a finite prefix: always the first child or always the
        last child.  Ignored when ``period`` is given.
    period : sequence of digits, optional
        Block repeated forever after the prefix.
    """
    if isinstance(ray, (int, np.integer)):
        digits = _digits_of_node(space, int(ray))
    else:
        digits = [int(d) for d in ray]
    maps = _child_maps(space)
    base = space.base
    for d in list(digits) + list(period or ()):
        if d not in maps:
            raise ValueError(f"digit {d} not a child index")
    if period:
        block = list(period)
    elif continuation in ("left", "all-left"):
        block = [0]
    elif continuation in ("right", "all-right"):
        block = [space.branching - 1]
    else:
        raise ValueError("continuation must be 'left' or 'right'")
    # fixed point of the block composition x = a x + t (per coordinate)
    # the first digit of the block is the outermost map
    a = Fraction(1, base ** len(block))
    t = [Fraction(0)] * space.dim
    for d in reversed(block):
        t = [(ti + ci) / base for ti, ci in zip(t, maps[d])]
    x = [ti / (1 - a) for ti in t]
    for d in reversed(digits):
        x = [(xi + ci) / base for xi, ci in zip(x, maps[d])]
    return tuple(x)


def _digits_of_node(space: DyadicSpace, node: int) -> list[int]:
    tree = space.tree
    path = tree.path(node)
    out = []
    for v in path[1:]:
        par = int(tree.parent[v])
        out.append(int(v) - tree.children(par).start)
    return out


def push_forward(space: DyadicSpace, nu: TreeMeasure, ray_atoms=()) -> SpaceMeasure:
    """``Λ_*ν``: antichain masses become uniform cell masses.

    ``ray_atoms`` holds ``(prefix, continuation, mass)`` triples for mass
    sitting on completed rays; each becomes an atom at :func:`lambda_map`.
    """
    cells = tuple((int(v), float(m)) for v, m in zip(nu.support, nu.mass) if m > 0)
    atoms = tuple((lambda_map(space, pre, cont), float(m)) for pre, cont, m in ray_atoms if m > 0)
    return SpaceMeasure(cells, atoms)


def pull_back_atomic(space: DyadicSpace, atoms, depth: int) -> TreeMeasure:
    """``Λ^*ω`` at level ``depth``: each atom split equally over the closed cells holding it."""
    if not 0 <= depth <= space.depth:
        raise ValueError(f"depth {depth} outside 0..{space.depth}")
    acc: dict[int, float] = {}
    base_node = int(space.tree.level_bounds[depth])
    for x, m in atoms:
        pt, _ = _exact_point(space, x)
        cells = _closed_cells_containing(space, pt, depth)
        for j in cells:
            acc[base_node + j] = acc.get(base_node + j, 0.0) + float(m) / len(cells)
    return measure_from_masses(space.tree, sorted(acc.items()))


def pull_back_rays(space: DyadicSpace, atoms) -> list[tuple[list[int], str, float]]:
    """``Λ^*ω`` for atoms as ray atoms ``(prefix, continuation, mass)``.

    Every preimage ray of a point either leaves the dyadic grid (one ray,
    resolved to ``space.depth`` levels and completed on the left) or ends
    in a constant digit tail; dyadic corners are enumerated exactly.
    """
    out = []
    for x, m in atoms:
        pt, _ = _exact_point(space, x)
        rays = _preimage_rays(space, pt)
        for pre, cont in rays:
            out.append((pre, cont, float(m) / len(rays)))
    return out


def _preimage_rays(space: DyadicSpace, pt) -> list[tuple[list[int], str]]:
    if space.kind == "cantor":
        digits, x = [], pt[0]
        for _ in range(space.depth):
            if x == 0:
                return [(digits, "left")]
            if x == 1:
                return [(digits, "right")]
            if x <= Fraction(1, 3):
                digits.append(0)
                x = 3 * x
            else:
                digits.append(1)
                x = 3 * x - 2
        return [(digits, "left")]
    if space.dim != 1:
        raise ValueError("ray preimages are enumerated on the interval and Cantor kinds")
    x = pt[0]
    for k in range(space.depth + 1):
        y = x * 2**k
        if y.denominator == 1:
            j = int(y)
            rays = []
            if j > 0:
                rays.append((_bits(j - 1, k), "right"))
            if j < 2**k:
                rays.append((_bits(j, k), "left"))
            return rays
    return [(_bits(int(math.floor(x * 2**space.depth)), space.depth), "left")]


def _bits(j: int, k: int) -> list[int]:
    return [(j >> (k - 1 - i)) & 1 for i in range(k)]


# graph neighbourhoods ---------------------------------------------------------

def graph_predecessor_set(space: DyadicSpace, x, depth: int) -> set[int]:
    """Cells within graph distance one of the closed cells containing ``x``.

    Per level ``k ≤ depth``: every closed cell containing ``x``, plus every
    level-``k`` cell at distance at most ``δ^k`` from one of them.
    """
    pt, _ = _exact_point(space, x)
    out: set[int] = set()
    for k in range(int(depth) + 1):
        own = _closed_cells_containing(space, pt, k)
        base_node = int(space.tree.level_bounds[k])
        out.update(base_node + j for j in _neighbours(space, own, k))
    return out


def _neighbours(space: DyadicSpace, cells: list[int], k: int) -> set[int]:
    if space.kind == "cantor":
        # integer units of 3^-k: cells have width 1 and the threshold is 1
        lows = space.lower_ints(k)[:, 0]
        keep = set()
        for j in cells:
            gap = np.maximum(lows - (lows[j] + 1), lows[j] - (lows + 1))
            keep.update(np.flatnonzero(gap <= 1).tolist())
        return keep
    n = 2**k
    coords = space.lower_ints(k, np.asarray(cells, dtype=np.int64))
    keep = set()
    # closed cells j, j' of side 1 are within distance 1 iff |j - j'| <= 2 per axis
    shifts = np.arange(-2, 3)
    grids = np.meshgrid(*([shifts] * space.dim), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)
    for c in coords:
        cand = c[None, :] + offs
        ok = np.all((cand >= 0) & (cand < n), axis=1)
        keep.update(space.index_of(k, cand[ok]).tolist())
    return keep


# ball capacities --------------------------------------------------------------

@dataclass(frozen=True)
class BallEstimate:
    value: float
    level: int
    regime: str


def ball_capacity_estimate(space: DyadicSpace, r: float, s: float, p: float) -> BallEstimate:
    """Comparison value for the capacity of a ball of radius ``r``.

    With ``k = round(log_{1/δ}(1/r))``: ``max(k,1)^{1-p}`` when ``s = 1/p'``,
    otherwise ``δ^{Q k p (s - 1/p')}``.  For ``s < 1/p'`` points have positive
    capacity and the regime is flagged.
    """
    if not 0.0 < r <= 1.0:
        raise ValueError(f"radius must lie in (0,1], got {r}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    q = conjugate(p)
    k = int(round(math.log(1.0 / r) / math.log(1.0 / space.delta)))
    crit = 1.0 / q
    if math.isclose(s, crit, rel_tol=0.0, abs_tol=1e-12):
        return BallEstimate(float(max(k, 1)) ** (1.0 - p), k, "logarithmic")
    value = space.delta ** (space.Q * k * p * (s - crit))
    regime = "positive point capacity" if s < crit else "power"
    return BallEstimate(value, k, regime)

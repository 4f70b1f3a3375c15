"""Finite weighted rooted trees, boundary antichains and measures on them.

Nodes are stored in breadth-first order, so every level occupies a
contiguous slice of the node arrays and every parent precedes its
children.  All level-by-level passes in the package rely on that layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "WeightedTree",
    "BoundarySet",
    "TreeMeasure",
    "build_tree",
    "homogeneous_tree",
    "chain_tree",
    "tree_from_parents",
    "conjugate",
    "d_pi",
    "confluent",
    "normalize_antichain",
    "measure_from_masses",
    "serialize_tree",
    "parse_tree",
]

MAX_NODES = 1 << 23


def conjugate(p: float) -> float:
    """Hölder conjugate ``p' = p / (p - 1)``; raises for ``p <= 1``."""
    p = float(p)
    if not p > 1.0:
        raise ValueError(f"exponent p must exceed 1, got {p}")
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class WeightedTree:
    """Rooted tree with a positive weight ``pi`` on every node.

    Construct through :func:`build_tree` or :func:`tree_from_parents`,
    which put the nodes in breadth-first order.

    Attributes
    ----------
    parent : ndarray of int
        Parent index of each node, ``-1`` for the root (node 0).
    weight : ndarray of float
        Positive weight of each node.
    delta : float or None
        Optional ratio used by :meth:`rho` (the boundary metric).
    labels : tuple of str
        External node ids, used by the file format.
    """

    parent: np.ndarray
    weight: np.ndarray
    delta: float | None = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        parent = np.asarray(self.parent, dtype=np.int64)
        weight = np.asarray(self.weight, dtype=float)
        n = parent.shape[0]
        if n == 0:
            raise ValueError("a tree needs at least one node")
        if weight.shape != (n,):
            raise ValueError("weight array does not match node count")
        if parent[0] != -1 or np.any(parent[1:] < 0):
            raise ValueError("node 0 must be the unique root")
        if np.any(parent[1:] >= np.arange(1, n)):
            raise ValueError("nodes must be ordered parents-first")
        if not np.all(np.isfinite(weight)) or np.any(weight <= 0):
            raise ValueError("nonpositive weight")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if np.any(np.diff(parent[1:]) < 0):
            raise ValueError("nodes must be in breadth-first order")
        depth = _depths(parent)
        parent.setflags(write=False)
        weight.setflags(write=False)
        depth.setflags(write=False)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "_depth", depth)
        if self.labels:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != n or len(set(labels)) != n:
                raise ValueError("node labels must be unique, one per node")
            object.__setattr__(self, "labels", labels)

    @cached_property
    def node_labels(self) -> tuple[str, ...]:
        """External ids; defaults to the breadth-first index."""
        return self.labels or tuple(str(i) for i in range(self.n_nodes))


    @property
    def n_nodes(self) -> int:
        return self.parent.shape[0]

    def __len__(self) -> int:
        return self.n_nodes

    @property
    def depth(self) -> np.ndarray:
        return self._depth

    @property
    def height(self) -> int:
        return int(self._depth[-1])

    @cached_property
    def level_bounds(self) -> np.ndarray:
        """``level_bounds[k]:level_bounds[k+1]`` is the slice of level ``k``."""
        counts = np.bincount(self._depth)
        return np.concatenate([[0], np.cumsum(counts)])

    def level(self, k: int) -> slice:
        b = self.level_bounds
        return slice(int(b[k]), int(b[k + 1]))

    @cached_property
    def n_children(self) -> np.ndarray:
        out = np.bincount(self.parent[1:], minlength=self.n_nodes)
        out.setflags(write=False)
        return out

    @cached_property
    def _child_ptr(self) -> np.ndarray:
        # BFS order makes every child list a contiguous run
        return np.concatenate([[1], 1 + np.cumsum(self.n_children)])

    def children(self, v: int) -> range:
        self.check_node(v)
        ptr = self._child_ptr
        return range(int(ptr[v]), int(ptr[v + 1]))

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.n_children == 0)

    @property
    def root(self) -> int:
        return 0

    def check_node(self, v) -> int:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.n_nodes:
            raise IndexError(f"invalid node id {v!r}")
        return int(v)

    def path(self, v: int) -> np.ndarray:
        """Nodes of the geodesic ``[o, v]``, root first."""
        v = self.check_node(v)
        out = []
        while v >= 0:
            out.append(v)
            v = int(self.parent[v])
        return np.array(out[::-1], dtype=np.int64)

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when ``a`` lies on ``[o, b]`` (``a == b`` included)."""
        a, b = self.check_node(a), self.check_node(b)
        da = self._depth[a]
        while self._depth[b] > da:
            b = int(self.parent[b])
        return a == b

    def rho(self, a: int, b: int) -> float:
        """Gromov-type distance ``2δ/(1-δ) [δ^{d(a∧b)} - (δ^{d(a)} + δ^{d(b)})/2]``."""
        if self.delta is None:
            raise ValueError("tree has no delta; metric queries unavailable")
        d = self.delta
        c = confluent(self, a, b)
        da, db, dc = (int(self._depth[x]) for x in (a, b, c))
        return 2 * d / (1 - d) * (d**dc - 0.5 * (d**da + d**db))

    def with_weights(self, weight) -> "WeightedTree":
        return WeightedTree(self.parent, np.asarray(weight, dtype=float), self.delta, self.labels)

    # level passes -------------------------------------------------------

    def subtree_sum(self, values) -> np.ndarray:
        """Sum of ``values`` over descendants-or-self of every node (adjoint ``I*``)."""
        out = np.array(values, dtype=float, copy=True)
        if out.shape != (self.n_nodes,):
            raise ValueError("node function has wrong length")
        b = self.level_bounds
        for k in range(self.height, 0, -1):
            lo, hi = int(b[k]), int(b[k + 1])
            plo = int(b[k - 1])
            out[plo:lo] += np.bincount(self.parent[lo:hi] - plo, weights=out[lo:hi],
                                       minlength=lo - plo)
        return out

    def path_sum(self, values) -> np.ndarray:
        """Sum of ``values`` along ``[o, v]`` for every node ``v`` (Hardy ``I``)."""
        out = np.array(values, dtype=float, copy=True)
        if out.shape != (self.n_nodes,):
            raise ValueError("node function has wrong length")
        b = self.level_bounds
        for k in range(1, self.height + 1):
            lo, hi = int(b[k]), int(b[k + 1])
            out[lo:hi] += out[self.parent[lo:hi]]
        return out

    def path_max(self, values) -> np.ndarray:
        out = np.array(values, dtype=float, copy=True)
        b = self.level_bounds
        for k in range(1, self.height + 1):
            lo, hi = int(b[k]), int(b[k + 1])
            np.maximum(out[lo:hi], out[self.parent[lo:hi]], out=out[lo:hi])
        return out

    def below_marked(self, marked) -> np.ndarray:
        """True at nodes having an ancestor-or-self in ``marked``."""
        out = np.array(marked, dtype=bool, copy=True)
        b = self.level_bounds
        for k in range(1, self.height + 1):
            lo, hi = int(b[k]), int(b[k + 1])
            out[lo:hi] |= out[self.parent[lo:hi]]
        return out

    def above_marked(self, marked) -> np.ndarray:
        """True at nodes having a descendant-or-self in ``marked``."""
        return self.subtree_sum(np.asarray(marked, dtype=float)) > 0


def _depths(parent: np.ndarray) -> np.ndarray:
    n = parent.shape[0]
    depth = np.zeros(n, dtype=np.int64)
    if n < 4096:
        for v in range(1, n):
            depth[v] = depth[parent[v]] + 1
        return depth
    # parents-first and nondecreasing parents: levels are contiguous runs
    hi, k = 1, 0
    while hi < n:
        stop = hi + int(np.searchsorted(parent[hi:], hi, side="left"))
        k += 1
        depth[hi:stop] = k
        hi = stop
    return depth


def tree_from_parents(parents: Sequence[int | None], weights: Sequence[float],
                      delta: float | None = None,
                      labels: Sequence[str] | None = None) -> WeightedTree:
    """Build a tree from an arbitrary parent list (``None`` or ``-1`` marks the root).

    Nodes are renumbered breadth-first; children keep their order of
    appearance in the input.
    """
    n = len(parents)
    if len(weights) != n:
        raise ValueError("one weight per node required")
    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = [str(x) for x in labels]
    roots = [i for i, q in enumerate(parents) if q is None or q == -1]
    if len(roots) != 1:
        raise ValueError(f"expected exactly one root, found {len(roots)}")
    kids: list[list[int]] = [[] for _ in range(n)]
    for i, q in enumerate(parents):
        if q is None or q == -1:
            continue
        if not 0 <= q < n or q == i:
            raise ValueError(f"orphan node {labels[i]!r}: parent {q!r} does not exist")
        kids[q].append(i)
    order = [roots[0]]
    for v in order:
        order.extend(kids[v])
        if len(order) > n:
            raise ValueError("cycle in parent relation")
    if len(order) != n:
        raise ValueError("tree is disconnected or has a cycle")
    new = np.empty(n, dtype=np.int64)
    new[order] = np.arange(n)
    par = np.array([-1 if parents[v] is None or parents[v] == -1 else new[parents[v]]
                    for v in order], dtype=np.int64)
    w = np.array([weights[v] for v in order], dtype=float)
    return WeightedTree(par, w, delta, tuple(labels[v] for v in order))


def homogeneous_tree(branching: int, height: int, weight=1.0,
                     delta: float | None = None) -> WeightedTree:
    """Complete ``branching``-ary tree of the given height.

    ``weight`` is a constant or a callable of the depth array.
    """
    if int(branching) != branching or branching < 1:
        raise ValueError(f"branching must be an integer >= 1, got {branching}")
    if height < 0:
        raise ValueError("height must be >= 0")
    b, h = int(branching), int(height)
    sizes = [b**k for k in range(h + 1)]
    n = sum(sizes)
    if n > MAX_NODES:
        raise ValueError(f"tree with {n} nodes exceeds the node-count guard {MAX_NODES}")
    parent = np.empty(n, dtype=np.int64)
    depth = np.empty(n, dtype=np.int64)
    parent[0] = -1
    depth[0] = 0
    start = 1
    pstart = 0
    for k in range(1, h + 1):
        m = sizes[k]
        parent[start:start + m] = pstart + np.arange(m) // b
        depth[start:start + m] = k
        pstart = start
        start += m
    depth[0] = 0
    w = weight(depth) if callable(weight) else np.full(n, float(weight))
    return WeightedTree(parent, np.asarray(w, dtype=float), delta)


def chain_tree(height: int, weight=1.0) -> WeightedTree:
    return homogeneous_tree(1, height, weight)


def build_tree(desc) -> WeightedTree:
    """Build a tree from a description.

    Accepted forms: ``("homogeneous", b, h[, weight])``,
    ``("chain", h[, weight])``, ``("explicit", parents, weights)``, a
    mapping with the same keys, or a tree-file text (see :func:`parse_tree`).
    """
    if isinstance(desc, WeightedTree):
        return desc
    if isinstance(desc, str):
        return parse_tree(desc)
    if isinstance(desc, dict):
        kind = desc.get("kind")
        if kind == "homogeneous":
            return homogeneous_tree(desc["branching"], desc["height"], desc.get("weight", 1.0),
                                    desc.get("delta"))
        if kind == "chain":
            return chain_tree(desc["height"], desc.get("weight", 1.0))
        if kind == "explicit":
            return tree_from_parents(desc["parents"], desc["weights"], desc.get("delta"),
                                     desc.get("labels"))
        raise ValueError(f"unknown tree description kind {kind!r}")
    kind, *args = desc
    if kind == "homogeneous":
        return homogeneous_tree(*args)
    if kind == "chain":
        return chain_tree(*args)
    if kind == "explicit":
        return tree_from_parents(*args)
    raise ValueError(f"unknown tree description kind {kind!r}")


def d_pi(tree: WeightedTree, v: int, p: float) -> float:
    """Weighted distance ``Σ_{y∈[o,v]} π(y)^{1-p'}`` (both endpoints included)."""
    q = conjugate(p)
    w = tree.weight[tree.path(v)]
    return float(np.sum(w ** (1.0 - q)))


def d_pi_all(tree: WeightedTree, p: float) -> np.ndarray:
    return tree.path_sum(tree.weight ** (1.0 - conjugate(p)))


def confluent(tree: WeightedTree, a: int, b: int) -> int:
    """Deepest common ancestor of ``a`` and ``b``."""
    a, b = tree.check_node(a), tree.check_node(b)
    depth, parent = tree.depth, tree.parent
    while depth[a] > depth[b]:
        a = int(parent[a])
    while depth[b] > depth[a]:
        b = int(parent[b])
    while a != b:
        a, b = int(parent[a]), int(parent[b])
    return a


@dataclass(frozen=True)
class BoundarySet:
    """Antichain of nodes standing for the union of their boundary cylinders."""

    nodes: tuple[int, ...] = ()

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.nodes, dtype=np.int64)


def _indicator(tree: WeightedTree, nodes: Iterable[int]) -> np.ndarray:
    mark = np.zeros(tree.n_nodes, dtype=bool)
    for v in nodes:
        mark[tree.check_node(v)] = True
    return mark


def _strictly_below(tree: WeightedTree, mark: np.ndarray) -> np.ndarray:
    """True at nodes with a proper ancestor in ``mark``."""
    out = np.zeros(tree.n_nodes, dtype=bool)
    b = tree.level_bounds
    for k in range(1, tree.height + 1):
        lo, hi = int(b[k]), int(b[k + 1])
        par = tree.parent[lo:hi]
        out[lo:hi] = out[par] | mark[par]
    return out


def is_antichain(tree: WeightedTree, nodes: Iterable[int]) -> bool:
    mark = _indicator(tree, nodes)
    return not np.any(mark & _strictly_below(tree, mark))


def normalize_antichain(tree: WeightedTree, nodes: Iterable[int]) -> BoundarySet:
    """Drop every node that has a proper ancestor in the set.

    Complete sibling families are deliberately not merged into their parent.
    """
    mark = _indicator(tree, nodes)
    keep = mark & ~_strictly_below(tree, mark)
    return BoundarySet(tuple(int(v) for v in np.flatnonzero(keep)))


def as_boundary_set(tree: WeightedTree, E) -> BoundarySet:
    """Validate ``E`` as an antichain, without normalizing it."""
    nodes = tuple(sorted({tree.check_node(int(v)) for v in (E.nodes if isinstance(E, BoundarySet) else E)}))
    if not is_antichain(tree, nodes):
        raise ValueError("support not an antichain")
    return BoundarySet(nodes)


@dataclass(frozen=True, eq=False)
class TreeMeasure:
    """Nonnegative masses on an antichain of ``tree``.

    ``istar`` is the adjoint field: mass carried by descendants-or-self.
    """

    tree: WeightedTree
    support: np.ndarray
    mass: np.ndarray

    @cached_property
    def dense(self) -> np.ndarray:
        out = np.zeros(self.tree.n_nodes)
        np.add.at(out, self.support, self.mass)
        return out

    @cached_property
    def istar(self) -> np.ndarray:
        out = self.tree.subtree_sum(self.dense)
        out.setflags(write=False)
        return out

    @property
    def total(self) -> float:
        return float(np.sum(self.mass))

    def scaled(self, c: float) -> "TreeMeasure":
        return TreeMeasure(self.tree, self.support, self.mass * float(c))

    def restricted(self, nodes: Iterable[int]) -> "TreeMeasure":
        """Restriction to the cylinders of ``nodes`` (support nodes below any of them)."""
        below = self.tree.below_marked(_indicator(self.tree, nodes))
        keep = below[self.support]
        return TreeMeasure(self.tree, self.support[keep], self.mass[keep])

    def reweighted(self, lam) -> "TreeMeasure":
        """The measure ``λμ`` for a node function ``λ`` evaluated on the support."""
        lam = np.asarray(lam, dtype=float)
        return TreeMeasure(self.tree, self.support, self.mass * lam[self.support])


def measure_from_masses(tree: WeightedTree, masses) -> TreeMeasure:
    """Measure from ``(node, mass)`` pairs or a ``{node: mass}`` mapping."""
    items = list(masses.items()) if isinstance(masses, dict) else list(masses)
    if not items:
        return TreeMeasure(tree, np.zeros(0, dtype=np.int64), np.zeros(0))
    nodes = np.array([tree.check_node(int(v)) for v, _ in items], dtype=np.int64)
    mass = np.array([float(m) for _, m in items])
    if np.any(~np.isfinite(mass)) or np.any(mass < 0):
        raise ValueError("negative mass")
    if len(set(nodes.tolist())) != len(nodes):
        raise ValueError("duplicate support node")
    if not is_antichain(tree, nodes):
        raise ValueError("support not an antichain")
    order = np.argsort(nodes)
    return TreeMeasure(tree, nodes[order], mass[order])


def zero_measure(tree: WeightedTree) -> TreeMeasure:
    return measure_from_masses(tree, [])


# file format --------------------------------------------------------------

_HEADER = "# treecap tree v1"


def serialize_tree(tree: WeightedTree) -> str:
    """Text form: header, optional ``delta`` line, then ``id parent weight`` records."""
    lines = [_HEADER]
    if tree.delta is not None:
        lines.append(f"delta {tree.delta:.16e}")
    labels = tree.node_labels
    for v in range(tree.n_nodes):
        q = int(tree.parent[v])
        lines.append(f"{labels[v]} {'-' if q < 0 else labels[q]} {tree.weight[v]:.16e}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> WeightedTree:
    """Inverse of :func:`serialize_tree`; records may come in any order."""
    delta = None
    ids: list[str] = []
    par_ids: list[str | None] = []
    weights: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "delta" and len(parts) == 2:
            delta = float(parts[1])
            continue
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'id parent weight', got {raw!r}")
        try:
            w = float(parts[2])
        except ValueError:
            raise ValueError(f"line {lineno}: bad weight {parts[2]!r}") from None
        ids.append(parts[0])
        par_ids.append(None if parts[1] in ("-", "null", "None") else parts[1])
        weights.append(w)
    if not ids:
        raise ValueError("tree file has no node records")
    index = {}
    for i, name in enumerate(ids):
        if name in index:
            raise ValueError(f"duplicate node id {name!r}")
        index[name] = i
    parents: list[int | None] = []
    for name, q in zip(ids, par_ids):
        if q is None:
            parents.append(None)
        elif q not in index:
            raise ValueError(f"orphan node {name!r}: unknown parent {q!r}")
        else:
            parents.append(index[q])
    return tree_from_parents(parents, weights, delta, ids)

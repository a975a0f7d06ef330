"""Geometric trees: data model, SWC ingestion, distance maps, canonical codes.

A geometric tree is a finite rooted tree embedded in 3-space.  The root has
degree 1, every other vertex has at most two children, and edges point away
from the root.  Trees are immutable after construction and all operations
here are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeometricTree",
    "SwcError",
    "parse_swc",
    "dump_swc",
    "distances",
    "combinatorial_class",
    "MODE_RADIAL",
    "MODE_PATH",
]

MODE_RADIAL = "radial"
MODE_PATH = "path"


class SwcError(ValueError):
    """Raised on malformed or structurally invalid SWC input."""


def _segment_length(dx: float, dy: float, dz: float) -> float:
    # single shared definition so path distances are reproducible everywhere
    return math.sqrt(dx * dx + dy * dy + dz * dz)


@dataclass(frozen=True)
class GeometricTree:
    """Rooted binary tree with 3D vertex positions.

    Vertices are indexed 0..N-1.  ``parents[v]`` is the parent index, or -1
    for the root.  The root has exactly one child; every other vertex has at
    most two children.
    """

    positions: np.ndarray  # (N, 3) float64
    parents: np.ndarray    # (N,) int64, -1 at the root

    root: int = field(init=False)
    _children: tuple = field(init=False, repr=False)

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=np.float64))
        par = np.ascontiguousarray(np.asarray(self.parents, dtype=np.int64))
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] == 0:
            raise ValueError("positions must be a non-empty (N, 3) array")
        if par.shape != (pos.shape[0],):
            raise ValueError("parents must be a (N,) array")
        pos.setflags(write=False)
        par.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "parents", par)

        roots = np.flatnonzero(par < 0)
        if len(roots) != 1:
            raise ValueError(f"tree must have exactly one root, found {len(roots)}")
        root = int(roots[0])

        n = len(par)
        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            p = int(par[v])
            if p >= 0:
                if p >= n:
                    raise ValueError(f"parent index {p} out of range")
                children[p].append(v)

        # reject cycles / disconnected parts: walk up from every vertex
        depth = np.full(n, -1, dtype=np.int64)
        depth[root] = 0
        for v in range(n):
            chain = []
            w = v
            while depth[w] < 0:
                chain.append(w)
                w = int(par[w])
                if len(chain) > n:
                    raise ValueError("parent relation contains a cycle")
            base = depth[w]
            for k, u in enumerate(reversed(chain)):
                depth[u] = base + k + 1

        if len(children[root]) != 1:
            raise ValueError(
                f"root must have exactly one child, found {len(children[root])}"
            )
        for v in range(n):
            if v != root and len(children[v]) > 2:
                raise ValueError(f"vertex {v} has {len(children[v])} children (max 2)")

        object.__setattr__(self, "root", root)
        object.__setattr__(self, "_children", tuple(tuple(c) for c in children))

    # -- structure -----------------------------------------------------------

    def children(self, v: int) -> tuple:
        return self._children[v]

    @property
    def n_vertices(self) -> int:
        return len(self.parents)

    @property
    def leaves(self) -> list:
        return [v for v in range(self.n_vertices)
                if v != self.root and not self._children[v]]

    @property
    def branch_points(self) -> list:
        return [v for v in range(self.n_vertices) if len(self._children[v]) == 2]

    def topological_order(self) -> np.ndarray:
        """Vertex indices ordered root-first (every parent before its child)."""
        order = np.empty(self.n_vertices, dtype=np.int64)
        stack = [self.root]
        k = 0
        while stack:
            v = stack.pop()
            order[k] = v
            k += 1
            stack.extend(reversed(self._children[v]))
        return order

    def __eq__(self, other):
        if not isinstance(other, GeometricTree):
            return NotImplemented
        return (self.positions.shape == other.positions.shape
                and bool(np.all(self.positions == other.positions))
                and bool(np.all(self.parents == other.parents)))

    def __hash__(self):
        return hash((self.positions.tobytes(), self.parents.tobytes()))


# -- SWC ingestion ------------------------------------------------------------


def parse_swc(text: str | Iterable[str], binarize: bool = False) -> GeometricTree:
    """Parse SWC text into a :class:`GeometricTree`.

    Each non-comment line carries 7 whitespace-separated columns
    ``id type x y z radius parent`` with ``parent = -1`` at the root.  The
    radius and type columns are read but have no effect on any downstream
    computation.

    With ``binarize=True`` a k-furcation is split into a cascade of
    bifurcations joined by zero-length edges, children attached in file
    order; otherwise out-degree > 2 is an error.
    """
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = list(text)

    ids: list[int] = []
    xyz: list[tuple[float, float, float]] = []
    par_ids: list[int] = []
    seen: set[int] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = line.split()
        if len(cols) != 7:
            raise SwcError(f"line {lineno}: expected 7 columns, got {len(cols)}")
        try:
            vid = int(cols[0])
            int(cols[1])  # type column, ignored
            x, y, z = float(cols[2]), float(cols[3]), float(cols[4])
            float(cols[5])  # radius column, ignored
            pid = int(cols[6])
        except ValueError as exc:
            raise SwcError(f"line {lineno}: {exc}") from None
        if vid in seen:
            raise SwcError(f"line {lineno}: duplicate vertex id {vid}")
        seen.add(vid)
        ids.append(vid)
        xyz.append((x, y, z))
        par_ids.append(pid)

    if not ids:
        raise SwcError("no vertices in SWC input")

    index = {vid: k for k, vid in enumerate(ids)}
    parents = np.empty(len(ids), dtype=np.int64)
    n_roots = 0
    for k, pid in enumerate(par_ids):
        if pid == -1:
            parents[k] = -1
            n_roots += 1
        else:
            if pid not in index:
                raise SwcError(f"unknown parent id {pid}")
            parents[k] = index[pid]
    if n_roots == 0:
        raise SwcError("no root vertex (parent -1) found")
    if n_roots > 1:
        raise SwcError(f"more than one root ({n_roots})")

    positions = np.asarray(xyz, dtype=np.float64)

    if binarize:
        positions, parents = _binarize(positions, parents)

    try:
        return GeometricTree(positions, parents)
    except ValueError as exc:
        msg = str(exc)
        if "children (max 2)" in msg:
            raise SwcError(f"multifurcation: {msg}; pass binarize=True to split") from None
        raise SwcError(msg) from None


def _binarize(positions: np.ndarray, parents: np.ndarray):
    """Split every k-furcation (k > 2, or any furcation at the root) into a
    cascade of bifurcations joined by zero-length edges."""
    n = len(parents)
    children: list[list[int]] = [[] for _ in range(n)]
    root = -1
    for v in range(n):
        p = int(parents[v])
        if p < 0:
            root = v
        else:
            children[p].append(v)

    pos_out = [tuple(p) for p in positions]
    par_out = list(int(p) for p in parents)

    def cascade(v: int, kids: list[int]):
        # v keeps its first child; the rest hang off synthetic copies of v
        host = v
        for j in range(1, len(kids) - 1):
            synth = len(pos_out)
            pos_out.append(pos_out[v])
            par_out.append(host)
            par_out[kids[j]] = synth
            host = synth
        par_out[kids[-1]] = host

    for v in range(n):
        kids = children[v]
        if v == root and len(kids) >= 2:
            # root must keep degree 1: push all children one level down
            synth = len(pos_out)
            pos_out.append(pos_out[v])
            par_out.append(v)
            for c in kids:
                par_out[c] = synth
            if len(kids) > 2:
                cascade(synth, kids)
        elif len(kids) > 2:
            cascade(v, kids)

    return np.asarray(pos_out, dtype=np.float64), np.asarray(par_out, dtype=np.int64)


def dump_swc(tree: GeometricTree) -> str:
    """Serialize a tree back to SWC text (type 1 at the root, 3 elsewhere,
    unit radii).  Round-trips through :func:`parse_swc` exactly."""
    lines = []
    order = tree.topological_order()
    renum = {int(v): k + 1 for k, v in enumerate(order)}
    for v in order:
        v = int(v)
        x, y, z = (float(c) for c in tree.positions[v])
        pid = int(tree.parents[v])
        swc_parent = -1 if pid < 0 else renum[pid]
        swc_type = 1 if pid < 0 else 3
        lines.append(f"{renum[v]} {swc_type} {x!r} {y!r} {z!r} 1.0 {swc_parent}")
    return "\n".join(lines) + "\n"


# -- distance maps -------------------------------------------------------------


def distances(tree: GeometricTree, mode: str = MODE_PATH) -> np.ndarray:
    """Distance of every vertex from the root.

    ``radial`` is the Euclidean distance from the vertex position to the root
    position; ``path`` is the sum of segment lengths along the unique root
    path.  delta(root) = 0 in either mode.
    """
    pos = tree.positions
    if mode == MODE_RADIAL:
        diff = pos - pos[tree.root]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if mode != MODE_PATH:
        raise ValueError(f"unknown distance mode {mode!r}")

    delta = np.zeros(tree.n_vertices, dtype=np.float64)
    for v in tree.topological_order():
        v = int(v)
        p = int(tree.parents[v])
        if p < 0:
            continue
        dx = pos[v, 0] - pos[p, 0]
        dy = pos[v, 1] - pos[p, 1]
        dz = pos[v, 2] - pos[p, 2]
        delta[v] = delta[p] + _segment_length(dx, dy, dz)
    return delta


def is_monotone(tree: GeometricTree, mode: str = MODE_PATH) -> bool:
    """Whether distance strictly increases from parent to child everywhere."""
    delta = distances(tree, mode)
    for v in range(tree.n_vertices):
        p = int(tree.parents[v])
        if p >= 0 and not (delta[p] < delta[v]):
            return False
    return True


# -- combinatorial canonicalization --------------------------------------------


def combinatorial_class(tree: GeometricTree, mode: str = MODE_PATH) -> str:
    """Canonical code of the tree's combinatorial type, as an ASCII bracket
    string.

    The type records how branches attach to one another: branches are the
    components of the Elder-rule decomposition, ranked by the distance at
    which they bifurcate from their host (the root branch is rank 0), and
    the code serializes the resulting ranked attachment structure.  Two
    embeddings of the same branching structure (mirror images, rigid
    motions, resampled polylines) get equal codes; trees whose branches
    attach differently get distinct codes.
    """
    from .tmd import tmd  # local import: tmd builds on this module

    hosts = tmd(tree, mode).hosts

    children: dict[int, list[int]] = {}
    for i, h in enumerate(hosts):
        if h >= 0:
            children.setdefault(h, []).append(i)

    def serialize(i: int) -> str:
        kids = children.get(i)
        if not kids:
            return str(i)
        return f"{i}(" + ",".join(serialize(c) for c in sorted(kids)) + ")"

    return serialize(0)

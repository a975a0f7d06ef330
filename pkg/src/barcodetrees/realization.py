"""Exact combinatorics of tree-realizations of strict barcodes.

A strict barcode with bars 0..n (sorted by birth) is realized by attaching
each branch i >= 1 to a branch f(i) whose bar strictly contains bar i.  The
number of such attachment maps, hence of combinatorial realization types, is
the product of the bar indices (index of bar i = number of bars strictly
containing it).  This module computes those counts exactly, enumerates and
embeds the realizations, applies the two barcode edits (adding a bar,
transposing consecutive deaths) with their predicted count changes, and
builds count-annotated Cayley graphs of the symmetric group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .barcodes import Bar, StrictBarcode, barcode_class, make_strict
from .trees import GeometricTree

__all__ = [
    "AttachmentMap",
    "CapExceededError",
    "CayleyGraph",
    "bar_index",
    "trn",
    "trn_of_class",
    "class_representative",
    "enumerate_attachments",
    "realize_tree",
    "add_bar",
    "transpose_deaths",
    "cayley_graph",
]


class CapExceededError(ValueError):
    """Enumeration would exceed the caller's cap (factorial blow-up guard)."""


@dataclass(frozen=True)
class AttachmentMap:
    """One tree-realization: hosts[i-1] = f(i), the bar that branch i attaches
    to; requires f(i) < i and death(f(i)) > death(i)."""

    hosts: tuple

    def __getitem__(self, i: int) -> int:
        return self.hosts[i - 1]

    def __len__(self):
        return len(self.hosts)

    def validate(self, barcode: StrictBarcode) -> None:
        deaths = barcode.deaths()
        if len(self.hosts) != barcode.n:
            raise ValueError("attachment map size does not match barcode")
        for i, h in enumerate(self.hosts, start=1):
            if not 0 <= h < i:
                raise ValueError(f"f({i}) = {h} violates f(i) < i")
            if not deaths[h] > deaths[i]:
                raise ValueError(f"bar {h} does not contain bar {i}")


def bar_index(barcode: StrictBarcode, i: int) -> int:
    """Number of bars strictly containing bar i: #{j < i : d_j > d_i}.

    Bars are sorted by birth, so earlier index means earlier birth and
    containment reduces to the death comparison.  i = 0 is out of range.
    """
    if not 1 <= i <= barcode.n:
        raise ValueError(f"bar index must be in 1..{barcode.n}, got {i}")
    deaths = barcode.deaths()
    return int(sum(1 for j in range(i) if deaths[j] > deaths[i]))


def trn(barcode: StrictBarcode) -> int:
    """Tree-realization number: the product of the bar indices (exact int).

    Depends only on the barcode's equivalence class; equals n! exactly for
    the strictly ordered class and is the count of valid attachment maps.
    """
    barcode = make_strict(barcode)
    out = 1
    for i in range(1, barcode.n + 1):
        out *= bar_index(barcode, i)
    return out


def class_representative(perm, spacing: float = 1.0) -> StrictBarcode:
    """Canonical strict barcode in the class of ``perm`` (death-order
    sequence i_1..i_n): b_0 = 0, b_i = i, deaths n+1..2n realizing the
    order, d_0 = 2n+2, all scaled by ``spacing``."""
    perm = tuple(int(p) for p in perm)
    n = len(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {perm}")
    deaths = [0.0] * (n + 1)
    deaths[0] = (2 * n + 2) * spacing
    for rank, i in enumerate(perm, start=1):  # rank 1 = largest death
        deaths[i] = (2 * n + 1 - rank) * spacing
    bars = [Bar(0.0, deaths[0])]
    bars += [Bar(i * spacing, deaths[i]) for i in range(1, n + 1)]
    return StrictBarcode(bars)


def trn_of_class(perm) -> int:
    return trn(class_representative(perm))


def enumerate_attachments(barcode: StrictBarcode, cap: int = 100_000) -> list:
    """All valid attachment maps, in lexicographic order of
    (f(1), ..., f(n)).  Errors out when the count exceeds ``cap``."""
    barcode = make_strict(barcode)
    total = trn(barcode)
    if total > cap:
        raise CapExceededError(f"{total} attachment maps exceed cap {cap}")
    deaths = barcode.deaths()
    choices = [[j for j in range(i) if deaths[j] > deaths[i]]
               for i in range(1, barcode.n + 1)]
    return [AttachmentMap(hosts) for hosts in itertools.product(*choices)]


# -- canonical embedding ----------------------------------------------------------


def _adjust_coordinate(start: float, base_delta: float, target_delta: float):
    """Coordinate c such that fl(base + |c - start|) == target exactly, or
    None if the walk fails to land (coarse grid); c stays near start."""
    length = target_delta - base_delta
    sign = 1.0 if start <= 0.0 else -1.0  # pull toward 0 to keep lanes bounded
    c = start + sign * length
    last = None
    for _ in range(256):
        d = c - start
        measured = base_delta + math.sqrt(d * d)
        if measured == target_delta:
            return c
        direction = math.inf if (measured < target_delta) == (sign > 0) else -math.inf
        if last is not None and direction != last:
            return None  # ping-pong: the target ulp is skipped on this grid
        last = direction
        c = math.nextafter(c, direction)
    return None


def _hop(pos: np.ndarray, delta: float, target_delta: float, axis: int):
    """Advance from path distance ``delta`` to exactly ``target_delta``: a
    +z run followed by a short adjust leg on a horizontal axis, whose small
    coordinate has a fine enough float grid to land exactly.

    Returns (mid position, mid delta, final position).
    """
    gap = target_delta - delta
    shrink = 4.0
    for _ in range(8):
        amplitude = gap / shrink
        mid = pos.copy()
        mid[2] += gap - amplitude
        d = mid[2] - pos[2]
        mid_delta = delta + math.sqrt(d * d)
        c = _adjust_coordinate(float(mid[axis]), mid_delta, target_delta)
        if c is not None:
            end = mid.copy()
            end[axis] = c
            return mid, mid_delta, end
        shrink *= 2.0
    raise RuntimeError(
        f"could not hit path distance {target_delta!r} from {delta!r}")


_LANES = ((1.0, 0), (1.0, 1), (-1.0, 0), (-1.0, 1))  # (sign, axis) per branch


def realize_tree(barcode: StrictBarcode, attachment: AttachmentMap) -> GeometricTree:
    """Canonical embedding of one attachment map.

    Branch i leaves its host sideways at path distance b_i, then runs along
    +z through the attachment points of its own children and ends at path
    distance d_i.  Each run ends with a short horizontal adjust leg placed so
    that the path-mode distance of every branch point and leaf reproduces
    the input births and deaths exactly, bar for bar.
    """
    barcode = make_strict(barcode)
    attachment.validate(barcode)
    n = barcode.n
    births = barcode.births()
    deaths = barcode.deaths()

    children: list = [[] for _ in range(n + 1)]
    for i in range(1, n + 1):
        children[attachment[i]].append(i)

    positions: list = [np.zeros(3)]
    parents: list = [-1]

    def new_vertex(pos: np.ndarray, parent: int) -> int:
        positions.append(pos)
        parents.append(parent)
        return len(positions) - 1

    # (branch, attach vertex, attach path distance); root branch starts at the root
    stack = [(0, 0, 0.0)]
    while stack:
        branch, vertex, delta = stack.pop()
        targets = [(float(births[c]), c) for c in children[branch]]
        targets.append((float(deaths[branch]), -1))
        targets.sort()
        pos = positions[vertex]

        if branch != 0:
            # sideways connector separating the branch from its host's lane
            sign, axis = _LANES[branch % 4]
            h = 0.5 * (targets[0][0] - delta)
            pos = pos.copy()
            pos[axis] += sign * h
            d = pos[axis] - positions[vertex][axis]
            delta = delta + math.sqrt(d * d)
            vertex = new_vertex(pos, vertex)

        for hop_idx, (target_delta, child) in enumerate(targets):
            mid, mid_delta, end = _hop(pos, delta, target_delta, axis=hop_idx % 2)
            vertex = new_vertex(mid, vertex)
            vertex = new_vertex(end, vertex)
            pos, delta = end, target_delta
            if child >= 0:
                stack.append((child, vertex, delta))

    return GeometricTree(np.asarray(positions), np.asarray(parents, dtype=np.int64))


# -- barcode edits ----------------------------------------------------------------


def add_bar(barcode: StrictBarcode, bar: Bar):
    """Append a bar born after every existing bar; returns (new barcode, k)
    where k is the number of bars containing the new one, so that the
    realization count is multiplied by exactly k."""
    barcode = make_strict(barcode)
    births = barcode.births()
    if not bar.birth > births.max():
        raise ValueError("new bar must be born after all existing bars")
    new = make_strict(list(barcode.bars) + [bar])  # raises NotStrictError if invalid
    k = int(sum(1 for b in barcode.bars if b.death > bar.death))
    return new, k


def transpose_deaths(barcode: StrictBarcode, k: int):
    """Swap the k-th and (k+1)-th largest deaths; returns (new barcode,
    predicted realization count).

    Only the later-born of the two bars changes its containment count: when
    i_k < i_{k+1} the swap breaks the containment of bar i_{k+1} in bar i_k
    (its index drops by one), and when i_k > i_{k+1} it newly nests bar i_k
    inside bar i_{k+1} (the index of bar i_k grows by one).  The predicted
    count scales accordingly and is verified against a direct recount.
    """
    barcode = make_strict(barcode)
    n = barcode.n
    if not 1 <= k < n:
        raise ValueError(f"rank k must be in 1..{n - 1}, got {k}")
    seq = barcode_class(barcode).sequence
    i_k, i_k1 = seq[k - 1], seq[k]

    bars = list(barcode.bars)
    a, b = bars[i_k], bars[i_k1]
    bars[i_k] = Bar(a.birth, b.death)
    bars[i_k1] = Bar(b.birth, a.death)
    new = make_strict(bars)

    before = trn(barcode)
    idx = bar_index(barcode, max(i_k, i_k1))
    if i_k < i_k1:
        predicted = before * (idx - 1) // idx
    else:
        predicted = before * (idx + 1) // idx
    actual = trn(new)
    if predicted != actual:
        raise RuntimeError(
            f"transposition prediction {predicted} != recomputed {actual}")
    return new, predicted


# -- Cayley graphs ----------------------------------------------------------------


@dataclass(frozen=True)
class CayleyGraph:
    """Cayley graph of the symmetric group on n letters under adjacent
    transpositions, each node annotated with the realization count of its
    barcode class.

    ``nodes`` maps each death-order sequence to its count; ``edges`` holds
    (sequence, sequence, generator k) with generator k swapping death ranks
    k and k+1.
    """

    n: int
    nodes: dict
    edges: list

    def to_dot(self) -> str:
        lines = [f"graph cayley_s{self.n} {{"]
        for perm, value in sorted(self.nodes.items()):
            name = "".join(map(str, perm)) if self.n < 10 else ",".join(map(str, perm))
            lines.append(f'  "{name}" [label="({name})", trn={value}];')
        for pa, pb, gen in self.edges:
            na = "".join(map(str, pa)) if self.n < 10 else ",".join(map(str, pa))
            nb = "".join(map(str, pb)) if self.n < 10 else ",".join(map(str, pb))
            lines.append(f'  "{na}" -- "{nb}" [generator={gen}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def cayley_graph(n: int, cap: int = 7) -> CayleyGraph:
    """Build the annotated Cayley graph of the n-letter symmetric group.

    n! nodes, each of degree n-1; adjacent annotations always differ by a
    ratio (m +- 1)/m.  Guarded by ``cap`` (default 7) against factorial
    blow-up.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if n > cap:
        raise CapExceededError(f"n = {n} exceeds cap {cap} ({math.factorial(n)} nodes)")
    nodes = {}
    for perm in itertools.permutations(range(1, n + 1)):
        nodes[perm] = trn_of_class(perm)
    edges = []
    for perm in nodes:
        for k in range(1, n):
            other = list(perm)
            other[k - 1], other[k] = other[k], other[k - 1]
            other = tuple(other)
            if perm < other:
                edges.append((perm, other, k))
    return CayleyGraph(n=n, nodes=nodes, edges=edges)

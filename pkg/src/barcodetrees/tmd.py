"""Barcode extraction from geometric trees by the Elder Rule.

Walking from the leaves toward the root, each branch point merges its
children's components; all but (any) one longest child are killed, each
producing one bar (distance of the branch point, distance of the killed
component's farthest leaf).  The surviving component reaches the root and
produces the containing bar (0, max distance).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .barcodes import Bar, Barcode, BarcodeClass, barcode_class, make_strict
from .trees import MODE_PATH, MODE_RADIAL, GeometricTree, distances

__all__ = ["TmdResult", "tmd", "tmd_class"]


@dataclass
class TmdResult:
    """Result of the Elder-rule sweep.

    Bars are sorted by (birth, death); index 0 is the containing bar when the
    barcode is strict.  ``branch_paths[i]`` is the leaf-to-branch-point vertex
    path realizing bar i, ``hosts[i]`` the index of the bar whose branch bar i
    bifurcates from (-1 for the root bar).  ``certified`` is False when the
    distance function violated monotonicity (possible in radial mode).
    """

    bars: list
    branch_paths: list
    hosts: list
    mode: str
    certified: bool = True

    @property
    def barcode(self) -> Barcode:
        return Barcode(self.bars)

    @property
    def branch_map(self) -> dict:
        return {i: path for i, path in enumerate(self.branch_paths)}


def tmd(tree: GeometricTree, mode: str = MODE_PATH) -> TmdResult:
    """Extract the barcode of a geometric tree under the given distance mode.

    One bar per leaf.  In radial mode the distance can decrease from parent
    to child; the sweep still runs but the result is flagged non-certified
    and a warning is emitted.
    """
    delta = distances(tree, mode)

    certified = True
    if mode == MODE_RADIAL:
        for v in range(tree.n_vertices):
            p = int(tree.parents[v])
            if p >= 0 and not (delta[p] < delta[v]):
                certified = False
                warnings.warn(
                    "radial distance is not monotone along the tree; "
                    "barcode is not certified",
                    stacklevel=2,
                )
                break

    order = tree.topological_order()
    n_v = tree.n_vertices
    comp_leaf = np.full(n_v, -1, dtype=np.int64)  # farthest leaf of the surviving component
    min_id = np.full(n_v, -1, dtype=np.int64)     # tie-break: minimal vertex id in subtree

    kills = []  # (birth, death, killed leaf, branch point, host leaf)
    for v in map(int, order[::-1]):
        kids = tree.children(v)
        if not kids:
            comp_leaf[v] = v
            min_id[v] = v
            continue
        if len(kids) == 1:
            c = kids[0]
            comp_leaf[v] = comp_leaf[c]
            min_id[v] = min(v, min_id[c])
            continue
        c1, c2 = kids
        mu1, mu2 = delta[comp_leaf[c1]], delta[comp_leaf[c2]]
        if mu1 > mu2:
            survivor, killed = c1, c2
        elif mu2 > mu1:
            survivor, killed = c2, c1
        elif min_id[c1] < min_id[c2]:  # equal length: smaller minimal id survives
            survivor, killed = c1, c2
        else:
            survivor, killed = c2, c1
        kills.append((float(delta[v]), float(delta[comp_leaf[killed]]),
                      int(comp_leaf[killed]), v, int(comp_leaf[survivor])))
        comp_leaf[v] = comp_leaf[survivor]
        min_id[v] = min(v, min_id[c1], min_id[c2])

    root_leaf = int(comp_leaf[tree.root])
    records = [(0.0, float(delta[root_leaf]), root_leaf, tree.root, -1)]
    records.extend(kills)
    records.sort(key=lambda r: (r[0], r[1]))

    def walk(leaf: int, stop: int) -> list:
        path = [leaf]
        v = leaf
        while v != stop:
            v = int(tree.parents[v])
            path.append(v)
        return path

    leaf_to_index = {rec[2]: i for i, rec in enumerate(records)}
    bars, paths, hosts = [], [], []
    for birth, death, leaf, vertex, host_leaf in records:
        bars.append(Bar(birth, death))
        paths.append(walk(leaf, vertex))
        hosts.append(-1 if host_leaf < 0 else leaf_to_index[host_leaf])

    return TmdResult(bars=bars, branch_paths=paths, hosts=hosts,
                     mode=mode, certified=certified)


def tmd_class(tree: GeometricTree, mode: str = MODE_PATH) -> BarcodeClass:
    """Equivalence class of the tree's barcode (requires a strict barcode)."""
    return barcode_class(make_strict(tmd(tree, mode).barcode))

"""Independent reference implementations used to cross-check the library.

These deliberately share no code with the algorithms they verify: the
barcode oracle is a union-find sweep over the superlevel filtration, and the
containment count is a direct pairwise interval scan.
"""

from __future__ import annotations

from barcodetrees.trees import distances


def unionfind_barcode(tree, mode="path"):
    """0-dimensional persistence of the root-distance function, swept from
    the farthest vertices toward the root.

    Components are born at local maxima (leaves); at each merge the
    component with the lower peak dies, yielding the bar
    (merge distance, dead peak); the surviving component yields (0, max).
    Returns a sorted list of (birth, death) pairs.
    """
    delta = distances(tree, mode)
    n = tree.n_vertices
    adj = [[] for _ in range(n)]
    for v in range(n):
        p = int(tree.parents[v])
        if p >= 0:
            adj[v].append(p)
            adj[p].append(v)

    uf = list(range(n))

    def find(a):
        while uf[a] != a:
            uf[a] = uf[uf[a]]
            a = uf[a]
        return a

    order = sorted(range(n), key=lambda v: (-delta[v], v))
    peak = [0.0] * n
    active = [False] * n
    bars = []
    for v in order:
        active[v] = True
        peak[v] = float(delta[v])
        for u in adj[v]:
            if not active[u]:
                continue
            ru, rv = find(u), find(v)
            if ru == rv:
                continue
            if (peak[ru], -ru) < (peak[rv], -rv):
                dead, live = ru, rv
            else:
                dead, live = rv, ru
            if peak[dead] > delta[v]:
                bars.append((float(delta[v]), peak[dead]))
            uf[dead] = live
    survivor = find(order[0])
    bars.append((0.0, peak[survivor]))
    return sorted(bars)


def containment_count(barcode, i):
    """Bars strictly containing bar i, by direct interval comparison."""
    target = barcode.bars[i]
    return sum(1 for j, b in enumerate(barcode.bars)
               if j != i and b.birth < target.birth and target.death < b.death)

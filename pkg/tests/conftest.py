import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from barcodetrees.barcodes import Bar, StrictBarcode
from barcodetrees.realization import enumerate_attachments, realize_tree
from barcodetrees.trees import GeometricTree


def random_strict(rng, n, d0=1.0):
    """Strict barcode with n non-containing bars in (0, d0)."""
    while True:
        births = np.sort(rng.uniform(0.0, 0.45 * d0, n))
        deaths = rng.uniform(0.55 * d0, 0.95 * d0, n)
        if len(set(births.tolist())) == n and len(set(deaths.tolist())) == n:
            break
    bars = [Bar(0.0, d0)]
    bars += [Bar(float(b), float(d)) for b, d in zip(births, deaths)]
    return StrictBarcode(bars)


def random_embedded_tree(rng, max_leaves=10, subdivide=True):
    """Random binary tree with straight random-direction edges; optional
    collinear subdivision adds continuation vertices."""
    n_leaves = int(rng.integers(1, max_leaves + 1))
    barcode = random_strict(rng, max(0, n_leaves - 1), d0=10.0)
    maps = enumerate_attachments(barcode, cap=10 ** 7)
    f = maps[int(rng.integers(0, len(maps)))]
    tree = realize_tree(barcode, f)
    if not subdivide:
        return tree
    positions = [p.copy() for p in tree.positions]
    parents = list(int(p) for p in tree.parents)
    for v in range(len(parents)):
        p = parents[v]
        if p >= 0 and rng.random() < 0.5:
            mid = 0.5 * (positions[v] + positions[p])
            positions.append(mid)
            parents.append(p)
            parents[v] = len(positions) - 1
    return GeometricTree(np.asarray(positions), np.asarray(parents, dtype=np.int64))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

import numpy as np
import pytest

from barcodetrees.barcodes import make_strict
from barcodetrees.realization import class_representative, enumerate_attachments, realize_tree
from barcodetrees.tmd import tmd, tmd_class
from barcodetrees.trees import GeometricTree, distances, parse_swc

from conftest import random_embedded_tree
from oracles import unionfind_barcode


def _bars(result):
    return sorted((b.birth, b.death) for b in result.bars)


def test_single_path():
    tree = parse_swc("1 1 0 0 0 1 -1\n2 3 0 0 2 1 1\n3 3 0 0 5 1 2\n")
    assert _bars(tmd(tree)) == [(0.0, 5.0)]


def test_two_leaf_elder_rule():
    # branch point at distance 1; leaves at distances 3 and 2
    text = ("1 1 0 0 0 1 -1\n"
            "2 3 0 0 1 1 1\n"
            "3 3 0 0 3 1 2\n"
            "4 3 0 1 1 1 2\n")
    tree = parse_swc(text)
    assert _bars(tmd(tree)) == [(0.0, 3.0), (1.0, 2.0)]


def test_six_leaf_structure():
    barcode = class_representative((3, 1, 4, 5, 2))
    f = enumerate_attachments(barcode)[0]
    tree = realize_tree(barcode, f)
    result = tmd(tree)
    assert len(result.bars) == len(tree.leaves) == 6
    # the containing bar is (0, max) and every path realizes its bar
    delta = distances(tree, "path")
    strict = make_strict(result.barcode)
    assert strict.bars[0].birth == 0.0
    assert strict.bars[0].death == max(float(delta[v]) for v in tree.leaves)
    for i, path in enumerate(result.branch_paths):
        leaf, branch_point = path[0], path[-1]
        assert float(delta[leaf]) == result.bars[i].death
        if i > 0:
            assert float(delta[branch_point]) == result.bars[i].birth


def test_bar_count_equals_leaf_count(rng):
    for _ in range(30):
        tree = random_embedded_tree(rng)
        assert len(tmd(tree).bars) == len(tree.leaves)


def test_matches_unionfind_oracle(rng):
    for _ in range(500):
        tree = random_embedded_tree(rng, max_leaves=10)
        got = _bars(tmd(tree))
        assert got == unionfind_barcode(tree)


def test_deterministic(rng):
    tree = random_embedded_tree(rng)
    a, b = tmd(tree), tmd(tree)
    assert _bars(a) == _bars(b)
    assert a.hosts == b.hosts


def test_equal_length_children_tie():
    # both children reach distance 2: either survivor gives the same bars
    text = ("1 1 0 0 0 1 -1\n"
            "2 3 0 0 1 1 1\n"
            "3 3 0 1 1 1 2\n"
            "4 3 1 0 1 1 2\n")
    swapped = ("1 1 0 0 0 1 -1\n"
               "2 3 0 0 1 1 1\n"
               "3 3 1 0 1 1 2\n"
               "4 3 0 1 1 1 2\n")
    assert _bars(tmd(parse_swc(text))) == _bars(tmd(parse_swc(swapped)))
    assert _bars(tmd(parse_swc(text))) == [(0.0, 2.0), (1.0, 2.0)]


def test_radial_warns_when_not_monotone():
    text = "1 1 0 0 0 1 -1\n2 3 0 0 2 1 1\n3 3 0 0 0.5 1 2\n"
    tree = parse_swc(text)
    with pytest.warns(UserWarning, match="not monotone"):
        result = tmd(tree, "radial")
    assert not result.certified
    assert tmd(tree, "path").certified


def test_radial_and_path_agree_on_straight_edges():
    # collinear edges through the root axis: both modes give the same bars
    tree = parse_swc("1 1 0 0 0 1 -1\n2 3 0 0 1 1 1\n3 3 0 0 4 1 2\n")
    assert _bars(tmd(tree, "radial")) == _bars(tmd(tree, "path"))


def test_class_of_realized_barcode():
    barcode = class_representative((2, 1, 3))
    for f in enumerate_attachments(barcode):
        tree = realize_tree(barcode, f)
        assert tmd_class(tree).sequence == (2, 1, 3)


def test_class_mirror_invariant(rng):
    done = 0
    while done < 10:
        tree = random_embedded_tree(rng, max_leaves=6)
        if len(tree.leaves) < 2:
            continue
        mirrored = GeometricTree(tree.positions * np.array([1.0, -1.0, 1.0]),
                                 tree.parents)
        assert tmd_class(mirrored).sequence == tmd_class(tree).sequence
        done += 1

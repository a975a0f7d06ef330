import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from barcodetrees.barcodes import Bar, barcode_class, equivalent, make_strict
from barcodetrees.realization import (AttachmentMap, CapExceededError,
                                      add_bar, bar_index, cayley_graph,
                                      class_representative,
                                      enumerate_attachments, realize_tree,
                                      transpose_deaths, trn, trn_of_class)
from barcodetrees.tmd import tmd
from barcodetrees.trees import combinatorial_class, distances

from conftest import random_strict
from oracles import containment_count


def test_bar_index_first_bar_is_one(rng):
    for _ in range(10):
        b = random_strict(rng, int(rng.integers(1, 8)))
        assert bar_index(b, 1) == 1


def test_bar_index_last_bar_of_strictly_ordered():
    n = 6
    b = class_representative(tuple(range(1, n + 1)))
    assert bar_index(b, n) == n


def test_bar_index_against_containment_scan(rng):
    b = class_representative((2, 6, 8, 1, 5, 7, 4, 3))
    assert bar_index(b, 7) == 5
    assert bar_index(b, 7) == containment_count(b, 7)
    for _ in range(20):
        rnd = random_strict(rng, int(rng.integers(1, 9)))
        for i in range(1, rnd.n + 1):
            assert bar_index(rnd, i) == containment_count(rnd, i)


def test_bar_index_range_errors(rng):
    b = random_strict(rng, 3)
    with pytest.raises(ValueError):
        bar_index(b, 0)
    with pytest.raises(ValueError):
        bar_index(b, 4)


def test_known_counts():
    assert trn_of_class((2, 1, 3)) == 3
    assert trn_of_class((2, 1, 4, 3)) == 9
    assert trn_of_class((2, 3, 1)) == 2
    assert trn_of_class((3, 1, 2)) == 2
    for n in range(1, 8):
        assert trn_of_class(tuple(range(1, n + 1))) == math.factorial(n)


def test_single_bar_count_is_empty_product():
    assert trn(make_strict([(0.0, 1.0)])) == 1


def test_count_depends_only_on_class(rng):
    for _ in range(20):
        b = random_strict(rng, int(rng.integers(1, 7)))
        rep = class_representative(barcode_class(b).sequence)
        assert equivalent(b, rep)
        assert trn(b) == trn(rep)


def test_enumerate_three_bar_class():
    b = class_representative((2, 1, 3))
    maps = enumerate_attachments(b)
    assert [m.hosts for m in maps] == [(0, 0, 0), (0, 0, 1), (0, 0, 2)]


def test_enumerate_two_bars_strictly_ordered():
    b = class_representative((1, 2))
    assert [m.hosts for m in maps_of(b)] == [(0, 0), (0, 1)]


def maps_of(b):
    return enumerate_attachments(b)


def test_enumerate_cap():
    b = class_representative((1, 2, 3, 4, 5, 6))
    with pytest.raises(CapExceededError):
        enumerate_attachments(b, cap=100)


def test_attachment_validation():
    b = class_representative((1, 2))
    with pytest.raises(ValueError):
        AttachmentMap((1, 0)).validate(b)  # f(1) = 1 violates f(i) < i
    bad = AttachmentMap((0, 1))
    bad.validate(b)  # fine for (1,2)
    c = class_representative((2, 1))
    with pytest.raises(ValueError):
        AttachmentMap((0, 1)).validate(c)  # bar 1 dies before bar 2


def test_realize_single_bar():
    b = make_strict([(0.0, 5.0)])
    tree = realize_tree(b, AttachmentMap(()))
    assert len(tree.leaves) == 1
    delta = distances(tree, "path")
    assert max(float(delta[v]) for v in tree.leaves) == 5.0


def test_realize_three_maps_distinct_codes():
    b = class_representative((2, 1, 3))
    codes = {combinatorial_class(realize_tree(b, f)) for f in enumerate_attachments(b)}
    assert len(codes) == 3


def test_realize_round_trip_exact(rng):
    for _ in range(200):
        b = random_strict(rng, int(rng.integers(1, 8)))
        maps = enumerate_attachments(b, cap=10 ** 7)
        f = maps[int(rng.integers(0, len(maps)))]
        got = make_strict(tmd(realize_tree(b, f)).barcode)
        assert [(x.birth, x.death) for x in got.bars] == \
               [(x.birth, x.death) for x in b.bars]


def test_add_bar_middle_death():
    b = class_representative((2, 1, 3))  # births 1,2,3; deaths 5,6,4; d0 = 8
    new, k = add_bar(b, Bar(3.5, 4.5))
    assert k == 3
    assert barcode_class(new).sequence == (2, 1, 4, 3)
    assert trn(new) == trn(b) * k == 9


def test_add_bar_latest_and_earliest_death():
    b = class_representative((2, 1, 3))
    late, k_late = add_bar(b, Bar(3.5, 7.0))  # only the containing bar holds it
    assert k_late == 1
    assert trn(late) == trn(b)
    early, k_early = add_bar(b, Bar(3.5, 3.8))  # held by every bar
    assert k_early == 4
    assert trn(early) == trn(b) * 4


def test_add_bar_validation():
    b = class_representative((2, 1, 3))
    with pytest.raises(ValueError, match="born after"):
        add_bar(b, Bar(0.5, 4.5))
    with pytest.raises(ValueError):
        add_bar(b, Bar(3.5, 9.0))  # would escape the containing bar


def test_transpose_adjacent_deaths():
    b = class_representative((2, 1, 3, 4))
    assert trn(b) == 12
    assert bar_index(b, 4) == 4
    new, predicted = transpose_deaths(b, 3)
    assert barcode_class(new).sequence == (2, 1, 4, 3)
    assert bar_index(new, 4) == 3
    assert predicted == trn(new) == 9


def test_transpose_known_pair():
    b = class_representative((5, 7, 6, 4, 2, 1, 3))
    assert trn(b) == 12
    new, predicted = transpose_deaths(b, 2)
    assert barcode_class(new).sequence == (5, 6, 7, 4, 2, 1, 3)
    assert predicted == 18


def test_transpose_is_involution(rng):
    for _ in range(20):
        n = int(rng.integers(2, 8))
        b = random_strict(rng, n)
        k = int(rng.integers(1, n))
        once, _ = transpose_deaths(b, k)
        twice, predicted = transpose_deaths(once, k)
        assert barcode_class(twice).sequence == barcode_class(b).sequence
        assert predicted == trn(b)


def test_transpose_range():
    b = class_representative((2, 1, 3))
    with pytest.raises(ValueError):
        transpose_deaths(b, 0)
    with pytest.raises(ValueError):
        transpose_deaths(b, 3)


def test_cayley_three_letters():
    g = cayley_graph(3)
    assert g.nodes == {(1, 2, 3): 6, (1, 3, 2): 4, (2, 1, 3): 3,
                       (2, 3, 1): 2, (3, 1, 2): 2, (3, 2, 1): 1}
    assert len(g.edges) == 6
    degrees = {}
    for a, b, _ in g.edges:
        degrees[a] = degrees.get(a, 0) + 1
        degrees[b] = degrees.get(b, 0) + 1
    assert all(d == 2 for d in degrees.values())


def test_cayley_four_letters():
    g = cayley_graph(4)
    assert len(g.nodes) == 24
    assert len(g.edges) == 36
    assert g.nodes[(1, 2, 3, 4)] == 24


def test_cayley_edge_ratios_are_consecutive():
    for n in (3, 4, 5):
        g = cayley_graph(n)
        for a, b, _ in g.edges:
            hi, lo = max(g.nodes[a], g.nodes[b]), min(g.nodes[a], g.nodes[b])
            ratio = Fraction(hi, lo)
            assert ratio.numerator - ratio.denominator == 1


def test_cayley_cap():
    with pytest.raises(CapExceededError):
        cayley_graph(8)
    with pytest.raises(ValueError):
        cayley_graph(1)


def test_cayley_dot_output():
    dot = cayley_graph(3).to_dot()
    assert dot.startswith("graph cayley_s3 {")
    assert '"123" [label="(123)", trn=6];' in dot
    assert dot.count(" -- ") == 6


def test_counts_match_enumeration_sizes_small():
    for n in range(1, 5):
        for perm in itertools.permutations(range(1, n + 1)):
            rep = class_representative(perm)
            assert trn(rep) == len(enumerate_attachments(rep))


def test_endpoint_perturbation_without_crossing_keeps_count(rng):
    # nudging an endpoint inside its gap never changes the count; swapping
    # two adjacent deaths always does
    for _ in range(20):
        n = int(rng.integers(2, 8))
        b = random_strict(rng, n)
        before = trn(b)
        endpoints = sorted([x.birth for x in b.bars] + [x.death for x in b.bars])
        bars = list(b.bars)
        i = int(rng.integers(1, n + 1))
        target = bars[i]
        pos = endpoints.index(target.death)
        room = endpoints[pos + 1] - target.death if pos + 1 < len(endpoints) else 1.0
        bars[i] = Bar(target.birth, target.death + 0.5 * room)
        assert trn(make_strict(bars)) == before
        k = int(rng.integers(1, n))
        swapped, _ = transpose_deaths(b, k)
        assert trn(swapped) != before

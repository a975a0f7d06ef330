"""Barcodes, strictness, the symmetric-group classification, and the
bottleneck distance.

A barcode is a finite multiset of open intervals (birth, death) with
birth < death.  A strict barcode has one bar properly containing all the
others, pairwise-distinct births, and pairwise-distinct deaths; its bars are
kept sorted by birth, with the containing bar at index 0.  The death order
of bars 1..n defines a permutation, the barcode's equivalence class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

__all__ = [
    "Bar",
    "Barcode",
    "StrictBarcode",
    "BarcodeClass",
    "NotStrictError",
    "SizeMismatchError",
    "make_strict",
    "barcode_class",
    "equivalent",
    "persistence_diagram",
    "bottleneck_distance",
    "bottleneck_distance_bruteforce",
    "parse_barcode_text",
    "dump_barcode_text",
    "diagram_csv",
]


class NotStrictError(ValueError):
    """The barcode is outside the strict class (tied endpoints or no
    containing bar)."""


class SizeMismatchError(ValueError):
    """Bottleneck distance is defined only for equal bar counts."""


@dataclass(frozen=True, order=True)
class Bar:
    birth: float
    death: float

    def __post_init__(self):
        object.__setattr__(self, "birth", float(self.birth))
        object.__setattr__(self, "death", float(self.death))
        if not self.birth < self.death:
            raise ValueError(f"bar needs birth < death, got ({self.birth}, {self.death})")

    def contains(self, other: "Bar") -> bool:
        """Strict containment of intervals."""
        return self.birth < other.birth and other.death < self.death

    @property
    def length(self) -> float:
        return self.death - self.birth


class Barcode:
    """A finite multiset of bars (no strictness assumed)."""

    def __init__(self, bars: Iterable[Bar | tuple]):
        items = [b if isinstance(b, Bar) else Bar(*b) for b in bars]
        if not items:
            raise ValueError("barcode must be non-empty")
        self.bars: tuple = tuple(items)

    def __len__(self):
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def __eq__(self, other):
        if not isinstance(other, Barcode):
            return NotImplemented
        return sorted(self.bars) == sorted(other.bars)

    def __repr__(self):
        inner = ", ".join(f"({b.birth:g}, {b.death:g})" for b in sorted(self.bars))
        return f"{type(self).__name__}[{inner}]"


class StrictBarcode(Barcode):
    """Barcode with bars sorted by birth; bar 0 strictly contains all others,
    and all births / all deaths are pairwise distinct.

    ``n`` is the number of non-containing bars (total bars = n + 1).
    """

    def __init__(self, bars: Iterable[Bar | tuple]):
        super().__init__(bars)
        ordered = tuple(sorted(self.bars, key=lambda b: b.birth))
        births = [b.birth for b in ordered]
        deaths = [b.death for b in ordered]
        if len(set(births)) != len(births):
            raise NotStrictError("tied births")
        if len(set(deaths)) != len(deaths):
            raise NotStrictError("tied deaths")
        first = ordered[0]
        for b in ordered[1:]:
            if not first.contains(b):
                raise NotStrictError(
                    f"bar ({b.birth:g}, {b.death:g}) not strictly contained in "
                    f"bar 0 ({first.birth:g}, {first.death:g})"
                )
        self.bars = ordered

    @property
    def n(self) -> int:
        return len(self.bars) - 1

    def births(self) -> np.ndarray:
        return np.array([b.birth for b in self.bars])

    def deaths(self) -> np.ndarray:
        return np.array([b.death for b in self.bars])


def make_strict(barcode: Barcode | Iterable) -> StrictBarcode:
    """Order a barcode by birth and verify all strictness conditions.

    Raises :class:`NotStrictError` if the input is outside the strict class.
    """
    if isinstance(barcode, StrictBarcode):
        return barcode
    bars = barcode.bars if isinstance(barcode, Barcode) else barcode
    return StrictBarcode(bars)


@dataclass(frozen=True)
class BarcodeClass:
    """The equivalence class of a strict barcode under death order.

    ``sequence`` is (i_1 ... i_n): the indices 1..n ordered by strictly
    decreasing death.  ``sigma`` maps i to the number of bars j in 1..n with
    d_j <= d_i, so sigma(i_k) = n + 1 - k.  Both encodings are exposed;
    ``sigma[i - 1]`` is sigma(i).
    """

    sequence: tuple
    sigma: tuple

    @property
    def n(self) -> int:
        return len(self.sequence)

    def __str__(self):
        return "(" + ",".join(str(i) for i in self.sequence) + ")"


def barcode_class(barcode: StrictBarcode) -> BarcodeClass:
    """The permutation classifying a strict barcode (bars 1..n by death order)."""
    if barcode.n < 1:
        raise ValueError("barcode class needs at least one non-containing bar")
    deaths = barcode.deaths()[1:]
    order = sorted(range(1, barcode.n + 1), key=lambda i: -deaths[i - 1])
    sigma = [0] * barcode.n
    for rank, i in enumerate(order):  # rank 0 = largest death
        sigma[i - 1] = barcode.n - rank
    return BarcodeClass(sequence=tuple(order), sigma=tuple(sigma))


def equivalent(a: StrictBarcode, b: StrictBarcode) -> bool:
    """Whether two strict barcodes have the same size and death order."""
    if len(a) != len(b):
        return False
    if a.n == 0:
        return True
    return barcode_class(a).sequence == barcode_class(b).sequence


def persistence_diagram(barcode: Barcode) -> np.ndarray:
    """Planar points (x = death, y = birth), one per bar.

    Every point lies strictly below the diagonal y = x.
    """
    return np.array([(b.death, b.birth) for b in barcode.bars])


# -- bottleneck distance --------------------------------------------------------


def _cost_matrix(a: StrictBarcode, b: StrictBarcode) -> np.ndarray:
    ab, ad = a.births(), a.deaths()
    bb, bd = b.births(), b.deaths()
    return np.abs(ab[:, None] - bb[None, :]) + np.abs(ad[:, None] - bd[None, :])


def bottleneck_distance(a: StrictBarcode, b: StrictBarcode) -> float:
    """Bottleneck distance between equal-size strict barcodes.

    Minimum over matchings gamma of the maximum per-bar L1 displacement
    |b_i - b'_gamma(i)| + |d_i - d'_gamma(i)|.  The containing bars are
    matched to each other; gamma permutes bars 1..n only.  There is no
    diagonal matching and unequal sizes are an error.

    Exact: binary search over the candidate per-pair costs with bipartite
    matching feasibility checks.
    """
    if len(a) != len(b):
        raise SizeMismatchError(f"bar counts differ: {len(a)} vs {len(b)}")
    cost = _cost_matrix(a, b)
    floor = float(cost[0, 0])
    n = len(a) - 1
    if n == 0:
        return floor

    sub = cost[1:, 1:]
    candidates = np.unique(sub)

    def feasible(theta: float) -> bool:
        match = maximum_bipartite_matching(csr_matrix(sub <= theta), perm_type="column")
        return int((match >= 0).sum()) == n

    # smallest candidate threshold admitting a perfect matching of bars 1..n
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(floor, float(candidates[lo]))


def bottleneck_distance_bruteforce(a: StrictBarcode, b: StrictBarcode) -> float:
    """All-permutations oracle for the bottleneck distance (n <= 7)."""
    if len(a) != len(b):
        raise SizeMismatchError(f"bar counts differ: {len(a)} vs {len(b)}")
    cost = _cost_matrix(a, b)
    n = len(a) - 1
    if n > 7:
        raise ValueError("brute-force oracle limited to n <= 7")
    best = np.inf
    for perm in itertools.permutations(range(1, n + 1)):
        worst = cost[0, 0]
        for i, j in enumerate(perm, start=1):
            c = cost[i, j]
            if c > worst:
                worst = c
        if worst < best:
            best = worst
    return float(best)


# -- text formats ---------------------------------------------------------------


def parse_barcode_text(text: str) -> Barcode:
    """Barcode text format: one 'birth death' pair per line, '#' comments,
    order irrelevant."""
    bars = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = line.split()
        if len(cols) != 2:
            raise ValueError(f"line {lineno}: expected 'birth death', got {line!r}")
        bars.append(Bar(float(cols[0]), float(cols[1])))
    if not bars:
        raise ValueError("no bars in barcode text")
    return Barcode(bars)


def dump_barcode_text(barcode: Barcode) -> str:
    """Emit the barcode text format, bars sorted by birth."""
    lines = [f"{b.birth!r} {b.death!r}" for b in sorted(barcode.bars)]
    return "\n".join(lines) + "\n"


def diagram_csv(barcode: Barcode) -> str:
    """Persistence diagram as CSV with header 'death,birth'."""
    pts = persistence_diagram(barcode)
    lines = ["death,birth"]
    lines += [f"{float(x)!r},{float(y)!r}" for x, y in pts]
    return "\n".join(lines) + "\n"

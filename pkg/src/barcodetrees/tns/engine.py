"""Stochastic synthesis of geometric trees from strict barcodes.

The hot growth loop lives in a compiled kernel (``_growth``; built from
Cython) with a pure-Python fallback (``_growth_py``) selected at import
time.  Both kernels consume the seeded PCG64 stream identically, so results
do not depend on which one is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..barcodes import Bar, Barcode, StrictBarcode, make_strict
from ..trees import GeometricTree
from . import _growth_py
from .params import AngleSampler, TNSParams

try:
    from . import _growth as _kernel
except ImportError:  # compiled extension not built
    _kernel = _growth_py

KERNEL = _kernel.KERNEL_NAME

__all__ = [
    "KERNEL",
    "GrowthRecord",
    "GrowingTip",
    "bifurcation_probability",
    "termination_probability",
    "elongation_step",
    "synthesize",
    "synthesize_record",
    "available_kernels",
]


def available_kernels() -> dict:
    """Name -> module for every usable growth kernel (for benchmarks/tests)."""
    kernels = {"python": _growth_py}
    if _kernel is not _growth_py:
        kernels[_kernel.KERNEL_NAME] = _kernel
    return kernels


# -- probability functions -------------------------------------------------------


def bifurcation_probability(x: float, b: float, lam: float, step: float = 1.0) -> float:
    """Probability that the growth step at distance x triggers the bifurcation
    targeting birth distance b: min(1, exp(-lam (b - x))); 1 for x >= b."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if x >= b:
        return 1.0
    return min(1.0, math.exp(-lam * (b - x)))


def termination_probability(x: float, d: float, lam: float, step: float = 1.0) -> float:
    """As :func:`bifurcation_probability` with the death distance d as target."""
    return bifurcation_probability(x, d, lam, step)


# -- single-tip elongation (reference implementation of one step) ---------------


@dataclass
class GrowingTip:
    """State of one growing branch tip.

    ``memory`` holds recent unit segment directions, most recent last; the
    elongation direction is normalize(rho r + tau t + mu m) with r uniform on
    the sphere, t the branch target vector, and m the unit-normalized
    half-decay sum of the memory window.
    """

    position: np.ndarray
    path_distance: float
    bar_index: int
    target_vector: np.ndarray
    memory: list = field(default_factory=list)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.target_vector = np.asarray(self.target_vector, dtype=np.float64)


def elongation_step(tip: GrowingTip, params: TNSParams, rng: np.random.Generator) -> np.ndarray:
    """Advance a tip by one segment of length ``params.step_size``; returns the
    new position.  Mutates the tip (position, path distance, memory)."""
    sx, sy, sz, count = _growth_py.memory_sums(tip.memory)
    tx, ty, tz = tip.target_vector
    dx, dy, dz = _growth_py.step_direction(
        rng.random, params.rho, params.tau, params.mu,
        float(tx), float(ty), float(tz), sx, sy, sz, count)
    step = params.step_size
    tip.position = tip.position + step * np.array([dx, dy, dz])
    tip.path_distance += step
    tip.memory.append((dx, dy, dz))
    return tip.position


# -- full synthesis ---------------------------------------------------------------


@dataclass(frozen=True)
class GrowthRecord:
    """Exact bookkeeping of one growth run, indexed by input bar.

    ``births[i]`` / ``deaths[i]`` are the realized bifurcation / termination
    path distances of the branch grown for bar i (births[0] = 0), and
    ``hosts[i]`` the input index of the bar whose branch it attached to (-1
    for the root bar).  Since path distances are tracked exactly during
    growth, ``barcode()`` equals the path-mode barcode of the returned tree
    up to float summation noise.
    """

    births: np.ndarray
    deaths: np.ndarray
    hosts: np.ndarray
    attach_vertices: np.ndarray
    leaf_vertices: np.ndarray

    def barcode(self) -> Barcode:
        return Barcode([Bar(float(b), float(d))
                        for b, d in zip(self.births, self.deaths)])


def _run(barcode: StrictBarcode, params: TNSParams, rng, store_vertices: bool):
    births = barcode.births()
    deaths = barcode.deaths()
    out = _kernel.grow(
        births, deaths, params.lam, params.rho, params.tau, params.mu,
        params.step_size, params.angle_sampler.polar_min,
        params.angle_sampler.polar_max, rng, store_vertices)
    record = GrowthRecord(
        births=out["bar_birth"], deaths=out["bar_death"], hosts=out["bar_host"],
        attach_vertices=out["bar_attach_vertex"], leaf_vertices=out["bar_leaf_vertex"])
    tree = None
    if store_vertices:
        tree = GeometricTree(out["positions"], out["parents"])
    return tree, record


def synthesize(barcode: Barcode | StrictBarcode, params: TNSParams) -> GeometricTree:
    """Grow a geometric tree realizing the given strict barcode.

    The tree has exactly one leaf per bar, every bar is consumed exactly
    once, the attachment record satisfies the containment (Elder) constraint
    against the input bars, and the run is fully determined by
    (barcode, params) including the seed.
    """
    strict = make_strict(barcode)
    rng = np.random.Generator(np.random.PCG64(params.seed))
    tree, _ = _run(strict, params, rng, store_vertices=True)
    return tree


def synthesize_record(barcode: Barcode | StrictBarcode, params: TNSParams,
                      rng: np.random.Generator | None = None,
                      store_vertices: bool = False):
    """Run the growth process and return (tree, record).

    ``tree`` is None when ``store_vertices`` is false (record-only mode, used
    by the Monte-Carlo harness; the per-step random draws are identical, so
    the record matches the full run for the same stream).  Pass an explicit
    generator to integrate with externally derived trial seeds.
    """
    strict = make_strict(barcode)
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(params.seed))
    return _run(strict, params, rng, store_vertices)


def _grow_raw(births, deaths, params: TNSParams, rng, store_vertices: bool = False):
    """Kernel access for experiment fixtures that may leave the strict class
    (e.g. tied deaths at the midpoint of a sweep grid).  ``births`` must be
    sorted ascending with the containing bar first.  Returns (tree, record);
    tree is None without ``store_vertices``."""
    out = _kernel.grow(
        np.asarray(births, dtype=np.float64), np.asarray(deaths, dtype=np.float64),
        params.lam, params.rho, params.tau, params.mu, params.step_size,
        params.angle_sampler.polar_min, params.angle_sampler.polar_max,
        rng, store_vertices)
    record = GrowthRecord(
        births=out["bar_birth"], deaths=out["bar_death"], hosts=out["bar_host"],
        attach_vertices=out["bar_attach_vertex"], leaf_vertices=out["bar_leaf_vertex"])
    tree = GeometricTree(out["positions"], out["parents"]) if store_vertices else None
    return tree, record

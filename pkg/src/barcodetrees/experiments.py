"""Monte-Carlo experiment harness.

Every experiment is a pure function of its config: per-trial generators are
derived from (master seed, experiment id, point index, trial index), results
are aggregated in point/trial order, and CSV output is formatted with fixed
precision, so repeated runs are byte-identical regardless of the worker
count.  Theoretical columns always come from the closed forms, never from
simulation.
"""

from __future__ import annotations

import hashlib
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .barcodes import (Bar, Barcode, StrictBarcode, barcode_class,
                       bottleneck_distance, make_strict)
from .realization import class_representative, enumerate_attachments, trn
from .tmd import tmd
from .tns import TNSParams, synthesize_record
from .tns.engine import _grow_raw
from .trees import GeometricTree

__all__ = [
    "ExperimentConfig",
    "ResultTable",
    "exp_transposition",
    "exp_bottleneck",
    "exp_bottleneck_gapsweep",
    "exp_trn_histogram",
    "exp_type_distribution",
    "exp_death_switch",
    "exp_diversity",
    "exp_bio",
    "random_strict_barcode",
]


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    trials: int = 100
    lambda_grid: tuple = (0.05, 0.1, 0.5, 1.0, 5.0, 10.0)
    bottleneck_lambda_grid: tuple = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0)
    epsilon_grid: tuple = ()        # empty: derived as k * 0.5 / lambda, k = 1..20
    delta_points: int = 13          # transposition gap grid: lambda*gap = 0..3
    lam: float = 1.0                # TNS default for single-lambda experiments
    rho: float = 0.3
    tau: float = 0.4
    mu: float = 0.3
    step: float = 0.1
    outdir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("lambda_grid", "bottleneck_lambda_grid"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")

    def params(self, lam: float, step: float | None = None) -> TNSParams:
        return TNSParams(lam=lam, rho=self.rho, tau=self.tau, mu=self.mu,
                         step_size=self.step if step is None else step)

    def canonical(self) -> str:
        # workers and outdir are execution details: they never change results
        parts = []
        for f in fields(self):
            if f.name in ("workers", "outdir"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(_fmt(x) for x in v)
            parts.append(f"{f.name}={v}")
        return " ".join(parts)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


class ResultTable:
    """Rectangular named columns with a reproducible provenance header."""

    def __init__(self, columns: dict, provenance: str):
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError("columns must have equal lengths")
        self.columns = {k: list(v) for k, v in columns.items()}
        self.provenance = provenance

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> list:
        return self.columns[name]

    def rows(self):
        keys = list(self.columns)
        for i in range(len(self)):
            yield {k: self.columns[k][i] for k in keys}

    def to_csv(self) -> str:
        lines = [f"# {self.provenance}"]
        lines.append(",".join(self.columns))
        cols = list(self.columns.values())
        for i in range(len(self)):
            lines.append(",".join(_fmt(c[i]) for c in cols))
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


def _provenance(name: str, config: ExperimentConfig) -> str:
    digest = hashlib.sha256(f"{name} {config.canonical()}".encode()).hexdigest()[:12]
    return (f"barcodetrees {__version__} experiment={name} "
            f"seed={config.master_seed} config={digest}")


def _trial_rng(config: ExperimentConfig, name: str, point: int, trial: int):
    exp_id = zlib.crc32(name.encode())
    seed = np.random.SeedSequence(
        (config.master_seed & 0xFFFFFFFFFFFFFFFF, exp_id, point, trial))
    return np.random.Generator(np.random.PCG64(seed))


def _map_points(config: ExperimentConfig, points, fn):
    """Evaluate fn(point_index) for every point, in index order."""
    indices = range(len(points))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(fn, indices))
    return [fn(i) for i in indices]


# -- transposition stability ------------------------------------------------------


def exp_transposition(config: ExperimentConfig) -> ResultTable:
    """Death-order switch frequency of two consecutive bars vs the closed
    form exp(-lambda gap) / 2.

    One fixture per lambda, scaled by 1/lambda so the birth-separation
    premise holds across the grid; the gap grid spans lambda*gap in [0, 3]
    (the gap-0 point ties the two input deaths, where the theoretical switch
    probability is 1/2).
    """
    name = "transposition"
    points = []
    for lam in config.lambda_grid:
        s = 1.0 / lam
        for k in range(config.delta_points):
            gap = (3.0 * k / (config.delta_points - 1)) * s
            points.append((lam, gap))

    def run(idx: int):
        lam, gap = points[idx]
        s = 1.0 / lam
        births = [0.0, 10.0 * s, 20.0 * s]
        deaths = [90.0 * s + gap, 40.0 * s, 40.0 * s + gap]  # focus pair: bars 1, 2
        params = config.params(lam, step=0.5 * s)
        switches = 0
        for trial in range(config.trials):
            rng = _trial_rng(config, name, idx, trial)
            _, record = _grow_raw(births, deaths, params, rng)
            if record.deaths[2] < record.deaths[1]:
                switches += 1
        return switches

    counts = _map_points(config, points, run)
    cols = {"lambda": [], "gap": [], "trials": [], "switches": [],
            "empirical_pct": [], "theory_pct": [], "abs_error_pct": [],
            "mean_abs_error_pct": []}
    per_lam_errors: dict = {}
    rows = []
    for (lam, gap), switches in zip(points, counts):
        emp = 100.0 * switches / config.trials
        theory = 50.0 * math.exp(-lam * gap)
        err = abs(emp - theory)
        per_lam_errors.setdefault(lam, []).append(err)
        rows.append((lam, gap, switches, emp, theory, err))
    for lam, gap, switches, emp, theory, err in rows:
        cols["lambda"].append(lam)
        cols["gap"].append(gap)
        cols["trials"].append(config.trials)
        cols["switches"].append(switches)
        cols["empirical_pct"].append(emp)
        cols["theory_pct"].append(theory)
        cols["abs_error_pct"].append(err)
        errors = per_lam_errors[lam]
        cols["mean_abs_error_pct"].append(sum(errors) / len(errors))
    return ResultTable(cols, _provenance(name, config))


# -- bottleneck stability ---------------------------------------------------------


def bottleneck_bound(lam: float, eps: float, n: int) -> float:
    """Closed-form tail bound: P(distance > eps) <= 1 - (1 - (1 + lam eps)
    exp(-lam eps))^n for n matched bar pairs with two Exp(lam) endpoint
    deviations each."""
    tail = math.exp(-lam * eps) * (lam * eps + 1.0)
    return 1.0 - (1.0 - tail) ** n


def _bottleneck_fixture(n: int = 10) -> StrictBarcode:
    bars = [Bar(0.0, 150.0)]
    bars += [Bar(5.0 * i, 60.0 + 5.0 * (11 - i)) for i in range(1, n + 1)]
    return StrictBarcode(bars)


def exp_bottleneck(config: ExperimentConfig, n: int = 10) -> ResultTable:
    """Bottleneck distance between a fixed barcode and its synthesized
    round-trips across the lambda grid, with per-epsilon exceedance
    frequencies against the closed-form bound.

    Rows where the empirical exceedance beats the bound plus a 95% binomial
    margin are flagged (expected for lambda below ~0.2, where class switches
    break the matched-pair premise).
    """
    name = "bottleneck"
    fixture = _bottleneck_fixture(n)
    lams = list(config.bottleneck_lambda_grid)

    def run(idx: int):
        lam = lams[idx]
        params = config.params(lam, step=min(1.0, 0.5 / lam))
        dists = []
        for trial in range(config.trials):
            rng = _trial_rng(config, name, idx, trial)
            tree, _ = synthesize_record(fixture, params, rng=rng, store_vertices=True)
            round_trip = make_strict(tmd(tree).barcode)
            dists.append(bottleneck_distance(fixture, round_trip))
        return dists

    all_dists = _map_points(config, lams, run)
    cols = {"lambda": [], "epsilon": [], "bound": [], "exceed_count": [],
            "exceed_freq": [], "margin95": [], "exceeds_bound": [],
            "mean_distance": []}
    for lam, dists in zip(lams, all_dists):
        eps_grid = config.epsilon_grid or tuple(0.5 * k / lam for k in range(1, 21))
        mean_d = sum(dists) / len(dists)
        for eps in eps_grid:
            bound = bottleneck_bound(lam, eps, n)
            count = sum(1 for d in dists if d > eps)
            freq = count / len(dists)
            margin = 1.96 * math.sqrt(bound * (1.0 - bound) / len(dists))
            cols["lambda"].append(lam)
            cols["epsilon"].append(eps)
            cols["bound"].append(bound)
            cols["exceed_count"].append(count)
            cols["exceed_freq"].append(freq)
            cols["margin95"].append(margin)
            cols["exceeds_bound"].append(int(freq > bound + margin))
            cols["mean_distance"].append(mean_d)
    return ResultTable(cols, _provenance(name, config))


def exp_bottleneck_gapsweep(config: ExperimentConfig,
                            lams: tuple = (0.5, 1.0, 2.0),
                            gaps: tuple = (0.0, 1.5, 3.0, 4.5, 6.0, 7.5, 9.0),
                            n: int = 10) -> ResultTable:
    """Companion sweep: lower the last death by an extra gap and show the
    mean bottleneck distance depends on lambda only, not on the gap."""
    name = "bottleneck_gap"
    base = _bottleneck_fixture(n)
    points = [(lam, g) for lam in lams for g in gaps]

    def run(idx: int):
        lam, g = points[idx]
        bars = list(base.bars)
        last = bars[n]
        bars[n] = Bar(last.birth, last.death - g)
        fixture = StrictBarcode(bars)
        params = config.params(lam, step=min(1.0, 0.5 / lam))
        dists = []
        for trial in range(config.trials):
            rng = _trial_rng(config, name, idx, trial)
            tree, _ = synthesize_record(fixture, params, rng=rng, store_vertices=True)
            round_trip = make_strict(tmd(tree).barcode)
            dists.append(bottleneck_distance(fixture, round_trip))
        return sum(dists) / len(dists)

    means = _map_points(config, points, run)
    cols = {"lambda": [], "gap": [], "trials": [], "mean_distance": []}
    for (lam, g), mean_d in zip(points, means):
        cols["lambda"].append(lam)
        cols["gap"].append(g)
        cols["trials"].append(config.trials)
        cols["mean_distance"].append(mean_d)
    return ResultTable(cols, _provenance(name, config))


# -- realization-count distribution -------------------------------------------------


def trn_histogram_counts(n: int) -> dict:
    """Multiset {count(class) : class in S_n} as value -> multiplicity.

    Uses the inversion-table bijection: over all classes, the vector of bar
    indices ranges exactly once over {1} x {1,2} x ... x {1..n}, so the
    distribution of the product is a small dynamic program instead of an
    n!-term enumeration.
    """
    dist = {1: 1}
    for i in range(2, n + 1):
        new: dict = {}
        for value, count in dist.items():
            for idx in range(1, i + 1):
                key = value * idx
                new[key] = new.get(key, 0) + count
        dist = new
    return dist


def exp_trn_histogram(n_max: int, config: ExperimentConfig | None = None) -> ResultTable:
    """Realization-count histogram over all classes, for 1 <= n <= n_max."""
    if n_max > 10:
        raise ValueError("n_max is limited to 10")
    config = config or ExperimentConfig()
    cols = {"n": [], "trn": [], "count": []}
    for n in range(1, n_max + 1):
        hist = trn_histogram_counts(n)
        for value in sorted(hist):
            cols["n"].append(n)
            cols["trn"].append(value)
            cols["count"].append(hist[value])
    return ResultTable(cols, _provenance("trn_hist", config))


# -- combinatorial type distribution -------------------------------------------------


def _all_type_maps(n: int) -> list:
    """Every host tuple with f(i) < i (the full catalog of n+1-branch types)."""
    import itertools
    return [hosts for hosts in itertools.product(*(range(i) for i in range(1, n + 1)))]


def realized_type(record) -> tuple:
    """Host map of the realized tree on birth-ranked branches."""
    order = np.argsort(record.births, kind="stable")
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))
    hosts = [0] * (len(order) - 1)
    for bar in range(len(order)):
        h = int(record.hosts[bar])
        if h >= 0:
            hosts[int(rank[bar]) - 1] = int(rank[h])
    return tuple(hosts)


def exp_type_distribution(config: ExperimentConfig, spacing: float = 15.0) -> ResultTable:
    """Empirical distribution of realization types over synthesized trees,
    one row per (4-bar class, 4-branch type).

    Cells forbidden by the containment constraint stay exactly zero; the
    allowed cells are close to uniform at lambda near 1 (tips racing for the
    same bar in the same growth round are resolved in creation order, an
    O(lambda * step) bias, so the step is kept small here).
    """
    import itertools
    name = "type_dist"
    classes = list(itertools.permutations((1, 2, 3)))
    catalog = _all_type_maps(3)
    labels = {m: chr(ord("A") + i) for i, m in enumerate(catalog)}

    def run(idx: int):
        perm = classes[idx]
        rep = class_representative(perm, spacing=spacing)
        params = config.params(config.lam, step=0.1 / config.lam)
        counts = {m: 0 for m in catalog}
        for trial in range(config.trials):
            rng = _trial_rng(config, name, idx, trial)
            tree, _ = synthesize_record(rep, params, rng=rng, store_vertices=True)
            counts[tuple(tmd(tree).hosts[1:])] += 1
        return counts

    all_counts = _map_points(config, classes, run)
    cols = {"class": [], "type": [], "hosts": [], "allowed": [],
            "count": [], "pct": []}
    for perm, counts in zip(classes, all_counts):
        rep = class_representative(perm, spacing=spacing)
        allowed = {m.hosts for m in enumerate_attachments(rep)}
        for m in catalog:
            cols["class"].append("".join(map(str, perm)))
            cols["type"].append(labels[m])
            cols["hosts"].append("".join(map(str, m)))
            cols["allowed"].append(int(m in allowed))
            cols["count"].append(counts[m])
            cols["pct"].append(100.0 * counts[m] / config.trials)
    return ResultTable(cols, _provenance(name, config))


# -- gradual death switch -------------------------------------------------------------


def exp_death_switch(barcode: StrictBarcode, i: int, j: int,
                     config: ExperimentConfig) -> ResultTable:
    """Realization counts of round-trip barcodes while deaths d_i < d_j move
    toward each other over 50 equal subintervals (swapped at k = 50).

    The midpoint k = 25 ties the two input deaths; its input count column is
    0 (the barcode leaves the strict class there).
    """
    name = "death_switch"
    barcode = make_strict(barcode)
    deaths = barcode.deaths()
    if deaths[i] > deaths[j]:
        i, j = j, i
    ranks = sorted(range(1, barcode.n + 1), key=lambda b: -deaths[b])
    pos_i, pos_j = ranks.index(i), ranks.index(j)
    if abs(pos_i - pos_j) != 1:
        raise ValueError(f"bars {i} and {j} are not consecutive in death order")

    d_i, d_j = float(deaths[i]), float(deaths[j])
    width = (d_j - d_i) / 50.0
    points = list(range(51))

    def build(k: int):
        bars = list(barcode.bars)
        bars[i] = Bar(bars[i].birth, d_i + k * width)
        bars[j] = Bar(bars[j].birth, d_j - k * width)
        return bars

    def run(idx: int):
        k = points[idx]
        bars = build(k)
        births_arr = [b.birth for b in bars]
        deaths_arr = [b.death for b in bars]
        try:
            input_trn = trn(make_strict(bars))
        except ValueError:
            input_trn = 0
        params = config.params(config.lam, step=0.5)
        out = []
        for trial in range(config.trials):
            rng = _trial_rng(config, name, idx, trial)
            tree, _ = _grow_raw(births_arr, deaths_arr, params, rng,
                                store_vertices=True)
            out.append(trn(make_strict(tmd(tree).barcode)))
        return input_trn, out

    results = _map_points(config, points, run)
    cols = {"k": [], "input_trn": [], "trial": [], "output_trn": []}
    for k, (input_trn, outs) in zip(points, results):
        for trial, value in enumerate(outs):
            cols["k"].append(k)
            cols["input_trn"].append(input_trn)
            cols["trial"].append(trial)
            cols["output_trn"].append(value)
    return ResultTable(cols, _provenance(name, config))


# -- diversity of synthesized classes --------------------------------------------------


def exp_diversity(tree: GeometricTree, config: ExperimentConfig) -> ResultTable:
    """Classes and diagram points of trees synthesized from one tree's
    barcode; tree_id 0 is the original, 1..trials the synthesized ones."""
    name = "diversity"
    base = make_strict(tmd(tree).barcode)
    params = config.params(config.lam, step=0.5)

    def run(idx: int):
        rng = _trial_rng(config, name, 0, idx)
        grown, _ = synthesize_record(base, params, rng=rng, store_vertices=True)
        return make_strict(tmd(grown).barcode)

    round_trips = _map_points(config, list(range(config.trials)), run)
    cols = {"tree_id": [], "bar": [], "birth": [], "death": [], "sigma": []}

    def emit(tree_id: int, barcode: StrictBarcode):
        cls = barcode_class(barcode)
        for bar_idx, bar in enumerate(barcode.bars):
            cols["tree_id"].append(tree_id)
            cols["bar"].append(bar_idx)
            cols["birth"].append(bar.birth)
            cols["death"].append(bar.death)
            cols["sigma"].append(0 if bar_idx == 0 else cls.sigma[bar_idx - 1])

    emit(0, base)
    for tree_id, round_trip in enumerate(round_trips, start=1):
        emit(tree_id, round_trip)
    return ResultTable(cols, _provenance(name, config))


# -- biological corpora ------------------------------------------------------------------


def random_strict_barcode(n: int, rng: np.random.Generator) -> StrictBarcode:
    """Uniform strict barcode: containing bar (0, 1), births iid U(0, 0.5),
    deaths iid U(0.5, 1), resampled on ties."""
    while True:
        births = rng.uniform(0.0, 0.5, size=n)
        deaths = rng.uniform(0.5, 1.0, size=n)
        if len(set(births)) == n and len(set(deaths)) == n:
            break
    bars = [Bar(0.0, 1.0)] + [Bar(float(b), float(d)) for b, d in zip(births, deaths)]
    return StrictBarcode(bars)


def exp_bio(swc_dir, config: ExperimentConfig, manifest: dict | None = None) -> ResultTable:
    """Realization-count survey of an SWC corpus against size-matched random
    barcodes and the log(n!) ceiling.

    Row kinds: 'bio' (one per readable tree), 'bio_class' (the (k, sigma(k))
    scatter of each tree), 'random' (matched random barcode), 'ceiling'
    (log n! per bar count), 'skipped' (unreadable files).  ``manifest``
    optionally maps file names to labels (apical/basal etc.).
    """
    from .trees import parse_swc

    name = "bio"
    manifest = manifest or {}
    swc_dir = Path(swc_dir)
    files = sorted(p for p in swc_dir.iterdir() if p.suffix.lower() == ".swc")
    cols = {"kind": [], "name": [], "label": [], "n_bars": [],
            "log_trn": [], "k": [], "sigma": []}

    def add(kind, fname, label, n_bars, log_trn, k=-1, sigma=-1):
        cols["kind"].append(kind)
        cols["name"].append(fname)
        cols["label"].append(label)
        cols["n_bars"].append(n_bars)
        cols["log_trn"].append(log_trn)
        cols["k"].append(k)
        cols["sigma"].append(sigma)

    seen_sizes = set()
    for file_idx, path in enumerate(files):
        label = manifest.get(path.name, "-")
        try:
            tree = parse_swc(path.read_text())
            strict = make_strict(tmd(tree).barcode)
        except ValueError as exc:
            add("skipped", path.name, f"{type(exc).__name__}", -1, 0.0)
            continue
        value = trn(strict)
        add("bio", path.name, label, len(strict), _log_int(value))
        cls = barcode_class(strict)
        for k in range(1, strict.n + 1):
            add("bio_class", path.name, label, len(strict), 0.0,
                k=k, sigma=cls.sigma[k - 1])
        rng = _trial_rng(config, name, file_idx, 0)
        rand = random_strict_barcode(strict.n, rng)
        add("random", path.name, label, len(rand), _log_int(trn(rand)))
        seen_sizes.add(strict.n)
    for n in sorted(seen_sizes):
        add("ceiling", f"n={n}", "-", n + 1, _log_int(math.factorial(n)))
    return ResultTable(cols, _provenance(name, config))


def _log_int(value: int) -> float:
    """log of a positive (possibly huge) integer."""
    if value < 2 ** 53:
        return math.log(value)
    bits = value.bit_length() - 53
    return math.log(value >> bits) + bits * math.log(2.0)

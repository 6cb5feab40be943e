"""Outcome maps over a two-parameter plane and aggregation checks.

A sweep classifies every cell centre of a regular grid.  Colours follow
the four-way outcome legend (disease-free, endemic primary infection,
conditional coinfection, endemic coinfection); the remaining labels get
their own reserved colours so that no cell is silently merged into a
neighbouring class.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .dynamics import fast_equilibrium, simulate_complete
from .equilibria import Kind, Label, Scenario, Stability, classify
from .integrator import IntegrationError
from .params import FullParams, config_key, field_name


class SweepError(ValueError):
    pass


# (name, RGB)
COLORS = {
    "disease_free": ("yellow", (255, 221, 0)),
    "endemic_primary": ("orange", (255, 140, 0)),
    "conditional": ("gray", (150, 150, 150)),
    "endemic_coinfection": ("red", (210, 30, 30)),
    "extinction": ("black", (20, 20, 20)),
    "degenerate": ("purple", (120, 60, 170)),
    "boundary": ("blue", (40, 90, 220)),
}
COLOR_CODES = tuple(COLORS)
LEGEND = {
    "disease_free": "disease-free",
    "endemic_primary": "endemic primary infection",
    "conditional": "disease-free or endemic coinfection",
    "endemic_coinfection": "endemic coinfection",
    "extinction": "extinction",
    "degenerate": "tangent (degenerate)",
    "boundary": "threshold boundary",
}


def color_code(label: Label, coinfection_active: bool) -> str:
    if label is Label.DISEASE_FREE_GLOBAL:
        return "disease_free"
    if label in (Label.ENDEMIC_GLOBAL, Label.ENDEMIC_LOCAL):
        return "endemic_coinfection" if coinfection_active else "endemic_primary"
    if label is Label.BISTABLE:
        return "conditional"
    if label is Label.EXTINCTION:
        return "extinction"
    if label is Label.DEGENERATE_TANGENT:
        return "degenerate"
    return "boundary"


@dataclass(frozen=True)
class SweepSpec:
    base: FullParams
    axis_x: str = "delta"
    axis_y: str = "lambda"
    range_x: tuple[float, float] = (0.0, 10.0)
    range_y: tuple[float, float] = (0.0, 10.0)
    resolution: tuple[int, int] = (200, 200)

    def __post_init__(self):
        names = {f.name for f in fields(FullParams)}
        for axis in (self.axis_x, self.axis_y):
            if field_name(axis) not in names:
                raise SweepError(f"unknown sweep axis {axis!r}")
        if field_name(self.axis_x) == field_name(self.axis_y):
            raise SweepError("sweep axes must differ")
        for lo, hi in (self.range_x, self.range_y):
            if not hi > lo:
                raise SweepError(f"sweep range ({lo}, {hi}) has no positive length")
        nx, ny = self.resolution
        if nx < 2 or ny < 2:
            raise SweepError("resolution must be at least 2 cells per axis")

    def xs(self) -> np.ndarray:
        return _centres(self.range_x, self.resolution[0])

    def ys(self) -> np.ndarray:
        return _centres(self.range_y, self.resolution[1])


def _centres(bounds, n):
    lo, hi = bounds
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


@dataclass(frozen=True)
class RegionGrid:
    """Classification of every cell; arrays are indexed ``[iy, ix]``."""

    spec: SweepSpec
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray  # object array of Label
    colors: np.ndarray  # object array of colour codes
    nu_star: np.ndarray
    s1: np.ndarray  # NaN where absent
    a_bar: np.ndarray
    b_bar: np.ndarray
    r_script: np.ndarray

    def label_matrix(self) -> np.ndarray:
        return np.vectorize(lambda lab: lab.value, otypes=[object])(self.labels)

    def codes_present(self) -> set[str]:
        return set(self.colors.ravel())


def _nan(x):
    return math.nan if x is None else x


def _classify_row(base: FullParams, axis_x: str, axis_y: str, xs: Sequence[float], y: float):
    row = []
    for x in xs:
        sc = classify(base.replace(**{axis_x: x, axis_y: y}))
        th = sc.thresholds
        row.append((sc.label, sc.coinfection_active, th.nu_star, _nan(th.s1_star),
                     _nan(th.a_bar_thr), th.b_bar_thr, _nan(th.r_script)))
    return row


def _classify_block(args):
    base, axis_x, axis_y, xs, block = args
    return [(iy, _classify_row(base, axis_x, axis_y, xs, y)) for iy, y in block]


def run_sweep(spec: SweepSpec, workers: int = 1, order: Optional[Sequence[int]] = None) -> RegionGrid:
    """Classify every cell of ``spec``.

    ``workers > 1`` distributes row blocks over a process pool.
    ``order`` permutes the row evaluation order; results are placed by
    index, so the grid never depends on it.
    """
    xs, ys = spec.xs(), spec.ys()
    ny, nx = len(ys), len(xs)
    rows = list(order) if order is not None else list(range(ny))
    if sorted(rows) != list(range(ny)):
        raise SweepError("order must be a permutation of the row indices")
    indexed = [(iy, float(ys[iy])) for iy in rows]
    if workers > 1:
        chunk = max(1, math.ceil(ny / (4 * workers)))
        blocks = [indexed[i:i + chunk] for i in range(0, ny, chunk)]
        jobs = [(spec.base, spec.axis_x, spec.axis_y, xs, b) for b in blocks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_classify_block, jobs) for r in part]
    else:
        results = _classify_block((spec.base, spec.axis_x, spec.axis_y, xs, indexed))

    labels = np.empty((ny, nx), dtype=object)
    colors = np.empty((ny, nx), dtype=object)
    num = np.empty((5, ny, nx))
    for iy, row in results:
        for ix, (lab, active, nu, s1, a, b, r) in enumerate(row):
            labels[iy, ix] = lab
            colors[iy, ix] = color_code(lab, active)
            num[:, iy, ix] = (nu, s1, a, b, r)
    return RegionGrid(spec, xs, ys, labels, colors, *num)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.17g}"


def write_grid_csv(grid: RegionGrid, path) -> None:
    """One row per cell, x fastest; absent thresholds are empty fields."""
    sp = grid.spec
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([config_key(field_name(sp.axis_x)), config_key(field_name(sp.axis_y)),
                    "label", "nu_star", "S1", "Abar", "Bbar", "R"])
        for iy, y in enumerate(grid.ys):
            for ix, x in enumerate(grid.xs):
                w.writerow([f"{x:.17g}", f"{y:.17g}", grid.labels[iy, ix].value,
                            *(_fmt(arr[iy, ix]) for arr in
                              (grid.nu_star, grid.s1, grid.a_bar, grid.b_bar, grid.r_script))])


def read_grid_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (xs, ys, label matrix) from a grid CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    xs = sorted({float(r[0]) for r in rows})
    ys = sorted({float(r[1]) for r in rows})
    ix = {x: i for i, x in enumerate(xs)}
    iy = {y: i for i, y in enumerate(ys)}
    labels = np.empty((len(ys), len(xs)), dtype=object)
    for r in rows:
        labels[iy[float(r[1])], ix[float(r[0])]] = r[2]
    return np.array(xs), np.array(ys), labels


# ---------------------------------------------------------------------------
# complete system versus its aggregated approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AggregationRow:
    epsilon: float
    terminal: tuple[float, float, float]
    target: tuple[float, float, float]
    distance: float
    rel_distance: float
    converged: bool
    steps: int


@dataclass(frozen=True)
class AggregationReport:
    label: Label
    nu_star: float
    rows: tuple[AggregationRow, ...]

    @property
    def monotone(self) -> bool:
        d = [r.distance for r in self.rows]
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def conclusive(self) -> bool:
        return all(r.converged for r in self.rows)


def stable_target(sc: Scenario):
    """The hyperbolic stable equilibrium the aggregation check aims at.

    Interior equilibria take precedence over the disease-free one; in the
    bistable case that is the endemic attractor.
    """
    stable = [e for e in sc.equilibria if e.stability is Stability.STABLE]
    interior = [e for e in stable if e.kind is Kind.INTERIOR]
    if interior:
        return interior[-1]
    if stable:
        return stable[-1]
    raise SweepError(f"no hyperbolic stable equilibrium for scenario {sc.label.value}")


def validate_aggregation(
    p: FullParams,
    epsilons: Sequence[float],
    horizon: float = 50.0,
    init: Optional[Sequence[float]] = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> AggregationReport:
    """Integrate the complete system for each epsilon and measure how far it
    settles from the lifted reduced equilibrium (S*, (1 - nu*) I*, nu* I*).

    ``horizon`` is in slow time.  A run that has not reached a steady
    state by then is flagged ``converged=False`` rather than raised.
    The default tolerances are tighter than the integrator's: at the
    looser ones, step-size chatter on the fast modes keeps the residual
    above the steady-state threshold.
    """
    sc = classify(p)
    eq = stable_target(sc)
    nu = sc.thresholds.nu_star
    target = fast_equilibrium(eq.location, nu)
    if init is None:
        S_, I_ = eq.location
        seed = I_ if I_ > 0 else 0.1 * S_
        init = (1.1 * S_, 0.5 * seed, 0.5 * seed)
    norm_target = math.sqrt(sum(v * v for v in target))
    rows = []
    for eps in epsilons:
        q = p.replace(epsilon=eps)
        try:
            tr = simulate_complete(q, init, horizon, rtol=rtol, atol=atol, stop_at_steady_state=True)
            terminal = tuple(float(v) for v in tr.meta["y_final"])
            converged = bool(tr.meta["steady"])
            steps = tr.meta["steps"]
        except IntegrationError:
            terminal, converged, steps = (math.nan,) * 3, False, 0
        dist = math.dist(terminal, target)
        rows.append(AggregationRow(eps, terminal, tuple(target), dist, dist / norm_target, converged, steps))
    return AggregationReport(sc.label, nu, tuple(rows))


def write_aggregation_csv(report: AggregationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epsilon", "S", "U", "V", "S_target", "U_target", "V_target",
                    "distance", "rel_distance", "converged"])
        for r in report.rows:
            w.writerow([f"{r.epsilon:.17g}", *(f"{v:.17g}" for v in r.terminal),
                        *(f"{v:.17g}" for v in r.target),
                        f"{r.distance:.17g}", f"{r.rel_distance:.17g}", str(r.converged).lower()])

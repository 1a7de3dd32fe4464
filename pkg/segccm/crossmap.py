"""
Convergent cross mapping.

A target series is predicted from the shadow manifold of a source by
locally weighted nearest neighbours; the absolute Pearson correlation
between prediction and truth is the forecast skill. Sweeping the
library size and checking that skill converges to a high plateau gives
the direction verdict.

Naming: rho_xy is the skill of X predicted from M_y and tests X => Y.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import pearsonr

from .dynsys import TimeSeries, derive_seed
from .embedding import delay_embed
from .exceptions import ArgumentError
from .libs import csvio

logger = logging.getLogger(__name__)

# relative to the manifold diameter; nearer neighbours count as coincident
COINCIDENT_DISTANCE = 1e-12

LIBRARY_MODES = ("prefix", "random")

VERDICTS = ("bidirectional", "forward", "backward", "none")


@dataclass(frozen=True)
class VerdictRule:
    """ A direction is causal iff its curve converges to at least `floor` """

    floor: float = 0.8
    plateau_tol: float = 0.15

    def to_dict(self):
        return {"floor": self.floor, "plateau_tol": self.plateau_tol}


@dataclass(frozen=True)
class SweepConfig:
    n_sizes: int = 12
    eval_size: int = 2000
    library_mode: str = "random"
    exclusion_radius: int = 0
    # explicit library sizes; None means default_schedule
    schedule: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.library_mode not in LIBRARY_MODES:
            raise ArgumentError(
                "library_mode must be one of %s, got '%s'"
                % (", ".join(LIBRARY_MODES), self.library_mode)
            )
        if self.n_sizes < 2:
            raise ArgumentError("n_sizes must be >= 2, got %s" % self.n_sizes)
        if self.eval_size < 3:
            raise ArgumentError("eval_size must be >= 3, got %s" % self.eval_size)
        if self.exclusion_radius < 0:
            raise ArgumentError(
                "exclusion_radius must be >= 0, got %s" % self.exclusion_radius
            )

    def to_dict(self):
        return {
            "n_sizes": self.n_sizes,
            "eval_size": self.eval_size,
            "library_mode": self.library_mode,
            "exclusion_radius": self.exclusion_radius,
            "schedule": list(self.schedule) if self.schedule else None,
        }


@dataclass(frozen=True)
class Skill:
    rho: float
    # False when either side is constant and the correlation is undefined
    defined: bool = True


@dataclass
class CrossMapCurve:
    library_sizes: np.ndarray
    rho: np.ndarray
    direction: Tuple[str, str] = ("", "")
    eval_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    defined: Optional[np.ndarray] = None

    def __post_init__(self):
        self.library_sizes = np.asarray(self.library_sizes, dtype=int)
        self.rho = np.asarray(self.rho, dtype=float)
        if len(self.library_sizes) != len(self.rho):
            raise ArgumentError("One skill per library size is required")
        if np.any(np.diff(self.library_sizes) <= 0):
            raise ArgumentError("Library sizes must be strictly increasing")
        if np.any((self.rho < 0) | (self.rho > 1)):
            raise ArgumentError("Skills must lie in [0, 1]")
        if self.defined is None:
            self.defined = np.ones(len(self.rho), dtype=bool)

    @property
    def final(self):
        return float(self.rho[-1])


def manifold_diameter(points):
    """ Diagonal of the bounding box """
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def neighbor_weights(distances, tiny=0.0):
    """
    Exponential weights u_i = exp(-d_i / d_1), normalised to sum to 1.

    `distances` is (queries, k) sorted ascending per row. Rows whose
    nearest distance is below `tiny` share equal weight among their
    coincident neighbours instead.
    """
    d = np.atleast_2d(np.asarray(distances, dtype=float))
    w = np.empty_like(d)
    coincident = d[:, 0] <= tiny
    regular = ~coincident
    if regular.any():
        u = np.exp(-d[regular] / d[regular, :1])
        w[regular] = u / u.sum(axis=1, keepdims=True)
    if coincident.any():
        z = (d[coincident] <= tiny).astype(float)
        w[coincident] = z / z.sum(axis=1, keepdims=True)
    return w


def cross_map_estimate(source, target_values, library, queries, exclusion_radius=0):
    """
    Predict target values at the query points from the library points.

    For each query the m+1 nearest library points are found, skipping
    those within `exclusion_radius` samples of the query's time index
    (radius 0 skips only the query itself). The prediction is the
    weighted mean of the target at the neighbours' time indices.

    Args:
        source: ShadowManifold to take neighbours from.
        target_values: TimeSeries or array indexed by source time index.
        library: point positions in `source` usable as neighbours.
        queries: point positions in `source` to predict.

    Returns:
        array of predictions, one per query
    """
    target = np.asarray(getattr(target_values, "values", target_values), dtype=float)
    library = np.asarray(library, dtype=int)
    queries = np.asarray(queries, dtype=int)
    k = source.params.m + 1
    if len(library) < k + 1:
        raise ArgumentError(
            "Library of %s points is too small for m=%s (need %s)"
            % (len(library), source.params.m, k + 1)
        )
    if source.time_index[-1] >= len(target):
        raise ArgumentError("Target series is shorter than the source manifold")

    lib_times = source.time_index[library]
    query_times = source.time_index[queries]
    n_query = min(len(library), k + 2 * exclusion_radius + 1)
    tree = cKDTree(source.points[library])
    dist, nbr = tree.query(source.points[queries], k=n_query)
    dist = dist.reshape(len(queries), n_query)
    nbr = nbr.reshape(len(queries), n_query)

    valid = np.abs(lib_times[nbr] - query_times[:, None]) > exclusion_radius
    if np.any(valid.sum(axis=1) < k):
        raise ArgumentError(
            "Library leaves fewer than %s neighbours outside the exclusion radius" % k
        )
    # valid neighbours first, distance order kept
    order = np.argsort(~valid, axis=1, kind="stable")[:, :k]
    dist = np.take_along_axis(dist, order, axis=1)
    nbr = np.take_along_axis(nbr, order, axis=1)

    tiny = COINCIDENT_DISTANCE * manifold_diameter(source.points)
    weights = neighbor_weights(dist, tiny)
    return np.sum(weights * target[lib_times[nbr]], axis=1)


def forecast_skill(predicted, actual):
    """ |Pearson r| between prediction and truth """
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if len(predicted) != len(actual):
        raise ArgumentError(
            "Length mismatch: %s predictions for %s values" % (len(predicted), len(actual))
        )
    if len(actual) < 3:
        raise ArgumentError("Forecast skill needs at least 3 values")
    if np.ptp(predicted) == 0 or np.ptp(actual) == 0:
        return Skill(0.0, False)
    r = pearsonr(predicted, actual)[0]
    return Skill(float(min(1.0, abs(r))), True)


def default_schedule(n_points, m, n_sizes=12):
    """
    Geometrically spaced library sizes from max(5(m+1), 50) to n_points
    """
    low = min(max(5 * (m + 1), 50), n_points)
    sizes = np.unique(np.round(np.geomspace(low, n_points, n_sizes)).astype(int))
    return sizes


def evaluation_positions(n_points, eval_size=2000):
    """ Uniformly strided point positions, at most eval_size of them """
    count = min(eval_size, n_points)
    return np.unique(np.round(np.linspace(0, n_points - 1, count)).astype(int))


def library_positions(n_points, size, mode="random", rng=None):
    """ Contiguous prefix, or a sorted seeded subsample of the manifold """
    if mode == "prefix":
        return np.arange(size)
    if rng is None:
        rng = np.random.default_rng(0)
    return np.sort(rng.choice(n_points, size, replace=False))


def sweep_manifolds(man_x, man_y, values_x, values_y, schedule=None, seed=0,
                    config=SweepConfig()):
    """
    Cross-map both directions between two manifolds over a library schedule.

    The manifolds must share time indices. Returns (curve_xy, curve_yx):
    X predicted from M_y and Y predicted from M_x.
    """
    if not np.array_equal(man_x.time_index, man_y.time_index):
        raise ArgumentError("Manifolds must share their time indices")
    n_points = len(man_x)
    m = max(man_x.params.m, man_y.params.m)
    if schedule is None:
        schedule = config.schedule
    if schedule is None:
        schedule = default_schedule(n_points, m, config.n_sizes)
    schedule = np.asarray(schedule, dtype=int)
    if len(schedule) == 0 or schedule[-1] > n_points:
        raise ArgumentError(
            "Library schedule exceeds the %s available points" % n_points
        )
    if schedule[0] < m + 2:
        raise ArgumentError("Smallest library must hold at least %s points" % (m + 2))

    eval_pos = evaluation_positions(n_points, config.eval_size)
    eval_times = man_x.time_index[eval_pos]
    values_x = np.asarray(getattr(values_x, "values", values_x), dtype=float)
    values_y = np.asarray(getattr(values_y, "values", values_y), dtype=float)
    truth_x = values_x[eval_times]
    truth_y = values_y[eval_times]

    logger.debug(
        "Sweeping %s library sizes (%s..%s) over %s points"
        % (len(schedule), schedule[0], schedule[-1], n_points)
    )
    rho_xy, rho_yx, def_xy, def_yx = [], [], [], []
    for size in schedule:
        rng = None
        if config.library_mode == "random":
            rng = np.random.default_rng(derive_seed(seed, "library", int(size)))
        library = library_positions(n_points, int(size), config.library_mode, rng)
        skill_xy = forecast_skill(
            cross_map_estimate(man_y, values_x, library, eval_pos, config.exclusion_radius),
            truth_x,
        )
        skill_yx = forecast_skill(
            cross_map_estimate(man_x, values_y, library, eval_pos, config.exclusion_radius),
            truth_y,
        )
        rho_xy.append(skill_xy.rho)
        rho_yx.append(skill_yx.rho)
        def_xy.append(skill_xy.defined)
        def_yx.append(skill_yx.defined)

    curve_xy = CrossMapCurve(
        schedule, rho_xy, (man_y.source_id, man_x.source_id), eval_times, np.array(def_xy)
    )
    curve_yx = CrossMapCurve(
        schedule, rho_yx, (man_x.source_id, man_y.source_id), eval_times, np.array(def_yx)
    )
    return curve_xy, curve_yx


def ccm_sweep(series_x, series_y, params, schedule=None, seed=0, config=SweepConfig(),
              params_y=None):
    """
    Embed both series and run the cross-map sweep in both directions.

    `params_y` defaults to `params`. Points are aligned on the time
    indices both embeddings share.
    """
    if len(series_x) != len(series_y):
        raise ArgumentError(
            "Series lengths differ: %s and %s" % (len(series_x), len(series_y))
        )
    if isinstance(series_x, TimeSeries) and isinstance(series_y, TimeSeries):
        if not np.isclose(series_x.dt, series_y.dt):
            raise ArgumentError(
                "Sampling intervals differ: %s and %s" % (series_x.dt, series_y.dt)
            )
    man_x = delay_embed(series_x, params)
    man_y = delay_embed(series_y, params_y or params)
    common = man_x.common_indices(man_y)
    man_x, man_y = man_x.restrict(common), man_y.restrict(common)
    return sweep_manifolds(man_x, man_y, series_x, series_y, schedule, seed, config)


@dataclass(frozen=True)
class ConvergenceStats:
    converged: bool
    final: float
    early_mean: float
    late_mean: float
    slope: float

    def to_dict(self):
        return {
            "converged": self.converged,
            "final": self.final,
            "early_mean": self.early_mean,
            "late_mean": self.late_mean,
            "slope": self.slope,
        }


def convergence_check(curve, plateau_tol=0.15, floor=0.8):
    """
    Does the curve converge to a plateau of at least `floor`?

    True iff the final skill reaches `floor`, the mean over the last
    quartile of library sizes exceeds the mean over the first, and the
    least-squares slope of rho against log10(L) over the last half is
    below `plateau_tol` (per decade).
    """
    rho = curve.rho
    n = len(rho)
    if n < 4:
        raise ArgumentError("Convergence needs at least 4 library sizes, got %s" % n)
    quarter = max(1, n // 4)
    early = float(np.mean(rho[:quarter]))
    late = float(np.mean(rho[-quarter:]))
    half = n // 2
    slope = float(np.polyfit(np.log10(curve.library_sizes[half:]), rho[half:], 1)[0])
    final = float(rho[-1])
    converged = final >= floor and late > early and slope < plateau_tol
    return ConvergenceStats(bool(converged), final, early, late, slope)


def verdict_label(verdict, x_name="X", y_name="Y"):
    """ Arrow notation: X<=>Y, X=>Y, Y=>X or none """
    x_name, y_name = x_name.upper(), y_name.upper()
    return {
        "bidirectional": "%s<=>%s" % (x_name, y_name),
        "forward": "%s=>%s" % (x_name, y_name),
        "backward": "%s=>%s" % (y_name, x_name),
        "none": "none",
    }[verdict]


@dataclass
class CausalVerdict:
    rho_xy_final: float
    rho_yx_final: float
    converged_xy: bool
    converged_yx: bool
    verdict: str
    rule: VerdictRule = VerdictRule()
    stats_xy: Optional[ConvergenceStats] = None
    stats_yx: Optional[ConvergenceStats] = None

    def label(self, x_name="X", y_name="Y"):
        return verdict_label(self.verdict, x_name, y_name)

    def to_dict(self):
        return {
            "rho_xy": self.rho_xy_final,
            "rho_yx": self.rho_yx_final,
            "converged_xy": self.converged_xy,
            "converged_yx": self.converged_yx,
            "verdict": self.verdict,
            "thresholds": self.rule.to_dict(),
        }


def decide(converged_xy, converged_yx):
    if converged_xy and converged_yx:
        return "bidirectional"
    if converged_xy:
        return "forward"
    if converged_yx:
        return "backward"
    return "none"


def causal_verdict(curve_xy, curve_yx, rule=VerdictRule()):
    stats_xy = convergence_check(curve_xy, rule.plateau_tol, rule.floor)
    stats_yx = convergence_check(curve_yx, rule.plateau_tol, rule.floor)
    return CausalVerdict(
        curve_xy.final,
        curve_yx.final,
        stats_xy.converged,
        stats_yx.converged,
        decide(stats_xy.converged, stats_yx.converged),
        rule,
        stats_xy,
        stats_yx,
    )


def shuffle_series(series, seed):
    """ Seeded random permutation of the values """
    rng = np.random.default_rng(seed)
    return TimeSeries(rng.permutation(series.values), series.dt, series.t0, series.name)


def write_curves(path, curve_xy, curve_yx):
    csvio.write_table(
        path, ["L", "rho_xy", "rho_yx"], [curve_xy.library_sizes, curve_xy.rho, curve_yx.rho]
    )

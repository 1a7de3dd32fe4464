"""
Segment cross mapping for systems with a two-fold rotation symmetry.

When a system is equivariant under a half-turn, the delay embedding of
the invariant (even) variable folds the two symmetric halves of the
attractor onto each other, and plain CCM misses the direction that has
to be predicted from that folded manifold. The odd variable's manifold
keeps the symmetry as an inversion; splitting it in two with k-means
and cross mapping each half separately recovers the missed direction.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.spatial import cKDTree

from .crossmap import (
    CrossMapCurve,
    SweepConfig,
    VerdictRule,
    causal_verdict,
    default_schedule,
    sweep_manifolds,
    verdict_label,
)
from .diagnostics import recurrence_check, subsample
from .dynsys import add_noise, derive_seed, lie_derivatives, observe
from .embedding import delay_embed
from .exceptions import (
    ArgumentError,
    DegenerateInputError,
    SegmentTooSmallError,
    UnsupportedSymmetryError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentConfig:
    sweep: SweepConfig = SweepConfig()
    verdict: VerdictRule = VerdictRule()
    symmetry_threshold: float = 0.05
    kmeans_max_iter: int = 100
    epsilon_quantile: float = 0.10
    check_recurrence: bool = True

    def to_dict(self):
        return {
            "sweep": self.sweep.to_dict(),
            "verdict": self.verdict.to_dict(),
            "symmetry_threshold": self.symmetry_threshold,
            "kmeans_max_iter": self.kmeans_max_iter,
            "epsilon_quantile": self.epsilon_quantile,
            "check_recurrence": self.check_recurrence,
        }


@dataclass
class SymmetryReport:
    score: float
    threshold: float
    is_symmetric: bool
    center: np.ndarray
    reflected: float = 0.0
    spacing: float = 0.0
    iterations: int = 0

    def to_dict(self):
        return {
            "score": self.score,
            "threshold": self.threshold,
            "is_symmetric": self.is_symmetric,
            "center": self.center.tolist(),
            "reflected": self.reflected,
            "spacing": self.spacing,
            "iterations": self.iterations,
        }


def _points(manifold):
    return np.asarray(getattr(manifold, "points", manifold), dtype=float)


def _exclusion_window(manifold):
    params = getattr(manifold, "params", None)
    if params is None:
        return 0
    return (params.m - 1) * params.tau


def refine_center(tree, points, sample, center, radius, max_iter=20, tol=1e-4):
    """
    Move c until reflected sample points sit on the manifold on average.

    Each step shifts c by half the mean offset between 2c - p and its
    nearest manifold point. Stops when the step is below `tol` radii.
    """
    iteration = 0
    for iteration in range(1, max_iter + 1):
        reflected = 2.0 * center - sample
        _, idx = tree.query(reflected)
        step = np.mean(points[idx] - reflected, axis=0) / 2.0
        center = center + step
        if np.linalg.norm(step) < tol * radius:
            break
    return center, iteration


def spacing_baseline(tree, points, sample_pos, time_index, window):
    """
    Mean distance from sampled points to their nearest manifold point
    more than `window` samples away in time.
    """
    k = min(len(points), 2 * window + 2)
    distances, idx = tree.query(points[sample_pos], k=k)
    far = np.abs(time_index[idx] - time_index[sample_pos][:, None]) > window
    found = far.any(axis=1)
    if not found.any():
        return 0.0
    nearest = distances[np.arange(len(sample_pos)), np.argmax(far, axis=1)]
    return float(np.mean(nearest[found]))


def inversion_symmetry_score(manifold, threshold=0.05, max_points=2000, seed=0,
                             refine=True, window=None):
    """
    How far the manifold is from being symmetric under p -> 2c - p.

    c starts at the mean point and is refined with `refine_center`. The
    reflected distance is the mean distance from reflected points (a
    seeded sample of at most `max_points`) to their nearest manifold
    point. The spacing is the same sample's mean distance to its nearest
    point outside a `window` of samples in time, which defaults to the
    embedding span (m - 1) tau. The score is reflected distance minus
    spacing, floored at 0, both divided by the RMS radius about the mean.
    0 means inversion symmetric up to the manifold's own resolution.
    """
    points = _points(manifold)
    if len(points) < 100:
        raise ArgumentError(
            "Symmetry scoring needs at least 100 points, got %s" % len(points)
        )
    mean = points.mean(axis=0)
    radius = float(np.sqrt(np.mean(np.sum((points - mean) ** 2, axis=1))))
    if radius == 0:
        raise DegenerateInputError("All manifold points coincide")
    time_index = np.asarray(getattr(manifold, "time_index", np.arange(len(points))))
    if window is None:
        window = _exclusion_window(manifold)

    tree = cKDTree(points)
    sample_pos = subsample(len(points), max_points, seed)
    sample = points[sample_pos]
    center, iterations = mean, 0
    if refine:
        center, iterations = refine_center(tree, points, sample, mean, radius)

    distances, _ = tree.query(2.0 * center - sample)
    reflected = float(np.mean(distances) / radius)
    spacing = spacing_baseline(tree, points, sample_pos, time_index, window) / radius
    score = max(reflected - spacing, 0.0)
    logger.debug(
        "Inversion symmetry score %.4f (reflected %.4f, spacing %.4f, threshold %s)"
        % (score, reflected, spacing, threshold)
    )
    return SymmetryReport(
        score, threshold, score < threshold, center, reflected, spacing, iterations
    )


@dataclass
class SegmentLabels:
    """ Per-point label 1 or 2, aligned with `time_index` """

    labels: np.ndarray
    centroids: np.ndarray
    time_index: np.ndarray
    iterations: int = 0

    def times(self, label):
        return self.time_index[self.labels == label]

    def swapped(self):
        return SegmentLabels(
            3 - self.labels, self.centroids[::-1].copy(), self.time_index, self.iterations
        )


def kmeans2(manifold, seed=0, max_iter=100):
    """
    Two-means clustering seeded with a symmetric pair.

    The first centroid is the point farthest from the mean, the second
    its reflection through the mean. Lloyd iterations run until the
    assignment stops changing or `max_iter` is reached. An emptied
    cluster is reseeded with a point drawn by the seeded generator.
    """
    points = _points(manifold)
    time_index = np.asarray(getattr(manifold, "time_index", np.arange(len(points))))
    if len(points) < 2 or np.all(np.ptp(points, axis=0) == 0):
        raise DegenerateInputError("k-means needs at least two distinct points")

    rng = np.random.default_rng(seed)
    mean = points.mean(axis=0)
    first = points[np.argmax(np.sum((points - mean) ** 2, axis=1))]
    centroids = np.array([first, 2.0 * mean - first])

    labels = None
    iteration = 0
    for iteration in range(1, max_iter + 1):
        d = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new = np.where(d[:, 0] <= d[:, 1], 1, 2)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in (1, 2):
            members = points[labels == k]
            if len(members):
                centroids[k - 1] = members.mean(axis=0)
            else:
                logger.warning("k-means cluster %s emptied; reseeding" % k)
                centroids[k - 1] = points[rng.integers(len(points))]
    logger.debug(
        "k-means: %s iterations, segment sizes %s / %s"
        % (iteration, np.sum(labels == 1), np.sum(labels == 2))
    )
    return SegmentLabels(labels, centroids, time_index, iteration)


def scaled_schedule(base, n_total, n_segment, min_size):
    """ A library schedule shrunk in proportion to a segment's size """
    sizes = np.round(np.asarray(base, dtype=float) * n_segment / n_total).astype(int)
    sizes = np.clip(sizes, min_size, n_segment)
    return np.unique(sizes)


@dataclass
class SegmentResult:
    curve_xy: CrossMapCurve
    curve_yx: CrossMapCurve
    size: int


def segment_skills(man_a, man_b, values_a, values_b, labels, schedule=None, seed=0,
                   config=SweepConfig()):
    """
    Cross map within each of the two labelled segments.

    Both manifolds are restricted to the time indices of each label (no
    re-embedding). `schedule` is the full-manifold schedule and is
    scaled to each segment's size.
    """
    common = man_a.common_indices(man_b)
    m = max(man_a.params.m, man_b.params.m)
    required = 5 * (m + 1)
    if schedule is None:
        schedule = config.schedule
    if schedule is None:
        schedule = default_schedule(len(common), m, config.n_sizes)

    results = []
    for label in (1, 2):
        times = np.intersect1d(labels.times(label), common)
        if len(times) < required:
            raise SegmentTooSmallError(
                "Segment %s holds %s points; at least %s are required"
                % (label, len(times), required),
                len(times),
                required,
            )
        sub_a, sub_b = man_a.restrict(times), man_b.restrict(times)
        sizes = scaled_schedule(schedule, len(common), len(times), required)
        logger.debug("Segment %s: %s points, libraries %s" % (label, len(times), sizes))
        curve_xy, curve_yx = sweep_manifolds(
            sub_a, sub_b, values_a, values_b, sizes, derive_seed(seed, "segment", label), config
        )
        results.append(SegmentResult(curve_xy, curve_yx, len(times)))
    if len(results[0].curve_xy.rho) != len(results[1].curve_xy.rho):
        logger.warning(
            "Segments of %s and %s points give schedules of different length"
            % (results[0].size, results[1].size)
        )
    return results


def combine_curves(first, second):
    """ Library sizes add up, skills average; aligned from the largest library down """
    count = min(len(first.rho), len(second.rho))
    sizes = first.library_sizes[-count:] + second.library_sizes[-count:]
    rho = (first.rho[-count:] + second.rho[-count:]) / 2.0
    return CrossMapCurve(
        sizes,
        rho,
        first.direction,
        np.union1d(first.eval_indices, second.eval_indices),
        first.defined[-count:] & second.defined[-count:],
    )


@dataclass
class CausalReport:
    method: str
    rho_xy: float
    rho_yx: float
    verdict: object
    curve_xy: CrossMapCurve
    curve_yx: CrossMapCurve
    names: tuple = ("x", "y")
    segment_skills: Dict[str, float] = field(default_factory=dict)
    segment_sizes: tuple = ()
    segmented: Optional[str] = None
    symmetry: Dict[str, SymmetryReport] = field(default_factory=dict)
    recurrence: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def label(self):
        return self.verdict.label(*self.names)

    def to_dict(self):
        return {
            "method": self.method,
            "pair": list(self.names),
            "rho_xy": self.rho_xy,
            "rho_yx": self.rho_yx,
            "segment_skills": self.segment_skills,
            "segment_sizes": list(self.segment_sizes),
            "segmented": self.segmented,
            "verdict": self.verdict.verdict,
            "verdict_label": self.label,
            "converged_xy": self.verdict.converged_xy,
            "converged_yx": self.verdict.converged_yx,
            "thresholds": self.verdict.rule.to_dict(),
            "library_sizes": self.curve_xy.library_sizes.tolist(),
            "curve_xy": self.curve_xy.rho.tolist(),
            "curve_yx": self.curve_yx.rho.tolist(),
            "symmetry": {k: v.to_dict() for k, v in self.symmetry.items()},
            "recurrence": {k: v.to_dict() for k, v in self.recurrence.items()},
            "warnings": self.warnings,
            "config": self.config,
        }


def _check_pair(series_a, series_b):
    if len(series_a) != len(series_b):
        raise ArgumentError(
            "Series lengths differ: %s and %s" % (len(series_a), len(series_b))
        )
    if not np.isclose(series_a.dt, series_b.dt):
        raise ArgumentError(
            "Sampling intervals differ: %s and %s" % (series_a.dt, series_b.dt)
        )


def _embed_pair(series_a, series_b, params_a, params_b):
    man_a = delay_embed(series_a, params_a, "a")
    man_b = delay_embed(series_b, params_b, "b")
    common = man_a.common_indices(man_b)
    return man_a.restrict(common), man_b.restrict(common)


def _config_echo(params_a, params_b, config, seed):
    return {
        "tau_a": params_a.tau,
        "m_a": params_a.m,
        "tau_b": params_b.tau,
        "m_b": params_b.m,
        "seed": seed,
        **config.to_dict(),
    }


def ccm_report(series_a, series_b, params_a, params_b=None, config=SegmentConfig(), seed=0):
    """ Plain CCM between two series, as a CausalReport """
    params_b = params_b or params_a
    _check_pair(series_a, series_b)
    man_a, man_b = _embed_pair(series_a, series_b, params_a, params_b)
    curve_xy, curve_yx = sweep_manifolds(
        man_a, man_b, series_a, series_b, None, derive_seed(seed, "ccm"), config.sweep
    )
    verdict = causal_verdict(curve_xy, curve_yx, config.verdict)
    return CausalReport(
        "ccm",
        curve_xy.final,
        curve_yx.final,
        verdict,
        curve_xy,
        curve_yx,
        names=(series_a.name, series_b.name),
        config=_config_echo(params_a, params_b, config, seed),
    )


def segment_ccm(series_a, series_b, params_a, params_b=None, config=SegmentConfig(), seed=0):
    """
    Segment CCM between two aligned series.

    1. check recurrence of both series (a failure is a warning)
    2. embed both and align them on shared time indices
    3. score both manifolds for inversion symmetry
    4. exactly one symmetric: split it with kmeans2, cross map within
       each segment and average the two segments' skills
    5. otherwise plain CCM
    """
    params_b = params_b or params_a
    _check_pair(series_a, series_b)
    names = (series_a.name, series_b.name)
    warnings = []

    man_a, man_b = _embed_pair(series_a, series_b, params_a, params_b)

    recurrence = {}
    if config.check_recurrence:
        for key, man in (("a", man_a), ("b", man_b)):
            result = recurrence_check(
                man, config.epsilon_quantile, seed=derive_seed(seed, "recurrence", key)
            )
            recurrence[key] = result
            if not result.recurrent:
                warnings.append(
                    "%s is not recurrent (fraction %.3f); CCM prerequisites fail"
                    % (names[0 if key == "a" else 1], result.fraction)
                )

    symmetry = {
        key: inversion_symmetry_score(
            man, config.symmetry_threshold, seed=derive_seed(seed, "symmetry", key)
        )
        for key, man in (("a", man_a), ("b", man_b))
    }
    symmetric = [key for key in ("a", "b") if symmetry[key].is_symmetric]
    echo = _config_echo(params_a, params_b, config, seed)

    if len(symmetric) != 1:
        if len(symmetric) == 2:
            warnings.append("both manifolds are inversion symmetric; plain CCM used")
        else:
            warnings.append("no manifold is inversion symmetric; plain CCM used")
        curve_xy, curve_yx = sweep_manifolds(
            man_a, man_b, series_a, series_b, None, derive_seed(seed, "ccm"), config.sweep
        )
        verdict = causal_verdict(curve_xy, curve_yx, config.verdict)
        return CausalReport(
            "ccm", curve_xy.final, curve_yx.final, verdict, curve_xy, curve_yx,
            names=names, symmetry=symmetry, recurrence=recurrence,
            warnings=warnings, config=echo,
        )

    key = symmetric[0]
    labels = kmeans2(
        man_a if key == "a" else man_b, derive_seed(seed, "kmeans"), config.kmeans_max_iter
    )
    first, second = segment_skills(
        man_a, man_b, series_a, series_b, labels, None, seed, config.sweep
    )
    curve_xy = combine_curves(first.curve_xy, second.curve_xy)
    curve_yx = combine_curves(first.curve_yx, second.curve_yx)
    verdict = causal_verdict(curve_xy, curve_yx, config.verdict)
    skills = {
        "rho_xy_1": first.curve_xy.final,
        "rho_xy_2": second.curve_xy.final,
        "rho_yx_1": first.curve_yx.final,
        "rho_yx_2": second.curve_yx.final,
    }
    logger.debug("Segment skills %s" % skills)
    return CausalReport(
        "sccm",
        (skills["rho_xy_1"] + skills["rho_xy_2"]) / 2.0,
        (skills["rho_yx_1"] + skills["rho_yx_2"]) / 2.0,
        verdict,
        curve_xy,
        curve_yx,
        names=names,
        segment_skills=skills,
        segment_sizes=(first.size, second.size),
        segmented=key,
        symmetry=symmetry,
        recurrence=recurrence,
        warnings=warnings,
        config=echo,
    )


def differential_map(system, measurement, state, m=3):
    """ F_{h,m}(x) = (h, h', ..., h^(m-1)) along the flow at x """
    return lie_derivatives(system, measurement, state, m)


def parity_check_differential(system, measurement, n_points=100, seed=0, m=3):
    """
    Does the differential map carry the measurement's parity?

    For a half-turn R and a coordinate h that is even (odd) under R,
    F(R x) must equal F(x) (-F(x)) exactly. Checked at `n_points`
    random states.
    """
    if system.symmetry.kind != "c2":
        raise UnsupportedSymmetryError(
            "%s has no two-fold rotation symmetry (kind '%s')"
            % (system.name, system.symmetry.kind)
        )
    if not isinstance(measurement, (int, np.integer, str)):
        raise ArgumentError("Parity checks need a coordinate measurement")
    index = system.variable_index(measurement)
    parity = system.symmetry.parity(index)

    x0 = system.default_config.x0 if system.default_config else (1.0,)
    scale = max(1.0, 2.0 * float(np.max(np.abs(x0))))
    rng = np.random.default_rng(seed)
    for x in rng.uniform(-scale, scale, (n_points, system.dim)):
        image = differential_map(system, index, system.symmetry.act(x), m)
        if not np.array_equal(image, parity * differential_map(system, index, x, m)):
            logger.debug("Parity broken at %s" % x)
            return False
    return True


def describe(report):
    """ One-line summary of a CausalReport """
    return "%s %s: rho_xy=%.3f rho_yx=%.3f verdict %s" % (
        report.method,
        "/".join(report.names),
        report.rho_xy,
        report.rho_yx,
        verdict_label(report.verdict.verdict, *report.names),
    )


def series_pair(traj, pair, sigma=0.0, seed=0):
    """ Observed (and optionally noisy) series for a variable pair """
    out = []
    for name in pair:
        series = observe(traj, name)
        out.append(add_noise(series, sigma, derive_seed(seed, "noise", name)))
    return tuple(out)


"""
Pre-flight checks for cross mapping.

* Recurrence: CCM needs trajectories that revisit neighbourhoods of
  earlier states. Checked on a distance plot.
* Observability: a measurement reconstructs the state only if the
  Jacobian of its Lie derivatives (the observability matrix) has full
  rank.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import distance_matrix as pairwise_distances

from .dynsys import lie_derivatives, measurement_weights
from .exceptions import ArgumentError, NumericalError
from .libs import csvio

logger = logging.getLogger(__name__)

MAX_DISTANCE_POINTS = 5000
MAX_RECURRENCE_POINTS = 2000


def as_points(data):
    """
    (points, sample indices) of a manifold, trajectory, series or array
    """
    if hasattr(data, "points") and hasattr(data, "time_index"):
        return np.asarray(data.points, dtype=float), np.asarray(data.time_index)
    if hasattr(data, "states"):
        points = data.states
    elif hasattr(data, "values"):
        points = np.asarray(data.values, dtype=float)[:, None]
    else:
        try:
            points = np.asarray(data, dtype=float)
        except ValueError:
            raise ArgumentError("Points must share one dimension") from None
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise ArgumentError("Points must form an (N, d) array, got shape %s" % (points.shape,))
    return points, np.arange(len(points))


def subsample(n, max_points, seed=0):
    """ Sorted seeded sample of at most max_points positions out of n """
    if n <= max_points:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, max_points, replace=False))


@dataclass
class DistanceMatrix:
    entries: np.ndarray
    # sample index of each row
    indices: np.ndarray

    @property
    def n_states(self):
        return len(self.entries)

    def to_csv(self, path):
        csvio.write_table(
            path,
            ["idx"] + ["d%d" % i for i in self.indices],
            [self.indices] + list(self.entries.T),
        )


def distance_matrix(points, max_points=MAX_DISTANCE_POINTS, seed=0):
    """
    Euclidean distances between all pairs of points.

    Above `max_points` states a seeded uniform subsample is used; the
    sample indices of the kept rows are in `indices`.
    """
    points, indices = as_points(points)
    if len(points) < 2:
        raise ArgumentError("A distance matrix needs at least 2 points")
    keep = subsample(len(points), max_points, seed)
    if len(keep) < len(points):
        logger.debug("Distance matrix on %s of %s points" % (len(keep), len(points)))
    sub = points[keep]
    entries = pairwise_distances(sub, sub)
    np.fill_diagonal(entries, 0.0)
    return DistanceMatrix(entries, indices[keep])


def recurrence_matrix(dm, epsilon_quantile=0.10):
    """ 0/1 matrix of pairs closer than the epsilon_quantile distance """
    off = dm.entries[np.triu_indices(dm.n_states, k=1)]
    epsilon = np.quantile(off, epsilon_quantile)
    return (dm.entries < epsilon).astype(int)


def dominant_period(values):
    """
    Dominant oscillation period in samples, from zero crossings of the
    mean-removed series (two crossings per period).

    None for a constant series.
    """
    values = np.asarray(values, dtype=float)
    centred = values - values.mean()
    if not np.any(centred):
        return None
    signs = np.sign(centred[centred != 0])
    crossings = int(np.count_nonzero(np.diff(signs)))
    if crossings == 0:
        return None
    return 2.0 * len(values) / crossings


@dataclass
class RecurrenceResult:
    recurrent: bool
    fraction: float
    status: str
    epsilon: float
    min_separation: float

    def to_dict(self):
        return {
            "recurrent": self.recurrent,
            "fraction": self.fraction,
            "status": self.status,
            "epsilon": self.epsilon,
            "min_separation": self.min_separation,
        }


def recurrence_check(points, epsilon_quantile=0.10, min_separation=None,
                     max_points=MAX_RECURRENCE_POINTS, seed=0):
    """
    Do the states come back?

    epsilon is the `epsilon_quantile` quantile of the off-diagonal
    distances. A point recurs if some other point at least
    `min_separation` samples away lies within epsilon; the data is
    recurrent if more than half of the points recur.

    min_separation defaults to twice the dominant period of the first
    coordinate, or N/20 when no period can be estimated.
    """
    pts, indices = as_points(points)
    n = len(pts)
    if n < 100:
        raise ArgumentError("Recurrence check needs at least 100 points, got %s" % n)
    if not 0 < epsilon_quantile < 1:
        raise ArgumentError(
            "epsilon_quantile must lie in (0, 1), got %s" % epsilon_quantile
        )
    if min_separation is None:
        period = dominant_period(pts[:, 0])
        min_separation = 2.0 * period if period is not None else n / 20.0

    dm = distance_matrix(pts, max_points, seed)
    # sample indices, not row numbers, decide separation
    sample_index = indices[dm.indices]
    off = dm.entries[np.triu_indices(dm.n_states, k=1)]
    epsilon = float(np.quantile(off, epsilon_quantile))
    separated = np.abs(sample_index[:, None] - sample_index[None, :]) >= min_separation
    recurs = np.any((dm.entries < epsilon) & separated, axis=1)
    fraction = float(np.mean(recurs))
    recurrent = fraction > 0.5
    status = "recurrent" if recurrent else "non-recurrent"
    logger.debug(
        "Recurrence: fraction %.3f (epsilon %.4g, min separation %.1f)"
        % (fraction, epsilon, min_separation)
    )
    if not recurrent:
        logger.warning(
            "Data is not recurrent (fraction %.3f); cross mapping prerequisites fail"
            % fraction
        )
    return RecurrenceResult(recurrent, fraction, status, epsilon, float(min_separation))


@dataclass
class ObservabilityReport:
    matrix: np.ndarray
    singular_values: np.ndarray
    numerical_rank: int
    state: np.ndarray
    tol: float

    def to_dict(self):
        return {
            "state": self.state.tolist(),
            "singular_values": self.singular_values.tolist(),
            "rank": self.numerical_rank,
            "tol": self.tol,
        }


def numerical_rank(report, tol=1e-6):
    """ Number of singular values above tol * largest """
    if not 0 < tol < 1:
        raise ArgumentError("tol must lie in (0, 1), got %s" % tol)
    sv = np.asarray(getattr(report, "singular_values", report), dtype=float)
    if len(sv) == 0 or sv.max() == 0:
        return 0
    return int(np.count_nonzero(sv > tol * sv.max()))


def observability_matrix(system, measurement, state, fd_step=1e-4, rank_tol=1e-6,
                         order=None):
    """
    Observability matrix of h at `state`.

    Row j is the gradient of L_f^j h, j = 0..order-1 (order defaults to
    the system dimension). Lie derivative values come from the Taylor
    recursion of the flow; gradients are central differences with step
    fd_step * max(1, |x_k|) in coordinate k.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (system.dim,) or not np.all(np.isfinite(state)):
        raise ArgumentError("State must be a finite vector of dimension %s" % system.dim)
    if not fd_step > 0:
        raise ArgumentError("fd_step must be positive, got %s" % fd_step)
    order = system.dim if order is None else order
    weights = measurement_weights(measurement, system.dim, system.variables)

    matrix = np.empty((order, system.dim))
    for k in range(system.dim):
        h = fd_step * max(1.0, abs(state[k]))
        plus, minus = state.copy(), state.copy()
        plus[k] += h
        minus[k] -= h
        matrix[:, k] = (
            lie_derivatives(system, weights, plus, order)
            - lie_derivatives(system, weights, minus, order)
        ) / (2.0 * h)
    bad = np.flatnonzero(~np.all(np.isfinite(matrix), axis=1))
    if len(bad):
        raise NumericalError(
            "Gradient of the Lie derivative of order %s overflowed" % bad[0], int(bad[0])
        )

    singular_values = np.linalg.svd(matrix, compute_uv=False)
    rank = numerical_rank(singular_values, rank_tol)
    logger.debug(
        "Observability of %s: rank %s, singular values %s"
        % (system.name, rank, singular_values)
    )
    return ObservabilityReport(matrix, singular_values, rank, state, rank_tol)


def linear_observability(A, C, order=None):
    """ Closed form [C; CA; ...; CA^(order-1)] for x' = Ax, h = Cx """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    order = len(A) if order is None else order
    rows = [C]
    for _ in range(order - 1):
        rows.append(rows[-1] @ A)
    return np.vstack(rows)


def first_recurrence(dm, row, min_separation) -> Optional[int]:
    """ Sample index of the nearest state at least min_separation away """
    separated = np.abs(dm.indices - dm.indices[row]) >= min_separation
    if not separated.any():
        return None
    candidates = np.flatnonzero(separated)
    return int(dm.indices[candidates[np.argmin(dm.entries[row, candidates])]])

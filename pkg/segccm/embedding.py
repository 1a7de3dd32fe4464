"""
Delay-coordinate embedding of scalar series into shadow manifolds, and
data-driven choice of the lag (first minimum of mutual information)
and of the dimension (false nearest neighbours).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import correlate1d
from scipy.spatial import cKDTree

from .exceptions import ArgumentError, DegenerateInputError, SeriesTooShortError
from .libs import csvio

logger = logging.getLogger(__name__)

DEFAULT_BINS = 16
DEFAULT_SHIFTS = 8
DEFAULT_HALF_WIDTH = 5
DEFAULT_RTOL = 15.0
DEFAULT_ATOL = 2.0
FNN_THRESHOLD = 0.01


@dataclass(frozen=True)
class EmbeddingParams:
    tau: int
    m: int

    def __post_init__(self):
        if int(self.tau) != self.tau or self.tau < 1:
            raise ArgumentError("tau must be an integer >= 1, got %s" % self.tau)
        if int(self.m) != self.m or self.m < 1:
            raise ArgumentError("m must be an integer >= 1, got %s" % self.m)

    @property
    def span(self):
        """ Samples consumed before the first complete delay vector """
        return (self.m - 1) * self.tau


@dataclass
class ShadowManifold:
    """
    Delay vectors [s_i, s_{i-tau}, ..., s_{i-(m-1)tau}], newest first.

    `time_index[j]` is the sample index i of point j in the source series.
    """

    points: np.ndarray
    time_index: np.ndarray
    params: EmbeddingParams
    source_id: str = ""

    def __len__(self):
        return len(self.points)

    @property
    def m(self):
        return self.params.m

    def positions(self, time_indices):
        """ Point positions of the given time indices (all must be present) """
        time_indices = np.asarray(time_indices, dtype=int)
        pos = np.searchsorted(self.time_index, time_indices)
        pos = np.clip(pos, 0, len(self.time_index) - 1)
        if not np.array_equal(self.time_index[pos], time_indices):
            raise ArgumentError("Time indices not present in manifold %s" % self.source_id)
        return pos

    def restrict(self, time_indices):
        """ Sub-manifold of the points at `time_indices` (no re-embedding) """
        keep = np.isin(self.time_index, time_indices)
        return ShadowManifold(
            self.points[keep], self.time_index[keep], self.params, self.source_id
        )

    def common_indices(self, other):
        return np.intersect1d(self.time_index, other.time_index)

    def to_csv(self, path):
        csvio.write_manifold_csv(path, self.time_index, self.points)


def delay_embed(series, params, source_id=None):
    """
    Embed `series` with lag params.tau and dimension params.m.

    >>> delay_embed(TimeSeries([1, 2, 3, 4, 5]), EmbeddingParams(1, 2)).points
    array([[2., 1.],
           [3., 2.],
           [4., 3.],
           [5., 4.]])
    """
    values = np.asarray(getattr(series, "values", series), dtype=float)
    n = len(values)
    span = params.span
    if n <= span:
        raise SeriesTooShortError(
            "Embedding with tau=%s m=%s needs more than %s samples, got %s"
            % (params.tau, params.m, span, n),
            span + 1,
        )
    time_index = np.arange(span, n)
    points = np.column_stack([values[time_index - k * params.tau] for k in range(params.m)])
    if source_id is None:
        source_id = getattr(series, "name", "series")
    return ShadowManifold(points, time_index, params, source_id)


def mutual_information(values, lag, n_bins=DEFAULT_BINS, edges=None):
    """
    Histogram estimate (nats) of I(s_i ; s_{i+lag}).

    Equal-width bins over the min/max range of the whole series; pairs
    running past the end are dropped.
    """
    values = np.asarray(values, dtype=float)
    if edges is None:
        edges = np.linspace(values.min(), values.max(), n_bins + 1)
    a = values[: len(values) - lag] if lag else values
    b = values[lag:]
    joint, _, _ = np.histogram2d(a, b, bins=(edges, edges))
    p = joint / joint.sum()
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / np.outer(pa, pb)[nz])))


def shifted_mutual_information(values, lag, n_bins=DEFAULT_BINS, n_shifts=DEFAULT_SHIFTS):
    """
    Mutual information averaged over `n_shifts` histogram grids.

    Grid s is the equal-width grid moved down by s / n_shifts of a bin
    (with one extra bin on top); s = 0 is the plain grid over the range.
    """
    values = np.asarray(values, dtype=float)
    low, high = values.min(), values.max()
    width = (high - low) / n_bins
    total = 0.0
    for s in range(n_shifts):
        if s == 0:
            edges = np.linspace(low, high, n_bins + 1)
        else:
            edges = low - width * s / n_shifts + width * np.arange(n_bins + 2)
        total += mutual_information(values, lag, n_bins, edges)
    return total / n_shifts


def local_slopes(curve, half_width=DEFAULT_HALF_WIDTH):
    """ Unnormalised least-squares slope over [l - half_width, l + half_width] """
    weights = np.arange(-half_width, half_width + 1, dtype=float)
    return correlate1d(np.asarray(curve, dtype=float), weights, mode="nearest")


@dataclass
class LagSelection:
    lag: Optional[int]
    curve: np.ndarray
    status: str

    def to_csv(self, path):
        csvio.write_table(path, ["lag", "value"], [np.arange(len(self.curve)), self.curve])


def select_lag_mutual_info(series, max_lag=60, n_bins=DEFAULT_BINS, n_shifts=DEFAULT_SHIFTS,
                           half_width=DEFAULT_HALF_WIDTH):
    """
    First lag at which the mutual information stops decreasing.

    The curve is the shift-averaged histogram estimate; the lag is the
    smallest l in [1, max_lag - 1] whose local slope over a window of
    2 * half_width + 1 lags turns positive. Returns a LagSelection with
    status "ok", or status "no-minimum" and lag None when the curve
    keeps falling over the whole range.
    """
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if max_lag < 2:
        raise ArgumentError("max_lag must be >= 2, got %s" % max_lag)
    if n_bins < 2:
        raise ArgumentError("n_bins must be >= 2, got %s" % n_bins)
    if n_shifts < 1 or half_width < 1:
        raise ArgumentError(
            "n_shifts and half_width must be >= 1, got %s and %s" % (n_shifts, half_width)
        )
    if len(values) < 10 * max_lag:
        raise SeriesTooShortError(
            "Lag selection up to %s needs %s samples, got %s"
            % (max_lag, 10 * max_lag, len(values)),
            10 * max_lag,
        )
    if np.ptp(values) == 0:
        raise DegenerateInputError("Mutual information of a constant series")

    curve = np.array(
        [shifted_mutual_information(values, lag, n_bins, n_shifts) for lag in range(max_lag + 1)]
    )
    rising = np.flatnonzero(local_slopes(curve, half_width)[1:max_lag] > 0)
    if len(rising):
        lag = int(rising[0]) + 1
        logger.debug("Mutual information stops decreasing at lag %s" % lag)
        return LagSelection(lag, curve, "ok")
    logger.warning("Mutual information has no minimum up to lag %s" % max_lag)
    return LagSelection(None, curve, "no-minimum")


@dataclass
class DimensionSelection:
    dimension: int
    curve: np.ndarray
    status: str

    def to_csv(self, path):
        dims = np.arange(1, len(self.curve) + 1)
        csvio.write_table(path, ["dim", "value"], [dims, self.curve])


def false_neighbor_fraction(values, tau, m, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """
    Fraction of nearest neighbours in dimension m that are false in m + 1.

    A neighbour is false if the added coordinate grows the distance by
    more than rtol times, or if the (m+1)-distance exceeds atol times
    the attractor size (standard deviation of the series).
    """
    values = np.asarray(values, dtype=float)
    size = np.std(values)
    if size == 0:
        raise DegenerateInputError("False nearest neighbours of a constant series")
    tiny = 1e-9 * size

    full = delay_embed(values, EmbeddingParams(tau, m + 1)).points
    low = full[:, :m]
    extra = full[:, m]
    if len(full) < 3:
        raise SeriesTooShortError(
            "Too few points to test dimension %s" % m, (m * tau) + 3
        )
    dist, idx = cKDTree(low).query(low, k=2)
    # with duplicates the query point need not come first
    own = np.arange(len(low))
    nearest = np.where(idx[:, 0] == own, idx[:, 1], idx[:, 0])
    rd = np.where(idx[:, 0] == own, dist[:, 1], dist[:, 0])
    jump = np.abs(extra - extra[nearest])

    coincident = rd <= tiny
    ratio_false = np.zeros(len(low), dtype=bool)
    ratio_false[~coincident] = jump[~coincident] / rd[~coincident] > rtol
    ratio_false[coincident] = jump[coincident] > tiny
    size_false = np.sqrt(rd ** 2 + jump ** 2) / size > atol
    return float(np.mean(ratio_false | size_false))


def select_dim_fnn(series, tau, max_dim=10, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """
    Smallest dimension whose false-neighbour fraction drops below 1%.

    Returns a DimensionSelection; status "no-threshold" with dimension
    max_dim when no dimension qualifies.
    """
    values = np.asarray(getattr(series, "values", series), dtype=float)
    if max_dim < 1:
        raise ArgumentError("max_dim must be >= 1, got %s" % max_dim)
    required = max_dim * tau + 3
    if len(values) < required:
        raise SeriesTooShortError(
            "Dimension selection up to %s with tau=%s needs %s samples, got %s"
            % (max_dim, tau, required, len(values)),
            required,
        )
    if np.ptp(values) == 0:
        raise DegenerateInputError("False nearest neighbours of a constant series")

    curve = np.array(
        [false_neighbor_fraction(values, tau, m, rtol, atol) for m in range(1, max_dim + 1)]
    )
    logger.debug("False neighbour fractions: %s" % np.round(curve, 4))
    below = np.flatnonzero(curve < FNN_THRESHOLD)
    if len(below):
        return DimensionSelection(int(below[0]) + 1, curve, "ok")
    logger.warning("No dimension up to %s has under 1%% false neighbours" % max_dim)
    return DimensionSelection(max_dim, curve, "no-threshold")

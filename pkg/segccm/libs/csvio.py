"""
csvio.py
~~~~~~~~

Plain CSV files with a single header row, as written and read by segccm:

    t,x,y,...               trajectories (one column per variable)
    t,value                 scalar series
    idx,c0,c1,...           shadow manifolds
    L,rho_xy,rho_yx         cross-map curves

Numbers are printed with 17 significant digits so a write/read cycle
reproduces the float64 values exactly.
"""

import logging

import numpy as np

from ..exceptions import ArgumentError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_table(path, header, columns):
    """ Write equally long columns under `header` """
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    logger.debug("Writing %s rows to %s" % (len(data), path))
    np.savetxt(
        path,
        data,
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header=",".join(header),
        comments="",
    )


def read_table(path):
    """
    Read a segccm CSV file.

    Returns:
        (header, data) with header a list of column names and data an
        (rows, columns) float array.

    Raises:
        ArgumentError: a cell is not a number, there are no rows, or the
            column counts differ
    """
    with open(path, encoding="utf-8") as f:
        header = [h.strip() for h in f.readline().strip().split(",")]
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise ArgumentError("%s: not a numeric CSV table (%s)" % (path, e)) from e
    if not data.size:
        raise ArgumentError("%s holds no data rows" % path)
    if data.size and data.shape[1] != len(header):
        raise ArgumentError(
            "%s: %s header columns but %s data columns"
            % (path, len(header), data.shape[1])
        )
    logger.debug("Read %s rows from %s" % (len(data), path))
    return header, data


def write_trajectory_csv(path, times, states, variables=None):
    states = np.asarray(states, dtype=float)
    if not variables:
        variables = ["x%d" % i for i in range(states.shape[1])]
    header = ["t"] + list(variables)
    write_table(path, header, [times] + list(states.T))


def write_series_csv(path, times, values):
    write_table(path, ["t", "value"], [times, values])


def write_manifold_csv(path, time_index, points):
    points = np.asarray(points, dtype=float)
    header = ["idx"] + ["c%d" % i for i in range(points.shape[1])]
    write_table(path, header, [time_index] + list(points.T))

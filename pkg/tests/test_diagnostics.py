import numpy as np
import pytest

from segccm.catalogue import catalogue_system
from segccm.diagnostics import (
    as_points,
    distance_matrix,
    dominant_period,
    first_recurrence,
    linear_observability,
    numerical_rank,
    observability_matrix,
    recurrence_check,
    recurrence_matrix,
    subsample,
)
from segccm.dynsys import linear_system, observe, simulate
from segccm.embedding import EmbeddingParams, delay_embed
from segccm.exceptions import ArgumentError
from segccm.libs import csvio

RAMP = EmbeddingParams(25, 2)


def test_as_points():
    points, indices = as_points([1.0, 2.0, 3.0])
    assert points.shape == (3, 1)
    np.testing.assert_array_equal(indices, [0, 1, 2])
    with pytest.raises(ArgumentError):
        as_points([[1.0, 2.0], [3.0]])
    with pytest.raises(ArgumentError):
        as_points(np.zeros((2, 2, 2)))


def test_subsample():
    np.testing.assert_array_equal(subsample(5, 10), np.arange(5))
    keep = subsample(1000, 100, seed=3)
    assert len(keep) == 100
    assert np.all(np.diff(keep) > 0)
    np.testing.assert_array_equal(keep, subsample(1000, 100, seed=3))


def test_distance_matrix(lorenz_traj, tmp_path):
    dm = distance_matrix(lorenz_traj.states[:300])
    assert dm.n_states == 300
    np.testing.assert_array_equal(np.diag(dm.entries), 0.0)
    np.testing.assert_allclose(dm.entries, dm.entries.T)
    assert dm.entries[0, 1] == pytest.approx(
        np.linalg.norm(lorenz_traj.states[0] - lorenz_traj.states[1])
    )
    path = str(tmp_path / "dm.csv")
    dm.to_csv(path)
    header, data = csvio.read_table(path)
    assert header[0] == "idx"
    assert data.shape == (300, 301)


def test_distance_matrix_subsamples(lorenz_traj):
    dm = distance_matrix(lorenz_traj, max_points=500, seed=1)
    assert dm.n_states == 500
    assert np.all(np.diff(dm.indices) > 0)
    with pytest.raises(ArgumentError):
        distance_matrix([[1.0, 2.0]])


def test_recurrence_matrix(lorenz_traj):
    dm = distance_matrix(lorenz_traj.states[:400])
    rm = recurrence_matrix(dm, 0.1)
    assert set(np.unique(rm)) <= {0, 1}
    np.testing.assert_array_equal(rm, rm.T)


def test_dominant_period(ramp_traj):
    assert dominant_period(observe(ramp_traj, "y").values) == pytest.approx(100.0, rel=0.05)
    assert dominant_period(np.ones(50)) is None


def test_ramp_is_not_recurrent(ramp_traj):
    manifold = delay_embed(observe(ramp_traj, "x"), RAMP)
    result = recurrence_check(manifold)
    assert not result.recurrent
    assert result.status == "non-recurrent"


def test_sine_is_recurrent(ramp_traj):
    manifold = delay_embed(observe(ramp_traj, "y"), RAMP)
    result = recurrence_check(manifold)
    assert result.recurrent
    assert result.fraction > 0.5
    assert result.min_separation == pytest.approx(200.0, rel=0.05)


@pytest.mark.parametrize(
    "kwargs",
    [{"epsilon_quantile": 0.0}, {"epsilon_quantile": 1.0}],
)
def test_recurrence_check_arguments(lorenz_traj, kwargs):
    with pytest.raises(ArgumentError):
        recurrence_check(lorenz_traj, **kwargs)
    with pytest.raises(ArgumentError):
        recurrence_check(lorenz_traj.states[:50])


def test_first_recurrence(ramp_traj):
    manifold = delay_embed(observe(ramp_traj, "y"), RAMP)
    dm = distance_matrix(manifold.points[:600])
    assert first_recurrence(dm, 0, 50) == 100
    assert first_recurrence(dm, 0, 1000) is None


def test_lorenz_observable_from_x(lorenz_spec, lorenz_traj):
    state = lorenz_traj.states[5000]
    report = observability_matrix(lorenz_spec, "x", state)
    assert report.matrix.shape == (3, 3)
    assert report.numerical_rank == 3
    np.testing.assert_allclose(report.matrix[0], [1.0, 0.0, 0.0], atol=1e-8)
    np.testing.assert_allclose(report.matrix[1], [-10.0, 10.0, 0.0], atol=1e-6)
    assert report.to_dict()["rank"] == 3


def test_lorenz9d_is_not_fully_observable():
    spec = catalogue_system("lorenz9d")
    traj = simulate(spec, t_end=100.0)
    report = observability_matrix(spec, "x9", traj.states[-1])
    assert report.numerical_rank < 9


def test_linear_observability_closed_form():
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-2.0, -1.0, -3.0]])
    C = np.array([1.0, 0.0, 0.0])
    closed = linear_observability(A, C)
    report = observability_matrix(linear_system(A), C, np.array([0.5, -1.0, 2.0]))
    error = np.linalg.norm(report.matrix - closed) / np.linalg.norm(closed)
    assert error < 1e-6
    assert report.numerical_rank == 3


def test_observability_arguments(lorenz_spec):
    with pytest.raises(ArgumentError):
        observability_matrix(lorenz_spec, "x", [1.0, 2.0])
    with pytest.raises(ArgumentError):
        observability_matrix(lorenz_spec, "x", [1.0, 2.0, 3.0], fd_step=0.0)


def test_numerical_rank():
    assert numerical_rank(np.array([1.0, 1e-3, 1e-9])) == 2
    assert numerical_rank(np.array([1.0, 1e-3, 1e-9]), tol=1e-2) == 1
    assert numerical_rank(np.zeros(3)) == 0
    with pytest.raises(ArgumentError):
        numerical_rank(np.ones(3), tol=0.0)

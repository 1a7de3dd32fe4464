import numpy as np
import pytest

from segccm.dynsys import TimeSeries
from segccm.embedding import (
    EmbeddingParams,
    delay_embed,
    false_neighbor_fraction,
    local_slopes,
    mutual_information,
    select_dim_fnn,
    select_lag_mutual_info,
    shifted_mutual_information,
)
from segccm.exceptions import ArgumentError, DegenerateInputError, SeriesTooShortError


def test_delay_embed_small():
    manifold = delay_embed(TimeSeries([1, 2, 3, 4, 5]), EmbeddingParams(1, 2))
    np.testing.assert_array_equal(manifold.points, [[2, 1], [3, 2], [4, 3], [5, 4]])
    np.testing.assert_array_equal(manifold.time_index, [1, 2, 3, 4])
    assert manifold.source_id == "value"


@pytest.mark.parametrize("tau, m", [(1, 1), (9, 3), (4, 5)])
def test_delay_embed_newest_first(lorenz_x, tau, m):
    manifold = delay_embed(lorenz_x, EmbeddingParams(tau, m))
    assert len(manifold) == len(lorenz_x) - (m - 1) * tau
    for j in (0, 17, len(manifold) - 1):
        i = manifold.time_index[j]
        expected = [lorenz_x.values[i - k * tau] for k in range(m)]
        np.testing.assert_array_equal(manifold.points[j], expected)


def test_delay_embed_too_short():
    with pytest.raises(SeriesTooShortError) as e:
        delay_embed(np.arange(10.0), EmbeddingParams(5, 3))
    assert e.value.required == 11


@pytest.mark.parametrize("tau, m", [(0, 3), (2, 0), (1.5, 2)])
def test_embedding_params_validation(tau, m):
    with pytest.raises(ArgumentError):
        EmbeddingParams(tau, m)


def test_restrict_and_common_indices(lorenz_x, lorenz_z):
    man_a = delay_embed(lorenz_x, EmbeddingParams(9, 3))
    man_b = delay_embed(lorenz_z, EmbeddingParams(5, 4))
    common = man_a.common_indices(man_b)
    assert common[0] == 18
    sub = man_a.restrict(common[::2])
    np.testing.assert_array_equal(sub.time_index, common[::2])
    np.testing.assert_array_equal(sub.points, man_a.points[man_a.positions(common[::2])])
    with pytest.raises(ArgumentError):
        man_b.positions([0])


def test_mutual_information_decreases_from_lag_zero(lorenz_x):
    mi0 = mutual_information(lorenz_x.values, 0)
    assert mi0 > mutual_information(lorenz_x.values, 15) > 0


def sine_series():
    return TimeSeries(np.sin(2 * np.pi * np.arange(5000) / 100.0))


def test_select_lag(lorenz_x):
    selection = select_lag_mutual_info(lorenz_x)
    assert selection.status == "ok"
    assert 5 <= selection.lag <= 20
    assert len(selection.curve) == 61
    assert selection.curve[0] == selection.curve.max()


def test_select_lag_sine_quarter_period():
    selection = select_lag_mutual_info(sine_series(), max_lag=60, n_bins=16)
    assert selection.status == "ok"
    assert abs(selection.lag - 25) <= 2


def test_select_lag_ramp_has_no_minimum():
    selection = select_lag_mutual_info(np.arange(2000) / 2000.0)
    assert selection.status == "no-minimum"
    assert selection.lag is None
    assert np.all(np.diff(selection.curve) < 0)


def test_shifted_mutual_information_single_grid(lorenz_x):
    assert shifted_mutual_information(lorenz_x.values, 7, n_shifts=1) == pytest.approx(
        mutual_information(lorenz_x.values, 7)
    )


def test_local_slopes_sign():
    curve = np.array([5.0, 4.0, 3.0, 2.5, 2.4, 2.6, 3.0, 3.5])
    slopes = local_slopes(curve, half_width=1)
    assert np.all(slopes[1:4] < 0)
    assert np.all(slopes[5:7] > 0)


def test_select_lag_errors():
    with pytest.raises(SeriesTooShortError):
        select_lag_mutual_info(np.arange(100.0), max_lag=60)
    with pytest.raises(DegenerateInputError):
        select_lag_mutual_info(np.ones(1000), max_lag=20)
    with pytest.raises(ArgumentError):
        select_lag_mutual_info(np.arange(1000.0), max_lag=1)


def test_false_neighbours_drop(lorenz_x):
    one = false_neighbor_fraction(lorenz_x.values, 9, 1)
    three = false_neighbor_fraction(lorenz_x.values, 9, 3)
    assert one > three


def test_select_dim(lorenz_x):
    selection = select_dim_fnn(lorenz_x, 9, max_dim=6)
    assert len(selection.curve) == 6
    assert selection.status == "ok"
    assert selection.dimension == 3


def test_select_dim_sine():
    selection = select_dim_fnn(sine_series(), 25, max_dim=5)
    assert selection.status == "ok"
    assert selection.dimension == 2
    assert selection.curve[1] <= selection.curve[0]


def test_select_dim_errors():
    with pytest.raises(SeriesTooShortError):
        select_dim_fnn(np.arange(20.0), 5, max_dim=10)
    with pytest.raises(DegenerateInputError):
        select_dim_fnn(np.ones(500), 2, max_dim=3)

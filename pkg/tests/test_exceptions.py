import pytest

from segccm import exceptions


def test_argument_error_is_value_error():
    try:
        raise exceptions.ArgumentError("tau must be an integer >= 1, got 0")
    except ValueError as e:
        assert str(e) == "tau must be an integer >= 1, got 0"
        assert isinstance(e, exceptions.SegccmError)


def test_unknown_system_error():
    try:
        raise exceptions.UnknownSystemError("lorenz99", ["rossler", "lorenz63"])
    except KeyError as e:
        assert str(e) == "Unknown system 'lorenz99' (available: lorenz63, rossler)"
        assert e.name == "lorenz99"
        assert e.available == ["lorenz63", "rossler"]


def test_divergence_error():
    try:
        raise exceptions.DivergenceError("lorenz63 diverged at step 12", 12)
    except exceptions.DivergenceError as e:
        assert str(e) == "lorenz63 diverged at step 12"
        assert e.step == 12


def test_series_too_short_error():
    try:
        raise exceptions.SeriesTooShortError("Too short", 19)
    except exceptions.ArgumentError as e:
        assert str(e) == "Too short"
        assert e.required == 19


def test_segment_too_small_error():
    try:
        raise exceptions.SegmentTooSmallError("Segment 2 holds 3 points", 3, 20)
    except exceptions.SegccmError as e:
        assert (e.size, e.required) == (3, 20)


@pytest.mark.parametrize(
    "error, attribute, value",
    [
        (exceptions.NumericalError("Overflow", 7), "order", 7),
        (exceptions.BenchRowError("noise/lorenz63/x,z: failed", "noise/lorenz63/x,z"),
         "row_id", "noise/lorenz63/x,z"),
    ],
)
def test_error_attributes(error, attribute, value):
    with pytest.raises(exceptions.SegccmError):
        raise error
    assert getattr(error, attribute) == value


def test_degenerate_input_error():
    with pytest.raises(exceptions.ArgumentError):
        raise exceptions.DegenerateInputError("All manifold points coincide")

import argparse
import json
import os
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

import segccm
from segccm import cli
from segccm.bench import BenchRow
from segccm.dynsys import TimeSeries
from segccm.embedding import DimensionSelection, EmbeddingParams, LagSelection
from segccm.exceptions import ArgumentError
from segccm.libs import csvio


def fake_report(verdict="bidirectional"):
    report = MagicMock()
    report.verdict.verdict = verdict
    report.warnings = []
    report.to_dict.return_value = {"verdict": verdict}
    return report


def failing_row():
    return BenchRow(
        table="noise", system="lorenz63", pair=("x", "z"), sigma=1.0,
        published_ccm=(0.115, 0.920), published_sccm=(0.934, 0.914),
        measured_ccm=(0.1, 0.9), measured_sccm=(0.5, 0.9),
        verdict_ccm="backward", verdict_sccm="backward",
        expected_ccm="backward", expected_sccm="bidirectional",
        verdict_match=False, within_tolerance=False,
    )


def test_create_parser():
    parser = cli.create_parser()
    assert isinstance(parser, argparse.ArgumentParser)


def test_parse_sccm():
    parser = cli.create_parser()
    parsed = parser.parse_args(
        ["sccm", "--system", "lorenz63", "--pair", "x,z", "--seed", "1", "--out", "r.json"]
    )
    assert parsed.command == "sccm"
    assert parsed.system == "lorenz63"
    assert parsed.pair == "x,z"
    assert parsed.seed == 1
    assert parsed.out == "r.json"
    assert parsed.noise == 0.0
    assert not parsed.debug


def test_unknown_flag_is_rejected():
    with pytest.raises(SystemExit) as e:
        cli.main(["ccm", "--system", "lorenz63", "--pair", "x,z", "--colour"])
    assert e.value.code == 2


def test_system_and_input_are_exclusive():
    with pytest.raises(SystemExit) as e:
        cli.main(["embed", "--system", "lorenz63", "--input", "a.csv"])
    assert e.value.code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["--version"])
    assert e.value.code == 0
    assert segccm.__version__ in capsys.readouterr().out


def test_simulate_steps(tmp_path):
    path = str(tmp_path / "t.csv")
    cli.main(["simulate", "--system", "lorenz63", "--steps", "10", "--out", path])
    header, data = csvio.read_table(path)
    assert header == ["t", "x", "y", "z"]
    assert data.shape == (11, 4)
    np.testing.assert_array_equal(data[0], [0.0, 1.0, 1.0, 1.0])


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "out"))
    cli.main(["simulate", "--system", "lorenz63", "--steps", "5", "--out", "t.json"])
    with open(os.path.join(str(tmp_path / "out"), "t.json")) as f:
        data = json.load(f)
    assert data["system"] == "lorenz63"
    assert len(data["states"]) == 6


def test_unknown_system_exits_with_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["simulate", "--system", "lorenz99"])
    assert e.value.code == 1
    assert capsys.readouterr().err.startswith("ERROR 1:")


@patch("segccm.cli.describe")
@patch("segccm.cli.ccm_report")
@patch("segccm.cli.load_pair")
def test_ccm(mock_load_pair, mock_ccm_report, mock_describe, capsys):
    series = (TimeSeries(np.arange(100.0), name="x"), TimeSeries(np.arange(100.0), name="z"))
    mock_load_pair.return_value = series
    mock_ccm_report.return_value = fake_report("backward")
    mock_describe.return_value = "ccm x/z: verdict Z=>X"
    cli.main(["ccm", "--system", "lorenz63", "--pair", "x,z", "--seed", "1"])
    args, kwargs = mock_ccm_report.call_args
    assert args[2] == EmbeddingParams(9, 3)
    assert kwargs["seed"] == 1
    assert kwargs["config"].sweep.library_mode == "random"
    assert "Z=>X" in capsys.readouterr().out


@patch("segccm.cli.describe")
@patch("segccm.cli.segment_ccm")
@patch("segccm.cli.load_pair")
def test_sccm_writes_json(mock_load_pair, mock_segment_ccm, mock_describe, tmp_path):
    mock_load_pair.return_value = (TimeSeries(np.ones(5)), TimeSeries(np.ones(5)))
    mock_segment_ccm.return_value = fake_report()
    mock_describe.return_value = "sccm x/z: verdict X<=>Z"
    path = str(tmp_path / "report.json")
    cli.main(["sccm", "--system", "lorenz63", "--pair", "x,z", "--out", path])
    with open(path) as f:
        assert json.load(f) == {"verdict": "bidirectional"}


def test_ccm_input_needs_embedding(tmp_path):
    path = str(tmp_path / "pair.csv")
    csvio.write_table(path, ["t", "a", "b"], [np.arange(200.0), np.sin(np.arange(200.0)),
                                             np.cos(np.arange(200.0))])
    with pytest.raises(SystemExit) as e:
        cli.main(["ccm", "--input", path, "--pair", "a,b"])
    assert e.value.code == 1


def test_embed_input(tmp_path):
    source = str(tmp_path / "series.csv")
    TimeSeries(np.arange(10.0)).to_csv(source)
    out = str(tmp_path / "manifold.csv")
    cli.main(["embed", "--input", source, "--tau", "2", "--m", "3", "--out", out])
    header, data = csvio.read_table(out)
    assert header == ["idx", "c0", "c1", "c2"]
    np.testing.assert_array_equal(data[0], [4.0, 4.0, 2.0, 0.0])


@patch("segccm.cli.select_dim_fnn")
@patch("segccm.cli.select_lag_mutual_info")
@patch("segccm.cli.load_series")
def test_select_params_falls_back_to_catalogue(mock_series, mock_lag, mock_dim, capsys):
    mock_series.return_value = TimeSeries(np.arange(10.0))
    mock_lag.return_value = LagSelection(None, np.zeros(5), "no-minimum")
    mock_dim.return_value = DimensionSelection(3, np.zeros(3), "ok")
    cli.main(["select-params", "--system", "lorenz63", "--var", "x"])
    out = capsys.readouterr().out
    assert "tau=9 m=3" in out
    assert mock_dim.call_args[0][1] == 9


def test_diagnose_ramp_not_recurrent(capsys):
    cli.main(["diagnose", "recurrence", "--system", "ramp_sine", "--var", "x"])
    out = capsys.readouterr().out
    assert "recurrent=false" in out
    assert "CCM prerequisites fail" in out


def test_diagnose_observability(capsys):
    cli.main(["diagnose", "observability", "--system", "lorenz63", "--var", "x",
              "--state", "1,2,3"])
    assert "rank=3 of 3" in capsys.readouterr().out


@patch("segccm.bench.reproduce_table")
def test_bench_fails_on_gating_rows(mock_reproduce, capsys):
    mock_reproduce.return_value = [failing_row()]
    with pytest.raises(SystemExit) as e:
        cli.main(["bench", "--table", "noise"])
    assert e.value.code == 3
    assert "noise/lorenz63/x,z/sigma=1" in capsys.readouterr().err
    assert mock_reproduce.call_args[0][0] == "noise"


@patch("segccm.bench.reproduce_table")
def test_bench_writes_report(mock_reproduce, tmp_path):
    row = failing_row()
    row.verdict_match = True
    row.verdict_sccm = "bidirectional"
    mock_reproduce.return_value = [row]
    path = str(tmp_path / "bench.csv")
    cli.main(["bench", "--table", "noise", "--threads", "2", "--out", path])
    with open(path) as f:
        assert len(f.read().splitlines()) == 2
    assert mock_reproduce.call_args[1]["num_threads"] == 2


@pytest.mark.parametrize(
    "text, expected",
    [("6:9", [6, 7, 8, 9]), ("1,3,5", [1, 3, 5]), ("", [])],
)
def test_parse_range(text, expected):
    assert cli.parse_range(text) == expected


def test_parse_range_invalid():
    with pytest.raises(ArgumentError):
        cli.parse_range("a:b")
    with pytest.raises(ArgumentError):
        cli.parse_pair("x")


def test_malformed_input_exits_with_error(tmp_path, capsys):
    path = tmp_path / "broken.csv"
    path.write_text("t,a,b\n0,1,2\n1,oops,3\n")
    with pytest.raises(SystemExit) as e:
        cli.main(["ccm", "--input", str(path), "--pair", "a,b", "--tau", "1", "--m", "2"])
    assert e.value.code == 1
    err = capsys.readouterr().err
    assert err.startswith("ERROR 1:")
    assert "broken.csv" in err


@pytest.mark.parametrize(
    "alias, table",
    [("t2", "lorenz_like"), ("t3", "noise"), ("t4", "high_dim"), ("t5", "fourfold")],
)
@patch("segccm.bench.reproduce_table")
def test_bench_table_aliases(mock_reproduce, alias, table):
    mock_reproduce.return_value = []
    cli.main(["bench", "--table", alias])
    assert mock_reproduce.call_args[0][0] == table


@patch("segccm.cli.describe")
@patch("segccm.cli.ccm_report")
@patch("segccm.cli.load_pair")
def test_ccm_prefix_libraries(mock_load_pair, mock_ccm_report, mock_describe):
    mock_load_pair.return_value = (TimeSeries(np.arange(100.0)), TimeSeries(np.arange(100.0)))
    mock_ccm_report.return_value = fake_report("backward")
    mock_describe.return_value = "ccm"
    cli.main(["ccm", "--system", "lorenz63", "--pair", "x,z", "--library-mode", "prefix"])
    assert mock_ccm_report.call_args[1]["config"].sweep.library_mode == "prefix"

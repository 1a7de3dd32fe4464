import json
from types import SimpleNamespace
from unittest.mock import patch

import pytest

from segccm import bench
from segccm.catalogue import catalogue_system
from segccm.dynsys import simulate
from segccm.exceptions import ArgumentError, BenchRowError, SegmentTooSmallError


def make_row(table="lorenz_like", system="lorenz63", match=True, extended=False, sigma=0.0):
    return bench.BenchRow(
        table=table,
        system=system,
        pair=("x", "z"),
        sigma=sigma,
        published_ccm=(0.471, 0.995),
        published_sccm=(0.992, 0.997),
        measured_ccm=(0.45, 0.99),
        measured_sccm=(0.98, 0.99),
        verdict_ccm="backward",
        verdict_sccm="bidirectional" if match else "backward",
        expected_ccm="backward",
        expected_sccm="bidirectional",
        verdict_match=match,
        within_tolerance=True,
        extended=extended,
    )


def fake_report(rho_xy, rho_yx, verdict):
    return SimpleNamespace(
        rho_xy=rho_xy, rho_yx=rho_yx, verdict=SimpleNamespace(verdict=verdict),
        segmented=None, warnings=[],
    )


def test_load_published_values():
    rows = bench.load_published_values()
    assert len(rows) == 28
    lorenz = rows[0]
    assert lorenz.row_id == "lorenz_like/lorenz63/x,z"
    assert lorenz.ccm == (0.471, 0.995)
    assert lorenz.sccm == (0.992, 0.997)
    assert not lorenz.extended
    assert {row.table for row in rows} == set(bench.TABLES)
    fourfold = [row for row in rows if row.table == "fourfold"][0]
    assert fourfold.sccm is None
    assert fourfold.pair == ("x", "y")
    noisy = [row for row in rows if row.table == "noise"]
    assert sorted({row.sigma for row in noisy}) == [0.1, 0.5, 1.0]
    assert noisy[0].row_id == "noise/lorenz63/x,z/sigma=0.1"


def test_published_systems_exist():
    for row in bench.load_published_values():
        spec = catalogue_system(row.system)
        for name in row.pair:
            assert name in spec.variables
        assert row.extended == spec.extended


def test_high_dim_five_dimensional_row():
    rows = bench.load_published_values()
    row = [r for r in rows if r.system == "lorenz5d_hyper" and r.pair == ("x", "z")][0]
    assert row.ccm == (0.151, 0.999)
    assert row.sccm == (0.994, 0.999)


@pytest.mark.parametrize(
    "published, blocked, band",
    [
        (0.471, True, 0.10),
        (0.995, False, 0.02),
        (0.965, False, 0.05),
        (0.869, False, 0.05),
    ],
)
def test_tolerance(published, blocked, band):
    assert bench.tolerance(published, blocked) == band


@pytest.mark.parametrize(
    "published, verdict",
    [
        ((0.471, 0.995), "backward"),
        ((0.992, 0.997), "bidirectional"),
        ((0.981, 0.982), "bidirectional"),
        ((0.3, 0.2), "none"),
    ],
)
def test_expected_verdict(published, verdict):
    assert bench.expected_verdict(published, 0.8) == verdict


def test_unknown_table():
    with pytest.raises(ArgumentError):
        bench.reproduce_table("t9")


@patch("segccm.bench.segment_ccm")
@patch("segccm.bench.ccm_report")
def test_run_row_verdicts(mock_ccm, mock_sccm, lorenz_traj):
    mock_ccm.return_value = fake_report(0.46, 0.99, "backward")
    mock_sccm.return_value = fake_report(0.99, 0.996, "bidirectional")
    published = bench.load_published_values()[0]
    row = bench.run_row(catalogue_system("lorenz63"), lorenz_traj, published)
    assert row.verdict_match
    assert row.within_tolerance
    assert row.tolerance == {"ccm_xy": 0.10, "ccm_yx": 0.02, "sccm_xy": 0.02, "sccm_yx": 0.02}
    assert row.to_dict()["verdict_sccm"] == "X<=>Z"


@patch("segccm.bench.segment_ccm")
@patch("segccm.bench.ccm_report")
def test_run_row_repeats_average(mock_ccm, mock_sccm, lorenz_traj):
    mock_ccm.side_effect = [
        fake_report(0.4, 0.99, "backward"),
        fake_report(0.5, 0.97, "backward"),
    ]
    mock_sccm.return_value = fake_report(0.99, 0.996, "bidirectional")
    published = bench.load_published_values()[0]
    row = bench.run_row(catalogue_system("lorenz63"), lorenz_traj, published, repeats=2)
    assert row.measured_ccm == pytest.approx((0.45, 0.98))
    assert mock_ccm.call_count == 2
    with pytest.raises(ArgumentError):
        bench.run_row(catalogue_system("lorenz63"), lorenz_traj, published, repeats=0)


@patch("segccm.bench.segment_ccm")
@patch("segccm.bench.ccm_report")
def test_run_row_without_segment_values(mock_ccm, mock_sccm, lorenz_traj):
    # both manifolds symmetric: the segment pipeline must agree with plain CCM
    mock_ccm.return_value = fake_report(0.98, 0.98, "bidirectional")
    mock_sccm.return_value = fake_report(0.98, 0.98, "bidirectional")
    published = [r for r in bench.load_published_values() if r.table == "fourfold"][0]
    row = bench.run_row(catalogue_system("lorenz63"), lorenz_traj, published)
    assert row.expected_sccm == "bidirectional"
    assert row.verdict_match
    assert set(row.tolerance) == {"ccm_xy", "ccm_yx"}


@patch("segccm.bench.run_row")
@patch("segccm.bench.simulate")
def test_reproduce_table_order(mock_simulate, mock_run_row):
    mock_run_row.side_effect = lambda spec, traj, entry, *args: entry
    rows = bench.reproduce_table("high_dim", num_threads=3)
    published = [r.row_id for r in bench.load_published_values() if r.table == "high_dim"]
    assert [row.row_id for row in rows] == published
    assert mock_simulate.call_count == 3


@patch("segccm.bench.run_row")
@patch("segccm.bench.simulate")
def test_reproduce_table_extended(mock_simulate, mock_run_row):
    mock_run_row.side_effect = lambda spec, traj, entry, *args: entry
    assert len(bench.reproduce_table("lorenz_like")) == 4
    rows = bench.reproduce_table("lorenz_like", extended=True)
    assert len(rows) == 11
    assert all(row.extended for row in rows[4:])


@patch("segccm.bench.run_row")
@patch("segccm.bench.simulate")
def test_reproduce_table_names_failing_row(mock_simulate, mock_run_row):
    mock_run_row.side_effect = SegmentTooSmallError("Segment 2 holds 3 points", 3, 20)
    with pytest.raises(BenchRowError) as e:
        bench.reproduce_table("fourfold")
    assert e.value.row_id == "fourfold/fourfold_burke_shaw/x,y"
    assert "Segment 2 holds 3 points" in str(e.value)


def test_gating_failures():
    rows = [
        make_row(),
        make_row(system="chen_ueta", match=False),
        make_row(system="sprott_b", match=False, extended=True),
    ]
    failed = bench.gating_failures(rows)
    assert [row.system for row in failed] == ["chen_ueta"]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_write_report(tmp_path, fmt):
    path = str(tmp_path / ("report." + fmt))
    bench.write_report([make_row(), make_row(sigma=0.5, table="noise")], path, fmt)
    with open(path) as f:
        text = f.read()
    if fmt == "json":
        records = json.loads(text)
        assert records[1]["sigma"] == 0.5
        assert records[0]["verdict_ccm"] == "Z=>X"
    else:
        lines = text.splitlines()
        assert lines[0].startswith("table,system,pair,sigma")
        assert len(lines) == 3
    with pytest.raises(ArgumentError):
        bench.write_report([make_row()], path, "xml")


@patch("segccm.bench.ccm_report")
def test_parameter_sweep_axes(mock_ccm):
    mock_ccm.return_value = fake_report(0.45, 0.99, "backward")
    cells = bench.parameter_sweep("lorenz63", ("x", "z"), range(6, 13), range(1, 7))
    assert [c.tau for c in cells if c.axis == "tau"] == list(range(6, 13))
    assert {c.m for c in cells if c.axis == "tau"} == {3}
    assert [c.m for c in cells if c.axis == "m"] == list(range(1, 7))
    assert {c.tau for c in cells if c.axis == "m"} == {9}
    assert cells[0].to_dict()["verdict"] == "backward"


def test_parameter_sweep_needs_a_range():
    with pytest.raises(ArgumentError):
        bench.parameter_sweep("lorenz63", ("x", "z"), [], [])


def published_row(table, system, pair, sigma=0.0):
    for row in bench.load_published_values():
        if (row.table, row.system, row.pair, row.sigma) == (table, system, pair, sigma):
            return row
    raise LookupError("%s/%s/%s/%s" % (table, system, pair, sigma))


@pytest.mark.slow
def test_lorenz_row_reproduces(lorenz_traj):
    published = published_row("lorenz_like", "lorenz63", ("x", "z"))
    row = bench.run_row(catalogue_system("lorenz63"), lorenz_traj, published)
    assert row.verdict_match
    assert row.verdict_ccm == "backward"
    assert row.verdict_sccm == "bidirectional"
    assert row.measured_sccm[0] == pytest.approx(0.992, abs=0.05)


@pytest.mark.slow
def test_noisy_lorenz_row_reproduces(lorenz_traj):
    published = published_row("noise", "lorenz63", ("x", "z"), 0.1)
    row = bench.run_row(catalogue_system("lorenz63"), lorenz_traj, published)
    assert row.verdict_match
    assert row.verdict_sccm == "bidirectional"


@pytest.mark.slow
def test_circuit4d_row_reproduces():
    spec = catalogue_system("circuit4d")
    published = published_row("high_dim", "circuit4d", ("x", "z"))
    row = bench.run_row(spec, simulate(spec), published)
    assert row.verdict_match
    assert row.verdict_ccm == "backward"
    assert row.verdict_sccm == "bidirectional"


@pytest.mark.slow
def test_fourfold_row_reproduces():
    spec = catalogue_system("fourfold_burke_shaw")
    published = published_row("fourfold", "fourfold_burke_shaw", ("x", "y"))
    row = bench.run_row(spec, simulate(spec), published)
    assert row.verdict_match
    assert row.verdict_ccm == "bidirectional"
    assert row.measured_ccm[0] == pytest.approx(0.981, abs=0.05)


@pytest.mark.slow
def test_parameter_sweep_keeps_direction():
    cells = bench.parameter_sweep("lorenz63", ("x", "z"), range(6, 13), [])
    assert all(cell.verdict == "backward" for cell in cells)


@pytest.mark.parametrize(
    "name, table",
    [("t2", "lorenz_like"), ("t3", "noise"), ("t4", "high_dim"), ("t5", "fourfold"),
     ("noise", "noise")],
)
def test_resolve_table(name, table):
    assert bench.resolve_table(name) == table

"""
Tests for the link BER curves and end-to-end feasibility
"""

import numpy as np
import pytest

from ber_model import (
    BER_FLOOR,
    LogLinearBerCurve,
    TableBerCurve,
    ber_e2e_feasible,
    link_ber,
    make_ber_curve,
    path_ber,
)
from hap_model import PlanParams


@pytest.mark.parametrize('length, expected', [
    (60.0, 1e-3),
    (70.0, 1e-2),
    (50.0, 1e-4),
    (30.0, 1e-6),
    (0.0, 1e-9),
])
def test_default_curve_values(length, expected):
    assert link_ber(length) == pytest.approx(expected, rel=1e-9)


def test_default_curve_is_clamped():
    assert link_ber(1000.0) == 0.5
    assert LogLinearBerCurve(floor=1e-6)(0.0) == 1e-6


def test_curve_is_non_decreasing():
    lengths = np.linspace(0.0, 120.0, 241)
    bers = [link_ber(length) for length in lengths]
    assert all(a <= b for a, b in zip(bers, bers[1:]))


def test_negative_length_is_rejected():
    with pytest.raises(ValueError):
        link_ber(-1.0)


def test_decreasing_curve_is_rejected():
    with pytest.raises(ValueError):
        LogLinearBerCurve(slope_per_km=-0.1)


def test_empty_path_is_feasible():
    assert ber_e2e_feasible([], None, 1e-3)


def test_threshold_length_alone_is_infeasible():
    assert not ber_e2e_feasible([], 60.0, 1e-3)
    assert not ber_e2e_feasible([60.0], None, 1e-3)
    assert ber_e2e_feasible([], 59.9, 1e-3)


def test_two_short_arcs_are_feasible():
    assert ber_e2e_feasible([30.0], 30.0, 1e-3)
    assert path_ber([30.0, 30.0]) == pytest.approx(2e-6, rel=1e-5)


def test_removing_an_arc_keeps_feasibility():
    lengths = [45.0, 40.0, 35.0, 20.0]
    assert ber_e2e_feasible(lengths[:-1], lengths[-1], 1e-3)
    for i in range(len(lengths)):
        rest = lengths[:i] + lengths[i + 1:]
        assert ber_e2e_feasible(rest[:-1], rest[-1], 1e-3)


def test_curve_anchored_on_params():
    curve = LogLinearBerCurve.from_params(PlanParams(max_interhap_km=80.0, ber_threshold=1e-4))
    assert curve(80.0) == pytest.approx(1e-4, rel=1e-9)
    assert curve(70.0) == pytest.approx(1e-5, rel=1e-9)


def test_table_curve_interpolates_in_log_space(tmp_path):
    path = tmp_path / 'ber.csv'
    path.write_text('length_km,ber\n0,1e-9\n60,1e-3\n')
    curve = TableBerCurve.from_csv(path)
    assert curve(30.0) == pytest.approx(1e-6, rel=1e-9)
    assert curve(60.0) == pytest.approx(1e-3, rel=1e-9)
    # Flat beyond the last row
    assert curve(90.0) == pytest.approx(1e-3, rel=1e-9)


def test_table_curve_validation(tmp_path):
    with pytest.raises(ValueError):
        TableBerCurve([0.0, 10.0], [1e-3, 1e-6])
    with pytest.raises(ValueError):
        TableBerCurve([0.0], [1e-6])
    path = tmp_path / 'bad.csv'
    path.write_text('km,ber\n0,1e-9\n60,1e-3\n')
    with pytest.raises(ValueError, match='length_km'):
        TableBerCurve.from_csv(path)
    with pytest.raises(FileNotFoundError):
        TableBerCurve.from_csv(tmp_path / 'absent.csv')


def test_make_ber_curve(tmp_path):
    params = PlanParams()
    assert make_ber_curve(params) == LogLinearBerCurve()
    path = tmp_path / 'ber.csv'
    path.write_text('length_km,ber\n0,1e-9\n60,1e-3\n')
    assert isinstance(make_ber_curve(params, 'table', path), TableBerCurve)
    with pytest.raises(ValueError):
        make_ber_curve(params, 'table')
    with pytest.raises(ValueError):
        make_ber_curve(params, 'cubic')


def test_floor_constant():
    assert BER_FLOOR == 1e-9

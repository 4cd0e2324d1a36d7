"""
Tests for instance and design validation
"""

import pytest

from ber_model import LogLinearBerCurve
from hap_model import GroundNode, InvalidInstanceError, PlanParams, PlanningInstance, TrafficMatrix
from hap_planner import run_pipeline
from instance_validator import InstanceValidator, design_issues, validate_instance


def _traffic(*entries):
    return TrafficMatrix.from_records({'src': s, 'dst': d, 'gbps': g} for s, d, g in entries)


def _checks(error):
    return {issue['check'] for issue in error.value.issues}


def test_single_node_without_traffic_is_valid(params):
    instance = validate_instance([GroundNode(0, 5.0, 5.0)], None, params)
    assert isinstance(instance, PlanningInstance)
    assert len(instance.traffic) == 0


def test_accepts_dict_nodes(params):
    instance = validate_instance([{'id': 0, 'x': 1.0, 'y': 2.0}], TrafficMatrix(), params)
    assert instance.nodes == (GroundNode(0, 1.0, 2.0),)


def test_egress_cap(params):
    nodes = [GroundNode(i, float(i), 0.0) for i in range(3)]
    with pytest.raises(InvalidInstanceError, match='egress cap') as error:
        validate_instance(nodes, _traffic((0, 1, 0.6), (0, 2, 0.6)), params)
    assert 'egress_cap' in _checks(error)


def test_ingress_cap(params):
    nodes = [GroundNode(i, float(i), 0.0) for i in range(3)]
    with pytest.raises(InvalidInstanceError) as error:
        validate_instance(nodes, _traffic((0, 2, 0.7), (1, 2, 0.7)), params)
    assert _checks(error) == {'ingress_cap'}


def test_cap_allows_exactly_one_wavelength(params):
    nodes = [GroundNode(i, float(i), 0.0) for i in range(3)]
    validate_instance(nodes, _traffic((0, 1, 0.5), (0, 2, 0.5)), params)


def test_duplicate_id(params):
    with pytest.raises(InvalidInstanceError, match='duplicate id'):
        validate_instance([GroundNode(1, 0.0, 0.0), GroundNode(1, 3.0, 3.0)], None, params)


def test_empty_node_set(params):
    with pytest.raises(InvalidInstanceError) as error:
        validate_instance([], None, params)
    assert _checks(error) == {'empty_node_set'}


def test_all_issues_are_collected():
    params = PlanParams(num_wavelengths=0)
    nodes = [GroundNode(0, -1.0, 0.0), GroundNode(1, 0.0, float('nan'))]
    traffic = _traffic((0, 0, 0.1), (0, 9, 0.1), (1, 0, 0.0))
    with pytest.raises(InvalidInstanceError) as error:
        validate_instance(nodes, traffic, params)
    assert _checks(error) >= {
        'params', 'coordinates', 'negative_coordinates', 'self_demand', 'unknown_endpoint', 'rate',
    }


def test_repeated_pair_is_a_warning(params):
    nodes = [GroundNode(0, 0.0, 0.0), GroundNode(1, 1.0, 0.0)]
    validator = InstanceValidator(nodes, _traffic((0, 1, 0.2), (0, 1, 0.3)), params)
    assert validator.run_all_checks()
    assert [w['check'] for w in validator.warnings] == ['repeated_pair']


def test_validation_is_idempotent(params):
    nodes = [GroundNode(0, 0.0, 0.0), GroundNode(0, 1.0, 0.0)]
    validator = InstanceValidator(nodes, None, params)
    assert not validator.run_all_checks()
    first = list(validator.issues)
    assert not validator.run_all_checks()
    assert validator.issues == first


@pytest.mark.parametrize('mode', ['protected', 'unprotected'])
def test_pipeline_designs_are_sound(small_instance, mode):
    design, _ = run_pipeline(small_instance, mode=mode)
    assert design_issues(design, small_instance.nodes) == []


def test_tampered_design_is_flagged(small_instance):
    design, _ = run_pipeline(small_instance, mode='protected')
    hap_id = next(iter(design.haps))
    design.devices[hap_id] += 1
    assert 'device_tally' in {issue['check'] for issue in design_issues(design)}


def test_dropped_lightpath_breaks_conservation(small_instance):
    design, _ = run_pipeline(small_instance, mode='unprotected')
    if not design.lightpaths:
        pytest.skip('instance produced no lightpaths')
    design.lightpaths.pop()
    checks = {issue['check'] for issue in design_issues(design)}
    assert 'conservation' in checks
    assert 'slot_label' not in checks


def test_ber_issue_reports_path_ber(small_instance):
    design, _ = run_pipeline(small_instance, mode='unprotected')
    if not design.lightpaths:
        pytest.skip('instance produced no lightpaths')
    # Every arc at 1e-2 breaks the 1e-3 end-to-end threshold
    noisy = LogLinearBerCurve(anchor_ber=1e-2, slope_per_km=0.0)
    messages = [issue['message'] for issue in design_issues(design, ber_curve=noisy) if issue['check'] == 'ber']
    assert len(messages) == len(design.lightpaths)
    assert all('exceeds threshold 0.001' in message for message in messages)

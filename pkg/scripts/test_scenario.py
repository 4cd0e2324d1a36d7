"""
Tests for instance generation and scenario/design documents
"""

import json

import pytest

from hap_model import PlanParams, ScenarioFormatError
from hap_planner import run_pipeline
from plan_metrics import plan_report
from scenario import (
    ScenarioSpec,
    generate_instance,
    load_design,
    load_scenario,
    save_design,
    save_scenario,
    scenario_to_dict,
)


def test_same_seed_same_instance():
    spec = ScenarioSpec(seed=101, node_count=100)
    first, second = generate_instance(spec), generate_instance(spec)
    assert first == second
    assert json.dumps(scenario_to_dict(first)) == json.dumps(scenario_to_dict(second))


def test_different_seeds_differ():
    assert generate_instance(ScenarioSpec(seed=1, node_count=20)) != generate_instance(
        ScenarioSpec(seed=2, node_count=20))


def test_nodes_lie_in_the_field():
    instance = generate_instance(ScenarioSpec(seed=4, node_count=200, field_km=(50.0, 20.0)))
    df = instance.node_frame()
    assert df['x'].between(0, 50).all()
    assert df['y'].between(0, 20).all()
    assert df['id'].tolist() == list(range(200))


def test_per_node_caps_hold():
    instance = generate_instance(ScenarioSpec(seed=8, node_count=100))
    assert instance.traffic.egress().max() <= 1.0 + 1e-9
    assert instance.traffic.ingress().max() <= 1.0 + 1e-9
    df = instance.traffic.to_frame()
    assert (df['src'] != df['dst']).all()
    assert not df.duplicated(['src', 'dst']).any()


def test_load_factor_sets_total_traffic():
    instance = generate_instance(ScenarioSpec(seed=8, node_count=100, load_factor_gbps=0.5))
    total = instance.traffic.to_frame()['gbps'].sum()
    # Stops at the first draw reaching the target; a draw adds at most 0.1 Gbps
    assert 50.0 - 1e-6 <= total < 50.1 + 1e-6


def test_rates_are_whole_mbps():
    instance = generate_instance(ScenarioSpec(seed=12, node_count=40))
    for entry in instance.traffic.entries:
        assert abs(entry.gbps * 1000 - round(entry.gbps * 1000)) < 1e-6


def test_single_node_has_no_demands():
    instance = generate_instance(ScenarioSpec(seed=3, node_count=1))
    assert len(instance.nodes) == 1
    assert len(instance.traffic) == 0


def test_zero_load_has_no_demands():
    instance = generate_instance(ScenarioSpec(seed=3, node_count=10, load_factor_gbps=0.0))
    assert len(instance.traffic) == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(seed=1, node_count=0)
    with pytest.raises(ValueError):
        ScenarioSpec(seed=1, node_count=5, mode='mirrored')


def test_spec_overrides_reach_params():
    spec = ScenarioSpec(seed=1, node_count=5, params_overrides={'num_wavelengths': 64})
    assert generate_instance(spec).params.num_wavelengths == 64


def test_scenario_round_trip(tmp_path):
    instance = generate_instance(ScenarioSpec(seed=21, node_count=50))
    path = save_scenario(instance, tmp_path / 'scenario.json')
    assert load_scenario(path) == instance


def test_scenario_overrides_on_load(tmp_path):
    instance = generate_instance(ScenarioSpec(seed=21, node_count=10))
    path = save_scenario(instance, tmp_path / 'scenario.json')
    assert load_scenario(path, {'max_cloud_km': 5.0}).params == PlanParams(max_cloud_km=5.0)


def test_malformed_scenario(tmp_path):
    path = tmp_path / 'scenario.json'
    path.write_text(json.dumps({'params': {}, 'nodes': [{'id': 0, 'x': 1.0}], 'traffic': []}))
    with pytest.raises(ScenarioFormatError):
        load_scenario(path)
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / 'absent.json')


def test_design_round_trip(tmp_path, small_instance):
    design, report = run_pipeline(small_instance, mode='protected')
    path = save_design(design, tmp_path / 'design.json')
    loaded = load_design(path)
    assert loaded.to_dict() == design.to_dict()
    assert plan_report(loaded) == report


def test_design_document_keeps_roles(tmp_path, small_instance):
    design, _ = run_pipeline(small_instance, mode='protected')
    data = json.loads(save_design(design, tmp_path / 'design.json').read_text())
    roles = {h['role'] for h in data['haps']}
    assert 'primary-serving' in roles
    assert len(data['backup_pairs']) == len(design.backup_pairs)
    for link in data['links']:
        assert set(link['used_wavelengths']) == {'a_to_b', 'b_to_a'}

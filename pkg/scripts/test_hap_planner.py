"""
Tests for the planning pipeline, sweeps and the command-line driver
"""

import json

import pytest

from hap_model import GroundNode, PayloadExceededError, PlanParams, ROLE_ADDED_BACKUP, TrafficMatrix
from hap_planner import CSV_HEADER, HapNetworkPlanner, main, run_pipeline, run_sweep, sweep_items
from instance_validator import design_issues, validate_instance
from plan_metrics import count_devices, read_comparison_csv
from scenario import ScenarioSpec, generate_instance


def test_unprotected_without_traffic_has_no_links(params):
    nodes = [GroundNode(i, 10.0 * i, 5.0) for i in range(8)]
    instance = validate_instance(nodes, TrafficMatrix(), params)
    design, report = run_pipeline(instance, mode='unprotected')
    assert design.links == {}
    assert design.lightpaths == []
    assert report.link_count == 0
    assert report.n_fso == report.n_hap


def test_protected_adds_pairs_and_reservations(small_instance):
    planner = HapNetworkPlanner(small_instance.params)
    protected, protected_report = planner.run_pipeline(small_instance, 'protected')
    unprotected, unprotected_report = planner.run_pipeline(small_instance, 'unprotected')

    primaries = [h for h in protected.haps.values() if h.role != ROLE_ADDED_BACKUP]
    assert len(primaries) == unprotected_report.n_hap
    assert protected_report.n_hap == unprotected_report.n_hap + protected_report.added_backup_haps
    assert protected_report.backup_pair_count > 0
    assert protected_report.reserved_backup_slots > 0
    assert unprotected_report.reserved_backup_slots == 0
    assert protected.demands == unprotected.demands
    assert [entry['mode'] for entry in planner.planning_log] == ['protected', 'unprotected']


def test_small_payload_uses_added_backups():
    params = PlanParams(hap_payload=2)
    nodes = [GroundNode(0, 5.0, 5.0), GroundNode(1, 30.0, 5.0)]
    instance = validate_instance(nodes, TrafficMatrix(), params)
    design, report = run_pipeline(instance, mode='protected')

    assert report.n_hap == 4
    assert report.added_backup_haps == 2
    assert all(count <= params.hap_payload for count in design.devices.values())
    assert design_issues(design, instance.nodes) == []


def test_payload_too_small_for_any_backup():
    params = PlanParams(hap_payload=1)
    instance = validate_instance([GroundNode(0, 5.0, 5.0)], TrafficMatrix(), params)
    with pytest.raises(PayloadExceededError):
        run_pipeline(instance, mode='protected')
    _, report = run_pipeline(instance, mode='unprotected')
    assert report.n_fso == 1


def test_unknown_mode_is_rejected(small_instance):
    with pytest.raises(ValueError):
        run_pipeline(small_instance, mode='both')


@pytest.mark.parametrize('seed, nodes', [(5, 80), (6, 150)])
def test_seeded_designs_hold_every_invariant(seed, nodes):

    instance = generate_instance(ScenarioSpec(seed=seed, node_count=nodes))
    for mode in ('protected', 'unprotected'):
        design, _ = run_pipeline(instance, mode=mode)
        assert design_issues(design, instance.nodes) == []


def test_seeded_600_node_run_accepts_every_demand(golden):
    instance = generate_instance(ScenarioSpec(seed=42, node_count=600))
    for mode in ('protected', 'unprotected'):
        design, report = run_pipeline(instance, mode=mode)
        assert report.rejected == ()
        assert design.lightpaths
        devices = count_devices(design)
        golden(f'devices_n600_s42_{mode}', {'n_hap': devices.n_hap, 'n_fso': devices.n_fso})


@pytest.mark.parametrize('item', sweep_items(42, [100, 200, 400]), ids=lambda item: item.instance_id)
def test_protection_adds_at_most_one_hap(item):
    instance = generate_instance(ScenarioSpec(seed=item.seed, node_count=item.node_count))
    row, _ = HapNetworkPlanner(instance.params).compare_modes(instance, item.instance_id, item.seed)
    assert row.to_dict()['delta_n_hap'] in (0, 1)


def test_sweep_items_are_reproducible():
    first = sweep_items(42, [100, 200], replicates=2)
    assert first == sweep_items(42, [100, 200], replicates=2)
    assert [item.instance_id for item in first] == ['n100-r0', 'n100-r1', 'n200-r0', 'n200-r1']
    assert len({item.seed for item in first}) == 4


def test_sweep_writes_one_row_per_instance(tmp_path):
    rows, failures = run_sweep(42, [30, 40, 50], PlanParams(), tmp_path)
    assert failures == []
    assert len(rows) == 3

    lines = (tmp_path / 'comparison.csv').read_text().splitlines()
    assert lines[0] == f"# {CSV_HEADER}"
    df = read_comparison_csv(tmp_path / 'comparison.csv')
    assert df['node_count'].tolist() == [30, 40, 50]
    assert (tmp_path / 'designs' / 'n30-r0_protected.json').exists()
    assert (tmp_path / 'designs' / 'n50-r0_unprotected.json').exists()


def test_sweep_is_byte_identical(tmp_path):
    run_sweep(42, [30, 60], PlanParams(), tmp_path / 'a', save_designs=False)
    run_sweep(42, [30, 60], PlanParams(), tmp_path / 'b', save_designs=False)
    assert (tmp_path / 'a' / 'comparison.csv').read_bytes() == (tmp_path / 'b' / 'comparison.csv').read_bytes()


def test_sweep_records_failures_and_continues(tmp_path):
    # Clouds too large for any backup link: every instance fails validation
    rows, failures = run_sweep(1, [10], PlanParams(max_cloud_km=40.0), tmp_path)
    assert rows == []
    assert len(failures) == 1
    recorded = json.loads((tmp_path / 'sweep_failures.json').read_text())
    assert recorded[0]['instance_id'] == 'n10-r0'
    assert (tmp_path / 'comparison.csv').exists()


def test_cli_generate_plan_metrics(tmp_path):
    out = tmp_path / 'out'
    assert main(['generate', '--nodes', '40', '--seed', '3', '--out', str(out)]) == 0
    scenario = out / 'scenario_n40_s3.json'
    assert scenario.exists()

    assert main(['plan', '--scenario', str(scenario), '--mode', 'both', '--out', str(out)]) == 0
    for mode in ('protected', 'unprotected'):
        assert (out / f"scenario_n40_s3_{mode}_design.json").exists()
        report = json.loads((out / f"scenario_n40_s3_{mode}_report.json").read_text())
        assert report['mode'] == mode
    assert (out / 'scenario_n40_s3_comparison.csv').exists()
    assert (out / 'planning_log.jsonl').exists()

    design = out / 'scenario_n40_s3_protected_design.json'
    assert main(['metrics', '--design', str(design), '--json']) == 0


def test_cli_sweep(tmp_path, capsys):
    out = tmp_path / 'sweep'
    assert main(['sweep', '--seed', '42', '--nodes', '30', '40', '--no-designs', '--out', str(out)]) == 0
    assert len(read_comparison_csv(out / 'comparison.csv')) == 2
    assert (out / 'sweep_summary.md').exists()
    assert 'instance(s) planned' in capsys.readouterr().out


def test_cli_sweep_requires_seed(tmp_path):
    with pytest.raises(SystemExit):
        main(['sweep', '--nodes', '30', '--out', str(tmp_path)])


def test_cli_missing_scenario_exits_nonzero(tmp_path):
    assert main(['plan', '--scenario', str(tmp_path / 'absent.json'), '--out', str(tmp_path)]) == 2

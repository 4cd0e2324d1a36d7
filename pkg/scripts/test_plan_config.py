"""
Tests for parameter loading and logging setup
"""

import json
import logging

import pytest

from hap_model import InvalidParamsError, PlanParams
from plan_config import OUTPUT_DIR_ENV, default_output_dir, load_plan_params, setup_logging


def test_repository_defaults_match_model_defaults():
    params, ber_settings = load_plan_params()
    assert params == PlanParams()
    assert ber_settings == {'ber_curve': 'loglinear'}


def test_overrides_win_and_none_is_ignored():
    params, _ = load_plan_params(overrides={'num_wavelengths': 64, 'coverage_km': None})
    assert params.num_wavelengths == 64
    assert params.coverage_km == 15.0


def test_yaml_file_values_and_ber_settings(tmp_path):
    path = tmp_path / 'params.yaml'
    path.write_text('max_cloud_km: 5\nber_curve: table\nber_table: curve.csv\n')
    params, ber_settings = load_plan_params(path)
    assert params.max_cloud_km == 5.0
    assert params.num_wavelengths == 128
    assert ber_settings == {'ber_curve': 'table', 'ber_table': 'curve.csv'}


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / 'params.yaml'
    path.write_text('wavelengths: 64\n')
    with pytest.raises(InvalidParamsError):
        load_plan_params(path)


def test_invalid_values_are_rejected(tmp_path):
    path = tmp_path / 'params.yaml'
    path.write_text('max_cloud_km: 40\n')
    with pytest.raises(InvalidParamsError, match='backup window'):
        load_plan_params(path)


def test_non_mapping_file_is_rejected(tmp_path):
    path = tmp_path / 'params.yaml'
    path.write_text('- 1\n- 2\n')
    with pytest.raises(InvalidParamsError):
        load_plan_params(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_plan_params(tmp_path / 'absent.yaml')


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / 'runs'))
    assert default_output_dir() == tmp_path / 'runs'
    monkeypatch.delenv(OUTPUT_DIR_ENV)
    assert str(default_output_dir()) == 'results'


def test_run_log_is_json_lines(tmp_path):
    log_file = tmp_path / 'planning_log.jsonl'
    setup_logging('ERROR', log_file)
    logging.getLogger('hap_planner').info('pipeline complete', extra={'n_hap': 4})
    logging.getLogger('hap_planner').debug('not recorded')
    for handler in logging.getLogger().handlers:
        handler.flush()

    lines = log_file.read_text().splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert record['message'] == 'pipeline complete'
    assert record['n_hap'] == 4
    assert record['levelname'] == 'INFO'


def test_reconfiguring_closes_previous_run_log(tmp_path):
    setup_logging('ERROR', tmp_path / 'first.jsonl')
    first = next(h for h in logging.getLogger().handlers if isinstance(h, logging.FileHandler))
    setup_logging('ERROR', tmp_path / 'second.jsonl')
    assert first not in logging.getLogger().handlers
    assert first.stream is None

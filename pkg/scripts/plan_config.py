"""
Configuration and logging setup for the HAP planner
Loads dimensioning parameters from YAML and wires JSON logging
"""

import logging
import os
from pathlib import Path

import yaml
from pythonjsonlogger.json import JsonFormatter

from hap_model import InvalidParamsError, PlanParams

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_PARAMS_FILE = REPO_ROOT / 'config' / 'plan_params.yaml'

OUTPUT_DIR_ENV = 'HAP_PLANNER_OUT'
DEFAULT_OUTPUT_DIR = 'results'

# Keys in the params file that are not PlanParams fields
BER_KEYS = ('ber_curve', 'ber_table')

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s %(message)s'


def load_plan_params(path=None, overrides=None):
    """
    Load dimensioning parameters.

    Parameters:
    - path: YAML file (defaults to config/plan_params.yaml; built-in defaults if absent)
    - overrides: optional dict of field -> value applied last

    Returns:
    - (PlanParams, ber_settings dict)
    """
    path = Path(path) if path is not None else DEFAULT_PARAMS_FILE
    data = {}
    if path.exists():
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise InvalidParamsError([f"{path} must contain a mapping"])
    elif path != DEFAULT_PARAMS_FILE:
        raise FileNotFoundError(f"Params file not found: {path}")

    ber_settings = {key: data.pop(key) for key in BER_KEYS if key in data}
    ber_settings.setdefault('ber_curve', 'loglinear')

    merged = dict(data)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    params = PlanParams().with_overrides(**merged).validated()
    return params, ber_settings


def default_output_dir():
    return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


def setup_logging(level='WARNING', log_file=None):
    """
    Configure JSON logging on stderr and optionally a JSON-lines run log.

    Parameters:
    - level: console level name
    - log_file: optional path; receives INFO and above
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG)

    console = logging.StreamHandler()
    console.setLevel(getattr(logging, str(level).upper(), logging.WARNING))
    console.setFormatter(JsonFormatter(LOG_FORMAT))
    root.addHandler(console)

    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode='a')
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(JsonFormatter(LOG_FORMAT))
        root.addHandler(file_handler)

    return root

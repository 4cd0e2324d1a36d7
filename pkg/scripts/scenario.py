"""
Scenario generation and file formats for HAP network planning
Random ground instances, scenario JSON and design JSON
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from hap_model import (
    BackupPair,
    GroundNode,
    HapDemand,
    HapDesign,
    HapNode,
    InterHapLink,
    Lightpath,
    MODE_PROTECTED,
    MODE_UNPROTECTED,
    PlanParams,
    ScenarioFormatError,
    TrafficMatrix,
)
from instance_validator import validate_instance

logger = logging.getLogger(__name__)

MODES = (MODE_PROTECTED, MODE_UNPROTECTED, 'both')

# Traffic entries are drawn in whole Mbps
MBPS_PER_GBPS = 1000

SCENARIO_SCHEMA = {
    'type': 'object',
    'required': ['params', 'nodes', 'traffic'],
    'properties': {
        'params': {'type': 'object'},
        'nodes': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['id', 'x', 'y'],
                'properties': {
                    'id': {'type': 'integer'},
                    'x': {'type': 'number'},
                    'y': {'type': 'number'},
                },
            },
        },
        'traffic': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['src', 'dst', 'gbps'],
                'properties': {
                    'src': {'type': 'integer'},
                    'dst': {'type': 'integer'},
                    'gbps': {'type': 'number'},
                },
            },
        },
    },
}

DESIGN_SCHEMA = {
    'type': 'object',
    'required': ['mode', 'params', 'haps', 'backup_pairs', 'links', 'lightpaths', 'rejections'],
    'properties': {
        'mode': {'enum': [MODE_PROTECTED, MODE_UNPROTECTED]},
        'haps': {'type': 'array', 'items': {
            'type': 'object', 'required': ['id', 'x', 'y', 'role', 'cluster', 'device_count']}},
        'links': {'type': 'array', 'items': {
            'type': 'object', 'required': ['a', 'b', 'length', 'used_wavelengths']}},
        'lightpaths': {'type': 'array', 'items': {
            'type': 'object', 'required': ['id', 'src', 'dst', 'wavelength', 'arcs']}},
    },
}


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for a random instance; the seed fixes everything"""

    seed: int
    node_count: int
    field_km: tuple = (100.0, 100.0)
    load_factor_gbps: float = 0.5
    max_entry_mbps: int = 100
    params_overrides: dict = field(default_factory=dict)
    mode: str = 'both'

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError(f"node_count must be >= 1, got {self.node_count}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.load_factor_gbps < 0:
            raise ValueError('load_factor_gbps must be non-negative')
        if self.max_entry_mbps < 1:
            raise ValueError('max_entry_mbps must be >= 1')


def _stage_generators(seed):
    """Independent node and traffic streams from one seed"""
    node_seq, traffic_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(node_seq), np.random.default_rng(traffic_seq)


def generate_traffic(node_ids, rng, cap_gbps, load_factor_gbps, max_entry_mbps,
                     max_consecutive_failures=1000):
    """
    Draw random demands until mean per-node egress reaches the load factor.

    Each draw is an ordered pair with a rate uniform in 1..max_entry_mbps Mbps;
    draws that would push the source egress or destination ingress past the
    cap are discarded. Drawing stops early after too many discards in a row.

    Returns:
    - TrafficMatrix with one entry per ordered pair, ordered by (src, dst)
    """
    n = len(node_ids)
    if n < 2 or load_factor_gbps <= 0:
        return TrafficMatrix()

    cap_mbps = int(round(cap_gbps * MBPS_PER_GBPS))
    target_mbps = int(round(load_factor_gbps * n * MBPS_PER_GBPS))
    egress = np.zeros(n, dtype=np.int64)
    ingress = np.zeros(n, dtype=np.int64)
    pair_mbps = {}
    total = 0
    failures = 0

    while total < target_mbps and failures < max_consecutive_failures:
        src, dst = rng.choice(n, size=2, replace=False)
        rate = int(rng.integers(1, max_entry_mbps + 1))
        if egress[src] + rate > cap_mbps or ingress[dst] + rate > cap_mbps:
            failures += 1
            continue
        failures = 0
        egress[src] += rate
        ingress[dst] += rate
        key = (int(node_ids[src]), int(node_ids[dst]))
        pair_mbps[key] = pair_mbps.get(key, 0) + rate
        total += rate

    if total < target_mbps:
        logger.warning('traffic target not reached', extra={
            'target_mbps': target_mbps, 'reached_mbps': total,
        })
    return TrafficMatrix.from_records(
        {'src': s, 'dst': d, 'gbps': mbps / MBPS_PER_GBPS}
        for (s, d), mbps in sorted(pair_mbps.items())
    )


def generate_instance(spec, params=None):
    """
    Generate a random validated instance.

    Parameters:
    - spec: ScenarioSpec
    - params: PlanParams (defaults plus spec.params_overrides when omitted)

    Returns:
    - PlanningInstance
    """
    if params is None:
        params = PlanParams().with_overrides(**spec.params_overrides)
    node_rng, traffic_rng = _stage_generators(spec.seed)

    width, height = spec.field_km
    xs = node_rng.uniform(0.0, width, size=spec.node_count)
    ys = node_rng.uniform(0.0, height, size=spec.node_count)
    nodes = tuple(GroundNode(i, float(x), float(y)) for i, (x, y) in enumerate(zip(xs, ys)))

    traffic = generate_traffic(
        [n.id for n in nodes], traffic_rng,
        cap_gbps=params.wavelength_rate_gbps,
        load_factor_gbps=spec.load_factor_gbps,
        max_entry_mbps=spec.max_entry_mbps,
    )
    logger.info('instance generated', extra={
        'seed': spec.seed, 'nodes': len(nodes), 'traffic_entries': len(traffic),
    })
    return validate_instance(nodes, traffic, params)


def scenario_to_dict(instance):
    return {
        'params': instance.params.to_dict(),
        'nodes': [{'id': n.id, 'x': n.x, 'y': n.y} for n in instance.nodes],
        'traffic': [{'src': e.src, 'dst': e.dst, 'gbps': e.gbps} for e in instance.traffic.entries],
    }


def _write_json(data, output_path):
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w') as f:
        json.dump(data, f, indent=2)
    return output_path


def _read_json(path, schema, kind):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{kind} file not found: {path}")
    with open(path, 'r') as f:
        data = json.load(f)
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as e:
        raise ScenarioFormatError(f"{path.name}: {e.message}") from e
    return data


def save_scenario(instance, output_path):
    return _write_json(scenario_to_dict(instance), output_path)


def load_scenario(path, param_overrides=None):
    """
    Load and validate a scenario JSON document.

    Parameters:
    - path: scenario file
    - param_overrides: optional dict applied over the file's params

    Returns:
    - PlanningInstance
    """
    data = _read_json(path, SCENARIO_SCHEMA, 'Scenario')
    params = PlanParams.from_dict(data['params'])
    if param_overrides:
        params = params.with_overrides(**param_overrides)
    nodes = [GroundNode(int(n['id']), float(n['x']), float(n['y'])) for n in data['nodes']]
    traffic = TrafficMatrix.from_records(data['traffic'])
    return validate_instance(nodes, traffic, params)


def save_design(design, output_path):
    return _write_json(design.to_dict(), output_path)


def load_design(path):
    """Rebuild a HapDesign from its JSON document"""
    data = _read_json(path, DESIGN_SCHEMA, 'Design')
    params = PlanParams.from_dict(data['params'])

    haps = {}
    devices = {}
    for h in data['haps']:
        haps[h['id']] = HapNode(int(h['id']), float(h['x']), float(h['y']),
                                role=h['role'], cluster=tuple(h['cluster']))
        devices[h['id']] = int(h['device_count'])

    links = {}
    for item in data['links']:
        link = InterHapLink(item['a'], item['b'], item['length'], params.num_wavelengths)
        for direction, (u, v) in (('a_to_b', (link.a, link.b)), ('b_to_a', (link.b, link.a))):
            for w, label in item['used_wavelengths'][direction]:
                link.occupy(u, v, w, label)
        links[link.key] = link

    return HapDesign(
        mode=data['mode'],
        params=params,
        haps=haps,
        backup_pairs=[BackupPair(**p) for p in data['backup_pairs']],
        links=links,
        lightpaths=[
            Lightpath(lp['id'], lp['src'], lp['dst'], lp['wavelength'],
                      tuple(tuple(arc) for arc in lp['arcs']))
            for lp in data['lightpaths']
        ],
        devices=devices,
        demands=[HapDemand(**d) for d in data.get('demands', [])],
        rejections=[HapDemand(**r) for r in data['rejections']],
    )

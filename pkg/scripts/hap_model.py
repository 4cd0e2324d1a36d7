"""
Shared data model for survivable HAP network dimensioning
Ground nodes, traffic, HAPs, inter-HAP links, demands, lightpaths and reports
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict, replace, fields

import numpy as np
import pandas as pd

# Slot labels on an inter-HAP link direction
FREE_SLOT = -1
BACKUP_SLOT = -2

ROLE_PRIMARY = 'primary-serving'
ROLE_ADDED_BACKUP = 'added-backup'

MODE_PROTECTED = 'protected'
MODE_UNPROTECTED = 'unprotected'


class PlanningError(Exception):
    """Base class for planning failures"""


class InvalidInstanceError(PlanningError):
    """Instance violates one or more model invariants"""

    def __init__(self, issues):
        self.issues = list(issues)
        summary = '; '.join(issue['message'] for issue in self.issues)
        super().__init__(f"{len(self.issues)} instance issue(s): {summary}")


class InvalidParamsError(PlanningError):
    """Parameter set violates its invariants"""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__('; '.join(self.issues))


class BackupReservationError(PlanningError):
    """Backup reservation does not fit on a link"""


class NoWavelengthAvailableError(PlanningError):
    """Every wavelength has been excluded"""


class PayloadExceededError(PlanningError):
    """A HAP would carry more FSO devices than its payload allows"""


class ScenarioFormatError(PlanningError):
    """Scenario or design document does not match its schema"""


@dataclass(frozen=True)
class PlanParams:
    """Parameters of the dimensioning problem (defaults are the reference setup)"""

    coverage_km: float = 15.0
    num_wavelengths: int = 128
    wavelength_rate_gbps: float = 1.0
    max_cloud_km: float = 10.0
    hap_payload: int = 10
    max_interhap_km: float = 60.0
    ber_threshold: float = 1e-3
    cost_hap: float = 1.0
    cost_fso: float = 0.1

    @property
    def bar_height_km(self):
        return self.coverage_km * math.sqrt(2)

    def problems(self):
        """
        List every violated invariant.

        Returns:
        - list of messages (empty when the parameter set is valid)
        """
        problems = []
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                problems.append(f"{f.name} must be a positive number, got {value!r}")
        for name in ('num_wavelengths', 'hap_payload'):
            value = getattr(self, name)
            if isinstance(value, float) and not value.is_integer():
                problems.append(f"{name} must be an integer, got {value!r}")
        if not 0 < self.ber_threshold < 1:
            problems.append(f"ber_threshold must lie in (0, 1), got {self.ber_threshold!r}")
        if self.max_interhap_km <= 2 * self.max_cloud_km:
            problems.append(
                f"max_interhap_km ({self.max_interhap_km}) must exceed "
                f"2 * max_cloud_km ({2 * self.max_cloud_km}); backup window is empty"
            )
        return problems

    def validated(self):
        problems = self.problems()
        if problems:
            raise InvalidParamsError(problems)
        return self

    def with_overrides(self, **overrides):
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise InvalidParamsError([f"unknown parameter(s): {sorted(unknown)}"])
        coerced = {}
        for name, value in overrides.items():
            value = float(value)
            if name in ('num_wavelengths', 'hap_payload') and value.is_integer():
                value = int(value)
            coerced[name] = value
        return replace(self, **coerced)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls().with_overrides(**data)


@dataclass(frozen=True)
class GroundNode:
    """Ground FSO transceiver at planar coordinates (km)"""

    id: int
    x: float
    y: float


@dataclass(frozen=True)
class TrafficEntry:
    src: int
    dst: int
    gbps: float


@dataclass(frozen=True)
class TrafficMatrix:
    """Ground-to-ground traffic demands, one entry per ordered pair"""

    entries: tuple = ()

    @classmethod
    def from_records(cls, records):
        return cls(tuple(
            TrafficEntry(int(r['src']), int(r['dst']), float(r['gbps'])) for r in records
        ))

    def to_frame(self):
        return pd.DataFrame(
            [(e.src, e.dst, e.gbps) for e in self.entries],
            columns=['src', 'dst', 'gbps'],
        ).astype({'src': 'int64', 'dst': 'int64', 'gbps': 'float64'})

    def egress(self):
        """Total outgoing rate per ground node (Series indexed by node id)"""
        return self.to_frame().groupby('src')['gbps'].sum()

    def ingress(self):
        """Total incoming rate per ground node (Series indexed by node id)"""
        return self.to_frame().groupby('dst')['gbps'].sum()

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class PlanningInstance:
    """A validated dimensioning instance"""

    nodes: tuple
    traffic: TrafficMatrix
    params: PlanParams

    def node_frame(self):
        return pd.DataFrame(
            [(n.id, n.x, n.y) for n in self.nodes], columns=['id', 'x', 'y']
        )


@dataclass(frozen=True)
class HapNode:
    """HAP with its nadir position and served ground cluster"""

    id: int
    x: float
    y: float
    role: str = ROLE_PRIMARY
    cluster: tuple = ()

    @property
    def cluster_size(self):
        return len(self.cluster)

    def distance_to(self, other):
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class BackupPair:
    """Two HAPs protecting each other (1+1) over one inter-HAP link"""

    a: int
    b: int
    distance_km: float
    reserved_per_direction: int


@dataclass(frozen=True)
class HapDemand:
    """Aggregated HAP-to-HAP request for n lightpaths"""

    src: int
    dst: int
    n: int


@dataclass(frozen=True)
class Lightpath:
    """Wavelength-continuous path between two HAPs"""

    id: int
    src: int
    dst: int
    wavelength: int
    arcs: tuple

    @property
    def hops(self):
        return len(self.arcs)


class InterHapLink:
    """
    Bidirectional HAP-HAP link with per-direction wavelength occupancy.

    Direction 0 runs a -> b and direction 1 runs b -> a, with a < b.
    """

    def __init__(self, a, b, length_km, num_wavelengths):
        if a == b:
            raise ValueError(f"Link endpoints must differ, got {a}")
        self.a, self.b = (a, b) if a < b else (b, a)
        self.length_km = float(length_km)
        self.slots = np.full((2, num_wavelengths), FREE_SLOT, dtype=np.int64)
        self.free_counts = np.array([num_wavelengths, num_wavelengths], dtype=np.int64)

    @property
    def key(self):
        return (self.a, self.b)

    @property
    def num_wavelengths(self):
        return self.slots.shape[1]

    def direction(self, u, v):
        if (u, v) == (self.a, self.b):
            return 0
        if (u, v) == (self.b, self.a):
            return 1
        raise KeyError(f"Arc ({u}, {v}) does not belong to link {self.key}")

    def is_free(self, u, v, wavelength):
        return self.slots[self.direction(u, v), wavelength] == FREE_SLOT

    def free_count(self, u, v):
        return int(self.free_counts[self.direction(u, v)])

    def ever_used(self, u, v):
        return self.free_counts[self.direction(u, v)] < self.num_wavelengths

    def occupy(self, u, v, wavelength, label):
        d = self.direction(u, v)
        if self.slots[d, wavelength] != FREE_SLOT:
            raise PlanningError(
                f"Slot ({u}->{v}, w={wavelength}) already labelled {self.slots[d, wavelength]}"
            )
        self.slots[d, wavelength] = label
        self.free_counts[d] -= 1

    def used_slots(self):
        return int((self.slots != FREE_SLOT).sum())

    def reserved_slots(self):
        return int((self.slots == BACKUP_SLOT).sum())

    def used_wavelengths(self, direction):
        """Sorted (wavelength, label) pairs in use on one direction"""
        row = self.slots[direction]
        used = np.flatnonzero(row != FREE_SLOT)
        return [(int(w), int(row[w])) for w in used]


@dataclass
class HapDesign:
    """Completed network design for one instance and mode"""

    mode: str
    params: PlanParams
    haps: dict
    backup_pairs: list = field(default_factory=list)
    links: dict = field(default_factory=dict)
    lightpaths: list = field(default_factory=list)
    devices: dict = field(default_factory=dict)
    demands: list = field(default_factory=list)
    rejections: list = field(default_factory=list)

    @property
    def added_backup_haps(self):
        return [h for h in self.haps.values() if h.role == ROLE_ADDED_BACKUP]

    def to_dict(self):
        """Design document (haps, backup pairs, links, lightpaths, rejections)"""
        return {
            'mode': self.mode,
            'params': self.params.to_dict(),
            'haps': [
                {
                    'id': h.id,
                    'x': h.x,
                    'y': h.y,
                    'role': h.role,
                    'cluster': list(h.cluster),
                    'device_count': int(self.devices.get(h.id, 0)),
                }
                for h in sorted(self.haps.values(), key=lambda h: h.id)
            ],
            'backup_pairs': [
                {'a': p.a, 'b': p.b, 'distance_km': p.distance_km,
                 'reserved_per_direction': p.reserved_per_direction}
                for p in self.backup_pairs
            ],
            'links': [
                {
                    'a': link.a,
                    'b': link.b,
                    'length': link.length_km,
                    'used_wavelengths': {
                        'a_to_b': [[w, label] for w, label in link.used_wavelengths(0)],
                        'b_to_a': [[w, label] for w, label in link.used_wavelengths(1)],
                    },
                }
                for _, link in sorted(self.links.items())
            ],
            'demands': [{'src': d.src, 'dst': d.dst, 'n': d.n} for d in self.demands],
            'lightpaths': [
                {'id': lp.id, 'src': lp.src, 'dst': lp.dst, 'wavelength': lp.wavelength,
                 'arcs': [list(arc) for arc in lp.arcs]}
                for lp in self.lightpaths
            ],
            'rejections': [{'src': r.src, 'dst': r.dst, 'n': r.n} for r in self.rejections],
        }


@dataclass(frozen=True)
class PlanReport:
    """Cost and resource metrics of a completed design"""

    mode: str
    n_hap: int
    n_fso: int
    mean_fso_per_hap: float
    cost: float
    link_count: int
    occupancy: float
    link_wavelengths: int
    lightpath_count: int = 0
    backup_pair_count: int = 0
    added_backup_haps: int = 0
    reserved_backup_slots: int = 0
    rejected: tuple = ()

    @staticmethod
    def investment_cost(n_hap, n_fso, params):
        return n_hap * params.cost_hap + n_fso * params.cost_fso

    @property
    def rejected_lightpaths(self):
        return sum(r['n'] for r in self.rejected)

    def to_dict(self):
        data = asdict(self)
        data['rejected'] = list(self.rejected)
        return data

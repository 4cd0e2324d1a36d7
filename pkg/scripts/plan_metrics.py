"""
Evaluation metrics for HAP network designs
Device counts, link occupancy, link-wavelengths, availability and mode comparisons
"""

import os
import tempfile
from collections import namedtuple
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from hap_model import PlanReport

DeviceCount = namedtuple('DeviceCount', ['n_hap', 'n_fso', 'mean_per_hap'])

# Yearly single ground-HAP link availability ranges
REGIONAL_LINK_AVAILABILITY = {
    'southern-europe': (0.50, 0.85),
    'northern-europe': (0.0, 0.40),
}

COMPARISON_COLUMNS = [
    'instance_id', 'seed', 'node_count',
    'protected_n_hap', 'protected_n_fso', 'protected_mean_fso_per_hap',
    'protected_link_count', 'protected_occupancy', 'protected_link_wavelengths',
    'protected_rejected',
    'unprotected_n_hap', 'unprotected_n_fso', 'unprotected_mean_fso_per_hap',
    'unprotected_link_count', 'unprotected_occupancy', 'unprotected_link_wavelengths',
    'unprotected_rejected',
    'delta_n_hap', 'delta_n_fso', 'delta_mean_fso_per_hap', 'delta_link_count',
    'fso_increase_pct', 'extra_link_wavelengths_pct', 'occupancy_ratio',
]


def count_devices(design):
    """
    Count HAPs and FSO devices of a design.

    Returns:
    - DeviceCount(n_hap, n_fso, mean_per_hap); the mean runs over every HAP,
      added backups included
    """
    n_hap = len(design.haps)
    n_fso = int(sum(design.devices.get(hid, 0) for hid in design.haps))
    mean = n_fso / n_hap if n_hap else 0.0
    return DeviceCount(n_hap, n_fso, mean)


def total_link_wavelengths(design):
    """Used (link, direction, wavelength) slots, backup reservations included"""
    return sum(link.used_slots() for link in design.links.values())


def link_occupancy(design):
    """Used slots over (links x 2W); 0 for a design without links"""
    if not design.links:
        return 0.0
    return total_link_wavelengths(design) / (len(design.links) * 2 * design.params.num_wavelengths)


def availability(p_cut):
    """
    Probability that at least one of the primary and backup slant links is up.

    Parameters:
    - p_cut: probability a ground-HAP link is cut by clouds, in [0, 1]

    Returns:
    - 1 - p_cut^2
    """
    if not 0.0 <= p_cut <= 1.0:
        raise ValueError(f"p_cut must lie in [0, 1], got {p_cut}")
    return 1.0 - p_cut ** 2


def joint_availability(single_link_availability):
    """1+1 availability from the availability of a single slant link"""
    if not 0.0 <= single_link_availability <= 1.0:
        raise ValueError(f"Availability must lie in [0, 1], got {single_link_availability}")
    return availability(1.0 - single_link_availability)


def availability_band(region):
    """(low, high) joint availability for a named region"""
    if region not in REGIONAL_LINK_AVAILABILITY:
        raise KeyError(f"Unknown region {region!r}; known: {sorted(REGIONAL_LINK_AVAILABILITY)}")
    low, high = REGIONAL_LINK_AVAILABILITY[region]
    return joint_availability(low), joint_availability(high)


def plan_report(design):
    """Build the PlanReport of a completed design"""
    devices = count_devices(design)
    return PlanReport(
        mode=design.mode,
        n_hap=devices.n_hap,
        n_fso=devices.n_fso,
        mean_fso_per_hap=devices.mean_per_hap,
        cost=PlanReport.investment_cost(devices.n_hap, devices.n_fso, design.params),
        link_count=len(design.links),
        occupancy=link_occupancy(design),
        link_wavelengths=total_link_wavelengths(design),
        lightpath_count=len(design.lightpaths),
        backup_pair_count=len(design.backup_pairs),
        added_backup_haps=len(design.added_backup_haps),
        reserved_backup_slots=sum(link.reserved_slots() for link in design.links.values()),
        rejected=tuple({'src': r.src, 'dst': r.dst, 'n': r.n} for r in design.rejections),
    )


def _pct_increase(new, base):
    if base == 0:
        return 0.0 if new == 0 else float('inf')
    return 100.0 * (new - base) / base


@dataclass(frozen=True)
class ComparisonRow:
    """Protected vs unprotected metrics of one instance"""

    instance_id: str
    seed: int
    node_count: int
    protected: PlanReport
    unprotected: PlanReport

    def to_dict(self):
        row = {'instance_id': self.instance_id, 'seed': self.seed, 'node_count': self.node_count}
        for prefix, report in (('protected', self.protected), ('unprotected', self.unprotected)):
            row[f'{prefix}_n_hap'] = report.n_hap
            row[f'{prefix}_n_fso'] = report.n_fso
            row[f'{prefix}_mean_fso_per_hap'] = report.mean_fso_per_hap
            row[f'{prefix}_link_count'] = report.link_count
            row[f'{prefix}_occupancy'] = report.occupancy
            row[f'{prefix}_link_wavelengths'] = report.link_wavelengths
            row[f'{prefix}_rejected'] = report.rejected_lightpaths
        p, u = self.protected, self.unprotected
        row['delta_n_hap'] = p.n_hap - u.n_hap
        row['delta_n_fso'] = p.n_fso - u.n_fso
        row['delta_mean_fso_per_hap'] = p.mean_fso_per_hap - u.mean_fso_per_hap
        row['delta_link_count'] = p.link_count - u.link_count
        row['fso_increase_pct'] = _pct_increase(p.n_fso, u.n_fso)
        row['extra_link_wavelengths_pct'] = _pct_increase(p.link_wavelengths, u.link_wavelengths)
        row['occupancy_ratio'] = p.occupancy / u.occupancy if u.occupancy else float('inf')
        return row


def comparison_frame(rows):
    """DataFrame of comparison rows in the fixed column order"""
    records = [row.to_dict() if isinstance(row, ComparisonRow) else row for row in rows]
    df = pd.DataFrame(records, columns=COMPARISON_COLUMNS)
    return df.sort_values(['node_count', 'instance_id'], kind='mergesort').reset_index(drop=True)


def write_comparison_csv(rows, output_path, header_line=None):
    """
    Write comparison rows atomically.

    Parameters:
    - rows: ComparisonRow objects or dicts
    - output_path: CSV destination
    - header_line: optional first line, written as a '#' comment
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    df = comparison_frame(rows)

    fd, tmp_name = tempfile.mkstemp(dir=output_path.parent, prefix=output_path.name, suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            if header_line:
                f.write(f"# {header_line}\n")
            df.to_csv(f, index=False, float_format='%.10g', lineterminator='\n')
        os.replace(tmp_name, output_path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    return output_path


def read_comparison_csv(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Comparison CSV not found: {path}")
    return pd.read_csv(path, comment='#')

"""
Inter-HAP link BER as a function of length
End-to-end lightpath feasibility under a BER threshold
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

BER_FLOOR = 1e-9
BER_CEILING = 0.5


@dataclass(frozen=True)
class LogLinearBerCurve:
    """
    log10 BER grows linearly with length through a calibration anchor.

    The default anchor (60 km, 1e-3) with 0.1 decade/km gives
    BER(40)=1e-5, BER(50)=1e-4, BER(70)=1e-2; values are clamped to
    [BER_FLOOR, BER_CEILING].
    """

    anchor_km: float = 60.0
    anchor_ber: float = 1e-3
    slope_per_km: float = 0.1
    floor: float = BER_FLOOR
    ceiling: float = BER_CEILING

    def __post_init__(self):
        if self.slope_per_km < 0:
            raise ValueError('BER curve must be non-decreasing in length')
        if not 0 < self.anchor_ber <= self.ceiling:
            raise ValueError(f"anchor BER {self.anchor_ber} outside (0, {self.ceiling}]")

    @classmethod
    def from_params(cls, params):
        return cls(anchor_km=params.max_interhap_km, anchor_ber=params.ber_threshold)

    def __call__(self, length_km):
        if length_km < 0:
            raise ValueError(f"Link length must be non-negative, got {length_km}")
        exponent = math.log10(self.anchor_ber) + self.slope_per_km * (length_km - self.anchor_km)
        return min(max(10.0 ** exponent, self.floor), self.ceiling)


class TableBerCurve:
    """BER interpolated in log10 between measured (length_km, ber) points"""

    def __init__(self, lengths_km, bers):
        lengths = np.asarray(lengths_km, dtype=float)
        bers = np.asarray(bers, dtype=float)
        if lengths.ndim != 1 or lengths.shape != bers.shape or len(lengths) < 2:
            raise ValueError('BER table needs at least two (length_km, ber) rows')
        order = np.argsort(lengths, kind='mergesort')
        lengths, bers = lengths[order], bers[order]
        if np.any(np.diff(lengths) <= 0):
            raise ValueError('BER table lengths must be distinct')
        if np.any(np.diff(bers) < 0):
            raise ValueError('BER table must be non-decreasing in length')
        if np.any(bers <= 0) or np.any(bers > BER_CEILING):
            raise ValueError(f"BER table values must lie in (0, {BER_CEILING}]")
        self.lengths_km = lengths
        self.log_bers = np.log10(bers)

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"BER table not found: {path}")
        df = pd.read_csv(path)
        missing = {'length_km', 'ber'} - set(df.columns)
        if missing:
            raise ValueError(f"BER table {path.name} missing column(s): {sorted(missing)}")
        return cls(df['length_km'], df['ber'])

    def __call__(self, length_km):
        if length_km < 0:
            raise ValueError(f"Link length must be non-negative, got {length_km}")
        # Flat extrapolation outside the table
        return float(10.0 ** np.interp(length_km, self.lengths_km, self.log_bers))


DEFAULT_CURVE = LogLinearBerCurve()


def make_ber_curve(params, kind='loglinear', table_path=None):
    """
    Build the configured BER curve.

    Parameters:
    - params: PlanParams (anchors the log-linear curve at the maximum link length and delta)
    - kind: 'loglinear' or 'table'
    - table_path: CSV with length_km,ber columns (kind='table')
    """
    if kind == 'loglinear':
        return LogLinearBerCurve.from_params(params)
    if kind == 'table':
        if table_path is None:
            raise ValueError("BER curve 'table' needs a table path")
        return TableBerCurve.from_csv(table_path)
    raise ValueError(f"Unknown BER curve kind: {kind!r}")


def link_ber(length_km, curve=None):
    """BER of one inter-HAP link of the given length"""
    return (curve or DEFAULT_CURVE)(length_km)


def link_survival(length_km, curve=None):
    """Probability a bit crosses the link unharmed, 1 - BER"""
    return 1.0 - link_ber(length_km, curve)


def extension_feasible(path_survival, extension_survival, delta):
    """Strict end-to-end test on an accumulated survival product"""
    return path_survival * extension_survival > 1.0 - delta


def ber_e2e_feasible(path_lengths, extension_length, delta, curve=None):
    """
    Check whether a path extended by one arc keeps end-to-end BER under delta.

    Parameters:
    - path_lengths: lengths (km) of the arcs already on the path, in order
    - extension_length: length of the candidate arc, or None for no extension
    - delta: BER threshold in (0, 1)
    - curve: BER curve (default log-linear)

    Returns:
    - True iff prod(1 - BER(l)) > 1 - delta
    """
    prod = 1.0
    for length in path_lengths:
        prod *= link_survival(length, curve)
    extension = 1.0 if extension_length is None else link_survival(extension_length, curve)
    return extension_feasible(prod, extension, delta)


def path_ber(path_lengths, curve=None):
    """End-to-end BER of a path, 1 - prod(1 - BER(l))"""
    prod = 1.0
    for length in path_lengths:
        prod *= link_survival(length, curve)
    return 1.0 - prod

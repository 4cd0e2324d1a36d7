"""
Minimum clustering of ground FSO nodes under serving HAPs
Bar sweep placement and HAP-to-HAP demand aggregation
"""

import logging
import math

import numpy as np
import pandas as pd

from hap_model import HapDemand, HapNode, ROLE_PRIMARY

logger = logging.getLogger(__name__)

# Slack on coverage and span comparisons (km)
GEOMETRY_EPS = 1e-9


def assign_bars(node_frame, bar_height):
    """Bar index k of each node; bar k covers [k*h, (k+1)*h)"""
    return np.floor(node_frame['y'].to_numpy() / bar_height).astype(np.int64)


def cluster_ground_nodes(nodes, params):
    """
    Partition ground nodes into clusters and place one serving HAP per cluster.

    Bars of height coverage*sqrt(2) are swept by increasing index; inside a bar the
    unclustered nodes are screened by increasing (x, y, id). Each cluster takes
    the in-bar run starting at the first unclustered node that spans at most
    coverage*sqrt(2) in x and W nodes, then absorbs unclustered nodes within
    the coverage radius of the nadir, nearest first, until it holds W nodes.

    Parameters:
    - nodes: iterable of GroundNode (validated)
    - params: PlanParams

    Returns:
    - list of HapNode (role primary-serving), ids 0..k-1 in creation order
    """
    nodes = list(nodes)
    if not nodes:
        return []

    df = pd.DataFrame([(n.id, n.x, n.y) for n in nodes], columns=['id', 'x', 'y'])
    bar_height = params.bar_height_km
    span = params.coverage_km * math.sqrt(2)
    capacity = int(params.num_wavelengths)
    radius = params.coverage_km

    df['bar'] = assign_bars(df, bar_height)
    df = df.sort_values(['bar', 'x', 'y', 'id'], kind='mergesort').reset_index(drop=True)

    ids = df['id'].to_numpy()
    xs = df['x'].to_numpy(dtype=float)
    ys = df['y'].to_numpy(dtype=float)
    bars = df['bar'].to_numpy()
    clustered = np.zeros(len(df), dtype=bool)

    haps = []
    for k in np.unique(bars):
        bar_rows = np.flatnonzero(bars == k)
        while True:
            remaining = bar_rows[~clustered[bar_rows]]
            if len(remaining) == 0:
                break

            first = remaining[0]
            members = [first]
            for row in remaining[1:]:
                if len(members) >= capacity or xs[row] - xs[first] > span + GEOMETRY_EPS:
                    break
                members.append(row)
            last = members[-1]
            clustered[members] = True

            hap_x = (xs[first] + xs[last]) / 2
            hap_y = (k + 0.5) * bar_height

            if len(members) < capacity:
                candidates = np.flatnonzero(~clustered)
                if len(candidates) > 0:
                    dist = np.hypot(xs[candidates] - hap_x, ys[candidates] - hap_y)
                    inside = dist <= radius + GEOMETRY_EPS
                    candidates, dist = candidates[inside], dist[inside]
                    order = np.lexsort((ids[candidates], dist))
                    absorbed = candidates[order][:capacity - len(members)]
                    clustered[absorbed] = True
                    members.extend(absorbed.tolist())

            haps.append(HapNode(
                id=len(haps),
                x=float(hap_x),
                y=float(hap_y),
                role=ROLE_PRIMARY,
                cluster=tuple(int(ids[row]) for row in members),
            ))

    logger.info('clustering complete', extra={'nodes': len(nodes), 'clusters': len(haps)})
    return haps


def ground_to_hap(haps):
    """Map ground node id -> serving HAP id"""
    return {gid: hap.id for hap in haps for gid in hap.cluster}


def aggregate_demands(haps, traffic, params):
    """
    Aggregate ground traffic into directed HAP-to-HAP lightpath requests.

    Parameters:
    - haps: serving HapNodes from cluster_ground_nodes
    - traffic: TrafficMatrix
    - params: PlanParams

    Returns:
    - list of HapDemand ordered by (src, dst); n = ceil(total rate / wavelength rate)
    """
    if len(traffic) == 0:
        return []

    serving = ground_to_hap(haps)
    df = traffic.to_frame()
    df['src_hap'] = df['src'].map(serving)
    df['dst_hap'] = df['dst'].map(serving)

    unmapped = df['src_hap'].isna() | df['dst_hap'].isna()
    if unmapped.any():
        raise KeyError(f"{int(unmapped.sum())} traffic entries reference unclustered nodes")

    df = df[df['src_hap'] != df['dst_hap']]
    totals = df.groupby(['src_hap', 'dst_hap'])['gbps'].sum().sort_index()

    demands = []
    for (src, dst), total in totals.items():
        n = math.ceil(round(total / params.wavelength_rate_gbps, 9))
        if n > 0:
            demands.append(HapDemand(int(src), int(dst), int(n)))

    logger.info('demands aggregated', extra={
        'hap_demands': len(demands),
        'lightpaths_requested': sum(d.n for d in demands),
    })
    return demands

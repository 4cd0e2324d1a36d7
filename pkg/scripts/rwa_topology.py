"""
Inter-HAP topology design with routing and wavelength assignment
Builds the topology demand by demand over BER-constrained, wavelength-continuous lightpaths
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter, deque

import numpy as np

from backup_matching import reserve_backup_wavelengths
from ber_model import LogLinearBerCurve, extension_feasible
from hap_model import (
    HapDemand,
    InterHapLink,
    Lightpath,
    NoWavelengthAvailableError,
    PayloadExceededError,
)

logger = logging.getLogger(__name__)

VIRGIN_ARC_WEIGHT = 100.0


class TopologyState:
    """
    Mutable state of one planning run.

    Candidate arcs join every HAP pair closer than the maximum link length. A link becomes part
    of the topology once deployed; both of its directions then sit in it and each endpoint
    carries one more FSO device.
    """

    def __init__(self, haps, params, ber_curve=None):
        self.params = params
        self.haps = {h.id: h for h in haps}
        self.ber_curve = ber_curve or LogLinearBerCurve.from_params(params)
        self.num_wavelengths = int(params.num_wavelengths)

        self.links = {}
        self.arcs_in_topology = set()
        self.devices = {hid: (1 if h.cluster else 0) for hid, h in self.haps.items()}
        self.lightpaths = []
        self.rejections = []
        self.queue = deque()
        # wavelength -> number of directed links on which it is occupied
        self.wavelength_load = np.zeros(self.num_wavelengths, dtype=np.int64)

        self.candidate_arcs = self._candidate_arcs()

    def _candidate_arcs(self):
        ids = np.array(sorted(self.haps), dtype=np.int64)
        if len(ids) == 0:
            return {}
        xy = np.array([(self.haps[i].x, self.haps[i].y) for i in ids], dtype=float)
        dist = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
        arcs = {}
        # Coarse numpy screen; lengths come from distance_to so they match deployed links
        reach = self.params.max_interhap_km + 1.0
        for row, u in enumerate(ids):
            neighbours = []
            for col in np.flatnonzero(dist[row] < reach):
                if col == row:
                    continue
                v = int(ids[col])
                length = self.haps[int(u)].distance_to(self.haps[v])
                if length < self.params.max_interhap_km:
                    neighbours.append((v, length, 1.0 - self.ber_curve(length)))
            arcs[int(u)] = neighbours
        return arcs

    @staticmethod
    def link_key(u, v):
        return (u, v) if u < v else (v, u)

    def link(self, u, v):
        return self.links.get(self.link_key(u, v))

    def arc_in_topology(self, u, v):
        return (u, v) in self.arcs_in_topology

    def deploy_link(self, u, v):
        """Add the bidirectional link (u, v) to the topology, charging one FSO per endpoint"""
        key = self.link_key(u, v)
        if key in self.links:
            return self.links[key]
        length = self.haps[u].distance_to(self.haps[v])
        link = InterHapLink(key[0], key[1], length, self.num_wavelengths)
        self.links[key] = link
        self.arcs_in_topology.update({(u, v), (v, u)})
        self.devices[u] += 1
        self.devices[v] += 1
        return link

    def wavelength_free(self, u, v, w):
        link = self.link(u, v)
        return link is None or link.is_free(u, v, w)

    def occupy_arc(self, u, v, w, label):
        link = self.link(u, v)
        if link is None:
            raise KeyError(f"Arc ({u}, {v}) is not deployed")
        link.occupy(u, v, w, label)
        self.wavelength_load[w] += 1

    def path_free(self, arcs, w):
        return all(self.wavelength_free(u, v, w) for u, v in arcs)

    def add_lightpath(self, src, dst, arcs, w):
        lightpath = Lightpath(id=len(self.lightpaths), src=src, dst=dst,
                              wavelength=int(w), arcs=tuple(arcs))
        for u, v in arcs:
            self.occupy_arc(u, v, w, lightpath.id)
        self.lightpaths.append(lightpath)
        return lightpath


def edge_weight(state, u, v):
    """
    Arc weight for routing.

    Returns:
    - 100 if no wavelength was ever used on u->v, else 1 - free/W on u->v
    """
    link = state.link(u, v)
    if link is None or not link.ever_used(u, v):
        return VIRGIN_ARC_WEIGHT
    return 1.0 - link.free_count(u, v) / state.num_wavelengths


def least_used_wavelength(state, excluded=()):
    """
    Wavelength occupied on the fewest directed links, lowest index on ties.

    Raises:
    - NoWavelengthAvailableError when every wavelength is excluded
    """
    load = state.wavelength_load.astype(float)
    excluded = list(excluded)
    if excluded:
        load[excluded] = np.inf
    if np.isinf(load).all():
        raise NoWavelengthAvailableError('All wavelengths excluded')
    return int(np.argmin(load))


def sp_constraint(state, w, src, dst, delta=None, removed_arcs=frozenset()):
    """
    Dijkstra on the wavelength-w layer with the end-to-end BER check inside relaxation.

    An arc (u, v) is relaxed only if the current best path s->u extended by
    (u, v) keeps prod(1 - BER) > 1 - delta.

    Parameters:
    - state: TopologyState
    - w: wavelength layer
    - src, dst: HAP ids
    - delta: BER threshold (defaults to params.ber_threshold)
    - removed_arcs: arcs excluded for this attempt

    Returns:
    - list of arcs (u, v) from src to dst, or None when no path is found
    """
    if delta is None:
        delta = state.params.ber_threshold
    if src == dst:
        return None

    dist = {src: 0.0}
    survival = {src: 1.0}
    prev = {}
    settled = set()
    heap = [(0.0, src)]

    while heap:
        du, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == dst:
            break
        for v, _, arc_survival in state.candidate_arcs.get(u, ()):
            if v in settled or (u, v) in removed_arcs:
                continue
            if not state.wavelength_free(u, v, w):
                continue
            alt = du + edge_weight(state, u, v)
            if alt < dist.get(v, float('inf')) and extension_feasible(survival[u], arc_survival, delta):
                dist[v] = alt
                survival[v] = survival[u] * arc_survival
                prev[v] = u
                heapq.heappush(heap, (alt, v))

    if dst not in prev:
        return None
    arcs = []
    node = dst
    while node != src:
        arcs.append((prev[node], node))
        node = prev[node]
    arcs.reverse()
    return arcs


def _payload_violation(state, arcs):
    """First arc outside the topology whose endpoints cannot take one more FSO device"""
    pending = Counter()
    capacity = state.params.hap_payload
    for u, v in arcs:
        if state.arc_in_topology(u, v):
            continue
        if state.devices[u] + pending[u] >= capacity or state.devices[v] + pending[v] >= capacity:
            return (u, v)
        pending[u] += 1
        pending[v] += 1
    return None


def route_one_demand(state, demand):
    """
    Route one HAP demand (s, d, n) as lightpaths.

    Wavelengths are tried in least-used order, at most W per call. On the
    first wavelength with a payload-feasible path p, p's new links are deployed and
    the remaining n-1 lightpaths reuse p on the next least-used wavelengths
    free along it. Any remainder goes to the tail of the queue; a demand with
    no lightpath after W trials is rejected.

    Returns:
    - list of Lightpath established (empty on rejection)
    """
    s, d, n = demand.src, demand.dst, demand.n
    W = state.num_wavelengths
    tried = set()

    while len(tried) < W:
        w = least_used_wavelength(state, tried)
        tried.add(w)

        # Arc removals apply to this wavelength trial only
        removed = set()
        while True:
            path = sp_constraint(state, w, s, d, removed_arcs=removed)
            if path is None:
                break
            violation = _payload_violation(state, path)
            if violation is None:
                break
            removed.add(violation)
        if path is None:
            continue

        for u, v in path:
            if not state.arc_in_topology(u, v):
                state.deploy_link(u, v)
        established = [state.add_lightpath(s, d, path, w)]

        remain = n - 1
        while remain > 0 and len(tried) < W:
            wk = least_used_wavelength(state, tried)
            tried.add(wk)
            if state.path_free(path, wk):
                established.append(state.add_lightpath(s, d, path, wk))
                remain -= 1

        if remain > 0:
            state.queue.append(HapDemand(s, d, remain))
            logger.debug('demand split', extra={'src': s, 'dst': d, 'remain': remain})
        return established

    state.rejections.append(demand)
    logger.info('demand rejected', extra={'src': s, 'dst': d, 'n': n})
    return []


def build_topology(haps, backup_pairs, demands, params, ber_curve=None):
    """
    Build the topology and route every demand (FIFO, remainders re-enqueued at the tail).

    The topology starts with the backup-pair links and their reservations; each HAP that
    backs up a non-empty cluster carries one backup-serving FSO.

    Parameters:
    - haps: every HapNode of the design (primaries and added backups)
    - backup_pairs: BackupPair list (empty for the unprotected mode)
    - demands: HapDemand list
    - params: PlanParams
    - ber_curve: optional BER curve

    Returns:
    - final TopologyState

    Raises:
    - PayloadExceededError if the backup setup alone overloads a HAP
    """
    state = TopologyState(haps, params, ber_curve)

    for pair in backup_pairs:
        if state.haps[pair.b].cluster:
            state.devices[pair.a] += 1
        if state.haps[pair.a].cluster:
            state.devices[pair.b] += 1
    for pair in backup_pairs:
        reserve_backup_wavelengths(pair, state)

    overloaded = sorted(u for u, count in state.devices.items() if count > params.hap_payload)
    if overloaded:
        logger.error('backup setup exceeds HAP payload', extra={'haps': overloaded[:5]})
        raise PayloadExceededError(
            f"{len(overloaded)} HAP(s) exceed the payload of {params.hap_payload} "
            f"devices after backup setup (first: {overloaded[:5]})"
        )

    state.queue.extend(sorted(demands, key=lambda dm: (dm.src, dm.dst)))
    while state.queue:
        route_one_demand(state, state.queue.popleft())

    logger.info('topology built', extra={
        'links': len(state.links),
        'lightpaths': len(state.lightpaths),
        'rejections': len(state.rejections),
    })
    return state


"""
Backup matching of serving HAPs for 1+1 cloud protection
Pairs HAPs by maximum cardinality matching and adds HAPs for the unmatched
"""

import logging
import math

import networkx as nx

from hap_model import (
    BACKUP_SLOT,
    BackupPair,
    BackupReservationError,
    HapNode,
    ROLE_ADDED_BACKUP,
    ROLE_PRIMARY,
)

logger = logging.getLogger(__name__)

# Relative margin keeping added backups strictly beyond twice the cloud size
PLACEMENT_MARGIN = 1e-3


def pair_window_ok(distance_km, params):
    """Backup distance window: twice the cloud size < d < maximum link length"""
    return 2 * params.max_cloud_km < distance_km < params.max_interhap_km


def backup_setup_devices(hap, partner):
    """FSO devices on `hap` once it is paired: serving, backup-serving and the pair link"""
    return (1 if hap.cluster else 0) + (1 if partner.cluster else 0) + 1


def pair_payload_ok(a, b, params):
    return (backup_setup_devices(a, b) <= params.hap_payload
            and backup_setup_devices(b, a) <= params.hap_payload)


def eligibility_graph(haps, params):
    """
    Build the graph of HAP pairs allowed to back each other up.

    An edge (a, b) exists iff 2*max_cloud < dist(a, b) < max_link, the two clusters
    together need no more than W wavelengths, and both HAPs keep their devices
    within the payload once paired.

    Parameters:
    - haps: primary HapNodes
    - params: PlanParams

    Returns:
    - networkx.Graph; edges carry 'distance' and a matching 'preference'
    """
    primaries = sorted((h for h in haps if h.role == ROLE_PRIMARY), key=lambda h: h.id)
    graph = nx.Graph()
    for hap in primaries:
        graph.add_node(hap.id, cluster_size=hap.cluster_size)

    for i, a in enumerate(primaries):
        for b in primaries[i + 1:]:
            distance = a.distance_to(b)
            if not pair_window_ok(distance, params):
                continue
            if a.cluster_size + b.cluster_size > params.num_wavelengths:
                continue
            if not pair_payload_ok(a, b, params):
                continue
            graph.add_edge(a.id, b.id, distance=distance)

    # Among maximum matchings, maximum total preference = minimum total distance
    for a, b, data in graph.edges(data=True):
        data['preference'] = params.max_interhap_km - data['distance']

    logger.info('eligibility graph built', extra={
        'haps': graph.number_of_nodes(), 'edges': graph.number_of_edges(),
    })
    return graph


def max_matching_blossom(graph, weight='preference'):
    """
    Maximum cardinality matching (Edmonds' blossom via networkx).

    Edge attribute `weight` breaks ties between maximum matchings; edges
    without it count as weight 1.

    Returns:
    - sorted list of (a, b) pairs with a < b
    """
    matching = nx.max_weight_matching(graph, maxcardinality=True, weight=weight)
    return sorted(tuple(sorted(edge)) for edge in matching)


def _backup_position(hap, centroid, distance):
    dx, dy = hap.x - centroid[0], hap.y - centroid[1]
    norm = math.hypot(dx, dy)
    if norm < 1e-12:
        dx, dy, norm = 1.0, 0.0, 1.0
    return hap.x + distance * dx / norm, hap.y + distance * dy / norm


def added_backup_distance(params):
    """2*max_cloud*(1+eps), pulled inside the window when it is very narrow"""
    distance = 2 * params.max_cloud_km * (1 + PLACEMENT_MARGIN)
    if distance >= params.max_interhap_km:
        distance = (2 * params.max_cloud_km + params.max_interhap_km) / 2
    return distance


def assign_backups(haps, matching, params):
    """
    Turn a matching into backup pairs and add a backup HAP for each unmatched HAP.

    Added HAPs sit at distance 2*max_cloud*(1+eps) along the ray from the centroid
    of the primaries through the unmatched HAP, and serve no ground cluster.

    Parameters:
    - haps: primary HapNodes
    - matching: list of (a, b) from max_matching_blossom
    - params: PlanParams

    Returns:
    - (list of BackupPair, list of added HapNode)
    """
    by_id = {h.id: h for h in haps}
    primaries = [h for h in haps if h.role == ROLE_PRIMARY]

    pairs = []
    matched = set()
    for a, b in matching:
        if a in matched or b in matched:
            raise ValueError(f"HAP appears in more than one matched pair: ({a}, {b})")
        matched.update((a, b))
        hap_a, hap_b = by_id[a], by_id[b]
        pairs.append(BackupPair(
            a=a,
            b=b,
            distance_km=hap_a.distance_to(hap_b),
            reserved_per_direction=hap_a.cluster_size + hap_b.cluster_size,
        ))

    added = []
    if primaries:
        centroid = (
            sum(h.x for h in primaries) / len(primaries),
            sum(h.y for h in primaries) / len(primaries),
        )
        next_id = max(by_id) + 1
        distance = added_backup_distance(params)
        for hap in sorted(primaries, key=lambda h: h.id):
            if hap.id in matched:
                continue
            x, y = _backup_position(hap, centroid, distance)
            backup = HapNode(id=next_id, x=x, y=y, role=ROLE_ADDED_BACKUP, cluster=())
            next_id += 1
            added.append(backup)
            pairs.append(BackupPair(
                a=hap.id,
                b=backup.id,
                distance_km=hap.distance_to(backup),
                reserved_per_direction=hap.cluster_size,
            ))

    logger.info('backups assigned', extra={
        'matched_pairs': len(matching), 'added_haps': len(added),
    })
    return pairs, added


def reserve_backup_wavelengths(pair, state):
    """
    Deploy the pair's link in the topology and reserve backup slots.

    Both directions receive |cluster(a)| + |cluster(b)| backup-reserved
    slots, lowest free wavelength first.

    Parameters:
    - pair: BackupPair
    - state: rwa_topology.TopologyState under construction

    Returns:
    - the InterHapLink carrying the reservation

    Raises:
    - BackupReservationError if a direction lacks free wavelengths
    """
    link = state.deploy_link(pair.a, pair.b)
    count = pair.reserved_per_direction
    for u, v in ((link.a, link.b), (link.b, link.a)):
        if link.free_count(u, v) < count:
            raise BackupReservationError(
                f"Link {link.key} has {link.free_count(u, v)} free wavelengths "
                f"on {u}->{v}, backup needs {count}"
            )
    for u, v in ((link.a, link.b), (link.b, link.a)):
        reserved = 0
        for w in range(link.num_wavelengths):
            if reserved == count:
                break
            if link.is_free(u, v, w):
                state.occupy_arc(u, v, w, BACKUP_SLOT)
                reserved += 1
    return link


def exhaustive_matching_size(graph):
    """
    Maximum matching cardinality by exhaustive search.

    Exponential; meant as a reference on graphs of about ten vertices.
    """
    adjacency = {u: set(graph.neighbors(u)) - {u} for u in graph.nodes}

    def search(free):
        candidates = [u for u in free if adjacency[u] & free]
        if not candidates:
            return 0
        u = min(candidates)
        # u stays unmatched, or u matches one of its free neighbours
        best = search(free - {u})
        for v in adjacency[u] & free:
            best = max(best, 1 + search(free - {u, v}))
        return best

    return search(frozenset(graph.nodes))

"""
Validation checks for HAP dimensioning instances and completed designs
Collects every violation before rejecting an instance
"""

import logging
import math
from collections import Counter

from ber_model import LogLinearBerCurve, ber_e2e_feasible, path_ber
from hap_model import (
    BACKUP_SLOT,
    GroundNode,
    InvalidInstanceError,
    MODE_PROTECTED,
    PlanningInstance,
    ROLE_ADDED_BACKUP,
    ROLE_PRIMARY,
    TrafficMatrix,
)

logger = logging.getLogger(__name__)

# Float slack for per-node rate sums
RATE_TOLERANCE = 1e-9


class InstanceValidator:
    """Validates ground nodes, traffic matrix and parameters of one instance"""

    def __init__(self, nodes, traffic, params):
        self.nodes = tuple(nodes)
        self.traffic = traffic if traffic is not None else TrafficMatrix()
        self.params = params
        self.issues = []
        self.warnings = []

    def _issue(self, check, message, **detail):
        self.issues.append({'check': check, 'severity': 'ERROR', 'message': message, **detail})

    def check_params(self):
        for problem in self.params.problems():
            self._issue('params', problem)

    def check_nodes(self):
        """Non-empty node set, unique ids, finite first-quadrant coordinates"""
        if not self.nodes:
            self._issue('empty_node_set', 'empty node set')
            return

        seen = set()
        duplicates = set()
        for node in self.nodes:
            if node.id in seen:
                duplicates.add(node.id)
            seen.add(node.id)
        if duplicates:
            self._issue('duplicate_id', f"duplicate id(s): {sorted(duplicates)}",
                        node_ids=sorted(duplicates)[:5])

        bad = [n.id for n in self.nodes if not (math.isfinite(n.x) and math.isfinite(n.y))]
        if bad:
            self._issue('coordinates', f"{len(bad)} node(s) with non-finite coordinates",
                        node_ids=bad[:5])

        negative = [n.id for n in self.nodes if n.x < 0 or n.y < 0]
        if negative:
            self._issue('negative_coordinates',
                        f"{len(negative)} node(s) with negative coordinates",
                        node_ids=negative[:5])

    def check_traffic(self):
        """Known endpoints, no self-demands, positive rates, per-node caps"""
        if len(self.traffic) == 0:
            return

        df = self.traffic.to_frame()
        known = {n.id for n in self.nodes}

        unknown = sorted((set(df['src']) | set(df['dst'])) - known)
        if unknown:
            self._issue('unknown_endpoint',
                        f"traffic references {len(unknown)} unknown node id(s)",
                        node_ids=unknown[:5])

        self_demands = df[df['src'] == df['dst']]
        if len(self_demands) > 0:
            self._issue('self_demand', f"{len(self_demands)} self-demand(s)",
                        node_ids=self_demands['src'].tolist()[:5])

        non_positive = df[~(df['gbps'] > 0)]
        if len(non_positive) > 0:
            self._issue('rate', f"{len(non_positive)} demand(s) with non-positive rate")

        pairs = df.groupby(['src', 'dst']).size()
        repeated = pairs[pairs > 1]
        if len(repeated) > 0:
            self.warnings.append({
                'check': 'repeated_pair',
                'severity': 'WARNING',
                'message': f"{len(repeated)} ordered pair(s) listed more than once; rates add up",
            })

        cap = self.params.wavelength_rate_gbps + RATE_TOLERANCE
        egress = self.traffic.egress()
        over = egress[egress > cap]
        if len(over) > 0:
            self._issue('egress_cap',
                        f"egress cap exceeded at {len(over)} node(s) "
                        f"(max {over.max():.3f} Gbps > {self.params.wavelength_rate_gbps} Gbps)",
                        node_ids=[int(i) for i in over.index[:5]])

        ingress = self.traffic.ingress()
        over = ingress[ingress > cap]
        if len(over) > 0:
            self._issue('ingress_cap',
                        f"ingress cap exceeded at {len(over)} node(s) "
                        f"(max {over.max():.3f} Gbps > {self.params.wavelength_rate_gbps} Gbps)",
                        node_ids=[int(i) for i in over.index[:5]])

    def run_all_checks(self):
        """Run every check; True when no issue was found"""
        self.issues = []
        self.warnings = []
        self.check_params()
        self.check_nodes()
        self.check_traffic()

        for warning in self.warnings:
            logger.warning(warning['message'], extra={'check': warning['check']})
        if self.issues:
            logger.info('instance rejected', extra={'issues': len(self.issues)})
        return not self.issues


def validate_instance(nodes, traffic, params):
    """
    Validate an instance against the model invariants.

    Parameters:
    - nodes: iterable of GroundNode
    - traffic: TrafficMatrix (or None for no traffic)
    - params: PlanParams

    Returns:
    - PlanningInstance when every invariant holds

    Raises:
    - InvalidInstanceError listing every violation
    """
    nodes = tuple(n if isinstance(n, GroundNode) else GroundNode(**n) for n in nodes)
    validator = InstanceValidator(nodes, traffic, params)
    if not validator.run_all_checks():
        raise InvalidInstanceError(validator.issues)
    return PlanningInstance(nodes=nodes, traffic=validator.traffic, params=params)


class DesignValidator:
    """
    Post-hoc checks on a completed design.

    Re-derives every structural property from the design alone: cluster
    partition and coverage, backup windows and reservations, slot labels,
    wavelength continuity, payload, device tally, BER feasibility and
    lightpath conservation per demand.
    """

    def __init__(self, design, nodes=None, ber_curve=None):
        self.design = design
        self.params = design.params
        self.nodes = {n.id: n for n in nodes} if nodes is not None else None
        self.ber_curve = ber_curve or LogLinearBerCurve.from_params(design.params)
        self.issues = []

    def _issue(self, check, message, **detail):
        self.issues.append({'check': check, 'severity': 'ERROR', 'message': message, **detail})

    def check_clusters(self):
        """Every ground node in exactly one cluster, within D of its HAP, at most W per cluster"""
        seen = {}
        for hap in self.design.haps.values():
            if hap.cluster_size > self.params.num_wavelengths:
                self._issue('cluster_capacity', f"HAP {hap.id} serves {hap.cluster_size} nodes")
            if hap.role == ROLE_ADDED_BACKUP and hap.cluster:
                self._issue('added_backup_cluster', f"added backup HAP {hap.id} serves ground nodes")
            for gid in hap.cluster:
                if gid in seen:
                    self._issue('cluster_partition',
                                f"ground node {gid} in clusters {seen[gid]} and {hap.id}")
                seen[gid] = hap.id
                if self.nodes is not None and gid in self.nodes:
                    node = self.nodes[gid]
                    if math.hypot(node.x - hap.x, node.y - hap.y) > self.params.coverage_km + 1e-6:
                        self._issue('coverage', f"ground node {gid} outside coverage of HAP {hap.id}")
        if self.nodes is not None:
            missing = sorted(set(self.nodes) - set(seen))
            if missing:
                self._issue('cluster_partition', f"{len(missing)} ground node(s) unclustered",
                            node_ids=missing[:5])

    def check_backup_pairs(self):
        """Distance window, disjoint pairs and reservations of |C(a)| + |C(b)| per direction"""
        paired = set()
        for pair in self.design.backup_pairs:
            a, b = self.design.haps[pair.a], self.design.haps[pair.b]
            for hid in (pair.a, pair.b):
                if hid in paired:
                    self._issue('pair_disjoint', f"HAP {hid} in more than one backup pair")
                paired.add(hid)
            distance = a.distance_to(b)
            if not 2 * self.params.max_cloud_km < distance < self.params.max_interhap_km:
                self._issue('pair_window', f"pair ({pair.a}, {pair.b}) at {distance:.3f} km")
            link = self.design.links.get((min(pair.a, pair.b), max(pair.a, pair.b)))
            if link is None:
                self._issue('pair_link', f"pair ({pair.a}, {pair.b}) has no link")
                continue
            need = a.cluster_size + b.cluster_size
            reserved = (link.slots == BACKUP_SLOT).sum(axis=1)
            if any(int(r) != need for r in reserved):
                self._issue('pair_reservation',
                            f"pair ({pair.a}, {pair.b}) reserves {reserved.tolist()}, needs {need}")

        if self.design.mode == MODE_PROTECTED:
            primaries = {h.id for h in self.design.haps.values() if h.role == ROLE_PRIMARY}
            unprotected = sorted(primaries - paired)
            if unprotected:
                self._issue('pair_coverage', f"{len(unprotected)} primary HAP(s) without backup")

    def check_lightpaths(self):
        """Continuity, single wavelength, slot labels, BER and link length"""
        labelled = Counter()
        for link in self.design.links.values():
            if link.length_km >= self.params.max_interhap_km:
                self._issue('link_length', f"link {link.key} is {link.length_km:.3f} km")
            for label in link.slots[link.slots >= 0].tolist():
                labelled[label] += 1

        for lp in self.design.lightpaths:
            nodes = [lp.src] + [v for _, v in lp.arcs]
            chained = all(lp.arcs[i][1] == lp.arcs[i + 1][0] for i in range(len(lp.arcs) - 1))
            if not lp.arcs or lp.arcs[0][0] != lp.src or lp.arcs[-1][1] != lp.dst or not chained:
                self._issue('continuity', f"lightpath {lp.id} arcs do not chain {lp.src}->{lp.dst}")
                continue
            if len(set(nodes)) != len(nodes):
                self._issue('continuity', f"lightpath {lp.id} revisits a HAP")
            lengths = []
            for u, v in lp.arcs:
                link = self.design.links.get((min(u, v), max(u, v)))
                if link is None:
                    self._issue('arc_in_topology', f"lightpath {lp.id} uses undeployed arc ({u}, {v})")
                    break
                if link.slots[link.direction(u, v), lp.wavelength] != lp.id:
                    self._issue('slot_label', f"lightpath {lp.id} not on ({u}, {v}, w={lp.wavelength})")
                lengths.append(link.length_km)
            else:
                if labelled[lp.id] != lp.hops:
                    self._issue('slot_label',
                                f"lightpath {lp.id} labels {labelled[lp.id]} slots for {lp.hops} hop(s)")
                if not ber_e2e_feasible(lengths, None, self.params.ber_threshold, self.ber_curve):
                    self._issue('ber', f"lightpath {lp.id} BER {path_ber(lengths, self.ber_curve):.2e} "
                                       f"exceeds threshold {self.params.ber_threshold:g}")

    def check_devices(self):
        """Device tally matches serving, backup-serving and link FSOs, within payload"""
        expected = {hid: (1 if h.cluster else 0) for hid, h in self.design.haps.items()}
        for pair in self.design.backup_pairs:
            if self.design.haps[pair.b].cluster:
                expected[pair.a] += 1
            if self.design.haps[pair.a].cluster:
                expected[pair.b] += 1
        for a, b in self.design.links:
            expected[a] += 1
            expected[b] += 1

        for hid, count in expected.items():
            actual = self.design.devices.get(hid, 0)
            if actual != count:
                self._issue('device_tally', f"HAP {hid} carries {actual} devices, expected {count}")
            if actual > self.params.hap_payload:
                self._issue('payload', f"HAP {hid} carries {actual} > {self.params.hap_payload} devices")

    def check_conservation(self):
        """Established plus rejected lightpaths equal the request of every demand"""
        established = Counter((lp.src, lp.dst) for lp in self.design.lightpaths)
        rejected = Counter()
        for r in self.design.rejections:
            rejected[(r.src, r.dst)] += r.n
        for demand in self.design.demands:
            key = (demand.src, demand.dst)
            if established[key] + rejected[key] != demand.n:
                self._issue('conservation',
                            f"demand {key} asks {demand.n}, got {established[key]} "
                            f"established + {rejected[key]} rejected")

    def run_all_checks(self):
        self.issues = []
        self.check_clusters()
        self.check_backup_pairs()
        self.check_lightpaths()
        self.check_devices()
        self.check_conservation()
        if self.issues:
            logger.warning('design invariant violated', extra={
                'mode': self.design.mode, 'issues': len(self.issues),
            })
        return not self.issues


def design_issues(design, nodes=None, ber_curve=None):
    """List every invariant the design violates (empty when it is sound)"""
    validator = DesignValidator(design, nodes, ber_curve)
    validator.run_all_checks()
    return validator.issues

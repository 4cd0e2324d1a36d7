"""
Planning pipeline and command-line driver for survivable HAP networks
Clustering, backup matching and topology design in protected or unprotected mode
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from backup_matching import assign_backups, eligibility_graph, max_matching_blossom
from ber_model import make_ber_curve
from generate_sweep_report import generate_markdown_report
from ground_clustering import aggregate_demands, cluster_ground_nodes
from hap_model import HapDesign, MODE_PROTECTED, MODE_UNPROTECTED, PlanningError
from plan_config import default_output_dir, load_plan_params, setup_logging
from plan_metrics import ComparisonRow, plan_report, write_comparison_csv
from rwa_topology import build_topology
from scenario import (
    MODES,
    ScenarioSpec,
    generate_instance,
    load_design,
    load_scenario,
    save_design,
    save_scenario,
)

logger = logging.getLogger(__name__)

VERSION = '0.1.0'
CSV_HEADER = f"hap-planner {VERSION}"


class HapNetworkPlanner:
    """Runs the dimensioning steps for one parameter set"""

    def __init__(self, params, ber_curve=None):
        self.params = params
        self.ber_curve = ber_curve
        self.planning_log = []

    def run_pipeline(self, instance, mode):
        """
        Dimension one instance.

        Parameters:
        - instance: validated PlanningInstance
        - mode: 'protected' (clustering + backup matching + topology)
          or 'unprotected' (clustering + topology)

        Returns:
        - (HapDesign, PlanReport)
        """
        if mode not in (MODE_PROTECTED, MODE_UNPROTECTED):
            raise ValueError(f"mode must be protected or unprotected, got {mode!r}")

        primaries = cluster_ground_nodes(instance.nodes, self.params)
        demands = aggregate_demands(primaries, instance.traffic, self.params)

        pairs, added = [], []
        if mode == MODE_PROTECTED:
            graph = eligibility_graph(primaries, self.params)
            matching = max_matching_blossom(graph)
            pairs, added = assign_backups(primaries, matching, self.params)

        haps = primaries + added
        state = build_topology(haps, pairs, demands, self.params, self.ber_curve)

        design = HapDesign(
            mode=mode,
            params=self.params,
            haps={h.id: h for h in haps},
            backup_pairs=pairs,
            links=state.links,
            lightpaths=state.lightpaths,
            devices=state.devices,
            demands=demands,
            rejections=state.rejections,
        )
        report = plan_report(design)

        entry = {
            'mode': mode,
            'nodes': len(instance.nodes),
            'n_hap': report.n_hap,
            'n_fso': report.n_fso,
            'links': report.link_count,
            'lightpaths': report.lightpath_count,
            'rejected_lightpaths': report.rejected_lightpaths,
        }
        self.planning_log.append(entry)
        logger.info('pipeline complete', extra=entry)
        return design, report

    def compare_modes(self, instance, instance_id, seed):
        """Run both modes on the same instance"""
        protected, protected_report = self.run_pipeline(instance, MODE_PROTECTED)
        unprotected, unprotected_report = self.run_pipeline(instance, MODE_UNPROTECTED)
        row = ComparisonRow(
            instance_id=instance_id,
            seed=seed,
            node_count=len(instance.nodes),
            protected=protected_report,
            unprotected=unprotected_report,
        )
        return row, {MODE_PROTECTED: protected, MODE_UNPROTECTED: unprotected}


def run_pipeline(instance, params=None, mode=MODE_PROTECTED, ber_curve=None):
    """Module-level convenience wrapper around HapNetworkPlanner.run_pipeline"""
    planner = HapNetworkPlanner(params or instance.params, ber_curve)
    return planner.run_pipeline(instance, mode)


@dataclass(frozen=True)
class SweepItem:
    instance_id: str
    seed: int
    node_count: int


def sweep_items(base_seed, node_counts, replicates=1):
    """Instance ids and per-instance seeds derived from one base seed"""
    items = []
    for node_count in node_counts:
        for rep in range(replicates):
            seed = int(np.random.SeedSequence([base_seed, node_count, rep]).generate_state(1)[0])
            items.append(SweepItem(f"n{node_count}-r{rep}", seed, node_count))
    return items


def _run_sweep_item(item, params, ber_settings, spec_kwargs, designs_dir):
    ber_curve = make_ber_curve(params, ber_settings.get('ber_curve', 'loglinear'),
                               ber_settings.get('ber_table'))
    spec = ScenarioSpec(seed=item.seed, node_count=item.node_count, **spec_kwargs)
    instance = generate_instance(spec, params)
    planner = HapNetworkPlanner(params, ber_curve)
    row, designs = planner.compare_modes(instance, item.instance_id, item.seed)
    if designs_dir is not None:
        for mode, design in designs.items():
            save_design(design, Path(designs_dir) / f"{item.instance_id}_{mode}.json")
    return row


def run_sweep(base_seed, node_counts, params, output_dir, replicates=1, ber_settings=None,
              spec_kwargs=None, workers=1, save_designs=True):
    """
    Generate and plan every sweep instance in both modes.

    Parameters:
    - base_seed: seed every instance seed derives from
    - node_counts: list of ground node counts
    - params: PlanParams
    - output_dir: destination of comparison.csv, designs/ and failures
    - replicates: instances per node count
    - ber_settings: {'ber_curve': ..., 'ber_table': ...}
    - spec_kwargs: extra ScenarioSpec fields (field_km, load_factor_gbps, ...)
    - workers: process pool size (1 = serial)

    Returns:
    - (list of ComparisonRow, list of failure dicts)
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    ber_settings = ber_settings or {'ber_curve': 'loglinear'}
    spec_kwargs = spec_kwargs or {}
    designs_dir = output_dir / 'designs' if save_designs else None
    items = sweep_items(base_seed, node_counts, replicates)

    rows, failures = [], []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                (item, pool.submit(_run_sweep_item, item, params, ber_settings, spec_kwargs, designs_dir))
                for item in items
            ]
            outcomes = []
            for item, future in futures:
                try:
                    outcomes.append((item, future.result(), None))
                except (PlanningError, ValueError, KeyError) as e:
                    outcomes.append((item, None, e))
    else:
        outcomes = []
        for item in items:
            try:
                outcomes.append((item, _run_sweep_item(item, params, ber_settings, spec_kwargs, designs_dir), None))
            except (PlanningError, ValueError, KeyError) as e:
                outcomes.append((item, None, e))

    for item, row, error in outcomes:
        if error is None:
            rows.append(row)
            print(f"  ✓ {item.instance_id}: "
                  f"HAPs {row.protected.n_hap}/{row.unprotected.n_hap}, "
                  f"FSOs {row.protected.n_fso}/{row.unprotected.n_fso}")
        else:
            failures.append({'instance_id': item.instance_id, 'seed': item.seed,
                             'node_count': item.node_count, 'error': str(error)})
            logger.error('sweep item failed', extra=failures[-1])
            print(f"  ✗ {item.instance_id}: {error}")

    csv_path = write_comparison_csv(rows, output_dir / 'comparison.csv', header_line=CSV_HEADER)
    if failures:
        with open(output_dir / 'sweep_failures.json', 'w') as f:
            json.dump(failures, f, indent=2)
    logger.info('sweep complete', extra={'rows': len(rows), 'failures': len(failures),
                                         'csv': str(csv_path)})
    return rows, failures


def _params_from_args(args):
    overrides = {
        'coverage_km': args.coverage_km,
        'num_wavelengths': args.wavelengths,
        'max_cloud_km': args.cloud_km,
        'hap_payload': args.payload,
        'max_interhap_km': args.max_link_km,
        'ber_threshold': args.ber_threshold,
    }
    params, ber_settings = load_plan_params(args.params, overrides)
    if args.ber_table:
        ber_settings = {'ber_curve': 'table', 'ber_table': args.ber_table}
    return params, ber_settings


def _print_report(report):
    print(f"  Mode: {report.mode}")
    print(f"  HAPs: {report.n_hap} ({report.added_backup_haps} added backup)")
    print(f"  FSO devices: {report.n_fso} (mean {report.mean_fso_per_hap:.2f} per HAP)")
    print(f"  Inter-HAP links: {report.link_count}")
    print(f"  Link occupancy: {report.occupancy:.4f}")
    print(f"  Link-wavelengths: {report.link_wavelengths}")
    print(f"  Lightpaths: {report.lightpath_count}")
    print(f"  Cost: {report.cost:.2f}")
    print(f"  Rejected lightpaths: {report.rejected_lightpaths}")


def cmd_generate(args):
    params, _ = _params_from_args(args)
    spec = ScenarioSpec(seed=args.seed, node_count=args.nodes, field_km=tuple(args.field),
                        load_factor_gbps=args.load_factor)
    instance = generate_instance(spec, params)
    out = save_scenario(instance, Path(args.out) / f"scenario_n{args.nodes}_s{args.seed}.json")
    print(f"✓ Scenario saved: {out}")
    print(f"  Nodes: {len(instance.nodes)}")
    print(f"  Traffic entries: {len(instance.traffic)}")
    return 0


def cmd_plan(args):
    ber_settings = {}
    if args.params:
        # An explicit params file replaces the scenario's own parameters
        params, ber_settings = _params_from_args(args)
        param_overrides = params.to_dict()
    else:
        param_overrides = {k: v for k, v in {
            'coverage_km': args.coverage_km,
            'num_wavelengths': args.wavelengths,
            'max_cloud_km': args.cloud_km,
            'hap_payload': args.payload,
            'max_interhap_km': args.max_link_km,
            'ber_threshold': args.ber_threshold,
        }.items() if v is not None}
        if args.ber_table:
            ber_settings = {'ber_curve': 'table', 'ber_table': args.ber_table}
    instance = load_scenario(args.scenario, param_overrides)
    ber_curve = make_ber_curve(instance.params, ber_settings.get('ber_curve', 'loglinear'),
                               ber_settings.get('ber_table'))
    planner = HapNetworkPlanner(instance.params, ber_curve)
    out_dir = Path(args.out)
    stem = Path(args.scenario).stem

    modes = (MODE_PROTECTED, MODE_UNPROTECTED) if args.mode == 'both' else (args.mode,)
    reports = {}
    for mode in modes:
        print("\n" + "=" * 70)
        print(f"PLANNING: {stem} ({mode})")
        print("=" * 70)
        design, report = planner.run_pipeline(instance, mode)
        reports[mode] = report
        save_design(design, out_dir / f"{stem}_{mode}_design.json")
        with open(out_dir / f"{stem}_{mode}_report.json", 'w') as f:
            json.dump(report.to_dict(), f, indent=2)
        _print_report(report)

    if len(reports) == 2:
        row = ComparisonRow(stem, -1, len(instance.nodes),
                            reports[MODE_PROTECTED], reports[MODE_UNPROTECTED])
        csv_path = write_comparison_csv([row], out_dir / f"{stem}_comparison.csv",
                                        header_line=CSV_HEADER)
        print(f"\n✓ Comparison: {csv_path}")
    return 0


def cmd_sweep(args):
    params, ber_settings = _params_from_args(args)
    out_dir = Path(args.out)
    print("\n" + "=" * 70)
    print(f"SWEEP: seed {args.seed}, nodes {args.nodes}, {args.replicates} replicate(s)")
    print("=" * 70)
    rows, failures = run_sweep(
        args.seed, args.nodes, params, out_dir,
        replicates=args.replicates,
        ber_settings=ber_settings,
        spec_kwargs={'field_km': tuple(args.field), 'load_factor_gbps': args.load_factor},
        workers=args.workers,
        save_designs=not args.no_designs,
    )
    if rows:
        generate_markdown_report(out_dir / 'comparison.csv', out_dir / 'sweep_summary.md')
    print(f"\n✓ {len(rows)} instance(s) planned, {len(failures)} failure(s)")
    print(f"  Results: {out_dir}")
    return 0


def cmd_metrics(args):
    design = load_design(args.design)
    report = plan_report(design)
    print("\n" + "=" * 70)
    print(f"METRICS: {Path(args.design).name}")
    print("=" * 70)
    _print_report(report)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='hap_planner',
        description='Dimension survivable HAP networks for ground FSO traffic',
    )
    parser.add_argument('--log-level', default='WARNING', help='Console log level')
    sub = parser.add_subparsers(dest='command', required=True)

    def add_param_flags(p):
        p.add_argument('--params', help='YAML parameter file (default config/plan_params.yaml)')
        p.add_argument('--coverage-km', type=float, help='Ground coverage D of a serving FSO')
        p.add_argument('--wavelengths', type=int, help='Wavelengths per link direction W')
        p.add_argument('--cloud-km', type=float, help='Maximum cloud size (km)')
        p.add_argument('--payload', type=int, help='FSO devices per HAP')
        p.add_argument('--max-link-km', type=float, help='Maximum inter-HAP link length (km)')
        p.add_argument('--ber-threshold', type=float, help='End-to-end BER threshold delta')
        p.add_argument('--ber-table', help='CSV of (length_km, ber) replacing the default curve')

    def add_out_flag(p):
        p.add_argument('--out', default=str(default_output_dir()),
                       help='Output directory (env HAP_PLANNER_OUT)')

    p = sub.add_parser('generate', help='Generate a random scenario JSON')
    p.add_argument('--nodes', type=int, required=True, help='Number of ground nodes')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--field', type=float, nargs=2, default=[100.0, 100.0], metavar=('W_KM', 'H_KM'))
    p.add_argument('--load-factor', type=float, default=0.5, help='Mean egress per node (Gbps)')
    add_param_flags(p)
    add_out_flag(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('plan', help='Plan one scenario file')
    p.add_argument('--scenario', required=True, help='Scenario JSON')
    p.add_argument('--mode', choices=MODES, default='both')
    add_param_flags(p)
    add_out_flag(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser('sweep', help='Protected vs unprotected sweep over node counts')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--nodes', type=int, nargs='+', default=[100, 200, 400, 800])
    p.add_argument('--replicates', type=int, default=1, help='Instances per node count')
    p.add_argument('--field', type=float, nargs=2, default=[100.0, 100.0], metavar=('W_KM', 'H_KM'))
    p.add_argument('--load-factor', type=float, default=0.5, help='Mean egress per node (Gbps)')
    p.add_argument('--workers', type=int, default=1, help='Parallel sweep processes')
    p.add_argument('--no-designs', action='store_true', help='Skip per-instance design JSON')
    add_param_flags(p)
    add_out_flag(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('metrics', help='Recompute the report of a saved design')
    p.add_argument('--design', required=True, help='Design JSON')
    p.add_argument('--json', action='store_true', help='Also print the report as JSON')
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = getattr(args, 'out', None)
    setup_logging(args.log_level, Path(out) / 'planning_log.jsonl' if out else None)
    try:
        return args.func(args)
    except (PlanningError, FileNotFoundError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

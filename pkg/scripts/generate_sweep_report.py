"""
Generate human-readable summary report from a sweep comparison CSV
"""

import sys
from datetime import datetime
from pathlib import Path

import numpy as np

from plan_metrics import REGIONAL_LINK_AVAILABILITY, availability_band, read_comparison_csv


def _fmt(value, digits=2):
    if isinstance(value, float) and not np.isfinite(value):
        return 'n/a'
    return f"{value:.{digits}f}"


def generate_markdown_report(comparison_csv='results/comparison.csv',
                             output_file='results/sweep_summary.md'):
    """
    Generate a markdown summary of a protected vs unprotected sweep.

    Parameters:
    - comparison_csv: CSV written by the sweep
    - output_file: where to save markdown report
    """
    df = read_comparison_csv(comparison_csv)
    if df.empty:
        raise ValueError(f"No rows in {comparison_csv}")

    report = []
    report.append("# HAP Network Sweep Summary\n")
    report.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M')}\n")
    report.append("---\n")

    report.append("## Sweep Overview\n")
    report.append(f"- **Instances:** {len(df)}")
    report.append(f"- **Node counts:** {', '.join(str(n) for n in sorted(df['node_count'].unique()))}")
    rejected = int(df['protected_rejected'].sum() + df['unprotected_rejected'].sum())
    report.append(f"- **Rejected lightpaths (both modes):** {rejected}")
    report.append("\n---\n")

    # Mean over replicates per node count
    grouped = df.groupby('node_count').mean(numeric_only=True)

    report.append("## HAPs and FSO Devices\n")
    report.append("\n| Nodes | HAPs (prot.) | HAPs (unprot.) | FSOs (prot.) | FSOs (unprot.) | FSO increase % |")
    report.append("|-------|--------------|----------------|--------------|----------------|----------------|")
    for node_count, row in grouped.iterrows():
        report.append(
            f"| {node_count} | {_fmt(row['protected_n_hap'], 1)} | {_fmt(row['unprotected_n_hap'], 1)} "
            f"| {_fmt(row['protected_n_fso'], 1)} | {_fmt(row['unprotected_n_fso'], 1)} "
            f"| {_fmt(row['fso_increase_pct'], 1)} |"
        )
    report.append("\n---\n")

    report.append("## Mean FSO Devices per HAP\n")
    report.append("\n| Nodes | Protected | Unprotected | Delta |")
    report.append("|-------|-----------|-------------|-------|")
    for node_count, row in grouped.iterrows():
        report.append(
            f"| {node_count} | {_fmt(row['protected_mean_fso_per_hap'])} "
            f"| {_fmt(row['unprotected_mean_fso_per_hap'])} | {_fmt(row['delta_mean_fso_per_hap'])} |"
        )
    report.append("\n---\n")

    report.append("## Inter-HAP Links\n")
    report.append("\n| Nodes | Links (prot.) | Links (unprot.) | Occupancy (prot.) | Occupancy (unprot.) "
                  "| Link-wavelengths (prot.) | Link-wavelengths (unprot.) | Extra % |")
    report.append("|-------|---------------|-----------------|-------------------|---------------------"
                  "|--------------------------|----------------------------|---------|")
    for node_count, row in grouped.iterrows():
        report.append(
            f"| {node_count} | {_fmt(row['protected_link_count'], 1)} | {_fmt(row['unprotected_link_count'], 1)} "
            f"| {_fmt(row['protected_occupancy'], 4)} | {_fmt(row['unprotected_occupancy'], 4)} "
            f"| {_fmt(row['protected_link_wavelengths'], 1)} | {_fmt(row['unprotected_link_wavelengths'], 1)} "
            f"| {_fmt(row['extra_link_wavelengths_pct'], 1)} |"
        )
    report.append("\n---\n")

    report.append("## Ground-HAP Availability with Backup\n")
    for region, (low, high) in REGIONAL_LINK_AVAILABILITY.items():
        joint_low, joint_high = availability_band(region)
        report.append(
            f"- **{region}:** single link {low:.0%}-{high:.0%}, "
            f"with backup {joint_low:.0%}-{joint_high:.0%}"
        )
    report.append("\n")

    output_path = Path(output_file)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    with open(output_path, 'w') as f:
        f.write('\n'.join(report))

    print(f"✓ Summary report generated: {output_path}")

    return output_path


if __name__ == "__main__":
    args = sys.argv[1:]
    path = generate_markdown_report(*args[:2])
    print(f"\nView report at: {path}")

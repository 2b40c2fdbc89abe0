#! /usr/bin/env python

"""
Prints aggregate energy metrics for every bench file in a folder, and the
LUT comparison for the ones that have a baseline entry.

    python -m scripts.benchmark_metrics [folder] [--vectors N] [--out FILE]
"""

import argparse
import glob
import os

import numpy as np

from src.mtl.commands import MtlOrchestrator
from src.mtl.config import BENCH_DIR, BENCHMARKS_DIR, DEFAULT_ENERGY_VECTORS
from src.mtl.report import comparison_table, load_baseline
from src.mtl.writers import get_writer


def collect_reports(folder, vectors):
    """Runs the energy report on each `*.bench` file of the folder."""
    orchestrator = MtlOrchestrator()
    reports = {}
    for path in sorted(glob.glob(os.path.join(folder, "*.bench"))):
        netlist = orchestrator.load_netlist(path)
        payload, _ = orchestrator.report(netlist, vectors=vectors)
        reports[netlist.name] = payload["energy"]
    return reports


def aggregate(reports):
    if not reports:
        return None

    gates = np.array([r["gate_count"] for r in reports.values()], dtype=float)
    totals = np.array([r["total_energy_fJ"] for r in reports.values()])
    per_gate = np.array([r["energy_per_gate_fJ"] for r in reports.values()])
    shares = np.array([r["interconnect_share"] for r in reports.values()])

    return {
        "benchmarks": len(reports),
        "total_gates": int(gates.sum()),
        "avg_per_gate": per_gate.mean(),
        "std_per_gate": per_gate.std(),
        "max_interconnect_share": shares.max(),
        "correlation": np.corrcoef(gates, totals)[0, 1] if len(reports) > 1 else None,
    }


def _parse_arguments():
    parser = argparse.ArgumentParser(description="Aggregate MTL energy metrics over a bench folder.")
    parser.add_argument("folder", nargs="?", default=BENCH_DIR or BENCHMARKS_DIR)
    parser.add_argument("--vectors", type=int, default=DEFAULT_ENERGY_VECTORS)
    parser.add_argument("--out", type=str, default=None, help="Write the comparison table (.csv, .xlsx, ...).")
    return parser.parse_args()


if __name__ == "__main__":
    args = _parse_arguments()
    reports = collect_reports(args.folder, args.vectors)
    stats = aggregate(reports)

    if stats is None:
        print(f"No bench files in {args.folder}")
    else:
        print("=== General Statistics ===")
        print(f"Benchmarks: {stats['benchmarks']}")
        print(f"Total gates (logic + buffers): {stats['total_gates']}")
        print(f"Energy per gate: {stats['avg_per_gate']:.3f} ± {stats['std_per_gate']:.3f} fJ")
        print(f"Largest interconnect share: {100 * stats['max_interconnect_share']:.2f}%")
        if stats["correlation"] is not None:
            print(f"Pearson correlation between gate count and total energy: {stats['correlation']:.3f}")

        entries = [e for e in load_baseline() if e.name in reports]
        if entries:
            table = comparison_table(entries)
            table["simulated_energy_fJ"] = [reports[e.name]["total_energy_fJ"] for e in entries]
            print("\n=== LUT comparison ===")
            print(table.to_string(index=False))
            if args.out:
                print(f"Saved at: {get_writer(args.out).write(stats, table)}")

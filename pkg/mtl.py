"""
Magnetic Threshold Logic Command-Line Interface

This script provides a command-line interface to synthesize ISCAS-85 bench
circuits into pipelined magnetic threshold logic, verify and simulate them on
the device model, and report their energy against the CMOS-LUT baseline.
It parses arguments, sets up the orchestrator and delegates the work to it.
"""

import argparse
import logging
import sys
from dataclasses import dataclass

from src.mtl.config import (
    DEFAULT_ENERGY_VECTORS,
    DEFAULT_SEED,
    SUPPORTED_FANIN,
    load_device_params,
)
from src.mtl.commands import MtlOrchestrator
from src.mtl.tlgsynth import save_network
from src.mtl.writers import get_writer, to_json

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_IO = 3


@dataclass
class RunConfig:
    command: str
    bench: str | None = None
    network: str | None = None
    config: str | None = None
    out: str | None = None
    seed: int = DEFAULT_SEED
    jobs: int = 1
    fanin: int = 2
    mode: str | None = None
    random_vectors: int = 0
    vectors: str | int | None = None
    mc: bool = False
    trials: int = 100
    sigma: float = 0.0
    verbose: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        known = {name: getattr(args, name) for name in cls.__dataclass_fields__ if hasattr(args, name)}
        return cls(**known)


def _emit(payload):
    """Result JSON goes to stdout, sorted so that reruns are byte-identical."""
    print(to_json(payload))


def _status(message: str):
    print(message, file=sys.stderr)


def cmd_synth(run: RunConfig, orchestrator: MtlOrchestrator) -> int:
    _status(f"[+] Synthesizing {run.bench} at fan-in {run.fanin}...")
    netlist = orchestrator.load_netlist(run.bench)
    network, stats = orchestrator.synthesize(netlist, run.fanin)
    if run.out:
        save_network(network, run.out)
        _status(f"[*] Network saved at: {run.out}")
    if not network.mappable:
        _status(f"[!] Fan-in {run.fanin} network is logical-only (not MTL-mappable)")
    _emit(stats)
    return EXIT_OK


def cmd_verify(run: RunConfig, orchestrator: MtlOrchestrator) -> int:
    netlist = orchestrator.load_netlist(run.bench)
    network = orchestrator.load_network(run.network, netlist)
    _status(f"[+] Verifying {network.name} against {netlist.name}...")
    report = orchestrator.verify(netlist, network, run.mode, run.random_vectors or None)
    _emit(report.to_dict())
    if not report.passed:
        _status(f"[!] {report.mismatches} of {report.vectors_tested} vectors mismatch")
        return EXIT_MISMATCH
    _status(f"[*] {report.vectors_tested} vectors, no mismatches")
    return EXIT_OK


def cmd_sim(run: RunConfig, orchestrator: MtlOrchestrator) -> int:
    netlist = None
    if run.bench.lower().endswith(".json"):
        network = orchestrator.load_network(run.bench)
    else:
        netlist = orchestrator.load_netlist(run.bench)
        network = orchestrator.load_network(run.bench, netlist)
    _status(f"[+] Simulating {network.name} on {run.vectors}...")
    payload = orchestrator.simulate(network, run.vectors, run.sigma, netlist)
    if payload["under_threshold_events"]:
        _status(f"[!] {len(payload['under_threshold_events'])} under-threshold writes")
    _emit(payload)
    return EXIT_OK


def cmd_report(run: RunConfig, orchestrator: MtlOrchestrator) -> int:
    _status(f"[+] Building energy report for {run.bench}...")
    netlist = orchestrator.load_netlist(run.bench)
    payload, table = orchestrator.report(
        netlist,
        vectors=run.vectors or DEFAULT_ENERGY_VECTORS,
        mc=run.mc,
        trials=run.trials,
        sigma=run.sigma,
    )
    if run.out:
        output_file = get_writer(run.out).write(payload, table)
        _status(f"[*] Report saved at: {output_file}")
    if "baseline" not in payload:
        _status(f"[*] No baseline entry for {netlist.name}; comparison skipped")
    if not payload["constraints"]["passed"]:
        _status(f"[!] {payload['constraints']['violations']} nets exceed the path resistance bound")
    _emit(payload)
    return EXIT_OK


def cmd_sweep_fanin(run: RunConfig, orchestrator: MtlOrchestrator) -> int:
    _status(f"[+] Sweeping fan-in bounds {SUPPORTED_FANIN} for {run.bench}...")
    netlist = orchestrator.load_netlist(run.bench)
    table = orchestrator.sweep(netlist)
    payload = {"benchmark": netlist.name, "rows": table.to_dict(orient="records")}
    if run.out:
        output_file = get_writer(run.out).write({"benchmark": netlist.name}, table)
        _status(f"[*] Sweep saved at: {output_file}")
    _emit(payload)
    return EXIT_OK


def cmd_table1(run: RunConfig, orchestrator: MtlOrchestrator) -> int:
    _status("[+] Recomputing the LUT vs MTL comparison...")
    table = orchestrator.table1()
    if run.out:
        output_file = get_writer(run.out).write({"benchmarks": len(table)}, table)
        _status(f"[*] Table saved at: {output_file}")
    _emit({"rows": table.to_dict(orient="records")})
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "verify": cmd_verify,
    "sim": cmd_sim,
    "report": cmd_report,
    "sweep-fanin": cmd_sweep_fanin,
    "table1": cmd_table1,
}


def _parse_arguments(argv=None):
    """Parses command-line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="Device config file (name = value lines).")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed for every random draw.")
    common.add_argument("--jobs", type=int, default=1, help="Worker threads for Monte Carlo trials.")
    common.add_argument("--verbose", action="store_true", help="Debug logging on standard error.")

    parser = argparse.ArgumentParser(description="Magnetic threshold logic synthesis, simulation and energy reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", parents=[common], help="Synthesize a bench file into a pipelined TLG network.")
    synth.add_argument("bench", help="Bench file or benchmark name.")
    synth.add_argument("--fanin", type=int, default=2, choices=SUPPORTED_FANIN, help="Fan-in bound.")
    synth.add_argument("--out", type=str, default=None, help="Network JSON output path.")

    verify = sub.add_parser("verify", parents=[common], help="Check a network against its bench file.")
    verify.add_argument("bench")
    verify.add_argument("network", help="Network JSON file.")
    mode = verify.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", dest="mode", action="store_const", const="exhaustive")
    mode.add_argument("--random", dest="random_vectors", type=int, default=0, metavar="N")

    sim = sub.add_parser("sim", parents=[common], help="Stream vectors through the pipelined network.")
    sim.add_argument("bench", help="Bench file or network JSON file.")
    sim.add_argument("--vectors", type=str, required=True, help="Vector file, one 0/1 string per line.")
    sim.add_argument("--sigma", type=float, default=0.0, help="Relative resistance variation.")

    report = sub.add_parser("report", parents=[common], help="Energy / delay report with baseline comparison.")
    report.add_argument("bench")
    report.add_argument("--out", type=str, default=None, help="Output file (.json, .txt, .csv, .xlsx).")
    report.add_argument("--vectors", type=int, default=DEFAULT_ENERGY_VECTORS, help="Input vectors for activity.")
    report.add_argument("--mc", action="store_true", help="Append a Monte Carlo yield analysis.")
    report.add_argument("--trials", type=int, default=100)
    report.add_argument("--sigma", type=float, default=0.05)

    sweep = sub.add_parser("sweep-fanin", parents=[common], help="TLG counts at every fan-in bound.")
    sweep.add_argument("bench")
    sweep.add_argument("--out", type=str, default=None)

    table1 = sub.add_parser("table1", parents=[common], help="Recompute the LUT vs MTL comparison table.")
    table1.add_argument("--out", type=str, default=None)

    args = parser.parse_args(argv)
    if args.command == "verify" and args.random_vectors:
        args.mode = "random"
    if getattr(args, "random_vectors", 0) < 0:
        parser.error("--random must be positive.")
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1.")
    if getattr(args, "sigma", 0.0) < 0:
        parser.error("--sigma must not be negative.")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1.")
    return args


def main(argv=None) -> int:
    """Main function to orchestrate one subcommand."""
    args = _parse_arguments(argv)
    run = RunConfig.from_args(args)
    if run.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        params = load_device_params(run.config)
        orchestrator = MtlOrchestrator(params, seed=run.seed, jobs=run.jobs)
        return COMMANDS[run.command](run, orchestrator)
    except OSError as e:
        print(f"[!] I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"[!] Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

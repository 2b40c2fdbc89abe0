# /commands.py

import logging
import math
import os

import numpy as np
import pandas as pd

from .analogsim import (
    EquivalenceReport,
    all_vectors,
    equivalence_check,
    monte_carlo,
    random_vectors,
    read_vector_file,
    simulate,
)
from .config import (
    DEFAULT_ENERGY_VECTORS,
    DEFAULT_MC_VECTORS,
    DEFAULT_RANDOM_VECTORS,
    DEFAULT_SEED,
    EXHAUSTIVE_EQUIVALENCE_LIMIT,
    MAPPABLE_FANIN,
    DeviceParams,
    find_benchmark,
)
from .device import device_layout, mc_sample
from .interconnect import check_constraints, route, sneak_leakage
from .netlist import Netlist, eval_netlist_batch, load_bench, netlist_stats
from .report import (
    comparison_table,
    compare_baseline,
    find_baseline,
    load_baseline,
    network_report,
    sweep_table,
)
from .tlgsynth import TlgNetwork, load_network, synthesis_stats, synthesize

logger = logging.getLogger(__name__)


def resolve_bench(path: str) -> str:
    """A bench path as given, or a bare benchmark name looked up in the benchmark directories."""
    if os.path.exists(path) or os.path.dirname(path):
        return path
    name = path[:-6] if path.endswith(".bench") else path
    return find_benchmark(name) or path


def energy_vectors(width: int, count: int, seed: int) -> np.ndarray:
    """Every vector when they fit in `count`, otherwise `count` seeded random ones."""
    if width <= math.log2(max(count, 1)):
        return all_vectors(width)
    return random_vectors(width, count, seed)


class MtlOrchestrator:
    """Runs the synth / verify / sim / report workflows on one device configuration."""

    def __init__(self, params: DeviceParams | None = None, seed: int = DEFAULT_SEED, jobs: int = 1):
        self.params = params or DeviceParams()
        self.seed = seed
        self.jobs = max(1, jobs)

    def load_netlist(self, path: str) -> Netlist:
        return load_bench(resolve_bench(path))

    def synthesize(self, netlist: Netlist, max_fanin: int = MAPPABLE_FANIN) -> tuple[TlgNetwork, dict]:
        network = synthesize(netlist, max_fanin)
        stats = synthesis_stats(network)
        stats["source"] = netlist_stats(netlist)
        return network, stats

    def load_network(self, path: str, netlist: Netlist | None = None) -> TlgNetwork:
        """A network JSON file, or a bench file synthesized at fan-in 2."""
        if path.lower().endswith(".json"):
            return load_network(path)
        return self.synthesize(netlist or self.load_netlist(path))[0]

    def verify(self, netlist: Netlist, network: TlgNetwork, mode: str | None = None, n: int | None = None) -> EquivalenceReport:
        n = n or DEFAULT_RANDOM_VECTORS
        if mode is None:
            mode = "exhaustive" if len(netlist.inputs) <= EXHAUSTIVE_EQUIVALENCE_LIMIT else "random"
        return equivalence_check(netlist, network, self.params, mode=mode, n=n, seed=self.seed)

    def simulate(self, network: TlgNetwork, vectors_path: str, sigma: float = 0.0, netlist: Netlist | None = None) -> dict:
        vectors = read_vector_file(vectors_path)
        variation = None
        if sigma:
            params = self.params.with_overrides(sigma_r=sigma)
            variation = mc_sample(params, np.random.default_rng(self.seed), device_layout(network))
        result = simulate(network, vectors, self.params, variation)
        payload = {
            "network": network.name,
            "vectors": len(vectors),
            "latency": result.latency,
            "cycles": result.cycles,
            "outputs": ["".join(str(b) for b in row) for row in result.outputs],
            "under_threshold_events": [
                {"gate": e.gate, "cycle": e.cycle, "current_uA": 1e6 * e.current} for e in result.state.events
            ],
        }
        if netlist is not None:
            expected = eval_netlist_batch(netlist, vectors)
            got = np.asarray(result.outputs, dtype=np.int8).reshape(expected.shape)
            payload["mismatches"] = int(np.any(got != expected, axis=1).sum())
        return payload

    def report(
        self,
        netlist: Netlist,
        vectors: int = DEFAULT_ENERGY_VECTORS,
        mc: bool = False,
        trials: int = 100,
        sigma: float = 0.05,
    ) -> tuple[dict, pd.DataFrame]:
        network, stats = self.synthesize(netlist)
        plan, nets = route(network, self.params)
        constraints = check_constraints(nets, self.params)
        sample = energy_vectors(len(netlist.inputs), vectors, self.seed)
        energy = network_report(netlist, network, nets, self.params, sample, leakage=sneak_leakage(plan, self.params))

        payload = {
            "benchmark": netlist.name,
            "synthesis": stats,
            "energy": energy.to_dict(),
            "constraints": {
                "passed": constraints.passed,
                "bound_ohm": constraints.bound,
                "worst_resistance_ohm": constraints.worst_resistance,
                "slack_ohm": constraints.slack,
                "droop_fraction": constraints.droop_fraction,
                "violations": len(constraints.violations),
            },
            "crossbar": {
                "crossbars": len(plan.stages),
                "programmed_crosspoints": plan.programmed_count,
                "off_crosspoints": plan.off_count,
            },
        }
        entry = find_baseline(netlist.name, load_baseline())
        if entry is not None:
            payload["baseline"] = {
                "lut_energy_fJ": entry.lut_energy,
                "lut_delay_ns": entry.lut_delay,
                "published_mtl_energy_fJ": entry.mtl_energy,
                **compare_baseline(entry, energy),
            }
        if mc:
            mc_params = self.params.with_overrides(sigma_r=sigma)
            mc_sample_vectors = energy_vectors(len(netlist.inputs), DEFAULT_MC_VECTORS, self.seed)
            margins = monte_carlo(netlist, network, mc_params, trials, mc_sample_vectors, seed=self.seed, jobs=self.jobs)
            payload["monte_carlo"] = {"sigma_r": sigma, **margins.to_dict()}
        return payload, energy.gate_frame()

    def sweep(self, netlist: Netlist) -> pd.DataFrame:
        return sweep_table(netlist)

    def table1(self, baseline_path: str | None = None) -> pd.DataFrame:
        entries = load_baseline(baseline_path)
        table = comparison_table(entries)
        table["published_energy_reduction_pct"] = [e.published_energy_reduction for e in entries]
        table["published_edp_reduction_pct"] = [e.published_edp_reduction for e in entries]
        return table

"""
Energy, delay and throughput accounting for synthesized MTL networks, and
the comparison against the CMOS-LUT baseline table.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .analogsim import input_current_stats
from .config import BASELINE_PATH, SUPPORTED_FANIN, DeviceParams
from .device import gate_conductances
from .interconnect import RoutedNet, interconnect_energy
from .netlist import Netlist
from .tlgsynth import (
    SynthesisError,
    TlgNetwork,
    network_signal_values,
    synthesize,
    weight_levels,
)

logger = logging.getLogger(__name__)

FJ = 1e-15
NS = 1e-9


class BaselineError(ValueError):
    pass


@dataclass
class EnergyReport:
    """Energy of one computation (one input vector) through the whole pipeline."""

    name: str
    gate_count: int
    logic_gates: int
    buffers: int
    stages: int
    summation_energy: float
    divider_energy: float
    interconnect_energy: float
    latency: float
    throughput_period: float
    fanouts: int = 0
    leakage_estimate: float = 0.0
    per_gate: dict[str, float] = field(default_factory=dict)
    current_stats: dict[str, float] = field(default_factory=dict)

    @property
    def total_energy(self) -> float:
        return self.summation_energy + self.divider_energy + self.interconnect_energy

    @property
    def energy_per_gate(self) -> float:
        if not self.gate_count:
            return 0.0
        return (self.summation_energy + self.divider_energy) / self.gate_count

    @property
    def interconnect_share(self) -> float:
        total = self.total_energy
        return self.interconnect_energy / total if total else 0.0

    @property
    def edp(self) -> float:
        return self.total_energy * self.throughput_period

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "gate_count": self.gate_count,
            "logic_gates": self.logic_gates,
            "buffers": self.buffers,
            "stages": self.stages,
            "fanouts": self.fanouts,
            "summation_energy_fJ": self.summation_energy / FJ,
            "divider_energy_fJ": self.divider_energy / FJ,
            "interconnect_energy_fJ": self.interconnect_energy / FJ,
            "total_energy_fJ": self.total_energy / FJ,
            "energy_per_gate_fJ": self.energy_per_gate / FJ,
            "interconnect_share": self.interconnect_share,
            "leakage_estimate_fJ": self.leakage_estimate / FJ,
            "latency_ns": self.latency / NS,
            "throughput_period_ns": self.throughput_period / NS,
            "edp_fJ_ns": self.edp / (FJ * NS),
            "current_stats_uA": self.current_stats,
        }

    def gate_frame(self) -> pd.DataFrame:
        """Per-gate energy breakdown in fJ."""
        frame = pd.DataFrame(
            {"gate": list(self.per_gate), "energy_fJ": [e / FJ for e in self.per_gate.values()]}
        )
        return frame.sort_values("gate", kind="stable").reset_index(drop=True)


@dataclass(frozen=True)
class BaselineEntry:
    name: str
    lut_delay: float      # ns
    lut_energy: float     # fJ
    mtl_delay: float      # ns
    mtl_energy: float     # fJ
    inputs: int = 0
    outputs: int = 0
    published_energy_reduction: float | None = None
    published_edp_reduction: float | None = None

    def __post_init__(self):
        for name in ("lut_delay", "lut_energy", "mtl_delay", "mtl_energy"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not value > 0:
                raise BaselineError(f"{self.name}: {name} must be positive, got {value!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "BaselineEntry":
        try:
            return cls(
                name=str(data["name"]),
                lut_delay=float(data["lut_delay_ns"]),
                lut_energy=float(data["lut_energy_fJ"]),
                mtl_delay=float(data["mtl_delay_ns"]),
                mtl_energy=float(data["mtl_energy_fJ"]),
                inputs=int(data.get("inputs", 0)),
                outputs=int(data.get("outputs", 0)),
                published_energy_reduction=data.get("energy_reduction_pct"),
                published_edp_reduction=data.get("edp_reduction_pct"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BaselineError(f"Malformed baseline entry {data!r}: {exc}") from exc


def gate_energy(network: TlgNetwork, params: DeviceParams, vectors) -> dict[str, dict[str, float]]:
    """
    Average energy per gate per cycle over the vector sample.

    Each active conductance dissipates ΔV**2 * G * t_sw against its rail; the
    bias pair is always active, an input pair only when its input is 1. The
    divider burns p_div for the whole clock period.
    """
    matrix = np.asarray(vectors)
    if matrix.size == 0 or matrix.shape[0] == 0:
        raise ValueError("gate_energy needs at least one input vector")
    values = network_signal_values(network, matrix)
    scale = params.delta_v ** 2 * params.t_sw
    divider = params.p_div * params.t_clk
    energies = {}
    for gate in network.gates:
        pairs, bias = gate_conductances(gate, params)
        active = bias.total + sum(
            float(np.mean(values[fanin])) * pair.total for fanin, pair in zip(gate.fanins, pairs)
        )
        summation = scale * active
        energies[gate.id] = {"summation": summation, "divider": divider, "total": summation + divider}
    return energies


def network_report(
    netlist: Netlist,
    network: TlgNetwork,
    nets: list[RoutedNet],
    params: DeviceParams,
    vectors,
    leakage: float = 0.0,
) -> EnergyReport:
    if not network.mappable:
        raise SynthesisError(f"{network.name}: energy is only modelled for MTL-mappable networks")
    if tuple(netlist.inputs) != tuple(network.inputs):
        raise ValueError(f"Interface mismatch between {netlist.name!r} and {network.name!r}")
    energies = gate_energy(network, params, vectors) if network.gates else {}
    currents = input_current_stats(network, params, vectors) if network.gates else {}
    report = EnergyReport(
        name=network.name,
        gate_count=len(network.gates),
        logic_gates=network.logic_count,
        buffers=network.buffer_count,
        stages=network.depth,
        summation_energy=sum(e["summation"] for e in energies.values()),
        divider_energy=sum(e["divider"] for e in energies.values()),
        interconnect_energy=interconnect_energy(nets, params),
        latency=network.depth * params.t_clk,
        throughput_period=params.t_clk,
        fanouts=sum(1 for net in nets if net.rail == "+"),
        leakage_estimate=leakage,
        per_gate={gate_id: e["total"] for gate_id, e in energies.items()},
        current_stats={
            "average": 1e6 * float(np.mean([c["average"] for c in currents.values()])) if currents else 0.0,
            "maximum": 1e6 * max((c["maximum"] for c in currents.values()), default=0.0),
        },
    )
    logger.debug(
        "%s: %.2f fJ over %d gates, interconnect %.2f%%",
        network.name, report.total_energy / FJ, report.gate_count, 100 * report.interconnect_share,
    )
    return report


def compare_baseline(baseline: BaselineEntry, report: EnergyReport | None = None) -> dict:
    """
    Percent energy and EDP reduction against the LUT baseline. Without a
    report the MTL figures stored in the baseline entry are used.
    """
    if report is None:
        mtl_energy, mtl_delay = baseline.mtl_energy, baseline.mtl_delay
    else:
        mtl_energy, mtl_delay = report.total_energy / FJ, report.throughput_period / NS
    if not (mtl_energy > 0 and mtl_delay > 0):
        raise BaselineError(f"{baseline.name}: MTL energy and delay must be positive")
    energy_ratio = mtl_energy / baseline.lut_energy
    edp_ratio = (mtl_energy * mtl_delay) / (baseline.lut_energy * baseline.lut_delay)
    return {
        "name": baseline.name,
        "mtl_energy_fJ": mtl_energy,
        "mtl_delay_ns": mtl_delay,
        "energy_reduction_pct": 100.0 * (1.0 - energy_ratio),
        "edp_reduction_pct": 100.0 * (1.0 - edp_ratio),
        "energy_ratio": baseline.lut_energy / mtl_energy,
    }


def load_baseline(path: str | None = None) -> list[BaselineEntry]:
    path = path or BASELINE_PATH
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise BaselineError(f"Baseline file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise BaselineError(f"Baseline file {path} must hold a JSON array")
    return [BaselineEntry.from_dict(entry) for entry in data]


def find_baseline(name: str, entries: list[BaselineEntry]) -> BaselineEntry | None:
    return next((entry for entry in entries if entry.name == name), None)


def comparison_table(entries: list[BaselineEntry], reports: dict[str, EnergyReport] | None = None) -> pd.DataFrame:
    """The LUT vs MTL table, one row per benchmark; `reports` replaces the stored MTL numbers."""
    reports = reports or {}
    rows = []
    for entry in entries:
        result = compare_baseline(entry, reports.get(entry.name))
        rows.append({
            "benchmark": entry.name,
            "inputs": entry.inputs,
            "outputs": entry.outputs,
            "lut_delay_ns": entry.lut_delay,
            "mtl_delay_ns": result["mtl_delay_ns"],
            "lut_energy_fJ": entry.lut_energy,
            "mtl_energy_fJ": result["mtl_energy_fJ"],
            "energy_reduction_pct": round(result["energy_reduction_pct"], 2),
            "edp_reduction_pct": round(result["edp_reduction_pct"], 2),
            "energy_ratio": round(result["energy_ratio"], 1),
        })
    return pd.DataFrame(rows)


def sweep_table(netlist: Netlist) -> pd.DataFrame:
    """TLG counts and weight/threshold levels for every supported fan-in bound."""
    rows = []
    for max_fanin in SUPPORTED_FANIN:
        network = synthesize(netlist, max_fanin)
        levels = weight_levels(network)
        rows.append({
            "max_fanin": max_fanin,
            "logic_gates": network.logic_count,
            "buffers": network.buffer_count,
            "stages": network.depth,
            "weight_levels": " ".join(str(w) for w in levels["weight_levels"]),
            "threshold_levels": " ".join(str(b) for b in levels["threshold_levels"]),
            "logical_only": not network.mappable,
        })
    return pd.DataFrame(rows)

"""
Resistive-crossbar interconnect between pipeline stages.

Each stage boundary is one crossbar: producers of stage k-1 (primary inputs
for k = 0) drive row pairs at +ΔV / -ΔV, consumer input slots of stage k own
column pairs feeding G+ / G-. Every logical fanout programs two crosspoints.
"""

import logging
from dataclasses import dataclass, field

from .config import DeviceParams
from .tlgsynth import SynthesisError, TlgNetwork, check_stage_discipline

logger = logging.getLogger(__name__)

RAIL_PLUS = "+"
RAIL_MINUS = "-"

# lengths are compared with this relative slack against max_length
LENGTH_RTOL = 1e-9


class RoutingError(ValueError):
    def __init__(self, message: str, nets: list | None = None):
        super().__init__(message)
        self.nets = nets or []


@dataclass(frozen=True)
class RoutedNet:
    producer: str
    consumer: str
    slot: int
    rail: str
    boundary: int
    row: int
    column: int
    length: float
    resistance: float
    capacitance: float
    crosspoints: int = 1

    def to_dict(self) -> dict:
        return {
            "producer": self.producer,
            "consumer": self.consumer,
            "slot": self.slot,
            "rail": self.rail,
            "boundary": self.boundary,
            "row": self.row,
            "column": self.column,
            "length": self.length,
            "resistance": self.resistance,
            "capacitance": self.capacitance,
            "crosspoints": self.crosspoints,
        }


@dataclass(frozen=True)
class CrossbarStage:
    """One stage boundary: rows 2i/2i+1 carry producer i, columns 2j/2j+1 feed slot j."""

    boundary: int
    producers: tuple[str, ...]
    slots: tuple[tuple[str, int], ...]
    programmed: tuple[tuple[int, int], ...]
    pitch: float

    @property
    def rows(self) -> int:
        return 2 * len(self.producers)

    @property
    def columns(self) -> int:
        return 2 * len(self.slots)

    @property
    def off_crosspoints(self) -> int:
        return self.rows * self.columns - len(self.programmed)


@dataclass
class CrossbarPlan:
    stages: list[CrossbarStage] = field(default_factory=list)

    @property
    def programmed_count(self) -> int:
        return sum(len(s.programmed) for s in self.stages)

    @property
    def off_count(self) -> int:
        return sum(s.off_crosspoints for s in self.stages)

    def to_dict(self) -> dict:
        return {
            "programmed_crosspoints": self.programmed_count,
            "off_crosspoints": self.off_count,
            "stages": [
                {
                    "boundary": s.boundary,
                    "producers": list(s.producers),
                    "slots": [[consumer, slot] for consumer, slot in s.slots],
                    "programmed": [list(p) for p in s.programmed],
                    "pitch": s.pitch,
                    "off_crosspoints": s.off_crosspoints,
                }
                for s in self.stages
            ],
        }


@dataclass
class ConstraintReport:
    bound: float
    passed: bool
    worst_net: RoutedNet | None = None
    worst_resistance: float = 0.0
    slack: float = 0.0
    droop_fraction: float = 0.0
    violations: list[RoutedNet] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "passed": self.passed,
            "worst_net": None if self.worst_net is None else self.worst_net.to_dict(),
            "worst_resistance": self.worst_resistance,
            "slack": self.slack,
            "droop_fraction": self.droop_fraction,
            "violations": [net.to_dict() for net in self.violations],
        }


def route(network: TlgNetwork, params: DeviceParams) -> tuple[CrossbarPlan, list[RoutedNet]]:
    """Declaration-order placement of every stage boundary; two rail nets per fanout."""
    if not network.mappable:
        raise RoutingError(f"{network.name}: logical-only networks cannot be routed")
    try:
        check_stage_discipline(network)
    except SynthesisError as exc:
        raise RoutingError(f"Stage crossing without buffer: {exc}") from exc

    plan = CrossbarPlan()
    nets: list[RoutedNet] = []
    too_long: list[RoutedNet] = []
    for k in range(network.depth):
        consumers = network.stage_gates(k)
        slots = tuple((g.id, j) for g in consumers for j in range(len(g.fanins)))
        source = network.inputs if k == 0 else network.stages[k - 1]
        used = {f for g in consumers for f in g.fanins}
        producers = tuple(p for p in source if p in used)
        row_of = {p: i for i, p in enumerate(producers)}
        pitch = params.pitch or params.max_length / max(len(producers), len(slots), 1)

        programmed = []
        for column, (consumer, slot) in enumerate(slots):
            producer = network.gate(consumer).fanins[slot]
            row = row_of[producer]
            length = (abs(row - column) + 1) * pitch
            share = length / params.max_length
            for rail, offset in ((RAIL_PLUS, 0), (RAIL_MINUS, 1)):
                net = RoutedNet(
                    producer=producer,
                    consumer=consumer,
                    slot=slot,
                    rail=rail,
                    boundary=k,
                    row=2 * row + offset,
                    column=2 * column + offset,
                    length=length,
                    resistance=params.r_wire * share + params.r_on,
                    capacitance=params.c_wire * share,
                )
                programmed.append((net.row, net.column))
                nets.append(net)
                if length > params.max_length * (1 + LENGTH_RTOL):
                    too_long.append(net)
        plan.stages.append(CrossbarStage(k, producers, slots, tuple(programmed), pitch))

    if too_long:
        names = ", ".join(sorted({f"{n.producer}->{n.consumer}[{n.slot}]" for n in too_long}))
        raise RoutingError(
            f"{len(too_long)} nets exceed the {params.max_length:g} m length limit: {names}", too_long
        )
    logger.debug("Routed %s: %d nets over %d crossbars", network.name, len(nets), len(plan.stages))
    return plan, nets


def check_constraints(nets: list[RoutedNet], params: DeviceParams) -> ConstraintReport:
    """Every path must stay below 10% of r_p; droop is reported as R_path / r_p."""
    bound = params.path_resistance_bound
    if not nets:
        return ConstraintReport(bound=bound, passed=True, slack=bound)
    worst = max(nets, key=lambda net: net.resistance)
    violations = [net for net in nets if net.resistance > bound]
    for net in violations:
        logger.warning("Net %s->%s %s exceeds %.0f ohm: %.0f ohm", net.producer, net.consumer, net.rail, bound, net.resistance)
    return ConstraintReport(
        bound=bound,
        passed=not violations,
        worst_net=worst,
        worst_resistance=worst.resistance,
        slack=bound - worst.resistance,
        droop_fraction=worst.resistance / params.r_p,
        violations=violations,
    )


def interconnect_energy(nets: list[RoutedNet], params: DeviceParams, cycles: int = 1) -> float:
    """activity * C * ΔV**2 per logical fanout (rail pair counted once) per cycle."""
    per_cycle = sum(
        params.activity * net.capacitance * params.delta_v ** 2 for net in nets if net.rail == RAIL_PLUS
    )
    return per_cycle * cycles


def sneak_leakage(plan: CrossbarPlan, params: DeviceParams) -> float:
    """OFF-crosspoint leakage per cycle, count * (2ΔV)**2 / r_off * t_clk; reported, never totalled."""
    return plan.off_count * (2 * params.delta_v) ** 2 / params.r_off * params.t_clk

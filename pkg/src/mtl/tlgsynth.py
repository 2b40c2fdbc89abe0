"""
Threshold-logic synthesis.

Turns a Boolean netlist into a fully pipelined network of threshold logic
gates (TLGs): fan-in restricted decomposition, gate-to-weight mapping, and
buffer insertion so that every stage reads only the stage before it.

With a fan-in bound of 2 every gate uses weights in {+2, -2} and an odd bias
in {-3, -1, +1, +3}, which is what the MTJ/DWS gate can realise. Bounds 3
and 4 produce unit-weight networks used only to compare gate counts.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .config import MAPPABLE_FANIN, SUPPORTED_FANIN
from .netlist import Gate, Netlist, topo_order

logger = logging.getLogger(__name__)

ROLE_LOGIC = "logic"
ROLE_BUFFER = "buffer"

MTL_WEIGHTS = (2, -2)
MTL_BIASES = (-3, -1, 1, 3)

# {±2} weights and odd bias in [-3, +3]; verified against truth tables in the tests.
MTL_MAPPING = {
    "AND": ((2, 2), -3),
    "OR": ((2, 2), -1),
    "NAND": ((-2, -2), 3),
    "NOR": ((-2, -2), 1),
    "NOT": ((-2,), 1),
    "BUF": ((2,), -1),
}

_TREE_FUNCTION = {"AND": "AND", "NAND": "AND", "OR": "OR", "NOR": "OR", "XOR": "XOR", "XNOR": "XOR"}


class SynthesisError(ValueError):
    """Contract violations in synthesis and corrupt network descriptions."""


def unit_mapping(func: str, arity: int) -> tuple[tuple[int, ...], int]:
    """Unit-weight threshold realisation of a k-input gate (logical-only networks)."""
    if func == "AND":
        return (1,) * arity, -(arity - 1)
    if func == "OR":
        return (1,) * arity, 0
    if func == "NAND":
        return (-1,) * arity, arity
    if func == "NOR":
        return (-1,) * arity, 1
    if func == "NOT":
        return (-1,), 1
    if func == "BUF":
        return (1,), 0
    raise SynthesisError(f"{func} is not a threshold function")


@dataclass(frozen=True)
class TlgGate:
    id: str
    fanins: tuple[str, ...]
    weights: tuple[int, ...]
    bias: int
    role: str = ROLE_LOGIC

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "fanins": list(self.fanins),
            "weights": list(self.weights),
            "bias": self.bias,
            "role": self.role,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TlgGate":
        try:
            return cls(
                str(data["id"]),
                tuple(str(f) for f in data["fanins"]),
                tuple(int(w) for w in data["weights"]),
                int(data["bias"]),
                str(data.get("role", ROLE_LOGIC)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SynthesisError(f"Malformed gate entry {data!r}: {exc}") from exc


@dataclass(frozen=True)
class TlgNetwork:
    """
    A threshold-logic network.

    `gates` is always in topological order. `stages` holds gate ids per
    pipeline stage and is empty for a network that has not been pipelined.
    `output_drivers` maps each primary output to the signal carrying it.
    """

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    output_drivers: Mapping[str, str]
    gates: tuple[TlgGate, ...]
    stages: tuple[tuple[str, ...], ...] = ()
    max_fanin: int = MAPPABLE_FANIN
    mappable: bool = True
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "stages", tuple(tuple(s) for s in self.stages))
        object.__setattr__(self, "output_drivers", dict(self.output_drivers))
        lookup: dict[str, TlgGate] = {}
        known = set(self.inputs)
        if len(known) != len(self.inputs):
            raise SynthesisError("Duplicate primary input")
        for gate in self.gates:
            if gate.id in known:
                raise SynthesisError(f"Signal {gate.id!r} defined twice")
            if len(gate.weights) != len(gate.fanins):
                raise SynthesisError(f"Gate {gate.id!r}: {len(gate.weights)} weights for {len(gate.fanins)} fanins")
            if not gate.fanins or len(gate.fanins) > self.max_fanin:
                raise SynthesisError(f"Gate {gate.id!r} has fan-in {len(gate.fanins)} (bound {self.max_fanin})")
            for fanin in gate.fanins:
                if fanin not in known:
                    raise SynthesisError(f"Gate {gate.id!r} reads {fanin!r} before it is produced")
            if self.mappable and (
                any(w not in MTL_WEIGHTS for w in gate.weights) or gate.bias not in MTL_BIASES
            ):
                raise SynthesisError(
                    f"Gate {gate.id!r} uses weights {gate.weights} / bias {gate.bias} outside the MTL alphabet"
                )
            known.add(gate.id)
            lookup[gate.id] = gate
        for output in self.outputs:
            driver = self.output_drivers.get(output)
            if driver is None or driver not in known:
                raise SynthesisError(f"Primary output {output!r} has no driver")
        if self.stages and sorted(i for s in self.stages for i in s) != sorted(lookup):
            raise SynthesisError("Stage lists do not cover the gates exactly once")
        object.__setattr__(self, "_lookup", lookup)

    def gate(self, gate_id: str) -> TlgGate:
        return self._lookup[gate_id]

    @property
    def staged(self) -> bool:
        return bool(self.stages) or not self.gates

    @property
    def depth(self) -> int:
        """Stage count S."""
        return len(self.stages)

    @property
    def logic_count(self) -> int:
        return sum(1 for g in self.gates if g.role == ROLE_LOGIC)

    @property
    def buffer_count(self) -> int:
        return sum(1 for g in self.gates if g.role == ROLE_BUFFER)

    @cached_property
    def stage_of(self) -> dict[str, int]:
        stage = {name: -1 for name in self.inputs}
        for k, ids in enumerate(self.stages):
            stage.update((gate_id, k) for gate_id in ids)
        return stage

    @cached_property
    def fanout(self) -> dict[str, list[str]]:
        """Per signal, the consumer gates in gate order (one entry per connection)."""
        table: dict[str, list[str]] = {name: [] for name in self.inputs}
        table.update((g.id, []) for g in self.gates)
        for gate in self.gates:
            for fanin in gate.fanins:
                table[fanin].append(gate.id)
        return table

    def stage_gates(self, k: int) -> list[TlgGate]:
        return [self._lookup[i] for i in self.stages[k]]


def check_stage_discipline(network: TlgNetwork) -> None:
    """Every fanin of a stage-k gate comes from stage k-1; outputs leave from the last stage."""
    if not network.staged:
        raise SynthesisError(f"{network.name}: network is not pipelined")
    stage = network.stage_of
    for k in range(network.depth):
        for gate in network.stage_gates(k):
            for fanin in gate.fanins:
                if stage[fanin] != k - 1:
                    raise SynthesisError(
                        f"{network.name}: {gate.id!r} at stage {k} reads {fanin!r} from stage {stage[fanin]}"
                    )
    last = network.depth - 1
    for output, driver in network.output_drivers.items():
        if stage[driver] != last:
            raise SynthesisError(
                f"{network.name}: output {output!r} leaves from stage {stage[driver]}, not {last}"
            )


class _Namer:
    """Hands out signal names that do not collide with existing ones."""

    def __init__(self, taken):
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        candidate, n = base, 0
        while candidate in self.taken:
            n += 1
            candidate = f"{base}{n}"
        self.taken.add(candidate)
        return candidate


def _normalize_single(gate: Gate) -> Gate:
    if len(gate.fanins) != 1 or gate.func in ("NOT", "BUF"):
        return gate
    func = "NOT" if gate.func in ("NAND", "NOR", "XNOR") else "BUF"
    return Gate(gate.id, func, gate.fanins)


def _decompose_gate(gate: Gate, bound: int, namer: _Namer) -> list[Gate]:
    gate = _normalize_single(gate)
    if len(gate.fanins) <= bound:
        return [gate]
    inner = _TREE_FUNCTION[gate.func]
    produced: list[Gate] = []
    signals = list(gate.fanins)
    # one short group first, then full groups: every other gate gets exactly
    # `bound` inputs, which keeps the count at ceil((n-1)/(bound-1))
    short = (len(signals) - 1) % (bound - 1)
    while len(signals) > bound:
        chunks, pos = [], 0
        if short:
            chunks.append(signals[: short + 1])
            pos = short + 1
            short = 0
        while len(signals) - pos >= bound:
            chunks.append(signals[pos : pos + bound])
            pos += bound
        level = []
        for chunk in chunks:
            name = namer.fresh(f"{gate.id}_t")
            produced.append(Gate(name, inner, tuple(chunk)))
            level.append(name)
        signals = level + signals[pos:]
    produced.append(Gate(gate.id, gate.func, tuple(signals)))
    return produced


def decompose(netlist: Netlist, max_fanin: int, parity_fanin: int | None = None) -> Netlist:
    """
    Restricts every gate to `max_fanin` inputs with balanced trees.

    NAND/NOR/XNOR expand as AND/OR/XOR trees with the inversion kept at the
    root. `parity_fanin` optionally tightens the bound for XOR/XNOR.
    """
    if max_fanin < 2:
        raise SynthesisError(f"max_fanin must be at least 2, got {max_fanin}")
    namer = _Namer([*netlist.inputs, *(g.id for g in netlist.gates)])
    gates: list[Gate] = []
    for gate in netlist.gates:
        bound = max_fanin
        if parity_fanin is not None and gate.func in ("XOR", "XNOR"):
            bound = min(max_fanin, parity_fanin)
        gates.extend(_decompose_gate(gate, bound, namer))
    return Netlist(netlist.name, netlist.inputs, netlist.outputs, tuple(gates))


def map_tlg(netlist: Netlist, max_fanin: int = MAPPABLE_FANIN) -> TlgNetwork:
    """Replaces every gate by its threshold realisation; XOR/XNOR become small TLG clusters."""
    mappable = max_fanin == MAPPABLE_FANIN
    namer = _Namer([*netlist.inputs, *(g.id for g in netlist.gates)])

    def make(gate_id: str, func: str, fanins: tuple[str, ...]) -> TlgGate:
        if mappable:
            weights, bias = MTL_MAPPING[func]
        else:
            weights, bias = unit_mapping(func, len(fanins))
        return TlgGate(gate_id, fanins, weights, bias)

    tlgs: list[TlgGate] = []
    for gate in topo_order(netlist):
        gate = _normalize_single(gate)
        if len(gate.fanins) > max_fanin:
            raise SynthesisError(f"Gate {gate.id!r} has fan-in {len(gate.fanins)} > {max_fanin}; decompose first")
        if gate.func in ("XOR", "XNOR"):
            if len(gate.fanins) != 2:
                raise SynthesisError(f"{gate.func} gate {gate.id!r} must be 2-input before mapping")
            either = make(namer.fresh(f"{gate.id}_or"), "OR", gate.fanins)
            not_both = make(namer.fresh(f"{gate.id}_nand"), "NAND", gate.fanins)
            xor_id = gate.id if gate.func == "XOR" else namer.fresh(f"{gate.id}_xor")
            tlgs += [either, not_both, make(xor_id, "AND", (either.id, not_both.id))]
            if gate.func == "XNOR":
                tlgs.append(make(gate.id, "NOT", (xor_id,)))
        else:
            tlgs.append(make(gate.id, gate.func, gate.fanins))

    return TlgNetwork(
        name=netlist.name,
        inputs=netlist.inputs,
        outputs=netlist.outputs,
        output_drivers={o: o for o in netlist.outputs},
        gates=tuple(tlgs),
        max_fanin=max_fanin,
        mappable=mappable,
    )


def tlg_eval(gate: TlgGate, inputs: Sequence[int], mappable: bool = True) -> int:
    """Y = 1 if sum(W_i * x_i) + b > 0 else 0."""
    if len(inputs) != len(gate.weights):
        raise SynthesisError(f"Gate {gate.id!r} expects {len(gate.weights)} inputs, got {len(inputs)}")
    total = sum(w * int(x) for w, x in zip(gate.weights, inputs)) + gate.bias
    if mappable and total % 2 != 1:
        raise SynthesisError(f"Gate {gate.id!r}: even summation {total} (corrupt weight assignment)")
    return 1 if total > 0 else 0


def pipeline(network: TlgNetwork) -> TlgNetwork:
    """
    Assigns gates to stages by level and inserts buffer chains so that each
    stage reads only the previous one; outputs are carried to the last stage.
    All consumers of one producer share a single buffer chain.
    """
    level: dict[str, int] = {name: -1 for name in network.inputs}
    for gate in network.gates:
        level[gate.id] = 1 + max(level[f] for f in gate.fanins)
    depth = 1 + max((level[g.id] for g in network.gates), default=-1)

    if network.mappable:
        buf_weights, buf_bias = MTL_MAPPING["BUF"]
    else:
        buf_weights, buf_bias = unit_mapping("BUF", 1)
    namer = _Namer([*network.inputs, *(g.id for g in network.gates)])
    stages: list[list[TlgGate]] = [[] for _ in range(depth)]
    chains: dict[str, dict[int, str]] = {}
    inserted = 0

    def tap(signal: str, at: int) -> str:
        """The copy of `signal` produced at stage `at`."""
        nonlocal inserted
        chain = chains.setdefault(signal, {})
        current = signal
        for lv in range(level[signal] + 1, at + 1):
            if lv not in chain:
                buf = TlgGate(namer.fresh(f"{signal}_b{lv}"), (current,), buf_weights, buf_bias, ROLE_BUFFER)
                stages[lv].append(buf)
                chain[lv] = buf.id
                inserted += 1
            current = chain[lv]
        return current

    for gate in network.gates:
        lv = level[gate.id]
        fanins = tuple(tap(f, lv - 1) for f in gate.fanins)
        stages[lv].append(TlgGate(gate.id, fanins, gate.weights, gate.bias, gate.role))
    drivers = {o: tap(network.output_drivers[o], depth - 1) for o in network.outputs}

    gates = tuple(g for stage in stages for g in stage)
    staged = TlgNetwork(
        name=network.name,
        inputs=network.inputs,
        outputs=network.outputs,
        output_drivers=drivers,
        gates=gates,
        stages=tuple(tuple(g.id for g in stage) for stage in stages),
        max_fanin=network.max_fanin,
        mappable=network.mappable,
    )
    check_stage_discipline(staged)
    logger.debug("Pipelined %s: %d stages, %d buffers inserted", network.name, depth, inserted)
    return staged


def synthesize(netlist: Netlist, max_fanin: int = MAPPABLE_FANIN) -> TlgNetwork:
    """decompose -> map_tlg -> pipeline. Only fan-in 2 yields an MTL-mappable network."""
    if max_fanin not in SUPPORTED_FANIN:
        raise SynthesisError(f"Unsupported fan-in bound {max_fanin}; choose one of {SUPPORTED_FANIN}")
    decomposed = decompose(netlist, max_fanin, parity_fanin=2)
    network = pipeline(map_tlg(decomposed, max_fanin))
    logger.debug(
        "Synthesized %s at fan-in %d: %d logic TLGs, %d buffers, %d stages",
        netlist.name, max_fanin, network.logic_count, network.buffer_count, network.depth,
    )
    return network


def network_signal_values(network: TlgNetwork, vectors) -> dict[str, np.ndarray]:
    """Logical value of every signal for each vector (rows), by composing tlg_eval."""
    matrix = np.asarray(vectors, dtype=np.int64)
    if matrix.ndim != 2 or matrix.shape[1] != len(network.inputs):
        raise SynthesisError(f"{network.name}: expected vectors of width {len(network.inputs)}")
    values = {name: matrix[:, i] for i, name in enumerate(network.inputs)}
    for gate in network.gates:
        total = np.full(matrix.shape[0], gate.bias, dtype=np.int64)
        for w, fanin in zip(gate.weights, gate.fanins):
            total += w * values[fanin]
        if network.mappable and np.any(total % 2 != 1):
            raise SynthesisError(f"Gate {gate.id!r}: even summation (corrupt weight assignment)")
        values[gate.id] = (total > 0).astype(np.int64)
    return values


def evaluate_network(network: TlgNetwork, vector: Sequence[int]) -> tuple[int, ...]:
    """Stage-synchronous composition of tlg_eval for one vector."""
    if len(vector) != len(network.inputs):
        raise SynthesisError(f"{network.name}: expected {len(network.inputs)} input bits, got {len(vector)}")
    values = {name: int(bit) for name, bit in zip(network.inputs, vector)}
    for gate in network.gates:
        values[gate.id] = tlg_eval(gate, [values[f] for f in gate.fanins], network.mappable)
    return tuple(values[network.output_drivers[o]] for o in network.outputs)


def evaluate_network_batch(network: TlgNetwork, vectors) -> np.ndarray:
    values = network_signal_values(network, vectors)
    rows = np.asarray(vectors).shape[0]
    if not network.outputs:
        return np.zeros((rows, 0), dtype=np.int8)
    return np.stack([values[network.output_drivers[o]] for o in network.outputs], axis=1).astype(np.int8)


def weight_levels(network: TlgNetwork) -> dict:
    """Distinct weight magnitudes and bias values used by the logic gates."""
    logic = [g for g in network.gates if g.role == ROLE_LOGIC]
    return {
        "weight_levels": sorted({abs(w) for g in logic for w in g.weights}),
        "threshold_levels": sorted({g.bias for g in logic}),
    }


def synthesis_stats(network: TlgNetwork) -> dict:
    return {
        "name": network.name,
        "max_fanin": network.max_fanin,
        "mappable": network.mappable,
        "logic_gates": network.logic_count,
        "buffers": network.buffer_count,
        "gates": len(network.gates),
        "stages": network.depth,
        "fanout_edges": sum(len(g.fanins) for g in network.gates),
        **weight_levels(network),
    }


def network_to_dict(network: TlgNetwork) -> dict:
    return {
        "name": network.name,
        "inputs": list(network.inputs),
        "outputs": list(network.outputs),
        "output_drivers": dict(network.output_drivers),
        "max_fanin": network.max_fanin,
        "mappable": network.mappable,
        "buffer_count": network.buffer_count,
        "gates": [g.to_dict() for g in network.gates],
        "stages": [list(ids) for ids in network.stages],
        "fanout": {signal: list(consumers) for signal, consumers in network.fanout.items()},
    }


def network_from_dict(data: Mapping) -> TlgNetwork:
    try:
        network = TlgNetwork(
            name=str(data["name"]),
            inputs=tuple(data["inputs"]),
            outputs=tuple(data["outputs"]),
            output_drivers=dict(data["output_drivers"]),
            gates=tuple(TlgGate.from_dict(g) for g in data["gates"]),
            stages=tuple(tuple(ids) for ids in data.get("stages", ())),
            max_fanin=int(data.get("max_fanin", MAPPABLE_FANIN)),
            mappable=bool(data.get("mappable", True)),
        )
    except (KeyError, TypeError) as exc:
        raise SynthesisError(f"Malformed network description: {exc}") from exc
    if network.stages:
        check_stage_discipline(network)
    return network


def network_to_json(network: TlgNetwork) -> str:
    return json.dumps(network_to_dict(network), indent=2, sort_keys=True)


def network_from_json(text: str) -> TlgNetwork:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SynthesisError(f"Network file is not valid JSON: {exc}") from exc
    return network_from_dict(data)


def save_network(network: TlgNetwork, path: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write(network_to_json(network) + "\n")
    return path


def load_network(path: str) -> TlgNetwork:
    with open(path, "r", encoding="utf-8") as f:
        return network_from_json(f.read())

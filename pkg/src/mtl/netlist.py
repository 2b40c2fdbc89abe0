"""
Gate-level netlists in the ISCAS-85 bench dialect.

Parses `.bench` text into an immutable, validated combinational DAG and
provides the reference Boolean evaluator every synthesized network is
checked against.
"""

import logging
import os
import re
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .config import MAX_GATE_ARITY

logger = logging.getLogger(__name__)

GATE_FUNCTIONS = ("AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF")
SINGLE_INPUT = ("NOT", "BUF")
FUNCTION_ALIASES = {"BUFF": "BUF"}


class NetlistError(ValueError):
    """Base class of all netlist validation errors."""


class BenchSyntaxError(NetlistError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UndefinedSignalError(NetlistError):
    pass


class DuplicateDefinitionError(NetlistError):
    pass


class CombinationalCycleError(NetlistError):
    pass


class ArityError(NetlistError):
    pass


class VectorWidthError(NetlistError):
    pass


@dataclass(frozen=True)
class Gate:
    id: str
    func: str
    fanins: tuple[str, ...]

    def __post_init__(self):
        if self.func not in GATE_FUNCTIONS:
            raise NetlistError(f"Unknown gate function {self.func!r} for {self.id!r}")
        if not self.fanins:
            raise ArityError(f"Gate {self.id!r} has no fanins")
        if self.func in SINGLE_INPUT and len(self.fanins) != 1:
            raise ArityError(f"{self.func} gate {self.id!r} takes exactly one fanin, got {len(self.fanins)}")
        if len(self.fanins) > MAX_GATE_ARITY:
            raise ArityError(f"Gate {self.id!r} has {len(self.fanins)} fanins (limit {MAX_GATE_ARITY})")


@dataclass(frozen=True)
class Netlist:
    """A validated combinational circuit; immutable once constructed."""

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "gates", tuple(self.gates))
        index: dict[str, int] = {}
        for position, name in enumerate([*self.inputs, *(g.id for g in self.gates)]):
            if name in index:
                raise DuplicateDefinitionError(f"Signal {name!r} is defined more than once")
            index[name] = position
        object.__setattr__(self, "index", index)

        if len(set(self.outputs)) != len(self.outputs):
            raise DuplicateDefinitionError("An OUTPUT is declared more than once")
        for gate in self.gates:
            for fanin in gate.fanins:
                if fanin not in index:
                    raise UndefinedSignalError(f"Gate {gate.id!r} reads undefined signal {fanin!r}")
        for output in self.outputs:
            if output not in index:
                raise UndefinedSignalError(f"OUTPUT {output!r} is not driven")
        try:
            cycle = nx.find_cycle(self.graph)
        except nx.NetworkXNoCycle:
            return
        raise CombinationalCycleError(
            "Combinational cycle: " + " -> ".join(u for u, _ in cycle) + f" -> {cycle[0][0]}"
        )

    @cached_property
    def graph(self) -> nx.DiGraph:
        """Signal graph, edges fanin -> gate."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.inputs)
        for gate in self.gates:
            graph.add_node(gate.id)
            graph.add_edges_from((fanin, gate.id) for fanin in gate.fanins)
        return graph

    @cached_property
    def drivers(self) -> dict[str, Gate]:
        return {gate.id: gate for gate in self.gates}

    def driver(self, signal: str) -> Gate | None:
        """The gate producing `signal`, or None for a primary input."""
        return self.drivers.get(signal)


_DECL_RE = re.compile(r"^(INPUT|OUTPUT)\s*\(\s*([^\s(),]+)\s*\)$", re.IGNORECASE)
_GATE_RE = re.compile(r"^([^\s=(),]+)\s*=\s*([A-Za-z]+)\s*\((.*)\)$")


def parse_bench(text: str, name: str = "netlist") -> Netlist:
    """Parses ISCAS-85 bench text into a validated Netlist."""
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []
    defined: dict[str, int] = {}

    def define(signal: str, line_no: int):
        if signal in defined:
            raise DuplicateDefinitionError(
                f"line {line_no}: {signal!r} already defined on line {defined[signal]}"
            )
        defined[signal] = line_no

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        decl = _DECL_RE.match(line)
        if decl:
            kind, signal = decl.group(1).upper(), decl.group(2)
            if kind == "INPUT":
                define(signal, line_no)
                inputs.append(signal)
            else:
                if signal in outputs:
                    raise DuplicateDefinitionError(f"line {line_no}: OUTPUT({signal}) declared twice")
                outputs.append(signal)
            continue

        assign = _GATE_RE.match(line)
        if not assign:
            raise BenchSyntaxError(line_no, f"cannot parse {raw.strip()!r}")
        target, func, args = assign.group(1), assign.group(2).upper(), assign.group(3)
        func = FUNCTION_ALIASES.get(func, func)
        if func not in GATE_FUNCTIONS:
            raise BenchSyntaxError(line_no, f"unsupported gate function {assign.group(2)!r}")
        fanins = [arg.strip() for arg in args.split(",")]
        if any(not arg or re.search(r"[\s()=]", arg) for arg in fanins):
            raise BenchSyntaxError(line_no, f"malformed fanin list {args.strip()!r}")
        if target in fanins:
            raise CombinationalCycleError(f"line {line_no}: gate {target!r} reads its own output")
        define(target, line_no)
        try:
            gates.append(Gate(target, func, tuple(fanins)))
        except ArityError as exc:
            raise ArityError(f"line {line_no}: {exc}") from exc

    netlist = Netlist(name, tuple(inputs), tuple(outputs), tuple(gates))
    logger.debug("Parsed %s: %d inputs, %d outputs, %d gates", name, len(inputs), len(outputs), len(gates))
    return netlist


def load_bench(path: str) -> Netlist:
    """Reads a bench file; the netlist is named after the file stem."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_bench(text, name=os.path.splitext(os.path.basename(path))[0])


def serialize_bench(netlist: Netlist) -> str:
    """Normalized bench text: declarations first, gates in declaration order."""
    lines = [f"# {netlist.name}"]
    lines += [f"INPUT({signal})" for signal in netlist.inputs]
    lines += [f"OUTPUT({signal})" for signal in netlist.outputs]
    lines += [f"{g.id} = {g.func}({', '.join(g.fanins)})" for g in netlist.gates]
    return "\n".join(lines) + "\n"


def topo_order(netlist: Netlist) -> list[Gate]:
    """Gates after all of their fanin gates; ties broken by declaration order."""
    position = netlist.index
    gate_graph = netlist.graph.subgraph(g.id for g in netlist.gates)
    order = nx.lexicographical_topological_sort(gate_graph, key=lambda signal: position[signal])
    return [netlist.drivers[signal] for signal in order]


def apply_function(func: str, bits: Sequence[int]) -> int:
    """Boolean semantics of one gate; multi-input XOR/XNOR is parity."""
    if func == "AND":
        return int(all(bits))
    if func == "NAND":
        return int(not all(bits))
    if func == "OR":
        return int(any(bits))
    if func == "NOR":
        return int(not any(bits))
    if func == "XOR":
        return reduce(lambda a, b: a ^ b, (int(b) for b in bits))
    if func == "XNOR":
        return 1 - reduce(lambda a, b: a ^ b, (int(b) for b in bits))
    if func == "NOT":
        return 1 - int(bits[0])
    return int(bits[0])


def _check_width(netlist: Netlist, width: int):
    if width != len(netlist.inputs):
        raise VectorWidthError(
            f"{netlist.name}: expected {len(netlist.inputs)} input bits, got {width}"
        )


def eval_netlist(netlist: Netlist, input_vector: Sequence[int]) -> tuple[int, ...]:
    """Evaluates one input vector; outputs in declared order."""
    _check_width(netlist, len(input_vector))
    values = {name: int(bit) for name, bit in zip(netlist.inputs, input_vector)}
    for gate in topo_order(netlist):
        values[gate.id] = apply_function(gate.func, [values[f] for f in gate.fanins])
    return tuple(values[o] for o in netlist.outputs)


_ARRAY_FUNCTIONS = {
    "AND": lambda cols: np.logical_and.reduce(cols),
    "NAND": lambda cols: ~np.logical_and.reduce(cols),
    "OR": lambda cols: np.logical_or.reduce(cols),
    "NOR": lambda cols: ~np.logical_or.reduce(cols),
    "XOR": lambda cols: np.logical_xor.reduce(cols),
    "XNOR": lambda cols: ~np.logical_xor.reduce(cols),
    "NOT": lambda cols: ~cols[0],
    "BUF": lambda cols: cols[0].copy(),
}


def eval_netlist_batch(netlist: Netlist, vectors) -> np.ndarray:
    """Evaluates many vectors at once (rows are vectors); returns an int8 matrix."""
    matrix = np.asarray(vectors, dtype=bool)
    if matrix.ndim != 2:
        matrix = matrix.reshape(len(matrix), -1)
    _check_width(netlist, matrix.shape[1])
    values = {name: matrix[:, i] for i, name in enumerate(netlist.inputs)}
    for gate in topo_order(netlist):
        cols = np.stack([values[f] for f in gate.fanins])
        values[gate.id] = _ARRAY_FUNCTIONS[gate.func](cols)
    if not netlist.outputs:
        return np.zeros((matrix.shape[0], 0), dtype=np.int8)
    return np.stack([values[o] for o in netlist.outputs], axis=1).astype(np.int8)


def logic_depth(netlist: Netlist) -> int:
    """Number of gates on the longest input-to-output path."""
    depth: dict[str, int] = {name: 0 for name in netlist.inputs}
    for gate in topo_order(netlist):
        depth[gate.id] = 1 + max(depth[f] for f in gate.fanins)
    return max(depth.values(), default=0)


def netlist_stats(netlist: Netlist) -> dict:
    histogram: dict[str, int] = {}
    for gate in netlist.gates:
        histogram[gate.func] = histogram.get(gate.func, 0) + 1
    return {
        "name": netlist.name,
        "inputs": len(netlist.inputs),
        "outputs": len(netlist.outputs),
        "gates": len(netlist.gates),
        "functions": dict(sorted(histogram.items())),
        "depth": logic_depth(netlist),
        "max_arity": max((len(g.fanins) for g in netlist.gates), default=0),
    }


def iter_vectors(width: int) -> Iterable[tuple[int, ...]]:
    """All 2**width vectors, first input as the most significant bit."""
    for value in range(2 ** width):
        yield tuple((value >> (width - 1 - i)) & 1 for i in range(width))

"""
Cycle-accurate simulation of a pipelined TLG network on the device model.

All gates are evaluated together each cycle from the latches of the
previous cycle, which is exactly the 2-phase pipeline: stage k reads what
stage k-1 latched one cycle earlier. Vector t is latched into the input
register at the end of cycle t, stage k evaluates it during cycle t+1+k and
its outputs are captured at the end of cycle t+S.
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import (
    DEFAULT_RANDOM_VECTORS,
    DEFAULT_SEED,
    MAX_EXHAUSTIVE_INPUTS,
    DeviceParams,
)
from .device import (
    SWITCH_RTOL,
    DwsState,
    device_layout,
    gate_conductances,
    latch_bit,
    mc_sample,
)
from .netlist import Netlist, eval_netlist_batch
from .tlgsynth import TlgNetwork, check_stage_discipline, network_signal_values

logger = logging.getLogger(__name__)


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class UnderThresholdEvent:
    gate: str
    cycle: int
    current: float


@dataclass
class SimState:
    """Simulator state after the last executed cycle."""

    dws: dict[str, DwsState]
    stage_latches: list[tuple[int, ...]]
    cycle: int
    events: list[UnderThresholdEvent] = field(default_factory=list)
    min_current: dict[str, float] = field(default_factory=dict)


@dataclass
class SimResult:
    outputs: list[tuple[int, ...]]
    state: SimState
    latency: int
    cycles: int

    def output_cycle(self, t: int) -> int:
        """Cycle at the end of which the outputs of vector t are captured."""
        return t + self.latency


@dataclass
class EquivalenceReport:
    vectors_tested: int
    mismatches: int
    mode: str
    first_mismatch: dict | None = None
    under_threshold_events: int = 0

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "vectors_tested": self.vectors_tested,
            "mismatches": self.mismatches,
            "passed": self.passed,
            "first_mismatch": self.first_mismatch,
            "under_threshold_events": self.under_threshold_events,
        }


@dataclass
class MarginReport:
    gate_min_current: dict[str, float]
    min_current: float
    margin_ratio: float
    failure_count: int
    mismatch_count: int
    under_threshold_events: int
    trials: int
    yield_: float

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "yield": self.yield_,
            "failure_count": self.failure_count,
            "mismatch_count": self.mismatch_count,
            "under_threshold_events": self.under_threshold_events,
            "min_current": self.min_current,
            "margin_ratio": self.margin_ratio,
            "gate_min_current": dict(sorted(self.gate_min_current.items())),
        }


class _CompiledNetwork:
    """Flat arrays of one network: signal slots are [inputs..., gates..., constant 0]."""

    def __init__(self, network: TlgNetwork, params: DeviceParams, variation: Mapping[str, Sequence[float]] | None):
        self.gate_ids = [g.id for g in network.gates]
        n_in, n_gates = len(network.inputs), len(network.gates)
        slot = {name: i for i, name in enumerate(network.inputs)}
        slot.update((gate_id, n_in + i) for i, gate_id in enumerate(self.gate_ids))
        zero_slot = n_in + n_gates
        width = max(network.max_fanin, 1)

        self.n_inputs = n_in
        self.n_slots = zero_slot + 1
        self.fanin_idx = np.full((n_gates, width), zero_slot, dtype=np.int64)
        self.diff = np.zeros((n_gates, width))
        self.bias_diff = np.zeros(n_gates)
        self.stage = np.array([network.stage_of[g] for g in self.gate_ids], dtype=np.int64)
        for i, gate in enumerate(network.gates):
            factors = None if variation is None else variation.get(gate.id)
            pairs, bias = gate_conductances(gate, params, factors)
            for j, (fanin, pair) in enumerate(zip(gate.fanins, pairs)):
                self.fanin_idx[i, j] = slot[fanin]
                self.diff[i, j] = pair.difference
            self.bias_diff[i] = bias.difference
        self.output_idx = np.array([slot[network.output_drivers[o]] for o in network.outputs], dtype=np.int64)


def _as_matrix(vectors, width: int) -> np.ndarray:
    matrix = np.asarray(vectors, dtype=np.int8)
    if matrix.ndim == 1 and width == 0:
        matrix = matrix.reshape(len(matrix), 0)
    if matrix.ndim != 2 or matrix.shape[1] != width:
        raise SimulationError(f"Input vectors must have width {width}")
    if np.any((matrix != 0) & (matrix != 1)):
        raise SimulationError("Input vectors must contain only 0 and 1")
    return matrix


def simulate(
    network: TlgNetwork,
    input_stream,
    params: DeviceParams,
    variation: Mapping[str, Sequence[float]] | None = None,
) -> SimResult:
    """
    Runs the stream through the pipeline; n vectors take n + S cycles.

    An under-threshold write keeps the stored DWS state, so the gate repeats
    its previous output.
    """
    if not network.mappable:
        raise SimulationError(f"{network.name}: fan-in {network.max_fanin} networks are logical-only")
    check_stage_discipline(network)
    vectors = _as_matrix(input_stream, len(network.inputs))
    n = len(vectors)
    if n == 0:
        raise SimulationError("Input stream is empty")

    compiled = _CompiledNetwork(network, params, variation)
    depth = network.depth
    n_in = compiled.n_inputs
    n_gates = len(compiled.gate_ids)
    threshold = params.i_c * (1.0 - SWITCH_RTOL)
    reads_high = latch_bit(DwsState.from_polarity(1, params), params)
    reads_low = latch_bit(DwsState.from_polarity(-1, params), params)

    latch = np.zeros(compiled.n_slots, dtype=np.int8)
    polarity = np.full(n_gates, -1, dtype=np.int8)
    min_current = np.full(n_gates, np.inf)
    outputs = np.zeros((n, len(network.outputs)), dtype=np.int8)
    events: list[UnderThresholdEvent] = []

    for cycle in range(n + depth):
        if n_gates:
            x = latch[compiled.fanin_idx]
            i_sum = params.delta_v * ((x * compiled.diff).sum(axis=1) + compiled.bias_diff)
            magnitude = np.abs(i_sum)
            fires = magnitude >= threshold
            polarity = np.where(fires, np.where(i_sum > 0, 1, -1), polarity).astype(np.int8)
            vector_index = cycle - 1 - compiled.stage
            valid = (vector_index >= 0) & (vector_index < n)
            np.minimum(min_current, np.where(valid, magnitude, np.inf), out=min_current)
            for i in np.flatnonzero(valid & ~fires):
                events.append(UnderThresholdEvent(compiled.gate_ids[i], cycle, float(magnitude[i])))
            latch[n_in : n_in + n_gates] = np.where(polarity > 0, reads_high, reads_low)
        if cycle < n:
            latch[:n_in] = vectors[cycle]
        t = cycle - depth
        if 0 <= t < n:
            outputs[t] = latch[compiled.output_idx]

    if events:
        logger.warning("%s: %d under-threshold writes", network.name, len(events))
    state = SimState(
        dws={g: DwsState.from_polarity(int(p), params) for g, p in zip(compiled.gate_ids, polarity)},
        stage_latches=[
            tuple(int(latch[n_in + i]) for i in np.flatnonzero(compiled.stage == k)) for k in range(depth)
        ],
        cycle=n + depth,
        events=events,
        min_current={g: float(c) for g, c in zip(compiled.gate_ids, min_current)},
    )
    return SimResult(
        outputs=[tuple(int(b) for b in row) for row in outputs],
        state=state,
        latency=depth,
        cycles=n + depth,
    )


def all_vectors(width: int) -> np.ndarray:
    """Every vector of the given width, first input as the most significant bit."""
    if width > MAX_EXHAUSTIVE_INPUTS:
        raise SimulationError(f"Exhaustive mode is limited to {MAX_EXHAUSTIVE_INPUTS} inputs, got {width}")
    values = np.arange(2 ** width, dtype=np.int64)[:, None]
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)[None, :]
    return ((values >> shifts) & 1).astype(np.int8)


def random_vectors(width: int, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=(n, width), dtype=np.int8)


def _check_interface(netlist: Netlist, network: TlgNetwork):
    if tuple(netlist.inputs) != tuple(network.inputs) or tuple(netlist.outputs) != tuple(network.outputs):
        raise SimulationError(
            f"Interface mismatch between netlist {netlist.name!r} and network {network.name!r}"
        )


def _compare(vectors: np.ndarray, expected: np.ndarray, got: list[tuple[int, ...]]) -> tuple[int, dict | None]:
    got_matrix = np.asarray(got, dtype=np.int8).reshape(expected.shape)
    bad = np.flatnonzero(np.any(got_matrix != expected, axis=1))
    if not len(bad):
        return 0, None
    first = int(bad[0])
    return len(bad), {
        "index": first,
        "vector": [int(b) for b in vectors[first]],
        "expected": [int(b) for b in expected[first]],
        "got": [int(b) for b in got_matrix[first]],
    }


def equivalence_check(
    netlist: Netlist,
    network: TlgNetwork,
    params: DeviceParams | None = None,
    mode: str = "exhaustive",
    n: int = DEFAULT_RANDOM_VECTORS,
    seed: int = DEFAULT_SEED,
    variation: Mapping[str, Sequence[float]] | None = None,
) -> EquivalenceReport:
    """Streams every (or n seeded random) vector through simulate and compares with eval_netlist."""
    _check_interface(netlist, network)
    params = params or DeviceParams()
    width = len(netlist.inputs)
    if mode == "exhaustive":
        vectors = all_vectors(width)
    elif mode == "random":
        vectors = random_vectors(width, n, seed)
    else:
        raise SimulationError(f"Unknown equivalence mode {mode!r}")
    expected = eval_netlist_batch(netlist, vectors)
    result = simulate(network, vectors, params, variation)
    mismatches, first = _compare(vectors, expected, result.outputs)
    logger.debug("%s: %d vectors, %d mismatches", network.name, len(vectors), mismatches)
    return EquivalenceReport(
        vectors_tested=len(vectors),
        mismatches=mismatches,
        mode=mode,
        first_mismatch=first,
        under_threshold_events=len(result.state.events),
    )


@dataclass
class _Trial:
    mismatches: int
    events: int
    min_current: dict[str, float]


def monte_carlo(
    netlist: Netlist,
    network: TlgNetwork,
    params: DeviceParams,
    trials: int,
    vectors,
    seed: int = DEFAULT_SEED,
    jobs: int = 1,
) -> MarginReport:
    """
    Re-samples static variation per trial and replays `vectors`.

    Trial i draws from seed + i, so results do not depend on `jobs`.
    """
    if trials < 1:
        raise SimulationError("trials must be at least 1")
    _check_interface(netlist, network)
    vectors = _as_matrix(vectors, len(netlist.inputs))
    expected = eval_netlist_batch(netlist, vectors)
    layout = device_layout(network)

    def run(trial: int) -> _Trial:
        factors = mc_sample(params, np.random.default_rng(seed + trial), layout)
        result = simulate(network, vectors, params, factors)
        mismatches, _ = _compare(vectors, expected, result.outputs)
        return _Trial(mismatches, len(result.state.events), result.state.min_current)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(trial) for trial in range(trials)]

    gate_min = {g.id: float("inf") for g in network.gates}
    for result in results:
        for gate_id, current in result.min_current.items():
            gate_min[gate_id] = min(gate_min[gate_id], current)
    min_current = min(gate_min.values(), default=float("inf"))
    failures = sum(1 for r in results if r.mismatches)
    report = MarginReport(
        gate_min_current=gate_min,
        min_current=min_current,
        margin_ratio=min_current / params.i_c,
        failure_count=failures,
        mismatch_count=sum(r.mismatches for r in results),
        under_threshold_events=sum(r.events for r in results),
        trials=trials,
        yield_=1.0 - failures / trials,
    )
    logger.debug("%s: yield %.3f over %d trials (sigma_r=%g)", network.name, report.yield_, trials, params.sigma_r)
    return report


def input_current_stats(network: TlgNetwork, params: DeviceParams, vectors) -> dict[str, dict[str, float]]:
    """Average and maximum injected current per gate: ΔV * (Σ in_i |G_i+ - G_i-| + |G_b+ - G_b-|)."""
    values = network_signal_values(network, vectors)
    rows = np.asarray(vectors).shape[0]
    stats = {}
    for gate in network.gates:
        pairs, bias = gate_conductances(gate, params)
        injected = np.full(rows, abs(bias.difference))
        for fanin, pair in zip(gate.fanins, pairs):
            injected = injected + values[fanin] * abs(pair.difference)
        injected = params.delta_v * injected
        stats[gate.id] = {"average": float(injected.mean()), "maximum": float(injected.max())}
    return stats


_VECTOR_STRIP_RE = re.compile(r"[\s,]")


def read_vector_file(path: str) -> list[tuple[int, ...]]:
    """One vector per line as 0/1 characters; '#' comments, blanks, spaces and commas ignored."""
    vectors = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = _VECTOR_STRIP_RE.sub("", raw.split("#", 1)[0])
            if not line:
                continue
            if set(line) - {"0", "1"}:
                raise SimulationError(f"{path}:{line_no}: vectors may only contain 0 and 1")
            vectors.append(tuple(int(c) for c in line))
    return vectors

"""
Electrical model of the magnetic threshold logic gate.

Weights are pairs of MTJ conductances driven by +ΔV / -ΔV; their currents sum
into the write path of a domain-wall switch (DWS) that flips when the net
current exceeds its threshold, and whose MTJ is read through a voltage
divider against a reference resistance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import DeviceParams
from .tlgsynth import MTL_BIASES, MTL_WEIGHTS, TlgGate, TlgNetwork

logger = logging.getLogger(__name__)

ONE_BIT_PAIR = "one-bit-pair"
TWO_BIT_BIAS = "two-bit-bias"

# truncation of the variation sample, in standard deviations
TRUNCATION_SIGMA = 4.0
# resistance factors never go below this, whatever sigma
MIN_RESISTANCE_FACTOR = 0.05
# relative slack on the threshold comparison, absorbs float rounding when
# the unit current is set to exactly i_c
SWITCH_RTOL = 1e-9


class DeviceError(ValueError):
    pass


@dataclass(frozen=True)
class ConductancePair:
    g_plus: float
    g_minus: float
    kind: str = ONE_BIT_PAIR

    @property
    def difference(self) -> float:
        return self.g_plus - self.g_minus

    @property
    def total(self) -> float:
        return self.g_plus + self.g_minus

    def scaled(self, factor_plus: float, factor_minus: float) -> "ConductancePair":
        """Applies multiplicative resistance factors (conductance divides)."""
        return ConductancePair(self.g_plus / factor_plus, self.g_minus / factor_minus, self.kind)


@dataclass(frozen=True)
class DwsState:
    polarity: int
    read_resistance: float

    @classmethod
    def from_polarity(cls, polarity: int, params: DeviceParams) -> "DwsState":
        if polarity not in (1, -1):
            raise DeviceError(f"polarity must be +1 or -1, got {polarity!r}")
        # +1 is the anti-parallel (high) read level and latches logic 1
        return cls(polarity, params.r_ap if polarity > 0 else params.r_p)

    @property
    def bit(self) -> int:
        return 1 if self.polarity > 0 else 0


def conductance_levels(params: DeviceParams) -> tuple[float, ...]:
    """4-level ladder of the two-bit bias device: G_ap + k*u_g, k = 0..3."""
    u = params.unit_conductance
    return tuple(params.g_ap + k * u for k in range(4))


def weight_to_conductance(w: int, params: DeviceParams) -> ConductancePair:
    """
    Maps an input weight (±2) to a one-bit pair or a bias (±1, ±3) to a
    two-bit pair; g_plus - g_minus == w * u_g in both cases.
    """
    if w in MTL_WEIGHTS:
        if w > 0:
            return ConductancePair(params.g_p, params.g_ap, ONE_BIT_PAIR)
        return ConductancePair(params.g_ap, params.g_p, ONE_BIT_PAIR)
    if w in MTL_BIASES:
        ladder = conductance_levels(params)
        high, low = (ladder[3], ladder[0]) if abs(w) == 3 else (ladder[2], ladder[1])
        if w > 0:
            return ConductancePair(high, low, TWO_BIT_BIAS)
        return ConductancePair(low, high, TWO_BIT_BIAS)
    raise DeviceError(f"Weight {w!r} is outside the MTL alphabet {MTL_WEIGHTS} / {MTL_BIASES}")


def gate_conductances(
    gate: TlgGate, params: DeviceParams, factors: Sequence[float] | None = None
) -> tuple[list[ConductancePair], ConductancePair]:
    """
    Conductance pairs of one gate: one per input, then the bias pair.

    `factors` holds resistance multipliers ordered [in0+, in0-, in1+, in1-, ..., b+, b-].
    """
    pairs = [weight_to_conductance(w, params) for w in gate.weights]
    bias = weight_to_conductance(gate.bias, params)
    if factors is None:
        return pairs, bias
    if len(factors) != 2 * (len(pairs) + 1):
        raise DeviceError(f"Gate {gate.id!r} needs {2 * (len(pairs) + 1)} factors, got {len(factors)}")
    pairs = [p.scaled(factors[2 * i], factors[2 * i + 1]) for i, p in enumerate(pairs)]
    bias = bias.scaled(factors[-2], factors[-1])
    return pairs, bias


def sum_current(
    pairs: Sequence[ConductancePair],
    bits: Sequence[int],
    bias: ConductancePair,
    params: DeviceParams,
) -> float:
    """I_sum = ΔV * (sum_i in_i * (G_i+ - G_i-) + (G_b+ - G_b-))."""
    if len(pairs) != len(bits):
        raise DeviceError(f"{len(pairs)} conductance pairs for {len(bits)} activation bits")
    total = sum(int(bit) * pair.difference for pair, bit in zip(pairs, bits)) + bias.difference
    return params.delta_v * total


def unit_current(params: DeviceParams) -> float:
    """Smallest nonzero |I_sum| at nominal parameters: ΔV * u_g."""
    return params.delta_v * params.unit_conductance


def is_under_threshold(i_sum: float, params: DeviceParams) -> bool:
    return abs(i_sum) < params.i_c * (1.0 - SWITCH_RTOL)


def dws_apply(
    state: DwsState, i_sum: float, params: DeviceParams, events: list | None = None
) -> tuple[DwsState, bool]:
    """
    Writes the DWS with the summed current. Below threshold the state is kept
    and |i_sum| is appended to `events` when a collector is given.
    """
    if is_under_threshold(i_sum, params):
        if events is not None:
            events.append(abs(i_sum))
        return state, False
    polarity = 1 if i_sum > 0 else -1
    if polarity == state.polarity:
        return state, False
    return DwsState.from_polarity(polarity, params), True


def read_divider(state: DwsState, params: DeviceParams) -> float:
    """V_out = vdd * R_dws / (R_dws + R_ref), R_ref = 2 r_p."""
    return params.vdd * state.read_resistance / (state.read_resistance + params.r_ref)


def latch_bit(state: DwsState, params: DeviceParams) -> int:
    """Readout inverter modelled as an ideal comparison against vdd/2."""
    return 1 if read_divider(state, params) > params.vdd / 2 else 0


def device_layout(network: TlgNetwork) -> dict[str, int]:
    """Number of variation-sampled devices per gate: two per input plus the bias pair."""
    return {gate.id: 2 * (len(gate.fanins) + 1) for gate in network.gates}


def mc_sample(
    params: DeviceParams, rng: np.random.Generator | int | None, layout: Mapping[str, int]
) -> dict[str, np.ndarray]:
    """
    Multiplicative resistance factors per gate and device.

    factor = 1 + sigma_r * z, z = sqrt(rho) * z_gate + sqrt(1 - rho) * z_device,
    with z truncated at ±4 and the factor floored at MIN_RESISTANCE_FACTOR.
    """
    if params.sigma_r < 0:
        raise DeviceError(f"sigma_r must not be negative, got {params.sigma_r!r}")
    rng = np.random.default_rng(rng)
    names = list(layout)
    counts = np.asarray([layout[name] for name in names], dtype=np.int64)
    z_gate = rng.standard_normal(len(names))
    z_device = rng.standard_normal(int(counts.sum()))
    z = math.sqrt(params.rho) * np.repeat(z_gate, counts) + math.sqrt(1.0 - params.rho) * z_device
    z = np.clip(z, -TRUNCATION_SIGMA, TRUNCATION_SIGMA)
    factors = np.maximum(1.0 + params.sigma_r * z, MIN_RESISTANCE_FACTOR)
    return dict(zip(names, np.split(factors, np.cumsum(counts)[:-1])))

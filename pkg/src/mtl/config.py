# /config.py

import os
import re
from dataclasses import dataclass, fields, replace

# --- Global Configuration ---
DEFAULT_SEED = 0
DEVICE_CONFIG_PATH = os.environ.get("MTL_DEVICE_CONFIG")
BENCH_DIR = os.environ.get("MTL_BENCH_DIR")

# --- Synthesis / verification limits ---
SUPPORTED_FANIN = (2, 3, 4)
MAPPABLE_FANIN = 2
MAX_GATE_ARITY = 16
MAX_EXHAUSTIVE_INPUTS = 24
EXHAUSTIVE_EQUIVALENCE_LIMIT = 20
DEFAULT_RANDOM_VECTORS = 10000
DEFAULT_ENERGY_VECTORS = 256
DEFAULT_MC_VECTORS = 64

# --- Data files ---
PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))
BASELINE_PATH = os.path.join(PACKAGE_DIR, "data", "table1.json")
BENCHMARKS_DIR = os.path.join(os.path.dirname(os.path.dirname(PACKAGE_DIR)), "benchmarks")


class ConfigError(ValueError):
    """Raised for unknown keys, malformed quantities or out-of-range device values."""


SI_PREFIXES = {
    "": 1.0,
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "u": 1e-6,
    "µ": 1e-6,  # micro sign
    "μ": 1e-6,  # greek mu
    "m": 1e-3,
    "k": 1e3,
    "K": 1e3,
    "M": 1e6,
    "G": 1e9,
}

_QUANTITY_RE = re.compile(
    r"^\s*(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*"
    r"(?P<prefix>[fpnuµμmkKMG]?)\s*"
    r"(?P<unit>V|A|F|s|W|S|Ω|[oO]hms?)?\s*$"
)


def parse_quantity(text: str) -> float:
    """Parses '50mV', '12kΩ', '1.4uA' or a bare number into SI base units."""
    match = _QUANTITY_RE.match(str(text))
    if not match:
        raise ConfigError(f"Cannot parse quantity: {text!r}")
    return float(match.group("number")) * SI_PREFIXES[match.group("prefix")]


@dataclass(frozen=True)
class DeviceParams:
    """Electrical constants of the MTL gate, crossbar interconnect and variation model."""

    delta_v: float = 50e-3      # input signalling level
    r_p: float = 12e3           # parallel resistance of the weight MTJs
    tmr: float = 3.0            # (Rap - Rp) / Rp
    i_c: float = 1.4e-6         # DWS switching threshold
    t_sw: float = 1e-9          # DWS switching time at threshold
    t_clk: float = 2e-9         # pipeline clock period
    vdd: float = 1.0            # readout supply
    p_div: float = 0.3e-6       # average divider power during read
    c_wire: float = 10e-15      # per max-length net
    r_wire: float = 100.0       # per max-length net
    r_on: float = 200.0
    r_off: float = 1e6
    sigma_r: float = 0.0        # relative MTJ resistance variation
    rho: float = 0.9            # intra-gate correlation of the variation
    activity: float = 0.8       # transition probability per net per cycle
    max_length: float = 50e-6
    pitch: float = 0.0          # 0 selects max_length / max(rows, cols)

    def __post_init__(self):
        for name in ("r_p", "tmr", "i_c", "t_sw", "t_clk", "vdd", "r_on", "r_off", "max_length"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("delta_v", "p_div", "c_wire", "r_wire", "pitch"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must not be negative, got {getattr(self, name)!r}")
        if not self.r_on < self.r_off:
            raise ConfigError("r_on must be smaller than r_off")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho!r}")
        if not 0.0 <= self.activity <= 1.0:
            raise ConfigError(f"activity must lie in [0, 1], got {self.activity!r}")
        # the DWS write has to finish inside the evaluate phase of the 2-phase clock
        if self.t_sw > self.t_clk / 2:
            raise ConfigError("t_sw must not exceed half the clock period")

    @property
    def r_ap(self) -> float:
        return self.r_p * (1.0 + self.tmr)

    @property
    def g_p(self) -> float:
        return 1.0 / self.r_p

    @property
    def g_ap(self) -> float:
        return 1.0 / self.r_ap

    @property
    def unit_conductance(self) -> float:
        """u_g: half the parallel/anti-parallel conductance gap."""
        return (self.g_p - self.g_ap) / 2.0

    @property
    def r_ref(self) -> float:
        return 2.0 * self.r_p

    @property
    def path_resistance_bound(self) -> float:
        return 0.1 * self.r_p

    def with_overrides(self, **overrides) -> "DeviceParams":
        return replace(self, **overrides)

    @classmethod
    def from_file(cls, path: str) -> "DeviceParams":
        return load_device_params(path)


# Named starting points for a config file; explicit keys still override them.
# "unit-2uA" keeps the 2µA bookkeeping unit: r_p is chosen so that
# delta_v * u_g == 2µA with the default delta_v and tmr.
PROFILES = {
    "exact": {},
    "unit-2uA": {"i_c": 2e-6, "r_p": 9375.0},
}

DEVICE_KEYS = tuple(f.name for f in fields(DeviceParams))


def parse_device_config(text: str) -> DeviceParams:
    """Parses flat `name = value` lines into DeviceParams."""
    values = {}
    profile = "exact"
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'name = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "profile":
            if value not in PROFILES:
                raise ConfigError(f"line {line_no}: unknown profile {value!r}")
            profile = value
            continue
        if key not in DEVICE_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        try:
            values[key] = parse_quantity(value)
        except ConfigError as exc:
            raise ConfigError(f"line {line_no}: {exc}") from exc
    return DeviceParams(**{**PROFILES[profile], **values})


def load_device_params(path: str | None = None) -> DeviceParams:
    """Loads a device config file; falls back to MTL_DEVICE_CONFIG, then to the defaults."""
    path = path or DEVICE_CONFIG_PATH
    if not path:
        return DeviceParams()
    with open(path, "r", encoding="utf-8") as f:
        return parse_device_config(f.read())


def find_benchmark(name: str) -> str | None:
    """Returns the path of `<name>.bench` in the shipped or MTL_BENCH_DIR directory."""
    for directory in (BENCH_DIR, BENCHMARKS_DIR):
        if not directory:
            continue
        candidate = os.path.join(directory, f"{name}.bench")
        if os.path.exists(candidate):
            return candidate
    return None

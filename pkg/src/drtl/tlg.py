"""Threshold logic gates and their resistive (DRTL) realization.

A gate outputs 1 iff ``sum(w_i * x_i) + bias > 0``.  Weights are signed
integers and the bias is a signed half-integer, so the weighted sum can never
sit exactly on the decision boundary.

In hardware each input drives a pair of programmable conductances
``(g_plus, g_minus)`` into the two pull-down paths of a clocked latch; the bias
is one more pair on a branch whose transistor is permanently on.  The latch
resolves to 1 when the positive path conducts more.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

# Supply/threshold constants of the 45 nm latch.  Informational only.
VDD = 0.5
VT_INPUT = 0.130
VT_NOMINAL = 0.350


def _half_integer(b) -> float:
    f = Fraction(b.strip()) if isinstance(b, str) else Fraction(b)
    if (2 * f).denominator != 1 or (2 * f).numerator % 2 == 0:
        raise ValueError(f"bias must be a half-integer (k + 0.5), got {b}")
    return float(f)


@dataclass(frozen=True)
class ThresholdGate:
    weights: tuple[int, ...]
    bias: float

    def __post_init__(self):
        ws = tuple(int(w) for w in self.weights)
        if any(w != v for w, v in zip(ws, self.weights)):
            raise ValueError(f"weights must be integers, got {self.weights}")
        if not ws:
            raise ValueError("a threshold gate needs at least one input")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "bias", _half_integer(self.bias))

    @property
    def fanin(self) -> int:
        return len(self.weights)

    def negated(self) -> "ThresholdGate":
        return ThresholdGate(tuple(-w for w in self.weights), -self.bias)

    def __str__(self):
        return f"TLG([{','.join(map(str, self.weights))}], {_fmt_bias(self.bias)})"


def _fmt_bias(b: float) -> str:
    return f"{b:+.1f}" if b else "0"


# The synthesis library.  Every gate emitted by the flow is one of these (or a
# wider AND/OR/NAND/NOR variant under a wider scheme).
AND2 = ThresholdGate((1, 1), -1.5)
OR2 = ThresholdGate((1, 1), -0.5)
NAND2 = ThresholdGate((-1, -1), 1.5)
NOR2 = ThresholdGate((-1, -1), 0.5)
NOT = ThresholdGate((-1,), 0.5)
BUF = ThresholdGate((1,), -0.5)
XOR_COMBINE = ThresholdGate((-1, 1), -0.5)  # (AND, OR) -> XOR

LIBRARY = {
    "AND2": AND2, "OR2": OR2, "NAND2": NAND2, "NOR2": NOR2,
    "NOT": NOT, "BUF": BUF, "XOR_COMBINE": XOR_COMBINE,
}


@dataclass(frozen=True)
class QuantizationScheme:
    fanin_limit: int
    weight_magnitudes: frozenset
    bias_levels: frozenset
    required_resolution: Fraction

    def __post_init__(self):
        if self.fanin_limit < 1:
            raise ValueError("fanin_limit must be positive")
        object.__setattr__(self, "weight_magnitudes", frozenset(int(m) for m in self.weight_magnitudes))
        object.__setattr__(self, "bias_levels", frozenset(_half_integer(b) for b in self.bias_levels))
        object.__setattr__(self, "required_resolution", Fraction(self.required_resolution))
        if any(m <= 0 for m in self.weight_magnitudes):
            raise ValueError("weight magnitudes must be positive")
        if not 0 < self.required_resolution < 1:
            raise ValueError("required_resolution must lie in (0, 1)")

    def violations(self, gate: ThresholdGate) -> list[str]:
        errs = []
        if gate.fanin > self.fanin_limit:
            errs.append(f"fan-in {gate.fanin} exceeds limit {self.fanin_limit}")
        bad = [w for w in gate.weights if abs(w) not in self.weight_magnitudes]
        if bad:
            errs.append(f"weights {bad} outside magnitudes {sorted(self.weight_magnitudes)}")
        if gate.bias not in self.bias_levels:
            errs.append(f"bias {gate.bias} outside levels {sorted(self.bias_levels)}")
        if not errs and margin_analysis(gate).resolution < self.required_resolution:
            errs.append(f"resolution below {self.required_resolution}")
        return errs

    def validate(self, gate: ThresholdGate):
        errs = self.violations(gate)
        if errs:
            raise ValueError(f"{gate} violates scheme: " + "; ".join(errs))

    def allows(self, gate: ThresholdGate) -> bool:
        return not self.violations(gate)


def uniform_scheme(fanin_limit: int) -> QuantizationScheme:
    """Unit-magnitude weights and every half-integer bias up to +-(k - 0.5).

    For k = 2 this is the 2-level-weight / 4-level-threshold scheme with 25%
    comparator resolution.  The widest AND_k needs resolution 0.5 / k.
    """
    k = fanin_limit
    levels = {s * (j + 0.5) for j in range(k) for s in (1, -1)}
    return QuantizationScheme(k, {1}, levels, Fraction(1, 2 * k))


DEFAULT_SCHEME = uniform_scheme(2)
SCHEMES = {f"fanin{k}": uniform_scheme(k) for k in (2, 3, 4)}
SCHEMES["default"] = DEFAULT_SCHEME


def get_scheme(name: str) -> QuantizationScheme:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}") from None


def all_vectors(n: int):
    return itertools.product((0, 1), repeat=n)


def weighted_sum(gate: ThresholdGate, inputs) -> float:
    x = tuple(inputs)
    if len(x) != gate.fanin:
        raise ValueError(f"gate has fan-in {gate.fanin}, got {len(x)} inputs")
    return sum(w * int(b) for w, b in zip(gate.weights, x)) + gate.bias


def evaluate(gate: ThresholdGate, inputs) -> int:
    return int(weighted_sum(gate, inputs) > 0)


@dataclass(frozen=True)
class Margins:
    min_margin: Fraction
    sum_spread: Fraction
    resolution: Fraction


def margin_analysis(gate: ThresholdGate) -> Margins:
    """Smallest |S(x)| relative to the full swing of S over all input vectors."""
    if not any(gate.weights):
        raise ValueError("degenerate gate: all weights are zero")
    b = Fraction(gate.bias)
    sums = [sum(w * xi for w, xi in zip(gate.weights, x)) + b for x in all_vectors(gate.fanin)]
    min_margin = min(abs(s) for s in sums)
    spread = max(sums) - min(sums)
    return Margins(min_margin, spread, min_margin / spread)


# ---------------------------------------------------------------- devices

@dataclass(frozen=True)
class DeviceModel:
    """Programmable resistive element.

    ``g_unit`` is the ON conductance standing for one unit of weight and
    ``g_off`` the OFF conductance; ``levels`` counts programmable states
    (2 for a binary MTJ).
    """

    name: str
    g_unit: float
    g_off: float
    levels: int

    def __post_init__(self):
        if not self.g_unit > self.g_off >= 0:
            raise ValueError(f"device {self.name}: need g_unit > g_off >= 0")
        if self.levels < 2:
            raise ValueError(f"device {self.name}: need at least 2 levels")

    @property
    def on_off_ratio(self) -> float:
        return self.g_unit / self.g_off if self.g_off > 0 else math.inf

    @property
    def g_step(self) -> float:
        return self.g_unit - self.g_off

    @property
    def max_weight(self) -> int:
        return self.levels - 1

    @classmethod
    def from_ratio(cls, name, g_unit, on_off_ratio, levels=2):
        g_off = 0.0 if math.isinf(on_off_ratio) else g_unit / on_off_ratio
        return cls(name, g_unit, g_off, levels)

    @classmethod
    def from_resistances(cls, name, r_on, r_off, levels=2):
        return cls(name, 1.0 / r_on, 0.0 if math.isinf(r_off) else 1.0 / r_off, levels)


G_UNIT = 10e-6

DEVICE_PRESETS = {
    "ideal": DeviceModel("ideal", G_UNIT, 0.0, 16),
    "mtj3": DeviceModel.from_ratio("mtj3", G_UNIT, 3.0, 2),
    "mtj4": DeviceModel.from_ratio("mtj4", G_UNIT, 4.0, 2),
    "domain-wall": DeviceModel.from_ratio("domain-wall", G_UNIT, 4.0, 4),
    "ag-si": DeviceModel.from_resistances("ag-si", 200.0, 10e6, 8),
}


_UNIT_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*(\S*)\s*$")
_SI_PREFIX = {"": 0, "n": -9, "u": -6, "m": -3, "k": 3, "M": 6}


def _split_unit(value, base_units):
    m = _UNIT_RE.match(str(value))
    if m:
        unit = m.group(2).replace("µ", "u").replace("μ", "u")
        for base in base_units:
            if unit.lower().endswith(base):
                prefix = unit[: len(unit) - len(base)]
                if prefix in _SI_PREFIX:
                    return float(Decimal(m.group(1)).scaleb(_SI_PREFIX[prefix]))
        if unit == "":
            return float(m.group(1))
    return None


def parse_conductance(value) -> float:
    """Siemens from a number or a string such as ``'10 µS'`` / ``'5mS'``."""
    if isinstance(value, (int, float)):
        return float(value)
    g = _split_unit(value, ("s",))
    if g is None:
        raise ValueError(f"cannot parse conductance {value!r}")
    return g


def parse_resistance(value) -> float:
    """Ohms from a number or a string such as ``'200 Ω'`` / ``'10 MOhm'``."""
    if isinstance(value, (int, float)):
        return float(value)
    r = _split_unit(value, ("ohm", "ω"))
    if r is None:
        raise ValueError(f"cannot parse resistance {value!r}")
    return r


def device_from_mapping(cfg: dict) -> DeviceModel:
    """Build a device from config keys.

    Accepts ``name``, ``levels`` and either ``g_unit`` (with ``g_off`` or
    ``on_off_ratio``) or ``r_on``/``r_off``.
    """
    name = cfg.get("name", "custom")
    levels = int(cfg.get("levels", 2))
    if "r_on" in cfg:
        r_off = parse_resistance(cfg["r_off"]) if "r_off" in cfg else math.inf
        return DeviceModel.from_resistances(name, parse_resistance(cfg["r_on"]), r_off, levels)
    g_unit = parse_conductance(cfg["g_unit"])
    if "g_off" in cfg:
        return DeviceModel(name, g_unit, parse_conductance(cfg["g_off"]), levels)
    ratio = float(cfg.get("on_off_ratio", math.inf))
    return DeviceModel.from_ratio(name, g_unit, ratio, levels)


def load_device(path) -> DeviceModel:
    """Read a device from a JSON object or ``key = value`` lines."""
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError:
        cfg = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                key, sep, val = line.partition(":")
            if not sep:
                raise ValueError(f"{path}: expected key = value, got {line!r}")
            cfg[key.strip()] = val.strip()
    return device_from_mapping(cfg)


def get_device(name_or_path: str) -> DeviceModel:
    if name_or_path in DEVICE_PRESETS:
        return DEVICE_PRESETS[name_or_path]
    if Path(name_or_path).is_file():
        return load_device(name_or_path)
    raise ValueError(f"unknown device {name_or_path!r}; presets: {sorted(DEVICE_PRESETS)}")


# ------------------------------------------------------- conductance pairs

@dataclass(frozen=True)
class ConductanceRealization:
    """Per-branch ``(g_plus, g_minus)``; the bias branch is always last."""

    branches: tuple[tuple[float, float], ...]

    @property
    def inputs(self):
        return self.branches[:-1]

    @property
    def bias(self):
        return self.branches[-1]

    @property
    def fanin(self) -> int:
        return len(self.branches) - 1


def _pair(value: float, device: DeviceModel) -> tuple[float, float]:
    on = abs(value) * device.g_step + device.g_off
    if value > 0:
        return on, device.g_off
    if value < 0:
        return device.g_off, on
    return device.g_off, device.g_off


def to_conductances(gate: ThresholdGate, device: DeviceModel) -> ConductanceRealization:
    """Program a gate onto a device.

    The ON side of each pair carries ``|w| * (g_unit - g_off) + g_off`` and the
    OFF side ``g_off``, so the pair difference is exactly proportional to the
    signed weight.  The bias branch additionally gets a half-unit step.
    """
    over = [w for w in gate.weights if abs(w) > device.max_weight]
    if over:
        raise ValueError(f"weights {over} exceed the {device.levels}-level range of {device.name}")
    if abs(gate.bias) > device.max_weight + 0.5:
        raise ValueError(f"bias {gate.bias} exceeds the {device.levels}-level range of {device.name}")
    branches = [_pair(w, device) for w in gate.weights]
    branches.append(_pair(gate.bias, device))
    return ConductanceRealization(tuple(branches))


class LatchTieError(ArithmeticError):
    pass


def path_conductances(real: ConductanceRealization, inputs) -> tuple[float, float]:
    x = tuple(inputs)
    if len(x) != real.fanin:
        raise ValueError(f"realization has fan-in {real.fanin}, got {len(x)} inputs")
    plus = real.bias[0] + sum(gp for (gp, _), b in zip(real.inputs, x) if b)
    minus = real.bias[1] + sum(gm for (_, gm), b in zip(real.inputs, x) if b)
    return plus, minus


def latch_evaluate(real: ConductanceRealization, inputs) -> int:
    plus, minus = path_conductances(real, inputs)
    if plus == minus:
        raise LatchTieError(f"latch tie at inputs {tuple(inputs)}: P = M = {plus}")
    return int(plus > minus)


def max_safe_relative_deviation(gate: ThresholdGate, device: DeviceModel) -> float:
    """Largest per-branch multiplicative error that can never flip the latch."""
    real = to_conductances(gate, device)
    worst = math.inf
    for x in all_vectors(gate.fanin):
        plus, minus = path_conductances(real, x)
        worst = min(worst, abs(plus - minus) / (plus + minus))
    return worst


def monte_carlo_failure_rate(gate, device, sigma, trials, seed, distribution="gaussian") -> float:
    """Fraction of trials in which some input vector is mis-evaluated.

    Each trial scales every branch conductance by an independent factor of
    mean 1 and standard deviation ``sigma``.  ``gaussian`` factors are clipped
    at 0; ``uniform`` factors lie in ``1 +- sigma*sqrt(3)``.  A latch tie counts
    as a failure.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    real = np.array(to_conductances(gate, device).branches)  # (n+1, 2)
    rng = np.random.default_rng(seed)
    shape = (trials,) + real.shape
    if distribution == "gaussian":
        factors = np.maximum(rng.normal(1.0, sigma, size=shape), 0.0)
    elif distribution == "uniform":
        half = sigma * math.sqrt(3.0)
        factors = rng.uniform(1.0 - half, 1.0 + half, size=shape)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    g = real * factors
    diff = g[:, :, 0] - g[:, :, 1]  # (trials, n+1)
    failed = np.zeros(trials, dtype=bool)
    for x in all_vectors(gate.fanin):
        active = np.array(x + (1,), dtype=float)
        d = diff @ active
        want = evaluate(gate, x)
        failed |= (d > 0) != bool(want)
        failed |= d == 0
    return float(failed.mean())


def reachable_functions(scheme: QuantizationScheme, n_inputs: int) -> set[tuple[int, ...]]:
    """Truth tables over ``n_inputs`` variables realizable by one scheme gate.

    A gate may read any ordered selection of distinct variables up to the
    fan-in limit.
    """
    tables = set()
    mags = sorted(scheme.weight_magnitudes)
    signed = [s * m for m in mags for s in (1, -1)]
    for k in range(1, min(scheme.fanin_limit, n_inputs) + 1):
        for sel in itertools.permutations(range(n_inputs), k):
            for ws in itertools.product(signed, repeat=k):
                for b in scheme.bias_levels:
                    gate = ThresholdGate(ws, b)
                    tables.add(tuple(evaluate(gate, [x[i] for i in sel]) for x in all_vectors(n_inputs)))
    return tables

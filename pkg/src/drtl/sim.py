"""Cycle-accurate simulation of pipelined TLG networks.

Each stage is a bank of registers clocked once per cycle.  Stage ``k`` at
cycle ``t`` latches the function of stage ``k-1``'s registers from cycle
``t-1``; stage 1 reads the inputs applied at cycle ``t``.  Outputs are
``NOT_READY`` until the first injected vector has reached the last stage.

Two engines share these semantics: :class:`PipelineSimulator` steps one
cycle at a time, while :func:`run_stream` processes a whole stimulus stream
stage by stage with numpy (stage ``k`` of the stream is stage ``k-1``
shifted by one cycle).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .netlist import BoolNetwork, eval_batch
from .pipeline import PipelinedNetwork
from .tlg import DEVICE_PRESETS, DeviceModel, evaluate, latch_evaluate, to_conductances

NOT_READY = None


@dataclass
class SimState:
    registers: list[dict]  # one {net: bit} per stage 1..depth
    cycle: int = 0
    filled: int = 0  # how many stages hold valid data

    @classmethod
    def reset(cls, p: PipelinedNetwork) -> "SimState":
        return cls([dict.fromkeys(p.stage_outputs(k + 1), 0) for k in range(p.depth)])


@dataclass
class _Compiled:
    p: PipelinedNetwork
    device: DeviceModel | None
    evals: list = field(default_factory=list)

    def __post_init__(self):
        for stage in self.p.stages:
            fns = []
            for n in stage:
                if self.device is None:
                    fns.append((n.output, n.inputs, lambda x, g=n.gate: evaluate(g, x)))
                else:
                    real = to_conductances(n.gate, self.device)
                    fns.append((n.output, n.inputs, lambda x, r=real: latch_evaluate(r, x)))
            self.evals.append(fns)


def step(p: PipelinedNetwork, state: SimState, inputs, device: DeviceModel | None = None, _compiled=None):
    """Advance one clock.  Returns ``(new_state, outputs)``; outputs is NOT_READY
    until ``depth`` vectors have entered the pipeline.
    """
    x = tuple(int(b) for b in inputs)
    if len(x) != len(p.primary_inputs):
        raise ValueError(f"expected {len(p.primary_inputs)} input bits, got {len(x)}")
    comp = _compiled or _Compiled(p, device)
    prev = dict(zip(p.primary_inputs, x))
    new_regs = []
    for k, fns in enumerate(comp.evals):
        regs = {out: fn([prev[i] for i in ins]) for out, ins, fn in fns}
        new_regs.append(regs)
        prev = state.registers[k]
    filled = min(state.filled + 1, p.depth)
    new = SimState(new_regs, state.cycle + 1, filled)
    if filled < p.depth or p.depth == 0:
        return new, NOT_READY
    last = new_regs[-1]
    return new, tuple(last[n] for n in p.output_nets)


class PipelineSimulator:
    def __init__(self, p: PipelinedNetwork, device: DeviceModel | str | None = None):
        if isinstance(device, str):
            device = DEVICE_PRESETS[device]
        self.p = p
        self._compiled = _Compiled(p, device)
        self.state = SimState.reset(p)

    @property
    def cycle(self):
        return self.state.cycle

    def step(self, inputs):
        self.state, out = step(self.p, self.state, inputs, _compiled=self._compiled)
        return out

    def run(self, stream):
        return [self.step(v) for v in stream]


def _stage_eval(n, ins, device):
    """Evaluate one node over whole bit arrays."""
    if device is None:
        s = np.full(ins[0].shape, n.gate.bias)
        for w, x in zip(n.gate.weights, ins):
            s = s + w * x
        return s > 0
    real = to_conductances(n.gate, device)
    plus = np.full(ins[0].shape, real.bias[0])
    minus = np.full(ins[0].shape, real.bias[1])
    for (gp, gm), x in zip(real.inputs, ins):
        plus = plus + gp * x
        minus = minus + gm * x
    if np.any(plus == minus):
        raise ArithmeticError(f"latch tie in node '{n.output}'")
    return plus > minus


def run_stream(p: PipelinedNetwork, stimulus, device: DeviceModel | str | None = None, flush=True):
    """Simulate back-to-back vectors, one per cycle.

    Returns ``(outputs, valid)`` with one row per simulated cycle ``1..T'``:
    ``outputs[c-1]`` is what the final stage holds after clock ``c`` and
    ``valid[c-1]`` is False inside the NOT_READY window.  With ``flush`` the
    stream is extended by ``depth - 1`` idle (all-zero) cycles so the response
    to every vector is visible.
    """
    if isinstance(device, str):
        device = DEVICE_PRESETS[device]
    stim = np.asarray(stimulus, dtype=bool).reshape(-1, len(p.primary_inputs))
    n_cycles = len(stim) + (max(p.depth - 1, 0) if flush else 0)
    inputs = np.zeros((n_cycles, len(p.primary_inputs)), dtype=bool)
    inputs[: len(stim)] = stim
    # values[net][c] = register content after clock c+1 (c = 0..n_cycles-1)
    prev = {pi: inputs[:, i] for i, pi in enumerate(p.primary_inputs)}
    zero = np.zeros(1, dtype=bool)
    for k, stage in enumerate(p.stages, start=1):
        cur = {}
        for n in stage:
            cur[n.output] = _stage_eval(n, [prev[i] for i in n.inputs], device)
        # the next stage sees these values one clock later; registers start at 0
        prev = {net: np.concatenate([zero, v[:-1]]) for net, v in cur.items()}
        last = cur
    if p.depth == 0:
        return np.zeros((n_cycles, 0), dtype=bool), np.zeros(n_cycles, dtype=bool)
    out = np.stack([last[net] for net in p.output_nets], axis=1) if p.output_nets else np.zeros((n_cycles, 0), bool)
    valid = np.arange(1, n_cycles + 1) >= p.depth
    return out, valid


def write_stimulus(path, vectors):
    lines = ["".join("1" if b else "0" for b in v) for v in np.asarray(vectors, dtype=bool)]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_stimulus(path, width=None) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"} or (width is not None and len(line) != width):
            raise ValueError(f"{path}:{lineno}: expected a {width or ''}-bit 01-string, got {line!r}")
        rows.append([c == "1" for c in line])
    return np.array(rows, dtype=bool).reshape(len(rows), width if width is not None else (len(rows[0]) if rows else 0))


def format_response(outputs, valid) -> list[str]:
    return ["".join("1" if b else "0" for b in row) if ok else "X" * len(row)
            for row, ok in zip(np.asarray(outputs), valid)]


@dataclass(frozen=True)
class Verdict:
    passed: bool
    vectors_checked: int
    vector: tuple | None = None
    expected: tuple | None = None
    actual: tuple | None = None

    def __bool__(self):
        return self.passed

    def as_dict(self):
        d = {"verdict": "pass" if self.passed else "fail", "vectors_checked": self.vectors_checked}
        if not self.passed:
            d.update(counterexample=list(self.vector), expected=list(self.expected), actual=list(self.actual))
        return d


EXHAUSTIVE_LIMIT = 20


def equivalence_check(ref: BoolNetwork, p: PipelinedNetwork, mode="exhaustive", count=10_000, seed=1,
                      device=None, chunk=1 << 16) -> Verdict:
    """Stream vectors through ``p`` and compare the shifted response with ``ref``.

    ``mode`` is ``"exhaustive"`` (all 2^n vectors, n <= 20) or ``"random"``
    (``count`` uniform vectors drawn from ``seed``).
    """
    if set(ref.primary_inputs) != set(p.primary_inputs) or set(ref.primary_outputs) != set(p.primary_outputs):
        raise ValueError("primary input/output names differ between reference and pipelined network")
    n = len(p.primary_inputs)
    perm_in = [ref.primary_inputs.index(pi) for pi in p.primary_inputs]
    perm_out = [p.primary_outputs.index(po) for po in ref.primary_outputs]
    if mode == "exhaustive":
        if n > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive mode needs <= {EXHAUSTIVE_LIMIT} primary inputs, got {n}")
        vectors = np.array(list(product((0, 1), repeat=n)), dtype=bool).reshape(2 ** n, n)
    elif mode == "random":
        vectors = np.random.default_rng(seed).integers(0, 2, size=(count, n)).astype(bool)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    checked = 0
    for start in range(0, len(vectors), chunk):
        block = vectors[start:start + chunk]
        out, valid = run_stream(p, block, device)
        got = out[max(p.depth - 1, 0):][: len(block)][:, perm_out]
        assert valid[max(p.depth - 1, 0):].all()
        want = eval_batch(ref, block[:, perm_in])
        bad = np.nonzero((got != want).any(axis=1))[0]
        if len(bad):
            i = int(bad[0])
            return Verdict(False, checked + i + 1, tuple(int(b) for b in block[i][perm_in]),
                           tuple(int(b) for b in want[i]), tuple(int(b) for b in got[i]))
        checked += len(block)
    return Verdict(True, checked)

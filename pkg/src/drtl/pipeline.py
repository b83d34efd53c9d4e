"""Fully pipelined TLG networks.

Every gate is a clocked latch, so each TLG is its own pipeline stage.  Nodes
are placed ASAP and any edge that would skip stages is padded with buffer
TLGs; all primary outputs are padded out to the last stage.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .netlist import NetlistError
from .synth import TlgNetwork, TlgNode, format_node, parse_decl, parse_node
from .tlg import BUF

CLOCK_PERIOD_NS = 0.5


@dataclass(frozen=True)
class PipelinedNetwork:
    """``stages[k]`` holds the nodes of stage ``k + 1``; stage 0 is the PI register.

    ``output_nets[i]`` is the final-stage net carrying ``primary_outputs[i]``
    (a buffered copy when the output was computed early).
    """

    primary_inputs: tuple[str, ...]
    primary_outputs: tuple[str, ...]
    stages: tuple[tuple[TlgNode, ...], ...]
    clock_period: float = CLOCK_PERIOD_NS
    output_nets: tuple[str, ...] = None

    def __post_init__(self):
        object.__setattr__(self, "primary_inputs", tuple(self.primary_inputs))
        object.__setattr__(self, "primary_outputs", tuple(self.primary_outputs))
        object.__setattr__(self, "stages", tuple(tuple(s) for s in self.stages))
        nets = self.primary_outputs if self.output_nets is None else tuple(self.output_nets)
        if len(nets) != len(self.primary_outputs):
            raise ValueError("output_nets must match primary_outputs")
        object.__setattr__(self, "output_nets", nets)
        if not self.clock_period > 0:
            raise ValueError("clock_period must be positive")
        prev = set(self.primary_inputs)
        if len(prev) != len(self.primary_inputs):
            raise NetlistError("duplicate primary input")
        seen = set(prev)
        for k, stage in enumerate(self.stages, start=1):
            produced = set()
            for n in stage:
                for net in n.inputs:
                    if net not in prev:
                        raise NetlistError(f"stage {k} node '{n.output}' reads '{net}', not produced by stage {k - 1}")
                if n.output in seen:
                    raise NetlistError(f"net '{n.output}' has more than one driver")
                seen.add(n.output)
                produced.add(n.output)
            prev = produced
        missing = [p for p in self.output_nets if p not in prev]
        if missing:
            raise NetlistError(f"primary outputs {missing} not produced by the final stage")

    @property
    def depth(self) -> int:
        return len(self.stages)

    @property
    def nodes(self) -> list[TlgNode]:
        return [n for s in self.stages for n in s]

    def stage_outputs(self, k: int) -> tuple[str, ...]:
        if k == 0:
            return self.primary_inputs
        return tuple(n.output for n in self.stages[k - 1])

    def buffer_count(self) -> int:
        return sum(1 for n in self.nodes if "__b" in n.output and n.gate == BUF)


def levelize(net: TlgNetwork, clock_period: float = CLOCK_PERIOD_NS) -> PipelinedNetwork:
    """ASAP staging with shared buffer chains on long edges."""
    order = net.ordered_nodes()
    level = {p: 0 for p in net.primary_inputs}
    for n in order:
        level[n.output] = 1 + max(level[i] for i in n.inputs)
    depth = max((level[n.output] for n in order), default=0)
    if net.primary_outputs:
        depth = max(depth, 1)

    # latest stage at which each net must be readable (i.e. held in a register)
    need = {}
    for n in order:
        s = level[n.output]
        for i in n.inputs:
            need[i] = max(need.get(i, 0), s - 1)
    for po in net.primary_outputs:
        need[po] = depth

    taken = set(level)
    stages = [[] for _ in range(depth)]
    alias = {}  # (net, stage) -> name of the copy registered at that stage

    def copy_name(net_name, s):
        name = f"{net_name}__b{s}"
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    sources = list(net.primary_inputs) + [n.output for n in order]
    for src in sources:
        alias[(src, level[src])] = src
        prev = src
        for s in range(level[src] + 1, need.get(src, 0) + 1):
            b = copy_name(src, s)
            stages[s - 1].append(TlgNode(b, BUF, (prev,)))
            alias[(src, s)] = b
            prev = b
    for n in order:
        s = level[n.output]
        ins = tuple(alias[(i, s - 1)] for i in n.inputs)
        stages[s - 1].append(TlgNode(n.output, n.gate, ins))
    _stable_sort(stages)
    return PipelinedNetwork(
        net.primary_inputs, net.primary_outputs, tuple(tuple(s) for s in stages), clock_period,
        tuple(alias[(po, depth)] for po in net.primary_outputs))


def _stable_sort(stages):
    # logic nodes first, then buffers, each in creation order
    for k, s in enumerate(stages):
        stages[k] = [n for n in s if not _is_buffer(n)] + [n for n in s if _is_buffer(n)]


def _is_buffer(n: TlgNode) -> bool:
    return n.gate == BUF and "__b" in n.output


@dataclass(frozen=True)
class TimingReport:
    depth: int
    latency: float
    throughput_period: float

    @property
    def throughput_ghz(self) -> float:
        return 1.0 / self.throughput_period

    def as_dict(self):
        return {"depth": self.depth, "latency_ns": self.latency,
                "throughput_period_ns": self.throughput_period,
                "throughput_ghz": self.throughput_ghz}


def timing_report(p: PipelinedNetwork) -> TimingReport:
    return TimingReport(p.depth, p.depth * p.clock_period, p.clock_period)


# ------------------------------------------------------------- text format

_STAGE_RE = re.compile(r"^\s*STAGE\s+(\d+)\s*$", re.IGNORECASE)
_OUT_ALIAS_RE = re.compile(r"^\s*OUTPUT\s*\(\s*(\S+?)\s*\)\s*=\s*(\S+)\s*$", re.IGNORECASE)
_CLOCK_RE = re.compile(r"^\s*CLOCK_NS\s*\(\s*([0-9.eE+-]+)\s*\)\s*$", re.IGNORECASE)


def serialize_pipeline(p: PipelinedNetwork) -> str:
    lines = [f"CLOCK_NS({p.clock_period!r})"]
    lines += [f"INPUT({n})" for n in p.primary_inputs]
    lines += [f"OUTPUT({po})" if po == net else f"OUTPUT({po}) = {net}"
              for po, net in zip(p.primary_outputs, p.output_nets)]
    for k, stage in enumerate(p.stages, start=1):
        lines.append(f"STAGE {k}")
        lines += [format_node(n) for n in stage]
    return "\n".join(lines) + "\n"


def parse_pipeline(text: str) -> PipelinedNetwork:
    pis, pos, out_nets, stages = [], [], [], []
    clock = CLOCK_PERIOD_NS
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _STAGE_RE.match(line)
        if m:
            k = int(m.group(1))
            if k != len(stages) + 1:
                raise NetlistError(f"expected STAGE {len(stages) + 1}, got STAGE {k}", lineno)
            stages.append([])
            continue
        m = _CLOCK_RE.match(line)
        if m:
            clock = float(m.group(1))
            continue
        m = _OUT_ALIAS_RE.match(line)
        if m:
            pos.append(m.group(1))
            out_nets.append(m.group(2))
            continue
        decl = parse_decl(line)
        if decl:
            if decl[0] == "INPUT":
                pis.append(decl[1])
            else:
                pos.append(decl[1])
                out_nets.append(decl[1])
            continue
        if not stages:
            raise NetlistError("node before the first STAGE header", lineno)
        stages[-1].append(parse_node(line, lineno))
    return PipelinedNetwork(tuple(pis), tuple(pos), tuple(tuple(s) for s in stages), clock, tuple(out_nets))


def load_pipeline(path) -> PipelinedNetwork:
    return parse_pipeline(Path(path).read_text())

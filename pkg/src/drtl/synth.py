"""Boolean network -> threshold-logic network.

Synthesis is a library mapping: wide gates are first split into minimum-depth
trees under the fan-in limit, then every gate maps onto one TLG, except XOR
(three TLGs) and XNOR (XOR plus an inverter).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .netlist import BoolGate, BoolNetwork, GateKind, NetlistError, topological_order, _kahn
from .tlg import (
    AND2, BUF, NOT, OR2, XOR_COMBINE, DEFAULT_SCHEME, QuantizationScheme, ThresholdGate, evaluate,
    uniform_scheme,
)


@dataclass(frozen=True)
class TlgNode:
    output: str
    gate: ThresholdGate
    inputs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if len(self.inputs) != self.gate.fanin:
            raise ValueError(f"node '{self.output}': {len(self.inputs)} inputs for fan-in {self.gate.fanin}")


@dataclass(frozen=True)
class TlgNetwork:
    primary_inputs: tuple[str, ...]
    primary_outputs: tuple[str, ...]
    nodes: tuple[TlgNode, ...]

    def __post_init__(self):
        object.__setattr__(self, "primary_inputs", tuple(self.primary_inputs))
        object.__setattr__(self, "primary_outputs", tuple(self.primary_outputs))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        drivers = {}
        for p in self.primary_inputs:
            if p in drivers:
                raise NetlistError(f"net '{p}' declared INPUT twice")
            drivers[p] = -1
        for i, n in enumerate(self.nodes):
            if n.output in drivers:
                raise NetlistError(f"net '{n.output}' has more than one driver")
            drivers[n.output] = i
        for n in self.nodes:
            for net in n.inputs:
                if net not in drivers:
                    raise NetlistError(f"net '{net}' (input of '{n.output}') is not driven")
        for po in self.primary_outputs:
            if po not in drivers:
                raise NetlistError(f"primary output '{po}' is not driven")
        _kahn(self.nodes, drivers)

    def check_scheme(self, scheme: QuantizationScheme):
        for n in self.nodes:
            scheme.validate(n.gate)

    def ordered_nodes(self) -> list[TlgNode]:
        drivers = {p: -1 for p in self.primary_inputs}
        drivers.update({n.output: i for i, n in enumerate(self.nodes)})
        return [self.nodes[i] for i in _kahn(self.nodes, drivers)]


def eval_tlg(net: TlgNetwork, assignment) -> tuple[int, ...]:
    """Combinational evaluation of a TLG network on one input vector."""
    bits = [int(b) for b in assignment]
    if len(bits) != len(net.primary_inputs):
        raise ValueError(f"expected {len(net.primary_inputs)} input bits, got {len(bits)}")
    values = dict(zip(net.primary_inputs, bits))
    for n in net.ordered_nodes():
        values[n.output] = evaluate(n.gate, [values[i] for i in n.inputs])
    return tuple(values[o] for o in net.primary_outputs)


# ------------------------------------------------------------ decomposition

def _tree_groups(n: int, limit: int) -> list[int]:
    """Sizes of the leftmost groups to merge so the rest fits in one less level."""
    room = 1
    while room * limit < n:
        room *= limit
    reduce_by = n - room
    sizes = [limit] * (reduce_by // (limit - 1))
    if reduce_by % (limit - 1):
        sizes.append(reduce_by % (limit - 1) + 1)
    return sizes


def _build_tree(ins, limit, root_kind, inner_kind, name, new_name):
    """Minimum-depth, minimum-count tree; inversion (if any) only at the root."""
    frontier = list(ins)
    gates = []
    while len(frontier) > limit:
        nxt, pos = [], 0
        for size in _tree_groups(len(frontier), limit):
            t = new_name()
            gates.append(BoolGate(t, inner_kind, tuple(frontier[pos:pos + size])))
            nxt.append(t)
            pos += size
        frontier = nxt + frontier[pos:]
    gates.append(BoolGate(name, root_kind, tuple(frontier)))
    return gates


def decompose_fanin(net: BoolNetwork, limit: int) -> BoolNetwork:
    """Split gates wider than ``limit`` into balanced trees.

    XOR/XNOR are always split to 2-input trees since the library only holds a
    2-input XOR.  Internal nets are named ``<orignet>__t<k>``.
    """
    if limit < 2:
        raise ValueError("fan-in limit must be >= 2")
    taken = set(net.nets)
    out = []
    for g in net.gates:
        width = 2 if g.kind.base is GateKind.XOR else limit
        if len(g.inputs) <= width:
            out.append(g)
            continue
        counter = iter(range(10**9))

        def new_name(base=g.output):
            while True:
                cand = f"{base}__t{next(counter)}"
                if cand not in taken:
                    taken.add(cand)
                    return cand

        out += _build_tree(g.inputs, width, g.kind, g.kind.base, g.output, new_name)
    return BoolNetwork(net.primary_inputs, net.primary_outputs, tuple(out))


# ------------------------------------------------------------------ mapping

class SynthesisError(ValueError):
    pass


def library_gate(kind: GateKind, k: int) -> ThresholdGate:
    """Threshold gate for a ``k``-input AND/OR/NAND/NOR, or NOT/BUF."""
    if kind is GateKind.NOT:
        return NOT
    if kind is GateKind.BUF:
        return BUF
    if kind is GateKind.AND:
        return ThresholdGate((1,) * k, -(k - 0.5))
    if kind is GateKind.OR:
        return ThresholdGate((1,) * k, -0.5)
    if kind is GateKind.NAND:
        return ThresholdGate((-1,) * k, k - 0.5)
    if kind is GateKind.NOR:
        return ThresholdGate((-1,) * k, 0.5)
    raise SynthesisError(f"no single-TLG library cell for {kind.value}")


def synthesize(net: BoolNetwork, scheme: QuantizationScheme = DEFAULT_SCHEME) -> TlgNetwork:
    """Map a fan-in-decomposed network gate by gate onto scheme-conformant TLGs."""
    taken = set(net.nets)

    def fresh(base, tag):
        name = f"{base}__{tag}"
        while name in taken:
            name += "_"
        taken.add(name)
        return name

    nodes = []
    for g in topological_order(net):
        if len(g.inputs) > scheme.fanin_limit:
            raise SynthesisError(
                f"gate '{g.output}' has fan-in {len(g.inputs)} > {scheme.fanin_limit}; run decompose_fanin first")
        if g.kind.base is GateKind.XOR:
            if len(g.inputs) != 2:
                raise SynthesisError(f"XOR/XNOR '{g.output}' must be 2-input")
            a, b = g.inputs
            n_and, n_or = fresh(g.output, "x0"), fresh(g.output, "x1")
            nodes += [TlgNode(n_and, AND2, (a, b)), TlgNode(n_or, OR2, (a, b))]
            if g.kind is GateKind.XOR:
                nodes.append(TlgNode(g.output, XOR_COMBINE, (n_and, n_or)))
            else:
                n_xor = fresh(g.output, "x2")
                nodes.append(TlgNode(n_xor, XOR_COMBINE, (n_and, n_or)))
                nodes.append(TlgNode(g.output, NOT, (n_xor,)))
        else:
            nodes.append(TlgNode(g.output, library_gate(g.kind, len(g.inputs)), g.inputs))
    for n in nodes:
        errs = scheme.violations(n.gate)
        if errs:
            raise SynthesisError(f"scheme cannot express {n.gate} for '{n.output}': " + "; ".join(errs))
    return TlgNetwork(net.primary_inputs, net.primary_outputs, tuple(nodes))


def compile_network(net: BoolNetwork, scheme: QuantizationScheme = DEFAULT_SCHEME) -> TlgNetwork:
    return synthesize(decompose_fanin(net, max(2, scheme.fanin_limit)), scheme)


def node_count_study(net: BoolNetwork, limits=(2, 3, 4), schemes=None) -> dict[int, int]:
    schemes = schemes or {}
    counts = {}
    for k in limits:
        scheme = schemes.get(k) or uniform_scheme(k)
        counts[k] = len(compile_network(net, scheme).nodes)
    return counts


# ------------------------------------------------------------- text format

_ID = r"[A-Za-z0-9_.\[\]]+"
_NODE_RE = re.compile(
    rf"^\s*({_ID})\s*=\s*TLG\s*\(\s*\[([^\]]*)\]\s*,\s*([-+0-9.]+)\s*\)\s*\(([^)]*)\)\s*$",
    re.IGNORECASE)
_DECL_RE = re.compile(rf"^\s*(INPUT|OUTPUT)\s*\(\s*({_ID})\s*\)\s*$", re.IGNORECASE)


class TlgFormatError(NetlistError):
    pass


def format_node(n: TlgNode) -> str:
    return f"{n.output} = {n.gate}({', '.join(n.inputs)})"


def serialize_tlg(net: TlgNetwork) -> str:
    lines = [f"INPUT({p})" for p in net.primary_inputs]
    lines += [f"OUTPUT({p})" for p in net.primary_outputs]
    lines += [format_node(n) for n in net.nodes]
    return "\n".join(lines) + "\n"


def parse_node(line: str, lineno=None) -> TlgNode:
    m = _NODE_RE.match(line)
    if not m:
        raise TlgFormatError(f"cannot parse {line.strip()!r}", lineno)
    out, ws, b, ins = m.groups()
    try:
        weights = tuple(int(w) for w in ws.split(",") if w.strip())
        gate = ThresholdGate(weights, b)
        return TlgNode(out, gate, tuple(i.strip() for i in ins.split(",") if i.strip()))
    except ValueError as e:
        raise TlgFormatError(str(e), lineno) from None


def parse_decl(line: str):
    m = _DECL_RE.match(line)
    return (m.group(1).upper(), m.group(2)) if m else None


def parse_tlg(text: str) -> TlgNetwork:
    pis, pos, nodes = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        decl = parse_decl(line)
        if decl:
            (pis if decl[0] == "INPUT" else pos).append(decl[1])
        else:
            nodes.append(parse_node(line, lineno))
    return TlgNetwork(tuple(pis), tuple(pos), tuple(nodes))


def load_tlg(path) -> TlgNetwork:
    return parse_tlg(Path(path).read_text())

"""Boolean netlists in ISCAS ``.bench`` form.

The :class:`BoolNetwork` parsed here is the functional reference for every
later stage of the flow: synthesis, pipelining and simulation are all
checked against :func:`eval_reference` / :func:`eval_batch`.
"""

from __future__ import annotations

import heapq
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class GateKind(str, Enum):
    AND = "AND"
    NAND = "NAND"
    OR = "OR"
    NOR = "NOR"
    XOR = "XOR"
    XNOR = "XNOR"
    NOT = "NOT"
    BUF = "BUF"

    @property
    def unary(self) -> bool:
        return self in (GateKind.NOT, GateKind.BUF)

    @property
    def inverting(self) -> bool:
        return self in (GateKind.NAND, GateKind.NOR, GateKind.XNOR, GateKind.NOT)

    @property
    def base(self) -> "GateKind":
        """Non-inverting counterpart (NAND -> AND, NOT -> BUF, ...)."""
        return _BASE[self]


_BASE = {
    GateKind.AND: GateKind.AND, GateKind.NAND: GateKind.AND,
    GateKind.OR: GateKind.OR, GateKind.NOR: GateKind.OR,
    GateKind.XOR: GateKind.XOR, GateKind.XNOR: GateKind.XOR,
    GateKind.NOT: GateKind.BUF, GateKind.BUF: GateKind.BUF,
}

_KIND_ALIASES = {"BUFF": GateKind.BUF}


class NetlistError(ValueError):
    """Structural problem in a netlist (raised for the whole file)."""

    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "") + ": "
        super().__init__(where + msg)


class BenchSyntaxError(NetlistError):
    pass


class DuplicateDriverError(NetlistError):
    pass


class UndrivenNetError(NetlistError):
    pass


class CycleError(NetlistError):
    pass


class ArityError(NetlistError):
    pass


@dataclass(frozen=True)
class BoolGate:
    output: str
    kind: GateKind
    inputs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        check_arity(self.kind, len(self.inputs), self.output)


def check_arity(kind: GateKind, n: int, output="?", line=None):
    if kind.unary and n != 1:
        raise ArityError(f"{kind.value} gate '{output}' needs exactly 1 input, got {n}", line)
    if not kind.unary and n < 2:
        raise ArityError(f"{kind.value} gate '{output}' needs at least 2 inputs, got {n}", line)


@dataclass(frozen=True)
class BoolNetwork:
    """Immutable DAG of Boolean gates.

    Construction validates single drivers, driven fan-ins/outputs and
    acyclicity; an invalid network cannot exist.
    """

    primary_inputs: tuple[str, ...]
    primary_outputs: tuple[str, ...]
    gates: tuple[BoolGate, ...]
    _order: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "primary_inputs", tuple(self.primary_inputs))
        object.__setattr__(self, "primary_outputs", tuple(self.primary_outputs))
        object.__setattr__(self, "gates", tuple(self.gates))
        drivers = {}
        for pi in self.primary_inputs:
            if pi in drivers:
                raise DuplicateDriverError(f"net '{pi}' declared INPUT twice")
            drivers[pi] = -1
        for i, g in enumerate(self.gates):
            if g.output in drivers:
                raise DuplicateDriverError(f"net '{g.output}' has more than one driver")
            drivers[g.output] = i
        for g in self.gates:
            for net in g.inputs:
                if net not in drivers:
                    raise UndrivenNetError(f"net '{net}' (input of '{g.output}') is not driven")
        for po in self.primary_outputs:
            if po not in drivers:
                raise UndrivenNetError(f"primary output '{po}' is not driven")
        object.__setattr__(self, "_order", _kahn(self.gates, drivers))

    @property
    def nets(self) -> tuple[str, ...]:
        return self.primary_inputs + tuple(g.output for g in self.gates)

    def driver(self, net: str) -> BoolGate | None:
        for g in self.gates:
            if g.output == net:
                return g
        if net in self.primary_inputs:
            return None
        raise KeyError(net)


def _kahn(gates, drivers) -> tuple[int, ...]:
    indeg = [0] * len(gates)
    users = [[] for _ in gates]
    for i, g in enumerate(gates):
        for net in g.inputs:
            src = drivers[net]
            if src >= 0:
                indeg[i] += 1
                users[src].append(i)
    ready = [i for i, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for j in users[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, j)
    if len(order) != len(gates):
        stuck = sorted(gates[i].output for i, d in enumerate(indeg) if d > 0)
        raise CycleError("combinational cycle through " + ", ".join(stuck[:8]))
    return tuple(order)


_ID = r"[A-Za-z0-9_.\[\]]+"
_DECL_RE = re.compile(rf"^\s*(INPUT|OUTPUT)\s*\(\s*({_ID})\s*\)\s*$", re.IGNORECASE)
_GATE_RE = re.compile(rf"^\s*({_ID})\s*=\s*([A-Za-z]+)\s*\(\s*(.*?)\s*\)\s*$")
_ID_RE = re.compile(rf"^{_ID}$")


def parse_bench(text: str) -> BoolNetwork:
    """Parse ``.bench`` text into a validated :class:`BoolNetwork`."""
    inputs, outputs, gates = [], [], []
    seen_out = set()
    where = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _DECL_RE.match(line)
        if m:
            kw, net = m.group(1).upper(), m.group(2)
            if kw == "INPUT":
                if net in where:
                    raise DuplicateDriverError(f"net '{net}' already driven", lineno)
                where[net] = lineno
                inputs.append(net)
            else:
                if net in seen_out:
                    raise NetlistError(f"OUTPUT({net}) declared twice", lineno)
                seen_out.add(net)
                outputs.append(net)
            continue
        m = _GATE_RE.match(line)
        if not m:
            raise BenchSyntaxError(f"cannot parse {line.strip()!r}", lineno, _error_col(line))
        out, op, args = m.groups()
        kind_name = op.upper()
        kind = _KIND_ALIASES.get(kind_name)
        if kind is None:
            try:
                kind = GateKind(kind_name)
            except ValueError:
                raise BenchSyntaxError(f"unknown gate type '{op}'", lineno, m.start(2) + 1) from None
        ins = [a.strip() for a in args.split(",")] if args else []
        for a in ins:
            if not _ID_RE.match(a):
                raise BenchSyntaxError(f"bad net identifier {a!r}", lineno, m.start(3) + 1)
        check_arity(kind, len(ins), out, lineno)
        if out in where:
            raise DuplicateDriverError(f"net '{out}' already driven (line {where[out]})", lineno)
        where[out] = lineno
        gates.append(BoolGate(out, kind, tuple(ins)))
    try:
        return BoolNetwork(tuple(inputs), tuple(outputs), tuple(gates))
    except NetlistError as e:
        net = re.search(r"'([^']+)'", str(e))
        if net and net.group(1) in where and e.line is None:
            e.line = where[net.group(1)]
        raise


def _error_col(line: str) -> int:
    # first character that cannot belong to a well-formed statement prefix
    m = re.match(rf"\s*{_ID}\s*(=\s*[A-Za-z]+\s*\()?", line)
    return (m.end() if m else 0) + 1


def load_bench(path) -> BoolNetwork:
    return parse_bench(Path(path).read_text())


def serialize_bench(net: BoolNetwork) -> str:
    lines = [f"INPUT({n})" for n in net.primary_inputs]
    lines += [f"OUTPUT({n})" for n in net.primary_outputs]
    lines += [f"{g.output} = {g.kind.value}({', '.join(g.inputs)})" for g in net.gates]
    return "\n".join(lines) + "\n"


def topological_order(net: BoolNetwork) -> list[BoolGate]:
    """Gates such that every gate follows its drivers; ties by declaration order."""
    return [net.gates[i] for i in net._order]


def _apply(kind: GateKind, vals):
    base = kind.base
    if base is GateKind.BUF:
        out = vals[0]
    elif base is GateKind.AND:
        out = all(vals)
    elif base is GateKind.OR:
        out = any(vals)
    else:
        out = sum(vals) % 2 == 1
    return int(bool(out) ^ kind.inverting)


def _check_assignment(net: BoolNetwork, assignment):
    if isinstance(assignment, dict):
        missing = [p for p in net.primary_inputs if p not in assignment]
        extra = [k for k in assignment if k not in set(net.primary_inputs)]
        if missing or extra:
            raise ValueError(f"assignment mismatch: missing={missing} extra={extra}")
        return {p: int(assignment[p]) for p in net.primary_inputs}
    bits = list(assignment)
    if len(bits) != len(net.primary_inputs):
        raise ValueError(f"expected {len(net.primary_inputs)} input bits, got {len(bits)}")
    return dict(zip(net.primary_inputs, (int(b) for b in bits)))


def eval_reference(net: BoolNetwork, assignment) -> tuple[int, ...]:
    """Evaluate one input vector with plain Boolean semantics.

    ``assignment`` is either a mapping PI -> bit or a sequence of bits in
    primary-input order. Returns output bits in primary-output order.
    """
    values = _check_assignment(net, assignment)
    for g in topological_order(net):
        values[g.output] = _apply(g.kind, [values[i] for i in g.inputs])
    return tuple(values[o] for o in net.primary_outputs)


def eval_batch(net: BoolNetwork, vectors: np.ndarray) -> np.ndarray:
    """Vectorized :func:`eval_reference` over rows of a (T, n_pi) bit array."""
    vectors = np.asarray(vectors, dtype=bool)
    if vectors.ndim != 2 or vectors.shape[1] != len(net.primary_inputs):
        raise ValueError(f"expected shape (T, {len(net.primary_inputs)}), got {vectors.shape}")
    values = {p: vectors[:, i] for i, p in enumerate(net.primary_inputs)}
    for g in topological_order(net):
        ins = [values[i] for i in g.inputs]
        base = g.kind.base
        if base is GateKind.BUF:
            out = ins[0]
        elif base is GateKind.AND:
            out = np.logical_and.reduce(ins)
        elif base is GateKind.OR:
            out = np.logical_or.reduce(ins)
        else:
            out = np.logical_xor.reduce(ins)
        values[g.output] = ~out if g.kind.inverting else out
    if not net.primary_outputs:
        return np.zeros((len(vectors), 0), dtype=bool)
    return np.stack([values[o] for o in net.primary_outputs], axis=1)


@dataclass(frozen=True)
class NetworkStats:
    gates_by_kind: dict
    n_gates: int
    n_nets: int
    n_inputs: int
    n_outputs: int
    max_fanin: int
    max_fanout: int
    depth: int

    def as_dict(self):
        return {
            "inputs": self.n_inputs, "outputs": self.n_outputs,
            "gates": self.n_gates, "nets": self.n_nets,
            "gates_by_kind": dict(self.gates_by_kind),
            "max_fanin": self.max_fanin, "max_fanout": self.max_fanout,
            "depth": self.depth,
        }


def network_stats(net: BoolNetwork) -> NetworkStats:
    """Gate counts, fan-in/out extremes and logic depth (gates on the longest PI->PO path)."""
    kinds = Counter(g.kind.value for g in net.gates)
    fanout = Counter(n for g in net.gates for n in g.inputs)
    level = {p: 0 for p in net.primary_inputs}
    for g in topological_order(net):
        level[g.output] = 1 + max(level[i] for i in g.inputs)
    return NetworkStats(
        gates_by_kind={k: kinds[k] for k in sorted(kinds)},
        n_gates=len(net.gates),
        n_nets=len(level),
        n_inputs=len(net.primary_inputs),
        n_outputs=len(net.primary_outputs),
        max_fanin=max((len(g.inputs) for g in net.gates), default=0),
        max_fanout=max(fanout.values(), default=0),
        depth=max((level[o] for o in net.primary_outputs), default=0),
    )

"""Resistive-crossbar interconnect between pipeline stages.

One crossbar per stage boundary ``s -> s+1``: rows are the nets registered
at stage ``s``, columns are the input pins of stage ``s+1`` gates, and an ON
cell connects a row to a column.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .netlist import NetlistError
from .pipeline import PipelinedNetwork

R_ON = 200.0
R_OFF = 10e6
SWING = 0.25


@dataclass(frozen=True)
class CrossbarConfig:
    rows: tuple[str, ...]
    cols: tuple[str, ...]  # "<node>:<pin>"
    cells: np.ndarray = field(compare=False)  # bool, True = ON
    r_on: float = R_ON
    r_off: float = R_OFF
    swing: float = SWING

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"cell matrix {cells.shape} does not match {len(self.rows)}x{len(self.cols)}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        if not 0 < self.r_on < self.r_off:
            raise ValueError("need 0 < r_on < r_off")
        if not self.swing > 0:
            raise ValueError("swing must be positive")
        sums = cells.sum(axis=0)
        bad = [self.cols[j] for j in np.nonzero(sums != 1)[0]]
        if bad:
            raise ValueError(f"columns without exactly one ON cell: {bad[:5]}")

    @property
    def n_on(self) -> int:
        return int(self.cells.sum())

    @property
    def n_off(self) -> int:
        return self.cells.size - self.n_on

    def __eq__(self, other):
        if not isinstance(other, CrossbarConfig):
            return NotImplemented
        return (self.rows, self.cols, self.r_on, self.r_off, self.swing) == \
            (other.rows, other.cols, other.r_on, other.r_off, other.swing) and \
            np.array_equal(self.cells, other.cells)

    __hash__ = None


def map_boundary(p: PipelinedNetwork, s: int, r_on=R_ON, r_off=R_OFF, swing=SWING) -> CrossbarConfig:
    """Crossbar for the boundary between stage ``s`` and ``s + 1`` (0 <= s < depth)."""
    if not 0 <= s < p.depth:
        raise ValueError(f"boundary {s} out of range for depth {p.depth}")
    rows = p.stage_outputs(s)
    row_of = {net: r for r, net in enumerate(rows)}
    cols, on = [], []
    for n in p.stages[s]:
        for pin, net in enumerate(n.inputs):
            if net not in row_of:
                raise NetlistError(f"pin {n.output}:{pin} is driven by '{net}', which is not a stage-{s} net")
            on.append(row_of[net])
            cols.append(f"{n.output}:{pin}")
    cells = np.zeros((len(rows), len(cols)), dtype=bool)
    cells[on, np.arange(len(cols))] = True
    return CrossbarConfig(tuple(rows), tuple(cols), cells, r_on, r_off, swing)


def map_all(p: PipelinedNetwork, **kw) -> list[CrossbarConfig]:
    return [map_boundary(p, s, **kw) for s in range(p.depth)]


@dataclass(frozen=True)
class FanoutProfile:
    per_net: dict
    total: int

    @property
    def max(self) -> int:
        return max(self.per_net.values(), default=0)


def fanout_profile(p: PipelinedNetwork) -> FanoutProfile:
    """Receiver pins driven by each registered net across all boundaries."""
    counts = Counter({net: 0 for k in range(p.depth) for net in p.stage_outputs(k)})
    for n in p.nodes:
        counts.update(n.inputs)
    return FanoutProfile(dict(counts), sum(counts.values()))


def leakage_estimate(cfg: CrossbarConfig) -> float:
    """Upper bound on static power through OFF cells: each sees the full swing."""
    return cfg.n_off * cfg.swing ** 2 / cfg.r_off


# ------------------------------------------------------------- bitstreams

def bitstream_bytes(cfg: CrossbarConfig) -> bytes:
    """Row-major, MSB-first within each byte, each row zero-padded to a byte."""
    if cfg.cells.shape[1] == 0:
        return b""
    return np.packbits(cfg.cells, axis=1, bitorder="big").tobytes()


def bitstream_header(cfg: CrossbarConfig, boundary: int) -> dict:
    return {
        "boundary": boundary,
        "n_rows": len(cfg.rows),
        "n_cols": len(cfg.cols),
        "row_bytes": (len(cfg.cols) + 7) // 8,
        "bit_order": "row-major, MSB-first, rows zero-padded to whole bytes",
        "r_on_ohm": cfg.r_on,
        "r_off_ohm": cfg.r_off,
        "swing_v": cfg.swing,
        "on_cells": cfg.n_on,
        "rows": list(cfg.rows),
        "cols": list(cfg.cols),
    }


def write_bitstream(cfg: CrossbarConfig, boundary: int, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hdr = out_dir / f"boundary_{boundary:03d}.json"
    bits = out_dir / f"boundary_{boundary:03d}.bin"
    hdr.write_text(json.dumps(bitstream_header(cfg, boundary), indent=1) + "\n")
    bits.write_bytes(bitstream_bytes(cfg))
    return hdr, bits


def read_bitstream(header_path) -> CrossbarConfig:
    header_path = Path(header_path)
    hdr = json.loads(header_path.read_text())
    raw = np.frombuffer(header_path.with_suffix(".bin").read_bytes(), dtype=np.uint8)
    n_rows, n_cols = hdr["n_rows"], hdr["n_cols"]
    if n_cols:
        cells = np.unpackbits(raw.reshape(n_rows, hdr["row_bytes"]), axis=1, bitorder="big")[:, :n_cols]
    else:
        cells = np.zeros((n_rows, 0), dtype=bool)
    return CrossbarConfig(tuple(hdr["rows"]), tuple(hdr["cols"]), cells.astype(bool),
                          hdr["r_on_ohm"], hdr["r_off_ohm"], hdr["swing_v"])

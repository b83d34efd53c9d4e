import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netgen import random_network

from drtl.interconnect import (
    CrossbarConfig, bitstream_bytes, fanout_profile, leakage_estimate, map_all, map_boundary, read_bitstream,
    write_bitstream,
)
from drtl.pipeline import levelize
from drtl.synth import compile_network, parse_tlg


def test_identity_boundary():
    tlg = parse_tlg("INPUT(a)\nINPUT(b)\nOUTPUT(x)\nOUTPUT(y)\nx = TLG([-1], 0.5)(a)\ny = TLG([-1], 0.5)(b)\n")
    cfg = map_boundary(levelize(tlg), 0)
    assert cfg.rows == ("a", "b")
    assert cfg.cols == ("x:0", "y:0")
    assert np.array_equal(cfg.cells, np.eye(2, dtype=bool))


def test_fanout_three():
    tlg = parse_tlg("INPUT(a)\nOUTPUT(x)\nOUTPUT(y)\nOUTPUT(z)\n"
                    "x = TLG([-1], 0.5)(a)\ny = TLG([1], -0.5)(a)\nz = TLG([-1], 0.5)(a)\n")
    p = levelize(tlg)
    cfg = map_boundary(p, 0)
    assert cfg.cells.shape == (1, 3)
    assert cfg.cells.all()
    assert fanout_profile(p).per_net["a"] == 3


def test_boundary_range():
    p = levelize(parse_tlg("INPUT(a)\nOUTPUT(x)\nx = TLG([-1], 0.5)(a)\n"))
    assert len(map_all(p)) == p.depth == 1
    with pytest.raises(ValueError):
        map_boundary(p, 1)
    with pytest.raises(ValueError):
        map_boundary(p, -1)


def test_column_constraint_enforced():
    with pytest.raises(ValueError):
        CrossbarConfig(("a", "b"), ("x:0",), np.array([[True], [True]]))
    with pytest.raises(ValueError):
        CrossbarConfig(("a",), ("x:0",), np.array([[False]]))
    cfg = CrossbarConfig(("a",), ("x:0",), np.array([[True]]))
    with pytest.raises(ValueError):
        cfg.cells[0, 0] = False  # read-only


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_columns_and_conservation(seed):
    p = levelize(compile_network(random_network(seed)))
    cfgs = map_all(p)
    for s, cfg in enumerate(cfgs):
        assert (cfg.cells.sum(axis=0) == 1).all()
        # each ON cell wires the named driver to the named pin
        node = {n.output: n for n in p.stages[s]}
        for j, col in enumerate(cfg.cols):
            out, pin = col.rsplit(":", 1)
            assert cfg.rows[int(np.argmax(cfg.cells[:, j]))] == node[out].inputs[int(pin)]
    pins = sum(n.gate.fanin for n in p.nodes)
    assert sum(c.n_on for c in cfgs) == pins == fanout_profile(p).total


def test_iscas_conservation(iscas):
    for _, _, p in iscas.values():
        cfgs = map_all(p)
        assert sum(c.n_on for c in cfgs) == fanout_profile(p).total


def test_leakage():
    one_off = CrossbarConfig(("a", "b"), ("x:0",), np.array([[True], [False]]))
    assert leakage_estimate(one_off) == pytest.approx(6.25e-9)
    square = CrossbarConfig(tuple(f"r{i}" for i in range(100)), tuple(f"c{i}:0" for i in range(100)),
                            np.eye(100, dtype=bool))
    assert square.n_off == 9900
    assert leakage_estimate(square) == pytest.approx(61.875e-6)


def test_bitstream_byte_order():
    cells = np.zeros((2, 10), dtype=bool)
    cells[0, [0, 2, 3, 5, 6, 7, 8, 9]] = True
    cells[1, [1, 4]] = True
    cfg = CrossbarConfig(("r0", "r1"), tuple(f"c{i}:0" for i in range(10)), cells)
    # row 0: 1011 0111 | 11.. ....; row 1: 0100 1000 | 00.. ....
    assert bitstream_bytes(cfg) == bytes([0b10110111, 0b11000000, 0b01001000, 0b00000000])


def test_bitstream_round_trip(tmp_path, iscas):
    p = iscas["c432"][2]
    for s, cfg in enumerate(map_all(p)[:4]):
        hdr, bits = write_bitstream(cfg, s, tmp_path)
        assert hdr.name == f"boundary_{s:03d}.json"
        meta = json.loads(hdr.read_text())
        assert bits.stat().st_size == meta["n_rows"] * meta["row_bytes"]
        assert read_bitstream(hdr) == cfg

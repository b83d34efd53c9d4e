import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netgen import FULL_ADDER, random_network

from drtl.netlist import eval_reference, parse_bench
from drtl.pipeline import levelize
from drtl.sim import (
    NOT_READY, PipelineSimulator, SimState, equivalence_check, format_response, read_stimulus, run_stream,
    step, write_stimulus,
)
from drtl.synth import compile_network, parse_tlg
from drtl.tlg import DEVICE_PRESETS

AND_BENCH = "INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)\n"


def pipe(bench):
    net = parse_bench(bench)
    return net, levelize(compile_network(net))


def test_depth_one_and():
    _, p = pipe(AND_BENCH)
    assert p.depth == 1
    state = SimState.reset(p)
    state, out = step(p, state, (1, 1))
    assert out == (1,)
    state, out = step(p, state, (1, 0))
    assert out == (0,)
    assert state.cycle == 2


def test_not_ready_window():
    p = levelize(parse_tlg("INPUT(a)\nOUTPUT(n3)\nn1 = TLG([-1], 0.5)(a)\n"
                           "n2 = TLG([-1], 0.5)(n1)\nn3 = TLG([-1], 0.5)(n2)\n"))
    sim = PipelineSimulator(p)
    outs = sim.run([(1,), (0,), (0,), (1,)])
    assert outs[:2] == [NOT_READY, NOT_READY]
    assert outs[2] == (0,)  # NOT^3 of the first vector
    assert outs[3] == (1,)
    assert sim.cycle == 4


def test_run_stream_shape():
    _, p = pipe(FULL_ADDER)
    out, valid = run_stream(p, np.zeros((5, 3)))
    assert out.shape == (5 + p.depth - 1, 2)
    assert not valid[: p.depth - 1].any() and valid[p.depth - 1:].all()
    out2, valid2 = run_stream(p, np.zeros((5, 3)), flush=False)
    assert len(out2) == 5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_step_matches_run_stream(seed):
    net = random_network(seed, n_gates=40)
    p = levelize(compile_network(net))
    rng = np.random.default_rng(seed)
    stim = rng.integers(0, 2, size=(12, len(p.primary_inputs))).astype(bool)
    out, valid = run_stream(p, stim)
    sim = PipelineSimulator(p)
    padded = list(stim) + [np.zeros(len(p.primary_inputs), bool)] * (p.depth - 1)
    for c, v in enumerate(padded):
        got = sim.step(v)
        if valid[c]:
            assert got == tuple(int(b) for b in out[c])
        else:
            assert got is NOT_READY


def test_full_adder_stream():
    net, p = pipe(FULL_ADDER)
    vecs = list(itertools.product((0, 1), repeat=3))
    out, valid = run_stream(p, vecs)
    for k, v in enumerate(vecs):
        total = sum(v)
        assert tuple(out[k + p.depth - 1]) == (total % 2, total // 2)
    assert equivalence_check(net, p, "exhaustive")


def test_corrupted_and_gives_counterexample():
    net = parse_bench(AND_BENCH)
    p = levelize(parse_tlg("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = TLG([1,1], -0.5)(a, b)\n"))
    v = equivalence_check(net, p, "exhaustive")
    assert not v.passed
    assert v.vector in {(0, 1), (1, 0)}
    assert v.expected == (0,) and v.actual == (1,)
    assert v.as_dict()["verdict"] == "fail"


def test_c880_random(iscas):
    net, _, p = iscas["c880"]
    v = equivalence_check(net, p, "random", count=10_000, seed=1)
    assert v.passed and v.vectors_checked == 10_000


def test_exhaustive_limit(iscas):
    net, _, p = iscas["c432"]
    with pytest.raises(ValueError):
        equivalence_check(net, p, "exhaustive")
    with pytest.raises(ValueError):
        equivalence_check(net, p, "bogus")


@pytest.mark.parametrize("device", ["ideal", "mtj3", "mtj4", "ag-si"])
def test_latch_mode_matches_behavioral(device):
    net, p = pipe(FULL_ADDER)
    rng = np.random.default_rng(4)
    stim = rng.integers(0, 2, size=(64, 3)).astype(bool)
    ref, _ = run_stream(p, stim)
    got, _ = run_stream(p, stim, device=DEVICE_PRESETS[device])
    assert np.array_equal(ref, got)
    assert equivalence_check(net, p, "exhaustive", device=device)
    sim = PipelineSimulator(p, device)
    assert sim.run([(1, 1, 1)] * p.depth)[-1] == (1, 1)


def test_chunked_check_equals_single_pass(iscas):
    net, _, p = iscas["c499"]
    a = equivalence_check(net, p, "random", count=3000, seed=5)
    b = equivalence_check(net, p, "random", count=3000, seed=5, chunk=700)
    assert a == b and a.passed


def test_permuted_io_names():
    net = parse_bench(FULL_ADDER)
    p = levelize(compile_network(net))
    shuffled = parse_bench("INPUT(cin)\nINPUT(a)\nINPUT(b)\nOUTPUT(cout)\nOUTPUT(sum)\n"
                           + "\n".join(FULL_ADDER.splitlines()[6:]))
    assert equivalence_check(shuffled, p, "exhaustive")


def test_stimulus_files(tmp_path):
    path = tmp_path / "stim.txt"
    vecs = np.array([[1, 0, 1], [0, 0, 0], [1, 1, 1]], bool)
    write_stimulus(path, vecs)
    assert path.read_text() == "101\n000\n111\n"
    assert np.array_equal(read_stimulus(path, 3), vecs)
    path.write_text("# comment\n10\n")
    with pytest.raises(ValueError):
        read_stimulus(path, 3)
    _, p = pipe(FULL_ADDER)
    out, valid = run_stream(p, vecs)
    lines = format_response(out, valid)
    assert p.depth > 1 and lines[0] == "XX"
    assert lines[p.depth - 1] == "".join(str(b) for b in eval_reference(parse_bench(FULL_ADDER), (1, 0, 1)))


def test_wrong_width():
    _, p = pipe(AND_BENCH)
    with pytest.raises(ValueError):
        step(p, SimState.reset(p), (1,))

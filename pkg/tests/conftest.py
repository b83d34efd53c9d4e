from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
ISCAS = DATA / "iscas85"
BASELINE_BENCHMARKS = ["c432", "c499", "c880", "c1355", "c1908"]

ACCEPTANCE_LINES = []


def available_benches():
    return [ISCAS / f"{n}.bench" for n in BASELINE_BENCHMARKS if (ISCAS / f"{n}.bench").exists()]


@pytest.fixture(scope="session")
def iscas():
    """name -> (BoolNetwork, TlgNetwork, PipelinedNetwork) for every bundled benchmark."""
    from drtl.netlist import load_bench
    from drtl.pipeline import levelize
    from drtl.synth import compile_network

    out = {}
    for path in available_benches():
        net = load_bench(path)
        tlg = compile_network(net)
        out[path.stem] = (net, tlg, levelize(tlg))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Random Boolean networks for property and acceptance tests."""

import random

from drtl.netlist import BoolGate, BoolNetwork, GateKind

KINDS = list(GateKind)


def random_network(seed, n_inputs=None, n_gates=None, n_outputs=None, max_fanin=4) -> BoolNetwork:
    """DAG with every gate kind represented (when ``n_gates >= 8``).

    Inputs of each gate are drawn from all earlier nets, biased towards recent
    ones so depth grows.
    """
    rng = random.Random(seed)
    n_inputs = n_inputs or rng.randint(2, 16)
    assert n_inputs >= 2
    n_gates = n_gates or rng.randint(8, 200)
    pis = [f"i{k}" for k in range(n_inputs)]
    nets = list(pis)
    kinds = KINDS * (n_gates // len(KINDS)) + rng.sample(KINDS, n_gates % len(KINDS))
    rng.shuffle(kinds)
    gates = []
    for k, kind in enumerate(kinds):
        width = 1 if kind.unary else rng.randint(2, min(max_fanin, len(nets)))
        pool = nets[-12:] if rng.random() < 0.7 else nets
        ins = rng.sample(pool, width)
        out = f"g{k}"
        gates.append(BoolGate(out, kind, tuple(ins)))
        nets.append(out)
    n_outputs = n_outputs or rng.randint(1, min(8, n_gates))
    used = {i for g in gates for i in g.inputs}
    sinks = [g.output for g in gates if g.output not in used]
    pos = sinks[-n_outputs:]
    extra = [g.output for g in gates if g.output not in pos]
    rng.shuffle(extra)
    pos += extra[: max(0, n_outputs - len(pos))]
    return BoolNetwork(tuple(pis), tuple(pos), tuple(gates))


FULL_ADDER = """\
# one-bit full adder
INPUT(a)
INPUT(b)
INPUT(cin)
OUTPUT(sum)
OUTPUT(cout)
t1 = XOR(a, b)
sum = XOR(t1, cin)
t2 = AND(a, b)
t3 = AND(t1, cin)
cout = OR(t2, t3)
"""

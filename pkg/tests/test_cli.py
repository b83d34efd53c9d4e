import json
import subprocess
import sys

import pytest

from conftest import ISCAS
from netgen import FULL_ADDER

from drtl.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def adder(tmp_path):
    path = tmp_path / "adder.bench"
    path.write_text(FULL_ADDER)
    return path


def test_stats(capsys, adder):
    code, out, _ = run(capsys, "stats", adder)
    assert code == 0
    st = json.loads(out)
    assert st["gates"] == 5 and st["gates_by_kind"] == {"XOR": 2, "AND": 2, "OR": 1}
    code, out, _ = run(capsys, "stats", adder, "--format", "csv")
    assert out.splitlines()[0] == "stat,value"


def test_chain_and_verify(capsys, adder, tmp_path):
    out_dir = tmp_path / "o"
    assert run(capsys, "synth", adder, "--out", out_dir)[0] == 0
    assert (out_dir / "adder.tlg").exists() and (out_dir / "adder_node_counts.png").exists()
    code, out, _ = run(capsys, "pipeline", out_dir / "adder.tlg", "--out", out_dir)
    assert code == 0
    info = json.loads(out)
    assert info["throughput_period_ns"] == 0.5
    assert info["latency_ns"] == info["depth"] * 0.5
    code, out, _ = run(capsys, "verify", adder, out_dir / "adder.staged")
    assert code == 0
    v = json.loads(out)
    assert v["verdict"] == "pass" and v["mode"] == "exhaustive" and v["vectors_checked"] == 8
    code, out, _ = run(capsys, "verify", adder, out_dir / "adder.staged", "--device", "mtj3")
    assert code == 0
    code, out, _ = run(capsys, "map", out_dir / "adder.staged", "--out", out_dir)
    assert code == 0
    m = json.loads(out)
    assert len(m["boundaries"]) == info["depth"]
    assert (out_dir / "adder_crossbar" / "boundary_000.bin").exists()


def test_verify_failure_exit_code(capsys, tmp_path):
    bench = tmp_path / "and.bench"
    bench.write_text("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)\n")
    staged = tmp_path / "and.staged"
    staged.write_text("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nSTAGE 1\nf = TLG([1,1], -0.5)(a, b)\n")
    code, out, _ = run(capsys, "verify", bench, staged)
    assert code == 1
    v = json.loads(out)
    assert v["verdict"] == "fail" and v["expected"] == [0] and v["actual"] == [1]


def test_error_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "stats", tmp_path / "missing.bench")
    assert code == 2 and "error" in err
    bad = tmp_path / "bad.bench"
    bad.write_text("INPUT(a)\nOUTPUT(f)\nf = AND(a, zz)\n")
    assert run(capsys, "stats", bad)[0] == 2
    assert run(capsys, "montecarlo", "NOPE", "--out", tmp_path)[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_power_sixty_fj(capsys, tmp_path):
    nodes = [f"g{k} = TLG([1,1], -1.5)(a, b)" for k in range(50)]
    nodes += [f"n{k} = TLG([-1], 0.5)(a)" for k in range(50)]
    outs = [f"OUTPUT(g{k})" for k in range(50)] + [f"OUTPUT(n{k})" for k in range(50)]
    staged = tmp_path / "toy.staged"
    staged.write_text("\n".join(["INPUT(a)", "INPUT(b)", *outs, "STAGE 1", *nodes]) + "\n")
    code, out, _ = run(capsys, "power", staged, "--out", tmp_path)
    assert code == 0
    r = json.loads(out)
    assert r["report"]["gate_count"] == 100 and r["report"]["total_fanout"] == 150
    assert r["report"]["energy_per_cycle_fj"] == 60.0
    assert r["report"]["edp_fj_ns"] == 30.0
    assert r["flags"] == ["c499:BASELINE_MISMATCH:energy"]
    assert (tmp_path / "baseline_reductions.png").exists()
    code, out, _ = run(capsys, "power", staged, "--out", tmp_path, "--e-gate-fj", "1", "--e-fanout-fj", "0.1")
    assert json.loads(out)["report"]["energy_per_cycle_fj"] == 115.0
    code, out, _ = run(capsys, "power", staged, "--out", tmp_path, "--format", "md")
    assert "BASELINE_MISMATCH:energy" in out and (tmp_path / "toy_baseline.md").exists()


def test_montecarlo(capsys, tmp_path):
    code, out, _ = run(capsys, "montecarlo", "AND2", "--sigma", "0,0.2", "--trials", "2000", "--out", tmp_path)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["failure_rate"] == 0.0
    assert rows[1]["safe_deviation"] == pytest.approx(1 / 7)
    assert (tmp_path / "montecarlo.png").exists()
    code, out, _ = run(capsys, "montecarlo", "TLG([1,1], -0.5)", "--sigma", "0.1", "--trials", "100",
                       "--device", "mtj4", "--out", tmp_path)
    assert code == 0 and json.loads(out)["device"] == "mtj4"
    assert run(capsys, "montecarlo", "AND2", "--sigma", "x", "--out", tmp_path)[0] == 2


def test_montecarlo_deterministic(capsys, tmp_path, monkeypatch):
    args = ("montecarlo", "library", "--sigma", "0.2", "--trials", "3000", "--out", tmp_path)
    a = run(capsys, *args, "--seed", "9")[1]
    b = run(capsys, *args, "--seed", "9")[1]
    assert a == b
    monkeypatch.setenv("DRTL_SEED", "9")
    assert run(capsys, *args)[1] == a
    monkeypatch.setenv("DRTL_SEED", "10")
    assert run(capsys, *args)[1] != a
    monkeypatch.setenv("DRTL_SEED", "ten")
    assert run(capsys, *args)[0] == 2


def test_run_all_equals_manual_chain(capsys, tmp_path):
    bench = ISCAS / "c880.bench"
    manual, auto = tmp_path / "manual", tmp_path / "auto"
    parts = {}
    parts["synth"] = json.loads(run(capsys, "synth", bench, "--out", manual)[1])
    parts["pipeline"] = json.loads(run(capsys, "pipeline", manual / "c880.tlg", "--out", manual)[1])
    parts["map"] = json.loads(run(capsys, "map", manual / "c880.staged", "--out", manual)[1])
    parts["power"] = json.loads(run(capsys, "power", manual / "c880.staged", "--out", manual)[1])
    parts["verify"] = json.loads(run(capsys, "verify", bench, manual / "c880.staged")[1])
    code, out, _ = run(capsys, "run-all", bench, "--out", auto)
    assert code == 0
    combined = json.loads(out)
    assert combined["verify"]["verdict"] == "pass"
    assert combined["verify"]["mode"] == "random" and combined["verify"]["vectors_checked"] == 10_000
    text = json.dumps(combined).replace(str(auto), "<OUT>")
    assert json.loads(text) == json.loads(json.dumps(parts).replace(str(manual), "<OUT>"))
    assert (auto / "c880.staged").read_text() == (manual / "c880.staged").read_text()
    m = combined["power"]["model_vs_published"]
    assert len(m) == 1 and m[0]["name"] == "c880" and m[0]["source"] == "model-vs-published"


def test_console_script(tmp_path, adder):
    res = subprocess.run([sys.executable, "-m", "drtl.cli", "stats", str(adder)], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["inputs"] == 3

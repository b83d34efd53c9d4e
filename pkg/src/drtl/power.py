"""Energy, delay and energy-delay-product accounting.

All arithmetic is exact (:class:`fractions.Fraction`); floats appear only when
reports are serialized.  Energies are in fJ, times in ns.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .interconnect import fanout_profile
from .pipeline import PipelinedNetwork

E_GATE_FJ = Fraction("0.3")
E_FANOUT_FJ = Fraction("0.2")
CLOCK_NS = Fraction("0.5")
REFERENCE_FJ_PER_GATE = Fraction(1)

BASELINE_MISMATCH = "BASELINE_MISMATCH"


def _frac(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class EnergyModel:
    e_gate: Fraction = E_GATE_FJ
    e_fanout: Fraction = E_FANOUT_FJ
    clock_period: Fraction = CLOCK_NS

    def __post_init__(self):
        for name in ("e_gate", "e_fanout", "clock_period"):
            v = _frac(getattr(self, name))
            if v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class EnergyReport:
    gate_count: int
    total_fanout: int
    depth: int
    energy_per_cycle: Fraction
    throughput_period: Fraction
    latency: Fraction
    edp: Fraction
    avg_energy_per_gate: Fraction

    @property
    def avg_fanout(self) -> Fraction:
        return Fraction(self.total_fanout, self.gate_count)

    @property
    def at_or_below_reference(self) -> bool:
        return self.avg_energy_per_gate <= REFERENCE_FJ_PER_GATE

    def as_dict(self):
        return {
            "gate_count": self.gate_count,
            "total_fanout": self.total_fanout,
            "depth": self.depth,
            "energy_per_cycle_fj": float(self.energy_per_cycle),
            "throughput_period_ns": float(self.throughput_period),
            "latency_ns": float(self.latency),
            "edp_fj_ns": float(self.edp),
            "avg_energy_per_gate_fj": float(self.avg_energy_per_gate),
            "avg_fanout": float(self.avg_fanout),
            "at_or_below_1fj_per_gate": self.at_or_below_reference,
        }


def energy_report(gate_count: int, total_fanout: int, depth: int = 1, model: EnergyModel = EnergyModel()) -> EnergyReport:
    if gate_count <= 0:
        raise ValueError("cannot estimate energy of an empty network")
    energy = gate_count * model.e_gate + total_fanout * model.e_fanout
    return EnergyReport(
        gate_count=gate_count,
        total_fanout=total_fanout,
        depth=depth,
        energy_per_cycle=energy,
        throughput_period=model.clock_period,
        latency=depth * model.clock_period,
        edp=energy * model.clock_period,
        avg_energy_per_gate=energy / gate_count,
    )


def estimate(p: PipelinedNetwork, model: EnergyModel = EnergyModel()) -> EnergyReport:
    """Dynamic energy per clock of a fully pipelined network (buffers included)."""
    return energy_report(len(p.nodes), fanout_profile(p).total, p.depth, model)


# ------------------------------------------------------------- baseline

@dataclass(frozen=True)
class BaselineRow:
    name: str
    n_inputs: int
    n_outputs: int
    lut_delay: Fraction
    rtl_delay: Fraction
    lut_energy: Fraction
    rtl_energy: Fraction
    stated_energy_reduction_pct: Fraction
    stated_edp_reduction_pct: Fraction
    energy_places: int = 1
    edp_places: int = 2

    def __post_init__(self):
        for f in ("n_inputs", "n_outputs", "lut_delay", "rtl_delay", "lut_energy", "rtl_energy",
                  "stated_energy_reduction_pct", "stated_edp_reduction_pct"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{self.name}: {f} must be positive")


def _places(text: str) -> int:
    return len(text.split(".", 1)[1]) if "." in text else 0


_COLUMNS = ["name", "n_inputs", "n_outputs", "lut_delay_ns", "rtl_delay_ns", "lut_energy_fj",
            "rtl_energy_fj", "stated_energy_red_pct", "stated_edp_red_pct"]


def parse_baseline(text: str, source="<baseline>") -> list[BaselineRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return []
    if [f.strip() for f in reader.fieldnames] != _COLUMNS:
        raise ValueError(f"{source}: expected columns {','.join(_COLUMNS)}")
    rows, names = [], set()
    for lineno, rec in enumerate(reader, start=2):
        rec = {k.strip(): (v or "").strip() for k, v in rec.items() if k is not None}
        try:
            row = BaselineRow(
                name=rec["name"],
                n_inputs=int(rec["n_inputs"]),
                n_outputs=int(rec["n_outputs"]),
                lut_delay=Fraction(rec["lut_delay_ns"]),
                rtl_delay=Fraction(rec["rtl_delay_ns"]),
                lut_energy=Fraction(rec["lut_energy_fj"]),
                rtl_energy=Fraction(rec["rtl_energy_fj"]),
                stated_energy_reduction_pct=Fraction(rec["stated_energy_red_pct"]),
                stated_edp_reduction_pct=Fraction(rec["stated_edp_red_pct"]),
                energy_places=_places(rec["stated_energy_red_pct"]),
                edp_places=_places(rec["stated_edp_red_pct"]),
            )
        except (ValueError, TypeError, ZeroDivisionError) as e:
            raise ValueError(f"{source}:{lineno}: malformed row: {e}") from None
        if not row.name or row.name in names:
            raise ValueError(f"{source}:{lineno}: duplicate or empty name {row.name!r}")
        names.add(row.name)
        rows.append(row)
    return rows


def load_baseline(path=None) -> list[BaselineRow]:
    """Rows from a baseline CSV; the bundled table when ``path`` is None."""
    if path is None:
        text = resources.files("drtl").joinpath("data/table1.csv").read_text()
        return parse_baseline(text, "table1.csv")
    return parse_baseline(Path(path).read_text(), str(path))


def round_half_away(x: Fraction, places: int) -> Fraction:
    scale = 10 ** places
    y = abs(x) * scale
    q = int(y + Fraction(1, 2))
    return (q if x >= 0 else -q) / Fraction(scale)


@dataclass(frozen=True)
class Comparison:
    name: str
    source: str  # "published" or "model-vs-published"
    rtl_energy: Fraction
    rtl_period: Fraction
    energy_reduction_pct: Fraction
    edp_reduction_pct: Fraction
    stated_energy_reduction_pct: Fraction
    stated_edp_reduction_pct: Fraction
    flags: tuple[str, ...] = ()

    def as_dict(self):
        return {
            "name": self.name,
            "source": self.source,
            "rtl_energy_fj": float(self.rtl_energy),
            "rtl_period_ns": float(self.rtl_period),
            "energy_reduction_pct": float(self.energy_reduction_pct),
            "edp_reduction_pct": float(self.edp_reduction_pct),
            "stated_energy_reduction_pct": float(self.stated_energy_reduction_pct),
            "stated_edp_reduction_pct": float(self.stated_edp_reduction_pct),
            "flags": list(self.flags),
        }


def reductions(lut_energy, lut_delay, rtl_energy, rtl_delay) -> tuple[Fraction, Fraction]:
    if lut_energy == 0 or lut_delay == 0:
        raise ValueError("baseline energy and delay must be nonzero")
    energy = 100 * (1 - Fraction(rtl_energy) / lut_energy)
    edp = 100 * (1 - Fraction(rtl_energy) * rtl_delay / (lut_energy * lut_delay))
    return energy, edp


def compare_to_baseline(source, row: BaselineRow) -> Comparison:
    """Percent energy and EDP reduction of ``source`` against a LUT baseline row.

    ``source`` is an :class:`EnergyReport`, an ``(energy_fj, period_ns)`` pair,
    or None to recompute the row's own published RTL columns.  Published
    recomputations that do not round to the stated values carry
    ``BASELINE_MISMATCH`` flags.
    """
    if source is None:
        energy, period, kind = row.rtl_energy, row.rtl_delay, "published"
    elif isinstance(source, EnergyReport):
        energy, period, kind = source.energy_per_cycle, source.throughput_period, "model-vs-published"
    else:
        energy, period = (_frac(v) for v in source)
        kind = "model-vs-published"
    e_red, edp_red = reductions(row.lut_energy, row.lut_delay, energy, period)
    flags = []
    if kind == "published":
        if round_half_away(e_red, row.energy_places) != row.stated_energy_reduction_pct:
            flags.append(f"{BASELINE_MISMATCH}:energy")
        if round_half_away(edp_red, row.edp_places) != row.stated_edp_reduction_pct:
            flags.append(f"{BASELINE_MISMATCH}:edp")
    return Comparison(row.name, kind, energy, period, e_red, edp_red,
                      row.stated_energy_reduction_pct, row.stated_edp_reduction_pct, tuple(flags))


def table_markdown(comparisons) -> str:
    head = "| benchmark | source | RTL energy (fJ) | period (ns) | energy red. % | stated | EDP red. % | stated | flags |"
    lines = [head, "|" + "---|" * 9]
    for c in comparisons:
        lines.append(
            f"| {c.name} | {c.source} | {float(c.rtl_energy):.2f} | {float(c.rtl_period):g} | "
            f"{float(c.energy_reduction_pct):.3f} | {float(c.stated_energy_reduction_pct):g} | "
            f"{float(c.edp_reduction_pct):.3f} | {float(c.stated_edp_reduction_pct):g} | "
            f"{' '.join(c.flags)} |")
    return "\n".join(lines) + "\n"


def table_csv(comparisons) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "source", "rtl_energy_fj", "rtl_period_ns", "energy_reduction_pct",
                "stated_energy_reduction_pct", "edp_reduction_pct", "stated_edp_reduction_pct", "flags"])
    for c in comparisons:
        w.writerow([c.name, c.source, f"{float(c.rtl_energy):.6g}", f"{float(c.rtl_period):g}",
                    f"{float(c.energy_reduction_pct):.4f}", f"{float(c.stated_energy_reduction_pct):g}",
                    f"{float(c.edp_reduction_pct):.4f}", f"{float(c.stated_edp_reduction_pct):g}",
                    " ".join(c.flags)])
    return buf.getvalue()

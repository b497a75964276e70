"""Distance sweeps, reach tables and their text outputs."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from . import fiber as fib
from .noise import raman_detection_prob, raman_powers
from .qkd import RateBreakdown, ReachResult, link_reach
from .scenario import ComputationError, LinkScenario

WORKERS_ENV = "RAMANQKD_WORKERS"


@dataclass(frozen=True)
class SweepRecord:
    length_km: float
    f_rep_ghz: float
    mu: float
    p_mu: float
    p_dc_total: float
    p_ap: float
    p_ram_f: float
    p_ram_b: float
    p_lcxt: float
    p_isi: float
    t_isi: float
    qber: float
    r_raw_bps: float
    r_sift_bps: float
    r_sec_bps: float
    i_ab: float
    i_ae: float

    @classmethod
    def from_breakdown(cls, length_km: float, b: RateBreakdown) -> "SweepRecord":
        return cls(length_km, b.f_rep_ghz, b.mu, b.p_mu, b.p_dc_total, b.p_ap, b.p_ram_f,
                   b.p_ram_b, b.p_lcxt, b.p_isi, b.t_isi, b.qber, b.r_raw, b.r_sift, b.r_sec,
                   b.i_ab, b.i_ae)


FIELD_NAMES = tuple(f.name for f in fields(SweepRecord))


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1


def run_sweep(scenario: LinkScenario, workers: int | None = None,
              lengths: list[float] | None = None) -> list[SweepRecord]:
    """One record per grid length, ordered by length whatever the worker count."""
    grid = sorted(lengths if lengths is not None else scenario.sweep.lengths())

    def one(L: float) -> SweepRecord:
        return SweepRecord.from_breakdown(L, scenario.evaluate(L))

    n = _worker_count(workers)
    if n == 1:
        return [one(L) for L in grid]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, grid))


# -- CSV ------------------------------------------------------------------------

def records_to_csv(records: list[SweepRecord]) -> str:
    if not records:
        raise ValueError("no records to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELD_NAMES)
    for r in records:
        # repr gives the shortest string that parses back to the same double
        w.writerow([repr(float(v)) for v in astuple(r)])
    return buf.getvalue()


def emit_csv(records: list[SweepRecord], path: str | Path) -> None:
    text = records_to_csv(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def parse_csv(text: str) -> list[SweepRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != FIELD_NAMES:
        raise ValueError("CSV header does not match the sweep record fields")
    return [SweepRecord(*(float(x) for x in row)) for row in rows[1:]]


def read_csv(path: str | Path) -> list[SweepRecord]:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def format_table(records: list[SweepRecord], header: str = "") -> str:
    cols = ("length_km", "f_rep_ghz", "mu", "qber", "r_sift_bps", "r_sec_bps", "p_ram_f",
            "p_ram_b", "p_isi")
    lines = [header.rstrip("\n")] if header else []
    lines.append("  ".join(f"{c:>12}" for c in cols))
    for r in records:
        lines.append("  ".join(f"{getattr(r, c):12.5g}" for c in cols))
    return "\n".join(lines) + "\n"


# -- plot script ----------------------------------------------------------------

_PLOT_TEMPLATE = '''\
"""Generated plot of a sweep: secret key rate (log) and QBER versus length."""
import csv
import sys

import matplotlib.pyplot as plt

DATA = {data!r}
TITLE = {title!r}
RSEC_THRESHOLD = {rsec_thr!r}
QBER_THRESHOLD = {qber_thr!r}

rows = list(csv.DictReader(open(DATA)))
L = [float(r["length_km"]) for r in rows]
rsec = [float(r["r_sec_bps"]) for r in rows]
qber = [100.0 * float(r["qber"]) for r in rows]

fig, ax = plt.subplots(figsize=(7, 4.5))
pos = [(x, y) for x, y in zip(L, rsec) if y > 0]
if pos:
    ax.semilogy(*zip(*pos), "b-", label="R_sec")
ax.axhline(RSEC_THRESHOLD, color="b", ls=":", lw=1)
ax.set_xlabel("L [km]")
ax.set_ylabel("R_sec [b/s]", color="b")
ax2 = ax.twinx()
ax2.plot(L, qber, "r--", label="QBER")
ax2.axhline(100.0 * QBER_THRESHOLD, color="r", ls=":", lw=1)
ax2.set_ylabel("QBER [%]", color="r")
ax.set_title(TITLE)
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else DATA.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
'''


def plot_script_text(csv_path: str, title: str, rsec_thr: float = 853.0,
                     qber_thr: float = 0.09) -> str:
    return _PLOT_TEMPLATE.format(data=str(csv_path), title=title, rsec_thr=float(rsec_thr),
                                 qber_thr=float(qber_thr))


def emit_plot_script(records: list[SweepRecord], path: str | Path, csv_path: str | Path | None = None,
                     title: str = "sweep", rsec_thr: float = 853.0, qber_thr: float = 0.09) -> Path:
    """Write a standalone matplotlib script next to the sweep CSV.

    The CSV is written too when ``csv_path`` does not exist yet.
    """
    if not records:
        raise ValueError("no records to plot")
    path = Path(path)
    csv_path = Path(csv_path) if csv_path is not None else path.with_suffix(".csv")
    if not csv_path.exists():
        emit_csv(records, csv_path)
    path.write_text(plot_script_text(str(csv_path), title, rsec_thr, qber_thr), encoding="utf-8")
    return path


# -- reach ----------------------------------------------------------------------

@dataclass(frozen=True)
class ReachRow:
    name: str
    fiber: str
    classical: str
    reach_km: float
    limiting: str


def _plan_label(sc: LinkScenario) -> str:
    c = sc.classical
    if not c.has_channels:
        return "none"
    return f"{c.format.value} {c.n_forward}f+{c.n_backward}b"


def scenario_reach(sc: LinkScenario) -> ReachResult:
    return link_reach(sc, sc.thresholds.qber, sc.thresholds.r_sec_bps, sc.sweep.reach_max_km)


def report_reach(sc: LinkScenario, workers: int | None = None) -> list[ReachRow]:
    """Reach of the scenario and each of its variants, in file order."""
    items = [sc, *sc.variants]

    def one(s: LinkScenario) -> ReachRow:
        res = scenario_reach(s)
        return ReachRow(s.name, s.fiber.label, _plan_label(s), res.reach_km, res.limiting)

    n = _worker_count(workers)
    if n == 1:
        return [one(s) for s in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, items))


def format_reach(rows: list[ReachRow], fmt: str = "table") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("name", "fiber", "classical", "reach_km", "limiting"))
        for r in rows:
            w.writerow((r.name, r.fiber, r.classical, repr(r.reach_km), r.limiting))
        return buf.getvalue()
    out = [f"{'name':<28}{'fiber':<12}{'classical':<22}{'reach_km':>10}  limiting"]
    for r in rows:
        out.append(f"{r.name:<28}{r.fiber:<12}{r.classical:<22}{r.reach_km:>10.1f}  {r.limiting}")
    return "\n".join(out) + "\n"


# -- Raman versus dark-count grid -------------------------------------------------

@dataclass(frozen=True)
class NoiseGridPoint:
    length_km: float
    p_out_dbm: float
    p_ram_f: float
    p_ram_b: float
    p_dc_total: float

    @property
    def ratio(self) -> float:
        """Raman clicks over detector dark clicks."""
        if self.p_dc_total == 0:
            return math.inf
        return (self.p_ram_f + self.p_ram_b) / self.p_dc_total


def noise_grid(sc: LinkScenario) -> list[NoiseGridPoint]:
    """Raman and dark-count probabilities over lengths and classical output powers."""
    c, det = sc.classical, sc.detector
    gate_ns = det.gate_ns if det.gate_ns is not None else sc.pulse.gate_fraction / sc.f_rep.value_ghz
    E = fib.photon_energy(sc.lambda_nm)
    p_dc_total = det.n_detectors * det.dark_rate_per_ns * gate_ns
    pts = []
    for L in sc.sweep.lengths():
        for p_dbm in sc.noise_grid.powers():
            pf, pb = raman_powers(c.n_forward, c.n_backward, fib.dbm_to_watt(p_dbm),
                                  sc.fiber.alpha_nat_per_km, L, sc.noise.rho_per_km_nm,
                                  sc.noise.delta_lambda_nm)
            pts.append(NoiseGridPoint(L, p_dbm, raman_detection_prob(pf, E, det.eta, gate_ns),
                                      raman_detection_prob(pb, E, det.eta, gate_ns), p_dc_total))
    return pts


def format_noise_grid(points: list[NoiseGridPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("length_km", "p_out_dbm", "p_ram_f", "p_ram_b", "p_dc_total", "ratio"))
    for p in points:
        w.writerow([repr(float(x)) for x in (p.length_km, p.p_out_dbm, p.p_ram_f, p.p_ram_b,
                                             p.p_dc_total, p.ratio)])
    return buf.getvalue()


__all__ = [
    "SweepRecord", "FIELD_NAMES", "run_sweep", "emit_csv", "read_csv", "parse_csv",
    "records_to_csv", "emit_plot_script", "report_reach", "format_reach", "noise_grid",
    "ComputationError",
]

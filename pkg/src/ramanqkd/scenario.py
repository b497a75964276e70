"""Scenario files: schema, validation, defaults and serialization.

A scenario is a TOML document with one table per concern. See
``presets/annotated_example.toml`` for every key with its default.
"""
from __future__ import annotations

import copy
import enum
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from . import fiber as fib
from .classical import (
    ClassicalChannelPlan, FecThreshold, ModulationFormat, PenaltyModel, UnreachableBER,
    launch_and_output_power,
)
from .noise import noise_budget
from .pulse import PulseSpec, UnboundedBitrate, broadened_fwhm, gate_capture, isi_error_fraction, max_quantum_bitrate
from .qkd import (
    DetectorKind, DetectorModel, LinkState, MuMode, MuPolicy, ProtocolKind, ProtocolParams,
    RateBreakdown, duty_factor, evaluate_at_length,
)


class ScenarioError(ValueError):
    """Invalid scenario file or value."""


class ComputationError(RuntimeError):
    """Model evaluation failed for a valid scenario."""


MANDATORY = object()

# section -> key -> (type, default). ``None`` defaults mean "absent unless given".
SCHEMA: dict[str, dict[str, tuple[type | tuple[type, ...], Any]]] = {
    "": {"name": (str, "scenario"), "description": (str, "")},
    "fiber": {
        "profile": (str, None),
        "label": (str, None),
        "alpha_db_per_km": ((int, float), None),
        "dispersion_D": ((int, float), None),
        "dispersion_slope": ((int, float), None),
        "raman_cross_section": ((int, float), None),
        "lambda_nm": ((int, float), fib.DEFAULT_WAVELENGTH_NM),
    },
    "pulse": {
        "tau_fraction": ((int, float), 0.1),
        "gate_fraction": ((int, float), 0.5),
        "chirp": ((int, float), 0.0),
    },
    "f_rep": {
        "mode": (str, "fixed"),
        "value_ghz": ((int, float), 1.0),
        "cap_ghz": ((int, float), 10.0),
        "f_err_target": ((int, float), 1e-3),
    },
    "classical": {
        "format": (str, "PM-QPSK"),
        "baud_gbaud": ((int, float), 10.0),
        "fec": (str, "sd"),
        "n_forward": (int, 0),
        "n_backward": (int, 0),
        "il_db": ((int, float), 0.0),
        "il_fbg_db": ((int, float), 0.0),
        "iso_adjacent_db": ((int, float), 82.0),
        "iso_nonadjacent_db": ((int, float), 100.0),
        "rx_sensitivity_dbm": ((int, float), None),
    },
    "classical.penalty": {
        "alpha_n": ((int, float), 1.07),
        "beta": ((int, float), 0.0075),
        "shot_noise_dbm": ((int, float), -58.5),
    },
    "quantum_path": {
        "il_db": ((int, float), 0.0),
        "il_fbg_db": ((int, float), 0.0),
        "b_db": ((int, float), 0.0),
    },
    "noise": {
        "rho_per_km_nm": ((int, float), None),
        "delta_lambda_nm": ((int, float), 0.6),
        "quantum_isolation_db": ((int, float), 82.0),
        "lcxt_enabled": (bool, True),
    },
    "detector": {
        "kind": (str, "apd"),
        "eta": ((int, float), MANDATORY),
        "dark_rate_per_ns": ((int, float), MANDATORY),
        "dead_time_s": ((int, float), 0.0),
        "afterpulse_frac": ((int, float), 0.0),
        "n_detectors": (int, 2),
        "gate_ns": ((int, float), None),
    },
    "protocol": {
        "kind": (str, "cow"),
        "visibility": ((int, float), MANDATORY),
        "eta_ec": ((int, float), 1.2),
        "qber_threshold": ((int, float), 0.09),
        "rsec_threshold_bps": ((int, float), 853.0),
    },
    "protocol.mu": {
        "mode": (str, "fixed"),
        "value": ((int, float), 0.5),
    },
    "duty": {
        "mode": (str, "fixed"),
        "constant": ((int, float), 1.0),
        "l_a_km": ((int, float), 10.0),
    },
    "sweep": {
        "l_min_km": ((int, float), 0.0),
        "l_max_km": ((int, float), 200.0),
        "step_km": ((int, float), 5.0),
        "reach_max_km": ((int, float), 400.0),
    },
    "noise_grid": {
        "p_out_min_dbm": ((int, float), -60.0),
        "p_out_max_dbm": ((int, float), 0.0),
        "p_out_step_db": ((int, float), 5.0),
    },
}

MANDATORY_KEYS = tuple(
    f"{sec}.{key}" for sec, keys in SCHEMA.items() for key, (_, d) in keys.items()
    if d is MANDATORY
)


class FrepMode(enum.Enum):
    FIXED = "fixed"
    IDEAL = "ideal"


class DutyMode(enum.Enum):
    FIXED = "fixed"
    PLUG_AND_PLAY = "plug_and_play"


@dataclass(frozen=True)
class PulseRatios:
    tau_fraction: float = 0.1
    gate_fraction: float = 0.5
    chirp: float = 0.0


@dataclass(frozen=True)
class FrepPolicy:
    mode: FrepMode = FrepMode.FIXED
    value_ghz: float = 1.0
    cap_ghz: float = 10.0
    f_err_target: float = 1e-3


@dataclass(frozen=True)
class QuantumPath:
    il_db: float = 0.0
    il_fbg_db: float = 0.0
    b_db: float = 0.0

    @property
    def transmission(self) -> float:
        return fib.db_to_linear(self.il_db + self.il_fbg_db + self.b_db)


@dataclass(frozen=True)
class NoiseConfig:
    rho_per_km_nm: float
    delta_lambda_nm: float = 0.6
    quantum_isolation_db: float = 82.0
    lcxt_enabled: bool = True


@dataclass(frozen=True)
class DutyPolicy:
    mode: DutyMode = DutyMode.FIXED
    constant: float = 1.0
    l_a_km: float = 10.0

    def factor(self, length_km: float) -> float:
        if self.mode is DutyMode.FIXED:
            return self.constant
        return duty_factor(self.l_a_km, length_km)


@dataclass(frozen=True)
class Thresholds:
    qber: float = 0.09
    r_sec_bps: float = 853.0


@dataclass(frozen=True)
class SweepGrid:
    l_min_km: float = 0.0
    l_max_km: float = 200.0
    step_km: float = 5.0
    reach_max_km: float = 400.0

    def lengths(self) -> list[float]:
        n = int(math.floor((self.l_max_km - self.l_min_km) / self.step_km + 1e-9))
        return [self.l_min_km + i * self.step_km for i in range(n + 1)]


@dataclass(frozen=True)
class NoiseGrid:
    p_out_min_dbm: float = -60.0
    p_out_max_dbm: float = 0.0
    p_out_step_db: float = 5.0

    def powers(self) -> list[float]:
        n = int(math.floor((self.p_out_max_dbm - self.p_out_min_dbm) / self.p_out_step_db + 1e-9))
        return [self.p_out_min_dbm + i * self.p_out_step_db for i in range(n + 1)]


@dataclass(frozen=True)
class LinkScenario:
    name: str
    description: str
    fiber: fib.FiberProfile
    lambda_nm: float
    pulse: PulseRatios
    f_rep: FrepPolicy
    classical: ClassicalChannelPlan
    quantum_path: QuantumPath
    noise: NoiseConfig
    detector: DetectorModel
    protocol: ProtocolParams
    duty: DutyPolicy
    thresholds: Thresholds
    sweep: SweepGrid
    noise_grid: NoiseGrid = field(default_factory=NoiseGrid)
    variants: tuple["LinkScenario", ...] = ()
    # Raw tables, kept so variants and serialization see exactly what was resolved.
    _raw: dict = field(default=None, compare=False, repr=False)

    # -- evaluation ---------------------------------------------------------

    def f_rep_at(self, length_km: float) -> float:
        pol = self.f_rep
        if pol.mode is FrepMode.FIXED:
            return pol.value_ghz
        try:
            f = max_quantum_bitrate(self.fiber.dispersion_D, self.lambda_nm, length_km,
                                    pol.f_err_target, self.pulse.tau_fraction,
                                    self.pulse.gate_fraction)
        except UnboundedBitrate:
            return pol.cap_ghz
        return min(pol.cap_ghz, f)

    def rx_sensitivity(self) -> float:
        try:
            return self.classical.resolved_sensitivity()
        except UnreachableBER as exc:
            raise ComputationError(str(exc)) from exc

    def link_state(self, length_km: float) -> LinkState:
        """Resolve the rate-equation inputs at one length.

        Order: bit rate, pulse and ISI, classical powers, noise.
        """
        if length_km < 0:
            raise ComputationError(f"negative length {length_km}")
        f_ghz = self.f_rep_at(length_km)
        period_ps = 1000.0 / f_ghz
        gate_ns = self.detector.gate_ns
        gate_ps = gate_ns * 1000.0 if gate_ns is not None else self.pulse.gate_fraction * period_ps
        try:
            spec = PulseSpec(self.pulse.tau_fraction * period_ps, self.pulse.chirp, gate_ps, period_ps)
        except ValueError as exc:
            raise ComputationError(f"at L={length_km:g} km: {exc}") from exc
        prop = broadened_fwhm(spec, fib.beta2_from_D(self.fiber.dispersion_D, self.lambda_nm), length_km)
        t_isi = gate_capture(prop.tau_fwhm_L_ps, gate_ps)
        f_err = isi_error_fraction(prop.tau_fwhm_L_ps, period_ps, gate_ps)

        plan = self.classical
        det = self.detector
        if plan.has_channels:
            rx = self.rx_sensitivity()
            p_out, _ = launch_and_output_power(rx, plan.il_db, plan.il_fbg_db,
                                               self.fiber.alpha_db_per_km, length_km)
            nb = noise_budget(
                plan.n_forward, plan.n_backward, p_out, rx, self.fiber.alpha_nat_per_km,
                length_km, self.noise.rho_per_km_nm, self.noise.delta_lambda_nm,
                fib.photon_energy(self.lambda_nm), det.eta, gate_ps / 1000.0,
                self.noise.quantum_isolation_db, self.noise.lcxt_enabled,
            )
            p_f, p_b, p_x = nb.p_ram_f, nb.p_ram_b, nb.p_lcxt
        else:
            p_f = p_b = p_x = 0.0

        return LinkState(
            length_km=length_km,
            t_F=fib.transmission(self.fiber.alpha_db_per_km, length_km),
            t_chain=self.quantum_path.transmission,
            t_isi=t_isi,
            f_err=f_err,
            p_ram_f=p_f,
            p_ram_b=p_b,
            p_lcxt=p_x,
            f_rep_ghz=f_ghz,
            gate_ns=gate_ps / 1000.0,
            eta_duty=self.duty.factor(length_km),
            detector=det,
            protocol=self.protocol,
        )

    def evaluate(self, length_km: float) -> RateBreakdown:
        try:
            return evaluate_at_length(self.link_state(length_km))
        except ComputationError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise ComputationError(f"at L={length_km:g} km: {exc}") from exc

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return copy.deepcopy(self._raw)

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def with_changes(self, overrides: dict) -> "LinkScenario":
        """New scenario with ``overrides`` deep-merged over this one's tables."""
        data = self.to_dict()
        data.pop("variant", None)
        return from_dict(_merge(data, overrides))


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _check_type(path: str, value: Any, typ) -> Any:
    if typ is bool:
        if not isinstance(value, bool):
            raise ScenarioError(f"{path}: expected true/false, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, typ):
        names = typ.__name__ if isinstance(typ, type) else "number"
        raise ScenarioError(f"{path}: expected {names}, got {value!r}")
    if typ == (int, float):
        value = float(value)
        if math.isnan(value):
            raise ScenarioError(f"{path}: NaN is not allowed")
    return value


def _resolve_tables(data: dict) -> dict:
    """Validate keys and types and fill defaults. Returns nested resolved tables."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a table")
    data = copy.deepcopy(data)
    data.pop("variant", None)
    missing = [k for k in MANDATORY_KEYS
               if k.rsplit(".", 1)[1] not in (data.get(k.rsplit(".", 1)[0]) or {})]
    if missing:
        raise ScenarioError("missing mandatory key(s): " + ", ".join(missing)
                            + "; mandatory keys are " + ", ".join(MANDATORY_KEYS))

    out: dict = {}
    nested = {"classical": "penalty", "protocol": "mu"}
    for key, val in data.items():
        if key in SCHEMA[""]:
            continue
        if key not in SCHEMA:
            raise ScenarioError(f"unknown key {key!r}")
        if not isinstance(val, dict):
            raise ScenarioError(f"{key}: expected a table")
    for sec, keys in SCHEMA.items():
        if sec == "":
            src = {k: v for k, v in data.items() if k in keys}
        elif "." in sec:
            parent, child = sec.split(".")
            src = (data.get(parent) or {}).get(child) or {}
            if not isinstance(src, dict):
                raise ScenarioError(f"{sec}: expected a table")
        else:
            src = dict(data.get(sec) or {})
            src.pop(nested.get(sec, ""), None)
        for k in src:
            if k not in keys:
                raise ScenarioError(f"unknown key {(sec + '.' if sec else '') + k!r}")
        table = {}
        for k, (typ, default) in keys.items():
            path = f"{sec}.{k}" if sec else k
            if k in src:
                table[k] = _check_type(path, src[k], typ)
            elif default is not None and default is not MANDATORY:
                table[k] = default
        if sec == "":
            out.update(table)
        elif "." in sec:
            parent, child = sec.split(".")
            out.setdefault(parent, {})[child] = table
        else:
            out.setdefault(sec, {}).update(table)
    return out


def _enum(cls, path: str, value: str):
    try:
        return cls(value.lower())
    except ValueError:
        known = ", ".join(m.value for m in cls)
        raise ScenarioError(f"{path}: unknown value {value!r}; expected one of {known}") from None


def _build(t: dict) -> LinkScenario:
    """Construct domain objects from resolved tables; range errors become ScenarioError."""
    f = t["fiber"]
    try:
        if "profile" in f:
            base = fib.get_fiber(f["profile"])
        else:
            needed = [k for k in ("alpha_db_per_km", "dispersion_D") if k not in f]
            if needed:
                raise ScenarioError("fiber: give 'profile' or " + ", ".join("fiber." + k for k in needed))
            base = fib.FiberProfile(f.get("label", "custom"), f["alpha_db_per_km"],
                                    f["dispersion_D"], f.get("dispersion_slope", 0.0))
    except KeyError as exc:
        raise ScenarioError(f"fiber.profile: {exc.args[0]}") from None
    except ValueError as exc:
        raise ScenarioError(f"fiber: {exc}") from None

    def guarded(path, fn, *a, **kw):
        try:
            return fn(*a, **kw)
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"{path}: {exc}") from None

    over = {k: f[k] for k in ("label", "alpha_db_per_km", "dispersion_D", "dispersion_slope",
                              "raman_cross_section") if k in f}
    fiber = guarded("fiber", base.with_overrides, **over)
    lam = f["lambda_nm"]
    if not lam > 0:
        raise ScenarioError("fiber.lambda_nm: must be > 0")

    p = t["pulse"]
    if not p["tau_fraction"] > 0:
        raise ScenarioError("pulse.tau_fraction: must be > 0")
    if not 0 < p["gate_fraction"] <= 1:
        raise ScenarioError("pulse.gate_fraction: must lie in (0, 1]")
    pulse = PulseRatios(p["tau_fraction"], p["gate_fraction"], p["chirp"])

    fr = t["f_rep"]
    frep = FrepPolicy(_enum(FrepMode, "f_rep.mode", fr["mode"]), fr["value_ghz"], fr["cap_ghz"],
                      fr["f_err_target"])
    if not (frep.value_ghz > 0 and frep.cap_ghz > 0):
        raise ScenarioError("f_rep: value_ghz and cap_ghz must be > 0")
    if not 0 < frep.f_err_target < 0.5:
        raise ScenarioError("f_rep.f_err_target: must lie in (0, 0.5)")

    c = t["classical"]
    pen = c["penalty"]
    classical = guarded(
        "classical", ClassicalChannelPlan,
        format=guarded("classical.format", ModulationFormat.parse, c["format"]),
        baud_gbaud=c["baud_gbaud"],
        fec=guarded("classical.fec", FecThreshold.of, c["fec"]),
        penalty=guarded("classical.penalty", PenaltyModel, pen["alpha_n"], pen["beta"],
                        pen["shot_noise_dbm"]),
        n_forward=c["n_forward"], n_backward=c["n_backward"],
        rx_sensitivity_dbm=c.get("rx_sensitivity_dbm"),
        il_db=c["il_db"], il_fbg_db=c["il_fbg_db"],
        iso_adjacent_db=c["iso_adjacent_db"], iso_nonadjacent_db=c["iso_nonadjacent_db"],
    )
    if not classical.baud_gbaud > 0:
        raise ScenarioError("classical.baud_gbaud: must be > 0")

    q = t["quantum_path"]
    if min(q.values()) < 0:
        raise ScenarioError("quantum_path: losses must be >= 0 dB")
    qpath = QuantumPath(q["il_db"], q["il_fbg_db"], q["b_db"])

    n = t["noise"]
    rho = n.get("rho_per_km_nm", fiber.raman_cross_section)
    if not rho > 0 or not n["delta_lambda_nm"] >= 0 or not n["quantum_isolation_db"] >= 0:
        raise ScenarioError("noise: rho must be > 0, delta_lambda and isolation >= 0")
    noise = NoiseConfig(rho, n["delta_lambda_nm"], n["quantum_isolation_db"], n["lcxt_enabled"])

    d = t["detector"]
    detector = guarded(
        "detector", DetectorModel,
        eta=d["eta"], dark_rate_per_ns=d["dark_rate_per_ns"],
        kind=_enum(DetectorKind, "detector.kind", d["kind"]),
        dead_time_s=d["dead_time_s"], afterpulse_frac=d["afterpulse_frac"],
        n_detectors=d["n_detectors"], gate_ns=d.get("gate_ns"),
    )

    pr = t["protocol"]
    mu = pr["mu"]
    policy = guarded("protocol.mu", MuPolicy, _enum(MuMode, "protocol.mu.mode", mu["mode"]), mu["value"])
    protocol = guarded(
        "protocol", ProtocolParams,
        protocol=_enum(ProtocolKind, "protocol.kind", pr["kind"]),
        visibility=pr["visibility"], eta_ec=pr["eta_ec"],
        qber_threshold=pr["qber_threshold"], mu_policy=policy,
    )
    if not (0 < pr["qber_threshold"] and pr["rsec_threshold_bps"] > 0):
        raise ScenarioError("protocol: thresholds must be > 0")
    thresholds = Thresholds(pr["qber_threshold"], pr["rsec_threshold_bps"])

    du = t["duty"]
    duty = DutyPolicy(_enum(DutyMode, "duty.mode", du["mode"]), du["constant"], du["l_a_km"])
    if not 0 < duty.constant <= 1 or not duty.l_a_km > 0:
        raise ScenarioError("duty: constant must lie in (0, 1] and l_a_km must be > 0")

    s = t["sweep"]
    sweep = SweepGrid(s["l_min_km"], s["l_max_km"], s["step_km"], s["reach_max_km"])
    if not sweep.step_km > 0:
        raise ScenarioError("sweep.step_km: must be > 0")
    if not 0 <= sweep.l_min_km < sweep.l_max_km:
        raise ScenarioError("sweep: need 0 <= l_min_km < l_max_km")
    if not sweep.reach_max_km > 0:
        raise ScenarioError("sweep.reach_max_km: must be > 0")

    g = t["noise_grid"]
    grid = NoiseGrid(g["p_out_min_dbm"], g["p_out_max_dbm"], g["p_out_step_db"])
    if not (grid.p_out_step_db > 0 and grid.p_out_min_dbm <= grid.p_out_max_dbm):
        raise ScenarioError("noise_grid: need step > 0 and min <= max")

    return LinkScenario(
        name=t["name"], description=t["description"], fiber=fiber, lambda_nm=lam, pulse=pulse,
        f_rep=frep, classical=classical, quantum_path=qpath, noise=noise, detector=detector,
        protocol=protocol, duty=duty, thresholds=thresholds, sweep=sweep, noise_grid=grid,
    )


def _canonical(t: dict, sc: LinkScenario) -> dict:
    """Resolved tables with derived defaults written out explicitly."""
    t = copy.deepcopy(t)
    fp = sc.fiber
    t["fiber"].update(label=fp.label, alpha_db_per_km=fp.alpha_db_per_km,
                      dispersion_D=fp.dispersion_D, dispersion_slope=fp.dispersion_slope,
                      raman_cross_section=fp.raman_cross_section)
    t["noise"]["rho_per_km_nm"] = sc.noise.rho_per_km_nm
    return _schema_order(t)


def _schema_order(t: dict) -> dict:
    """Same tables with keys in schema order, so serialization is stable."""
    out = {k: t[k] for k in SCHEMA[""] if k in t}
    for sec, keys in SCHEMA.items():
        if sec == "" or "." in sec or sec not in t:
            continue
        out[sec] = {k: t[sec][k] for k in keys if k in t[sec]}
    for sec in SCHEMA:
        if "." in sec:
            parent, child = sec.split(".")
            if child in t.get(parent, {}):
                out[parent][child] = {k: t[parent][child][k] for k in SCHEMA[sec]
                                      if k in t[parent][child]}
    return out


def from_dict(data: dict) -> LinkScenario:
    if not data:
        raise ScenarioError("empty scenario; mandatory keys are " + ", ".join(MANDATORY_KEYS))
    variants_raw = data.get("variant", [])
    if not isinstance(variants_raw, list):
        raise ScenarioError("variant: expected an array of tables ([[variant]])")
    tables = _resolve_tables(data)
    base = _build(tables)
    raw = _canonical(tables, base)

    variants = []
    base_data = copy.deepcopy(data)
    base_data.pop("variant", None)
    for i, v in enumerate(variants_raw):
        if not isinstance(v, dict) or "name" not in v:
            raise ScenarioError(f"variant[{i}]: each variant needs a 'name'")
        try:
            vt = _resolve_tables(_merge(base_data, v))
            vs = _build(vt)
        except ScenarioError as exc:
            raise ScenarioError(f"variant {v['name']!r}: {exc}") from None
        variants.append(replace(vs, _raw=_canonical(vt, vs)))
    if variants:
        raw["variant"] = [copy.deepcopy(v._raw) for v in variants]
    return replace(base, variants=tuple(variants), _raw=raw)


def loads(text: str) -> LinkScenario:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"cannot parse scenario: {exc}") from None
    return from_dict(data)


def load_scenario(path: str | Path) -> LinkScenario:
    """Load a scenario from a path, or a shipped preset by bare name."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and p.parent == Path("."):
        return load_preset(str(path))
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return loads(text)


def preset_names() -> list[str]:
    root = resources.files("ramanqkd") / "presets"
    return sorted(e.name[:-5] for e in root.iterdir() if e.name.endswith(".toml"))


def load_preset(name: str) -> LinkScenario:
    res = resources.files("ramanqkd") / "presets" / f"{name}.toml"
    if not res.is_file():
        raise ScenarioError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    return loads(res.read_text(encoding="utf-8"))

"""Detector statistics, protocol information terms, key rates and reach."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels

DEFAULT_QBER_THRESHOLD = 0.09
DEFAULT_RSEC_THRESHOLD_BPS = 853.0
LOW_RSEC_THRESHOLD_BPS = 8.53
ETA_EC = 6.0 / 5.0

MU_SCAN_POINTS = 200
MU_SCAN_DECADES = 4
# BB84 accepts mu up to t_F; this slack absorbs round-off at the boundary.
MU_TOL = 1e-12


class ValidityError(ValueError):
    """Parameters fall outside the region where the eavesdropper bound holds."""


class DetectorKind(enum.Enum):
    APD = "apd"
    SNSPD = "snspd"


class ProtocolKind(enum.Enum):
    BB84 = "bb84"
    COW = "cow"
    SARG = "sarg"

    @property
    def code(self) -> int:
        return {"bb84": kernels._kernels_py.BB84, "cow": kernels._kernels_py.COW,
                "sarg": kernels._kernels_py.SARG}[self.value]


class MuMode(enum.Enum):
    FIXED = "fixed"
    OPTIMIZED = "optimized"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class DetectorModel:
    eta: float
    dark_rate_per_ns: float
    kind: DetectorKind = DetectorKind.APD
    dead_time_s: float = 0.0
    afterpulse_frac: float = 0.0
    n_detectors: int = 2
    gate_ns: float | None = None  # None: track the gate fraction of the bit period

    def __post_init__(self) -> None:
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if self.dark_rate_per_ns < 0 or self.dead_time_s < 0:
            raise ValueError("dark_rate_per_ns and dead_time_s must be >= 0")
        if self.afterpulse_frac < 0:
            raise ValueError(f"afterpulse_frac must be >= 0, got {self.afterpulse_frac}")
        if self.n_detectors < 1:
            raise ValueError(f"n_detectors must be >= 1, got {self.n_detectors}")
        if self.gate_ns is not None and not self.gate_ns > 0:
            raise ValueError(f"gate_ns must be > 0, got {self.gate_ns}")


@dataclass(frozen=True)
class MuPolicy:
    mode: MuMode = MuMode.FIXED
    value: float = 0.5

    def __post_init__(self) -> None:
        if self.mode is MuMode.FIXED and not self.value > 0:
            raise ValueError(f"fixed mu must be > 0, got {self.value}")


@dataclass(frozen=True)
class ProtocolParams:
    protocol: ProtocolKind = ProtocolKind.COW
    visibility: float = 1.0
    eta_ec: float = ETA_EC
    qber_threshold: float = DEFAULT_QBER_THRESHOLD
    mu_policy: MuPolicy = field(default_factory=MuPolicy)

    def __post_init__(self) -> None:
        if not 0 < self.visibility <= 1:
            raise ValueError(f"visibility must lie in (0, 1], got {self.visibility}")
        if self.eta_ec < 1:
            raise ValueError(f"eta_ec must be >= 1, got {self.eta_ec}")

    @property
    def beta(self) -> float:
        if self.protocol is ProtocolKind.SARG:
            return (2.0 - self.visibility) / 2.0
        return 1.0


@dataclass(frozen=True)
class RateBreakdown:
    mu: float
    p_mu: float
    p_dc_total: float
    p_ap: float
    p_ram_f: float
    p_ram_b: float
    p_lcxt: float
    p_isi: float
    t_isi: float
    eta_dead: float
    eta_duty: float
    f_rep_ghz: float
    r_raw: float
    r_sift: float
    r_sec: float
    qber: float
    i_ab: float
    i_ae: float

    @property
    def p_ram(self) -> float:
        return self.p_ram_f + self.p_ram_b


# -- elementary terms ---------------------------------------------------------

def signal_prob(mu, t_F, t_IL, t_IL_FBG, t_B, t_ISI, eta):
    return mu * t_F * t_IL * t_IL_FBG * t_B * t_ISI * eta


def afterpulse_prob(rho_AP, p_mu, p_dc_total, p_ram, p_lcxt, p_isi):
    return rho_AP * (p_mu + p_dc_total + p_ram + p_lcxt + p_isi)


def dead_time_factor(tau_dead_s: float, f_rep_hz: float, total_click_prob: float) -> float:
    if tau_dead_s < 0 or f_rep_hz < 0 or total_click_prob < 0:
        raise ValueError("dead-time inputs must be >= 0")
    return 1.0 / (1.0 + tau_dead_s * f_rep_hz * total_click_prob)


def duty_factor(l_A_km: float, length_km: float) -> float:
    """Plug-and-play duty ratio for a storage line of length ``l_A_km``."""
    if not l_A_km > 0:
        raise ValueError(f"l_A_km must be > 0, got {l_A_km}")
    return l_A_km / (length_km + l_A_km)


def rates(p_mu, noise_total, f_rep_hz, beta, eta_duty, eta_dead):
    """Raw and sifted detection rates in b/s.

    ``noise_total`` is every non-signal click probability including after-pulses.
    """
    common = f_rep_hz * eta_duty * eta_dead
    return (p_mu + noise_total) * common, 0.5 * (beta * p_mu + noise_total) * common


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def mutual_info_ab(qber_value: float, eta_ec: float = ETA_EC) -> float:
    if not 0.0 <= qber_value <= 0.5:
        raise ValueError(f"qber must lie in [0, 0.5], got {qber_value}")
    return 1.0 - eta_ec * binary_entropy(qber_value)


I_PNS_1 = 1.0 - binary_entropy(0.5 * (1.0 + math.sqrt(0.5)))


def eve_info(protocol: ProtocolKind, mu: float, t_F: float, V: float, eta: float = 1.0,
             p_dc: float = 0.0, N_d: int = 2) -> float:
    """Eavesdropper information per sifted bit.

    ``p_dc`` is the per-gate dark-count probability of one detector.

    Raises
    ------
    ValidityError
        For BB84 when ``mu > t_F`` or the auxiliary ``d`` leaves [0, 1).
    """
    if not 0 < t_F <= 1:
        raise ValueError(f"t_F must lie in (0, 1], got {t_F}")
    if protocol is ProtocolKind.BB84:
        ratio = mu / t_F
        if mu <= 0 or ratio > 1.0 + MU_TOL:
            raise ValidityError(f"BB84 needs 0 < mu <= t_F; got mu={mu:.4g}, t_F={t_F:.4g}")
        d = (1.0 - V) / (2.0 - ratio)
        if not 0.0 <= d < 1.0:
            raise ValidityError(f"BB84 auxiliary d={d:.4g} outside [0, 1); reduce mu")
        P = 0.5 + math.sqrt(d * (1.0 - d))
        top = (1.0 - 0.5 * ratio) * (1.0 - binary_entropy(P)) + 0.5 * ratio
        return top / (1.0 + N_d * p_dc / (mu * t_F * eta))
    if protocol is ProtocolKind.COW:
        e = math.exp(-mu * t_F)
        return mu * (1.0 - t_F) + (1.0 - V) * (1.0 + e) / (2.0 * e)
    return I_PNS_1 + (mu * mu / t_F) * math.exp(-mu) * (1.0 - I_PNS_1) / 12.0


def qber(protocol: ProtocolKind, beta: float, V: float, p_mu: float, noise_total: float) -> float:
    """Error fraction of the sifted key. All-noise or empty input gives 0.5."""
    den = beta * p_mu + noise_total
    if den <= 0:
        return 0.5
    num = noise_total if protocol is ProtocolKind.COW else p_mu * (1.0 - V) + noise_total
    return 0.5 * num / den


def secret_key_rate(r_sift: float, i_ab: float, i_ae: float) -> float:
    return max(0.0, r_sift * (i_ab - i_ae))


# -- one link length ----------------------------------------------------------

@dataclass(frozen=True)
class LinkState:
    """Everything the rate equations need at one fiber length, apart from mu."""

    length_km: float
    t_F: float
    t_chain: float  # t_IL * t_IL,FBG * t_B
    t_isi: float
    f_err: float
    p_ram_f: float
    p_ram_b: float
    p_lcxt: float
    f_rep_ghz: float
    gate_ns: float
    eta_duty: float
    detector: DetectorModel
    protocol: ProtocolParams

    @property
    def p_dc(self) -> float:
        """Per-gate dark-count probability of one detector."""
        return self.detector.dark_rate_per_ns * self.gate_ns

    @property
    def mu_max(self) -> float:
        return self.t_F if self.protocol.protocol is ProtocolKind.BB84 else 1.0

    def analytic_mu(self) -> float:
        kind = self.protocol.protocol
        if kind is ProtocolKind.BB84:
            return self.t_F
        if kind is ProtocolKind.COW:
            return 0.5
        return 2.0 * math.sqrt(self.t_F)

    def params_vector(self) -> np.ndarray:
        det, pro = self.detector, self.protocol
        return np.array([
            self.t_F, self.t_chain, self.t_isi, self.f_err, det.eta, self.p_dc,
            float(det.n_detectors), self.p_ram_f + self.p_ram_b, self.p_lcxt,
            det.afterpulse_frac, det.dead_time_s, self.f_rep_ghz * 1e9, self.eta_duty,
            pro.visibility, pro.beta, pro.eta_ec, float(pro.protocol.code), MU_TOL,
        ], dtype=np.float64)

    def breakdown(self, mu: float) -> RateBreakdown:
        """Full scalar evaluation at one mu. Invalid BB84 points report r_sec = 0."""
        det, pro = self.detector, self.protocol
        eta = det.eta
        p_mu = signal_prob(mu, self.t_F, self.t_chain, 1.0, 1.0, self.t_isi, eta)
        p_isi = 2.0 * self.f_err * mu * self.t_F * self.t_chain * eta
        p_dc_total = det.n_detectors * self.p_dc
        p_ram = self.p_ram_f + self.p_ram_b
        p_ap = afterpulse_prob(det.afterpulse_frac, p_mu, p_dc_total, p_ram, self.p_lcxt, p_isi)
        noise = p_dc_total + p_ap + p_ram + self.p_lcxt + p_isi
        f_hz = self.f_rep_ghz * 1e9
        eta_dead = dead_time_factor(det.dead_time_s, f_hz, p_mu + noise)
        r_raw, r_sift = rates(p_mu, noise, f_hz, pro.beta, self.eta_duty, eta_dead)
        q = qber(pro.protocol, pro.beta, pro.visibility, p_mu, noise)
        i_ab = mutual_info_ab(q, pro.eta_ec)
        try:
            i_ae = eve_info(pro.protocol, mu, self.t_F, pro.visibility, eta, self.p_dc,
                            det.n_detectors)
            r_sec = secret_key_rate(r_sift, i_ab, i_ae)
        except ValidityError:
            i_ae, r_sec = math.nan, 0.0
        return RateBreakdown(
            mu=mu, p_mu=p_mu, p_dc_total=p_dc_total, p_ap=p_ap, p_ram_f=self.p_ram_f,
            p_ram_b=self.p_ram_b, p_lcxt=self.p_lcxt, p_isi=p_isi, t_isi=self.t_isi,
            eta_dead=eta_dead, eta_duty=self.eta_duty, f_rep_ghz=self.f_rep_ghz,
            r_raw=r_raw, r_sift=r_sift, r_sec=r_sec, qber=q, i_ab=i_ab, i_ae=i_ae,
        )

    def r_sec_curve(self, mu: np.ndarray) -> np.ndarray:
        return kernels.evaluate_mu(mu, self.params_vector())[2]


def optimize_mu(state: LinkState, points: int = MU_SCAN_POINTS) -> tuple[float, float]:
    """mu maximizing the secret key rate on ``(0, mu_max]``.

    A log-spaced scan locates the best cell, then a bounded scalar search
    refines within its neighbours. Returns ``(mu_opt, r_sec)``; when no mu
    gives a positive rate the analytic guess clipped to ``mu_max`` is returned
    with rate 0.
    """
    mu_max = state.mu_max
    grid = np.geomspace(mu_max * 10.0**-MU_SCAN_DECADES, mu_max, points)
    curve = state.r_sec_curve(grid)
    k = int(np.argmax(curve))
    if not curve[k] > 0:
        warnings.warn(
            f"no mu gives a positive key rate at L={state.length_km:g} km",
            RuntimeWarning, stacklevel=2,
        )
        return min(state.analytic_mu(), mu_max), 0.0
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, points - 1)]
    params = state.params_vector()

    def neg(m: float) -> float:
        return -float(kernels.evaluate_mu(np.array([m]), params)[2][0])

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": lo * 1e-6})
    if -res.fun >= curve[k]:
        return float(res.x), float(-res.fun)
    return float(grid[k]), float(curve[k])


def resolve_mu(state: LinkState) -> float:
    policy = state.protocol.mu_policy
    if policy.mode is MuMode.FIXED:
        return policy.value
    if policy.mode is MuMode.ANALYTIC:
        return min(state.analytic_mu(), state.mu_max)
    return optimize_mu(state)[0]


def evaluate_at_length(state: LinkState) -> RateBreakdown:
    return state.breakdown(resolve_mu(state))


# -- reach --------------------------------------------------------------------

class _Evaluates(Protocol):
    def evaluate(self, length_km: float) -> RateBreakdown: ...


@dataclass(frozen=True)
class ReachResult:
    reach_km: float
    limiting: str  # "qber", "r_sec", "none" (never fails in range) or "unreachable"
    at_reach: RateBreakdown | None = None


def _meets(b: RateBreakdown, qber_thr: float, rsec_thr: float) -> bool:
    return b.qber <= qber_thr and b.r_sec >= rsec_thr


def _limit_of(b: RateBreakdown, qber_thr: float) -> str:
    return "qber" if b.qber > qber_thr else "r_sec"


def link_reach(
    link: _Evaluates | Callable[[float], RateBreakdown],
    qber_thr: float = DEFAULT_QBER_THRESHOLD,
    rsec_thr_bps: float = DEFAULT_RSEC_THRESHOLD_BPS,
    l_max_km: float = 400.0,
    grid_km: float = 0.5,
    tol_km: float = 0.1,
) -> ReachResult:
    """Longest length meeting both thresholds.

    Scans a ``grid_km`` grid from 0, takes the last passing point before the
    first failure, and bisects the following cell down to ``tol_km``.
    """
    if not (qber_thr > 0 and rsec_thr_bps > 0):
        raise ValueError("thresholds must be > 0")
    ev = link.evaluate if hasattr(link, "evaluate") else link
    n = int(round(l_max_km / grid_km))
    last_ok: tuple[float, RateBreakdown] | None = None
    fail: tuple[float, RateBreakdown] | None = None
    for i in range(n + 1):
        L = i * grid_km
        b = ev(L)
        if _meets(b, qber_thr, rsec_thr_bps):
            last_ok = (L, b)
        else:
            fail = (L, b)
            break
    if last_ok is None:
        warnings.warn("no length satisfies the thresholds; reach is 0", RuntimeWarning,
                      stacklevel=2)
        return ReachResult(0.0, "unreachable", None)
    if fail is None:
        return ReachResult(last_ok[0], "none", last_ok[1])
    lo, hi = last_ok[0], fail[0]
    lo_b, hi_b = last_ok[1], fail[1]
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        b = ev(mid)
        if _meets(b, qber_thr, rsec_thr_bps):
            lo, lo_b = mid, b
        else:
            hi, hi_b = mid, b
    return ReachResult(lo, _limit_of(hi_b, qber_thr), lo_b)


def with_mu(state: LinkState, mu: float) -> LinkState:
    """Copy of ``state`` whose protocol uses a fixed ``mu``."""
    pro = replace(state.protocol, mu_policy=MuPolicy(MuMode.FIXED, mu))
    return replace(state, protocol=pro)

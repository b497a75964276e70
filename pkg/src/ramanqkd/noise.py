"""Noise photons reaching the quantum detector: Raman scattering and crosstalk.

Internal units are W, J and ns; dBm only appears at the function boundary.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

NS = 1e-9


class ModelValidityWarning(UserWarning):
    """A per-gate probability exceeded 1 and was clamped."""


def raman_powers(
    n_f: float,
    n_b: float,
    p_out_W: float,
    alpha_nat_per_km: float,
    length_km: float,
    rho_per_km_nm: float,
    delta_lambda_nm: float,
) -> tuple[float, float]:
    """Forward and backward Raman power (W) in the quantum channel band.

    Both are referenced to the classical power at the fiber output.
    """
    for name, v in (("n_f", n_f), ("n_b", n_b), ("p_out_W", p_out_W),
                    ("alpha_nat_per_km", alpha_nat_per_km), ("length_km", length_km),
                    ("rho_per_km_nm", rho_per_km_nm), ("delta_lambda_nm", delta_lambda_nm)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    scale = p_out_W * rho_per_km_nm * delta_lambda_nm
    forward = n_f * scale * length_km
    x = alpha_nat_per_km * length_km
    # sinh(aL)/a, tending to L as a -> 0
    eff = length_km if x < 1e-8 else math.sinh(x) / alpha_nat_per_km
    backward = n_b * scale * eff
    return forward, backward


def _clamp(p: float, what: str) -> float:
    if p > 1.0:
        warnings.warn(
            f"{what} detection probability {p:.4g} exceeds 1; clamped (model validity exceeded)",
            ModelValidityWarning,
            stacklevel=3,
        )
        return 1.0
    return p


def raman_detection_prob(P_ram_W: float, photon_energy_J: float, eta: float, gate_ns: float) -> float:
    if P_ram_W < 0 or eta < 0 or gate_ns < 0:
        raise ValueError("P_ram_W, eta and gate_ns must be >= 0")
    return _clamp(P_ram_W / photon_energy_J * eta * gate_ns * NS, "Raman")


def lcxt_detection_rate(rx_dbm: float, photon_energy_J: float, eta: float, isolation_db: float) -> float:
    """Crosstalk click rate per ns with the classical receiver at sensitivity."""
    if isolation_db < 0:
        raise ValueError(f"isolation_db must be >= 0, got {isolation_db}")
    if math.isinf(isolation_db):
        return 0.0
    n_d = 10.0 ** (rx_dbm / 10.0) / photon_energy_J * 1e-12
    return eta * n_d * 10.0 ** (-isolation_db / 10.0)


def isolation_for_rate(rx_dbm: float, photon_energy_J: float, eta: float, rate_per_ns: float) -> float:
    """Isolation (dB) at which crosstalk clicks match ``rate_per_ns``."""
    n_d = 10.0 ** (rx_dbm / 10.0) / photon_energy_J * 1e-12
    return 10.0 * math.log10(eta * n_d / rate_per_ns)


@dataclass(frozen=True)
class NoiseBudget:
    p_ram_f: float
    p_ram_b: float
    p_lcxt: float
    raman_power_f_W: float = 0.0
    raman_power_b_W: float = 0.0

    @property
    def p_ram(self) -> float:
        return self.p_ram_f + self.p_ram_b


ZERO_NOISE = NoiseBudget(0.0, 0.0, 0.0)


def noise_budget(
    n_f: float,
    n_b: float,
    p_out_dbm: float,
    rx_dbm: float,
    alpha_nat_per_km: float,
    length_km: float,
    rho_per_km_nm: float,
    delta_lambda_nm: float,
    photon_energy_J: float,
    eta: float,
    gate_ns: float,
    isolation_db: float,
    lcxt_enabled: bool = True,
) -> NoiseBudget:
    """Per-gate Raman and crosstalk click probabilities for one link length."""
    if n_f == 0 and n_b == 0:
        return ZERO_NOISE
    p_out_W = 1e-3 * 10.0 ** (p_out_dbm / 10.0)
    pf_W, pb_W = raman_powers(n_f, n_b, p_out_W, alpha_nat_per_km, length_km,
                              rho_per_km_nm, delta_lambda_nm)
    p_f = raman_detection_prob(pf_W, photon_energy_J, eta, gate_ns)
    p_b = raman_detection_prob(pb_W, photon_energy_J, eta, gate_ns)
    p_x = 0.0
    if lcxt_enabled:
        p_x = _clamp(lcxt_detection_rate(rx_dbm, photon_energy_J, eta, isolation_db) * gate_ns,
                     "crosstalk")
    return NoiseBudget(p_f, p_b, p_x, pf_W, pb_W)

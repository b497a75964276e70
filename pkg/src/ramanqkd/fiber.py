"""Fiber parameters and the loss/dispersion conversions used everywhere else.

All dB quantities are converted to natural units here; downstream modules
work with linear transmissions and ``km^-1`` attenuation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Speed of light in nm/ps (numerically equal to km/s / 1e3).
C_NM_PER_PS = 299792.458
PLANCK_J_S = 6.62607015e-34
C_M_PER_S = 299792458.0
DEFAULT_WAVELENGTH_NM = 1550.0

DB_TO_NEPER = math.log(10.0) / 10.0


@dataclass(frozen=True)
class FiberProfile:
    """Physical parameters of one fiber family.

    ``dispersion_D`` may take either sign; the models use its magnitude.
    ``dispersion_slope`` is carried for reference only.
    """

    label: str
    alpha_db_per_km: float
    dispersion_D: float
    dispersion_slope: float
    raman_cross_section: float = 2.6e-9

    def __post_init__(self) -> None:
        if not self.alpha_db_per_km > 0:
            raise ValueError(f"alpha_db_per_km must be > 0, got {self.alpha_db_per_km}")
        if not self.raman_cross_section > 0:
            raise ValueError(
                f"raman_cross_section must be > 0, got {self.raman_cross_section}"
            )

    @property
    def alpha_nat_per_km(self) -> float:
        return alpha_to_natural(self.alpha_db_per_km)

    def with_overrides(self, **kwargs) -> "FiberProfile":
        data = {
            "label": self.label,
            "alpha_db_per_km": self.alpha_db_per_km,
            "dispersion_D": self.dispersion_D,
            "dispersion_slope": self.dispersion_slope,
            "raman_cross_section": self.raman_cross_section,
        }
        data.update(kwargs)
        return FiberProfile(**data)


@dataclass(frozen=True)
class WavelengthContext:
    lambda_nm: float = DEFAULT_WAVELENGTH_NM

    def __post_init__(self) -> None:
        if not self.lambda_nm > 0:
            raise ValueError(f"lambda_nm must be > 0, got {self.lambda_nm}")

    @property
    def photon_energy_J(self) -> float:
        return photon_energy(self.lambda_nm)


# Rough family characteristics. SMF28e ships in both loss variants.
BUILTIN_FIBERS: dict[str, FiberProfile] = {
    "ex2000": FiberProfile("ex2000", 0.16, 20.35, 0.06),
    "leaf": FiberProfile("leaf", 0.185, 4.25, 0.085),
    "ldf": FiberProfile("ldf", 0.185, 0.1, 0.085),
    "smf28e": FiberProfile("smf28e", 0.21, 17.0, 0.06),
    "smf28e_0.3": FiberProfile("smf28e_0.3", 0.3, 17.0, 0.06),
}


def get_fiber(label: str) -> FiberProfile:
    try:
        return BUILTIN_FIBERS[label]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_FIBERS))
        raise KeyError(f"unknown fiber profile {label!r}; known profiles: {known}") from None


def photon_energy(lambda_nm: float = DEFAULT_WAVELENGTH_NM) -> float:
    """Photon energy ``h c / lambda`` in joules."""
    return PLANCK_J_S * C_M_PER_S / (lambda_nm * 1e-9)


def alpha_to_natural(alpha_db_per_km: float) -> float:
    return alpha_db_per_km * DB_TO_NEPER


def db_to_linear(db: float) -> float:
    """Loss in dB to a transmission fraction (``10 dB -> 0.1``)."""
    return 10.0 ** (-db / 10.0)


def dbm_to_watt(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3)


def transmission(alpha_db_per_km: float, length_km: float) -> float:
    """Fiber power transmission ``10^(-alpha L / 10)``."""
    if length_km < 0:
        raise ValueError(f"length_km must be >= 0, got {length_km}")
    return math.exp(-alpha_to_natural(alpha_db_per_km) * length_km)


def beta2_from_D(D_ps_nm_km: float, lambda_nm: float = DEFAULT_WAVELENGTH_NM) -> float:
    """Group-velocity dispersion in ps^2/km.

    Positive ``D`` (anomalous dispersion) maps to negative ``beta2``.
    """
    if not lambda_nm > 0:
        raise ValueError(f"lambda_nm must be > 0, got {lambda_nm}")
    return -D_ps_nm_km * lambda_nm**2 / (2.0 * math.pi * C_NM_PER_PS)


def D_from_beta2(beta2_ps2_km: float, lambda_nm: float = DEFAULT_WAVELENGTH_NM) -> float:
    if not lambda_nm > 0:
        raise ValueError(f"lambda_nm must be > 0, got {lambda_nm}")
    return -beta2_ps2_km * 2.0 * math.pi * C_NM_PER_PS / lambda_nm**2


def dispersion_length(tau_fwhm0_ps: float, beta2_ps2_km: float) -> float:
    """Characteristic dispersion length in km.

    Returns ``math.inf`` when ``beta2`` is zero: the pulse never broadens.
    """
    if not tau_fwhm0_ps > 0:
        raise ValueError(f"tau_fwhm0_ps must be > 0, got {tau_fwhm0_ps}")
    if beta2_ps2_km == 0:
        return math.inf
    return tau_fwhm0_ps**2 / (4.0 * math.log(2.0) * abs(beta2_ps2_km))


def dcf_length(length_km: float, D_ps_nm_km: float, D_dcf: float = -100.0) -> float:
    """Length of compensating fiber that cancels the accumulated dispersion."""
    return length_km * abs(D_ps_nm_km) / abs(D_dcf)

"""Chirped Gaussian pulse propagation and the ISI quantities derived from it.

Times are in ps, lengths in km, rates in GHz unless a name says otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect
from scipy.special import erfc, erfcinv

from .fiber import C_NM_PER_PS, DEFAULT_WAVELENGTH_NM, beta2_from_D, dispersion_length

SQRT_LN2 = math.sqrt(math.log(2.0))

# Geometric bracket for the f_max root search, GHz.
FMAX_BRACKET_GHZ = (1e-3, 1e3)
FMAX_BRACKET_CAP_GHZ = (1e-9, 1e9)


class UnboundedBitrate(Exception):
    """Raised when dispersion does not limit the bit rate (D = 0 or L = 0)."""


@dataclass(frozen=True)
class PulseSpec:
    tau_fwhm0_ps: float
    chirp_C: float = 0.0
    gate_ps: float = 500.0
    period_ps: float = 1000.0

    def __post_init__(self) -> None:
        if not self.tau_fwhm0_ps > 0:
            raise ValueError(f"tau_fwhm0_ps must be > 0, got {self.tau_fwhm0_ps}")
        if not 0 < self.gate_ps <= self.period_ps:
            raise ValueError(
                f"need 0 < gate_ps <= period_ps, got gate={self.gate_ps}, period={self.period_ps}"
            )

    @classmethod
    def from_rate(
        cls, f_rep_ghz: float, tau_fraction: float = 0.1, gate_fraction: float = 0.5,
        chirp_C: float = 0.0,
    ) -> "PulseSpec":
        """Pulse and gate expressed as fractions of the bit period ``1/f_rep``."""
        period = 1000.0 / f_rep_ghz
        return cls(tau_fraction * period, chirp_C, gate_fraction * period, period)

    @property
    def tau0_ps(self) -> float:
        """1/e intensity half-width."""
        return self.tau_fwhm0_ps / (2.0 * SQRT_LN2)


@dataclass(frozen=True)
class PropagatedPulse:
    tau_fwhm_L_ps: float
    chirp_final: float
    broadening_ratio: float


def broadened_fwhm(spec: PulseSpec, beta2_ps2_km: float, length_km: float) -> PropagatedPulse:
    if length_km < 0:
        raise ValueError(f"length_km must be >= 0, got {length_km}")
    C = spec.chirp_C
    if beta2_ps2_km == 0 or length_km == 0:
        return PropagatedPulse(spec.tau_fwhm0_ps, C, 1.0)
    L_D = dispersion_length(spec.tau_fwhm0_ps, beta2_ps2_km)
    chirp_term = 1.0 + C * beta2_ps2_km * length_km / spec.tau0_ps**2
    ratio = math.sqrt(chirp_term**2 + (length_km / L_D) ** 2)
    return PropagatedPulse(
        spec.tau_fwhm0_ps * ratio,
        final_chirp(C, beta2_ps2_km, length_km, L_D),
        ratio,
    )


def final_chirp(chirp_C: float, beta2_ps2_km: float, z_km: float, L_D: float) -> float:
    if beta2_ps2_km == 0 or math.isinf(L_D):
        return chirp_C
    return chirp_C + math.copysign(1.0, beta2_ps2_km) * z_km / L_D * (1.0 + chirp_C**2)


def minimum_width_length(spec: PulseSpec, beta2_ps2_km: float) -> float | None:
    """Distance at which a pre-chirped pulse is shortest, or None if it only broadens."""
    C = spec.chirp_C
    if beta2_ps2_km * C >= 0:
        return None
    L_D = dispersion_length(spec.tau_fwhm0_ps, beta2_ps2_km)
    return L_D * abs(C) / (1.0 + C**2)


def spectral_width_fwhm(spec: PulseSpec) -> float:
    """Intensity FWHM spectral width in GHz."""
    tau_ns = spec.tau_fwhm0_ps * 1e-3
    return (2.0 * math.log(2.0) / math.pi) * math.sqrt(1.0 + spec.chirp_C**2) / tau_ns


def isi_error_fraction(tau_fwhm_L_ps: float, period_ps: float, gate_ps: float) -> float:
    """Mass of a pulse that lands in the neighbouring bit's gate."""
    if not tau_fwhm_L_ps > 0:
        raise ValueError(f"tau_fwhm_L_ps must be > 0, got {tau_fwhm_L_ps}")
    k = SQRT_LN2 / tau_fwhm_L_ps
    return 0.5 * (erfc(k * (2.0 * period_ps - gate_ps)) - erfc(k * (2.0 * period_ps + gate_ps)))


def gate_capture(tau_fwhm_L_ps: float, gate_ps: float) -> float:
    """Fraction of the pulse energy inside its own detector gate."""
    if not (tau_fwhm_L_ps > 0 and gate_ps > 0):
        raise ValueError("tau_fwhm_L_ps and gate_ps must be positive")
    a = gate_ps * SQRT_LN2 / tau_fwhm_L_ps
    return 0.5 * (erfc(-a) - erfc(a))


def p_isi(f_err: float, mu: float, t_F: float, t_IL: float, t_IL_FBG: float, t_B: float,
          eta: float) -> float:
    """Detection probability from both neighbouring bits' ISI tails."""
    return 2.0 * f_err * mu * t_F * t_IL * t_IL_FBG * t_B * eta


def _fmax_residual(f_ghz, D, lambda_nm, length_km, f_err, tau_fraction, gate_fraction):
    # Left side of the f_max condition in its practical units minus the target.
    prefactor = (2.0 - gate_fraction) * SQRT_LN2 / tau_fraction
    x = (
        2.0 * math.log(2.0) * lambda_nm**2 * abs(D) * f_ghz**2 * length_km
        / (1e6 * tau_fraction**2 * math.pi * C_NM_PER_PS)
    )
    return 0.5 * erfc(prefactor / math.sqrt(1.0 + x * x)) - f_err


def max_quantum_bitrate(
    D_ps_nm_km: float,
    lambda_nm: float = DEFAULT_WAVELENGTH_NM,
    length_km: float = 100.0,
    f_err_target: float = 1e-3,
    tau_fraction: float = 0.1,
    gate_fraction: float = 0.5,
    rtol: float = 1e-9,
) -> float:
    """Largest bit rate (GHz) whose leading ISI overlap stays at ``f_err_target``.

    The pulse width and gate are held at fixed fractions of the bit period, so
    only dispersive broadening changes with the rate. Only the nearer edge of
    the neighbouring gate is kept in the overlap, as it dominates for small
    targets.

    Raises
    ------
    UnboundedBitrate
        If ``D`` or ``length_km`` is zero.
    ValueError
        If no sign change is found before the bracket cap.
    """
    if not length_km > 0 or D_ps_nm_km == 0:
        raise UnboundedBitrate("dispersion does not limit the bit rate")
    if not 0 < f_err_target < 0.5:
        raise ValueError(f"f_err_target must lie in (0, 0.5), got {f_err_target}")
    args = (D_ps_nm_km, lambda_nm, length_km, f_err_target, tau_fraction, gate_fraction)
    # At f -> 0 the residual tends to 0.5*erfc(prefactor) - f_err.
    if _fmax_residual(0.0, *args) > 0:
        raise ValueError(
            "f_err_target is below the undispersed overlap; no positive root exists"
        )
    lo, hi = FMAX_BRACKET_GHZ
    while _fmax_residual(lo, *args) > 0:
        lo /= 10.0
        if lo < FMAX_BRACKET_CAP_GHZ[0]:
            raise ValueError("no sign change found for f_max above the lower bracket cap")
    while _fmax_residual(hi, *args) < 0:
        hi *= 10.0
        if hi > FMAX_BRACKET_CAP_GHZ[1]:
            raise ValueError("no sign change found for f_max below the upper bracket cap")
    return bisect(_fmax_residual, lo, hi, args=args, xtol=1e-15, rtol=rtol, maxiter=500)


def max_quantum_bitrate_si(
    D_ps_nm_km: float,
    lambda_nm: float = DEFAULT_WAVELENGTH_NM,
    length_km: float = 100.0,
    f_err_target: float = 1e-3,
    tau_fraction: float = 0.1,
    gate_fraction: float = 0.5,
) -> float:
    """Closed-form f_max in GHz, worked entirely in SI units.

    Independent check for :func:`max_quantum_bitrate`: inverts the overlap
    target with ``erfcinv`` and solves the broadening relation for the period
    directly instead of bisecting in practical units.
    """
    if not length_km > 0 or D_ps_nm_km == 0:
        raise UnboundedBitrate("dispersion does not limit the bit rate")
    c = 299792458.0
    lam = lambda_nm * 1e-9
    D_si = abs(D_ps_nm_km) * 1e-12 / (1e-9 * 1e3)  # s/m^2
    beta2 = D_si * lam**2 / (2.0 * math.pi * c)  # s^2/m
    L = length_km * 1e3
    arg = erfcinv(2.0 * f_err_target)
    # Required broadening ratio, then the period at which it is reached.
    ratio = (2.0 - gate_fraction) * SQRT_LN2 / (tau_fraction * arg)
    if ratio <= 1.0:
        raise ValueError("target unreachable without broadening")
    L_over_LD = math.sqrt(ratio**2 - 1.0)
    # L / L_D = 4 ln2 beta2 L / (tau_fraction T)^2
    T = math.sqrt(4.0 * math.log(2.0) * beta2 * L / L_over_LD) / tau_fraction
    return 1.0 / T / 1e9


def gate_capture_at_target(
    f_err_target: float, tau_fraction: float = 0.1, gate_fraction: float = 0.5
) -> float:
    """Gate capture of a pulse broadened until its leading overlap hits the target.

    Independent of the fiber: at the operating point the erfc argument of the
    capture scales from the overlap argument by ``gate / (2T - gate)``.
    """
    del tau_fraction  # cancels out
    arg = erfcinv(2.0 * f_err_target)
    a = arg * gate_fraction / (2.0 - gate_fraction)
    return 0.5 * (erfc(-a) - erfc(a))


def resolve_pulse(
    f_rep_ghz: float,
    D_ps_nm_km: float,
    length_km: float,
    lambda_nm: float = DEFAULT_WAVELENGTH_NM,
    tau_fraction: float = 0.1,
    gate_fraction: float = 0.5,
    chirp_C: float = 0.0,
) -> tuple[PulseSpec, PropagatedPulse, float, float]:
    """Pulse spec, propagated pulse, gate capture and ISI overlap at one length."""
    spec = PulseSpec.from_rate(f_rep_ghz, tau_fraction, gate_fraction, chirp_C)
    prop = broadened_fwhm(spec, beta2_from_D(D_ps_nm_km, lambda_nm), length_km)
    t_isi = gate_capture(prop.tau_fwhm_L_ps, spec.gate_ps)
    f_err = isi_error_fraction(prop.tau_fwhm_L_ps, spec.period_ps, spec.gate_ps)
    return spec, prop, t_isi, f_err

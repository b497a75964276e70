"""Independent reference computations used by the tests.

Nothing here imports the package: each oracle recomputes a quantity from
first principles (quadrature, brute force, arbitrary precision, simulation).
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.integrate import quad

LN2 = math.log(2.0)


def gaussian_intensity(t, tau_fwhm):
    """Unit-area Gaussian intensity profile with the given FWHM."""
    return 2.0 * math.sqrt(LN2 / math.pi) / tau_fwhm * math.exp(-4.0 * LN2 * t * t / tau_fwhm**2)


def mass_between(a, b, tau_fwhm):
    """Pulse energy in [a, b] by adaptive quadrature."""
    pts = [0.0] if a < 0.0 < b else None
    val, _ = quad(gaussian_intensity, a, b, args=(tau_fwhm,), epsabs=1e-14, epsrel=1e-13,
                  limit=400, points=pts)
    return val


def tail_mass(a, tau_fwhm):
    val, _ = quad(gaussian_intensity, a, math.inf, args=(tau_fwhm,), epsabs=1e-14,
                  epsrel=1e-13, limit=400)
    return val


def isi_fraction_quad(tau_fwhm, period, gate):
    return mass_between(period - gate / 2.0, period + gate / 2.0, tau_fwhm)


def gate_capture_quad(tau_fwhm, gate):
    return mass_between(-gate / 2.0, gate / 2.0, tau_fwhm)


def erfc_mp(x, dps=40):
    with mpmath.workdps(dps):
        return float(mpmath.erfc(mpmath.mpf(x)))


def erfc_table(n=121):
    xs = np.linspace(-6.0, 6.0, n)
    return [(float(x), erfc_mp(float(x))) for x in xs]


def binary_entropy_mp(p):
    with mpmath.workdps(30):
        p = mpmath.mpf(p)
        return float(-p * mpmath.log(p, 2) - (1 - p) * mpmath.log(1 - p, 2))


# -- Monte-Carlo BER -------------------------------------------------------------

def _pam4_gray_errors(tx_levels, rx):
    # Gray map on levels -3,-1,1,3: bits (b0 b1) = 00,01,11,10,
    # so b0 is the sign and b1 flags the inner pair
    det = np.clip(2.0 * np.floor(rx / 2.0) + 1.0, -3.0, 3.0)
    errs = 0
    b0_tx = tx_levels > 0
    b0_rx = det > 0
    errs += int(np.count_nonzero(b0_tx != b0_rx))
    b1_tx = np.abs(tx_levels) < 2
    b1_rx = np.abs(det) < 2
    errs += int(np.count_nonzero(b1_tx != b1_rx))
    return errs


def mc_ber(fmt: str, snr: float, n_symbols: int = 10_000_000, seed: int = 1234,
           chunk: int = 2_000_000) -> tuple[float, int]:
    """Simulated bit error ratio and the number of bits it was counted over.

    ``snr`` is the symbol energy over the one-sided noise density with unit
    symbol energy, so each real dimension carries noise variance ``1/(2 snr)``.
    Polarization multiplexing doubles bits and symbols alike, so one
    polarization is simulated.
    """
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(1.0 / (2.0 * snr))
    errors = 0
    bits = 0
    left = n_symbols
    while left > 0:
        n = min(chunk, left)
        left -= n
        if fmt == "PM-BPSK":
            tx = rng.integers(0, 2, n) * 2.0 - 1.0
            rx = tx + sigma * rng.standard_normal(n)
            errors += int(np.count_nonzero((rx > 0) != (tx > 0)))
            bits += n
        elif fmt == "PM-QPSK":
            a = 1.0 / math.sqrt(2.0)
            tx = (rng.integers(0, 2, (2, n)) * 2.0 - 1.0) * a
            rx = tx + sigma * rng.standard_normal((2, n))
            errors += int(np.count_nonzero((rx > 0) != (tx > 0)))
            bits += 2 * n
        elif fmt == "PM-16QAM":
            a = 1.0 / math.sqrt(10.0)  # mean energy of 4-PAM squared pair is 10
            lv = np.array([-3.0, -1.0, 1.0, 3.0])
            tx = lv[rng.integers(0, 4, (2, n))]
            rx = tx + (sigma / a) * rng.standard_normal((2, n))
            errors += _pam4_gray_errors(tx, rx)
            bits += 4 * n
        else:
            raise ValueError(fmt)
    return errors / bits, bits


# -- Table-7-style reach by exhaustive scan --------------------------------------

def reach_bruteforce(evaluate, qber_thr, rsec_thr, l_max, step=0.1):
    """Largest grid length before the first failure of either threshold."""
    last = 0.0
    n = int(round(l_max / step))
    for i in range(n + 1):
        L = i * step
        b = evaluate(L)
        if b.qber <= qber_thr and b.r_sec >= rsec_thr:
            last = L
        else:
            break
    return last

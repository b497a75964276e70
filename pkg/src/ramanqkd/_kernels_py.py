"""Pure numpy implementation of the per-mu link evaluation.

The layout of ``params`` is shared with the compiled module; see ``kernels.PARAM_NAMES``.
"""
from __future__ import annotations

import numpy as np

BB84, COW, SARG = 0, 1, 2

# 1 - H(0.5 * (1 + sqrt(1/2)))
_P1 = 0.5 * (1.0 + np.sqrt(0.5))
I_PNS_1 = 1.0 + _P1 * np.log2(_P1) + (1.0 - _P1) * np.log2(1.0 - _P1)


def _h(p):
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    m = (p > 0.0) & (p < 1.0)
    q = p[m]
    out[m] = -q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q)
    return out


def evaluate_mu(mu, params):
    """Return ``(qber, r_sift, r_sec)`` arrays for each entry of ``mu``."""
    mu = np.asarray(mu, dtype=np.float64)
    (t_F, t_chain, t_isi, f_err, eta, p_dc, n_det, p_ram, p_lcxt, rho_ap, tau_dead,
     f_rep_hz, eta_duty, V, beta, eta_ec, protocol, mu_tol) = params

    p_mu = mu * t_F * t_chain * t_isi * eta
    p_isi = 2.0 * f_err * mu * t_F * t_chain * eta
    other = n_det * p_dc + p_ram + p_lcxt + p_isi
    p_ap = rho_ap * (p_mu + other)
    noise = other + p_ap
    total = p_mu + noise
    eta_dead = 1.0 / (1.0 + tau_dead * f_rep_hz * total)
    r_sift = 0.5 * (beta * p_mu + noise) * f_rep_hz * eta_duty * eta_dead

    protocol = int(protocol)
    num = noise if protocol == COW else p_mu * (1.0 - V) + noise
    den = beta * p_mu + noise
    with np.errstate(divide="ignore", invalid="ignore"):
        qber = np.where(den > 0, 0.5 * num / np.where(den > 0, den, 1.0), 0.5)

    i_ab = 1.0 - eta_ec * _h(qber)
    valid = np.ones_like(mu, dtype=bool)
    if protocol == BB84:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = mu / t_F
            d = (1.0 - V) / (2.0 - ratio)
            valid = (mu > 0) & (ratio <= 1.0 + mu_tol) & (d >= 0.0) & (d < 1.0)
            dd = np.where(valid, d, 0.0)
            P = 0.5 + np.sqrt(dd * (1.0 - dd))
            top = (1.0 - 0.5 * ratio) * (1.0 - _h(P)) + 0.5 * ratio
            i_ae = top / (1.0 + n_det * p_dc / (mu * t_F * eta))
    elif protocol == COW:
        e = np.exp(-mu * t_F)
        i_ae = mu * (1.0 - t_F) + (1.0 - V) * (1.0 + e) / (2.0 * e)
    else:
        i_ae = I_PNS_1 + (mu * mu / t_F) * np.exp(-mu) * (1.0 - I_PNS_1) / 12.0

    gain = np.where(valid, i_ab - i_ae, 0.0)
    r_sec = np.maximum(0.0, r_sift * gain)
    return qber, r_sift, r_sec

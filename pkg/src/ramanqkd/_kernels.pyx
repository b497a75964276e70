# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-mu link evaluation. Same contract as ``_kernels_py.evaluate_mu``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log2, sqrt, fmax

cnp.import_array()

cdef double _P1 = 0.5 * (1.0 + sqrt(0.5))
cdef double I_PNS_1 = 1.0 + _P1 * log2(_P1) + (1.0 - _P1) * log2(1.0 - _P1)


cdef inline double _h(double p) nogil:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * log2(p) - (1.0 - p) * log2(1.0 - p)


def evaluate_mu(mu_in, params):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mu = np.ascontiguousarray(mu_in, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef Py_ssize_t n = mu.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qber = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_sift = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_sec = np.empty(n)

    cdef double t_F = pv[0], t_chain = pv[1], t_isi = pv[2], f_err = pv[3]
    cdef double eta = pv[4], p_dc = pv[5], n_det = pv[6], p_ram = pv[7]
    cdef double p_lcxt = pv[8], rho_ap = pv[9], tau_dead = pv[10], f_rep = pv[11]
    cdef double eta_duty = pv[12], V = pv[13], beta = pv[14], eta_ec = pv[15]
    cdef int protocol = <int>pv[16]
    cdef double mu_tol = pv[17]

    cdef double m, p_mu, p_isi, other, p_ap, noise, total, eta_dead, rs
    cdef double num, den, q, i_ab, i_ae, ratio, d, P, e
    cdef bint valid

    with nogil:
        for i in range(n):
            m = mu[i]
            p_mu = m * t_F * t_chain * t_isi * eta
            p_isi = 2.0 * f_err * m * t_F * t_chain * eta
            other = n_det * p_dc + p_ram + p_lcxt + p_isi
            p_ap = rho_ap * (p_mu + other)
            noise = other + p_ap
            total = p_mu + noise
            eta_dead = 1.0 / (1.0 + tau_dead * f_rep * total)
            rs = 0.5 * (beta * p_mu + noise) * f_rep * eta_duty * eta_dead

            if protocol == 1:
                num = noise
            else:
                num = p_mu * (1.0 - V) + noise
            den = beta * p_mu + noise
            q = 0.5 * num / den if den > 0.0 else 0.5
            i_ab = 1.0 - eta_ec * _h(q)

            valid = True
            if protocol == 0:
                ratio = m / t_F
                d = (1.0 - V) / (2.0 - ratio)
                valid = m > 0.0 and ratio <= 1.0 + mu_tol and d >= 0.0 and d < 1.0
                if valid:
                    P = 0.5 + sqrt(d * (1.0 - d))
                    i_ae = ((1.0 - 0.5 * ratio) * (1.0 - _h(P)) + 0.5 * ratio) / (
                        1.0 + n_det * p_dc / (m * t_F * eta))
                else:
                    i_ae = 0.0
            elif protocol == 1:
                e = exp(-m * t_F)
                i_ae = m * (1.0 - t_F) + (1.0 - V) * (1.0 + e) / (2.0 * e)
            else:
                i_ae = I_PNS_1 + (m * m / t_F) * exp(-m) * (1.0 - I_PNS_1) / 12.0

            qber[i] = q
            r_sift[i] = rs
            r_sec[i] = fmax(0.0, rs * (i_ab - i_ae)) if valid else 0.0
    return qber, r_sift, r_sec

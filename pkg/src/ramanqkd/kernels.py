"""Backend selection for the hot per-mu evaluation.

The compiled module is used when it was built; otherwise the numpy version.
Set ``RAMANQKD_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

PARAM_NAMES = (
    "t_F", "t_chain", "t_isi", "f_err", "eta", "p_dc", "n_det", "p_ram", "p_lcxt",
    "rho_ap", "tau_dead", "f_rep_hz", "eta_duty", "V", "beta", "eta_ec", "protocol",
    "mu_tol",
)

_force_py = os.environ.get("RAMANQKD_PURE_PYTHON", "").strip() not in ("", "0")

if _force_py:
    _backend = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _backend  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _backend = _kernels_py
        BACKEND = "python"

evaluate_mu = _backend.evaluate_mu
evaluate_mu_py = _kernels_py.evaluate_mu

import math
import warnings

import pytest

from ramanqkd import noise as nz
from ramanqkd.fiber import alpha_to_natural

E_TAB = 1.278818e-19


def test_raman_trivial():
    assert nz.raman_powers(1, 1, 1e-6, 0.03, 0.0, 2.6e-9, 0.8) == (0.0, 0.0)
    assert nz.raman_powers(0, 0, 1e-6, 0.03, 100.0, 2.6e-9, 0.8) == (0.0, 0.0)


def test_raman_example():
    a = alpha_to_natural(0.16)
    pf, pb = nz.raman_powers(1, 1, 1e-6, a, 100.0, 2.6e-9, 0.8)
    assert pf == pytest.approx(2.08e-13, rel=1e-12)
    assert pb == pytest.approx(1e-6 * math.sinh(a * 100) / a * 2.6e-9 * 0.8, rel=1e-12)
    assert pb / pf == pytest.approx(math.sinh(a * 100) / (a * 100), rel=1e-12)
    assert pb == pytest.approx(1.0756e-12, rel=1e-3)


def test_raman_zero_alpha_limit():
    pf, pb = nz.raman_powers(1, 1, 1e-6, 0.0, 50.0, 2.6e-9, 0.8)
    assert pb == pytest.approx(pf, rel=1e-15)
    pf, pb = nz.raman_powers(1, 1, 1e-6, 1e-12, 50.0, 2.6e-9, 0.8)
    assert pb == pytest.approx(pf, rel=1e-9)


def test_raman_rejects_negative():
    with pytest.raises(ValueError):
        nz.raman_powers(1, 1, -1e-6, 0.03, 10.0, 2.6e-9, 0.8)


def test_raman_detection_prob():
    assert nz.raman_detection_prob(0.0, E_TAB, 0.5, 1.0) == 0.0
    assert nz.raman_detection_prob(1.278818e-13, E_TAB, 1.0, 1.0) == pytest.approx(1e-3, rel=1e-12)


def test_raman_detection_clamps():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        p = nz.raman_detection_prob(1.0, E_TAB, 1.0, 1.0)
    assert p == 1.0
    assert any(issubclass(x.category, nz.ModelValidityWarning) for x in w)


def test_lcxt_example():
    n_d = 10 ** (-2.8) / E_TAB * 1e-12
    assert n_d == pytest.approx(1.2394e4, rel=1e-4)
    p = nz.lcxt_detection_rate(-28.0, E_TAB, 0.07, 82.0)
    assert p == pytest.approx(0.07 * n_d * 10**-8.2, rel=1e-12)
    assert p == pytest.approx(5.47e-6, rel=2e-3)
    assert nz.lcxt_detection_rate(-28.0, E_TAB, 0.07, math.inf) == 0.0
    with pytest.raises(ValueError):
        nz.lcxt_detection_rate(-28.0, E_TAB, 0.07, -1.0)


def test_isolation_estimate_for_coherent_receiver():
    # crosstalk equal to a 5e-6 /ns dark rate at eta 0.07 for a ~-47 dBm receiver
    iso = nz.isolation_for_rate(-47.0, E_TAB, 0.07, 5e-6)
    assert iso == pytest.approx(64.0, abs=1.0)
    assert nz.lcxt_detection_rate(-47.0, E_TAB, 0.07, iso) == pytest.approx(5e-6, rel=1e-12)


def test_noise_budget_sum_and_no_channels():
    nb = nz.noise_budget(2, 2, -45.05, -47.0, alpha_to_natural(0.16), 100.0, 2.6e-9, 0.6,
                         E_TAB, 0.19, 0.5, 82.0)
    assert nb.p_ram == nb.p_ram_f + nb.p_ram_b
    assert nb.p_ram_b > nb.p_ram_f > 0 and nb.p_lcxt > 0
    off = nz.noise_budget(2, 2, -45.05, -47.0, alpha_to_natural(0.16), 100.0, 2.6e-9, 0.6,
                          E_TAB, 0.19, 0.5, 82.0, lcxt_enabled=False)
    assert off.p_lcxt == 0.0
    assert nz.noise_budget(0, 0, -45.05, -47.0, 0.03, 100.0, 2.6e-9, 0.6, E_TAB, 0.19, 0.5, 82.0) == nz.ZERO_NOISE

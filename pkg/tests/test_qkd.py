import math
import warnings

import numpy as np
import pytest

from ramanqkd import qkd
from ramanqkd.qkd import (
    DetectorModel, LinkState, MuMode, MuPolicy, ProtocolKind as PK, ProtocolParams,
)

from . import oracles


def make_state(protocol=PK.COW, V=0.997, t_F=0.1, mu_mode=MuMode.FIXED, mu=0.5, **kw):
    det = DetectorModel(eta=kw.pop("eta", 0.19), dark_rate_per_ns=kw.pop("pdc", 1e-5),
                        dead_time_s=kw.pop("tau_dead", 500e-9), afterpulse_frac=kw.pop("rho_ap", 0.008))
    pro = ProtocolParams(protocol, V, mu_policy=MuPolicy(mu_mode, mu))
    base = dict(length_km=10.0, t_F=t_F, t_chain=1.0, t_isi=1.0, f_err=0.0, p_ram_f=0.0,
                p_ram_b=0.0, p_lcxt=0.0, f_rep_ghz=1.0, gate_ns=0.5, eta_duty=0.71,
                detector=det, protocol=pro)
    base.update(kw)
    return LinkState(**base)


def test_signal_prob():
    assert qkd.signal_prob(0.0, 0.5, 1, 1, 1, 1, 0.2) == 0.0
    assert qkd.signal_prob(0.5, 1, 1, 1, 1, 1, 1) == 0.5
    chain = 10 ** (-0.46)
    assert qkd.signal_prob(0.5, 10 ** -1.35, chain, 1, 1, 1, 0.19) == pytest.approx(1.47e-3, rel=5e-3)


def test_afterpulse_and_dead_time():
    assert qkd.afterpulse_prob(0.0, 0.1, 0.1, 0.1, 0.1, 0.1) == 0.0
    assert qkd.afterpulse_prob(0.008, 1e-3, 0, 0, 0, 0) == pytest.approx(8e-6)
    assert qkd.dead_time_factor(0.0, 1e9, 0.5) == 1.0
    assert qkd.dead_time_factor(5e-7, 1e9, 0.0) == 1.0
    assert qkd.dead_time_factor(500e-9, 1e9, 2e-3) == pytest.approx(0.5)


def test_duty_factor():
    assert qkd.duty_factor(10.0, 0.0) == 1.0
    assert qkd.duty_factor(10.0, 10.0) == 0.5
    with pytest.raises(ValueError):
        qkd.duty_factor(0.0, 5.0)


def test_rates():
    assert qkd.rates(0.0, 0.0, 1e9, 1.0, 0.71, 1.0) == (0.0, 0.0)
    raw, sift = qkd.rates(1e-3, 0.0, 1e9, 1.0, 1.0, 1.0)
    assert sift == raw / 2


def test_mutual_info_ab():
    assert qkd.mutual_info_ab(0.0) == 1.0
    assert qkd.mutual_info_ab(0.5) == pytest.approx(-0.2)
    assert qkd.mutual_info_ab(0.09) == pytest.approx(1 - 1.2 * oracles.binary_entropy_mp(0.09), rel=1e-12)
    assert qkd.mutual_info_ab(0.09) == pytest.approx(0.4762, abs=1e-4)
    with pytest.raises(ValueError):
        qkd.mutual_info_ab(0.6)


def test_binary_entropy_against_mpmath():
    for p in (1e-9, 1e-3, 0.09, 0.3, 0.5, 0.77):
        assert qkd.binary_entropy(p) == pytest.approx(oracles.binary_entropy_mp(p), rel=1e-13)


def test_eve_info_examples():
    assert qkd.eve_info(PK.BB84, 1e-9, 1.0, 1.0, 0.19, 0.0, 2) == pytest.approx(0.0, abs=1e-8)
    assert qkd.eve_info(PK.COW, 0.5, 1.0, 1.0) == 0.0
    assert qkd.I_PNS_1 == pytest.approx(0.39912, abs=1e-5)
    assert qkd.eve_info(PK.SARG, 1e-9, 0.5, 1.0) == pytest.approx(qkd.I_PNS_1, abs=1e-12)


def test_eve_info_bb84_validity():
    with pytest.raises(qkd.ValidityError):
        qkd.eve_info(PK.BB84, 0.2, 0.1, 0.99)
    with pytest.raises(qkd.ValidityError):
        qkd.eve_info(PK.BB84, 0.0, 0.1, 0.99)
    # mu = t_F is inside the region
    assert 0 < qkd.eve_info(PK.BB84, 0.1, 0.1, 0.99, 0.19, 5e-6, 2) < 1


def test_qber():
    assert qkd.qber(PK.COW, 1.0, 0.99, 1e-3, 0.0) == 0.0
    assert qkd.qber(PK.BB84, 1.0, 0.99, 0.0, 1e-6) == 0.5
    assert qkd.qber(PK.BB84, 1.0, 0.99, 0.0, 0.0) == 0.5
    assert qkd.qber(PK.BB84, 1.0, 0.98, 1e-3, 0.0) == pytest.approx(0.01)


def test_secret_key_rate():
    assert qkd.secret_key_rate(1e5, 0.5, 0.5) == 0.0
    assert qkd.secret_key_rate(1e5, 1.0, 0.0) == 1e5
    assert qkd.secret_key_rate(1e5, 0.2, 0.5) == 0.0


def test_sarg_beta():
    assert ProtocolParams(PK.SARG, 0.9).beta == pytest.approx(0.55)
    assert ProtocolParams(PK.BB84, 0.9).beta == 1.0


def test_breakdown_consistency():
    st = make_state(p_ram_f=1e-6, p_ram_b=2e-6, p_lcxt=3e-7, f_err=1e-4)
    b = st.breakdown(0.5)
    noise = b.p_dc_total + b.p_ap + b.p_ram + b.p_lcxt + b.p_isi
    assert b.r_raw == pytest.approx((b.p_mu + noise) * 1e9 * 0.71 * b.eta_dead, rel=1e-12)
    assert b.r_sec == pytest.approx(b.r_sift * (b.i_ab - b.i_ae), rel=1e-12)
    assert b.p_isi == pytest.approx(2 * 1e-4 * 0.5 * 0.1 * 0.19, rel=1e-12)


def test_breakdown_invalid_bb84_gives_zero():
    st = make_state(PK.BB84, t_F=0.01)
    b = st.breakdown(0.5)
    assert b.r_sec == 0.0 and math.isnan(b.i_ae)


def test_optimize_bb84_near_t_F():
    for t_F in (0.5, 0.2, 0.05):
        st = make_state(PK.BB84, V=0.997, t_F=t_F, pdc=1e-7, rho_ap=0.0, tau_dead=0.0)
        mu, r = qkd.optimize_mu(st)
        assert mu == pytest.approx(t_F, rel=0.05)
        assert r > 0


def test_optimize_bb84_drifts_below_t_F_with_visibility():
    ratios = []
    for V in (1.0, 0.99, 0.95):
        st = make_state(PK.BB84, V=V, t_F=0.05, pdc=1e-7, rho_ap=0.0, tau_dead=0.0)
        ratios.append(qkd.optimize_mu(st)[0] / 0.05)
    assert ratios[0] == pytest.approx(1.0, abs=1e-3)
    assert ratios[0] > ratios[1] > ratios[2]


def test_optimize_cow_matches_dense_grid():
    st = make_state(PK.COW, t_F=0.05, tau_dead=1e-7)
    mu, r = qkd.optimize_mu(st)
    grid = np.linspace(1e-4, 1.0, 10_000)
    dense = np.array([st.breakdown(m).r_sec for m in grid])
    assert r >= dense.max() * (1 - 1e-4)
    assert mu == pytest.approx(grid[int(np.argmax(dense))], abs=2e-4)


def test_optimize_mu_independent_of_rate_without_dead_time():
    a = make_state(PK.COW, t_F=0.05, tau_dead=0.0)
    b = make_state(PK.COW, t_F=0.05, tau_dead=0.0, f_rep_ghz=7.0)
    assert qkd.optimize_mu(a)[0] == pytest.approx(qkd.optimize_mu(b)[0], rel=1e-4)


def test_optimize_empty_region_reports_zero():
    st = make_state(PK.COW, t_F=1e-12)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        mu, r = qkd.optimize_mu(st)
    assert r == 0.0 and w


def test_resolve_mu_policies():
    assert qkd.resolve_mu(make_state(PK.COW, mu_mode=MuMode.ANALYTIC)) == 0.5
    assert qkd.resolve_mu(make_state(PK.BB84, t_F=0.3, mu_mode=MuMode.ANALYTIC)) == 0.3
    assert qkd.resolve_mu(make_state(PK.SARG, t_F=0.04, mu_mode=MuMode.ANALYTIC)) == pytest.approx(0.4)
    assert qkd.resolve_mu(make_state(PK.COW, mu=0.3)) == 0.3


def _toy_link(alpha_db=0.2):
    def ev(L):
        return make_state(PK.COW, t_F=10 ** (-alpha_db * L / 10), length_km=L).breakdown(0.5)
    return ev


def test_link_reach_matches_bruteforce():
    ev = _toy_link()
    res = qkd.link_reach(ev, 0.09, 853.0)
    brute = oracles.reach_bruteforce(ev, 0.09, 853.0, 400.0, step=0.05)
    assert res.reach_km == pytest.approx(brute, abs=0.1)
    assert res.limiting in ("qber", "r_sec")


def test_link_reach_unsatisfiable():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = qkd.link_reach(_toy_link(), 0.09, 1e300)
    assert res.reach_km == 0.0 and res.limiting == "unreachable"
    with pytest.raises(ValueError):
        qkd.link_reach(_toy_link(), 0.0, 853.0)


def test_detector_validation():
    with pytest.raises(ValueError):
        DetectorModel(eta=0.0, dark_rate_per_ns=1e-6)
    with pytest.raises(ValueError):
        DetectorModel(eta=0.1, dark_rate_per_ns=1e-6, n_detectors=0)
    with pytest.raises(ValueError):
        ProtocolParams(PK.COW, 0.0)

"""Parameters, redshift formulas, regime checker, presets, config."""

from __future__ import annotations

import math

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from gravclock import core

mp.mp.dps = 40


def test_rate_flat_spacetime_at_rest(sr88_10s):
    assert core.proper_time_rate(0.0, 0.0, sr88_10s) == 1.0


def test_rate_direct_substitution(sr88_10s):
    got = core.proper_time_rate(-9.81, 0.0, sr88_10s)
    assert got == 1.0 - 9.81 / sr88_10s.c**2


def test_rate_extended_precision_oracle(sr88_10s):
    p = sr88_10s
    v = 9.81 * 1.0
    mom = p.m * 1.0
    got = core.proper_time_rate(v, mom, p)
    ref = 1 + mp.mpf(v) / mp.mpf(p.c) ** 2 \
        - mp.mpf(mom) ** 2 / (2 * mp.mpf(p.m) ** 2 * mp.mpf(p.c) ** 2)
    assert abs(got - float(ref)) < 1e-15


def test_shifted_frequency_trivial(sr88_10s):
    p = sr88_10s
    assert core.shifted_frequency(1.0, 0.0, 0.0, p) == 1.0
    omega = p.delta_e / p.hbar
    assert core.shifted_frequency(omega, 0.0, 0.0, p) == omega


def test_shifted_frequency_earth_surface_12_digits(sr88_10s):
    p = sr88_10s
    got = core.shifted_frequency(1e15, -6.25e7, 0.0, p)
    ref = mp.mpf("1e15") * (1 + mp.mpf("-6.25e7") / mp.mpf(p.c) ** 2)
    assert abs(got - float(ref)) < abs(float(ref)) * 1e-12


@given(st.floats(-1e8, 1e8), st.floats(-1e8, 1e8),
       st.floats(0, 1e-22), st.floats(0, 1e-22))
def test_rate_monotone(v1, v2, p1, p2):
    params = core.preset("sr88_10s")
    if v1 <= v2:
        assert core.proper_time_rate(v1, 0.0, params) <= core.proper_time_rate(v2, 0.0, params)
    if p1 <= p2:
        assert core.proper_time_rate(0.0, p1, params) >= core.proper_time_rate(0.0, p2, params)


def test_z_ratios_two_ways(sr88_10s, sr88_100s):
    for p in (sr88_10s, sr88_100s):
        for stored, e in ((p.z0, p.e0), (p.z1, p.e1)):
            direct = e / (p.m * p.c**2)
            assert stored == pytest.approx(direct, rel=1e-14)


def test_z1_value(sr88_10s):
    # 2.8 eV over the Sr-88 rest energy.
    assert sr88_10s.z1 == pytest.approx(4.99e-11, rel=2e-3)


def test_params_validation():
    with pytest.raises(core.ParamsError):
        core.build_params(m=-1.0, e0=0.0, e1=0.0, g=9.81, x_plus=1.0,
                          x_minus=0.5, x0=0.7, sigma=1e-4, dt=1.0)
    with pytest.raises(core.ParamsError, match="x_plus"):
        core.build_params(m=1e-25, e0=0.0, e1=0.0, g=9.81, x_plus=0.5,
                          x_minus=1.0, x0=0.7, sigma=1e-4, dt=1.0)
    with pytest.raises(core.ParamsError, match="1e-6"):
        core.build_params(m=1e-30, e0=0.0, e1=2.8 * core.EV, g=9.81,
                          x_plus=1.0, x_minus=0.5, x0=0.7, sigma=1e-4, dt=1.0)


def test_regime_both_presets_pass(sr88_10s, sr88_100s):
    assert core.check_regime(sr88_10s).satisfied
    assert core.check_regime(sr88_100s).satisfied


def test_regime_sigma_equal_h_fails_exactly_that_entry(sr88_10s):
    bad = sr88_10s.replace(sigma=sr88_10s.h)
    report = core.check_regime(bad)
    assert not report.satisfied
    assert report.failing() == ("sigma_below_separation",)
    entry = report.entry("sigma_below_separation")
    assert entry.ratio >= 0.1


def test_regime_threshold_configurable(sr88_10s):
    # Tightening the threshold far enough fails the sigma/h entry (1e-2).
    report = core.check_regime(sr88_10s, ratio_threshold=5e-3)
    assert not report.entry("sigma_below_separation").satisfied


def test_regime_ratios_positive_finite(sr88_10s):
    for e in core.check_regime(sr88_10s).entries:
        assert e.ratio >= 0.0 and math.isfinite(e.ratio)


def test_preset_values(sr88_10s, sr88_100s):
    assert sr88_10s.m == 1e-25
    assert sr88_10s.e1 == pytest.approx(4.486094575e-19, rel=1e-9)
    assert sr88_10s.dt == 10.0 and sr88_10s.sigma == 1e-4
    assert sr88_10s.h == pytest.approx(1e-2)
    assert sr88_100s.dt == 100.0 and sr88_100s.sigma == 1e-3


def test_preset_unknown_name_lists_available():
    with pytest.raises(core.UnknownPresetError, match="sr88_10s") as err:
        core.preset("nope")
    assert "sr88_100s" in str(err.value)


def test_ablation_zeroes_coupling_only(sr88_10s):
    p = sr88_10s.replace(ablate_time_dilation=True)
    assert p.z1_eff == 0.0 and p.z0_eff == 0.0
    assert p.z1 == sr88_10s.z1          # raw ratio untouched
    assert p.delta_e == sr88_10s.delta_e


def test_config_roundtrip(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(
        "# comment\n"
        "physics.m_kg = 2e-25\n"
        "physics.E1_eV = 1.4\n"
        "geometry.sigma_m = 2e-4\n"
        "time.dt_s = 3.0\n"
        "phase.phi_rad = 0.5\n"
        "regime.ratio_threshold = 0.2\n"
    )
    p = core.params_from_config(core.load_config(path))
    assert p.m == 2e-25
    assert p.e1 == pytest.approx(1.4 * core.EV)
    assert p.sigma == 2e-4 and p.dt == 3.0 and p.phi == 0.5
    assert p.ratio_threshold == 0.2


def test_config_unknown_key(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("physics.mass = 1\n")
    with pytest.raises(core.ConfigError, match="line 1.*physics.mass"):
        core.load_config(path)


def test_config_bad_number(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("time.dt_s = ten\n")
    with pytest.raises(core.ConfigError, match="line 1"):
        core.load_config(path)

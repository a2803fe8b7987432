import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raster2d import device_model as dm
from raster2d.exceptions import InvalidParameterError, SingularBeamError

LAM = 785e-9
V = 4200.0


@pytest.fixture
def beam():
    return dm.BeamSpec(LAM, 0.9e-3)


@pytest.fixture
def aod():
    return dm.AodSpec(V, 1.8e-3, 150e6, 100e6, 36e6, 0.5)


def test_deflection_angle_at_center(beam, aod):
    # 785e-9 * 150e6 / 4200
    assert dm.deflection_angle(beam, aod, 150e6) == pytest.approx(28.036e-3, rel=1e-4)


def test_deflection_angle_zero_frequency_warns(beam, aod):
    with pytest.warns(UserWarning, match="outside the AOD band"):
        assert dm.deflection_angle(beam, aod, 0.0) == 0.0


def test_deflection_angle_rejects_nonfinite(beam, aod):
    with pytest.raises(InvalidParameterError):
        dm.deflection_angle(beam, aod, math.nan)


def test_deflection_range_full_band(beam, aod):
    assert dm.deflection_range(beam, aod) == pytest.approx(18.69e-3, rel=1e-3)


def test_deflection_monotone(beam, aod):
    fs = [100e6 + k * 5e6 for k in range(21)]
    angles = [dm.deflection_angle(beam, aod, f) for f in fs]
    assert all(a < b for a, b in zip(angles, angles[1:]))


def test_access_time(beam, aod):
    assert dm.access_time(beam, aod, 1) == pytest.approx(428.57e-9, rel=1e-4)
    assert dm.access_time(beam, aod, 2) == pytest.approx(214.29e-9, rel=1e-4)
    assert dm.access_time(dm.BeamSpec(LAM, 0.0), aod) == 0.0


def test_static_resolution_quoted_points():
    assert round(dm.static_resolution(420e-9, 100e6, 1)) == 33
    assert round(dm.static_resolution(420e-9, 100e6, 2)) == 66
    assert dm.static_resolution(420e-9, 0.0) == 0.0


def test_chirp_spread_static_term(beam, aod):
    assert dm.chirp_spread(beam, aod, 0.0) == pytest.approx(0.5553e-3, rel=1e-3)


def test_chirp_spread_linear_chirp(beam, aod):
    dF = 3.6e13 * dm.access_time(beam, aod)
    assert dF == pytest.approx(15.43e6, rel=1e-3)
    assert dm.chirp_spread(beam, aod, dF) == pytest.approx(3.439e-3, rel=1e-3)


def test_chirp_spread_doubling_only_affects_chirp_term(beam, aod):
    s0 = dm.chirp_spread(beam, aod, 0.0)
    s1 = dm.chirp_spread(beam, aod, 10e6)
    s2 = dm.chirp_spread(beam, aod, 20e6)
    assert s2 - s0 == pytest.approx(2 * (s1 - s0), rel=1e-12)


def test_chirp_spread_singular_beam(aod):
    with pytest.raises(SingularBeamError):
        dm.chirp_spread(dm.BeamSpec(LAM, 0.0), aod, 1e6)


N_MEAS = math.pi / 4 * 457e-9 * 36e6  # 12.92


def test_dynamic_resolution_examples():
    assert N_MEAS == pytest.approx(12.9, abs=0.05)
    assert dm.dynamic_resolution_aod(12.9, 457e-9, 1e-6) == pytest.approx(2.87, abs=0.005)
    assert dm.dynamic_resolution_daod(12.9, 457e-9, 1e-6) == pytest.approx(18.7, abs=0.05)


def test_dynamic_resolution_limits_and_algebraic_points():
    n, ta = 12.9, 457e-9
    assert dm.dynamic_resolution_aod(n, ta, math.inf) == n + 1
    assert dm.dynamic_resolution_daod(n, ta, math.inf) == 2 * n + 1
    assert dm.dynamic_resolution_aod(n, ta, n * ta) == pytest.approx(n / 2 + 1)
    assert dm.dynamic_resolution_daod(n, ta, ta) == pytest.approx(n + 1)
    assert dm.dynamic_resolution_aod(n, ta, 0.0) == 1.0
    assert dm.dynamic_resolution_daod(n, ta, 0.0) == 1.0


def test_dynamic_resolution_limit_at_large_scan():
    n, ta = 12.9, 457e-9
    t = 1e6 * ta
    assert dm.dynamic_resolution_aod(n, ta, t) == pytest.approx(n + 1, rel=1e-4)
    assert dm.dynamic_resolution_daod(n, ta, t) == pytest.approx(2 * n + 1, rel=1e-6)


def test_rolloff_points():
    n, ta = 12.9, 457e-9
    for count, f in ((1, dm.dynamic_resolution_aod), (2, dm.dynamic_resolution_daod)):
        t = dm.rolloff_scan_time(n, ta, count)
        static = count * n
        assert f(n, ta, t) - 1 == pytest.approx(static / 2)


pos = st.floats(min_value=1e-3, max_value=1e3)


@given(n=st.floats(1.01, 500), ta=st.floats(1e-8, 1e-5), t1=st.floats(1e-8, 1e-3),
       factor=st.floats(1.01, 100))
def test_dynamic_resolution_monotone_in_scan_time(n, ta, t1, factor):
    t2 = t1 * factor
    assert dm.dynamic_resolution_aod(n, ta, t2) > dm.dynamic_resolution_aod(n, ta, t1)
    assert dm.dynamic_resolution_daod(n, ta, t2) > dm.dynamic_resolution_daod(n, ta, t1)


@given(n=st.floats(1.01, 500), ta=st.floats(1e-8, 1e-5), t=st.floats(1e-8, 1e-3),
       factor=st.floats(1.01, 10))
def test_dynamic_resolution_monotone_in_static_resolution(n, ta, t, factor):
    assert dm.dynamic_resolution_aod(n * factor, ta, t) > dm.dynamic_resolution_aod(n, ta, t)
    assert dm.dynamic_resolution_daod(n * factor, ta, t) > dm.dynamic_resolution_daod(n, ta, t)


@given(n=st.floats(1.01, 500), ta=st.floats(1e-8, 1e-5), t=st.floats(1e-9, 1e-2))
def test_daod_beats_single_aod(n, ta, t):
    assert dm.dynamic_resolution_daod(n, ta, t) > dm.dynamic_resolution_aod(n, ta, t)


@given(w0=st.floats(1e-4, 5e-3), v=st.floats(500, 6000), bw=st.floats(1e6, 500e6),
       t_scan=st.floats(1e-8, 1e-3), lam=st.floats(400e-9, 1600e-9))
def test_spread_consistent_with_single_aod_resolution(w0, v, bw, t_scan, lam):
    # Delta theta / spread at dF = alpha*T_a equals N / (1 + N T_a / T_scan)
    beam = dm.BeamSpec(lam, w0)
    aod = dm.AodSpec(v, 2 * w0, 2 * bw, bw, bw)
    ta = dm.access_time(beam, aod)
    n = dm.static_resolution(ta, bw)
    ratio = dm.deflection_range(beam, aod, bw) / dm.chirp_spread(beam, aod, bw / t_scan * ta)
    assert ratio == pytest.approx(n / (1 + n * ta / t_scan), rel=1e-9)


@given(lam=st.floats(400e-9, 1600e-9), alpha=st.floats(1e9, 1e15), k=st.floats(0.1, 10),
       a=st.floats(0.5, 2.0), v=st.floats(500, 6000))
def test_focal_length_scaling(lam, alpha, k, a, v):
    aod = dm.AodSpec(v, 2e-3, 150e6, 100e6, 100e6)
    f = dm.acoustic_focal_length(dm.BeamSpec(lam, 1e-3, a), aod, alpha)
    assert dm.acoustic_focal_length(dm.BeamSpec(lam, 1e-3, a), aod, alpha * k) == pytest.approx(f / k, rel=1e-12)
    assert dm.acoustic_focal_length(dm.BeamSpec(lam * k, 1e-3, a), aod, alpha) == pytest.approx(f / k, rel=1e-12)


def test_focal_length_reference_parameters(beam, aod):
    f = dm.acoustic_focal_length(beam, aod, 3.6e13)
    # 1.34^2 * 4200^2 / (785e-9 * 3.6e13)
    assert f == pytest.approx(1.1208, rel=1e-3)
    assert dm.focal_shift(30e-3, f) == pytest.approx(-0.803e-3, rel=1e-3)


def test_focal_length_sign_and_no_lens(beam, aod):
    assert dm.acoustic_focal_length(beam, aod, 0.0) is dm.NO_LENS
    assert dm.focal_shift(30e-3, dm.NO_LENS) == 0.0
    assert dm.acoustic_focal_length(beam, aod, -3.6e13) < 0


def test_vipa_metrics():
    vipa = dm.VipaSpec(50e9, 1.2e9, 0.95, 2e-3)
    m = dm.vipa_metrics(vipa)
    assert m.resolution == pytest.approx(41.67, abs=0.01)
    assert m.switch_time == pytest.approx(0.833e-9, rel=1e-3)
    assert dm.vipa_metrics(vipa, switch_time_constant=2.0).switch_time == pytest.approx(1.667e-9, rel=1e-3)
    with pytest.raises(InvalidParameterError):
        dm.VipaSpec(50e9, 50e9, 0.95, 2e-3)


def test_vipa_single_spot_limit():
    vipa = dm.VipaSpec(50e9, 50e9 * (1 - 1e-15), 0.5, 1e-3)
    assert dm.vipa_metrics(vipa).resolution == pytest.approx(1.0)


def test_sideband_position_examples():
    vipa = dm.VipaSpec(50e9, 1.2e9, 0.95, 2e-3)
    assert dm.sideband_position(vipa, 0.0, 40) == 0.0
    assert dm.sideband_position(vipa, 25e9, 40) == pytest.approx(20.0)
    assert dm.sideband_position(vipa, 50e9, 40) == 0.0


@given(row=st.floats(0, 40, exclude_max=True), n_rows=st.integers(40, 40))
def test_sideband_round_trip(row, n_rows):
    vipa = dm.VipaSpec(50e9, 1.2e9, 0.95, 2e-3)
    back = dm.sideband_position(vipa, dm.row_to_frequency(vipa, row, n_rows), n_rows)
    assert back == pytest.approx(row, rel=1e-9, abs=1e-9)


@settings(max_examples=50)
@given(n_rows=st.integers(1, 500), frac=st.floats(0, 1, exclude_max=True))
def test_sideband_round_trip_any_row_count(n_rows, frac):
    vipa = dm.VipaSpec(50e9, 1.2e9, 0.95, 2e-3)
    row = frac * n_rows
    back = dm.sideband_position(vipa, dm.row_to_frequency(vipa, row, n_rows), n_rows)
    assert back == pytest.approx(row, rel=1e-9, abs=1e-9)


def test_spec_invariants():
    with pytest.raises(InvalidParameterError):
        dm.BeamSpec(-1.0, 1e-3)
    with pytest.raises(InvalidParameterError):
        dm.AodSpec(4200, 1.8e-3, 150e6, 100e6, 120e6)
    with pytest.raises(InvalidParameterError):
        dm.EomSpec(25e9, 1e9)
    with pytest.raises(InvalidParameterError):
        dm.ChirpScan(100e6, 120e6, 0.0)
    with pytest.raises(InvalidParameterError):
        dm.DaodSpec(dm.AodSpec(4200, 1.8e-3, 150e6, 100e6, 36e6), geometry="co-propagating")


def test_chirp_scan(aod):
    c = dm.ChirpScan.centered(aod, 1e-6)
    assert c.chirp_rate_alpha == pytest.approx(3.6e13)
    assert (c.f_start, c.f_end) == (132e6, 168e6)
    c.check_against(aod)
    with pytest.raises(InvalidParameterError):
        dm.ChirpScan(100e6, 200e6, 1e-6).check_against(aod)


def test_device_measured_waist(paper_device):
    assert paper_device.access_time_single == pytest.approx(428.57e-9, rel=1e-4)
    measured = paper_device.with_measured_waist()
    assert measured.access_time_single == pytest.approx(457e-9, rel=1e-12)
    with pytest.raises(InvalidParameterError):
        measured.validate()
    assert paper_device.measured.access_time_ratio == pytest.approx(1.7577, rel=1e-4)


def test_device_dynamic_resolution_uses_single_aod_values(paper_device):
    d = paper_device.with_measured_waist()
    n = math.pi / 4 * 457e-9 * 36e6
    assert d.dynamic_resolution(1e-6, 2) == pytest.approx(2 * n / (1 + 0.457) + 1, rel=1e-9)
    assert d.dynamic_resolution(1e-6, 1) == pytest.approx(n / (1 + n * 0.457) + 1, rel=1e-9)


def test_no_warning_inside_band(beam, aod):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dm.deflection_angle(beam, aod, 120e6)

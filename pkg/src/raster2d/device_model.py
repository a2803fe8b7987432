"""Closed-form model of the double-AOD / VIPA rastering device.

All quantities are SI (m, s, Hz, rad). Specs are frozen dataclasses and every
function here is pure, so they can be shared freely between threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

from .exceptions import InvalidParameterError, SingularBeamError

#: Returned by :func:`acoustic_focal_length` when the chirp rate is zero.
NO_LENS = math.inf

#: VIPA switching time in units of 1/FWHM.
SWITCH_TIME_PER_LINEWIDTH = 1.0

DEFAULT_PROFILE_CONSTANT = 1.34


def _finite(name, value):
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


def _check(cond, message):
    if not cond:
        raise InvalidParameterError(message)


@dataclass(frozen=True)
class BeamSpec:
    wavelength: float
    waist_w0: float
    profile_constant_a: float = DEFAULT_PROFILE_CONSTANT

    def __post_init__(self):
        _finite("wavelength", self.wavelength)
        _finite("waist_w0", self.waist_w0)
        _check(self.wavelength > 0, "wavelength must be positive")
        _check(self.waist_w0 >= 0, "waist_w0 must be non-negative")
        _check(self.profile_constant_a > 0, "profile_constant_a must be positive")


@dataclass(frozen=True)
class AodSpec:
    acoustic_velocity_v: float
    aperture: float
    center_freq_F0: float
    full_bandwidth_dF: float
    usable_bandwidth: float
    peak_efficiency: float = 1.0

    def __post_init__(self):
        for name in ("acoustic_velocity_v", "aperture", "center_freq_F0",
                     "full_bandwidth_dF", "usable_bandwidth", "peak_efficiency"):
            _finite(name, getattr(self, name))
        _check(self.acoustic_velocity_v > 0, "acoustic velocity must be positive")
        _check(self.aperture > 0, "aperture must be positive")
        _check(0 < self.usable_bandwidth <= self.full_bandwidth_dF,
               "usable bandwidth must lie in (0, full bandwidth]")
        _check(0 <= self.peak_efficiency <= 1, "peak efficiency must lie in [0, 1]")

    @property
    def band(self):
        """Full RF band (low, high) in Hz."""
        half = self.full_bandwidth_dF / 2
        return self.center_freq_F0 - half, self.center_freq_F0 + half

    def check_beam(self, beam: BeamSpec) -> None:
        if self.aperture < 2 * beam.waist_w0 * (1 - 1e-12):
            raise InvalidParameterError(
                f"aperture {self.aperture:g} m is smaller than the beam diameter "
                f"{2 * beam.waist_w0:g} m"
            )


@dataclass(frozen=True)
class DaodSpec:
    """Two identical AODs with counter-propagating acoustic waves."""

    element: AodSpec
    peak_efficiency: float = 1.0
    geometry: str = "counter-propagating"

    def __post_init__(self):
        _check(self.geometry == "counter-propagating",
               f"unsupported DAOD geometry {self.geometry!r}")
        _check(0 <= self.peak_efficiency <= 1, "peak efficiency must lie in [0, 1]")


@dataclass(frozen=True)
class VipaSpec:
    fsr: float
    fwhm_linewidth: float
    reflectivity: float
    thickness: float

    def __post_init__(self):
        _check(0 < self.fwhm_linewidth < self.fsr, "need 0 < FWHM < FSR")
        _check(0 < self.reflectivity < 1, "reflectivity must lie in (0, 1)")
        _check(self.thickness > 0, "thickness must be positive")


@dataclass(frozen=True)
class EomSpec:
    sideband_min: float
    sideband_max: float
    transmission: float = 1.0

    def __post_init__(self):
        _check(0 < self.sideband_min < self.sideband_max,
               "need 0 < sideband_min < sideband_max")
        _check(0 <= self.transmission <= 1, "transmission must lie in [0, 1]")

    def in_band(self, frequency: float) -> bool:
        """True if the modulator can produce ``frequency``.

        Zero is the unmodulated carrier, which is always present.
        """
        if frequency == 0:
            return True
        return self.sideband_min <= frequency <= self.sideband_max


@dataclass(frozen=True)
class RelaySpec:
    objective_focal_f_obj: float

    def __post_init__(self):
        _check(self.objective_focal_f_obj > 0, "objective focal length must be positive")


@dataclass(frozen=True)
class ChirpScan:
    f_start: float
    f_end: float
    t_scan: float

    def __post_init__(self):
        _finite("t_scan", self.t_scan)
        _check(self.t_scan > 0, "t_scan must be positive")

    @property
    def chirp_rate_alpha(self) -> float:
        return (self.f_end - self.f_start) / self.t_scan

    @property
    def span(self) -> float:
        return abs(self.f_end - self.f_start)

    @classmethod
    def centered(cls, aod: AodSpec, t_scan: float, bandwidth: Optional[float] = None):
        """Upward sweep across ``bandwidth`` (default: usable band) about F0."""
        bw = aod.usable_bandwidth if bandwidth is None else bandwidth
        return cls(aod.center_freq_F0 - bw / 2, aod.center_freq_F0 + bw / 2, t_scan)

    def check_against(self, aod: AodSpec) -> None:
        if self.span > aod.usable_bandwidth * (1 + 1e-12):
            raise InvalidParameterError(
                f"chirp span {self.span:g} Hz exceeds usable bandwidth "
                f"{aod.usable_bandwidth:g} Hz"
            )


@dataclass(frozen=True)
class MeasuredCalibration:
    """Bench measurements reported for the built device.

    These are kept next to the model so reports can show model and
    measurement side by side; the model never reads them implicitly.
    """

    access_time_single: Optional[float] = None
    access_time_daod: Optional[float] = None
    dynamic_resolution_daod: Optional[float] = None
    dynamic_resolution_t_scan: Optional[float] = None
    t_fast: Optional[float] = None
    spot_wx: Optional[float] = None
    spot_wy: Optional[float] = None

    @property
    def access_time_ratio(self) -> Optional[float]:
        if self.access_time_single and self.access_time_daod:
            return self.access_time_single / self.access_time_daod
        return None


@dataclass(frozen=True)
class DeviceSpec:
    beam: BeamSpec
    slow_axis: DaodSpec
    fast_axis: VipaSpec
    eom: EomSpec
    relay: RelaySpec
    raster_period: float = 1e-6
    measured: MeasuredCalibration = field(default_factory=MeasuredCalibration)
    name: str = "device"

    def __post_init__(self):
        _check(self.raster_period > 0, "raster_period must be positive")

    def validate(self) -> None:
        """Raise if the beam overfills the AOD aperture."""
        self.aod.check_beam(self.beam)

    @property
    def aod(self) -> AodSpec:
        return self.slow_axis.element

    @property
    def access_time_single(self) -> float:
        return access_time(self.beam, self.aod, 1)

    @property
    def access_time_daod(self) -> float:
        return access_time(self.beam, self.aod, 2)

    def static_resolution(self, element_count=1, bandwidth=None) -> float:
        bw = self.aod.usable_bandwidth if bandwidth is None else bandwidth
        return static_resolution(self.access_time_single, bw, element_count)

    def dynamic_resolution(self, t_scan, element_count=2, bandwidth=None) -> float:
        n_single = self.static_resolution(1, bandwidth)
        if element_count == 1:
            return dynamic_resolution_aod(n_single, self.access_time_single, t_scan)
        return dynamic_resolution_daod(n_single, self.access_time_single, t_scan)

    def with_waist(self, waist: float) -> "DeviceSpec":
        return replace(self, beam=replace(self.beam, waist_w0=waist))

    def with_measured_waist(self) -> "DeviceSpec":
        """Copy whose waist reproduces the measured single-AOD access time.

        The implied waist may exceed half the aperture, in which case the
        beam is clipped; :meth:`validate` would reject the copy.
        """
        t_a = self.measured.access_time_single
        if t_a is None:
            raise InvalidParameterError("device has no measured access time")
        return self.with_waist(t_a * self.aod.acoustic_velocity_v / 2)


# --- slow axis -------------------------------------------------------------


def deflection_angle(beam: BeamSpec, aod: AodSpec, f: float) -> float:
    """Deflection angle lambda*f/v of the first diffracted order."""
    _finite("f", f)
    lo, hi = aod.band
    if not lo <= f <= hi:
        warnings.warn(f"{f:g} Hz is outside the AOD band [{lo:g}, {hi:g}] Hz",
                      stacklevel=2)
    return beam.wavelength * f / aod.acoustic_velocity_v


def deflection_range(beam: BeamSpec, aod: AodSpec, span: Optional[float] = None,
                     element_count: int = 1) -> float:
    """Full angular range swept by ``span`` Hz (default: full bandwidth)."""
    span = aod.full_bandwidth_dF if span is None else span
    return element_count * beam.wavelength * span / aod.acoustic_velocity_v


def access_time(beam: BeamSpec, aod: AodSpec, element_count: int = 1) -> float:
    """Acoustic transit time across the beam, 2*w0/v.

    The counter-propagating pair only needs each wave to cross half the beam,
    so ``element_count=2`` halves it.
    """
    _check(element_count in (1, 2), "element_count must be 1 or 2")
    return 2 * beam.waist_w0 / aod.acoustic_velocity_v / element_count


def static_resolution(T_a: float, dF: float, element_count: int = 1) -> float:
    """Resolvable spots (pi/4)*T_a*dF, doubled for the DAOD.

    ``T_a`` is always the single-AOD access time.
    """
    _check(element_count in (1, 2), "element_count must be 1 or 2")
    return element_count * math.pi / 4 * T_a * dF


def chirp_spread(beam: BeamSpec, aod: AodSpec, inst_freq_span_dF: float) -> float:
    """Full angular spread of a beam while ``inst_freq_span_dF`` Hz share the aperture.

    Diffraction width (2/pi)*lambda/w0 plus the chirp term lambda*dF/v. For
    a linear chirp the caller passes alpha*T_a.
    """
    if beam.waist_w0 == 0:
        raise SingularBeamError("zero waist has no diffraction-limited spread")
    _check(inst_freq_span_dF >= 0, "frequency span must be non-negative")
    lam = beam.wavelength
    return 2 / math.pi * lam / beam.waist_w0 + lam / aod.acoustic_velocity_v * inst_freq_span_dF


def dynamic_resolution_aod(N_stat: float, T_a: float, T_scan: float) -> float:
    """Resolution of a single AOD during a linear sweep of duration ``T_scan``.

    T_scan = 0 gives the one-spot limit of 1.
    """
    if T_scan == 0:
        return 1.0
    if math.isinf(T_scan):
        return N_stat + 1
    return N_stat / (1 + N_stat * T_a / T_scan) + 1


def dynamic_resolution_daod(N_stat_single: float, T_a_single: float, T_scan: float) -> float:
    """Resolution of the counter-propagating pair during a linear sweep.

    Takes single-AOD static resolution and access time.
    """
    if T_scan == 0:
        return 1.0
    if math.isinf(T_scan):
        return 2 * N_stat_single + 1
    return 2 * N_stat_single / (1 + T_a_single / T_scan) + 1


def rolloff_scan_time(N_stat: float, T_a: float, element_count: int = 1) -> float:
    """Scan time at which the chirp-limited term halves the static resolution."""
    return N_stat * T_a if element_count == 1 else T_a


def acoustic_focal_length(beam: BeamSpec, aod: AodSpec, alpha: float) -> float:
    """Focal length a^2 v^2 / (lambda alpha) of the chirp-induced cylindrical lens.

    Signed like ``alpha``; zero chirp returns :data:`NO_LENS`.
    """
    if alpha == 0:
        return NO_LENS
    a = beam.profile_constant_a
    v = aod.acoustic_velocity_v
    return a * a * v * v / (beam.wavelength * alpha)


def focal_shift(f_obj: float, f_aod: float) -> float:
    """Thin-lens focal shift -f_obj^2/f_AOD, valid for |f_AOD| >> f_obj."""
    if math.isinf(f_aod):
        return 0.0
    return -f_obj * f_obj / f_aod


# --- fast axis -------------------------------------------------------------


@dataclass(frozen=True)
class VipaMetrics:
    resolution: float
    switch_time: float


def vipa_metrics(vipa: VipaSpec, switch_time_constant: float = SWITCH_TIME_PER_LINEWIDTH) -> VipaMetrics:
    return VipaMetrics(
        resolution=vipa.fsr / vipa.fwhm_linewidth,
        switch_time=switch_time_constant / vipa.fwhm_linewidth,
    )


def sideband_position(vipa: VipaSpec, f_sideband: float, n_rows: int) -> float:
    """Fractional row index of a sideband; wraps every FSR."""
    _check(f_sideband >= 0, "sideband frequency must be non-negative")
    _check(n_rows >= 1, "n_rows must be at least 1")
    return math.fmod(f_sideband, vipa.fsr) / vipa.fsr * n_rows


def row_to_frequency(vipa: VipaSpec, row: float, n_rows: int) -> float:
    """Inverse of :func:`sideband_position` on [0, n_rows)."""
    _check(n_rows >= 1, "n_rows must be at least 1")
    return row * vipa.fsr / n_rows

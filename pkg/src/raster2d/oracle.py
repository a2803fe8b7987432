"""Numerical wave-optics check of the closed-form slow-axis model.

A 1D scalar field is sampled across the AOD aperture with the phase imprinted
by the travelling chirped acoustic grating, then taken to the far field with
an FFT. Widths and knife-edge fall times measured on that far field are
independent of the closed-form expressions in :mod:`raster2d.device_model`.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .device_model import (
    AodSpec,
    BeamSpec,
    ChirpScan,
    DeviceSpec,
    chirp_spread,
    dynamic_resolution_aod,
    dynamic_resolution_daod,
)
from .exceptions import GridResolutionError, InvalidParameterError, NoCrossingError

DEFAULT_SAMPLES = 8192
DEFAULT_EXTENT_FACTOR = 8.0
DEFAULT_PAD_FACTOR = 8
MIN_SAMPLES = 1024
MIN_EXTENT_FACTOR = 6.0
MIN_SAMPLES_PER_FRINGE = 4.0

# transmitted fractions at which a Gaussian's centre sits one 1/e^2 radius
# either side of the knife
_KNIFE_HI = 0.5 * (1 + math.erf(math.sqrt(2)))
_KNIFE_LO = 1 - _KNIFE_HI


@dataclass(frozen=True, eq=False)
class FieldProfile:
    samples: np.ndarray
    extent: float
    wavelength: float

    def __post_init__(self):
        n = self.samples.size
        if n < MIN_SAMPLES or n & (n - 1):
            raise InvalidParameterError(
                f"sample_count must be a power of two >= {MIN_SAMPLES}, got {n}")
        power = self.power
        if not (np.isfinite(power) and power > 0):
            raise InvalidParameterError("field power must be finite and positive")

    @property
    def sample_count(self) -> int:
        return self.samples.size

    @property
    def dx(self) -> float:
        return self.extent / self.sample_count

    @property
    def x(self) -> np.ndarray:
        return grid_coordinates(self.sample_count, self.extent)

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dx)


@dataclass(frozen=True, eq=False)
class FarField:
    """Far-field intensity (peak normalised to 1) against deflection angle."""

    intensity: np.ndarray
    angle_axis: np.ndarray
    total_power: float

    @property
    def peak_angle(self) -> float:
        return float(self.angle_axis[np.argmax(self.intensity)])


@dataclass(frozen=True)
class WaistMeasurement:
    half_width: float
    left: float
    right: float
    multi_lobe: bool = False

    @property
    def full_width(self) -> float:
        return self.right - self.left

    @property
    def center(self) -> float:
        return 0.5 * (self.left + self.right)


@dataclass(frozen=True, eq=False)
class KnifeEdgeTrace:
    times: np.ndarray
    transmitted: np.ndarray
    fall_time_1e2: float
    angular_velocity: float
    knife_angle: float
    scan_range: float

    @property
    def width(self) -> float:
        """Full 1/e^2 angular width implied by the fall time."""
        return self.fall_time_1e2 * abs(self.angular_velocity)

    @property
    def dynamic_resolution(self) -> float:
        return self.scan_range / self.width


def grid_coordinates(sample_count: int, extent: float) -> np.ndarray:
    return (np.arange(sample_count) - sample_count // 2) * (extent / sample_count)


def _grid(beam, sample_count, extent):
    if extent is None:
        extent = DEFAULT_EXTENT_FACTOR * beam.waist_w0
    if beam.waist_w0 <= 0:
        raise InvalidParameterError("oracle needs a beam with positive waist")
    if extent < MIN_EXTENT_FACTOR * beam.waist_w0 * (1 - 1e-12):
        raise InvalidParameterError(
            f"grid extent must be at least {MIN_EXTENT_FACTOR:g} waists")
    return grid_coordinates(sample_count, extent), extent


def _instantaneous_freq(chirp: ChirpScan, t: float) -> float:
    return chirp.f_start + chirp.chirp_rate_alpha * t


def acoustic_phase(x, aod: AodSpec, chirp: ChirpScan, t: float, direction: int):
    """Phase written by the grating of an AOD whose wave travels along ``direction``.

    The local drive frequency at ``x`` is the one launched x/v earlier (or
    later, for a wave travelling the other way); integrating 2*pi*f/v over
    x gives a linear deflection term and a quadratic lens term.
    """
    if direction not in (1, -1):
        raise InvalidParameterError("direction must be +1 or -1")
    v = aod.acoustic_velocity_v
    alpha = chirp.chirp_rate_alpha
    f_t = _instantaneous_freq(chirp, t)
    return (2 * np.pi / v) * (f_t * x - direction * alpha * x * x / (2 * v))


def _local_spatial_freq(x, aod, chirp, t, directions):
    v = aod.acoustic_velocity_v
    alpha = chirp.chirp_rate_alpha
    f_t = _instantaneous_freq(chirp, t)
    return sum((f_t - d * alpha * x / v) / v for d in directions)


def _assemble(beam, aod, chirp, t, directions, sample_count, extent):
    x, extent = _grid(beam, sample_count, extent)
    inside = np.abs(x) <= aod.aperture / 2
    amplitude = np.exp(-(x / beam.waist_w0) ** 2) * inside
    nu = _local_spatial_freq(x[inside], aod, chirp, t, directions)
    dx = extent / sample_count
    if nu.size:
        max_nu = float(np.max(np.abs(nu)))
        if max_nu * dx * MIN_SAMPLES_PER_FRINGE > 1:
            raise GridResolutionError(
                f"{1 / (max_nu * dx):.2f} samples per fringe, need "
                f"{MIN_SAMPLES_PER_FRINGE:g}; increase sample_count")
    phase = sum(acoustic_phase(x, aod, chirp, t, d) for d in directions)
    return FieldProfile(amplitude * np.exp(1j * phase), extent, beam.wavelength)


def build_aperture_field(beam: BeamSpec, aod: AodSpec, chirp: ChirpScan, t: float,
                         direction: int = 1, sample_count: int = DEFAULT_SAMPLES,
                         extent: float | None = None) -> FieldProfile:
    """Gaussian beam hard-clipped by the aperture, after one AOD at time ``t``."""
    return _assemble(beam, aod, chirp, t, (direction,), sample_count, extent)


def build_daod_field(beam: BeamSpec, aod: AodSpec, chirp: ChirpScan, t: float,
                     sample_count: int = DEFAULT_SAMPLES,
                     extent: float | None = None) -> FieldProfile:
    """Field after the counter-propagating pair, both treated as one thin plane."""
    return _assemble(beam, aod, chirp, t, (1, -1), sample_count, extent)


def far_field(field: FieldProfile, pad_factor: int = DEFAULT_PAD_FACTOR) -> FarField:
    """Fraunhofer pattern, angle = wavelength * spatial frequency.

    The transform is zero-padded to ``pad_factor * N + 1`` points; the odd
    length keeps the angle axis symmetric about zero.
    """
    n_fft = field.sample_count * pad_factor + 1
    dx = field.dx
    spectrum = np.fft.fftshift(np.fft.fft(field.samples, n_fft)) * dx
    nu = np.fft.fftshift(np.fft.fftfreq(n_fft, dx))
    raw = np.abs(spectrum) ** 2
    total = float(np.sum(raw) / (n_fft * dx))
    peak = raw.max()
    return FarField(raw / peak, field.wavelength * nu, total)


def _interp_crossing(x0, y0, x1, y1, level):
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def measure_waist_1e2(farfield: FarField) -> WaistMeasurement:
    """1/e^2 half-width of the far-field lobe, edges linearly interpolated.

    If several disjoint intervals exceed the threshold the widest is
    reported and ``multi_lobe`` is set.
    """
    inten = farfield.intensity
    theta = farfield.angle_axis
    level = math.exp(-2) * inten.max()
    above = inten >= level
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    starts = list(edges[~above[edges]] + 1)
    stops = list(edges[above[edges]])
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        stops.append(inten.size - 1)
    runs = []
    for i0, i1 in zip(starts, stops):
        left = (_interp_crossing(theta[i0 - 1], inten[i0 - 1], theta[i0], inten[i0], level)
                if i0 > 0 else theta[0])
        right = (_interp_crossing(theta[i1], inten[i1], theta[i1 + 1], inten[i1 + 1], level)
                 if i1 < inten.size - 1 else theta[-1])
        runs.append((right - left, left, right))
    multi = len(runs) > 1
    if multi:
        warnings.warn(f"far field has {len(runs)} lobes above 1/e^2; "
                      "reporting the widest", stacklevel=2)
    width, left, right = max(runs)
    return WaistMeasurement(width / 2, float(left), float(right), multi)


def oracle_field(device: DeviceSpec, chirp: ChirpScan, t: float, element_count: int,
                 sample_count: int = DEFAULT_SAMPLES) -> FieldProfile:
    if element_count == 1:
        return build_aperture_field(device.beam, device.aod, chirp, t, 1, sample_count)
    return build_daod_field(device.beam, device.aod, chirp, t, sample_count)


def _transmitted_fraction(ff: FarField, knife: float, approach_low: bool) -> float:
    cum = np.cumsum(ff.intensity)
    below = float(np.interp(knife, ff.angle_axis, cum))
    frac = below / cum[-1]
    return frac if approach_low else 1 - frac


def knife_edge_trace(device: DeviceSpec, chirp: ChirpScan, t_samples: int = 64,
                     element_count: int = 2, sample_count: int = DEFAULT_SAMPLES,
                     pad_factor: int = DEFAULT_PAD_FACTOR) -> KnifeEdgeTrace:
    """Power passing a knife at the scan midpoint while the spot sweeps across it.

    A coarse pass over the whole scan brackets the crossing, a second pass of
    ``t_samples`` points resolves it. The 1/e^2 fall time is the time between
    the 97.7 % and 2.3 % transmission levels.
    """
    if t_samples < 64:
        raise InvalidParameterError("t_samples must be at least 64")
    alpha = chirp.chirp_rate_alpha
    if alpha == 0:
        raise NoCrossingError("a static beam never crosses the knife")
    lam, v = device.beam.wavelength, device.aod.acoustic_velocity_v
    knife = element_count * lam * 0.5 * (chirp.f_start + chirp.f_end) / v
    approach_low = alpha > 0

    def trace(times):
        return np.array([
            _transmitted_fraction(
                far_field(oracle_field(device, chirp, t, element_count, sample_count),
                          pad_factor),
                knife, approach_low)
            for t in times
        ])

    coarse_t = np.linspace(0.0, chirp.t_scan, t_samples)
    coarse = trace(coarse_t)
    hi_idx = np.flatnonzero(coarse >= _KNIFE_HI)
    lo_idx = np.flatnonzero(coarse <= _KNIFE_LO)
    if not hi_idx.size or not lo_idx.size or lo_idx[-1] < hi_idx[0]:
        raise NoCrossingError("knife edge is not crossed within the scan")
    t0 = coarse_t[hi_idx[hi_idx < lo_idx[-1]][-1]]
    t1 = coarse_t[lo_idx[lo_idx > hi_idx[0]][0]]
    times = np.linspace(t0, t1, t_samples)
    power = trace(times)

    def crossing(level):
        i = int(np.flatnonzero(power <= level)[0])
        return _interp_crossing(times[i - 1], power[i - 1], times[i], power[i], level)

    fall = crossing(_KNIFE_LO) - crossing(_KNIFE_HI)
    return KnifeEdgeTrace(
        times=times,
        transmitted=power,
        fall_time_1e2=float(fall),
        angular_velocity=element_count * lam * alpha / v,
        knife_angle=knife,
        scan_range=element_count * lam * chirp.span / v,
    )


# --- sweeps ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    alpha_hz_per_s: float
    t_scan_s: float
    width_oracle_rad: float
    width_eq_s1_rad: float
    n_dyn_oracle: float
    n_dyn_closed_form: float
    device: str


SWEEP_COLUMNS = tuple(SweepPoint.__dataclass_fields__)


def _sweep_point(device: DeviceSpec, alpha: float, element_count: int,
                 sample_count: int) -> SweepPoint:
    aod, beam = device.aod, device.beam
    span = aod.usable_bandwidth
    t_scan = span / alpha if alpha else math.inf
    chirp = ChirpScan(aod.center_freq_F0, aod.center_freq_F0 + (alpha if alpha else 0.0), 1.0)
    ff = far_field(oracle_field(device, chirp, 0.0, element_count, sample_count))
    width = measure_waist_1e2(ff).full_width
    t_a = device.access_time_single
    n_single = device.static_resolution(1)
    if element_count == 1:
        closed_width = chirp_spread(beam, aod, alpha * t_a)
        n_closed = dynamic_resolution_aod(n_single, t_a, t_scan)
    else:
        closed_width = chirp_spread(beam, aod, 0.0)
        n_closed = dynamic_resolution_daod(n_single, t_a, t_scan)
    scan_range = element_count * beam.wavelength * span / aod.acoustic_velocity_v
    return SweepPoint(
        alpha_hz_per_s=alpha,
        t_scan_s=t_scan,
        width_oracle_rad=width,
        width_eq_s1_rad=closed_width,
        n_dyn_oracle=scan_range / width,
        n_dyn_closed_form=n_closed,
        device="aod" if element_count == 1 else "daod",
    )


def oracle_sweep(device: DeviceSpec, alphas, element_counts=(1, 2),
                 sample_count: int = DEFAULT_SAMPLES, workers: int = 1) -> list[SweepPoint]:
    """Oracle width and resolution against the closed form for each chirp rate.

    Points are independent; ``workers > 1`` evaluates them on a thread pool
    and the returned order is always (element_count, alpha) as given.
    """
    jobs = [(a, n) for n in element_counts for a in alphas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda j: _sweep_point(device, j[0], j[1], sample_count), jobs))
    return [_sweep_point(device, a, n, sample_count) for a, n in jobs]

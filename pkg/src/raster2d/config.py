"""JSON device configuration.

Field names carry their SI unit (``aperture_m``, ``center_freq_hz``...). A
config that omits ``beam.waist_w0_m`` gets a waist of half the AOD aperture.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .device_model import (
    AodSpec,
    BeamSpec,
    DaodSpec,
    DeviceSpec,
    EomSpec,
    MeasuredCalibration,
    RelaySpec,
    VipaSpec,
    DEFAULT_PROFILE_CONSTANT,
)
from .exceptions import ConfigError, InvalidParameterError

BUNDLED_DEVICES = ("brimrose_ted150", "brimrose_ted150_full_band")
BUNDLED_CHAINS = ("current", "upgraded")


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("raster2d") / "data" / f"{name}.json"))


def read_json(path) -> dict:
    """Read a JSON file, reporting the line of any syntax error."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read file ({exc.strerror})", path=path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path=path, line=exc.lineno) from exc


def resolve_path(name_or_path, bundled=BUNDLED_DEVICES) -> Path:
    if str(name_or_path) in bundled:
        return bundled_path(str(name_or_path))
    return Path(name_or_path)


class _Section:
    def __init__(self, data, prefix, path):
        if not isinstance(data, dict):
            raise ConfigError("expected an object", path=path, field=prefix or "<root>")
        self.data = data
        self.prefix = prefix
        self.path = path

    def _name(self, key):
        return f"{self.prefix}.{key}" if self.prefix else key

    def section(self, key, required=True):
        if key not in self.data:
            if required:
                raise ConfigError("missing section", path=self.path, field=self._name(key))
            return None
        return _Section(self.data[key], self._name(key), self.path)

    def number(self, key, default=...):
        if key not in self.data:
            if default is ...:
                raise ConfigError("missing field", path=self.path, field=self._name(key))
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}",
                              path=self.path, field=self._name(key))
        return float(value)


def device_from_dict(data: dict, path=None) -> DeviceSpec:
    root = _Section(data, "", path)
    beam_s = root.section("beam")
    aod_s = root.section("aod")
    daod_s = root.section("daod", required=False)
    vipa_s = root.section("vipa")
    eom_s = root.section("eom")
    relay_s = root.section("relay")
    meas_s = root.section("measured", required=False)
    try:
        aod = AodSpec(
            acoustic_velocity_v=aod_s.number("acoustic_velocity_m_per_s"),
            aperture=aod_s.number("aperture_m"),
            center_freq_F0=aod_s.number("center_freq_hz"),
            full_bandwidth_dF=aod_s.number("full_bandwidth_hz"),
            usable_bandwidth=aod_s.number("usable_bandwidth_hz",
                                          aod_s.number("full_bandwidth_hz")),
            peak_efficiency=aod_s.number("peak_efficiency", 1.0),
        )
        beam = BeamSpec(
            wavelength=beam_s.number("wavelength_m"),
            waist_w0=beam_s.number("waist_w0_m", aod.aperture / 2),
            profile_constant_a=beam_s.number("profile_constant_a", DEFAULT_PROFILE_CONSTANT),
        )
        daod = DaodSpec(
            element=aod,
            peak_efficiency=daod_s.number("peak_efficiency", 1.0) if daod_s else 1.0,
            geometry=(daod_s.data.get("geometry", "counter-propagating")
                      if daod_s else "counter-propagating"),
        )
        vipa = VipaSpec(
            fsr=vipa_s.number("fsr_hz"),
            fwhm_linewidth=vipa_s.number("fwhm_linewidth_hz"),
            reflectivity=vipa_s.number("reflectivity"),
            thickness=vipa_s.number("thickness_m"),
        )
        eom = EomSpec(
            sideband_min=eom_s.number("sideband_min_hz"),
            sideband_max=eom_s.number("sideband_max_hz"),
            transmission=eom_s.number("transmission", 1.0),
        )
        relay = RelaySpec(objective_focal_f_obj=relay_s.number("objective_focal_m"))
        measured = MeasuredCalibration()
        if meas_s is not None:
            measured = MeasuredCalibration(
                access_time_single=meas_s.number("access_time_single_s", None),
                access_time_daod=meas_s.number("access_time_daod_s", None),
                dynamic_resolution_daod=meas_s.number("dynamic_resolution_daod", None),
                dynamic_resolution_t_scan=meas_s.number("dynamic_resolution_t_scan_s", None),
                t_fast=meas_s.number("t_fast_s", None),
                spot_wx=meas_s.number("spot_wx_m", None),
                spot_wy=meas_s.number("spot_wy_m", None),
            )
        device = DeviceSpec(
            beam=beam,
            slow_axis=daod,
            fast_axis=vipa,
            eom=eom,
            relay=relay,
            raster_period=root.number("raster_period_s", 1e-6),
            measured=measured,
            name=str(data.get("name", Path(path).stem if path else "device")),
        )
        device.validate()
        return device
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), path=path) from exc


def load_device(name_or_path) -> DeviceSpec:
    """Load a device from a JSON file or a bundled config name."""
    path = resolve_path(name_or_path)
    return device_from_dict(read_json(path), path)


def device_to_dict(device: DeviceSpec) -> dict:
    aod = device.aod
    m = device.measured
    out = {
        "name": device.name,
        "beam": {
            "wavelength_m": device.beam.wavelength,
            "waist_w0_m": device.beam.waist_w0,
            "profile_constant_a": device.beam.profile_constant_a,
        },
        "aod": {
            "acoustic_velocity_m_per_s": aod.acoustic_velocity_v,
            "aperture_m": aod.aperture,
            "center_freq_hz": aod.center_freq_F0,
            "full_bandwidth_hz": aod.full_bandwidth_dF,
            "usable_bandwidth_hz": aod.usable_bandwidth,
            "peak_efficiency": aod.peak_efficiency,
        },
        "daod": {
            "geometry": device.slow_axis.geometry,
            "peak_efficiency": device.slow_axis.peak_efficiency,
        },
        "vipa": {
            "fsr_hz": device.fast_axis.fsr,
            "fwhm_linewidth_hz": device.fast_axis.fwhm_linewidth,
            "reflectivity": device.fast_axis.reflectivity,
            "thickness_m": device.fast_axis.thickness,
        },
        "eom": {
            "sideband_min_hz": device.eom.sideband_min,
            "sideband_max_hz": device.eom.sideband_max,
            "transmission": device.eom.transmission,
        },
        "relay": {"objective_focal_m": device.relay.objective_focal_f_obj},
        "raster_period_s": device.raster_period,
    }
    measured = {
        "access_time_single_s": m.access_time_single,
        "access_time_daod_s": m.access_time_daod,
        "dynamic_resolution_daod": m.dynamic_resolution_daod,
        "dynamic_resolution_t_scan_s": m.dynamic_resolution_t_scan,
        "t_fast_s": m.t_fast,
        "spot_wx_m": m.spot_wx,
        "spot_wy_m": m.spot_wy,
    }
    measured = {k: v for k, v in measured.items() if v is not None}
    if measured:
        out["measured"] = measured
    return out

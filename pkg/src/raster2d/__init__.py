"""Simulator and schedule compiler for a MHz-rate 2D optical rastering device."""

from .compiler import (
    DriveSchedule,
    Pattern,
    RasterCompiler,
    ShuttleConstraints,
    compile_pattern,
    decode_schedule,
    timing_report,
    validate,
)
from .config import load_device
from .device_model import (
    AodSpec,
    BeamSpec,
    ChirpScan,
    DaodSpec,
    DeviceSpec,
    EomSpec,
    RelaySpec,
    VipaSpec,
)

__version__ = "0.1.0"

__all__ = [
    "AodSpec",
    "BeamSpec",
    "ChirpScan",
    "DaodSpec",
    "DeviceSpec",
    "DriveSchedule",
    "EomSpec",
    "Pattern",
    "RasterCompiler",
    "RelaySpec",
    "ShuttleConstraints",
    "VipaSpec",
    "compile_pattern",
    "decode_schedule",
    "load_device",
    "timing_report",
    "validate",
]

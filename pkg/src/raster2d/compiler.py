"""Lower a 2D intensity pattern to a timed drive schedule and check it.

Columns are visited in order during one linear slow-axis chirp. While the
chirp dwells on column ``j`` the EOM emits one sideband per lit row; the
VIPA maps each sideband frequency onto its row.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .device_model import (
    ChirpScan,
    DeviceSpec,
    row_to_frequency,
    sideband_position,
    vipa_metrics,
)
from .exceptions import (
    ConfigError,
    InvalidParameterError,
    ResolutionExceededError,
    ToneOutOfBandError,
)

_REL_TOL = 1e-9


# --- patterns -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pattern:
    """Intensity weights indexed ``[column, row]``, each in [0, 1]."""

    weights: np.ndarray

    def __post_init__(self):
        w = check_pattern(self.weights)
        object.__setattr__(self, "weights", w)

    @property
    def n_cols(self) -> int:
        return self.weights.shape[0]

    @property
    def n_rows(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        return isinstance(other, Pattern) and np.array_equal(self.weights, other.weights)

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        """Parse a grid of digits 0-9 (weight = digit/9), one line per row."""
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ConfigError("pattern has no rows")
        width = len(lines[0])
        grid = np.zeros((width, len(lines)))
        for r, line in enumerate(lines):
            if len(line) != width:
                raise ConfigError(f"row has {len(line)} cells, expected {width}", line=r + 1)
            for c, ch in enumerate(line):
                if not ch.isdigit():
                    raise ConfigError(f"invalid cell {ch!r}", line=r + 1)
                grid[c, r] = int(ch) / 9
        return cls(grid)

    @classmethod
    def from_dict(cls, data: dict) -> "Pattern":
        try:
            grid = np.zeros((int(data["n_cols"]), int(data["n_rows"])))
            for cell in data.get("cells", []):
                grid[int(cell["c"]), int(cell["r"])] = float(cell["w"])
        except KeyError as exc:
            raise ConfigError("missing field", field=exc.args[0]) from exc
        except IndexError as exc:
            raise ConfigError("cell outside the pattern grid") from exc
        return cls(grid)

    def to_dict(self) -> dict:
        cells = [{"c": int(c), "r": int(r), "w": float(self.weights[c, r])}
                 for c, r in zip(*np.nonzero(self.weights))]
        return {"n_cols": self.n_cols, "n_rows": self.n_rows, "cells": cells}

    def to_text(self) -> str:
        digits = np.rint(self.weights * 9).astype(int)
        return "\n".join("".join(str(d) for d in digits[:, r]) for r in range(self.n_rows)) + "\n"


def check_pattern(weights) -> np.ndarray:
    """Validate a weight grid and return it as a float array."""
    w = check_array(weights, dtype=np.float64, ensure_all_finite=True, copy=True)
    if w.min() < 0 or w.max() > 1:
        raise InvalidParameterError("pattern weights must lie in [0, 1]")
    return w


def load_pattern(path) -> Pattern:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, path=path, line=exc.lineno) from exc
        return Pattern.from_dict(data)
    return Pattern.from_text(text)


# --- schedules ------------------------------------------------------------


@dataclass(frozen=True)
class Tone:
    frequency: float
    amplitude_weight: float


@dataclass(frozen=True)
class ColumnEvent:
    t_start: float
    t_end: float
    column_index: int
    slow_frequency: float
    tones: tuple[Tone, ...] = ()

    @property
    def dwell(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class DriveSchedule:
    chirp: ChirpScan
    retrace: float
    n_rows: int
    column_events: tuple[ColumnEvent, ...]

    @property
    def n_cols(self) -> int:
        return len(self.column_events)

    @property
    def period(self) -> float:
        return self.chirp.t_scan + self.retrace

    def check_windows(self, tol: float = 1e-12) -> None:
        """Raise unless column windows are ordered, disjoint and tile [0, t_scan]."""
        t = 0.0
        n = self.n_cols
        dwell = self.chirp.t_scan / n if n else 0.0
        for j, ev in enumerate(self.column_events):
            if ev.column_index != j:
                raise InvalidParameterError(f"event {j} has column index {ev.column_index}")
            if abs(ev.t_start - t) > tol or abs(ev.dwell - dwell) > tol:
                raise InvalidParameterError(f"column {j} window does not tile the scan")
            t = ev.t_end
        if n and abs(t - self.chirp.t_scan) > tol:
            raise InvalidParameterError("column windows do not end at t_scan")

    def to_dict(self) -> dict:
        # femtosecond rounding keeps the text stable across load/save cycles
        def ns(t):
            return round(t * 1e9, 6)

        return {
            "chirp": {
                "f_start_hz": self.chirp.f_start,
                "f_end_hz": self.chirp.f_end,
                "t_scan_ns": ns(self.chirp.t_scan),
            },
            "retrace_ns": ns(self.retrace),
            "n_rows": self.n_rows,
            "column_events": [
                {
                    "column_index": ev.column_index,
                    "t_start_ns": ns(ev.t_start),
                    "t_end_ns": ns(ev.t_end),
                    "slow_frequency_hz": ev.slow_frequency,
                    "tones": [{"frequency_hz": tn.frequency,
                               "amplitude_weight": tn.amplitude_weight}
                              for tn in ev.tones],
                }
                for ev in self.column_events
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "DriveSchedule":
        try:
            c = data["chirp"]
            chirp = ChirpScan(float(c["f_start_hz"]), float(c["f_end_hz"]),
                              float(c["t_scan_ns"]) * 1e-9)
            events = tuple(
                ColumnEvent(
                    t_start=float(ev["t_start_ns"]) * 1e-9,
                    t_end=float(ev["t_end_ns"]) * 1e-9,
                    column_index=int(ev["column_index"]),
                    slow_frequency=float(ev["slow_frequency_hz"]),
                    tones=tuple(Tone(float(tn["frequency_hz"]), float(tn["amplitude_weight"]))
                                for tn in ev["tones"]),
                )
                for ev in data["column_events"]
            )
            return cls(chirp, float(data["retrace_ns"]) * 1e-9, int(data["n_rows"]), events)
        except KeyError as exc:
            raise ConfigError("missing field", field=exc.args[0]) from exc


def load_schedule(path) -> DriveSchedule:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path=path, line=exc.lineno) from exc
    return DriveSchedule.from_dict(data)


# --- compile --------------------------------------------------------------


def slow_axis_capacity(device: DeviceSpec, t_scan: float) -> float:
    """Resolvable columns for a DAOD sweep of the usable band in ``t_scan``."""
    return device.dynamic_resolution(t_scan, element_count=2)


def fast_axis_capacity(device: DeviceSpec) -> float:
    return vipa_metrics(device.fast_axis).resolution


def compile_pattern(pattern: Pattern, device: DeviceSpec, t_scan: float,
                    retrace: Optional[float] = None, check_band: bool = True) -> DriveSchedule:
    """Build the drive schedule for ``pattern`` with a sweep lasting ``t_scan``.

    ``retrace`` defaults to one single-AOD access time, the time needed to
    refill the aperture before the next sweep.
    """
    if not isinstance(pattern, Pattern):
        pattern = Pattern(pattern)
    n_cols, n_rows = pattern.n_cols, pattern.n_rows
    cols_avail = slow_axis_capacity(device, t_scan)
    if n_cols > math.floor(cols_avail):
        raise ResolutionExceededError("slow", n_cols, cols_avail)
    rows_avail = fast_axis_capacity(device)
    if n_rows > math.floor(rows_avail):
        raise ResolutionExceededError("fast", n_rows, rows_avail)

    row_freqs = [row_to_frequency(device.fast_axis, i, n_rows) for i in range(n_rows)]
    if check_band:
        for i, f in enumerate(row_freqs):
            if pattern.weights[:, i].any() and not device.eom.in_band(f):
                raise ToneOutOfBandError(i, f, (device.eom.sideband_min, device.eom.sideband_max))

    chirp = ChirpScan.centered(device.aod, t_scan)
    step = (chirp.f_end - chirp.f_start) / n_cols
    events = []
    for j in range(n_cols):
        lit = np.flatnonzero(pattern.weights[j] > 0)
        tones = tuple(Tone(row_freqs[i], math.sqrt(pattern.weights[j, i])) for i in lit)
        events.append(ColumnEvent(
            t_start=j * t_scan / n_cols,
            t_end=(j + 1) * t_scan / n_cols,
            column_index=j,
            slow_frequency=chirp.f_start + (j + 0.5) * step,
            tones=tones,
        ))
    if retrace is None:
        retrace = device.access_time_single
    if retrace < 0:
        raise InvalidParameterError("retrace must be non-negative")
    return DriveSchedule(chirp, retrace, n_rows, tuple(events))


def decode_schedule(schedule: DriveSchedule, device: DeviceSpec) -> Pattern:
    """Recover the pattern a schedule draws (column, row from tone, weight = amplitude^2)."""
    w = np.zeros((schedule.n_cols, schedule.n_rows))
    for ev in schedule.column_events:
        for tone in ev.tones:
            row = int(round(sideband_position(device.fast_axis, tone.frequency, schedule.n_rows)))
            w[ev.column_index, row % schedule.n_rows] = tone.amplitude_weight ** 2
    return Pattern(np.clip(w, 0.0, 1.0))


# --- validation -----------------------------------------------------------


@dataclass(frozen=True)
class ShuttleConstraints:
    """Limits from trapping atoms in the rastered potential.

    ``t_fast`` of None means the VIPA switching time from the device.
    """

    f_trap: float = 50e3
    heating_margin: float = 10.0
    step_max: float = 100e-9
    t_fast: Optional[float] = None

    def __post_init__(self):
        for name in ("f_trap", "heating_margin", "step_max"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.t_fast is not None and not self.t_fast > 0:
            raise InvalidParameterError("t_fast must be positive")

    def switch_time(self, device: DeviceSpec) -> float:
        if self.t_fast is not None:
            return self.t_fast
        return vipa_metrics(device.fast_axis).switch_time


@dataclass(frozen=True)
class ConstraintResult:
    constraint_id: str
    description: str
    required: float
    actual: float
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class ConstraintReport:
    results: tuple[ConstraintResult, ...]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, constraint_id: str) -> ConstraintResult:
        for r in self.results:
            if r.constraint_id == constraint_id:
                return r
        raise KeyError(constraint_id)

    def failures(self) -> list[ConstraintResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "constraints": [r.__dict__ for r in self.results],
            "notes": list(self.notes),
        }

    def format(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            line = (f"{r.constraint_id} {status:4s} {r.description}: actual={r.actual:.6g} "
                    f"required={r.required:.6g} margin={r.margin:+.3g}")
            if r.detail:
                line += f" ({r.detail})"
            lines.append(line)
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _at_least(cid, description, actual, required, detail=""):
    margin = (actual - required) / required if required else math.inf
    return ConstraintResult(cid, description, required, actual,
                            margin >= -_REL_TOL, margin, detail)


def _at_most(cid, description, actual, limit, detail=""):
    margin = (limit - actual) / limit if limit else -math.inf
    return ConstraintResult(cid, description, limit, actual,
                            margin >= -_REL_TOL, margin, detail)


def check_raster_rate(rate: float, constraints: ShuttleConstraints) -> ConstraintResult:
    required = constraints.heating_margin * 2 * constraints.f_trap
    return _at_least("C1", "raster rate vs parametric heating", rate, required,
                     f"margin factor {constraints.heating_margin:g} x 2 f_trap")


def check_switching(t_fast: float, t_access: float, n_cols: int) -> ConstraintResult:
    return _at_most("C2", "fast-axis switch time <= T_a/n", t_fast, t_access / n_cols)


def validate(schedule: DriveSchedule, device: DeviceSpec,
             constraints: ShuttleConstraints = ShuttleConstraints()) -> ConstraintReport:
    """Evaluate every physical constraint; failures are entries, never exceptions."""
    t_scan = schedule.chirp.t_scan
    n_cols = max(schedule.n_cols, 1)
    t_fast = constraints.switch_time(device)
    results = [
        check_raster_rate(1 / schedule.period, constraints),
        check_switching(t_fast, device.access_time_single, n_cols),
        _at_most("C3", "columns <= DAOD dynamic resolution",
                 schedule.n_cols, slow_axis_capacity(device, t_scan)),
        _at_most("C4", "rows <= VIPA resolution",
                 schedule.n_rows, fast_axis_capacity(device)),
    ]
    bad = []
    for ev in schedule.column_events:
        for tone in ev.tones:
            if not device.eom.in_band(tone.frequency):
                row = sideband_position(device.fast_axis, tone.frequency, schedule.n_rows)
                bad.append((ev.column_index, row, tone.frequency))
    bad_rows = sorted({round(r, 6) for _, r, _ in bad})
    detail = (f"out-of-band rows {', '.join(f'{r:g}' for r in bad_rows)}" if bad
              else f"band [{device.eom.sideband_min:.4g}, {device.eom.sideband_max:.4g}] Hz")
    results.append(ConstraintResult("C5", "tones within modulator band", 0, len(bad),
                                    not bad, -float(len(bad)), detail))
    results.append(_at_least("C6", "column dwell >= switch time", t_scan / n_cols, t_fast))
    notes = ("top and bottom rows measured ~10% below nominal resolution; "
             "not included in the row map",)
    return ConstraintReport(tuple(results), notes)


@dataclass(frozen=True)
class TimingReport:
    refresh_rate: float
    duty: float
    column_dwell: float


def timing_report(schedule: DriveSchedule, device: DeviceSpec = None) -> TimingReport:
    t_scan = schedule.chirp.t_scan
    return TimingReport(
        refresh_rate=1 / schedule.period,
        duty=t_scan / schedule.period,
        column_dwell=t_scan / max(schedule.n_cols, 1),
    )


# --- estimator ------------------------------------------------------------


class RasterCompiler(TransformerMixin, BaseEstimator):
    """Pattern -> :class:`DriveSchedule` transformer for a fixed device.

    Parameters
    ----------
    device : DeviceSpec
        Device whose resolution and band limits apply.
    t_scan : float, default=1e-6
        Slow-axis sweep duration [s].
    retrace : float or None, default=None
        Dead time between sweeps [s]; None uses one single-AOD access time.
    check_band : bool, default=True
        Reject lit rows whose sideband the modulator cannot produce.

    ``fit`` checks that a weight grid of the given shape fits the device;
    ``transform`` compiles a weight grid and ``inverse_transform`` decodes
    a schedule back to weights.
    """

    def __init__(self, device=None, t_scan=1e-6, retrace=None, check_band=True):
        self.device = device
        self.t_scan = t_scan
        self.retrace = retrace
        self.check_band = check_band

    def fit(self, X, y=None):
        if self.device is None:
            raise InvalidParameterError("RasterCompiler needs a device")
        w = check_pattern(X)
        n_cols, n_rows = w.shape
        self.column_capacity_ = slow_axis_capacity(self.device, self.t_scan)
        self.row_capacity_ = fast_axis_capacity(self.device)
        if n_cols > math.floor(self.column_capacity_):
            raise ResolutionExceededError("slow", n_cols, self.column_capacity_)
        if n_rows > math.floor(self.row_capacity_):
            raise ResolutionExceededError("fast", n_rows, self.row_capacity_)
        self.n_cols_, self.n_rows_ = n_cols, n_rows
        return self

    def transform(self, X) -> DriveSchedule:
        check_is_fitted(self, "n_cols_")
        pattern = Pattern(X)
        if (pattern.n_cols, pattern.n_rows) != (self.n_cols_, self.n_rows_):
            raise InvalidParameterError(
                f"pattern is {pattern.n_cols}x{pattern.n_rows}, compiler was fitted "
                f"for {self.n_cols_}x{self.n_rows_}")
        return compile_pattern(pattern, self.device, self.t_scan, self.retrace, self.check_band)

    def inverse_transform(self, schedule: DriveSchedule) -> np.ndarray:
        return decode_schedule(schedule, self.device).weights

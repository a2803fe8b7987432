"""Parallel atom transport planning and architecture comparison.

Positions are metres internally; the JSON files use micrometres.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compiler import ShuttleConstraints
from .device_model import DeviceSpec, vipa_metrics
from .exceptions import ConfigError, InvalidParameterError

UM = 1e-6


class Model(str, enum.Enum):
    CROSSED_AOD = "crossed_aod"
    AOD_VIPA = "aod_vipa"
    DAOD_VIPA = "daod_vipa"

    @property
    def sequential(self) -> bool:
        return self is not Model.DAOD_VIPA


@dataclass(frozen=True)
class DeviceCapability:
    model: Model
    T_a: float
    t_fast: float
    R_raster: float

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        for name in ("T_a", "t_fast", "R_raster"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")

    @classmethod
    def from_device(cls, device: DeviceSpec, model=Model.DAOD_VIPA, measured=False):
        t_a = device.access_time_single
        if measured and device.measured.access_time_single:
            t_a = device.measured.access_time_single
        return cls(Model(model), t_a, vipa_metrics(device.fast_axis).switch_time,
                   1 / device.raster_period)


@dataclass(frozen=True, eq=False)
class AtomConfig:
    """Atom positions (N x 2, metres) inside ``bounds`` = (xmin, xmax, ymin, ymax)."""

    positions: np.ndarray
    bounds: tuple[float, float, float, float]

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "positions", pos)
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmin <= xmax and ymin <= ymax):
            raise InvalidParameterError("bounds must satisfy min <= max")
        inside = ((pos[:, 0] >= xmin) & (pos[:, 0] <= xmax)
                  & (pos[:, 1] >= ymin) & (pos[:, 1] <= ymax))
        if not inside.all():
            bad = int(np.flatnonzero(~inside)[0])
            raise InvalidParameterError(f"atom {bad} at {pos[bad]} lies outside bounds")

    def __len__(self):
        return len(self.positions)

    @classmethod
    def from_dict(cls, data: dict) -> "AtomConfig":
        try:
            pos = [(float(p["x_um"]) * UM, float(p["y_um"]) * UM) for p in data["positions"]]
            b = data["bounds_um"]
            bounds = tuple(float(b[k]) * UM for k in ("xmin", "xmax", "ymin", "ymax"))
        except KeyError as exc:
            raise ConfigError("missing field", field=exc.args[0]) from exc
        return cls(np.array(pos, dtype=float).reshape(-1, 2), bounds)

    def to_dict(self) -> dict:
        xmin, xmax, ymin, ymax = (b / UM for b in self.bounds)
        return {
            "bounds_um": {"xmin": xmin, "xmax": xmax, "ymin": ymin, "ymax": ymax},
            "positions": [{"x_um": x / UM, "y_um": y / UM} for x, y in self.positions],
        }


def load_atoms(path) -> AtomConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path=path, line=exc.lineno) from exc
    return AtomConfig.from_dict(data)


@dataclass(frozen=True, eq=False)
class MoveSchedule:
    """Planned transport.

    ``per_cycle_positions[k]`` holds every atom after cycle ``k``; index 0 is
    the initial configuration, so the array has ``cycles + 1`` frames.
    """

    model: Model
    cycles: int
    per_cycle_positions: np.ndarray
    total_time: float
    addressing_overhead_per_cycle: float
    groups: int = 1
    notes: tuple[str, ...] = field(default=())

    @property
    def final_positions(self) -> np.ndarray:
        return self.per_cycle_positions[-1]

    def max_step(self) -> float:
        if self.cycles == 0:
            return 0.0
        steps = np.diff(self.per_cycle_positions, axis=0)
        return float(np.max(np.hypot(steps[..., 0], steps[..., 1])))

    def summary(self) -> dict:
        return {
            "model": self.model.value,
            "cycles": self.cycles,
            "groups": self.groups,
            "total_time_us": self.total_time / UM,
            "addressing_overhead_per_cycle_ns": self.addressing_overhead_per_cycle * 1e9,
        }

    def to_dict(self) -> dict:
        out = self.summary()
        out["notes"] = list(self.notes)
        out["frames_um"] = (self.per_cycle_positions / UM).tolist()
        return out


def addressing_time(n_atoms: int, cap: DeviceCapability) -> float:
    """Time to address ``n_atoms`` once.

    Sequential architectures switch one tone per atom; the rastered device
    visits every column within one access time regardless of the atom count.
    """
    if n_atoms < 0:
        raise InvalidParameterError("n_atoms must be non-negative")
    if cap.model.sequential:
        return n_atoms * cap.T_a
    return cap.T_a


def max_speed(R_raster: float, step: float) -> float:
    """Top transport speed, one ``step`` per raster period [m/s]."""
    return step * R_raster


def _cycles_for(distance: float, step: float) -> int:
    return int(math.ceil(distance / step - 1e-9)) if distance > 0 else 0


def _straight_frames(start, stop, cycles):
    frac = np.arange(1, cycles + 1)[:, None, None] / cycles
    frames = start[None] + frac * (stop - start)[None]
    frames[-1] = stop
    return frames


def _check_separation(frames, min_sep):
    for k, frame in enumerate(frames):
        d = np.hypot(*(frame[:, None, :] - frame[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(d, np.inf)
        if d.size and d.min() < min_sep:
            i, j = np.unravel_index(np.argmin(d), d.shape)
            warnings.warn(f"atoms {i} and {j} come within {d.min() / UM:.3g} um "
                          f"at cycle {k}", stacklevel=3)
            return


def _sequential_groups(delta, model, tol=1e-12):
    """Ordered (atom indices, displacement) groups executed one after another."""
    groups = []
    if model is Model.AOD_VIPA:
        for i, d in enumerate(delta):
            if np.hypot(*d) > tol:
                groups.append(([i], d.copy()))
        return groups
    for axis in (0, 1):
        by_shift: dict[float, list[int]] = {}
        for i, d in enumerate(delta[:, axis]):
            if abs(d) > tol:
                by_shift.setdefault(round(d / tol) * tol, []).append(i)
        for idx in by_shift.values():
            shift = np.zeros(2)
            shift[axis] = delta[idx[0], axis]
            groups.append((idx, shift))
    return groups


def plan_moves(initial: AtomConfig, target: AtomConfig, cap: DeviceCapability,
               constraints: ShuttleConstraints = ShuttleConstraints(),
               min_separation: float | None = None) -> MoveSchedule:
    """Move atom ``i`` of ``initial`` to atom ``i`` of ``target``.

    DAOD_VIPA moves every atom at once along its straight line. CROSSED_AOD
    can only translate sets of atoms along one axis at a time: atoms that share
    an x (or y) displacement form one group, and groups run one after another.
    AOD_VIPA moves one atom at a time. Sequential groups also pay the tone
    switching cost of addressing their atoms.
    """
    if len(initial) != len(target):
        raise InvalidParameterError(
            f"initial has {len(initial)} atoms but target has {len(target)}")
    xmin, xmax, ymin, ymax = initial.bounds
    tp = target.positions
    if tp.size and ((tp[:, 0] < xmin).any() or (tp[:, 0] > xmax).any()
                    or (tp[:, 1] < ymin).any() or (tp[:, 1] > ymax).any()):
        raise InvalidParameterError("target lies outside the initial bounds")

    step = constraints.step_max
    start = initial.positions
    delta = tp - start
    n = len(start)
    frames = [start.copy()]

    if cap.model is Model.DAOD_VIPA:
        dist = np.hypot(delta[:, 0], delta[:, 1]) if n else np.zeros(0)
        cycles = _cycles_for(float(dist.max()) if n else 0.0, step)
        if cycles:
            frames.extend(_straight_frames(start, tp, cycles))
        total = cycles / cap.R_raster
        overhead = addressing_time(n, cap) if n else 0.0
        groups = 1 if cycles else 0
        notes = ()
    else:
        total = 0.0
        addressing = 0.0
        groups_list = _sequential_groups(delta, cap.model)
        current = start.copy()
        for idx, shift in groups_list:
            c = _cycles_for(float(np.hypot(*shift)), step)
            stop = current.copy()
            stop[idx] = current[idx] + shift
            frames.extend(_straight_frames(current, stop, c))
            current = stop
            addressing += addressing_time(len(idx), cap)
            total += c / cap.R_raster
        total += addressing
        frames[-1] = tp.copy() if len(frames) > 1 else frames[-1]
        cycles = len(frames) - 1
        overhead = addressing / cycles if cycles else 0.0
        groups = len(groups_list)
        notes = ("baseline: rigid single-axis group translations run sequentially; "
                 "one modelling choice for a sequential deflector",)

    positions = np.array(frames).reshape(len(frames), n, 2)
    if min_separation is not None and n > 1:
        _check_separation(positions, min_separation)
    return MoveSchedule(cap.model, len(frames) - 1, positions, total, overhead, groups, notes)


# --- benchmark ------------------------------------------------------------


@dataclass(frozen=True)
class BenchRow:
    n_atoms: int
    trial: int
    time_crossed_s: float
    time_daod_vipa_s: float
    speedup: float


def random_instance(rng: np.random.Generator, n: int, box: float):
    bounds = (0.0, box, 0.0, box)
    a = AtomConfig(rng.uniform(0, box, size=(n, 2)), bounds)
    b = AtomConfig(rng.uniform(0, box, size=(n, 2)), bounds)
    return a, b


def plan_bench(ns=(4, 8, 16, 32), trials=50, seed=7, box=10 * UM, T_a=457e-9,
               R_raster=1e6, constraints=ShuttleConstraints()) -> list[BenchRow]:
    """Seeded random instances comparing crossed-AOD and DAOD-VIPA shuttle times."""
    rng = np.random.default_rng(seed)
    crossed = DeviceCapability(Model.CROSSED_AOD, T_a, 1e-9, R_raster)
    daod = DeviceCapability(Model.DAOD_VIPA, T_a, 1e-9, R_raster)
    rows = []
    for n in ns:
        for trial in range(trials):
            a, b = random_instance(rng, n, box)
            tc = plan_moves(a, b, crossed, constraints).total_time
            td = plan_moves(a, b, daod, constraints).total_time
            rows.append(BenchRow(n, trial, tc, td, tc / td if td else math.inf))
    return rows


def speedup_slope(rows) -> float:
    """Least-squares slope of mean speedup against atom count."""
    ns = sorted({r.n_atoms for r in rows})
    means = [np.mean([r.speedup for r in rows if r.n_atoms == n]) for n in ns]
    return float(np.polyfit(ns, means, 1)[0])

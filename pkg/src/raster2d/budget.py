"""Optical power accounting through the device."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .config import BUNDLED_CHAINS, read_json, resolve_path
from .exceptions import ConfigError, InvalidParameterError

DEFAULT_POWER_PER_TRAP = 1e-3


@dataclass(frozen=True)
class Stage:
    name: str
    transmission: float

    def __post_init__(self):
        if not 0 <= self.transmission <= 1:
            raise InvalidParameterError(
                f"stage {self.name!r}: transmission {self.transmission} outside [0, 1]")


@dataclass(frozen=True)
class EfficiencyChain:
    stages: tuple[Stage, ...] = ()
    name: str = "chain"
    input_power: Optional[float] = None
    input_power_derived: bool = False
    input_power_note: str = ""
    power_per_trap: float = DEFAULT_POWER_PER_TRAP

    def __add__(self, other: "EfficiencyChain") -> "EfficiencyChain":
        return EfficiencyChain(self.stages + other.stages, f"{self.name}+{other.name}")

    @classmethod
    def of(cls, *transmissions: float, name="chain") -> "EfficiencyChain":
        return cls(tuple(Stage(f"stage {i}", t) for i, t in enumerate(transmissions)), name)


def chain_efficiency(chain: EfficiencyChain) -> float:
    return math.prod(s.transmission for s in chain.stages)


def trap_count(power_at_atoms: float, power_per_trap: float = DEFAULT_POWER_PER_TRAP) -> int:
    if not power_per_trap > 0:
        raise InvalidParameterError("power per trap must be positive")
    if power_at_atoms < 0:
        raise InvalidParameterError("power must be non-negative")
    # guard against 0.5/0.001 = 499.99999...
    return int(math.floor(power_at_atoms / power_per_trap * (1 + 1e-12)))


def required_input_power(chain: EfficiencyChain, power_at_atoms: float) -> float:
    """Input power that delivers ``power_at_atoms`` through ``chain``."""
    eff = chain_efficiency(chain)
    if eff == 0:
        raise InvalidParameterError("chain transmits nothing")
    return power_at_atoms / eff


def approx(value: float) -> str:
    """One significant figure, the precision the efficiency is quoted at."""
    return f"{value:.1g}"


def load_chain(name_or_path) -> EfficiencyChain:
    path = resolve_path(name_or_path, BUNDLED_CHAINS)
    data = read_json(path)
    try:
        stages = tuple(Stage(str(s["name"]), float(s["transmission"])) for s in data["stages"])
    except KeyError as exc:
        raise ConfigError("missing field", path=path, field=exc.args[0]) from exc
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), path=path) from exc
    power = data.get("input_power_w")
    return EfficiencyChain(
        stages=stages,
        name=str(data.get("name", path.stem)),
        input_power=None if power is None else float(power),
        input_power_derived=bool(data.get("input_power_derived", False)),
        input_power_note=str(data.get("input_power_note", "")),
        power_per_trap=float(data.get("power_per_trap_w", DEFAULT_POWER_PER_TRAP)),
    )


@dataclass(frozen=True)
class BudgetRow:
    stage: str
    transmission: float
    cumulative: float
    power_w: Optional[float]


def budget_table(chain: EfficiencyChain, input_power: Optional[float] = None) -> list[BudgetRow]:
    power = chain.input_power if input_power is None else input_power
    rows = []
    cum = 1.0
    for s in chain.stages:
        cum *= s.transmission
        rows.append(BudgetRow(s.name, s.transmission, cum, None if power is None else power * cum))
    return rows


def format_budget(chain: EfficiencyChain, input_power: Optional[float] = None) -> str:
    power = chain.input_power if input_power is None else input_power
    lines = [f"{'stage':<50s} {'T':>6s} {'cumulative':>10s}" + ("  power_w" if power else "")]
    for r in budget_table(chain, power):
        line = f"{r.stage:<50s} {r.transmission:6.3f} {r.cumulative:10.5f}"
        if r.power_w is not None:
            line += f"  {r.power_w:.4g}"
        lines.append(line)
    eff = chain_efficiency(chain)
    lines.append(f"total efficiency {eff:.5g} (~{approx(eff)})")
    if power is not None:
        at_atoms = power * eff
        label = ""
        if input_power is None and chain.input_power_derived:
            label = " [derived"
            label += f": {chain.input_power_note}]" if chain.input_power_note else "]"
        lines.append(f"input power {power:.4g} W{label}")
        lines.append(f"power at atoms {at_atoms * 1e3:.4g} mW")
        lines.append(f"traps at {chain.power_per_trap * 1e3:g} mW each: "
                     f"{trap_count(at_atoms, chain.power_per_trap)}")
    return "\n".join(lines)

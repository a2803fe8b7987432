import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from raster2d.budget import (
    EfficiencyChain,
    Stage,
    approx,
    budget_table,
    chain_efficiency,
    format_budget,
    load_chain,
    required_input_power,
    trap_count,
)
from raster2d.exceptions import ConfigError, InvalidParameterError


def test_current_chain():
    chain = load_chain("current")
    assert chain_efficiency(chain) == pytest.approx(0.3 * 0.25 * 0.25, rel=1e-12)
    assert approx(chain_efficiency(chain)) == "0.02"


def test_upgraded_scenario():
    chain = load_chain("upgraded")
    eff = chain_efficiency(chain)
    assert eff == pytest.approx(0.225)
    at_atoms = chain.input_power * eff
    assert 0.5 <= at_atoms <= 0.51
    assert trap_count(at_atoms, chain.power_per_trap) >= 500
    assert chain.input_power_derived
    text = format_budget(chain)
    assert "derived" in text and "traps at 1 mW each: 506" in text


def test_back_solved_input_power():
    chain = load_chain("upgraded")
    assert required_input_power(chain, 0.5) == pytest.approx(2.222, rel=1e-3)


def test_trap_count_edges():
    assert trap_count(0.5) == 500
    assert trap_count(0.0) == 0
    with pytest.raises(InvalidParameterError):
        trap_count(1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        trap_count(-1.0)


def test_table_is_cumulative():
    rows = budget_table(EfficiencyChain.of(0.5, 0.5, 0.8), input_power=2.0)
    assert [r.cumulative for r in rows] == pytest.approx([0.5, 0.25, 0.2])
    assert rows[-1].power_w == pytest.approx(0.4)


def test_empty_and_zero_chains():
    assert chain_efficiency(EfficiencyChain()) == 1.0
    with pytest.raises(InvalidParameterError):
        required_input_power(EfficiencyChain.of(0.0), 1.0)
    with pytest.raises(InvalidParameterError):
        Stage("bad", 1.2)


@given(a=st.lists(st.floats(0, 1), max_size=6), b=st.lists(st.floats(0, 1), max_size=6))
def test_concatenation_multiplies(a, b):
    ca, cb = EfficiencyChain.of(*a), EfficiencyChain.of(*b)
    assert chain_efficiency(ca + cb) == pytest.approx(
        chain_efficiency(ca) * chain_efficiency(cb), rel=1e-12, abs=1e-300)


@given(t=st.lists(st.floats(0, 1), min_size=1, max_size=6))
def test_efficiency_bounded(t):
    eff = chain_efficiency(EfficiencyChain.of(*t))
    assert 0 <= eff <= min(t)
    assert math.isclose(eff, math.prod(t))


def test_chain_file_errors(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"stages": [{"name": "x"}]}')
    with pytest.raises(ConfigError, match="transmission"):
        load_chain(path)
    path.write_text('{"stages": [{"name": "x", "transmission": 2}]}')
    with pytest.raises(ConfigError):
        load_chain(path)

# -*- coding: utf-8 -*-
import numpy as np
import pytest

from scenarios import SCENARIOS, ScenarioConfigError, bit_errors, encode_decode, get_scenario, transmit_bit
from simulator import SimConfig, Simulator

NAMES = sorted(SCENARIOS)


def test_all_scenarios_registered():
    assert NAMES == ["PRF_CF", "PRF_IS", "PRF_OS", "PR_FR", "PR_PP"]


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("bit", [0, 1])
def test_single_bit(geom, name, bit):
    assert transmit_bit(get_scenario(name, geom), bit) == bit


@pytest.mark.parametrize("name", NAMES)
def test_random_message_is_error_free(geom, name):
    sent = np.random.default_rng(7).integers(0, 2, size=1000).tolist()
    received = encode_decode(get_scenario(name, geom, seed=3), sent)
    assert len(received) == 1000
    assert bit_errors(sent, received) == 0


def test_scenario_names_are_case_insensitive(geom):
    assert get_scenario("pr_fr", geom).name == get_scenario("PR_FR", geom).name


def test_unknown_scenario(geom):
    with pytest.raises(ScenarioConfigError):
        get_scenario("PR_XX", geom)


def test_non_bit_input(geom):
    with pytest.raises(ScenarioConfigError):
        encode_decode(get_scenario("PRF_CF", geom), [0, 1, 2])


def test_bit_errors_counts_flips():
    assert bit_errors([0, 1, 1, 0], [0, 0, 1, 1]) == 2


@pytest.mark.parametrize("bit,prefetched", [(0, 4), (1, 7)])
def test_control_flow_gap_sets_prefetch_count(geom, bit, prefetched):
    scn = get_scenario("PRF_CF", geom)
    program = scn.build(bit).instructions
    # SB, load, load, B, A, A, A, load: the branch is taken for bit 0 and skips the first A
    assert [i for i, instr in enumerate(program) if not instr.is_load][1:] == [3, 4, 5, 6]
    assert program[3].steps == 2 and program[3].value is False
    obs = Simulator(SimConfig()).execute(scn.build(bit), scn.probes)
    assert obs.prefetch_count == prefetched

# -*- coding: utf-8 -*-
import pytest

from generator.instantiator import InstrKind
from scenarios import ScenarioConfigError, build_bp_program, run_bp_experiment
from simulator.branch_predictor import TABLE_ENTRIES


def test_program_layout():
    experiment = build_bp_program(4, 2, True)
    program = experiment.program.instructions
    branches = [i for i, instr in enumerate(program) if instr.kind is InstrKind.BRANCH]
    assert all(i % 3 == 0 for i in branches)
    assert experiment.spy_index == len(program) - 1
    assert len(branches) == 4 + 1 + 2 * 9 + 1


def test_values_take_different_paths():
    # the spy is reached on both paths
    for value in (False, True):
        assert build_bp_program(8, 0, value).spy_index > 0


@pytest.mark.parametrize("x", [64, 256, 512])
def test_spy_is_learned_below_capacity(x):
    assert run_bp_experiment(x, 0, trials=256) < 0.05


@pytest.mark.parametrize("x", [TABLE_ENTRIES, TABLE_ENTRIES + 100])
def test_spy_always_mispredicts_when_table_is_full(x):
    assert run_bp_experiment(x, 0, trials=64) == 1.0


def test_nop_padding_keeps_history():
    assert run_bp_experiment(64, 7, trials=128) < 0.05


@pytest.mark.slow
@pytest.mark.parametrize("x,full", [(64, False), (256, False), (512, False), (1024, True), (1536, True)])
def test_full_protocol(x, full):
    rate = run_bp_experiment(x, 0)
    assert (rate == 1.0) == full


def test_bad_parameters():
    with pytest.raises(ScenarioConfigError):
        run_bp_experiment(64, 0, trials=0)
    with pytest.raises(ScenarioConfigError):
        build_bp_program(-1, 0, True)
    with pytest.raises(ScenarioConfigError):
        build_bp_program(4, 0, True, setup_branches=0)

# -*- coding: utf-8 -*-
"""
Branch Predictor Capacity Experiment
Spy-branch misprediction rate after X initial branches fill pattern history table 0

Program layout (every branch sits at an index divisible by 3, so all of them
share table 0 and its history register):

    X x [B(v1,true,3) SB(v2,true) NOP]          initial branches, never taken
    [SB(v1,value) NOP NOP]
    [B(v1,false,k) NOP NOP]                     setup: taken for value 0
    9 x [B(v2,true,3) NOP NOP]                  setup 1: taken, skips setup 2 at the end
    9 x [B(v2,false,3) NOP NOP]                 setup 2: not taken
    Y NOPs, padded to a multiple of 3
    B(v1,true,1)                                spy: taken iff value

The setup branch plus nine setup-path branches fill the 10-bit history, so the
spy sees a different history for each value. Once X initial entries exceed
the table capacity the spy's entry is always evicted before it is used again.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

from generator.instantiator import Instruction, Testcase
from scenarios.channels import ScenarioConfigError
from simulator.branch_predictor import HISTORY_BITS
from simulator.machine import SimConfig, Simulator

DEFAULT_TRIALS = 10240
ALTERNATION_PERIOD = 16
BLOCK = 3

logger = logging.getLogger(__name__)


@dataclass
class BranchExperiment:
    program: Testcase
    spy_index: int
    setup_branches: int


def _block(head: Instruction, *rest: Instruction) -> List[Instruction]:
    body = [head, *rest]
    return body + [Instruction.nop()] * (BLOCK - len(body))


def build_bp_program(x: int, y: int, value: bool, setup_branches: int = HISTORY_BITS - 1) -> BranchExperiment:
    if x < 0 or y < 0:
        raise ScenarioConfigError(f"X and Y must be non-negative, got X={x}, Y={y}")
    if setup_branches < 1:
        raise ScenarioConfigError("at least one setup branch per path is needed")

    program: List[Instruction] = []
    for _ in range(x):
        program += _block(Instruction.branch("v1", True, BLOCK), Instruction.set_var("v2", True))

    program += _block(Instruction.set_var("v1", value))
    path = BLOCK * setup_branches
    program += _block(Instruction.branch("v1", False, BLOCK + path))

    for i in range(setup_branches):
        steps = BLOCK + path if i == setup_branches - 1 else BLOCK
        program += _block(Instruction.branch("v2", True, steps))
    for _ in range(setup_branches):
        program += _block(Instruction.branch("v2", False, BLOCK))

    program += [Instruction.nop()] * y
    program += [Instruction.nop()] * (-len(program) % BLOCK)
    spy = len(program)
    program.append(Instruction.branch("v1", True, 1))
    return BranchExperiment(Testcase(f"bp-x{x}-y{y}-{int(value)}", tuple(program)), spy, setup_branches)


def run_bp_experiment(x: int, y: int, trials: int = DEFAULT_TRIALS, setup_branches: int = HISTORY_BITS - 1,
                      config: Optional[SimConfig] = None) -> float:
    """Fraction of trials in which the spy branch was mispredicted

    The secret value alternates every 16 trials; predictor state persists
    across trials.
    """
    if trials <= 0:
        raise ScenarioConfigError("trials must be positive; the rate is undefined for zero trials")
    programs = {v: build_bp_program(x, y, v, setup_branches) for v in (False, True)}
    sim = Simulator(config or SimConfig(enable_prefetcher=False, enable_previction=False))
    sim.reset()

    mispredicted = 0
    for trial in range(trials):
        value = (trial // ALTERNATION_PERIOD) % 2 == 1
        experiment = programs[value]
        obs = sim.execute(experiment.program)
        if experiment.spy_index in obs.mispredicted_pcs:
            mispredicted += 1

    rate = mispredicted / trials
    logger.info(f"Branch experiment X={x} Y={y}: spy misprediction {rate:.3f} over {trials} trials")
    return rate

"""
Threads package
Experiment runner executing testcase families on a worker pool
"""

from .runner import ExperimentRunner, FamilySpec, execute_testcase, run_gts

__all__ = ['ExperimentRunner', 'FamilySpec', 'execute_testcase', 'run_gts']

"""Cooperative multi-BS integrated sensing and communication with UAV targets.

Beamforming, receive-filter and trajectory co-design by alternating
optimization, built on a small homogeneous-embedding conic solver.
"""
from .driver import ALL_MODES, Axis, Mode, RunConfig, RunReport, run, sweep
from .errors import (CoopIsacError, DegenerateError, InfeasibleError, ReachabilityError,
                     ScenarioError, SingularError)
from .scenario import Scenario, desk_scenario, load, paper_scenario, save, validate

__version__ = "0.1.0"

__all__ = ["ALL_MODES", "Axis", "CoopIsacError", "DegenerateError", "InfeasibleError", "Mode", "ReachabilityError",
           "RunConfig", "RunReport", "Scenario", "ScenarioError", "SingularError", "desk_scenario",
           "load", "paper_scenario", "run", "save", "sweep", "validate"]

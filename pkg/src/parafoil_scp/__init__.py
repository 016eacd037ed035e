"""Parafoil precision-landing guidance via successive convexification.

Submodules:
  atmosphere   density power law, speed scaling, time/altitude map
  wind         shear + gust wind profiles and their path integrals
  dynamics     4-DOF kinematics, exact discrete transition, reference recovery
  transcription  mesh construction and convex subproblem assembly
  socp         second-order cone programming interior-point solver
  planner      two-phase successive convexification loop
  control_sim  closed-loop tracking simulation with replanning
  montecarlo   seeded dispersion campaigns and running statistics
  config       versioned JSON scenario configuration
  cli          command-line entry points
  service      optional HTTP wrapper
"""

__version__ = "0.1.0"

from .atmosphere import AtmosphereModel, SpeedProfile, TimeAltitudeMap
from .control_sim import ControllerGains, LandingRecord, TruthModelParams, fly
from .dynamics import FourDofState, ReferenceSolution, SubstitutedTrajectory
from .montecarlo import CampaignConfig, RunningStats, run_campaign, summarize
from .planner import PlannerDiagnostics, Scenario, plan, replan
from .socp import ConicSolution, SocpSolver, SolveStatus
from .transcription import BoundaryData, ConvexSubproblem, Mesh, ScpWeights
from .wind import DrydenParams, WindProfile, generate_profile

__all__ = [
    "AtmosphereModel",
    "SpeedProfile",
    "TimeAltitudeMap",
    "DrydenParams",
    "WindProfile",
    "generate_profile",
    "FourDofState",
    "ReferenceSolution",
    "SubstitutedTrajectory",
    "BoundaryData",
    "ConvexSubproblem",
    "Mesh",
    "ScpWeights",
    "ConicSolution",
    "SocpSolver",
    "SolveStatus",
    "PlannerDiagnostics",
    "Scenario",
    "plan",
    "replan",
    "ControllerGains",
    "LandingRecord",
    "TruthModelParams",
    "fly",
    "CampaignConfig",
    "RunningStats",
    "run_campaign",
    "summarize",
    "__version__",
]

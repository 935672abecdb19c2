"""Numerical laboratory for Tonelli Lagrangian flows on flat tori.

Layers, bottom to top:

- ``models`` / ``fields``: Lagrangians L = kinetic + one-form - potential
  on R^d / Z^d, with exact Legendre transforms and derivative fields.
- ``flow``: adaptive symplectic-checked integration of the Euler-Lagrange
  flow and its linearization.
- ``orbits``: closed-orbit search (shooting and action minimization) and
  spectral classification of the transverse monodromy.
- ``frames`` / ``profiles`` / ``tsystem`` / ``potential`` / ``realize``:
  orbit-adapted frames, the curvature path, windowed bump perturbations,
  the linear system tying bump coefficients to monodromy directions, and
  Gauss-Newton realization of symplectic targets under a C^2 budget.
- ``ledger`` / ``genericity`` / ``birkhoff`` / ``families``: quantitative
  constants extracted from a model, the torsion functionals, normal-form
  coefficients, and one-parameter family scans.
- ``entropy`` / ``suspension``: Bowen spanning-set and periodic-orbit
  growth estimators plus benchmark flows with known entropy.
- ``presets`` / ``runio`` / ``cli``: model catalogue, scenario records,
  and the reproducible command-line runner.
"""

from .entropy import (EntropyEstimate, InsufficientDataError,
                      ResolutionError, SplittingCertificate, SplittingError,
                      StepError, bowen_entropy, lyapunov_exponent,
                      periodic_growth_entropy, verify_splitting)
from .fields import ConstantMetric, ConstantOneForm, TrigPotential, ZeroPotential
from .flow import (FlowTrajectory, LinearizedFlow, integrate,
                   integrate_linearized, sample_energy_level)
from .frames import AdaptedFrame, adapted_frame, extract_curvature
from .genericity import genericity_test, phi_n_estimate
from .ledger import (ConstantsLedger, InfeasibleLedgerError, build_profile,
                     estimate_constants, select_bump_time)
from .models import LagrangianModel, LoopPath, PhaseState, TorusSpace
from .orbits import (ClosedOrbit, SpectralClass, classify_spectrum,
                     find_closed_orbit_action, find_closed_orbit_shooting,
                     is_4_elementary)
from .potential import PotentialField, TubeChart, TubeChartError, build_potential
from .presets import CATALOG, build_preset, orbit_seed_states
from .profiles import BumpProfile
from .realize import (BudgetError, NoConvergenceError, PushReport,
                      WindowKernel, push_orbit_hyperbolic,
                      reachable_radius_estimate, realize_target)
from .runio import RunRecord, Scenario, ValidationError, stable_seed
from .suspension import CatSuspension, EnergyLevelFlow
from .tsystem import (LieAlgebraTarget, PerturbationParams, assemble_T,
                      solve_T_system)

__version__ = "0.1.0"

__all__ = [
    "AdaptedFrame", "BudgetError", "BumpProfile", "CATALOG", "CatSuspension",
    "ClosedOrbit", "ConstantMetric", "ConstantOneForm", "ConstantsLedger",
    "EnergyLevelFlow", "EntropyEstimate", "FlowTrajectory",
    "InfeasibleLedgerError", "InsufficientDataError", "LagrangianModel",
    "LieAlgebraTarget", "LinearizedFlow", "LoopPath", "NoConvergenceError",
    "PerturbationParams", "PhaseState", "PotentialField", "PushReport",
    "ResolutionError", "RunRecord", "Scenario", "SpectralClass",
    "SplittingCertificate", "SplittingError", "StepError", "TorusSpace",
    "TrigPotential", "TubeChart", "TubeChartError", "ValidationError",
    "WindowKernel", "ZeroPotential", "adapted_frame", "assemble_T",
    "bowen_entropy", "build_potential", "build_preset", "build_profile",
    "classify_spectrum", "estimate_constants", "extract_curvature",
    "find_closed_orbit_action", "find_closed_orbit_shooting",
    "genericity_test", "integrate", "integrate_linearized",
    "is_4_elementary", "lyapunov_exponent", "orbit_seed_states",
    "periodic_growth_entropy", "phi_n_estimate", "push_orbit_hyperbolic",
    "reachable_radius_estimate", "realize_target", "sample_energy_level",
    "select_bump_time", "solve_T_system", "stable_seed", "verify_splitting",
]

"""Deterministic and stochastic Goodwin growth cycles.

The deterministic model is a Lotka-Volterra type system for the wage share
``x`` and the employment rate ``y``; its closed orbits are level sets of a
conserved function ``V``.  The perturbed model adds a common Brownian
noise whose intensity vanishes as ``y -> 1``.
"""

__version__ = "0.1.0"

from .model import (PRESET, AssumptionError, ConfigError, DomainError, Equilibria, GoodwinError,
                    GoodwinModel, InfeasibleParametersError, KeenSayCurves, CurveSet, ModelParams,
                    RegionId, classify_region, deterministic_equilibrium, lyapunov,
                    lyapunov_generator, stochastic_rest_point, validate_assumptions)
from .deterministic import (PeriodResult, Trajectory, integrate_ode, level_extent,
                            linearized_period, orbit_period, period_by_return)
from .stochastic import (ExitBound, SdeConfig, StochasticPath, economic_series, estimate_constants,
                         exit_bound, region_path_audit, simulate_sde, stochastic_period,
                         update_winding)
from .montecarlo import (EnsembleSpec, EnsembleStats, bound_validation, fixed_point, loop_map,
                         run_ensemble)

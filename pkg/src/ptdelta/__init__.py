"""Stationary states and linear stability of a Bose-Einstein condensate in a
balanced gain/loss double-delta trap."""

from .bdg import (BdgSolution, BdgUnknowns, BdgVariant, Classification,
                  DeltaGammaResult, StabilityCurve, StabilityTracker, bdg_residual,
                  bdg_rhs, delta_gamma, effective_nonlinearity,
                  locate_stability_change, solve_bdg, track_stability)
from .numerics import (BracketError, IntegrationError, IntegratorConfig,
                       InvalidStateError, JumpCondition, NewtonConfig, NewtonError,
                       SingularJacobianError, Trajectory, bisect, integrate_piecewise,
                       newton_solve, quadrature)
from .oracle import (GridProblem, GrowthFit, LinearMatchingProblem, PropagationRun,
                     TimeSeries, fit_growth_rate, grid_solve, linear_ep,
                     linear_spectrum, propagate)
from .stationary import (Branch, BranchCurve, BranchTracker, NonlinearityMode,
                         NoSolutionError, NotFoundError, ShootingUnknowns, Side,
                         StationaryState, TrapParams, continue_branch, delta_jump,
                         gpe_rhs, locate_pitchfork, locate_tangent, seed_states,
                         shooting_residual, solve_stationary)

__version__ = "0.1.0"

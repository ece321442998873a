"""Adaptive dynamics of a game-theoretic vaccination model.

Build a payoff curve, then locate equilibria, integrate trajectories or
compute bifurcation diagrams::

    from vaxadapt import make_example2, ModelParams, find_all
    eqs = find_all(make_example2(), ModelParams(r=0.909, eps=0.188))
"""

__version__ = "0.1.0"

from .errors import (DegenerateEquilibriumError, DomainError, NumericalError, ParameterError,
                     PreconditionError, QuadratureError, VaxAdaptError)
from .glue import GlueKernel, bump, bump_prime, glue, glue_primitive
from .curves import (CurveFamilySpec, PayoffCurve, ValidationReport, make_convex_test, make_curve,
                     make_example1, make_example2, make_rational_glue, validate)
from .dynamics import ModelParams, Trajectory, integrate, rhs, rhs_dP
from .equilibria import (ConvexBounds, Equilibrium, EquilibriumSet, convex_bounds, find_all,
                         oracle_scan, sensitivity_eps, sensitivity_r)
from .bifurcation import (BranchPoint, Diagram, SaddleNodeEvent, TangencyCurve, TangencyPoint,
                          detect_saddle_nodes, surface, sweep_eps, sweep_r, tangency_curve,
                          track_branches)
from .serialize import parse_curve_spec

"""Total-progeny-dependent birth-and-death processes: exact stochastic
simulation, fluid (ODE) approximations, and extinction-time estimators."""

from . import expr, fluid, models, rng, ssa
from .errors import (
    BracketError,
    DomainError,
    EstimatorUndefinedError,
    EvaluationError,
    ExprSyntaxError,
    ProgenyError,
    QuadratureError,
    SimulationError,
    StiffnessError,
    SubcriticalModelError,
)
from .models import SIR, Custom, LinearBDP, Model1, Model2, custom_from_strings

__version__ = "0.1.0"

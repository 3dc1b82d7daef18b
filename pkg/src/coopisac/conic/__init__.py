"""Small conic-program toolkit: cone projections, problem assembly and an
operator-splitting solver."""
from .admm import Settings, solve
from .cones import Cone, project_cone, smat, svec
from .problem import ConicProblem, ConicSolution, ProblemBuilder, Status

__all__ = ["Cone", "ConicProblem", "ConicSolution", "ProblemBuilder", "Settings", "Status",
           "project_cone", "smat", "solve", "svec"]

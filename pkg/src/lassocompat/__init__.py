"""Exact noiseless Lasso solutions, compatibility constants and bound gaps."""
from .errors import (AdmissibilityError, DegenerateDiagonal, LassoCompatError, MissingSigma0,
                     NonConvergence, NotPSDError, RankError, SetTooLarge, UnsupportedFamily)
from .gram import DesignFactor, GramMatrix, check_fair, factorize
from .designs import DesignSpec, build_gram
from .solver import (LassoSolution, ProblemInstance, kkt_residual, solve_noiseless, solve_noisy,
                     uniqueness_probe)

__version__ = "0.1.0"

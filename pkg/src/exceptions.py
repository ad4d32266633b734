"""
Error hierarchy shared by the numerical modules and the command line
"""


class ChemoLVError(Exception):
    """Base class for all laboratory errors"""

    exit_code = 1


class ConfigurationError(ChemoLVError):
    """Invalid or unparsable experiment configuration"""

    exit_code = 2


class NumericalFault(ChemoLVError):
    """A numerical procedure produced an invalid result"""

    exit_code = 3


class SolverFault(NumericalFault):
    """Time stepper produced NaN, infinite or negative densities"""


class BracketError(NumericalFault):
    """Bisection bracket does not separate pattern from decay"""


class ConvergenceFailure(ChemoLVError):
    """An iteration that was required to converge did not"""

    exit_code = 4

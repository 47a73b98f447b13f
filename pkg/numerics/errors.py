"""
Exception hierarchy shared by every package.
Each error carries the process exit code main.py reports for it.
"""


class MSBError(Exception):
    """Base class for all library errors"""
    exit_code = 1


class ValidationError(MSBError):
    """Invalid generator, spec document, query or counts input"""
    exit_code = 1


class NumericalConsistencyError(MSBError):
    """A numerical result violated a contract it must satisfy"""
    exit_code = 2


class StatisticalCheckError(MSBError):
    """A Monte Carlo check disagreed with the analytic value"""
    exit_code = 3

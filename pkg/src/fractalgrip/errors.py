"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI:
    ScenarioError  -> 1 (bad input file / schema / infeasible spec)
    SolverFault    -> 2 (simulation could not proceed)
    anything else  -> 3 (internal invariant violation)
"""


class FractalGripError(Exception):
    """Base class for all package errors."""


class GeometryError(FractalGripError):
    """Invalid or degenerate geometric input."""


class ScenarioError(FractalGripError):
    """Scenario file is malformed, schema-invalid, or infeasible."""


class KinematicFault(ScenarioError):
    """A linkage cannot close at the requested configuration."""


class SolverFault(FractalGripError):
    """A simulation step failed (interference, inconsistency, ...)."""


class InterferenceFault(SolverFault):
    """Pads penetrate the object deeper than the compliance budget."""


class InconsistencyFault(SolverFault):
    """Static equilibrium could not be balanced; indicates a solver bug."""

"""
Exceptions raised by :mod:`hherz`.
"""
__all__ = (
    "HherzError",
    "DimensionMismatchError",
    "SingularMatrixError",
    "NonGradedMatrixError",
    "QuadratureError",
    "NonFiniteIntegrandError",
    "DivergentIntegralError",
    "HypothesisError",
    "ScenarioError",
)


class HherzError(Exception):
    """
    Base for all :mod:`hherz` errors.
    """


class DimensionMismatchError(HherzError, ValueError):
    """
    Points or matrices live on Heisenberg groups of different dimension.
    """


class SingularMatrixError(HherzError, ValueError):
    """
    A matrix (or a matrix field at some node) is not invertible.
    """


class NonGradedMatrixError(HherzError, ValueError):
    """
    A matrix mixes horizontal and center directions.
    """


class QuadratureError(HherzError, RuntimeError):
    """
    A numerical integral could not be computed.
    """


class NonFiniteIntegrandError(QuadratureError):
    """
    An integrand returned NaN or infinity at a quadrature node.
    """


class DivergentIntegralError(QuadratureError):
    """
    An adaptive 1-d integral failed to converge.

    Parameters
    ----------
    message : str
        Error message.
    diagnostic : str, default: ""
        Diagnostic reported by the underlying integrator.

    Attributes
    ----------
    diagnostic : str
        Diagnostic reported by the underlying integrator.
    """
    def __init__(self, message: str, diagnostic: str=""):
        super().__init__(f"{message}: {diagnostic}" if diagnostic else message)
        self.diagnostic = diagnostic


class HypothesisError(HherzError, ValueError):
    """
    Theorem hypotheses are violated.

    Parameters
    ----------
    violations : list[str]
        Every violated hypothesis.

    Attributes
    ----------
    violations : list[str]
        Every violated hypothesis.
    """
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class ScenarioError(HherzError, ValueError):
    """
    A scenario document is malformed.
    """

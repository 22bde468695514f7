"""Exception hierarchy shared by all jcstark modules."""


class JCStarkError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(JCStarkError, ValueError):
    """Physical parameters violate a model invariant."""


class ModelDomainError(JCStarkError):
    """Closed-form routine called outside its domain of validity."""


class CapacityError(JCStarkError):
    """Requested size exceeds a hard implementation limit."""


class NumericalError(JCStarkError):
    """A numerical procedure broke down (no convergence, missing bracket...)."""


class BracketError(NumericalError):
    """A sign change predicted by node counting was not found."""


class RefinementError(NumericalError):
    """Adaptive angle refinement hit its depth cap.

    Usually means the texture passes through the origin of the plane,
    i.e. the parameters sit on a transition point.
    """


class InconsistencyError(NumericalError):
    """Two routes that must agree returned different results."""


class BoundaryAbsent(JCStarkError):
    """A closed-form phase boundary does not exist at these parameters."""

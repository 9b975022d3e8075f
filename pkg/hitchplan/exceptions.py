# hitchplan/exceptions.py


class HitchplanError(Exception):
    """Base class for every error raised by the planner."""


class DomainError(HitchplanError, ValueError):
    """An argument lies outside the domain of the operation."""


class IntegrationDiverged(HitchplanError):
    """A non-finite state appeared while integrating a control law."""

    def __init__(self, last_index, message=None):
        self.last_index = last_index
        super().__init__(
            message or f"Integration diverged after grid node {last_index}."
        )


class FrameSingular(HitchplanError):
    """The frame X1..X4 is not a basis: l_t + l_r cos(phi0) = 0."""


class SteeringFailed(HitchplanError):
    """No shooting start reached the requested Engel target."""

    def __init__(self, best_residual, message=None, best=None):
        self.best_residual = best_residual
        # Closest SteeringResult found, if any; planners attach a partial report.
        self.best = best
        self.report = None
        super().__init__(
            message or f"Steering failed; best residual {best_residual:.3e}."
        )


class ScenarioError(HitchplanError, ValueError):
    """A scenario file is malformed. Carries the offending field or line."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)

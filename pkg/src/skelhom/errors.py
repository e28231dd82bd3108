"""Typed errors shared across the package."""


class SkelhomError(Exception):
    pass


class ExceptionalPoint(SkelhomError):
    """Point belongs to the measure-zero set where a radial projection
    (or a singular field) is undefined."""


class OutOfBounds(SkelhomError):
    """Point outside the finite submesh region."""


class SingularPoint(SkelhomError):
    """Gradient requested too close to the dual skeleton."""


class OutsideTube(SkelhomError):
    """Nearest-point projection requested outside the tube around N."""


class Undersampled(SkelhomError):
    """Circle sampling too coarse to certify a winding number."""


class WindowEscapes(SkelhomError):
    """Mollification window does not fit inside the face."""


class TubeEscape(SkelhomError):
    """A blended pipeline stage left the tube around N."""


class ConfigError(SkelhomError):
    """Experiment configuration violates a required hypothesis."""

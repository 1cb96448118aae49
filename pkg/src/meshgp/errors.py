"""Exception types shared across the package."""


class MeshError(Exception):
    """Base class for mesh construction and IO problems."""


class OFFParseError(MeshError):
    """The file is not a well-formed ASCII OFF mesh."""


class NonTriangleFaceError(OFFParseError):
    """A face has a vertex count other than three."""


class DegenerateFaceError(MeshError):
    """A face has repeated vertices or (numerically) zero area."""


class DisconnectedMeshError(MeshError):
    """The edge graph of the mesh is not connected."""


class ConfigError(Exception):
    """An experiment configuration is missing, malformed, or inconsistent."""


class NumericalError(Exception):
    """A numerical routine failed beyond recoverable tolerances.

    Carries optional context: ``theta`` (the offending hyperparameters)
    and ``step`` (the integration step at which a state went non-finite).
    """

    def __init__(self, message, theta=None, step=None):
        super().__init__(message)
        self.theta = theta
        self.step = step


class StabilityError(NumericalError):
    """An explicit time step violates the diffusion stability bound."""

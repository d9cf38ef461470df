"""Exception types raised across the toolkit.

Validation problems derive from :class:`SceneError`, numerical/solver
problems from :class:`SolverError`, and file-format problems from
:class:`TensorFileError` so callers (notably the CLI) can map the three
families onto distinct exit codes.
"""


class SceneError(ValueError):
    """A configuration violates a scene invariant."""


class NonUniformReceivers(SceneError):
    """Receiver x positions are not uniformly spaced."""


class NonUniformScan(SceneError):
    """SAR scan positions are not uniformly spaced."""


class BadPermittivity(SceneError):
    """Relative permittivity below 1."""


class EmptyAxis(SceneError):
    """An axis has too few samples to be usable."""


class GridOutsideMedium(SceneError):
    """Voxel grid reaches the air side while the medium is dielectric."""


class NonPositiveFrequency(SceneError):
    """Frequency must be strictly positive."""


class DimensionMismatch(ValueError):
    """Tensor dimensions do not match the scene they are used with."""


class SolverError(RuntimeError):
    """A numerical routine failed."""


class NoConvergence(SolverError):
    """Iterative solver did not reach tolerance within its iteration cap."""


class SameSide(SceneError):
    """Both refraction endpoints lie on the same side of the interface."""


class NegativeThreshold(ValueError):
    """Soft-threshold level must be non-negative."""


class EmptyGrid(ValueError):
    """A candidate grid contains no entries."""


class EmptyImage(ValueError):
    """An image volume contains no voxels."""


class TensorSizeError(SceneError):
    """Requested tensor would exceed the allocation budget."""


class TensorFileError(IOError):
    """Base class for tensor-file format problems."""


class BadMagic(TensorFileError):
    """File does not start with the expected magic string."""


class VersionUnsupported(TensorFileError):
    """File format version not supported by this reader."""


class PayloadSizeMismatch(TensorFileError):
    """File payload length disagrees with the header."""


class UnsupportedElementType(TensorFileError):
    """Element type not representable in the file format."""

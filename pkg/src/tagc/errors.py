"""Exception types raised across the package."""


class TagcError(Exception):
    """Base class for every error raised by ``tagc``."""


class ImageFormatError(TagcError, ValueError):
    """The file decodes, but its format, mode or bit depth is unsupported."""

    def __init__(self, message: str, prop: str | None = None):
        super().__init__(message)
        self.prop = prop


class ShapeError(TagcError, ValueError):
    """Image dimensions are incompatible with the requested operation."""


class ConfigError(TagcError, ValueError):
    """An enhancement or metric parameter is outside its valid range."""


class DegenerateDistributionError(TagcError, ValueError):
    """Samples carry no spread, so a distribution fit is undefined."""


class EmptySelectionError(TagcError, ValueError):
    """No image patch passed the sharpness gate."""


class EmptyCorpusError(TagcError, ValueError):
    """A pristine corpus produced too few usable patches to fit a model."""


class ManifestError(TagcError, ValueError):
    """A dataset manifest violates its schema."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class MissingPathsError(TagcError, FileNotFoundError):
    """One or more files referenced by a manifest do not exist."""

    def __init__(self, paths):
        self.paths = [str(p) for p in paths]
        super().__init__("missing files: " + ", ".join(self.paths))


class RunError(TagcError, RuntimeError):
    """A batch evaluation produced no successful rows."""

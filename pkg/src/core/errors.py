class SegFuseError(Exception):
    """Base class for every error raised by segfuse."""


class SizeError(SegFuseError, ValueError):
    """Dimensions or lengths disagree."""


class CorruptionError(SegFuseError, ValueError):
    """Encoded data (RLE runs, .pvol, .png) is damaged or in the wrong format."""


class CatalogError(SegFuseError, ValueError):
    """A label value, id or channel count does not fit the class catalog."""


class ClassRoleError(CatalogError):
    """A class was used in a role it does not have (e.g. a background detection)."""


class SpecError(SegFuseError, ValueError):
    """A scene / corruption / config file failed validation."""

    def __init__(self, message: str, field_path: str | None = None):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class EmptyEvaluationError(SegFuseError):
    """No class has a defined IoU, so there is nothing to average."""


class ManifestError(SegFuseError, ValueError):
    """Dataset manifest is inconsistent (duplicate ids, missing files)."""

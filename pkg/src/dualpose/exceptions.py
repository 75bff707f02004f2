"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, DataError and
subclasses exit 2, anything else exits 3.
"""


class DualposeError(Exception):
    """Base class for all package-specific errors."""


class DataError(DualposeError):
    """A file, record, or value failed validation."""


class SchemaError(DataError):
    """A structured input violated its schema. `field` names the offender."""

    def __init__(self, message: str, field: str | None = None, record_id: str | None = None):
        self.field = field
        self.record_id = record_id
        parts = [message]
        if field is not None:
            parts.append(f"field={field!r}")
        if record_id is not None:
            parts.append(f"record={record_id!r}")
        super().__init__("; ".join(parts))


class InvalidRotationError(DataError):
    """A matrix meant to be a rotation is not orthonormal with det +1."""


class BehindCameraError(DualposeError):
    """A point's camera-frame depth is not positive, so it cannot project."""


class InsufficientCorrespondencesError(DataError):
    """Fewer 2D-3D correspondences than the PnP solver needs."""


class PoseEstimationError(DualposeError):
    """Pose estimation failed for one face region ("whole" or "central")."""

    def __init__(self, region: str, reason: str):
        self.region = region
        self.reason = reason
        super().__init__(f"pose estimation failed for {region} region: {reason}")

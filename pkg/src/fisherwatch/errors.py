"""Exception hierarchy shared across the package.

Every error carries a short machine-readable ``code`` used by the CLI to
emit one-line reason codes on stderr.
"""


class FisherwatchError(Exception):
    code = "error"


class ShapeError(FisherwatchError):
    """Input arrays have incompatible or unusable dimensions."""

    code = "shape-error"


class DataError(FisherwatchError):
    """Input contains non-finite or otherwise unusable values."""

    code = "data-error"


class ConfigError(FisherwatchError):
    """Detection parameters violate their constraints."""

    code = "config-error"


class DegenerateChannelError(DataError):
    """A channel has zero sample variance inside a segment."""

    code = "degenerate-channel"

    def __init__(self, row: int, context: str = ""):
        self.row = row
        where = f" ({context})" if context else ""
        super().__init__(f"channel {row} has zero sample variance{where}")


class SingularCovarianceError(FisherwatchError):
    """The second sample covariance is not positive definite.

    Usually means the second sub-sample is too small; increase d2.
    """

    code = "singular-covariance"


class RecordTooShortError(ShapeError):
    """The record cannot accommodate the requested segmentation."""

    code = "record-too-short"


class ScenarioError(ConfigError):
    """A simulation scenario is internally inconsistent."""

    code = "scenario-error"

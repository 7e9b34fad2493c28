"""Exception types raised across the package.

Every error carries enough context to name the offending location
(row, feature, column) so callers can surface actionable messages.
"""


class CfrxError(Exception):
    """Base class for all package errors."""


# --- data ingestion / validation ---

class MissingColumn(CfrxError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing column: {column!r}")


class OutOfRangeValue(CfrxError):
    def __init__(self, row: int, feature: str, value):
        self.row = row
        self.feature = feature
        self.value = value
        super().__init__(f"row {row}, feature {feature!r}: value {value!r} out of range")


class NonIntegerOrdinal(CfrxError):
    def __init__(self, row: int, feature: str, value):
        self.row = row
        self.feature = feature
        self.value = value
        super().__init__(f"row {row}, feature {feature!r}: ordinal value {value!r} is not an integer")


class MalformedRow(CfrxError):
    def __init__(self, row: int, detail: str):
        self.row = row
        super().__init__(f"row {row}: {detail}")


class NotOneHot(CfrxError):
    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"feature {feature!r}: slice is not one-hot")


class EmptyDataset(CfrxError):
    pass


class BadSchema(CfrxError):
    pass


class BadConfig(CfrxError):
    pass


class TooFewMinoritySamples(CfrxError):
    pass


class BadFoldCount(CfrxError):
    pass


# --- models ---

class DivergedTraining(CfrxError):
    pass


class WidthMismatch(CfrxError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"encoded width mismatch: model expects {expected}, got {got}")


class LengthMismatch(CfrxError):
    pass


class SingleClassLabels(CfrxError):
    pass


class BadModelFile(CfrxError):
    pass


# --- counterfactual engine ---

class ModeMismatch(CfrxError):
    pass


class TargetEqualsPrediction(CfrxError):
    pass


class NoCounterfactualFound(CfrxError):
    pass


class GenerationFailed(CfrxError):
    pass


class AllGenerationsFailed(CfrxError):
    pass

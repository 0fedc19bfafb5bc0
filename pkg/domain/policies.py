from enum import StrEnum


class MissingValuePolicy(StrEnum):
    STRICT = "strict"
    DROP_ROW = "drop_row"
    FORWARD_FILL = "forward_fill"


class SelectionCriterion(StrEnum):
    BIC = "bic"
    GCV = "gcv"


class GridAnchor(StrEnum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative_to_lambda_max"


class StreamMethod(StrEnum):
    BIC_WINDOW = "bic"
    GCV_WINDOW = "gcv"
    RAP = "rap"

    @property
    def is_windowed(self) -> bool:
        return self is not StreamMethod.RAP

    @property
    def criterion(self) -> SelectionCriterion:
        if self is StreamMethod.RAP:
            raise ValueError("RAP does not select lambda by criterion")
        return SelectionCriterion(self.value)


class WindowWeighting(StrEnum):
    RECTANGULAR = "rectangular"
    EXPONENTIAL = "exponential"


class FitStatus(StrEnum):
    CONVERGED = "converged"
    NOT_CONVERGED = "not_converged"

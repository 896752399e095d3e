"""Exception types raised on invalid inputs."""

from __future__ import annotations


class ValidationError(ValueError):
    """Input failed validation. CLI commands map this to exit status 2."""


class ParameterRangeError(ValidationError):
    pass


class DuplicateQueryError(ValidationError):
    def __init__(self, query_ids: list[str], where: str = "input"):
        self.query_ids = list(query_ids)
        super().__init__(f"duplicate query_id in {where}: {', '.join(self.query_ids[:10])}")


class UnmatchedQueryError(ValidationError):
    """Predictions and ground truth do not cover the same query ids."""

    def __init__(self, missing_ground_truth: list[str], missing_predictions: list[str]):
        self.missing_ground_truth = sorted(missing_ground_truth)
        self.missing_predictions = sorted(missing_predictions)
        parts = []
        if self.missing_ground_truth:
            parts.append(
                f"{len(self.missing_ground_truth)} prediction(s) without ground truth: "
                + ", ".join(self.missing_ground_truth[:10])
            )
        if self.missing_predictions:
            parts.append(
                f"{len(self.missing_predictions)} ground-truth query(s) without prediction: "
                + ", ".join(self.missing_predictions[:10])
            )
        super().__init__("unmatched query ids; " + "; ".join(parts))

    @property
    def offenders(self) -> list[str]:
        return self.missing_ground_truth + self.missing_predictions

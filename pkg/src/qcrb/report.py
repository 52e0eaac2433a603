"""Monte Carlo simulation report record."""

from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class SimReport:
    """Risk estimate of a seeded Monte Carlo run with its analytic prediction.

    ``prediction_source`` names the library formula the prediction came
    from, so sweeps can be matched against the right analytic curve.
    """

    risk_estimate: float
    std_error: float
    trials: int
    seed: int
    prediction: float
    prediction_source: str
    n: int
    risk_kind: str

    def __post_init__(self):
        if self.risk_estimate < 0:
            raise ValidationError(f"risk estimate must be >= 0, got {self.risk_estimate}")
        if self.trials >= 2 and not self.std_error > 0:
            raise ValidationError("standard error must be positive for trials >= 2")

    def to_dict(self) -> dict:
        return {
            "risk_estimate": self.risk_estimate,
            "std_error": self.std_error,
            "trials": self.trials,
            "seed": self.seed,
            "prediction": self.prediction,
            "prediction_source": self.prediction_source,
            "n": self.n,
            "risk_kind": self.risk_kind,
        }

"""
Per-iteration records of a trust-region run.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max-iters"
STATUS_NUMERICAL_FAILURE = "numerical-failure"
STATUS_RADIUS_COLLAPSE = "radius-collapse"

CSV_COLUMNS = ("iter", "value", "gradnorm", "delta", "rho", "accepted")


@dataclass(frozen=True)
class IterationRecord:
    """
    State after one outer iteration (iteration 0 is the starting point).

    value and gradnorm refer to the current iterate, rho and step_norm to
    the proposal of this iteration.
    """

    iter: int
    value: float
    gradnorm: float
    delta: float
    rho: float
    step_norm: float
    accepted: bool
    tcg_iters: int = 0
    tcg_stop: str = ""


@dataclass
class OptimizationTrace:
    """Iteration history and final status of a trust-region run."""

    records: list[IterationRecord] = field(default_factory=list)
    status: str = ""

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    @property
    def iterations(self) -> int:
        return max(0, len(self.records) - 1)

    @property
    def accepted_steps(self) -> int:
        return sum(1 for rec in self.records[1:] if rec.accepted)

    @property
    def accepted_values(self) -> list[float]:
        """Objective at the start point followed by the value after each accepted step."""
        if not self.records:
            return []
        return [self.records[0].value] + [rec.value for rec in self.records[1:] if rec.accepted]

    @property
    def initial_value(self) -> float:
        return self.records[0].value if self.records else float("nan")

    @property
    def final_value(self) -> float:
        return self.records[-1].value if self.records else float("nan")

    @property
    def final_gradnorm(self) -> float:
        return self.records[-1].gradnorm if self.records else float("nan")

    def to_dict(self) -> dict:
        return {"status": self.status, "records": [asdict(rec) for rec in self.records]}

    def to_csv(self, filepath: str | Path) -> None:
        """Write columns iter, value, gradnorm, delta, rho, accepted."""
        data = np.array(
            [
                [rec.iter, rec.value, rec.gradnorm, rec.delta, rec.rho, float(rec.accepted)]
                for rec in self.records
            ],
            dtype=float,
        ).reshape(-1, len(CSV_COLUMNS))
        np.savetxt(
            filepath, data, delimiter=",", header=",".join(CSV_COLUMNS), comments="", fmt="%.17g"
        )

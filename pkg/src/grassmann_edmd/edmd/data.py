"""
EDMD data matrices.

G_B[:, i] = Psi(x_i) and S_B[:, i] = Psi(y_i) for the training pairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from grassmann_edmd.dictionary.observables import Dictionary
from grassmann_edmd.dynamics.data import TrainingSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DataMatrices:
    """
    Lifted snapshot matrices.

    Attributes:
        G: M x L lifts of the x_i
        S: M x L lifts of the y_i
        n: State dimension of the underlying dictionary
        s: Protected head size of the underlying dictionary
        warnings: Conditions recorded while building (e.g. L < M)
    """

    G: np.ndarray
    S: np.ndarray
    n: int = 1
    s: int = 1
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        S = np.asarray(self.S, dtype=float)
        if G.ndim != 2 or G.shape != S.shape:
            raise ValueError(f"G and S must be 2-D with equal shapes, got {G.shape} / {S.shape}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "S", S)

    @property
    def M(self) -> int:
        return self.G.shape[0]

    @property
    def L(self) -> int:
        return self.G.shape[1]


def build_data_matrices(dictionary: Dictionary, training_set: TrainingSet) -> DataMatrices:
    """
    Lift the training pairs into the data matrices G_B and S_B.

    A warning is logged and recorded when L < M, since G_B then cannot
    have full row rank.
    """
    warnings: list[str] = []
    if training_set.L < dictionary.M:
        message = (
            f"Only {training_set.L} training pairs for a dictionary of size {dictionary.M}; "
            "EDMD needs L >= M"
        )
        logger.warning(message)
        warnings.append(message)

    G = dictionary.lift_batch(training_set.x)
    S = dictionary.lift_batch(training_set.y)
    logger.info("Built data matrices: M=%d, L=%d", G.shape[0], G.shape[1])
    return DataMatrices(G=G, S=S, n=dictionary.n, s=dictionary.s, warnings=tuple(warnings))

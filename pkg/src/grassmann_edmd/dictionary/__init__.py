"""
Observable dictionaries, the lift Psi and coordinate matrices.
"""

from grassmann_edmd.dictionary.observables import (
    CoordinateMatrix,
    Dictionary,
    FunctionObservable,
    MonomialObservable,
    Observable,
    coordinate_dictionary,
    coordinate_matrix,
    lift,
    lift_batch,
    monomial_dictionary,
)

__all__ = [
    "Observable",
    "MonomialObservable",
    "FunctionObservable",
    "Dictionary",
    "CoordinateMatrix",
    "monomial_dictionary",
    "coordinate_dictionary",
    "lift",
    "lift_batch",
    "coordinate_matrix",
]

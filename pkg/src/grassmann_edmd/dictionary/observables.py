"""
Observables, dictionaries and the lift.

A Dictionary is an ordered basis B = (psi_1, ..., psi_M) of a finite
dimensional subspace V of observables. Its first s elements span the
protected subspace T; with a coordinate head, psi_k = theta_k (the k-th
state coordinate) for k = 1..n, so that the coordinate matrix is [I_n 0].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class Observable:
    """
    Base class for a real-valued function on state space.

    Subclasses implement evaluate() on an (L, n) batch; single-state
    evaluation is derived from it.
    """

    descriptor: object = None

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        """Evaluate on an (L, n) array, returning shape (L,)."""
        raise NotImplementedError("Observable must implement evaluate")

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.evaluate(x.reshape(1, -1))[0])


@dataclass(frozen=True)
class MonomialObservable(Observable):
    """The monomial x_1^a_1 * ... * x_n^a_n."""

    exponents: tuple[int, ...]

    @property
    def descriptor(self) -> tuple[int, ...]:
        return self.exponents

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        return np.prod(states ** np.asarray(self.exponents), axis=1)

    def __str__(self) -> str:
        if self.degree == 0:
            return "1"
        parts = []
        for k, a in enumerate(self.exponents):
            if a == 1:
                parts.append(f"x{k + 1}")
            elif a > 1:
                parts.append(f"x{k + 1}^{a}")
        return "*".join(parts)


@dataclass(frozen=True)
class FunctionObservable(Observable):
    """
    Observable backed by an arbitrary callable.

    Attributes:
        func: Maps an (L, n) array to (L,) when vectorized, else a state to a float
        name: Free-form descriptor
        vectorized: Whether func accepts batches
    """

    func: Callable
    name: str = "custom"
    vectorized: bool = True

    @property
    def descriptor(self) -> str:
        return self.name

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        if self.vectorized:
            return np.asarray(self.func(states), dtype=float).reshape(states.shape[0])
        return np.array([float(self.func(x)) for x in states])


@dataclass(frozen=True)
class CoordinateMatrix:
    """
    Coordinate matrix Pi (n x M) of a basis: Pi @ lift(x) == x.
    """

    Pi: np.ndarray

    def read_out(self, z) -> np.ndarray:
        """Map lifted coordinates (M,) or (..., M) to states."""
        return np.asarray(z) @ self.Pi.T


@dataclass(frozen=True)
class Dictionary:
    """
    Ordered dictionary B = (psi_1, ..., psi_M).

    Attributes:
        n: State dimension
        observables: Ordered observables
        s: Size of the protected head T (s >= n)
        coordinate_head: psi_k is the k-th coordinate for k = 1..n
    """

    n: int
    observables: tuple[Observable, ...]
    s: int
    coordinate_head: bool = True
    _exponents: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        M = len(self.observables)
        if self.n < 1:
            raise ValueError(f"State dimension must be positive, got {self.n}")
        if not M >= self.s >= self.n:
            raise ValueError(f"Dictionary requires M >= s >= n, got M={M}, s={self.s}, n={self.n}")
        object.__setattr__(self, "observables", tuple(self.observables))
        if all(isinstance(obs, MonomialObservable) for obs in self.observables):
            exponents = np.array([obs.exponents for obs in self.observables], dtype=int)
            if exponents.shape[1] != self.n:
                raise ValueError(f"Monomial exponents have length {exponents.shape[1]}, expected {self.n}")
            if self.coordinate_head and not np.array_equal(
                exponents[: self.n], np.eye(self.n, dtype=int)
            ):
                raise ValueError("Dictionary is flagged coordinate_head but does not start with x1..xn")
            exponents.setflags(write=False)
            object.__setattr__(self, "_exponents", exponents)

    @property
    def M(self) -> int:
        return len(self.observables)

    @property
    def is_monomial(self) -> bool:
        return self._exponents is not None

    @property
    def exponents(self) -> np.ndarray:
        """M x n exponent matrix (monomial dictionaries only)."""
        if self._exponents is None:
            raise ValueError("Dictionary is not purely monomial")
        return self._exponents

    def lift(self, x) -> np.ndarray:
        """Psi(x) = (psi_1(x), ..., psi_M(x))."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"State must have shape ({self.n},), got {x.shape}")
        return self.lift_batch(x.reshape(1, -1))[:, 0]

    def lift_batch(self, states) -> np.ndarray:
        """Lift an (L, n) array of states column-wise into an M x L matrix."""
        states = np.asarray(states, dtype=float)
        if states.ndim == 1 and states.size == 0:
            states = states.reshape(0, self.n)
        if states.ndim != 2 or states.shape[1] != self.n:
            raise ValueError(f"States must have shape (L, {self.n}), got {states.shape}")
        if self._exponents is not None:
            return np.prod(states[None, :, :] ** self._exponents[:, None, :], axis=2)
        if states.shape[0] == 0:
            return np.zeros((self.M, 0))
        return np.vstack([obs.evaluate(states) for obs in self.observables])

    def coordinate_matrix(self) -> CoordinateMatrix:
        """
        Coordinate matrix [I_n 0] relative to this basis.

        Raises:
            ValueError: If the dictionary has no coordinate head
        """
        if not self.coordinate_head:
            raise ValueError("Coordinate matrix requires a dictionary with coordinate head")
        Pi = np.zeros((self.n, self.M))
        Pi[:, : self.n] = np.eye(self.n)
        return CoordinateMatrix(Pi)

    def labels(self) -> list[str]:
        return [str(obs) for obs in self.observables]

    def to_dict(self) -> dict:
        """JSON descriptor: exponent tuples plus n and s."""
        if not self.is_monomial:
            raise ValueError("Only monomial dictionaries can be serialized")
        return {
            "kind": "monomial",
            "n": self.n,
            "s": self.s,
            "exponents": [list(map(int, row)) for row in self.exponents],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Dictionary:
        """Rebuild a monomial dictionary from its descriptor."""
        if data.get("kind", "monomial") != "monomial":
            raise ValueError(f"Unsupported dictionary kind: {data.get('kind')!r}")
        observables = tuple(MonomialObservable(tuple(int(a) for a in row)) for row in data["exponents"])
        n = int(data["n"])
        head = len(observables) >= n and all(
            observables[k].exponents == tuple(int(j == k) for j in range(n)) for k in range(n)
        )
        return cls(n=n, observables=observables, s=int(data["s"]), coordinate_head=head)


def _monomial_exponents(n: int, max_degree: int) -> list[tuple[int, ...]]:
    """Coordinates first, then by ascending degree, x1-heavy first within a degree."""
    coordinates = [tuple(int(j == k) for j in range(n)) for k in range(n)]
    rest = [
        a
        for a in itertools.product(range(max_degree + 1), repeat=n)
        if sum(a) <= max_degree and a not in coordinates
    ]
    rest.sort(key=lambda a: (sum(a), tuple(-e for e in a)))
    return coordinates + rest


def monomial_dictionary(n: int, max_degree: int, s: int | None = None) -> Dictionary:
    """
    All monomials of total degree <= max_degree in n variables.

    The coordinates x1..xn come first; the constant sits in the tail.

    Args:
        n: State dimension
        max_degree: Maximum total degree
        s: Size of the protected head (default n)
    """
    if n < 1 or max_degree < 1:
        raise ValueError(f"Need n >= 1 and max_degree >= 1, got n={n}, max_degree={max_degree}")
    observables = tuple(MonomialObservable(a) for a in _monomial_exponents(n, max_degree))
    return Dictionary(n=n, observables=observables, s=n if s is None else s)


def coordinate_dictionary(n: int) -> Dictionary:
    """The pure coordinate dictionary (x1, ..., xn)."""
    observables = tuple(MonomialObservable(tuple(int(j == k) for j in range(n))) for k in range(n))
    return Dictionary(n=n, observables=observables, s=n)


def lift(dictionary: Dictionary, x) -> np.ndarray:
    """Lift a single state."""
    return dictionary.lift(x)


def lift_batch(dictionary: Dictionary, states) -> np.ndarray:
    """Lift a batch of states into an M x L matrix."""
    return dictionary.lift_batch(states)


def coordinate_matrix(dictionary: Dictionary) -> CoordinateMatrix:
    """Coordinate matrix [I_n 0] of a coordinate-head dictionary."""
    return dictionary.coordinate_matrix()

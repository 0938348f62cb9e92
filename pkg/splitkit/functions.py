"""Test functions f: R^n -> R, vectorized over rows.

Linear and quadratic functions carry their coefficients so closed-form
Gaussian computations can recognise them. ``build_function`` turns a
manifest entry into a function.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core.error_handler import ValidationError
from .core.validators import ArrayValidator


class TestFunction(ABC):
    """Callable on an n-vector (returns float) or an (m, n) array (returns m values)."""

    __test__ = False
    name: str = "function"

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Row-wise values for a 2-d array."""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.evaluate(x[None, :])[0])
        return self.evaluate(x)

    @property
    def is_constant(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class LinearFunctional(TestFunction):
    """f(x) = u . x + c"""

    u: np.ndarray
    c: float = 0.0
    name: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "u", ArrayValidator.vector(self.u, field="u"))

    def evaluate(self, x):
        return x @ self.u + self.c

    @property
    def is_constant(self) -> bool:
        return not np.any(self.u)


@dataclass(frozen=True, eq=False)
class QuadraticForm(TestFunction):
    """f(x) = x^T A x + b . x + c with A symmetric."""

    A: np.ndarray
    b: Optional[np.ndarray] = None
    c: float = 0.0
    name: str = "quadratic"

    def __post_init__(self):
        A = ArrayValidator.matrix(self.A, field="A")
        if A.shape[0] != A.shape[1]:
            raise ValidationError("A must be square", "A", "NOT_SQUARE")
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        b = np.zeros(A.shape[0]) if self.b is None else ArrayValidator.vector(self.b, A.shape[0], "b")
        object.__setattr__(self, "b", b)

    def evaluate(self, x):
        return np.einsum("ij,jk,ik->i", x, self.A, x) + x @ self.b + self.c

    @property
    def is_constant(self) -> bool:
        return not (np.any(self.A) or np.any(self.b))


@dataclass(frozen=True, eq=False)
class Constant(TestFunction):
    value: float = 0.0
    name: str = "constant"

    def evaluate(self, x):
        return np.full(x.shape[0], float(self.value))

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class CoordinateProduct(TestFunction):
    """Product of the listed coordinates."""

    indices: tuple
    name: str = "product"

    def evaluate(self, x):
        return np.prod(x[:, list(self.indices)], axis=1)


@dataclass(frozen=True, eq=False)
class CoordinateMax(TestFunction):
    indices: Optional[tuple] = None
    name: str = "max"

    def evaluate(self, x):
        cols = x if self.indices is None else x[:, list(self.indices)]
        return cols.max(axis=1)


@dataclass(frozen=True, eq=False)
class CallableFunction(TestFunction):
    """Wraps a plain vectorized callable ``fn((m, n)) -> (m,)``."""

    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = "callable"

    def evaluate(self, x):
        return np.asarray(self.fn(x), dtype=float).reshape(x.shape[0])


def coordinate(index: int, n: int) -> LinearFunctional:
    u = np.zeros(n)
    u[index] = 1.0
    return LinearFunctional(u, name=f"x[{index}]")


def norm_squared(n: int) -> QuadraticForm:
    return QuadraticForm(np.eye(n), name="norm_sq")


def coordinate_sum(n: int) -> LinearFunctional:
    return LinearFunctional(np.ones(n), name="sum")


SCALAR_FUNCTIONS = {
    "identity": lambda s: s,
    "square": lambda s: s**2,
    "cube": lambda s: s**3,
    "abs": np.abs,
    "tanh": np.tanh,
    "positive_part": lambda s: np.maximum(s, 0.0),
}


def scalar_function(name: str) -> Callable[[np.ndarray], np.ndarray]:
    """Named g: R -> R used for cumulative-sum checks."""
    if name not in SCALAR_FUNCTIONS:
        raise ValidationError(
            f"unknown scalar function {name!r}; expected one of {sorted(SCALAR_FUNCTIONS)}",
            "g",
            "UNKNOWN_FUNCTION",
        )
    return SCALAR_FUNCTIONS[name]


def build_function(entry: dict, n: int) -> TestFunction:
    """Manifest entry -> function, e.g. ``{"kind": "linear", "u": [1, 0]}``."""
    kind = entry.get("kind")
    if kind == "linear":
        return LinearFunctional(ArrayValidator.vector(entry["u"], n, "u"), float(entry.get("c", 0.0)))
    if kind == "quadratic":
        return QuadraticForm(
            ArrayValidator.matrix(entry["A"], (n, n), "A"), entry.get("b"), float(entry.get("c", 0.0))
        )
    if kind == "norm_sq":
        return norm_squared(n)
    if kind == "coordinate":
        return coordinate(int(entry["index"]), n)
    if kind == "sum":
        return coordinate_sum(n)
    if kind == "square_sum":
        indices = entry.get("indices", range(n))
        diag = np.zeros(n)
        diag[[int(i) for i in indices]] = 1.0
        return QuadraticForm(np.diag(diag), name="square_sum")
    if kind == "product":
        return CoordinateProduct(tuple(int(i) for i in entry["indices"]))
    if kind == "max":
        indices = entry.get("indices")
        return CoordinateMax(None if indices is None else tuple(int(i) for i in indices))
    if kind == "constant":
        return Constant(float(entry.get("value", 0.0)))
    raise ValidationError(f"unknown function kind {kind!r}", "kind", "UNKNOWN_FUNCTION")


def quadratic_coefficients(f: TestFunction, n: int):
    """(A, b, c) with f(x) = x^T A x + b . x + c, or None if f is not of that form."""
    if isinstance(f, QuadraticForm):
        return f.A, f.b, f.c
    if isinstance(f, LinearFunctional):
        return np.zeros((n, n)), f.u, f.c
    if isinstance(f, Constant):
        return np.zeros((n, n)), np.zeros(n), float(f.value)
    if isinstance(f, CoordinateProduct) and len(set(f.indices)) == len(f.indices) <= 2:
        A, b = np.zeros((n, n)), np.zeros(n)
        if len(f.indices) == 1:
            b[f.indices[0]] = 1.0
        elif len(f.indices) == 2:
            i, j = f.indices
            A[i, j] = A[j, i] = 0.5
        else:
            return A, b, 1.0
        return A, b, 0.0
    return None


def as_test_function(f) -> TestFunction:
    if isinstance(f, TestFunction):
        return f
    if callable(f):
        return CallableFunction(f)
    raise ValidationError("expected a test function or a vectorized callable", "f")


__all__ = [
    "TestFunction",
    "LinearFunctional",
    "QuadraticForm",
    "Constant",
    "CoordinateProduct",
    "CoordinateMax",
    "CallableFunction",
    "coordinate",
    "norm_squared",
    "coordinate_sum",
    "scalar_function",
    "build_function",
    "quadratic_coefficients",
    "as_test_function",
]

"""Sampleable measures on R^n.

Variants: Gaussian, product over orthogonal blocks (factors in block
coordinates), the xi-mixture kernel, empirical resampling and opaque
samplers (including iid coordinates from a scipy.stats law).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from ..core.error_handler import DimensionMismatchError, InsufficientSamplesError, ValidationError
from ..core.rng import SeedLike, as_generator
from ..core.validators import ArrayValidator
from ..subspaces.decomposition import IndependentDecomposition
from ..subspaces.distribution import SubspaceDistribution, bernstein_subspaces, weighted_distribution
from ..subspaces.subspace import Subspace, complement
from .gaussian import GaussianMeasure

Moments = Tuple[np.ndarray, np.ndarray]
Sampler = Callable[[np.random.Generator, int], np.ndarray]


class MeasureSpec(ABC):
    """A probability measure on R^dim that can be sampled reproducibly."""

    kind: str = "abstract"

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """(count, dim) array of independent draws."""

    def moments(self) -> Optional[Moments]:
        """Exact (mean, covariance) when known analytically, else None."""
        return None

    def gaussian(self) -> Optional[GaussianMeasure]:
        """The measure itself when it is known to be Gaussian."""
        return None


@dataclass(frozen=True, eq=False)
class GaussianSpec(MeasureSpec):
    measure: GaussianMeasure
    kind = "gaussian"

    @classmethod
    def standard(cls, n: int) -> "GaussianSpec":
        return cls(GaussianMeasure.standard(n))

    @classmethod
    def of(cls, mean, cov) -> "GaussianSpec":
        return cls(GaussianMeasure(mean, cov))

    @property
    def dim(self) -> int:
        return self.measure.dim

    def draw(self, rng, count):
        return self.measure.sample(rng, count)

    def moments(self):
        return self.measure.mean.copy(), self.measure.cov.copy()

    def gaussian(self):
        return self.measure


@dataclass(frozen=True, eq=False)
class ProductSpec(MeasureSpec):
    """Independent factors on mutually orthogonal blocks that span R^n.

    Each factor lives in its block's own basis coordinates.
    """

    blocks: tuple
    factors: tuple
    decomposition: Optional[IndependentDecomposition] = None
    kind = "product"

    def __post_init__(self):
        blocks, factors = tuple(self.blocks), tuple(self.factors)
        if len(blocks) != len(factors):
            raise ValidationError(
                f"{len(factors)} factors for {len(blocks)} blocks", "factors", "COUNT_MISMATCH"
            )
        if not blocks:
            raise ValidationError("a product needs at least one block", "blocks", "EMPTY")
        n = blocks[0].ambient_dim
        for i, (block, factor) in enumerate(zip(blocks, factors)):
            if block.ambient_dim != n:
                raise DimensionMismatchError(n, block.ambient_dim, f"blocks[{i}]")
            if factor.dim != block.dim:
                raise DimensionMismatchError(block.dim, factor.dim, f"factors[{i}]")
        stacked = np.column_stack([b.basis for b in blocks])
        if stacked.shape[1] != n or np.max(np.abs(stacked.T @ stacked - np.eye(n))) > 1e-8:
            raise ValidationError(
                "blocks must be mutually orthogonal and span the ambient space", "blocks"
            )
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def over_decomposition(
        cls, decomposition: IndependentDecomposition, factors: Sequence[MeasureSpec]
    ) -> "ProductSpec":
        """Factors for E_alpha (in order) followed by E_dep when it is nonzero."""
        return cls(tuple(decomposition.blocks), tuple(factors), decomposition)

    @classmethod
    def coordinates(cls, components: Sequence[MeasureSpec]) -> "ProductSpec":
        """Independent 1-d components along the coordinate axes."""
        n = len(components)
        eye = np.eye(n)
        return cls(tuple(Subspace(eye[:, [i]]) for i in range(n)), tuple(components))

    @property
    def dim(self) -> int:
        return self.blocks[0].ambient_dim

    @property
    def dependent_factor(self) -> Optional[MeasureSpec]:
        if self.decomposition is None or self.decomposition.dependent.dim == 0:
            return None
        return self.factors[-1]

    def draw(self, rng, count):
        out = np.zeros((count, self.dim))
        for block, factor in zip(self.blocks, self.factors):
            out += block.embed(factor.draw(rng, count))
        return out

    def moments(self):
        mean = np.zeros(self.dim)
        cov = np.zeros((self.dim, self.dim))
        for block, factor in zip(self.blocks, self.factors):
            m = factor.moments()
            if m is None:
                return None
            mean += block.basis @ m[0]
            cov += block.basis @ m[1] @ block.basis.T
        return mean, cov

    def gaussian(self):
        if all(f.gaussian() is not None for f in self.factors):
            mean, cov = self.moments()
            return GaussianMeasure(mean, 0.5 * (cov + cov.T))
        return None


@dataclass(frozen=True, eq=False)
class MixtureSpec(MeasureSpec):
    """Law of P_E X + P_{E^perp} X' with E ~ xi and X, X' iid from ``base``."""

    xi: SubspaceDistribution
    base: MeasureSpec
    kind = "mixture"

    def __post_init__(self):
        if self.xi.ambient_dim != self.base.dim:
            raise DimensionMismatchError(self.xi.ambient_dim, self.base.dim, "base")

    @property
    def dim(self) -> int:
        return self.base.dim

    def draw(self, rng, count):
        x = self.base.draw(rng, count)
        x_prime = self.base.draw(rng, count)
        if self.xi.continuous:
            out = np.empty_like(x)
            for i, S in enumerate(self.xi.sample_subspaces(rng, count)):
                out[i] = S.project(x[i]) + S.project_complement(x_prime[i])
            return out
        atoms = self.xi.sample_atoms(rng, count)
        out = np.empty_like(x)
        for a, S in enumerate(self.xi.atoms):
            rows = atoms == a
            if np.any(rows):
                out[rows] = S.project(x[rows]) + S.project_complement(x_prime[rows])
        return out

    def moments(self):
        m = self.base.moments()
        if m is None or self.xi.continuous:
            return None
        mean, cov = m
        mixed = np.zeros_like(cov)
        for S, w in zip(self.xi.atoms, self.xi.weights):
            P, Pc = S.projector, S.complement_projector
            mixed += w * (P @ cov @ P + Pc @ cov @ Pc)
        return mean, mixed


@dataclass(frozen=True, eq=False)
class EmpiricalSpec(MeasureSpec):
    """Bootstrap resampling of stored rows."""

    samples: np.ndarray
    kind = "empirical"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        arr = ArrayValidator.samples(arr, min_rows=0)
        if arr.shape[0] == 0:
            raise InsufficientSamplesError(1, 0)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "EmpiricalSpec":
        """One row per sample, comma separated; a header line is optional."""
        path = Path(path)
        with path.open("r", encoding="utf-8") as fh:
            first = fh.readline()
        try:
            [float(tok) for tok in first.strip().split(",")]
            skip = 0
        except ValueError:
            skip = 1
        data = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=skip)
        if data.size == 0:
            raise InsufficientSamplesError(1, 0, str(path))
        return cls(data)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def draw(self, rng, count):
        return self.samples[rng.integers(0, self.samples.shape[0], size=count)]


@dataclass(frozen=True, eq=False)
class CustomSpec(MeasureSpec):
    """Opaque sampler ``sampler(rng, count) -> (count, dim)``.

    ``law`` is set for iid coordinates drawn from a frozen scipy.stats
    distribution, which enables analytic moments and moment checks.
    """

    sampler: Sampler
    size: int
    name: str = "custom"
    law: Optional[object] = None
    kind = "custom"

    @classmethod
    def from_scipy(cls, dist, dim: int, name: Optional[str] = None) -> "CustomSpec":
        """iid coordinates from a frozen scipy.stats distribution."""

        def sampler(rng: np.random.Generator, count: int) -> np.ndarray:
            return np.asarray(dist.rvs(size=(count, dim), random_state=rng), dtype=float).reshape(
                count, dim
            )

        return cls(sampler, dim, name or getattr(dist.dist, "name", "scipy"), dist)

    @property
    def dim(self) -> int:
        return self.size

    def draw(self, rng, count):
        out = np.asarray(self.sampler(rng, count), dtype=float)
        if out.ndim == 1 and self.size == 1:
            out = out[:, None]
        if out.shape != (count, self.size):
            raise DimensionMismatchError(self.size, out.shape[-1], "sampler output")
        return out

    def moments(self):
        if self.law is None:
            return None
        mean, var = (float(v) for v in self.law.stats(moments="mv"))
        if not (np.isfinite(mean) and np.isfinite(var)):
            return None
        return np.full(self.size, mean), var * np.eye(self.size)

    def gaussian(self):
        if self.law is not None and getattr(self.law.dist, "name", "") == "norm":
            mean, cov = self.moments()
            return GaussianMeasure(mean, cov)
        return None


SCIPY_LAWS = {
    "norm": stats.norm,
    "uniform": stats.uniform,
    "laplace": stats.laplace,
    "t": stats.t,
    "cauchy": stats.cauchy,
    "expon": stats.expon,
    "logistic": stats.logistic,
}


def distribution_spec(name: str, dim: int, **params) -> CustomSpec:
    """iid coordinates from a named scipy.stats law, e.g. ``("t", 2, df=3)``."""
    if name not in SCIPY_LAWS:
        raise ValidationError(
            f"unknown law {name!r}; expected one of {sorted(SCIPY_LAWS)}", "law", "UNKNOWN_LAW"
        )
    try:
        dist = SCIPY_LAWS[name](**params)
    except TypeError as exc:
        raise ValidationError(str(exc), "params", "BAD_PARAMETERS") from exc
    return CustomSpec.from_scipy(dist, dim, name)


def appendix_mixture_spec(
    p: float,
    factor_1: MeasureSpec,
    factor_2: MeasureSpec,
    a: float = 1.0,
    b: float = 1.0,
) -> MixtureSpec:
    """p (mu_1 x mu_2) + (1 - p) (mu_+ x mu_-) over the pair E1 = {(x, 0)}, E2 = {(a x, b x)}.

    ``factor_1``/``factor_2`` are the laws on E1 and its complement (both in
    R^m); mu_+ and mu_- are the resulting marginals on E2 and its complement.
    """
    ArrayValidator.probability(p, "p")
    if factor_1.dim != factor_2.dim:
        raise DimensionMismatchError(factor_1.dim, factor_2.dim, "factor_2")
    e1, e2 = bernstein_subspaces(factor_1.dim, a, b)
    base = ProductSpec((e1, complement(e1)), (factor_1, factor_2))
    return MixtureSpec(weighted_distribution([e1, e2], [p, 1.0 - p]), base)


def sample(spec: MeasureSpec, count: int, seed: SeedLike = 0) -> np.ndarray:
    """``count`` draws from ``spec`` as a (count, n) array; reproducible given seed."""
    count = ArrayValidator.count(count, "count")
    rng = as_generator(seed, "measures.sample")
    return spec.draw(rng, count)

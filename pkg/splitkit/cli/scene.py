"""Build library objects from a validated scene."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from ..core.error_handler import DimensionMismatchError, ValidationError
from ..core.logger import get_logger
from ..dynamics.collision import CollisionScene
from ..inequalities.suite import SuiteContext
from ..measures.spec import (
    EmpiricalSpec,
    GaussianSpec,
    MeasureSpec,
    MixtureSpec,
    ProductSpec,
    distribution_spec,
)
from ..subspaces.decomposition import IndependentDecomposition, independent_decomposition
from ..subspaces.distribution import SubspaceDistribution, weighted_distribution
from ..subspaces.subspace import random_subspace, subspace_from_columns
from .schemas import (
    DistributionSchema,
    EmpiricalSchema,
    GaussianSchema,
    MixtureSchema,
    ProductSchema,
    SceneSchema,
    load_scene,
    parse_measure,
)

logger = get_logger(__name__)


@dataclass
class Scene:
    """A loaded scene: schema, xi, named measures and where relative paths start."""

    schema: SceneSchema
    xi: SubspaceDistribution
    base_dir: Path
    seed: int
    tol: float
    measures: Dict[str, MeasureSpec] = field(default_factory=dict)
    _decomposition: Optional[IndependentDecomposition] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.schema.ambient_dim

    @property
    def decomposition(self) -> IndependentDecomposition:
        if self._decomposition is None:
            self._decomposition = independent_decomposition(self.xi)
        return self._decomposition

    def measure(self, name: str) -> MeasureSpec:
        if name not in self.measures:
            raise ValidationError(f"unknown measure {name!r}", f"scene.measures.{name}", "UNKNOWN_MEASURE")
        return self.measures[name]

    def collision_scene(self) -> CollisionScene:
        dyn = self.schema.dynamics
        if dyn is None:
            raise ValidationError("scene has no dynamics block", "scene.dynamics", "MISSING_DYNAMICS")
        return CollisionScene(self.xi, self.measure(dyn.bath), self.measure(dyn.initial), dyn.rate)

    def suite_context(self) -> SuiteContext:
        return SuiteContext(self.xi, dict(self.measures), self.inline_measure)

    def inline_measure(self, entry: dict) -> MeasureSpec:
        return self._build(parse_measure(entry), "inline", None)

    def _build(self, m, path: str, dim: Optional[int]) -> MeasureSpec:
        if isinstance(m, GaussianSchema):
            spec = GaussianSpec.of(m.mean, m.cov)
        elif isinstance(m, DistributionSchema):
            spec = distribution_spec(m.law, m.dim, **m.params)
        elif isinstance(m, EmpiricalSchema):
            if m.csv is not None:
                csv = Path(m.csv)
                spec = EmpiricalSpec.from_csv(csv if csv.is_absolute() else self.base_dir / csv)
            else:
                spec = EmpiricalSpec(np.asarray(m.samples, dtype=float))
        elif isinstance(m, MixtureSchema):
            spec = MixtureSpec(self.xi, self._resolve(m.base))
        elif isinstance(m, ProductSchema):
            decomposition = self.decomposition
            blocks = decomposition.blocks
            if len(m.factors) != len(blocks):
                raise ValidationError(
                    f"{path}: {len(m.factors)} factors for {len(blocks)} decomposition blocks",
                    f"{path}.factors",
                    "COUNT_MISMATCH",
                    details={"block_dims": [b.dim for b in blocks]},
                )
            factors = [
                self._build(f, f"{path}.factors.{i}", b.dim) for i, (f, b) in enumerate(zip(m.factors, blocks))
            ]
            spec = ProductSpec.over_decomposition(decomposition, factors)
        else:
            raise ValidationError(f"{path}: unsupported measure", path)
        if dim is not None and spec.dim != dim:
            raise DimensionMismatchError(dim, spec.dim, path)
        return spec

    def _resolve(self, name: str, _visiting: Optional[set] = None) -> MeasureSpec:
        if name in self.measures:
            return self.measures[name]
        visiting = set() if _visiting is None else _visiting
        if name in visiting:
            raise ValidationError(f"measure {name!r} refers to itself", f"scene.measures.{name}", "CYCLE")
        visiting.add(name)
        entry = self.schema.measures[name]
        if isinstance(entry, MixtureSchema):
            self._resolve(entry.base, visiting)
        self.measures[name] = self._build(entry, f"scene.measures.{name}", None)
        return self.measures[name]


def build_xi(schema: SceneSchema, tol: float) -> SubspaceDistribution:
    n = schema.ambient_dim
    if schema.xi.sampler is not None:
        d = schema.xi.sampler.dim
        return SubspaceDistribution.from_sampler(n, lambda rng: random_subspace(n, d, rng, tol))
    atoms = [
        subspace_from_columns(np.asarray(atom.basis, dtype=float).T.reshape(n, -1), tol)
        for atom in schema.xi.atoms
    ]
    return weighted_distribution(atoms, [atom.weight for atom in schema.xi.atoms])


def load(
    path: Union[str, Path],
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> Scene:
    """Read, validate and build a scene; ``seed``/``tol`` override the file."""
    path = Path(path)
    schema = load_scene(path)
    tol = schema.tolerances.rank if tol is None else float(tol)
    scene = Scene(
        schema=schema,
        xi=build_xi(schema, tol),
        base_dir=path.resolve().parent,
        seed=schema.seed if seed is None else int(seed),
        tol=tol,
    )
    for name in schema.measures:
        scene._resolve(name)
    logger.info("scene_loaded", path=str(path), dim=scene.dim, atoms=scene.xi.size, measures=sorted(scene.measures))
    return scene

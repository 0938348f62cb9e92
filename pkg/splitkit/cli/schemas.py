"""Pydantic schemas for scene and manifest files

Scenes and manifests are validated before any computation. Failures are
reported as ValidationError naming the first offending path, e.g.
``scene.measures.bath.cov``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .. import config
from ..core.error_handler import ValidationError

WEIGHT_SUM_TOL = 1e-9


class AtomSchema(BaseModel):
    """One subspace of xi: ``basis`` lists spanning vectors (the columns)."""

    model_config = ConfigDict(extra="forbid")

    basis: List[List[float]] = Field(..., description="spanning vectors, one list per column")
    weight: float = Field(..., gt=0, description="probability of this atom")


class SamplerSchema(BaseModel):
    """A continuous xi: ``haar`` draws Haar-random subspaces of dimension ``dim``."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["haar"]
    dim: int = Field(..., ge=0)


class XiSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    atoms: Optional[List[AtomSchema]] = Field(None, min_length=1)
    sampler: Optional[SamplerSchema] = None

    @field_validator("atoms")
    @classmethod
    def validate_weights(cls, v):
        """Weights must sum to 1"""
        if v is None:
            return v
        total = sum(a.weight for a in v)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"atom weights must sum to 1 (got {total:.12g})")
        return v

    @model_validator(mode="after")
    def validate_source(self):
        """Exactly one of atoms and sampler"""
        if (self.atoms is None) == (self.sampler is None):
            raise ValueError("give exactly one of 'atoms' and 'sampler'")
        return self


class GaussianSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["gaussian"]
    mean: List[float] = Field(..., min_length=1)
    cov: List[List[float]]

    @model_validator(mode="after")
    def validate_shape(self):
        n = len(self.mean)
        if len(self.cov) != n or any(len(row) != n for row in self.cov):
            raise ValueError(f"cov must be {n}x{n} to match mean")
        return self


class ProductSchema(BaseModel):
    """Factors on the blocks of the scene's decomposition (independent blocks, then E_dep)."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["product"]
    factors: List["MeasureSchema"] = Field(..., min_length=1)


class MixtureSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["mixture"]
    base: str = Field(..., min_length=1, description="name of the base measure")


class EmpiricalSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["empirical"]
    csv: Optional[str] = None
    samples: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def validate_source(self):
        """Exactly one of csv and samples"""
        if (self.csv is None) == (self.samples is None):
            raise ValueError("give exactly one of 'csv' and 'samples'")
        return self


class DistributionSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["distribution"]
    law: str = Field(..., min_length=1)
    dim: int = Field(..., ge=1)
    params: Dict[str, float] = Field(default_factory=dict)


MeasureSchema = Annotated[
    Union[GaussianSchema, ProductSchema, MixtureSchema, EmpiricalSchema, DistributionSchema],
    Field(discriminator="kind"),
]
ProductSchema.model_rebuild()

MEASURE_ADAPTER = TypeAdapter(MeasureSchema)


class DynamicsSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bath: str = "bath"
    initial: str = "initial"
    rate: float = Field(1.0, gt=0)
    t_end: float = Field(1.0, gt=0)
    n_paths: int = Field(1000, ge=1)
    times: Optional[List[float]] = None

    @field_validator("times")
    @classmethod
    def validate_times(cls, v):
        """Query times must be nonnegative"""
        if v is not None and any(t < 0 for t in v):
            raise ValueError("query times must be nonnegative")
        return v


class TolerancesSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rank: float = Field(config.RANK_TOL, gt=0)
    level: float = Field(config.DEFAULT_LEVEL, gt=0, lt=1)
    sigmas: float = Field(config.DEFAULT_SIGMAS, gt=0)


class CheckSchema(BaseModel):
    """One manifest entry; parameters beyond ``check`` and ``name`` are check specific."""

    model_config = ConfigDict(extra="allow")

    check: Literal[
        "linearized_bl",
        "bl_split",
        "efron_stein",
        "dks",
        "madiman_barron",
        "jensen_improvement",
        "poincare",
        "tail_ratio",
    ]
    name: Optional[str] = None


class ManifestSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    checks: List[CheckSchema] = Field(..., min_length=1)


class SceneSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ambient_dim: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    xi: XiSchema
    measures: Dict[str, MeasureSchema] = Field(default_factory=dict)
    dynamics: Optional[DynamicsSchema] = None
    suite: Optional[List[CheckSchema]] = None
    tolerances: TolerancesSchema = Field(default_factory=TolerancesSchema)

    def _check_ambient(self, name: str, where: str) -> None:
        m = self.measures[name]
        n = self.ambient_dim
        if isinstance(m, GaussianSchema) and len(m.mean) != n:
            raise ValueError(f"{where}: measures.{name}.mean has length {len(m.mean)}, expected {n}")
        if isinstance(m, DistributionSchema) and m.dim != n:
            raise ValueError(f"{where}: measures.{name}.dim is {m.dim}, expected {n}")

    @model_validator(mode="after")
    def validate_references(self):
        """Every referenced measure exists; measures on R^n have dimension ambient_dim.

        Other named measures may be lower dimensional, e.g. the 1-d
        component laws of coordinate-wise checks.
        """
        n = self.ambient_dim
        if self.xi.sampler is not None and self.xi.sampler.dim > n:
            raise ValueError(f"xi.sampler.dim is {self.xi.sampler.dim}, expected at most {n}")
        for i, atom in enumerate(self.xi.atoms or ()):
            for j, col in enumerate(atom.basis):
                if len(col) != n:
                    raise ValueError(f"xi.atoms[{i}].basis[{j}] has length {len(col)}, expected {n}")
        for name, m in self.measures.items():
            if isinstance(m, MixtureSchema):
                if m.base not in self.measures:
                    raise ValueError(f"measures.{name}.base refers to unknown measure {m.base!r}")
                self._check_ambient(m.base, f"measures.{name}.base")
        if self.dynamics is not None:
            for role in ("bath", "initial"):
                ref = getattr(self.dynamics, role)
                if ref not in self.measures:
                    raise ValueError(f"dynamics.{role} refers to unknown measure {ref!r}")
                self._check_ambient(ref, f"dynamics.{role}")
        return self


def _first_error(exc: PydanticValidationError, root: str) -> ValidationError:
    err = exc.errors()[0]
    path = ".".join(str(p) for p in (root, *err.get("loc", ())))
    return ValidationError(
        f"{path}: {err.get('msg', 'invalid value')}",
        path,
        "SCHEMA_ERROR",
        details={"errors": [{"loc": list(e.get("loc", ())), "msg": e.get("msg")} for e in exc.errors()]},
    )


def _read_json(path: Union[str, Path], root: str) -> Any:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{root} file not found: {path}", root, "FILE_NOT_FOUND")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{root} is not valid JSON: {exc}", root, "INVALID_JSON") from exc


def parse_scene(data: Any) -> SceneSchema:
    try:
        return SceneSchema.model_validate(data)
    except PydanticValidationError as exc:
        raise _first_error(exc, "scene") from exc


def load_scene(path: Union[str, Path]) -> SceneSchema:
    return parse_scene(_read_json(path, "scene"))


def parse_manifest(data: Any) -> List[dict]:
    """A manifest is ``{"checks": [...]}`` or a bare list of entries."""
    if isinstance(data, list):
        data = {"checks": data}
    try:
        manifest = ManifestSchema.model_validate(data)
    except PydanticValidationError as exc:
        raise _first_error(exc, "manifest") from exc
    return [c.model_dump(exclude_none=True) for c in manifest.checks]


def load_manifest(path: Union[str, Path]) -> List[dict]:
    return parse_manifest(_read_json(path, "manifest"))


def parse_measure(data: Any, root: str = "measure"):
    try:
        return MEASURE_ADAPTER.validate_python(data)
    except PydanticValidationError as exc:
        raise _first_error(exc, root) from exc

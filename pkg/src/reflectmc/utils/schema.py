"""
.. codeauthor::
    reflectmc authors

Pydantic models of the `recipe`. Unknown keys are rejected everywhere.

.. _reflectmc.recipe:
.. autopydantic_model:: reflectmc.utils.schema.Recipe

"""

from typing import Annotated, Any, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveInt,
    model_validator,
)

from reflectmc.core.oracle import ORACLE_LIMIT
from reflectmc.core.samplers import ChainSettings


class GraphSpec(BaseModel):
    """
    Graph of the model.

    ``path``, ``cycle``, ``complete`` and ``tree`` need ``n``; ``grid`` needs ``width``
    and ``height``; ``edges`` needs ``n`` and ``edges``; ``file`` needs ``path`` to an
    edge list, whose ``n`` and ``boundary`` override the file. The ``boundary`` of a
    ``grid`` defaults to ``"frame"``, of a ``file`` to its ``boundary:`` line, of all
    other kinds to no vertices.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["path", "cycle", "grid", "complete", "tree", "file", "edges"]
    n: Optional[PositiveInt] = None
    width: Optional[PositiveInt] = None
    height: Optional[PositiveInt] = None
    seed: NonNegativeInt = 0
    path: Optional[str] = None
    edges: Optional[list[tuple[NonNegativeInt, NonNegativeInt]]] = None
    boundary: Optional[Union[Literal["frame", "none"], list[NonNegativeInt]]] = None

    @model_validator(mode="after")
    def check_kind(self):
        needs = {
            "path": ["n"],
            "cycle": ["n"],
            "complete": ["n"],
            "tree": ["n"],
            "grid": ["width", "height"],
            "edges": ["n", "edges"],
            "file": ["path"],
        }
        missing = [k for k in needs[self.kind] if getattr(self, k) is None]
        if missing:
            raise ValueError(f"Graph of kind '{self.kind}' needs {missing}.")
        if isinstance(self.boundary, str) and self.kind != "grid":
            raise ValueError(f"Boundary '{self.boundary}' is only valid for grids.")
        return self


class PotentialSpec(BaseModel):
    """A built-in potential by ``name``, or a two-column ``table`` CSV of x and U(x)."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    table: Optional[str] = None

    @model_validator(mode="after")
    def check_one(self):
        if (self.name is None) == (self.table is None):
            raise ValueError("Potential needs exactly one of 'name' and 'table'.")
        return self


class PottsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["potts"]
    graph: GraphSpec
    q: int
    beta: float
    boundary_label: NonNegativeInt = 0


class DiscreteSpec(BaseModel):
    """Generic finite-state model with a shared interaction matrix."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["discrete"]
    graph: GraphSpec
    weights: list[list[float]]
    site_weights: Optional[Union[list[float], list[list[float]]]] = None
    boundary_label: NonNegativeInt = 0


class SurfaceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["surface"]
    graph: GraphSpec
    potential: PotentialSpec
    boundary_height: float = 0.0


class SpinSpec(BaseModel):
    """Spin :math:`O(n)` model with :math:`U(r) = -\\beta r`."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["spin"]
    graph: GraphSpec
    n: int
    beta: float


Factor = Annotated[
    Union[PottsSpec, DiscreteSpec, SurfaceSpec, SpinSpec],
    Field(discriminator="family"),
]


class ProductSpec(BaseModel):
    """Two copies; the graph of ``first`` is used for both."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["product"]
    first: Factor
    second: Factor


class MarkovSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["markov"]
    transition: list[list[float]]
    stationary: list[float]
    initial: list[float]
    n_steps: NonNegativeInt


ModelSpecs = Annotated[
    Union[PottsSpec, DiscreteSpec, SurfaceSpec, SpinSpec, ProductSpec, MarkovSpec],
    Field(discriminator="family"),
]


class SamplerSpec(ChainSettings):
    """:class:`~reflectmc.core.samplers.ChainSettings` and the number of replicas."""

    replicas: PositiveInt = 1

    def settings(self) -> ChainSettings:
        return ChainSettings(**self.model_dump(exclude={"replicas"}))


class SuiteStep(BaseModel):
    """
    A check from :mod:`reflectmc.verify` and its keyword arguments.

    A step may run on its own ``model``, and may override single ``sampler`` keys of
    the `recipe`; the ``label`` then prefixes the names of its verdicts.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    with_: str = Field(alias="with")
    using: dict[str, Any] = Field(default_factory=dict)
    label: Optional[str] = None
    model: Optional[ModelSpecs] = None
    sampler: dict[str, Any] = Field(default_factory=dict)


class ReflectionSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    involution: list[NonNegativeInt]


class EnumerateSpec(BaseModel):
    """Exact law dumps of discrete models; the joint table needs a ``reflection``."""

    model_config = ConfigDict(extra="forbid")

    reflection: Optional[ReflectionSpec] = None
    limit: PositiveInt = ORACLE_LIMIT


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "."
    samples: bool = False


class Recipe(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str = "1.0"
    model: ModelSpecs
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    suites: list[SuiteStep] = Field(default_factory=list)
    enumerate: Optional[EnumerateSpec] = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def check_step_samplers(self):
        for step in self.suites:
            self.step_sampler(step)
        return self

    def step_sampler(self, step: SuiteStep) -> SamplerSpec:
        """The ``sampler`` of the recipe, updated by the overrides of ``step``."""
        if not step.sampler:
            return self.sampler
        return SamplerSpec(**{**self.sampler.model_dump(), **step.sampler})

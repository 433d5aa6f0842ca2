"""Pydantic models for configuration validation."""

import math
from typing import Dict, List, Optional, Any, Literal, Tuple, Union
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.constants import GRID_FACTOR, GRID_OFFSET, RANK_REL_TOL, DEFAULT_MONITOR_CADENCE

NeuronRef = Tuple[int, int]


class NetworkSection(BaseModel):
    """Network architecture."""
    model_config = ConfigDict(extra="forbid")

    input_dim: int = Field(ge=1)
    hidden_sizes: List[int] = Field(default_factory=list)
    activation: Literal["relu", "tanh", "sigmoid", "cosine"] = "tanh"

    @model_validator(mode="after")
    def _positive_widths(self) -> "NetworkSection":
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        return self


class DataSection(BaseModel):
    """Synthetic dataset recipe."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["planted_fourier", "random_labels"] = "planted_fourier"
    T: int = Field(ge=1)
    label_seed: int = Field(default=0, ge=0)
    coeff_bandwidth: int = Field(default=1, ge=0)


class CanonicalSection(BaseModel):
    """Truncation set and quadrature grid."""
    model_config = ConfigDict(extra="forbid")

    per_dim_limits: List[int]
    grid_points_per_dim: Optional[List[int]] = None

    @model_validator(mode="after")
    def _fill_grid(self) -> "CanonicalSection":
        if any(n < 0 for n in self.per_dim_limits):
            raise ValueError(f"per_dim_limits must be non-negative, got {self.per_dim_limits}")
        if self.grid_points_per_dim is None:
            self.grid_points_per_dim = [GRID_FACTOR * n + GRID_OFFSET for n in self.per_dim_limits]
        return self

    @property
    def cardinality(self) -> int:
        return math.prod(2 * n + 1 for n in self.per_dim_limits)


class TrainSection(BaseModel):
    """SGD schedule. lr0 = 0 is allowed and performs null updates."""
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(ge=1)
    minibatch: int = Field(ge=1)
    lr0: float = Field(ge=0.0)
    decay: float = Field(default=0.0, ge=0.0)


class MonitorSection(BaseModel):
    """Rank monitoring along the SGD run."""
    model_config = ConfigDict(extra="forbid")

    cadence: int = Field(default=DEFAULT_MONITOR_CADENCE, ge=1)
    rank_rel_tol: float = Field(default=RANK_REL_TOL, gt=0.0, lt=1.0)
    grad_tol: float = Field(default=1e-3, gt=0.0)
    track_degeneracy: bool = True


class InitSection(BaseModel):
    """Random initialization scheme."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["uniform_fan_in", "center_cutting"] = "uniform_fan_in"
    scale: float = Field(default=1.0, gt=0.0)
    center_offset: float = Field(default=0.1, ge=0.0)


class DuplicateSpec(BaseModel):
    """Copy ``src``'s incoming and outgoing weights onto ``dst``."""
    model_config = ConfigDict(extra="forbid")

    src: NeuronRef
    dst: NeuronRef


class DegeneracySection(BaseModel):
    """Degeneracies injected after initialization."""
    model_config = ConfigDict(extra="forbid")

    kill: Union[Literal["all"], List[NeuronRef]] = Field(default_factory=list)
    duplicate: Optional[DuplicateSpec] = None

    @property
    def is_empty(self) -> bool:
        return not self.kill and self.duplicate is None


class ExperimentConfig(BaseModel):
    """Complete experiment configuration."""
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    seed: int = Field(ge=0)
    network: NetworkSection
    data: DataSection
    canonical: CanonicalSection
    train: TrainSection
    monitor: MonitorSection = Field(default_factory=MonitorSection)
    init: InitSection = Field(default_factory=InitSection)
    degeneracy: DegeneracySection = Field(default_factory=DegeneracySection)
    output_dir: str = "runs/experiment"

    @model_validator(mode="after")
    def _check_invariants(self) -> "ExperimentConfig":
        K = self.network.input_dim
        limits = self.canonical.per_dim_limits
        grid = self.canonical.grid_points_per_dim
        if len(limits) != K:
            raise ValueError(
                f"canonical.per_dim_limits has {len(limits)} entries but input_dim is {K}"
            )
        if len(grid) != K:
            raise ValueError(
                f"canonical.grid_points_per_dim has {len(grid)} entries but input_dim is {K}"
            )
        for j, (n_j, g_j) in enumerate(zip(limits, grid)):
            if g_j < 2 * n_j + 2:
                raise ValueError(
                    f"Nyquist constraint violated in dimension {j}: "
                    f"grid {g_j} < 2*{n_j}+2"
                )
        N = self.canonical.cardinality
        if N < self.data.T:
            raise ValueError(f"N = {N} < T = {self.data.T}: the index set cannot fit the data")
        if self.train.minibatch > self.data.T:
            raise ValueError(
                f"train.minibatch = {self.train.minibatch} exceeds T = {self.data.T}"
            )
        return self


class GeneratorInfo(BaseModel):
    """Generator identification."""
    kind: str
    name: str
    description: Optional[str] = None


class GeneratorConfig(BaseModel):
    """Generator configuration loaded from datasets/<kind>/config.yaml."""
    generator: GeneratorInfo
    parameters: Dict[str, Any] = Field(default_factory=dict)


class DatasetRegistryEntry(BaseModel):
    """Dataset generator registry entry."""
    name: str
    enabled: bool = True
    config_path: str
    generator_class: str


class DatasetRegistry(BaseModel):
    """Dataset generator registry."""
    datasets: Dict[str, DatasetRegistryEntry]

    def get_enabled_datasets(self) -> Dict[str, DatasetRegistryEntry]:
        """Get only enabled generators."""
        return {
            key: dataset
            for key, dataset in self.datasets.items()
            if dataset.enabled
        }

    def get_dataset(self, kind: str) -> Optional[DatasetRegistryEntry]:
        """Get a specific generator by kind."""
        return self.datasets.get(kind)


class AppConfig(BaseModel):
    """Application configuration model."""
    log_level: str = "INFO"
    log_file: Optional[str] = "logs/canonlab.log"
    output_dir: str = "runs"
    workers: int = Field(default=1, ge=1)
    export_parquet: bool = False

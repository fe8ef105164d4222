"""Pydantic request/response models for the compute service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class PotentialSpec(BaseModel):
    """JSON description of a potential, mirrored by `potentials.from_config`."""

    kind: Literal["w0", "scaled", "ripple", "registry"] = "w0"
    a: list[float] = Field(default=[0.0, 1.0], min_length=2, max_length=2)
    factor: Optional[float] = None  # for kind = scaled
    sigma: Optional[float] = None   # for kind = ripple
    seed: Optional[int] = None      # for kind = ripple
    name: Optional[str] = None      # for kind = registry
    softness: float = 0.0

    def to_config(self) -> dict:
        return self.model_dump(exclude_none=True)


class PotentialCheckRequest(BaseModel):
    potential: PotentialSpec = PotentialSpec()
    alpha: float = 0.25
    seed: int = 0


class PotentialCheckResponse(BaseModel):
    growth: dict
    inverse_quadratic: dict
    perturbation: dict


class GeodesicRequest(BaseModel):
    potential: PotentialSpec = PotentialSpec()
    n_points: int = Field(default=201, ge=3)
    refine: bool = True
    include_curve: bool = False


class GeodesicResponse(BaseModel):
    distance: float
    diagnostics: dict
    curve_csv: Optional[str] = None


class Profile1DRequest(BaseModel):
    potential: PotentialSpec = PotentialSpec()
    half_len: float = Field(default=6.0, ge=1.0)
    n_points: int = Field(default=600, ge=64)
    include_profile: bool = False


class Profile1DResponse(BaseModel):
    K: float
    potential_part: float
    derivative_part: float
    equipartition_ratio: float
    n_iter: int
    profile_csv: Optional[str] = None


class Cell2DRequest(BaseModel):
    potential: PotentialSpec = PotentialSpec()
    grid: int = Field(default=64, ge=32)
    include_field: bool = False


class Cell2DResponse(BaseModel):
    energy: float
    scale_L: float
    e_w: float
    e_h: float
    n_iter: int
    field_csv: Optional[str] = None


class GlueRequest(BaseModel):
    potential: PotentialSpec = PotentialSpec()
    construction: Literal["translate", "midpoint", "combined", "recovery"]
    params: dict = Field(default_factory=dict)
    seed: int = 0


class GlueResponse(BaseModel):
    construction: str
    report: dict


class VerifyRequest(BaseModel):
    potential: PotentialSpec = PotentialSpec()
    grid: int = Field(default=64, ge=32)
    n_geo: int = Field(default=201, ge=3)
    skip_cell: bool = False


class VerifyResponse(BaseModel):
    report: dict
    verdict: str


class SweepRequest(BaseModel):
    config: dict = Field(default_factory=dict)
    seed: int = 0


class SweepResponse(BaseModel):
    manifest: dict
    files: dict[str, str]


class ErrorBody(BaseModel):
    error: str
    message: str

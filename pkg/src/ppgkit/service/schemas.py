"""Request/response models for the editing service.

Probabilities travel as JSON numbers rounded to 9 significant digits, which
round-trips the float32 storage grid exactly; the binary endpoint serves
exact bytes. Distances are never rounded.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field


class RunModel(BaseModel):
    phoneme: str
    start: int
    length: int


class DocumentSummary(BaseModel):
    num_frames: int
    num_phonemes: int
    hop_seconds: float
    runs: list[RunModel]


class CreateDocumentResponse(BaseModel):
    id: str
    version: int
    summary: DocumentSummary


class DocumentInfo(BaseModel):
    id: str
    version: int
    label: str
    num_frames: int
    num_phonemes: int
    hop_seconds: float


class DocumentView(BaseModel):
    id: str
    version: int
    label: str
    hop_seconds: float
    phonemes: list[str]
    frames: list[list[float]]
    active_rows: list[int]


class RulesOperation(BaseModel):
    type: Literal["rules"]
    rules: str


class SetRegionOperation(BaseModel):
    type: Literal["set_region"]
    start: int
    end: int
    target: list[float]


class InterpolateOperation(BaseModel):
    type: Literal["interpolate"]
    other_id: str
    t: float = Field(ge=0.0, le=1.0)
    start: Optional[int] = None
    end: Optional[int] = None


Operation = Annotated[
    Union[RulesOperation, SetRegionOperation, InterpolateOperation],
    Field(discriminator="type"),
]


class EditRequest(BaseModel):
    base_version: int
    operation: Operation


class SubstitutionModel(BaseModel):
    from_phoneme: str
    to_phoneme: str
    frame_start: int
    frame_end: int


class RuleMatchModel(BaseModel):
    rule_index: int
    rule: str
    run_span: list[int]
    frame_span: list[int]
    substitutions: list[SubstitutionModel]


class EditReportModel(BaseModel):
    matches: list[RuleMatchModel]


class DistanceModel(BaseModel):
    mean: float
    curve: list[float]


class EditResponse(BaseModel):
    id: str
    version: int
    edit_report: Optional[EditReportModel]
    framewise_distance_to_previous: DistanceModel


class DistanceRequest(BaseModel):
    id_a: str
    id_b: str
    gamma: Optional[float] = None

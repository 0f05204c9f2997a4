"""
JSON documents read and written by the command-line frontend

Key features:
- PolygonSpecFile: polygon input, as vertices or as lengths with angles
  (angles_pi accepts exact rational strings such as "1/2")
- TrigPolyModel / CandidateSetModel: command outputs
- RunReport: per-run record with the input digest, tolerances and verdicts

Integers and rational strings are exact; JSON floats are not.
"""

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.geometry.polygon import (
    DEFAULT_TOL,
    BoundaryData,
    ConvexPolygon,
    PartialBoundaryData,
    extract_boundary_data,
)
from src.geometry.reconstruction import OneParamFamily
from src.inverse.candidates import CandidateSet
from src.spectral.char_poly import TrigPoly
from src.utils.errors import PolygonDataError

Scalar = int | float | str


def _is_exact_scalar(value: Any) -> bool:
    return isinstance(value, (int, str)) and not isinstance(value, bool)


def _to_fraction(value: Scalar) -> Fraction:
    return Fraction(value)


def render_number(value) -> Scalar:
    """int for integral exact values, "p/q" for other fractions, float otherwise."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return float(value)


def _check_scalars(values: list | None, allow_null: bool = False) -> list | None:
    if values is None:
        return None
    for j, value in enumerate(values):
        if value is None:
            if not allow_null:
                raise ValueError(f"entry {j} is null")
            continue
        if isinstance(value, str):
            try:
                Fraction(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"entry {j}: {value!r} is not a rational number") from exc
        elif isinstance(value, float) and not math.isfinite(value):
            raise ValueError(f"entry {j} is not finite")
    return values


class PolygonSpecFile(BaseModel):
    """Polygon input file"""
    name: str | None = Field(default=None, description="optional label carried into reports")
    vertices: list[tuple[float, float]] | None = Field(default=None, description="vertex coordinates, either orientation")
    lengths: list[Scalar] | None = Field(default=None, description="cyclic edge lengths, edge i from vertex i-1 to vertex i")
    angles_pi: list[Scalar | None] | None = Field(default=None, description="interior angles divided by pi; null marks a blank")
    angles: list[float | None] | None = Field(default=None, description="interior angles in radians; null marks a blank")

    @field_validator("lengths")
    @classmethod
    def _lengths_are_numbers(cls, values):
        return _check_scalars(values)

    @field_validator("angles_pi")
    @classmethod
    def _angles_are_numbers(cls, values):
        return _check_scalars(values, allow_null=True)

    @model_validator(mode="after")
    def _one_representation(self):
        if self.vertices is not None:
            if self.lengths is not None or self.angles_pi is not None or self.angles is not None:
                raise ValueError("give either vertices or lengths with angles, not both")
            return self
        if self.lengths is None:
            raise ValueError("missing vertices or lengths")
        if (self.angles_pi is None) == (self.angles is None):
            raise ValueError("lengths need exactly one of angles_pi or angles")
        angles = self.angles_pi if self.angles_pi is not None else self.angles
        if len(angles) != len(self.lengths):
            raise ValueError(f"{len(self.lengths)} lengths but {len(angles)} angles")
        return self

    @property
    def angle_entries(self) -> list:
        return self.angles_pi if self.angles_pi is not None else self.angles

    @property
    def has_blanks(self) -> bool:
        return self.vertices is None and any(a is None for a in self.angle_entries)

    def angle_radians(self) -> list[float | None]:
        if self.angles_pi is not None:
            return [None if q is None else float(_to_fraction(q)) * math.pi for q in self.angles_pi]
        return list(self.angles)

    def to_boundary_data(self, tol: float = DEFAULT_TOL) -> BoundaryData:
        """
        Validated boundary data. Exact lengths (and exact angles, for angles_pi)
        are attached when every entry is an integer or a rational string.

        Raises:
            PolygonDataError: blank angles or data that realizes no convex polygon
        """
        if self.vertices is not None:
            return extract_boundary_data(ConvexPolygon.from_points(self.vertices, tol)).validate(tol)
        if self.has_blanks:
            raise PolygonDataError("angle vector has blanks; use the reconstruct command")

        exact_lengths = None
        if all(_is_exact_scalar(v) for v in self.lengths):
            exact_lengths = tuple(_to_fraction(v) for v in self.lengths)
        exact_angles = None
        if self.angles_pi is not None and all(_is_exact_scalar(q) for q in self.angles_pi):
            exact_angles = tuple(_to_fraction(q) for q in self.angles_pi)

        data = BoundaryData(
            lengths=tuple(float(_to_fraction(v)) for v in self.lengths),
            angles=tuple(self.angle_radians()),
            exact_lengths=exact_lengths,
            exact_angles_pi=exact_angles,
        )
        return data.validate(tol)

    def to_partial(self) -> PartialBoundaryData:
        if self.vertices is not None:
            raise PolygonDataError("reconstruct needs lengths and angles with blanks, not vertices")
        return PartialBoundaryData(tuple(float(_to_fraction(v)) for v in self.lengths), tuple(self.angle_radians()))

    @classmethod
    def from_boundary_data(cls, data: BoundaryData, name: str | None = None) -> "PolygonSpecFile":
        lengths = data.exact_lengths if data.exact_lengths is not None else data.lengths
        if data.exact_angles_pi is not None:
            angles_pi = [render_number(q) for q in data.exact_angles_pi]
        else:
            angles_pi = [a / math.pi for a in data.angles]
        return cls(name=name, lengths=[render_number(v) for v in lengths], angles_pi=angles_pi)


def _diagnostic(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item.get("loc", ())) or "<document>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def parse_spec(raw: bytes | str) -> PolygonSpecFile:
    """
    Raises:
        PolygonDataError: malformed JSON or a schema violation, with the location path
    """
    try:
        return PolygonSpecFile.model_validate_json(raw)
    except ValidationError as exc:
        raise PolygonDataError(f"invalid polygon spec: {_diagnostic(exc)}") from exc


def load_spec(path: str | Path) -> tuple[PolygonSpecFile, str]:
    """Spec file plus the SHA-256 of its bytes."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise PolygonDataError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_spec(raw), hashlib.sha256(raw).hexdigest()


class TrigPolyModel(BaseModel):
    """Canonicalized characteristic polynomial"""
    terms: list[tuple[Scalar, Scalar]] = Field(description="(frequency, coefficient) pairs by ascending frequency")
    constant: Scalar = Field(description="constant term")

    @classmethod
    def from_trigpoly(cls, p: TrigPoly) -> "TrigPolyModel":
        return cls(
            terms=[(render_number(f), render_number(a)) for f, a in p.terms],
            constant=render_number(p.constant),
        )

    def to_trigpoly(self) -> TrigPoly:
        def parse(value: Scalar):
            return value if isinstance(value, float) else _to_fraction(value)
        return TrigPoly(tuple((parse(f), parse(a)) for f, a in self.terms), parse(self.constant))


class FamilyModel(BaseModel):
    """One-parameter isospectral deformation"""
    base: PolygonSpecFile = Field(description="family member at x = 0")
    m: int = Field(description="index of the second odd vertex pair")
    ratio: float = Field(description="y = ratio * x")
    x_lo: float = Field(description="open interval lower end")
    x_hi: float = Field(description="open interval upper end")

    @classmethod
    def from_family(cls, family: OneParamFamily) -> "FamilyModel":
        return cls(
            base=PolygonSpecFile.from_boundary_data(family.base),
            m=family.m,
            ratio=family.ratio,
            x_lo=family.x_lo,
            x_hi=family.x_hi,
        )


class CandidateSetModel(BaseModel):
    """Enumeration output"""
    verdict: str = Field(description="finite, continuum or indeterminate")
    cap: int | None = Field(default=None, description="theorem cap on the candidate count, when one applies")
    count: int = Field(description="number of candidates")
    candidates: list[PolygonSpecFile] = Field(default_factory=list, description="mutually non-congruent polygons")
    family: FamilyModel | None = Field(default=None, description="deformation family for a continuum verdict")
    notes: list[str] = Field(default_factory=list)
    configurations_checked: int = 0

    @classmethod
    def from_candidate_set(cls, result: CandidateSet) -> "CandidateSetModel":
        return cls(
            verdict=result.verdict,
            cap=result.cap,
            count=len(result),
            candidates=[PolygonSpecFile.from_boundary_data(c) for c in result.candidates],
            family=None if result.family is None else FamilyModel.from_family(result.family),
            notes=list(result.notes),
            configurations_checked=result.configurations_checked,
        )


class RunReport(BaseModel):
    """What a command read, what it wrote and what it decided"""
    command: str = Field(description="subcommand name")
    input_file: str | None = Field(default=None, description="spec file path as given")
    input_sha256: str | None = Field(default=None, description="digest of the input bytes")
    flags: dict[str, Any] = Field(default_factory=dict, description="effective command-line flags")
    tolerances: dict[str, float] = Field(default_factory=dict, description="tolerance set in force")
    outputs: list[str] = Field(default_factory=list, description="files written")
    verdicts: dict[str, Any] = Field(default_factory=dict, description="decisions reached")
    exit_code: int = 0


def dump_json(document: BaseModel | dict) -> str:
    """Stable JSON text; floats go through repr."""
    payload = document.model_dump(mode="python") if isinstance(document, BaseModel) else document
    return json.dumps(payload, indent=2, ensure_ascii=False, default=render_number) + "\n"

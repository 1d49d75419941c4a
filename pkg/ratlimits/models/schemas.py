"""
Pydantic Input Models

File formats read by the command line: points, Möbius matrices, maps,
measures (JSON and CSV) and families. Each model converts to the core type
with ``to_core()``; validation errors become SchemaError in ``load_model``.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ratlimits.core.exact import gaussian_parts
from ratlimits.core.measures import AtomicMeasure
from ratlimits.core.moebius import MoebiusMap
from ratlimits.core.ratmap import ProjectiveRatMap
from ratlimits.core.rescaling import FamilySpec, geometric_schedule
from ratlimits.core.sphere import SpherePoint
from ratlimits.errors import SchemaError

Scalar = Union[float, int, str]

M = TypeVar("M", bound=BaseModel)


class ComplexValue(BaseModel):
    """{re, im}; strings "p/q" keep rationals exact."""

    model_config = ConfigDict(extra="forbid")

    re: Scalar = 0
    im: Scalar = 0

    def to_complex(self) -> complex:
        return complex(_real(self.re), _real(self.im))

    def to_pair(self) -> tuple:
        return (self.re, self.im)

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexValue":
        return cls(re=float(value.real), im=float(value.imag))


def _real(x: Scalar) -> float:
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/")
            return float(p) / float(q)
        return float(s)
    return float(x)


class PointModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: Optional[float] = None
    im: Optional[float] = None
    infinity: bool = False

    @model_validator(mode="after")
    def _finite_or_infinite(self) -> "PointModel":
        if self.infinity and (self.re is not None or self.im is not None):
            raise ValueError("a point is either finite {re, im} or {infinity: true}")
        if not self.infinity and self.re is None:
            raise ValueError("finite points need re")
        return self

    def to_core(self) -> SpherePoint:
        if self.infinity:
            return SpherePoint.infinity()
        return SpherePoint.from_complex(complex(self.re or 0.0, self.im or 0.0))

    @classmethod
    def from_point(cls, p: SpherePoint) -> "PointModel":
        if p.is_infinity:
            return cls(infinity=True)
        z = p.to_complex()
        return cls(re=float(z.real), im=float(z.imag))


class MatrixModel(BaseModel):
    """2×2 array of {re, im}."""

    model_config = ConfigDict(extra="forbid")

    matrix: List[List[ComplexValue]] = Field(..., min_length=2, max_length=2)

    @model_validator(mode="after")
    def _square(self) -> "MatrixModel":
        if any(len(row) != 2 for row in self.matrix):
            raise ValueError("matrix rows need two entries")
        return self

    def to_core(self) -> MoebiusMap:
        return MoebiusMap.from_matrix(np.array([[c.to_complex() for c in row] for row in self.matrix]))

    @classmethod
    def from_moebius(cls, a: MoebiusMap) -> "MatrixModel":
        return cls(matrix=[[ComplexValue.from_complex(x) for x in row] for row in a.matrix])


class MapModel(BaseModel):
    """Coefficients a_i, b_i of z^i w^(d-i), i = 0..d."""

    model_config = ConfigDict(extra="forbid")

    degree: int = Field(..., ge=0)
    numerator: List[ComplexValue]
    denominator: List[ComplexValue]
    backend: Literal["float", "exact"] = "float"

    @model_validator(mode="after")
    def _lengths(self) -> "MapModel":
        d = self.degree
        if len(self.numerator) != d + 1 or len(self.denominator) != d + 1:
            raise ValueError(f"a degree {d} map needs {d + 1} coefficients per form")
        return self

    def to_core(self) -> ProjectiveRatMap:
        if self.backend == "exact":
            return ProjectiveRatMap.from_lists(
                [c.to_pair() for c in self.numerator], [c.to_pair() for c in self.denominator], "exact"
            )
        return ProjectiveRatMap(
            self.degree, [c.to_complex() for c in self.numerator], [c.to_complex() for c in self.denominator]
        )

    @classmethod
    def from_map(cls, f: ProjectiveRatMap) -> "MapModel":
        if f.backend == "exact":
            def conv(c):
                re, im = gaussian_parts(c)
                return ComplexValue(re=str(re), im=str(im))

            return cls(degree=f.degree, numerator=[conv(c) for c in f.numerator],
                       denominator=[conv(c) for c in f.denominator], backend="exact")
        return cls(
            degree=f.degree,
            numerator=[ComplexValue.from_complex(c) for c in f.num_f],
            denominator=[ComplexValue.from_complex(c) for c in f.den_f],
        )


class AtomModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: float = 0.0
    im: float = 0.0
    infinity: bool = False
    weight: float = Field(..., gt=0)

    def point(self) -> SpherePoint:
        return SpherePoint.infinity() if self.infinity else SpherePoint.from_complex(complex(self.re, self.im))


class MeasureModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    atoms: List[AtomModel] = Field(..., min_length=1)

    def to_core(self) -> AtomicMeasure:
        return AtomicMeasure.from_points([a.point() for a in self.atoms], [a.weight for a in self.atoms])

    @classmethod
    def from_measure(cls, mu: AtomicMeasure) -> "MeasureModel":
        atoms = []
        for p, w in zip(mu.points(), mu.weights):
            if p.is_infinity:
                atoms.append(AtomModel(infinity=True, weight=float(w)))
            else:
                z = p.to_complex()
                atoms.append(AtomModel(re=float(z.real), im=float(z.imag), weight=float(w)))
        return cls(atoms=atoms)


# --- measure CSV: re, im, infinity, weight ---

CSV_COLUMNS = ("re", "im", "infinity", "weight")


def measure_from_csv(text: str) -> AtomicMeasure:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
        raise SchemaError("measure CSV needs the header re,im,infinity,weight", header=reader.fieldnames)
    try:
        atoms = [
            AtomModel(re=float(row["re"]), im=float(row["im"]), infinity=row["infinity"].strip() == "1",
                      weight=float(row["weight"]))
            for row in reader
        ]
        return MeasureModel(atoms=atoms).to_core()
    except (ValueError, ValidationError) as e:
        raise SchemaError("invalid measure CSV row", reason=str(e)) from e


def measure_to_csv(mu: AtomicMeasure) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p, w in zip(mu.points(), mu.weights):
        if p.is_infinity:
            writer.writerow(["0", "0", "1", repr(float(w))])
        else:
            z = p.to_complex()
            writer.writerow([repr(float(z.real)), repr(float(z.imag)), "0", repr(float(w))])
    return buf.getvalue()


# --- families ---

class TPolynomial(BaseModel):
    """Σ num_j t^j / Σ den_j t^j."""

    model_config = ConfigDict(extra="forbid")

    num: List[Union[Scalar, ComplexValue]] = Field(default_factory=lambda: [0])
    den: List[Union[Scalar, ComplexValue]] = Field(default_factory=lambda: [1])

    def to_core(self) -> dict:
        return {"num": [_coeff(c) for c in self.num], "den": [_coeff(c) for c in self.den]}


def _coeff(c: Union[Scalar, ComplexValue]) -> Any:
    return c.to_pair() if isinstance(c, ComplexValue) else c


class GeometricSchedule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["geometric"]
    start: Scalar
    ratio: Scalar
    count: int = Field(..., ge=3)

    def values(self) -> tuple:
        return geometric_schedule(self.start, self.ratio, self.count)


class ExplicitSchedule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["explicit"]
    values_: List[Scalar] = Field(..., alias="values", min_length=3)

    def values(self) -> tuple:
        return tuple(self.values_)


class FamilyModel(BaseModel):
    """coeff_num[i] / coeff_den[i] for the 2d+2 coefficients a_0..a_d, b_0..b_d, each a polynomial in t."""

    model_config = ConfigDict(extra="forbid")

    name: str = ""
    degree: int = Field(..., ge=1)
    coeff_num: List[List[Union[Scalar, ComplexValue]]]
    coeff_den: Optional[List[List[Union[Scalar, ComplexValue]]]] = None
    schedule: Union[GeometricSchedule, ExplicitSchedule] = Field(..., discriminator="type")
    scalings: Dict[int, List[List[TPolynomial]]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _shape(self) -> "FamilyModel":
        n = 2 * self.degree + 2
        if len(self.coeff_num) != n:
            raise ValueError(f"coeff_num needs {n} polynomials")
        if self.coeff_den is not None and len(self.coeff_den) != n:
            raise ValueError(f"coeff_den needs {n} polynomials")
        for level, m in self.scalings.items():
            if level < 1 or len(m) != 2 or any(len(row) != 2 for row in m):
                raise ValueError("scalings map levels ≥ 1 to 2×2 matrices")
        return self

    def to_core(self) -> FamilySpec:
        n = 2 * self.degree + 2
        dens = self.coeff_den or [[1]] * n
        coeffs = [
            {"num": [_coeff(c) for c in num], "den": [_coeff(c) for c in den]}
            for num, den in zip(self.coeff_num, dens)
        ]
        d = self.degree
        scalings = {lvl: [[e.to_core() for e in row] for row in m] for lvl, m in self.scalings.items()}
        return FamilySpec.build(d, coeffs[: d + 1], coeffs[d + 1 :], self.schedule.values(), scalings, self.name)


# --- loading ---

def load_model(path: str | Path, model: Type[M]) -> M:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read {path}: {e}") from e
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        raise SchemaError(f"{path} does not match the {model.__name__} schema",
                          errors=e.errors(include_url=False, include_context=False)) from e


def load_measure(path: str | Path) -> AtomicMeasure:
    """Measure from a .csv or a JSON document."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as e:
            raise SchemaError(f"cannot read {path}: {e}") from e
        return measure_from_csv(text)
    return load_model(p, MeasureModel).to_core()

"""
Shared pieces of the command modules: common flags, output writing, point parsing.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from ratlimits.core.measures import AtomicMeasure
from ratlimits.core.sphere import SpherePoint
from ratlimits.errors import SchemaError
from ratlimits.models.schemas import MeasureModel


@dataclass
class CommandOutput:
    payload: Any                 # recorded by the run recorder
    text: str                    # written to --out, or stdout
    artifacts: dict[str, str] = field(default_factory=dict)


def common_parser() -> argparse.ArgumentParser:
    """Flags every subcommand accepts."""
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--seed", type=int, help="seed for every randomized step")
    p.add_argument("--threads", type=int, help="worker threads (0 = machine parallelism)")
    p.add_argument("--config", help="JSON file overriding tolerances")
    p.add_argument("--verbose", action="store_true", help="debug logging")
    return p


def to_jsonable(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json", by_alias=True, exclude_none=True)
    return payload


def json_output(payload: Any, **artifacts: str) -> CommandOutput:
    data = to_jsonable(payload)
    return CommandOutput(data, json.dumps(data, indent=2, ensure_ascii=False) + "\n", dict(artifacts))


def write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def write_artifact(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def parse_point(text: str) -> SpherePoint:
    """'inf', a Python complex literal ('0.3+0.2j') or 're,im'."""
    s = text.strip().lower()
    if s in ("inf", "infinity", "∞"):
        return SpherePoint.infinity()
    try:
        if "," in s:
            re, im = s.split(",")
            return SpherePoint.from_complex(complex(float(re), float(im)))
        return SpherePoint.from_complex(complex(s.replace("i", "j")))
    except ValueError as e:
        raise SchemaError(f"cannot read {text!r} as a point") from e


def describe_measure(mu: AtomicMeasure, max_atoms: int = 4) -> str:
    """Short label such as 'delta at infinity' or '0.5 delta at i + 0.5 delta at -i'."""
    if len(mu) == 0:
        return "zero measure"
    if len(mu) > max_atoms:
        return f"{len(mu)} atoms of mass {mu.mass:.6g}"

    def where(p: SpherePoint) -> str:
        if p.is_infinity:
            return "infinity"
        z = p.to_complex()
        z = complex(round(z.real, 6) + 0.0, round(z.imag, 6) + 0.0)
        return f"{z.real:g}" if z.imag == 0 else f"{z:g}".strip("()")

    parts = []
    for p, w in zip(mu.points(), mu.weights):
        parts.append(f"delta at {where(p)}" if abs(w - 1.0) < 1e-6 else f"{w:.6g} delta at {where(p)}")
    return " + ".join(parts)


def measure_dict(mu: AtomicMeasure) -> dict:
    return MeasureModel.from_measure(mu).model_dump(mode="json", exclude_none=True) if len(mu) else {"atoms": []}

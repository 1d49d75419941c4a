"""
Projective limits of sampled sequences.

A "limit" here is always read off a finite schedule: consecutive samples are
compared in the Fubini-Study sine distance, a geometric rate is fitted on the
tail, and the last sample is the estimate. Coordinates that keep shrinking
towards zero along the schedule are snapped to exactly zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ratlimits.config import Settings, get_settings
from ratlimits.errors import NotCauchy


@dataclass(frozen=True)
class CauchyCertificate:
    label: str
    steps: tuple[float, ...]
    rate: float
    tail_bound: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def last_step(self) -> float:
        return self.steps[-1] if self.steps else 0.0

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "steps": list(self.steps),
            "rate": self.rate,
            "tail_bound": self.tail_bound,
            "notes": list(self.notes),
        }


def normalize_vectors(vectors: np.ndarray) -> np.ndarray:
    """Rows scaled to unit 2-norm with the largest entry real positive."""
    v = np.asarray(vectors, dtype=complex)
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero vector has no projective class")
    v = v / norms
    lead = v[np.arange(len(v)), np.argmax(np.abs(v), axis=1)]
    return v * (np.abs(lead) / lead)[:, None]


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """sin of the angle between the complex lines through u and v."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    c = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.sqrt(max(0.0, 1.0 - min(1.0, c) ** 2))


def cauchy_certificate(vectors: np.ndarray, cfg: Settings | None = None, label: str = "") -> CauchyCertificate:
    """Certify that the rows of ``vectors`` settle down projectively; NotCauchy otherwise."""
    cfg = cfg or get_settings()
    v = normalize_vectors(vectors)
    steps = tuple(projective_distance(v[j], v[j + 1]) for j in range(len(v) - 1))
    if not steps:
        return CauchyCertificate(label, steps, 0.0, 0.0, ("single sample",))
    tail = np.array(steps[-3:])
    last = tail[-1]
    if last <= 1e-14:
        return CauchyCertificate(label, steps, 0.0, float(last))
    if len(tail) >= 2 and np.all(tail[:-1] > 0):
        rate = float(np.exp(np.mean(np.log(tail[1:] / tail[:-1]))))
    else:
        rate = 1.0
    bound = last * rate / (1.0 - rate) if rate < 1.0 else math.inf
    if last > cfg.tau_cauchy or rate >= 1.0:
        raise NotCauchy(
            f"{label or 'sequence'} is not projectively Cauchy on the schedule",
            steps=list(steps),
            rate=rate,
        )
    return CauchyCertificate(label, steps, rate, float(bound))


def limit_vanishes(values, cfg: Settings | None = None, tol: float | None = None) -> bool:
    """Whether a nonnegative sampled quantity tends to zero along the schedule."""
    cfg = cfg or get_settings()
    tol = cfg.tau_vanish if tol is None else tol
    values = np.abs(np.asarray(values, dtype=float))
    last = values[-1]
    if last == 0.0:
        return True
    return bool(last <= tol and last <= 0.5 * values[0])


def snap_vanishing(vectors: np.ndarray, cfg: Settings | None = None) -> np.ndarray:
    """Last sample of a projective sequence with vanishing coordinates set to zero."""
    cfg = cfg or get_settings()
    v = np.asarray(vectors, dtype=complex)
    sup = np.max(np.abs(v), axis=1, keepdims=True)
    mags = np.abs(v) / sup
    out = v[-1] / sup[-1, 0]
    for i in range(v.shape[1]):
        if limit_vanishes(mags[:, i], cfg):
            out[i] = 0.0
    return out

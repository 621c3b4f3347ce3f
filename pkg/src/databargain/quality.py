"""Dataset quality grades, composite score and quality-adjusted reserve price."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# accuracy, completeness, consistency, timeliness
QUALITY_WEIGHTS = (0.55, 0.13, 0.26, 0.06)
INDICATORS = ("accuracy", "completeness", "consistency", "timeliness")


class QualityError(ValueError):
    pass


class QualityLevel(float, enum.Enum):
    EXCELLENT = 1.2
    VERY_GOOD = 1.0
    SATISFACTORY = 0.6
    FAIR = 0.4
    UNSATISFACTORY = 0.2

    @property
    def score(self) -> float:
        return float(self.value)

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    QualityLevel.EXCELLENT: "Excellent",
    QualityLevel.VERY_GOOD: "VeryGood",
    QualityLevel.SATISFACTORY: "Satisfactory",
    QualityLevel.FAIR: "Fair",
    QualityLevel.UNSATISFACTORY: "Unsatisfactory",
}
_BY_KEY = {label.lower(): level for level, label in _LABELS.items()}
GRADES = tuple(QualityLevel)


def grade_from_label(label: str) -> QualityLevel:
    """Case-insensitive grade lookup; spaces, '_' and '-' are ignored."""
    key = label.strip().lower().replace(" ", "").replace("_", "").replace("-", "")
    try:
        return _BY_KEY[key]
    except KeyError:
        raise QualityError(
            f"unknown quality grade {label!r}; admissible: {', '.join(_LABELS.values())}"
        ) from None


def grade_from_score(score: float) -> QualityLevel:
    for level in GRADES:
        if math.isclose(score, level.score, abs_tol=1e-12):
            return level
    raise QualityError(f"score {score} is not an admitted grade score {[g.score for g in GRADES]}")


def as_grade(value) -> QualityLevel:
    if isinstance(value, QualityLevel):
        return value
    if isinstance(value, str):
        return grade_from_label(value)
    return grade_from_score(float(value))


@dataclass(frozen=True)
class QualityVector:
    accuracy: QualityLevel
    completeness: QualityLevel
    consistency: QualityLevel
    timeliness: QualityLevel

    def __post_init__(self):
        for name in INDICATORS:
            object.__setattr__(self, name, as_grade(getattr(self, name)))

    @classmethod
    def of(cls, values: Sequence) -> "QualityVector":
        if len(values) != 4:
            raise QualityError(f"expected 4 quality grades, got {len(values)}")
        return cls(*values)

    @property
    def scores(self) -> np.ndarray:
        return np.array([getattr(self, name).score for name in INDICATORS])


@dataclass(frozen=True)
class ReservePrice:
    v1: float
    v2: float
    r0: float
    rs: float


def _check_weights(w, arity: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (arity,):
        raise QualityError(f"expected {arity} weights, got shape {w.shape}")
    if np.any(w < 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
        raise QualityError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    return w


def composite_score(q: QualityVector, w=QUALITY_WEIGHTS) -> float:
    return float(_check_weights(w, 4) @ q.scores)


def seller_reserve(v1: float, v2: float, q: QualityVector, w=QUALITY_WEIGHTS) -> ReservePrice:
    """Cost plus minimum profit, scaled by the composite quality score."""
    if v1 < 0 or v2 < 0:
        raise QualityError(f"cost components must be nonnegative, got v1={v1}, v2={v2}")
    r0 = v1 + v2
    return ReservePrice(v1, v2, r0, r0 * composite_score(q, w))

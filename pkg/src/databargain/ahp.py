"""Indicator weights from three-point pairwise judgments (AHP, range method).

A judgment matrix holds entries in {0, 1, 2} ("less", "equally", "more"
important).  Row sums R_i are turned into a ratio matrix
``H[i][j] = base ** ((R_i - R_j) / (R_max - R_min))`` whose principal
eigenvector gives the weights; the consistency ratio CI/RI validates it.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

DEFAULT_BASE = 9.0
EIGEN_TOL = 1e-10
EIGEN_MAX_ITER = 10_000

# average random consistency index by matrix order
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.52, 4: 0.89, 5: 1.12, 6: 1.26, 7: 1.36, 8: 1.41, 9: 1.45}

# name -> (file, kind); "paper5x5" is the two-decimal reference ratio matrix
FIXTURES = {
    "paper5x5": ("ratio_5x5.txt", "ratio"),
    "paper5x5-judgments": ("judgments_5x5.txt", "judgments"),
    "quality4x4": ("judgments_quality4x4.txt", "judgments"),
}


class AHPError(ValueError):
    """Invalid judgment/ratio matrix or unsupported order."""


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class JudgmentMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise AHPError(f"judgment matrix must be square, got shape {m.shape}")
        if not np.all(np.isin(m, (0, 1, 2))):
            raise AHPError("judgment entries must be in {0, 1, 2}")
        m = m.astype(int)
        if not np.all(np.diag(m) == 1):
            raise AHPError("judgment diagonal must be all 1")
        if not np.array_equal(m + m.T, np.full(m.shape, 2)):
            raise AHPError("judgments must be complementary: C[i][j] + C[j][i] == 2")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)


@dataclass(frozen=True)
class RatioMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise AHPError(f"ratio matrix must be square, got shape {m.shape}")
        if not np.all(m > 0):
            raise AHPError("ratio matrix entries must be positive")
        if not np.allclose(np.diag(m), 1.0):
            raise AHPError("ratio matrix diagonal must be all 1")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    ci: float
    cr: float
    ri: float
    passed: bool


def range_transform(judgments: JudgmentMatrix, base: float = DEFAULT_BASE) -> RatioMatrix:
    """Build the ratio matrix from row sums with the range method.

    All-tied row sums give the all-ones matrix.
    """
    if judgments.n < 2:
        raise AHPError("range method needs at least two indicators")
    if base <= 0:
        raise AHPError(f"base must be positive, got {base}")
    r = judgments.row_sums.astype(float)
    spread = r.max() - r.min()
    if spread == 0:
        return RatioMatrix(np.ones((judgments.n, judgments.n)))
    return RatioMatrix(base ** ((r[:, None] - r[None, :]) / spread))


def principal_eigenpair(h: RatioMatrix, tol: float = EIGEN_TOL,
                        max_iter: int = EIGEN_MAX_ITER) -> tuple[float, np.ndarray]:
    """Power iteration from the uniform vector; eigenvector sums to 1."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = h.entries
    w = np.full(h.n, 1.0 / h.n)
    for _ in range(max_iter):
        aw = a @ w
        lam = aw.sum()  # w sums to 1, so sum(Aw) is the Rayleigh-style estimate
        w_next = aw / lam
        if np.max(np.abs(a @ w_next - lam * w_next)) <= tol * lam and \
                np.max(np.abs(w_next - w)) <= tol:
            return float((a @ w_next).sum()), w_next
        w = w_next
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def consistency_check(lambda_max: float, n: int) -> ConsistencyReport:
    if n not in RANDOM_INDEX:
        raise AHPError(f"no random index for order {n}; supported 1..9")
    ri = RANDOM_INDEX[n]
    if n <= 2:
        return ConsistencyReport(lambda_max, 0.0, 0.0, ri, True)
    ci = (lambda_max - n) / (n - 1)
    cr = ci / ri
    return ConsistencyReport(lambda_max, ci, cr, ri, cr < 0.1)


def weights_from_ratio(h: RatioMatrix) -> tuple[np.ndarray, ConsistencyReport]:
    lam, w = principal_eigenpair(h)
    return w, consistency_check(lam, h.n)


def derive_weights(judgments: JudgmentMatrix,
                   base: float = DEFAULT_BASE) -> tuple[np.ndarray, ConsistencyReport]:
    """Range transform, principal eigenvector, consistency check.

    A failed consistency check is reported in the returned report, not raised.
    """
    return weights_from_ratio(range_transform(judgments, base))


def parse_matrix(text: str) -> np.ndarray:
    """Parse a row-major whitespace/comma separated grid; '#' starts a comment."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if line:
            rows.append([float(x) for x in line.split()])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise AHPError("matrix text must describe a non-empty square grid")
    return np.array(rows)


def load_matrix(path: str | Path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def load_fixture(name: str) -> np.ndarray:
    try:
        fname, _ = FIXTURES[name]
    except KeyError:
        raise AHPError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return parse_matrix(resources.files("databargain.data").joinpath(fname).read_text())


def reference_judgments() -> JudgmentMatrix:
    return JudgmentMatrix(load_fixture("paper5x5-judgments"))


def quality_judgments() -> JudgmentMatrix:
    return JudgmentMatrix(load_fixture("quality4x4"))


def reference_ratio_matrix() -> RatioMatrix:
    return RatioMatrix(load_fixture("paper5x5"))

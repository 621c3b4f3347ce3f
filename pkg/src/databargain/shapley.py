"""Buyer data utility: exact Shapley values of seller shards for one buyer.

The value of a coalition of shards is the buyer's model score on its test
set after training on the coalition's documents.  Two value functions ship:
a fast synthetic category-coverage score and real training via
:mod:`databargain.learners`.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .corpus import Corpus, DEFAULT_DIMENSION, featurize, to_dense
from .learners import ModelKind, SYNTHETIC_COVERAGE, train_and_score

MAX_EXACT_PLAYERS = 20
MAX_PERMUTATION_PLAYERS = 8


class ShapleyError(ValueError):
    pass


@dataclass(frozen=True)
class DataShard:
    seller_id: str
    per_category_counts: Mapping[str, int]
    doc_ids: tuple[str, ...] = ()

    def __post_init__(self):
        counts = dict(self.per_category_counts)
        if any(v < 0 for v in counts.values()):
            raise ShapleyError(f"{self.seller_id}: negative category count")
        object.__setattr__(self, "per_category_counts", counts)
        object.__setattr__(self, "doc_ids", tuple(self.doc_ids))
        if len(self.doc_ids) != sum(counts.values()):
            raise ShapleyError(
                f"{self.seller_id}: {len(self.doc_ids)} doc ids for {sum(counts.values())} counted docs")

    @classmethod
    def from_counts(cls, seller_id: str, counts: Mapping[str, int]) -> "DataShard":
        ids = tuple(f"{seller_id}:{c}:{i}" for c in sorted(counts) for i in range(counts[c]))
        return cls(seller_id, counts, ids)

    @classmethod
    def from_docs(cls, seller_id: str, doc_ids: Iterable[str], corpus: Corpus) -> "DataShard":
        cat = {d.doc_id: d.category for d in corpus.docs}
        ids = tuple(sorted(doc_ids))
        counts = {c: 0 for c in corpus.categories}
        for d in ids:
            counts[cat[d]] += 1
        return cls(seller_id, counts, ids)

    def __hash__(self):
        return hash((self.seller_id, self.doc_ids))


@dataclass(frozen=True)
class TestSpec:
    buyer_id: str
    required_categories: frozenset
    test_doc_ids: tuple[str, ...] = ()

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "required_categories", frozenset(self.required_categories))
        object.__setattr__(self, "test_doc_ids", tuple(self.test_doc_ids))
        if not self.required_categories:
            raise ShapleyError(f"{self.buyer_id}: empty category requirement")


class EvalOracle(Protocol):
    calls: int

    def evaluate(self, shards: frozenset, spec: TestSpec, model: ModelKind) -> float: ...


class SyntheticCoverageOracle:
    """V(U) = mean over required categories c of 1 - diminishing ** n_c(U)."""

    def __init__(self, required_categories: Iterable[str] | None = None, diminishing: float = 0.5):
        if not 0.0 <= diminishing <= 1.0:
            raise ShapleyError("diminishing must lie in [0, 1]")
        self.required = frozenset(required_categories) if required_categories is not None else None
        if self.required is not None and not self.required:
            raise ShapleyError("coverage oracle needs a nonempty required set")
        self.diminishing = diminishing
        self.calls = 0

    def evaluate(self, shards, spec: TestSpec | None = None, model: ModelKind | None = None) -> float:
        self.calls += 1
        required = self.required if self.required is not None else spec.required_categories
        total = 0.0
        for c in sorted(required):
            n = sum(s.per_category_counts.get(c, 0) for s in shards)
            total += 1.0 - self.diminishing ** n
        return total / len(required)


def synthetic_coverage_oracle(required_categories: Iterable[str],
                              diminishing: float = 0.5) -> SyntheticCoverageOracle:
    return SyntheticCoverageOracle(required_categories, diminishing)


class TrainedOracle:
    """Train the buyer's model on a coalition's documents; score test accuracy."""

    def __init__(self, corpus: Corpus, dimension: int = DEFAULT_DIMENSION, features=None):
        self.corpus = corpus
        self.dimension = dimension
        self.features = features if features is not None else featurize(corpus, dimension)
        self.labels = {d.doc_id: d.category for d in corpus.docs}
        self.calls = 0

    def evaluate(self, shards, spec: TestSpec, model: ModelKind) -> float:
        self.calls += 1
        if not spec.test_doc_ids:
            raise ShapleyError(f"{spec.buyer_id}: empty test set")
        train_ids = sorted(itertools.chain.from_iterable(s.doc_ids for s in shards))
        overlap = set(train_ids).intersection(spec.test_doc_ids)
        if overlap:
            raise ShapleyError(f"{spec.buyer_id}: test docs overlap training shards")
        x_tr = to_dense(self.features, train_ids, self.dimension)
        x_te = to_dense(self.features, spec.test_doc_ids, self.dimension)
        y_tr = [self.labels[d] for d in train_ids]
        y_te = [self.labels[d] for d in spec.test_doc_ids]
        return train_and_score(model, x_tr, y_tr, x_te, y_te)


def shapley_exact(shards: Sequence[DataShard], oracle: EvalOracle, spec: TestSpec,
                  model: ModelKind = SYNTHETIC_COVERAGE) -> list[float]:
    """Raw Shapley value of every shard by full subset enumeration.

    Each of the 2**n coalitions is evaluated exactly once.
    """
    n = len(shards)
    if n > MAX_EXACT_PLAYERS:
        raise ShapleyError(
            f"{n} shards is too many for exact enumeration (max {MAX_EXACT_PLAYERS}); "
            "merge shards or use the synthetic coverage oracle on fewer sellers")
    if n == 0:
        return []
    value = {}
    for mask in range(1 << n):
        members = frozenset(shards[i] for i in range(n) if mask >> i & 1)
        value[mask] = oracle.evaluate(members, spec, model)
    weight = [math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) for s in range(n)]
    phi = []
    for i in range(n):
        bit = 1 << i
        total = 0.0
        for mask in range(1 << n):
            if not mask & bit:
                total += weight[bin(mask).count("1")] * (value[mask | bit] - value[mask])
        phi.append(total)
    return phi


def shapley_permutation_oracle(shards: Sequence[DataShard], oracle: EvalOracle, spec: TestSpec,
                               model: ModelKind = SYNTHETIC_COVERAGE) -> list[float]:
    """Average marginal contribution over all n! arrival orders (no memoization)."""
    n = len(shards)
    if n > MAX_PERMUTATION_PLAYERS:
        raise ShapleyError(f"permutation oracle supports at most {MAX_PERMUTATION_PLAYERS} shards")
    phi = [0.0] * n
    orders = list(itertools.permutations(range(n)))
    for order in orders:
        coalition: list[DataShard] = []
        before = oracle.evaluate(frozenset(), spec, model)
        for i in order:
            coalition.append(shards[i])
            after = oracle.evaluate(frozenset(coalition), spec, model)
            phi[i] += after - before
            before = after
    return [p / len(orders) for p in phi]


def normalize_utilities(raw: Sequence[float]) -> list[float]:
    """Clamp negatives to zero, then scale to sum 1 (all-zero stays zero)."""
    clipped = [max(0.0, float(v)) for v in raw]
    total = sum(clipped)
    if total == 0:
        return [0.0] * len(clipped)
    return [v / total for v in clipped]


@dataclass
class UtilityMatrix:
    buyers: list[str]
    sellers: list[str]
    xi: np.ndarray
    normalized: bool = True
    raw: np.ndarray | None = field(default=None, repr=False)

    def row(self, buyer_id: str) -> np.ndarray:
        return self.xi[self.buyers.index(buyer_id)]

    def column(self, seller_id: str) -> np.ndarray:
        return self.xi[:, self.sellers.index(seller_id)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["buyer", *self.sellers])
        for b, row in zip(self.buyers, self.xi):
            w.writerow([b, *(f"{v:.10f}" for v in row)])
        return buf.getvalue()


def utility_matrix(shards: Sequence[DataShard], specs: Sequence[TestSpec],
                   models: Sequence[ModelKind], oracle_factory) -> UtilityMatrix:
    """One normalized Shapley row per buyer.

    ``oracle_factory(spec)`` returns the value function for that buyer.
    """
    raw = np.array([shapley_exact(shards, oracle_factory(spec), spec, model)
                    for spec, model in zip(specs, models)])
    xi = np.array([normalize_utilities(r) for r in raw])
    return UtilityMatrix([s.buyer_id for s in specs], [s.seller_id for s in shards], xi, True, raw)

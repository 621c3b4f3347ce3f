"""Labeled text corpora, hashed bag-of-words features and seller partitions.

Corpus on disk is either

* a directory with one subdirectory per category holding text files; the
  document id is the file name, so names must be unique across categories, or
* a delimited file (``.csv`` or ``.tsv``) with a header and columns
  ``label,text`` or ``doc_id,label,text``; without a ``doc_id`` column ids are
  ``row<N>`` (1-based, zero padded to 6 digits).

Features hash tokens with 64-bit FNV-1a (offset basis 0xcbf29ce484222325,
prime 0x100000001b3) over the UTF-8 bytes, reduced modulo the dimension.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

HOLDOUT_FRACTION = 0.2
DEFAULT_DIMENSION = 2048
SELLERS = ("S1", "S2", "S3", "S4")

# seller shares of the training pool per trading assumption
ASSUMPTION_RATIOS = {1: (3, 3, 2, 2), 2: (4, 3, 3), 3: (1, 1, 1, 1)}

_TOKEN = re.compile(r"[a-z0-9]+")
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class CorpusError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Document:
    doc_id: str
    category: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    docs: tuple[Document, ...]
    categories: tuple[str, ...]

    def __post_init__(self):
        ids = [d.doc_id for d in self.docs]
        dup = [i for i, c in Counter(ids).items() if c > 1]
        if dup:
            raise CorpusError(f"duplicate document ids: {sorted(dup)[:5]}")
        known = set(self.categories)
        bad = {d.category for d in self.docs} - known
        if bad:
            raise CorpusError(f"documents reference unknown categories {sorted(bad)}")
        object.__setattr__(self, "docs", tuple(sorted(self.docs, key=lambda d: d.doc_id)))

    def __len__(self) -> int:
        return len(self.docs)

    def by_id(self) -> dict[str, Document]:
        return {d.doc_id: d for d in self.docs}

    def by_category(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in self.categories}
        for d in self.docs:
            out[d.category].append(d.doc_id)
        return out


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    if path.is_dir():
        return _load_directory(path)
    if path.is_file():
        return _load_delimited(path)
    raise CorpusError(f"corpus path {path} is neither a directory nor a readable file")


def _load_directory(root: Path) -> Corpus:
    docs, categories = [], []
    for cat_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        files = sorted(p for p in cat_dir.iterdir() if p.is_file())
        if not files:
            raise CorpusError(f"category directory {cat_dir} has no documents")
        categories.append(cat_dir.name)
        for f in files:
            text = f.read_text(encoding="utf-8", errors="replace")
            docs.append(Document(f.name, cat_dir.name, tuple(tokenize(text))))
    if not categories:
        raise CorpusError(f"no category subdirectories under {root}")
    return Corpus(tuple(docs), tuple(categories))


def _load_delimited(path: Path) -> Corpus:
    delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        fields = reader.fieldnames or []
        if "label" not in fields or "text" not in fields:
            raise CorpusError(f"{path}: header must contain 'label' and 'text', got {fields}")
        docs = []
        for i, row in enumerate(reader, start=1):
            doc_id = row["doc_id"] if "doc_id" in fields else f"row{i:06d}"
            docs.append(Document(doc_id, row["label"], tuple(tokenize(row["text"] or ""))))
    if not docs:
        raise CorpusError(f"{path} holds no documents")
    categories = tuple(sorted({d.category for d in docs}))
    return Corpus(tuple(docs), categories)


def synthesize_corpus(num_categories: int = 10, docs_per_category: int = 50,
                      vocab_per_category: int = 30, seed: int = 0,
                      doc_length: int = 40, shared_vocab: int = 50,
                      private_fraction: float = 0.8) -> Corpus:
    """Topic-style corpus: each token comes from the category's private
    vocabulary with probability ``private_fraction``, else from a shared one."""
    if min(num_categories, docs_per_category, vocab_per_category, doc_length) <= 0:
        raise CorpusError("corpus sizes must be positive")
    rng = np.random.default_rng(seed)
    categories = tuple(f"cat{c:02d}" for c in range(1, num_categories + 1))
    shared = [f"common{i}" for i in range(shared_vocab)]
    docs = []
    for cat in categories:
        private = [f"{cat}w{i}" for i in range(vocab_per_category)]
        for k in range(docs_per_category):
            own = rng.random(doc_length) < private_fraction
            idx_p = rng.integers(0, len(private), doc_length)
            idx_s = rng.integers(0, len(shared), doc_length)
            tokens = tuple(private[p] if o else shared[s] for o, p, s in zip(own, idx_p, idx_s))
            docs.append(Document(f"{cat}-{k:05d}", cat, tokens))
    return Corpus(tuple(docs), categories)


def fnv1a_64(token: str) -> int:
    h = _FNV_OFFSET
    for b in token.encode("utf-8"):
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def featurize(corpus: Corpus, dimension: int = DEFAULT_DIMENSION) -> dict[str, dict[int, int]]:
    """Sparse hashed term counts per document id."""
    if dimension < 256 or dimension & (dimension - 1):
        raise CorpusError(f"dimension must be a power of two >= 256, got {dimension}")
    cache: dict[str, int] = {}
    out = {}
    for d in corpus.docs:
        counts: Counter = Counter()
        for tok in d.tokens:
            idx = cache.get(tok)
            if idx is None:
                idx = cache[tok] = fnv1a_64(tok) % dimension
            counts[idx] += 1
        out[d.doc_id] = dict(counts)
    return out


def to_dense(features: dict[str, dict[int, int]], doc_ids, dimension: int) -> np.ndarray:
    x = np.zeros((len(doc_ids), dimension))
    for row, doc_id in enumerate(doc_ids):
        for idx, count in features[doc_id].items():
            x[row, idx] = count
    return x


@dataclass
class PartitionPlan:
    """Seller ownership of training docs plus the reserved test pool.

    ``holdout`` maps a buyer id to its test documents; ``holdout_pool`` is the
    full reserved set those are drawn from.
    """

    assignments: dict[str, str]
    holdout_pool: tuple[str, ...]
    holdout: dict[str, list[str]] = field(default_factory=dict)

    def shard_ids(self, seller_id: str) -> list[str]:
        return sorted(d for d, s in self.assignments.items() if s == seller_id)

    def assign_holdout(self, corpus: Corpus, demands: dict[str, set[str]]) -> None:
        cat = {d.doc_id: d.category for d in corpus.docs}
        self.holdout = {b: sorted(d for d in self.holdout_pool if cat[d] in req)
                        for b, req in demands.items()}


def apportion(total: int, weights) -> list[int]:
    """Largest-remainder split of ``total`` in proportion to ``weights``;
    ties go to the earlier entry."""
    w = np.asarray(weights, dtype=float)
    quotas = total * w / w.sum()
    base = np.floor(quotas).astype(int)
    rest = total - base.sum()
    order = sorted(range(len(w)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return base.tolist()


def _stratified_split(by_cat: dict[str, list[str]], targets: dict[str, int]) -> dict[str, str]:
    """Deal every category across sellers proportionally to the remaining
    targets so totals come out exact and each seller sees each category."""
    remaining = dict(targets)
    left = sum(len(v) for v in by_cat.values())
    out = {}
    for offset, (cat, ids) in enumerate(by_cat.items()):
        sellers = list(remaining)
        # rotate tie-breaking so no seller systematically collects remainders
        k = offset % len(sellers)
        sellers = sellers[k:] + sellers[:k]
        counts = apportion(len(ids), [remaining[s] for s in sellers]) if left else [0] * len(sellers)
        counts = [min(c, remaining[s]) for c, s in zip(counts, sellers)]
        short = len(ids) - sum(counts)
        for i, s in enumerate(sellers):
            if short == 0:
                break
            extra = min(short, remaining[s] - counts[i])
            counts[i] += extra
            short -= extra
        pos = 0
        for s, c in zip(sellers, counts):
            for doc_id in ids[pos:pos + c]:
                out[doc_id] = s
            pos += c
            remaining[s] -= c
        left -= len(ids)
    return out


def partition(corpus: Corpus, assumption: int, monopolized_category: str | None = None,
              seed: int = 0, holdout_fraction: float = HOLDOUT_FRACTION) -> PartitionPlan:
    """Reserve a stratified holdout, then split the rest among S1..S4.

    Assumption 1: S1 owns every monopolized-category doc, topped up to 30% of
    the pool; S2 30%, S3/S4 20% each.  Assumption 2: S1 owns exactly the
    monopolized category; the rest is split 4:3:3 over S2..S4.  Assumption 3:
    each category is split evenly over all four sellers.
    """
    if assumption not in ASSUMPTION_RATIOS:
        raise CorpusError(f"seller assumption must be 1, 2 or 3, got {assumption}")
    mono = monopolized_category or corpus.categories[0]
    if mono not in corpus.categories:
        raise CorpusError(f"monopolized category {mono!r} not in corpus")
    rng = np.random.default_rng(seed)

    holdout, pool = [], {}
    for cat, ids in corpus.by_category().items():
        ids = [ids[i] for i in rng.permutation(len(ids))]
        k = int(round(holdout_fraction * len(ids)))
        holdout.extend(ids[:k])
        pool[cat] = ids[k:]
    total = sum(len(v) for v in pool.values())
    per_cat_min = {1: 1, 2: 1, 3: len(SELLERS)}[assumption]
    thin = [c for c, v in pool.items() if len(v) < per_cat_min]
    if total < 10 or thin:
        raise CorpusError(
            f"corpus too small: {total} training docs after holdout; need >= 10 and "
            f">= {per_cat_min} per category (short: {thin})")

    mono_ids = pool[mono]
    rest = {c: v for c, v in pool.items() if c != mono}
    if assumption == 3:
        targets = dict(zip(SELLERS, apportion(total, ASSUMPTION_RATIOS[3])))
        assignments = _stratified_split(pool, targets)
    elif assumption == 2:
        assignments = {d: "S1" for d in mono_ids}
        n_rest = total - len(mono_ids)
        targets = dict(zip(SELLERS[1:], apportion(n_rest, ASSUMPTION_RATIOS[2])))
        assignments.update(_stratified_split(rest, targets))
    else:
        shares = apportion(total, ASSUMPTION_RATIOS[1])
        if len(mono_ids) > shares[0]:
            raise CorpusError(
                f"monopolized category has {len(mono_ids)} docs, more than S1's 30% share "
                f"({shares[0]} of {total})")
        assignments = {d: "S1" for d in mono_ids}
        targets = {"S1": shares[0] - len(mono_ids), **dict(zip(SELLERS[1:], shares[1:]))}
        assignments.update(_stratified_split(rest, targets))
    return PartitionPlan(assignments, tuple(sorted(holdout)))

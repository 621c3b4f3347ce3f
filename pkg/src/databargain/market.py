"""Four-seller / four-buyer market scenarios, seeded runs and parameter sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import bargain, satisfaction
from .corpus import SELLERS, Corpus, PartitionPlan, featurize, partition, synthesize_corpus
from .learners import KNN, LINEAR_SVM, LOGISTIC_REGRESSION, ModelKind
from .quality import GRADES, QualityVector, composite_score
from .shapley import (DataShard, SyntheticCoverageOracle, TestSpec, TrainedOracle,
                      UtilityMatrix, normalize_utilities, shapley_exact)

BUYERS = ("B1", "B2", "B3", "B4")
DEMAND_MODELS = (LINEAR_SVM, LINEAR_SVM, LOGISTIC_REGRESSION, KNN)
MAX_DISCOUNT_DRAWS = 10_000

RUNRECORD_SCHEMA = "# databargain runrecord v1"
SWEEP_SCHEMA = "# databargain sweep v1"
SUMMARY_SCHEMA = "databargain summary v1"
RUNRECORD_FIELDS = ("seed", "kind", "id", "reserve_or_budget", "price_or_payment",
                    "extra_profit", "feasible")
SWEEP_FIELDS = ("param", "value", "seller_extra", "buyer_extra", "flag")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    seller_assumption: int = 1
    buyer_demand: int = 1
    num_categories: int = 10
    docs_per_category: int = 50
    corpus_seed: int = 0
    seed: int = 0
    discount_k_choices: tuple[float, ...] = (7, 10, 15, 20)
    logistic_midpoint: float = 0.0
    p1: float = 0.9
    eta: float = 0.0
    tau: float = 0.0
    budget_range: tuple[float, float] = (600.0, 1000.0)
    reserve_range: tuple[float, float] = (200.0, 400.0)
    alpha_range: tuple[float, float] = (0.0, 1.0)
    oracle: str = "synthetic"
    diminishing: float = 0.5

    def __post_init__(self):
        for name in ("discount_k_choices", "budget_range", "reserve_range", "alpha_range"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.seller_assumption not in (1, 2, 3):
            raise ScenarioError(f"seller_assumption must be 1, 2 or 3, got {self.seller_assumption}")
        if self.buyer_demand not in (1, 2):
            raise ScenarioError(f"buyer_demand must be 1 or 2, got {self.buyer_demand}")
        if self.num_categories < 3:
            raise ScenarioError("num_categories must be at least 3")
        if self.docs_per_category < 5:
            raise ScenarioError("docs_per_category must be at least 5")
        if not self.discount_k_choices or min(self.discount_k_choices) <= 0:
            raise ScenarioError("discount_k_choices must be nonempty and positive")
        if not 0.0 < self.p1 <= 1.0:
            raise ScenarioError(f"p1 must lie in (0, 1], got {self.p1}")
        if not 0.0 <= self.eta < 1.0:
            raise ScenarioError(f"eta must lie in [0, 1), got {self.eta}")
        if not 0.0 <= self.tau < 1.0:
            raise ScenarioError(f"tau must lie in [0, 1), got {self.tau}")
        for name in ("budget_range", "reserve_range", "alpha_range"):
            lo, hi = getattr(self, name)
            if not (len(getattr(self, name)) == 2 and 0 <= lo < hi):
                raise ScenarioError(f"{name} must be a nonempty nonnegative range, got {(lo, hi)}")
        if self.oracle not in ("synthetic", "trained"):
            raise ScenarioError(f"oracle must be 'synthetic' or 'trained', got {self.oracle!r}")
        if not 0.0 <= self.diminishing <= 1.0:
            raise ScenarioError("diminishing must lie in [0, 1]")


@dataclass(frozen=True)
class SellerProfile:
    seller_id: str
    shard: DataShard


@dataclass(frozen=True)
class BuyerProfile:
    buyer_id: str
    test: TestSpec
    model: ModelKind


@dataclass
class MarketScenario:
    config: ScenarioConfig
    corpus: Corpus
    plan: PartitionPlan
    sellers: list[SellerProfile]
    buyers: list[BuyerProfile]

    @property
    def category_universe(self) -> tuple[str, ...]:
        return self.corpus.categories

    @property
    def shards(self) -> list[DataShard]:
        return [s.shard for s in self.sellers]


@dataclass(frozen=True)
class MarketDraw:
    budgets: tuple[float, ...]
    reserves: tuple[float, ...]  # pre-quality r0 per seller
    alphas: tuple[float, ...]
    p2: tuple[float, ...]
    grades: tuple[QualityVector, ...]
    k: tuple[float, ...]
    discount_seeds: tuple[int, ...]


@dataclass(frozen=True)
class RunRecord:
    seed: int
    kind: str  # "seller" | "buyer"
    id: str
    reserve_or_budget: float
    price_or_payment: float
    extra_profit: float
    feasible: bool


@dataclass
class MarketOutcome:
    records: list[RunRecord]
    utility: UtilityMatrix
    satisfaction: dict[tuple[str, str], float] = field(default_factory=dict)
    buyer_discount: dict[tuple[str, str], float] = field(default_factory=dict)
    alliances: dict[str, satisfaction.AllianceView] = field(default_factory=dict)
    equilibria: dict[str, bargain.EquilibriumResult] = field(default_factory=dict)
    params: dict[str, bargain.BargainParams] = field(default_factory=dict)


def buyer_demands(corpus: Corpus, demand: int) -> dict[str, set[str]]:
    cats = corpus.categories
    if demand == 2:
        return {b: set(cats) for b in BUYERS}
    mono = cats[0]
    return {"B1": {mono}, "B2": set(cats), "B3": set(cats) - {mono}, "B4": set(cats[:3])}


@lru_cache(maxsize=8)
def _cached_corpus(num_categories: int, docs_per_category: int, seed: int) -> Corpus:
    return synthesize_corpus(num_categories, docs_per_category, seed=seed)


def default_corpus(cfg: ScenarioConfig) -> Corpus:
    return _cached_corpus(cfg.num_categories, cfg.docs_per_category, cfg.corpus_seed)


def build_scenario(cfg: ScenarioConfig, corpus: Corpus | None = None,
                   plan: PartitionPlan | None = None) -> MarketScenario:
    corpus = corpus if corpus is not None else default_corpus(cfg)
    if len(corpus.categories) < cfg.num_categories:
        raise ScenarioError(
            f"corpus has {len(corpus.categories)} categories, scenario needs {cfg.num_categories}")
    if len(corpus.categories) > cfg.num_categories:
        keep = set(corpus.categories[:cfg.num_categories])
        corpus = Corpus(tuple(d for d in corpus.docs if d.category in keep),
                        corpus.categories[:cfg.num_categories])
    if plan is None:
        plan = partition(corpus, cfg.seller_assumption, corpus.categories[0], seed=cfg.seed)
    demands = buyer_demands(corpus, cfg.buyer_demand)
    plan.assign_holdout(corpus, demands)
    sellers = [SellerProfile(s, DataShard.from_docs(s, plan.shard_ids(s), corpus)) for s in SELLERS]
    buyers = [BuyerProfile(b, TestSpec(b, demands[b], plan.holdout[b]), m)
              for b, m in zip(BUYERS, DEMAND_MODELS)]
    return MarketScenario(cfg, corpus, plan, sellers, buyers)


def sample_parameters(cfg: ScenarioConfig, rng: np.random.Generator) -> MarketDraw:
    """Draw budgets, reserves, margins, posteriors, grades and steepness per run.

    Seller patience is drawn later (it depends on the alliance's discount) from
    the per-seller ``discount_seeds`` streams, see :func:`draw_seller_discount`.
    """
    n_s, n_b = len(SELLERS), len(BUYERS)
    budgets = rng.uniform(*cfg.budget_range, size=n_b)
    reserves = rng.uniform(*cfg.reserve_range, size=n_s)
    alphas = rng.uniform(*cfg.alpha_range, size=n_s)
    # U(0, p1) excluding 0 itself
    p2 = cfg.p1 - rng.uniform(0.0, cfg.p1, size=n_s)
    grade_idx = rng.integers(0, len(GRADES), size=(n_s, 4))
    grades = tuple(QualityVector.of([GRADES[i] for i in row]) for row in grade_idx)
    k = rng.choice(np.asarray(cfg.discount_k_choices), size=n_b)
    seeds = rng.integers(0, 2**63 - 1, size=n_s)
    return MarketDraw(tuple(budgets.tolist()), tuple(reserves.tolist()), tuple(alphas.tolist()),
                      tuple(p2.tolist()), grades, tuple(k.tolist()), tuple(int(s) for s in seeds))


def draw_seller_discount(seed: int, delta_eta_b: float, p1: float,
                         max_draws: int = MAX_DISCOUNT_DRAWS) -> float:
    """Rejection-sample delta_s ~ U(0, 1) until it beats the alliance's
    discount and keeps the equilibrium denominator positive."""
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        d = float(rng.uniform())
        if d > delta_eta_b and p1 > d * delta_eta_b:
            return d
    raise ScenarioError(
        f"no seller discount accepted in {max_draws} draws (delta_eta_b={delta_eta_b:.4f}, p1={p1})")


def _oracle_factory(scenario: MarketScenario):
    cfg = scenario.config
    if cfg.oracle == "synthetic":
        return lambda spec: SyntheticCoverageOracle(spec.required_categories, cfg.diminishing)
    trained = TrainedOracle(scenario.corpus, features=_features(scenario.corpus))
    return lambda spec: trained


@lru_cache(maxsize=4)
def _features(corpus: Corpus):
    return featurize(corpus)


def compute_utility(scenario: MarketScenario) -> UtilityMatrix:
    factory = _oracle_factory(scenario)
    shards = scenario.shards
    raw = np.array([shapley_exact(shards, factory(b.test), b.test, b.model) for b in scenario.buyers])
    xi = np.array([normalize_utilities(r) for r in raw])
    return UtilityMatrix([b.buyer_id for b in scenario.buyers],
                         [s.seller_id for s in scenario.sellers], xi, True, raw)


def run_market(scenario: MarketScenario, draw: MarketDraw, seed: int | None = None,
               utility: UtilityMatrix | None = None) -> MarketOutcome:
    """Price every seller's shard against its buyer alliance and settle payments.

    Buyers with zero utility for a seller stay out of that seller's alliance.
    A buyer pays each seller its share ``xi[i, j] * u_i / r_b(S_j)`` of the
    agreed price.
    """
    cfg = scenario.config
    seed = cfg.seed if seed is None else seed
    xi = utility if utility is not None else compute_utility(scenario)
    budgets = np.asarray(draw.budgets)
    out = MarketOutcome([], xi)

    if not np.any(xi.xi > 0):
        for j, s in enumerate(scenario.sellers):
            out.records.append(RunRecord(seed, "seller", s.seller_id, draw.reserves[j], 0.0, 0.0, False))
        for i, b in enumerate(scenario.buyers):
            out.records.append(RunRecord(seed, "buyer", b.buyer_id, draw.budgets[i], 0.0, 0.0, False))
        return out

    prices = np.zeros(len(scenario.sellers))
    traded = np.zeros(len(scenario.sellers), dtype=bool)
    for j, s in enumerate(scenario.sellers):
        sid = s.seller_id
        q = draw.grades[j]
        r_s = draw.reserves[j] * composite_score(q)
        members, deltas, member_budgets = [], [], []
        for i, b in enumerate(scenario.buyers):
            x = float(xi.xi[i, j])
            sat = satisfaction.buyer_satisfaction(min(x, 1.0), q, buyer_id=b.buyer_id, seller_id=sid)
            dp = satisfaction.DiscountParams(draw.k[i], cfg.logistic_midpoint, cfg.eta)
            out.satisfaction[(b.buyer_id, sid)] = sat.value
            out.buyer_discount[(b.buyer_id, sid)] = satisfaction.logistic_discount(sat, dp)
            if x > 0:
                members.append(b.buyer_id)
                deltas.append(out.buyer_discount[(b.buyer_id, sid)])
                member_budgets.append(budgets[i])
        r_b = satisfaction.alliance_budget(xi, budgets, sid)
        if not members or r_b <= 0:
            out.records.append(RunRecord(seed, "seller", sid, r_s, 0.0, 0.0, False))
            continue
        delta_b = satisfaction.alliance_discount(deltas, member_budgets)
        delta_eta_b = satisfaction.platform_adjust(delta_b, cfg.eta)
        out.alliances[sid] = satisfaction.AllianceView(sid, delta_b, delta_eta_b, r_b, tuple(members))
        delta_s = draw_seller_discount(draw.discount_seeds[j], delta_eta_b, cfg.p1)
        params = bargain.BargainParams(r_s, r_b, delta_s, delta_eta_b, cfg.p1, draw.p2[j],
                                       draw.alphas[j], cfg.tau)
        eq = bargain.equilibrium_price(params)
        out.params[sid], out.equilibria[sid] = params, eq
        prices[j], traded[j] = eq.price, True
        out.records.append(RunRecord(seed, "seller", sid, r_s, eq.price, eq.seller_extra, eq.feasible))

    for i, b in enumerate(scenario.buyers):
        payment, ok, involved = 0.0, True, False
        for j, s in enumerate(scenario.sellers):
            x = xi.xi[i, j]
            if x <= 0 or not traded[j]:
                continue
            involved = True
            payment += x * budgets[i] / out.alliances[s.seller_id].r_b * prices[j]
            ok &= out.equilibria[s.seller_id].feasible
        out.records.append(RunRecord(seed, "buyer", b.buyer_id, float(budgets[i]), float(payment),
                                     float(budgets[i] - payment), bool(ok and involved)))
    return out


def run_seed(cfg: ScenarioConfig, seed: int) -> list[RunRecord]:
    run_cfg = ScenarioConfig(**{**asdict(cfg), "seed": seed})
    scenario = build_scenario(run_cfg)
    draw = sample_parameters(run_cfg, np.random.default_rng(seed))
    return run_market(scenario, draw, seed).records


def _record_key(r: RunRecord):
    return (r.seed, 0 if r.kind == "seller" else 1, r.id)


def run_simulation(cfg: ScenarioConfig, seeds: Iterable[int], workers: int = 1) -> list[RunRecord]:
    """Run independent seeds, optionally in worker processes; output order is fixed."""
    seeds = list(seeds)
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_seed, [cfg] * len(seeds), seeds))
    else:
        chunks = [run_seed(cfg, s) for s in seeds]
    return sorted((r for c in chunks for r in c), key=_record_key)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def records_to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    buf.write(RUNRECORD_SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUNRECORD_FIELDS)
    for r in sorted(records, key=_record_key):
        w.writerow([r.seed, r.kind, r.id, _fmt(r.reserve_or_budget), _fmt(r.price_or_payment),
                    _fmt(r.extra_profit), str(r.feasible).lower()])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(RunRecord(int(row["seed"]), row["kind"], row["id"], float(row["reserve_or_budget"]),
                             float(row["price_or_payment"]), float(row["extra_profit"]),
                             row["feasible"] == "true"))
    return out


def aggregate(records: Sequence[RunRecord]) -> dict[str, dict]:
    """Per-participant extra-profit statistics, sellers first then buyers."""
    if not records:
        raise ScenarioError("nothing to aggregate")
    groups: dict[tuple, list[RunRecord]] = {}
    for r in sorted(records, key=_record_key):
        groups.setdefault((0 if r.kind == "seller" else 1, r.id), []).append(r)
    summary = {}
    for (_, pid), rs in sorted(groups.items()):
        extras = [r.extra_profit for r in rs]
        summary[pid] = {
            "kind": rs[0].kind,
            "n": len(rs),
            "mean_extra": statistics.fmean(extras),
            "median_extra": statistics.median(extras),
            "std_extra": statistics.pstdev(extras),
            "feasible_rate": sum(r.feasible for r in rs) / len(rs),
        }
    return summary


def summary_to_json(summary: dict, cfg: ScenarioConfig | None = None, seeds=None) -> str:
    doc = {"schema": SUMMARY_SCHEMA}
    if cfg is not None:
        doc["config"] = asdict(cfg)
    if seeds is not None:
        doc["seeds"] = list(seeds)
    doc["participants"] = summary
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def seller_ranking(summary: dict) -> list[str]:
    sellers = [pid for pid, s in summary.items() if s["kind"] == "seller"]
    return sorted(sellers, key=lambda pid: (-summary[pid]["median_extra"], pid))


# -- sensitivity sweeps ------------------------------------------------------

SWEEP_PARAMS = ("quality", "alpha", "p2", "eta")
# expected sign of d(seller extra)/d(param); buyer extra moves the other way
EXPECTED_DIRECTION = {"quality": 1, "alpha": 1, "p2": 1, "eta": -1}

# feasible base point where the quality, alpha and eta directions hold
SWEEP_BASE = bargain.BargainParams(r_s=300.0, r_b=800.0, delta_s=0.3, delta_eta_b=0.65 * 1.1,
                                   p1=0.9, p2=0.1, alpha=0.8)
SWEEP_BASE_DELTA_B = 0.65
SWEEP_BASE_R0 = 300.0


def default_grid(which: str, steps: int = 11, p1: float = 0.9) -> list[float]:
    lo, hi = {"quality": (0.2, 1.2), "alpha": (0.0, 1.0), "p2": (p1 / steps, p1),
              "eta": (0.0, 0.5)}[which]
    return np.linspace(lo, hi, steps).tolist()


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    seller_extra: float
    buyer_extra: float
    flag: str = ""


def sweep(base: bargain.BargainParams, which: str, grid: Sequence[float], *,
          r0: float | None = None, delta_b: float | None = None) -> list[SweepRow]:
    """Vary one input of the equilibrium price, holding the rest of ``base``.

    ``quality`` sets ``r_s = r0 * value`` (``r0`` defaults to ``base.r_s``);
    ``eta`` sets ``delta_eta_b = delta_b * (1 + value)`` (``delta_b`` defaults
    to ``base.delta_eta_b``).  Points outside the valid region are kept and
    flagged.
    """
    if which not in SWEEP_PARAMS:
        raise ScenarioError(f"unknown sweep parameter {which!r}; choose from {SWEEP_PARAMS}")
    r0 = base.r_s if r0 is None else r0
    delta_b = base.delta_eta_b if delta_b is None else delta_b
    rows = []
    for v in grid:
        v = float(v)
        change = {"quality": {"r_s": r0 * v}, "alpha": {"alpha": v}, "p2": {"p2": v},
                  "eta": {"delta_eta_b": delta_b * (1.0 + v)}}[which]
        try:
            res = bargain.equilibrium_price(base.with_(**change))
        except bargain.BargainError as exc:
            rows.append(SweepRow(which, v, math.nan, math.nan, f"invalid: {exc}"))
            continue
        rows.append(SweepRow(which, v, res.seller_extra, res.buyer_extra,
                             "" if res.feasible else "infeasible"))
    return rows


def sweep_direction_ok(rows: Sequence[SweepRow], which: str | None = None) -> tuple[bool, bool]:
    """Whether seller and buyer extras move in the expected directions, pointwise."""
    which = which or rows[0].param
    sign = EXPECTED_DIRECTION[which]
    seller = np.diff([r.seller_extra for r in rows]) * sign
    buyer = np.diff([r.buyer_extra for r in rows]) * -sign
    tol = 1e-9
    return bool(np.all(seller >= -tol)), bool(np.all(buyer >= -tol))


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(SWEEP_SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_FIELDS)
    for r in rows:
        w.writerow([r.param, f"{r.value:.6f}", _fmt(r.seller_extra), _fmt(r.buyer_extra), r.flag])
    return buf.getvalue()

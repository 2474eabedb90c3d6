"""Interactive re-ranking: Top-K rearrangement and confidence-aware active
feedback (CAAF), plus a qrels-driven oracle annotator for simulations.

CAAF keeps a probe element (mean of the top-A gallery features) and the
top-N gallery in one energy model over ranking scores f and confidences v:

    E(f, v) = (1/m^2) * sum_{i != j} (v_i + v_j) * (l_ij - beta)  +  (lambda/m) * sum_i (v_i - v0_i)^2

with pairwise loss l_ij = W_ij * (f_i - f_j)^2. One step alternates exact
coordinate minimization in f (Gauss-Seidel over unlabeled elements) with the
exact box-constrained minimum in v, so the energy never increases. Labels
clamp f (1 positive, 0 negative) and anchor v at 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericError, ValidationError
from .models import FeatureTable, Qrels, Ranking

POSITIVE = "positive"
NEGATIVE = "negative"
PROBE_ID = "__probe__"

TOPK_POSITIVE_ONLY = "positive_only"
TOPK_NEGATIVE_ONLY = "negative_only"
TOPK_BOTH = "both"
_TOPK_MODES = (TOPK_POSITIVE_ONLY, TOPK_NEGATIVE_ONLY, TOPK_BOTH)


@dataclass(frozen=True)
class Label:
    shot_id: str
    polarity: str

    def __post_init__(self):
        if self.polarity not in (POSITIVE, NEGATIVE):
            raise ValidationError(f"polarity must be positive or negative, got {self.polarity!r}")


@dataclass(frozen=True)
class TopKStrategy:
    mode: str = TOPK_BOTH
    k: int = 100

    def __post_init__(self):
        if self.mode not in _TOPK_MODES:
            raise ValidationError(f"mode must be one of {_TOPK_MODES}, got {self.mode!r}")
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class CaafParams:
    a_probe: int = 20
    n_gallery: int = 1000
    beta: float | str = "auto"
    lam: float = 1.0
    batch: int = 5
    max_sweeps: int = 50
    tol: float = 1e-6

    def __post_init__(self):
        if self.a_probe <= 10:
            raise ValidationError(f"a_probe must be > 10, got {self.a_probe}")
        if self.n_gallery < self.a_probe:
            raise ValidationError(f"n_gallery {self.n_gallery} < a_probe {self.a_probe}")
        if isinstance(self.beta, str) and self.beta != "auto":
            raise ValidationError(f"beta must be a real or 'auto', got {self.beta!r}")
        if self.lam <= 0:
            raise ValidationError(f"lambda must be > 0, got {self.lam}")
        if self.batch < 1 or self.max_sweeps < 1 or self.tol <= 0:
            raise ValidationError("batch and max_sweeps must be >= 1, tol > 0")


def _label_map(labels: set[Label] | list[Label]) -> dict[str, str]:
    """Latest polarity wins when a shot is relabeled within one batch."""
    out: dict[str, str] = {}
    for lb in labels:
        out[lb.shot_id] = lb.polarity
    return out


def positional_scores(order: list[str]) -> list[tuple[str, float]]:
    """Strictly decreasing scores 1 - i/N preserving the given order."""
    n = len(order)
    return [(shot_id, 1.0 - i / n) for i, shot_id in enumerate(order)]


def topk_rearrange(ranking: Ranking, labels: set[Label], strategy: TopKStrategy) -> Ranking:
    """Positives first, unlabeled in place, negatives last; relative order kept."""
    label_map = _label_map(labels)
    known = set(ranking.shot_ids())
    unknown = set(label_map) - known
    if unknown:
        raise ValidationError(f"labels for shots not in ranking: {sorted(unknown)}")

    positives, middle, negatives = [], [], []
    for shot_id in ranking.shot_ids():
        polarity = label_map.get(shot_id)
        if polarity == POSITIVE and strategy.mode in (TOPK_POSITIVE_ONLY, TOPK_BOTH):
            positives.append(shot_id)
        elif polarity == NEGATIVE and strategy.mode in (TOPK_NEGATIVE_ONLY, TOPK_BOTH):
            negatives.append(shot_id)
        else:
            middle.append(shot_id)
    order = positives + middle + negatives
    return Ranking(ranking.topic_id, positional_scores(order), ranking.run_tag)


def topk_recommend(ranking: Ranking, labels: set[Label], k: int) -> list[str]:
    """The first k unlabeled shots in current ranking order."""
    labeled = set(_label_map(labels))
    out = [s for s in ranking.shot_ids() if s not in labeled]
    return out[:k]


@dataclass
class CaafState:
    """Probe + gallery elements of one feedback session; index 0 is the probe."""

    topic_id: str
    ids: list[str]
    f: np.ndarray
    v: np.ndarray
    v0: np.ndarray
    W: np.ndarray
    beta_resolved: float
    params: CaafParams
    labels: dict[str, str] = field(default_factory=dict)
    tail: list[str] = field(default_factory=list)
    run_tag: str = "caaf"

    @property
    def m(self) -> int:
        return len(self.ids)

    def copy(self) -> "CaafState":
        return replace(
            self,
            f=self.f.copy(),
            v=self.v.copy(),
            v0=self.v0.copy(),
            W=self.W,  # affinities are immutable after init
            labels=dict(self.labels),
            tail=list(self.tail),
        )

    def index_of(self, shot_id: str) -> int:
        try:
            return self.ids.index(shot_id, 1)
        except ValueError:
            raise ValidationError(f"shot {shot_id} not in CAAF gallery") from None


def pairwise_losses(state: CaafState) -> np.ndarray:
    diff = state.f[:, None] - state.f[None, :]
    return state.W * diff * diff


def caaf_init(ranking: Ranking, features: FeatureTable, params: CaafParams) -> CaafState:
    """Build the session state from the top-N of a ranking and its features."""
    if not ranking.entries:
        raise ValidationError(f"topic {ranking.topic_id}: empty ranking")
    gallery = ranking.entries[: params.n_gallery]
    tail = [s for s, _ in ranking.entries[params.n_gallery:]]
    missing = [s for s, _ in gallery if s not in features]
    if missing:
        raise ValidationError(f"missing features for shots: {missing}")

    vectors = np.stack([features[s] for s, _ in gallery])
    a = min(params.a_probe, len(gallery))
    probe = vectors[:a].mean(axis=0)
    norm = float(np.linalg.norm(probe))
    if norm == 0.0:
        raise NumericError("probe feature has zero norm")
    probe /= norm

    x = np.vstack([probe[None, :], vectors])
    w = np.clip(x @ x.T, 0.0, 1.0)
    np.fill_diagonal(w, 0.0)

    scores = np.array([score for _, score in gallery], dtype=np.float64)
    lo, hi = float(scores.min()), float(scores.max())
    f_gallery = (scores - lo) / (hi - lo) if hi > lo else np.ones_like(scores)
    f = np.concatenate([[1.0], f_gallery])

    v = np.concatenate([[1.0], np.full(len(gallery), 0.5)])
    state = CaafState(
        topic_id=ranking.topic_id,
        ids=[PROBE_ID] + [s for s, _ in gallery],
        f=f,
        v=v.copy(),
        v0=v.copy(),
        W=w,
        beta_resolved=0.0,
        params=params,
        tail=tail,
        run_tag=ranking.run_tag,
    )
    if params.beta == "auto":
        m = state.m
        losses = pairwise_losses(state)
        state.beta_resolved = float(losses.sum() / (m * (m - 1))) if m > 1 else 0.0
    else:
        state.beta_resolved = float(params.beta)
    return state


def caaf_energy(state: CaafState) -> float:
    """E = L + R; see module docstring."""
    m = state.m
    lam = state.params.lam
    reg = (lam / m) * float(np.sum((state.v - state.v0) ** 2))
    if m < 2:
        return reg
    losses = pairwise_losses(state) - state.beta_resolved
    vsum = state.v[:, None] + state.v[None, :]
    term = vsum * losses
    pair_sum = float(term.sum() - np.trace(term))
    return pair_sum / (m * m) + reg


def caaf_step(state: CaafState) -> CaafState:
    """One alternating minimization step: Gauss-Seidel in f, exact clip in v."""
    out = state.copy()
    m = out.m
    free = [i for i in range(1, m) if out.ids[i] not in out.labels]

    for _ in range(out.params.max_sweeps):
        max_change = 0.0
        for i in free:
            weights = (out.v[i] + out.v) * out.W[i]
            den = float(weights.sum())
            if den <= 0.0:
                continue
            new = float(weights @ out.f) / den
            max_change = max(max_change, abs(new - out.f[i]))
            out.f[i] = new
        if max_change < out.params.tol:
            break

    if m > 1:
        row_losses = pairwise_losses(out).sum(axis=1)
        grad = row_losses - out.beta_resolved * (m - 1)
        out.v = np.clip(out.v0 - grad / (out.params.lam * m), 0.0, 1.0)

    if not (np.all(np.isfinite(out.f)) and np.all(np.isfinite(out.v))):
        raise NumericError("non-finite f or v after CAAF step")
    return out


def apply_label(state: CaafState, label: Label) -> CaafState:
    """Clamp one gallery element; relabeling overwrites."""
    out = state.copy()
    i = out.index_of(label.shot_id)
    out.labels[label.shot_id] = label.polarity
    out.v0[i] = 1.0
    out.v[i] = 1.0
    out.f[i] = 1.0 if label.polarity == POSITIVE else 0.0
    return out


def caaf_recommend(state: CaafState, batch: int) -> list[str]:
    """Unlabeled gallery elements with highest confidence v; ties by higher f, then id."""
    if batch < 1:
        raise ValidationError(f"batch must be >= 1, got {batch}")
    unlabeled = [i for i in range(1, state.m) if state.ids[i] not in state.labels]
    unlabeled.sort(key=lambda i: (-state.v[i], -state.f[i], state.ids[i]))
    return [state.ids[i] for i in unlabeled[:batch]]


def caaf_ranking(state: CaafState) -> Ranking:
    """Gallery by descending f, then the untouched tail.

    Ties keep original order, except that a label clamp wins its tie: a
    positive at f=1 outranks an unlabeled element that also sits at 1, and a
    negative at f=0 sinks below an unlabeled 0.
    """

    def tie_class(i: int) -> int:
        polarity = state.labels.get(state.ids[i])
        return {POSITIVE: 0, None: 1, NEGATIVE: 2}[polarity]

    order = sorted(range(1, state.m), key=lambda i: (-state.f[i], tie_class(i)))
    shot_order = [state.ids[i] for i in order] + list(state.tail)
    return Ranking(state.topic_id, positional_scores(shot_order), state.run_tag)


def oracle_annotate(qrels: Qrels, topic_id: str, shots: list[str]) -> set[Label]:
    """Simulated annotator: positive iff qrels marks the shot relevant."""
    return {
        Label(shot_id, POSITIVE if qrels.relevance(topic_id, shot_id) == 1 else NEGATIVE)
        for shot_id in shots
    }


def simulate_topk(
    ranking: Ranking,
    qrels: Qrels,
    strategy: TopKStrategy,
    rounds: int = 1,
) -> tuple[Ranking, list[dict], set[Label]]:
    """Oracle-driven Top-K rounds; each round labels the next k unlabeled shots."""
    current = ranking
    labels: set[Label] = set()
    history: list[dict] = []
    for round_no in range(1, rounds + 1):
        batch = topk_recommend(current, labels, strategy.k)
        if not batch:
            break
        labels |= oracle_annotate(qrels, ranking.topic_id, batch)
        current = topk_rearrange(current, labels, strategy)
        history.append({"round": round_no, "labels_used": len(labels)})
    return current, history, labels


def simulate_caaf(
    ranking: Ranking,
    qrels: Qrels,
    features: FeatureTable,
    params: CaafParams,
    rounds: int = 5,
) -> tuple[Ranking, list[dict], CaafState]:
    """Oracle-driven CAAF rounds: recommend, label, one step, re-rank."""
    state = caaf_init(ranking, features, params)
    current = caaf_ranking(state)
    history: list[dict] = []
    for round_no in range(1, rounds + 1):
        batch = caaf_recommend(state, params.batch)
        if not batch:
            break
        for label in sorted(oracle_annotate(qrels, ranking.topic_id, batch), key=lambda l: l.shot_id):
            state = apply_label(state, label)
        state = caaf_step(state)
        current = caaf_ranking(state)
        history.append({"round": round_no, "labels_used": len(state.labels)})
    return current, history, state

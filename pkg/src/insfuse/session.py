"""Replayable feedback sessions shared by the HTTP service and simulations.

A session is a pure function of (base ranking, strategy, ordered label
batches): replaying the same batches through `FeedbackSession` reproduces the
identical ranking version history, which is what the service's replay
guarantee rests on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .feedback import (
    CaafParams,
    CaafState,
    Label,
    TopKStrategy,
    apply_label,
    caaf_init,
    caaf_ranking,
    caaf_recommend,
    caaf_step,
    topk_rearrange,
    topk_recommend,
)
from .models import FeatureTable, Ranking

STRATEGY_TOPK = "topk"
STRATEGY_CAAF = "caaf"


@dataclass
class FeedbackSession:
    kind: str
    base: Ranking
    current: Ranking
    topk: TopKStrategy | None = None
    caaf_params: CaafParams | None = None
    caaf_state: CaafState | None = None
    labels: dict[str, str] = field(default_factory=dict)

    @classmethod
    def start(
        cls,
        kind: str,
        ranking: Ranking,
        topk: TopKStrategy | None = None,
        caaf_params: CaafParams | None = None,
        features: FeatureTable | None = None,
    ) -> "FeedbackSession":
        if kind == STRATEGY_TOPK:
            return cls(kind=kind, base=ranking, current=ranking, topk=topk or TopKStrategy())
        if kind == STRATEGY_CAAF:
            params = caaf_params or CaafParams()
            if features is None:
                raise ValidationError("caaf strategy requires a feature table")
            state = caaf_init(ranking, features, params)
            return cls(
                kind=kind,
                base=ranking,
                current=caaf_ranking(state),
                caaf_params=params,
                caaf_state=state,
            )
        raise ValidationError(f"unknown strategy kind {kind!r}")

    def recommendations(self) -> list[str]:
        if self.kind == STRATEGY_TOPK:
            labels = {Label(s, p) for s, p in self.labels.items()}
            return topk_recommend(self.current, labels, self.topk.k)
        return caaf_recommend(self.caaf_state, self.caaf_params.batch)

    def known_shot(self, shot_id: str) -> bool:
        if self.kind == STRATEGY_TOPK:
            return shot_id in set(self.base.shot_ids())
        return shot_id in self.caaf_state.ids[1:]

    def post(self, batch: list[Label]) -> tuple[list[Label], list[Label]]:
        """Apply one label batch; returns (accepted, rejected).

        Duplicate (shot, polarity) pairs already in effect are deduplicated:
        a batch with no effective labels leaves the ranking untouched.
        """
        accepted: list[Label] = []
        rejected: list[Label] = []
        for label in batch:
            (accepted if self.known_shot(label.shot_id) else rejected).append(label)

        effective = [lb for lb in accepted if self.labels.get(lb.shot_id) != lb.polarity]
        for lb in effective:
            self.labels[lb.shot_id] = lb.polarity

        if not effective:
            return accepted, rejected

        if self.kind == STRATEGY_TOPK:
            labels = {Label(s, p) for s, p in self.labels.items()}
            self.current = topk_rearrange(self.current, labels, self.topk)
        else:
            state = self.caaf_state
            for lb in effective:
                state = apply_label(state, lb)
            state = caaf_step(state)
            self.caaf_state = state
            self.current = caaf_ranking(state)
        return accepted, rejected


def replay(
    kind: str,
    ranking: Ranking,
    batches: list[list[Label]],
    topk: TopKStrategy | None = None,
    caaf_params: CaafParams | None = None,
    features: FeatureTable | None = None,
) -> list[Ranking]:
    """Ranking after each batch; index 0 is the pre-feedback ranking."""
    session = FeedbackSession.start(kind, ranking, topk=topk, caaf_params=caaf_params, features=features)
    history = [session.current]
    for batch in batches:
        session.post(batch)
        history.append(session.current)
    return history

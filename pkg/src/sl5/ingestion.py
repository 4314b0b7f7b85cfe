"""Staging-isolation pipeline for external data.

External data lands Staged, and only screening (Pass) or an explicit human
review (ReleaseApproved) can move it toward Released.  There is deliberately
no edge from Staged or Quarantined to Released.  Every transition appends one
record to the store's audit log, and transitions use compare-and-swap
semantics: an operation holding a stale item snapshot fails with WrongState.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .errors import ParseError, UnresolvedReference, UnresolvedReviewer, WrongState


class Modality(str, Enum):
    TEXT = "Text"
    IMAGE = "Image"
    AUDIO = "Audio"
    VIDEO = "Video"
    CODE = "Code"
    STRUCTURED = "Structured"


class RiskTier(str, Enum):
    STANDARD = "Standard"
    ELEVATED = "Elevated"


class ItemState(str, Enum):
    STAGED = "Staged"
    CLEARED = "Cleared"
    QUARANTINED = "Quarantined"
    UNDER_REVIEW = "UnderReview"
    RELEASED = "Released"
    REJECTED = "Rejected"


class ScreenOutcome(str, Enum):
    PASS = "Pass"
    FLAG = "Flag"
    ERROR = "Error"


class ReviewOutcome(str, Enum):
    RELEASE_APPROVED = "ReleaseApproved"
    REJECT_CONFIRMED = "RejectConfirmed"


@dataclass(frozen=True)
class DataItem:
    id: str
    modality: Modality
    risk_tier: RiskTier
    state: ItemState
    screened_with: str | None
    provenance: str
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScreeningVerdict:
    item: str
    detector_version: str
    outcome: ScreenOutcome
    signals: tuple[str, ...]

    def __post_init__(self):
        if self.outcome == ScreenOutcome.PASS and self.signals:
            raise ValueError("Pass verdicts carry no signals")


@dataclass(frozen=True)
class ReviewDecision:
    item: str
    reviewer: str
    outcome: ReviewOutcome
    rationale: str


@dataclass(frozen=True)
class TransitionRecord:
    item: str
    from_state: str
    to_state: str
    op: str
    actor: str
    ts: int

    def to_dict(self) -> dict:
        return {
            "item": self.item,
            "from": self.from_state,
            "to": self.to_state,
            "op": self.op,
            "actor": self.actor,
            "ts": self.ts,
        }


# detector(item, strict) -> (outcome, signals)
Detector = Callable[[DataItem, bool], tuple[ScreenOutcome, tuple[str, ...]]]


@dataclass(frozen=True)
class LabelDetector:
    """Fixture detector: verdicts derive from declared labels, not content.

    Items whose labels intersect flag_labels are flagged; error_labels force a
    processing error; strict_labels flag only in strict mode (Elevated tier).
    """

    flag_labels: frozenset[str] = frozenset({"malicious"})
    error_labels: frozenset[str] = frozenset({"unparseable"})
    strict_labels: frozenset[str] = frozenset({"suspicious"})

    def __call__(self, item: DataItem, strict: bool) -> tuple[ScreenOutcome, tuple[str, ...]]:
        labels = set(item.labels)
        errors = sorted(labels & self.error_labels)
        if errors:
            return ScreenOutcome.ERROR, tuple(errors)
        hits = labels & self.flag_labels
        if strict:
            hits |= labels & self.strict_labels
        if hits:
            return ScreenOutcome.FLAG, tuple(sorted(hits))
        return ScreenOutcome.PASS, ()


def version_key(label: str) -> tuple:
    """Natural ordering for version labels: digit runs compare numerically."""
    return tuple(
        (0, int(chunk)) if chunk.isdigit() else (1, chunk)
        for chunk in re.split(r"(\d+)", label)
        if chunk != ""
    )


def rescan_candidates(items: Iterable[DataItem], current_version: str) -> list[str]:
    """Released items screened by a detector older than current_version, in id order."""
    current = version_key(current_version)
    return sorted(
        item.id
        for item in items
        if item.state == ItemState.RELEASED
        and item.screened_with is not None
        and version_key(item.screened_with) < current
    )


class StagingStore:
    """Holds current item states plus the append-only audit trail.

    Operations accept an item snapshot; if the snapshot's state no longer
    matches the stored state the operation fails with WrongState rather than
    silently retrying.
    """

    def __init__(self):
        self._items: dict[str, DataItem] = {}
        self._log: list[TransitionRecord] = []
        self._verdicts: list[ScreeningVerdict] = []
        self._reviews: list[ReviewDecision] = []
        self._seq = 0

    @property
    def items(self) -> dict[str, DataItem]:
        return dict(self._items)

    @property
    def log(self) -> tuple[TransitionRecord, ...]:
        return tuple(self._log)

    @property
    def verdicts(self) -> tuple[ScreeningVerdict, ...]:
        return tuple(self._verdicts)

    @property
    def reviews(self) -> tuple[ReviewDecision, ...]:
        return tuple(self._reviews)

    def get(self, item_id: str) -> DataItem:
        item = self._items.get(item_id)
        if item is None:
            raise UnresolvedReference(f"unknown item {item_id}")
        return item

    def _fresh(self, item: DataItem, allowed: tuple[ItemState, ...], op: str) -> DataItem:
        current = self.get(item.id)
        if current.state != item.state:
            raise WrongState(
                f"{op}: stale snapshot of {item.id} "
                f"(saw {item.state.value}, store has {current.state.value})"
            )
        if current.state not in allowed:
            raise WrongState(
                f"{op}: item {item.id} is {current.state.value}; "
                f"requires {' or '.join(s.value for s in allowed)}"
            )
        return current

    def _commit(self, item: DataItem, new_state: ItemState, op: str, actor: str,
                ts: int, **changes) -> DataItem:
        updated = replace(item, state=new_state, **changes)
        self._items[item.id] = updated
        self._log.append(
            TransitionRecord(
                item=item.id,
                from_state=item.state.value,
                to_state=new_state.value,
                op=op,
                actor=actor,
                ts=ts,
            )
        )
        return updated

    def ingest(
        self,
        provenance: str,
        modality: Modality,
        risk_tier: RiskTier,
        labels: tuple[str, ...] = (),
        item_id: str | None = None,
        ts: int = 0,
        actor: str = "pipeline",
    ) -> DataItem:
        """Receive external data into staging; never anywhere else."""
        if item_id is None:
            self._seq += 1
            item_id = f"item-{self._seq:04d}"
        if item_id in self._items:
            raise ValueError(f"item id {item_id!r} already ingested")
        item = DataItem(
            id=item_id,
            modality=modality,
            risk_tier=risk_tier,
            state=ItemState.STAGED,
            screened_with=None,
            provenance=provenance,
            labels=tuple(labels),
        )
        self._items[item_id] = item
        self._log.append(
            TransitionRecord(
                item=item_id,
                from_state="",
                to_state=ItemState.STAGED.value,
                op="ingest",
                actor=actor,
                ts=ts,
            )
        )
        return item

    def screen(
        self,
        item: DataItem,
        detector: Detector,
        version: str,
        ts: int = 0,
        actor: str = "detector",
    ) -> tuple[DataItem, ScreeningVerdict]:
        """Automated screening; also the rescan entry point for Released items."""
        current = self._fresh(item, (ItemState.STAGED, ItemState.RELEASED), "screen")
        strict = current.risk_tier == RiskTier.ELEVATED
        outcome, signals = detector(current, strict)
        verdict = ScreeningVerdict(
            item=current.id,
            detector_version=version,
            outcome=outcome,
            signals=tuple(signals),
        )
        self._verdicts.append(verdict)
        new_state = (
            ItemState.CLEARED if outcome == ScreenOutcome.PASS else ItemState.QUARANTINED
        )
        updated = self._commit(
            current, new_state, "screen", actor, ts, screened_with=version
        )
        return updated, verdict

    def open_review(
        self, item: DataItem, reviewer: str, ts: int = 0, actor: str | None = None
    ) -> DataItem:
        """Mark a quarantined item as under review so assignment is observable."""
        current = self._fresh(item, (ItemState.QUARANTINED,), "open_review")
        return self._commit(
            current, ItemState.UNDER_REVIEW, "open_review", actor or reviewer, ts
        )

    def review(
        self,
        item: DataItem,
        decision: ReviewDecision,
        people: Mapping[str, object],
        ts: int = 0,
    ) -> DataItem:
        """Human disposition of quarantined data: clear it or reject it."""
        if decision.item != item.id:
            raise ValueError(
                f"review decision for {decision.item!r} applied to {item.id!r}"
            )
        current = self._fresh(
            item, (ItemState.QUARANTINED, ItemState.UNDER_REVIEW), "review"
        )
        if decision.reviewer not in people:
            raise UnresolvedReviewer(f"unknown reviewer {decision.reviewer}")
        self._reviews.append(decision)
        new_state = (
            ItemState.CLEARED
            if decision.outcome == ReviewOutcome.RELEASE_APPROVED
            else ItemState.REJECTED
        )
        return self._commit(current, new_state, "review", decision.reviewer, ts)

    def release(self, item: DataItem, ts: int = 0, actor: str = "pipeline") -> DataItem:
        """The only operation that exposes an item to internal consumers."""
        current = self._fresh(item, (ItemState.CLEARED,), "release")
        return self._commit(current, ItemState.RELEASED, "release", actor, ts)

    def rescan_candidates(self, current_version: str) -> list[str]:
        return rescan_candidates(self._items.values(), current_version)

    def log_jsonl(self) -> str:
        return "".join(
            json.dumps(rec.to_dict(), sort_keys=True) + "\n" for rec in self._log
        )


def load_items_jsonl(src: str | Path) -> list[dict]:
    """Fixture corpus reader: one item per line with id/modality/risk_tier/labels/provenance."""
    out = []
    source = str(src)
    with open(src, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: invalid JSON: {exc}", source=source)
            unknown = set(rec) - {"id", "modality", "risk_tier", "labels", "provenance"}
            if unknown:
                raise ParseError(
                    f"line {lineno}: unknown keys {sorted(unknown)}", source=source
                )
            try:
                out.append(
                    {
                        "id": rec["id"],
                        "modality": Modality(rec["modality"]),
                        "risk_tier": RiskTier(rec["risk_tier"]),
                        "labels": tuple(rec.get("labels", [])),
                        "provenance": rec["provenance"],
                    }
                )
            except (KeyError, ValueError) as exc:
                raise ParseError(f"line {lineno}: {exc}", source=source) from exc
    return out

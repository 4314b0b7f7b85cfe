"""Sensitivity-tier personnel model: vetting clocks, Red Zone entry decisions,
and dual authorization for weight operations.

Decision functions are pure: they read an immutable person directory snapshot
and return Allow/Deny values whose reasons carry control ids.  Nothing here
mutates shared state.
"""

from __future__ import annotations

import calendar
import json
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import ParseError, UnresolvedReference
from .findings import Finding, Severity, sort_findings


class VettingState(str, Enum):
    CLEARED = "Cleared"
    PROVISIONAL = "Provisional"
    SUSPENDED = "Suspended"


class AgreementKind(str, Enum):
    NDA = "NDA"
    MONITORING_ACK = "MonitoringAck"
    FOREIGN_CONTACT_REPORTING = "ForeignContactReporting"
    DUAL_AUTH_ACK = "DualAuthAck"
    CUSTODIAN_PROTOCOL = "CustodianProtocol"
    POST_EMPLOYMENT_RESTRICTION = "PostEmploymentRestriction"


@dataclass(frozen=True)
class AgreementRecord:
    kind: AgreementKind
    signed: date


@dataclass(frozen=True)
class Person:
    id: str
    senl: int
    custodian: bool
    last_screen: date
    vetting_state: VettingState
    agreements: frozenset[AgreementRecord]

    def __post_init__(self):
        if not 1 <= self.senl <= 5:
            raise ValueError(f"person {self.id!r}: senl must be 1..5, got {self.senl}")
        if self.custodian and self.senl != 5:
            raise ValueError(f"person {self.id!r}: custodian requires senl=5")

    @property
    def cleared(self) -> bool:
        return self.vetting_state == VettingState.CLEARED

    @property
    def cleared_custodian(self) -> bool:
        return self.cleared and self.senl == 5 and self.custodian


@dataclass(frozen=True)
class RescreenSchedule:
    """Months between rescreens per tier; endpoints fixed at 18 and 13."""

    months_by_senl: Mapping[int, int]

    def __post_init__(self):
        m = dict(self.months_by_senl)
        if sorted(m) != [1, 2, 3, 4, 5]:
            raise ValueError("schedule must cover tiers 1..5 exactly")
        if any(v <= 0 for v in m.values()):
            raise ValueError("schedule months must be positive")
        if m[1] != 18 or m[5] != 13:
            raise ValueError("schedule endpoints must be 18 (tier 1) and 13 (tier 5)")
        if any(m[t + 1] > m[t] for t in range(1, 5)):
            raise ValueError("schedule must be monotone nonincreasing in tier")
        object.__setattr__(self, "months_by_senl", dict(m))


# Interior tiers are configurable; these defaults interpolate between the
# fixed endpoints.
DEFAULT_SCHEDULE = RescreenSchedule({1: 18, 2: 17, 3: 16, 4: 14, 5: 13})


@dataclass(frozen=True)
class EntryRequest:
    zone: str
    present: tuple[str, ...]
    escort_pairs: Mapping[str, str]
    via_entry_point: str
    timestamp: int


@dataclass(frozen=True)
class WeightOpRequest:
    op_id: str
    kind: str
    approvers: frozenset[str]
    timestamp: int


@dataclass(frozen=True)
class Reason:
    control: str
    clause: str
    detail: str


@dataclass(frozen=True)
class Decision:
    allowed: bool
    reasons: tuple[Reason, ...] = ()

    def __post_init__(self):
        if self.allowed and self.reasons:
            raise ValueError("Allow carries no reasons")
        if not self.allowed and not self.reasons:
            raise ValueError("Deny carries at least one reason")


ALLOW = Decision(allowed=True)


def add_months(day: date, months: int) -> date:
    """Add calendar months one at a time, clamping the day to each month's length."""
    y, m, d = day.year, day.month, day.day
    for _ in range(months):
        m += 1
        if m == 13:
            y, m = y + 1, 1
        d = min(d, calendar.monthrange(y, m)[1])
    return date(y, m, d)


def rescreen_due(person: Person, schedule: RescreenSchedule, today: date) -> bool:
    """True once today is strictly past the tier's rescreen deadline."""
    deadline = add_months(person.last_screen, schedule.months_by_senl[person.senl])
    return today > deadline


def apply_vetting_tick(person: Person, schedule: RescreenSchedule, today: date) -> Person:
    """Suspend anyone overdue for rescreening; suspension never auto-lifts."""
    if person.vetting_state == VettingState.SUSPENDED:
        return person
    if rescreen_due(person, schedule, today):
        return replace(person, vetting_state=VettingState.SUSPENDED)
    return person


def _resolve(people: Mapping[str, Person], pid: str) -> Person:
    person = people.get(pid)
    if person is None:
        raise UnresolvedReference(f"unknown person {pid}")
    return person


def check_entry(req: EntryRequest, people: Mapping[str, Person], zone) -> Decision:
    """Red Zone entry decision over the post-entry occupancy.

    Clauses, each contributing one Deny reason when it fails:
      escort      everyone below SenL-5 (or not Cleared) is escorted by a
                  Cleared SenL-5 person who is themselves present
      two-person  at least two Cleared SenL-5 people present
      vestibule   the entry point has vestibule, MFA and anti-tailgating
      suspended   nobody present is Suspended
    Black zones always Allow.
    """
    from .topology import ZoneKind  # local import keeps module layering flat

    if zone.kind == ZoneKind.BLACK:
        return ALLOW

    present = [_resolve(people, pid) for pid in req.present]
    by_id = {p.id: p for p in present}
    entry_point = next(
        (ep for ep in zone.entry_points if ep.id == req.via_entry_point), None
    )
    if entry_point is None:
        raise UnresolvedReference(
            f"entry point {req.via_entry_point} not in zone {zone.id}"
        )

    reasons: list[Reason] = []

    unescorted = []
    for p in present:
        if p.senl == 5 and p.cleared:
            continue
        escort_id = req.escort_pairs.get(p.id)
        escort = by_id.get(escort_id) if escort_id else None
        if escort is None or escort.senl != 5 or not escort.cleared:
            unescorted.append(p.id)
    if unescorted:
        reasons.append(
            Reason(
                control="PE-2(3)",
                clause="escort",
                detail=f"no continuous SenL-5 escort for: {', '.join(sorted(unescorted))}",
            )
        )

    cleared_senl5 = sum(1 for p in present if p.senl == 5 and p.cleared)
    if cleared_senl5 < 2:
        reasons.append(
            Reason(
                control="PE-2(3)",
                clause="two-person",
                detail=f"{cleared_senl5} Cleared SenL-5 present; two-person integrity requires 2",
            )
        )

    if not entry_point.conforming:
        reasons.append(
            Reason(
                control="PE-3(8)",
                clause="vestibule",
                detail=f"entry point {entry_point.id} lacks vestibule/MFA/anti-tailgating",
            )
        )

    suspended = sorted(p.id for p in present if p.vetting_state == VettingState.SUSPENDED)
    if suspended:
        reasons.append(
            Reason(
                control="PM-12",
                clause="suspended",
                detail=f"suspended person(s) present: {', '.join(suspended)}",
            )
        )

    if reasons:
        return Decision(allowed=False, reasons=tuple(reasons))
    return ALLOW


def check_weight_op(
    req: WeightOpRequest,
    people: Mapping[str, Person],
    schedule: RescreenSchedule | None = None,
    today: date | None = None,
) -> Decision:
    """Dual-authorization decision for privileged weight operations.

    Allow requires >=2 distinct approvers, at least one Cleared SenL-5
    custodian among them, and every approver Cleared (and, when a date is
    supplied, not overdue for rescreening).
    """
    approvers = [_resolve(people, pid) for pid in sorted(req.approvers)]
    reasons: list[Reason] = []

    if len(approvers) < 2:
        reasons.append(
            Reason(
                control="AC-3(2)",
                clause="cardinality",
                detail=f"{len(approvers)} approver(s); dual authorization requires 2",
            )
        )

    if not any(p.cleared_custodian for p in approvers):
        reasons.append(
            Reason(
                control="AC-3(2)",
                clause="custodian",
                detail="no Cleared SenL-5 custodian among approvers",
            )
        )

    not_cleared = sorted(p.id for p in approvers if not p.cleared)
    if not_cleared:
        reasons.append(
            Reason(
                control="AC-3(2)",
                clause="approver-standing",
                detail=f"approver(s) not Cleared: {', '.join(not_cleared)}",
            )
        )

    if schedule is not None and today is not None:
        overdue = sorted(
            p.id for p in approvers if rescreen_due(p, schedule, today)
        )
        if overdue:
            reasons.append(
                Reason(
                    control="PS-3",
                    clause="rescreen-overdue",
                    detail=f"approver(s) overdue for rescreening: {', '.join(overdue)}",
                )
            )

    if reasons:
        return Decision(allowed=False, reasons=tuple(reasons))
    return ALLOW


# Agreements each tier must hold before provisioning (cumulative).
REQUIRED_AGREEMENTS: dict[int, frozenset[AgreementKind]] = {
    1: frozenset({AgreementKind.NDA, AgreementKind.MONITORING_ACK}),
    2: frozenset({AgreementKind.NDA, AgreementKind.MONITORING_ACK}),
    3: frozenset(
        {
            AgreementKind.NDA,
            AgreementKind.MONITORING_ACK,
            AgreementKind.FOREIGN_CONTACT_REPORTING,
        }
    ),
    4: frozenset(
        {
            AgreementKind.NDA,
            AgreementKind.MONITORING_ACK,
            AgreementKind.FOREIGN_CONTACT_REPORTING,
            AgreementKind.DUAL_AUTH_ACK,
        }
    ),
    5: frozenset(
        {
            AgreementKind.NDA,
            AgreementKind.MONITORING_ACK,
            AgreementKind.FOREIGN_CONTACT_REPORTING,
            AgreementKind.DUAL_AUTH_ACK,
            AgreementKind.CUSTODIAN_PROTOCOL,
            AgreementKind.POST_EMPLOYMENT_RESTRICTION,
        }
    ),
}


def agreement_findings(people: Mapping[str, Person]) -> list[Finding]:
    """Load-time check: each person holds every agreement their tier requires."""
    out = []
    for person in people.values():
        held = {a.kind for a in person.agreements}
        missing = sorted(k.value for k in REQUIRED_AGREEMENTS[person.senl] - held)
        if missing:
            out.append(
                Finding(
                    control="PS-6",
                    severity=Severity.ERROR,
                    subject=person.id,
                    message=(
                        f"person '{person.id}' (SenL-{person.senl}) missing "
                        f"agreement(s): {', '.join(missing)}"
                    ),
                    related=tuple(missing),
                )
            )
    return sort_findings(out)


@dataclass(frozen=True)
class PersonnelFile:
    people: dict[str, Person]
    schedule: RescreenSchedule


def load_people(src: str | Path | dict) -> PersonnelFile:
    """Load a personnel directory; schedules violating monotonicity are rejected here."""
    source = None
    if isinstance(src, (str, Path)):
        source = str(src)
        with open(src, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", source=source) from exc
    else:
        doc = src
    if not isinstance(doc, dict):
        raise ParseError("personnel document must be a JSON object", source=source)
    unknown = set(doc) - {"people", "rescreen_months"}
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}", source=source)
    if "people" not in doc:
        raise ParseError("missing 'people'", source=source)

    schedule = DEFAULT_SCHEDULE
    if "rescreen_months" in doc:
        try:
            months = {int(k): int(v) for k, v in doc["rescreen_months"].items()}
            schedule = RescreenSchedule(months)
        except (ValueError, AttributeError) as exc:
            raise ParseError(f"rescreen_months: {exc}", source=source) from exc

    people: dict[str, Person] = {}
    for rec in doc["people"]:
        if not isinstance(rec, dict):
            raise ParseError(f"person record must be an object: {rec!r}", source=source)
        unknown = set(rec) - {
            "id",
            "senl",
            "custodian",
            "last_screen",
            "vetting_state",
            "agreements",
        }
        if unknown:
            raise ParseError(f"person: unknown keys {sorted(unknown)}", source=source)
        try:
            agreements = frozenset(
                AgreementRecord(
                    kind=AgreementKind(a["kind"]), signed=date.fromisoformat(a["signed"])
                )
                for a in rec.get("agreements", [])
            )
            person = Person(
                id=rec["id"],
                senl=rec["senl"],
                custodian=rec.get("custodian", False),
                last_screen=date.fromisoformat(rec["last_screen"]),
                vetting_state=VettingState(rec["vetting_state"]),
                agreements=agreements,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"person {rec.get('id')!r}: {exc}", source=source) from exc
        if person.id in people:
            raise ParseError(f"duplicate person id {person.id!r}", source=source)
        people[person.id] = person
    return PersonnelFile(people=people, schedule=schedule)

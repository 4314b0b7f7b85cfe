"""World model for declared SL5 configurations.

Facilities, zones, segments, weight enclaves and links, plus the static
structural checks a declared configuration must satisfy.  All values are
immutable after construction and every operation is a pure function, so a
Topology can be shared freely across concurrent callers.

Check keys and the control ids they report under:

    T-AIRGAP                 SC-7       no path joins an SL5 segment to an external one
    T-ENCLAVE-SINGLE-FACILITY SC-7(21)  an enclave never spans facilities
    T-ENCLAVE-RED-ZONE       SC-32      enclave host zone and member segments sit in Red zones
    T-ENCLAVE-NO-DIRECT-LINK SC-7(21)   no network path joins two different enclaves
    T-RULE-OF-TWO            SC-29      inter-facility links carry >=2 encryptors,
                                        >=2 suppliers, all validated to L3 or better
    T-PDS                    SC-8(5)    enclave traffic leaving its zone rides a PDS link
    T-REDZONE-ENTRY          PE-3(8)    Red-zone entries have vestibule, MFA, anti-tailgating
    T-NO-WIRELESS            SC-15(3)   Red zones carry no wireless/collaborative devices
    T-ALARM                  ICD-705    alarm response within the storage-mode limit
    T-SHIELD                 SA-4       enclave rack shielding covers the configured band
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import InvalidBand, ParseError, UnresolvedReference
from .findings import Finding, Severity, sort_findings


class ZoneKind(str, Enum):
    RED = "Red"
    BLACK = "Black"


class StorageMode(str, Enum):
    OPEN = "Open"
    CLOSED = "Closed"


class LinkScope(str, Enum):
    INTRA_FACILITY = "IntraFacility"
    INTER_FACILITY = "InterFacility"
    EXTERNAL = "External"


class ValidationLevel(str, Enum):
    BELOW = "Below"
    FIPS_140_3_L3 = "Fips140_3_L3"
    FIPS_140_3_L4 = "Fips140_3_L4"
    NSA_TYPE_1 = "NsaType1"


# Rank order used by the Rule-of-Two check: anything below L3 fails.
_LEVEL_RANK = {
    ValidationLevel.BELOW: 0,
    ValidationLevel.FIPS_140_3_L3: 1,
    ValidationLevel.FIPS_140_3_L4: 2,
    ValidationLevel.NSA_TYPE_1: 3,
}
_MIN_LEVEL_RANK = _LEVEL_RANK[ValidationLevel.FIPS_140_3_L3]


class SoftwarePolicy(str, Enum):
    DENY_ALL_PERMIT_BY_EXCEPTION = "DenyAllPermitByException"


@dataclass(frozen=True)
class EntryPoint:
    id: str
    vestibule: bool
    multi_factor: bool
    anti_tailgating_sensor: bool

    @property
    def conforming(self) -> bool:
        return self.vestibule and self.multi_factor and self.anti_tailgating_sensor


@dataclass(frozen=True)
class Zone:
    id: str
    facility: str
    kind: ZoneKind
    entry_points: tuple[EntryPoint, ...]
    alarm_response_minutes: int
    storage_mode: StorageMode
    rf_shielded: bool
    power_conditioned: bool
    wireless_devices_present: bool
    collaborative_devices_present: bool
    sound_group: int


@dataclass(frozen=True)
class Facility:
    id: str
    name: str
    zones: tuple[str, ...]
    network_segments: tuple[str, ...]


@dataclass(frozen=True)
class RackShielding:
    attenuation_db: float
    freq_low_hz: float
    freq_high_hz: float


@dataclass(frozen=True)
class BoundaryInterface:
    enclave: str
    outbound_cap_bytes_per_s: int
    hardware_enforced: bool
    pds_protected: bool


@dataclass(frozen=True)
class WeightEnclave:
    id: str
    facility: str
    host_zone: str
    boundary: BoundaryInterface
    rack_shielding: RackShielding | None
    software_policy: SoftwarePolicy
    interactive_coding_allowed: bool


@dataclass(frozen=True)
class Encryptor:
    supplier: str
    validation_level: ValidationLevel


@dataclass(frozen=True)
class NetworkLink:
    id: str
    endpoint_a: str
    endpoint_b: str
    scope: LinkScope
    encryptors: tuple[Encryptor, ...]
    pds_protected: bool


@dataclass(frozen=True)
class Segment:
    id: str
    facility: str
    zone: str
    member_of_enclave: str | None
    external: bool


@dataclass(frozen=True)
class Topology:
    facilities: dict[str, Facility]
    zones: dict[str, Zone]
    segments: dict[str, Segment]
    enclaves: dict[str, WeightEnclave]
    links: dict[str, NetworkLink]

    def enclave_segments(self, enclave_id: str) -> list[str]:
        return sorted(
            s.id for s in self.segments.values() if s.member_of_enclave == enclave_id
        )

    def adjacency(self) -> dict[str, list[tuple[str, str]]]:
        """segment id -> sorted [(link id, neighbour segment id)]."""
        adj: dict[str, list[tuple[str, str]]] = {s: [] for s in self.segments}
        for link in self.links.values():
            adj[link.endpoint_a].append((link.id, link.endpoint_b))
            adj[link.endpoint_b].append((link.id, link.endpoint_a))
        for entries in adj.values():
            entries.sort()
        return adj


@dataclass(frozen=True)
class ValidationConfig:
    """Knobs the standard leaves open; defaults follow its stated parameters."""

    require_rack_shielding: bool = False
    required_attenuation_db: float = 100.0
    required_band_low_hz: float = 1e3
    required_band_high_hz: float = 1e10


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

_TOP_KEYS = {"facilities", "zones", "segments", "enclaves", "links"}


def _strict(record: dict, required: dict, optional: dict, ctx: str, source) -> dict:
    """Pull typed fields out of a JSON record, rejecting unknown keys."""
    unknown = set(record) - set(required) - set(optional)
    if unknown:
        raise ParseError(f"{ctx}: unknown keys {sorted(unknown)}", source=source)
    missing = set(required) - set(record)
    if missing:
        raise ParseError(f"{ctx}: missing keys {sorted(missing)}", source=source)
    out = {}
    for key, conv in required.items():
        out[key] = _convert(record[key], conv, f"{ctx}.{key}", source)
    for key, conv in optional.items():
        if key in record:
            out[key] = _convert(record[key], conv, f"{ctx}.{key}", source)
    return out


def _convert(value, conv, ctx: str, source):
    try:
        return conv(value)
    except (ValueError, TypeError, KeyError) as exc:
        raise ParseError(f"{ctx}: {exc}", source=source) from exc


def _require_type(kind):
    def check(value):
        if not isinstance(value, kind):
            raise ValueError(f"expected {kind.__name__}, got {value!r}")
        return value

    return check


_str = _require_type(str)
_bool = _require_type(bool)
_list = _require_type(list)
_dict = _require_type(dict)


def _int(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"expected integer, got {value!r}")
    return value


def _num(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected number, got {value!r}")
    return float(value)


def _str_list(value):
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"expected list of strings, got {value!r}")
    return tuple(value)


def load_topology(src: str | Path | dict) -> Topology:
    """Build a Topology from a strict-schema JSON document.

    Unknown keys anywhere in the document are rejected so misspelled
    configuration never silently passes.  Referential integrity is checked
    here and again by validate_topology.
    """
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
        raise ParseError("topology document must be a JSON object", source=source)
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}", source=source)
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise ParseError(f"missing top-level keys {sorted(missing)}", source=source)

    facilities: dict[str, Facility] = {}
    for rec in doc["facilities"]:
        f = _strict(
            rec,
            {"id": _str, "name": _str, "zones": _str_list, "network_segments": _str_list},
            {},
            "facility",
            source,
        )
        if f["id"] in facilities:
            raise ParseError(f"duplicate facility id {f['id']!r}", source=source)
        facilities[f["id"]] = Facility(**f)

    zones: dict[str, Zone] = {}
    for rec in doc["zones"]:
        z = _strict(
            rec,
            {
                "id": _str,
                "facility": _str,
                "kind": ZoneKind,
                "entry_points": _list,
                "alarm_response_minutes": _int,
                "storage_mode": StorageMode,
                "rf_shielded": _bool,
                "power_conditioned": _bool,
                "wireless_devices_present": _bool,
                "collaborative_devices_present": _bool,
                "sound_group": _int,
            },
            {},
            "zone",
            source,
        )
        if z["id"] in zones:
            raise ParseError(f"duplicate zone id {z['id']!r}", source=source)
        if z["alarm_response_minutes"] < 0:
            raise ParseError(
                f"zone {z['id']!r}: alarm_response_minutes must be >= 0", source=source
            )
        eps = []
        seen_eps = set()
        for ep_rec in z["entry_points"]:
            ep = _strict(
                ep_rec,
                {
                    "id": _str,
                    "vestibule": _bool,
                    "multi_factor": _bool,
                    "anti_tailgating_sensor": _bool,
                },
                {},
                f"zone {z['id']} entry_point",
                source,
            )
            if ep["id"] in seen_eps:
                raise ParseError(
                    f"zone {z['id']!r}: duplicate entry point id {ep['id']!r}",
                    source=source,
                )
            seen_eps.add(ep["id"])
            eps.append(EntryPoint(**ep))
        z["entry_points"] = tuple(eps)
        zones[z["id"]] = Zone(**z)

    segments: dict[str, Segment] = {}
    for rec in doc["segments"]:
        s = _strict(
            rec,
            {"id": _str, "facility": _str, "zone": _str, "external": _bool},
            {"member_of_enclave": _str},
            "segment",
            source,
        )
        if s["id"] in segments:
            raise ParseError(f"duplicate segment id {s['id']!r}", source=source)
        s.setdefault("member_of_enclave", None)
        segments[s["id"]] = Segment(**s)

    enclaves: dict[str, WeightEnclave] = {}
    for rec in doc["enclaves"]:
        e = _strict(
            rec,
            {
                "id": _str,
                "facility": _str,
                "host_zone": _str,
                "boundary": _dict,
                "software_policy": SoftwarePolicy,
                "interactive_coding_allowed": _bool,
            },
            {"rack_shielding": _dict},
            "enclave",
            source,
        )
        if e["id"] in enclaves:
            raise ParseError(f"duplicate enclave id {e['id']!r}", source=source)
        b = _strict(
            e["boundary"],
            {
                "outbound_cap_bytes_per_s": _int,
                "hardware_enforced": _bool,
                "pds_protected": _bool,
            },
            {},
            f"enclave {e['id']} boundary",
            source,
        )
        if b["outbound_cap_bytes_per_s"] <= 0:
            raise ParseError(
                f"enclave {e['id']!r}: outbound_cap_bytes_per_s must be positive",
                source=source,
            )
        e["boundary"] = BoundaryInterface(enclave=e["id"], **b)
        shield = None
        if "rack_shielding" in e:
            sh = _strict(
                e["rack_shielding"],
                {"attenuation_db": _num, "freq_low_hz": _num, "freq_high_hz": _num},
                {},
                f"enclave {e['id']} rack_shielding",
                source,
            )
            if sh["attenuation_db"] <= 0 or sh["freq_low_hz"] <= 0 or sh["freq_high_hz"] <= 0:
                raise ParseError(
                    f"enclave {e['id']!r}: shielding parameters must be positive",
                    source=source,
                )
            if sh["freq_low_hz"] >= sh["freq_high_hz"]:
                raise ParseError(
                    f"enclave {e['id']!r}: shielding band low >= high", source=source
                )
            shield = RackShielding(**sh)
        e["rack_shielding"] = shield
        enclaves[e["id"]] = WeightEnclave(**e)

    links: dict[str, NetworkLink] = {}
    for rec in doc["links"]:
        l = _strict(
            rec,
            {
                "id": _str,
                "endpoint_a": _str,
                "endpoint_b": _str,
                "scope": LinkScope,
                "encryptors": _list,
                "pds_protected": _bool,
            },
            {},
            "link",
            source,
        )
        if l["id"] in links:
            raise ParseError(f"duplicate link id {l['id']!r}", source=source)
        if l["endpoint_a"] == l["endpoint_b"]:
            raise ParseError(f"link {l['id']!r}: endpoints must differ", source=source)
        encs = []
        for enc_rec in l["encryptors"]:
            enc = _strict(
                enc_rec,
                {"supplier": _str, "validation_level": ValidationLevel},
                {},
                f"link {l['id']} encryptor",
                source,
            )
            encs.append(Encryptor(**enc))
        l["encryptors"] = tuple(encs)
        links[l["id"]] = NetworkLink(**l)

    topo = Topology(
        facilities=facilities,
        zones=zones,
        segments=segments,
        enclaves=enclaves,
        links=links,
    )
    _check_references(topo)
    return topo


def _check_references(topo: Topology) -> None:
    """Raise UnresolvedReference on any dangling or inconsistent id."""
    for fac in topo.facilities.values():
        for zid in fac.zones:
            zone = topo.zones.get(zid)
            if zone is None:
                raise UnresolvedReference(f"facility {fac.id}: unknown zone {zid}")
            if zone.facility != fac.id:
                raise UnresolvedReference(
                    f"zone {zid} does not back-reference facility {fac.id}"
                )
        for sid in fac.network_segments:
            seg = topo.segments.get(sid)
            if seg is None:
                raise UnresolvedReference(f"facility {fac.id}: unknown segment {sid}")
            if seg.facility != fac.id:
                raise UnresolvedReference(
                    f"segment {sid} does not back-reference facility {fac.id}"
                )
    for zone in topo.zones.values():
        if zone.facility not in topo.facilities:
            raise UnresolvedReference(f"zone {zone.id}: unknown facility {zone.facility}")
        if zone.id not in topo.facilities[zone.facility].zones:
            raise UnresolvedReference(
                f"zone {zone.id} not listed by facility {zone.facility}"
            )
    for seg in topo.segments.values():
        if seg.facility not in topo.facilities:
            raise UnresolvedReference(f"segment {seg.id}: unknown facility {seg.facility}")
        if seg.zone not in topo.zones:
            raise UnresolvedReference(f"segment {seg.id}: unknown zone {seg.zone}")
        if seg.member_of_enclave is not None and seg.member_of_enclave not in topo.enclaves:
            raise UnresolvedReference(
                f"segment {seg.id}: unknown enclave {seg.member_of_enclave}"
            )
    for enc in topo.enclaves.values():
        if enc.facility not in topo.facilities:
            raise UnresolvedReference(f"enclave {enc.id}: unknown facility {enc.facility}")
        if enc.host_zone not in topo.zones:
            raise UnresolvedReference(f"enclave {enc.id}: unknown zone {enc.host_zone}")
    for link in topo.links.values():
        for end in (link.endpoint_a, link.endpoint_b):
            if end not in topo.segments:
                raise UnresolvedReference(f"link {link.id}: unknown segment {end}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def shielding_covers(
    shield: RackShielding,
    required_db: float,
    band_low_hz: float,
    band_high_hz: float,
) -> bool:
    """True iff the shield attenuates at least required_db across the whole band."""
    if band_low_hz >= band_high_hz:
        raise InvalidBand(f"band low {band_low_hz} >= high {band_high_hz}")
    return (
        shield.attenuation_db >= required_db
        and shield.freq_low_hz <= band_low_hz
        and shield.freq_high_hz >= band_high_hz
    )


def enclave_path(topo: Topology, a: str, b: str) -> list[str] | None:
    """Shortest link path between any segment of enclave a and any of b.

    BFS over the declared adjacency with sorted neighbour order, so the result
    is deterministic.  Returns the list of link ids, or None when the enclaves
    are not network-reachable from each other.
    """
    if a not in topo.enclaves:
        raise UnresolvedReference(f"unknown enclave {a}")
    if b not in topo.enclaves:
        raise UnresolvedReference(f"unknown enclave {b}")
    if a == b:
        raise ValueError("enclave_path requires two distinct enclaves")
    sources = topo.enclave_segments(a)
    targets = set(topo.enclave_segments(b))
    adj = topo.adjacency()
    prev: dict[str, tuple[str, str] | None] = {s: None for s in sources}
    queue = deque(sources)
    while queue:
        here = queue.popleft()
        if here in targets:
            path: list[str] = []
            node = here
            while prev[node] is not None:
                link_id, parent = prev[node]
                path.append(link_id)
                node = parent
            path.reverse()
            return path
        for link_id, neighbour in adj[here]:
            if neighbour not in prev:
                prev[neighbour] = (link_id, here)
                queue.append(neighbour)
    return None


def validate_topology(
    topo: Topology, config: ValidationConfig | None = None
) -> list[Finding]:
    """Run every structural check; one Finding per violation, sorted.

    An empty list means the declared configuration conforms.  Dangling ids
    raise UnresolvedReference instead of producing findings: malformed input
    is not a policy outcome.
    """
    config = config or ValidationConfig()
    _check_references(topo)
    findings: list[Finding] = []
    findings.extend(_check_airgap(topo))
    findings.extend(_check_enclave_placement(topo))
    findings.extend(_check_enclave_separation(topo))
    findings.extend(_check_rule_of_two(topo))
    findings.extend(_check_pds(topo))
    findings.extend(_check_red_zone_entries(topo))
    findings.extend(_check_no_wireless(topo))
    findings.extend(_check_alarm(topo))
    findings.extend(_check_shielding(topo, config))
    return sort_findings(findings)


def _check_airgap(topo: Topology) -> list[Finding]:
    # Reachability-based: indirection must not launder an external connection.
    adj = topo.adjacency()
    reachable_from: dict[str, list[str]] = {}
    for ext_id in sorted(s.id for s in topo.segments.values() if s.external):
        seen = {ext_id}
        queue = deque([ext_id])
        while queue:
            here = queue.popleft()
            for _, neighbour in adj[here]:
                if neighbour not in seen:
                    seen.add(neighbour)
                    queue.append(neighbour)
        for sid in seen:
            if not topo.segments[sid].external:
                reachable_from.setdefault(sid, []).append(ext_id)
    out = []
    for sid in sorted(reachable_from):
        sources = tuple(sorted(reachable_from[sid]))
        out.append(
            Finding(
                control="SC-7",
                severity=Severity.ERROR,
                subject=sid,
                message=(
                    f"[T-AIRGAP] SL5 segment '{sid}' is network-reachable from "
                    f"external segment(s) {', '.join(sources)}"
                ),
                related=sources,
            )
        )
    return out


def _check_enclave_placement(topo: Topology) -> list[Finding]:
    out = []
    for enc in sorted(topo.enclaves.values(), key=lambda e: e.id):
        members = topo.enclave_segments(enc.id)
        stray = tuple(
            s for s in members if topo.segments[s].facility != enc.facility
        )
        if topo.zones[enc.host_zone].facility != enc.facility or stray:
            out.append(
                Finding(
                    control="SC-7(21)",
                    severity=Severity.ERROR,
                    subject=enc.id,
                    message=(
                        f"[T-ENCLAVE-SINGLE-FACILITY] enclave '{enc.id}' references "
                        f"elements outside facility '{enc.facility}'"
                    ),
                    related=stray,
                )
            )
        bad_zone = tuple(
            s for s in members if topo.zones[topo.segments[s].zone].kind != ZoneKind.RED
        )
        if topo.zones[enc.host_zone].kind != ZoneKind.RED or bad_zone:
            out.append(
                Finding(
                    control="SC-32",
                    severity=Severity.ERROR,
                    subject=enc.id,
                    message=(
                        f"[T-ENCLAVE-RED-ZONE] enclave '{enc.id}' has host zone or "
                        f"member segments outside a Red zone"
                    ),
                    related=bad_zone,
                )
            )
    return out


def _check_enclave_separation(topo: Topology) -> list[Finding]:
    # Any network path between two enclaves defeats the physical-media
    # requirement, so the check is path-based, not edge-based.
    out = []
    ids = sorted(topo.enclaves)
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            path = enclave_path(topo, a, b)
            if path is not None:
                out.append(
                    Finding(
                        control="SC-7(21)",
                        severity=Severity.ERROR,
                        subject=f"{a}+{b}",
                        message=(
                            f"[T-ENCLAVE-NO-DIRECT-LINK] enclaves '{a}' and '{b}' are "
                            f"joined by a network path of {len(path)} link(s); "
                            f"inter-enclave transfer requires encrypted physical media"
                        ),
                        related=tuple(path),
                    )
                )
    return out


def _check_rule_of_two(topo: Topology) -> list[Finding]:
    out = []
    for link in sorted(topo.links.values(), key=lambda l: l.id):
        if link.scope != LinkScope.INTER_FACILITY:
            continue
        suppliers = {e.supplier for e in link.encryptors}
        weak = [
            e.supplier
            for e in link.encryptors
            if _LEVEL_RANK[e.validation_level] < _MIN_LEVEL_RANK
        ]
        problems = []
        if len(link.encryptors) < 2:
            problems.append(f"{len(link.encryptors)} encryptor(s) in series")
        if len(suppliers) < 2:
            problems.append(f"{len(suppliers)} distinct supplier(s)")
        if weak:
            problems.append(f"below-L3 validation from {', '.join(sorted(weak))}")
        if problems:
            out.append(
                Finding(
                    control="SC-29",
                    severity=Severity.ERROR,
                    subject=link.id,
                    message=(
                        f"[T-RULE-OF-TWO] inter-facility link '{link.id}': "
                        + "; ".join(problems)
                    ),
                    related=(link.id,),
                )
            )
    return out


def _pds_required(topo: Topology, link: NetworkLink) -> str | None:
    """Enclave id whose traffic the link carries out of its zone, if any."""
    for near, far in (
        (link.endpoint_a, link.endpoint_b),
        (link.endpoint_b, link.endpoint_a),
    ):
        seg = topo.segments[near]
        if seg.member_of_enclave is not None and topo.segments[far].zone != seg.zone:
            return seg.member_of_enclave
    return None


def _check_pds(topo: Topology) -> list[Finding]:
    out = []
    for link in sorted(topo.links.values(), key=lambda l: l.id):
        enclave = _pds_required(topo, link)
        if enclave is not None and not link.pds_protected:
            out.append(
                Finding(
                    control="SC-8(5)",
                    severity=Severity.ERROR,
                    subject=link.id,
                    message=(
                        f"[T-PDS] link '{link.id}' carries enclave '{enclave}' traffic "
                        f"across a zone boundary without PDS protection"
                    ),
                    related=(enclave,),
                )
            )
    return out


def _check_red_zone_entries(topo: Topology) -> list[Finding]:
    out = []
    for zone in sorted(topo.zones.values(), key=lambda z: z.id):
        if zone.kind != ZoneKind.RED:
            continue
        for ep in zone.entry_points:
            if not ep.conforming:
                lacking = [
                    name
                    for name, ok in (
                        ("vestibule", ep.vestibule),
                        ("multi-factor", ep.multi_factor),
                        ("anti-tailgating sensor", ep.anti_tailgating_sensor),
                    )
                    if not ok
                ]
                out.append(
                    Finding(
                        control="PE-3(8)",
                        severity=Severity.ERROR,
                        subject=f"{zone.id}:{ep.id}",
                        message=(
                            f"[T-REDZONE-ENTRY] Red zone '{zone.id}' entry '{ep.id}' "
                            f"lacks {', '.join(lacking)}"
                        ),
                        related=(zone.id, ep.id),
                    )
                )
    return out


def _check_no_wireless(topo: Topology) -> list[Finding]:
    out = []
    for zone in sorted(topo.zones.values(), key=lambda z: z.id):
        if zone.kind != ZoneKind.RED:
            continue
        present = [
            name
            for name, flag in (
                ("wireless", zone.wireless_devices_present),
                ("collaborative computing", zone.collaborative_devices_present),
            )
            if flag
        ]
        if present:
            out.append(
                Finding(
                    control="SC-15(3)",
                    severity=Severity.ERROR,
                    subject=zone.id,
                    message=(
                        f"[T-NO-WIRELESS] Red zone '{zone.id}' declares "
                        f"{' and '.join(present)} devices present"
                    ),
                    related=(zone.id,),
                )
            )
    return out


_ALARM_LIMIT = {StorageMode.OPEN: 5, StorageMode.CLOSED: 15}


def _check_alarm(topo: Topology) -> list[Finding]:
    out = []
    for zone in sorted(topo.zones.values(), key=lambda z: z.id):
        if zone.kind != ZoneKind.RED:
            continue
        limit = _ALARM_LIMIT[zone.storage_mode]
        if zone.alarm_response_minutes > limit:
            out.append(
                Finding(
                    control="ICD-705",
                    severity=Severity.ERROR,
                    subject=zone.id,
                    message=(
                        f"[T-ALARM] Red zone '{zone.id}' ({zone.storage_mode.value} "
                        f"storage) declares {zone.alarm_response_minutes} min alarm "
                        f"response; limit is {limit}"
                    ),
                    related=(zone.id,),
                )
            )
    return out


def _check_shielding(topo: Topology, config: ValidationConfig) -> list[Finding]:
    if not config.require_rack_shielding:
        return []
    out = []
    for enc in sorted(topo.enclaves.values(), key=lambda e: e.id):
        shield = enc.rack_shielding
        ok = shield is not None and shielding_covers(
            shield,
            config.required_attenuation_db,
            config.required_band_low_hz,
            config.required_band_high_hz,
        )
        if not ok:
            out.append(
                Finding(
                    control="SA-4",
                    severity=Severity.ERROR,
                    subject=enc.id,
                    message=(
                        f"[T-SHIELD] enclave '{enc.id}' rack shielding absent or below "
                        f"{config.required_attenuation_db:g} dB over "
                        f"{config.required_band_low_hz:g}-{config.required_band_high_hz:g} Hz"
                    ),
                    related=(enc.id,),
                )
            )
    return out

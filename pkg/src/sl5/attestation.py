"""Accelerator security state machine.

Models hardware identity, firmware signature enforcement, measured boot,
mutual attestation, host-access gating during encrypted ingress, and
task-sequence verification of submitted workloads.  Cryptography is modeled:
digests are opaque strings and signature validity is a declared fixture
attribute, because the point is the protocol structure, not the math.

A deliberate property throughout: host privilege is an input to several
operations and never changes any outcome.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    MutualAuthFailed,
    NoFirmware,
    NotBooted,
    ParseError,
    UnresolvedReference,
    UntrustedSigner,
)
from .findings import Violation


class HostAccess(str, Enum):
    GRANTED = "Granted"
    REVOKED = "Revoked"


@dataclass(frozen=True)
class FirmwareImage:
    digest: str
    signer: str
    version: str


@dataclass(frozen=True)
class Accelerator:
    id: str
    identity_fingerprint: str
    secure_element: frozenset[str]
    enclave: str | None
    tampered: bool = False
    firmware: FirmwareImage | None = None
    boot_measurements: tuple[str, ...] = ()
    host_access: HostAccess = HostAccess.REVOKED

    @property
    def booted(self) -> bool:
        return bool(self.boot_measurements)


@dataclass(frozen=True)
class SignedOperation:
    op_name: str
    digest: str
    signature_valid: bool
    signer: str


@dataclass(frozen=True)
class AttestationReport:
    device: str
    firmware_digest: str
    measurements: tuple[str, ...]
    nonce: str
    signature_valid: bool

    def digest(self) -> str:
        payload = json.dumps(
            {
                "device": self.device,
                "firmware": self.firmware_digest,
                "measurements": list(self.measurements),
                "nonce": self.nonce,
                "sig": self.signature_valid,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _measure(previous: str, stage: str) -> str:
    return hashlib.sha256(f"{previous}:{stage}".encode("utf-8")).hexdigest()


_BOOT_STAGES = ("bootrom", "runtime")


def install_firmware(
    acc: Accelerator,
    img: FirmwareImage,
    trusted_signers: frozenset[str] | set[str],
    host_privileged: bool,
) -> Accelerator:
    """Install firmware iff the signer is trusted.

    The decision is identical whether or not the host is privileged: firmware
    verification is anchored in the device, not the host.
    """
    if img.signer not in trusted_signers:
        raise UntrustedSigner(
            f"device {acc.id}: firmware signer {img.signer!r} not trusted "
            f"(host_privileged={host_privileged} has no effect)"
        )
    return replace(acc, firmware=img)


def boot(acc: Accelerator) -> Accelerator:
    """Measured boot: measurement chain starts at the firmware digest."""
    if acc.firmware is None:
        raise NoFirmware(f"device {acc.id} has no installed firmware")
    measurements = [acc.firmware.digest]
    for stage in _BOOT_STAGES:
        measurements.append(_measure(measurements[-1], stage))
    return replace(
        acc,
        boot_measurements=tuple(measurements),
        host_access=HostAccess.GRANTED,
    )


def attest(acc: Accelerator, nonce: str) -> AttestationReport:
    """Produce a signed report over identity, firmware and boot measurements."""
    if not acc.booted:
        raise NotBooted(f"device {acc.id} has not booted")
    return AttestationReport(
        device=acc.identity_fingerprint,
        firmware_digest=acc.firmware.digest,
        measurements=acc.boot_measurements,
        nonce=nonce,
        signature_valid=not acc.tampered,
    )


def verify_report(
    report: AttestationReport,
    expected_fingerprint: str,
    expected_firmware: str,
    nonce: str,
) -> bool:
    """Four-clause conjunction; the host is not trusted anywhere in it."""
    return (
        report.signature_valid
        and report.device == expected_fingerprint
        and report.firmware_digest == expected_firmware
        and report.nonce == nonce
    )


class NonceSource:
    """Deterministic fresh-nonce counter; one per verifier context."""

    def __init__(self, prefix: str = "nonce"):
        self._prefix = prefix
        self._n = 0

    def fresh(self) -> str:
        self._n += 1
        return f"{self._prefix}-{self._n:06d}"


class Verifier:
    """Challenge/verify wrapper that refuses nonce replay.

    Nonces must have been issued by this verifier and are redeemed exactly
    once; presenting a report under a consumed nonce fails.
    """

    def __init__(self, nonces: NonceSource | None = None):
        self._nonces = nonces or NonceSource()
        self._outstanding: set[str] = set()

    def issue(self) -> str:
        nonce = self._nonces.fresh()
        self._outstanding.add(nonce)
        return nonce

    def verify(
        self,
        report: AttestationReport,
        expected_fingerprint: str,
        expected_firmware: str,
    ) -> bool:
        if report.nonce not in self._outstanding:
            return False
        self._outstanding.discard(report.nonce)
        return verify_report(
            report, expected_fingerprint, expected_firmware, report.nonce
        )


@dataclass(frozen=True)
class ExpectedDevice:
    fingerprint: str
    firmware_digest: str


@dataclass(frozen=True)
class Session:
    device_a: str
    device_b: str
    fingerprint_a: str
    fingerprint_b: str


def peer_handshake(
    a: Accelerator,
    b: Accelerator,
    expectations: Mapping[str, ExpectedDevice],
    nonces: NonceSource | None = None,
) -> Session:
    """Mutual attestation before any data exchange; no host in the loop.

    Each side challenges the other with a fresh nonce and verifies the report
    against the expected-state table.  Raises MutualAuthFailed naming every
    device that failed verification.
    """
    if a.id == b.id:
        raise ValueError("peer_handshake requires two distinct devices")
    for dev in (a, b):
        if not dev.booted:
            raise NotBooted(f"device {dev.id} has not booted")
        if dev.id not in expectations:
            raise UnresolvedReference(f"no expected state for device {dev.id}")
    nonces = nonces or NonceSource()
    failed = []
    for dev in (a, b):
        exp = expectations[dev.id]
        nonce = nonces.fresh()
        report = attest(dev, nonce)
        if not verify_report(report, exp.fingerprint, exp.firmware_digest, nonce):
            failed.append(dev.id)
    if failed:
        raise MutualAuthFailed(
            tuple(failed), f"attestation failed for device(s): {', '.join(failed)}"
        )
    return Session(
        device_a=a.id,
        device_b=b.id,
        fingerprint_a=a.identity_fingerprint,
        fingerprint_b=b.identity_fingerprint,
    )


class GateAction(str, Enum):
    REVOKE_HOST = "RevokeHost"
    DECRYPT = "Decrypt"
    COMPUTE = "Compute"
    ENCRYPT = "Encrypt"
    GRANT_HOST = "GrantHost"


@dataclass(frozen=True)
class GateStep:
    index: int
    action: GateAction
    host_access: HostAccess


@dataclass(frozen=True)
class GateResult:
    device: Accelerator
    steps: tuple[GateStep, ...]
    violation: Violation | None

    @property
    def legal(self) -> bool:
        return self.violation is None


def gate_ingress(
    acc: Accelerator, actions: Sequence[GateAction], ts: int = 0
) -> GateResult:
    """Walk an ingress action sequence against the host-access gate.

    Legal sequences revoke host access before any Decrypt and complete an
    Encrypt before any subsequent GrantHost.  Processing stops at the first
    offending action; the breach is returned as data, never raised.
    """
    if not acc.booted:
        raise NotBooted(f"device {acc.id} has not booted")
    host = acc.host_access
    plaintext_exposed = False
    steps: list[GateStep] = []
    violation = None
    for index, action in enumerate(actions):
        if action == GateAction.REVOKE_HOST:
            host = HostAccess.REVOKED
        elif action == GateAction.DECRYPT:
            if host == HostAccess.GRANTED:
                violation = Violation(
                    control="SC-8(1)",
                    ts=ts,
                    subject=acc.id,
                    detail=f"Decrypt at index {index} with host access granted",
                )
                break
            plaintext_exposed = True
        elif action == GateAction.ENCRYPT:
            plaintext_exposed = False
        elif action == GateAction.GRANT_HOST:
            if plaintext_exposed:
                violation = Violation(
                    control="SC-8(1)",
                    ts=ts,
                    subject=acc.id,
                    detail=f"GrantHost at index {index} before encryption completed",
                )
                break
            host = HostAccess.GRANTED
        steps.append(GateStep(index=index, action=action, host_access=host))
    return GateResult(
        device=replace(acc, host_access=host),
        steps=tuple(steps),
        violation=violation,
    )


class MemoryRegion(str, Enum):
    PROTECTED = "Protected"
    UNPROTECTED = "Unprotected"


def host_read(acc: Accelerator, region: MemoryRegion, host_privileged: bool) -> bool:
    """Device-controlled memory isolation: privilege cannot open Protected regions."""
    if not acc.booted:
        raise NotBooted(f"device {acc.id} has not booted")
    if region == MemoryRegion.PROTECTED:
        return False
    return acc.host_access == HostAccess.GRANTED


@dataclass(frozen=True)
class TaskSequencePolicy:
    """DFA over operation names; a missing transition means reject.

    ``live`` is the set of states from which an accepting state is reachable,
    precomputed so rejection can report the prefix length at which acceptance
    became impossible.
    """

    alphabet: frozenset[str]
    states: frozenset[str]
    start: str
    accepting: frozenset[str]
    transitions: Mapping[tuple[str, str], str]
    live: frozenset[str]


def make_policy(
    alphabet,
    states,
    start: str,
    accepting,
    transitions: Mapping[tuple[str, str], str],
) -> TaskSequencePolicy:
    alphabet = frozenset(alphabet)
    states = frozenset(states)
    accepting = frozenset(accepting)
    if start not in states:
        raise ValueError(f"start state {start!r} not in states")
    if not accepting <= states:
        raise ValueError("accepting states must be a subset of states")
    for (state, symbol), target in transitions.items():
        if state not in states or target not in states:
            raise ValueError(f"transition ({state!r},{symbol!r})->{target!r} off-policy")
        if symbol not in alphabet:
            raise ValueError(f"transition symbol {symbol!r} not in alphabet")
    # Reverse reachability from the accepting set.
    live = set(accepting)
    changed = True
    while changed:
        changed = False
        for (state, _), target in transitions.items():
            if target in live and state not in live:
                live.add(state)
                changed = True
    return TaskSequencePolicy(
        alphabet=alphabet,
        states=states,
        start=start,
        accepting=accepting,
        transitions=dict(transitions),
        live=frozenset(live),
    )


class RejectKind(str, Enum):
    UNSIGNED_OP = "UnsignedOp"
    UNKNOWN_OP = "UnknownOp"
    SEQUENCE_REJECTED = "SequenceRejected"


@dataclass(frozen=True)
class WorkloadDecision:
    accepted: bool
    reject_kind: RejectKind | None = None
    reject_index: int | None = None


_ACCEPT = WorkloadDecision(accepted=True)


def submit_workload(
    acc: Accelerator,
    ops: Sequence[SignedOperation],
    policy: TaskSequencePolicy,
) -> WorkloadDecision:
    """Accept a workload iff every op is signed and known and the full
    sequence is in the policy's language.

    SequenceRejected carries the prefix length at which the run left the
    accepting-reachable set (the length of the whole sequence when it merely
    ends in a non-accepting state): the composition-attack case.
    """
    if not acc.booted:
        raise NotBooted(f"device {acc.id} has not booted")
    alphabet = policy.alphabet
    for index, op in enumerate(ops):
        if not op.signature_valid:
            return WorkloadDecision(
                accepted=False,
                reject_kind=RejectKind.UNSIGNED_OP,
                reject_index=index,
            )
        if op.op_name not in alphabet:
            return WorkloadDecision(
                accepted=False,
                reject_kind=RejectKind.UNKNOWN_OP,
                reject_index=index,
            )
    state = policy.start
    transitions = policy.transitions
    live = policy.live
    for index, op in enumerate(ops):
        state = transitions.get((state, op.op_name))
        if state is None or state not in live:
            return WorkloadDecision(
                accepted=False,
                reject_kind=RejectKind.SEQUENCE_REJECTED,
                reject_index=index + 1,
            )
    if state not in policy.accepting:
        return WorkloadDecision(
            accepted=False,
            reject_kind=RejectKind.SEQUENCE_REJECTED,
            reject_index=len(ops),
        )
    return _ACCEPT


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def load_policy(src: str | Path | dict) -> TaskSequencePolicy:
    """Policy JSON: {"alphabet", "states", "start", "accepting", "transitions"}."""
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
    unknown = set(doc) - {"alphabet", "states", "start", "accepting", "transitions"}
    if unknown:
        raise ParseError(f"policy: unknown keys {sorted(unknown)}", source=source)
    try:
        transitions = {}
        for rec in doc["transitions"]:
            extra = set(rec) - {"from", "symbol", "to"}
            if extra:
                raise ValueError(f"transition: unknown keys {sorted(extra)}")
            key = (rec["from"], rec["symbol"])
            if key in transitions:
                raise ValueError(f"duplicate transition for {key}")
            transitions[key] = rec["to"]
        return make_policy(
            alphabet=doc["alphabet"],
            states=doc["states"],
            start=doc["start"],
            accepting=doc["accepting"],
            transitions=transitions,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"policy: {exc}", source=source) from exc


@dataclass(frozen=True)
class DeviceFixture:
    id: str
    fingerprint: str
    trusted_signers: frozenset[str]
    tampered: bool
    enclave: str | None
    secure_element: tuple[str, ...]
    tamper_response: bool
    firmware: FirmwareImage | None


def load_devices(src: str | Path | dict) -> dict[str, DeviceFixture]:
    """Device fixtures: declared identity, trust anchors and authorized firmware."""
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
    if not isinstance(doc, dict) or set(doc) != {"devices"}:
        raise ParseError("device document must be {'devices': [...]}", source=source)
    out: dict[str, DeviceFixture] = {}
    for rec in doc["devices"]:
        unknown = set(rec) - {
            "id",
            "fingerprint",
            "trusted_signers",
            "tampered",
            "enclave",
            "secure_element",
            "tamper_response",
            "firmware",
        }
        if unknown:
            raise ParseError(f"device: unknown keys {sorted(unknown)}", source=source)
        try:
            firmware = None
            if rec.get("firmware") is not None:
                fw = rec["firmware"]
                extra = set(fw) - {"digest", "signer", "version"}
                if extra:
                    raise ValueError(f"firmware: unknown keys {sorted(extra)}")
                firmware = FirmwareImage(
                    digest=fw["digest"], signer=fw["signer"], version=fw["version"]
                )
            fixture = DeviceFixture(
                id=rec["id"],
                fingerprint=rec["fingerprint"],
                trusted_signers=frozenset(rec["trusted_signers"]),
                tampered=rec.get("tampered", False),
                enclave=rec.get("enclave"),
                secure_element=tuple(rec.get("secure_element", [])),
                tamper_response=rec.get("tamper_response", False),
                firmware=firmware,
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"device {rec.get('id')!r}: {exc}", source=source) from exc
        if fixture.id in out:
            raise ParseError(f"duplicate device id {fixture.id!r}", source=source)
        out[fixture.id] = fixture
    return out


def accelerator_from_fixture(fx: DeviceFixture) -> Accelerator:
    return Accelerator(
        id=fx.id,
        identity_fingerprint=fx.fingerprint,
        secure_element=frozenset(fx.secure_element),
        enclave=fx.enclave,
        tampered=fx.tampered,
    )

"""The six-step crypto session as an executable state machine.

One session: build the modified message (payload plus hidden sampling bits),
draw basis keys from the pad, prepare and encode photons, pass each photon
through the (possibly attacked) channel, decode with the shared keys, compare
the announced sampling bits, and either recycle the pad and release the
message or halt.  The transcript keeps the full secret view for analysis; the
``public_view`` projection is exactly what an eavesdropper may read.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import keystore
from .adversary import AttackModel, EveRecord, KnownPlaintext, NoAttack, attack_photon, eve_measure_probe, known_plaintext_infer
from .keystore import BasisKeySequence, PadKey
from .quantum import (
    BasisKeyPair,
    EncodingOp,
    StateVector,
    apply_encoding,
    measure,
    measure_photon_of_joint,
    state_from_basis_key,
)
from .rng import RandomStream, make_rng


@dataclass(frozen=True)
class ModifiedMessage:
    """Message bits with sampling bits interleaved at secret random positions."""

    bits: np.ndarray
    sample_positions: np.ndarray
    sample_values: dict[int, int]

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        positions = np.asarray(self.sample_positions, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "sample_positions", np.sort(positions))
        if len(set(positions.tolist())) != positions.size:
            raise ValueError("sample positions must be distinct")
        if positions.size and (positions.min() < 0 or positions.max() >= bits.size):
            raise ValueError("sample positions out of range")
        for p in positions:
            if self.sample_values[int(p)] != int(bits[p]):
                raise ValueError("sample_values must match the stored bits")

    @property
    def n_sample(self) -> int:
        return int(self.sample_positions.size)

    def message_bits(self) -> np.ndarray:
        """The original message: all non-sample bits in order."""
        mask = np.ones(self.bits.size, dtype=bool)
        mask[self.sample_positions] = False
        return self.bits[mask]


@dataclass(frozen=True)
class SessionConfig:
    n_message: int
    n_sample: int
    abort_threshold: float = 0.0
    seed: int = 0
    allow_insecure_demo: bool = False

    def __post_init__(self):
        if self.n_message < 0:
            raise ValueError("n_message must be nonnegative")
        if self.n_sample < 1:
            raise ValueError("a session needs at least one sampling bit")
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ValueError("abort_threshold must lie in [0, 1]")
        if self.abort_threshold > 0.0 and not self.allow_insecure_demo:
            raise ValueError(
                "a nonzero abort threshold releases messages over a noisy channel "
                "without privacy amplification; set allow_insecure_demo=True to "
                "accept that explicitly"
            )


@dataclass(frozen=True)
class ErrorReport:
    n_checked: int
    n_errors: int
    rate: float
    accepted: bool


@dataclass(frozen=True)
class PhotonRecord:
    index: int
    basis_key: BasisKeyPair
    prepared: StateVector
    encoding: EncodingOp
    received_outcome: int
    decoded_bit: int


@dataclass
class SessionTranscript:
    """Full audit record of one session (secret view plus public projection)."""

    config: SessionConfig
    attack: AttackModel
    mm: ModifiedMessage
    keys: BasisKeySequence
    photons: list[PhotonRecord]
    attack_events: list[EveRecord]
    decoded: list[int]
    error_report: ErrorReport
    recycled_pad: PadKey | None = None
    extracted_message: np.ndarray | None = None
    announced_origin_bits: list[int] = field(default_factory=list)

    def public_view(self) -> dict:
        """Everything an eavesdropper may read: the sampling positions Alice
        announces, the sampling values Bob announces, and the verdict."""
        positions = [int(p) for p in self.mm.sample_positions]
        return {
            "sample_positions": positions,
            "announced_sample_values": [int(self.decoded[p]) for p in positions],
            "error_report": {
                "n_checked": self.error_report.n_checked,
                "n_errors": self.error_report.n_errors,
                "rate": self.error_report.rate,
                "accepted": self.error_report.accepted,
            },
        }

    def to_json_dict(self) -> dict:
        """Structured-text form (schema: docs/transcript_schema.json)."""
        return {
            "schema": "qotp-transcript-v1",
            "config": {
                "n_message": self.config.n_message,
                "n_sample": self.config.n_sample,
                "abort_threshold": self.config.abort_threshold,
                "seed": self.config.seed,
                "allow_insecure_demo": self.config.allow_insecure_demo,
            },
            "attack": describe_attack(self.attack),
            "secret_view": {
                "modified_bits": [int(b) for b in self.mm.bits],
                "sample_values": [
                    {"position": int(p), "value": int(self.mm.sample_values[int(p)])}
                    for p in self.mm.sample_positions
                ],
                "photons": [_photon_to_json(ph) for ph in self.photons],
                "attack_events": [_event_to_json(ev) for ev in self.attack_events],
                "decoded_bits": [int(b) for b in self.decoded],
                "extracted_message": None
                if self.extracted_message is None
                else [int(b) for b in self.extracted_message],
                "extracted_message_digest": None
                if self.extracted_message is None
                else message_digest(self.extracted_message),
                "recycled_pad": None
                if self.recycled_pad is None
                else {
                    "generation": self.recycled_pad.generation,
                    "hex": keystore.pad_to_text(self.recycled_pad).splitlines()[1],
                    "bits": len(self.recycled_pad),
                },
            },
            "public_view": self.public_view(),
            "error_report": {
                "n_checked": self.error_report.n_checked,
                "n_errors": self.error_report.n_errors,
                "rate": self.error_report.rate,
                "accepted": self.error_report.accepted,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def describe_attack(attack: AttackModel) -> dict:
    from .adversary import IndividualUTB, InterceptResend

    if isinstance(attack, NoAttack):
        return {"kind": "none"}
    if isinstance(attack, InterceptResend):
        return {"kind": "intercept_resend", "ir_basis": attack.basis_strategy.value}
    if isinstance(attack, IndividualUTB):
        return {
            "kind": "utb",
            "theta": float(attack.theta),
            "utb_basis": attack.attack_basis.value,
        }
    if isinstance(attack, KnownPlaintext):
        inner = describe_attack(attack.inner)
        inner["known_plaintext"] = True
        return inner
    raise TypeError(f"unknown attack {attack!r}")


def _photon_to_json(ph: PhotonRecord) -> dict:
    return {
        "index": ph.index,
        "basis_key": [ph.basis_key.b0, ph.basis_key.b1],
        "prepared": [{"re": float(a.real), "im": float(a.imag)} for a in ph.prepared.amps],
        "encoding": ph.encoding.name,
        "received_outcome": ph.received_outcome,
        "decoded_bit": ph.decoded_bit,
    }


def _event_to_json(ev: EveRecord) -> dict:
    return {
        "photon_index": ev.photon_index,
        "kind": ev.kind,
        "eve_basis": None if ev.eve_basis is None else ev.eve_basis.value,
        "eve_outcome": ev.eve_outcome,
        "probe_outcome": ev.probe_outcome,
        "theta": ev.theta,
        "attack_basis": None if ev.attack_basis is None else ev.attack_basis.value,
        "inferred_basis_guess": None
        if ev.inferred_basis_guess is None
        else ev.inferred_basis_guess.value,
        "posterior_plus": ev.posterior_plus,
    }


def message_digest(bits: np.ndarray) -> str:
    """SHA-256 of the bit string, so logs never carry plaintext by default."""
    text = "".join(str(int(b)) for b in np.asarray(bits).reshape(-1))
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def build_modified_message(
    message, n_sample: int, rng: RandomStream
) -> ModifiedMessage:
    """Interleave ``n_sample`` uniform random bits into the message at
    positions drawn uniformly over all interleavings.

    ``n_sample`` = 0 is a degenerate test-mode escape hatch; live sessions
    require at least one sampling bit (enforced by SessionConfig).
    """
    message = np.asarray(message, dtype=np.uint8).reshape(-1)
    if n_sample < 0:
        raise ValueError("n_sample must be nonnegative")
    n_total = message.size + n_sample
    positions = np.sort(rng.choice(n_total, size=n_sample, replace=False)) if n_sample else np.array([], dtype=np.int64)
    sample_bits = rng.integers(0, 2, size=n_sample, dtype=np.uint8)
    bits = np.zeros(n_total, dtype=np.uint8)
    mask = np.ones(n_total, dtype=bool)
    mask[positions] = False
    bits[mask] = message
    bits[positions] = sample_bits
    values = {int(p): int(v) for p, v in zip(positions, sample_bits)}
    return ModifiedMessage(bits=bits, sample_positions=positions, sample_values=values)


def alice_encode(keys: BasisKeySequence, mm: ModifiedMessage) -> list[StateVector]:
    """Prepare each photon from its basis key and write the corresponding
    modified-message bit onto it.  The returned photons are the ciphertext."""
    if len(keys) != mm.bits.size:
        raise ValueError(
            f"{len(keys)} basis keys for {mm.bits.size} modified-message bits"
        )
    return [
        apply_encoding(EncodingOp(int(bit)), state_from_basis_key(pair))
        for pair, bit in zip(keys.pairs, mm.bits)
    ]


def _decode_photon(
    photon: StateVector, pair: BasisKeyPair, rng: RandomStream
) -> tuple[int, int, StateVector | None]:
    """Measure one received photon in its preparation basis.

    Returns (outcome label, decoded bit, conditional probe state or None).
    The decoded bit is 0 when the outcome reproduces the prepared eigenstate
    and 1 when it lands on the in-basis image of the swap encoding.
    """
    probe = None
    if photon.dim == 4:
        outcome, probe = measure_photon_of_joint(photon, pair.basis, rng)
    else:
        outcome, _ = measure(photon, pair.basis, rng)
    decoded = 0 if outcome == pair.eigenstate_label else 1
    return outcome, decoded, probe


def bob_decode(
    photons: list[StateVector], keys: BasisKeySequence, rng: RandomStream
) -> list[int]:
    """Decode a photon sequence with the shared basis keys."""
    if len(photons) != len(keys):
        raise ValueError(f"{len(photons)} photons for {len(keys)} basis keys")
    return [
        _decode_photon(photon, pair, rng)[1]
        for photon, pair in zip(photons, keys.pairs)
    ]


def eavesdrop_check(mm: ModifiedMessage, decoded: list[int], threshold: float) -> ErrorReport:
    """Compare announced sampling values against the sender's record."""
    if len(decoded) != mm.bits.size:
        raise ValueError("decoded sequence length mismatch")
    n_checked = mm.n_sample
    n_errors = sum(
        1 for p in mm.sample_positions if decoded[int(p)] != mm.sample_values[int(p)]
    )
    rate = n_errors / n_checked if n_checked else 0.0
    return ErrorReport(
        n_checked=n_checked, n_errors=n_errors, rate=rate, accepted=rate <= threshold
    )


def run_session(
    config: SessionConfig, pad: PadKey, message, attack: AttackModel = NoAttack()
) -> SessionTranscript:
    """Execute one full session.

    On acceptance the transcript carries the recycled pad and the extracted
    message; on rejection it carries neither (the process halts and the pad
    lineage is retired).
    """
    message = np.asarray(message, dtype=np.uint8).reshape(-1)
    if message.size != config.n_message:
        raise ValueError(
            f"config says n_message={config.n_message} but message has {message.size} bits"
        )
    rng = make_rng(config.seed)
    mm = build_modified_message(message, config.n_sample, rng)
    keys = keystore.draw_basis_keys(pad, int(mm.bits.size))
    ciphertext = alice_encode(keys, mm)

    photons: list[PhotonRecord] = []
    events: list[EveRecord] = []
    decoded: list[int] = []
    for i, sent in enumerate(ciphertext):
        travelling, record = attack_photon(attack, sent, rng, i)
        outcome, bit, probe = _decode_photon(travelling, keys.pairs[i], rng)
        if record is not None:
            if probe is not None:
                record.probe_state = probe
                eve_measure_probe(record, rng)
            events.append(record)
        decoded.append(bit)
        photons.append(
            PhotonRecord(
                index=i,
                basis_key=keys.pairs[i],
                prepared=state_from_basis_key(keys.pairs[i]),
                encoding=EncodingOp(int(mm.bits[i])),
                received_outcome=outcome,
                decoded_bit=bit,
            )
        )

    if isinstance(attack, KnownPlaintext):
        known_plaintext_infer(events, attack.known_message, set(int(p) for p in mm.sample_positions))

    report = eavesdrop_check(mm, decoded, config.abort_threshold)

    announced_origins = [
        int(pad.origin_indices[src])
        for p in mm.sample_positions
        for src in keys.source_indices[int(p)]
    ]

    transcript = SessionTranscript(
        config=config,
        attack=attack,
        mm=mm,
        keys=keys,
        photons=photons,
        attack_events=events,
        decoded=decoded,
        error_report=report,
        announced_origin_bits=announced_origins,
    )
    if report.accepted:
        announced = set(int(p) for p in mm.sample_positions)
        transcript.recycled_pad = keystore.recycle_pad(pad, announced, keys, check=report)
        mask = np.ones(mm.bits.size, dtype=bool)
        mask[mm.sample_positions] = False
        transcript.extracted_message = np.array(decoded, dtype=np.uint8)[mask]
    return transcript

"""Classical one-time-pad lifecycle.

A pad is a value object: drawing basis keys never mutates it, and recycling
after a passed eavesdropping check produces a *new* pad with the announced
photons' source bits removed.  Each pad carries a provenance ledger
(``origin_indices``) mapping every current bit back to its position in the
generation-0 pad, which is what the reuse-soundness audit checks against.

Pad files are plain text: ``generation=<int>``, then the bits hex-encoded
(most significant bit of the first hex digit is pad index 0), then
``bits=<int>`` giving the exact bit count (hex alone cannot express lengths
that are not multiples of 4).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PadExhaustedError, ProtocolViolationError
from .quantum import BasisKeyPair
from .rng import RandomStream


@dataclass(frozen=True)
class PadKey:
    """A one-time-pad bit string with its publication and lineage ledgers."""

    bits: np.ndarray
    published: frozenset[int] = frozenset()
    generation: int = 0
    origin_indices: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ValueError("pad bits must be 0/1")
        object.__setattr__(self, "bits", bits)
        origins = self.origin_indices
        if origins is None:
            origins = np.arange(bits.size, dtype=np.int64)
        origins = np.asarray(origins, dtype=np.int64).reshape(-1)
        if origins.size != bits.size:
            raise ValueError("origin ledger length must match the bit string")
        object.__setattr__(self, "origin_indices", origins)
        if any(i < 0 or i >= bits.size for i in self.published):
            raise ValueError("published indices out of range")

    def __len__(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True)
class BasisKeySequence:
    """Basis-key pairs for one photon sequence plus the pad bits they consumed."""

    pairs: tuple[BasisKeyPair, ...]
    source_indices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.pairs) != len(self.source_indices):
            raise ValueError("pairs and source_indices must align")
        flat = [i for pair in self.source_indices for i in pair]
        if flat != sorted(set(flat)):
            raise ValueError("source indices must be disjoint and strictly increasing")

    def __len__(self) -> int:
        return len(self.pairs)


def generate_pad(length: int, rng: RandomStream) -> PadKey:
    """Uniformly random pad of ``length`` bits (trusted-RNG stand-in for a
    key-agreement step; swap in any shared-secret source that yields uniform
    bits)."""
    if length <= 0:
        raise ValueError(f"pad length must be positive, got {length}")
    bits = rng.integers(0, 2, size=length, dtype=np.uint8)
    return PadKey(bits=bits)


def draw_basis_keys(pad: PadKey, n_photons: int) -> BasisKeySequence:
    """Group the first 2*n_photons pad bits into consecutive basis-key pairs.

    Pure read: the pad is not consumed, which is what allows reuse across
    sessions.  Raises PadExhaustedError if the pad is too short.
    """
    if n_photons < 0:
        raise ValueError("n_photons must be nonnegative")
    needed = 2 * n_photons
    if len(pad) < needed:
        raise PadExhaustedError(
            f"pad exhausted: need {needed} bits for {n_photons} photons, have {len(pad)}"
        )
    pairs = tuple(
        BasisKeyPair(int(pad.bits[2 * i]), int(pad.bits[2 * i + 1]))
        for i in range(n_photons)
    )
    sources = tuple((2 * i, 2 * i + 1) for i in range(n_photons))
    return BasisKeySequence(pairs=pairs, source_indices=sources)


def recycle_pad(
    pad: PadKey,
    announced_pair_indices: set[int],
    keys: BasisKeySequence,
    check=None,
) -> PadKey:
    """Build the next-generation pad by dropping every announced photon's bits.

    ``announced_pair_indices`` are photon indices whose positions and encoding
    bits went public during the check; both pad bits sourcing each such photon
    are removed.  Survivor order is preserved, the publication ledger is
    cleared, and the generation counter is incremented.

    ``check`` may carry the session's error report; recycling after a failed
    check raises ProtocolViolationError (the protocol halts on eavesdropping).
    """
    if check is not None and not check.accepted:
        raise ProtocolViolationError("cannot recycle a pad after a failed check")
    bad = set(announced_pair_indices) - set(range(len(keys)))
    if bad:
        raise ValueError(f"announced photon indices {sorted(bad)} outside the key sequence")
    removed = set()
    for photon in announced_pair_indices:
        removed.update(keys.source_indices[photon])
    keep = np.array([i for i in range(len(pad)) if i not in removed], dtype=np.int64)
    return PadKey(
        bits=pad.bits[keep],
        published=frozenset(),
        generation=pad.generation + 1,
        origin_indices=pad.origin_indices[keep],
    )


def mark_published(pad: PadKey, bit_indices: set[int]) -> PadKey:
    """Record pad bit indices whose correlated data went public (used when a
    session is rejected and the pad lineage must be retired)."""
    return PadKey(
        bits=pad.bits,
        published=pad.published | set(bit_indices),
        generation=pad.generation,
        origin_indices=pad.origin_indices,
    )


def pad_to_text(pad: PadKey) -> str:
    """Serialize a pad to the exchange format (generation, hex bits, bit count)."""
    nibbles = []
    bits = pad.bits
    for i in range(0, len(bits), 4):
        chunk = bits[i : i + 4]
        val = 0
        for j, b in enumerate(chunk):
            val |= int(b) << (3 - j)
        nibbles.append(f"{val:X}")
    return f"generation={pad.generation}\n{''.join(nibbles)}\nbits={len(bits)}\n"


def pad_from_text(text: str) -> PadKey:
    """Parse the pad exchange format.  A missing ``bits=`` line means the bit
    count is four times the hex digit count."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("generation="):
        raise ValueError("pad file must start with 'generation=<int>' then hex bits")
    generation = int(lines[0].split("=", 1)[1])
    hexdigits = lines[1]
    n_bits = 4 * len(hexdigits)
    if len(lines) >= 3 and lines[2].startswith("bits="):
        n_bits = int(lines[2].split("=", 1)[1])
        if not 4 * len(hexdigits) - 3 <= n_bits <= 4 * len(hexdigits):
            raise ValueError(f"bit count {n_bits} inconsistent with {len(hexdigits)} hex digits")
    bits = np.zeros(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        val = int(hexdigits[i // 4], 16)
        bits[i] = (val >> (3 - i % 4)) & 1
    return PadKey(bits=bits, generation=generation)


def save_pad(pad: PadKey, path: str | Path) -> None:
    Path(path).write_text(pad_to_text(pad))


def load_pad(path: str | Path) -> PadKey:
    return pad_from_text(Path(path).read_text())

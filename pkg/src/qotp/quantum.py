"""Exact state-vector core for one polarized photon, optionally joined to a
one-qubit probe.

States live in dimension 2 (photon) or 4 (photon tensor probe, photon first).
The four preparation states are the two polarization pairs

    plus basis:   |H> = (1, 0),          |V> = (0, 1)
    cross basis:  |u> = (1, 1)/sqrt(2),  |d> = (1, -1)/sqrt(2)

selected by a two-bit basis key (00 -> H, 11 -> V, 01 -> u, 10 -> d).  Message
bits are written onto a prepared photon with one of two unitaries: U0 is the
identity and U1 swaps the two eigenstates of whichever basis the photon was
prepared in (picking up physically irrelevant signs).  All measurement is
Born-rule sampling against an explicit random stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import RandomStream

NORM_TOL = 1e-9

_SQ2 = np.sqrt(0.5)


class Basis(Enum):
    """The two measuring bases for a single photon."""

    PLUS = "plus"
    CROSS = "cross"

    def eigenstates(self) -> np.ndarray:
        """Return a (2, 2) array whose rows are the basis eigenvectors.

        Row k is the eigenstate labelled by measurement outcome k.
        """
        if self is Basis.PLUS:
            return np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128)

    @property
    def index(self) -> int:
        return 0 if self is Basis.PLUS else 1


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes of 1 or 2 qubits.

    Basis order is |0>, |1> for dim 2 and |00>, |01>, |10>, |11> for dim 4,
    where the first factor is the photon and the second the probe.
    """

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "amps", amps)
        if amps.shape[0] not in (2, 4):
            raise ValueError(f"state dimension must be 2 or 4, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def __repr__(self) -> str:  # compact, test-failure friendly
        entries = ", ".join(f"{a.real:+.6f}{a.imag:+.6f}j" for a in self.amps)
        return f"StateVector([{entries}])"


def _normalized(amps: np.ndarray) -> StateVector:
    """Renormalize raw amplitudes (suppresses float drift after a unitary)."""
    return StateVector(amps / np.linalg.norm(amps))


# The four preparation states, indexed 0..3 = H, V, u, d.
KET_H = StateVector(np.array([1.0, 0.0]))
KET_V = StateVector(np.array([0.0, 1.0]))
KET_U = StateVector(np.array([_SQ2, _SQ2]))
KET_D = StateVector(np.array([_SQ2, -_SQ2]))

PREP_STATES = (KET_H, KET_V, KET_U, KET_D)

# Basis and eigenstate label of each preparation state.
PREP_BASIS = (Basis.PLUS, Basis.PLUS, Basis.CROSS, Basis.CROSS)
PREP_LABEL = (0, 1, 0, 1)


@dataclass(frozen=True)
class BasisKeyPair:
    """Two consecutive pad bits selecting one preparation state."""

    b0: int
    b1: int

    def __post_init__(self):
        if self.b0 not in (0, 1) or self.b1 not in (0, 1):
            raise ValueError(f"basis key bits must be 0/1, got {self.b0}, {self.b1}")

    @property
    def state_index(self) -> int:
        """Index into PREP_STATES: 00 -> 0 (H), 11 -> 1 (V), 01 -> 2 (u), 10 -> 3 (d)."""
        if self.b0 == self.b1:
            return self.b0
        return 2 + self.b0

    @property
    def basis(self) -> Basis:
        """Equal bits select the plus basis, unequal bits the cross basis."""
        return Basis.PLUS if self.b0 == self.b1 else Basis.CROSS

    @property
    def eigenstate_label(self) -> int:
        """Outcome label of the prepared state within its own basis."""
        return PREP_LABEL[self.state_index]


class EncodingOp(Enum):
    """The two message encodings: identity, and the in-basis eigenstate swap."""

    U0 = 0
    U1 = 1

    @property
    def matrix(self) -> np.ndarray:
        if self is EncodingOp.U0:
            return np.eye(2, dtype=np.complex128)
        # |0><1| - |1><0|: swaps the eigenstates of either basis up to sign.
        return np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=np.complex128)


def state_from_basis_key(pair: BasisKeyPair) -> StateVector:
    """Map a basis-key pair to its preparation state (H, V, u or d)."""
    return PREP_STATES[pair.state_index]


def apply_encoding(op: EncodingOp, s: StateVector) -> StateVector:
    """Apply U0 or U1 to a single-photon state."""
    if s.dim != 2:
        raise ValueError("encoding acts on single-photon states only")
    return _normalized(op.matrix @ s.amps)


def measure(s: StateVector, b: Basis, rng: RandomStream) -> tuple[int, StateVector]:
    """Born-rule measurement of a single photon.

    Returns the outcome label (0 for the first eigenstate of ``b``, 1 for the
    second) and the collapsed post-measurement state.
    """
    if s.dim != 2:
        raise ValueError("measure expects a single-photon state")
    eig = b.eigenstates()
    p1 = abs(np.vdot(eig[1], s.amps)) ** 2
    outcome = int(rng.random() < p1)
    return outcome, StateVector(eig[outcome])


def utb_apply(s: StateVector, theta: float, attack_basis: Basis) -> StateVector:
    """Entangle a photon with a fresh |0> probe through the tunable tap.

    With (xi, xibar) the eigenstates of ``attack_basis``, the tap fixes
    xi (x) |0> and sends xibar (x) |0> to cos(theta) xibar (x) |0> +
    sin(theta) xi (x) |1>.  ``theta`` in [0, pi/4] sets the strength; theta=0
    is the identity.  Returns the normalized 4-dim joint state.
    """
    if not 0.0 <= theta <= np.pi / 4:
        raise ValueError(f"theta must lie in [0, pi/4], got {theta}")
    if s.dim != 2:
        raise ValueError("the tap acts on single-photon states")
    eig = attack_basis.eigenstates()
    xi, xibar = eig[0], eig[1]
    a = np.vdot(xi, s.amps)
    b = np.vdot(xibar, s.amps)
    probe0 = np.array([1.0, 0.0], dtype=np.complex128)
    probe1 = np.array([0.0, 1.0], dtype=np.complex128)
    joint = np.kron(a * xi + b * np.cos(theta) * xibar, probe0)
    joint += np.kron(b * np.sin(theta) * xi, probe1)
    return _normalized(joint)


def measure_photon_of_joint(
    s: StateVector, b: Basis, rng: RandomStream
) -> tuple[int, StateVector]:
    """Born-rule measurement of the photon factor of a photon-probe state.

    Returns the photon outcome label and the probe's renormalized conditional
    state.
    """
    if s.dim != 4:
        raise ValueError("expected a photon-probe joint state")
    eig = b.eigenstates()
    # joint[photon, probe]; rotate the photon axis into the measurement basis.
    joint = s.amps.reshape(2, 2)
    amps_b = eig.conj() @ joint
    p1 = float(np.sum(np.abs(amps_b[1]) ** 2))
    outcome = int(rng.random() < p1)
    probe = amps_b[outcome]
    return outcome, _normalized(probe)


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = NORM_TOL) -> bool:
    """True iff a unit complex c exists with ||a - c*b|| <= tol."""
    if a.dim != b.dim:
        raise ValueError("states must have equal dimension")
    ip = np.vdot(b.amps, a.amps)
    c = ip / abs(ip) if abs(ip) > 0 else 1.0
    return bool(np.linalg.norm(a.amps - c * b.amps) <= tol)

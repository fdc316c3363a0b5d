"""Closed-form information bounds and the empirical estimators that connect
Monte-Carlo runs to them.

All information quantities are in bits (base-2 logs).  The bound family:

* ``i0_bound(d)``     -- ceiling on what an individual probe attack can learn
                         about the encoding operation when measuring bases are
                         announced afterwards, as a function of the error rate
                         ``d`` the attack inflicts.
* ``epsilon_tilde_min`` / ``i1_bound`` -- ceiling on what the adversary can
                         learn about the measuring bases themselves, with a
                         declared pole at d_m = 1/(8*sqrt(2)); evaluated
                         verbatim, no smoothing.
* ``small_dm_linear_bound`` -- the small-d_m linear relaxation of i1.

Empirical quantities (error rates, plug-in mutual information) come from
session transcripts or from batched kernel runs with uniformly random pads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .adversary import AttackModel, IndividualUTB, InterceptResend, IRStrategy, KnownPlaintext, NoAttack
from .errors import PoleError
from .quantum import Basis
from .rng import RandomStream

# Plug-in MI estimator slack for seeded bound comparisons at n = 1e5
# (estimator bias is O(cells/n); at most 8 cells here).
MI_ESTIMATOR_SLACK = 0.02

_LN2 = np.log(2.0)
_POLE_DM = 1.0 / (8.0 * np.sqrt(2.0))


def _eval(x, domain_lo, domain_hi, func, name):
    scalar = np.isscalar(x) or np.asarray(x).ndim == 0
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(arr < domain_lo) or np.any(arr > domain_hi):
        raise ValueError(f"{name} domain is [{domain_lo:g}, {domain_hi:g}], got {x!r}")
    out = func(arr)
    return float(out[0]) if scalar else out


def phi(x):
    """(1+x)log2(1+x) + (1-x)log2(1-x) on [0, 1], with 0*log 0 = 0 at x = 1."""

    def f(arr):
        out = (1.0 + arr) * np.log2(1.0 + arr)
        rest = 1.0 - arr
        mask = rest > 0
        extra = np.zeros_like(arr)
        extra[mask] = rest[mask] * np.log2(rest[mask])
        return out + extra

    return _eval(x, 0.0, 1.0, f, "phi")


def i0_bound(d):
    """Encoding-information ceiling (1/2) phi(2 sqrt(d(1-d))).

    Symmetric under d <-> 1-d and maximal (= 1) at d = 1/2; the protocol
    regime is d in [0, 1/4].
    """

    def f(arr):
        t = np.minimum(2.0 * np.sqrt(arr * (1.0 - arr)), 1.0)
        return 0.5 * phi(t)

    return _eval(d, 0.0, 1.0, f, "i0_bound")


def d_of_theta(theta):
    """Error rate (1/2) sin^2(theta) inflicted on attacked-basis photons."""
    return _eval(theta, 0.0, np.pi / 4, lambda t: 0.5 * np.sin(t) ** 2, "d_of_theta")


def epsilon_tilde_min(d_m, pole_tol: float = 1e-9):
    """Minimum of the basis-information parameter over attacks at error d_m.

    Evaluated verbatim: ((1 - 4 sqrt(sqrt(2 - 8 d) d)) / (1 - 8 sqrt(2) d))^2
    on [0, 1/4].  The denominator vanishes at d = 1/(8 sqrt(2)) ~ 0.08839;
    evaluation within ``pole_tol`` of the pole raises PoleError.
    """

    def f(arr):
        den = 1.0 - 8.0 * np.sqrt(2.0) * arr
        near = np.abs(den) < pole_tol
        if np.any(near):
            offending = ", ".join(f"{v:.12g}" for v in arr[near])
            raise PoleError(
                f"epsilon_tilde_min has a pole at d_m = {_POLE_DM:.12g}; got {offending}"
            )
        num = 1.0 - 4.0 * np.sqrt(np.sqrt(2.0 - 8.0 * arr) * arr)
        return (num / den) ** 2

    return _eval(d_m, 0.0, 0.25, f, "epsilon_tilde_min")


def i1_bound(d_m, pole_tol: float = 1e-9):
    """Basis-information ceiling 1 - log2(1+e) + (e/(1+e)) log2 e at
    e = epsilon_tilde_min(d_m); e log2 e -> 0 as e -> 0."""

    def f(arr):
        e = np.asarray(epsilon_tilde_min(arr, pole_tol=pole_tol), dtype=np.float64)
        term = np.zeros_like(e)
        mask = e > 0
        term[mask] = (e[mask] / (1.0 + e[mask])) * np.log2(e[mask])
        return 1.0 - np.log2(1.0 + e) + term

    return _eval(d_m, 0.0, 0.25, f, "i1_bound")


def small_dm_linear_bound(d_m):
    """Small-d_m linear ceiling (4 sqrt(2) / ln 2) d_m on [0, 1/4]."""
    slope = 4.0 * np.sqrt(2.0) / _LN2
    return _eval(d_m, 0.0, 0.25, lambda arr: slope * arr, "small_dm_linear_bound")


class BoundKind(Enum):
    I0 = "i0"
    I1 = "i1"
    SMALL_DM_LINEAR = "linear"
    EPSILON_TILDE = "eps_tilde"


@dataclass(frozen=True)
class BoundPoint:
    """One evaluated point of a bound curve."""

    d: float
    value: float
    kind: BoundKind


_BOUND_FUNCS = {
    BoundKind.I0: i0_bound,
    BoundKind.I1: i1_bound,
    BoundKind.SMALL_DM_LINEAR: small_dm_linear_bound,
    BoundKind.EPSILON_TILDE: epsilon_tilde_min,
}


def bound_curve(kind: BoundKind, d_grid) -> list[BoundPoint]:
    func = _BOUND_FUNCS[kind]
    return [BoundPoint(d=float(d), value=float(func(float(d))), kind=kind) for d in d_grid]


class ErrorSubset(Enum):
    SAMPLE_BITS = "sample"
    MATCHED_ATTACK_BASIS = "matched"
    ALL = "all"


def _attack_basis_of(attack: AttackModel) -> Basis | None:
    if isinstance(attack, IndividualUTB):
        return attack.attack_basis
    if isinstance(attack, KnownPlaintext):
        return _attack_basis_of(attack.inner)
    return None


def empirical_error_rate(transcript, subset: ErrorSubset) -> float:
    """Fraction of decode errors over a chosen photon subset of a transcript.

    MATCHED_ATTACK_BASIS keeps photons whose preparation basis equals the
    probe attack's basis (the subset on which the d_of_theta law holds).
    Raises ValueError when the subset is empty or undefined.
    """
    truth = transcript.mm.bits
    decoded = np.asarray(transcript.decoded, dtype=np.uint8)
    n = truth.size
    if subset is ErrorSubset.ALL:
        mask = np.ones(n, dtype=bool)
    elif subset is ErrorSubset.SAMPLE_BITS:
        mask = np.zeros(n, dtype=bool)
        mask[transcript.mm.sample_positions] = True
    else:
        attack_basis = _attack_basis_of(transcript.attack)
        if attack_basis is None:
            raise ValueError("matched-basis subset needs a probe attack with a basis")
        mask = np.array(
            [pair.basis is attack_basis for pair in transcript.keys.pairs], dtype=bool
        )
    if not mask.any():
        raise ValueError(f"error rate undefined over empty subset {subset}")
    return float(np.mean(decoded[mask] != truth[mask]))


def joint_counts(xs, ys, nx: int, ny: int) -> np.ndarray:
    """Contingency table of paired integer labels."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.shape != ys.shape:
        raise ValueError("label arrays must align")
    flat = xs * ny + ys
    return np.bincount(flat, minlength=nx * ny).reshape(nx, ny)


def empirical_mutual_information(counts) -> float:
    """Plug-in estimate sum p(a,e) log2[p(a,e)/(p(a)p(e))] in bits."""
    c = np.asarray(counts, dtype=np.float64)
    if c.ndim != 2 or np.any(c < 0):
        raise ValueError("counts must be a nonnegative 2-D table")
    total = c.sum()
    if total <= 0:
        raise ValueError("counts table must have positive total")
    p = c / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    terms = np.zeros_like(p)
    terms[mask] = p[mask] * np.log2(p[mask] / (px @ py)[mask])
    return float(terms.sum())


@dataclass
class PhotonBatch:
    """Column-oriented result of one batched channel run."""

    state_idx: np.ndarray
    enc_bits: np.ndarray
    prep_basis: np.ndarray
    meas_basis: np.ndarray
    bob_outcome: np.ndarray
    eve_basis: np.ndarray
    eve_outcome: np.ndarray

    @property
    def decoded(self) -> np.ndarray:
        """Decoded bits; meaningful where meas_basis equals prep_basis."""
        return (self.bob_outcome != kernels.PREP_LABEL_OF_STATE[self.state_idx]).astype(np.uint8)

    @property
    def errors(self) -> np.ndarray:
        return self.decoded != self.enc_bits

    @property
    def encoded_label(self) -> np.ndarray:
        """In-basis eigenstate label of the encoded (travelling) state."""
        return kernels.PREP_LABEL_OF_STATE[self.state_idx] ^ self.enc_bits.astype(np.int64)


def _kernel_attack_params(attack: AttackModel) -> tuple[int, int, float, int]:
    if isinstance(attack, KnownPlaintext):
        return _kernel_attack_params(attack.inner)
    if isinstance(attack, NoAttack):
        return kernels.ATTACK_NONE, kernels.IR_RANDOM, 0.0, kernels.BASIS_PLUS
    if isinstance(attack, InterceptResend):
        strategy = {
            IRStrategy.RANDOM: kernels.IR_RANDOM,
            IRStrategy.FIXED_PLUS: kernels.IR_FIXED_PLUS,
            IRStrategy.FIXED_CROSS: kernels.IR_FIXED_CROSS,
        }[attack.basis_strategy]
        return kernels.ATTACK_IR, strategy, 0.0, kernels.BASIS_PLUS
    if isinstance(attack, IndividualUTB):
        return kernels.ATTACK_UTB, kernels.IR_RANDOM, attack.theta, attack.attack_basis.index
    raise TypeError(f"unknown attack model {attack!r}")


def run_photon_batch(
    n: int,
    attack: AttackModel,
    rng: RandomStream,
    state_idx: np.ndarray | None = None,
    enc_bits: np.ndarray | None = None,
    meas_basis: np.ndarray | str = "prep",
) -> PhotonBatch:
    """Run n photons with uniformly random pads/bits unless columns are pinned.

    ``meas_basis`` is "prep" (receiver uses each photon's preparation basis,
    the protocol behavior), "plus"/"cross" (a fixed-basis observer), or an
    explicit (n,) array.
    """
    if state_idx is None:
        state_idx = rng.integers(0, 4, size=n, dtype=np.int64)
    else:
        state_idx = np.broadcast_to(np.asarray(state_idx, dtype=np.int64), (n,)).copy()
    if enc_bits is None:
        enc_bits = rng.integers(0, 2, size=n, dtype=np.int64)
    else:
        enc_bits = np.broadcast_to(np.asarray(enc_bits, dtype=np.int64), (n,)).copy()
    prep_basis = kernels.PREP_BASIS_OF_STATE[state_idx]
    if isinstance(meas_basis, str):
        if meas_basis == "prep":
            mb = prep_basis.copy()
        elif meas_basis == "plus":
            mb = np.zeros(n, dtype=np.int64)
        elif meas_basis == "cross":
            mb = np.ones(n, dtype=np.int64)
        else:
            raise ValueError(f"unknown measurement-basis selector {meas_basis!r}")
    else:
        mb = np.broadcast_to(np.asarray(meas_basis, dtype=np.int64), (n,)).copy()
    kind, strategy, theta, attack_basis = _kernel_attack_params(attack)
    bob, eve_basis, eve_out = kernels.simulate_photons(
        state_idx, enc_bits, mb, kind, strategy, theta, attack_basis, rng=rng
    )
    return PhotonBatch(
        state_idx=state_idx,
        enc_bits=enc_bits,
        prep_basis=prep_basis,
        meas_basis=mb,
        bob_outcome=bob,
        eve_basis=eve_basis,
        eve_outcome=eve_out,
    )


def probe_information_estimate(batch: PhotonBatch, attack_basis: Basis) -> float:
    """Plug-in MI between the encoded eigenstate label and the probe outcome
    over attacked-basis photons: what the probe learns about the encoding once
    the basis key of each photon is handed to the adversary afterwards."""
    matched = batch.prep_basis == attack_basis.index
    return empirical_mutual_information(
        joint_counts(batch.encoded_label[matched], batch.eve_outcome[matched], 2, 2)
    )


@dataclass(frozen=True)
class SweepPoint:
    theta: float
    d_theory: float
    d_matched_empirical: float
    d_overall_empirical: float
    mi_empirical: float
    i0_at_d: float


def sweep_theta(
    thetas,
    n_photons: int,
    seed: int,
    attack_basis: Basis = Basis.PLUS,
) -> list[SweepPoint]:
    """One Monte-Carlo batch per theta with independent derived sub-seeds."""
    from .rng import derive_subseed, make_rng

    points = []
    for i, theta in enumerate(thetas):
        rng = make_rng(derive_subseed(seed, i))
        batch = run_photon_batch(
            n_photons, IndividualUTB(theta=float(theta), attack_basis=attack_basis), rng
        )
        matched = batch.prep_basis == attack_basis.index
        errors = batch.errors
        counts = joint_counts(
            batch.encoded_label[matched], batch.eve_outcome[matched], 2, 2
        )
        d_theory = d_of_theta(float(theta))
        points.append(
            SweepPoint(
                theta=float(theta),
                d_theory=d_theory,
                d_matched_empirical=float(errors[matched].mean()),
                d_overall_empirical=float(errors.mean()),
                mi_empirical=empirical_mutual_information(counts),
                i0_at_d=i0_bound(d_theory),
            )
        )
    return points


SWEEP_CSV_HEADER = "theta,d_theory,d_matched_empirical,d_overall_empirical,mi_empirical,i0_at_d"
BOUNDS_CSV_HEADER = "d,i0,i1,linear,eps_tilde"


def sweep_csv(points: list[SweepPoint]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for p in points:
        lines.append(
            f"{p.theta:.10g},{p.d_theory:.10g},{p.d_matched_empirical:.10g},"
            f"{p.d_overall_empirical:.10g},{p.mi_empirical:.10g},{p.i0_at_d:.10g}"
        )
    return "\n".join(lines) + "\n"


def bounds_csv(d_grid) -> str:
    """Bound curves over a d_m grid in [0, 1/4]; the pole must not be in the
    grid (PoleError names the offending point)."""
    curves = {kind: bound_curve(kind, d_grid) for kind in BoundKind}
    lines = [BOUNDS_CSV_HEADER]
    for i, d in enumerate(np.asarray(d_grid, dtype=np.float64)):
        lines.append(
            f"{float(d):.10g},{curves[BoundKind.I0][i].value:.10g},"
            f"{curves[BoundKind.I1][i].value:.10g},"
            f"{curves[BoundKind.SMALL_DM_LINEAR][i].value:.10g},"
            f"{curves[BoundKind.EPSILON_TILDE][i].value:.10g}"
        )
    return "\n".join(lines) + "\n"

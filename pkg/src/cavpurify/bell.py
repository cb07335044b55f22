"""Bell-state algebra: twirling, Werner/Bell-diagonal constructors, and the
index plumbing for two-qubit maps and measurements on four-qubit states.

Basis conventions
-----------------
* Two-qubit computational order |00>, |01>, |10>, |11>.
* Bell order (Psi-, Phi-, Phi+, Psi+); Bell-diagonal weight tuples
  (F, F1, F2, F3) follow this order, with F the singlet fidelity.
* Four-qubit states are 16x16 matrices over qubits (A1, B1, A2, B2) in
  row-major tensor order.  Operations on the (A1, A2) or (B1, B2) pairs go
  through explicit index permutation, never through ad-hoc reshapes at call
  sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

BELL_LABELS = ("psi_minus", "phi_minus", "phi_plus", "psi_plus")

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_TOL = 1e-10


def bell_vectors(phi: float = 0.0) -> np.ndarray:
    """Rows (Psi-, Phi-_phi, Phi+_phi, Psi+) in the computational basis.

    Phi+-_phi = (e^{-i phi}|00> +- e^{i phi}|11>)/sqrt2 carries the
    coherent-state phase phi; Psi+- are phi-independent.
    """
    s2 = math.sqrt(2.0)
    em, ep = np.exp(-1j * phi), np.exp(1j * phi)
    return np.array(
        [
            [0, 1 / s2, -1 / s2, 0],
            [em / s2, 0, 0, -ep / s2],
            [em / s2, 0, 0, ep / s2],
            [0, 1 / s2, 1 / s2, 0],
        ],
        dtype=complex,
    )


def b_unitaries() -> np.ndarray:
    """The four local unitaries b_j generating the twirls, shape (4, 2, 2).

    b1 = (1 + i sx)/sqrt2, b2 = (1 - i sy)/sqrt2, b3 = |1><1| + i|0><0|, b4 = 1.
    """
    s2 = math.sqrt(2.0)
    return np.stack(
        [
            (_I2 + 1j * _SX) / s2,
            (_I2 - 1j * _SY) / s2,
            np.diag([1j, 1.0]).astype(complex),
            _I2.copy(),
        ]
    )


@dataclass(frozen=True)
class QubitPairState:
    """4x4 density matrix of one qubit pair (computational basis)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise PreconditionError("QubitPairState needs a 4x4 matrix")
        object.__setattr__(self, "rho", rho)

    def validate(self, hermiticity_tol=HERMITICITY_TOL, trace_tol=TRACE_TOL, eig_tol=EIGENVALUE_TOL):
        rho = self.rho
        if np.abs(rho - rho.conj().T).max() > hermiticity_tol:
            raise PreconditionError("pair state is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > trace_tol:
            raise PreconditionError("pair state trace differs from 1")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -eig_tol:
            raise PreconditionError("pair state has a negative eigenvalue")
        return self

    def fidelity(self) -> float:
        """Singlet fidelity <Psi-|rho|Psi->."""
        v = bell_vectors()[0]
        return float(np.real(v.conj() @ self.rho @ v))

    def bell_weights(self, phi: float = 0.0) -> np.ndarray:
        """Diagonal of rho in the Bell basis, order (Psi-, Phi-, Phi+, Psi+)."""
        vs = bell_vectors(phi)
        return np.real(np.einsum("ki,ij,kj->k", vs.conj(), self.rho, vs))


@dataclass(frozen=True)
class FourQubitState:
    """16x16 matrix over qubits (A1, B1, A2, B2); trace may be < 1 after postselection."""

    rho4: np.ndarray

    def __post_init__(self):
        rho4 = np.asarray(self.rho4, dtype=complex)
        if rho4.shape != (16, 16):
            raise PreconditionError("FourQubitState needs a 16x16 matrix")
        object.__setattr__(self, "rho4", rho4)

    def trace(self) -> float:
        return float(np.trace(self.rho4).real)


@dataclass(frozen=True)
class MeasurementOutcome:
    """One projective outcome on a qubit pair: label in {0..3} meaning |00>..|11>."""

    outcome: int
    probability: float
    state: QubitPairState | None  # None flags a zero-probability branch


def pair_product(rho_a: QubitPairState, rho_b: QubitPairState) -> FourQubitState:
    """rho^{A1,B1} (x) rho^{A2,B2} in the canonical (A1, B1, A2, B2) order."""
    return FourQubitState(np.kron(rho_a.rho, rho_b.rho))


def werner_state(fidelity: float) -> QubitPairState:
    """Werner state: singlet weight F, the three triplet weights (1-F)/3 each."""
    if not 0.0 <= fidelity <= 1.0:
        raise PreconditionError(f"Werner fidelity must lie in [0, 1], got {fidelity}")
    rest = (1.0 - fidelity) / 3.0
    return bell_diag_state(fidelity, rest, rest, rest)


def bell_diag_state(f: float, f1: float, f2: float, f3: float) -> QubitPairState:
    """Bell mixture with weights (F, F1, F2, F3) on (Psi-, Phi-, Phi+, Psi+)."""
    w = np.array([f, f1, f2, f3], dtype=float)
    if np.any(w < -1e-12) or np.any(w > 1 + 1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise PreconditionError(f"Bell weights must lie in [0,1] and sum to 1, got {w}")
    vs = bell_vectors()
    rho = np.einsum("k,ki,kj->ij", w, vs, vs.conj())
    return QubitPairState(rho)


def rho_psi(fidelity: float) -> QubitPairState:
    """F |Psi-><Psi-| + (1-F) |Psi+><Psi+|, the repeater-generated Bell mixture."""
    if not 0.0 <= fidelity <= 1.0:
        raise PreconditionError(f"rho_psi fidelity must lie in [0, 1], got {fidelity}")
    return bell_diag_state(fidelity, 0.0, 0.0, 1.0 - fidelity)


def twirl_bell_diagonal(state: QubitPairState) -> QubitPairState:
    """(1/4) sum_j (B_j B_j)^dag rho (B_j B_j) with B_j = b_j (x) b_j.

    Projects any two-qubit state onto the Bell diagonal while keeping every
    Bell-basis diagonal entry fixed.
    """
    out = np.zeros((4, 4), dtype=complex)
    for b in b_unitaries():
        bb = np.kron(b, b)
        bb2 = bb @ bb
        out += bb2.conj().T @ state.rho @ bb2
    return QubitPairState(out / 4.0)


def twirl_werner(state: QubitPairState, bd_tol: float = 1e-9) -> QubitPairState:
    """(1/3) sum_{j=1..3} B_j^dag rho_BD B_j: Bell-diagonal -> Werner form.

    Requires a Bell-diagonal input (off-diagonal residual below ``bd_tol``);
    the singlet weight is preserved and the triplet weights are averaged.
    """
    vs = bell_vectors()
    in_bell = vs.conj() @ state.rho @ vs.T
    off = in_bell - np.diag(np.diag(in_bell))
    if np.abs(off).max() > bd_tol:
        raise PreconditionError(
            f"twirl_werner needs a Bell-diagonal input (residual {np.abs(off).max():.2e})"
        )
    out = np.zeros((4, 4), dtype=complex)
    for b in b_unitaries()[:3]:
        bb = np.kron(b, b)
        out += bb.conj().T @ state.rho @ bb
    return QubitPairState(out / 3.0)


def _pair_permutation(targets):
    """Row-axis permutation putting the target pair first; also its inverse."""
    qa, qb = targets
    if qa == qb or not (0 <= qa < 4 and 0 <= qb < 4):
        raise PreconditionError(f"targets must be two distinct qubits in 0..3, got {targets}")
    rest = [q for q in range(4) if q not in (qa, qb)]
    perm = [qa, qb, *rest]
    inv = np.argsort(perm)
    return perm, list(inv)


def _to_pair_tensor(rho4: np.ndarray, targets):
    """Reshape to (4, 4, 4, 4) = (pair_row, rest_row, pair_col, rest_col)."""
    perm, inv = _pair_permutation(targets)
    t = rho4.reshape([2] * 8)
    axes = perm + [p + 4 for p in perm]
    return t.transpose(axes).reshape(4, 4, 4, 4), inv


def _from_pair_tensor(t: np.ndarray, inv):
    axes = inv + [p + 4 for p in inv]
    return t.reshape([2] * 8).transpose(axes).reshape(16, 16)


def embed_two_qubit_map(op, targets, state: FourQubitState) -> FourQubitState:
    """Apply a two-qubit map to qubits ``targets`` of a four-qubit state.

    ``op`` is either a 4x4 matrix K (applied as K rho K^dag) or a
    TwoQubitChannel.  The output is left unnormalized so its trace carries
    the success weight of a non-trace-preserving map.
    """
    t, inv = _to_pair_tensor(state.rho4, targets)
    entries = getattr(op, "entries", None)
    if entries is not None:
        out = np.einsum("klij,iajb->kalb", entries, t)
    else:
        k = np.asarray(op, dtype=complex)
        if k.shape != (4, 4):
            raise PreconditionError("matrix backend must be 4x4")
        out = np.einsum("ki,iajb,lj->kalb", k, t, k.conj())
    return FourQubitState(_from_pair_tensor(out, inv))


def apply_local(state: QubitPairState, u: np.ndarray, qubit: int) -> QubitPairState:
    """Conjugate a pair state by a single-qubit unitary on qubit 0 or 1."""
    full = np.kron(u, _I2) if qubit == 0 else np.kron(_I2, u)
    return QubitPairState(full @ state.rho @ full.conj().T)


def measure_pair(state: FourQubitState, targets) -> list[MeasurementOutcome]:
    """Project the target pair onto |00>..|11>; condition the remaining pair.

    Returns the four outcomes with probabilities (normalized by the input
    trace) and the normalized conditional state of the two untouched qubits,
    kept in their original relative order.  Zero-probability branches carry
    ``state=None``.
    """
    t, _ = _to_pair_tensor(state.rho4, targets)
    total = state.trace()
    if total <= 0:
        raise PreconditionError("measure_pair needs a positive-trace state")
    results = []
    for outcome in range(4):
        block = t[outcome, :, outcome, :]
        p = float(np.trace(block).real)
        if p <= 1e-14:
            results.append(MeasurementOutcome(outcome, 0.0, None))
        else:
            results.append(
                MeasurementOutcome(outcome, p / total, QubitPairState(block / p))
            )
    return results

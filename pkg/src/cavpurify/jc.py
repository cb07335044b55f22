"""Exact sequential resonant Jaynes-Cummings evolution of two qubits.

Two qubits cross a single-mode cavity one after the other and interact
resonantly, H = g(a sigma_+ + a^dag sigma_-) in the interaction picture.
The joint pure state is stored as four unnormalized field components
g_ij attached to the two-qubit basis |ij>.  The large-nbar branch
approximation splits the evolved state into three coherent branches
(psi_star paired with |alpha>, psi_+/- with |alpha e^{+-i g tau/sqrt(nbar)}>).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, TruncationError
from .fock import FieldVector, coherent_amplitudes

# Cumulative truncation loss beyond which sequential evolution is rejected.
# Loss between 1e-6 and this limit is legal but flagged via drop_warning.
DROP_ERROR = 1e-4
DROP_WARN = 1e-6

_ATOMS = {"first": 0, "second": 1}


@dataclass(frozen=True)
class AtomFieldState:
    """Pure state of two qubits and the field: amps[i, j, n] = <ij, n|psi>.

    ``dropped_mass`` accumulates the probability discarded at the truncation
    edge across jcm_step calls; it is zero for states supported away from the
    top of the basis.
    """

    amps: np.ndarray  # (2, 2, n_f) complex
    dropped_mass: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape[:2] != (2, 2) or amps.ndim != 3:
            raise PreconditionError("AtomFieldState amplitudes must have shape (2, 2, n_f)")
        object.__setattr__(self, "amps", amps)

    @property
    def n_f(self) -> int:
        return self.amps.shape[2]

    @property
    def drop_warning(self) -> bool:
        return self.dropped_mass > DROP_WARN

    def component(self, i: int, j: int) -> FieldVector:
        """Field component attached to qubit basis state |ij>."""
        return FieldVector(self.amps[i, j].copy())

    def components(self):
        """The four field components in |00>,|01>,|10>,|11> order."""
        return [self.component(i, j) for i in (0, 1) for j in (0, 1)]

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True)
class BranchDecomposition:
    """Coherent-branch approximation of the evolved two-qubit + field state.

    psi_star rides on |alpha|, psi_plus on |alpha e^{+i g tau/sqrt(nbar)}> and
    psi_minus on |alpha e^{-i g tau/sqrt(nbar)}>; all three are unnormalized
    two-qubit amplitude vectors in the computational basis.
    """

    psi_star: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    label_star: complex
    label_plus: complex
    label_minus: complex

    def norm2(self) -> float:
        return float(
            np.sum(np.abs(self.psi_star) ** 2)
            + np.sum(np.abs(self.psi_plus) ** 2)
            + np.sum(np.abs(self.psi_minus) ** 2)
        )


@dataclass(frozen=True)
class RegimeDiagnostics:
    """Time-window diagnostics: sqrt(2) < g tau << sqrt(nbar)."""

    nbar: float
    gtau: float
    orthogonal: bool      # g tau > sqrt(2): the three coherent branches separate
    linearized: bool      # g tau <= sqrt(nbar)/5: Rabi linearization still holds
    valid: bool


def jcm_step(state: AtomFieldState, atom: str, gtau: float, drop_tol: float = DROP_ERROR) -> AtomFieldState:
    """One exact resonant JCM interaction of the designated qubit with the field.

    |1,n> -> cos(O_n t)|1,n> - i sin(O_n t)|0,n+1> and
    |0,n+1> -> cos(O_n t)|0,n+1> - i sin(O_n t)|1,n>, with O_n = sqrt(n+1)
    (g = 1) and |0,0> fixed.  The amplitude emitted past the cutoff from
    |1,n_f-1> is dropped and its mass added to ``dropped_mass``; evolution is
    rejected once the cumulative loss exceeds ``drop_tol``.
    """
    if atom not in _ATOMS:
        raise PreconditionError(f"atom must be 'first' or 'second', got {atom!r}")
    if gtau < 0:
        raise PreconditionError(f"gtau must be >= 0, got {gtau}")
    n_f = state.n_f
    axis = _ATOMS[atom]
    omega = np.sqrt(np.arange(1, n_f, dtype=float))  # O_n for n = 0..n_f-2
    c, s = np.cos(omega * gtau), np.sin(omega * gtau)
    omega_top = math.sqrt(float(n_f))

    a = np.moveaxis(state.amps, axis, 0)  # (2, spectator, n_f), active qubit first
    u, v = a[0], a[1]
    out = np.empty_like(a)
    out[0][..., 0] = u[..., 0]
    out[0][..., 1:] = c * u[..., 1:] - 1j * s * v[..., :-1]
    out[1][..., :-1] = c * v[..., :-1] - 1j * s * u[..., 1:]
    # Top excited level: its partner |0, n_f> lies past the cutoff, so the
    # sin-component is discarded and only the cos-component survives.
    out[1][..., -1] = math.cos(omega_top * gtau) * v[..., -1]
    step_drop = float(np.sum(np.abs(math.sin(omega_top * gtau) * v[..., -1]) ** 2))

    dropped = state.dropped_mass + step_drop
    if dropped > drop_tol:
        raise TruncationError(
            f"cumulative truncation loss {dropped:.3e} exceeds {drop_tol:.1e}; "
            f"increase n_f beyond {n_f}"
        )
    return AtomFieldState(np.moveaxis(out, 0, axis), dropped_mass=dropped)


def evolve_sequential(
    c,
    alpha: complex,
    gtau1: float,
    gtau2: float,
    n_f: int,
    drop_tol: float = DROP_ERROR,
) -> AtomFieldState:
    """Prepare (c . |ij>) |alpha> and run qubit 1 for gtau1 then qubit 2 for gtau2."""
    c = np.asarray(c, dtype=complex).reshape(4)
    if abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-10:
        raise PreconditionError("two-qubit amplitudes must be normalized to 1e-10")
    w = coherent_amplitudes(alpha, n_f).amplitudes
    state = AtomFieldState(c.reshape(2, 2, 1) * w)
    state = jcm_step(state, "first", gtau1, drop_tol=drop_tol)
    return jcm_step(state, "second", gtau2, drop_tol=drop_tol)


def branch_decompose(c, alpha: complex, gtau: float) -> BranchDecomposition:
    """Large-nbar splitting of the evolved state into its three coherent branches.

    psi_star = (c01-c10)/sqrt2 |Psi-> + (c00 e^{i phi} - c11 e^{-i phi})/sqrt2 |Phi-_phi>,
    psi_+- = (c00 e^{i phi} + c11 e^{-i phi} -+ c01 -+ c10) e^{+-i sqrt(nbar) g tau}/2
             * (|Phi+_phi> -+ |Psi+>)/sqrt2,
    each expressed back in the computational basis.
    """
    alpha = complex(alpha)
    if abs(alpha) < 1.0:
        raise PreconditionError("branch decomposition requires |alpha| >= 1")
    c = np.asarray(c, dtype=complex).reshape(4)
    c00, c01, c10, c11 = c
    nbar = abs(alpha) ** 2
    phi = np.angle(alpha)
    s2 = math.sqrt(2.0)

    psi_minus_vec = np.array([0, 1, -1, 0], dtype=complex) / s2
    psi_plus_vec = np.array([0, 1, 1, 0], dtype=complex) / s2
    phi_minus_vec = np.array([np.exp(-1j * phi), 0, 0, -np.exp(1j * phi)], dtype=complex) / s2
    phi_plus_vec = np.array([np.exp(-1j * phi), 0, 0, np.exp(1j * phi)], dtype=complex) / s2

    star = (c01 - c10) / s2 * psi_minus_vec + (
        c00 * np.exp(1j * phi) - c11 * np.exp(-1j * phi)
    ) / s2 * phi_minus_vec

    common = c00 * np.exp(1j * phi) + c11 * np.exp(-1j * phi)
    rot = math.sqrt(nbar) * gtau
    plus = (common - c01 - c10) * np.exp(1j * rot) / 2.0 * (phi_plus_vec - psi_plus_vec) / s2
    minus = (common + c01 + c10) * np.exp(-1j * rot) / 2.0 * (phi_plus_vec + psi_plus_vec) / s2

    turn = np.exp(1j * gtau / math.sqrt(nbar))
    return BranchDecomposition(
        psi_star=star,
        psi_plus=plus,
        psi_minus=minus,
        label_star=alpha,
        label_plus=alpha * turn,
        label_minus=alpha * np.conj(turn),
    )


def branch_state(decomp: BranchDecomposition, n_f: int) -> AtomFieldState:
    """Reconstruct the branch approximation as an AtomFieldState on n_f levels."""
    amps = np.zeros((2, 2, n_f), dtype=complex)
    for psi, label in (
        (decomp.psi_star, decomp.label_star),
        (decomp.psi_plus, decomp.label_plus),
        (decomp.psi_minus, decomp.label_minus),
    ):
        amps += psi.reshape(2, 2, 1) * coherent_amplitudes(label, n_f).amplitudes
    return AtomFieldState(amps)


def coherent_overlap(nbar: float, gtau: float) -> complex:
    """Overlap <alpha|alpha e^{i g tau/sqrt(nbar)}> = exp[-nbar(1 - e^{i g tau/sqrt(nbar)})]."""
    if nbar <= 0:
        raise PreconditionError("coherent_overlap requires nbar > 0")
    return complex(np.exp(-nbar * (1.0 - np.exp(1j * gtau / math.sqrt(nbar)))))


def coherent_overlap_asymptotic(gtau: float) -> float:
    """Large-nbar limit e^{-(g tau)^2 / 2} of the branch overlap magnitude."""
    return math.exp(-0.5 * gtau * gtau)


def validate_regime(nbar: float, gtau: float) -> RegimeDiagnostics:
    """Report (never enforce) the sqrt(2) < g tau << sqrt(nbar) window.

    The soft upper inequality is operationalized as g tau <= sqrt(nbar)/5;
    it marks where the coherent-branch linearization starts to degrade.
    """
    orthogonal = gtau > math.sqrt(2.0)
    linearized = nbar > 0 and gtau <= math.sqrt(nbar) / 5.0
    return RegimeDiagnostics(
        nbar=nbar,
        gtau=gtau,
        orthogonal=orthogonal,
        linearized=linearized,
        valid=orthogonal and linearized,
    )

"""Field-measurement postselection.

Projecting the evolved atom-field state onto a coherent state (W1) or onto a
quadrature eigenstate (W2) leaves an unnormalized two-qubit operation whose
squared norm is the success probability (density, for quadrature outcomes).
In the right regime both approach the ideal entangling projector
M_phi = |Psi-><Psi-| + |Phi-_phi><Phi-_phi|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell import bell_vectors
from .channels import TwoQubitChannel
from .config import SimConfig
from .errors import PreconditionError, UndefinedFidelityError
from .fock import QuadratureSpec, coherent_amplitudes, quadrature_projector_row
from .jc import AtomFieldState, branch_decompose, evolve_sequential


@dataclass(frozen=True)
class PostselectedState:
    """Unnormalized two-qubit amplitudes after a field projection.

    ``weight`` is the squared norm: the success probability of a coherent
    projection, or the probability density P(p) of a quadrature outcome.
    """

    amplitudes: np.ndarray  # complex[4], |00>,|01>,|10>,|11>
    weight: float

    def normalized(self) -> np.ndarray:
        if self.weight <= 0:
            raise PreconditionError("cannot normalize a zero-weight postselected state")
        return self.amplitudes / math.sqrt(self.weight)


def ideal_m(phi: float = 0.0) -> np.ndarray:
    """M_phi = |Psi-><Psi-| + |Phi-_phi><Phi-_phi| in the computational basis."""
    vs = bell_vectors(phi)
    return np.outer(vs[0], vs[0].conj()) + np.outer(vs[1], vs[1].conj())


def project_coherent(state: AtomFieldState, alpha: complex) -> PostselectedState:
    """W1: project the field onto |alpha>; amplitudes_ij = <alpha|g_ij>."""
    probe = coherent_amplitudes(alpha, state.n_f).amplitudes
    amps = np.einsum("n,ijn->ij", probe.conj(), state.amps).reshape(4)
    return PostselectedState(amps, float(np.sum(np.abs(amps) ** 2)))


def project_quadrature(state: AtomFieldState, spec: QuadratureSpec) -> PostselectedState:
    """W2: project the field onto |x_theta>; amplitudes_ij = <x_theta|g_ij>."""
    row = quadrature_projector_row(state.n_f, spec)
    amps = np.einsum("n,ijn->ij", row, state.amps).reshape(4)
    return PostselectedState(amps, float(np.sum(np.abs(amps) ** 2)))


def quadrature_pdf(state: AtomFieldState, p_grid, theta: float | None = None) -> np.ndarray:
    """P(p) = sum_ij |<p|g_ij>|^2 on a sorted grid (theta defaults to pi/2)."""
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.ndim != 1 or np.any(np.diff(p_grid) <= 0):
        raise PreconditionError("p_grid must be strictly increasing")
    th = math.pi / 2.0 if theta is None else theta
    rows = quadrature_projector_row(state.n_f, QuadratureSpec(th, 0.0), x=p_grid)
    amps = np.einsum("ijn,nk->ijk", state.amps, rows)
    return np.sum(np.abs(amps) ** 2, axis=(0, 1))


def success_probability(
    state: AtomFieldState,
    window=(-2.0, 2.0),
    dp: float = 0.01,
    theta: float | None = None,
) -> float:
    """P_H: trapezoidal integral of the quadrature pdf over the window."""
    lo, hi = window
    if not lo < hi:
        raise PreconditionError(f"window must satisfy lo < hi, got {window}")
    npts = max(3, int(round((hi - lo) / dp)) + 1)
    grid = np.linspace(lo, hi, npts)
    return float(np.trapezoid(quadrature_pdf(state, grid, theta=theta), grid))


def fidelity_star(state: AtomFieldState, spec: QuadratureSpec, c, phi: float) -> float:
    """F* = |<psi_star_hat | W2 psi_hat>|^2 with both vectors unit-normalized.

    psi_star comes from the coherent-branch splitting of the input amplitudes
    c; inputs with no star component (e.g. c00 = c11, c01 = c10 at phi = 0)
    have no defined fidelity and raise UndefinedFidelityError.
    """
    c = np.asarray(c, dtype=complex).reshape(4)
    if abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-9:
        raise PreconditionError("fidelity_star expects normalized input amplitudes")
    alpha = np.exp(1j * phi)  # branch target depends on c and phi only
    star = branch_decompose(c, alpha, 0.0).psi_star
    star_norm = np.linalg.norm(star)
    if star_norm < 1e-12:
        raise UndefinedFidelityError("input state has no psi_star component")
    post = project_quadrature(state, spec)
    if post.weight <= 0:
        raise PreconditionError("quadrature projection has zero weight")
    return float(abs(np.vdot(star / star_norm, post.normalized())) ** 2)


def w2_kraus(config: SimConfig) -> TwoQubitChannel:
    """Rank-1 Kraus matrix of W2: columns are quadrature-projected basis evolutions.

    K[:, i] = W2 applied to the i-th computational basis state, so the induced
    channel is rho -> K rho K^dag.  Lossless parameters only.
    """
    if config.lossy:
        raise PreconditionError("w2_kraus is the lossless operation; use extract_channel")
    n_f = config.resolved_n_f
    spec = QuadratureSpec(config.resolved_theta, config.resolved_p)
    k = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        c = np.zeros(4, dtype=complex)
        c[i] = 1.0
        evolved = evolve_sequential(
            c, config.alpha, config.gtau1, config.resolved_gtau2, n_f
        )
        k[:, i] = project_quadrature(evolved, spec).amplitudes
    return TwoQubitChannel.from_kraus(k)


def ph_asymptotics(c, phi: float, window=(-2.0, 2.0)) -> tuple[float, float]:
    """Large-nbar estimates of P_H built from erf over the window.

    Returns ``(divided, multiplied)``: the printed closed form divides the
    Gaussian window integral by the star-branch norm squared (and can exceed
    1), while the dimensionally consistent reading multiplies by it.  Both
    are diagnostics; the numerical integral in success_probability is
    authoritative.
    """
    c = np.asarray(c, dtype=complex).reshape(4)
    star = branch_decompose(c, np.exp(1j * phi), 0.0).psi_star
    ns = float(np.sum(np.abs(star) ** 2))
    lo, hi = window
    gauss = 0.5 * (math.erf(hi) - math.erf(lo))
    if ns <= 0:
        raise UndefinedFidelityError("input state has no psi_star component")
    return gauss / ns, gauss * ns

"""Truncated Fock-space algebra.

Coherent states, ladder operators, quadrature wavefunctions and Husimi Q
evaluation on a photon-number basis cut off at ``n_f`` levels.  All rates are
expressed in units of the vacuum coupling g (g = 1 internally) and all times
as g*tau, so every quantity here is dimensionless.

Conventions
-----------
* Quadrature eigenstates satisfy x_theta = (a e^{-i theta} + a^dag e^{i theta})/sqrt(2),
  and we fix the phase convention <x_theta|n> = e^{-i n theta} h_n(x) with h_n the
  real normalized Hermite functions.  For real alpha this centres the
  p-quadrature (theta = pi/2) distribution of |alpha> at p = 0.
* Factorials are never formed explicitly; all amplitude ladders use stable
  recurrences (n! overflows float64 near n = 171).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, TruncationError

# Tail mass above which a coherent-state truncation is rejected outright,
# and below which the result may be flagged as numerically normalized.
COHERENT_TAIL_ERROR = 1e-4
COHERENT_TAIL_NORMALIZED = 1e-8


def truncation_dim(nbar: float) -> int:
    """Photon-number cutoff floor(nbar + 4*sqrt(nbar)) for mean photon number nbar.

    This is the chopped-Hilbert-space rule used for the lossy superoperator
    runs; callers that need amplitude-level (1e-6 and below) agreement at the
    top of the basis should pad beyond it.
    """
    if nbar < 1:
        raise PreconditionError(f"truncation_dim requires nbar >= 1, got {nbar}")
    return int(math.floor(nbar + 4.0 * math.sqrt(nbar)))


@dataclass(frozen=True)
class FieldVector:
    """Complex amplitudes of a (possibly unnormalized) field state over |0..n_f-1>."""

    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise PreconditionError("FieldVector needs a 1-d amplitude array")
        if not np.all(np.isfinite(amps.view(float))):
            raise PreconditionError("FieldVector amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_f(self) -> int:
        return self.amplitudes.size

    def norm2(self) -> float:
        """Squared norm sum_n |c_n|^2."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def inner(self, other: "FieldVector") -> complex:
        """<self|other> over the common truncation."""
        n = min(self.n_f, other.n_f)
        return complex(np.vdot(self.amplitudes[:n], other.amplitudes[:n]))


@dataclass(frozen=True)
class QuadratureSpec:
    """Local-oscillator phase theta and quadrature coordinate x_theta."""

    theta: float
    value: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * math.pi))
        object.__setattr__(self, "value", float(self.value))


def coherent_amplitudes(alpha: complex, n_f: int) -> FieldVector:
    """Truncated coherent state c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!).

    Built with the recurrence c_{n+1} = c_n * alpha / sqrt(n+1).  The result
    is flagged ``normalized`` only when the Poisson tail mass beyond the
    cutoff is below 1e-8; a tail of 1e-4 or more raises TruncationError.
    """
    if n_f < 1:
        raise PreconditionError(f"coherent_amplitudes requires n_f >= 1, got {n_f}")
    alpha = complex(alpha)
    c = np.zeros(n_f, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(n_f - 1):
        c[n + 1] = c[n] * alpha / math.sqrt(n + 1)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    if tail >= COHERENT_TAIL_ERROR:
        raise TruncationError(
            f"coherent-state tail mass {tail:.3e} at n_f={n_f} for |alpha|={abs(alpha):.3f}"
        )
    return FieldVector(c, normalized=tail < COHERENT_TAIL_NORMALIZED)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Normalized Hermite functions h_n(x) for n < n_max, shape (n_max, len(x)).

    h_0(x) = pi^{-1/4} e^{-x^2/2}, h_1 = sqrt(2) x h_0, and
    h_n = x sqrt(2/n) h_{n-1} - sqrt((n-1)/n) h_{n-2}.  Deep in the classically
    forbidden region h_0 underflows to exact zero and the recurrence keeps it
    there, which is the correct sub-double-precision answer.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.zeros((n_max, x.size))
    with np.errstate(under="ignore"):
        h[0] = math.pi ** -0.25 * np.exp(-0.5 * x**2)
        if n_max > 1:
            h[1] = math.sqrt(2.0) * x * h[0]
        for n in range(2, n_max):
            h[n] = x * math.sqrt(2.0 / n) * h[n - 1] - math.sqrt((n - 1) / n) * h[n - 2]
    return h


def quadrature_wavefunction(n: int, spec: QuadratureSpec) -> complex:
    """<x_theta|n> = e^{-i n theta} h_n(x)."""
    if n < 0:
        raise PreconditionError(f"photon number must be >= 0, got {n}")
    hn = hermite_functions(n + 1, spec.value)[n, 0]
    return complex(np.exp(-1j * n * spec.theta) * hn)


def quadrature_projector_row(n_max: int, spec: QuadratureSpec, x=None) -> np.ndarray:
    """Vector of <x_theta|n> for n < n_max; with an ``x`` grid, shape (n_max, len(x)).

    This is the workhorse for projecting Fock-basis states onto quadrature
    eigenstates; the single-n quadrature_wavefunction delegates here.
    """
    xs = spec.value if x is None else x
    h = hermite_functions(n_max, xs)
    phases = np.exp(-1j * spec.theta * np.arange(n_max))
    row = phases[:, None] * h
    return row[:, 0] if x is None else row


def husimi_q(field_components, beta: complex) -> float:
    """Husimi Q(beta) = (1/pi) sum_ij |<beta|g_ij>|^2 of a reduced field state.

    ``field_components`` are the unnormalized FieldVectors |g_ij> of a pure
    joint state, so the reduced field density is sum_ij |g_ij><g_ij|.
    """
    components = list(field_components)
    if not components:
        raise PreconditionError("husimi_q needs at least one field component")
    n_f = components[0].n_f
    probe = coherent_amplitudes(beta, n_f).amplitudes
    total = 0.0
    for g in components:
        total += abs(np.vdot(probe, g.amplitudes[:n_f])) ** 2
    return total / math.pi


def husimi_grid(field_components, xs, ps) -> np.ndarray:
    """Q on the phase-space grid beta = (x + i p)/sqrt(2), shape (len(xs), len(ps))."""
    components = list(field_components)
    n_f = components[0].n_f
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    betas = (xs[:, None] + 1j * ps[None, :]).ravel() / math.sqrt(2.0)
    # Coherent amplitudes for every grid point at once; the recurrence runs
    # over n, vectorized over the grid.
    probes = np.zeros((betas.size, n_f), dtype=complex)
    with np.errstate(under="ignore"):
        probes[:, 0] = np.exp(-0.5 * np.abs(betas) ** 2)
        for n in range(n_f - 1):
            probes[:, n + 1] = probes[:, n] * betas / math.sqrt(n + 1)
    comps = np.stack([g.amplitudes for g in components])  # (ncomp, n_f)
    overlaps = probes.conj() @ comps.T  # (ngrid, ncomp)
    q = np.sum(np.abs(overlaps) ** 2, axis=1) / math.pi
    return q.reshape(xs.size, ps.size)


def destroy(n_f: int) -> np.ndarray:
    """Dense annihilation operator on the truncated basis (diagnostics and tests)."""
    return np.diag(np.sqrt(np.arange(1, n_f, dtype=float)), 1).astype(complex)

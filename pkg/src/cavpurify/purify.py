"""The aB and aD purification protocols.

Both protocols consume two qubit pairs per round.  The bilateral two-qubit
operation may be the ideal projector M (a 4x4 matrix backend), the lossless
postselected operation W2 (rank-1 Kraus backend), or a general extracted
channel.  Unlike the original schemes, no measurement outcome is discarded:
outcomes 00/11 trigger a sigma_x correction on the surviving pair and all
four branches are kept.

Measurement branches are enumerated exactly on density matrices; nothing is
Monte-Carlo sampled, so every reported probability is an exact expectation.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bell import (
    FourQubitState,
    QubitPairState,
    apply_local,
    b_unitaries,
    embed_two_qubit_map,
    measure_pair,
    pair_product,
    twirl_bell_diagonal,
    twirl_werner,
)
from .channels import TwoQubitChannel
from .errors import ConvergenceError, PreconditionError

_SX = np.array([[0, 1], [1, 0]], dtype=complex)

# Qubit slots in the canonical (A1, B1, A2, B2) order.
_PAIR_A = (0, 2)  # the two qubits flying through cavity A
_PAIR_B = (1, 3)  # the two qubits flying through cavity B
_MEASURED = (2, 3)  # pair (A2, B2) is consumed each round

MAX_ITERATIONS = 50


@dataclass(frozen=True)
class ProtocolStepResult:
    output: QubitPairState
    success_probability: float
    fidelity: float  # <Psi-|output|Psi->
    per_outcome: tuple  # four (outcome, probability, corrected QubitPairState|None)


@dataclass(frozen=True)
class TrajectoryPoint:
    iteration: int
    fidelity: float
    success_probability: float
    cumulative_pairs: float  # prod_k 2/P_k up to this round


@dataclass(frozen=True)
class Trajectory:
    protocol: str
    points: tuple

    def final_fidelity(self) -> float:
        return self.points[-1].fidelity if self.points else float("nan")


def _bilateral(rho_a: QubitPairState, rho_b: QubitPairState, backend) -> tuple[FourQubitState, float]:
    """Apply the backend on (A1,A2) and (B1,B2); return the state and its trace."""
    state = pair_product(rho_a, rho_b)
    state = embed_two_qubit_map(backend, _PAIR_A, state)
    state = embed_two_qubit_map(backend, _PAIR_B, state)
    p = state.trace()
    if p <= 1e-15:
        raise PreconditionError("bilateral operation succeeded with zero probability")
    return FourQubitState(state.rho4 / p), p


def _measure_and_correct(state: FourQubitState) -> tuple[QubitPairState, tuple]:
    """Measure (A2, B2); flip A1 by sigma_x on 00/11 outcomes; mix all branches."""
    branches = []
    mixed = np.zeros((4, 4), dtype=complex)
    for rec in measure_pair(state, _MEASURED):
        kept = rec.state
        if kept is not None and rec.outcome in (0, 3):
            kept = apply_local(kept, _SX, 0)
        branches.append((rec.outcome, rec.probability, kept))
        if kept is not None:
            mixed += rec.probability * kept.rho
    return QubitPairState(mixed), tuple(branches)


def _check_backend(backend):
    if isinstance(backend, TwoQubitChannel):
        return backend
    backend = np.asarray(backend, dtype=complex)
    if backend.shape != (4, 4):
        raise PreconditionError("backend must be a 4x4 matrix or a TwoQubitChannel")
    return backend


def step_aB(rho_a: QubitPairState, rho_b: QubitPairState, backend) -> ProtocolStepResult:
    """One aB round: Werner twirl, bilateral backend, measure, sigma_x-correct, mix."""
    backend = _check_backend(backend)
    rho_a = twirl_werner(twirl_bell_diagonal(rho_a))
    rho_b = twirl_werner(twirl_bell_diagonal(rho_b))
    state, p = _bilateral(rho_a, rho_b, backend)
    output, branches = _measure_and_correct(state)
    return ProtocolStepResult(output, p, output.fidelity(), branches)


def step_aD(
    rho_a: QubitPairState,
    rho_b: QubitPairState,
    backend,
    apply_final_rotation: bool = True,
) -> ProtocolStepResult:
    """One aD round: Bell-diagonal twirl only, then as aB plus the b3 (x) b3 rotation.

    The final rotation swaps the Phi+- populations; it is a no-op on states
    that never populate Phi+- (ideal backend on rho_psi inputs) but it
    stabilizes the iteration under noisy backends.  ``apply_final_rotation``
    exists so that the unstabilized variant can be studied.
    """
    backend = _check_backend(backend)
    rho_a = twirl_bell_diagonal(rho_a)
    rho_b = twirl_bell_diagonal(rho_b)
    state, p = _bilateral(rho_a, rho_b, backend)
    output, branches = _measure_and_correct(state)
    if apply_final_rotation:
        b3 = b_unitaries()[2]
        output = apply_local(apply_local(output, b3, 0), b3, 1)
    return ProtocolStepResult(output, p, output.fidelity(), branches)


def recursion_aB(fidelity: float) -> tuple[float, float]:
    """Closed-form aB map on Werner fidelity: (F', P)."""
    f = float(fidelity)
    if not -1e-12 <= f <= 1.0 + 1e-12:
        raise PreconditionError(f"fidelity must lie in [0, 1], got {f}")
    f = min(max(f, 0.0), 1.0)
    den = 5.0 - 4.0 * f + 8.0 * f * f
    return (1.0 - 2.0 * f + 10.0 * f * f) / den, den / 18.0


def recursion_aB_mixed(f1: float, f2: float) -> tuple[float, float]:
    """Closed-form aB map for Werner inputs of different fidelities."""
    for f in (f1, f2):
        if not -1e-12 <= f <= 1.0 + 1e-12:
            raise PreconditionError(f"fidelity must lie in [0, 1], got {f}")
    f1 = min(max(float(f1), 0.0), 1.0)
    f2 = min(max(float(f2), 0.0), 1.0)
    den = 5.0 - 2.0 * f1 - 2.0 * f2 + 8.0 * f1 * f2
    return (1.0 - f1 - f2 + 10.0 * f1 * f2) / den, den / 18.0


def recursion_aD(weights) -> tuple[np.ndarray, float]:
    """Closed-form aD map on Bell-diagonal weights (F, F1, F2, F3): (weights', P).

    weights' = ((F^2+F1^2)/D, 2 F2 F3/D, 2 F F1/D, (F2^2+F3^2)/D) with
    D = (F+F1)^2 + (F2+F3)^2 and success probability P = D/2.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise PreconditionError(f"weights must be a normalized 4-tuple, got {weights}")
    f, f1, f2, f3 = (float(v) for v in w)
    d = (f + f1) ** 2 + (f2 + f3) ** 2
    out = np.array([(f * f + f1 * f1) / d, 2 * f2 * f3 / d, 2 * f * f1 / d, (f2 * f2 + f3 * f3) / d])
    return out, d / 2.0


def iterate(
    protocol: str,
    initial: QubitPairState,
    backend,
    iterations: int | None = None,
    target: float | None = None,
    max_iterations: int = MAX_ITERATIONS,
    apply_final_rotation: bool = True,
) -> Trajectory:
    """Feed two copies of the current pair into the chosen step until done.

    Stops after ``iterations`` rounds, or once the fidelity reaches
    ``target`` (ConvergenceError if that never happens within
    ``max_iterations``).  Records per-round fidelity, success probability and
    the cumulative pair cost prod_k 2/P_k.
    """
    if protocol not in ("aB", "aD"):
        raise PreconditionError(f"protocol must be 'aB' or 'aD', got {protocol!r}")
    if (iterations is None) == (target is None):
        raise PreconditionError("specify exactly one of iterations or target")
    if iterations is not None and not 1 <= iterations <= max_iterations:
        raise PreconditionError(f"iterations must lie in 1..{max_iterations}")
    if protocol == "aB" and initial.fidelity() <= 0.5:
        warnings.warn(
            f"aB cannot purify from fidelity {initial.fidelity():.4f} <= 1/2", stacklevel=2
        )

    current = initial
    pairs = 1.0
    points = []
    total = iterations if iterations is not None else max_iterations
    for n in range(1, total + 1):
        if protocol == "aB":
            res = step_aB(current, current, backend)
        else:
            res = step_aD(current, current, backend, apply_final_rotation=apply_final_rotation)
        pairs *= 2.0 / res.success_probability
        points.append(TrajectoryPoint(n, res.fidelity, res.success_probability, pairs))
        current = res.output
        if target is not None and res.fidelity >= target:
            return Trajectory(protocol, tuple(points))
    if target is not None:
        raise ConvergenceError(
            f"{protocol} did not reach fidelity {target} within {max_iterations} rounds "
            f"(best {max(p.fidelity for p in points):.6f})"
        )
    return Trajectory(protocol, tuple(points))


@dataclass(frozen=True)
class ProtocolComparison:
    fidelity: float
    f_next_aB: float
    p_aB: float
    f_next_aD: float
    p_aD: float


def compare_protocols(f_grid) -> list[ProtocolComparison]:
    """Single-round F'(F) and P(F) of both recursions on rho_psi(F) inputs.

    aB first reduces rho_psi(F) to the Werner state of the same fidelity, so
    its closed form applies directly; aD acts on the (F, 0, 0, 1-F) weights.
    """
    rows = []
    for f in np.asarray(f_grid, dtype=float):
        fb, pb = recursion_aB(f)
        wd, pd = recursion_aD([f, 0.0, 0.0, 1.0 - f])
        rows.append(ProtocolComparison(float(f), fb, pb, float(wd[0]), pd))
    return rows


@dataclass(frozen=True)
class ResourceRow:
    iteration: int
    fidelity: float
    pairs: float


def resource_table(protocol: str, f0: float, target: float, max_iterations: int = MAX_ITERATIONS):
    """Closed-form iteration schedule from rho_psi(f0) until ``target`` fidelity.

    Returns the per-round (N, F_N, cumulative pairs) rows; raises
    ConvergenceError when the target is out of reach (e.g. aB from F <= 1/2).
    """
    if protocol not in ("aB", "aD"):
        raise PreconditionError(f"protocol must be 'aB' or 'aD', got {protocol!r}")
    rows = []
    pairs = 1.0
    if protocol == "aB":
        f = float(f0)
        for n in range(1, max_iterations + 1):
            f, p = recursion_aB(f)
            pairs *= 2.0 / p
            rows.append(ResourceRow(n, f, pairs))
            if f >= target:
                return rows
    else:
        w = np.array([f0, 0.0, 0.0, 1.0 - f0], dtype=float)
        for n in range(1, max_iterations + 1):
            w, p = recursion_aD(w)
            pairs *= 2.0 / p
            rows.append(ResourceRow(n, float(w[0]), pairs))
            if w[0] >= target:
                return rows
    raise ConvergenceError(
        f"{protocol} did not reach fidelity {target} within {max_iterations} rounds"
    )

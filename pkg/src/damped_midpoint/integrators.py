"""Time-stepping schemes and trajectory assembly.

Three steppers share one interface: the time-centered (implicit midpoint)
scheme applied directly to the damped system, the same scheme applied
indirectly through the per-step substituting conservative system, and a
classical Runge-Kutta 4 baseline. ``integrate`` drives any of them and
records per-step energy/work ledgers and symplectic defects.

The midpoint step solves the linear factor-pair system M·z' = N·z with

    M = [[I, -(τ/2)·I], [(τ/2)·K + C, I]]
    N = [[I, +(τ/2)·I], [-(τ/2)·K + C, I]]

collected from the centered difference relations; the same builder with
stiffness K + K̃ and zero damping yields the substituting scheme's pair.
The M factor of the direct scheme is constant along a trajectory, so
``integrate`` factors it once and reuses the factorization; the indirect
factor changes with K̃ every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, IntegrationError, InvalidStiffnessError, \
    SingularMatrixError
from .symplectic import symplectic_form, symplectic_defect
from .system import DEFAULT_EPSILON, DampedLinearSystem, EquivalentStiffness, \
    PhaseState, _equivalent_stiffness_arrays, quadratic_energy

METHODS = ("midpoint_direct", "midpoint_indirect", "rk4")


def scheme_factors(K, C, tau: float):
    """Factor pair (M, N) of the time-centered scheme M·z' = N·z.

    Exposed so the factor matrices themselves can be tested for symplectic
    character without forming any inverse.
    """
    K = np.asarray(K, dtype=float)
    C = np.asarray(C, dtype=float)
    n = K.shape[0]
    half = 0.5 * tau
    idx = np.arange(n)
    m = np.zeros((2 * n, 2 * n))
    nn = np.zeros((2 * n, 2 * n))
    m[idx, idx] = 1.0
    m[n + idx, n + idx] = 1.0
    m[idx, n + idx] = -half
    m[n:, :n] = half * K + C
    nn[idx, idx] = 1.0
    nn[n + idx, n + idx] = 1.0
    nn[idx, n + idx] = half
    nn[n:, :n] = C - half * K
    return m, nn


def _midpoint_solver(K, C, tau):
    """Pre-factored solver for repeated steps of one midpoint scheme."""
    m, nn = scheme_factors(K, C, tau)
    return linalg.lu_factor(m), nn


def _midpoint_apply(lu, nn, q, p):
    n = q.shape[0]
    z1 = linalg.lu_solve(lu, nn @ np.concatenate((q, p)))
    return z1[:n], z1[n:]


def _rk4_arrays(K, C, tau, q, p):
    k1q = p
    k1p = -(K @ q) - C @ p
    q2 = q + (0.5 * tau) * k1q
    p2 = p + (0.5 * tau) * k1p
    k2q = p2
    k2p = -(K @ q2) - C @ p2
    q3 = q + (0.5 * tau) * k2q
    p3 = p + (0.5 * tau) * k2p
    k3q = p3
    k3p = -(K @ q3) - C @ p3
    q4 = q + tau * k3q
    p4 = p + tau * k3p
    k4q = p4
    k4p = -(K @ q4) - C @ p4
    sixth = tau / 6.0
    return (q + sixth * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            p + sixth * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))


def _validate_step_args(sys: DampedLinearSystem, s: PhaseState, tau: float):
    if s.n != sys.n:
        raise DimensionError(f"state dimension {s.n} does not match system {sys.n}")
    if not tau > 0.0:
        raise ValueError(f"step size must be positive, got {tau}")


def midpoint_direct_step(sys: DampedLinearSystem, s: PhaseState, tau: float) -> PhaseState:
    """One time-centered step of the damped system itself."""
    _validate_step_args(sys, s, tau)
    lu, nn = _midpoint_solver(sys.K, sys.C, float(tau))
    q1, p1 = _midpoint_apply(lu, nn, s.q, s.p)
    return PhaseState(s.t + tau, q1, p1)


@dataclass(frozen=True)
class IndirectStepInfo:
    """Diagnostics from one indirect step: the probe state, the equivalent
    stiffness derived from it, and whether any component was singular."""

    probe: PhaseState
    ktilde: EquivalentStiffness
    singular: bool


def midpoint_indirect_step(sys: DampedLinearSystem, s: PhaseState, tau: float,
                           epsilon: float = DEFAULT_EPSILON):
    """One step through the substituting conservative system.

    Pipeline: (1) probe step of the damped system by the direct scheme;
    (2) equivalent stiffness K̃ from the probe's coordinate pair; (3) a
    midpoint step of the conservative system with stiffness K + K̃ and no
    damping. When every K̃ component is valid the stage-3 state is returned
    (it reproduces the probe up to round-off); on any singular component
    the probe state is returned unchanged and the step is flagged.

    Returns ``(state, IndirectStepInfo)``.
    """
    _validate_step_args(sys, s, tau)
    tau = float(tau)
    lu, nn = _midpoint_solver(sys.K, sys.C, tau)
    probe_q, probe_p = _midpoint_apply(lu, nn, s.q, s.p)
    diag, valid = _equivalent_stiffness_arrays(sys.C, s.q, probe_q, tau, float(epsilon))
    ks = EquivalentStiffness(diag=diag, valid=valid)
    probe = PhaseState(s.t + tau, probe_q, probe_p)
    if ks.all_valid:
        lu2, n2 = _midpoint_solver(sys.K + np.diag(diag), np.zeros_like(sys.C), tau)
        q1, p1 = _midpoint_apply(lu2, n2, s.q, s.p)
        state = PhaseState(s.t + tau, q1, p1)
        return state, IndirectStepInfo(probe=probe, ktilde=ks, singular=False)
    return probe, IndirectStepInfo(probe=probe, ktilde=ks, singular=True)


def rk4_step(sys: DampedLinearSystem, s: PhaseState, tau: float) -> PhaseState:
    """One classical 4-stage Runge-Kutta step of ż = (p, -K·q - C·p)."""
    _validate_step_args(sys, s, tau)
    q1, p1 = _rk4_arrays(sys.K, sys.C, float(tau), s.q, s.p)
    return PhaseState(s.t + tau, q1, p1)


@dataclass(frozen=True)
class TransitionPair:
    """The direct and indirect one-step transition matrices with their
    symplectic defects; the indirect half is absent without a valid K̃."""

    direct: np.ndarray
    defect_direct: float
    indirect: np.ndarray | None
    defect_indirect: float | None


def transition_matrices(sys: DampedLinearSystem, ks: EquivalentStiffness | None,
                        tau: float) -> TransitionPair:
    """Form both transition matrices by explicit solve against each column.

    The direct matrix depends only on (K, C, τ). The indirect matrix needs
    the step's equivalent stiffness ``ks``; pass None to get only the
    direct half, while a ``ks`` with invalid components raises
    :class:`InvalidStiffnessError`.
    """
    if not tau > 0.0:
        raise ValueError(f"step size must be positive, got {tau}")
    form = symplectic_form(sys.n)
    lu, nn = _midpoint_solver(sys.K, sys.C, float(tau))
    direct = linalg.lu_solve(lu, nn)
    defect_direct = symplectic_defect(direct, form)
    if ks is None:
        return TransitionPair(direct, defect_direct, None, None)
    if ks.diag.shape != (sys.n,):
        raise DimensionError(
            f"equivalent stiffness has {ks.diag.shape[0]} components, system has {sys.n}"
        )
    if not ks.all_valid:
        raise InvalidStiffnessError(np.flatnonzero(~ks.valid))
    lu2, n2 = _midpoint_solver(sys.K + np.diag(ks.diag), np.zeros_like(sys.C), float(tau))
    indirect = linalg.lu_solve(lu2, n2)
    defect_indirect = symplectic_defect(indirect, form)
    return TransitionPair(direct, defect_direct, indirect, defect_indirect)


@dataclass(frozen=True)
class StepRecord:
    """State and diagnostics at the end of one integration step.

    ``hhat`` is the running conservative ledger E + Σ work_increment; it
    telescopes to the initial energy for the midpoint schemes.
    ``defect_indirect`` is present exactly when the step is non-singular.
    """

    state: PhaseState
    energy: float
    work_increment: float
    hhat: float
    defect_direct: float
    defect_indirect: float | None
    singular: bool
    ktilde: EquivalentStiffness


@dataclass(frozen=True)
class Trajectory:
    """An integration run: the system, step size, initial state, per-step
    records and the method that produced them."""

    system: DampedLinearSystem
    tau: float
    initial: PhaseState
    steps: tuple[StepRecord, ...]
    method: str

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def states(self) -> list[PhaseState]:
        """All states including the initial one, in time order."""
        return [self.initial] + [r.state for r in self.steps]

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states()])

    def coordinates(self) -> np.ndarray:
        """(n_steps + 1, n) array of coordinates, initial state first."""
        return np.array([s.q for s in self.states()])

    def momenta(self) -> np.ndarray:
        return np.array([s.p for s in self.states()])


def _check_run_args(sys, z0, tau, n_steps, method):
    _validate_step_args(sys, z0, tau)
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return n_steps


def integrate(sys: DampedLinearSystem, z0: PhaseState, tau: float, n_steps: int,
              method: str = "midpoint_direct",
              epsilon: float = DEFAULT_EPSILON) -> Trajectory:
    """Integrate ``n_steps`` steps and record the full per-step ledger.

    Every record carries the end-of-step state, recomputable energy, the
    dissipated work (Δq)ᵀC(Δq)/τ (same formula for every method, for
    comparability), the running ledger ``hhat``, both symplectic defects
    (the indirect one only on non-singular steps) and the step's
    equivalent stiffness. Timestamps are t₀ + k·τ from integer k.

    A stepper failure aborts with :class:`IntegrationError` carrying the
    1-based failing step index.
    """
    n_steps = _check_run_args(sys, z0, tau, n_steps, method)
    tau = float(tau)
    epsilon = float(epsilon)
    K, C = sys.K, sys.C
    czero = np.zeros_like(C)
    form = symplectic_form(sys.n)
    try:
        lu1, n1 = _midpoint_solver(K, C, tau)
        defect_direct = symplectic_defect(linalg.lu_solve(lu1, n1), form)
    except SingularMatrixError as exc:
        raise IntegrationError(1, str(exc)) from exc
    t0 = z0.t
    q, p = z0.q, z0.p
    cumulative_work = 0.0
    records = []
    for k in range(1, n_steps + 1):
        try:
            substitute = None
            if method == "midpoint_direct":
                q1, p1 = _midpoint_apply(lu1, n1, q, p)
                diag, valid = _equivalent_stiffness_arrays(C, q, q1, tau, epsilon)
            elif method == "rk4":
                q1, p1 = _rk4_arrays(K, C, tau, q, p)
                diag, valid = _equivalent_stiffness_arrays(C, q, q1, tau, epsilon)
            else:
                probe_q, probe_p = _midpoint_apply(lu1, n1, q, p)
                diag, valid = _equivalent_stiffness_arrays(C, q, probe_q, tau, epsilon)
                if valid.all():
                    substitute = _midpoint_solver(K + np.diag(diag), czero, tau)
                    q1, p1 = _midpoint_apply(*substitute, q, p)
                else:
                    q1, p1 = probe_q, probe_p
            singular = not valid.all()
            defect_indirect = None
            if not singular:
                if substitute is None:
                    substitute = _midpoint_solver(K + np.diag(diag), czero, tau)
                lu2, n2 = substitute
                defect_indirect = symplectic_defect(linalg.lu_solve(lu2, n2), form)
        except SingularMatrixError as exc:
            raise IntegrationError(k, str(exc)) from exc
        work = float((q1 - q) @ (C @ (q1 - q))) / tau
        energy = quadratic_energy(K, q1, p1)
        cumulative_work += work
        records.append(StepRecord(
            state=PhaseState(t0 + k * tau, q1, p1),
            energy=energy,
            work_increment=work,
            hhat=energy + cumulative_work,
            defect_direct=defect_direct,
            defect_indirect=defect_indirect,
            singular=singular,
            ktilde=EquivalentStiffness(diag=diag, valid=valid),
        ))
        q, p = q1, p1
    return Trajectory(system=sys, tau=tau, initial=z0, steps=tuple(records),
                      method=method)


def propagate(sys: DampedLinearSystem, z0: PhaseState, tau: float, n_steps: int,
              method: str = "midpoint_direct",
              epsilon: float = DEFAULT_EPSILON) -> PhaseState:
    """Advance ``n_steps`` steps and return only the final state.

    Record-free variant of :func:`integrate` for convergence ladders and
    reference solutions, where per-step diagnostics would dominate cost.
    """
    n_steps = _check_run_args(sys, z0, tau, n_steps, method)
    tau = float(tau)
    epsilon = float(epsilon)
    K, C = sys.K, sys.C
    czero = np.zeros_like(C)
    q, p = z0.q, z0.p
    lu1 = n1 = None
    if method != "rk4":
        try:
            lu1, n1 = _midpoint_solver(K, C, tau)
        except SingularMatrixError as exc:
            raise IntegrationError(1, str(exc)) from exc
    for k in range(1, n_steps + 1):
        try:
            if method == "rk4":
                q, p = _rk4_arrays(K, C, tau, q, p)
            elif method == "midpoint_direct":
                q, p = _midpoint_apply(lu1, n1, q, p)
            else:
                probe_q, probe_p = _midpoint_apply(lu1, n1, q, p)
                diag, valid = _equivalent_stiffness_arrays(C, q, probe_q, tau, epsilon)
                if valid.all():
                    lu2, n2 = _midpoint_solver(K + np.diag(diag), czero, tau)
                    q, p = _midpoint_apply(lu2, n2, q, p)
                else:
                    q, p = probe_q, probe_p
        except SingularMatrixError as exc:
            raise IntegrationError(k, str(exc)) from exc
    return PhaseState(z0.t + n_steps * tau, q, p)

"""Post-hoc trajectory analysis: energy ledgers, periods, convergence.

Everything here recomputes what it reports from the stored states rather
than trusting the integrator's bookkeeping, so the ledger identities are
checked across two independent code paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientOscillationError
from .integrators import Trajectory, propagate
from .system import DEFAULT_EPSILON, DampedLinearSystem, PhaseState, analytic_1d, \
    damping_work, total_energy


@dataclass(frozen=True)
class EnergyReport:
    """Energy/work/ledger series of a trajectory plus summary statistics.

    Series include the initial sample (work 0, ledger equal to the initial
    energy). ``max_hhat_deviation`` is max_k |Ĥ_k - E⁰|;
    ``max_energy_residual`` is the largest violation of the per-step
    identity E_{k+1} - E_k = -(Δq)ᵀC(Δq)/τ, which holds to round-off for
    the midpoint schemes but not for Runge-Kutta.
    """

    t: np.ndarray
    energy: np.ndarray
    work_cumulative: np.ndarray
    hhat: np.ndarray
    initial_energy: float
    max_hhat_deviation: float
    max_energy_residual: float
    monotone: bool
    singular_steps: int


def energy_report(tr: Trajectory) -> EnergyReport:
    """Recompute the energy and work ledger of a trajectory from its states."""
    sys = tr.system
    states = tr.states()
    energy = np.array([total_energy(sys, s) for s in states])
    works = np.array([
        damping_work(sys, states[k].q, states[k + 1].q, tr.tau)
        for k in range(len(states) - 1)
    ])
    work_cumulative = np.concatenate(([0.0], np.cumsum(works)))
    hhat = energy + work_cumulative
    residuals = np.abs(np.diff(energy) + works)
    return EnergyReport(
        t=tr.times(),
        energy=energy,
        work_cumulative=work_cumulative,
        hhat=hhat,
        initial_energy=float(energy[0]),
        max_hhat_deviation=float(np.max(np.abs(hhat - energy[0]))),
        max_energy_residual=float(residuals.max()) if residuals.size else 0.0,
        monotone=bool(np.all(np.diff(energy) <= 0.0)),
        singular_steps=sum(1 for r in tr.steps if r.singular),
    )


def period_estimate(tr: Trajectory, component: int = 0) -> float:
    """Mean spacing between successive upward zero crossings of one coordinate.

    Crossing times are linearly interpolated between bracketing samples;
    at least three upward crossings (two spacings) are required, otherwise
    :class:`InsufficientOscillationError` is raised.
    """
    if not 0 <= component < tr.system.n:
        raise IndexError(f"component {component} out of range for n={tr.system.n}")
    t = tr.times()
    x = tr.coordinates()[:, component]
    below = x[:-1] < 0.0
    atorabove = x[1:] >= 0.0
    idx = np.flatnonzero(below & atorabove)
    if idx.size < 3:
        raise InsufficientOscillationError(
            f"need at least 3 upward zero crossings, found {idx.size}"
        )
    frac = -x[idx] / (x[idx + 1] - x[idx])
    crossings = t[idx] + frac * (t[idx + 1] - t[idx])
    return float(np.mean(np.diff(crossings)))


@dataclass(frozen=True)
class ConvergenceRow:
    tau: float
    error: float
    observed_order: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    """Step-halving error ladder with observed orders between rows."""

    rows: tuple[ConvergenceRow, ...]
    reference: str


def convergence_study(sys: DampedLinearSystem, z0: PhaseState, tau_max: float,
                      levels: int, t_final: float, method: str = "midpoint_direct",
                      epsilon: float = DEFAULT_EPSILON) -> ConvergenceTable:
    """Global phase-space error at ``t_final`` over a step-halving ladder.

    The ladder is tau_max, tau_max/2, ..., halved ``levels`` times in
    total; ``t_final`` must be an exact multiple of every step size. The
    reference is the closed-form underdamped solution for scalar systems,
    otherwise a Runge-Kutta run at tau_max/1024. Errors are max-norm over
    the stacked (q, p) vector; observed orders are log₂ of successive
    error ratios.
    """
    levels = int(levels)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if not tau_max > 0.0 or not t_final > 0.0:
        raise ValueError("tau_max and t_final must be positive")
    taus = [tau_max / 2.0 ** i for i in range(levels)]
    counts = []
    for tau in taus:
        steps = round(t_final / tau)
        if steps < 1 or abs(steps * tau - t_final) > 1e-9 * max(1.0, abs(t_final)):
            raise ValueError(
                f"t_final={t_final} is not an exact multiple of tau={tau}"
            )
        counts.append(steps)

    k = float(sys.K[0, 0]) if sys.n == 1 else 0.0
    c = float(sys.C[0, 0]) if sys.n == 1 else 0.0
    if sys.n == 1 and c >= 0.0 and c * c < 4.0 * k:
        q_ref, p_ref = analytic_1d(k, c, float(z0.q[0]), float(z0.p[0]), t_final)
        ref = np.array([q_ref, p_ref])
        reference = "closed-form underdamped solution"
    else:
        tau_ref = tau_max / 1024.0
        final = propagate(sys, z0, tau_ref, round(t_final / tau_ref), "rk4", epsilon)
        ref = np.concatenate((final.q, final.p))
        reference = f"rk4 at tau={tau_ref!r}"

    errors = []
    for tau, steps in zip(taus, counts):
        final = propagate(sys, z0, tau, steps, method, epsilon)
        errors.append(float(np.max(np.abs(np.concatenate((final.q, final.p)) - ref))))

    rows = [ConvergenceRow(taus[0], errors[0], None)]
    for i in range(1, levels):
        order = float(np.log2(errors[i - 1] / errors[i])) if errors[i] > 0.0 else None
        rows.append(ConvergenceRow(taus[i], errors[i], order))
    return ConvergenceTable(rows=tuple(rows), reference=reference)

"""Energy reports, period estimation, convergence tables."""

import numpy as np
import pytest

import damped_midpoint as dm
from damped_midpoint.errors import InsufficientOscillationError


def synthetic_trajectory(times, values):
    """Wrap a sampled scalar signal as a trajectory (diagnostics only read
    states, so ledger fields can be placeholders)."""
    sys_ = dm.make_system([[1.0]], [[0.0]])
    initial = dm.PhaseState(times[0], [values[0]], [0.0])
    steps = tuple(
        dm.StepRecord(
            state=dm.PhaseState(t, [x], [0.0]),
            energy=0.0, work_increment=0.0, hhat=0.0,
            defect_direct=0.0, defect_indirect=0.0, singular=False,
            ktilde=dm.EquivalentStiffness(diag=[0.0], valid=[True]),
        )
        for t, x in zip(times[1:], values[1:])
    )
    return dm.Trajectory(system=sys_, tau=float(times[1] - times[0]),
                         initial=initial, steps=steps, method="midpoint_direct")


class TestEnergyReport:
    def test_undamped_ledger_is_flat(self):
        sys_ = dm.make_system(np.diag([2.0, 3.0]), np.zeros((2, 2)))
        z0 = dm.PhaseState(0.0, [0.3, -0.2], [0.1, 0.4])
        rep = dm.energy_report(dm.integrate(sys_, z0, 0.1, 200, "midpoint_direct"))
        assert np.array_equal(rep.work_cumulative, np.zeros(201))
        assert np.array_equal(rep.hhat, rep.energy)
        assert rep.max_hhat_deviation <= 1e-13

    def test_paper_run_ledger_constant(self, sys_1d, z0_1d):
        rep = dm.energy_report(dm.integrate(sys_1d, z0_1d, 0.2, 250,
                                            "midpoint_direct"))
        assert rep.max_hhat_deviation <= 1e-10
        assert rep.monotone
        assert rep.singular_steps == 0

    def test_rk4_ledger_drifts_more(self, sys_1d, z0_1d):
        mid = dm.energy_report(dm.integrate(sys_1d, z0_1d, 0.2, 250,
                                            "midpoint_direct"))
        rk4 = dm.energy_report(dm.integrate(sys_1d, z0_1d, 0.2, 250, "rk4"))
        assert rk4.max_hhat_deviation > mid.max_hhat_deviation

    def test_pure_function_of_trajectory(self, sys_1d, z0_1d):
        tr = dm.integrate(sys_1d, z0_1d, 0.2, 50, "midpoint_direct")
        a = dm.energy_report(tr)
        b = dm.energy_report(tr)
        assert np.array_equal(a.energy, b.energy)
        assert np.array_equal(a.hhat, b.hhat)
        assert a.max_hhat_deviation == b.max_hhat_deviation

    @pytest.mark.parametrize("method", dm.METHODS)
    def test_recomputed_ledger_matches_stored(self, sys_2d, z0_2d, method):
        tr = dm.integrate(sys_2d, z0_2d, 0.2, 200, method)
        rep = dm.energy_report(tr)
        stored = np.array([rec.hhat for rec in tr.steps])
        assert np.max(np.abs(rep.hhat[1:] - stored)) <= 1e-14
        stored_e = np.array([rec.energy for rec in tr.steps])
        assert np.array_equal(rep.energy[1:], stored_e)

    def test_counts_singular_steps(self):
        k, c, tau, q0 = 1.0, 0.1, 0.2, 0.3
        sys_ = dm.make_system([[k]], [[c]])
        z0 = dm.PhaseState(0.0, [q0], [-q0 * (2.0 / tau + c)])
        rep = dm.energy_report(dm.integrate(sys_, z0, tau, 5, "midpoint_indirect"))
        assert rep.singular_steps >= 1


class TestPeriodEstimate:
    def test_known_cosine_period(self):
        period = 3.1
        t = np.arange(0.0, 20.0, 0.01)
        tr = synthetic_trajectory(t, np.cos(2.0 * np.pi * t / period))
        assert dm.period_estimate(tr) == pytest.approx(period, abs=1e-3)

    def test_harmonic_oscillator_period(self):
        sys_ = dm.make_system([[1.0]], [[0.0]])
        z0 = dm.PhaseState(0.0, [1.0], [0.0])
        tr = dm.integrate(sys_, z0, 0.01, 2000, "midpoint_direct")
        assert dm.period_estimate(tr) == pytest.approx(2.0 * np.pi, abs=1e-3)

    def test_comparison_numbers_emitted_not_ordered(self, sys_2d, z0_2d):
        mid = dm.integrate(sys_2d, z0_2d, 0.2, 250, "midpoint_direct")
        rk4 = dm.integrate(sys_2d, z0_2d, 0.2, 250, "rk4")
        p_mid = dm.period_estimate(mid, 0)
        p_rk4 = dm.period_estimate(rk4, 0)
        assert np.isfinite(p_mid) and p_mid > 0.0
        assert np.isfinite(p_rk4) and p_rk4 > 0.0

    def test_insufficient_oscillation(self):
        t = np.arange(0.0, 1.0, 0.01)
        tr = synthetic_trajectory(t, np.exp(-t))
        with pytest.raises(InsufficientOscillationError):
            dm.period_estimate(tr)

    def test_time_reversal_invariance(self):
        period = 2.5
        t = np.arange(0.0, 20.0, 0.01)
        x = np.cos(2.0 * np.pi * t / period)
        forward = dm.period_estimate(synthetic_trajectory(t, x))
        # reversed sample order flips crossing directions; negating the
        # signal makes them upward again
        backward = dm.period_estimate(synthetic_trajectory(t, -x[::-1]))
        assert abs(forward - backward) <= 1e-12

    def test_component_out_of_range(self, sys_1d, z0_1d):
        tr = dm.integrate(sys_1d, z0_1d, 0.2, 10, "midpoint_direct")
        with pytest.raises(IndexError):
            dm.period_estimate(tr, 1)


class TestConvergenceStudy:
    def test_midpoint_second_order(self, sys_1d, z0_1d):
        table = dm.convergence_study(sys_1d, z0_1d, 0.1, 4, 10.0,
                                     "midpoint_direct")
        assert table.reference == "closed-form underdamped solution"
        assert table.rows[0].observed_order is None
        for row in table.rows[1:]:
            assert row.observed_order == pytest.approx(2.0, abs=0.1)

    def test_rk4_fourth_order(self, sys_1d, z0_1d):
        table = dm.convergence_study(sys_1d, z0_1d, 0.1, 4, 10.0, "rk4")
        for row in table.rows[1:]:
            assert row.observed_order == pytest.approx(4.0, abs=0.2)

    def test_single_level_has_no_order(self, sys_1d, z0_1d):
        table = dm.convergence_study(sys_1d, z0_1d, 0.1, 1, 10.0,
                                     "midpoint_direct")
        assert len(table.rows) == 1
        assert table.rows[0].observed_order is None

    def test_ladder_halves_strictly(self, sys_1d, z0_1d):
        table = dm.convergence_study(sys_1d, z0_1d, 0.1, 4, 10.0,
                                     "midpoint_direct")
        taus = [row.tau for row in table.rows]
        assert taus == sorted(taus, reverse=True)
        for a, b in zip(taus, taus[1:]):
            assert b == a / 2.0

    def test_non_commensurate_final_time_rejected(self, sys_1d, z0_1d):
        with pytest.raises(ValueError, match="multiple"):
            dm.convergence_study(sys_1d, z0_1d, 0.3, 2, 10.0, "midpoint_direct")

    def test_multidim_uses_fine_rk4_reference(self, sys_2d, z0_2d):
        table = dm.convergence_study(sys_2d, z0_2d, 0.2, 3, 2.0,
                                     "midpoint_direct")
        assert "rk4" in table.reference
        for row in table.rows[1:]:
            assert row.observed_order == pytest.approx(2.0, abs=0.1)

import math

import numpy as np
import pytest

from slideopt import benchmarks, engine
from slideopt import controllers as ctl
from slideopt import disturbances as dist


def example1_case(**kw):
    return benchmarks.example1(**kw)


def short_icfg(dt=1e-4, t_final=1.3, stride=1, method="euler"):
    return engine.IntegratorConfig(method=method, dt=dt, t_final=t_final,
                                   record_stride=stride)


class TestSimulate:
    def test_example1_closed_form(self):
        # xdot = -sign(x): x(t) = 1 - t until t = 1, then chatter O(dt K).
        case = example1_case()
        traj = engine.simulate(case.spec, case.controller(), case.disturbance,
                               [1.0], [0.0], short_icfg())
        i = np.searchsorted(traj.times, 0.5)
        assert traj.states[i, 0] == pytest.approx(0.5, abs=2e-4)
        tail = traj.states[traj.times >= 1.05, 0]
        assert np.max(np.abs(tail)) <= 2.0 * 1e-4   # O(dt * K)

    def test_equilibrium_constant_trajectory(self):
        case = benchmarks.nonconvex_qp()
        traj = engine.simulate(case.spec, case.controller("smc_sign"),
                               dist.none(), [0.0, 0.0], [0.0],
                               short_icfg(t_final=0.2))
        assert np.allclose(traj.states, 0.0, atol=1e-12)

    def test_divergence_flag(self):
        # unstable saddle flow: pdgd without disturbance on the indefinite
        # QP already spirals out; force divergence fast with big gains
        case = benchmarks.nonconvex_qp()
        gains = ctl.PdgdGains(primal_gain=50.0, dual_gain=50.0)
        traj = engine.simulate(case.spec, gains, dist.none(), [1.0, 1.0],
                               [0.0], short_icfg(dt=1e-3, t_final=40.0))
        assert traj.diverged
        assert traj.divergence_time is not None
        assert np.all(np.isfinite(traj.states))

    def test_rk4_rejected_for_sign_smc(self):
        case = example1_case()
        with pytest.raises(ValueError, match="rk4"):
            engine.simulate(case.spec, case.controller("smc"), dist.none(),
                            [1.0], [0.0], short_icfg(method="rk4"))

    def test_rk4_allowed_for_sat(self):
        case = example1_case()
        traj = engine.simulate(case.spec, case.controller("smc_sat"),
                               dist.none(), [1.0], [0.0],
                               short_icfg(method="rk4", dt=1e-3))
        assert not traj.diverged

    def test_trajectory_invariants(self):
        case = example1_case()
        traj = engine.simulate(case.spec, case.controller(), case.disturbance,
                               [1.0], [0.0], short_icfg(stride=7))
        T = traj.times.size
        assert traj.states.shape[0] == T
        assert traj.multipliers.shape[0] == T
        assert traj.violations.shape[0] == T
        assert traj.sliding.shape[0] == T
        assert np.all(np.diff(traj.times) > 0)

    def test_noise_recorded_sliding_is_true_value(self):
        case = benchmarks.nonconvex_qp()
        noise = dist.DisturbanceSpec(
            noise=dist.MeasurementNoise(dist.uniform_noise_fn(0.05, 1, 3), 0.05))
        traj = engine.simulate(case.spec, case.controller("smc_sign"), noise,
                               [1.0, 1.0], [0.0], short_icfg(t_final=0.05))
        clean = engine.simulate(case.spec, case.controller("smc_sign"),
                                dist.none(), [1.0, 1.0], [0.0],
                                short_icfg(t_final=0.05))
        # far from the manifold the switch saturates identically, so the
        # recorded h (true value) agrees between noisy and clean runs
        assert np.allclose(traj.violations[:100], clean.violations[:100],
                           atol=1e-9)

    def test_sta_closed_loop_reaches(self):
        case = example1_case()
        traj = engine.simulate(case.spec, ctl.StaGains(3.0, 1.0), dist.none(),
                               [1.0], [0.0], short_icfg(t_final=4.0))
        assert engine.reaching_time(traj, 1e-3, 0.05) is not None
        assert "z" in traj.aux

    def test_ntsm_sdot_matches_design(self):
        # With exact drift, eta = 0 and xi = 0 the sliding dynamics follow
        # Sdot = -K1 S - K2 |S|^rho sign(S) away from the z2 floor.
        A = np.array([[1.0, -0.5]])
        spec = benchmarks.ProblemSpec(
            dim_x=2, dim_h=1,
            objective=lambda x: 0.5 * float(x @ x) + 0.1 * float(x[0]),
            gradient=lambda x: x + np.array([0.1, 0.0]),
            constraints=lambda x: A @ x + 0.4,
            jacobian=lambda x: A,
            hessian_phi=lambda x: np.eye(2),
            linear_constraints=True, constant_jacobian=True)
        cfg = ctl.NtsmConfig(beta=2.0, gamma=1.5, rho=0.5, K1=[2.0], K2=[1.0],
                             eta=0.0, p=0.5, gram_reg=0.0)
        icfg = short_icfg(dt=1e-5, t_final=0.2)
        traj = engine.simulate(spec, cfg, dist.none(), [1.0, 1.0], [0.3], icfg)
        S = traj.sliding[:, 0]
        t = traj.times
        # centered numerical derivative vs the design law, interior points
        dS = (S[2:] - S[:-2]) / (t[2:] - t[:-2])
        S_mid = S[1:-1]
        z2 = traj.violations[:, 0]  # need hdot, not h: recompute via FD
        dh = (traj.violations[2:, 0] - traj.violations[:-2, 0]) / (t[2:] - t[:-2])
        mask = np.abs(dh) > 1e-3   # away from the z2 floor
        design = -2.0 * S_mid - 1.0 * np.abs(S_mid) ** 0.5 * np.sign(S_mid)
        err = np.abs(dS - design)[mask]
        assert np.max(err) < 5e-3

    def test_structured_uncertainty_still_reaches(self):
        # boundary-layer law: sign chatter at dt=1e-4 with K=20 exceeds the
        # 1e-3 settling tolerance, sat holds it well inside
        case = benchmarks.nonconvex_qp()
        d = dist.structured(lambda t: np.array([[0.0, 0.1 * math.sin(t)]]),
                            alpha_floor=3.0)
        traj = engine.simulate(case.spec, case.controller("smc"), d,
                               [1.0, 1.0], [0.0], short_icfg(t_final=1.0))
        assert engine.reaching_time(traj, 1e-3, 0.05) is not None


class TestReachingTime:
    def test_feasible_start(self):
        case = example1_case(x0=0.0)
        traj = engine.simulate(case.spec, case.controller(), dist.none(),
                               [0.0], [0.0], short_icfg(t_final=0.2))
        assert engine.reaching_time(traj, 1e-3, 0.05) == 0.0

    def test_example1_hits_at_one(self):
        case = example1_case()
        traj = engine.simulate(case.spec, case.controller(), dist.none(),
                               [1.0], [0.0], short_icfg())
        rt = engine.reaching_time(traj, 1e-3, 0.05)
        assert rt == pytest.approx(0.999, abs=2e-4)

    def test_diverging_run_returns_none(self):
        case = benchmarks.nonconvex_qp()
        traj = engine.simulate(case.spec, ctl.PdgdGains(), case.disturbance,
                               [1.0, 1.0], [0.0], short_icfg(dt=1e-3, t_final=10.0))
        assert engine.reaching_time(traj, 1e-3, 0.05) is None

    def test_dwell_rejects_transversal_crossing(self):
        # build a synthetic trajectory crossing zero once then leaving
        t = np.linspace(0.0, 1.0, 101)
        h = (t - 0.5)[:, None]
        traj = engine.Trajectory(times=t, states=h.copy(), multipliers=h.copy(),
                                 violations=h, sliding=h.copy())
        assert engine.reaching_time(traj, 1e-3, 0.05) is None


class TestBounds:
    def test_smc_reach_bound_values(self):
        gains = ctl.SmcGains(K=[1.0])
        assert engine.smc_reach_bound([0.0], gains) == 0.0
        assert engine.smc_reach_bound([1.0], gains) == pytest.approx(math.sqrt(2.0))
        b1 = engine.smc_reach_bound([1.0, 2.0], gains)
        b3 = engine.smc_reach_bound([3.0, 6.0], gains)
        assert b3 == pytest.approx(3.0 * b1)

    def test_matched_reach_bound(self):
        gains = ctl.SmcGains(K=[1.0])
        assert engine.matched_reach_bound([2.0], gains, np.eye(1), 0.0) \
            == pytest.approx(2.0)
        gains20 = ctl.SmcGains(K=[20.0])
        J = np.array([[0.0, 2.0]])
        assert engine.matched_reach_bound([2.0], gains20, J, 1.0) \
            == pytest.approx(2.0 / 16.0)
        small = ctl.SmcGains(K=[4.0])
        assert engine.matched_reach_bound([2.0], small, J, 1.0) is None

    def test_noise_ultimate_bound(self):
        J = np.array([[0.0, 2.0]])
        g = ctl.SmcGains(K=[20.0])
        assert engine.noise_ultimate_bound(g, J, 0.0, 0.0) == 0.0
        assert engine.noise_ultimate_bound(g, J, 0.0, 0.1) == pytest.approx(0.1)
        assert engine.noise_ultimate_bound(g, J, 0.5, 0.05) \
            == pytest.approx((20.0 * 0.05 + 4.0 * 0.5) / 20.0)

    def test_ntsm_time_bounds(self):
        cfg = ctl.NtsmConfig(beta=2.0, gamma=1.5, rho=0.5, K1=[1.0], K2=[1.0],
                             eta=0.1, p=0.5)
        T1, T2, T3 = engine.ntsm_time_bounds([0.0], [1.0], 0.0, cfg)
        assert T1 == 0.0
        assert T2 == pytest.approx(3.0 * 2.0 ** (-2.0 / 3.0), rel=1e-12)
        assert T2 == pytest.approx(1.8899, abs=1e-4)
        assert T3 is None
        _, T2z, _ = engine.ntsm_time_bounds([1.0], [0.0], 0.0, cfg)
        assert T2z == 0.0
        _, _, T3v = engine.ntsm_time_bounds([1.0], [1.0], 2.0, cfg,
                                            mu=1.0, lipschitz=2.0)
        assert T3v > 0.0

    def test_tune_gains(self):
        g = engine.tune_gains(0.0, 0.0, 0.0, 1e-3, 2)
        assert np.allclose(g.K, engine.GAIN_FLOOR)
        assert g.eps == pytest.approx(1e-3 * engine.GAIN_FLOOR)
        g = engine.tune_gains(4.0, 0.5, 0.01, 1e-3, 1)
        assert g.K[0] == pytest.approx(4.0)
        assert g.eps == pytest.approx(0.014)
        assert g.smoothing == "sat"
        g2 = engine.tune_gains(4.0, 1.0, 0.01, 1e-3, 1)
        assert g2.K[0] == pytest.approx(8.0)


class TestChattering:
    def test_boundary_layer_amplitude(self):
        case = benchmarks.nonconvex_qp()
        gains = case.controller("smc")   # sat with eps = dt*K = 2e-3
        traj = engine.simulate(case.spec, gains, case.disturbance, [1.0, 1.0],
                               [0.0], short_icfg(t_final=2.0))
        rt = engine.reaching_time(traj, 1e-3, 0.05)
        amp = engine.chattering_amplitude(traj, rt + 0.05)
        assert amp <= 2.0 * gains.eps

    def test_equilibrium_hold_zero(self):
        case = example1_case(x0=0.0)
        traj = engine.simulate(case.spec, case.controller(), dist.none(),
                               [0.0], [0.0], short_icfg(t_final=0.2))
        assert engine.chattering_amplitude(traj, 0.1) == 0.0

    def test_dt_halving_halves_amplitude(self):
        case = example1_case()
        amps = []
        for dt in (2e-4, 1e-4):
            traj = engine.simulate(case.spec, case.controller(), dist.none(),
                                   [1.0], [0.0], short_icfg(dt=dt))
            amps.append(engine.chattering_amplitude(traj, 1.1))
        ratio = amps[1] / amps[0]
        assert 0.3 <= ratio <= 0.7

    def test_t_start_validation(self):
        case = example1_case()
        traj = engine.simulate(case.spec, case.controller(), dist.none(),
                               [1.0], [0.0], short_icfg(t_final=0.5))
        with pytest.raises(ValueError):
            engine.chattering_amplitude(traj, 2.0)


class TestSlidingPhase:
    def test_post_reach_violation_bound(self):
        # euler ideal SMC: after reaching, max violation stays below
        # 5 dt k_max ||J^T (JJ^T)^{-1}||.
        for seed in (0, 3, 8):
            spec, x0, lam0 = benchmarks.random_linear_quadratic(seed)
            gains = ctl.SmcGains(K=np.full(spec.dim_h, 1.5), gram_reg=0.0)
            icfg = short_icfg(dt=1e-4, t_final=4.0, stride=2)
            traj = engine.simulate(spec, gains, dist.none(), x0, lam0, icfg)
            rt = engine.reaching_time(traj, 1e-3, 0.05)
            assert rt is not None
            J = spec.jac(x0)
            pinv_norm = np.linalg.norm(
                J.T @ np.linalg.inv(J @ J.T), 2)
            cap = 5.0 * icfg.dt * gains.k_max * pinv_norm
            assert engine.chattering_amplitude(traj, rt + 0.05) <= cap

    def test_energy_decrease_on_pgf_phase(self):
        # started feasible, the projected flow never increases phi
        spec, x0, lam0 = benchmarks.random_linear_quadratic(2)
        # project x0 onto the feasible set first: x0 - J^T (JJ^T)^{-1} h
        J = spec.jac(x0)
        h0 = spec.h(x0)
        x_feas = x0 - J.T @ np.linalg.solve(J @ J.T, h0)
        traj = engine.simulate(spec, ctl.PgfConfig(gram_reg=0.0), dist.none(),
                               x_feas, lam0, short_icfg(dt=1e-3, t_final=3.0))
        phis = np.array([spec.value(x) for x in traj.states])
        assert np.all(np.diff(phis) <= 1e-9)


class TestBoundProperties:
    def test_nominal_reaching_bound_random_family(self):
        # smaller version of the acceptance family for fast feedback
        for seed in range(8):
            spec, x0, lam0 = benchmarks.random_linear_quadratic(seed)
            rng = np.random.default_rng(seed + 1000)
            K = rng.uniform(1.0, 2.0, spec.dim_h)
            gains = ctl.SmcGains(K=K, gram_reg=0.0)
            bound = engine.smc_reach_bound(spec.h(x0), gains)
            icfg = short_icfg(dt=2e-4, t_final=bound + 0.1, stride=2)
            traj = engine.simulate(spec, gains, dist.none(), x0, lam0, icfg)
            rt = engine.reaching_time(traj, 1e-3, 0.05)
            assert rt is not None and rt <= bound

    def test_matched_bound_with_tuned_gains(self):
        for seed in range(4):
            spec, x0, lam0 = benchmarks.random_linear_quadratic(seed + 50)
            eta_bar = 0.5
            m = spec.dim_h
            J = spec.jac(x0)
            from slideopt import numerics
            gains = engine.tune_gains(numerics.sigma_max_gram(J), eta_bar,
                                      0.0, 1e-4, m)
            freq = np.arange(1, m + 1, dtype=float)
            d = dist.matched(
                lambda t, x, f=freq, m=m: eta_bar * np.cos(f * t) / math.sqrt(m),
                eta_bar)
            bound = engine.matched_reach_bound(spec.h(x0), gains, J, eta_bar)
            assert bound is not None
            icfg = short_icfg(dt=1e-4, t_final=bound + 0.1, stride=2)
            traj = engine.simulate(spec, gains, d, x0, lam0, icfg)
            rt = engine.reaching_time(traj, 1e-3, 0.05)
            assert rt is not None and rt <= bound


class TestRunReportAndCsv:
    def test_run_report_fields(self):
        case = example1_case()
        traj = engine.simulate(case.spec, case.controller(), dist.none(),
                               [1.0], [0.0], short_icfg())
        rep = engine.run_report(traj, 1e-3, 0.05,
                                bound=case.reach_bound(), target=np.zeros(1))
        assert rep.reaching_time_empirical == pytest.approx(0.999, abs=2e-4)
        assert rep.bound_satisfied is True
        assert rep.final_distance_to_optimum < 1e-3
        assert not rep.diverged

    def test_csv_format(self, tmp_path):
        case = benchmarks.nonconvex_qp()
        traj = engine.simulate(case.spec, case.controller(), case.disturbance,
                               [1.0, 1.0], [0.0], short_icfg(t_final=0.01))
        path = tmp_path / "traj.csv"
        engine.export_csv(traj, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x_1,x_2,lambda_1,h_1,S_1"
        assert len(lines) == traj.times.size + 1
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 1.0

    def test_csv_determinism(self, tmp_path):
        case = benchmarks.nonconvex_qp()
        outs = []
        for k in range(2):
            traj = engine.simulate(case.spec, case.controller(),
                                   case.disturbance, [1.0, 1.0], [0.0],
                                   short_icfg(t_final=0.02))
            p = tmp_path / f"t{k}.csv"
            engine.export_csv(traj, p)
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]


class TestIntegratorConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            engine.IntegratorConfig(method="heun")
        with pytest.raises(ValueError):
            engine.IntegratorConfig(dt=0.0)
        with pytest.raises(ValueError):
            engine.IntegratorConfig(dt=1.0, t_final=0.5)
        with pytest.raises(ValueError):
            engine.IntegratorConfig(record_stride=0)

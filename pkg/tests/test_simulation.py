"""Discretization exactness, disturbance rendering, and simulation behavior:
final-value checks, conservation, determinism, and divergence detection."""

import numpy as np
import pytest

import lfckit
from lfckit import (DisturbanceSpec, GaussDisturbance, NoiseModel,
                    RampDisturbance, Scenario, SimulationDivergence,
                    StepDisturbance, build_plant, discretize,
                    make_droop_baseline, render_disturbance, simulate)
from lfckit.simulation import scenario_fingerprint
from lfckit.synthesis import ClosedLoopSystem

from conftest import PRESET_STEP, preset_scenario
from test_model import one_area, symmetric_three


def bare_system(A, B, labels=None):
    """Wrap raw matrices as a droop-like ClosedLoopSystem for discretize."""
    plant = build_plant([one_area()])
    n = A.shape[0]
    q = B.shape[1]
    return ClosedLoopSystem(
        A=np.asarray(A, float), B_d=np.asarray(B, float), B_v=None,
        C=np.eye(n), state_labels=tuple(labels or (f"x{i}" for i in range(n))),
        disturbance_labels=tuple(f"d{i}" for i in range(q)),
        output_labels=tuple(f"x{i}" for i in range(n)),
        controller="droop", plant=plant, n_plant=n, n_integrators=0,
        n_estimator=0)


# ---------------------------------------------------------------------------
# discretize


def test_discretize_pure_integrator():
    sys_ = bare_system(np.zeros((2, 2)), np.array([[1.0], [2.0]]))
    Ad, Bd = discretize(sys_, 0.1)
    assert np.allclose(Ad, np.eye(2), atol=1e-15)
    assert np.allclose(Bd, [[0.1], [0.2]], atol=1e-15)


def test_discretize_scalar_closed_form():
    sys_ = bare_system(np.array([[-2.0]]), np.array([[1.0]]))
    Ad, Bd = discretize(sys_, 0.5)
    assert Ad[0, 0] == pytest.approx(np.exp(-1.0), abs=1e-14)
    assert Bd[0, 0] == pytest.approx((1.0 - np.exp(-1.0)) / 2.0, abs=1e-14)


def test_discretize_rejects_non_positive_dt(closed_loop):
    with pytest.raises(ValueError):
        discretize(closed_loop, 0.0)


def test_one_zoh_step_matches_rk4_oracle(closed_loop):
    """A single ZOH step of the three-area loop against classical RK4 with
    100 substeps, from a non-trivial state."""
    dt = 0.01
    Ad, Bd = discretize(closed_loop, dt)
    rng = np.random.default_rng(2)
    x0 = 0.01 * rng.standard_normal(closed_loop.n_states)
    d = np.array([0.0, PRESET_STEP, 0.0])
    zoh = Ad @ x0 + Bd @ d

    A, B = closed_loop.A, closed_loop.B_d
    h = dt / 100.0
    x = x0.copy()
    for _ in range(100):
        k1 = A @ x + B @ d
        k2 = A @ (x + 0.5 * h * k1) + B @ d
        k3 = A @ (x + 0.5 * h * k2) + B @ d
        k4 = A @ (x + h * k3) + B @ d
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.abs(zoh - x).max() <= 1e-9


# ---------------------------------------------------------------------------
# render_disturbance


def test_render_step_sampling():
    spec = DisturbanceSpec.single(1, 0, StepDisturbance(time=1.0, magnitude=-0.2))
    out = render_disturbance(spec, np.arange(5) * 0.5)
    assert np.array_equal(out[:, 0], [0.0, 0.0, -0.2, -0.2, -0.2])


def test_render_ramp_shape():
    spec = DisturbanceSpec.single(1, 0, RampDisturbance(start=1.0, end=3.0,
                                                        magnitude=0.4))
    out = render_disturbance(spec, np.array([0.0, 1.0, 2.0, 3.0, 10.0]))
    assert np.allclose(out[:, 0], [0.0, 0.0, 0.2, 0.4, 0.4], atol=1e-15)


def test_render_gauss_zero_sigma_is_silent():
    spec = DisturbanceSpec.single(1, 0, GaussDisturbance(sigma=0.0,
                                                         bandwidth=0.1))
    out = render_disturbance(spec, np.arange(100) * 0.1)
    assert np.array_equal(out, np.zeros((100, 1)))


def test_render_gauss_stationary_std():
    """Sample std over a 2000 s record within +-20% of the configured sigma
    (the record holds ~1250 independent samples at this bandwidth)."""
    spec = DisturbanceSpec.single(
        1, 0, GaussDisturbance(sigma=0.02, bandwidth=0.1, seed=42))
    times = np.arange(0.0, 2000.0, 0.1)
    out = render_disturbance(spec, times)
    assert 0.016 <= out[:, 0].std() <= 0.024


def test_render_gauss_reproducible():
    spec = DisturbanceSpec.single(
        2, 1, GaussDisturbance(sigma=0.05, bandwidth=0.5, seed=7))
    times = np.arange(0.0, 10.0, 0.01)
    assert np.array_equal(render_disturbance(spec, times),
                          render_disturbance(spec, times))


def test_render_primitives_sum_per_channel():
    spec = DisturbanceSpec(channels=((StepDisturbance(0.0, 0.1),
                                      StepDisturbance(1.0, 0.2)),))
    out = render_disturbance(spec, np.array([0.0, 0.5, 1.0]))
    assert np.allclose(out[:, 0], [0.1, 0.1, 0.3], atol=1e-15)


def test_scenario_validation_errors():
    with pytest.raises(ValueError, match="dt"):
        Scenario(horizon=1.0, dt=0.0,
                 disturbances=DisturbanceSpec.quiet(1)).validate()
    with pytest.raises(ValueError, match="seed is required"):
        Scenario(horizon=1.0, dt=0.1,
                 disturbances=DisturbanceSpec.single(
                     1, 0, GaussDisturbance(sigma=0.1, bandwidth=1.0))
                 ).validate()
    with pytest.raises(ValueError, match="outside"):
        Scenario(horizon=1.0, dt=0.1,
                 disturbances=DisturbanceSpec.single(
                     1, 0, StepDisturbance(time=5.0, magnitude=0.1))
                 ).validate()
    with pytest.raises(ValueError, match="record"):
        Scenario(horizon=1.0, dt=0.1,
                 disturbances=DisturbanceSpec.quiet(1),
                 record=("bogus",)).validate()


def test_scenario_dt_warning():
    scen = Scenario(horizon=1.0, dt=0.1, disturbances=DisturbanceSpec.quiet(1))
    with pytest.warns(UserWarning, match="quarter"):
        scen.validate(min_time_constant=0.025)


# ---------------------------------------------------------------------------
# simulate


def test_zero_disturbance_zero_trace(closed_loop):
    scen = Scenario(horizon=1.0, dt=0.01,
                    disturbances=DisturbanceSpec.quiet(3))
    trace = simulate(closed_loop, scen)
    for name in trace.signal_names():
        assert np.array_equal(trace[name], np.zeros(101)), name


def test_droop_single_area_final_value():
    """Steady state of the droop-only loop under a 0.01 pu load step matches
    the final-value theorem: -0.01 / (1/K_P + 1/R)."""
    plant = build_plant([one_area(k_p=120.0, r=2.4)])
    baseline = make_droop_baseline(plant)
    scen = Scenario(horizon=60.0, dt=0.01,
                    disturbances=DisturbanceSpec.single(
                        1, 0, StepDisturbance(time=0.0, magnitude=0.01)),
                    record=("states",))
    trace = simulate(baseline, scen)
    expected = -0.01 / (1.0 / 120.0 + 1.0 / 2.4)
    assert expected == pytest.approx(-0.023529411, abs=1e-8)
    assert trace["f_a1"][-1] == pytest.approx(expected, abs=1e-4)


def test_droop_baseline_keeps_nonzero_offset(preset_droop_trace):
    assert abs(preset_droop_trace["f_wtg1"][-1]) > 1e-3


def test_tie_power_conservation(preset_lqg_trace, preset_droop_trace):
    for trace in (preset_lqg_trace, preset_droop_trace):
        total = (trace["ptie_wtg1"] + trace["ptie_pv2"] + trace["ptie_ct3"])
        assert np.abs(total).max() <= 1e-9


def test_tie_power_conservation_stochastic(closed_loop):
    scen = Scenario(
        horizon=5.0, dt=0.01,
        disturbances=DisturbanceSpec.single(
            3, 0, GaussDisturbance(sigma=0.02, bandwidth=0.5, seed=3)),
        record=("states",), seed=3)
    trace = simulate(closed_loop, scen, noise=NoiseModel(
        w=0.01 * np.eye(3), v=1e-6 * np.eye(6)))
    total = trace["ptie_wtg1"] + trace["ptie_pv2"] + trace["ptie_ct3"]
    assert np.abs(total).max() <= 1e-9


def test_determinism_bit_identical(closed_loop):
    scen = Scenario(
        horizon=2.0, dt=0.01,
        disturbances=DisturbanceSpec.single(
            3, 1, GaussDisturbance(sigma=0.05, bandwidth=1.0, seed=11)),
        record=("states", "outputs", "controls", "disturbances"),
        seed=42)
    noise = NoiseModel(w=0.01 * np.eye(3), v=1e-8 * np.eye(6))
    t1 = simulate(closed_loop, scen, noise=noise)
    t2 = simulate(closed_loop, scen, noise=noise)
    assert t1.metadata == t2.metadata
    for name in t1.signal_names():
        assert np.array_equal(t1[name], t2[name]), name


def test_zoh_grid_refinement_consistency(closed_loop):
    """Halving dt only refines the sampling; shared grid points agree to
    within accumulated rounding (no integration error for ZOH)."""
    def run(dt):
        return simulate(closed_loop, preset_scenario(horizon=10.0, dt=dt,
                                                     record=("states",)))
    coarse = run(0.01)
    fine = run(0.005)
    for name in coarse.signal_names():
        assert np.abs(coarse[name] - fine[name][::2]).max() <= 1e-6


def test_divergence_detection():
    sys_ = bare_system(np.array([[5.0]]), np.array([[1.0]]))
    scen = Scenario(horizon=20.0, dt=0.1,
                    disturbances=DisturbanceSpec.single(
                        1, 0, StepDisturbance(time=0.0, magnitude=1.0)),
                    record=("states",))
    with pytest.raises(SimulationDivergence, match="exceeded"):
        simulate(sys_, scen)


def test_estimator_converges_without_noise(preset_lqg_trace):
    errs = np.stack([preset_lqg_trace[c] for c in
                     preset_lqg_trace.signal_names() if c.startswith("err_")])
    norm = np.linalg.norm(errs, axis=0)
    assert norm[preset_lqg_trace.times > 20.0].max() < 1e-6


def test_measurement_noise_perturbs_controller_not_truth(closed_loop):
    scen = Scenario(horizon=2.0, dt=0.01,
                    disturbances=DisturbanceSpec.quiet(3),
                    record=("states", "outputs", "noisy_outputs"), seed=5)
    noise = NoiseModel(w=0.01 * np.eye(3), v=1e-6 * np.eye(6))
    trace = simulate(closed_loop, scen, noise=noise)
    clean = trace["y_f_wtg1"]
    noisy = trace["ynoisy_f_wtg1"]
    assert not np.array_equal(clean, noisy)
    # noise-driven response stays near the noise floor
    assert np.abs(clean).max() < 1e-2


def test_initial_state_dimension_checked(closed_loop):
    scen = Scenario(horizon=1.0, dt=0.01,
                    disturbances=DisturbanceSpec.quiet(3),
                    initial_state=np.zeros(5))
    with pytest.raises(ValueError, match="initial_state"):
        simulate(closed_loop, scen)


def test_fingerprint_shared_between_controllers(closed_loop, droop_loop):
    scen = preset_scenario()
    assert (scenario_fingerprint(closed_loop, scen)
            == scenario_fingerprint(droop_loop, scen))
    different = preset_scenario(seed=43)
    assert (scenario_fingerprint(closed_loop, scen)
            != scenario_fingerprint(closed_loop, different))


def test_reused_disturbance_samples_match_rendered(closed_loop):
    scen = preset_scenario(horizon=2.0, record=("disturbances",))
    samples = render_disturbance(scen.disturbances, scen.times())
    t1 = simulate(closed_loop, scen)
    t2 = simulate(closed_loop, scen, disturbance_samples=samples)
    for name in t1.signal_names():
        assert np.array_equal(t1[name], t2[name])

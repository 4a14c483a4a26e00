"""Acceptance suite: the package's exit criteria.

Each test pins one acceptance criterion at its stated tolerance and prints a
PASS line on success (run with ``pytest tests/test_acceptance.py -v -s``).
The whole suite is deterministic and completes in well under a minute.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

import lfckit
from lfckit import (NoiseModel, augment_integrators, build_plant,
                    design_kalman, make_droop_baseline, simulate,
                    solve_care, spectral_abscissa)
from lfckit.numerics import care_residual
from lfckit.simulation import (DisturbanceSpec, GaussDisturbance, Scenario,
                               StepDisturbance)

from conftest import preset_scenario


def _ok(message: str) -> None:
    print(f"PASS: {message}")


# ---------------------------------------------------------------------------


def _random_stabilizable_system(seed: int, index: int):
    """Seeded stabilizable test system, n <= 15, alternating mildly
    unstable / mostly stable spectra."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 16))
    m = int(rng.integers(1, 4))
    A = rng.standard_normal((n, n)) / np.sqrt(n)
    A += (0.25 if index % 2 == 0 else -0.25) * np.eye(n)
    B = rng.standard_normal((n, m))
    G = rng.standard_normal((n, n))
    Q = G.T @ G / n + 0.1 * np.eye(n)
    return A, B, Q, np.eye(m)


def test_criterion_1_riccati_correctness():
    """Double-integrator closed form to 1e-9; 20 seeded random stabilizable
    systems meet the residual contract with Hurwitz closed loops."""
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    sol = solve_care(A, B, np.eye(2), np.eye(1))
    expected = np.array([[np.sqrt(3.0), 1.0], [1.0, np.sqrt(3.0)]])
    assert np.abs(sol.x - expected).max() <= 1e-9

    for i in range(20):
        Ai, Bi, Qi, Ri = _random_stabilizable_system(5000 + i, i)
        s = solve_care(Ai, Bi, Qi, Ri)
        residual = np.linalg.norm(care_residual(Ai, Bi, Qi, Ri, s.x), "fro")
        bound = 1e-8 * (1.0 + np.linalg.norm(s.x, "fro") ** 2)
        assert residual <= bound, f"system {i}: residual {residual:.2e}"
        assert spectral_abscissa(Ai - Bi @ s.gain) < 0, f"system {i} not Hurwitz"
    _ok("criterion 1 — Riccati: double-integrator exact to 1e-9, "
        "20/20 random systems within residual contract and Hurwitz")


def test_criterion_2_separation_principle(three_area_plant, lqg_controller,
                                          closed_loop):
    """Closed-loop spectrum equals the multiset union of regulator and
    estimator spectra within 1e-8."""
    aug = augment_integrators(three_area_plant)
    K = np.hstack([lqg_controller.k_x, lqg_controller.k_i])
    union = np.concatenate([
        np.linalg.eigvals(aug.A - aug.B @ K),
        np.linalg.eigvals(lqg_controller.estimator_a)])
    full = list(np.linalg.eigvals(closed_loop.A))
    worst = 0.0
    for z in union:
        dists = [abs(z - w) for w in full]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        assert dists[k] <= 1e-8, f"unmatched eigenvalue {z}"
        full.pop(k)
    _ok(f"criterion 2 — separation principle: eigenvalue multisets match "
        f"(worst gap {worst:.2e} <= 1e-8)")


def test_criterion_3_zero_steady_state(preset_lqg_trace):
    """|freq(30 s)| < 1e-4 Hz and |tie(30 s)| < 1e-4 pu in every area."""
    tr = preset_lqg_trace
    worst_f = max(abs(tr[f"f_{a}"][-1]) for a in ("wtg1", "pv2", "ct3"))
    worst_p = max(abs(tr[f"ptie_{a}"][-1]) for a in ("wtg1", "pv2", "ct3"))
    assert worst_f < 1e-4
    assert worst_p < 1e-4
    _ok(f"criterion 3 — zero steady-state regulation: max |f(30s)| = "
        f"{worst_f:.2e} Hz, max |ptie(30s)| = {worst_p:.2e} pu, both < 1e-4")


def test_criterion_4_droop_final_value_oracle():
    """Single-area droop step lands on the final-value-theorem offset."""
    from test_model import one_area
    plant = build_plant([one_area(k_p=120.0, r=2.4)])
    baseline = make_droop_baseline(plant)
    scen = Scenario(horizon=60.0, dt=0.01,
                    disturbances=DisturbanceSpec.single(
                        1, 0, StepDisturbance(time=0.0, magnitude=0.01)),
                    record=("states",))
    trace = simulate(baseline, scen)
    expected = -0.01 / (1.0 / 120.0 + 1.0 / 2.4)
    got = trace["f_a1"][-1]
    assert got == pytest.approx(expected, abs=1e-4)
    _ok(f"criterion 4 — droop baseline: f(60s) = {got:.6f} Hz vs "
        f"final-value {expected:.6f} Hz (within 1e-4)")


def test_criterion_5_lqg_improves_on_droop(preset_droop_trace,
                                           preset_lqg_trace):
    """Strictly lower ISE and peak |f| in areas 1 and 3, and strictly lower
    tie-power ISE for areas 1 and 3."""
    rep = lfckit.compare(preset_droop_trace, preset_lqg_trace,
                         ["f_wtg1", "f_ct3", "ptie_wtg1", "ptie_ct3"])
    for name in ("f_wtg1", "f_ct3"):
        row = rep.signal(name)
        assert row.lqg.ise < row.baseline.ise
        assert row.lqg.peak_deviation < row.baseline.peak_deviation
    for name in ("ptie_wtg1", "ptie_ct3"):
        row = rep.signal(name)
        assert row.lqg.ise < row.baseline.ise
    ratios = {r.signal: r.ise_ratio for r in rep.signals}
    _ok("criterion 5 — LQG vs droop: ISE ratios "
        + ", ".join(f"{k}={v:.0f}x" for k, v in ratios.items())
        + "; peaks strictly reduced")


def test_criterion_6_tie_power_conservation(closed_loop, droop_loop,
                                            preset_lqg_trace,
                                            preset_droop_trace):
    """Sum of interchange deviations stays below 1e-9 in every symmetric-tie
    scenario in the suite (deterministic and stochastic)."""
    worst = 0.0
    for trace in (preset_lqg_trace, preset_droop_trace):
        total = trace["ptie_wtg1"] + trace["ptie_pv2"] + trace["ptie_ct3"]
        worst = max(worst, np.abs(total).max())
    stochastic = Scenario(
        horizon=10.0, dt=0.01,
        disturbances=DisturbanceSpec.single(
            3, 2, GaussDisturbance(sigma=0.05, bandwidth=0.5, seed=17)),
        record=("states",), seed=17)
    for system in (closed_loop, droop_loop):
        tr = simulate(system, stochastic,
                      noise=NoiseModel(w=0.01 * np.eye(3), v=1e-8 * np.eye(6)))
        total = tr["ptie_wtg1"] + tr["ptie_pv2"] + tr["ptie_ct3"]
        worst = max(worst, np.abs(total).max())
    assert worst < 1e-9
    _ok(f"criterion 6 — conservation: max |sum ptie| = {worst:.2e} < 1e-9 "
        "across deterministic and stochastic runs")


def test_criterion_7_discretization_fidelity(closed_loop):
    """ZOH stepping of the preset loop matches RK4 at dt/100 within 1e-9
    sup-norm over a 5 s window spanning the disturbance step."""
    dt = 0.01
    Ad, Bd = lfckit.discretize(closed_loop, dt)
    A, B = closed_loop.A, closed_loop.B_d
    h = dt / 100.0
    x_zoh = np.zeros(closed_loop.n_states)
    x_rk = x_zoh.copy()
    sup = 0.0
    steps = int(round(5.0 / dt))
    for k in range(steps):
        d = np.array([0.0, -0.2, 0.0]) if k * dt >= 1.0 else np.zeros(3)
        x_zoh = Ad @ x_zoh + Bd @ d
        fd = B @ d
        for _ in range(100):
            k1 = A @ x_rk + fd
            k2 = A @ (x_rk + 0.5 * h * k1) + fd
            k3 = A @ (x_rk + 0.5 * h * k2) + fd
            k4 = A @ (x_rk + h * k3) + fd
            x_rk = x_rk + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        sup = max(sup, np.abs(x_zoh - x_rk).max())
    assert sup < 1e-9
    _ok(f"criterion 7 — ZOH vs RK4(dt/100): sup-norm gap {sup:.2e} < 1e-9 "
        "over 5 s")


def test_criterion_8_byte_identical_traces(tmp_path):
    """Two CLI runs of the preset with seed 42 write identical CSV bytes."""
    def run(out):
        res = subprocess.run(
            [sys.executable, "-m", "lfckit", "run", "--preset",
             "paper-three-area", "--controller", "lqg", "--seed", "42",
             "--out", str(tmp_path / out)],
            capture_output=True, text=True, timeout=120)
        assert res.returncode == 0, res.stderr
        return (tmp_path / out / "trace_lqg.csv").read_bytes()

    first, second = run("a"), run("b")
    assert first == second
    _ok(f"criterion 8 — determinism: two seed-42 runs produced "
        f"byte-identical {len(first)}-byte traces")


def test_criterion_9_estimator(preset_lqg_trace, three_area_plant):
    """Estimation error vanishes (sup < 1e-6 after 20 s, no measurement
    noise); distrusting measurements monotonically shrinks the filter gain."""
    tr = preset_lqg_trace
    errs = np.stack([tr[c] for c in tr.signal_names()
                     if c.startswith("err_")])
    sup = np.linalg.norm(errs, axis=0)[tr.times > 20.0].max()
    assert sup < 1e-6

    norms = []
    for scale in (1.0, 1e2, 1e4, 1e6):
        noise = NoiseModel(w=0.01 * np.eye(3),
                           v=scale * 1e-4 * np.eye(6))
        norms.append(np.linalg.norm(design_kalman(three_area_plant, noise)))
    assert all(b < a for a, b in zip(norms, norms[1:]))
    _ok(f"criterion 9 — estimator: sup error after 20 s = {sup:.2e} < 1e-6; "
        f"||L|| sweep {', '.join(f'{x:.3g}' for x in norms)} strictly "
        "decreasing")

"""LQG load-frequency controller synthesis.

The controller is a PI-type optimal compensator: state feedback ``u = -K_x
xhat - K_i xi`` where ``xi`` integrates each area's control error, plus a
steady-state Kalman estimator supplying ``xhat``.  Gains come from two
Riccati solves: LQR on the integrator-augmented plant and the dual filter
equation for the estimator.

Interconnected-area models carry structurally uncontrollable conserved
combinations of tie states (see ``model.conservation_directions``); no
feedback can move those modes off the origin, so both designs are performed
on the orthogonal complement and the lifted closed loop keeps the conserved
modes exactly frozen at zero.  Stability certificates therefore refer to the
regulated subspace; the frozen mode count is reported alongside.

By default the estimator carries one extra state per disturbance channel,
modeling load changes as random walks.  A plant-states-only estimator sees a
constant disturbance as a permanent output offset and settles on a biased
state estimate; co-estimating the disturbance removes that bias exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .model import (PlantModel, augment_integrators, conservation_directions,
                    integrator_selector)
from .numerics import CareError, solve_care, spectral_abscissa


class SynthesisError(Exception):
    """Controller synthesis failed (infeasible pair or Riccati breakdown)."""


#: default state weights: heavy on frequencies and their error integrals
DEFAULT_FREQUENCY_WEIGHT = 500.0
DEFAULT_STATE_WEIGHT = 1.0
DEFAULT_INTEGRATOR_WEIGHT = 1000.0
#: default noise intensities: disturbance random walk vs measurement noise
DEFAULT_PROCESS_NOISE = 0.01
DEFAULT_MEASUREMENT_NOISE = 1e-4


@dataclass(frozen=True)
class LqrWeights:
    """Quadratic weights over augmented states (q) and control inputs (r)."""
    q: NDArray[np.float64]
    r: NDArray[np.float64]

    def validate(self, n_aug: int, m: int) -> None:
        if self.q.shape != (n_aug, n_aug):
            raise ValueError(f"Q must be {n_aug}x{n_aug}, got {self.q.shape}")
        if self.r.shape != (m, m):
            raise ValueError(f"R must be {m}x{m}, got {self.r.shape}")
        for name, M in (("Q", self.q), ("R", self.r)):
            if np.linalg.norm(M - M.T, "fro") > 1e-12 * (1 + np.linalg.norm(M, "fro")):
                raise ValueError(f"{name} must be symmetric")


@dataclass(frozen=True)
class NoiseModel:
    """Process-noise covariance over disturbance channels (w, q x q,
    symmetric PSD) and measurement-noise covariance over outputs
    (v, p x p, symmetric PD)."""
    w: NDArray[np.float64]
    v: NDArray[np.float64]

    def validate(self, n_dist: int, n_out: int) -> None:
        if self.w.shape != (n_dist, n_dist):
            raise ValueError(f"W must be {n_dist}x{n_dist}, got {self.w.shape}")
        if self.v.shape != (n_out, n_out):
            raise ValueError(f"V must be {n_out}x{n_out}, got {self.v.shape}")
        for name, M in (("W", self.w), ("V", self.v)):
            if np.linalg.norm(M - M.T, "fro") > 1e-12 * (1 + np.linalg.norm(M, "fro")):
                raise ValueError(f"{name} must be symmetric")
        w_eigs = np.linalg.eigvalsh(self.w)
        if w_eigs.min() < -1e-12 * max(1.0, w_eigs.max()):
            raise ValueError("W must be positive semidefinite")
        try:
            np.linalg.cholesky(self.v)
        except np.linalg.LinAlgError:
            raise ValueError("V must be positive definite") from None


def default_weights(plant_aug: PlantModel) -> LqrWeights:
    """Weights for the augmented plant: 500 on frequency states, 1 on other
    plant states, 1000 on integrator states; identity on controls.  These are
    tunable defaults, not values taken from any reference design."""
    if not plant_aug.augmented:
        raise ValueError("default_weights expects an integrator-augmented plant")
    N = plant_aug.n_areas
    diag = ([DEFAULT_FREQUENCY_WEIGHT] * N + [DEFAULT_STATE_WEIGHT] * (2 * N)
            + [DEFAULT_STATE_WEIGHT] * N + [DEFAULT_INTEGRATOR_WEIGHT] * N)
    return LqrWeights(q=np.diag(diag), r=np.eye(plant_aug.n_inputs))


def default_noise(plant: PlantModel) -> NoiseModel:
    return NoiseModel(w=DEFAULT_PROCESS_NOISE * np.eye(plant.n_disturbances),
                      v=DEFAULT_MEASUREMENT_NOISE * np.eye(plant.n_outputs))


def complement_basis(W: NDArray[np.float64]) -> NDArray[np.float64]:
    """Orthonormal basis (n x n-k) of the orthogonal complement of span(W)."""
    n, k = W.shape
    if k == 0:
        return np.eye(n)
    Wn, _ = np.linalg.qr(W)
    P = np.eye(n) - Wn @ Wn.T
    u, s, _ = np.linalg.svd(P)
    return u[:, s > 0.5]


def design_lqr(plant_aug: PlantModel, weights: LqrWeights | None = None,
               ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """State-feedback gains (K_x, K_i) for the augmented plant.

    Solves the CARE on the complement of the conserved tie combinations and
    lifts the gain back with zero action on the frozen directions, then
    partitions at the plant/integrator boundary.  The regulated closed loop
    is certified Hurwitz.

    Raises:
        SynthesisError: Riccati failure or a non-stabilizable reduced pair.
    """
    if not plant_aug.augmented:
        raise ValueError("design_lqr expects an integrator-augmented plant")
    if weights is None:
        weights = default_weights(plant_aug)
    n_aug = plant_aug.n_states
    m = plant_aug.n_inputs
    N = plant_aug.n_areas
    weights.validate(n_aug, m)

    U = complement_basis(conservation_directions(plant_aug))
    A_r = U.T @ plant_aug.A @ U
    B_r = U.T @ plant_aug.B
    Q_r = U.T @ weights.q @ U
    try:
        sol = solve_care(A_r, B_r, Q_r, weights.r)
    except CareError as exc:
        raise SynthesisError(f"LQR Riccati failed: {exc}") from exc
    abscissa = spectral_abscissa(A_r - B_r @ sol.gain)
    if abscissa >= 0:
        raise SynthesisError(
            f"augmented pair is not stabilizable on the regulated subspace "
            f"(closed-loop abscissa {abscissa:.3e})")
    K = sol.gain @ U.T
    n = n_aug - N
    return K[:, :n], K[:, n:]


def _estimator_model(plant: PlantModel, noise: NoiseModel,
                     estimate_disturbances: bool):
    """Estimator system (A_e, C_e), process noise Q_e, and frozen directions."""
    n = plant.n_states
    q = plant.n_disturbances
    p = plant.n_outputs
    W_cons = conservation_directions(plant)
    if not estimate_disturbances:
        return plant.A, plant.C, plant.F @ noise.w @ plant.F.T, W_cons
    A_e = np.zeros((n + q, n + q))
    A_e[:n, :n] = plant.A
    A_e[:n, n:] = plant.F
    C_e = np.hstack([plant.C, np.zeros((p, q))])
    Q_e = np.zeros((n + q, n + q))
    Q_e[n:, n:] = noise.w
    W_ext = np.vstack([W_cons, np.zeros((q, W_cons.shape[1]))])
    return A_e, C_e, Q_e, W_ext


def design_kalman(plant: PlantModel, noise: NoiseModel | None = None,
                  estimate_disturbances: bool = True) -> NDArray[np.float64]:
    """Steady-state estimator gain L via the dual Riccati equation.

    With ``estimate_disturbances`` (default) the estimator model is the plant
    extended by random-walk disturbance states driven by W, and L has
    ``n + q`` rows; otherwise it is the bare plant with process noise
    ``F W F.T`` and L has ``n`` rows, computed as
    ``solve_care(A.T, C.T, F W F.T, V).gain.T`` on the regulated subspace.

    Raises:
        SynthesisError: Riccati failure or a non-detectable reduced pair.
    """
    if plant.augmented:
        raise ValueError("design_kalman expects the unaugmented plant; "
                         "integrator states are controller-internal and "
                         "exactly known")
    if noise is None:
        noise = default_noise(plant)
    noise.validate(plant.n_disturbances, plant.n_outputs)
    A_e, C_e, Q_e, W_cons = _estimator_model(plant, noise, estimate_disturbances)
    U = complement_basis(W_cons)
    A_r = U.T @ A_e @ U
    C_r = C_e @ U
    Q_r = U.T @ Q_e @ U
    try:
        sol = solve_care(A_r.T, C_r.T, Q_r, noise.v)
    except CareError as exc:
        raise SynthesisError(f"filter Riccati failed: {exc}") from exc
    L_r = sol.gain.T
    abscissa = spectral_abscissa(A_r - L_r @ C_r)
    if abscissa >= 0:
        raise SynthesisError(
            f"pair is not detectable on the regulated subspace "
            f"(estimator abscissa {abscissa:.3e})")
    return U @ L_r


@dataclass(frozen=True)
class LqgController:
    """Synthesized LQG gains plus the estimator realization they imply.

    ``k_x`` acts on the estimated plant states, ``k_i`` on the controller's
    own integrator states.  ``l_gain`` maps output innovations into estimator
    state corrections; ``estimator_a`` is the innovation-closed estimator
    matrix ``A_e - L C_e`` whose eigenvalues are the estimator poles.
    Abscissas certify the regulated subspace; ``n_frozen_modes`` counts the
    conserved tie combinations pinned at zero.
    """
    k_x: NDArray[np.float64]
    k_i: NDArray[np.float64]
    l_gain: NDArray[np.float64]
    estimator_a: NDArray[np.float64]
    estimates_disturbances: bool
    regulator_abscissa: float
    estimator_abscissa: float
    n_frozen_modes: int
    estimator_state_labels: tuple[str, ...]

    @property
    def n_estimator_states(self) -> int:
        return self.l_gain.shape[0]


def design_lqg(plant: PlantModel,
               weights: LqrWeights | None = None,
               noise: NoiseModel | None = None,
               estimate_disturbances: bool = True) -> LqgController:
    """Run both Riccati designs on an unaugmented plant and package the result."""
    if plant.augmented:
        raise ValueError("design_lqg expects the unaugmented plant")
    plant_aug = augment_integrators(plant)
    k_x, k_i = design_lqr(plant_aug, weights)
    L = design_kalman(plant, noise, estimate_disturbances)

    if noise is None:
        noise = default_noise(plant)
    A_e, C_e, _, W_cons = _estimator_model(plant, noise, estimate_disturbances)
    U = complement_basis(W_cons)
    A_r = U.T @ A_e @ U
    C_r = C_e @ U
    L_r = U.T @ L
    est_abscissa = spectral_abscissa(A_r - L_r @ C_r)

    plant_labels = plant.state_labels
    est_labels = tuple(f"xhat_{s}" for s in plant_labels)
    if estimate_disturbances:
        est_labels = est_labels + tuple(f"dhat_{d[3:]}" if d.startswith("pd_")
                                        else f"dhat_{d}"
                                        for d in plant.disturbance_labels)

    U_aug = complement_basis(conservation_directions(plant_aug))
    A_raug = U_aug.T @ plant_aug.A @ U_aug
    B_raug = U_aug.T @ plant_aug.B
    K_full = np.hstack([k_x, k_i])
    reg_abscissa = spectral_abscissa(A_raug - B_raug @ (K_full @ U_aug))

    return LqgController(
        k_x=k_x, k_i=k_i, l_gain=L,
        estimator_a=A_e - L @ C_e,
        estimates_disturbances=estimate_disturbances,
        regulator_abscissa=reg_abscissa,
        estimator_abscissa=est_abscissa,
        n_frozen_modes=W_cons.shape[1],
        estimator_state_labels=est_labels,
    )


@dataclass(frozen=True)
class ClosedLoopSystem:
    """Assembled autonomous dynamics ``x' = A x + B_d d (+ B_v v)``.

    For an LQG loop the stacked state is ``[plant x; integrators xi;
    estimator xhat (and dhat)]``; the droop baseline is the bare plant.
    ``C`` exposes, row for row, the true measured outputs, the control
    signals, and (when an estimator is present) the plant-state estimation
    errors ``x - xhat``.  ``B_v`` injects measurement noise into the
    integrator and estimator paths; the true outputs stay clean.
    """
    A: NDArray[np.float64]
    B_d: NDArray[np.float64]
    B_v: NDArray[np.float64] | None
    C: NDArray[np.float64]
    state_labels: tuple[str, ...]
    disturbance_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    controller: str
    plant: PlantModel
    n_plant: int
    n_integrators: int
    n_estimator: int

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    def plant_states(self, x: NDArray) -> NDArray:
        return x[..., :self.n_plant]

    def estimator_states(self, x: NDArray) -> NDArray:
        i0 = self.n_plant + self.n_integrators
        return x[..., i0:i0 + self.n_estimator]


def assemble_closed_loop(plant: PlantModel, ctrl: LqgController,
                         require_certified: bool = True) -> ClosedLoopSystem:
    """Stack plant, error integrators, and estimator into one LTI system.

    The plant is driven by ``u = -K_x xhat - K_i xi``; the integrators by the
    negative measured control error; the estimator by the output innovation
    ``L (y - C_e xhat_e)``.  Measurement noise, when present, enters ``y``
    before the integrator and estimator taps only.  ``require_certified``
    may be dropped to assemble diagnostic loops from hand-built gains.

    Raises:
        ValueError: on dimension mismatch.
        SynthesisError: if the controller is not Hurwitz-certified.
    """
    if plant.augmented:
        raise ValueError("assemble_closed_loop expects the unaugmented plant")
    n = plant.n_states
    N = plant.n_areas
    m = plant.n_inputs
    p = plant.n_outputs
    n_e = ctrl.n_estimator_states
    if ctrl.k_x.shape != (m, n) or ctrl.k_i.shape != (m, N):
        raise ValueError("controller gain dimensions do not match the plant")
    if ctrl.l_gain.shape[1] != p:
        raise ValueError("estimator gain output dimension does not match the plant")
    if require_certified and (ctrl.regulator_abscissa >= 0
                              or ctrl.estimator_abscissa >= 0):
        raise SynthesisError("controller is not Hurwitz-certified on the "
                             "regulated subspace")

    S = integrator_selector(plant)
    A_pl, B_pl, F_pl, C_pl = plant.A, plant.B, plant.F, plant.C
    L = ctrl.l_gain
    # Estimator open-loop model (plant, optionally disturbance-extended).
    A_e = np.zeros((n_e, n_e))
    A_e[:n, :n] = A_pl
    if ctrl.estimates_disturbances:
        A_e[:n, n:] = F_pl
    C_e = np.hstack([C_pl, np.zeros((p, n_e - n))])
    B_e = np.vstack([B_pl, np.zeros((n_e - n, m))])

    ncl = n + N + n_e
    sl_x = slice(0, n)
    sl_i = slice(n, n + N)
    sl_e = slice(n + N, ncl)
    A = np.zeros((ncl, ncl))
    A[sl_x, sl_x] = A_pl
    A[sl_x, sl_i] = -B_pl @ ctrl.k_i
    A[sl_x, sl_e.start:sl_e.start + n] = -B_pl @ ctrl.k_x
    A[sl_i, sl_x] = -S @ C_pl
    A[sl_e, sl_x] = L @ C_pl
    A[sl_e, sl_i] = -B_e @ ctrl.k_i
    A[sl_e, sl_e] = A_e - L @ C_e
    A[sl_e.start:sl_e.start + n_e, sl_e.start:sl_e.start + n] -= B_e @ ctrl.k_x

    B_d = np.zeros((ncl, plant.n_disturbances))
    B_d[sl_x, :] = F_pl
    B_v = np.zeros((ncl, p))
    B_v[sl_i, :] = -S
    B_v[sl_e, :] = L

    C = np.zeros((p + m + n, ncl))
    C[:p, sl_x] = C_pl
    C[p:p + m, sl_i] = -ctrl.k_i
    C[p:p + m, sl_e.start:sl_e.start + n] = -ctrl.k_x
    C[p + m:, sl_x] = np.eye(n)
    C[p + m:, sl_e.start:sl_e.start + n] = -np.eye(n)

    state_labels = (plant.state_labels
                    + tuple(f"xi_{a.name}" for a in plant.areas)
                    + ctrl.estimator_state_labels)
    output_labels = (plant.output_labels
                     + tuple(f"u_{lbl}" for lbl in plant.input_labels)
                     + tuple(f"err_{lbl}" for lbl in plant.state_labels))
    return ClosedLoopSystem(
        A=A, B_d=B_d, B_v=B_v, C=C,
        state_labels=state_labels,
        disturbance_labels=plant.disturbance_labels,
        output_labels=output_labels,
        controller="lqg", plant=plant,
        n_plant=n, n_integrators=N, n_estimator=n_e,
    )


def make_droop_baseline(plant: PlantModel) -> ClosedLoopSystem:
    """The uncontrolled comparator: u = 0, primary droop action only.

    The droop path 1/R inside the command dynamics remains, so a load step
    settles with a nonzero frequency offset shared across areas.
    """
    if plant.augmented:
        raise ValueError("make_droop_baseline expects the unaugmented plant")
    n = plant.n_states
    m = plant.n_inputs
    p = plant.n_outputs
    C = np.zeros((p + m, n))
    C[:p, :] = plant.C
    output_labels = (plant.output_labels
                     + tuple(f"u_{lbl}" for lbl in plant.input_labels))
    return ClosedLoopSystem(
        A=plant.A.copy(), B_d=plant.F.copy(), B_v=None, C=C,
        state_labels=plant.state_labels,
        disturbance_labels=plant.disturbance_labels,
        output_labels=output_labels,
        controller="droop", plant=plant,
        n_plant=n, n_integrators=0, n_estimator=0,
    )

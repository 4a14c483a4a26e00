"""Dense small-matrix kernels: matrix exponential, Lyapunov and continuous
algebraic Riccati solvers, and eigenvalue-based stability measures.

Everything here operates on plain ``numpy.ndarray`` matrices and is sized for
desk-scale control problems (tens of states).  The Riccati solver is a
Newton-Kleinman iteration built on the Lyapunov kernel, so each refinement
step is a single dense linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray


class NumericsError(Exception):
    """Base class for numerical-kernel failures."""


class LyapunovError(NumericsError):
    """Lyapunov equation could not be solved (non-Hurwitz or singular)."""


class CareError(NumericsError):
    """Riccati iteration failed (no initializer, divergence, or stall)."""


# Tolerances, fixed for double precision at these problem sizes.
LYAPUNOV_RESIDUAL_TOL = 1e-10
CARE_RESIDUAL_TOL = 1e-8
CARE_MAX_ITER = 50

# Pade-13 numerator/denominator coefficients for the matrix exponential.
_PADE13 = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
])
# Largest 1-norm for which the order-13 approximant is accurate unscaled.
_THETA13 = 5.371920351148152


def _as_square(M, name: str = "matrix") -> NDArray[np.float64]:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def expm(M) -> NDArray[np.float64]:
    """Matrix exponential by scaling-and-squaring with a Pade-13 approximant.

    Accurate to better than 1e-12 relative error for 1-norms up to ~1e3.

    Raises:
        ValueError: if ``M`` is not square or has non-finite entries.
    """
    A = _as_square(M, "expm input")
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    squarings = 0
    if norm > _THETA13:
        squarings = int(np.ceil(np.log2(norm / _THETA13)))
        A = A / (2.0 ** squarings)

    b = _PADE13
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        R = R @ R
    return R


def spectral_abscissa(M) -> float:
    """Largest real part over the eigenvalues of a square matrix.

    Raises:
        NumericsError: if the eigenvalue iteration fails to converge.
    """
    A = _as_square(M, "spectral_abscissa input")
    try:
        eigs = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"eigenvalue iteration failed: {exc}") from exc
    return float(eigs.real.max())


def solve_lyapunov(A, Q) -> NDArray[np.float64]:
    """Solve ``A.T X + X A + Q = 0`` for symmetric X, with A Hurwitz.

    Uses the vectorized Kronecker form with a dense LU solve, which is the
    simplest correct kernel at this scale.

    Raises:
        LyapunovError: if A is not Hurwitz or the linear system is singular.
    """
    A = _as_square(A, "A")
    Q = _as_square(Q, "Q")
    if A.shape != Q.shape:
        raise ValueError(f"A {A.shape} and Q {Q.shape} must agree")
    abscissa = spectral_abscissa(A)
    if abscissa >= 0:
        raise LyapunovError(
            f"coefficient matrix is not Hurwitz (spectral abscissa {abscissa:.3e})")
    n = A.shape[0]
    I = np.eye(n)
    # Row-major vec: vec(A.T X) = (A.T (x) I) vec(X), vec(X A) = (I (x) A.T) vec(X).
    K = np.kron(A.T, I) + np.kron(I, A.T)
    try:
        x = np.linalg.solve(K, -Q.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise LyapunovError(f"singular linear system: {exc}") from exc
    X = x.reshape(n, n)
    X = 0.5 * (X + X.T)
    residual = np.linalg.norm(A.T @ X + X @ A + Q, "fro")
    bound = LYAPUNOV_RESIDUAL_TOL * (1.0 + np.linalg.norm(Q, "fro"))
    if residual > bound:
        raise LyapunovError(
            f"residual {residual:.3e} exceeds tolerance {bound:.3e} "
            "(equation is too ill-conditioned)")
    return X


@dataclass(frozen=True)
class CareSolution:
    """Stabilizing solution of a continuous algebraic Riccati equation.

    Attributes:
        x: symmetric positive-semidefinite solution matrix.
        gain: feedback gain ``R^-1 B.T X``.
        residual_norm: Frobenius norm of the Riccati residual at ``x``.
        iterations: Newton steps taken.
        residual_history: residual norm after each Newton step.
    """
    x: NDArray[np.float64]
    gain: NDArray[np.float64]
    residual_norm: float
    iterations: int
    residual_history: tuple[float, ...] = field(default=(), repr=False)


def care_residual(A, B, Q, R, X) -> NDArray[np.float64]:
    """Residual ``A.T X + X A - X B R^-1 B.T X + Q`` of the CARE."""
    Rinv = np.linalg.inv(np.asarray(R, dtype=float))
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    Q = np.asarray(Q, float)
    X = np.asarray(X, float)
    return A.T @ X + X @ A - X @ B @ Rinv @ B.T @ X + Q


def _bass_gain(A, B, Rinv, margin: float) -> NDArray[np.float64]:
    """Stabilizing gain by the Bass shift: pick alpha so -(A + alpha I) is
    Hurwitz, solve (A + alpha I) Z + Z (A + alpha I).T = 2 B R^-1 B.T and
    return R^-1 B.T Z^-1."""
    n = A.shape[0]
    alpha = max(0.0, spectral_abscissa(-A)) + margin
    shifted = -(A + alpha * np.eye(n))
    Z = solve_lyapunov(shifted.T, 2.0 * B @ Rinv @ B.T)
    return Rinv @ B.T @ np.linalg.solve(Z, np.eye(n))


def _hamiltonian_gain(A, B, Q, Rinv) -> NDArray[np.float64]:
    """Stabilizing gain from the stable invariant subspace of the Hamiltonian,
    computed with a plain (unordered) eigendecomposition."""
    n = A.shape[0]
    H = np.block([[A, -B @ Rinv @ B.T], [-Q, -A.T]])
    w, V = np.linalg.eig(H)
    stable = np.argsort(w.real)[:n]
    Vs = V[:, stable]
    X = np.real(Vs[n:, :] @ np.linalg.inv(Vs[:n, :]))
    return Rinv @ B.T @ (0.5 * (X + X.T))


def _initial_gain(A, B, Q, Rinv) -> NDArray[np.float64]:
    """Deterministic stabilizing initializer for the Newton iteration.

    Zero gain when A is already Hurwitz; otherwise a Bass-shift gain over a
    short margin sweep, falling back to the Hamiltonian eigenvector gain.
    """
    m = B.shape[1]
    n = A.shape[0]
    if spectral_abscissa(A) < 0:
        return np.zeros((m, n))
    for margin in (0.5, 2.0, 8.0):
        try:
            K0 = _bass_gain(A, B, Rinv, margin)
        except (LyapunovError, np.linalg.LinAlgError):
            continue
        if spectral_abscissa(A - B @ K0) < -1e-9:
            return K0
    try:
        K0 = _hamiltonian_gain(A, B, Q, Rinv)
        if spectral_abscissa(A - B @ K0) < -1e-9:
            return K0
    except np.linalg.LinAlgError:
        pass
    raise CareError("no stabilizing initializer found; "
                    "the pair (A, B) may not be stabilizable")


def solve_care(A, B, Q, R,
               tol: float = CARE_RESIDUAL_TOL,
               max_iter: int = CARE_MAX_ITER) -> CareSolution:
    """Solve ``A.T X + X A - X B R^-1 B.T X + Q = 0`` for the stabilizing X.

    Newton-Kleinman iteration: from a stabilizing gain K, solve the Lyapunov
    equation for the closed loop A - B K with right-hand side Q + K.T R K,
    then refresh K = R^-1 B.T X.  Converges quadratically; each step reuses
    the Lyapunov kernel.  A damped step is taken if a full Newton update would
    lose the stabilizing property (a float-precision effect on hard problems).

    Requires Q symmetric PSD, R symmetric PD, and (A, B) stabilizable; the
    stabilizable precondition is certified a posteriori through the
    closed-loop spectral abscissa.

    Raises:
        CareError: no stabilizing initializer, residual growth over three
            consecutive full steps, or iteration budget exhausted.
    """
    A = _as_square(A, "A")
    Q = _as_square(Q, "Q")
    R = _as_square(R, "R")
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    n, m = B.shape
    if A.shape[0] != n or R.shape[0] != m or Q.shape[0] != n:
        raise ValueError("inconsistent CARE dimensions")
    for name, M in (("Q", Q), ("R", R)):
        if np.linalg.norm(M - M.T, "fro") > 1e-12 * (1.0 + np.linalg.norm(M, "fro")):
            raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise ValueError("R must be positive definite") from None
    Rinv = np.linalg.inv(R)

    K = _initial_gain(A, B, Q, Rinv)
    residuals: list[float] = []
    X_prev = None
    growth = 0
    for iteration in range(1, max_iter + 1):
        try:
            X = solve_lyapunov(A - B @ K, Q + K.T @ R @ K)
        except LyapunovError as exc:
            raise CareError(f"Newton step lost stabilizing property: {exc}") from exc
        K_full = Rinv @ B.T @ X
        theta = 1.0
        K_next = K_full
        while spectral_abscissa(A - B @ K_next) >= 0 and theta > 1e-8:
            theta *= 0.5
            K_next = K + theta * (K_full - K)
        K = K_next

        residual = float(np.linalg.norm(
            A.T @ X + X @ A - X @ B @ Rinv @ B.T @ X + Q, "fro"))
        if residuals and theta == 1.0:
            growth = growth + 1 if residual > residuals[-1] else 0
        residuals.append(residual)

        x_norm = np.linalg.norm(X, "fro")
        within_contract = residual <= tol * (1.0 + x_norm ** 2)
        settled = (X_prev is not None and
                   np.linalg.norm(X - X_prev, "fro") <= 1e-9 * (1.0 + x_norm))
        tight = residual <= 1e-3 * tol * (1.0 + x_norm)
        if within_contract and (settled or tight):
            return CareSolution(x=X, gain=Rinv @ B.T @ X,
                                residual_norm=residual,
                                iterations=iteration,
                                residual_history=tuple(residuals))
        if growth >= 3:
            raise CareError(
                f"residual grew over 3 consecutive steps (last {residual:.3e})")
        X_prev = X
    raise CareError(f"no convergence in {max_iter} iterations "
                    f"(last residual {residuals[-1]:.3e})")

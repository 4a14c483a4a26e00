#!/usr/bin/env python3
"""Tour of the dense numerical kernels.

Shows the matrix exponential's semigroup behavior, the Lyapunov solver's
residuals, and the Newton iteration converging quadratically on the
double-integrator Riccati problem whose solution is known in closed form.

Run:  python3 demos/riccati_kernels.py
"""

import numpy as np

from lfckit import expm, solve_care, solve_lyapunov, spectral_abscissa

rng = np.random.default_rng(0)

print("== matrix exponential ==")
A = rng.standard_normal((4, 4))
E1 = expm(0.3 * A) @ expm(0.7 * A)
E2 = expm(A)
print(f"semigroup defect |exp(.3A)exp(.7A) - exp(A)| = "
      f"{np.abs(E1 - E2).max():.2e}")
P = expm(A) @ expm(-A)
print(f"inverse defect  |exp(A)exp(-A) - I|         = "
      f"{np.abs(P - np.eye(4)).max():.2e}")

print("\n== Lyapunov equation A'X + XA + Q = 0 ==")
A = rng.standard_normal((5, 5)) - 3.0 * np.eye(5)
G = rng.standard_normal((5, 5))
Q = G.T @ G + 0.1 * np.eye(5)
X = solve_lyapunov(A, Q)
residual = np.linalg.norm(A.T @ X + X @ A + Q, "fro")
print(f"stable A (abscissa {spectral_abscissa(A):.2f}), PD Q")
print(f"residual {residual:.2e}; X is PD: "
      f"{np.all(np.linalg.eigvalsh(X) > 0)}")

print("\n== Riccati equation, double integrator ==")
A = np.array([[0.0, 1.0], [0.0, 0.0]])
B = np.array([[0.0], [1.0]])
sol = solve_care(A, B, np.eye(2), np.eye(1))
print("Newton residuals per step:",
      " -> ".join(f"{r:.1e}" for r in sol.residual_history))
print(f"X =\n{sol.x}")
print(f"closed-form X = [[sqrt(3), 1], [1, sqrt(3)]]; max error "
      f"{np.abs(sol.x - [[np.sqrt(3), 1], [1, np.sqrt(3)]]).max():.2e}")
print(f"closed-loop eigenvalues: "
      f"{np.round(np.linalg.eigvals(A - B @ sol.gain), 6)}")

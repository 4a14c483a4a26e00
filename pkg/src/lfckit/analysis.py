"""Stability verdicts and transient-quality metrics for traces and systems.

Marginal eigenvalues pinned at the origin by tie-power conservation are
reported separately from the regulated spectrum: they are invariant
directions that no feedback can move and that zero-initialized scenarios
never excite, so lumping them into a single abscissa would misreport every
interconnected design as marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .simulation import SimTrace
from .synthesis import ClosedLoopSystem

#: settling band, applied to |signal - steady_state| (Hz or pu)
DEFAULT_SETTLING_BAND = 0.005
#: eigenvalues with magnitude below this count as structurally frozen
FROZEN_MODE_TOL = 1e-9
#: ratio denominators below this report an unbounded improvement
RATIO_FLOOR = 1e-15


@dataclass(frozen=True)
class TransientMetrics:
    """Scalar summary of one signal's transient response.

    ``settling_time`` is the first time after which the signal stays within
    ``band`` of its steady state; ``None`` (with ``settled=False``) when the
    band is violated at the end of the horizon or holds for less than the
    final 5% of it (a signal still in motion has not settled, however close
    it sits to its own endpoint).  ``steady_state`` is the mean over the
    final 5% of the horizon, robust to residual stochastic ripple.
    """
    peak_deviation: float
    peak_time: float
    settling_time: float | None
    settled: bool
    steady_state: float
    ise: float
    band: float


def metrics(trace: SimTrace, signal: str,
            band: float = DEFAULT_SETTLING_BAND) -> TransientMetrics:
    """Transient metrics of one named trace signal.

    Raises:
        KeyError: unknown signal name.
        ValueError: non-positive band.
    """
    if band <= 0:
        raise ValueError(f"band must be positive, got {band}")
    if signal not in trace.columns:
        raise KeyError(f"unknown signal {signal!r}; available: "
                       f"{', '.join(trace.signal_names())}")
    x = trace.columns[signal]
    t = trace.times

    peak_idx = int(np.argmax(np.abs(x)))
    peak = float(abs(x[peak_idx]))

    horizon = float(t[-1])
    tail = x[t >= horizon - 0.05 * horizon] if horizon > 0 else x[-1:]
    steady = float(np.mean(tail))

    dev = np.abs(x - steady)
    outside = np.nonzero(dev > band)[0]
    if len(outside) == 0:
        settling, settled = 0.0, True
    else:
        k = outside[-1]
        if k == len(x) - 1 or t[k + 1] > horizon * 0.95:
            settling, settled = None, False
        else:
            settling, settled = float(t[k + 1]), True

    ise = float(np.trapezoid(x * x, t))
    return TransientMetrics(peak_deviation=peak, peak_time=float(t[peak_idx]),
                            settling_time=settling, settled=settled,
                            steady_state=steady, ise=ise, band=band)


@dataclass(frozen=True)
class StabilityReport:
    """Spectral summary of a closed-loop system.

    ``spectral_abscissa`` covers every eigenvalue; ``regulated_abscissa``
    excludes the ``n_frozen_modes`` eigenvalues at the origin belonging to
    conserved tie combinations.  The dominant eigenpair (slowest regulated
    mode and its shape over the stacked state) identifies what limits the
    settling; ``damping_ratio`` is that of the least-damped strictly-stable
    complex mode (1.0 when all modes are real).
    """
    spectral_abscissa: float
    regulated_abscissa: float
    n_frozen_modes: int
    dominant_eigenvalue: complex
    dominant_mode: NDArray[np.complex128]
    least_damped_eigenvalue: complex | None
    damping_ratio: float
    stable: bool


def stability_report(system: ClosedLoopSystem | NDArray) -> StabilityReport:
    """Eigenvalue-based verdict for a closed loop (or a bare A matrix).

    Raises:
        numerics.NumericsError: if the eigenvalue iteration fails.
    """
    A = system.A if isinstance(system, ClosedLoopSystem) else np.asarray(system, float)
    try:
        eigs, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        from .numerics import NumericsError
        raise NumericsError(f"eigenvalue iteration failed: {exc}") from exc

    frozen = np.abs(eigs) < FROZEN_MODE_TOL
    regulated = eigs[~frozen]
    raw_abscissa = float(eigs.real.max())
    reg_abscissa = float(regulated.real.max()) if len(regulated) else 0.0

    pool = np.nonzero(~frozen)[0] if len(regulated) else np.arange(len(eigs))
    lead = pool[int(np.argmax(eigs[pool].real))]
    dominant = complex(eigs[lead])
    mode = vecs[:, lead].copy()

    complex_stable = [z for z in regulated
                      if abs(z.imag) > FROZEN_MODE_TOL and z.real < 0]
    if complex_stable:
        zetas = [-z.real / abs(z) for z in complex_stable]
        k = int(np.argmin(zetas))
        least, zeta = complex(complex_stable[k]), float(zetas[k])
    else:
        least, zeta = None, 1.0

    return StabilityReport(
        spectral_abscissa=raw_abscissa,
        regulated_abscissa=reg_abscissa,
        n_frozen_modes=int(frozen.sum()),
        dominant_eigenvalue=dominant,
        dominant_mode=mode,
        least_damped_eigenvalue=least,
        damping_ratio=zeta,
        stable=reg_abscissa < 0,
    )


@dataclass(frozen=True)
class SignalComparison:
    """Baseline-vs-LQG metric pair for one signal.

    Ratios are baseline/LQG, so values above 1 mean the controller improved
    the metric; ``math.inf`` marks an effectively-zero LQG denominator and
    ``None`` an undefined ratio (baseline metric not positive).
    """
    signal: str
    baseline: TransientMetrics
    lqg: TransientMetrics
    ise_ratio: float | None
    peak_ratio: float | None
    steady_state_ratio: float | None
    lqg_improves_ise: bool


@dataclass(frozen=True)
class ComparisonReport:
    """Per-signal metric pairs with improvement ratios, plus stability
    verdicts for the two loops when their systems were supplied."""
    signals: tuple[SignalComparison, ...]
    regressions: tuple[str, ...]
    baseline_stability: StabilityReport | None = None
    lqg_stability: StabilityReport | None = None

    def signal(self, name: str) -> SignalComparison:
        for s in self.signals:
            if s.signal == name:
                return s
        raise KeyError(name)


def _ratio(base: float, test: float) -> float | None:
    if base <= 0:
        return None
    if test <= RATIO_FLOOR * max(1.0, base):
        return math.inf
    return base / test


def compare(baseline: SimTrace, lqg: SimTrace, signals,
            band: float = DEFAULT_SETTLING_BAND,
            baseline_system: ClosedLoopSystem | None = None,
            lqg_system: ClosedLoopSystem | None = None) -> ComparisonReport:
    """Metric pairs and improvement ratios over a shared scenario.

    Pass the closed-loop systems to also attach spectral stability verdicts.

    Raises:
        ValueError: traces differ in time grid or scenario fingerprint.
        KeyError: a requested signal is missing from either trace.
    """
    if not np.array_equal(baseline.times, lqg.times):
        raise ValueError("traces do not share a time grid")
    h0 = baseline.metadata.get("scenario_hash")
    h1 = lqg.metadata.get("scenario_hash")
    if h0 != h1:
        raise ValueError(f"traces come from different scenarios "
                         f"({h0} vs {h1})")
    rows = []
    regressions = []
    for name in signals:
        mb = metrics(baseline, name, band)
        ml = metrics(lqg, name, band)
        improves = ml.ise <= mb.ise
        if not improves:
            regressions.append(name)
        rows.append(SignalComparison(
            signal=name, baseline=mb, lqg=ml,
            ise_ratio=_ratio(mb.ise, ml.ise),
            peak_ratio=_ratio(mb.peak_deviation, ml.peak_deviation),
            steady_state_ratio=_ratio(abs(mb.steady_state), abs(ml.steady_state)),
            lqg_improves_ise=improves,
        ))
    return ComparisonReport(
        signals=tuple(rows), regressions=tuple(regressions),
        baseline_stability=(stability_report(baseline_system)
                            if baseline_system is not None else None),
        lqg_stability=(stability_report(lqg_system)
                       if lqg_system is not None else None))

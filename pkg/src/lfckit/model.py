"""Continuous-time state-space models of N-area interconnected power systems.

Each area contributes four states in a fixed global ordering: frequency
deviation ``f``, generated-power deviation ``pg``, valve/command-power
deviation ``pv``, and net tie-line interchange deviation ``ptie``.  All powers
are per-unit on a common system base; frequencies are in Hz.

Tie lines are stored on unordered area pairs with a symmetric synchronizing
coefficient, so the interchange deviations obey the conservation law
``sum_i ptie_i = const`` within every connected group of areas.  Those
conserved combinations are structurally uncontrollable and are exposed via
:func:`conservation_directions` so controller synthesis can work on the
complementary subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numpy.typing import NDArray

TWO_PI = 2.0 * math.pi

#: label prefix for the states added by augment_integrators
INTEGRATOR_PREFIX = "xi_"


class AreaKind(str, Enum):
    """Generation technology of an area's equivalent source."""
    WIND_INVERTER = "wind-inverter"
    SOLAR_INVERTER = "solar-inverter"
    COMBUSTION_TURBINE = "combustion-turbine"

    @property
    def is_inverter(self) -> bool:
        return self in (AreaKind.WIND_INVERTER, AreaKind.SOLAR_INVERTER)


@dataclass(frozen=True)
class AreaParams:
    """Physical and control constants of one area.

    Attributes:
        name: identifier used in state/signal labels.
        kind: generation technology (sets expectations on time constants).
        k_p: power-system gain, Hz per pu power.
        t_p: power-system time constant, s.
        t_s: governor / inverter command time constant, s.
        t_tg: turbine / inverter power time constant, s.
        r: droop, Hz per pu power.
        rating_mw: nameplate capacity, MW (reporting and per-unit base only).
    """
    name: str
    kind: AreaKind
    k_p: float
    t_p: float
    t_s: float
    t_tg: float
    r: float
    rating_mw: float

    def frequency_bias(self) -> float:
        """Area frequency-response coefficient 1/R + 1/K_P, pu per Hz."""
        return 1.0 / self.r + 1.0 / self.k_p


@dataclass(frozen=True)
class TieLine:
    """Symmetric tie between two areas.

    ``t0`` is the synchronizing coefficient in pu power per radian; it enters
    the interchange dynamics scaled by 2*pi.
    """
    from_area: int
    to_area: int
    t0: float

    def pair(self) -> tuple[int, int]:
        return (min(self.from_area, self.to_area),
                max(self.from_area, self.to_area))


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding; ``severity`` is ``"error"`` or ``"warning"``."""
    severity: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass(frozen=True)
class PlantModel:
    """Linear plant ``xdot = A x + B u + F d``, ``y = C x`` (D = 0).

    For N areas the unaugmented model has 4N states ordered
    ``[f_*, pg_*, pv_*, ptie_*]``, N control inputs, N disturbance channels,
    and 2N outputs (frequencies then interchanges).  Integral augmentation
    appends N integrator states.
    """
    A: NDArray[np.float64]
    B: NDArray[np.float64]
    F: NDArray[np.float64]
    C: NDArray[np.float64]
    D: NDArray[np.float64]
    state_labels: tuple[str, ...]
    input_labels: tuple[str, ...]
    disturbance_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    areas: tuple[AreaParams, ...]
    ties: tuple[TieLine, ...]
    augmented: bool = False

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_areas(self) -> int:
        return len(self.areas)

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_disturbances(self) -> int:
        return self.F.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def state_index(self, label: str) -> int:
        return self.state_labels.index(label)

    def min_time_constant(self) -> float:
        return min(min(a.t_p, a.t_s, a.t_tg) for a in self.areas)


def _check_area(index: int, area: AreaParams) -> list[Diagnostic]:
    out = []
    loc = f"areas[{index}] ({area.name})"
    for fname in ("k_p", "t_p", "t_s", "t_tg", "r", "rating_mw"):
        value = getattr(area, fname)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            out.append(Diagnostic("error", f"{loc}.{fname}",
                                  f"must be a positive finite number, got {value!r}"))
    return out


def _check_ties(areas, ties) -> list[Diagnostic]:
    out = []
    seen: dict[tuple[int, int], int] = {}
    for k, tie in enumerate(ties):
        loc = f"ties[{k}]"
        for attr in ("from_area", "to_area"):
            idx = getattr(tie, attr)
            if not (0 <= idx < len(areas)):
                out.append(Diagnostic("error", f"{loc}.{attr}",
                                      f"area index {idx} out of range 0..{len(areas) - 1}"))
        if tie.from_area == tie.to_area:
            out.append(Diagnostic("error", loc, "tie connects an area to itself"))
        if not (math.isfinite(tie.t0) and tie.t0 > 0):
            out.append(Diagnostic("error", f"{loc}.t0",
                                  f"must be a positive finite number, got {tie.t0!r}"))
        pair = tie.pair()
        if pair in seen:
            out.append(Diagnostic("error", loc,
                                  f"duplicate tie for area pair {pair} "
                                  f"(first declared at ties[{seen[pair]}])"))
        else:
            seen[pair] = k
    return out


def validate_params(areas, ties) -> list[Diagnostic]:
    """Check area and tie parameters; returns diagnostics, raises nothing.

    Errors are hard invariant violations (non-positive constants, bad tie
    indices, duplicate pairs).  Warnings flag physically suspicious but legal
    configurations: an inverter area with command/power time constants no
    faster than a turbine area's, and areas left unconnected to the rest of
    the system.
    """
    areas = list(areas)
    ties = list(ties)
    out: list[Diagnostic] = []
    if not areas:
        out.append(Diagnostic("error", "areas", "at least one area is required"))
        return out
    for i, area in enumerate(areas):
        out.extend(_check_area(i, area))
    out.extend(_check_ties(areas, ties))
    if any(d.severity == "error" for d in out):
        return out

    turbine_ttg = {a.name: a.t_tg for a in areas if not a.kind.is_inverter}
    turbine_ts = {a.name: a.t_s for a in areas if not a.kind.is_inverter}
    for i, area in enumerate(areas):
        if not area.kind.is_inverter:
            continue
        for tname, ttg in turbine_ttg.items():
            if area.t_tg > ttg:
                out.append(Diagnostic(
                    "warning", f"areas[{i}].t_tg",
                    f"inverter area '{area.name}' has t_tg={area.t_tg} slower than "
                    f"turbine area '{tname}' (t_tg={ttg}); inverters are expected "
                    "to respond faster"))
        for tname, ts in turbine_ts.items():
            if area.t_s > ts:
                out.append(Diagnostic(
                    "warning", f"areas[{i}].t_s",
                    f"inverter area '{area.name}' has t_s={area.t_s} slower than "
                    f"turbine area '{tname}' (t_s={ts}); inverters are expected "
                    "to respond faster"))

    if len(areas) > 1:
        connected = {t.from_area for t in ties} | {t.to_area for t in ties}
        for i, area in enumerate(areas):
            if i not in connected:
                out.append(Diagnostic(
                    "warning", f"areas[{i}]",
                    f"area '{area.name}' has no tie line to any other area"))
    return out


def _raise_on_errors(diagnostics) -> None:
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        raise ValueError("invalid model parameters:\n" +
                         "\n".join(str(d) for d in errors))


def tie_laplacian(n_areas: int, ties) -> NDArray[np.float64]:
    """Weighted graph Laplacian of the tie network with weights 2*pi*T0."""
    lap = np.zeros((n_areas, n_areas))
    for tie in ties:
        w = TWO_PI * tie.t0
        i, j = tie.from_area, tie.to_area
        lap[i, i] += w
        lap[j, j] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


def build_plant(areas, ties=()) -> PlantModel:
    """Assemble the N-area plant from per-area constants and tie lines.

    Per area i the rows realize
        f_i'    = (-1/T_Pi) f_i + (K_Pi/T_Pi) (pg_i - d_i - ptie_i)
        pv_i'   = (-1/T_Si) pv_i + (1/T_Si) (u_i - f_i / R_i)
        pg_i'   = (-1/T_TGi) pg_i + (1/T_TGi) pv_i
        ptie_i' = sum over ties (i,j) of 2 pi T0_ij (f_i - f_j)
    with outputs selecting the frequency and interchange states exactly.

    Raises:
        ValueError: on any hard parameter violation (see validate_params).
    """
    areas = tuple(areas)
    ties = tuple(ties)
    _raise_on_errors(validate_params(areas, ties))

    N = len(areas)
    n = 4 * N
    A = np.zeros((n, n))
    B = np.zeros((n, N))
    F = np.zeros((n, N))

    def f(i): return i
    def pg(i): return N + i
    def pv(i): return 2 * N + i
    def ptie(i): return 3 * N + i

    for i, area in enumerate(areas):
        A[f(i), f(i)] = -1.0 / area.t_p
        A[f(i), pg(i)] = area.k_p / area.t_p
        A[f(i), ptie(i)] = -area.k_p / area.t_p
        F[f(i), i] = -area.k_p / area.t_p
        A[pv(i), pv(i)] = -1.0 / area.t_s
        A[pv(i), f(i)] = -1.0 / (area.r * area.t_s)
        B[pv(i), i] = 1.0 / area.t_s
        A[pg(i), pg(i)] = -1.0 / area.t_tg
        A[pg(i), pv(i)] = 1.0 / area.t_tg

    for tie in ties:
        w = TWO_PI * tie.t0
        i, j = tie.from_area, tie.to_area
        A[ptie(i), f(i)] += w
        A[ptie(i), f(j)] -= w
        A[ptie(j), f(j)] += w
        A[ptie(j), f(i)] -= w

    p = 2 * N
    C = np.zeros((p, n))
    for i in range(N):
        C[i, f(i)] = 1.0
        C[N + i, ptie(i)] = 1.0
    D = np.zeros((p, N))

    names = [a.name for a in areas]
    state_labels = tuple([f"f_{m}" for m in names] + [f"pg_{m}" for m in names]
                         + [f"pv_{m}" for m in names] + [f"ptie_{m}" for m in names])
    return PlantModel(
        A=A, B=B, F=F, C=C, D=D,
        state_labels=state_labels,
        input_labels=tuple(f"pc_{m}" for m in names),
        disturbance_labels=tuple(f"pd_{m}" for m in names),
        output_labels=tuple([f"f_{m}" for m in names] + [f"ptie_{m}" for m in names]),
        areas=areas, ties=ties,
    )


def integrator_selector(plant: PlantModel) -> NDArray[np.float64]:
    """N x 2N map from measured outputs to integrator inputs.

    Row i forms the area control error ACE_i = b_i * f_i + ptie_i, where
    b_i = 1/R_i + 1/K_Pi is the area frequency-response coefficient.
    Integrating the interchange term along with the frequency term is what
    pins both signals to zero in steady state; a pure frequency integral
    leaves a permanent interchange offset after an asymmetric load change.
    """
    N = plant.n_areas
    S = np.zeros((N, 2 * N))
    for i, area in enumerate(plant.areas):
        S[i, i] = area.frequency_bias()
        S[i, N + i] = 1.0
    return S


def augment_integrators(plant: PlantModel) -> PlantModel:
    """Append one integral state per area: ``xi_i' = -(b_i f_i + ptie_i)``.

    The integrators accumulate each area's control error against a zero
    reference.  The augmented A is block lower-triangular with a zero block
    for the integrator dynamics, so its spectrum is the plant spectrum plus
    N zeros.  B and F gain zero rows.

    Raises:
        ValueError: if the plant is already augmented.
    """
    if plant.augmented:
        raise ValueError("plant is already integrator-augmented")
    n = plant.n_states
    N = plant.n_areas
    S = integrator_selector(plant)
    A = np.zeros((n + N, n + N))
    A[:n, :n] = plant.A
    A[n:, :n] = -S @ plant.C
    B = np.vstack([plant.B, np.zeros((N, plant.n_inputs))])
    F = np.vstack([plant.F, np.zeros((N, plant.n_disturbances))])
    C = np.hstack([plant.C, np.zeros((plant.n_outputs, N))])
    labels = plant.state_labels + tuple(
        f"{INTEGRATOR_PREFIX}{a.name}" for a in plant.areas)
    return replace(plant, A=A, B=B, F=F, C=C,
                   state_labels=labels, augmented=True)


def _tie_components(plant: PlantModel) -> list[list[int]]:
    """Connected components of the tie graph, singletons included."""
    N = plant.n_areas
    parent = list(range(N))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for tie in plant.ties:
        a, b = find(tie.from_area), find(tie.to_area)
        if a != b:
            parent[a] = b
    groups: dict[int, list[int]] = {}
    for i in range(N):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def conservation_directions(plant: PlantModel) -> NDArray[np.float64]:
    """Basis (n x k) for the structurally conserved combinations of states.

    Each connected tie component S contributes the indicator of its
    interchange states: under symmetric coefficients the rows of A for
    ``{ptie_i : i in S}`` sum to exactly zero, so ``sum_{i in S} ptie_i`` has
    zero derivative, and neither controls nor disturbances reach it (isolated
    areas contribute their single frozen ptie state).  The same directions,
    zero-padded over the integrator states, remain conserved after
    augmentation.

    Columns satisfy ``w.T A = 0``, ``w.T B = 0`` and ``w.T F = 0`` exactly;
    synthesis removes them before solving Riccati equations, since an
    eigenvalue pinned at zero in an uncontrollable direction admits no
    strictly stabilizing feedback.
    """
    N = plant.n_areas
    n = plant.n_states
    tie0 = 3 * N
    comps = _tie_components(plant)
    W = np.zeros((n, len(comps)))
    for k, comp in enumerate(comps):
        for i in comp:
            W[tie0 + i, k] = 1.0
    return W

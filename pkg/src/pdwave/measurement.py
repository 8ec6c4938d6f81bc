"""Measurement-point detection, outcome sampling, and projection postulates.

A measurement happens when a component's probability-wave peak reaches the
device particle at x = v*t (free) or t = arrival_time(x) (potential).
Outcomes are drawn categorically from the squared amplitudes; projection
collapses the superposition to a single unit-amplitude component whose
wave is a plane wave at the measurement point.  Composites pair system
and pointer waves with postulated pointer orthogonality.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Branch, FreeWaveParams
from .evolution import DensityMatrix, SuperposedState
from .freewave import Grid1D, psi_free
from .potential import PotentialSpec, arrival_time
from .spectral import apply_observable

__all__ = [
    "MeasurementEvent",
    "CompositeState",
    "EnsembleReport",
    "detect_mp",
    "sample_outcome",
    "run_ensemble",
    "dirac_project",
    "tensor_compose",
    "composite_eigenvalues",
    "composite_schrodinger_residual",
    "von_neumann_project",
    "mixture_density",
    "compare_averages",
]


@dataclass(frozen=True, eq=False)
class MeasurementEvent:
    """Arrival of a wave peak at the device particle.

    The event pins the measurement-point regime: the envelope rate in
    force at the event is zero (``mp_rate``), which is what lets
    downstream hermitization return real eigenvalues.
    """

    x: float
    t: float
    speed: float
    outcome_index: int | None = None
    pre_state: SuperposedState | None = None
    post_state: SuperposedState | None = None
    mp_rate: float = 0.0
    tol: float = 1e-9
    kind: str = "free"

    def __post_init__(self) -> None:
        if self.kind == "free" and not self.is_at_mp():
            raise ValueError("event does not satisfy the arrival condition x = v*t")
        if self.post_state is not None:
            amps = np.abs(self.post_state.amplitudes)
            if not (np.isclose(amps.max(), 1.0) and np.sum(amps > 1e-12) == 1):
                raise ValueError("post-measurement state must have one unit amplitude")

    def is_at_mp(self) -> bool:
        """Arrival condition: x = v*t for free waves (checked at detection
        against the amplitude's arrival integral for potential waves)."""
        if self.kind != "free":
            return True
        return abs(self.x - self.speed * self.t) <= self.tol * max(1.0, abs(self.x))


def detect_mp(target, x: float, t: float, tol: float = 1e-9) -> MeasurementEvent | None:
    """Return a measurement event iff the wave peak is at (x, t).

    ``target`` may be a FreeWaveParams (condition |x - v*t| <= tol), a
    PotentialSpec (condition |t - arrival_time(x)| <= tol), or a
    SuperposedState (any component's peak arriving).  Absence of an event
    is a value, not an error.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if isinstance(target, FreeWaveParams):
        if abs(x - target.v * t) <= tol:
            return MeasurementEvent(x=x, t=t, speed=target.v, tol=max(tol, 1e-9))
        return None
    if isinstance(target, PotentialSpec):
        if abs(t - arrival_time(target, x)) <= tol:
            return MeasurementEvent(
                x=x, t=t, speed=float(target.v_at(x)), tol=tol, kind="potential"
            )
        return None
    if isinstance(target, SuperposedState):
        for i, wave in enumerate(target.waves):
            if abs(x - wave.v * t) <= tol:
                return MeasurementEvent(
                    x=x, t=t, speed=wave.v, pre_state=target, tol=max(tol, 1e-9)
                )
        return None
    raise TypeError(f"cannot detect a measurement point on {type(target).__name__}")


def sample_outcome(state: SuperposedState, rng: np.random.Generator) -> int:
    """Draw one outcome index with probability |a_i|^2."""
    return int(rng.choice(state.n, p=state.probabilities()))


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    """Outcome statistics of repeated single-shot measurements."""

    n_trials: int
    counts: np.ndarray
    frequencies: np.ndarray
    expected: np.ndarray
    chi_square: float
    seed: int

    def __post_init__(self) -> None:
        if int(np.sum(self.counts)) != self.n_trials:
            raise ValueError("counts must sum to n_trials")

    def z_scores(self) -> np.ndarray:
        sigma = np.sqrt(self.expected * (1.0 - self.expected) / self.n_trials)
        return (self.frequencies - self.expected) / sigma

    def to_json(self) -> str:
        z = self.z_scores()
        return json.dumps(
            {
                "n_trials": self.n_trials,
                "seed": self.seed,
                "chi_square": self.chi_square,
                "outcomes": [
                    {
                        "outcome": i,
                        "count": int(self.counts[i]),
                        "frequency": self.frequencies[i],
                        "expected": self.expected[i],
                        "z_score": z[i],
                    }
                    for i in range(self.counts.size)
                ],
            },
            sort_keys=True,
        )

    def to_csv(self) -> str:
        z = self.z_scores()
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["outcome", "count", "frequency", "expected", "z_score"])
        for i in range(self.counts.size):
            writer.writerow(
                [
                    i,
                    int(self.counts[i]),
                    repr(float(self.frequencies[i])),
                    repr(float(self.expected[i])),
                    repr(float(z[i])),
                ]
            )
        return out.getvalue()


def run_ensemble(
    state: SuperposedState, n_trials: int, seed: int, workers: int = 1
) -> EnsembleReport:
    """Measure ``n_trials`` identical copies and tally outcome frequencies.

    Trials are split across ``workers`` independent deterministic streams
    spawned from the seed; merged counts are order-independent, so the
    report is bit-reproducible for a fixed (seed, workers) pair.
    """
    if n_trials < 1 or workers < 1:
        raise ValueError("n_trials and workers must be positive")
    probs = state.probabilities()
    children = np.random.SeedSequence(seed).spawn(workers)
    base, extra = divmod(n_trials, workers)
    counts = np.zeros(state.n, dtype=np.int64)
    for i, child in enumerate(children):
        m = base + (1 if i < extra else 0)
        if m == 0:
            continue
        rng = np.random.default_rng(child)
        draws = rng.choice(state.n, size=m, p=probs)
        counts += np.bincount(draws, minlength=state.n)
    freq = counts / n_trials
    chi_square = float(np.sum((counts - n_trials * probs) ** 2 / (n_trials * probs)))
    return EnsembleReport(
        n_trials=n_trials,
        counts=counts,
        frequencies=freq,
        expected=probs,
        chi_square=chi_square,
        seed=seed,
    )


def _stopped_wave(template: FreeWaveParams) -> FreeWaveParams:
    """Absorbed post-measurement state: R = v = 0 stops the particle."""
    return FreeWaveParams(
        k=0.0, omega=0.0, R=0.0, v=0.0, branch=template.branch, constants=template.constants
    )


def _already_projected(state: SuperposedState, outcome: int) -> bool:
    amps = np.abs(state.amplitudes)
    return bool(np.isclose(amps[outcome], 1.0) and np.sum(amps > 1e-12) == 1)


def dirac_project(
    state: SuperposedState,
    outcome: int,
    event: MeasurementEvent,
    record: bool = False,
) -> SuperposedState:
    """Collapse a superposition to the component found at the event.

    The surviving amplitude is exactly one and the surviving wave is the
    measurement-point plane wave: with ``record=True`` the particle is
    stopped and absorbed (R = v = 0); otherwise it is re-emitted on the
    outgoing branch.  Projecting an already-projected state is a no-op.
    """
    if not 0 <= outcome < state.n:
        raise ValueError("outcome index out of range")
    if _already_projected(state, outcome):
        return state
    wave = state.waves[outcome]
    if abs(event.x - wave.v * event.t) > event.tol * max(1.0, abs(event.x)):
        raise ValueError("event does not match the outcome component's arrival")
    amps = np.zeros(state.n, dtype=complex)
    amps[outcome] = 1.0
    post = _stopped_wave(wave) if record else replace(wave, branch=Branch.OUTGOING)
    waves = tuple(post if i == outcome else w for i, w in enumerate(state.waves))
    return SuperposedState(amplitudes=amps, waves=waves)


@dataclass(frozen=True, eq=False)
class CompositeState:
    """Entangled system+pointer state: sum_i a_i psi_i (x) phi_i.

    Pointer states must be pairwise distinct; they represent macroscopically
    distinguishable device configurations whose mutual orthogonality makes
    the paired product states theta_i orthogonal.
    """

    system_components: tuple[FreeWaveParams, ...]
    pointer_components: tuple[FreeWaveParams, ...]
    amplitudes: np.ndarray
    collapsed: bool = False

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = amps.size
        if len(self.system_components) != n or len(self.pointer_components) != n:
            raise ValueError("component counts must match the amplitude count")
        total = float(np.sum(np.abs(amps) ** 2))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"amplitudes must be normalized; sum of squares = {total}")
        for i in range(n):
            for j in range(i + 1, n):
                if self.pointer_components[i] == self.pointer_components[j]:
                    raise ValueError("pointer states must be mutually orthogonal (distinct)")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "system_components", tuple(self.system_components))
        object.__setattr__(self, "pointer_components", tuple(self.pointer_components))

    @property
    def n(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


def tensor_compose(system_states, pointer_states, amplitudes) -> CompositeState:
    """Build the entangled composite sum_i a_i psi_i (x) phi_i."""
    return CompositeState(
        system_components=tuple(system_states),
        pointer_components=tuple(pointer_states),
        amplitudes=np.asarray(amplitudes, dtype=complex),
    )


def composite_eigenvalues(
    composite: CompositeState, system_eigs=None, pointer_eigs=None
) -> np.ndarray:
    """Eigenvalues of A (x) B on the product components: lambda_i * eta_i.

    Defaults to the energy eigenvalues of each factor.
    """
    if system_eigs is None:
        system_eigs = [apply_observable("H", w).value for w in composite.system_components]
    if pointer_eigs is None:
        pointer_eigs = [apply_observable("H", w).value for w in composite.pointer_components]
    return np.asarray(system_eigs, dtype=complex) * np.asarray(pointer_eigs, dtype=complex)


def composite_schrodinger_residual(
    composite: CompositeState,
    index: int,
    grid_system: Grid1D,
    grid_pointer: Grid1D,
    h_x: float = 1e-3,
    h_t: float = 1e-3,
) -> float:
    """Finite-difference residual of the two-coordinate product wave.

    theta(x1, x2, t) = psi(x1, t) * phi(x2, t) must satisfy the composite
    free equation i*hbar*theta_t + (hbar^2/2m)(theta_x1x1 + theta_x2x2) = 0
    when both factors satisfy their own equations.
    """
    if grid_system.t != grid_pointer.t:
        raise ValueError("both grids must share the evaluation time")
    psi_w = composite.system_components[index]
    phi_w = composite.pointer_components[index]
    t = grid_system.t
    x1 = grid_system.xs()[:, None]
    x2 = grid_pointer.xs()[None, :]

    def theta(a, b, tt):
        return psi_free(psi_w, a, tt) * psi_free(phi_w, b, tt)

    hbar = psi_w.constants.hbar
    c = hbar * hbar / (2.0 * psi_w.constants.mass)
    d_t = (theta(x1, x2, t + h_t) - theta(x1, x2, t - h_t)) / (2.0 * h_t)
    base = theta(x1, x2, t)
    d_11 = (theta(x1 + h_x, x2, t) - 2.0 * base + theta(x1 - h_x, x2, t)) / h_x**2
    d_22 = (theta(x1, x2 + h_x, t) - 2.0 * base + theta(x1, x2 - h_x, t)) / h_x**2
    return float(np.max(np.abs(1j * hbar * d_t + c * (d_11 + d_22))))


def von_neumann_project(
    composite: CompositeState,
    outcome: int,
    event: MeasurementEvent,
    record: bool = False,
) -> CompositeState:
    """Collapse the composite to the single product theta_outcome.

    Both factors become plane waves at the measurement point and the
    amplitude is exactly one.  The result carries ``collapsed=True``; no
    inverse operation exists in this module.  Idempotent.
    """
    if not 0 <= outcome < composite.n:
        raise ValueError("outcome index out of range")
    amps = np.abs(composite.amplitudes)
    if composite.collapsed and np.isclose(amps[outcome], 1.0):
        return composite
    sys_wave = composite.system_components[outcome]
    if abs(event.x - sys_wave.v * event.t) > event.tol * max(1.0, abs(event.x)):
        raise ValueError("event does not match the outcome component's arrival")

    def _post(w: FreeWaveParams) -> FreeWaveParams:
        return _stopped_wave(w) if record else replace(w, branch=Branch.OUTGOING)

    new_amps = np.zeros(composite.n, dtype=complex)
    new_amps[outcome] = 1.0
    return CompositeState(
        system_components=tuple(
            _post(w) if i == outcome else w for i, w in enumerate(composite.system_components)
        ),
        pointer_components=tuple(
            _post(w) if i == outcome else w
            for i, w in enumerate(composite.pointer_components)
        ),
        amplitudes=new_amps,
        collapsed=True,
    )


def mixture_density(states, weights) -> DensityMatrix:
    """Weighted mixture sum_i w_i |state_i><state_i| in the shared basis.

    All states must be amplitude vectors over the same orthonormal product
    basis (same length); weights must sum to one.
    """
    weights = np.asarray(weights, dtype=float)
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to one, got {weights.sum()}")
    vectors = []
    for s in states:
        vec = s.amplitudes if hasattr(s, "amplitudes") else np.asarray(s, dtype=complex)
        vectors.append(np.asarray(vec, dtype=complex))
    n = vectors[0].size
    if any(v.size != n for v in vectors):
        raise ValueError("all states must share the same basis dimension")
    rho = np.zeros((n, n), dtype=complex)
    for w, v in zip(weights, vectors):
        rho += w * np.outer(v, v.conj())
    return DensityMatrix(entries=rho)


@dataclass(frozen=True)
class ComparedAverages:
    """Pre-measurement (entangled) vs post-measurement (reduced) averages."""

    entangled_avg: complex
    reduced_avg: float


def compare_averages(composite: CompositeState, eigenvalues) -> ComparedAverages:
    """Average a system observable over the entangled and reduced states.

    Before measurement the observable is non-Hermitian and the average
    sum |a_i|^2 lambda_i is complex; the reduced (measured) average keeps
    only the real parts.  The imaginary part equals
    sum |a_i|^2 * hbar * R_i / 2 for the energy observable.
    """
    eigs = np.asarray(eigenvalues, dtype=complex)
    if eigs.size != composite.n:
        raise ValueError("need one eigenvalue per component")
    p = composite.probabilities()
    entangled = complex(np.sum(p * eigs))
    reduced = float(np.sum(p * eigs.real))
    return ComparedAverages(entangled_avg=entangled, reduced_avg=reduced)

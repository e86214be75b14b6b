"""Matrix-free state-vector evolution under ``H = H_I - gamma * H_G``.

``H_I`` is diagonal in the computational basis; ``H_G = sum_j X_j`` is the
adjacency matrix of the n-dimensional hypercube and is applied by flipping
index bits, so no 2**n x 2**n matrix is ever built.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .ising import DEFAULT_CAP, IsingProblem, SpectrumSummary, all_energies, summarize_energies
from .schedule import WalkSchedule
from .special import bessel_j_sequence

MAX_DEGREE = 200_000
DRIFT_TOL = 1e-6


class DegreeCapError(RuntimeError):
    """The requested accuracy needs a polynomial above the degree cap."""


def hypercube_apply(v: np.ndarray, n: int) -> np.ndarray:
    """``H_G v``: ``out[x] = sum_j v[x ^ (1 << j)]``."""
    out = np.zeros_like(v)
    for j in range(n):
        blocks = v.reshape(-1, 2, 1 << j)
        out.reshape(-1, 2, 1 << j)[...] += blocks[:, ::-1, :]
    return out


@dataclass(frozen=True)
class HamiltonianAction:
    diag: np.ndarray
    gamma: float
    n: int

    def __post_init__(self):
        if self.diag.shape != (1 << self.n,):
            raise ValueError(f"diagonal has shape {self.diag.shape}, expected ({1 << self.n},)")

    def apply(self, v: np.ndarray) -> np.ndarray:
        if v.shape != self.diag.shape:
            raise ValueError(f"state has shape {v.shape}, expected {self.diag.shape}")
        out = self.diag * v
        if self.gamma != 0.0:
            out -= self.gamma * hypercube_apply(v, self.n)
        return out

    def spectral_bounds(self) -> tuple[float, float]:
        """Centre and half-width of an interval containing the spectrum."""
        lo, hi = float(self.diag.min()), float(self.diag.max())
        return 0.5 * (lo + hi), 0.5 * (hi - lo) + abs(self.gamma) * self.n


def apply_h(action: HamiltonianAction, v: np.ndarray) -> np.ndarray:
    return action.apply(v)


def chebyshev_coefficients(x: float, tol: float = 1e-6) -> np.ndarray:
    """Coefficients ``c_k`` with ``exp(-i x y) ~ sum_k c_k T_k(y)`` on ``[-1, 1]``.

    ``c_0 = J_0(x)``, ``c_k = 2 (-i)^k J_k(x)``; truncated once the remaining
    tail ``sum |c_k|`` drops below ``tol / 10``.
    """
    if x == 0.0:
        return np.ones(1, dtype=complex)
    kmax = int(x + 40 + 12 * x ** (1 / 3))
    if kmax > MAX_DEGREE:
        raise DegreeCapError(f"exp(-i x y) with x={x:.4g} needs degree > {MAX_DEGREE}")
    j = bessel_j_sequence(x, kmax)
    mags = 2.0 * np.abs(j)
    mags[0] = abs(j[0])
    tail = np.cumsum(mags[::-1])[::-1]
    below = np.flatnonzero(tail < tol / 10.0)
    if below.size == 0:
        raise DegreeCapError(f"tolerance {tol} not reached by degree {kmax}")
    deg = max(int(below[0]) - 1, 0)
    k = np.arange(deg + 1)
    c = 2.0 * j[: deg + 1] * (-1j) ** k
    c[0] = j[0]
    return c


def propagate(action: HamiltonianAction, v: np.ndarray, t: float, tol: float = 1e-6) -> np.ndarray:
    """``exp(-i H t) v`` via a Chebyshev expansion evaluated with Clenshaw's recurrence."""
    if t < 0:
        raise ValueError("t must be non-negative")
    v = np.asarray(v, dtype=complex)
    if t == 0.0:
        return v.copy()
    if action.gamma == 0.0:
        # diagonal Hamiltonian: exact phases
        return np.exp(-1j * action.diag * t) * v
    centre, radius = action.spectral_bounds()
    c = chebyshev_coefficients(radius * t, tol)

    def scaled(u):
        return (action.apply(u) - centre * u) / radius

    # Clenshaw: b_k = c_k v + 2 X b_{k+1} - b_{k+2};  p(X) v = c_0 v + X b_1 - b_2
    b1 = np.zeros_like(v)
    b2 = np.zeros_like(v)
    for ck in c[:0:-1]:
        b1, b2 = ck * v + 2.0 * scaled(b1) - b2, b1
    out = c[0] * v + scaled(b1) - b2
    return out * np.exp(-1j * centre * t)


def uniform_state(n: int) -> np.ndarray:
    N = 1 << n
    return np.full(N, 1.0 / math.sqrt(N), dtype=complex)


@dataclass
class PreparedProblem:
    """A problem with its diagonal energies and ground set computed once."""

    problem: IsingProblem
    diag: np.ndarray
    spectrum: SpectrumSummary

    @classmethod
    def from_problem(cls, p: IsingProblem, cap: int = DEFAULT_CAP) -> PreparedProblem:
        diag = all_energies(p, cap)
        return cls(p, diag, summarize_energies(diag, keep=False))

    @property
    def n(self) -> int:
        return self.problem.n

    def action(self, gamma: float) -> HamiltonianAction:
        return HamiltonianAction(self.diag, gamma, self.n)


def _prepared(p, cap: int = DEFAULT_CAP) -> PreparedProblem:
    return p if isinstance(p, PreparedProblem) else PreparedProblem.from_problem(p, cap)


@dataclass
class WalkOutput:
    state: np.ndarray
    drift: list[float] = field(default_factory=list)


def run_msqw_detailed(p, schedule: WalkSchedule, times_override=None, tol: float = 1e-6) -> WalkOutput:
    prep = _prepared(p)
    times = schedule.times if times_override is None else list(times_override)
    if len(times) != schedule.m:
        raise ValueError(f"expected {schedule.m} stage times, got {len(times)}")
    psi = uniform_state(prep.n)
    drift = []
    for gamma, t in zip(schedule.gammas, times):
        psi = propagate(prep.action(gamma), psi, t, tol)
        norm = float(np.linalg.norm(psi))
        drift.append(norm - 1.0)
        if abs(norm - 1.0) > DRIFT_TOL:
            psi /= norm
    return WalkOutput(psi, drift)


def run_msqw(p, schedule: WalkSchedule, times_override=None, tol: float = 1e-6) -> np.ndarray:
    """Final state of the multi-stage walk from the uniform superposition."""
    return run_msqw_detailed(p, schedule, times_override, tol).state


def success_probability(p, state: np.ndarray, ground_indices=None) -> float:
    if ground_indices is None:
        if isinstance(p, PreparedProblem):
            ground_indices = p.spectrum.ground_indices
        else:
            raise ValueError("a ground set is required: pass ground_indices or a PreparedProblem")
    idx = np.asarray(ground_indices, dtype=int)
    return float(np.sum(np.abs(state[idx]) ** 2))


@dataclass(frozen=True)
class RunResult:
    success_prob: float
    stderr: float
    samples: int
    schedule_used: WalkSchedule
    wall_time: float


def _sample_rng(seed, index: int) -> np.random.Generator:
    base = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    return np.random.default_rng([*base, index])


def mc_short_time_average(p, schedule: WalkSchedule, samples: int = 100, seed=0,
                          tol: float = 1e-6) -> RunResult:
    """Mean success probability with each stage time drawn uniformly from ``[t_k, 2 t_k]``.

    ``seed`` may be an int or a sequence of ints; sample ``i`` uses the stream
    ``(*seed, i)`` so results do not depend on execution order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    start = time.perf_counter()
    prep = _prepared(p)
    base = np.asarray(schedule.times)
    probs = np.empty(samples)
    for i in range(samples):
        u = _sample_rng(seed, i).random(schedule.m)
        psi = run_msqw(prep, schedule, base * (1.0 + u), tol)
        probs[i] = success_probability(prep, psi)
    mean = float(probs.mean())
    stderr = float(probs.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return RunResult(mean, stderr, samples, schedule, time.perf_counter() - start)


def graph_energy(v: np.ndarray, n: int) -> float:
    return float(np.real(np.vdot(v, hypercube_apply(v, n))))


def problem_energy(v: np.ndarray, diag: np.ndarray) -> float:
    return float(np.sum(diag * np.abs(v) ** 2))


def graph_energy_trace(p, gamma: float, t_max: float, steps: int, tol: float = 1e-6):
    """``(t, E_G simulated, E_G quadratic)`` on ``steps + 1`` evenly spaced times.

    The quadratic prediction is ``n - t**2 * delta_sq / 2``.
    """
    from .stats import delta_sq

    if steps < 1:
        raise ValueError("steps must be >= 1")
    prep = _prepared(p)
    n = prep.n
    dsq = delta_sq(prep.problem)
    action = prep.action(gamma)
    psi = uniform_state(n)
    ts = np.linspace(0.0, t_max, steps + 1)
    # the uniform state is the top eigenvector of H_G (eigenvalue n); skip the rounding of 1/sqrt(N)
    out = [(0.0, float(n), float(n))]
    for t0, t1 in zip(ts[:-1], ts[1:]):
        psi = propagate(action, psi, t1 - t0, tol)
        out.append((float(t1), graph_energy(psi, n), float(n - t1 * t1 * dsq / 2.0)))
    return out

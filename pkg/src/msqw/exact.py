"""Dense small-n oracles: eigendecomposition evolution and infinite-time averages."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .evolve import PreparedProblem, _prepared, _sample_rng, uniform_state

DENSE_CAP = 10
PINF_CAP = 12
NAIVE_CAP = 5
NAIVE_STAGE_CAP = 3
DEGENERACY_RTOL = 1e-9


class DegeneracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray


def hypercube_matrix(n: int) -> np.ndarray:
    N = 1 << n
    idx = np.arange(N)
    G = np.zeros((N, N))
    for j in range(n):
        G[idx, idx ^ (1 << j)] = 1.0
    return G


def dense_hamiltonian(diag: np.ndarray, gamma: float, n: int) -> np.ndarray:
    H = -gamma * hypercube_matrix(n)
    H[np.diag_indices_from(H)] = diag
    return H


def eigensystem(prep: PreparedProblem, gamma: float, cap: int = PINF_CAP) -> EigenSystem:
    if prep.n > cap:
        raise ValueError(f"n={prep.n} exceeds the dense cap of {cap}")
    vals, vecs = np.linalg.eigh(dense_hamiltonian(prep.diag, gamma, prep.n))
    return EigenSystem(vals, vecs)


def _check_degenerate(es: EigenSystem) -> bool:
    scale = max(abs(es.values[0]), abs(es.values[-1]), 1e-300)
    return bool(np.any(np.diff(es.values) < DEGENERACY_RTOL * scale))


def dense_evolve(p, gamma: float, t: float, v: np.ndarray, cap: int = DENSE_CAP) -> np.ndarray:
    """``V exp(-i Lambda t) V^T v`` from a full eigendecomposition."""
    es = eigensystem(_prepared(p), gamma, cap)
    return es.vectors @ (np.exp(-1j * es.values * t) * (es.vectors.T @ np.asarray(v, dtype=complex)))


def _groups(values: np.ndarray) -> list[np.ndarray]:
    scale = max(abs(values[0]), abs(values[-1]), 1e-300)
    breaks = np.flatnonzero(np.diff(values) >= DEGENERACY_RTOL * scale) + 1
    return np.split(np.arange(values.size), breaks)


def _stage_systems(prep: PreparedProblem, gammas, cap: int) -> list[EigenSystem]:
    systems = [eigensystem(prep, g, cap) for g in gammas]
    if any(_check_degenerate(es) for es in systems):
        warnings.warn("near-degenerate stage spectrum: infinite-time average assumes distinct levels",
                      DegeneracyWarning, stacklevel=3)
    return systems


def p_inf_nested(p, gammas, cap: int = PINF_CAP, grouped: bool = False) -> float:
    """Infinite-time average success probability via nested basis changes, O(m N^3).

    With ``grouped=True`` degenerate levels of each stage keep their mutual
    coherence (the state is dephased onto eigenspaces rather than eigenvectors).
    """
    prep = _prepared(p)
    if prep.n > cap:
        raise ValueError(f"n={prep.n} exceeds the infinite-time cap of {cap}")
    gammas = list(gammas)
    if not gammas:
        raise ValueError("need at least one stage")
    systems = _stage_systems(prep, gammas, cap)
    ground = np.asarray(prep.spectrum.ground_indices)
    psi0 = uniform_state(prep.n).real
    if grouped:
        return _p_inf_grouped(systems, psi0, ground)
    d = (systems[0].vectors.T @ psi0) ** 2
    for prev, cur in zip(systems[:-1], systems[1:]):
        M = (cur.vectors.T @ prev.vectors) ** 2
        d = M @ d
    final = systems[-1].vectors[ground, :] ** 2
    return float(np.sum(final @ d))


def _p_inf_grouped(systems, psi0, ground) -> float:
    rho = np.outer(psi0, psi0)
    for es in systems:
        V = es.vectors
        r = V.T @ rho @ V
        mask = np.zeros_like(r, dtype=bool)
        for g in _groups(es.values):
            mask[np.ix_(g, g)] = True
        rho = V @ np.where(mask, r, 0.0) @ V.T
    return float(np.sum(np.diag(rho)[ground]))


def p_inf_naive(p, gammas) -> float:
    """Direct multi-index sum over all eigenvector chains (test oracle, N^m terms)."""
    prep = _prepared(p)
    gammas = list(gammas)
    if prep.n > NAIVE_CAP or len(gammas) > NAIVE_STAGE_CAP:
        raise ValueError(f"naive sum is limited to n <= {NAIVE_CAP} and m <= {NAIVE_STAGE_CAP}")
    systems = [eigensystem(prep, g, NAIVE_CAP) for g in gammas]
    psi0 = uniform_state(prep.n).real
    N = psi0.size
    first = systems[0].vectors.T @ psi0
    links = [cur.vectors.T @ prev.vectors for prev, cur in zip(systems[:-1], systems[1:])]
    last = systems[-1].vectors
    total = 0.0
    for g in prep.spectrum.ground_indices:
        for chain in itertools.product(range(N), repeat=len(gammas)):
            amp = first[chain[0]]
            for k, L in enumerate(links):
                amp *= L[chain[k + 1], chain[k]]
            amp *= last[g, chain[-1]]
            total += amp * amp
    return float(total)


def p_inf_sampled(p, gammas, samples: int = 2000, t_max: float = 1000.0, seed=0,
                  cap: int = PINF_CAP) -> tuple[float, float]:
    """Monte-Carlo estimate of the long-time average with stage times uniform on ``[0, t_max]``.

    Returns ``(mean, standard error)``.
    """
    prep = _prepared(p)
    systems = [eigensystem(prep, g, cap) for g in gammas]
    ground = np.asarray(prep.spectrum.ground_indices)
    probs = np.empty(samples)
    for i in range(samples):
        ts = _sample_rng(seed, i).random(len(systems)) * t_max
        psi = uniform_state(prep.n)
        for es, t in zip(systems, ts):
            psi = es.vectors @ (np.exp(-1j * es.values * t) * (es.vectors.T @ psi))
        probs[i] = np.sum(np.abs(psi[ground]) ** 2)
    return float(probs.mean()), float(probs.std(ddof=1) / math.sqrt(samples))

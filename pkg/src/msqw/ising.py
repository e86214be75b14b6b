"""Ising problem instances, spin conventions and the exhaustive ground-truth solver.

Basis index ``idx`` encodes one spin configuration: bit ``i`` of ``idx`` is
qubit ``i`` and maps to spin ``s_i = 1 - 2*bit`` (so index 0 is all spins up).
The energy of a configuration is

    E(s) = -sum_i h_i s_i - sum_{i>j} J[i, j] s_i s_j

with ``J`` stored strictly lower triangular.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

DEFAULT_CAP = 24

# Relative tolerance for declaring two energies equal.
TIE_RTOL = 1e-12


class CapExceededError(ValueError):
    """Raised when an operation would allocate 2**n storage above the cap."""


def check_cap(n: int, cap: int = DEFAULT_CAP) -> None:
    if n > cap:
        raise CapExceededError(f"n={n} exceeds the qubit cap of {cap}")


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """An ``n``-spin Ising instance with fields ``h`` and lower-triangular couplings ``J``."""

    h: np.ndarray
    J: np.ndarray
    label: str = ""

    def __post_init__(self):
        h = np.array(self.h, dtype=float).reshape(-1)
        n = h.size
        if n < 1:
            raise ValueError("an Ising problem needs at least one spin")
        J = np.array(self.J, dtype=float)
        if J.size == 0 and n == 1:
            J = np.zeros((1, 1))
        if J.shape != (n, n):
            raise ValueError(f"J must have shape ({n}, {n}), got {J.shape}")
        if np.any(np.triu(J) != 0.0):
            raise ValueError("J must be strictly lower triangular (entries J[i, j] with j < i only)")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(J))):
            raise ValueError("h and J must be finite")
        h.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def dim(self) -> int:
        return 1 << self.n

    def coupling_matrix(self) -> np.ndarray:
        """Full symmetric coupling matrix ``J + J.T`` (zero diagonal)."""
        return self.J + self.J.T

    def has_fields(self) -> bool:
        return bool(np.any(self.h != 0.0))

    def scaled(self, c: float) -> IsingProblem:
        return IsingProblem(self.h * c, self.J * c, self.label)

    def __eq__(self, other):
        if not isinstance(other, IsingProblem):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.h, other.h)
            and np.array_equal(self.J, other.J)
        )

    def __hash__(self):
        return hash((self.label, self.h.tobytes(), self.J.tobytes()))


@dataclass(frozen=True)
class SpectrumSummary:
    e_min: float
    e_max: float
    ground_indices: tuple[int, ...]
    min_gap: float
    energies: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def spread(self) -> float:
        return self.e_max - self.e_min


def spins_of(idx: int, n: int) -> np.ndarray:
    return np.array([1 - 2 * ((idx >> i) & 1) for i in range(n)], dtype=float)


def energy_of_state(p: IsingProblem, idx: int) -> float:
    if not 0 <= idx < p.dim:
        raise IndexError(f"basis index {idx} out of range for n={p.n}")
    s = spins_of(idx, p.n)
    return float(-(p.h @ s) - s @ p.J @ s)


@njit(cache=True)
def _gray_code_energies(h, Jfull):
    n = h.shape[0]
    N = 1 << n
    out = np.empty(N)
    s = np.ones(n)
    # local[k] = h_k + sum_j Jfull[k, j] s_j, so flipping k changes E by 2 s_k local[k]
    local = np.empty(n)
    for k in range(n):
        local[k] = h[k] + Jfull[k].sum()
    e = -h.sum() - 0.5 * Jfull.sum()
    idx = 0
    out[0] = e
    for step in range(1, N):
        k = 0
        while not (step >> k) & 1:
            k += 1
        sk = s[k]
        e += 2.0 * sk * local[k]
        s[k] = -sk
        for j in range(n):
            local[j] -= 2.0 * Jfull[j, k] * sk
        idx ^= 1 << k
        if (step & 1023) == 0:
            # resync against rounding drift
            for j in range(n):
                acc = h[j]
                for q in range(n):
                    acc += Jfull[j, q] * s[q]
                local[j] = acc
            acc = 0.0
            for j in range(n):
                acc -= h[j] * s[j]
                for q in range(j):
                    acc -= Jfull[j, q] * s[j] * s[q]
            e = acc
        out[idx] = e
    return out


def all_energies(p: IsingProblem, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Energies of every basis state, indexed by basis index (Gray-code walk, O(N n))."""
    check_cap(p.n, cap)
    return _gray_code_energies(p.h, np.ascontiguousarray(p.coupling_matrix()))


def summarize_energies(energies: np.ndarray, keep: bool = True) -> SpectrumSummary:
    e_min = float(energies.min())
    e_max = float(energies.max())
    tol = TIE_RTOL * max(1.0, abs(e_min))
    ground = np.flatnonzero(energies <= e_min + tol)
    above = energies[energies > e_min + tol]
    gap = float(above.min() - e_min) if above.size else 0.0
    return SpectrumSummary(
        e_min=e_min,
        e_max=e_max,
        ground_indices=tuple(int(i) for i in ground),
        min_gap=gap,
        energies=energies if keep else None,
    )


def brute_force_spectrum(p: IsingProblem, cap: int = DEFAULT_CAP, keep: bool = True) -> SpectrumSummary:
    return summarize_energies(all_energies(p, cap), keep=keep)


def _instance_rng(seed: int, n: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, n, index])


def sk_instance(n: int, seed: int, index: int, scale_sqrt2: bool = False, prefix: str = "sk") -> IsingProblem:
    """One SK instance drawn from its own (seed, n, index) stream.

    Couplings follow the dataset recipe: the lower triangle of (A + A.T)/2 for a
    standard-normal A, so J entries have variance 1/2. Fields are standard normal.
    """
    if n < 2:
        raise ValueError("SK instances need n >= 2")
    rng = _instance_rng(seed, n, index)
    A = rng.standard_normal((n, n))
    h = rng.standard_normal(n)
    J = np.tril((A + A.T) / 2.0, -1)
    if scale_sqrt2:
        J = J * math.sqrt(2.0)
    return IsingProblem(h, J, label=f"{prefix}-n{n}-s{seed}-{index}")


def sk_generate(n: int, seed: int, count: int, scale_sqrt2: bool = False) -> list[IsingProblem]:
    if count < 0:
        raise ValueError("count must be non-negative")
    return [sk_instance(n, seed, i, scale_sqrt2) for i in range(count)]


def symmetry_expand(p: IsingProblem) -> IsingProblem:
    """Absorb the fields into couplings to an extra spin ``n`` (result has h = 0)."""
    n = p.n
    J = np.zeros((n + 1, n + 1))
    J[:n, :n] = p.J
    J[n, :n] = p.h
    return IsingProblem(np.zeros(n + 1), J, label=p.label)


def symmetry_reduce(p: IsingProblem) -> IsingProblem:
    """Fix the last spin up in a field-free problem, giving an (n-1)-spin problem."""
    if p.has_fields():
        raise ValueError("symmetry_reduce requires h == 0")
    if p.n < 2:
        raise ValueError("cannot reduce a single-spin problem")
    n = p.n
    return IsingProblem(p.J[n - 1, : n - 1].copy(), p.J[: n - 1, : n - 1].copy(), label=p.label)


# ---- file formats -------------------------------------------------------

def load_raw_binary(path, scale_sqrt2: bool = False, label: str | None = None) -> IsingProblem:
    """Read ``h`` (n float64) then ``A`` (n*n float64, row-major), little-endian."""
    path = Path(path)
    data = np.fromfile(path, dtype="<f8")
    count = data.size
    if path.stat().st_size != 8 * count:
        raise ValueError(f"{path}: size is not a multiple of 8 bytes")
    n = int(round((-1 + math.sqrt(1 + 4 * count)) / 2))
    if n < 1 or n * n + n != count:
        raise ValueError(f"{path}: {count} values is not of the form n^2 + n")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite values")
    h = data[:n]
    A = data[n:].reshape(n, n)
    J = np.tril((A + A.T) / 2.0, -1)
    if scale_sqrt2:
        J = J * math.sqrt(2.0)
    return IsingProblem(h, J, label=path.stem if label is None else label)


def save_raw_binary(p: IsingProblem, path) -> None:
    """Write in the raw dataset layout; ``A`` is stored as ``J + J.T`` so reading it back is exact."""
    buf = np.concatenate([p.h, p.coupling_matrix().reshape(-1)]).astype("<f8")
    buf.tofile(Path(path))


def to_dict(p: IsingProblem) -> dict:
    triples = [[i, j, float(p.J[i, j])] for i in range(p.n) for j in range(i) if p.J[i, j] != 0.0]
    return {"n": p.n, "label": p.label, "h": [float(x) for x in p.h], "J": triples}


def from_dict(d: dict) -> IsingProblem:
    n = int(d["n"])
    h = np.asarray(d.get("h", [0.0] * n), dtype=float)
    if h.size != n:
        raise ValueError(f"h has {h.size} entries, expected {n}")
    J = np.zeros((n, n))
    for i, j, v in d.get("J", []):
        i, j = int(i), int(j)
        if not 0 <= j < i < n:
            raise ValueError(f"coupling ({i}, {j}) is not strictly lower triangular")
        J[i, j] = float(v)
    return IsingProblem(h, J, label=str(d.get("label", "")))


def save_json(p: IsingProblem, path) -> None:
    Path(path).write_text(json.dumps(to_dict(p), indent=1) + "\n")


def load_json(path) -> IsingProblem:
    return from_dict(json.loads(Path(path).read_text()))


def load_problem(path, scale_sqrt2: bool = False) -> IsingProblem:
    path = Path(path)
    if path.suffix == ".json":
        p = load_json(path)
        return IsingProblem(p.h, p.J * math.sqrt(2.0), p.label) if scale_sqrt2 else p
    return load_raw_binary(path, scale_sqrt2=scale_sqrt2)


def load_problems(paths, scale_sqrt2: bool = False) -> list[IsingProblem]:
    """Load instances from files and/or directories (``*.json`` and ``*.bin``)."""
    out = []
    for path in paths:
        path = Path(path)
        if path.is_dir():
            files = sorted(list(path.glob("*.json")) + list(path.glob("*.bin")))
            out.extend(load_problem(f, scale_sqrt2) for f in files)
        else:
            out.append(load_problem(path, scale_sqrt2))
    return out

"""Per-stage hopping rates and stage times, plus the mapping to hardware anneal time."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .ising import IsingProblem, brute_force_spectrum
from .stats import delta_sq, estimate_spread


@dataclass(frozen=True)
class WalkSchedule:
    n: int
    stages: tuple[tuple[float, float], ...]
    spread_used: float
    delta_sq_used: float
    spread_method: str = ""

    def __post_init__(self):
        stages = tuple((float(g), float(t)) for g, t in self.stages)
        if not stages:
            raise ValueError("a schedule needs at least one stage")
        for g, t in stages:
            if not (math.isfinite(t) and t >= 0.0):
                raise ValueError(f"stage time {t} is not finite and non-negative")
        object.__setattr__(self, "stages", stages)

    @property
    def m(self) -> int:
        return len(self.stages)

    @property
    def gammas(self) -> list[float]:
        return [g for g, _ in self.stages]

    @property
    def times(self) -> list[float]:
        return [t for _, t in self.stages]

    def with_times(self, times) -> WalkSchedule:
        if len(times) != self.m:
            raise ValueError(f"expected {self.m} stage times, got {len(times)}")
        return WalkSchedule(self.n, tuple(zip(self.gammas, times)), self.spread_used,
                            self.delta_sq_used, self.spread_method)

    def with_gammas(self, gammas) -> WalkSchedule:
        if len(gammas) != self.m:
            raise ValueError(f"expected {self.m} hopping rates, got {len(gammas)}")
        return WalkSchedule(self.n, tuple(zip(gammas, self.times)), self.spread_used,
                            self.delta_sq_used, self.spread_method)

    def rows(self) -> list[tuple[int, float, float, float]]:
        """``(k, gamma_k, t_k, dE_k)`` for export; dE is blank-valued (nan) if gammas are not positive."""
        try:
            des = [delta_e(self.gammas, self.n, i) for i in range(1, self.m + 1)]
        except ValueError:
            des = [math.nan] * self.m
        return [(k + 1, g, t, d) for k, ((g, t), d) in enumerate(zip(self.stages, des))]


def gamma_schedule(spread: float, n: int, m: int) -> list[float]:
    """``gamma_k = spread/(2n) * cot(k pi / (2(m+1)))`` for ``k = 1..m``."""
    if spread <= 0:
        raise ValueError("spread must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    scale = spread / (2.0 * n)
    return [scale / math.tan(k * math.pi / (2.0 * (m + 1))) for k in range(1, m + 1)]


def _rotation(g: float) -> float:
    return g / math.sqrt(1.0 + g * g)


def delta_e(gammas, n: int, i: int) -> float:
    """Expected change of the graph energy during stage ``i`` (1-based).

    Uses ``gamma_0 -> inf`` (term exactly 1) and ``gamma_{m+1} = 0``.
    """
    m = len(gammas)
    if not 1 <= i <= m:
        raise ValueError(f"stage index {i} out of range 1..{m}")
    before = 1.0 if i == 1 else _rotation(gammas[i - 2])
    after = 0.0 if i == m else _rotation(gammas[i])
    return 2.0 * n * (before - after)


def first_branch_time(de: float, dsq: float) -> float:
    return math.sqrt(2.0 * de / dsq)


def second_branch_time(de: float, gamma: float, n: int, dsq: float) -> float:
    return math.sqrt(de / (gamma * math.sqrt(2.0 * n / math.pi * dsq)))


def stage_times(gammas, n: int, dsq: float) -> list[float]:
    if dsq <= 0:
        raise ValueError("delta_sq must be positive")
    if any(g <= 0 for g in gammas):
        raise ValueError("stage times need positive hopping rates")
    out = []
    for i, g in enumerate(gammas, start=1):
        de = delta_e(gammas, n, i)
        out.append(max(first_branch_time(de, dsq), second_branch_time(de, g, n, dsq)))
    return out


def build_schedule(p: IsingProblem, m: int, spread_method: str = "gumbel") -> WalkSchedule:
    """Heuristic schedule for ``p``. ``spread_method="exact"`` solves ``p`` by enumeration."""
    if spread_method == "exact":
        spread = brute_force_spectrum(p, keep=False).spread
    else:
        spread = estimate_spread(p, spread_method).value
    dsq = delta_sq(p)
    gammas = gamma_schedule(spread, p.n, m)
    times = stage_times(gammas, p.n, dsq)
    return WalkSchedule(p.n, tuple(zip(gammas, times)), spread, dsq, spread_method)


# ---- hardware time ------------------------------------------------------

# synthetic annealer-like table (A decays to zero, B grows); not measured data
EXAMPLE_TABLE = Path(__file__).with_name("data") / "synthetic_anneal_schedule.csv"

@dataclass(frozen=True)
class HardwareSchedule:
    """Anneal schedule samples: fraction ``s``, driver scale ``A`` and problem scale ``B`` in GHz."""

    s: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        s, A, B = (np.asarray(x, dtype=float) for x in (self.s, self.A, self.B))
        if not (s.shape == A.shape == B.shape) or s.ndim != 1 or s.size < 2:
            raise ValueError("s, A and B must be equal-length 1-d arrays with >= 2 samples")
        if np.any(np.diff(s) <= 0):
            raise ValueError("s must be strictly increasing")
        if np.any(np.diff(A) > 0) or np.any(np.diff(B) < 0):
            warnings.warn("hardware schedule: A should decrease and B increase along s", stacklevel=2)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_text(cls, path) -> HardwareSchedule:
        """Read a 3-column ``s, A, B`` table (comma or whitespace delimited, optional header)."""
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            try:
                vals = [float(x) for x in parts[:3]]
            except ValueError:
                if rows:
                    raise
                continue  # header
            if len(vals) != 3:
                raise ValueError(f"{path}: expected 3 columns, got {line!r}")
            rows.append(vals)
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])

    def locate(self, ratio: float) -> float:
        """Anneal fraction ``s`` where ``A(s)/B(s) == ratio``."""
        with np.errstate(divide="ignore"):
            r = np.where(self.B > 0, self.A / np.where(self.B > 0, self.B, 1.0), np.inf)
        finite = np.isfinite(r)
        s, r = self.s[finite], r[finite]
        if s.size < 2:
            raise ValueError("hardware schedule has fewer than two finite A/B samples")
        lo, hi = r.min(), r.max()
        if not lo <= ratio <= hi:
            raise ValueError(f"ratio {ratio:.6g} outside the table range [{lo:.6g}, {hi:.6g}]")
        j = int(np.flatnonzero((r[:-1] - ratio) * (r[1:] - ratio) <= 0)[0])
        direction = np.sign(r[j + 1] - r[j])
        if direction == 0:
            raise ValueError("A/B is flat at the requested ratio; s* is not unique")
        # widen to the monotone run around the bracket
        lo_i, hi_i = j, j + 1
        while lo_i > 0 and direction * (r[lo_i] - r[lo_i - 1]) > 0:
            lo_i -= 1
        while hi_i < r.size - 1 and direction * (r[hi_i + 1] - r[hi_i]) > 0:
            hi_i += 1
        s, r = s[lo_i:hi_i + 1], r[lo_i:hi_i + 1]
        order = np.argsort(r)
        return float(PchipInterpolator(r[order], s[order])(ratio))

    def driver_scale(self, s: float) -> float:
        return float(PchipInterpolator(self.s, self.A)(s))


def default_alpha(n: int) -> float:
    return 2.0 * math.sqrt(math.log(n))


def hardware_stage_times(schedule: WalkSchedule, hw: HardwareSchedule, alpha: float | None = None):
    """Per-stage ``(s*, A(s*), t_real[ns])``; the problem is divided by ``alpha`` on hardware."""
    if alpha is None:
        alpha = default_alpha(schedule.n)
    out = []
    for g, t in schedule.stages:
        s_star = hw.locate(g / alpha)
        a = hw.driver_scale(s_star)
        if a <= 0:
            raise ValueError(f"driver scale A(s*={s_star:.4g}) is not positive")
        out.append((s_star, a, alpha * t / (2.0 * math.pi * a)))
    return out


def hardware_time(schedule: WalkSchedule, hw: HardwareSchedule, alpha: float | None = None) -> float:
    """Total walk time in ns on an annealer with schedule ``hw`` (A, B in GHz)."""
    return sum(x[2] for x in hardware_stage_times(schedule, hw, alpha))

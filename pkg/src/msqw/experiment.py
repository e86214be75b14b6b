"""Batch sweeps over (n, m), bootstrap medians, scaling fits and hard-instance curation."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
import warnings
import zlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.stats import linregress

from .evolve import PreparedProblem, mc_short_time_average, run_msqw, success_probability
from .exact import PINF_CAP, p_inf_nested
from .ising import DEFAULT_CAP, IsingProblem, brute_force_spectrum, load_problems, sk_instance
from .schedule import build_schedule

log = logging.getLogger(__name__)

MODES = ("short-time-mc", "infinite-time")
CSV_VERSION = "1"
CSV_COLUMNS = ("n", "m", "mode", "label", "success_prob", "stderr", "samples",
               "spread_method", "spread", "gamma1", "t1")


class CurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    n: int
    m: int
    mode: str
    label: str
    success_prob: float
    stderr: float
    samples: int
    spread_method: str
    spread: float
    gamma1: float
    t1: float
    wall_time: float = field(default=0.0, compare=False)

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.label, self.m, self.mode)

    def sort_key(self):
        return (self.n, self.label, self.m, self.mode)


@dataclass(frozen=True)
class RegressionFit:
    m: int
    a: float
    b: float
    a_stderr: float
    b_stderr: float
    r2: float
    points: int


def _parse_int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).replace(" ", "").split(",") if x]


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    if text is None or (isinstance(text, str) and text.strip().lower() in ("", "none")):
        return None
    return float(text)


@dataclass(frozen=True)
class SweepConfig:
    n_min: int = 5
    n_max: int = 10
    stages: tuple[int, ...] = (1,)
    instances: int = 100
    seed: int = 1
    spread_method: str = "gumbel"
    samples: int = 100
    mode: str = "short-time-mc"
    dataset: str = "typical"
    gap_threshold: float = 0.05
    data: str | None = None
    gamma_override: float | None = None
    scale_sqrt2: bool = False
    workers: int = 1
    cap: int = DEFAULT_CAP
    tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(_parse_int_list(self.stages)))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.dataset not in ("typical", "hard"):
            raise ValueError("dataset must be 'typical' or 'hard'")
        if self.n_min > self.n_max:
            raise ValueError("n_min must not exceed n_max")
        if not self.stages or min(self.stages) < 1:
            raise ValueError("stages must be a non-empty list of positive integers")
        if self.mode == "infinite-time" and self.n_max > min(PINF_CAP, self.cap):
            raise ValueError(f"infinite-time mode requires n <= {min(PINF_CAP, self.cap)}")
        if self.n_max > self.cap:
            raise ValueError(f"n_max={self.n_max} exceeds the cap of {self.cap}")

    _converters = {
        "n_min": int, "n_max": int, "instances": int, "seed": int, "samples": int,
        "workers": int, "cap": int, "gap_threshold": float, "tol": float,
        "stages": _parse_int_list, "scale_sqrt2": _parse_bool,
        "gamma_override": _optional_float,
    }

    @classmethod
    def from_mapping(cls, values: dict) -> SweepConfig:
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in values.items():
            name = key.replace("-", "_")
            if name not in names:
                raise ValueError(f"unknown sweep setting {key!r}")
            conv = cls._converters.get(name)
            kwargs[name] = conv(value) if conv is not None and value is not None else value
        return cls(**kwargs)


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` text; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---- instances ----------------------------------------------------------

@dataclass(frozen=True)
class Curation:
    problems: list[IsingProblem]
    draws: int
    acceptance_rate: float


def is_hard(p: IsingProblem, gap_threshold: float, cap: int = DEFAULT_CAP) -> bool:
    """Gap predicate used for curation: ``E_1 - E_0 <= gap_threshold``."""
    return brute_force_spectrum(p, cap, keep=False).min_gap <= gap_threshold


def curate(n: int, count: int, gap_threshold: float, seed: int, cap: int = DEFAULT_CAP,
           min_rate: float = 1e-5, patience: int = 100_000) -> Curation:
    """Rejection-sample SK instances until ``count`` have minimum gap <= ``gap_threshold``."""
    accepted = []
    draws = 0
    while len(accepted) < count:
        p = sk_instance(n, seed, draws, prefix="hard")
        draws += 1
        if is_hard(p, gap_threshold, cap):
            accepted.append(p)
        if draws >= patience and len(accepted) / draws < min_rate:
            raise CurationError(
                f"acceptance rate {len(accepted)}/{draws} below {min_rate:g} "
                f"for n={n}, gap <= {gap_threshold:g}")
    rate = len(accepted) / draws if draws else 1.0
    log.info("curated %d instances at n=%d from %d draws (rate %.4g)", count, n, draws, rate)
    return Curation(accepted, draws, rate)


def curate_hard(n: int, count: int, gap_threshold: float, seed: int, cap: int = DEFAULT_CAP) -> list[IsingProblem]:
    return curate(n, count, gap_threshold, seed, cap).problems


def sweep_instances(config: SweepConfig) -> list[IsingProblem]:
    if config.data:
        problems = load_problems([config.data], scale_sqrt2=config.scale_sqrt2)
        by_n = defaultdict(list)
        for p in problems:
            by_n[p.n].append(p)
        return [p for n in range(config.n_min, config.n_max + 1) for p in by_n[n][: config.instances]]
    out = []
    for n in range(config.n_min, config.n_max + 1):
        if config.dataset == "hard":
            batch = curate_hard(n, config.instances, config.gap_threshold, config.seed, config.cap)
        else:
            batch = [sk_instance(n, config.seed, i) for i in range(config.instances)]
        if config.scale_sqrt2:
            batch = [IsingProblem(p.h, p.J * math.sqrt(2.0), p.label) for p in batch]
        out.extend(batch)
    return out


# ---- sweep --------------------------------------------------------------

def _label_seed(label: str) -> int:
    return zlib.crc32(label.encode())


def evaluate_instance(p: IsingProblem, config: SweepConfig, stages=None) -> list[SweepRecord]:
    prep = PreparedProblem.from_problem(p, config.cap)
    records = []
    for m in stages if stages is not None else config.stages:
        start = time.perf_counter()
        schedule = build_schedule(p, m, config.spread_method)
        if config.gamma_override is not None:
            schedule = schedule.with_gammas([config.gamma_override] * m)
        if config.mode == "infinite-time":
            prob, err, samples = p_inf_nested(prep, schedule.gammas, cap=min(PINF_CAP, config.cap)), 0.0, 1
        elif config.samples == 0:
            prob, err, samples = success_probability(prep, run_msqw(prep, schedule, tol=config.tol)), 0.0, 1
        else:
            res = mc_short_time_average(prep, schedule, config.samples,
                                        seed=[config.seed, _label_seed(p.label), m], tol=config.tol)
            prob, err, samples = res.success_prob, res.stderr, res.samples
        g1, t1 = schedule.stages[0]
        records.append(SweepRecord(p.n, m, config.mode, p.label, prob, err, samples,
                                   config.spread_method, schedule.spread_used, g1, t1,
                                   time.perf_counter() - start))
    return records


def _evaluate_task(args):
    p, config, stages = args
    try:
        return evaluate_instance(p, config, stages), None
    except Exception as exc:  # reported per instance, the sweep carries on
        return [], f"{p.label}: {type(exc).__name__}: {exc}"


@dataclass
class SweepOutcome:
    records: list[SweepRecord]
    errors: list[str]
    wall_time: float
    skipped: int = 0


def run_sweep(config: SweepConfig, existing: list[SweepRecord] = ()) -> SweepOutcome:
    """Evaluate every (instance, m) not already present in ``existing``."""
    start = time.perf_counter()
    done = {r.key for r in existing}
    tasks = []
    skipped = 0
    for p in sweep_instances(config):
        todo = [m for m in config.stages if (p.label, m, config.mode) not in done]
        skipped += len(config.stages) - len(todo)
        if todo:
            tasks.append((p, config, tuple(todo)))
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_evaluate_task, tasks))
    else:
        results = [_evaluate_task(t) for t in tasks]
    records = list(existing)
    errors = []
    for recs, err in results:
        records.extend(recs)
        if err:
            log.error(err)
            errors.append(err)
    records.sort(key=SweepRecord.sort_key)
    return SweepOutcome(records, errors, time.perf_counter() - start, skipped)


def sweep(config: SweepConfig) -> list[SweepRecord]:
    outcome = run_sweep(config)
    if outcome.errors:
        raise RuntimeError(f"{len(outcome.errors)} instance(s) failed: {outcome.errors[0]}")
    return outcome.records


# ---- CSV ----------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(f"# msqw sweep v{CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in sorted(records, key=SweepRecord.sort_key):
        writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_records(records, path) -> None:
    Path(path).write_text(records_to_csv(records))


def read_records(path) -> list[SweepRecord]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(SweepRecord(
            n=int(row["n"]), m=int(row["m"]), mode=row["mode"], label=row["label"],
            success_prob=float(row["success_prob"]), stderr=float(row["stderr"]),
            samples=int(row["samples"]), spread_method=row["spread_method"],
            spread=float(row["spread"]), gamma1=float(row["gamma1"]), t1=float(row["t1"])))
    return out


# ---- statistics ---------------------------------------------------------

def median_bootstrap(values, resamples: int = 1000, seed: int = 0) -> tuple[float, float]:
    """Sample median and the standard deviation of bootstrap-resampled medians."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("median_bootstrap needs at least one value")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(resamples, x.size))
    medians = np.median(x[idx], axis=1)
    # identical resamples would otherwise leave rounding noise in the std
    spread = float(medians.std(ddof=1)) if resamples > 1 and np.ptp(medians) > 0 else 0.0
    return float(np.median(x)), spread


@dataclass(frozen=True)
class MedianPoint:
    m: int
    n: int
    median: float
    stderr: float
    count: int


def median_table(records, resamples: int = 1000, seed: int = 0) -> list[MedianPoint]:
    groups = defaultdict(list)
    for r in records:
        groups[(r.m, r.n)].append(r.success_prob)
    out = []
    for (m, n), vals in sorted(groups.items()):
        med, err = median_bootstrap(vals, resamples, seed)
        out.append(MedianPoint(m, n, med, err, len(vals)))
    return out


def fit_scaling(records, min_points: int = 3) -> list[RegressionFit]:
    """Least-squares fit of ``ln(median P) = a n + b`` for each stage count."""
    by_m = defaultdict(lambda: defaultdict(list))
    for r in records:
        by_m[r.m][r.n].append(r.success_prob)
    fits = []
    for m in sorted(by_m):
        ns, logs = [], []
        for n in sorted(by_m[m]):
            med = float(np.median(by_m[m][n]))
            if med <= 0:
                warnings.warn(f"m={m}, n={n}: median success probability is {med}; point dropped",
                              stacklevel=2)
                continue
            ns.append(n)
            logs.append(math.log(med))
        if len(ns) < min_points:
            raise ValueError(f"m={m}: need at least {min_points} distinct n with positive medians, got {len(ns)}")
        res = linregress(ns, logs)
        fits.append(RegressionFit(m, float(res.slope), float(res.intercept), float(res.stderr),
                                  float(res.intercept_stderr), float(res.rvalue**2), len(ns)))
    return fits


def fits_to_csv(fits) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = [f.name for f in fields(RegressionFit)]
    writer.writerow(cols)
    for f in fits:
        writer.writerow([_fmt(v) for v in asdict(f).values()])
    return buf.getvalue()

"""Multi-stage quantum walks for Ising ground-state search."""
from .evolve import PreparedProblem, mc_short_time_average, propagate, run_msqw, success_probability
from .exact import p_inf_nested
from .ising import IsingProblem, brute_force_spectrum, sk_generate
from .schedule import HardwareSchedule, WalkSchedule, build_schedule, hardware_time
from .stats import delta_sq, estimate_spread, moments

__version__ = "0.1.0"

__all__ = [
    "HardwareSchedule", "IsingProblem", "PreparedProblem", "WalkSchedule", "brute_force_spectrum",
    "build_schedule", "delta_sq", "estimate_spread", "hardware_time", "mc_short_time_average",
    "moments", "p_inf_nested", "propagate", "run_msqw", "sk_generate", "success_probability",
]

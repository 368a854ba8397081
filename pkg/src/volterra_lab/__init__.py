"""Linear convolution Volterra integrodifferential equations with measure kernels.

``x'(t) = (nu * x)(t) + f(t)``, ``x(0) = xi``, where ``nu`` is a finite signed
measure made of atoms and a density.  The package computes the differential
resolvent, solves the forced equation three independent ways and checks,
on finite horizons, that ``x`` is in ``L^p`` exactly when the interval
averages ``int_t^{t+theta} f`` are, uniformly in ``theta``.
"""
from .errors import ConfigurationError, DomainError, EvaluationError, VolterraError
from .forcing import (Constant, Decomposition, ForcingFunction, LpMember, OscGrowth, Sine, StepTrain,
                      Tabulated, decompose, interval_average)
from .harness import CaseResult, CaseSpec, run_case, run_delta0_special, run_suite
from .measure import Density, Grid, Measure, Trajectory, convolve_measure, total_variation
from .norms import Thresholds, classify_membership, condition_A_report, truncated_lp
from .resolvent import ResolventResult, classify_l1, solve_resolvent
from .solver import SolutionBundle, SolveConfig, integrated_residual, solve_all, solve_direct, solve_voc

__version__ = "0.1.0"

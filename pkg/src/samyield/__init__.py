"""Statistical yield analysis for parametric device designs."""
from .devices import (
    CantileverModel,
    PressureSensorModel,
    calibrate_frequency_constant,
    mass_change,
    spring_constant,
)
from .distributions import Exponential, Fixed, Gaussian, Uniform, std_normal_cdf
from .montecarlo import MonteCarloResult, confidence_interval, run_monte_carlo, wilson_interval
from .netlist import NetlistParseError, load, parse, serialize
from .problem import DesignProblem, Relation, Specification, StatisticalParameter
from .sensitivity import SensitivityReport, jacobian, linearize, most_sensitive
from .sweep import Axis, YieldMap, run_sweep
from .worstcase import (
    WorstCaseResult,
    analyze,
    wcd_brute_oracle,
    wcd_linear,
    wcd_relinearized,
    yield_from_beta,
)

__version__ = "0.1.0"

"""Security-latency analysis of short-packet transmissions.

Finite-blocklength error and detection probabilities, effective secure
probability (ESP), renewal-based average secure latency, blocklength/SNR
optimisation, and a Monte Carlo check of the latency model.
"""

from seclat.errors import DomainError, InfeasibleError, InfiniteLatencyError, NoThresholdError
from seclat.fbl import (
    LinkParams,
    SecurityProbabilities,
    capacity,
    db_to_linear,
    decoding_error_prob,
    detection_prob,
    dispersion,
    effective_secure_rate,
    esp,
    esp_equal_snr,
    linear_to_db,
    q_function,
)
from seclat.latency import (
    RenewalStats,
    arrival_rate,
    average_sl,
    baseline_latency,
    mean_area,
    mean_attempt_time,
    mean_wait,
    renewal_stats,
    sl_derivative_wrt_esp,
)
from seclat.optimizer import (
    OptimizationResult,
    SolverConfig,
    blocklength_threshold,
    gamma_threshold,
    joint_optimize,
    optimal_blocklength,
    optimal_snr,
)
from seclat.simulator import SimulationConfig, SimulationReport, run as simulate

__version__ = "0.1.0"

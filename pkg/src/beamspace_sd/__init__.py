"""Support-detection beamspace channel estimation for lens-array mmWave
massive MIMO, with an OMP baseline, downlink beam selection plus
zero-forcing, and a seeded Monte Carlo harness.

The estimator inner loops have a compiled backend with a pure numpy
fallback; ``backend_name()`` tells which one is active and the
``BEAMSPACE_SD_BACKEND`` environment variable (auto/cython/python)
overrides the choice at import time.
"""

from ._backend import backend_name
from .channel import (BeamspaceChannel, BeamspaceTransform, PathComponent,
                      SpatialChannel, cross_correlation_bound,
                      dirichlet_kernel, measured_cross_correlation,
                      power_ratio_lower_bound, sample_channel,
                      steering_vector, to_beamspace,
                      worst_case_component_ratio)
from .downlink import (BeamSelection, full_digital_zf_sum_rate, select_beams,
                       sum_rate, zf_precoder)
from .estimation import (EstimationResult, detect_peak, nmse, omp_estimate,
                         sd_estimate, support_from_peak)
from .harness import (BoundTable, ConfigError, ExperimentConfig, SweepResult,
                      SweepRow, emit, load_config, run_bound_table,
                      run_nmse_sweep, run_sumrate_sweep, validate_invariants)
from .numerics import DimensionError, SingularSystemError
from .sounding import (Combiner, Measurement, SoundingConfig, make_combiner,
                       mutual_coherence, simulate_measurement,
                       snr_to_noise_power)

__version__ = "0.1.0"

__all__ = [
    "BeamSelection", "BeamspaceChannel", "BeamspaceTransform", "BoundTable",
    "Combiner", "ConfigError", "DimensionError", "EstimationResult",
    "ExperimentConfig", "Measurement", "PathComponent",
    "SingularSystemError", "SoundingConfig", "SpatialChannel", "SweepResult",
    "SweepRow", "backend_name", "cross_correlation_bound", "detect_peak",
    "dirichlet_kernel", "emit", "full_digital_zf_sum_rate", "load_config",
    "make_combiner", "measured_cross_correlation", "mutual_coherence",
    "nmse", "omp_estimate", "power_ratio_lower_bound", "run_bound_table",
    "run_nmse_sweep", "run_sumrate_sweep", "sample_channel", "sd_estimate",
    "select_beams", "simulate_measurement", "snr_to_noise_power",
    "steering_vector", "sum_rate", "support_from_peak", "to_beamspace",
    "validate_invariants", "worst_case_component_ratio", "zf_precoder",
]

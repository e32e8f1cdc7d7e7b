"""Deterministic k-space undersampling for dynamic MRI.

Four analytic selectors choose which Fourier coefficients to measure from a
prior (mean) image; IHT and LCAMP serve as compressed-sensing baselines; a
Shepp-Logan phantom with bolus dynamics and an evaluation harness tie them
together.
"""

from .errors import (
    ComplexityError,
    DivergenceError,
    EmptySupportError,
    SizingError,
    SlotError,
    UndefinedReferenceError,
)
from .evaluation import (
    BenchmarkConfig,
    ErrorReport,
    brute_force_optimal_mask,
    erec_direct,
    reconstruct,
    relative_percent_error,
    run_sequence_benchmark,
)
from .masks import (
    FreqMask,
    MeanImageState,
    SparseSupport,
    adaptive_update,
    algo1_max_modulus,
    algo2_per_resolution,
    algo3_interference,
    algo4_influence,
    apply_mask,
    random_lowfreq_mask,
    support_from_image,
)
from .phantom import (
    DynamicSequence,
    GammaParams,
    Region,
    SequenceSpec,
    add_white_noise,
    build_sequence,
    gamma_variate,
    shepp_logan,
)
from .recovery import RecoveryConfig, SensingOperator, hard_threshold, iht, lcamp
from .transforms import (
    Slot,
    dft2,
    dwt2,
    freq_of_wavelet_atom,
    idft2,
    idwt2,
    wavelet_of_freq_atom,
)

__version__ = "0.1.0"

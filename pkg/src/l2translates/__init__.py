"""Integer translates, periodization functions and partial Fourier sums on sets."""
from .errors import (
    DegenerateSpecError,
    DegenerateSpectrumError,
    EmptyAverageError,
    EmptyRegionError,
    IndistinguishableZeroError,
    MalformedIntervalError,
    NonintegrableEnvelopeError,
    NumericalGuardError,
    ParseError,
    PreconditionError,
    ResolutionError,
    TranslatesError,
    UnsupportedOracleError,
    ValidationError,
    WindowExceededError,
)
from .fourier import (
    BoundednessProfile,
    CoefficientWindow,
    SupEstimate,
    auto_level,
    bernstein_modulus,
    boundedness_profile,
    boundedness_profiles,
    fejer_coefficients,
    fejer_mean,
    partial_sum,
    sup_on_set,
    u_norm_estimate,
    z_order,
)
from .periodization import (
    ClassificationReport,
    DecayEnvelope,
    PeriodizationGrid,
    SpectrumDescriptor,
    SpectrumPiece,
    classify,
    haar_spectrum,
    indicator_spectrum,
    parse_spectrum,
    periodization_grid,
    periodize,
    sinc_spectrum,
    sine_bump_spectrum,
    spectrum_from_set,
)
from .sets import (
    CantorSpec,
    IntervalSet,
    complement,
    fat_cantor,
    indicator_fourier_coefficient,
    indicator_fourier_coefficients,
    measure,
    normalize,
    parse_set,
)
from .witness import (
    DependenceWitness,
    NiceFunctionReport,
    OracleResult,
    cesaro_independence_probe,
    combination_norm,
    dependence_witness,
    nice_function_probe,
    set_integral_of_square,
    time_domain_norm_oracle,
)

__version__ = "0.1.0"

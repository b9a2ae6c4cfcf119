"""Discrete Gabor analysis with concentration-optimised windows and adapted lattices."""

from .dsp import (
    ChirpedGaussianParams,
    chirp,
    dft,
    gaussian_window,
    gaussian_window_derivatives,
    tf_center,
    tf_mean,
    tf_shift,
)
from .errors import (
    BandLimitError,
    DimensionError,
    DivergenceError,
    GaborError,
    InvalidLatticeError,
    InvalidParameterError,
    NotAFrameError,
    NumericalError,
    StallError,
    UndefinedMeanError,
    ValidationError,
)
from .gabor import (
    BoundaryReport,
    FrameBounds,
    GaborCoefficients,
    Lattice,
    boundary_energy_check,
    dgt,
    dual_window,
    frame_bounds,
    frame_operator,
    idgt,
    lattice_new,
    lattice_points,
    mask_operator,
)
from .lattice_adapt import (
    GeneratorMatrix,
    adapted_lattice,
    adapted_lattice_real,
    fit_chirped_gaussian,
    rationalize_lattice,
    shear_rate,
)
from .optimizers import (
    OptimConfig,
    OptimTrace,
    entropy_concentration,
    grad_lp_window,
    grad_parametric,
    lp_concentration,
    optimize_nonparametric,
    optimize_parametric,
    optimize_regularized,
)
from .pipeline import (
    AlternateConfig,
    AlternateResult,
    TFRegion,
    alternate_optimize,
    extract_pattern,
    max_track,
    reduce,
)
from .render import RenderSpec, render_spectrogram
from .signals import SignalSpec, gen_signal

__version__ = "0.1.0"

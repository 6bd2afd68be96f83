"""Slow-light probe storage and retrieval in a tripod atomic medium."""

from .analysis import (
    LossQuery,
    exponential_integral_ei,
    loss_curve,
    loss_ratio_analytic,
    loss_ratio_from_fields,
    loss_ratio_numeric,
    winding_number,
)
from .beams import ControlBeamSpec, ControlPair, make_pair, total_rabi, xi_ratios
from .config import parse_config, print_config
from .errors import (
    AmplitudeTooSmall,
    ConfigError,
    GridTooCoarse,
    QuadratureNonConvergent,
    StepTooLarge,
    TripodError,
    WidthMismatch,
    ZeroControlField,
)
from .grid import (
    ComplexField2D,
    TransverseGrid,
    dump_field,
    gaussian_field,
    load_field,
    make_grid,
    set_fft_workers,
    transverse_spectrum,
    inverse_spectrum,
)
from .medium import MediumParams, AtomicFields, from_bright_dark, to_bright_dark
from .propagation import PropagationConfig, propagate_through_medium, slowlight_step, vacuum_step
from .scenarios import run_scenario
from .storage import regeneration_transient, retrieve, store

__version__ = "0.1.0"

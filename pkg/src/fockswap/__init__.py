"""Truncated-Fock-space simulation of the SWAP test on trapped-ion motional modes."""

from .errors import (
    ConfigError,
    ConvergenceError,
    FitError,
    FockSwapError,
    LayoutError,
    NoiseRegimeError,
    PreconditionError,
    SingularJacobianError,
    TruncationError,
)
from .hilbert import (
    Ensemble,
    ModeLayout,
    PureState,
    ReducedDensity,
    check_tail,
    make_basis_state,
    overlap_exact,
    partial_trace,
    qubit_ground_probability,
    vacuum,
)
from .gates import (
    GateOp,
    PulseEnvelope,
    apply,
    beam_splitter,
    controlled_beam_splitter,
    evolve_pulsed_cbs,
    rotation,
    sideband,
    spin_displacement,
)
from .noise import ContrastModel, NoiseConfig, apply_contrast, apply_dephasing, apply_heating
from .protocols import (
    PrepRecipe,
    SwapTestResult,
    controlled_swap_equivalence,
    optical_pump,
    prepare,
    prepare_pair,
    purity_experiment,
    swap_test,
)
from .fitting import FitModel, FitResult, bootstrap_errors, fit
from .runner import ExperimentConfig, SweepRow, load_config, run_calibration, run_config, run_sweep, validate_config

__version__ = "0.1.0"

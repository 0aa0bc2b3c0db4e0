"""Enhanced total-variation image reconstruction from subsampled Fourier
measurements, with TV and TVa-TVi baselines, sampling strategies, and
recovery-guarantee verification utilities."""

from . import data, theory
from .imaging import (
    enhanced_tv,
    gradient,
    gradient_adjoint,
    project_ball,
    shrink,
    sparse_truncate,
    tv_aniso,
    tv_iso,
)
from .metrics import relative_error, ssim
from .solvers import (
    ReconstructionReport,
    SolverAbort,
    SolverConfig,
    denoise_enhanced_tv,
    solve_enhanced_tv,
    solve_tv_bregman,
    solve_tva_minus_tvi,
)
from .transforms import (
    FrequencyMask,
    MeasurementOperator,
    add_noise,
    dft2,
    dft2_inv,
    full_mask,
    haar2,
    haar2_inv,
    load_mask,
    radial_mask,
    save_mask,
    variable_density_mask,
)

__version__ = "0.1.0"

"""Level-set inverse-lithography mask optimization engine.

TSDF construction, SOCS forward lithography, analytic ILT/PVBand gradients,
curvature-regularized level-set evolution under CFL-limited conjugate-gradient
stepping, and mask metrics (L2, PVBand, shot count).
"""

from .errors import DegenerateInputError, FormatError, NumericalError
from .fields import convolve, shift
from .levelset import (
    LevelSetField, ahf, curvature, evolve_step, extract_boundaries,
    geometry_gradient, heaviside, mask_from_phi, tsdf_from_mask,
)
from .litho import (
    INNER, NOMINAL, OUTER, KernelSet, OpticalKernel, PrintTriple,
    ProcessCondition, aerial_intensity, gen_synthetic_kernels, load_kernels,
    print_corners, resist_hard, resist_sigmoid, save_kernels,
)
from .metrics import MetricsReport, fracture, l2_error, pvband, shot_count
from .optimizer import (
    OptConfig, OptimizationResult, cfl_timestep, cg_direction, ilt_gradient,
    ilt_loss, modulation_search, motion_term, optimize, pvb_gradient,
    pvb_loss, velocity,
)

__version__ = "0.1.0"

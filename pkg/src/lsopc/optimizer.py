"""The level-set ILT optimization loop.

Losses and analytic gradients for the ILT and PVBand objectives, velocity
assembly, the curvature-augmented motion term, CFL time stepping,
Polak-Ribiere conjugate-gradient directions and the exhaustive modulation-map
search.

The CG direction field is what multiplies |grad phi| in the motion term (the
first iteration direction is minus the loss gradient, giving descent), and
the CFL rule is applied to the effective per-pixel normal velocity, which
keeps the per-step front displacement below eta grid cells.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import litho
from .errors import DegenerateInputError, NumericalError
from .levelset import (
    LevelSetField, curvature, geometry_gradient, heaviside, mask_from_phi,
    tsdf_from_mask,
)
from .metrics import MetricsReport, l2_error, pvband, shot_count

# guard when converting the curvature term to a normal velocity
_EPS_GRAD = 1e-8

__all__ = [
    "OptConfig", "IterationRecord", "OptimizationResult",
    "ilt_loss", "pvb_loss", "ilt_gradient", "pvb_gradient",
    "velocity", "motion_term", "cfl_timestep", "cg_direction",
    "optimize", "modulation_search", "ModulationSearchResult",
]


@dataclass
class OptConfig:
    alpha: float = 1.0            # ILT loss weight
    beta: float = 7.5             # PVBand loss weight
    curvature_weight: float = 0.9
    sigma_z: float = 50.0         # sigmoid resist steepness
    i_th: float = 0.225           # print threshold
    epsilon: float = 0.03         # approximated-Heaviside width
    eta: float = 0.85             # CFL number
    d_upper: float = 900.0
    d_lower: float = -100.0
    max_iters: int = 100
    stop_rel_tol: float = 1e-4
    stop_patience: int = 5
    use_curvature: bool = True
    grid_side: int = 0            # 0: taken from the target
    cg_restart_every: int = 50

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or (self.alpha == 0 and self.beta == 0):
            raise ValueError("alpha, beta must be >= 0 and not both zero")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must be in (0, 1]")
        if self.sigma_z <= 0:
            raise ValueError("sigma_z must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


@dataclass
class IterationRecord:
    l_ilt: float
    l_pvb: float
    l_dso: float
    dt: float
    max_v: float
    max_step: float       # max |delta phi| before truncation clamping
    max_grad_mag: float   # max |grad phi| at the start of the step


@dataclass
class OptimizationResult:
    final_mask: np.ndarray
    final_phi: LevelSetField
    metrics: MetricsReport
    loss_history: list
    iters_run: int
    wall_time: float


def ilt_loss(z, z_t):
    """Sum of squared differences between the nominal print and the target."""
    return float(np.sum((np.asarray(z, dtype=np.float64) - z_t) ** 2))


def pvb_loss(z_in, z_out, z_t):
    """Sum of squared corner deviations from the target."""
    z_t = np.asarray(z_t, dtype=np.float64)
    return float(np.sum((z_in - z_t) ** 2) + np.sum((z_out - z_t) ** 2))


def _socs_gradient(mask, z, z_t, kernels, sigma_z, dose):
    """d/dM of sum((Z - Z_t)^2) through the sigmoid resist and SOCS model.

    2*sigma_z*{ H' (*) [(Z-Z_t) Z (1-Z) (M (*) H*)] + conj-counterpart },
    summed over kernels with their weights; the two bracket terms are complex
    conjugates, so only one is transformed.
    """
    mask = np.asarray(mask, dtype=np.float64)
    hf, hrotf, sigma = kernels.stacked_ffts(mask.shape)
    a = np.fft.ifft2(np.fft.fft2(mask)[None, :, :] * hf)
    gate = (z - z_t) * z * (1.0 - z)
    t = np.fft.ifft2(np.fft.fft2(gate[None, :, :] * np.conj(a)) * hrotf)
    return 4.0 * sigma_z * dose * np.real(np.tensordot(sigma, t, axes=1))


def ilt_gradient(mask, z, z_t, kernels, cfg):
    """Analytic gradient of the ILT loss w.r.t. the mask (nominal condition)."""
    if kernels.side > min(np.shape(mask)):
        raise ValueError("kernel side exceeds grid")
    return _socs_gradient(mask, z, np.asarray(z_t, dtype=np.float64),
                          kernels, cfg.sigma_z, dose=1.0)


def pvb_gradient(mask, z_in, z_out, z_t, focus_kernels, defocus_kernels, cfg):
    """Analytic gradient of the PVBand loss w.r.t. the mask."""
    z_t = np.asarray(z_t, dtype=np.float64)
    inner = _socs_gradient(mask, z_in, z_t, defocus_kernels, cfg.sigma_z,
                           dose=litho.INNER.dose)
    outer = _socs_gradient(mask, z_out, z_t, focus_kernels, cfg.sigma_z,
                           dose=litho.OUTER.dose)
    return inner + outer


def velocity(g_ilt, g_pvb, cfg):
    """Velocity field v = alpha * g_ilt + beta * g_pvb."""
    return cfg.alpha * g_ilt + cfg.beta * g_pvb


def motion_term(v, phi, kappa=0.0):
    """Level-set update field: dphi/dt = -v * |grad phi| + kappa."""
    from .levelset import gradient_magnitude
    return -np.asarray(v) * gradient_magnitude(phi) + kappa


def cfl_timestep(v_effective, eta):
    """CFL-limited time step dt = eta / max|v|.

    Returns (dt, converged); a zero velocity field signals convergence.
    """
    vmax = float(np.max(np.abs(v_effective)))
    if vmax == 0.0:
        return 0.0, True
    return eta / vmax, False


def cg_direction(g, g_prev=None, d_prev=None):
    """Polak-Ribiere conjugate-gradient direction with restart.

    First iteration (or any restart) returns steepest descent -g; otherwise
    d = -g + beta_PR * d_prev with beta_PR = max(0, <g, g - g_prev> /
    <g_prev, g_prev>).
    """
    if g_prev is None or d_prev is None:
        return -g
    denom = float(np.vdot(g_prev, g_prev).real)
    if denom == 0.0:
        return -g
    beta_pr = float(np.vdot(g, g - g_prev).real) / denom
    if beta_pr <= 0.0:
        return -g
    return -g + beta_pr * d_prev


def _forward_losses(mask, target, focus_kernels, defocus_kernels, cfg):
    prints = litho.print_corners(mask, focus_kernels, defocus_kernels, cfg,
                                 binarize=False)
    l_ilt = ilt_loss(prints.nominal, target)
    l_pvb = pvb_loss(prints.inner, prints.outer, target)
    return prints, l_ilt, l_pvb, cfg.alpha * l_ilt + cfg.beta * l_pvb


def _step_fields(phi, mask, prints, modulation, target,
                 focus_kernels, defocus_kernels, cfg, g_prev, d_prev, restart):
    """Direction, effective velocity and geometry for one evolution step."""
    g_ilt = ilt_gradient(mask, prints.nominal, target, focus_kernels, cfg)
    g_pvb = pvb_gradient(mask, prints.inner, prints.outer, target,
                         focus_kernels, defocus_kernels, cfg)
    g = velocity(g_ilt, g_pvb, cfg)
    d = cg_direction(g, None if restart else g_prev, d_prev)
    grad_mag = geometry_gradient(phi).magnitude
    if cfg.use_curvature:
        kappa = curvature(phi, modulation, cfg.curvature_weight)
        v_total = d - kappa / (grad_mag + _EPS_GRAD)
    else:
        v_total = d
    return g, d, v_total, grad_mag


def _check_target(target):
    target = (np.asarray(target) != 0).astype(np.uint8)
    if target.all() or not target.any():
        raise DegenerateInputError("target layout is uniform")
    return target


def optimize(target, focus_kernels, defocus_kernels, cfg,
             phi0=None, modulation=None):
    """Run the full level-set ILT loop on a binary target layout.

    `phi0` (a LevelSetField) and `modulation` (per-pixel gate in [0, 1]) are
    optional externally supplied fields; absent, the target's own TSDF and an
    all-ones gate are used.  Returns the iterate with the lowest recorded
    combined loss, binarized, with hard-resist metrics and the loss history.
    """
    t0 = time.perf_counter()
    target = _check_target(target)
    if phi0 is None:
        phi = tsdf_from_mask(target, cfg.d_upper, cfg.d_lower)
    else:
        if phi0.shape != target.shape:
            raise ValueError("phi0 dimensions do not match target")
        phi = phi0.copy()
    if modulation is None:
        m = np.ones_like(target, dtype=np.float64)
    else:
        m = np.asarray(modulation, dtype=np.float64)
        if m.shape != target.shape:
            raise ValueError("modulation dimensions do not match target")
        if m.min() < 0 or m.max() > 1:
            raise ValueError("modulation values must lie in [0, 1]")

    history = []
    best_loss = np.inf
    best_phi = phi.copy()
    g_prev = d_prev = None
    flat_streak = 0

    for it in range(cfg.max_iters):
        mask = mask_from_phi(phi).astype(np.float64)
        prints, l_ilt, l_pvb, l_dso = _forward_losses(
            mask, target, focus_kernels, defocus_kernels, cfg)
        if not np.isfinite(l_dso):
            raise NumericalError(f"non-finite loss at iteration {it}")
        if l_dso < best_loss:
            rel = (best_loss - l_dso) / best_loss if np.isfinite(best_loss) else np.inf
            best_loss = l_dso
            best_phi = phi.copy()
        else:
            rel = 0.0
        flat_streak = flat_streak + 1 if rel < cfg.stop_rel_tol else 0
        if flat_streak >= cfg.stop_patience:
            history.append(IterationRecord(l_ilt, l_pvb, l_dso, 0.0, 0.0, 0.0, 0.0))
            break

        restart = g_prev is None or (it % cfg.cg_restart_every == 0)
        g, d, v_total, grad_mag = _step_fields(
            phi, mask, prints, m, target, focus_kernels, defocus_kernels,
            cfg, g_prev, d_prev, restart)
        dt, converged = cfl_timestep(v_total, cfg.eta)
        if converged:
            history.append(IterationRecord(l_ilt, l_pvb, l_dso, 0.0, 0.0, 0.0,
                                           float(grad_mag.max())))
            break
        update = -v_total * grad_mag
        history.append(IterationRecord(
            l_ilt, l_pvb, l_dso, dt, float(np.max(np.abs(v_total))),
            float(np.max(np.abs(dt * update))), float(grad_mag.max())))
        phi = LevelSetField(
            np.clip(phi.phi + dt * update, cfg.d_lower, cfg.d_upper),
            cfg.d_upper, cfg.d_lower)
        g_prev, d_prev = g, d

    final_mask = mask_from_phi(best_phi)
    hard = litho.print_corners(final_mask.astype(np.float64),
                               focus_kernels, defocus_kernels, cfg, binarize=True)
    wall = time.perf_counter() - t0
    report = MetricsReport(
        l2=l2_error(hard.nominal, target),
        pvband=pvband(hard.inner, hard.outer),
        shots=shot_count(final_mask),
        wall_time=wall,
        iters=len(history),
    )
    return OptimizationResult(
        final_mask=final_mask, final_phi=best_phi, metrics=report,
        loss_history=history, iters_run=len(history), wall_time=wall)


@dataclass
class ModulationSearchResult:
    m_gt: np.ndarray
    best_delta_h: float
    candidates: list = field(default_factory=list)  # (delta_h, final L_DSO)


def modulation_search(phi_gt, target, focus_kernels, defocus_kernels, cfg,
                      num_samples=41, eval_steps=10):
    """Exhaustive search for the curvature modulation gate.

    Each candidate gate is the hard Heaviside of the supplied level-set field
    shifted by delta_h (uniform samples over [-20, 20]).  A candidate is
    scored by the combined loss after `eval_steps` evolution iterations with
    curvature gated by it; ties break on smallest |delta_h|, then smallest
    delta_h.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    target = _check_target(target)
    offsets = [0.0] if num_samples == 1 else list(np.linspace(-20.0, 20.0, num_samples))
    eval_cfg = OptConfig(**{**cfg.__dict__, "use_curvature": True})

    candidates = []
    gates = {}
    for dh in offsets:
        gate = heaviside(phi_gt.phi + dh).astype(np.float64)
        gates[dh] = gate
        phi = phi_gt.copy()
        g_prev = d_prev = None
        for it in range(eval_steps):
            mask = mask_from_phi(phi).astype(np.float64)
            prints, _, _, _ = _forward_losses(
                mask, target, focus_kernels, defocus_kernels, eval_cfg)
            restart = g_prev is None or (it % eval_cfg.cg_restart_every == 0)
            g, d, v_total, grad_mag = _step_fields(
                phi, mask, prints, gate, target, focus_kernels,
                defocus_kernels, eval_cfg, g_prev, d_prev, restart)
            dt, converged = cfl_timestep(v_total, eval_cfg.eta)
            if converged:
                break
            phi = LevelSetField(
                np.clip(phi.phi - dt * v_total * grad_mag,
                        eval_cfg.d_lower, eval_cfg.d_upper),
                eval_cfg.d_upper, eval_cfg.d_lower)
            g_prev, d_prev = g, d
        mask = mask_from_phi(phi).astype(np.float64)
        _, _, _, l_final = _forward_losses(
            mask, target, focus_kernels, defocus_kernels, eval_cfg)
        candidates.append((dh, l_final))

    best_loss = min(l for _, l in candidates)
    tied = [dh for dh, l in candidates if l == best_loss]
    best_dh = min(tied, key=lambda dh: (abs(dh), dh))
    return ModulationSearchResult(gates[best_dh], best_dh, candidates)

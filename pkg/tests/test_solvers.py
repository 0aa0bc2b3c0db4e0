"""Solver correctness at desk scale (fast cases only; the full-scale
reconstruction runs live in test_acceptance.py)."""

import numpy as np
import pytest

from etvrecon import (
    MeasurementOperator,
    SolverConfig,
    denoise_enhanced_tv,
    full_mask,
    radial_mask,
    solve_enhanced_tv,
    solve_tv_bregman,
    solve_tva_minus_tvi,
)
from etvrecon.data import shepp_logan, strip_image
from etvrecon.metrics import relative_error, ssim

RNG = np.random.default_rng(17)


def small_cfg(alpha, **kw):
    base = dict(alpha=alpha, max_dca=5, max_inner=50, inner_solve="fft_periodic")
    base.update(kw)
    return SolverConfig(**base)


def full_op(n):
    return MeasurementOperator(full_mask(n), noise_radius=0.0)


def test_full_mask_exact_recovery_enhanced():
    n = 32
    x = shepp_logan(n)
    op = full_op(n)
    rep = solve_enhanced_tv(op, op.forward(x), small_cfg(0.3), ground_truth=x)
    assert rep.relative_error <= 1e-8


def test_full_mask_exact_recovery_tv():
    n = 32
    x = shepp_logan(n)
    op = full_op(n)
    rep = solve_tv_bregman(op, op.forward(x), small_cfg(0.0), ground_truth=x)
    assert rep.relative_error <= 1e-8


def test_full_mask_exact_recovery_tva_tvi():
    n = 32
    x = shepp_logan(n)
    op = full_op(n)
    rep = solve_tva_minus_tvi(op, op.forward(x), small_cfg(0.0), ground_truth=x)
    assert rep.relative_error <= 1e-8


def test_zero_measurements_zero_reconstruction():
    n = 16
    op = MeasurementOperator(radial_mask(n, 4), noise_radius=0.0)
    y = np.zeros(op.m, dtype=complex)
    rep = solve_tva_minus_tvi(op, y, small_cfg(0.0))
    assert np.linalg.norm(rep.image) <= 1e-10


def test_rejects_wrong_measurement_length():
    op = MeasurementOperator(radial_mask(16, 4), noise_radius=0.0)
    with pytest.raises(ValueError):
        solve_enhanced_tv(op, np.zeros(op.m + 1), small_cfg(0.3))


def test_tv_baseline_requires_alpha_zero():
    op = full_op(16)
    with pytest.raises(ValueError):
        solve_tv_bregman(op, op.forward(np.ones((16, 16))), small_cfg(0.5))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(mu=-1.0).validate()
    with pytest.raises(ValueError):
        SolverConfig(inner_solve="lu").validate()


def test_dca_descent_and_feasibility():
    n = 64
    x = shepp_logan(n)
    op = MeasurementOperator(radial_mask(n, 12), noise_radius=0.0)
    cfg = SolverConfig(alpha=0.8, inner_solve="fft_periodic")
    rep = solve_enhanced_tv(op, op.forward(x), cfg, ground_truth=x)
    assert rep.relative_error < 1e-3
    diffs = np.diff(rep.objective_trace)
    assert np.all(diffs <= 1e-9)
    assert rep.feasibility_trace[-1] <= 1e-6


def test_alpha_zero_equals_tv_baseline():
    n = 64
    x = shepp_logan(n)
    op = MeasurementOperator(radial_mask(n, 12), noise_radius=0.0)
    y = op.forward(x)
    cfg_a = SolverConfig(alpha=0.0, max_dca=10, max_inner=100, inner_solve="fft_periodic")
    cfg_b = SolverConfig(alpha=0.0, max_dca=10, max_inner=100, inner_solve="fft_periodic")
    rep_enh = solve_enhanced_tv(op, y, cfg_a, ground_truth=x)
    rep_tv = solve_tv_bregman(op, y, cfg_b, ground_truth=x)
    gap = np.linalg.norm(rep_enh.image - rep_tv.image) / np.linalg.norm(rep_tv.image)
    assert gap <= 1e-6


def test_inner_solver_equivalence_small():
    # cg (exact boundary) and fft_periodic (periodic surrogate) agree on an
    # easy problem; tolerance per the documented gap
    n = 32
    x = shepp_logan(n)
    op = MeasurementOperator(radial_mask(n, 10), noise_radius=0.0)
    y = op.forward(x)
    rep_f = solve_enhanced_tv(op, y, SolverConfig(alpha=0.5, max_dca=5, max_inner=300, inner_solve="fft_periodic"))
    rep_c = solve_enhanced_tv(op, y, SolverConfig(alpha=0.5, max_dca=5, max_inner=300, inner_solve="cg"))
    gap = np.linalg.norm(rep_f.image - rep_c.image) / np.linalg.norm(rep_c.image)
    assert gap <= 1e-3


def test_determinism():
    n = 32
    x = shepp_logan(n)
    op = MeasurementOperator(radial_mask(n, 8), noise_radius=0.0)
    y = op.forward(x)
    a = solve_enhanced_tv(op, y, small_cfg(0.3))
    b = solve_enhanced_tv(op, y, small_cfg(0.3))
    assert np.array_equal(a.image, b.image)
    assert a.objective_trace == b.objective_trace


def test_alpha_check_recorded():
    n = 32
    x = shepp_logan(n)
    op = full_op(n)
    rep = solve_enhanced_tv(op, op.forward(x), small_cfg(0.3))
    chk = rep.alpha_check
    assert chk is not None
    assert np.isfinite(chk["bound"]) and chk["bound"] > 0
    assert isinstance(chk["satisfied"], bool)


def test_weighted_operator_roundtrip():
    # weighted model with tau = 0 still recovers exactly on a full mask
    from etvrecon.transforms import variable_density_mask

    n = 32
    x = shepp_logan(n)
    mask, rho = variable_density_mask(n, 6 * n * n, seed=3)
    op = MeasurementOperator(mask, rho, noise_radius=0.0)
    rep = solve_enhanced_tv(op, op.forward(x), SolverConfig(alpha=0.3, max_dca=5, max_inner=200, inner_solve="fft_periodic"), ground_truth=x)
    assert rep.relative_error <= 1e-3


def test_denoise_constant_offset_fixed_point():
    y = 0.37 * np.ones((16, 16))
    out = denoise_enhanced_tv(y, 1.2, 0.8, 1.0, max_dca=2, max_breg=10, inner_solve="fft_periodic")
    assert np.allclose(out.real, 0.37, atol=1e-10)


def test_denoise_high_fidelity_returns_input():
    x = shepp_logan(32)
    out = denoise_enhanced_tv(x, 0.5, 1e3, 1.0, max_dca=2, max_breg=50, inner_solve="fft_periodic")
    assert relative_error(x, out.real) <= 1e-2


def test_denoise_enhanced_beats_tv_on_strips():
    n = 128
    clean = strip_image(n)
    rng = np.random.default_rng(0)
    noisy = clean + 0.6 * rng.standard_normal((n, n))
    enh = denoise_enhanced_tv(noisy, 1.2, 0.8, 1.0, max_dca=10, max_breg=200, inner_solve="fft_periodic")
    plain = denoise_enhanced_tv(noisy, 0.0, 0.8, 1.0, max_dca=10, max_breg=200, inner_solve="fft_periodic")
    assert ssim(clean, enh.real) >= ssim(clean, plain.real)


def test_denoise_rejects_bad_params():
    with pytest.raises(ValueError):
        denoise_enhanced_tv(np.zeros((8, 8)), -0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        denoise_enhanced_tv(np.zeros((8, 8)), 0.1, 0.0, 1.0)

"""Acceptance gate: ten criteria, one pass/fail line each.

Each criterion prints exactly one line "criterion N: PASS/FAIL (...)" before
asserting, so the outcome ledger survives in the pytest output either way.
Tolerances are pinned here and must not be loosened; see the decisions log
for analysis of any honestly red criterion.

Run order matters only in that criterion 7 (DCA descent) audits the
objective traces of every reconstruction executed by criteria 4-6, collected
in _TRACES.
"""

import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import etvrecon as e
from etvrecon.data import shepp_logan
from etvrecon.imaging import (
    gradient,
    gradient_adjoint,
    project_ball,
    shrink,
    tv_aniso,
    tv_iso,
)
from etvrecon.metrics import relative_error, ssim
from etvrecon.theory import check_lemmas, gradient_operator_norm_sq
from etvrecon.transforms import (
    MeasurementOperator,
    add_noise,
    dft2,
    dft2_inv,
    haar2,
    haar2_inv,
    radial_mask,
)

# objective traces of every acceptance DCA solve, audited by criterion 7
# (the split-Bregman TV baseline has no descent guarantee and is excluded)
_TRACES = []
# alpha_check records of the criterion-4 runs, audited by criterion 9
_ALPHA_CHECKS = []


def _report(num, ok, detail):
    print("criterion %d: %s (%s)" % (num, "PASS" if ok else "FAIL", detail))
    assert ok, "criterion %d failed: %s" % (num, detail)


def _solve(solver, op, y, cfg, truth):
    rep = solver(op, y, cfg, ground_truth=truth)
    if solver is e.solve_enhanced_tv and cfg.alpha > 0:
        _TRACES.append(list(rep.objective_trace))
    return rep


# -- criterion 1: operator correctness suite (< 10 s) -----------------------


def test_criterion_1_operators():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    ok, detail = True, []

    for n in (4, 8, 16, 64):
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = rng.standard_normal((n, n, 2)) + 1j * rng.standard_normal((n, n, 2))
        gap = abs(np.vdot(g, gradient(x)) - np.vdot(gradient_adjoint(g), x))
        ok &= gap <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(g)

    for n in (8, 64, 256):
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        ok &= np.linalg.norm(dft2_inv(dft2(x)) - x) <= 1e-12 * np.linalg.norm(x)
        ok &= abs(np.linalg.norm(dft2(x)) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)
        ok &= np.linalg.norm(haar2_inv(haar2(x)) - x) <= 1e-12 * np.linalg.norm(x)
        ok &= abs(np.linalg.norm(haar2(x)) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)

    for n in (8, 32, 128):
        ok &= gradient_operator_norm_sq(n) <= 8.0 + 1e-6

    for _ in range(1000):
        x = rng.standard_normal((8, 8))
        x -= x.mean()
        ok &= np.linalg.norm(x) <= tv_aniso(x) + 1e-12

    for _ in range(1000):
        x = rng.standard_normal((8, 8))
        iso, aniso = tv_iso(x), tv_aniso(x)
        ok &= iso <= aniso + 1e-12 <= np.sqrt(2.0) * iso + 2e-12

    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    _report(1, ok, "operators verified in %.1fs (budget 10s)" % elapsed)


# -- criterion 2: lemma suite (< 60 s) ---------------------------------------


def test_criterion_2_lemmas():
    t0 = time.perf_counter()
    failures = []
    for n in (8, 16, 32):
        results = check_lemmas(n, trials=100, seed=0)
        for name, entry in results.items():
            if not entry["passed"]:
                failures.append("%s@N=%d" % (name, n))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    _report(2, ok, "lemma checks at N=8,16,32 in %.1fs (budget 60s)%s"
            % (elapsed, "" if not failures else "; failed: " + ",".join(failures)))


# -- criterion 3: prox/projection oracles on 1e4 instances -------------------


def test_criterion_3_prox_oracles():
    rng = np.random.default_rng(103)
    n_inst = 10_000
    worst_shrink = 0.0
    zs = rng.standard_normal(n_inst) + 1j * rng.standard_normal(n_inst)
    ts = rng.uniform(0.0, 2.0, n_inst)
    for z, t in zip(zs, ts):
        r = abs(z)
        res = minimize_scalar(
            lambda w: t * w + 0.5 * (w - r) ** 2,
            bounds=(0.0, r), method="bounded",
            options={"xatol": 1e-10},
        )
        w_star = res.x if res.fun <= 0.5 * r**2 else 0.0
        oracle = (z / r) * w_star
        worst_shrink = max(worst_shrink, abs(shrink(np.array(z), t) - oracle))

    worst_proj = 0.0
    for _ in range(n_inst):
        m = 4
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        c = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        radius = rng.uniform(0.0, 3.0)
        r = v - c
        nr = np.linalg.norm(r)
        if nr == 0:
            oracle = c
        else:
            u = r / nr
            res = minimize_scalar(
                lambda rho: np.linalg.norm(c + rho * u - v) ** 2,
                bounds=(0.0, radius), method="bounded",
                options={"xatol": 1e-10},
            )
            oracle = c + res.x * u
        worst_proj = max(worst_proj, np.linalg.norm(project_ball(v, c, radius) - oracle))

    ok = worst_shrink <= 1e-6 and worst_proj <= 1e-6
    _report(3, ok, "worst shrink gap %.2e, worst projection gap %.2e (tol 1e-6)"
            % (worst_shrink, worst_proj))


# -- criteria 4, 5, 9: noise-free recovery and baseline separation -----------


def _fresh_radial(n, lines, trial):
    offset = trial * np.pi / (lines * 10.0)
    return radial_mask(n, lines, angle_offset=offset)


def test_criterion_4_noise_free_recovery():
    t0 = time.perf_counter()
    # desk scale: 64x64, 12 lines, alpha 0.8, five fresh-mask trials
    truth = shepp_logan(64)
    hits = 0
    for trial in range(5):
        op = MeasurementOperator(_fresh_radial(64, 12, trial), noise_radius=0.0)
        # 5000 sweeps solve each convex subproblem accurately enough that the
        # DCA descent guarantee (criterion 7) holds at the 1e-9 slack
        cfg = e.SolverConfig(alpha=0.8, max_inner=5000, tol_dca=1e-6,
                             inner_solve="fft_periodic")
        rep = _solve(e.solve_enhanced_tv, op, op.forward(truth), cfg, truth)
        _ALPHA_CHECKS.append(rep.alpha_check)
        if rep.relative_error < 1e-3:
            hits += 1
    desk_elapsed = time.perf_counter() - t0
    desk_ok = hits >= 4 and desk_elapsed < 300.0

    # full scale: 256x256, 7 radial lines, within 30 minutes
    t1 = time.perf_counter()
    truth256 = shepp_logan(256)
    op = MeasurementOperator(radial_mask(256, 7), noise_radius=0.0)
    cfg = e.SolverConfig(alpha=0.8, inner_solve="fft_periodic")
    try:
        rep = _solve(e.solve_enhanced_tv, op, op.forward(truth256), cfg, truth256)
        full_rel, full_ssim = rep.relative_error, rep.ssim
        _ALPHA_CHECKS.append(rep.alpha_check)
    except e.SolverAbort:
        full_rel, full_ssim = np.inf, -1.0
    full_elapsed = time.perf_counter() - t1
    full_ok = full_rel <= 1e-3 and full_ssim >= 0.999 and full_elapsed < 1800.0

    ok = desk_ok and full_ok
    _report(4, ok, "desk 64x64/12 lines: %d/5 trials < 1e-3 in %.0fs; "
            "full 256x256/7 lines: rel %.3e ssim %.4f in %.0fs"
            % (hits, desk_elapsed, full_rel, full_ssim, full_elapsed))


def test_criterion_5_baseline_separation():
    truth = shepp_logan(256)
    op = MeasurementOperator(radial_mask(256, 7), noise_radius=0.0)
    cfg = e.SolverConfig(alpha=0.0, max_dca=50, max_inner=200, inner_solve="fft_periodic")
    rep = _solve(e.solve_tv_bregman, op, op.forward(truth), cfg, truth)
    ok = rep.relative_error >= 0.1
    _report(5, ok, "TV baseline at 256x256/7 lines: rel %.3f (must be >= 0.1)"
            % rep.relative_error)


# -- criterion 6: noisy robustness -------------------------------------------


def test_criterion_6_noisy_robustness():
    truth = shepp_logan(256)
    results = {}
    for std in (0.04, 0.06, 0.08):
        mask = radial_mask(256, 15)
        op0 = MeasurementOperator(mask, noise_radius=0.0)
        y = add_noise(op0.forward(truth), std, seed=60)
        tau = std * np.sqrt(len(mask))
        op = MeasurementOperator(mask, noise_radius=tau)
        cfg_e = e.SolverConfig(alpha=0.8, tol_dca=1e-3, inner_solve="fft_periodic")
        cfg_t = e.SolverConfig(alpha=0.0, max_dca=50, max_inner=200, tol_dca=1e-3,
                               inner_solve="fft_periodic")
        rep_e = _solve(e.solve_enhanced_tv, op, y, cfg_e, truth)
        rep_t = _solve(e.solve_tv_bregman, op, y, cfg_t, truth)
        results[std] = (rep_e.ssim, rep_t.ssim)
    ok = results[0.04][0] >= 0.90
    ok &= all(enh > tv for enh, tv in results.values())
    _report(6, ok, "; ".join(
        "std %.2f: enhanced %.4f vs tv %.4f" % (s, a, b)
        for s, (a, b) in results.items()) + " (need enhanced >= 0.90 at 0.04 and > tv everywhere)")


# -- criterion 7: DCA descent on every acceptance run ------------------------


def test_criterion_7_dca_descent():
    assert _TRACES, "criteria 4-6 must run first"
    worst = 0.0
    for trace in _TRACES:
        if len(trace) > 1:
            worst = max(worst, float(np.max(np.diff(trace))))
    ok = worst <= 1e-9
    _report(7, ok, "max objective increase %.2e over %d traces (slack 1e-9)"
            % (worst, len(_TRACES)))


# -- criterion 8: alpha = 0 reduction -----------------------------------------


def test_criterion_8_alpha_zero_reduction():
    truth = shepp_logan(64)
    op = MeasurementOperator(radial_mask(64, 12), noise_radius=0.0)
    y = op.forward(truth)
    cfg = dict(alpha=0.0, max_dca=20, max_inner=200, inner_solve="fft_periodic")
    rep_e = e.solve_enhanced_tv(op, y, e.SolverConfig(**cfg))
    rep_t = e.solve_tv_bregman(op, y, e.SolverConfig(**cfg))
    gap = np.linalg.norm(rep_e.image - rep_t.image) / np.linalg.norm(rep_t.image)
    ok = gap <= 1e-6
    _report(8, ok, "relative reconstruction gap %.2e (tol 1e-6)" % gap)


# -- criterion 9: posterior alpha verification recorded ----------------------


def test_criterion_9_alpha_verification():
    assert _ALPHA_CHECKS, "criterion 4 must run first"
    ok = True
    bounds = []
    for chk in _ALPHA_CHECKS:
        ok &= chk is not None
        if chk is None:
            continue
        ok &= np.isfinite(chk["bound"]) or chk["bound"] == np.inf
        ok &= isinstance(chk["satisfied"], bool)
        ok &= chk["gradient_sparsity"] >= 1
        bounds.append(chk["bound"])
    # the truth value is reported, never asserted: delta is unknown
    satisfied = sum(1 for c in _ALPHA_CHECKS if c and c["satisfied"])
    _report(9, ok, "%d/%d runs recorded a finite bound (min %.3g); "
            "alpha condition reported satisfied in %d"
            % (len(bounds), len(_ALPHA_CHECKS), min(bounds) if bounds else float("nan"),
               satisfied))


# -- criterion 10: phase-transition trend -------------------------------------


def test_criterion_10_phase_transition():
    from etvrecon.harness import phase_transition

    t0 = time.perf_counter()
    alphas = [0.7, 1.2, 1.7, 2.2, 2.7]
    lines = list(range(3, 13))
    solver = e.SolverConfig(inner_solve="fft_periodic", tol_dca=1e-6, inner_stop_tol=1e-7)
    rates = phase_transition(alphas, lines, trials=5, seed=0, n_side=64, solver=solver)
    elapsed = time.perf_counter() - t0
    violations = []
    for i, a in enumerate(alphas):
        diffs = np.diff(rates[i])
        if np.any(diffs < 0):
            violations.append("alpha=%.1f %s" % (a, rates[i].tolist()))
    ok = not violations and elapsed < 3600.0
    _report(10, ok, "5x10 grid, 5 trials/cell in %.0fs (budget 3600s)%s"
            % (elapsed, "" if not violations else "; non-monotone: " + " | ".join(violations)))

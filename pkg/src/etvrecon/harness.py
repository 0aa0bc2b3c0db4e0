"""Configuration-driven experiment runner.

Experiments are described by plain-text INI configs (sections: experiment,
image, mask, noise, solver, output) and produce reconstructed images (PGM),
a results CSV, mask files, and objective traces.  Reruns with the same seed
reproduce every numeric CSV field except wall_time bit for bit.
"""

import configparser
import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import theory
from .data import load_image, save_image, shepp_logan, strip_image, synthetic_image
from .metrics import relative_error
from .solvers import (
    SolverAbort,
    SolverConfig,
    denoise_enhanced_tv,
    solve_enhanced_tv,
    solve_tv_bregman,
    solve_tva_minus_tvi,
)
from .transforms import (
    MeasurementOperator,
    add_noise,
    full_mask,
    radial_mask,
    save_mask,
    variable_density_mask,
)

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "run_experiment",
    "phase_transition",
    "verify_theory",
    "CSV_COLUMNS",
]

# stable schema; never reorder within a major version
CSV_COLUMNS = [
    "model",
    "mask_kind",
    "rate",
    "std",
    "relative_error",
    "ssim",
    "iterations",
    "wall_time",
    "alpha_check",
]

_MODELS = ("tv", "tva_tvi", "enhanced_tv", "denoise")
_SOLVERS = {
    "tv": solve_tv_bregman,
    "tva_tvi": solve_tva_minus_tvi,
    "enhanced_tv": solve_enhanced_tv,
}


class ConfigError(ValueError):
    """Bad or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    model: str = "enhanced_tv"
    trials: int = 1
    seed: int = 0
    # image
    image_source: str = "shepp_logan"
    n_side: int = 256
    # mask
    mask_kind: str = "radial"
    n_lines: int = 7
    m_samples: int = 0
    density_cap: float = 1.0
    # noise
    std: float = 0.0
    tau: float | None = None  # residual radius; default std*sqrt(m)
    # solver
    solver: SolverConfig = field(default_factory=SolverConfig)
    max_breg: int = 1000  # denoise inner budget
    # output
    out_dir: str = "results"

    def validate(self):
        if self.model not in _MODELS:
            raise ConfigError("unknown model %r (want one of %s)" % (self.model, ", ".join(_MODELS)))
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if self.mask_kind not in ("radial", "variable_density", "full"):
            raise ConfigError("unknown mask kind %r" % (self.mask_kind,))
        if self.mask_kind == "radial" and self.n_lines < 1:
            raise ConfigError("radial mask needs lines >= 1")
        if self.mask_kind == "variable_density" and self.m_samples < 1:
            raise ConfigError("variable_density mask needs m >= 1")
        if self.std < 0:
            raise ConfigError("noise std must be nonnegative")
        if self.model == "tv" and self.solver.alpha != 0:
            raise ConfigError("the tv model requires alpha = 0")
        src = self.image_source
        if src not in ("shepp_logan", "shepp_logan_modified", "circle", "shapes", "strips"):
            if not os.path.exists(src):
                raise ConfigError("image file %r does not exist" % (src,))
        try:
            self.solver.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _get(section, key, cast, default):
    if section is None or key not in section:
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError("bad value for %s: %s" % (key, exc)) from exc


def load_config(path):
    """Parse an INI experiment config into an ExperimentConfig."""
    if not os.path.exists(path):
        raise ConfigError("config file %r does not exist" % (path,))
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError("cannot parse %s: %s" % (path, exc)) from exc
    exp = parser["experiment"] if "experiment" in parser else None
    img = parser["image"] if "image" in parser else None
    msk = parser["mask"] if "mask" in parser else None
    noi = parser["noise"] if "noise" in parser else None
    sol = parser["solver"] if "solver" in parser else None
    out = parser["output"] if "output" in parser else None

    cfg = ExperimentConfig()
    cfg.name = _get(exp, "name", str, os.path.splitext(os.path.basename(path))[0])
    cfg.model = _get(exp, "model", str, cfg.model)
    cfg.trials = _get(exp, "trials", int, cfg.trials)
    cfg.seed = _get(exp, "seed", int, cfg.seed)
    cfg.image_source = _get(img, "source", str, cfg.image_source)
    cfg.n_side = _get(img, "n_side", int, cfg.n_side)
    cfg.mask_kind = _get(msk, "kind", str, cfg.mask_kind)
    cfg.n_lines = _get(msk, "lines", int, cfg.n_lines)
    cfg.m_samples = _get(msk, "m", int, cfg.m_samples)
    cfg.density_cap = _get(msk, "cap", float, cfg.density_cap)
    cfg.std = _get(noi, "std", float, cfg.std)
    cfg.tau = _get(noi, "tau", float, cfg.tau)
    sc = SolverConfig(alpha=0.0 if cfg.model in ("tv", "tva_tvi") else 0.8)
    if cfg.model == "tv":
        sc.max_dca, sc.max_inner = 50, 200
    sc.alpha = _get(sol, "alpha", float, sc.alpha)
    sc.mu = _get(sol, "mu", float, sc.mu)
    sc.beta = _get(sol, "beta", float, sc.beta)
    sc.max_dca = _get(sol, "max_dca", int, sc.max_dca)
    sc.max_inner = _get(sol, "max_inner", int, sc.max_inner)
    sc.tol_dca = _get(sol, "tol_dca", float, sc.tol_dca)
    sc.inner_solve = _get(sol, "inner_solve", str, sc.inner_solve)
    sc.inner_stop_tol = _get(sol, "inner_stop_tol", float, sc.inner_stop_tol)
    cfg.solver = sc
    cfg.max_breg = _get(sol, "max_breg", int, cfg.max_breg)
    cfg.out_dir = _get(out, "dir", str, cfg.out_dir)
    cfg.validate()
    return cfg


def _load_source_image(cfg):
    src = cfg.image_source
    if src == "shepp_logan":
        return shepp_logan(cfg.n_side)
    if src == "shepp_logan_modified":
        return shepp_logan(cfg.n_side, modified=True)
    if src in ("circle", "shapes"):
        return synthetic_image(src, cfg.n_side)
    if src == "strips":
        return strip_image(cfg.n_side)
    img = load_image(src)
    if img.shape[0] != img.shape[1]:
        raise ConfigError("image %r is not square" % (src,))
    return img


def _build_operator(cfg, trial_seed, trial):
    """Mask + weights + residual radius for one trial."""
    n = cfg.n_side
    if cfg.mask_kind == "radial":
        # rotate by trial index so repeated trials see fresh geometry
        offset = 0.0 if cfg.trials <= 1 else trial * np.pi / (cfg.n_lines * cfg.trials)
        mask = radial_mask(n, cfg.n_lines, angle_offset=offset)
        weights = None
    elif cfg.mask_kind == "variable_density":
        mask, weights = variable_density_mask(n, cfg.m_samples, cfg.density_cap, seed=trial_seed)
    else:
        mask = full_mask(n)
        weights = None
    m = len(mask)
    tau = cfg.std * np.sqrt(m) if cfg.tau is None else cfg.tau
    if weights is not None:
        # weighted model: noise enters before weighting, radius tau*sqrt(m)
        tau = (cfg.std if cfg.tau is None else cfg.tau) * np.sqrt(m)
    return MeasurementOperator(mask, weights, noise_radius=tau), weights


def _format_alpha_check(check):
    if check is None:
        return ""
    return "satisfied=%s;bound=%s;s=%d;grad_norm2=%s" % (
        check["satisfied"],
        repr(float(check["bound"])),
        check["gradient_sparsity"],
        repr(float(check["gradient_norm2"])),
    )


def _csv_row(cfg, rate, report):
    return {
        "model": cfg.model,
        "mask_kind": cfg.mask_kind if cfg.model != "denoise" else "",
        "rate": repr(float(rate)),
        "std": repr(float(cfg.std)),
        "relative_error": "" if report.relative_error is None else repr(report.relative_error),
        "ssim": "" if report.ssim is None else repr(report.ssim),
        "iterations": report.iterations_used,
        "wall_time": "%.3f" % report.wall_time,
        "alpha_check": _format_alpha_check(report.alpha_check),
    }


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def _run_denoise_trial(cfg, truth, trial_seed):
    from .metrics import ssim as _ssim
    from .solvers import ReconstructionReport

    rng = np.random.default_rng(trial_seed)
    noisy = truth + cfg.std * rng.standard_normal(truth.shape)
    sc = cfg.solver
    t0 = time.perf_counter()
    out = denoise_enhanced_tv(
        noisy, sc.alpha, sc.mu, sc.beta,
        max_dca=sc.max_dca, max_breg=cfg.max_breg, inner_solve=sc.inner_solve,
    )
    report = ReconstructionReport(image=out, wall_time=time.perf_counter() - t0,
                                  iterations_used=sc.max_dca)
    report.relative_error = relative_error(truth, out)
    report.ssim = _ssim(truth, out)
    return report, noisy


def run_experiment(cfg):
    """Run all trials of one experiment, writing artifacts under cfg.out_dir.

    Returns the list of per-trial ReconstructionReports.  Artifacts: the
    ground-truth image, per-trial reconstruction PGMs, mask files, objective
    traces, and a results.csv with one row per trial.
    """
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)
    truth = _load_source_image(cfg)
    save_image(truth, os.path.join(cfg.out_dir, "ground_truth.pgm"), bits=16)

    reports = []
    rows = []
    for trial in range(cfg.trials):
        trial_seed = cfg.seed + trial
        tag = "%s_t%d" % (cfg.name, trial)
        if cfg.model == "denoise":
            report, noisy = _run_denoise_trial(cfg, truth, trial_seed)
            save_image(noisy, os.path.join(cfg.out_dir, tag + "_noisy.pgm"), bits=16)
            rate = 1.0
        else:
            op, weights = _build_operator(cfg, trial_seed, trial)
            b = op.forward(truth)
            if weights is not None:
                # contaminate the unweighted measurements, then reweight
                b = (add_noise(b / weights, cfg.std, seed=trial_seed)) * weights
            else:
                b = add_noise(b, cfg.std, seed=trial_seed)
            try:
                report = _SOLVERS[cfg.model](op, b, cfg.solver, ground_truth=truth)
            except SolverAbort as exc:
                raise SolverAbort("%s (experiment %s, trial %d)" % (exc, cfg.name, trial)) from exc
            save_mask(os.path.join(cfg.out_dir, tag + "_mask.txt"), op.mask, weights)
            rate = op.mask.sampling_rate
            np.savetxt(
                os.path.join(cfg.out_dir, tag + "_trace.txt"),
                np.column_stack([report.objective_trace, report.feasibility_trace]),
                header="objective feasibility",
            )
        save_image(report.image, os.path.join(cfg.out_dir, tag + "_recon.pgm"), bits=16)
        rows.append(_csv_row(cfg, rate, report))
        reports.append(report)
    _write_csv(os.path.join(cfg.out_dir, "results.csv"), rows)
    return reports


def _phase_cell(n_side, alpha, n_lines, trials, seed, solver_template):
    """Success rate of one (alpha, lines) cell; aborts count as failures."""
    truth = shepp_logan(n_side)
    successes = 0
    for trial in range(trials):
        offset = (seed + trial) * np.pi / (n_lines * max(trials, 1) * 7.0)
        mask = radial_mask(n_side, n_lines, angle_offset=offset)
        op = MeasurementOperator(mask, noise_radius=0.0)
        sc = SolverConfig(**{**solver_template.__dict__, "alpha": alpha})
        try:
            report = solve_enhanced_tv(op, op.forward(truth), sc, ground_truth=truth)
            if report.relative_error < 1e-3:
                successes += 1
        except SolverAbort:
            pass
    return successes / trials


def phase_transition(
    alpha_grid,
    m_grid,
    trials=5,
    seed=0,
    n_side=64,
    solver=None,
    out_dir=None,
    threads=1,
):
    """Success-rate matrix over (alpha, radial line count) cells.

    Success means relative error below 1e-3.  Returns an array of shape
    (len(alpha_grid), len(m_grid)); cells run independently and aggregate by
    index, so results do not depend on thread scheduling.  With trials = 0
    returns an empty matrix.
    """
    alpha_grid = list(alpha_grid)
    m_grid = list(m_grid)
    if not alpha_grid or not m_grid:
        raise ConfigError("alpha and m grids must be nonempty")
    if trials == 0:
        return np.zeros((0, 0))
    if solver is None:
        solver = SolverConfig(inner_solve="fft_periodic", tol_dca=1e-6, inner_stop_tol=1e-7)
    cells = [(i, j, a, m) for i, a in enumerate(alpha_grid) for j, m in enumerate(m_grid)]
    rates = np.zeros((len(alpha_grid), len(m_grid)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {
                pool.submit(_phase_cell, n_side, a, m, trials, seed, solver): (i, j)
                for i, j, a, m in cells
            }
            for fut, (i, j) in futs.items():
                rates[i, j] = fut.result()
    else:
        for i, j, a, m in cells:
            rates[i, j] = _phase_cell(n_side, a, m, trials, seed, solver)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "phase_transition.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha\\lines"] + [str(m) for m in m_grid])
            for a, row in zip(alpha_grid, rates):
                writer.writerow([repr(float(a))] + [repr(float(v)) for v in row])
        save_image(rates, os.path.join(out_dir, "phase_transition.pgm"), bits=8)
    return rates


def verify_theory(n_side_list, trials=100, seed=0, out_path=None):
    """Run the lemma/property suites at each size and report pass/fail.

    Returns (all_passed, results_by_size).  Writes a plain-text report with
    one line per check when out_path is given.
    """
    results = {}
    all_passed = True
    lines = []
    for n in n_side_list:
        checks = theory.check_lemmas(n, trials=trials, seed=seed)
        results[n] = checks
        for name, entry in checks.items():
            all_passed &= entry["passed"]
            lines.append(
                "N=%d %s: %s (value %.6g, bound %.6g)"
                % (n, name, "PASS" if entry["passed"] else "FAIL",
                   entry["value"], entry["bound"])
            )
    lines.append("overall: %s" % ("PASS" if all_passed else "FAIL"))
    text = "\n".join(lines) + "\n"
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write(text)
    return all_passed, results

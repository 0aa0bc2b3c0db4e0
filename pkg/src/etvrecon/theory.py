"""Recovery-guarantee constants, posterior alpha verification, error-bound
evaluators, and numerical verification of the checkable lemmas.

All logarithms are base 2.  Bound evaluators use constant 1 in place of the
unknown universal constants hidden by the asymptotic inequalities, so they
report regime trends rather than certified values.
"""

import math
from dataclasses import dataclass

import numpy as np

from .imaging import gradient, gradient_adjoint, tv_aniso, tv_iso
from .transforms import dft2, haar2, haar_basis_image

__all__ = [
    "RipConstants",
    "GuaranteeInputs",
    "rip_constants",
    "verify_alpha",
    "error_bound",
    "compare_bounds",
    "check_lemmas",
]

DELTA_MAX = 0.6  # the quadratic-inequality argument needs 2*sqrt(1-d) > sqrt(1+d)


@dataclass(frozen=True)
class RipConstants:
    delta: float
    k1: float
    k2: float


@dataclass
class GuaranteeInputs:
    s: int
    tau: float
    alpha: float
    n_side: int
    residual_l1: float

    def validate(self):
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if min(self.tau, self.alpha, self.residual_l1) < 0:
            raise ValueError("tau, alpha, residual_l1 must be nonnegative")


def rip_constants(delta):
    """K1 = 3 / (2 sqrt(1-d) - sqrt(1+d)), K2 = (sqrt(1+d)/4)(K1 + 1/sqrt(1+d)).

    Defined for 0 < delta < 0.6 (the denominator of K1 is positive there).
    As delta -> 0.6 both constants diverge while K1/K2 -> 4/sqrt(1.6).
    """
    if not 0 < delta < DELTA_MAX:
        raise ValueError("delta must lie in (0, 0.6)")
    root_minus = math.sqrt(1.0 - delta)
    root_plus = math.sqrt(1.0 + delta)
    k1 = 3.0 / (2.0 * root_minus - root_plus)
    k2 = (root_plus / 4.0) * (k1 + 1.0 / root_plus)
    return RipConstants(delta=delta, k1=k1, k2=k2)


def verify_alpha(alpha, grad_norm2, s, delta, regime, n_side, epsilon=0.0):
    """Posterior check of the enhancement-weight condition.

    regime "exact": alpha <= sqrt(s) / (2 K2 g); regime "robust":
    alpha <= sqrt(48 s log2 N) / (K2 g), where g = ||grad x_opt||_2 (or the
    robust surrogate ||grad x*||_2 + epsilon for a solve accuracy epsilon).
    Returns (satisfied, bound); the bound is +inf when g + epsilon = 0.
    """
    if alpha < 0 or grad_norm2 < 0 or epsilon < 0 or s < 1:
        raise ValueError("inputs must be nonnegative, s >= 1")
    consts = rip_constants(delta)
    g = grad_norm2 + epsilon
    if regime == "exact":
        numerator = math.sqrt(s)
        denom_scale = 2.0 * consts.k2
    elif regime == "robust":
        numerator = math.sqrt(48.0 * s * math.log2(n_side))
        denom_scale = consts.k2
    else:
        raise ValueError("regime must be 'exact' or 'robust'")
    bound = math.inf if g == 0 else numerator / (denom_scale * g)
    return alpha <= bound, bound


def _core_term(inputs):
    # sqrt((sqrt(s)/alpha) tau + residual/alpha); +inf for alpha = 0
    if inputs.alpha == 0:
        return 0.0 if (inputs.tau == 0 and inputs.residual_l1 == 0) else math.inf
    return math.sqrt(
        (math.sqrt(inputs.s) / inputs.alpha) * inputs.tau
        + inputs.residual_l1 / inputs.alpha
    )


def error_bound(inputs, which):
    """Evaluate a reconstruction error bound (up to the unknown constant).

    which: "grad_l2", "grad_l1", "image_fourier", or "image_uniform".
    """
    inputs.validate()
    core = _core_term(inputs)
    if which == "grad_l2":
        return core
    if which == "grad_l1":
        return math.sqrt(inputs.s) * core + inputs.residual_l1
    log_factor = math.log2(inputs.n_side**2 / inputs.s)
    if which == "image_fourier":
        return (
            log_factor * core
            + log_factor * inputs.residual_l1 / math.sqrt(inputs.s)
            + inputs.tau
        )
    if which == "image_uniform":
        return core
    raise ValueError("unknown bound %r" % (which,))


def compare_bounds(inputs):
    """Compare the difference-of-convex bound against the plain TV bound.

    Both sides are evaluated with constant 1; reported as a regime trend,
    not a certified inequality.
    """
    inputs.validate()
    enhanced = _core_term(inputs)
    tv = inputs.residual_l1 / math.sqrt(inputs.s) + inputs.tau
    if enhanced == 0 and tv == 0:
        ratio = 1.0
    elif tv == 0:
        ratio = math.inf
    else:
        ratio = enhanced / tv
    return {
        "enhanced_bound": enhanced,
        "tv_bound": tv,
        "enhanced_tighter": enhanced <= tv,
        "ratio": ratio,
    }


# ---------------------------------------------------------------------------
# numerical lemma verification


def _haar_basis_stack(n):
    """All n^2 Haar basis images as an (n^2, n, n) array."""
    out = np.empty((n * n, n, n))
    idx = 0
    for r in range(n):
        for c in range(n):
            out[idx] = haar_basis_image(n, r, c)
            idx += 1
    return out


def check_wavelet_pair_counts(n_side):
    """For each adjacent pixel pair, count basis images non-constant on it.

    Returns the maximum count over all horizontally and vertically adjacent
    pairs; the bound to compare against is 6 * log2(N).
    """
    basis = _haar_basis_stack(n_side)
    horiz = (np.abs(basis[:, :, 1:] - basis[:, :, :-1]) > 1e-12).sum(axis=0)
    vert = (np.abs(basis[:, 1:, :] - basis[:, :-1, :]) > 1e-12).sum(axis=0)
    return int(max(horiz.max(), vert.max()))


def check_wavelet_gradient_l1(n_side):
    """Maximum anisotropic TV over all Haar basis images (bound: 8)."""
    basis = _haar_basis_stack(n_side)
    return max(tv_aniso(h) for h in basis)


def local_coherence_bound(k1, k2):
    """Pointwise bound min(1, 18 pi / max(|k1|, |k2|)) on the local coherence."""
    denom = max(abs(k1), abs(k2))
    if denom == 0:
        return 1.0
    return min(1.0, 18.0 * np.pi / denom)


def check_local_coherence(n_side):
    """Exhaustive Fourier-vs-Haar local coherence check.

    Returns (max_violation, coherence_grid) where max_violation is the
    largest excess of |<phi, h>| over the pointwise bound (<= 0 means pass).
    """
    n = n_side
    basis = _haar_basis_stack(n)
    coh = np.zeros((n, n))
    for h in basis:
        coh = np.maximum(coh, np.abs(dft2(h)))
    kvals = np.arange(-n // 2 + 1, n // 2 + 1)
    violation = -np.inf
    for k1 in kvals:
        for k2 in kvals:
            bound = local_coherence_bound(k1, k2)
            violation = max(violation, coh[k1 % n, k2 % n] - bound)
    return float(violation), coh


def coherence_envelope_l2(n_side):
    """l2 norm of the isotropic envelope min(1, 18 pi sqrt(2) / |k|)."""
    kvals = np.arange(-n_side // 2 + 1, n_side // 2 + 1)
    k1, k2 = np.meshgrid(kvals, kvals, indexing="ij")
    r = np.sqrt((k1**2 + k2**2).astype(float))
    with np.errstate(divide="ignore"):
        env = np.minimum(1.0, 18.0 * np.pi * np.sqrt(2.0) / r)
    env[r == 0] = 1.0
    return float(np.linalg.norm(env))


def fit_haar_decay_constant(n_side, trials, seed):
    """Empirical constant in |c_(k)| <= C * ||grad x||_1 / k for mean-zero x."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    ks = np.arange(1, n_side * n_side + 1)
    for _ in range(trials):
        x = rng.standard_normal((n_side, n_side))
        x -= x.mean()
        coeffs = np.sort(np.abs(haar2(x)).ravel())[::-1]
        worst = max(worst, float((coeffs * ks).max() / tv_aniso(x)))
    return worst


def gradient_operator_norm_sq(n_side, steps=500, seed=0):
    """Largest eigenvalue of grad^T grad by power iteration (bound: 8)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n_side, n_side))
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(steps):
        w = gradient_adjoint(gradient(v))
        lam = float(np.vdot(v, w).real)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
    return lam


def check_lemmas(n_side, trials=100, seed=0):
    """Run the verifiable wavelet/coherence/Sobolev properties at one size.

    Exhaustive checks require a power-of-two n_side <= 64.  Returns a dict of
    {name: {"passed": bool, "value": float, "bound": float}} plus the fitted
    decay constant.
    """
    if n_side < 2 or (n_side & (n_side - 1)) != 0:
        raise ValueError("n_side must be a power of two")
    if n_side > 64:
        raise ValueError("exhaustive checks are limited to n_side <= 64")
    rng = np.random.default_rng(seed)
    results = {}

    count = check_wavelet_pair_counts(n_side)
    bound = 6 * math.log2(n_side)
    results["wavelet_pair_count"] = {
        "passed": count <= bound,
        "value": float(count),
        "bound": float(bound),
    }

    grad_l1 = check_wavelet_gradient_l1(n_side)
    results["wavelet_gradient_l1"] = {
        "passed": grad_l1 <= 8.0 + 1e-9,
        "value": grad_l1,
        "bound": 8.0,
    }

    violation, _ = check_local_coherence(n_side)
    results["local_coherence"] = {
        "passed": violation <= 1e-9,
        "value": violation,
        "bound": 0.0,
    }

    env_l2 = coherence_envelope_l2(n_side)
    env_bound = math.sqrt(17200.0 + 502.0 * math.log2(n_side))
    results["coherence_envelope_l2"] = {
        "passed": env_l2 <= env_bound,
        "value": env_l2,
        "bound": env_bound,
    }

    c_fit = fit_haar_decay_constant(n_side, trials, seed)
    results["haar_decay_constant"] = {
        "passed": math.isfinite(c_fit) and c_fit > 0,
        "value": c_fit,
        "bound": math.inf,  # the universal constant is unknown; reported only
    }

    worst_ratio = 0.0
    for _ in range(trials):
        x = rng.standard_normal((n_side, n_side))
        x -= x.mean()
        worst_ratio = max(worst_ratio, np.linalg.norm(x) / tv_aniso(x))
    results["classical_sobolev"] = {
        "passed": worst_ratio <= 1.0,
        "value": worst_ratio,
        "bound": 1.0,
    }

    worst_lo = math.inf
    worst_hi = 0.0
    for _ in range(trials):
        x = rng.standard_normal((n_side, n_side))
        iso, aniso = tv_iso(x), tv_aniso(x)
        worst_lo = min(worst_lo, aniso / iso)
        worst_hi = max(worst_hi, aniso / iso)
    results["tv_equivalence"] = {
        "passed": worst_lo >= 1.0 - 1e-12 and worst_hi <= math.sqrt(2.0) + 1e-12,
        "value": worst_hi,
        "bound": math.sqrt(2.0),
    }

    norm_sq = gradient_operator_norm_sq(n_side)
    results["gradient_norm_sq"] = {
        "passed": norm_sq <= 8.0 + 1e-6,
        "value": norm_sq,
        "bound": 8.0,
    }
    return results

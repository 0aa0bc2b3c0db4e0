"""Fourier and Haar transforms, frequency masks, and measurement operators.

Frequencies live on the centered integer grid {-N/2+1, ..., N/2}^2.  A
frequency (k1, k2) maps to row k1 % N, column k2 % N of the unitary DFT
coefficient grid.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

__all__ = [
    "dft2",
    "dft2_inv",
    "haar2",
    "haar2_inv",
    "haar_basis_image",
    "FrequencyMask",
    "MeasurementOperator",
    "full_mask",
    "radial_mask",
    "variable_density",
    "variable_density_mask",
    "add_noise",
    "save_mask",
    "load_mask",
]


def dft2(img):
    """Unitary 2-D DFT (coefficients <img, phi_{k1,k2}> with 1/N scaling)."""
    return sfft.fft2(np.asarray(img), norm="ortho")


def dft2_inv(coeffs):
    """Inverse of :func:`dft2`."""
    return sfft.ifft2(np.asarray(coeffs), norm="ortho")


def freq_to_index(freqs, n_side):
    """Map centered frequencies (k1, k2) to DFT grid indices."""
    f = np.asarray(freqs, dtype=np.int64)
    return f[:, 0] % n_side, f[:, 1] % n_side


def _check_dyadic(n):
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError("Haar transform requires N to be a power of two, got %d" % n)


def haar2(img):
    """Orthonormal bivariate Haar coefficients of an N x N image, N = 2^n.

    The coefficient layout is pyramidal: after each level the averages occupy
    the top-left block and the three detail subbands fill the remainder.
    """
    c = np.array(img, dtype=complex)
    n = c.shape[0]
    if c.shape != (n, n):
        raise ValueError("expected a square image")
    _check_dyadic(n)
    size = n
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    while size > 1:
        a = c[:size, :size]
        # one orthonormal level along rows
        lo = (a[0::2, :] + a[1::2, :]) * inv_sqrt2
        hi = (a[0::2, :] - a[1::2, :]) * inv_sqrt2
        a[: size // 2, :] = lo
        a[size // 2 :, :] = hi
        # then along columns
        lo = (a[:, 0::2] + a[:, 1::2]) * inv_sqrt2
        hi = (a[:, 0::2] - a[:, 1::2]) * inv_sqrt2
        a[:, : size // 2] = lo
        a[:, size // 2 :] = hi
        size //= 2
    return c


def haar2_inv(coeffs):
    """Inverse (= adjoint) of :func:`haar2`."""
    c = np.array(coeffs, dtype=complex)
    n = c.shape[0]
    _check_dyadic(n)
    size = 2
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    while size <= n:
        a = c[:size, :size]
        lo = a[:, : size // 2].copy()
        hi = a[:, size // 2 :].copy()
        a[:, 0::2] = (lo + hi) * inv_sqrt2
        a[:, 1::2] = (lo - hi) * inv_sqrt2
        lo = a[: size // 2, :].copy()
        hi = a[size // 2 :, :].copy()
        a[0::2, :] = (lo + hi) * inv_sqrt2
        a[1::2, :] = (lo - hi) * inv_sqrt2
        size *= 2
    return c


def haar_basis_image(n_side, row, col):
    """The Haar basis image whose coefficient sits at (row, col)."""
    delta = np.zeros((n_side, n_side))
    delta[row, col] = 1.0
    return haar2_inv(delta).real


@dataclass
class FrequencyMask:
    """An ordered list of sampled frequencies (duplicates allowed)."""

    freqs: np.ndarray  # (m, 2) int array of centered frequencies
    n_side: int
    kind: str = "custom"
    seed: int = 0

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.int64).reshape(-1, 2)
        if len(self.freqs) < 1:
            raise ValueError("mask must contain at least one frequency")
        n = self.n_side
        lo, hi = -n // 2 + 1, n // 2
        if self.freqs.min() < lo or self.freqs.max() > hi:
            raise ValueError("frequencies out of range [%d, %d]" % (lo, hi))

    def __len__(self):
        return len(self.freqs)

    @property
    def sampling_rate(self):
        """Fraction of the N^2 grid covered (duplicates counted once)."""
        distinct = {tuple(f) for f in self.freqs}
        return len(distinct) / self.n_side**2


def full_mask(n_side):
    """Every frequency of the N x N grid exactly once."""
    ks = np.arange(-n_side // 2 + 1, n_side // 2 + 1)
    k1, k2 = np.meshgrid(ks, ks, indexing="ij")
    freqs = np.stack([k1.ravel(), k2.ravel()], axis=1)
    return FrequencyMask(freqs, n_side, kind="full")


def radial_mask(n_side, n_lines, angle_offset=0.0):
    """Radial-line sampling: n_lines lines through DC at angles i*pi/n_lines.

    Each line is rasterized by stepping both grid axes with nearest-integer
    rounding, then deduplicated.  Deterministic for fixed inputs.
    """
    if n_lines < 1:
        raise ValueError("need at least one line")
    n = n_side
    lo, hi = -n // 2 + 1, n // 2
    ks = np.arange(lo, hi + 1)
    seen = set()
    for i in range(n_lines):
        theta = angle_offset + i * np.pi / n_lines
        c, s = np.cos(theta), np.sin(theta)
        if abs(c) > 1e-12:
            k2 = np.rint(ks * (s / c)).astype(np.int64)
            ok = (k2 >= lo) & (k2 <= hi)
            seen.update(zip(ks[ok].tolist(), k2[ok].tolist()))
        if abs(s) > 1e-12:
            k1 = np.rint(ks * (c / s)).astype(np.int64)
            ok = (k1 >= lo) & (k1 <= hi)
            seen.update(zip(k1[ok].tolist(), ks[ok].tolist()))
    freqs = np.array(sorted(seen), dtype=np.int64)
    return FrequencyMask(freqs, n, kind="radial")


def variable_density(n_side, cap=1.0):
    """Inverse-square-law sampling density on the centered frequency grid.

    eta(k1, k2) = C_N * min(cap, 1 / (k1^2 + k2^2)), normalized to sum to 1.
    The cap resolves the singularity at DC.  Returns (eta, kvals) where eta is
    indexed by the positions of kvals = {-N/2+1, ..., N/2}.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    kvals = np.arange(-n_side // 2 + 1, n_side // 2 + 1)
    k1, k2 = np.meshgrid(kvals, kvals, indexing="ij")
    r2 = (k1**2 + k2**2).astype(float)
    with np.errstate(divide="ignore"):
        eta = np.minimum(cap, 1.0 / r2)
    eta[r2 == 0] = cap
    eta /= eta.sum()
    return eta, kvals


def variable_density_mask(n_side, m, cap=1.0, seed=0):
    """Draw m i.i.d. frequencies from the inverse-square-law density.

    Returns (mask, rho) where rho_j = eta(freq_j)^(-1/2) are the weights of
    the weighted-noise measurement model.  Duplicate draws are kept.
    """
    if m < 1:
        raise ValueError("m must be positive")
    eta, kvals = variable_density(n_side, cap)
    rng = np.random.default_rng(seed)
    flat = rng.choice(n_side * n_side, size=m, p=eta.ravel())
    i1, i2 = np.unravel_index(flat, (n_side, n_side))
    freqs = np.stack([kvals[i1], kvals[i2]], axis=1)
    rho = 1.0 / np.sqrt(eta[i1, i2])
    mask = FrequencyMask(freqs, n_side, kind="variable_density", seed=seed)
    return mask, rho


class MeasurementOperator:
    """Subsampled-Fourier forward/adjoint map with optional weights.

    forward(x)_j = rho_j * dft2(x)[freq_j]; the adjoint accumulates duplicate
    frequencies.  ``noise_radius`` is the radius of the measurement-residual
    ball used by the solvers (already the effective tau*sqrt(m) in the
    weighted model).
    """

    def __init__(self, mask, weights=None, noise_radius=0.0):
        self.mask = mask
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        if self.weights is not None:
            if len(self.weights) != len(mask):
                raise ValueError("weights length must match mask length")
            if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
                raise ValueError("weights must be positive and finite")
        if noise_radius < 0:
            raise ValueError("noise_radius must be nonnegative")
        self.noise_radius = float(noise_radius)
        self._i1, self._i2 = freq_to_index(mask.freqs, mask.n_side)

    @property
    def n_side(self):
        return self.mask.n_side

    @property
    def m(self):
        return len(self.mask)

    def forward(self, img):
        img = np.asarray(img)
        if img.shape != (self.n_side, self.n_side):
            raise ValueError("image size does not match the mask")
        y = dft2(img)[self._i1, self._i2]
        if self.weights is not None:
            y = y * self.weights
        return y

    def adjoint(self, y):
        y = np.asarray(y, dtype=complex)
        if y.shape != (self.m,):
            raise ValueError("measurement vector length does not match the mask")
        if self.weights is not None:
            y = y * self.weights
        grid = np.zeros((self.n_side, self.n_side), dtype=complex)
        np.add.at(grid, (self._i1, self._i2), y)
        return dft2_inv(grid)

    def frequency_multiplicity(self):
        """Diagonal of M* M in the Fourier domain (weights^2 summed per bin)."""
        w = np.ones(self.m) if self.weights is None else self.weights**2
        grid = np.zeros((self.n_side, self.n_side))
        np.add.at(grid, (self._i1, self._i2), w)
        return grid


def add_noise(y, std, seed=0):
    """Complex Gaussian contamination y + (std/sqrt(2)) * (g1 + i*g2)."""
    if std < 0:
        raise ValueError("std must be nonnegative")
    y = np.asarray(y, dtype=complex)
    if std == 0:
        return y.copy()
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    return y + std / np.sqrt(2.0) * g


def save_mask(path, mask, weights=None):
    """Write a mask file: header 'N m kind seed', then 'k1 k2 [rho]' rows."""
    with open(path, "w") as fh:
        fh.write("%d %d %s %d\n" % (mask.n_side, len(mask), mask.kind, mask.seed))
        for j, (k1, k2) in enumerate(mask.freqs):
            if weights is None:
                fh.write("%d %d\n" % (k1, k2))
            else:
                fh.write("%d %d %s\n" % (k1, k2, repr(float(weights[j]))))


def load_mask(path):
    """Read a mask file written by :func:`save_mask`. Returns (mask, weights)."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError("malformed mask header in %s" % path)
        n_side, m, kind, seed = int(header[0]), int(header[1]), header[2], int(header[3])
        freqs = np.empty((m, 2), dtype=np.int64)
        weights = None
        for j in range(m):
            parts = fh.readline().split()
            if len(parts) not in (2, 3):
                raise ValueError("malformed mask row %d in %s" % (j, path))
            freqs[j] = (int(parts[0]), int(parts[1]))
            if len(parts) == 3:
                if weights is None:
                    weights = np.empty(m)
                weights[j] = float(parts[2])
    mask = FrequencyMask(freqs, n_side, kind=kind, seed=seed)
    return mask, weights

"""Discrete gradients, TV seminorms, and the proximal/projection primitives.

Images are plain N x N numpy arrays (complex or real).  Gradient fields are
N x N x 2 arrays: channel 0 holds the forward differences along axis 0
(rows), channel 1 along axis 1 (columns).  The convention zero-pads the last
row of channel 0 and the last column of channel 1, so the field has the same
shape as the image in each channel.
"""

import numpy as np

__all__ = [
    "gradient",
    "gradient_adjoint",
    "tv_aniso",
    "tv_iso",
    "enhanced_tv",
    "shrink",
    "project_ball",
    "sparse_truncate",
]


def gradient(img):
    """Forward-difference gradient of a 2-D image.

    g[j, k, 0] = img[j+1, k] - img[j, k]  (zero on the last row)
    g[j, k, 1] = img[j, k+1] - img[j, k]  (zero on the last column)
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("expected a 2-D image, got shape %s" % (img.shape,))
    g = np.zeros(img.shape + (2,), dtype=np.result_type(img.dtype, np.float64))
    g[:-1, :, 0] = img[1:, :] - img[:-1, :]
    g[:, :-1, 1] = img[:, 1:] - img[:, :-1]
    return g


def gradient_adjoint(g):
    """Exact adjoint of :func:`gradient`: <grad(x), g> = <x, gradient_adjoint(g)>.

    The last row of channel 0 and last column of channel 1 never enter (they
    are padding in the forward map).
    """
    g = np.asarray(g)
    if g.ndim != 3 or g.shape[2] != 2:
        raise ValueError("expected an N x N x 2 gradient field")
    gx, gy = g[..., 0], g[..., 1]
    out = np.zeros(g.shape[:2], dtype=np.result_type(g.dtype, np.float64))
    # adjoint of the row difference: out[j] += gx[j-1] - gx[j], gx row N-1 ignored
    out[:-1, :] -= gx[:-1, :]
    out[1:, :] += gx[:-1, :]
    # adjoint of the column difference
    out[:, :-1] -= gy[:, :-1]
    out[:, 1:] += gy[:, :-1]
    return out


def tv_aniso(img):
    """Anisotropic TV seminorm: entrywise l1 norm of the gradient field."""
    return float(np.abs(gradient(img)).sum())


def tv_iso(img):
    """Isotropic TV seminorm: sum of pointwise Euclidean gradient magnitudes."""
    g = gradient(img)
    return float(np.sqrt(np.abs(g[..., 0]) ** 2 + np.abs(g[..., 1]) ** 2).sum())


def enhanced_tv(img, alpha):
    """Difference-of-convex regularizer ||grad x||_1 - (alpha/2) ||grad x||_2^2."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    g = gradient(img)
    l1 = np.abs(g).sum()
    sq = (np.abs(g) ** 2).sum()
    return float(l1 - 0.5 * alpha * sq)


def shrink(v, t):
    """Complex soft thresholding, the proximal map of t * ||.||_1.

    Each entry z maps to (z/|z|) * max(|z| - t, 0), with 0 at z = 0.
    """
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v)
    mag = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.maximum(mag - t, 0.0) / mag
    scale = np.where(mag > 0, scale, 0.0)
    return v * scale


def project_ball(v, center, radius):
    """Euclidean projection of v onto the closed ball B(center, radius)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    v = np.asarray(v)
    center = np.asarray(center)
    r = v - center
    nrm = np.linalg.norm(r.ravel())
    if nrm <= radius:
        return v.copy()
    if nrm == 0:
        return center.astype(v.dtype, copy=True)
    return center + r * (radius / nrm)


def sparse_truncate(g, s):
    """Keep the s largest-magnitude entries of a gradient field, zero the rest.

    Ties are broken lexicographically by (channel, row, column).  Returns the
    truncated field and the kept support as a set of (row, col, channel)
    triples.
    """
    g = np.asarray(g)
    if g.ndim != 3 or g.shape[2] != 2:
        raise ValueError("expected an N x N x 2 gradient field")
    total = g.size
    if not 1 <= s <= total:
        raise ValueError("s must lie in [1, 2*N^2]")
    # channel-major flattening so that a stable sort on -|.| realizes the
    # (channel, row, col) tie-break
    flat = np.moveaxis(g, 2, 0).reshape(2, -1)
    mags = np.abs(flat).ravel()
    order = np.argsort(-mags, kind="stable")
    keep = order[:s]
    out_flat = np.zeros_like(flat.reshape(-1))
    out_flat[keep] = flat.reshape(-1)[keep]
    n = g.shape[0]
    ncols = g.shape[1]
    support = set()
    for idx in keep:
        ch, rest = divmod(int(idx), n * ncols)
        j, k = divmod(rest, ncols)
        support.add((j, k, ch))
    out = np.moveaxis(out_flat.reshape(2, n, ncols), 0, 2)
    return out, support

"""Test-image generators and portable graymap (PGM) image I/O.

Generated images are real float arrays with intensities in [0, 1] and are
deterministic (no randomness, pure arithmetic).
"""

import numpy as np

__all__ = [
    "shepp_logan",
    "synthetic_image",
    "strip_image",
    "load_image",
    "save_image",
]

# (intensity, semi-axis a, semi-axis b, x0, y0, angle in degrees)
_SHEPP_LOGAN = [
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
]

_MODIFIED_INTENSITIES = [1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]


def shepp_logan(n_side, modified=False):
    """The 10-ellipse Shepp-Logan phantom on an N x N grid, values in [0, 1].

    ``modified`` selects the high-contrast intensity variant used for
    visualization.
    """
    if n_side < 16:
        raise ValueError("phantom needs n_side >= 16")
    axis = (np.arange(n_side) - (n_side - 1) / 2.0) / ((n_side - 1) / 2.0)
    y, x = np.meshgrid(-axis, axis, indexing="ij")  # row 0 is the top
    img = np.zeros((n_side, n_side))
    for idx, (value, a, b, x0, y0, deg) in enumerate(_SHEPP_LOGAN):
        if modified:
            value = _MODIFIED_INTENSITIES[idx]
        phi = np.deg2rad(deg)
        xr = (x - x0) * np.cos(phi) + (y - y0) * np.sin(phi)
        yr = -(x - x0) * np.sin(phi) + (y - y0) * np.cos(phi)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return np.clip(img, 0.0, 1.0)


def synthetic_image(kind, n_side):
    """Deterministic piecewise-constant test images.

    kind "circle": a filled unit-intensity disk of radius N/4, centered.
    kind "shapes": disjoint rectangle, disk, and triangle at fixed
    fractional coordinates with distinct intensities.
    """
    n = n_side
    rows, cols = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    if kind == "circle":
        c = (n - 1) / 2.0
        img = ((rows - c) ** 2 + (cols - c) ** 2 <= (n / 4.0) ** 2).astype(float)
        return img
    if kind == "shapes":
        img = np.zeros((n, n))
        # rectangle
        img[int(0.12 * n) : int(0.38 * n), int(0.10 * n) : int(0.45 * n)] = 0.5
        # disk
        cy, cx, r = 0.30 * n, 0.72 * n, 0.14 * n
        img[(rows - cy) ** 2 + (cols - cx) ** 2 <= r**2] = 1.0
        # axis-aligned right triangle in the lower half
        apex_row, base_row = int(0.55 * n), int(0.90 * n)
        left_col = int(0.20 * n)
        height = base_row - apex_row
        tri = (
            (rows >= apex_row)
            & (rows <= base_row)
            & (cols >= left_col)
            & (cols <= left_col + (rows - apex_row) * 1.2)
        )
        img[tri & (rows <= apex_row + height)] = 0.75
        return img
    raise ValueError("unknown synthetic image kind %r" % (kind,))


def strip_image(n_side, n_strips=8, low=0.1, high=0.9):
    """Vertical strips alternating between two intensity levels."""
    cols = np.arange(n_side)
    band = (cols * n_strips // n_side) % 2
    img = np.where(band == 0, low, high)
    return np.tile(img, (n_side, 1)).astype(float)


def save_image(img, path, bits=8):
    """Write the real part of an image as an 8- or 16-bit binary PGM (P5).

    Values are clamped to [0, 1] and quantized to the full bit range.
    """
    if bits not in (8, 16):
        raise ValueError("only 8- and 16-bit graymaps are supported")
    data = np.clip(np.asarray(img).real, 0.0, 1.0)
    maxval = 2**bits - 1
    quant = np.rint(data * maxval).astype(np.uint16 if bits == 16 else np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n%d\n" % (data.shape[1], data.shape[0], maxval))
        if bits == 16:
            fh.write(quant.astype(">u2").tobytes())
        else:
            fh.write(quant.tobytes())


def _read_tokens(fh, count):
    tokens = []
    while len(tokens) < count:
        line = fh.readline()
        if not line:
            raise ValueError("unexpected end of graymap header")
        line = line.split(b"#")[0]
        tokens.extend(line.split())
    return tokens


def load_image(path):
    """Read an 8- or 16-bit PGM (P2 ascii or P5 binary), scaled to [0, 1]."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic not in (b"P2", b"P5"):
            raise ValueError("unsupported graymap magic %r in %s" % (magic, path))
        width, height, maxval = (int(t) for t in _read_tokens(fh, 3))
        if maxval not in (255, 65535):
            raise ValueError("unsupported graymap depth %d (want 8 or 16 bit)" % maxval)
        n_pix = width * height
        if magic == b"P5":
            dtype = np.dtype(">u2") if maxval == 65535 else np.dtype(np.uint8)
            raw = fh.read(n_pix * dtype.itemsize)
            if len(raw) != n_pix * dtype.itemsize:
                raise ValueError("truncated graymap payload in %s" % path)
            data = np.frombuffer(raw, dtype=dtype)
        else:
            tokens = fh.read().split()
            if len(tokens) < n_pix:
                raise ValueError("truncated ascii graymap in %s" % path)
            data = np.array([int(t) for t in tokens[:n_pix]])
        if data.max(initial=0) > maxval:
            raise ValueError("pixel value exceeds declared maximum in %s" % path)
    return data.reshape(height, width).astype(float) / maxval

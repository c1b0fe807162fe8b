""" Single-camera kernels: debayer, histogram and rectification. """

import numpy as np

from visionsafety.kernels import Histogram, MonoImage


def debayer_to_mono(raw):
    """ Convert a Bayer mosaic to grayscale by cell-mean luminance.

    Every 2x2 cell is replaced by the mean of its four samples,
    rounded half-up. The Bayer pattern does not change the mean.

    :param raw: RawImage.
    :returns: MonoImage with the same size and bit depth.
    """
    samples = raw.samples.astype(np.int64)
    height, width = samples.shape
    cells = samples.reshape(height // 2, 2, width // 2, 2).sum(axis=(1, 3))
    means = (cells + 2) // 4
    mono = np.repeat(np.repeat(means, 2, axis=0), 2, axis=1)
    return MonoImage(mono, raw.bit_depth)


def histogram(image):
    """ Count pixels per intensity level.

    :param image: MonoImage or RawImage.
    :returns: Histogram with 2^bit_depth levels.
    """
    counts = np.bincount(image.samples.ravel(), minlength=2 ** image.bit_depth)
    return Histogram(counts)


def rectify(image, calib):
    """ Undistort with the one-coefficient radial model.

    Each output pixel samples the distorted source at
    p * (1 + k1 * r^2) about the principal point, in normalized
    coordinates, with bilinear interpolation. Samples falling
    outside the source are 0.

    :param image: MonoImage.
    :param calib: CalibrationInfo.
    :returns: Rectified MonoImage.
    """
    if calib.radial_k1 == 0:
        return MonoImage(image.samples, image.bit_depth)
    source = image.samples.astype(np.float64)
    height, width = source.shape
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
    f = calib.focal_length
    x = (cols - calib.cx) / f
    y = (rows - calib.cy) / f
    scale = 1.0 + calib.radial_k1 * (x * x + y * y)
    su = calib.cx + f * x * scale
    sv = calib.cy + f * y * scale
    inside = (su >= 0) & (su <= width - 1) & (sv >= 0) & (sv <= height - 1)
    su = np.clip(su, 0, width - 1)
    sv = np.clip(sv, 0, height - 1)
    u0 = np.minimum(np.floor(su).astype(np.int64), max(width - 2, 0))
    v0 = np.minimum(np.floor(sv).astype(np.int64), max(height - 2, 0))
    u1 = np.minimum(u0 + 1, width - 1)
    v1 = np.minimum(v0 + 1, height - 1)
    du = su - u0
    dv = sv - v0
    value = ((1 - du) * (1 - dv) * source[v0, u0] + du * (1 - dv) * source[v0, u1] +
             (1 - du) * dv * source[v1, u0] + du * dv * source[v1, u1])
    result = np.where(inside, np.floor(value + 0.5), 0)
    result = np.clip(result, 0, image.max_level).astype(np.int64)
    return MonoImage(result, image.bit_depth)

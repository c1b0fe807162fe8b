""" Stereo kernels: block matching, reprojection and region filtering. """

import logging

import numpy as np

from visionsafety.kernels import (
    INVALID, DimensionMismatch, DisparityImage, PointCloud)

_LOGGER = logging.getLogger(__name__)

DEFAULT_BLOCK = 7
DEFAULT_MAX_DISPARITY = 40


def _window_sums(values, radius):
    """ Sum of every (2r+1)x(2r+1) window centered on an interior pixel.

    :param values: 2D integer array.
    :param radius: Window radius.
    :returns: Array of shape (h - 2r, w - 2r).
    """
    integral = np.zeros((values.shape[0] + 1, values.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    size = 2 * radius + 1
    return (integral[size:, size:] - integral[:-size, size:] -
            integral[size:, :-size] + integral[:-size, :-size])


def disparity(left, right, block=DEFAULT_BLOCK, max_disparity=DEFAULT_MAX_DISPARITY):
    """ Winner-take-all SAD block matching along rows.

    The left pixel (u, v) is compared with the right pixel (u - d, v).
    Candidates whose right window leaves the image are skipped, ties
    resolve to the smallest disparity and the border band of block/2
    pixels is INVALID.

    :param left: Rectified left MonoImage.
    :param right: Rectified right MonoImage.
    :param block: Odd window size, at least 3.
    :param max_disparity: Largest disparity searched.
    :returns: DisparityImage.
    """
    if left.shape != right.shape or left.bit_depth != right.bit_depth:
        raise DimensionMismatch('stereo pair differs: {!r} vs {!r}'.format(left, right))
    if block < 3 or block % 2 == 0:
        raise ValueError('block size must be odd and at least 3, got {}'.format(block))
    if max_disparity < 0:
        raise ValueError('max disparity must be non-negative')
    height, width = left.shape
    radius = block // 2
    values = np.full((height, width), INVALID, dtype=np.int32)
    if height < block or width < block:
        return DisparityImage(values, max_disparity)

    lhs = left.samples.astype(np.int64)
    rhs = right.samples.astype(np.int64)
    # Unreachable candidates keep the sentinel cost, so argmin never picks them.
    sentinel = np.iinfo(np.int64).max
    costs = np.full((max_disparity + 1, height - 2 * radius, width - 2 * radius),
                    sentinel, dtype=np.int64)
    for d in range(min(max_disparity, width - block) + 1):
        diff = np.zeros((height, width), dtype=np.int64)
        diff[:, d:] = np.abs(lhs[:, d:] - rhs[:, :width - d])
        sums = _window_sums(diff, radius)
        # interior column index c maps to u = c + radius; need u - d - radius >= 0
        costs[d, :, d:] = sums[:, d:]
    best = np.argmin(costs, axis=0)
    values[radius:height - radius, radius:width - radius] = best
    _LOGGER.debug("Matched %dx%d pair, block %d, max disparity %d",
                  width, height, block, max_disparity)
    return DisparityImage(values, max_disparity)


def reproject(disp, calib, reference=None):
    """ Convert disparities to 3D points in the left-camera frame.

    z = f * B / d, x = (u - cx) * z / f, y = (v - cy) * z / f.
    Pixels with d = 0 or INVALID emit no point.

    :param disp: DisparityImage.
    :param calib: CalibrationInfo.
    :param reference: Optional MonoImage supplying point intensities.
    :returns: PointCloud in row-major pixel order.
    """
    values = disp.values
    if reference is not None and reference.shape != values.shape:
        raise DimensionMismatch('reference image {!r} does not match {!r}'.format(
            reference, disp))
    rows, cols = np.nonzero(values > 0)
    d = values[rows, cols].astype(np.float64)
    f = calib.focal_length
    z = f * calib.baseline / d
    x = (cols - calib.cx) * z / f
    y = (rows - calib.cy) * z / f
    intensities = None
    if reference is not None:
        intensities = reference.samples[rows, cols]
    return PointCloud(np.column_stack((x, y, z)), intensities)


def in_area(cloud, region):
    """ Keep the points inside an axis-aligned box, bounds inclusive.

    :param cloud: PointCloud.
    :param region: Region with min_corner and max_corner.
    :returns: PointCloud subset, order preserved.
    """
    points = cloud.points
    lower = np.asarray(region.min_corner, dtype=np.float64)
    upper = np.asarray(region.max_corner, dtype=np.float64)
    mask = np.all(points >= lower, axis=1) & np.all(points <= upper, axis=1)
    intensities = None
    if cloud.intensities is not None:
        intensities = cloud.intensities[mask]
    return PointCloud(points[mask], intensities)

""" Image types shared by the vision kernels.

Rasters are stored as read-only numpy arrays, so a value handed
to the frame store can never change underneath a rule.
"""

from collections import namedtuple

import numpy as np


BAYER_PATTERNS = ('RGGB', 'BGGR', 'GRBG', 'GBRG')
RAW_MIN_BIT_DEPTH = 8
MAX_BIT_DEPTH = 16
INVALID = -1


class KernelError(ValueError):
    """ Base class for vision kernel errors. """


class DimensionMismatch(KernelError):
    """ Images disagree in size or bit depth. """


class InvalidImage(KernelError):
    """ Raster violates its invariants. """


def _readonly(array, dtype):
    """ Copy into a read-only array.

    :param array: Source array.
    :param dtype: Target dtype.
    :returns: Read-only copy.
    """
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class MonoImage(object):
    """ Grayscale raster with an explicit bit depth. """

    def __init__(self, samples, bit_depth=8):
        """ Initialize image.

        :param samples: 2D array of intensities, row-major.
        :param bit_depth: Bits per sample (1-16).
        """
        samples = np.asarray(samples)
        if not 1 <= bit_depth <= MAX_BIT_DEPTH:
            raise InvalidImage('bit depth {} out of range'.format(bit_depth))
        if samples.ndim != 2 or samples.size == 0:
            raise InvalidImage('samples must be a non-empty 2D array')
        if not np.issubdtype(samples.dtype, np.integer):
            raise InvalidImage('samples must be integers, got {}'.format(samples.dtype))
        if samples.min() < 0 or samples.max() >= 2 ** bit_depth:
            raise InvalidImage('samples outside [0, {}]'.format(2 ** bit_depth - 1))
        self._samples = _readonly(samples, np.uint16)
        self._bit_depth = int(bit_depth)

    @property
    def samples(self):
        """ Read-only sample array. """
        return self._samples

    @property
    def bit_depth(self):
        """ Bits per sample. """
        return self._bit_depth

    @property
    def max_level(self):
        """ Highest representable intensity. """
        return 2 ** self._bit_depth - 1

    @property
    def width(self):
        """ Width in pixels. """
        return self._samples.shape[1]

    @property
    def height(self):
        """ Height in pixels. """
        return self._samples.shape[0]

    @property
    def shape(self):
        """ (height, width) tuple. """
        return self._samples.shape

    def __eq__(self, other):
        return (type(self) is type(other) and
                self._bit_depth == other.bit_depth and
                np.array_equal(self._samples, other.samples))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __repr__(self):
        return '{}({}x{}, {} bit)'.format(
            type(self).__name__, self.width, self.height, self._bit_depth)


class RawImage(MonoImage):
    """ Single-sensor Bayer mosaic. """

    def __init__(self, samples, bit_depth=8, bayer_pattern='RGGB'):
        """ Initialize raw image.

        :param samples: 2D array of sensor samples.
        :param bit_depth: Bits per sample (8-16).
        :param bayer_pattern: One of RGGB, BGGR, GRBG or GBRG.
        """
        if not RAW_MIN_BIT_DEPTH <= bit_depth <= MAX_BIT_DEPTH:
            raise InvalidImage('raw bit depth {} out of range'.format(bit_depth))
        if bayer_pattern not in BAYER_PATTERNS:
            raise InvalidImage('unknown Bayer pattern {}'.format(bayer_pattern))
        super(RawImage, self).__init__(samples, bit_depth)
        if self.width % 2 or self.height % 2:
            raise InvalidImage('Bayer mosaic needs even dimensions, got {}x{}'.format(
                self.width, self.height))
        self._bayer_pattern = bayer_pattern

    @property
    def bayer_pattern(self):
        """ Mosaic layout of the top-left 2x2 cell. """
        return self._bayer_pattern

    def __eq__(self, other):
        return (super(RawImage, self).__eq__(other) and
                self._bayer_pattern == other.bayer_pattern)


class Histogram(object):
    """ Per-level pixel counts. """

    def __init__(self, counts):
        """ Initialize histogram.

        :param counts: One count per intensity level.
        """
        counts = np.asarray(counts)
        if counts.ndim != 1 or counts.size == 0:
            raise InvalidImage('histogram counts must be a non-empty vector')
        if counts.min() < 0:
            raise InvalidImage('histogram counts must be non-negative')
        self._counts = _readonly(counts, np.int64)
        self._total = int(self._counts.sum())

    @property
    def counts(self):
        """ Read-only count per level. """
        return self._counts

    @property
    def levels(self):
        """ Number of intensity levels. """
        return self._counts.size

    @property
    def total(self):
        """ Number of pixels counted. """
        return self._total

    @property
    def occupied(self):
        """ Levels holding at least one pixel, ascending. """
        return np.flatnonzero(self._counts)

    def __eq__(self, other):
        return isinstance(other, Histogram) and np.array_equal(self._counts, other.counts)

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __repr__(self):
        return 'Histogram({} levels, {} pixels)'.format(self.levels, self._total)


class DisparityImage(object):
    """ Per-pixel horizontal disparity, INVALID where unknown. """

    def __init__(self, values, max_disparity):
        """ Initialize disparity image.

        :param values: 2D integer array of disparities or INVALID.
        :param max_disparity: Largest disparity searched.
        """
        values = np.asarray(values)
        if values.ndim != 2:
            raise InvalidImage('disparity values must be a 2D array')
        valid = values[values != INVALID]
        if valid.size and (valid.min() < 0 or valid.max() > max_disparity):
            raise InvalidImage('disparity outside [0, {}]'.format(max_disparity))
        self._values = _readonly(values, np.int32)
        self._max_disparity = int(max_disparity)

    @property
    def values(self):
        """ Read-only disparity array. """
        return self._values

    @property
    def max_disparity(self):
        """ Largest disparity searched. """
        return self._max_disparity

    @property
    def valid(self):
        """ Mask of pixels holding a disparity. """
        return self._values != INVALID

    @property
    def shape(self):
        """ (height, width) tuple. """
        return self._values.shape

    def __eq__(self, other):
        return (isinstance(other, DisparityImage) and
                self._max_disparity == other.max_disparity and
                np.array_equal(self._values, other.values))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __repr__(self):
        return 'DisparityImage({}x{}, max {})'.format(
            self.shape[1], self.shape[0], self._max_disparity)


class PointCloud(object):
    """ 3D points in the left-camera frame (x right, y down, z forward). """

    def __init__(self, points, intensities=None):
        """ Initialize point cloud.

        :param points: (N, 3) array of coordinates in meters.
        :param intensities: Optional (N,) array of reference intensities.
        """
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if points.size and points[:, 2].min() <= 0:
            raise InvalidImage('point cloud holds points behind the camera')
        if intensities is not None:
            intensities = np.asarray(intensities)
            if intensities.shape != (points.shape[0],):
                raise InvalidImage('one intensity per point required')
            intensities = _readonly(intensities, np.uint16)
        self._points = _readonly(points, np.float64)
        self._intensities = intensities

    @property
    def points(self):
        """ Read-only (N, 3) coordinate array. """
        return self._points

    @property
    def intensities(self):
        """ Read-only intensities, or None. """
        return self._intensities

    def __len__(self):
        return self._points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return False
        if (self._intensities is None) != (other.intensities is None):
            return False
        return (np.array_equal(self._points, other.points) and
                (self._intensities is None or
                 np.array_equal(self._intensities, other.intensities)))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __repr__(self):
        return 'PointCloud({} points)'.format(len(self))


class CalibrationInfo(namedtuple('CalibrationInfo', 'focal_length principal_point baseline '
                                                    'radial_k1 image_size')):
    """ Pinhole stereo calibration shared by both cameras. """

    __slots__ = ()

    def __new__(cls, focal_length=300.0, principal_point=(160.0, 120.0), baseline=0.12,
                radial_k1=0.0, image_size=(320, 240)):
        """ Validate and build calibration.

        :param focal_length: Focal length in pixels.
        :param principal_point: (cx, cy) in pixels.
        :param baseline: Distance between the optical centers in meters.
        :param radial_k1: One-coefficient radial distortion, 0 is ideal.
        :param image_size: (width, height) in pixels.
        """
        if focal_length <= 0:
            raise ValueError('focal length must be positive')
        if baseline <= 0:
            raise ValueError('baseline must be positive')
        cx, cy = principal_point
        width, height = image_size
        if width <= 0 or height <= 0:
            raise ValueError('image size must be positive')
        return super(CalibrationInfo, cls).__new__(
            cls, float(focal_length), (float(cx), float(cy)), float(baseline),
            float(radial_k1), (int(width), int(height)))

    @property
    def cx(self):
        """ Principal point column. """
        return self.principal_point[0]

    @property
    def cy(self):
        """ Principal point row. """
        return self.principal_point[1]

    @classmethod
    def from_dict(cls, data):
        """ Build calibration from a configuration mapping.

        :param data: Mapping with calibration keys.
        :returns: CalibrationInfo.
        """
        known = set(cls._fields)
        unknown = set(data) - known
        if unknown:
            raise ValueError('unknown calibration keys: {}'.format(', '.join(sorted(unknown))))
        return cls(**data)


DEFAULT_CALIBRATION = CalibrationInfo()

""" Semantic types of rule expressions. """

from dataclasses import dataclass
from typing import Optional

from visionsafety.pipeline import DISPARITY_IMAGE, MONO_IMAGE, POINT_CLOUD, RAW_IMAGE

# Scalar dimensions. None is a plain number and unifies with anything.
COUNT = 'count'
LEVEL = 'level'
RATIO = 'ratio'
PIXEL = 'pixel'
DIMENSIONS = (COUNT, LEVEL, RATIO, PIXEL)

# pixel is the unit suffix `p`; it reads as either a count or a level
_PIXEL_UNIFIES = (COUNT, LEVEL, PIXEL)


@dataclass(frozen=True)
class SemanticType:
    kind: str
    dimension: Optional[str] = None

    @property
    def is_scalar(self):
        return self.kind == 'ScalarT'

    def __str__(self):
        if self.kind in ('ScalarT', 'SeriesT'):
            return '{}({})'.format(self.kind, self.dimension or 'number')
        return self.kind


RAW_IMAGE_T = SemanticType('RawImageT')
MONO_IMAGE_T = SemanticType('MonoImageT')
DISPARITY_IMAGE_T = SemanticType('DisparityImageT')
HISTOGRAM_T = SemanticType('HistogramT')
SERIES_T = SemanticType('SeriesT', COUNT)
POINT_CLOUD_T = SemanticType('PointCloudT')
REGION_T = SemanticType('RegionT')
BOOLEAN_T = SemanticType('BooleanT')

PORT_TYPES = {
    RAW_IMAGE: RAW_IMAGE_T,
    MONO_IMAGE: MONO_IMAGE_T,
    DISPARITY_IMAGE: DISPARITY_IMAGE_T,
    POINT_CLOUD: POINT_CLOUD_T,
}


def scalar(dimension=None):
    """ Scalar type of a dimension.

    :param dimension: One of DIMENSIONS, or None for a plain number.
    :returns: SemanticType.
    """
    if dimension is not None and dimension not in DIMENSIONS:
        raise ValueError('unknown dimension {}'.format(dimension))
    return SemanticType('ScalarT', dimension)


def unifiable(first, second):
    """ Can two dimensions be compared or added? """
    if first is None or second is None or first == second:
        return True
    if PIXEL in (first, second):
        other = second if first == PIXEL else first
        return other in _PIXEL_UNIFIES
    return False


def unify(first, second):
    """ Common dimension of two unifiable dimensions.

    pixel yields to count or level; a plain number yields to anything.

    :param first: Dimension or None.
    :param second: Dimension or None.
    :returns: Dimension or None.
    """
    if not unifiable(first, second):
        raise ValueError('{} does not unify with {}'.format(first, second))
    if first is None:
        return second
    if second is None or first == second:
        return first
    return second if first == PIXEL else first

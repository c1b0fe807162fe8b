""" Synthetic stereo scenes and lens fault injection.

A scene is a textured ground plane, a distant textured backdrop
and optionally the landmark: a bright square plate with a dark
cross, facing the cameras. Both cameras look along +z, the right
one displaced by the calibrated baseline along +x, so every
surface point lands at disparity f * B / z.

Textures are smooth value noise attached to the surfaces, so both
cameras see the same pattern at the right offset.
"""

import logging
import math
import os
from collections import namedtuple
from fractions import Fraction

import numpy as np

from visionsafety.kernels import RAW_MIN_BIT_DEPTH, MAX_BIT_DEPTH, RawImage
from visionsafety.kernels.pgm import write_image
from visionsafety.pipeline import LEFT, RIGHT
from visionsafety.pipeline.config import load_calibration, load_yaml

_LOGGER = logging.getLogger(__name__)

# Fault kinds.
COVER = 'cover'
OVEREXPOSE = 'overexpose'
PARTIAL_COVER = 'partial_cover'
FAULT_KINDS = (COVER, OVEREXPOSE, PARTIAL_COVER)

COVER_LEVEL = 2
DEFAULT_GAIN = 4.0
DEFAULT_OFFSET = 1.0

# Texture ranges as fractions of full scale, and cell sizes in meters.
LANDMARK_RANGE = (0.80, 0.98)
CROSS_RANGE = (0.01, 0.07)
GROUND_RANGE = (0.15, 0.75)
BACKDROP_RANGE = (0.25, 0.65)
LANDMARK_CELL = 0.01
GROUND_CELL = 0.04
BACKDROP_CELL = 0.25
CELL_OFFSET = 0.25

# Surface salts for the texture hash.
_BACKDROP, _GROUND, _PLATE, _CROSS = range(4)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_ROW = np.uint64(0xD6E8FEB86659FD93)

SCENE_KEYS = ('width', 'height', 'bit_depth', 'seed', 'noise', 'landmark',
              'ground_height', 'backdrop_distance', 'bayer_pattern', 'faults')


class SceneError(ValueError):
    """ Base class for scene errors. """


class FrustumViolation(SceneError):
    """ Landmark not fully visible in both cameras. """


class InvalidFault(SceneError):
    """ Fault specification outside its declared ranges. """


class Landmark(namedtuple('Landmark', 'side center cross_width')):
    """ Square plate facing the cameras, with a centered cross. """

    __slots__ = ()

    def __new__(cls, side=0.3, center=(0.0, 0.25, 1.5), cross_width=0.03):
        """ Validate and build landmark.

        :param side: Edge length in meters.
        :param center: (x, y, z) of the plate center, left-camera frame.
        :param cross_width: Width of the cross arms in meters.
        """
        center = tuple(float(value) for value in center)
        if len(center) != 3:
            raise SceneError('landmark center needs three coordinates')
        if side <= 0:
            raise SceneError('landmark side must be positive')
        if center[2] <= 0:
            raise SceneError('landmark must be in front of the cameras')
        if not 0 < cross_width < side:
            raise SceneError('cross width must be positive and below the side')
        return super(Landmark, cls).__new__(cls, float(side), center, float(cross_width))


class SceneConfig(namedtuple('SceneConfig', 'calibration bit_depth landmark seed noise '
                                            'ground_height backdrop_distance bayer_pattern '
                                            'faults')):
    """ Synthetic scene parameters. """

    __slots__ = ()

    def __new__(cls, calibration, bit_depth=8, landmark=Landmark(), seed=0, noise=0,
                ground_height=0.5, backdrop_distance=12.0, bayer_pattern='RGGB', faults=()):
        """ Validate and build scene configuration.

        :param calibration: CalibrationInfo, gives image size and projection.
        :param bit_depth: Sensor bits (8-16).
        :param landmark: Landmark, or None for a scene without it.
        :param seed: Texture and noise seed.
        :param noise: Per-sample noise amplitude in levels.
        :param ground_height: Camera height above the ground plane in meters.
        :param backdrop_distance: Depth of the backdrop plane in meters.
        :param bayer_pattern: Mosaic layout of the rendered raw images.
        :param faults: FaultSpec sequence applied by `synthesize`.
        """
        if not RAW_MIN_BIT_DEPTH <= bit_depth <= MAX_BIT_DEPTH:
            raise SceneError('bit depth {} out of range'.format(bit_depth))
        if seed < 0 or noise < 0:
            raise SceneError('seed and noise must be non-negative')
        if ground_height <= 0 or backdrop_distance <= 0:
            raise SceneError('ground height and backdrop distance must be positive')
        cfg = super(SceneConfig, cls).__new__(
            cls, calibration, int(bit_depth), landmark, int(seed), int(noise),
            float(ground_height), float(backdrop_distance), bayer_pattern, tuple(faults))
        if landmark is not None:
            _check_frustum(cfg)
        return cfg

    @property
    def image_size(self):
        """ (width, height) from the calibration. """
        return self.calibration.image_size

    def replace(self, **changes):
        """ Validated copy with some fields changed. """
        fields = self._asdict()
        fields.update(changes)
        return SceneConfig(**fields)


class FaultSpec(namedtuple('FaultSpec', 'kind target fraction gain offset seed')):
    """ Lens fault on one camera. """

    __slots__ = ()

    def __new__(cls, kind, target, fraction=None, gain=DEFAULT_GAIN, offset=DEFAULT_OFFSET,
                seed=0):
        """ Validate and build fault.

        :param kind: `cover`, `overexpose` or `partial_cover`.
        :param target: `left` or `right`.
        :param fraction: Covered share of the width, in (0, 1], partial cover only.
        :param gain: Overexposure gain, positive.
        :param offset: Overexposure offset as a fraction of full scale, non-negative.
        :param seed: Seed of the cover noise.
        """
        if kind not in FAULT_KINDS:
            raise InvalidFault('Invalid fault kind: {}'.format(kind))
        if target not in (LEFT, RIGHT):
            raise InvalidFault('fault target must be left or right, got {}'.format(target))
        if kind == PARTIAL_COVER:
            if fraction is None or not 0 < fraction <= 1:
                raise InvalidFault('partial cover fraction must be in (0, 1]')
            fraction = float(fraction)
        elif fraction is not None:
            raise InvalidFault('only partial cover takes a fraction')
        if gain <= 0 or offset < 0:
            raise InvalidFault('gain must be positive and offset non-negative')
        return super(FaultSpec, cls).__new__(
            cls, kind, target, fraction, float(gain), float(offset), int(seed))

    def __str__(self):
        if self.kind == PARTIAL_COVER:
            return '{}:{}:{}'.format(self.kind, self.target, self.fraction)
        if self.kind == OVEREXPOSE:
            return '{}:{}:{}:{}'.format(self.kind, self.target, self.gain, self.offset)
        return '{}:{}'.format(self.kind, self.target)


def parse_fault(text):
    """ Parse `kind:target[:param[:param]]`.

    `partial_cover:left:0.3` takes the covered fraction,
    `overexpose:right[:gain[:offset]]` the gain and offset.

    :param text: Fault text.
    :returns: FaultSpec.
    """
    parts = text.split(':')
    if len(parts) < 2:
        raise InvalidFault('fault needs kind:target, got {!r}'.format(text))
    kind, target, params = parts[0], parts[1], parts[2:]
    try:
        values = [float(param) for param in params]
    except ValueError:
        raise InvalidFault('fault parameters must be numbers: {!r}'.format(text))
    if kind == PARTIAL_COVER and len(values) == 1:
        return FaultSpec(kind, target, fraction=values[0])
    if kind == OVEREXPOSE and len(values) <= 2:
        return FaultSpec(kind, target, *([None] + values))
    if kind == COVER and not values:
        return FaultSpec(kind, target)
    raise InvalidFault('wrong parameters for {}: {!r}'.format(kind, text))


def landmark_from_dict(data):
    """ Build the landmark from a scene document entry.

    :param data: Mapping with `side`, `center` and `cross_width`.
    :returns: Landmark.
    """
    if not isinstance(data, dict):
        raise SceneError('landmark must be a mapping, got {!r}'.format(data))
    try:
        return Landmark(**data)
    except SceneError:
        raise
    except (TypeError, ValueError) as err:
        raise SceneError('landmark entry {!r}: {}'.format(data, err))


def fault_from_dict(data):
    """ Build a fault from a scene document entry.

    :param data: Mapping with `kind`, `target` and parameters.
    :returns: FaultSpec.
    """
    try:
        return FaultSpec(**data)
    except TypeError as err:
        raise InvalidFault('fault entry {!r}: {}'.format(data, err))


def _check_frustum(cfg):
    """ Raise FrustumViolation unless every landmark corner projects inside both images. """
    calib = cfg.calibration
    width, height = calib.image_size
    xc, yc, zc = cfg.landmark.center
    half = cfg.landmark.side / 2
    for side, offset in ((LEFT, 0.0), (RIGHT, calib.baseline)):
        for x in (xc - half, xc + half):
            for y in (yc - half, yc + half):
                u = calib.cx + calib.focal_length * (x - offset) / zc
                v = calib.cy + calib.focal_length * y / zc
                if not (0 <= u <= width - 1 and 0 <= v <= height - 1):
                    raise FrustumViolation('landmark corner ({}, {}) projects to ({:.1f}, {:.1f}) '
                                           'outside the {} image'.format(x, y, u, v, side))


def _splitmix(values):
    with np.errstate(over='ignore'):
        z = values + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _lattice(i, j, salt):
    """ Hash lattice points to [0, 1). """
    with np.errstate(over='ignore'):
        key = (i.astype(np.uint64) * _ROW) ^ _splitmix(j.astype(np.uint64) ^ np.uint64(salt))
    return (_splitmix(key) >> np.uint64(11)).astype(np.float64) / float(2 ** 53)


def value_noise(s, t, cell, salt):
    """ Smooth noise over surface coordinates.

    :param s: First surface coordinate array, meters.
    :param t: Second surface coordinate array, meters.
    :param cell: Lattice spacing in meters.
    :param salt: Hash salt.
    :returns: Array of values in [0, 1).
    """
    gs = np.asarray(s, dtype=np.float64) / cell + CELL_OFFSET
    gt = np.asarray(t, dtype=np.float64) / cell + CELL_OFFSET
    i = np.floor(gs)
    j = np.floor(gt)
    fs = gs - i
    ft = gt - j
    fs = fs * fs * (3 - 2 * fs)
    ft = ft * ft * (3 - 2 * ft)
    i = i.astype(np.int64)
    j = j.astype(np.int64)
    top = _lattice(i, j, salt) * (1 - fs) + _lattice(i + 1, j, salt) * fs
    bottom = _lattice(i, j + 1, salt) * (1 - fs) + _lattice(i + 1, j + 1, salt) * fs
    return top * (1 - ft) + bottom * ft


def _shade(s, t, cell, bounds, salt):
    low, high = bounds
    return low + (high - low) * value_noise(s, t, cell, salt)


def _render_camera(cfg, offset, frame, camera):
    """ Ray cast one camera.

    :param cfg: SceneConfig.
    :param offset: Camera x position in meters.
    :param frame: Frame number, selects the noise.
    :param camera: 0 for left, 1 for right.
    :returns: RawImage.
    """
    calib = cfg.calibration
    width, height = calib.image_size
    f = calib.focal_length
    rows, cols = np.mgrid[0:height, 0:width].astype(np.float64)
    dx = (cols - calib.cx) / f
    dy = (rows - calib.cy) / f
    salt = cfg.seed * 8

    depth = np.full((height, width), cfg.backdrop_distance)
    shade = _shade(offset + dx * depth, dy * depth, BACKDROP_CELL, BACKDROP_RANGE,
                   salt + _BACKDROP)

    below = dy > 0
    ground_depth = np.where(below, cfg.ground_height / np.where(below, dy, 1.0), np.inf)
    ground = ground_depth < depth
    safe_depth = np.where(ground, ground_depth, 1.0)
    ground_shade = _shade(offset + dx * safe_depth, safe_depth, GROUND_CELL, GROUND_RANGE,
                          salt + _GROUND)
    shade = np.where(ground, ground_shade, shade)
    depth = np.where(ground, ground_depth, depth)

    if cfg.landmark is not None:
        xc, yc, zc = cfg.landmark.center
        half = cfg.landmark.side / 2
        arm = cfg.landmark.cross_width / 2
        s = offset + dx * zc - xc
        t = dy * zc - yc
        hit = (np.abs(s) <= half) & (np.abs(t) <= half) & (zc < depth)
        cross = (np.abs(s) <= arm) | (np.abs(t) <= arm)
        plate = np.where(cross,
                         _shade(s, t, LANDMARK_CELL, CROSS_RANGE, salt + _CROSS),
                         _shade(s, t, LANDMARK_CELL, LANDMARK_RANGE, salt + _PLATE))
        shade = np.where(hit, plate, shade)

    full = 2 ** cfg.bit_depth - 1
    levels = np.floor(shade * full + 0.5).astype(np.int64)
    if cfg.noise:
        rng = np.random.RandomState([cfg.seed, frame, camera])
        levels += rng.randint(-cfg.noise, cfg.noise + 1, size=levels.shape)
    return RawImage(np.clip(levels, 0, full), cfg.bit_depth, cfg.bayer_pattern)


def render_scene(cfg, frame=0):
    """ Render a clean stereo pair.

    :param cfg: SceneConfig.
    :param frame: Frame number; textures are static, noise is per frame.
    :returns: (left RawImage, right RawImage).
    """
    left = _render_camera(cfg, 0.0, frame, 0)
    right = _render_camera(cfg, cfg.calibration.baseline, frame, 1)
    return left, right


def _covered(shape, seed):
    rng = np.random.RandomState(seed)
    return COVER_LEVEL + rng.randint(-1, 2, size=shape)


def inject(image, fault):
    """ Apply a lens fault.

    COVER sets every sample to level 2 plus noise in [-1, 1].
    OVEREXPOSE maps samples through gain and offset, then clamps.
    PARTIAL_COVER covers the leftmost ceil(fraction * width) columns.

    :param image: RawImage.
    :param fault: FaultSpec.
    :returns: Faulted RawImage, same size and bit depth.
    """
    samples = image.samples.astype(np.int64)
    full = image.max_level
    if fault.kind == COVER:
        samples = _covered(samples.shape, fault.seed)
    elif fault.kind == OVEREXPOSE:
        samples = np.floor(samples * fault.gain + fault.offset * full + 0.5).astype(np.int64)
    elif fault.kind == PARTIAL_COVER:
        band = math.ceil(Fraction(str(fault.fraction)) * image.width)
        samples[:, :band] = _covered((image.height, band), fault.seed)
    return RawImage(np.clip(samples, 0, full), image.bit_depth, image.bayer_pattern)


def apply_faults(left, right, faults):
    """ Apply faults to the camera each one targets, in order.

    :param left: Left RawImage.
    :param right: Right RawImage.
    :param faults: FaultSpec sequence.
    :returns: (left, right).
    """
    for fault in faults:
        _LOGGER.debug("Injecting %s", fault)
        if fault.target == LEFT:
            left = inject(left, fault)
        else:
            right = inject(right, fault)
    return left, right


def synthesize(cfg, frame=0, faults=()):
    """ Render a pair and apply the scene's faults plus extra ones.

    :param cfg: SceneConfig.
    :param frame: Frame number.
    :param faults: Additional FaultSpec sequence.
    :returns: (left, right).
    """
    left, right = render_scene(cfg, frame)
    return apply_faults(left, right, tuple(cfg.faults) + tuple(faults))


def scene_from_dict(data, calibration):
    """ Build a scene from a scene document.

    :param data: Parsed document.
    :param calibration: CalibrationInfo of the pipeline.
    :returns: SceneConfig.
    """
    unknown = set(data) - set(SCENE_KEYS)
    if unknown:
        raise SceneError('unknown scene keys: {}'.format(', '.join(sorted(unknown))))
    params = dict(data)
    size = (params.pop('width', calibration.image_size[0]),
            params.pop('height', calibration.image_size[1]))
    if tuple(size) != tuple(calibration.image_size):
        raise SceneError('scene size {}x{} differs from the calibrated {}x{}'.format(
            size[0], size[1], *calibration.image_size))
    if 'landmark' in params and params['landmark'] is not None:
        params['landmark'] = landmark_from_dict(params['landmark'])
    params['faults'] = [fault_from_dict(entry) for entry in params.get('faults') or ()]
    return SceneConfig(calibration, **params)


def load_scene(path, calibration=None):
    """ Load a scene document.

    :param path: YAML path.
    :param calibration: CalibrationInfo; defaults to the document-free default.
    :returns: SceneConfig.
    """
    if calibration is None:
        calibration = load_calibration(None)
    cfg = scene_from_dict(load_yaml(path), calibration)
    _LOGGER.info("Loaded scene %s (%d bit, %s landmark, %d faults)", path, cfg.bit_depth,
                 'with' if cfg.landmark else 'no', len(cfg.faults))
    return cfg


def write_pair(directory, frame, left, right):
    """ Export a stereo pair as `<frame>_L.pgm` and `<frame>_R.pgm`.

    :param directory: Frame directory, created when missing.
    :param frame: Frame number.
    :param left: Left RawImage.
    :param right: Right RawImage.
    :returns: (left path, right path).
    """
    os.makedirs(directory, exist_ok=True)
    paths = (os.path.join(directory, '{:04d}_L.pgm'.format(frame)),
             os.path.join(directory, '{:04d}_R.pgm'.format(frame)))
    write_image(paths[0], left)
    write_image(paths[1], right)
    return paths

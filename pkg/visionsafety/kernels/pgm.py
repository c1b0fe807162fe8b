""" Binary portable graymap (P5) reading and writing.

Samples above 8 bits are stored as two bytes, big-endian. A raw
Bayer image is a P5 file plus a sidecar `<file>.meta` holding one
line: `bayer=<pattern> bit_depth=<n>`.
"""

import os

import numpy as np

from visionsafety.kernels import InvalidImage, MonoImage, RawImage

MAGIC = b'P5'
META_SUFFIX = '.meta'


def _header_fields(data, count):
    """ Read whitespace separated header fields, skipping comments.

    :param data: File bytes.
    :param count: Number of fields to read.
    :returns: (fields, offset of the byte following the last field).
    """
    fields = []
    index = 0
    while len(fields) < count:
        if index >= len(data):
            raise InvalidImage('truncated PGM header')
        char = data[index:index + 1]
        if char == b'#':
            while index < len(data) and data[index:index + 1] != b'\n':
                index += 1
        elif char.isspace():
            index += 1
        else:
            start = index
            while index < len(data) and not data[index:index + 1].isspace():
                index += 1
            fields.append(data[start:index])
    return fields, index


def decode_pgm(data):
    """ Decode P5 bytes.

    :param data: File contents.
    :returns: (samples array, bit depth).
    """
    fields, index = _header_fields(data, 4)
    if fields[0] != MAGIC:
        raise InvalidImage('not a binary PGM (P5) file')
    try:
        width, height, maxval = (int(field) for field in fields[1:])
    except ValueError:
        raise InvalidImage('malformed PGM header')
    if not 0 < maxval < 65536:
        raise InvalidImage('PGM maxval {} out of range'.format(maxval))
    # exactly one whitespace byte separates the header from the raster
    index += 1
    dtype = np.dtype('>u2') if maxval > 255 else np.dtype(np.uint8)
    expected = width * height * dtype.itemsize
    raster = data[index:index + expected]
    if len(raster) != expected:
        raise InvalidImage('PGM raster holds {} bytes, expected {}'.format(len(raster), expected))
    samples = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return samples.astype(np.int64), maxval.bit_length()


def encode_pgm(image):
    """ Encode an image as P5 bytes.

    :param image: MonoImage or RawImage.
    :returns: File contents.
    """
    maxval = image.max_level
    header = 'P5\n{} {}\n{}\n'.format(image.width, image.height, maxval).encode('ascii')
    dtype = '>u2' if maxval > 255 else np.uint8
    return header + image.samples.astype(dtype).tobytes()


def read_mono(path):
    """ Read a grayscale image.

    :param path: P5 file path.
    :returns: MonoImage.
    """
    with open(path, 'rb') as handle:
        samples, bit_depth = decode_pgm(handle.read())
    return MonoImage(samples, bit_depth)


def read_raw(path):
    """ Read a raw Bayer image and its sidecar metadata.

    Without a sidecar the pattern defaults to RGGB and the bit
    depth follows the PGM maxval.

    :param path: P5 file path.
    :returns: RawImage.
    """
    with open(path, 'rb') as handle:
        samples, bit_depth = decode_pgm(handle.read())
    pattern = 'RGGB'
    meta_path = path + META_SUFFIX
    if os.path.exists(meta_path):
        with open(meta_path, 'r', encoding='utf-8') as handle:
            meta = dict(item.split('=', 1) for item in handle.readline().split())
        pattern = meta.get('bayer', pattern)
        bit_depth = int(meta.get('bit_depth', bit_depth))
    return RawImage(samples, bit_depth, pattern)


def write_image(path, image):
    """ Write an image, plus the sidecar for raw images.

    :param path: Destination P5 path.
    :param image: MonoImage or RawImage.
    """
    with open(path, 'wb') as handle:
        handle.write(encode_pgm(image))
    if isinstance(image, RawImage):
        with open(path + META_SUFFIX, 'w', encoding='utf-8') as handle:
            handle.write('bayer={} bit_depth={}\n'.format(image.bayer_pattern, image.bit_depth))

import os
import tempfile
import unittest

import numpy as np

from visionsafety.kernels import InvalidImage, MonoImage, RawImage
from visionsafety.kernels.pgm import (
    META_SUFFIX, decode_pgm, encode_pgm, read_mono, read_raw, write_image)


class TestCodec(unittest.TestCase):

    def test_eight_bit_header(self):
        image = MonoImage(np.array([[0, 1, 2], [253, 254, 255]]), 8)
        data = encode_pgm(image)
        self.assertTrue(data.startswith(b'P5\n3 2\n255\n'))
        self.assertEqual(len(data), len(b'P5\n3 2\n255\n') + 6)

    def test_sixteen_bit_big_endian(self):
        image = MonoImage(np.array([[0x0102, 0x0fff]]), 12)
        data = encode_pgm(image)
        self.assertTrue(data.endswith(b'\x01\x02\x0f\xff'))
        samples, bit_depth = decode_pgm(data)
        self.assertEqual(bit_depth, 12)
        np.testing.assert_array_equal(samples, image.samples)

    def test_header_comment(self):
        samples, bit_depth = decode_pgm(b'P5\n# written by a camera\n2 1\n255\n\x07\x09')
        self.assertEqual(bit_depth, 8)
        np.testing.assert_array_equal(samples, [[7, 9]])

    def test_errors(self):
        with self.assertRaises(InvalidImage):
            decode_pgm(b'P2\n2 1\n255\n12')
        with self.assertRaises(InvalidImage):
            decode_pgm(b'P5\n2 1\n255\n\x07')
        with self.assertRaises(InvalidImage):
            decode_pgm(b'P5\n2 1')
        with self.assertRaises(InvalidImage):
            decode_pgm(b'P5\n2 x\n255\n\x07\x09')


class TestFiles(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.directory.name, '0000_L.pgm')

    def tearDown(self):
        self.directory.cleanup()

    def test_raw_with_sidecar(self):
        raw = RawImage(np.arange(16).reshape(4, 4) * 200, 12, 'GBRG')
        write_image(self.path, raw)
        self.assertTrue(os.path.exists(self.path + META_SUFFIX))
        self.assertEqual(read_raw(self.path), raw)

    def test_raw_without_sidecar(self):
        write_image(self.path, MonoImage(np.full((2, 2), 9), 8))
        self.assertFalse(os.path.exists(self.path + META_SUFFIX))
        raw = read_raw(self.path)
        self.assertEqual(raw.bayer_pattern, 'RGGB')
        self.assertEqual(raw.bit_depth, 8)

    def test_mono(self):
        image = MonoImage(np.full((3, 5), 1000), 10)
        write_image(self.path, image)
        self.assertEqual(read_mono(self.path), image)

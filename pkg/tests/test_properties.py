import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis.strategies import composite, floats, integers, lists, sampled_from, tuples

from visionsafety import FAIL, ERROR, PASS, PROTECTIVE_STOP, INITIAL_DECISION, Verdict
from visionsafety.kernels import (
    INVALID, BAYER_PATTERNS, CalibrationInfo, DisparityImage, MonoImage, PointCloud, RawImage)
from visionsafety.kernels.mono import debayer_to_mono, histogram
from visionsafety.kernels.stereo import disparity, in_area, reproject
from visionsafety.monitor import gate
from visionsafety.pipeline import Region

EXAMPLES = settings(max_examples=1000, deadline=None)


@composite
def samples(draw, bit_depth, min_dim=1, max_dim=12, even=False):
    height = draw(integers(min_dim, max_dim))
    width = draw(integers(min_dim, max_dim))
    if even:
        height, width = 2 * height, 2 * width
    flat = draw(lists(integers(0, 2 ** bit_depth - 1),
                      min_size=height * width, max_size=height * width))
    return np.array(flat, dtype=np.int64).reshape(height, width)


@composite
def mono_images(draw, min_dim=1, max_dim=12):
    bit_depth = draw(integers(1, 16))
    return MonoImage(draw(samples(bit_depth, min_dim, max_dim)), bit_depth)


@composite
def raw_images(draw):
    bit_depth = draw(integers(8, 16))
    return RawImage(draw(samples(bit_depth, 1, 6, even=True)), bit_depth,
                    draw(sampled_from(BAYER_PATTERNS)))


@composite
def clouds(draw):
    coordinate = floats(-3, 3, allow_nan=False)
    depth = floats(0.1, 5, allow_nan=False)
    points = draw(lists(tuples(coordinate, coordinate, depth), max_size=30))
    return PointCloud(np.array(points, dtype=np.float64).reshape(-1, 3))


@composite
def regions(draw):
    low = draw(tuples(floats(-3, 2), floats(-3, 2), floats(0.1, 4)))
    size = draw(tuples(floats(0.01, 3), floats(0.01, 3), floats(0.01, 3)))
    return Region('Box', low, tuple(lo + extent for lo, extent in zip(low, size)))


@composite
def verdict_frames(draw):
    frames = []
    for frame_id in range(draw(integers(1, 8))):
        outcomes = draw(lists(sampled_from([PASS, PASS, FAIL, ERROR]), min_size=1, max_size=3))
        frames.append([Verdict('R{}'.format(k + 1), frame_id, outcome)
                       for k, outcome in enumerate(outcomes)])
    return frames


class TestKernelProperties(unittest.TestCase):

    @EXAMPLES
    @given(mono_images())
    def test_histogram_conserves_pixels(self, image):
        hist = histogram(image)
        self.assertEqual(hist.levels, 2 ** image.bit_depth)
        self.assertEqual(hist.total, image.width * image.height)
        self.assertEqual(int(hist.counts.sum()), image.samples.size)

    @EXAMPLES
    @given(raw_images())
    def test_debayer_within_cell_range(self, raw):
        mono = debayer_to_mono(raw)
        self.assertEqual(mono.shape, raw.shape)
        self.assertEqual(mono.bit_depth, raw.bit_depth)
        self.assertGreaterEqual(int(mono.samples.min()), int(raw.samples.min()))
        self.assertLessEqual(int(mono.samples.max()), int(raw.samples.max()))

    @EXAMPLES
    @given(mono_images(min_dim=3, max_dim=10), integers(0, 6))
    def test_identical_images_match_at_zero(self, image, max_disparity):
        values = disparity(image, image, 3, max_disparity).values
        valid = values[values != INVALID]
        self.assertTrue(np.all(valid == 0))

    @EXAMPLES
    @given(integers(0, 63), integers(0, 47), integers(1, 40))
    def test_reprojection_round_trip(self, u, v, d):
        calib = CalibrationInfo(focal_length=80.0, principal_point=(32.0, 24.0),
                                image_size=(64, 48))
        values = np.full((48, 64), INVALID)
        values[v, u] = d
        x, y, z = reproject(DisparityImage(values, 40), calib).points[0]
        back = (calib.cx + calib.focal_length * x / z, calib.cy + calib.focal_length * y / z,
                calib.focal_length * calib.baseline / z)
        for got, want in zip(back, (u, v, d)):
            self.assertLessEqual(abs(got - want), 1e-9 * max(abs(want), 1))

    @EXAMPLES
    @given(clouds(), regions())
    def test_in_area_subset_and_idempotent(self, cloud, region):
        inside = in_area(cloud, region)
        self.assertLessEqual(len(inside), len(cloud))
        rows = set(map(tuple, cloud.points))
        self.assertTrue(all(tuple(point) in rows for point in inside.points))
        self.assertEqual(in_area(inside, region), inside)


class TestGateProperties(unittest.TestCase):

    @EXAMPLES
    @given(verdict_frames())
    def test_latch_is_monotone(self, frames):
        decision = INITIAL_DECISION
        stopped = False
        for verdicts in frames:
            previous = decision
            decision = gate(verdicts, decision)
            self.assertEqual(decision.tripped_by[:len(previous.tripped_by)],
                             previous.tripped_by)
            stopped = stopped or any(verdict.outcome != PASS for verdict in verdicts)
            self.assertEqual(decision.state == PROTECTIVE_STOP, stopped)

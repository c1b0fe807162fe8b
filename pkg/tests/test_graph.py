import os
import tempfile
import unittest

from visionsafety.kernels import CalibrationInfo
from visionsafety.pipeline import (
    Component, Connector, CycleError, DuplicateRegion, GraphError, InvalidRegion,
    InvalidSource, PipelineGraph, PortTypeMismatch, Region, UnconnectedPort, UnknownComponent,
    UnknownPort, UnknownRegion, build_stereo_pipeline, component_factory,
    CAMERA, DEBAYER, DISPARITY, MONO_IMAGE, POINT_CLOUD, RECTIFY)
from visionsafety.pipeline.config import ConfigError, load_pipeline, pipeline_from_dict

CONFIG = os.path.join(os.path.dirname(__file__), '..', 'config')


class TestStereoPipeline(unittest.TestCase):

    def setUp(self):
        self.graph = build_stereo_pipeline()

    def test_shape(self):
        self.assertEqual(len(self.graph.components), 8)
        self.assertEqual(len(self.graph.connectors), 8)
        self.assertEqual(len(self.graph.regions), 0)

    def test_topological_order(self):
        order = self.graph.topological_order()
        self.assertEqual(sorted(order), sorted(c.name for c in self.graph.components))
        for connector in self.graph.connectors:
            self.assertLess(order.index(connector.producer), order.index(connector.consumer))
        self.assertEqual(order[:2], ('Camera_Left', 'Camera_Right'))
        self.assertEqual(order[-1], 'PointCloud_3D')

    def test_output_type(self):
        self.assertEqual(self.graph.output_type('PointCloud_3D', 'output'), POINT_CLOUD)
        with self.assertRaises(UnknownPort):
            self.graph.output_type('PointCloud_3D', 'points')
        with self.assertRaises(UnknownComponent):
            self.graph.component('Camera_Middle')

    def test_incoming(self):
        incoming = self.graph.incoming('DisparityMap')
        self.assertEqual(list(incoming), ['left', 'right'])
        self.assertEqual(incoming['right'].producer, 'Rectify_Right')

    def test_disparity_defaults(self):
        params = self.graph.component('DisparityMap').params
        self.assertEqual(params['block'], 7)
        self.assertEqual(params['max_disparity'], 40)

    def test_add_region(self):
        region = Region.from_box('Box', [-1, -1, 1, 1, 1, 2])
        graph = self.graph.add_region(region)
        self.assertTrue(graph.has_region('Box'))
        self.assertFalse(self.graph.has_region('Box'))
        self.assertEqual(graph.region('Box').max_corner, (1.0, 1.0, 2.0))
        with self.assertRaises(DuplicateRegion):
            graph.add_region(region)
        with self.assertRaises(UnknownRegion):
            self.graph.region('Box')


class TestRegion(unittest.TestCase):

    def test_invalid_boxes(self):
        with self.assertRaises(InvalidRegion):
            Region('Flat', (0, 0, 1), (1, 0, 2))
        with self.assertRaises(InvalidRegion):
            Region('Behind', (0, 0, -1), (1, 1, 2))
        with self.assertRaises(InvalidRegion):
            Region.from_box('Short', [0, 0, 1, 1, 1])

    def test_is_graph_error(self):
        with self.assertRaises(GraphError):
            Region('Inverted', (1, 1, 2), (0, 0, 1))


class TestValidation(unittest.TestCase):

    def test_port_type_mismatch(self):
        components = [component_factory('Cam', CAMERA, side='left'),
                      component_factory('Rect', RECTIFY)]
        with self.assertRaises(PortTypeMismatch):
            PipelineGraph(components, [Connector('Cam', 'output', 'Rect', 'input')])

    def test_cycle(self):
        components = [component_factory('Cam', CAMERA, side='left'),
                      Component('A', 'merge', [('x', MONO_IMAGE), ('y', MONO_IMAGE)],
                                [('output', MONO_IMAGE)]),
                      Component('B', 'copy', [('input', MONO_IMAGE)],
                                [('output', MONO_IMAGE)]),
                      component_factory('Mono', DEBAYER)]
        connectors = [Connector('Cam', 'output', 'Mono', 'input'),
                      Connector('Mono', 'output', 'A', 'x'),
                      Connector('B', 'output', 'A', 'y'),
                      Connector('A', 'output', 'B', 'input')]
        with self.assertRaises(CycleError):
            PipelineGraph(components, connectors)

    def test_unconnected_input(self):
        components = [component_factory('Cam', CAMERA, side='left'),
                      component_factory('Mono', DEBAYER),
                      component_factory('Disp', DISPARITY)]
        connectors = [Connector('Cam', 'output', 'Mono', 'input'),
                      Connector('Mono', 'output', 'Disp', 'left')]
        with self.assertRaises(UnconnectedPort):
            PipelineGraph(components, connectors)

    def test_double_fan_in(self):
        components = [component_factory('Left', CAMERA, side='left'),
                      component_factory('Right', CAMERA, side='right'),
                      component_factory('Mono', DEBAYER)]
        connectors = [Connector('Left', 'output', 'Mono', 'input'),
                      Connector('Right', 'output', 'Mono', 'input')]
        with self.assertRaises(UnconnectedPort):
            PipelineGraph(components, connectors)

    def test_source_must_be_camera(self):
        source = Component('Generator', 'noise', [], [('output', MONO_IMAGE)])
        with self.assertRaises(InvalidSource):
            PipelineGraph([source], [])

    def test_unknown_endpoint(self):
        with self.assertRaises(UnknownComponent):
            PipelineGraph([component_factory('Cam', CAMERA, side='left')],
                          [Connector('Cam', 'output', 'Nowhere', 'input')])

    def test_factory(self):
        with self.assertRaises(GraphError):
            component_factory('X', 'teleport')
        with self.assertRaises(GraphError):
            component_factory('Cam', CAMERA, side='middle')

    def test_connector_parse(self):
        connector = Connector.parse('Rectify_Left.output -> DisparityMap.left')
        self.assertEqual(connector, Connector('Rectify_Left', 'output', 'DisparityMap', 'left'))
        self.assertEqual(str(connector), 'Rectify_Left.output -> DisparityMap.left')
        with self.assertRaises(GraphError):
            Connector.parse('Rectify_Left -> DisparityMap')


class TestConfig(unittest.TestCase):

    def test_shipped_pipeline(self):
        config = load_pipeline(os.path.join(CONFIG, 'pipeline.yaml'))
        self.assertEqual(config.graph.topological_order(),
                         build_stereo_pipeline().topological_order())
        self.assertTrue(config.graph.has_region('Camera_Left_Landmark'))
        self.assertEqual(config.graph.calibration, CalibrationInfo())
        self.assertEqual(config.safety_functions['R3'], frozenset(['Protective Stop']))

    def test_default_components(self):
        graph, mapping = pipeline_from_dict({'disparity': {'max_disparity': 16}})
        self.assertEqual(len(graph.components), 8)
        self.assertEqual(graph.component('DisparityMap').params['max_disparity'], 16)
        self.assertEqual(mapping, {})

    def test_calibration_file(self):
        with tempfile.TemporaryDirectory() as directory:
            with open(os.path.join(directory, 'calib.yaml'), 'w') as handle:
                handle.write('focal_length: 400.0\nimage_size: [64, 48]\n'
                             'principal_point: [32.0, 24.0]\n')
            graph, _ = pipeline_from_dict({'calibration': 'calib.yaml'}, directory)
        self.assertEqual(graph.calibration.image_size, (64, 48))
        self.assertEqual(graph.calibration.focal_length, 400.0)

    def test_bad_documents(self):
        with self.assertRaises(ConfigError):
            pipeline_from_dict({'camera': 'left'})
        with self.assertRaises(ConfigError):
            pipeline_from_dict({'calibration': {'focal_length': -1}})
        with self.assertRaises(ConfigError):
            pipeline_from_dict({'components': [{'kind': CAMERA}]})
        with self.assertRaises(ConfigError):
            pipeline_from_dict({'disparity': {'window': 5}})

    def test_single_function_string(self):
        _, mapping = pipeline_from_dict({'safety_functions': {'R1': 'Emergency Stop'}})
        self.assertEqual(mapping, {'R1': frozenset(['Emergency Stop'])})

    def test_not_a_mapping(self):
        with tempfile.NamedTemporaryFile('w', suffix='.yaml', delete=False) as handle:
            handle.write('- just\n- a list\n')
        try:
            with self.assertRaises(ConfigError):
                load_pipeline(handle.name)
        finally:
            os.remove(handle.name)

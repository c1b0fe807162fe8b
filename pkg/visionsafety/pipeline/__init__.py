""" Stereo pipeline model.

A pipeline is a typed dataflow graph of named components with
input and output ports, joined by connectors, plus named 3D
regions the rules can refer to.
"""

import logging
from collections import OrderedDict, deque, namedtuple

from visionsafety.kernels import DEFAULT_CALIBRATION
from visionsafety.kernels.stereo import DEFAULT_BLOCK, DEFAULT_MAX_DISPARITY

_LOGGER = logging.getLogger(__name__)


# Reserved port names.
OUTPUT = 'output'
INPUT = 'input'

# Port types.
RAW_IMAGE = 'RawImage'
MONO_IMAGE = 'MonoImage'
DISPARITY_IMAGE = 'DisparityImage'
POINT_CLOUD = 'PointCloud'

# Component kinds.
CAMERA = 'camera'
DEBAYER = 'debayer'
RECTIFY = 'rectify'
DISPARITY = 'disparity'
REPROJECT = 'reproject'

LEFT = 'left'
RIGHT = 'right'

KIND_PORTS = {
    CAMERA: ((), ((OUTPUT, RAW_IMAGE),)),
    DEBAYER: (((INPUT, RAW_IMAGE),), ((OUTPUT, MONO_IMAGE),)),
    RECTIFY: (((INPUT, MONO_IMAGE),), ((OUTPUT, MONO_IMAGE),)),
    DISPARITY: (((LEFT, MONO_IMAGE), (RIGHT, MONO_IMAGE)), ((OUTPUT, DISPARITY_IMAGE),)),
    REPROJECT: ((('disparity', DISPARITY_IMAGE), ('reference', MONO_IMAGE)),
                ((OUTPUT, POINT_CLOUD),)),
}


class GraphError(ValueError):
    """ Base class for pipeline graph errors. """


class UnknownComponent(GraphError):
    """ Component name not in the graph. """


class UnknownPort(GraphError):
    """ Port name not on the component. """


class PortTypeMismatch(GraphError):
    """ Connector joins ports of different types. """


class UnconnectedPort(GraphError):
    """ Input port without exactly one incoming connector. """


class CycleError(GraphError):
    """ Graph is not acyclic. """


class InvalidSource(GraphError):
    """ Component without inputs that is not a camera. """


class UnknownRegion(GraphError):
    """ Region name not in the graph. """


class DuplicateRegion(GraphError):
    """ Region name registered twice. """


class InvalidRegion(GraphError):
    """ Region box violates its invariants. """


class Region(namedtuple('Region', 'name min_corner max_corner')):
    """ Named axis-aligned box in meters, left-camera frame. """

    __slots__ = ()

    def __new__(cls, name, min_corner, max_corner):
        """ Validate and build region.

        :param name: Region name, as used in rules.
        :param min_corner: (x, y, z) lower corner.
        :param max_corner: (x, y, z) upper corner.
        """
        lower = tuple(float(value) for value in min_corner)
        upper = tuple(float(value) for value in max_corner)
        if len(lower) != 3 or len(upper) != 3:
            raise InvalidRegion('region {} needs 3D corners'.format(name))
        if any(lo >= hi for lo, hi in zip(lower, upper)):
            raise InvalidRegion('region {}: min corner must be below max corner'.format(name))
        if lower[2] <= 0:
            raise InvalidRegion('region {}: z range must be in front of the camera'.format(name))
        return super(Region, cls).__new__(cls, name, lower, upper)

    @classmethod
    def from_box(cls, name, box):
        """ Build a region from six numbers.

        :param name: Region name.
        :param box: [xmin, ymin, zmin, xmax, ymax, zmax].
        :returns: Region.
        """
        if len(box) != 6:
            raise InvalidRegion('region {} needs six box coordinates'.format(name))
        return cls(name, box[:3], box[3:])


class Connector(namedtuple('Connector', 'producer producer_port consumer consumer_port')):
    """ Directed link from an output port to an input port. """

    __slots__ = ()

    @classmethod
    def parse(cls, text):
        """ Parse `Producer.port -> Consumer.port`.

        :param text: Connector text.
        :returns: Connector.
        """
        try:
            source, target = (part.strip() for part in text.split('->'))
            producer, producer_port = source.split('.')
            consumer, consumer_port = target.split('.')
        except ValueError:
            raise GraphError('malformed connector {!r}'.format(text))
        return cls(producer, producer_port, consumer, consumer_port)

    def __str__(self):
        return '{}.{} -> {}.{}'.format(*self)


class Component(object):
    """ Pipeline stage with typed ports. """

    def __init__(self, name, kind, inputs, outputs, params=None):
        """ Initialize component.

        :param name: Unique component name.
        :param kind: Processing kind, e.g. `camera` or `disparity`.
        :param inputs: Sequence of (port, type) pairs.
        :param outputs: Sequence of (port, type) pairs.
        :param params: Kind-specific parameters.
        """
        self._name = name
        self._kind = kind
        self._inputs = OrderedDict(inputs)
        self._outputs = OrderedDict(outputs)
        self._params = dict(params or {})

    @property
    def name(self):
        """ Component name. """
        return self._name

    @property
    def kind(self):
        """ Processing kind. """
        return self._kind

    @property
    def inputs(self):
        """ Input port types, by port name. """
        return OrderedDict(self._inputs)

    @property
    def outputs(self):
        """ Output port types, by port name. """
        return OrderedDict(self._outputs)

    @property
    def params(self):
        """ Kind-specific parameters. """
        return dict(self._params)

    def __eq__(self, other):
        return (isinstance(other, Component) and
                (self._name, self._kind, self._inputs, self._outputs, self._params) ==
                (other.name, other.kind, other.inputs, other.outputs, other.params))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __str__(self):
        return '{} ({})'.format(self._name, self._kind)


def component_factory(name, kind, **params):
    """ Make a component of a known kind.

    :param name: Component name.
    :param kind: One of `camera`, `debayer`, `rectify`, `disparity`, `reproject`.
    :param params: Kind-specific parameters.
    :returns: New component.
    """
    if kind not in KIND_PORTS:
        raise GraphError('Invalid component kind: {}'.format(kind))
    inputs, outputs = KIND_PORTS[kind]
    if kind == CAMERA and params.get('side') not in (LEFT, RIGHT):
        raise GraphError('camera {} needs side left or right'.format(name))
    if kind == DISPARITY:
        params.setdefault('block', DEFAULT_BLOCK)
        params.setdefault('max_disparity', DEFAULT_MAX_DISPARITY)
    return Component(name, kind, inputs, outputs, params)


class PipelineGraph(object):
    """ Validated, immutable pipeline graph. """

    def __init__(self, components, connectors, regions=(), calibration=DEFAULT_CALIBRATION):
        """ Initialize and validate graph.

        :param components: Components.
        :param connectors: Connectors.
        :param regions: Regions.
        :param calibration: CalibrationInfo shared by the stereo stages.
        """
        self._components = OrderedDict()
        for component in components:
            if component.name in self._components:
                raise GraphError('duplicate component {}'.format(component.name))
            self._components[component.name] = component
        self._connectors = tuple(connectors)
        self._regions = OrderedDict()
        for region in regions:
            if region.name in self._regions:
                raise DuplicateRegion(region.name)
            self._regions[region.name] = region
        self._calibration = calibration
        self._incoming = self._check_connectors()
        self._order = self._sort()

    @property
    def components(self):
        """ Components in declaration order. """
        return tuple(self._components.values())

    @property
    def connectors(self):
        """ Connectors in declaration order. """
        return self._connectors

    @property
    def regions(self):
        """ Regions by name. """
        return OrderedDict(self._regions)

    @property
    def calibration(self):
        """ Stereo calibration. """
        return self._calibration

    def component(self, name):
        """ Fetch a named component.

        :param name: Component name.
        :returns: Component.
        """
        try:
            return self._components[name]
        except KeyError:
            raise UnknownComponent(name)

    def has_component(self, name):
        """ Is there a component with this name? """
        return name in self._components

    def region(self, name):
        """ Fetch a named region.

        :param name: Region name.
        :returns: Region.
        """
        try:
            return self._regions[name]
        except KeyError:
            raise UnknownRegion(name)

    def has_region(self, name):
        """ Is there a region with this name? """
        return name in self._regions

    def output_type(self, component, port):
        """ Type of an output port.

        :param component: Component name.
        :param port: Output port name.
        :returns: Port type.
        """
        outputs = self.component(component).outputs
        if port not in outputs:
            raise UnknownPort('{}.{}'.format(component, port))
        return outputs[port]

    def incoming(self, component):
        """ Connectors feeding a component.

        :param component: Component name.
        :returns: Mapping input port -> Connector.
        """
        return OrderedDict(self._incoming[component])

    def topological_order(self):
        """ Component names, every producer before its consumers. """
        return self._order

    def add_region(self, region):
        """ Register a region.

        :param region: Region.
        :returns: New graph holding the region.
        """
        if region.name in self._regions:
            raise DuplicateRegion(region.name)
        return PipelineGraph(self.components, self._connectors,
                             tuple(self._regions.values()) + (region,), self._calibration)

    def _check_connectors(self):
        """ Check endpoints, types and input fan-in.

        :returns: Mapping component -> {input port: Connector}.
        """
        incoming = OrderedDict((name, OrderedDict()) for name in self._components)
        for connector in self._connectors:
            produced = self.output_type(connector.producer, connector.producer_port)
            consumer = self.component(connector.consumer)
            if connector.consumer_port not in consumer.inputs:
                raise UnknownPort('{}.{}'.format(connector.consumer, connector.consumer_port))
            consumed = consumer.inputs[connector.consumer_port]
            if produced != consumed:
                raise PortTypeMismatch('{}: {} does not match {}'.format(
                    connector, produced, consumed))
            if connector.consumer_port in incoming[connector.consumer]:
                raise UnconnectedPort('{}.{} has more than one incoming connector'.format(
                    connector.consumer, connector.consumer_port))
            incoming[connector.consumer][connector.consumer_port] = connector
        for component in self._components.values():
            if not component.inputs and component.kind != CAMERA:
                raise InvalidSource('{} has no inputs but is not a camera'.format(component))
            for port in component.inputs:
                if port not in incoming[component.name]:
                    raise UnconnectedPort('{}.{} has no incoming connector'.format(
                        component.name, port))
        return incoming

    def _sort(self):
        """ Kahn's algorithm in declaration order.

        :returns: Tuple of component names.
        """
        indegree = OrderedDict((name, len(ports)) for name, ports in self._incoming.items())
        queue = deque(name for name, degree in indegree.items() if degree == 0)
        order = []
        while queue:
            name = queue.popleft()
            order.append(name)
            for connector in self._connectors:
                if connector.producer == name:
                    indegree[connector.consumer] -= 1
                    if indegree[connector.consumer] == 0:
                        queue.append(connector.consumer)
        if len(order) != len(self._components):
            stuck = [name for name in self._components if name not in order]
            raise CycleError('cycle through {}'.format(', '.join(stuck)))
        return tuple(order)

    def __str__(self):
        return 'PipelineGraph({} components, {} connectors, {} regions)'.format(
            len(self._components), len(self._connectors), len(self._regions))


def build_stereo_pipeline(calib=DEFAULT_CALIBRATION, block=DEFAULT_BLOCK,
                          max_disparity=DEFAULT_MAX_DISPARITY):
    """ Build the two-camera point cloud pipeline.

    Camera -> Bayer2Mono -> Rectify on each side, both rectified
    images into DisparityMap, and PointCloud_3D reprojecting the
    disparities with the rectified left image as intensity reference.

    :param calib: CalibrationInfo.
    :param block: Block matching window size.
    :param max_disparity: Largest disparity searched.
    :returns: PipelineGraph without regions.
    """
    components = [
        component_factory('Camera_Left', CAMERA, side=LEFT),
        component_factory('Camera_Right', CAMERA, side=RIGHT),
        component_factory('Bayer2Mono_Left', DEBAYER),
        component_factory('Bayer2Mono_Right', DEBAYER),
        component_factory('Rectify_Left', RECTIFY),
        component_factory('Rectify_Right', RECTIFY),
        component_factory('DisparityMap', DISPARITY, block=block, max_disparity=max_disparity),
        component_factory('PointCloud_3D', REPROJECT),
    ]
    connectors = [
        Connector('Camera_Left', OUTPUT, 'Bayer2Mono_Left', INPUT),
        Connector('Camera_Right', OUTPUT, 'Bayer2Mono_Right', INPUT),
        Connector('Bayer2Mono_Left', OUTPUT, 'Rectify_Left', INPUT),
        Connector('Bayer2Mono_Right', OUTPUT, 'Rectify_Right', INPUT),
        Connector('Rectify_Left', OUTPUT, 'DisparityMap', LEFT),
        Connector('Rectify_Right', OUTPUT, 'DisparityMap', RIGHT),
        Connector('DisparityMap', OUTPUT, 'PointCloud_3D', 'disparity'),
        Connector('Rectify_Left', OUTPUT, 'PointCloud_3D', 'reference'),
    ]
    graph = PipelineGraph(components, connectors, calibration=calib)
    _LOGGER.info("Built stereo pipeline: %s", graph)
    return graph

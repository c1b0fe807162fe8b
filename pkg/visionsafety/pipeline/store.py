""" Per-frame storage of port values. """

import threading

from visionsafety.kernels import DisparityImage, MonoImage, PointCloud, RawImage
from visionsafety.kernels.mono import histogram
from visionsafety.pipeline import (
    DISPARITY_IMAGE, MONO_IMAGE, POINT_CLOUD, RAW_IMAGE, UnknownPort)

TYPE_CLASSES = {
    RAW_IMAGE: RawImage,
    MONO_IMAGE: MonoImage,
    DISPARITY_IMAGE: DisparityImage,
    POINT_CLOUD: PointCloud,
}

# Derived attributes, computed from a stored value on first access.
DERIVED = {
    'histogram': histogram,
}


class StoreError(ValueError):
    """ Base class for frame store errors. """


class MissingValue(StoreError):
    """ Port not produced in this frame. """

    def __init__(self, component, port):
        super(MissingValue, self).__init__('{}.{} has no value'.format(component, port))
        self.component = component
        self.port = port


class WrongType(StoreError):
    """ Value does not match the port type. """


class DuplicateWrite(StoreError):
    """ Port written twice in one frame. """


class SealedStore(StoreError):
    """ Write after the frame was sealed. """


class FrameStore(object):
    """ Typed values at every output port for one frame.

    Single writer until `seal`, then any number of readers.
    """

    def __init__(self, graph, frame_id):
        """ Initialize store.

        :param graph: PipelineGraph the values belong to.
        :param frame_id: Frame number.
        """
        self._graph = graph
        self._frame_id = frame_id
        self._values = {}
        self._derived = {}
        self._sealed = False
        self._lock = threading.Lock()
        self.computations = 0

    @property
    def graph(self):
        """ Graph the store was created for. """
        return self._graph

    @property
    def frame_id(self):
        """ Frame number. """
        return self._frame_id

    @property
    def sealed(self):
        """ Is the frame complete? """
        return self._sealed

    def put(self, component, port, value):
        """ Store a port value.

        :param component: Component name.
        :param port: Output port name.
        :param value: Value of the port's declared type.
        """
        if self._sealed:
            raise SealedStore('frame {} is sealed'.format(self._frame_id))
        port_type = self._graph.output_type(component, port)
        if not isinstance(value, TYPE_CLASSES[port_type]):
            raise WrongType('{}.{} expects {}, got {}'.format(
                component, port, port_type, type(value).__name__))
        key = (component, port)
        if key in self._values:
            raise DuplicateWrite('{}.{} already written in frame {}'.format(
                component, port, self._frame_id))
        self._values[key] = value

    def seal(self):
        """ Close the frame for writing. """
        self._sealed = True

    def tap(self, component, port, attribute=None):
        """ Read a port value, or a derived attribute of it.

        :param component: Component name.
        :param port: Output port name.
        :param attribute: Optional derived attribute, e.g. `histogram`.
        :returns: Stored or derived value.
        """
        self._graph.output_type(component, port)
        key = (component, port)
        if key not in self._values:
            raise MissingValue(component, port)
        if attribute is None:
            return self._values[key]
        if attribute not in DERIVED:
            raise UnknownPort('{}.{}.{}'.format(component, port, attribute))
        with self._lock:
            cache_key = key + (attribute,)
            if cache_key not in self._derived:
                self._derived[cache_key] = DERIVED[attribute](self._values[key])
                self.computations += 1
            return self._derived[cache_key]

    def keys(self):
        """ Stored (component, port) pairs. """
        return sorted(self._values)

    def __len__(self):
        return len(self._values)

    def __contains__(self, key):
        return key in self._values

    def __eq__(self, other):
        return (isinstance(other, FrameStore) and
                self._frame_id == other.frame_id and
                self.keys() == other.keys() and
                all(self._values[key] == other.tap(*key) for key in self._values))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

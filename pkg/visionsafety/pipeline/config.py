""" Pipeline configuration documents.

A pipeline document is YAML with these keys:

    calibration:      inline mapping, or a path relative to the document
    components:       list of {name, kind, ...kind parameters}; optional,
                      the stereo pipeline is built when absent
    connectors:       list of "Producer.port -> Consumer.port"
    disparity:        {block, max_disparity} for the built-in pipeline
    regions:          name -> [xmin, ymin, zmin, xmax, ymax, zmax]
    safety_functions: rule id -> list of safety function names
"""

import logging
import os
from collections import namedtuple

import yaml

from visionsafety.kernels import CalibrationInfo
from visionsafety.pipeline import (
    Connector, PipelineGraph, Region, build_stereo_pipeline, component_factory)

_LOGGER = logging.getLogger(__name__)

KEYS = ('calibration', 'components', 'connectors', 'disparity', 'regions', 'safety_functions')


class ConfigError(ValueError):
    """ Configuration document is invalid. """


PipelineConfig = namedtuple('PipelineConfig', 'graph safety_functions path')


def load_yaml(path):
    """ Read a YAML mapping.

    :param path: Document path.
    :returns: dict.
    """
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = yaml.safe_load(handle)
    except yaml.YAMLError as err:
        raise ConfigError('{}: {}'.format(path, err))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError('{}: expected a mapping at top level'.format(path))
    return data


def load_calibration(value, base_dir='.'):
    """ Resolve the calibration entry of a document.

    :param value: Mapping, path string or None.
    :param base_dir: Directory relative paths are resolved against.
    :returns: CalibrationInfo.
    """
    if value is None:
        return CalibrationInfo()
    if isinstance(value, str):
        path = os.path.join(base_dir, value)
        return load_calibration(load_yaml(path), os.path.dirname(path))
    try:
        return CalibrationInfo.from_dict(value)
    except (TypeError, ValueError) as err:
        raise ConfigError('calibration: {}'.format(err))


def pipeline_from_dict(data, base_dir='.'):
    """ Build a validated graph from a pipeline document.

    :param data: Parsed document.
    :param base_dir: Directory of the document.
    :returns: (PipelineGraph, safety function mapping).
    """
    unknown = set(data) - set(KEYS)
    if unknown:
        raise ConfigError('unknown pipeline keys: {}'.format(', '.join(sorted(unknown))))
    calib = load_calibration(data.get('calibration'), base_dir)
    if 'components' in data:
        components = []
        for entry in data['components']:
            params = dict(entry)
            try:
                name = params.pop('name')
                kind = params.pop('kind')
            except KeyError as err:
                raise ConfigError('component entry {!r} lacks {}'.format(entry, err))
            components.append(component_factory(name, kind, **params))
        connectors = [Connector.parse(text) for text in data.get('connectors', ())]
        graph = PipelineGraph(components, connectors, calibration=calib)
    else:
        disparity = data.get('disparity') or {}
        if set(disparity) - {'block', 'max_disparity'}:
            raise ConfigError('disparity accepts block and max_disparity only')
        graph = build_stereo_pipeline(calib, **disparity)
    for name, box in (data.get('regions') or {}).items():
        graph = graph.add_region(Region.from_box(name, box))
    mapping = {}
    for rule_id, functions in (data.get('safety_functions') or {}).items():
        if isinstance(functions, str):
            functions = [functions]
        mapping[str(rule_id)] = frozenset(functions)
    return graph, mapping


def load_pipeline(path):
    """ Load a pipeline document.

    :param path: YAML path.
    :returns: PipelineConfig.
    """
    graph, mapping = pipeline_from_dict(load_yaml(path), os.path.dirname(path))
    _LOGGER.info("Loaded %s from %s", graph, path)
    return PipelineConfig(graph, mapping, path)

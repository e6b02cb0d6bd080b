#!/usr/bin/python
# -*- coding: utf-8 -*-
#
# Copyright 2026 exocloak developers
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.

from __future__ import absolute_import, division, print_function, \
    with_statement

import os
import json
import logging

import numpy as np


class NumericalError(Exception):
    pass


class DomainError(NumericalError, ValueError):
    pass


class GeometryError(NumericalError):
    pass


class SingularityError(NumericalError):
    pass


class ResonanceError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class CoefficientOverflowError(NumericalError):
    pass


class ConfigError(Exception):
    def __init__(self, field, message):
        Exception.__init__(self, '%s: %s' % (field, message))
        self.field = field


class NearSurfaceWarning(UserWarning):
    pass


def to_plain(obj):
    # json can't serialize numpy scalars or arrays
    if isinstance(obj, dict):
        return dict((str(k), to_plain(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, obj):
    with open(path, 'w') as f:
        json.dump(to_plain(obj), f, indent=2, sort_keys=True)
        f.write('\n')
    logging.debug('wrote %s' % path)
    return path


def write_csv(path, fields, columns):
    """write equal-length columns as CSV with a single header line"""
    data = np.column_stack([np.asarray(c, dtype=float).ravel()
                            for c in columns])
    np.savetxt(path, data, delimiter=',', header=','.join(fields),
               comments='', fmt='%.17g')
    logging.debug('wrote %s (%d rows)' % (path, data.shape[0]))
    return path


def scale_to_bytes(values, vmin, vmax):
    values = np.asarray(values, dtype=float)
    if vmax <= vmin:
        return np.zeros(values.shape, dtype=np.uint8)
    t = (values - vmin) / (vmax - vmin)
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    return np.round(255.0 * t).astype(np.uint8)


def mask_to_bytes(mask):
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def write_pgm(path, image):
    # binary greymap, one byte per cell, first row at the top
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError('pgm image must be two dimensional')
    rows, cols = image.shape
    with open(path, 'wb') as f:
        f.write(('P5\n%d %d\n255\n' % (cols, rows)).encode('ascii'))
        f.write(image.tobytes())
    logging.debug('wrote %s (%dx%d)' % (path, cols, rows))
    return path


def read_pgm(path):
    with open(path, 'rb') as f:
        data = f.read()
    fields = data.split(b'\n', 3)
    if fields[0] != b'P5':
        raise ValueError('%s is not a binary pgm file' % path)
    cols, rows = [int(v) for v in fields[1].split()]
    body = np.frombuffer(fields[3], dtype=np.uint8)
    return body.reshape(rows, cols)


def ensure_dir(path):
    if not os.path.isdir(path):
        os.makedirs(path)
    return path


def test_pgm_header():
    import tempfile
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    with tempfile.TemporaryDirectory() as d:
        path = write_pgm(os.path.join(d, 'a.pgm'), img)
        with open(path, 'rb') as f:
            assert f.read(11) == b'P5\n4 3\n255\n'
        assert (read_pgm(path) == img).all()


def test_csv_header():
    import tempfile
    with tempfile.TemporaryDirectory() as d:
        path = write_csv(os.path.join(d, 'a.csv'), ['x', 'y', 're_u'],
                         [[0, 1], [2, 3], [0.5, -0.25]])
        with open(path) as f:
            lines = f.read().splitlines()
        assert lines[0] == 'x,y,re_u'
        assert lines[2] == '1,3,-0.25'


def test_scale_to_bytes():
    b = scale_to_bytes([-1.0, 0.0, 1.0, 5.0], -1.0, 1.0)
    assert list(b) == [0, 128, 255, 255]
    assert list(mask_to_bytes([True, False])) == [255, 0]


def test_to_plain():
    obj = to_plain({'a': np.float64(1.5), 'b': np.arange(2), 1: 2j})
    assert obj == {'a': 1.5, 'b': [0, 1], '1': [0.0, 2.0]}
    json.dumps(obj)


if __name__ == '__main__':
    test_pgm_header()
    test_csv_header()
    test_scale_to_bytes()
    test_to_plain()

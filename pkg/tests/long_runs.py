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

"""long runs at delta = 6 wavelengths; exit status 1 when a check fails"""

from __future__ import absolute_import, division, print_function, \
    with_statement

import os
import sys
import math
import time
import argparse

sys.path.insert(0, os.path.join(os.path.dirname(os.path.realpath(__file__)),
                                '..'))

import numpy as np

from exocloak import shell, helmholtz3d
from exocloak.common import ensure_dir, write_json
from exocloak.specfun import WaveContext

parser = argparse.ArgumentParser(description='exocloak long runs')
parser.add_argument('--lambda', dest='wavelength', type=float, default=1.0)
parser.add_argument('--delta-over-lambda', type=float, default=6.0)
parser.add_argument('--N', dest='order', type=int, default=None)
parser.add_argument('--threshold', type=float, default=0.05)
parser.add_argument('--suppression', type=float, default=0.1)
parser.add_argument('--equivalence', type=float, default=1e-6)
parser.add_argument('--level', type=float, default=100.0)
parser.add_argument('--refine', type=int, default=1)
parser.add_argument('--out', type=str, default=None)
parser.add_argument('-v', '--verbose', action='count', default=0)

config = parser.parse_args()
shell.setup_logging(config.verbose)

ctx = WaveContext.from_wavelength(config.wavelength)
delta = config.delta_over_lambda * config.wavelength
geometry = helmholtz3d.make_tetra_cloak(delta / 3.0, delta, ctx)
incident = helmholtz3d.incident_plane_wave(np.ones(3) / math.sqrt(3.0), ctx)
order = config.order
if order is None:
    order = helmholtz3d.truncation_order(delta, ctx)

start = time.time()
quads = geometry.face_quadratures(config.refine)
devices = helmholtz3d.multipole_coefficients(geometry, incident, order, quads)
metrics = helmholtz3d.cloak_metrics(devices, incident, geometry)
suppression = helmholtz3d.scatterer_suppression(devices, incident, geometry)

# series against the layer potential at 50 points 1.5 r from every device
rng = np.random.RandomState(7)
points = []
while len(points) < 50:
    x = rng.uniform(-4 * delta, 4 * delta, size=3)
    d = np.linalg.norm(geometry.devices - x, axis=1)
    if np.linalg.norm(x) <= 4 * delta and \
            d.min() >= 1.5 * geometry.ball_radius:
        points.append(x)
points = np.array(points)
direct = helmholtz3d.green_device_field(geometry, incident, points, quads)
series = helmholtz3d.device_field(devices, points)
equivalence = (np.abs(series - direct) /
               np.maximum(1.0, np.abs(direct))).max()
extended = helmholtz3d.extended_device_analysis(devices, config.level,
                                                geometry)
spots = extended.spots()
elapsed = time.time() - start

checks = [
    ('interior residual', metrics.interior_residual, config.threshold),
    ('exterior leakage', metrics.exterior_leakage, config.threshold),
    ('series vs Green', equivalence, config.equivalence),
]
result = 0
for name, value, limit in checks:
    ok = value < limit
    print('%-18s %10.4g  (limit %g)  %s' % (name, value, limit,
                                            'OK' if ok else 'FAILED'))
    if not ok:
        result = 1
ok = suppression.ratio <= config.suppression
print('%-18s %10.4g  (limit %g)  %s' % ('scatter ratio', suppression.ratio,
                                        config.suppression,
                                        'OK' if ok else 'FAILED'))
if not ok:
    result = 1
print('%-18s %10d  (open %.2f%% at level %g)  %s'
      % ('device spots', spots, extended.open_area_percent, config.level,
         'OK' if spots == 4 else 'FAILED'))
if spots != 4:
    result = 1
print('N = %d, %.1f s' % (order, elapsed))

if config.out:
    ensure_dir(config.out)
    write_json(os.path.join(config.out, 'long_runs.json'), {
        'delta': delta, 'sigma': geometry.sigma, 'N': order,
        'lambda': config.wavelength,
        'interior_residual': metrics.interior_residual,
        'exterior_leakage': metrics.exterior_leakage,
        'series_vs_green': equivalence,
        'scatter_active': suppression.active,
        'scatter_inactive': suppression.inactive,
        'scatter_ratio': suppression.ratio,
        'level': config.level,
        'open_area_percent': extended.open_area_percent,
        'spots': spots,
        'seconds': elapsed, 'version': shell.get_version(),
    })

sys.exit(result)

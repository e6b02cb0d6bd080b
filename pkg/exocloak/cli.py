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
import sys
import math
import logging

if __name__ == '__main__':
    import inspect
    file_path = os.path.dirname(os.path.realpath(
        inspect.getfile(inspect.currentframe())))
    sys.path.insert(0, os.path.join(file_path, '../'))

import numpy as np

from exocloak import shell, laplace2d, helmholtz3d, elastica
from exocloak.common import ConfigError, NumericalError, ResonanceError, \
    write_json, write_csv, write_pgm, scale_to_bytes, mask_to_bytes, \
    ensure_dir
from exocloak.specfun import WaveContext

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SLICE_ROWS = ('device', 'active', 'inactive')
EXTENDED_WIDTH = 360
EXTENDED_POINTS = EXTENDED_WIDTH * (EXTENDED_WIDTH // 2)


class Manifest(object):
    """every output file with the parameters that produced it"""

    def __init__(self, out, config):
        self.out = ensure_dir(out)
        self.config = config
        self.files = []

    def path(self, name):
        return os.path.join(self.out, name)

    def add(self, path, **params):
        self.files.append({'name': os.path.relpath(path, self.out),
                           'parameters': params})
        return path

    def write(self):
        params = dict((k, v) for k, v in self.config.items()
                      if k != 'verbose')
        path = write_json(self.path('manifest.json'),
                          {'command': self.config['command'],
                           'config': params, 'files': self.files,
                           'version': shell.get_version()})
        logging.info('wrote %d files and %s' % (len(self.files), path))
        return path


def _log_map(values, decades=8):
    top = 2.0
    with np.errstate(divide='ignore'):
        v = np.log10(values)
    return scale_to_bytes(v, top - decades, top)


def cmd_poly_map(config, manifest):
    n, s, beta, L = config['n'], config['s'], config['beta'], config['L']
    x0, x1, y0, y1 = config['window']
    level = config['level']
    params = {'n': n, 's': s, 'beta': beta, 'L': L}
    p = laplace2d.cloak_polynomial(n, s, beta)
    z = laplace2d.sample_grid((x0, x1), (y0, y1), config['resolution'])
    abs_p = np.abs(p(z))
    abs_m = np.abs(p.minus_one(z))
    labels = laplace2d.region_labels(z, beta, L)
    logging.info('P_{%d,%d}: |P| < %g on %.1f%% and |P - 1| < %g on '
                 '%.1f%% of the window' %
                 (n, s, level, 100.0 * np.mean(abs_p < level), level,
                  100.0 * np.mean(abs_m < level)))

    manifest.add(write_csv(manifest.path('poly_map.csv'),
                           ['x', 'y', 'abs_p', 'abs_p_minus_one', 'region'],
                           [z.real, z.imag, abs_p, abs_m, labels]),
                 window=config['window'], **params)
    for name, values in (('abs_p', abs_p), ('abs_p_minus_one', abs_m)):
        manifest.add(write_pgm(manifest.path(name + '.pgm'),
                               _log_map(values)),
                     scale='log10 over [-6, 2]', **params)
        manifest.add(write_pgm(manifest.path(name + '_level.pgm'),
                               mask_to_bytes(values < level)),
                     level=level, **params)
    manifest.add(write_pgm(manifest.path('region.pgm'),
                           (127 * labels).astype(np.uint8)),
                 labels={'0': laplace2d.OUTSIDE,
                         '127': laplace2d.ORIGIN_SIDE,
                         '254': laplace2d.C_STAR_SIDE}, **params)

    boundary = laplace2d.convergence_region_boundary(beta, L)
    lobes, xs, ys = [], [], []
    for lobe, label in enumerate((laplace2d.ORIGIN_SIDE,
                                  laplace2d.C_STAR_SIDE), 1):
        pts = boundary[label]
        lobes.append(np.full(len(pts), lobe))
        xs.append(pts.real)
        ys.append(pts.imag)
    manifest.add(write_csv(manifest.path('region_boundary.csv'),
                           ['lobe', 'x', 'y'],
                           [np.concatenate(lobes), np.concatenate(xs),
                            np.concatenate(ys)]),
                 beta=beta, L=L)
    intervals = laplace2d.convergence_region_intervals(beta, L)
    manifest.add(write_json(manifest.path('polynomial.json'), {
        'n': n, 's': s, 'beta': beta, 'L': L,
        'exact_coefficients': [str(c) for c in p.exact],
        'coefficients': p.coeffs.real,
        'saddle': intervals['saddle'],
        'origin_side': intervals[laplace2d.ORIGIN_SIDE],
        'c_star_side': intervals[laplace2d.C_STAR_SIDE],
    }), **params)


def cmd_laplace_demo(config, manifest):
    geometry = laplace2d.CloakGeometry2D.from_beta(
        config['beta'], config['p'], config['far_radius'],
        config['device_radius'])
    disk = laplace2d.DielectricDisk(config['p'], config['radius'],
                                    config['eps'])
    q0 = laplace2d.probe_approximant(lambda w: 1.0 / w, geometry.beta,
                                     geometry.alpha, config['degree'])
    p = laplace2d.cloak_polynomial(config['n'], config['s'], geometry.beta)
    x0, x1, y0, y1 = config['window']
    z = laplace2d.sample_grid((x0, x1), (y0, y1), config['resolution'])
    params = {'p': config['p'], 'radius': config['radius'],
              'eps': config['eps'], 'n': config['n'], 's': config['s'],
              'a': geometry.a, 'beta': geometry.beta,
              'alpha': geometry.alpha}
    logging.info('%r, %r, reflection factor %.4g'
                 % (geometry, disk, disk.reflection))

    def probe(w):
        return np.asarray(w, dtype=complex)

    maps = (
        ('field_active', laplace2d.total_field(z, probe, q0, p, disk)),
        ('field_inactive', laplace2d.total_field(z, probe, disk=disk)),
        ('field_no_disk', laplace2d.total_field(z, probe, q0, p)),
    )
    clip = max(abs(x0), abs(x1))
    for name, u in maps:
        manifest.add(write_csv(manifest.path(name + '.csv'),
                               ['x', 'y', 're_u'], [z.real, z.imag, u]),
                     **params)
        manifest.add(write_pgm(manifest.path(name + '.pgm'),
                               scale_to_bytes(u, -clip, clip)),
                     min=-clip, max=clip, **params)
    manifest.add(write_pgm(manifest.path('disk.pgm'),
                           mask_to_bytes(disk.contains(z))), **params)


def _geometry(config, delta=None):
    ctx = WaveContext.from_wavelength(config['lambda'])
    if delta is None:
        return ctx, helmholtz3d.make_tetra_cloak(config['sigma'],
                                                 config['delta'], ctx)
    return ctx, helmholtz3d.make_tetra_cloak(delta / 3.0, delta, ctx)


def _check_budget(config, geometry, order, eval_points):
    sizes = helmholtz3d.estimate_node_count(geometry, order,
                                            config['refine'], eval_points)
    logging.debug('sizing: %r' % sizes)
    if sizes['work'] > config['budget']:
        raise ConfigError('budget', 'estimated kernel work %.3g exceeds '
                          '%.3g (%d face nodes, %d modes, %d field points);'
                          ' lower the resolution or raise --budget'
                          % (sizes['work'], config['budget'],
                             sizes['total_face_nodes'], sizes['modes'],
                             eval_points))
    return sizes


def _devices(config, geometry, order):
    direction = np.asarray(config['incident_dir'])
    incident = helmholtz3d.incident_plane_wave(
        direction / np.linalg.norm(direction), geometry.ctx,
        config['amplitude'])
    quads = geometry.face_quadratures(config['refine'])
    devices = helmholtz3d.multipole_coefficients(geometry, incident, order,
                                                 quads)
    return incident, devices


def _extended_devices(config, devices, geometry):
    # the level is relative to the incident amplitude
    level = config['level'] * max(config['amplitude'], 1e-300)
    return helmholtz3d.extended_device_analysis(devices, level, geometry,
                                                EXTENDED_WIDTH)


def _quadrature_params(geometry, sizes, order, refine):
    return {'spacing': geometry.ctx.wavelength / 8.0, 'refine': refine,
            'face_nodes': sizes['face_nodes'],
            'sphere_order': order, 'sphere_nodes': sizes['sphere_nodes']}


def cmd_helm_slices(config, manifest):
    ctx, geometry = _geometry(config)
    order = config['order']
    if order is None:
        order = helmholtz3d.truncation_order(geometry.delta, ctx)
    res = config['resolution']
    heights = list(config['slice_z'])
    _check_budget(config, geometry, order,
                  len(heights) * res * res + EXTENDED_POINTS)
    incident, devices = _devices(config, geometry, order)
    scatter_on = scatter_off = None
    if config['scatterer'] > 0:
        def active(x):
            return incident(x) + devices(x)
        scatter_on = helmholtz3d.soundsoft_sphere_scatter(
            active, config['scatterer'], ctx)
        scatter_off = helmholtz3d.soundsoft_sphere_scatter(
            incident, config['scatterer'], ctx)

    half_width = 1.5 * geometry.delta
    clip = 2.0 * config['amplitude'] if config['amplitude'] > 0 else 2.0
    params = {'delta': geometry.delta, 'sigma': geometry.sigma,
              'lambda': ctx.wavelength, 'N': order,
              'scatterer': config['scatterer']}
    for i, z in enumerate(heights):
        ud = helmholtz3d.slice_field(devices, z, half_width, res)
        ui = helmholtz3d.slice_field(incident, z, half_width, res)
        rows = {'device': ud.values, 'active': ui.values + ud.values,
                'inactive': ui.values}
        if scatter_on is not None:
            pts = np.stack([ud.x, ud.y, np.full(ud.x.shape, z)], axis=-1)
            rows['active'] = rows['active'] + scatter_on(pts)
            rows['inactive'] = rows['inactive'] + scatter_off(pts)
        for row in SLICE_ROWS:
            grid = ud._replace(values=rows[row])
            prefix = manifest.path('slice_%s_z%d' % (row, i))
            meta = dict(params, row=row)
            for path in helmholtz3d.export_slice(grid, prefix, meta, clip):
                manifest.add(path, row=row, z=z, **params)
    m = _extended_devices(config, devices, geometry)
    manifest.add(write_pgm(manifest.path('extended_devices.pgm'), m.image()),
                 level=config['level'], **params)
    manifest.add(write_json(manifest.path('extended_devices.json'),
                            dict(m.to_dict(), **params)),
                 level=config['level'], **params)


def cmd_helm_perf(config, manifest):
    rows = []
    for ratio in config['sweep']:
        ctx, geometry = _geometry(config, ratio * config['lambda'])
        order = helmholtz3d.truncation_order(geometry.delta, ctx)
        sizes = _check_budget(config, geometry, order, EXTENDED_POINTS)
        incident, devices = _devices(config, geometry, order)
        metrics = helmholtz3d.cloak_metrics(devices, incident, geometry)
        extended = _extended_devices(config, devices, geometry)
        entry = {'delta_over_lambda': ratio, 'delta': geometry.delta,
                 'sigma': geometry.sigma, 'N': order,
                 'interior_residual': metrics.interior_residual,
                 'exterior_leakage': metrics.exterior_leakage,
                 'zero_incident': metrics.zero_incident,
                 'level': config['level'],
                 'open_area_percent': extended.open_area_percent,
                 'spots': extended.spots(),
                 'quadrature': _quadrature_params(geometry, sizes, order,
                                                  config['refine'])}
        if not metrics.zero_incident:
            sup = helmholtz3d.scatterer_suppression(devices, incident,
                                                    geometry)
            entry.update({'scatter_active': sup.active,
                          'scatter_inactive': sup.inactive,
                          'scatter_ratio': sup.ratio})
        rows.append(entry)
    params = {'sweep': config['sweep'], 'lambda': config['lambda'],
              'level': config['level']}
    columns = ('delta_over_lambda', 'N', 'interior_residual',
               'exterior_leakage', 'open_area_percent')
    manifest.add(write_json(manifest.path('metrics.json'), rows), **params)
    manifest.add(write_csv(manifest.path('metrics.csv'), list(columns),
                           [[r[k] for r in rows] for k in columns]),
                 **params)


def cmd_tetra_geom(config, manifest):
    ctx, geometry = _geometry(config)
    report = geometry.to_dict()
    tangency = helmholtz3d.measure_tangency(geometry)
    order = helmholtz3d.truncation_order(geometry.delta, ctx)
    report.update(tangency)
    report.update({
        'r_eff_star_over_delta': helmholtz3d.r_eff_star(1.0),
        'N': order,
        'sizes': helmholtz3d.estimate_node_count(geometry, order,
                                                 config['refine']),
    })
    if not tangency['tangent']:
        logging.info('sigma = %g is off delta / 3: the cloaked ball of '
                     'radius %.6g is short of r_eff* = %.6g'
                     % (geometry.sigma, tangency['cloaked_radius'].min(),
                        helmholtz3d.r_eff_star(geometry.delta)))
    params = {'sigma': geometry.sigma, 'delta': geometry.delta,
              'lambda': ctx.wavelength}
    manifest.add(write_json(manifest.path('geometry.json'), report),
                 **params)
    manifest.add(write_csv(manifest.path('devices.csv'),
                           ['x', 'y', 'z', 'face_radius', 'face_clearance',
                            'cloaked_radius'],
                           [geometry.devices[:, 0], geometry.devices[:, 1],
                            geometry.devices[:, 2], tangency['face_radius'],
                            tangency['face_clearance'],
                            tangency['cloaked_radius']]), **params)


def cmd_elastic_verify(config, manifest):
    spec = elastica.default_torque_spec().replace(k=config['k'],
                                                  m=config['mass'])
    K = elastica.measure_K(spec)
    pinned = math.isinf(spec.m)
    mass = 1.0 if pinned else spec.m
    ratios = np.geomspace(0.25, 16.0, config['frequencies'])
    net = elastica.build_torque_spring(spec)
    network = None
    if config['network']:
        with open(config['network']) as f:
            network = elastica.network_from_json(f.read())
        for kind, a, b in elastica.find_spring_intersections(network):
            logging.warning('network %s: spring %d meets %s %d'
                            % (config['network'], a, kind, b))
    sweep = []
    for ratio in ratios:
        omega = math.sqrt(ratio * K / mass)
        entry = {'omega': omega,
                 'resonance_proximity':
                     elastica.resonance_proximity(K, spec.m, omega)}
        try:
            kp = elastica.torque_spring_constant(K, spec.m, omega)
            S = elastica.dynamic_condensation(net, omega)
            expected = elastica.two_terminal_block(kp, spec.v)
            entry.update({'k_prime': kp,
                          'residual': np.abs(S - expected).max() / abs(kp),
                          'resonance': False})
            if network is not None and network.terminals:
                entry['network_response'] = elastica.response_to_json(
                    elastica.dynamic_condensation(network, omega), omega,
                    network.terminals)
        except ResonanceError as e:
            logging.warning('omega = %.6g: %s' % (omega, e))
            entry['resonance'] = True
        sweep.append(entry)
    worst = max([e['residual'] for e in sweep if not e['resonance']] or
                [0.0])
    report = {
        'spec': spec.to_dict(),
        'K': K,
        'pinned': pinned,
        'sweep': sweep,
        'worst_residual': worst,
        'tensor_checks': elastica.transformation_checks(seed=config['seed']),
    }
    logging.info('torque spring K = %.12g, worst condensation residual '
                 '%.3g over %d frequencies' % (K, worst, len(sweep)))
    manifest.add(write_json(manifest.path('elastic_report.json'), report),
                 k=spec.k, m=config['mass'], seed=config['seed'])


COMMAND_TABLE = {
    'poly-map': cmd_poly_map,
    'laplace-demo': cmd_laplace_demo,
    'helm-slices': cmd_helm_slices,
    'helm-perf': cmd_helm_perf,
    'tetra-geom': cmd_tetra_geom,
    'elastic-verify': cmd_elastic_verify,
}


def run(config):
    """dispatch one validated config; the manifest is written last"""
    manifest = Manifest(config['out'], config)
    COMMAND_TABLE[config['command']](config, manifest)
    manifest.write()
    return manifest


def main(argv=None):
    shell.check_python()
    try:
        config = shell.get_config(argv)
        shell.log_version()
        run(config)
    except ConfigError as e:
        logging.error('invalid field %s' % e.field)
        shell.print_exception(e)
        sys.exit(EXIT_CONFIG)
    except NumericalError as e:
        shell.print_exception(e)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(EXIT_OK)


def _run_in(tmp, *argv):
    try:
        main(list(argv) + ['-o', tmp, '-q'])
    except SystemExit as e:
        return e.code
    finally:
        shell.setup_logging(0)


def test_poly_map_outputs():
    import json
    import tempfile
    from exocloak.common import read_pgm
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'poly-map', '--n=5', '--s=25',
                   '--resolution=41') == EXIT_OK
    with open(os.path.join(tmp, 'manifest.json')) as f:
        manifest = json.load(f)
    names = [e['name'] for e in manifest['files']]
    assert 'poly_map.csv' in names and 'region_boundary.csv' in names
    assert manifest['version'] == shell.get_version()
    assert read_pgm(os.path.join(tmp, 'region.pgm')).shape == (41, 41)
    with open(os.path.join(tmp, 'polynomial.json')) as f:
        poly = json.load(f)
    assert poly['exact_coefficients'][0] == '1' and poly['L'] == 5.0
    # a window away from both lobes is all outside
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'poly-map', '--window=5,6,5,6',
                   '--resolution=5') == EXIT_OK
    assert not read_pgm(os.path.join(tmp, 'region.pgm')).any()


def test_poly_map_is_deterministic():
    import tempfile
    first, second = tempfile.mkdtemp(), tempfile.mkdtemp()
    for tmp in (first, second):
        assert _run_in(tmp, 'poly-map', '--resolution=21') == EXIT_OK
    for name in ('poly_map.csv', 'polynomial.json', 'abs_p.pgm'):
        with open(os.path.join(first, name), 'rb') as a, \
                open(os.path.join(second, name), 'rb') as b:
            assert a.read() == b.read()


def test_exit_codes():
    import tempfile
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'poly-map', '--n=0') == EXIT_CONFIG
    assert _run_in(tmp, 'laplace-demo', '--eps=-1') == EXIT_CONFIG
    assert _run_in(tmp, 'fly') == EXIT_CONFIG
    assert _run_in(tmp, 'helm-slices', '--budget=10') == EXIT_CONFIG
    assert _run_in(tmp, 'poly-map', '--no-such-flag=1') == EXIT_CONFIG
    assert _run_in(tmp, 'elastic-verify', '--mass=-1') == EXIT_CONFIG


def test_tetra_geom_report():
    import json
    import tempfile
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'tetra-geom', '--delta=1.5') == EXIT_OK
    with open(os.path.join(tmp, 'geometry.json')) as f:
        report = json.load(f)
    assert report['optimal'] and report['tangent']
    assert report['faces_inside_balls'] and report['N'] == 15
    assert abs(report['ball_radius'] - 2 * math.sqrt(2) * 1.5 / 3) < 1e-12
    assert abs(report['r_eff_star_over_delta'] -
               (1 - 2 * math.sqrt(2) / 3)) < 1e-12
    assert np.allclose(report['face_clearance'], 1.5 - 0.5 / 3)
    # off sigma = delta / 3 the cloaked ball no longer reaches r_eff*
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'tetra-geom', '--delta=1.5', '--sigma=0.3') == \
        EXIT_OK
    with open(os.path.join(tmp, 'geometry.json')) as f:
        report = json.load(f)
    assert not report['optimal'] and not report['tangent']
    assert max(report['cloaked_radius']) < report['r_eff_star']
    with open(os.path.join(tmp, 'devices.csv')) as f:
        assert f.readline().strip() == \
            'x,y,z,face_radius,face_clearance,cloaked_radius'


def test_elastic_verify_report():
    import json
    import tempfile
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'elastic-verify') == EXIT_OK
    with open(os.path.join(tmp, 'elastic_report.json')) as f:
        report = json.load(f)
    assert len(report['sweep']) == 10 and report['worst_residual'] < 1e-10
    assert report['tensor_checks']['willis'] < 1e-6
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'elastic-verify', '--mass=pinned',
                   '--frequencies=3') == EXIT_OK
    with open(os.path.join(tmp, 'elastic_report.json')) as f:
        report = json.load(f)
    assert all(abs(e['k_prime'] - report['K']) < 1e-12 * report['K']
               for e in report['sweep'])


def test_laplace_demo():
    import tempfile
    from exocloak.common import read_pgm
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'laplace-demo') == EXIT_OK
    assert read_pgm(os.path.join(tmp, 'field_active.pgm')).shape == \
        (161, 161)
    with open(os.path.join(tmp, 'field_active.csv')) as f:
        assert f.readline().strip() == 'x,y,re_u'
    active = np.loadtxt(os.path.join(tmp, 'field_active.csv'),
                        delimiter=',', skiprows=1)
    inactive = np.loadtxt(os.path.join(tmp, 'field_inactive.csv'),
                          delimiter=',', skiprows=1)
    assert active.shape == (161 * 161, 3)
    assert np.isfinite(active[:, 2]).sum() >= 161 * 161 - 1
    assert not np.allclose(active, inactive, equal_nan=True)
    # no contrast: the disk adds nothing to the active map
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'laplace-demo', '--eps=1', '--resolution=21') == \
        EXIT_OK
    active = np.loadtxt(os.path.join(tmp, 'field_active.csv'),
                        delimiter=',', skiprows=1)
    free = np.loadtxt(os.path.join(tmp, 'field_no_disk.csv'),
                      delimiter=',', skiprows=1)
    assert np.allclose(active, free, equal_nan=True)


def test_helm_slices_zero_incident():
    import json
    import tempfile
    from exocloak.common import read_pgm
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'helm-slices', '--delta=1.5', '--amplitude=0',
                   '--resolution=9', '--level=5') == EXIT_OK
    img = read_pgm(os.path.join(tmp, 'slice_device_z2.pgm'))
    assert (img == 128).all()
    with open(os.path.join(tmp, 'slice_active_z0.json')) as f:
        meta = json.load(f)
    for key in ('min', 'max', 'z', 'lambda', 'delta', 'sigma', 'N'):
        assert key in meta
    assert meta['N'] == 15 and meta['z'] == -1.0 and meta['sigma'] == 0.5
    with open(os.path.join(tmp, 'extended_devices.json')) as f:
        extended = json.load(f)
    assert extended['open_area_percent'] == 100.0 and extended['spots'] == 0


def test_helm_slices_heights_and_direction():
    import json
    import tempfile
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'helm-slices', '--lambda=1', '--delta=1.5',
                   '--incident-dir=0,0,1', '--slice-z=0,0.25',
                   '--resolution=9') == EXIT_OK
    with open(os.path.join(tmp, 'manifest.json')) as f:
        manifest = json.load(f)
    names = [e['name'] for e in manifest['files']]
    assert 'slice_inactive_z1.csv' in names
    assert 'slice_inactive_z2.csv' not in names
    assert manifest['config']['incident_dir'] == [0.0, 0.0, 1.0]
    inactive = np.loadtxt(os.path.join(tmp, 'slice_inactive_z1.csv'),
                          delimiter=',', skiprows=1)
    # a wave along z is constant on every slice z = 0.25
    assert np.allclose(inactive[:, 2], 0.25)
    assert np.allclose(inactive[:, 3], math.cos(2 * math.pi * 0.25))
    assert np.allclose(inactive[:, 4], math.sin(2 * math.pi * 0.25))


def test_helm_perf_report():
    import json
    import tempfile
    tmp = tempfile.mkdtemp()
    assert _run_in(tmp, 'helm-perf', '--sweep=1.5,3') == EXIT_OK
    with open(os.path.join(tmp, 'metrics.json')) as f:
        rows = json.load(f)
    assert [r['delta_over_lambda'] for r in rows] == [1.5, 3.0]
    assert [r['N'] for r in rows] == [15, 29]
    for r in rows:
        for key in ('interior_residual', 'exterior_leakage',
                    'open_area_percent', 'quadrature'):
            assert key in r
        assert 0.0 <= r['open_area_percent'] <= 100.0
        assert r['quadrature']['sphere_order'] == r['N']
        assert r['quadrature']['spacing'] == 0.125
    assert rows[1]['open_area_percent'] <= rows[0]['open_area_percent']
    with open(os.path.join(tmp, 'metrics.csv')) as f:
        assert f.readline().strip() == 'delta_over_lambda,N,' \
            'interior_residual,exterior_leakage,open_area_percent'


if __name__ == '__main__':
    main()

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

"""Time-harmonic exterior cloak around a tetrahedron.

Green's formula on the boundary of the tetrahedron D gives a layer
potential equal to -u_i inside D and to 0 outside. Each face is then
replaced by one multipolar device sitting beyond it, the outgoing-wave
expansion of that face's layer potential, which agrees with it outside
the union A of the balls reaching from each device to its face.

Fields are objects with __call__(x) and, for incident fields, gradient(x);
points are arrays of shape (..., 3).
"""

from __future__ import absolute_import, division, print_function, \
    with_statement

import math
import logging
import warnings
from collections import namedtuple

import numpy as np
from scipy import ndimage

from exocloak.common import NumericalError, DomainError, GeometryError, \
    ResonanceError, CoefficientOverflowError, NearSurfaceWarning, \
    write_csv, write_json, write_pgm, scale_to_bytes
from exocloak.quadrature import face_quadrature, sphere_quadrature
from exocloak.specfun import WaveContext, MAX_DEGREE, UnitDirection, \
    mode_count, mode_degrees, regular_wave_table, \
    regular_wave_gradient_table, radiating_wave_table, \
    spherical_bessel_j_table, spherical_hankel1_table, sph_harm_table, \
    greens_function, greens_gradient_y

# complex entries per kernel block
_CHUNK = 1 << 20

HEURISTIC_FACTOR = 1.5


def _points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise DomainError('points must have a trailing axis of length 3')
    return x.reshape(-1, 3), x.shape[:-1]


def _shaped(values, shape):
    values = values.reshape(shape)
    if values.ndim == 0:
        return complex(values)
    return values


def r_eff_star(delta):
    """largest cloaked radius, reached at sigma = delta / 3"""
    return (1.0 - 2.0 * math.sqrt(2.0) / 3.0) * delta


def ball_radius(sigma, delta):
    return math.sqrt((sigma - delta / 3.0) ** 2 + 8.0 * delta * delta / 9.0)


class TetraCloakGeometry(object):

    def __init__(self, sigma, delta, ctx):
        if not sigma > 0:
            raise GeometryError('sigma > 0 violated (sigma = %r)' % sigma)
        if not delta > sigma:
            raise GeometryError('delta > sigma violated (%r <= %r)'
                                % (delta, sigma))
        self.sigma = float(sigma)
        self.delta = float(delta)
        self.ctx = ctx
        corners = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0],
                            [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
        self.vertices = self.sigma * corners / math.sqrt(3.0)
        self.devices = -(self.delta / self.sigma) * self.vertices
        self.ball_radius = ball_radius(self.sigma, self.delta)
        self.r_eff = self.delta - self.ball_radius
        self.optimal = abs(self.sigma - self.delta / 3.0) <= 1e-12 * delta
        if self.r_eff <= 0:
            logging.warning('device balls cover the origin, nothing is '
                            'cloaked (sigma=%g delta=%g)' % (sigma, delta))

    @property
    def faces(self):
        """face l is opposite vertex a_l and belongs to device x_l"""
        return [np.delete(self.vertices, l, axis=0) for l in range(4)]

    def face_quadratures(self, refine=1, spacing=None):
        if spacing is None:
            spacing = self.ctx.wavelength / 8.0
        return [face_quadrature(f, spacing, refine, interior=np.zeros(3))
                for f in self.faces]

    def contains(self, x):
        """points strictly inside the tetrahedron"""
        x, shape = _points(x)
        # face l lies in the plane a_l . y = -sigma^2 / 3
        s = x.dot(self.vertices.T) / self.sigma
        return np.all(s > -self.sigma / 3.0, axis=1).reshape(shape)

    def to_dict(self):
        return {
            'sigma': self.sigma,
            'delta': self.delta,
            'lambda': self.ctx.wavelength,
            'vertices': self.vertices,
            'devices': self.devices,
            'ball_radius': self.ball_radius,
            'r_eff': self.r_eff,
            'r_eff_star': r_eff_star(self.delta),
            'optimal': self.optimal,
        }

    def __repr__(self):
        return 'TetraCloakGeometry(sigma=%r, delta=%r)' % \
            (self.sigma, self.delta)


def make_tetra_cloak(sigma, delta, ctx):
    g = TetraCloakGeometry(sigma, delta, ctx)
    logging.debug('tetrahedral cloak sigma=%g delta=%g r=%g r_eff=%g%s'
                  % (g.sigma, g.delta, g.ball_radius, g.r_eff,
                     ' (optimal)' if g.optimal else ''))
    return g


def truncation_order(delta, ctx):
    if not delta > 0:
        raise DomainError('delta must be positive')
    n = int(math.ceil(HEURISTIC_FACTOR * ctx.k * delta * (1.0 - 1e-12)))
    if n > MAX_DEGREE:
        raise CoefficientOverflowError('truncation order %d exceeds %d'
                                       % (n, MAX_DEGREE))
    return n


def region_A_contains(geometry, x):
    x, shape = _points(x)
    d = np.linalg.norm(x[:, None, :] - geometry.devices[None], axis=-1)
    tol = 1e-12 * geometry.ball_radius
    return np.any(d <= geometry.ball_radius + tol, axis=1).reshape(shape)


def measure_tangency(geometry, tol=1e-12):
    """region A measured from the vertex coordinates

    face_radius[l] is the farthest point of face l from x_l, a vertex;
    face_clearance[l] the nearest. The balls leave a cloaked ball of radius
    min_l |x_l| - face_radius[l] around the origin, which reaches r_eff*
    and touches all four balls only at sigma = delta / 3.
    """
    face_radius = np.zeros(len(geometry.devices))
    clearance = np.zeros(len(geometry.devices))
    for l, (face, x) in enumerate(zip(geometry.faces, geometry.devices)):
        face_radius[l] = np.linalg.norm(face - x, axis=1).max()
        clearance[l] = face_quadrature(face, np.inf).distance(x)
    cloaked = np.linalg.norm(geometry.devices, axis=1) - face_radius
    # every vertex lies on the spheres S(x_l, r) of the three faces at it
    dist = np.array([np.linalg.norm(geometry.vertices[j] - x)
                     for l, x in enumerate(geometry.devices)
                     for j in range(4) if j != l])
    best = r_eff_star(geometry.delta)
    return {
        'face_radius': face_radius,
        'face_clearance': clearance,
        'cloaked_radius': cloaked,
        'vertex_distance_spread': dist.max() - dist.min(),
        'faces_inside_balls': bool(np.all(clearance < face_radius)),
        'tangent': bool(np.abs(cloaked - best).max() <=
                        tol * geometry.delta),
    }


class PlaneWave(object):

    def __init__(self, direction, ctx, amplitude=1.0):
        if isinstance(direction, UnitDirection):
            direction = direction.vector
        d = np.asarray(direction, dtype=float)
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise DomainError('plane wave direction must be a unit vector')
        self.direction = d
        self.ctx = ctx
        self.amplitude = complex(amplitude)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        v = self.amplitude * np.exp(1j * self.ctx.k * x.dot(self.direction))
        if np.ndim(v) == 0:
            return complex(v)
        return v

    def gradient(self, x):
        v = np.asarray(self(x))
        return 1j * self.ctx.k * v[..., None] * self.direction


def incident_plane_wave(direction, ctx, amplitude=1.0):
    return PlaneWave(direction, ctx, amplitude)


class PointSource(object):
    """radiating G(x, y0)"""

    def __init__(self, y0, ctx, strength=1.0):
        self.y0 = np.asarray(y0, dtype=float)
        self.ctx = ctx
        self.strength = complex(strength)

    def __call__(self, x):
        return self.strength * greens_function(x, self.y0, self.ctx)

    def gradient(self, x):
        return self.strength * greens_gradient_y(self.y0, x, self.ctx)


def point_source(y0, ctx, strength=1.0):
    return PointSource(y0, ctx, strength)


def _boundary_data(field, quad):
    u = np.asarray(field(quad.points), dtype=complex)
    dn = np.asarray(field.gradient(quad.points)).dot(quad.normal)
    return u, dn


def _check_clearance(quads, x):
    for q in quads:
        d = q.distance(x)
        if np.any(d < q.spacing):
            warnings.warn('%d evaluation points lie within one node spacing '
                          '(%.3g) of the boundary' %
                          (int(np.sum(d < q.spacing)), q.spacing),
                          NearSurfaceWarning, stacklevel=3)
            return


def _layer_potential(quads, field, x, ctx):
    # int [-(n . grad u) G + u n . grad_y G] dS_y
    x, shape = _points(x)
    _check_clearance(quads, x)
    out = np.zeros(len(x), dtype=complex)
    k = ctx.k
    for q in quads:
        u, dn = _boundary_data(field, q)
        wu = q.weights * u
        wdn = -q.weights * dn
        step = max(1, _CHUNK // len(q))
        for start in range(0, len(x), step):
            xs = x[start:start + step]
            d = q.points[None, :, :] - xs[:, None, :]
            r = np.linalg.norm(d, axis=-1)
            g = np.exp(1j * k * r) / (4.0 * math.pi * r)
            dgn = (1j * k - 1.0 / r) * g / r * d.dot(q.normal)
            out[start:start + step] += g.dot(wdn) + dgn.dot(wu)
    return _shaped(out, shape)


def green_device_field(geometry, field, x, quadratures=None):
    """layer potential of Green's formula, -u_i inside D and 0 outside"""
    if quadratures is None:
        quadratures = geometry.face_quadratures()
    return _layer_potential(quadratures, field, x, geometry.ctx)


def green_exterior_field(geometry, field, x, quadratures=None):
    """for radiating `field` with sources inside D: 0 inside, -field outside"""
    if quadratures is None:
        quadratures = geometry.face_quadratures()
    v = _layer_potential(quadratures, field, x, geometry.ctx)
    return -v


class DeviceArray(object):
    """outgoing multipoles sum_l sum_{n<=N} b_{l,n,m} V_n^m(x - x_l)"""

    def __init__(self, points, order, coeffs, ctx, face_radius=None):
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (len(points), mode_count(order)):
            raise DomainError('coefficient table must have shape (%d, %d)'
                              % (len(points), mode_count(order)))
        self.points = points
        self.N = int(order)
        self.coeffs = coeffs
        self.ctx = ctx
        self.face_radius = face_radius

    def __len__(self):
        return len(self.points)

    def __call__(self, x):
        return device_field(self, x)

    def silenced(self):
        return DeviceArray(self.points, self.N, np.zeros_like(self.coeffs),
                           self.ctx, self.face_radius)


def multipole_coefficients(geometry, field, order, quadratures=None):
    if quadratures is None:
        quadratures = geometry.face_quadratures()
    if len(quadratures) != len(geometry.devices):
        raise GeometryError('one face per device is required')
    ctx = geometry.ctx
    K = mode_count(order)
    coeffs = np.zeros((len(geometry.devices), K), dtype=complex)
    radius = np.zeros(len(geometry.devices))
    step = max(1, _CHUNK // (3 * K))
    for l, (xl, q) in enumerate(zip(geometry.devices, quadratures)):
        u, dn = _boundary_data(field, q)
        wu = q.weights * u
        wdn = -q.weights * dn
        for start in range(0, len(q), step):
            y = q.points[start:start + step] - xl
            U = regular_wave_table(order, y, ctx)
            gU = regular_wave_gradient_table(order, y, ctx).dot(q.normal)
            coeffs[l] += np.conj(U).dot(wdn[start:start + step]) + \
                np.conj(gU).dot(wu[start:start + step])
        radius[l] = np.linalg.norm(q.points - xl, axis=1).max()
    coeffs *= 1j * ctx.k
    logging.info('multipole devices: N=%d, %d modes per device, '
                 'max |b| = %.3g' % (order, K, np.abs(coeffs).max()))
    return DeviceArray(geometry.devices, order, coeffs, ctx, radius)


def _radiating_sum(center, order, coeffs, x, ctx):
    out = np.zeros(len(x), dtype=complex)
    step = max(1, _CHUNK // mode_count(order))
    for start in range(0, len(x), step):
        V = radiating_wave_table(order, x[start:start + step] - center, ctx)
        out[start:start + step] = coeffs.dot(V)
    return out


def device_field(devices, x):
    x, shape = _points(x)
    out = np.zeros(len(x), dtype=complex)
    for xl, b in zip(devices.points, devices.coeffs):
        if np.any(b):
            out += _radiating_sum(xl, devices.N, b, x, devices.ctx)
        elif np.any(np.linalg.norm(x - xl, axis=1) < 1e-14):
            # keep the singularity check for silent devices
            radiating_wave_table(0, x - xl, devices.ctx)
    return _shaped(out, shape)


def device_field_degree_terms(devices, x):
    """per-device, per-degree contributions at one point, (n_dev, N + 1)"""
    x = np.asarray(x, dtype=float).reshape(1, 3)
    deg = mode_degrees(devices.N)
    out = np.zeros((len(devices), devices.N + 1), dtype=complex)
    for l, (xl, b) in enumerate(zip(devices.points, devices.coeffs)):
        prod = b * radiating_wave_table(devices.N, x - xl, devices.ctx)[:, 0]
        out[l] = np.bincount(deg, weights=prod.real) + \
            1j * np.bincount(deg, weights=prod.imag)
    return out


class ScatteredField(object):

    def __init__(self, center, order, coeffs, ctx):
        self.center = np.asarray(center, dtype=float)
        self.order = order
        self.coeffs = coeffs
        self.ctx = ctx

    def __call__(self, x):
        x, shape = _points(x)
        return _shaped(_radiating_sum(self.center, self.order, self.coeffs,
                                      x, self.ctx), shape)


def soundsoft_sphere_scatter(ambient, radius, ctx, max_degree=None,
                             center=(0.0, 0.0, 0.0), quadrature_order=None):
    """field scattered by a sound-soft ball in a regular ambient field

    the ambient trace on the sphere is projected on Y_n^m; each mode is
    continued outward by h_n(kr) / h_n(ka) so the total trace vanishes
    """
    if not radius > 0:
        raise DomainError('sphere radius must be positive')
    ka = ctx.k * radius
    M = max_degree
    if M is None:
        M = int(math.ceil(ka)) + 15
    if M > MAX_DEGREE:
        raise CoefficientOverflowError('scatterer degree %d exceeds %d'
                                       % (M, MAX_DEGREE))
    jn = spherical_bessel_j_table(M, np.array([ka]))[:, 0]
    for n in range(M + 1):
        if n < ka and abs(jn[n]) < 1e-12:
            raise ResonanceError('k a = %r is a Dirichlet eigenvalue for '
                                 'degree %d' % (ka, n))
    quad = sphere_quadrature(quadrature_order or 2 * M)
    center = np.asarray(center, dtype=float)
    trace = np.asarray(ambient(quad.points(radius, center)), dtype=complex)
    proj = np.conj(sph_harm_table(M, quad.directions)).dot(
        quad.weights * trace)
    hn = spherical_hankel1_table(M, np.array([ka]))[:, 0]
    coeffs = -proj / hn[mode_degrees(M)]
    logging.debug('sound-soft ball a=%g ka=%.3g M=%d, %d trace samples'
                  % (radius, ka, M, len(quad)))
    return ScatteredField(center, M, coeffs, ctx)


CloakMetrics = namedtuple('CloakMetrics', ['interior_residual',
                                           'exterior_leakage',
                                           'zero_incident'])


def cloak_metrics(devices, incident, geometry, order=None):
    """relative L2 errors on S(0, r_eff*) and S(0, 2 delta)

    interior: |u_i + u_d| / |u_i|, exterior: |u_d| / |u_i|
    """
    if order is None:
        order = devices.N
    quad = sphere_quadrature(order)
    inner = quad.points(r_eff_star(geometry.delta))
    outer = quad.points(2.0 * geometry.delta)
    ui_in = np.asarray(incident(inner), dtype=complex)
    ui_out = np.asarray(incident(outer), dtype=complex)
    norm_in = quad.l2_norm(ui_in)
    norm_out = quad.l2_norm(ui_out)
    if norm_in == 0 or norm_out == 0:
        return CloakMetrics(0.0, 0.0, True)
    residual = quad.l2_norm(ui_in + device_field(devices, inner)) / norm_in
    leakage = quad.l2_norm(device_field(devices, outer)) / norm_out
    logging.info('cloak metrics: interior %.3g%%, exterior %.3g%% '
                 '(%d sphere nodes)' % (100 * residual, 100 * leakage,
                                        len(quad)))
    return CloakMetrics(residual, leakage, False)


Suppression = namedtuple('Suppression', ['active', 'inactive', 'ratio'])


def scatterer_suppression(devices, incident, geometry, radius=None,
                          max_degree=None, probes=16):
    """far scattering of a sound-soft ball at the origin, devices on vs off

    the ball sees u_i + u_d; the devices are not re-excited by it
    """
    if radius is None:
        radius = 3.0 * r_eff_star(geometry.delta)
    ctx = geometry.ctx

    def active_ambient(x):
        return incident(x) + device_field(devices, x)

    on = soundsoft_sphere_scatter(active_ambient, radius, ctx, max_degree)
    off = soundsoft_sphere_scatter(incident, radius, ctx, max_degree)
    far = sphere_quadrature(probes).points(2.0 * geometry.delta)
    active = float(np.abs(on(far)).max())
    inactive = float(np.abs(off(far)).max())
    ratio = active / inactive if inactive > 0 else 0.0
    logging.info('scattered field at |x| = 2 delta: active %.3g, '
                 'inactive %.3g' % (active, inactive))
    return Suppression(active, inactive, ratio)


def mollweide_forward(lat, lon):
    """equal-area plane coordinates, |x| <= 2 sqrt 2 and |y| <= sqrt 2"""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    target = math.pi * np.sin(lat)
    theta = lat.copy()
    for _ in range(100):
        c = np.cos(theta)
        f = 2.0 * theta + np.sin(2.0 * theta) - target
        fp = 4.0 * c * c
        step = np.where(fp > 1e-12, f / np.maximum(fp, 1e-12), 0.0)
        theta = np.clip(theta - step, -math.pi / 2, math.pi / 2)
        if np.all(np.abs(step) < 1e-15):
            break
    pole = np.abs(np.abs(lat) - math.pi / 2) < 1e-12
    theta = np.where(pole, np.sign(lat) * math.pi / 2, theta)
    x = 2.0 * math.sqrt(2.0) / math.pi * lon * np.cos(theta)
    y = math.sqrt(2.0) * np.sin(theta)
    return x, y


def mollweide_inverse(x, y):
    """(lat, lon, inside) for plane points; outside the ellipse lat = lon = 0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = x * x / 8.0 + y * y / 2.0 <= 1.0
    theta = np.arcsin(np.clip(y / math.sqrt(2.0), -1.0, 1.0))
    lat = np.arcsin(np.clip((2.0 * theta + np.sin(2.0 * theta)) / math.pi,
                            -1.0, 1.0))
    c = np.cos(theta)
    lon = np.where(c > 1e-12,
                   math.pi * x / (2.0 * math.sqrt(2.0) * np.maximum(c, 1e-12)),
                   0.0)
    lon = np.clip(lon, -math.pi, math.pi)
    return np.where(inside, lat, 0.0), np.where(inside, lon, 0.0), inside


class ExtendedDeviceMap(object):
    """level set |u_d| >= level on S(0, sigma) in the Mollweide plane"""

    OUTSIDE = 128

    def __init__(self, level, radius, magnitude, inside):
        self.level = level
        self.radius = radius
        self.magnitude = magnitude
        self.inside = inside
        self.mask = inside & (magnitude >= level)
        # equal-area pixels: area fraction is a pixel count
        free = np.count_nonzero(inside & ~self.mask)
        self.open_area_percent = 100.0 * free / np.count_nonzero(inside)

    def image(self):
        img = np.full(self.mask.shape, self.OUTSIDE, dtype=np.uint8)
        img[self.inside] = 255
        img[self.mask] = 0
        return img

    def spots(self):
        """connected pieces of the level set, joined across the seam"""
        labels, count = ndimage.label(self.mask)
        parent = list(range(count + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        # longitude -pi and pi meet at the two ends of each row
        for row in range(self.mask.shape[0]):
            cols = np.nonzero(self.inside[row])[0]
            if len(cols) == 0:
                continue
            a, b = labels[row, cols[0]], labels[row, cols[-1]]
            if a and b:
                parent[find(a)] = find(b)
        return len(set(find(a) for a in range(1, count + 1)))

    def to_dict(self):
        return {'level': self.level, 'radius': self.radius,
                'open_area_percent': self.open_area_percent,
                'spots': self.spots(),
                'width': self.mask.shape[1], 'height': self.mask.shape[0]}


def _mollweide_grid(width):
    # pixel centres of a width x width/2 raster over the Mollweide ellipse
    height = max(2, width // 2)
    xs = 2.0 * math.sqrt(2.0) * ((np.arange(width) + 0.5) / width * 2 - 1)
    ys = math.sqrt(2.0) * (1 - (np.arange(height) + 0.5) / height * 2)
    return mollweide_inverse(*np.meshgrid(xs, ys))


def extended_device_analysis(devices, level, geometry, width=360):
    if not level > 0:
        raise DomainError('level must be positive')
    lat, lon, inside = _mollweide_grid(width)
    cl = np.cos(lat[inside])
    points = geometry.sigma * np.stack([cl * np.cos(lon[inside]),
                                        cl * np.sin(lon[inside]),
                                        np.sin(lat[inside])], axis=-1)
    magnitude = np.zeros(inside.shape)
    magnitude[inside] = np.abs(device_field(devices, points))
    m = ExtendedDeviceMap(level, geometry.sigma, magnitude, inside)
    logging.info('extended devices at level %g: %.2f%% of S(0, sigma) open'
                 % (level, m.open_area_percent))
    return m


SliceGrid = namedtuple('SliceGrid', ['x', 'y', 'z', 'values'])


def slice_field(field, z, half_width, resolution, center=(0.0, 0.0)):
    """samples on the square |x - cx|, |y - cy| <= half_width at height z;
    row 0 is the top (largest y)"""
    if int(resolution) != resolution or resolution < 2:
        raise DomainError('slice resolution must be an integer >= 2')
    resolution = int(resolution)
    xs = np.linspace(center[0] - half_width, center[0] + half_width,
                     resolution)
    ys = np.linspace(center[1] + half_width, center[1] - half_width,
                     resolution)
    xx, yy = np.meshgrid(xs, ys)
    pts = np.stack([xx, yy, np.full(xx.shape, float(z))], axis=-1)
    values = np.asarray(field(pts), dtype=complex)
    if values.shape != xx.shape:
        values = np.broadcast_to(values, xx.shape).copy()
    return SliceGrid(xx, yy, float(z), values)


def export_slice(grid, prefix, meta=None, clip=2.0):
    """<prefix>.csv, <prefix>.pgm (real part over [-clip, clip]) and
    <prefix>.json with the color range"""
    paths = [prefix + '.csv', prefix + '.pgm', prefix + '.json']
    write_csv(paths[0], ['x', 'y', 'z', 're_u', 'im_u'],
              [grid.x, grid.y, np.full(grid.x.shape, grid.z),
               grid.values.real, grid.values.imag])
    write_pgm(paths[1], scale_to_bytes(grid.values.real, -clip, clip))
    side = dict(meta or {})
    side.update({'min': -clip, 'max': clip, 'z': grid.z})
    write_json(paths[2], side)
    return paths


def estimate_node_count(geometry, order, refine=1, eval_points=0):
    """sizes of the dense kernel work before anything is assembled"""
    edge = geometry.sigma * math.sqrt(8.0 / 3.0)
    m = max(1, int(math.ceil(edge / (geometry.ctx.wavelength / 8.0)
                             - 1e-9))) * int(refine)
    face_nodes = 3 * m * m
    modes = mode_count(order)
    sphere_nodes = 2 * (order + 1) ** 2
    work = len(geometry.devices) * modes * \
        (face_nodes + eval_points + 2 * sphere_nodes)
    return {'face_nodes': face_nodes, 'total_face_nodes': 4 * face_nodes,
            'modes': modes, 'sphere_nodes': sphere_nodes, 'work': work}


def _desk():
    ctx = WaveContext.from_wavelength(1.0)
    g = make_tetra_cloak(0.5, 1.5, ctx)
    wave = incident_plane_wave(np.ones(3) / math.sqrt(3.0), ctx)
    return ctx, g, wave


def _outside_A(geometry, count, factor, limit, seed):
    rng = np.random.RandomState(seed)
    out = []
    while len(out) < count:
        x = rng.uniform(-limit, limit, size=3)
        d = np.linalg.norm(geometry.devices - x, axis=1)
        if np.linalg.norm(x) <= limit and d.min() >= factor * \
                geometry.ball_radius:
            out.append(x)
    return np.array(out)


def test_tetra_geometry():
    ctx = WaveContext.from_wavelength(1.0)
    g = make_tetra_cloak(1.0, 3.0, ctx)
    assert g.optimal
    assert abs(g.ball_radius - 2 * math.sqrt(2)) < 1e-12
    assert abs(g.r_eff - (3 - 2 * math.sqrt(2))) < 1e-12
    assert abs(r_eff_star(1.0) - (1 - 2 * math.sqrt(2) / 3)) < 1e-12
    assert abs(r_eff_star(3.0) / 3.0 - 0.05719095841793653) < 1e-12
    assert np.allclose(np.linalg.norm(g.vertices, axis=1), 1.0)
    assert np.allclose(np.linalg.norm(g.devices, axis=1), 3.0)
    for l in range(4):
        for j in range(4):
            if j != l:
                d = np.linalg.norm(g.devices[l] - g.vertices[j])
                assert abs(d - g.ball_radius) < 1e-12
    assert not make_tetra_cloak(1.0, 4.0, ctx).optimal
    assert g.contains(np.zeros(3)) and not g.contains(g.vertices[0] * 1.01)
    try:
        make_tetra_cloak(1.0, 1.0, ctx)
        assert False
    except GeometryError:
        pass


def test_measure_tangency():
    ctx = WaveContext.from_wavelength(1.0)
    t = measure_tangency(make_tetra_cloak(0.5, 1.5, ctx))
    assert t['tangent'] and t['faces_inside_balls']
    assert t['vertex_distance_spread'] < 1e-12
    assert np.allclose(t['cloaked_radius'], r_eff_star(1.5), atol=1e-12)
    assert np.allclose(t['face_clearance'], 1.5 - 0.5 / 3, atol=1e-12)
    for sigma in (0.3, 0.7):
        g = make_tetra_cloak(sigma, 1.5, ctx)
        t = measure_tangency(g)
        assert not t['tangent']
        assert t['cloaked_radius'].max() < r_eff_star(1.5)
        assert np.allclose(t['cloaked_radius'], g.r_eff, atol=1e-12)


def test_truncation_order():
    ctx = WaveContext.from_wavelength(1.0)
    assert truncation_order(6.0, ctx) == 57
    assert truncation_order(1.0 / (3 * math.pi), ctx) == 1
    orders = [truncation_order(d, ctx) for d in np.linspace(0.1, 10, 50)]
    assert all(a <= b for a, b in zip(orders, orders[1:]))
    try:
        truncation_order(100.0, ctx)
        assert False
    except CoefficientOverflowError:
        pass


def test_region_A():
    ctx = WaveContext.from_wavelength(1.0)
    g = make_tetra_cloak(1.0, 3.0, ctx)
    assert region_A_contains(g, g.devices).all()
    assert not region_A_contains(g, np.zeros(3))
    assert region_A_contains(g, g.vertices).all()
    assert not region_A_contains(g, 10.0 * g.vertices[0])


def test_plane_wave():
    ctx = WaveContext.from_wavelength(1.0)
    u = incident_plane_wave(np.ones(3) / math.sqrt(3), ctx)
    assert u(np.zeros(3)) == 1.0
    x = np.random.RandomState(3).normal(size=(10, 3))
    assert np.allclose(np.abs(u(x)), 1.0)
    h = 2e-4
    x0 = np.array([0.3, -0.2, 0.7])
    lap = -6 * u(x0)
    for e in np.eye(3):
        lap += u(x0 + h * e) + u(x0 - h * e)
    lap /= h * h
    assert abs(lap + ctx.k ** 2 * u(x0)) < 1e-6 * ctx.k ** 2
    fd = np.array([(u(x0 + h * e) - u(x0 - h * e)) / (2 * h)
                   for e in np.eye(3)])
    assert np.allclose(u.gradient(x0), fd, atol=1e-5)
    try:
        incident_plane_wave([1.0, 1.0, 0.0], ctx)
        assert False
    except DomainError:
        pass


def test_green_dichotomy():
    ctx, g, wave = _desk()
    quads = g.face_quadratures(refine=4)
    rng = np.random.RandomState(4)
    inner = rng.uniform(-1, 1, size=(60, 3))
    inner = 0.05 * inner[np.linalg.norm(inner, axis=1) <= 1][:20]
    outer = _outside_A(g, 20, 1.2, 4 * g.delta, 5)
    for direction in (np.ones(3) / math.sqrt(3), np.array([0.0, 0.6, -0.8])):
        u = incident_plane_wave(direction, ctx)
        v = green_device_field(g, u, inner, quads)
        assert np.abs(v + u(inner)).max() < 1e-2
        v = green_device_field(g, u, outer, quads)
        assert np.abs(v).max() < 1e-2


def test_green_refinement_order():
    ctx, g, wave = _desk()
    x = np.zeros(3)
    err = [abs(green_device_field(g, wave, x, g.face_quadratures(r)) + 1.0)
           for r in (1, 2, 4)]
    assert err[0] > err[1] > err[2]
    assert err[0] / err[2] > 14


def test_near_surface_warning():
    ctx, g, wave = _desk()
    quads = g.face_quadratures()
    near = g.vertices[:3].mean(axis=0) * 1.001
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        green_device_field(g, wave, near, quads)
    assert any(issubclass(w.category, NearSurfaceWarning) for w in caught)


def test_green_exterior_field():
    ctx, g, wave = _desk()
    quads = g.face_quadratures(refine=4)
    source = point_source(np.array([0.02, -0.01, 0.03]), ctx)
    outer = _outside_A(g, 10, 1.2, 4 * g.delta, 6)
    v = green_exterior_field(g, source, outer, quads)
    assert np.abs(v + source(outer)).max() < 1e-3
    inner = np.array([[0.0, 0.05, 0.0], [-0.04, 0.0, 0.02]])
    assert np.abs(green_exterior_field(g, source, inner, quads)).max() < 1e-3
    silent = point_source(np.zeros(3), ctx, strength=0.0)
    assert not green_exterior_field(g, silent, outer, quads).any()


def test_zero_incident_devices():
    ctx, g, wave = _desk()
    silent = incident_plane_wave(wave.direction, ctx, amplitude=0.0)
    devices = multipole_coefficients(g, silent, 6)
    assert not devices.coeffs.any()
    assert device_field(devices, np.array([5.0, 0.0, 0.0])) == 0
    m = cloak_metrics(devices, silent, g)
    assert m == CloakMetrics(0.0, 0.0, True)


def test_multipole_matches_layer_potential():
    ctx, g, wave = _desk()
    quads = g.face_quadratures()
    N = truncation_order(g.delta, ctx) + 25
    devices = multipole_coefficients(g, wave, N, quads)
    assert (devices.face_radius < g.ball_radius).all()
    x = _outside_A(g, 50, 1.5, 4 * g.delta, 7)
    direct = green_device_field(g, wave, x, quads)
    series = device_field(devices, x)
    scale = np.maximum(1.0, np.abs(direct))
    assert (np.abs(series - direct) / scale).max() < 1e-6


def test_heuristic_order_truncation():
    ctx, g, wave = _desk()
    quads = g.face_quadratures()
    N = truncation_order(g.delta, ctx)
    assert N == 15
    x = _outside_A(g, 50, 1.5, 4 * g.delta, 7)
    direct = green_device_field(g, wave, x, quads)
    scale = np.maximum(1.0, np.abs(direct))
    err = []
    for n in (N, N + 10, N + 25):
        series = device_field(multipole_coefficients(g, wave, n, quads), x)
        err.append((np.abs(series - direct) / scale).max())
    # the tail left at N is near j_N(k r), about 1e-3 at k r = 8.9
    assert 1e-6 < err[0] < 1e-1
    assert err[1] < err[0] / 10
    assert err[2] < 1e-6


def test_degree_terms_decay():
    ctx, g, wave = _desk()
    devices = multipole_coefficients(g, wave, 45)
    x0 = g.devices[0]
    x = x0 * (1 + 2 * g.ball_radius / g.delta)
    terms = np.abs(device_field_degree_terms(devices, x)[0])
    ratio = (terms[45] / terms[30]) ** (1.0 / 15)
    bound = devices.face_radius[0] / np.linalg.norm(x - x0) + 0.05
    assert 0 < ratio <= bound
    total = device_field_degree_terms(devices, x).sum()
    assert abs(total - device_field(devices, x)) < 1e-12 * abs(total) + 1e-15


def test_device_field_blows_up_near_device():
    ctx, g, wave = _desk()
    N = truncation_order(g.delta, ctx)
    devices = multipole_coefficients(g, wave, N)
    e = np.array([0.48, -0.6, 0.64])
    near = abs(device_field(devices, g.devices[1] + 5e-3 * e))
    less = abs(device_field(devices, g.devices[1] + 1e-2 * e))
    assert near > 2 ** N * less
    try:
        device_field(devices, g.devices[2])
        assert False
    except NumericalError:
        pass


def test_soundsoft_sphere():
    ctx = WaveContext.from_wavenumber(4.0)
    wave = incident_plane_wave(np.array([0.0, 0.6, 0.8]), ctx)
    scattered = soundsoft_sphere_scatter(wave, 1.0, ctx)
    dirs = np.random.RandomState(8).normal(size=(40, 3))
    on = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    assert np.abs(wave(on) + scattered(on)).max() < 1e-6
    d = on[0]
    far = [abs(scattered(r * d)) * r for r in (1000.0, 2000.0)]
    assert abs(far[1] / far[0] - 1) < 0.05
    silent = incident_plane_wave(wave.direction, ctx, amplitude=0.0)
    assert not soundsoft_sphere_scatter(silent, 1.0, ctx).coeffs.any()
    try:
        soundsoft_sphere_scatter(wave, 1.0, WaveContext.from_wavenumber(
            math.pi))
        assert False
    except ResonanceError:
        pass


def test_cloak_metrics_improve_with_order():
    ctx, g, wave = _desk()
    quads = g.face_quadratures()
    low = cloak_metrics(multipole_coefficients(g, wave, 8, quads), wave, g,
                        order=20)
    high = cloak_metrics(multipole_coefficients(g, wave, 20, quads), wave, g,
                         order=20)
    assert not high.zero_incident
    assert high.interior_residual < low.interior_residual


def test_mollweide():
    x, y = mollweide_forward(0.0, 0.0)
    assert abs(x) < 1e-15 and abs(y) < 1e-15
    x, y = mollweide_forward(math.pi / 2, 0.0)
    assert abs(y - math.sqrt(2)) < 1e-12
    x, y = mollweide_forward(0.0, math.pi)
    assert abs(x - 2 * math.sqrt(2)) < 1e-12
    lat, lon, inside = mollweide_inverse(*mollweide_forward(0.6, -2.0))
    assert inside and abs(lat - 0.6) < 1e-9 and abs(lon + 2.0) < 1e-9
    assert not mollweide_inverse(2.9, 0.0)[2]


def test_extended_device_analysis():
    ctx, g, wave = _desk()
    devices = multipole_coefficients(g, wave, truncation_order(g.delta, ctx))
    m = extended_device_analysis(devices, 1e300, g, width=64)
    assert m.open_area_percent == 100.0
    assert m.image().shape == (32, 64)
    m = extended_device_analysis(devices, 1e-12, g, width=64)
    assert m.open_area_percent < 1.0
    img = m.image()
    assert (img[~m.inside] == ExtendedDeviceMap.OUTSIDE).all()
    try:
        extended_device_analysis(devices, 0.0, g)
        assert False
    except DomainError:
        pass


def test_spots_join_across_seam():
    lat, lon, inside = _mollweide_grid(120)
    cl = np.cos(lat)
    v = np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)
    magnitude = np.zeros(inside.shape)
    # one cap on the seam at lon = pi, two on the front
    for c in ([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]):
        magnitude += v.dot(c) > math.cos(0.35)
    magnitude[~inside] = 0.0
    m = ExtendedDeviceMap(0.5, 1.0, magnitude, inside)
    assert ndimage.label(m.mask)[1] == 4
    assert m.spots() == 3
    assert m.to_dict()['spots'] == 3
    empty = ExtendedDeviceMap(2.0, 1.0, magnitude, inside)
    assert empty.spots() == 0 and empty.open_area_percent == 100.0


def test_extended_devices_form_four_spots():
    ctx = WaveContext.from_wavelength(1.0)
    g = make_tetra_cloak(1.0, 3.0, ctx)
    wave = incident_plane_wave(np.ones(3) / math.sqrt(3.0), ctx)
    devices = multipole_coefficients(g, wave, truncation_order(g.delta, ctx))
    toward = g.devices / g.delta
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    between = np.array([toward[a] + toward[b] for a, b in pairs])
    between /= np.linalg.norm(between, axis=1)[:, None]
    peaks = np.abs(device_field(devices, g.sigma * toward))
    valleys = np.abs(device_field(devices, g.sigma * between))
    assert peaks.min() > 10 * valleys.max()
    level = math.sqrt(peaks.min() * valleys.max())
    m = extended_device_analysis(devices, level, g, width=180)
    assert 0.0 < m.open_area_percent < 100.0
    lat, lon, inside = _mollweide_grid(180)
    cl = np.cos(lat[m.mask])
    v = np.stack([cl * np.cos(lon[m.mask]), cl * np.sin(lon[m.mask]),
                  np.sin(lat[m.mask])], axis=-1)
    cosines = np.sort(v.dot(toward.T), axis=1)
    assert set(v.dot(toward.T).argmax(axis=1)) == set(range(4))
    # a strip along every bisector plane stays open, keeping the caps apart
    assert (cosines[:, -1] - cosines[:, -2]).min() > 0.02
    assert m.spots() >= 4


def test_open_area_shrinks_with_delta():
    ctx = WaveContext.from_wavelength(1.0)
    wave = incident_plane_wave(np.ones(3) / math.sqrt(3.0), ctx)
    area = []
    for delta in (1.5, 3.0, 4.5):
        g = make_tetra_cloak(delta / 3.0, delta, ctx)
        devices = multipole_coefficients(g, wave,
                                         truncation_order(delta, ctx))
        m = extended_device_analysis(devices, 10.0, g, width=120)
        area.append(m.open_area_percent)
    assert area[0] >= area[1] >= area[2]
    assert area[2] < area[0]


def test_slice_field():
    import os
    import json
    import tempfile
    from exocloak.common import read_pgm
    ctx = WaveContext.from_wavelength(1.0)
    grid = slice_field(lambda x: 2.5 + 0j, 0.0, 1.0, 4)
    assert grid.values.shape == (4, 4) and (grid.values == 2.5).all()
    wave = incident_plane_wave(np.array([0.6, 0.0, 0.8]), ctx)
    grid = slice_field(wave, 0.3, 5.0, 9)
    pts = np.stack([grid.x, grid.y, np.full(grid.x.shape, 0.3)], axis=-1)
    assert np.allclose(grid.values, wave(pts))
    assert grid.y[0, 0] == 5.0 and grid.x[0, 0] == -5.0
    with tempfile.TemporaryDirectory() as d:
        csv, pgm, side = export_slice(grid, os.path.join(d, 'z0'),
                                      {'lambda': 1.0})
        with open(csv) as f:
            assert f.readline().strip() == 'x,y,z,re_u,im_u'
        assert read_pgm(pgm).shape == (9, 9)
        with open(side) as f:
            meta = json.load(f)
        assert meta['min'] == -2.0 and meta['max'] == 2.0
        assert meta['lambda'] == 1.0 and meta['z'] == 0.3


def test_estimate_node_count():
    ctx, g, wave = _desk()
    est = estimate_node_count(g, 15, refine=2)
    assert est['face_nodes'] == len(g.face_quadratures(refine=2)[0])
    assert est['modes'] == 256


if __name__ == '__main__':
    test_tetra_geometry()
    test_measure_tangency()
    test_truncation_order()
    test_region_A()
    test_plane_wave()
    test_green_dichotomy()
    test_green_refinement_order()
    test_near_surface_warning()
    test_green_exterior_field()
    test_zero_incident_devices()
    test_multipole_matches_layer_potential()
    test_heuristic_order_truncation()
    test_degree_terms_decay()
    test_device_field_blows_up_near_device()
    test_soundsoft_sphere()
    test_cloak_metrics_improve_with_order()
    test_mollweide()
    test_extended_device_analysis()
    test_spots_join_across_seam()
    test_extended_devices_form_four_spots()
    test_open_area_shrinks_with_delta()
    test_slice_field()
    test_estimate_node_count()

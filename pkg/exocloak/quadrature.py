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

import math
import logging

import numpy as np

from exocloak.common import GeometryError, DomainError


class FaceQuadrature(object):
    """midpoint rule on a uniform triangulation of one planar face

    every sub-triangle carries its three edge midpoints with weight
    area/3; the rule integrates quadratics exactly on each sub-triangle
    """

    def __init__(self, vertices, points, weights, normal, spacing,
                 subdivisions):
        self.vertices = vertices
        self.points = points
        self.weights = weights
        self.normal = normal
        self.spacing = spacing
        self.subdivisions = subdivisions

    def __len__(self):
        return len(self.weights)

    @property
    def area(self):
        a, b, c = self.vertices
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a))

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))

    def distance(self, x):
        """distance from points x (..., 3) to the closed triangle"""
        x = np.asarray(x, dtype=float)
        return _triangle_distance(self.vertices, x.reshape(-1, 3)) \
            .reshape(x.shape[:-1])


def face_quadrature(vertices, spacing, refine=1, interior=None):
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape != (3, 3):
        raise GeometryError('a face needs three vertices in 3-D')
    if spacing <= 0:
        raise DomainError('quadrature spacing must be positive')
    a, b, c = vertices
    edge = max(np.linalg.norm(b - a), np.linalg.norm(c - b),
               np.linalg.norm(a - c))
    cross = np.cross(b - a, c - a)
    area = 0.5 * np.linalg.norm(cross)
    if area <= 1e-14 * edge * edge:
        raise GeometryError('degenerate face')
    normal = cross / (2.0 * area)
    if interior is not None:
        if np.dot(normal, (a + b + c) / 3.0 - interior) < 0:
            normal = -normal
    m = max(1, int(math.ceil(edge / spacing - 1e-9))) * int(refine)

    # lattice i + j <= m, vertex (i, j) -> a + i/m (b-a) + j/m (c-a)
    up_i, up_j = [], []
    for i in range(m):
        for j in range(m - i):
            up_i.append(i)
            up_j.append(j)
    up_i = np.array(up_i)
    up_j = np.array(up_j)
    dn = up_i + up_j < m - 1
    dn_i = up_i[dn]
    dn_j = up_j[dn]

    def lattice(i, j):
        return a + np.outer(i / m, b - a) + np.outer(j / m, c - a)

    tris = [
        (lattice(up_i, up_j), lattice(up_i + 1, up_j),
         lattice(up_i, up_j + 1)),
        (lattice(dn_i + 1, dn_j), lattice(dn_i + 1, dn_j + 1),
         lattice(dn_i, dn_j + 1)),
    ]
    points = []
    for p0, p1, p2 in tris:
        points.append(0.5 * (p0 + p1))
        points.append(0.5 * (p1 + p2))
        points.append(0.5 * (p2 + p0))
    points = np.concatenate(points, axis=0)
    weights = np.full(len(points), area / (m * m) / 3.0)
    logging.debug('face quadrature: %d subdivisions, %d nodes'
                  % (m, len(points)))
    return FaceQuadrature(vertices, points, weights, normal, edge / m, m)


def _triangle_distance(tri, x):
    # closest point on triangle, per Ericson's region tests, vectorized
    a, b, c = tri
    ab = b - a
    ac = c - a
    ap = x - a
    d1 = ap.dot(ab)
    d2 = ap.dot(ac)
    bp = x - b
    d3 = bp.dot(ab)
    d4 = bp.dot(ac)
    cp = x - c
    d5 = cp.dot(ab)
    d6 = cp.dot(ac)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide='ignore', invalid='ignore'):
        denom = va + vb + vc
        v = vb / denom
        w = vc / denom
        closest = a + v[:, None] * ab + w[:, None] * ac
        t_ab = np.clip(d1 / (d1 - d3), 0, 1)
        t_ac = np.clip(d2 / (d2 - d6), 0, 1)
        t_bc = np.clip((d4 - d3) / ((d4 - d3) + (d5 - d6)), 0, 1)
    on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    on_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    closest = np.where(on_bc[:, None], b + t_bc[:, None] * (c - b), closest)
    closest = np.where(on_ac[:, None], a + t_ac[:, None] * ac, closest)
    closest = np.where(on_ab[:, None], a + t_ab[:, None] * ab, closest)
    closest = np.where(((d6 >= 0) & (d5 <= d6))[:, None], c, closest)
    closest = np.where(((d3 >= 0) & (d4 <= d3))[:, None], b, closest)
    closest = np.where(((d1 <= 0) & (d2 <= 0))[:, None], a, closest)
    return np.linalg.norm(x - closest, axis=-1)


class SphereQuadrature(object):
    """Gauss-Legendre in cos(elevation) times uniform azimuth

    exact for spherical polynomials of degree <= 2 * order + 1
    """

    def __init__(self, order):
        if order < 0:
            raise DomainError('sphere quadrature order must be >= 0')
        self.order = order
        ct, wt = np.polynomial.legendre.leggauss(order + 1)
        n_phi = 2 * order + 2
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        theta = np.arccos(ct)
        tt, pp = np.meshgrid(theta, phi, indexing='ij')
        self.theta = tt.ravel()
        self.phi = pp.ravel()
        st = np.sin(self.theta)
        self.directions = np.stack([st * np.cos(self.phi),
                                    st * np.sin(self.phi),
                                    np.cos(self.theta)], axis=-1)
        self.weights = np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)

    def __len__(self):
        return len(self.weights)

    def points(self, radius, center=(0.0, 0.0, 0.0)):
        return np.asarray(center, dtype=float) + radius * self.directions

    def integrate(self, values, radius=1.0):
        return radius * radius * np.tensordot(self.weights, values,
                                              axes=(0, 0))

    def l2_norm(self, values, radius=1.0):
        return math.sqrt(self.integrate(np.abs(values) ** 2, radius).real)


def sphere_quadrature(order):
    return SphereQuadrature(order)


def test_face_quadrature_area_and_affine():
    tri = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
    q = face_quadrature(tri, 0.3)
    assert abs(q.weights.sum() - q.area) < 1e-13
    assert q.spacing <= 0.3 + 1e-12
    f = 1.0 + 2.0 * q.points[:, 0] - q.points[:, 1] + 0.5 * q.points[:, 2]
    centroid = tri.mean(axis=0)
    exact = q.area * (1.0 + 2.0 * centroid[0] - centroid[1] +
                      0.5 * centroid[2])
    assert abs(q.integrate(f) - exact) < 1e-12


def test_face_quadrature_normal_orientation():
    tri = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    q = face_quadrature(tri, 1.0, interior=np.zeros(3))
    assert np.allclose(q.normal, np.ones(3) / math.sqrt(3))
    q = face_quadrature(tri, 1.0, interior=np.ones(3))
    assert np.allclose(q.normal, -np.ones(3) / math.sqrt(3))


def test_face_quadrature_refine():
    tri = np.eye(3)
    q1 = face_quadrature(tri, 0.5)
    q2 = face_quadrature(tri, 0.5, refine=2)
    assert q2.subdivisions == 2 * q1.subdivisions
    assert len(q2) == 4 * len(q1)


def test_triangle_distance():
    tri = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    q = face_quadrature(tri, 1.0)
    d = q.distance(np.array([[0.2, 0.2, 0.5], [2.0, 0.0, 0.0],
                             [-1.0, -1.0, 0.0], [1.0, 1.0, 0.0]]))
    assert np.allclose(d, [0.5, 1.0, math.sqrt(2), math.sqrt(0.5)])


def test_sphere_quadrature():
    q = sphere_quadrature(6)
    assert abs(q.weights.sum() - 4 * np.pi) < 1e-12
    z = q.directions[:, 2]
    assert abs(q.integrate(z ** 2) - 4 * np.pi / 3) < 1e-12
    assert abs(q.integrate(z ** 2, radius=2.0) - 16 * np.pi / 3) < 1e-11
    assert np.allclose(np.linalg.norm(q.directions, axis=1), 1.0)


if __name__ == '__main__':
    test_face_quadrature_area_and_affine()
    test_face_quadrature_normal_orientation()
    test_face_quadrature_refine()
    test_triangle_distance()
    test_sphere_quadrature()

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

"""Transformation elastodynamics and discrete spring networks.

Under x' = x'(x) with u = B^T u', the equation div(C grad u) + w^2 rho u = 0
becomes a Willis-type law with tensors C', S', D', rho'. Spring networks
transform the same way when B = I, which needs springs whose force is not
along their axis; build_torque_spring realizes one from ordinary springs
and two internal masses.

Index conventions: (grad u)_ij = d u_j / d x_i, A_mi = d x'_m / d x_i,
G_ijp = d B_pj / d x_i.
"""

from __future__ import absolute_import, division, print_function, \
    with_statement

import json
import math
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from exocloak.common import NumericalError, DomainError, GeometryError, \
    ResonanceError

# interior dynamic stiffness blocks above this are treated as singular
SINGULAR_CONDITION = 1e12

PINNED = 'pinned'


def elasticity_tensor(C, tol=1e-12):
    """checked fourth order input tensor with the full symmetries of
    elasticity; transformed tensors are not passed through here"""
    C = np.asarray(C, dtype=float)
    dim = C.shape[0] if C.ndim else 0
    if dim not in (2, 3) or C.shape != (dim,) * 4:
        raise DomainError('elasticity tensor must have shape (d, d, d, d), '
                          'd = 2 or 3')
    scale = max(np.abs(C).max(), np.finfo(float).tiny)
    if np.abs(C - C.transpose(1, 0, 2, 3)).max() > tol * scale or \
            np.abs(C - C.transpose(2, 3, 0, 1)).max() > tol * scale:
        raise DomainError('elasticity tensor lacks the minor or major '
                          'symmetry')
    return C


def isotropic_tensor(lam, mu, dim=3):
    d = np.eye(dim)
    return lam * np.einsum('ij,kl->ijkl', d, d) + \
        mu * (np.einsum('ik,jl->ijkl', d, d) + np.einsum('il,jk->ijkl', d, d))


class TransformJet(object):
    """A, B and G at one point of the transformation"""

    def __init__(self, A, B, G=None):
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        dim = A.shape[0]
        if A.shape != (dim, dim) or B.shape != (dim, dim):
            raise DomainError('A and B must be square of the same size')
        if G is None:
            G = np.zeros((dim, dim, dim))
        G = np.asarray(G, dtype=float)
        if G.shape != (dim, dim, dim):
            raise DomainError('G must have shape (%d, %d, %d)' % ((dim,) * 3))
        if np.linalg.cond(B) > 1.0 / np.finfo(float).eps:
            raise GeometryError('B is singular')
        a = np.linalg.det(A)
        if not a > 0:
            raise GeometryError('det A = %r must be positive' % a)
        self.A = A
        self.B = B
        self.G = G
        self.a = a
        self.dim = dim

    @classmethod
    def identity(cls, dim=3):
        return cls(np.eye(dim), np.eye(dim))


def jet_from_map(xprime, B, x, h=1e-5):
    """TransformJet at x by central differences of x'(x) and the B-field

    B is a callable x -> matrix or a constant matrix
    """
    x = np.asarray(x, dtype=float)
    dim = len(x)
    A = np.empty((dim, dim))
    G = np.zeros((dim, dim, dim))
    field = B if callable(B) else (lambda _: B)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        A[:, i] = (np.asarray(xprime(x + e)) - np.asarray(xprime(x - e))) \
            / (2 * h)
        dB = (np.asarray(field(x + e)) - np.asarray(field(x - e))) / (2 * h)
        G[i] = dB.T
    return TransformJet(A, np.asarray(field(x), dtype=float), G)


class WillisMaterial(object):

    def __init__(self, C, S, D, rho):
        self.C = C
        self.S = S
        self.D = D
        self.rho = rho
        self.dim = C.shape[0]

    def symmetry_defect(self):
        """relative deviations from the minor and major symmetries of C'"""
        scale = max(np.abs(self.C).max(), np.finfo(float).tiny)
        return {
            'minor': np.abs(self.C - self.C.transpose(1, 0, 2, 3)).max()
            / scale,
            'major': np.abs(self.C - self.C.transpose(2, 3, 0, 1)).max()
            / scale,
            'coupling': np.abs(self.D - self.S.transpose(2, 0, 1)).max()
            / max(np.abs(self.S).max(), np.finfo(float).tiny),
        }

    def to_dict(self):
        return {'C': self.C, 'S': self.S, 'D': self.D, 'rho': self.rho}


def transform_material(C, rho, jet, omega):
    if not omega > 0:
        raise DomainError('omega must be positive')
    C = elasticity_tensor(C)
    if C.shape[0] != jet.dim:
        raise DomainError('tensor and jet dimensions differ')
    A, B, G, a = jet.A, jet.B, jet.G, jet.a
    Cp = np.einsum('ip,jq,kr,ls,pqrs->ijkl', A, B, A, B, C) / a
    Sp = np.einsum('ip,jq,rsk,pqrs->ijk', A, B, G, C) / a
    Dp = np.einsum('pqk,ir,js,pqrs->kij', G, A, B, C) / a
    rhop = (rho * B.dot(B.T) -
            np.einsum('pqi,rsj,pqrs->ij', G, G, C) / omega ** 2) / a
    return WillisMaterial(Cp, Sp, Dp, rhop)


def _gradient(u, x, h):
    # (grad u)_ij = d u_j / d x_i
    x = np.asarray(x, dtype=float)
    rows = []
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        rows.append((np.asarray(u(x + e)) - np.asarray(u(x - e))) / (2 * h))
    return np.array(rows)


def _divergence(sigma, x, h):
    # (div s)_j = d s_ij / d x_i
    x = np.asarray(x, dtype=float)
    out = 0
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        out = out + (sigma(x + e)[i] - sigma(x - e)[i]) / (2 * h)
    return out


class WillisForm(object):
    """sigma' = C' grad u' + (i/w) S' (-i w u'),
    p' = rho' (-i w u') + (i/w) D' grad u', with div sigma' = -i w p'"""

    def __init__(self, material, omega):
        self.material = material
        self.omega = omega

    def stress(self, grad_u, u):
        m = self.material
        w = self.omega
        return np.einsum('ijkl,kl->ij', m.C, grad_u) + \
            (1j / w) * np.einsum('ijk,k->ij', m.S, -1j * w * u)

    def momentum(self, grad_u, u):
        m = self.material
        w = self.omega
        return m.rho.dot(-1j * w * u) + \
            (1j / w) * np.einsum('kij,ij->k', m.D, grad_u)

    def residual(self, u, x, h=1e-4):
        """div sigma' + i w p' at x for the displacement field u"""
        def sigma(y):
            return self.stress(_gradient(u, y, h), np.asarray(u(y)))
        p = self.momentum(_gradient(u, x, h), np.asarray(u(x)))
        return _divergence(sigma, x, h) + 1j * self.omega * p

    def equivalence_residual(self, u, points, h=1e-4):
        """worst |R_willis + R_strong| relative to the strong residual;
        the two forms are algebraically equivalent"""
        worst = 0.0
        for x in np.atleast_2d(points):
            ra = strong_residual(self.material, self.omega, u, x, h)
            rb = self.residual(u, x, h)
            worst = max(worst, np.abs(ra + rb).max() /
                        max(1.0, np.abs(ra).max()))
        return worst


def willis_form(material, omega):
    return WillisForm(material, omega)


def strong_residual(material, omega, u, x, h=1e-4):
    """-div(C' grad u' + S' u') + D' grad u' - w^2 rho' u' at x"""
    m = material

    def flux(y):
        return np.einsum('ijkl,kl->ij', m.C, _gradient(u, y, h)) + \
            np.einsum('ijk,k->ij', m.S, np.asarray(u(y)))
    ux = np.asarray(u(x))
    return -_divergence(flux, x, h) + \
        np.einsum('kij,ij->k', m.D, _gradient(u, x, h)) - \
        omega ** 2 * m.rho.dot(ux)


Spring = namedtuple('Spring', ['i', 'j', 'k', 'direction'])


class SpringNetwork(object):
    """nodes with masses (np.inf = pinned) joined by springs

    a spring with direction None is axial; otherwise it pulls along its
    unit direction v: F_i = -F_j = k v [v . (u_j - u_i)]
    """

    def __init__(self, positions, masses, springs, terminals=()):
        positions = np.asarray(positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] not in (2, 3):
            raise DomainError('node positions must be 2-D or 3-D points')
        masses = np.asarray(masses, dtype=float)
        if masses.shape != (len(positions),) or np.any(masses < 0):
            raise DomainError('one non-negative mass per node is required')
        checked = []
        for s in springs:
            s = Spring(*s)
            if not 0 <= s.i < len(positions) or \
                    not 0 <= s.j < len(positions) or s.i == s.j:
                raise DomainError('spring (%r, %r) has bad end nodes'
                                  % (s.i, s.j))
            if s.k < 0:
                raise DomainError('spring constants must be non-negative')
            if s.direction is not None:
                v = np.asarray(s.direction, dtype=float)
                if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                    raise DomainError('spring directions must be unit')
                s = s._replace(direction=v)
            checked.append(s)
        self.positions = positions
        self.masses = masses
        self.springs = checked
        self.terminals = [int(t) for t in terminals]

    @property
    def dim(self):
        return self.positions.shape[1]

    def __len__(self):
        return len(self.positions)

    def axis(self, s):
        d = self.positions[s.j] - self.positions[s.i]
        n = np.linalg.norm(d)
        if n == 0:
            raise GeometryError('spring (%d, %d) joins coincident nodes'
                                % (s.i, s.j))
        return d / n

    def force_direction(self, s):
        return self.axis(s) if s.direction is None else s.direction

    def is_torque(self, s, tol=1e-10):
        if s.direction is None:
            return False
        n = self.axis(s)
        return min(np.linalg.norm(s.direction - n),
                   np.linalg.norm(s.direction + n)) > tol

    def free_nodes(self):
        return [i for i in range(len(self)) if np.isfinite(self.masses[i])]


def transform_network(net, forward, inverse, tol=1e-10):
    """the network seen in x' = forward(x) with B = I: forces, masses and
    displacements are unchanged, so each spring keeps its old force
    direction"""
    new = np.array([np.asarray(forward(x), dtype=float)
                    for x in net.positions])
    back = np.array([np.asarray(inverse(x), dtype=float) for x in new])
    scale = max(1.0, np.abs(net.positions).max())
    if np.abs(back - net.positions).max() > tol * scale:
        raise GeometryError('map is not inverted by the given inverse')
    for a in range(len(new)):
        d = np.linalg.norm(new[a + 1:] - new[a], axis=1)
        if np.any(d < tol * scale):
            raise GeometryError('map sends two nodes to the same point')
    out = SpringNetwork(new, net.masses, [], net.terminals)
    springs = []
    torque = 0
    for s in net.springs:
        v = net.force_direction(s)
        t = s._replace(direction=v)
        if out.is_torque(t, tol):
            torque += 1
        else:
            t = t._replace(direction=None)
        springs.append(t)
    out.springs = springs
    logging.debug('transformed network: %d of %d springs are torque springs'
                  % (torque, len(springs)))
    return out


def _dof_map(net):
    free = net.free_nodes()
    index = dict((node, n) for n, node in enumerate(free))
    return free, index


def assemble_network(net, omega=0.0):
    """stiffness and mass matrices on the free (unpinned) nodes

    dofs are node-major: free node n owns rows n*dim .. n*dim + dim - 1
    """
    free, index = _dof_map(net)
    dim = net.dim
    size = len(free) * dim
    K = np.zeros((size, size))
    for s in net.springs:
        v = net.force_direction(s)
        block = s.k * np.outer(v, v)
        for a, b, sign in ((s.i, s.i, 1), (s.j, s.j, 1),
                           (s.i, s.j, -1), (s.j, s.i, -1)):
            if a in index and b in index:
                ra = index[a] * dim
                rb = index[b] * dim
                K[ra:ra + dim, rb:rb + dim] += sign * block
    M = np.diag(np.repeat(net.masses[free], dim))
    return K, M


def solve_network(net, omega, forces):
    """displacements (n, dim) for external nodal forces (n, dim) at omega"""
    K, M = assemble_network(net, omega)
    free, index = _dof_map(net)
    f = np.asarray(forces, dtype=float)[free].ravel()
    D = K - omega ** 2 * M
    if np.linalg.cond(D) > SINGULAR_CONDITION:
        raise ResonanceError('network is resonant or floppy at omega = %r'
                             % omega)
    u = np.zeros(net.positions.shape)
    u[free] = linalg.solve(D, f, assume_a='sym').reshape(-1, net.dim)
    return u


def dynamic_condensation(net, omega, terminals=None):
    """terminal response: Schur complement of K - w^2 M onto the terminals

    interior mechanisms are eliminated with a pseudo-inverse; only an
    interior problem that is both singular and inconsistent is resonant
    """
    if terminals is None:
        terminals = net.terminals
    free, index = _dof_map(net)
    dim = net.dim
    for t in terminals:
        if t not in index:
            raise DomainError('terminal %d is pinned' % t)
    K, M = assemble_network(net, omega)
    D = K - omega ** 2 * M
    tdofs = np.concatenate([np.arange(index[t] * dim, index[t] * dim + dim)
                            for t in terminals])
    idofs = np.setdiff1d(np.arange(len(D)), tdofs)
    Dtt = D[np.ix_(tdofs, tdofs)]
    if len(idofs) == 0:
        return Dtt
    Dii = D[np.ix_(idofs, idofs)]
    Dit = D[np.ix_(idofs, tdofs)]
    Dti = D[np.ix_(tdofs, idofs)]
    cond = np.linalg.cond(Dii)
    if cond > SINGULAR_CONDITION:
        X = linalg.pinv(Dii, rtol=1.0 / SINGULAR_CONDITION).dot(Dit)
        scale = max(np.abs(Dit).max(), np.finfo(float).tiny)
        mismatch = np.abs(Dii.dot(X) - Dit).max() / scale
        if mismatch > 1e-8:
            raise ResonanceError('interior resonance at omega = %r '
                                 '(condition %.3g)' % (omega, cond))
        logging.debug('interior mechanisms eliminated (condition %.3g)'
                      % cond)
    else:
        X = linalg.solve(Dii, Dit)
    return Dtt - Dti.dot(X)


class TorqueSpringSpec(object):

    def __init__(self, x1, x2, v, offset, w, k=1.0, m=1.0, omega=None):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        dim = len(x1)
        if dim not in (2, 3) or any(len(a) != dim for a in (x2, v, w)):
            raise DomainError('torque spring points must share dimension '
                              '2 or 3')
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise DomainError('v must be a unit vector')
        if not offset > 0:
            raise DomainError('offset must be positive')
        if not k > 0 or not m > 0:
            raise DomainError('k and m must be positive')
        axis = x2 - x1
        if np.linalg.norm(axis) == 0:
            raise GeometryError('terminals coincide')
        if _parallel(v, axis):
            raise GeometryError('v is parallel to x2 - x1, use an axial '
                                'spring')
        if np.linalg.norm(w) == 0 or _parallel(w, v) or _parallel(w, axis):
            raise GeometryError('w must be nonzero and not parallel to v '
                                'or x2 - x1')
        self.x1, self.x2, self.v, self.w = x1, x2, v, w
        self.offset = float(offset)
        self.k = float(k)
        self.m = float(m)
        self.omega = omega

    def replace(self, **kw):
        args = dict(x1=self.x1, x2=self.x2, v=self.v, offset=self.offset,
                    w=self.w, k=self.k, m=self.m, omega=self.omega)
        args.update(kw)
        return TorqueSpringSpec(**args)

    def to_dict(self):
        return {'x1': self.x1, 'x2': self.x2, 'v': self.v, 'w': self.w,
                'offset': self.offset, 'k': self.k,
                'm': PINNED if math.isinf(self.m) else self.m,
                'omega': self.omega}


def _parallel(a, b):
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return abs(abs(a.dot(b)) - 1.0) < 1e-12


def build_torque_spring(spec):
    """nodes x1 x2 y1 y2 z1 z2 t1 t2; masses m on t1 and t2"""
    y1 = spec.x1 + spec.offset * spec.v
    y2 = spec.x2 + spec.offset * spec.v
    z1 = y1 + spec.w
    z2 = y2 + spec.w
    t1 = z1 + spec.v
    t2 = z2 + spec.v
    nodes = np.array([spec.x1, spec.x2, y1, y2, z1, z2, t1, t2])
    scale = np.abs(nodes).max() + 1.0
    for a in range(len(nodes)):
        if np.any(np.linalg.norm(nodes[a + 1:] - nodes[a], axis=1)
                  < 1e-12 * scale):
            raise GeometryError('torque spring construction nodes coincide')
    masses = np.zeros(8)
    masses[6:] = spec.m
    pairs = [(0, 2), (1, 3), (2, 3), (2, 4), (3, 5), (4, 5), (4, 6), (5, 7)]
    springs = [Spring(i, j, spec.k, None) for i, j in pairs]
    return SpringNetwork(nodes, masses, springs, terminals=(0, 1))


def torque_spring_constant(K, m, omega):
    """k' = K m w^2 / (m w^2 - 2K); pinned masses (m = inf) give K"""
    if math.isinf(m):
        return float(K)
    mw2 = m * omega ** 2
    denom = mw2 - 2.0 * K
    if abs(denom) <= 1e-12 * max(mw2, 2.0 * K):
        raise ResonanceError('torque spring resonance at m w^2 = 2K')
    return K * mw2 / denom


def torque_spring_base_constant(kprime, m, omega):
    """inverse of torque_spring_constant: K = k' m w^2 / (2k' + m w^2)"""
    if math.isinf(m):
        return float(kprime)
    mw2 = m * omega ** 2
    return kprime * mw2 / (2.0 * kprime + mw2)


def resonance_proximity(K, m, omega):
    if math.isinf(m):
        return 1.0
    mw2 = m * omega ** 2
    return abs(mw2 - 2.0 * K) / mw2


def two_terminal_block(kprime, v):
    return kprime * np.kron(np.array([[1.0, -1.0], [-1.0, 1.0]]),
                            np.outer(v, v))


def measure_K(spec, check_linearity=True):
    """K of the truss with its t-nodes pinned, read off the v v^T block"""
    def measure(s):
        net = build_torque_spring(s.replace(m=np.inf))
        S = dynamic_condensation(net, 0.0)
        d = len(s.v)
        return float(s.v.dot(S[:d, :d]).dot(s.v)), S

    K, S = measure(spec)
    if check_linearity:
        K2, _ = measure(spec.replace(k=2.0 * spec.k))
        if abs(K2 - 2.0 * K) > 1e-10 * abs(K):
            raise NumericalError('K is not proportional to k (%r, %r)'
                                 % (K, K2))
    logging.debug('torque spring K = %.12g for k = %g' % (K, spec.k))
    return K


def find_spring_intersections(net, tol=1e-12):
    """pairs of springs that cross or touch away from shared nodes, and
    (spring, node) pairs where a node lies on a spring"""
    p = net.positions
    scale = np.abs(p).max() + 1.0
    found = []
    springs = net.springs
    for a in range(len(springs)):
        sa = springs[a]
        for b in range(a + 1, len(springs)):
            sb = springs[b]
            if set((sa.i, sa.j)) & set((sb.i, sb.j)):
                continue
            d = _segment_distance(p[sa.i], p[sa.j], p[sb.i], p[sb.j])
            if d <= tol * scale:
                found.append(('spring', a, b))
        for node in range(len(p)):
            if node in (sa.i, sa.j):
                continue
            d = _segment_distance(p[sa.i], p[sa.j], p[node], p[node])
            if d <= tol * scale:
                found.append(('node', a, node))
    for kind, a, b in found:
        logging.warning('spring %d intersects %s %d' % (a, kind, b))
    return found


def _segment_distance(p0, p1, q0, q1):
    # closest points of two segments, clamped parametrization
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = d1.dot(d1)
    e = d2.dot(d2)
    f = d2.dot(r)
    if e == 0:
        s = np.clip(-r.dot(d1) / a, 0.0, 1.0) if a > 0 else 0.0
        return np.linalg.norm(p0 + s * d1 - q0)
    c = d1.dot(r)
    b = d1.dot(d2)
    denom = a * e - b * b
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 0 else 0.0
    t = (b * s + f) / e
    if t < 0:
        t = 0.0
        s = np.clip(-c / a, 0.0, 1.0)
    elif t > 1:
        t = 1.0
        s = np.clip((b - c) / a, 0.0, 1.0)
    return np.linalg.norm(p0 + s * d1 - (q0 + t * d2))


def network_to_json(net):
    nodes = []
    for i, (x, m) in enumerate(zip(net.positions, net.masses)):
        nodes.append({'id': i, 'position': x.tolist(),
                      'mass': PINNED if math.isinf(m) else float(m)})
    springs = []
    for s in net.springs:
        d = {'i': s.i, 'j': s.j, 'k': float(s.k)}
        if s.direction is not None:
            d['direction'] = np.asarray(s.direction).tolist()
        springs.append(d)
    return {'nodes': nodes, 'springs': springs, 'terminals': net.terminals}


def network_from_json(obj):
    if not isinstance(obj, dict):
        obj = json.loads(obj)
    try:
        ids = dict((n['id'], i) for i, n in enumerate(obj['nodes']))
        positions = [n['position'] for n in obj['nodes']]
        masses = [np.inf if n.get('mass', 0.0) == PINNED
                  else float(n.get('mass', 0.0)) for n in obj['nodes']]
        springs = [Spring(ids[s['i']], ids[s['j']], float(s['k']),
                          s.get('direction')) for s in obj['springs']]
        terminals = [ids[t] for t in obj.get('terminals', [])]
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError('bad network description: %s' % e)
    return SpringNetwork(positions, masses, springs, terminals)


def response_to_json(S, omega, terminals, **extra):
    out = {'omega': omega, 'terminals': list(terminals),
           'matrix': np.asarray(S).tolist()}
    out.update(extra)
    return out


def default_torque_spec(omega=None):
    angle = math.pi / 3
    return TorqueSpringSpec(x1=[0.0, 0.0], x2=[1.0, 0.0],
                            v=[math.cos(angle), math.sin(angle)],
                            offset=0.5, w=[0.3, -1.0], k=1.0, m=1.0,
                            omega=omega)


def _bend_jacobian(x):
    # x' = (x0 + 0.2 x0 x1, x1 + 0.1 sin x0)
    return np.array([[1.0 + 0.2 * x[1], 0.2 * x[0]],
                     [0.1 * math.cos(x[0]), 1.0]])


def _bend_hessian(x):
    # d A_pj / d x_i stored as G[i, j, p]
    G = np.zeros((2, 2, 2))
    G[0, 1, 0] = 0.2
    G[1, 0, 0] = 0.2
    G[0, 0, 1] = -0.1 * math.sin(x[0])
    return G


def transformation_checks(lam=1.0, mu=0.6, omega=1.7, seed=0):
    """worst relative residuals of the tensor transformation identities"""
    rng = np.random.RandomState(seed)
    C = isotropic_tensor(lam, mu, 2)
    scale = np.abs(C).max()
    report = {}

    m = transform_material(C, 1.0, TransformJet.identity(2), omega)
    report['identity'] = max(np.abs(m.C - C).max() / scale,
                             np.abs(m.S).max(), np.abs(m.D).max(),
                             np.abs(m.rho - np.eye(2)).max())

    A = np.eye(2) + 0.3 * rng.normal(size=(2, 2))
    if np.linalg.det(A) < 0:
        A[0] = -A[0]
    m = transform_material(C, 1.0, TransformJet(A, np.eye(2)), omega)
    expected = np.einsum('ip,kr,pjrl->ijkl', A, A, C) / np.linalg.det(A)
    report['b_identity'] = np.abs(m.C - expected).max() / \
        np.abs(expected).max()

    x = rng.uniform(-0.5, 0.5, size=2)
    jet = TransformJet(_bend_jacobian(x), _bend_jacobian(x), _bend_hessian(x))
    defect = transform_material(C, 1.0, jet, omega).symmetry_defect()
    report['b_equal_a_minor'] = defect['minor']
    report['b_equal_a_major'] = defect['major']

    m = transform_material(C, 1.2, _random_jet(rng, 2), omega)
    report['coupling'] = m.symmetry_defect()['coupling']
    c0 = rng.normal(size=2) + 1j * rng.normal(size=2)
    c1 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    c2 = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))

    def u(y):
        return c0 + c1.dot(y) + np.einsum('jab,a,b->j', c2, y, y)

    report['willis'] = willis_form(m, omega).equivalence_residual(
        u, rng.normal(size=(5, 2)))
    return report


def _random_jet(rng, dim):
    A = np.eye(dim) + 0.3 * rng.normal(size=(dim, dim))
    B = np.eye(dim) + 0.3 * rng.normal(size=(dim, dim))
    if np.linalg.det(A) < 0:
        A[0] = -A[0]
    return TransformJet(A, B, 0.2 * rng.normal(size=(dim, dim, dim)))


def test_isotropic_tensor():
    C = isotropic_tensor(2.0, 0.5, 3)
    assert C[0, 0, 0, 0] == 3.0 and C[0, 0, 1, 1] == 2.0
    assert C[0, 1, 0, 1] == 0.5 and C[0, 1, 1, 0] == 0.5
    assert np.allclose(C, C.transpose(1, 0, 2, 3))
    assert np.allclose(C, C.transpose(2, 3, 0, 1))
    bad = C.copy()
    bad[0, 1, 0, 0] += 1.0
    try:
        elasticity_tensor(bad)
        assert False
    except DomainError:
        pass


def test_identity_jet():
    C = isotropic_tensor(1.0, 1.0, 2)
    m = transform_material(C, 3.0, TransformJet.identity(2), 2.0)
    assert np.allclose(m.C, C, rtol=0, atol=1e-15)
    assert not m.S.any() and not m.D.any()
    assert np.allclose(m.rho, 3.0 * np.eye(2))
    try:
        TransformJet(np.eye(2), np.zeros((2, 2)))
        assert False
    except GeometryError:
        pass
    try:
        TransformJet(np.diag([1.0, -1.0]), np.eye(2))
        assert False
    except GeometryError:
        pass


def test_b_identity_is_normal_elastodynamics():
    rng = np.random.RandomState(11)
    C = isotropic_tensor(1.3, 0.7, 3)
    A = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
    if np.linalg.det(A) < 0:
        A[0] = -A[0]
    jet = TransformJet(A, np.eye(3))
    m = transform_material(C, 2.0, jet, 1.5)
    a = np.linalg.det(A)
    expected = np.einsum('ip,kr,pjrl->ijkl', A, A, C) / a
    assert np.abs(m.C - expected).max() < 1e-12 * np.abs(expected).max()
    assert not m.S.any() and not m.D.any()
    assert np.allclose(m.rho, 2.0 / a * np.eye(3), rtol=1e-14)
    assert m.symmetry_defect()['major'] < 1e-12


def test_b_equal_a_keeps_symmetries():
    C = isotropic_tensor(1.0, 2.0, 2)
    x = np.array([0.3, -0.4])
    jet = TransformJet(_bend_jacobian(x), _bend_jacobian(x),
                       _bend_hessian(x))
    m = transform_material(C, 1.0, jet, 3.0)
    defect = m.symmetry_defect()
    assert defect['minor'] < 1e-12 and defect['major'] < 1e-12
    assert defect['coupling'] < 1e-12
    assert np.allclose(m.rho, m.rho.T, rtol=0, atol=1e-14)
    # the analytic hessian is the derivative of the jacobian
    h = 1e-4
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        dA = (_bend_jacobian(x + e) - _bend_jacobian(x - e)) / (2 * h)
        assert np.abs(dA.T - _bend_hessian(x)[i]).max() < 1e-8


def test_transformation_checks():
    report = transformation_checks(seed=3)
    assert report['identity'] < 1e-15
    assert report['b_identity'] < 1e-12
    assert report['b_equal_a_minor'] < 1e-12
    assert report['b_equal_a_major'] < 1e-12
    assert report['coupling'] < 1e-12
    assert report['willis'] < 1e-6


def test_coupling_tensors_agree():
    rng = np.random.RandomState(12)
    for dim in (2, 3):
        C = isotropic_tensor(1.0, 0.4, dim)
        m = transform_material(C, 1.0, _random_jet(rng, dim), 0.7)
        assert m.symmetry_defect()['coupling'] < 1e-12


def test_jet_from_map():
    def xprime(x):
        return np.array([x[0] + 0.2 * x[0] * x[1], x[1] + 0.1 * x[0] ** 3])

    def B(x):
        return np.array([[1.0 + x[0] ** 2, x[1]], [0.0, 1.0 + x[0] * x[1]]])

    x = np.array([0.5, -0.3])
    G = np.zeros((2, 2, 2))
    G[0, 0, 0] = 2 * x[0]
    G[1, 1, 0] = 1.0
    G[0, 1, 1] = x[1]
    G[1, 1, 1] = x[0]
    err = [np.abs(jet_from_map(xprime, B, x, h).A -
                  [[1 + 0.2 * x[1], 0.2 * x[0]], [0.3 * x[0] ** 2, 1.0]])
           .max() for h in (1e-2, 5e-3)]
    assert err[1] < err[0] / 3
    jet = jet_from_map(xprime, B, x, 1e-3)
    assert np.abs(jet.G - G).max() < 1e-8


def test_willis_form_plane_wave():
    # a longitudinal plane wave solves the untransformed equations when
    # w^2 rho = (lambda + 2 mu) k^2
    lam, mu, rho, k = 1.0, 0.6, 1.2, 2.0
    omega = k * math.sqrt((lam + 2 * mu) / rho)
    C = isotropic_tensor(lam, mu, 2)
    plain = transform_material(C, rho, TransformJet.identity(2), omega)
    d = np.array([0.6, 0.8])

    def u(x):
        return d * np.exp(1j * k * d.dot(x))

    x = np.array([0.3, -0.2])
    scale = omega ** 2 * rho
    assert np.abs(strong_residual(plain, omega, u, x)).max() < 1e-6 * scale
    assert np.abs(willis_form(plain, omega).residual(u, x)).max() < \
        1e-6 * scale
    g = np.random.RandomState(13).normal(size=(2, 2))
    assert np.allclose(willis_form(plain, omega).stress(g, d),
                       np.einsum('ijkl,kl->ij', C, g))


def test_axial_spring_condensation():
    net = SpringNetwork([[0.0, 0.0], [3.0, 4.0]], [0.0, 0.0],
                        [Spring(0, 1, 2.0, None)], terminals=(0, 1))
    S = dynamic_condensation(net, 1.0)
    n = np.array([0.6, 0.8])
    assert np.allclose(S, two_terminal_block(2.0, n), rtol=0, atol=1e-15)


def test_torque_spring_structure():
    spec = default_torque_spec()
    net = build_torque_spring(spec)
    assert len(net) == 8 and len(net.springs) == 8
    assert list(np.nonzero(net.masses)[0]) == [6, 7]
    assert net.terminals == [0, 1]
    assert not find_spring_intersections(net)
    try:
        spec.replace(v=np.array([1.0, 0.0]))
        assert False
    except GeometryError:
        pass
    # static truss seen from x1, x2, t1, t2 is rank one along
    # (u2 - u1 - w2 + w1) . v
    K = measure_K(spec)
    S4 = dynamic_condensation(net, 0.0, terminals=[0, 1, 6, 7])
    v = spec.v
    g = np.concatenate([-v, v, v, -v])
    assert np.linalg.matrix_rank(S4, tol=1e-9 * np.abs(S4).max()) == 1
    assert np.abs(S4 - K * np.outer(g, g)).max() < 1e-10 * K


def test_measure_K():
    spec = default_torque_spec()
    K = measure_K(spec)
    assert K > 0
    doubled = measure_K(spec.replace(k=2.0), check_linearity=False)
    assert abs(doubled - 2 * K) < 1e-12 * K
    moved = spec.replace(x1=spec.x1 + [5.0, -2.0], x2=spec.x2 + [5.0, -2.0])
    assert abs(measure_K(moved) - K) < 1e-12 * K


def test_torque_spring_oracle():
    spec = default_torque_spec()
    K = measure_K(spec)
    net = build_torque_spring(spec)
    for ratio in (0.25, 0.5, 1.0, 1.5, 1.9, 2.2, 3.0, 4.0, 8.0, 16.0):
        omega = math.sqrt(ratio * K / spec.m)
        kp = torque_spring_constant(K, spec.m, omega)
        S = dynamic_condensation(net, omega)
        expected = two_terminal_block(kp, spec.v)
        assert np.abs(S - expected).max() < 1e-10 * abs(kp)
        # action and reaction
        assert np.abs(S[:2] + S[2:]).max() < 1e-12 * abs(kp)
    pinned = build_torque_spring(spec.replace(m=np.inf))
    S = dynamic_condensation(pinned, 2.0)
    assert np.abs(S - two_terminal_block(K, spec.v)).max() < 1e-12 * K
    assert torque_spring_constant(K, np.inf, 2.0) == K
    try:
        dynamic_condensation(net, math.sqrt(2 * K / spec.m))
        assert False
    except ResonanceError:
        pass
    # no inertia: the mechanism is free and the spring goes slack
    S = dynamic_condensation(net, 0.0)
    assert np.abs(S).max() < 1e-9 * spec.k


def test_torque_spring_constant():
    assert abs(torque_spring_constant(1.5, 2.0, math.sqrt(3.0)) - 3.0) \
        < 1e-15
    for K, m, w in ((1.0, 3.0, 1.1), (0.2, 1.0, 7.0), (5.0, 0.1, 20.0)):
        kp = torque_spring_constant(K, m, w)
        assert abs(torque_spring_base_constant(kp, m, w) - K) < 1e-13 * K
    assert abs(torque_spring_constant(1.0, 1e12, 1.0) - 1.0) < 1e-11
    try:
        torque_spring_constant(1.0, 1.0, math.sqrt(2.0))
        assert False
    except ResonanceError:
        pass
    assert resonance_proximity(1.0, 4.0, 1.0) == 0.5


def _lattice():
    xs = np.linspace(0.0, 1.0, 4)
    positions = np.array([[x, y] for y in xs for x in xs])
    masses = np.ones(16)
    masses[[0, 3]] = np.inf
    springs = []
    for r in range(4):
        for c in range(4):
            i = 4 * r + c
            if c < 3:
                springs.append(Spring(i, i + 1, 1.0 + 0.1 * r, None))
            if r < 3:
                springs.append(Spring(i, i + 4, 0.8 + 0.1 * c, None))
            if r < 3 and c < 3:
                springs.append(Spring(i, i + 5, 0.5, None))
    return SpringNetwork(positions, masses, springs)


def test_transform_network():
    net = _lattice()
    same = transform_network(net, lambda x: x, lambda x: x)
    assert np.allclose(same.positions, net.positions)
    assert all(s.direction is None for s in same.springs)

    theta = 0.4
    R = np.array([[math.cos(theta), -math.sin(theta)],
                  [math.sin(theta), math.cos(theta)]])
    rotated = transform_network(net, R.dot, R.T.dot)
    for old, new in zip(net.springs, rotated.springs):
        assert rotated.is_torque(new)
        assert np.allclose(new.direction, R.T.dot(rotated.axis(new)))
        assert np.allclose(new.direction, net.axis(old))
    back = transform_network(rotated, R.T.dot, R.dot)
    assert np.abs(back.positions - net.positions).max() < 1e-10
    assert all(s.direction is None for s in back.springs)

    def bend(x):
        return np.array([x[0] + 0.2 * x[1] ** 2, x[1]])

    def unbend(x):
        return np.array([x[0] - 0.2 * x[1] ** 2, x[1]])

    bent = transform_network(net, bend, unbend)
    forces = np.random.RandomState(14).normal(size=(16, 2))
    for omega in (0.3, 1.1):
        u = solve_network(net, omega, forces)
        u2 = solve_network(bent, omega, forces)
        assert np.abs(u - u2).max() < 1e-10 * max(1.0, np.abs(u).max())
    try:
        transform_network(net, lambda x: 0 * x, lambda x: x)
        assert False
    except GeometryError:
        pass


def test_spring_intersections():
    net = SpringNetwork([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0],
                         [0.5, 0.0]], np.zeros(5),
                        [Spring(0, 1, 1.0, None), Spring(2, 3, 1.0, None),
                         Spring(0, 2, 1.0, None)])
    found = find_spring_intersections(net)
    assert ('spring', 0, 1) in found
    assert ('node', 2, 4) in found


def test_network_json():
    spec = default_torque_spec()
    net = build_torque_spring(spec.replace(m=np.inf))
    net.springs[0] = net.springs[0]._replace(direction=np.array([0.0, 1.0]))
    text = json.dumps(network_to_json(net))
    again = network_from_json(text)
    assert np.allclose(again.positions, net.positions)
    assert np.isinf(again.masses[6]) and again.masses[0] == 0
    assert np.allclose(again.springs[0].direction, [0.0, 1.0])
    assert again.terminals == [0, 1]
    r = response_to_json(np.eye(2), 1.5, [0, 1], k_prime=2.0)
    assert r['matrix'] == [[1.0, 0.0], [0.0, 1.0]] and r['k_prime'] == 2.0
    try:
        network_from_json({'nodes': [{'position': [0, 0]}]})
        assert False
    except DomainError:
        pass


if __name__ == '__main__':
    test_isotropic_tensor()
    test_identity_jet()
    test_b_identity_is_normal_elastodynamics()
    test_b_equal_a_keeps_symmetries()
    test_coupling_tensors_agree()
    test_transformation_checks()
    test_jet_from_map()
    test_willis_form_plane_wave()
    test_axial_spring_condensation()
    test_torque_spring_structure()
    test_measure_K()
    test_torque_spring_oracle()
    test_torque_spring_constant()
    test_transform_network()
    test_spring_intersections()
    test_network_json()

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

"""Quasistatic exterior cloak in the plane.

Points are complex numbers z = x + iy. The cloaked disk B(c, a), c = (p, 0),
and the far observer region |z| > R are exchanged by the Kelvin map
w = 1/z with the disks B(beta, alpha) and B(0, 1/R). The cloaking
polynomial P_{n,s} is close to 1 near w = 0 and close to 0 near w = beta,
so the device potential Re[Q0 (P - 1)](1/z) cancels the probe inside the
cloak and vanishes far away.
"""

from __future__ import absolute_import, division, print_function, \
    with_statement

import math
import logging

import numpy as np
import mpmath
from scipy.optimize import brentq
from scipy.special import comb

from exocloak.common import DomainError, GeometryError, SingularityError, \
    ResonanceError, ConvergenceError, CoefficientOverflowError


MAX_POLY_DEGREE = 500

ORIGIN_SIDE = 'origin-side'
C_STAR_SIDE = 'c*-side'
OUTSIDE = 'outside'

_EPS = np.finfo(float).eps


class CloakGeometry2D(object):

    def __init__(self, a, p, R, delta):
        for name, value in (('a', a), ('p', p), ('R', R), ('delta', delta)):
            if not value > 0:
                raise GeometryError('%s > 0 violated (%s = %r)'
                                    % (name, name, value))
        if not p > a + delta:
            raise GeometryError('p > a + delta violated (%r <= %r)'
                                % (p, a + delta))
        if not R > a + p:
            raise GeometryError('R > a + p violated (%r <= %r)' % (R, a + p))
        self.a = float(a)
        self.p = float(p)
        self.R = float(R)
        self.delta = float(delta)
        self.alpha, self.beta = kelvin_geometry(self)

    @classmethod
    def from_beta(cls, beta, p, R, delta):
        """the cloak whose Kelvin image is centered at beta"""
        a2 = p * p - p / beta
        if not a2 > 0:
            raise GeometryError('p^2 > p / beta violated for p=%r beta=%r'
                                % (p, beta))
        return cls(math.sqrt(a2), p, R, delta)

    @property
    def c_star(self):
        return self.beta

    def __repr__(self):
        return 'CloakGeometry2D(a=%r, p=%r, R=%r, delta=%r)' % \
            (self.a, self.p, self.R, self.delta)


def kelvin_map(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SingularityError('Kelvin map is singular at z = 0')
    w = 1.0 / z
    if w.ndim == 0:
        return complex(w)
    return w


def kelvin_image(f):
    """w -> f(1/w)"""
    def image(w):
        return f(kelvin_map(w))
    return image


def kelvin_geometry(g):
    d = g.p * g.p - g.a * g.a
    if abs(d) < 1e-14 * g.p * g.p:
        raise GeometryError('p^2 - a^2 = 0, the cloak touches the origin')
    alpha = g.a / abs(d)
    beta = g.p / d
    if not 1.0 / g.R < beta - alpha:
        raise GeometryError('1/R < beta - alpha violated (%r >= %r)'
                            % (1.0 / g.R, beta - alpha))
    if not beta + alpha < 1.0 / g.delta:
        raise GeometryError('beta + alpha < 1/delta violated (%r >= %r)'
                            % (beta + alpha, 1.0 / g.delta))
    return alpha, beta


class ComplexPolynomial(object):
    """sum_k c_k (z - center)^k"""

    def __init__(self, coeffs, center=0.0):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        nz = np.nonzero(c)[0]
        c = c[:nz[-1] + 1] if len(nz) else c[:1] * 0
        if len(c) - 1 > MAX_POLY_DEGREE:
            raise CoefficientOverflowError('degree %d exceeds the cap %d'
                                           % (len(c) - 1, MAX_POLY_DEGREE))
        self.coeffs = c
        self.center = complex(center)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        v = np.polynomial.polynomial.polyval(z - self.center, self.coeffs)
        if np.ndim(v) == 0:
            return complex(v)
        return v

    def recenter(self, center):
        center = complex(center)
        if center == self.center:
            return self
        # (z - c_old) = (z - c_new) + shift, expanded by Horner
        shift = center - self.center
        out = np.zeros(1, dtype=complex)
        for c in self.coeffs[::-1]:
            out = np.polynomial.polynomial.polymul(out, [shift, 1.0])
            out[0] += c
        return ComplexPolynomial(out, center)

    def __mul__(self, other):
        if not isinstance(other, ComplexPolynomial):
            return ComplexPolynomial(self.coeffs * other, self.center)
        other = other.recenter(self.center)
        return ComplexPolynomial(
            np.polynomial.polynomial.polymul(self.coeffs, other.coeffs),
            self.center)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, ComplexPolynomial):
            other = ComplexPolynomial([other], self.center)
        other = other.recenter(self.center)
        return ComplexPolynomial(
            np.polynomial.polynomial.polyadd(self.coeffs, other.coeffs),
            self.center)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial(-self.coeffs, self.center)

    def __sub__(self, other):
        return self + (-other)

    def deriv(self):
        if self.degree == 0:
            return ComplexPolynomial([0.0], self.center)
        return ComplexPolynomial(
            np.polynomial.polynomial.polyder(self.coeffs), self.center)

    def __repr__(self):
        return 'ComplexPolynomial(degree=%d, center=%r)' % \
            (self.degree, self.center)


class CloakPolynomial(ComplexPolynomial):
    """P_{n,s}(z) = (1 - z/beta)^s sum_{j<n} binom(s+j-1, j) (z/beta)^j

    Coefficients are expanded exactly over the integers; evaluation uses the
    factored form, and P - 1 is evaluated either from the factored form or
    from the exact tail z^n sum_k c_{n+k} z^k, whichever has the smaller
    rounding bound at that point.
    """

    def __init__(self, n, s, beta, exact):
        self.n = n
        self.s = s
        self.beta = float(beta)
        self.exact = exact
        try:
            zeta = [float(c) for c in exact]
            scale = np.array([self.beta ** -k for k in range(len(exact))])
        except OverflowError:
            raise CoefficientOverflowError(
                'P_{%d,%d} coefficients overflow double precision' % (n, s))
        coeffs = np.array(zeta) * scale
        if not np.all(np.isfinite(coeffs)):
            raise CoefficientOverflowError(
                'P_{%d,%d} coefficients overflow for beta=%r' % (n, s, beta))
        ComplexPolynomial.__init__(self, coeffs)
        self._sum = np.array([float(comb(s + j - 1, j, exact=True))
                              for j in range(n)])
        self._tail = np.array(zeta[n:])

    def _factored(self, zeta):
        pv = np.polynomial.polynomial.polyval
        return (1.0 - zeta) ** self.s * pv(zeta, self._sum)

    def __call__(self, z):
        v = self._factored(np.asarray(z, dtype=complex) / self.beta)
        if np.ndim(v) == 0:
            return complex(v)
        return v

    def minus_one(self, z):
        pv = np.polynomial.polynomial.polyval
        zeta = np.asarray(z, dtype=complex) / self.beta
        r = np.abs(zeta)
        from_factored = self._factored(zeta) - 1.0
        from_tail = zeta ** self.n * pv(zeta, self._tail)
        bound_factored = np.abs(1.0 - zeta) ** self.s * pv(r, self._sum) + 1
        bound_tail = r ** self.n * pv(r, np.abs(self._tail))
        v = np.where(bound_tail < bound_factored, from_tail, from_factored)
        if np.ndim(v) == 0:
            return complex(v)
        return v


def _exact_coefficients(n, s):
    # integer coefficients of P_{n,s} in zeta = z / beta
    factor = [(-1) ** i * comb(s, i, exact=True) for i in range(s + 1)]
    partial = [comb(s + j - 1, j, exact=True) for j in range(n)]
    out = [0] * (n + s)
    for i, a in enumerate(factor):
        if a == 0:
            continue
        for j, b in enumerate(partial):
            out[i + j] += a * b
    return out


def cloak_polynomial(n, s, beta):
    if int(n) != n or int(s) != s or n < 1 or s < 1:
        raise DomainError('n and s must be positive integers')
    if not beta > 0:
        raise DomainError('beta must be positive')
    if n + s - 1 > MAX_POLY_DEGREE:
        raise CoefficientOverflowError('degree n + s - 1 = %d exceeds %d'
                                       % (n + s - 1, MAX_POLY_DEGREE))
    n = int(n)
    s = int(s)
    logging.debug('cloaking polynomial n=%d s=%d beta=%r' % (n, s, beta))
    return CloakPolynomial(n, s, beta, _exact_coefficients(n, s))


def cloak_polynomial_hermite_oracle(n, s, beta):
    """P_{n,s} from its Hermite conditions, solved in extended precision

    P(0) = 1, P^(k)(0) = 0 for k < n, P^(k)(beta) = 0 for k < s.
    """
    if n + s > 60:
        raise ConvergenceError('Hermite oracle is limited to n + s <= 60')
    with mpmath.workdps(40 + 3 * (n + s)):
        b = mpmath.mpf(beta)
        # unknowns c_n .. c_{n+s-1}; c_0 = 1 and c_1 .. c_{n-1} = 0
        a = mpmath.matrix(s, s)
        rhs = mpmath.matrix(s, 1)
        for k in range(s):
            for col in range(s):
                j = n + col
                a[k, col] = mpmath.ff(j, k) * b ** (j - k)
            rhs[k] = -1 if k == 0 else 0
        sol = mpmath.lu_solve(a, rhs)
        coeffs = [1.0] + [0.0] * (n - 1) + [float(sol[i]) for i in range(s)]
    return ComplexPolynomial(coeffs)


def synthetic_division(poly, root):
    """(quotient, remainder) of poly / (z - root)"""
    c = poly.recenter(0.0).coeffs[::-1]
    out = np.empty(len(c), dtype=complex)
    acc = 0j
    for i, v in enumerate(c):
        acc = acc * root + v
        out[i] = acc
    quotient = out[:-1][::-1] if len(c) > 1 else np.zeros(1)
    return ComplexPolynomial(quotient), out[-1]


def region_excess(z, beta, L):
    """log(|z - beta|^L |z|) - log(beta^(L+1) L^L / (L+1)^(L+1))"""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide='ignore'):
        lhs = L * np.log(np.abs(z - beta)) + np.log(np.abs(z))
    rhs = (L + 1) * math.log(beta) + L * math.log(L) - \
        (L + 1) * math.log(L + 1)
    return lhs - rhs


def saddle_point(beta, L):
    return beta / (L + 1.0)


def region_labels(z, beta, L):
    """0 outside, 1 on the origin side, 2 on the c* side"""
    if not beta > 0 or not L > 0:
        raise DomainError('beta and L must be positive')
    z = np.asarray(z, dtype=complex)
    inside = region_excess(z, beta, L) < 0
    # the level set pinches at the saddle; the vertical line through it
    # carries no inside points
    side = np.where(z.real < saddle_point(beta, L), 1, 2)
    return np.where(inside, side, 0)


def in_convergence_region(z, beta, L):
    label = int(region_labels(z, beta, L))
    return label != 0, (OUTSIDE, ORIGIN_SIDE, C_STAR_SIDE)[label]


def convergence_region_intervals(beta, L):
    saddle = saddle_point(beta, L)

    def f(x):
        return region_excess(x, beta, L)

    left = brentq(f, -beta, -1e-300, xtol=1e-15)
    right = brentq(f, beta * (1 + 1e-15), 2.0 * beta, xtol=1e-15)
    return {'saddle': saddle,
            ORIGIN_SIDE: (left, saddle),
            C_STAR_SIDE: (saddle, right)}


def convergence_region_boundary(beta, L, count=256):
    """closed polylines of both lobes of the region boundary

    each lobe is scanned along rays from its focus (0 or beta); a ray is
    cut at the vertical line through the saddle
    """
    saddle = saddle_point(beta, L)
    theta = 2.0 * np.pi * np.arange(count) / count
    out = {}
    for label, focus, sign in ((ORIGIN_SIDE, 0.0, 1.0),
                               (C_STAR_SIDE, beta, -1.0)):
        points = np.empty(count, dtype=complex)
        for i, t in enumerate(theta):
            e = complex(math.cos(t), math.sin(t))
            rmax = 2.0 * beta
            toward = sign * e.real
            if toward > 1e-12:
                rmax = min(rmax, sign * (saddle - focus) / toward)

            def g(r):
                return float(region_excess(focus + r * e, beta, L))

            if g(rmax) <= 0:
                points[i] = focus + rmax * e
                continue
            grid = np.linspace(0.0, rmax, 65)[1:]
            vals = np.array([g(r) for r in grid])
            k = int(np.argmax(vals >= 0))
            lo = grid[k - 1] if k > 0 else 1e-300
            points[i] = focus + brentq(g, lo, grid[k]) * e
        out[label] = points
    return out


def sup_on_circle(f, center, radius, count=256):
    theta = 2.0 * np.pi * np.arange(count) / count
    z = center + radius * np.exp(1j * theta)
    return float(np.abs(f(z)).max())


def taylor_coefficients(f, center, radius, degree, tol=1e-15, scale=0.0):
    """Taylor coefficients of an analytic f about center, by FFT on a circle

    the sample count doubles until the spectrum decays to `tol` relative
    to the larger of its peak and `scale`, or stops shrinking at the
    rounding floor of f; negative frequencies measure the non-analytic
    part of f. Pass the size of the terms f is summed from as `scale`
    when f cancels heavily.
    """
    count = max(64, 4 * (degree + 1))
    previous = None
    while True:
        theta = 2.0 * np.pi * np.arange(count) / count
        samples = np.asarray(f(center + radius * np.exp(1j * theta)),
                             dtype=complex)
        spec = np.fft.fft(samples) / count
        head = max(np.abs(spec).max(), scale)
        if head == 0:
            return np.zeros(degree + 1, dtype=complex)
        half = count // 2
        tail = np.abs(spec[count // 4:half]).max()
        if tail <= tol * head:
            break
        # geometric decay at least halves the tail per doubling
        if previous is not None and tail > 0.5 * previous and \
                tail <= 1e-6 * head:
            logging.debug('Taylor spectrum on |z - %r| = %r stops at '
                          '%.3g of its peak' % (center, radius, tail / head))
            break
        if count >= 8192:
            raise ConvergenceError('Taylor coefficients do not decay on '
                                   'the circle |z - %r| = %r' %
                                   (center, radius))
        previous = tail
        count *= 2
    negative = np.abs(spec[half + 1:]).max()
    if negative > max(1e-8 * head, 10.0 * tail):
        raise ConvergenceError('function is not analytic on the disk '
                               '|z - %r| < %r' % (center, radius))
    k = np.arange(degree + 1)
    return spec[:degree + 1] / radius ** k


def probe_approximant(u0, center, radius, degree, margin=None):
    """degree-d Taylor polynomial of an analytic probe about center

    the returned polynomial carries the sup-norm residual on the circle
    |w - center| = radius as the attribute `residual`
    """
    if margin is None:
        margin = 0.25 * radius
    rho = radius + margin
    coeffs = taylor_coefficients(u0, center, rho, degree)
    # drop coefficients below rounding relative to the largest term
    terms = np.abs(coeffs) * rho ** np.arange(degree + 1)
    if terms.max() > 0:
        coeffs[terms < 1e-14 * terms.max()] = 0
    q = ComplexPolynomial(coeffs, center)
    q.residual = sup_on_circle(lambda w: u0(w) - q(w), center, radius)
    logging.debug('probe approximant degree %d, residual %.3g'
                  % (q.degree, q.residual))
    return q


def line_source_probe(z0):
    """analytic f with Re f(z) = log|z - z0|, cut along the ray outward
    from z0 away from the origin"""
    z0 = complex(z0)
    if z0 == 0:
        raise DomainError('line source must not sit at the origin')

    def f(z):
        return np.log(1.0 - np.asarray(z, dtype=complex) / z0) + \
            math.log(abs(z0))
    return f


def _device_term(q0, p, w):
    # Q0 (P - 1) at w = 1/z
    minus_one = getattr(p, 'minus_one', None)
    return q0(w) * (minus_one(w) if minus_one else p(w) - 1.0)


def device_field(q0, p, z):
    """u(z) = Re[Q0 (P - 1)](1/z)"""
    return np.real(_device_term(q0, p, kelvin_map(z)))


def illusion_field(q0, q1, p, z):
    """u(z) = Re[Q1 P + Q0 (P - 1)](1/z)"""
    w = kelvin_map(z)
    return np.real(q1(w) * p(w) + _device_term(q0, p, w))


def reflection_factor(epsilon):
    if abs(1.0 + epsilon) < 1e-12:
        raise ResonanceError('dielectric resonance at epsilon = -1')
    return (1.0 - epsilon) / (1.0 + epsilon)


class DielectricDisk(object):

    def __init__(self, center, radius, epsilon):
        if not radius > 0:
            raise DomainError('disk radius must be positive')
        self.center = complex(center)
        self.radius = float(radius)
        self.epsilon = float(epsilon)
        self.reflection = reflection_factor(self.epsilon)

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def __repr__(self):
        return 'DielectricDisk(center=%r, radius=%r, epsilon=%r)' % \
            (self.center, self.radius, self.epsilon)


def disk_scatter(disk, ambient, z):
    """scattered potential (total minus ambient) of a dielectric disk

    the ambient field is Re sum_k A_k (z - c)^k with A = `ambient`;
    outside it is Re sum_k lambda r^2k conj(A_k) (z - c)^-k, inside
    Re sum_k lambda A_k (z - c)^k
    """
    a = np.asarray(ambient, dtype=complex)
    z = np.asarray(z, dtype=complex)
    lam = disk.reflection
    zeta = z - disk.center
    inside = np.abs(zeta) < disk.radius
    k = np.arange(len(a))
    out_coeffs = lam * disk.radius ** (2 * k) * np.conj(a)
    out_coeffs[0] = 0
    in_coeffs = lam * a
    in_coeffs[0] = 0
    pv = np.polynomial.polynomial.polyval
    with np.errstate(divide='ignore', invalid='ignore'):
        outer = pv(1.0 / zeta, out_coeffs)
    inner = pv(zeta, in_coeffs)
    return np.real(np.where(inside, inner, outer))


def disk_interior_field(disk, ambient, z):
    a = np.asarray(ambient, dtype=complex)
    b = 2.0 * a / (1.0 + disk.epsilon)
    b[0] = a[0]
    zeta = np.asarray(z, dtype=complex) - disk.center
    return np.real(np.polynomial.polynomial.polyval(zeta, b))


def total_field(z, probe, q0=None, p=None, disk=None, degree=60):
    """probe + device (when q0 and p are given) + disk response

    the disk sees the probe plus the device field as its ambient field;
    the devices are ideal sources and are not re-excited by the disk
    """
    z = np.asarray(z, dtype=complex)

    def device(x):
        return _device_term(q0, p, kelvin_map(x))

    def ambient(x):
        v = probe(x)
        if q0 is not None:
            v = v + device(x)
        return v

    with np.errstate(divide='ignore', invalid='ignore'):
        safe = np.where(z == 0, np.nan, z)
        u = np.real(ambient(safe))
    if disk is not None:
        # expand on a circle just outside the disk, short of the origin
        rho = min(1.25 * disk.radius, 0.5 * (disk.radius + abs(disk.center)))
        # the device cancels the probe near a cloaked disk
        scale = sup_on_circle(probe, disk.center, rho)
        if q0 is not None:
            scale += sup_on_circle(device, disk.center, rho)
        coeffs = taylor_coefficients(ambient, disk.center, rho, degree,
                                     scale=scale)
        u = u + disk_scatter(disk, coeffs, z)
    return u


def sample_grid(xlim, ylim, resolution):
    """row-major complex grid, first row at the top (largest y)"""
    nx, ny = (resolution, resolution) if np.ndim(resolution) == 0 \
        else resolution
    if nx < 2 or ny < 2:
        raise DomainError('grid resolution must be at least 2')
    x = np.linspace(xlim[0], xlim[1], nx)
    y = np.linspace(ylim[1], ylim[0], ny)
    xx, yy = np.meshgrid(x, y)
    return xx + 1j * yy


def test_kelvin():
    rng = np.random.RandomState(1)
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    assert kelvin_map(1.0) == 1.0
    assert np.allclose(kelvin_map(kelvin_map(z)), z, rtol=1e-15)
    circle = 3.0 * np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    assert np.allclose(np.abs(kelvin_map(circle)), 1.0 / 3.0, rtol=1e-15)
    try:
        kelvin_map(0)
        assert False
    except SingularityError:
        pass


def test_kelvin_geometry():
    g = CloakGeometry2D(a=1.0, p=2.0, R=10.0, delta=0.5)
    assert abs(g.alpha - 1.0 / 3) < 1e-15
    assert abs(g.beta - 2.0 / 3) < 1e-15
    far = CloakGeometry2D(a=1.0, p=1e6, R=1e7, delta=0.5)
    assert far.alpha < 1e-11 and far.beta < 1e-5
    try:
        CloakGeometry2D(a=1.0, p=1.0, R=10.0, delta=0.5)
        assert False
    except GeometryError:
        pass
    g = CloakGeometry2D.from_beta(1.0, 1.1, 20.0, 0.5)
    assert abs(g.beta - 1.0) < 1e-14


def test_cloak_polynomial_small_cases():
    p = cloak_polynomial(1, 1, 2.0)
    assert np.allclose(p.coeffs, [1.0, -0.5])
    # (1 - z)^3 (1 + 3z) = 1 - 6z^2 + 8z^3 - 3z^4
    p = cloak_polynomial(2, 3, 1.0)
    assert p.exact == [1, 0, -6, 8, -3]
    assert p.degree == 4
    z = np.array([0.3 + 0.1j, -0.7, 1.9j])
    assert np.allclose(p(z), (1 - z) ** 3 * (1 + 3 * z))
    assert np.allclose(p.minus_one(z), (1 - z) ** 3 * (1 + 3 * z) - 1)


def test_cloak_polynomial_identities():
    for n in range(1, 40):
        for s in range(1, 41 - n):
            p = cloak_polynomial(n, s, 1.0)
            assert p.exact[0] == 1 and p.coeffs[0] == 1.0
            assert p.degree == n + s - 1
            assert all(c == 0 for c in p.exact[1:n])
            scale = np.abs(p.coeffs).max()
            q = p
            for _ in range(s):
                q, rem = synthetic_division(q, 1.0)
                assert abs(rem) < 1e-10 * scale


def test_hermite_oracle():
    for n in range(1, 40):
        for s in range(1, 41 - n):
            c = cloak_polynomial(n, s, 1.0).coeffs
            h = cloak_polynomial_hermite_oracle(n, s, 1.0).coeffs
            assert len(c) == len(h)
            assert np.all(np.abs(c - h) <= 1e-8 * np.abs(c))
    c = cloak_polynomial(3, 3, 0.7).coeffs
    h = cloak_polynomial_hermite_oracle(3, 3, 0.7).coeffs
    assert np.allclose(c, h, rtol=1e-12)
    h = cloak_polynomial_hermite_oracle(1, 1, 2.0)
    assert np.allclose(h.coeffs, [1.0, -0.5])


def test_cloak_polynomial_level_set():
    p = cloak_polynomial(15, 15, 1.0)
    assert sup_on_circle(p, 1.0, 0.1) < 1e-2
    assert sup_on_circle(p.minus_one, 0.0, 0.1) < 1e-2


def test_convergence_empirics():
    prev = [np.inf, np.inf, np.inf]
    for n in range(10, 61):
        p = cloak_polynomial(n, n, 1.0)
        cur = [sup_on_circle(p.minus_one, 0.0, 0.15),
               sup_on_circle(p, 0.65, 0.1),
               sup_on_circle(p, 0.85, 0.1)]
        assert all(c < q for c, q in zip(cur, prev))
        prev = cur
    assert prev[0] < 1e-3
    assert prev[2] < 1e-3


def test_region_membership():
    assert in_convergence_region(0.2, 1.0, 1.0) == (True, ORIGIN_SIDE)
    assert in_convergence_region(0.9, 1.0, 1.0) == (True, C_STAR_SIDE)
    assert in_convergence_region(5.0 + 5.0j, 1.0, 1.0) == (False, OUTSIDE)
    assert not in_convergence_region(0.5, 1.0, 1.0)[0]
    assert abs(region_excess(0.5, 1.0, 1.0)) < 1e-15
    # n = 5, s = 25: the origin side is the small lobe
    iv = convergence_region_intervals(1.0, 5.0)
    assert abs(iv['saddle'] - 1.0 / 6) < 1e-15
    assert iv[ORIGIN_SIDE][0] < 0 < iv[ORIGIN_SIDE][1] < 1.0 / 6 + 1e-15
    assert iv[C_STAR_SIDE][1] > 1.0


def test_region_boundary():
    lobes = convergence_region_boundary(1.0, 1.0, count=64)
    for points in lobes.values():
        assert np.abs(region_excess(points, 1.0, 1.0)).max() < 1e-8
    iv = convergence_region_intervals(1.0, 1.0)
    assert abs(iv[C_STAR_SIDE][1] - (1 + math.sqrt(2)) / 2) < 1e-12
    assert abs(iv[ORIGIN_SIDE][0] - (1 - math.sqrt(2)) / 2) < 1e-12


def test_probe_approximant():
    q = probe_approximant(lambda w: w, 1.0, 0.3, 8)
    assert np.allclose(q.recenter(0.0).coeffs, [0.0, 1.0])
    q = probe_approximant(lambda w: 2.5 + 0 * w, 1.0, 0.3, 8)
    assert q.degree == 0 and abs(q.coeffs[0] - 2.5) < 1e-14
    r5 = probe_approximant(lambda w: 1.0 / w, 1.0, 0.3, 5).residual
    r10 = probe_approximant(lambda w: 1.0 / w, 1.0, 0.3, 10).residual
    assert r10 < 3 * 0.3 ** 5 * r5
    try:
        probe_approximant(lambda w: np.conj(w), 1.0, 0.3, 5)
        assert False
    except ConvergenceError:
        pass


def test_taylor_coefficients_under_cancellation():
    # exp cancels exactly, leaving 1e-7 z^2 under rounding noise of size e
    def f(z):
        return (np.exp(z) + 1e-7 * z * z) - np.exp(z)

    c = taylor_coefficients(f, 0.0, 0.5, 4, scale=math.e)
    assert abs(c[2] - 1e-7) < 1e-12
    assert np.abs(c[[0, 1, 3, 4]]).max() < 1e-12
    # without a scale the spectrum stalls at the rounding floor
    c = taylor_coefficients(f, 0.0, 0.5, 4)
    assert abs(c[2] - 1e-7) < 1e-12
    try:
        taylor_coefficients(lambda z: 1.0 / z, 0.0, 0.5, 4)
        assert False
    except ConvergenceError:
        pass


def test_line_source_probe():
    z0 = 25.0
    f = line_source_probe(z0)
    z = np.array([1.0 + 0.2j, -3.0, 40.0j])
    assert np.allclose(np.real(f(z)), np.log(np.abs(z - z0)))
    q = probe_approximant(kelvin_image(f), 1.0, 0.3, 30)
    assert q.residual < 1e-10


def test_device_field():
    q0 = probe_approximant(lambda w: 1.0 / w, 1.0, 0.3, 30)
    one = ComplexPolynomial([1.0])
    z = np.array([2.0, 1.1 + 0.1j, 20j])
    assert np.all(device_field(q0, one, z) == 0)
    p = cloak_polynomial(25, 25, 1.0)
    near = 1.1 + 0.1 * np.exp(1j * np.linspace(0, 2 * np.pi, 32))
    assert np.abs(device_field(q0, p, near) + near.real).max() < 1e-3
    far = 20.0 * np.exp(1j * np.linspace(0, 2 * np.pi, 32))
    assert np.abs(device_field(q0, p, far)).max() < 1e-6
    # factored evaluation agrees with the expanded product at low degree
    small_q0 = probe_approximant(lambda w: 1.0 / w, 1.0, 0.3, 8)
    small_p = cloak_polynomial(5, 5, 1.0)
    product = small_p * small_q0 - small_q0
    w = kelvin_map(near)
    assert np.allclose(product(w).real, device_field(small_q0, small_p, near),
                       atol=1e-8)


def test_disk_scatter():
    assert abs(reflection_factor(-0.99) - 199.0) < 1e-9
    try:
        reflection_factor(-1.0)
        assert False
    except ResonanceError:
        pass
    rng = np.random.RandomState(2)
    a = rng.normal(size=11) + 1j * rng.normal(size=11)
    z = 0.3 + 0.4 * np.exp(1j * np.linspace(0, 2 * np.pi, 7))
    assert np.all(disk_scatter(DielectricDisk(0.3, 0.2, 1.0), a, z) == 0)
    disk = DielectricDisk(0.3 - 0.2j, 0.5, -0.99)
    theta = 2 * np.pi * np.arange(64) / 64
    e = np.exp(1j * theta)
    zb = disk.center + disk.radius * e
    pv = np.polynomial.polynomial.polyval
    k = np.arange(len(a))
    c = disk.reflection * disk.radius ** (2 * k) * np.conj(a)
    c[0] = 0
    outside = np.real(pv(zb - disk.center, a) +
                      pv(1.0 / (zb - disk.center), c))
    inside = disk_interior_field(disk, a, zb)
    scale = np.abs(outside).max()
    assert np.abs(outside - inside).max() < 1e-8 * scale
    # radial flux: d/dr Re F = Re(F'(zeta) e^(i theta))
    ka = k * a
    d_out = pv(zb - disk.center, ka[1:]) + \
        pv(1.0 / (zb - disk.center), np.concatenate([[0, 0], -k[1:] * c[1:]]))
    b = 2 * a / (1 + disk.epsilon)
    d_in = pv(zb - disk.center, (k * b)[1:])
    flux_out = np.real(d_out * e)
    flux_in = disk.epsilon * np.real(d_in * e)
    assert np.abs(flux_out - flux_in).max() < 1e-8 * np.abs(flux_out).max()
    # the scattered field is continuous across the boundary
    r_in = disk.center + (disk.radius - 1e-12) * e
    r_out = disk.center + (disk.radius + 1e-12) * e
    assert np.abs(disk_scatter(disk, a, r_in) -
                  disk_scatter(disk, a, r_out)).max() < 1e-6 * scale


def test_disk_cloaked_by_devices():
    g = CloakGeometry2D.from_beta(1.0, 1.1, 20.0, 0.5)
    q0 = probe_approximant(lambda w: 1.0 / w, g.beta, g.alpha, 30)
    p = cloak_polynomial(15, 15, g.beta)
    disk = DielectricDisk(1.1, 0.2, -0.99)
    far = 20.0 * np.exp(1j * 2 * np.pi * np.arange(64) / 64)

    def probe(z):
        return np.asarray(z, dtype=complex)

    u0 = far.real
    active = total_field(far, probe, q0, p, disk)
    assert np.abs(active - u0).max() < 0.03 * np.abs(u0).max()
    bare = total_field(far, probe, disk=disk)
    assert np.abs(bare - u0).max() > np.abs(active - u0).max()
    # no contrast: the devices alone reproduce the scatterer-free field
    same = total_field(far, probe, q0, p, DielectricDisk(1.1, 0.2, 1.0))
    assert np.allclose(same, total_field(far, probe, q0, p))


def test_illusion():
    g = CloakGeometry2D.from_beta(1.0, 1.1, 20.0, 0.5)
    q0 = probe_approximant(lambda w: 1.0 / w, g.beta, g.alpha, 30)
    p = cloak_polynomial(40, 40, g.beta)
    zero = ComplexPolynomial([0.0])
    z = np.array([3.0 + 1.0j, 1.1 + 0.05j])
    assert np.allclose(illusion_field(q0, zero, p, z),
                       device_field(q0, p, z))
    # observers see a small disk at -0.5 responding to the probe x
    image = DielectricDisk(-0.5, 0.1, -0.5)
    lam_r2 = image.reflection * image.radius ** 2

    def u1(z):
        return lam_r2 / (z - image.center)

    q1 = probe_approximant(kelvin_image(u1), 0.0, 1.0 / g.R, 40)
    far = 20.0 * np.exp(1j * 2 * np.pi * np.arange(64) / 64)
    expected = disk_scatter(image, [0.0, 1.0], far)
    got = illusion_field(q0, q1, p, far)
    assert np.abs(got - expected).max() < 1e-3 * np.abs(expected).max()
    cloak = 1.1 + 0.15 * np.exp(1j * 2 * np.pi * np.arange(64) / 64)
    total = cloak.real + illusion_field(q0, q1, p, cloak)
    assert np.abs(total).max() < 1e-3 * np.abs(cloak.real).max()


def test_sample_grid():
    z = sample_grid((-1, 1), (-2, 2), (3, 5))
    assert z.shape == (5, 3)
    assert z[0, 0] == -1 + 2j and z[-1, -1] == 1 - 2j


if __name__ == '__main__':
    test_kelvin()
    test_kelvin_geometry()
    test_cloak_polynomial_small_cases()
    test_cloak_polynomial_identities()
    test_hermite_oracle()
    test_cloak_polynomial_level_set()
    test_convergence_empirics()
    test_region_membership()
    test_region_boundary()
    test_probe_approximant()
    test_taylor_coefficients_under_cancellation()
    test_line_source_probe()
    test_device_field()
    test_disk_scatter()
    test_disk_cloaked_by_devices()
    test_illusion()
    test_sample_grid()

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
import json
import math
import getopt
import logging

from exocloak.common import ConfigError, NumericalError

VERBOSE_LEVEL = 5

verbose = 0

COMMANDS = ('poly-map', 'laplace-demo', 'helm-slices', 'helm-perf',
            'tetra-geom', 'elastic-verify')

# captioned parameter sets of the two demo maps: (p, disk radius, epsilon)
LAPLACE_PRESETS = {
    'a': (1.1, 0.2, -0.99),
    'b': (1.7, 0.9, -0.998),
}


def check_python():
    info = sys.version_info
    if info[0] < 3 or (info[0] == 3 and info[1] < 6):
        print('Python 3.6+ required')
        sys.exit(1)


def print_exception(e):
    global verbose
    logging.error(e)
    if verbose > 0:
        import traceback
        traceback.print_exc()


def __version():
    version_str = ''
    try:
        from importlib import metadata
        version_str = metadata.version('exocloak')
    except Exception:
        try:
            from exocloak import version
            version_str = version.version()
        except Exception:
            pass
    return version_str


def get_version():
    return __version()


def print_version():
    print('exocloak %s' % __version())


def log_version():
    logging.info('exocloak %s' % __version())


def _floats(value):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).split(',') if v.strip())


def _mass(value):
    if str(value).strip().lower() in ('pinned', 'inf'):
        return float('inf')
    return float(value)


# name -> (parser, default); None defaults are filled per command
FIELDS = {
    'out': (str, 'exocloak-out'),
    'seed': (int, 0),
    'budget': (float, 2e10),
    # contour level, default 1e-2 for the polynomial maps and 100 for
    # the extended device maps
    'level': (float, None),
    # laplace2d
    'n': (int, 15),
    's': (int, 15),
    'beta': (float, 1.0),
    'L': (float, None),
    'window': (_floats, None),
    'resolution': (int, None),
    'preset': (str, 'a'),
    'p': (float, None),
    'radius': (float, None),
    'eps': (float, None),
    'far_radius': (float, 20.0),
    'device_radius': (float, 0.5),
    'degree': (int, 30),
    # helmholtz3d
    'lambda': (float, 1.0),
    'delta': (float, None),
    'sigma': (float, None),
    'order': (int, None),
    'refine': (int, 1),
    'incident_dir': (_floats, (1.0, 1.0, 1.0)),
    'slice_z': (_floats, None),
    'amplitude': (float, 1.0),
    'scatterer': (float, 0.0),
    'sweep': (_floats, (2.0, 4.0, 6.0)),
    # elastica
    'k': (float, 1.0),
    'mass': (_mass, 1.0),
    'frequencies': (int, 10),
    'network': (str, None),
}

LONGOPTS = ['help', 'version', 'config=', 'out='] + \
    ['%s=' % name.replace('_', '-') for name in sorted(FIELDS)
     if name != 'out']


def find_config():
    config_path = 'exocloak.json'
    return config_path if os.path.exists(config_path) else None


def read_config_file(path):
    """JSON with // comments for *.json, key = value lines otherwise"""
    with open(path, 'rb') as f:
        text = f.read().decode('utf8')
    if path.endswith('.json'):
        try:
            config = json.loads(remove_comment(text))
        except ValueError as e:
            raise ConfigError('config', 'found an error in %s: %s'
                              % (path, e))
        if not isinstance(config, dict):
            raise ConfigError('config', '%s must hold an object' % path)
        return dict((str(k).replace('-', '_'), v) for k, v in config.items())
    return parse_key_values(text)


def parse_key_values(text):
    config = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError('config', 'line %d: expected key = value'
                              % number)
        key, value = line.split('=', 1)
        config[key.strip().replace('-', '_')] = value.strip()
    return config


def _coerce(config):
    out = {}
    for key, value in config.items():
        if key in ('command', 'verbose'):
            out[key] = value
            continue
        if key not in FIELDS:
            raise ConfigError(key, 'unknown field')
        parser = FIELDS[key][0]
        if value is None:
            out[key] = None
            continue
        try:
            out[key] = parser(value)
        except (TypeError, ValueError):
            raise ConfigError(key, 'cannot read %r' % (value,))
    return out


def _fill_defaults(config):
    command = config['command']
    for key, (_, default) in FIELDS.items():
        if config.get(key) is None:
            config[key] = default
    if config['L'] is None:
        config['L'] = config['s'] / config['n'] if config['n'] else None
    if command == 'laplace-demo':
        p, radius, eps = LAPLACE_PRESETS.get(config['preset'],
                                             LAPLACE_PRESETS['a'])
        for key, value in (('p', p), ('radius', radius), ('eps', eps)):
            if config[key] is None:
                config[key] = value
        if config['window'] is None:
            config['window'] = (-1.0, 3.0, -2.0, 2.0)
        if config['resolution'] is None:
            config['resolution'] = 161
    else:
        if config['window'] is None:
            config['window'] = (-0.5, 1.5, -1.0, 1.0)
        if config['resolution'] is None:
            config['resolution'] = 201 if command == 'poly-map' else 81
    if config['delta'] is None:
        config['delta'] = 6.0 * config['lambda']
    if config['sigma'] is None:
        config['sigma'] = config['delta'] / 3.0
    if config['level'] is None:
        config['level'] = 1e-2 if command in ('poly-map', 'laplace-demo') \
            else 100.0
    if config['slice_z'] is None:
        config['slice_z'] = tuple(k * config['sigma']
                                  for k in (-2, -1, 0, 1, 2))
    return config


def _require(config, key, test, message):
    if not test(config[key]):
        raise ConfigError(key, message + ' (got %r)' % (config[key],))


def check_config(config):
    """coerce and validate against the preconditions of the receiving
    module; raises ConfigError naming the first bad field"""
    from exocloak import laplace2d, specfun

    command = config.get('command')
    if command not in COMMANDS:
        raise ConfigError('command', 'expected one of %s'
                          % ', '.join(COMMANDS))
    config = _fill_defaults(_coerce(config))
    _require(config, 'out', bool, 'output directory required')
    _require(config, 'budget', lambda v: v > 0, 'must be positive')
    _require(config, 'resolution', lambda v: v >= 2, 'must be >= 2')

    if command in ('poly-map', 'laplace-demo'):
        _require(config, 'n', lambda v: v >= 1, 'must be >= 1')
        _require(config, 's', lambda v: v >= 1, 'must be >= 1')
        _require(config, 's', lambda v: v + config['n'] <=
                 laplace2d.MAX_POLY_DEGREE, 'n + s exceeds %d'
                 % laplace2d.MAX_POLY_DEGREE)
        _require(config, 'beta', lambda v: v > 0, 'must be positive')
        _require(config, 'L', lambda v: v > 0, 'must be positive')
        _require(config, 'level', lambda v: v > 0, 'must be positive')
        _require(config, 'window', lambda w: len(w) == 4 and
                 w[0] < w[1] and w[2] < w[3],
                 'expected xmin,xmax,ymin,ymax with min < max')
    if command == 'laplace-demo':
        _require(config, 'preset', lambda v: v in LAPLACE_PRESETS,
                 'expected one of %s' % ', '.join(sorted(LAPLACE_PRESETS)))
        _require(config, 'radius', lambda v: v > 0, 'must be positive')
        _require(config, 'eps', lambda v: abs(1.0 + v) > 1e-12,
                 'epsilon = -1 is the dielectric resonance')
        _require(config, 'degree', lambda v: v >= 1, 'must be >= 1')
        try:
            laplace2d.CloakGeometry2D.from_beta(
                config['beta'], config['p'], config['far_radius'],
                config['device_radius'])
        except NumericalError as e:
            raise ConfigError('p', str(e))
    if command in ('helm-slices', 'helm-perf', 'tetra-geom'):
        _require(config, 'lambda', lambda v: v > 0, 'must be positive')
        _require(config, 'sigma', lambda v: v > 0, 'must be positive')
        _require(config, 'delta', lambda v: v > config['sigma'],
                 'delta > sigma violated')
        _require(config, 'refine', lambda v: v >= 1, 'must be >= 1')
        _require(config, 'order', lambda v: v is None or
                 0 <= v <= specfun.MAX_DEGREE,
                 'must lie in 0..%d' % specfun.MAX_DEGREE)
        _require(config, 'incident_dir', lambda v: len(v) == 3 and
                 math.sqrt(sum(c * c for c in v)) > 0,
                 'expected a nonzero x,y,z triple')
        _require(config, 'amplitude', lambda v: v >= 0,
                 'must be non-negative')
        _require(config, 'scatterer', lambda v: v >= 0,
                 'must be non-negative')
        _require(config, 'sweep', lambda v: len(v) > 0 and min(v) > 0,
                 'expected positive delta / lambda ratios')
        _require(config, 'level', lambda v: v > 0, 'must be positive')
        _require(config, 'slice_z', lambda v: len(v) > 0,
                 'expected one or more slice heights')
    if command == 'elastic-verify':
        _require(config, 'k', lambda v: v > 0, 'must be positive')
        _require(config, 'mass', lambda v: v > 0, 'must be positive')
        _require(config, 'frequencies', lambda v: v >= 1, 'must be >= 1')
        _require(config, 'network', lambda v: v is None or
                 os.path.exists(v), 'file not found')
    return config


def setup_logging(level_count):
    global verbose
    logging.getLogger('').handlers = []
    logging.addLevelName(VERBOSE_LEVEL, 'VERBOSE')
    if level_count >= 2:
        level = VERBOSE_LEVEL
    elif level_count == 1:
        level = logging.DEBUG
    elif level_count == -1:
        level = logging.WARN
    elif level_count <= -2:
        level = logging.ERROR
    else:
        level = logging.INFO
    verbose = level_count
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)-8s '
                               '%(filename)s:%(lineno)s %(message)s',
                        datefmt='%Y-%m-%d %H:%M:%S')


def get_config(argv=None):
    """command line and optional config file -> validated config dict

    flags override the file, defaults fill the rest; bad flags exit with
    status 2, bad values raise ConfigError
    """
    if argv is None:
        argv = sys.argv[1:]
    config = {}
    config_path = None
    logging.basicConfig(level=logging.INFO,
                        format='%(levelname)-s: %(message)s')
    shortopts = 'hc:o:vq'
    try:
        optlist, args = getopt.gnu_getopt(argv, shortopts, LONGOPTS)
        for key, value in optlist:
            if key in ('-c', '--config'):
                config_path = value
            elif key in ('-h', '--help'):
                print_help()
                sys.exit(0)
            elif key == '--version':
                print_version()
                sys.exit(0)

        if config_path is None:
            config_path = find_config()

        if config_path:
            logging.debug('loading config from %s' % config_path)
            config = read_config_file(config_path)

        v_count = 0
        for key, value in optlist:
            if key in ('-o', '--out'):
                config['out'] = value
            elif key == '-v':
                v_count += 1
                # '-vv' turns on more verbose mode
                config['verbose'] = v_count
            elif key == '-q':
                v_count -= 1
                config['verbose'] = v_count
            elif key.startswith('--') and \
                    key[2:].replace('-', '_') in FIELDS:
                config[key[2:].replace('-', '_')] = value
    except getopt.GetoptError as e:
        print(e, file=sys.stderr)
        print_help()
        sys.exit(2)

    if not args:
        logging.error('command not specified')
        print_help()
        sys.exit(2)
    if len(args) > 1:
        logging.error('unexpected arguments: %s' % ' '.join(args[1:]))
        print_help()
        sys.exit(2)
    config['command'] = args[0]

    setup_logging(int(config.get('verbose', 0) or 0))
    config['verbose'] = verbose
    return check_config(config)


def print_help():
    print('''usage: exocloak COMMAND [OPTION]...
Active exterior cloaking: 2-D quasistatic polynomials, 3-D Helmholtz
multipolar devices and elastodynamic spring networks.

Commands:
  poly-map               cloaking polynomial maps and convergence region
  laplace-demo           2-D total field with a near-resonant disk
  helm-slices            constant z slices of the 3-D device field
  helm-perf              interior and exterior cloak metrics vs delta
  tetra-geom             tetrahedral cloak geometry report
  elastic-verify         torque spring and tensor transformation checks

Polynomial options:
  --n N --s S            polynomial orders, default: 15 15
  --beta BETA            Kelvin image center, default: 1
  --L L                  region exponent, default: s / n
  --window X0,X1,Y0,Y1   sampling window
  --resolution RES       samples per axis
  --level LEVEL          level set of the masks, default: 0.01
  --preset a|b           demo parameter set, default: a
  --p P --radius R --eps EPS   override the demo disk
  --degree D             probe approximant degree, default: 30

Helmholtz options:
  --lambda LAMBDA        wavelength, default: 1
  --delta DELTA          device distance, default: 6 wavelengths
  --sigma SIGMA          tetrahedron size, default: delta / 3
  --order N              multipole order, default: 1.5 k delta
  --refine F             face quadrature refinement, default: 1
  --incident-dir X,Y,Z   plane wave direction, default: 1,1,1
  --amplitude A          plane wave amplitude, default: 1
  --scatterer RADIUS     sound-soft ball at the origin, default: none
  --sweep R1,R2,...      delta / lambda ratios, default: 2,4,6
  --slice-z Z1,Z2,...    slice heights, default: -2,-1,0,1,2 sigma
  --level LEVEL          extended device level / amplitude, default: 100
  --budget WORK          abort above this kernel work estimate

Spring options:
  --k K --mass M         spring constant and mass (M = pinned allowed)
  --frequencies COUNT    frequency sweep size, default: 10
  --network FILE         also condense a network description file

General options:
  -h, --help             show this help message and exit
  -c CONFIG              path to config file (.json or key = value)
  -o, --out DIR          output directory, default: exocloak-out
  --seed SEED            seed for randomized probes, default: 0
  -v, -vv                verbose mode
  -q, -qq                quiet mode, only show warnings/errors
  --version              show version information
''')


class JSFormat:
    def __init__(self):
        self.state = 0

    def push(self, ch):
        if self.state == 0:
            if ch == '"':
                self.state = 1
                return ch
            elif ch == '/':
                self.state = 3
            else:
                return ch
        elif self.state == 1:
            if ch == '"':
                self.state = 0
                return ch
            elif ch == '\\':
                self.state = 2
            return ch
        elif self.state == 2:
            self.state = 1
            return ch
        elif self.state == 3:
            if ch == '/':
                self.state = 4
            else:
                self.state = 0
                return '/' + ch
        elif self.state == 4:
            if ch == '\n':
                self.state = 0
                return '\n'
        return ''


def remove_comment(json):
    fmt = JSFormat()
    return ''.join([fmt.push(c) for c in json])


def test_remove_comment():
    text = '{\n  // orders\n  "n": 5, // inline\n  "out": "a//b"\n}\n'
    assert json.loads(remove_comment(text)) == {'n': 5, 'out': 'a//b'}
    assert remove_comment('"a\\"b" // c') == '"a\\"b" '


def test_parse_key_values():
    config = parse_key_values('# comment\nn = 5\nfar-radius = 30 # far\n\n')
    assert config == {'n': '5', 'far_radius': '30'}
    try:
        parse_key_values('n 5')
        assert False
    except ConfigError as e:
        assert e.field == 'config'


def test_check_config():
    config = check_config({'command': 'poly-map', 'n': '5', 's': 25})
    assert config['n'] == 5 and config['L'] == 5.0
    assert config['window'] == (-0.5, 1.5, -1.0, 1.0)
    config = check_config({'command': 'tetra-geom', 'lambda': '2'})
    assert config['delta'] == 12.0 and config['sigma'] == 4.0
    assert config['slice_z'] == (-8.0, -4.0, 0.0, 4.0, 8.0)
    assert config['level'] == 100.0
    assert check_config({'command': 'poly-map'})['level'] == 1e-2
    config = check_config({'command': 'laplace-demo', 'preset': 'b'})
    assert (config['p'], config['radius'], config['eps']) == \
        LAPLACE_PRESETS['b']
    config = check_config({'command': 'elastic-verify', 'mass': 'pinned'})
    assert math.isinf(config['mass'])
    for bad, field in (({'command': 'poly-map', 'n': 0}, 'n'),
                       ({'command': 'poly-map', 'n': 'x'}, 'n'),
                       ({'command': 'poly-map', 'window': '1,0,0,1'},
                        'window'),
                       ({'command': 'laplace-demo', 'eps': -1}, 'eps'),
                       ({'command': 'laplace-demo', 'p': 0.5}, 'p'),
                       ({'command': 'helm-slices', 'sigma': 7.0}, 'delta'),
                       ({'command': 'helm-perf', 'bogus': 1}, 'bogus'),
                       ({'command': 'helm-slices', 'incident_dir': '0,0,0'},
                        'incident_dir'),
                       ({'command': 'fly'}, 'command')):
        try:
            check_config(bad)
            assert False
        except ConfigError as e:
            assert e.field == field


def test_get_config():
    config = get_config(['tetra-geom', '--delta=3', '-o', 'x', '-q'])
    assert config['command'] == 'tetra-geom'
    assert config['delta'] == 3.0 and config['sigma'] == 1.0
    assert config['out'] == 'x' and config['verbose'] == -1
    assert logging.getLogger('').level == logging.WARN
    config = get_config(['helm-slices', '--lambda=0.5', '--delta=1.5',
                         '--incident-dir=0,0,1', '--slice-z=0,0.25',
                         '--level=50', '--resolution=9', '-o', 'x', '-q'])
    assert config['lambda'] == 0.5 and config['sigma'] == 0.5
    assert config['incident_dir'] == (0.0, 0.0, 1.0)
    assert config['slice_z'] == (0.0, 0.25)
    assert config['level'] == 50.0 and config['resolution'] == 9
    setup_logging(0)


def test_json_config_with_comments():
    import shutil
    import tempfile
    tmp = tempfile.mkdtemp()
    path = os.path.join(tmp, 'run.json')
    with open(path, 'w') as f:
        f.write('{\n'
                '    // desk scale, key names as on the command line\n'
                '    "lambda": 2.0, // wavelength\n'
                '    "incident-dir": "0,1,0",\n'
                '    "out": "runs//tetra"\n'
                '}\n')
    try:
        config = get_config(['tetra-geom', '-c', path, '--delta=9', '-q'])
        assert config['lambda'] == 2.0 and config['delta'] == 9.0
        assert config['incident_dir'] == (0.0, 1.0, 0.0)
        assert config['out'] == 'runs//tetra'
        with open(path, 'w') as f:
            f.write('{"n": 5 // missing brace\n')
        try:
            get_config(['poly-map', '-c', path, '-q'])
            assert False
        except ConfigError as e:
            assert e.field == 'config'
    finally:
        shutil.rmtree(tmp)
        setup_logging(0)


if __name__ == '__main__':
    test_remove_comment()
    test_parse_key_values()
    test_check_config()
    test_get_config()
    test_json_config_with_comments()

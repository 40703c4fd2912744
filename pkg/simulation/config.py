""" Run configuration of the management commands

Every field is looked up in, by decreasing precedence: the command-line
flag, the --config key=value file, the GKA_SEED environment variable (seed
only) and finally settings.GKA_DEFAULTS.
"""

import os

from django.conf import settings

from agreement.field import FieldParams, InvalidModulus
from agreement.protocol import ABSCISSA_MODES, IDENTITY_ABSCISSA
from hgka.utils import key_value_file

SEED_ENV = 'GKA_SEED'
SEED_MAX = 2 ** 64 - 1

KEYS = ('n', 'prime', 'prime_bits', 'seed', 'abscissa_mode', 'out', 'scenario')


class ConfigError(ValueError):
    pass


def _to_int(key, value):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError('{} must be an integer, got {!r}'.format(key, value))


def parse_n_list(value):
    """ "2,4,8" or 4 or [2, 4] -> list of group sizes, each >= 1

    :rtype: list of int
    """
    if isinstance(value, str):
        items = [i.strip() for i in value.split(',') if i.strip()]
    elif isinstance(value, int):
        items = [value]
    else:
        items = list(value)

    if not items:
        raise ConfigError('No group size given')
    sizes = [_to_int('n', i) for i in items]
    for n in sizes:
        if n < 1:
            raise ConfigError('Group size must be at least 1, got {}'.format(n))
    return sizes


class RunConfig:
    """ Validated parameters of one command invocation
    """

    def __init__(self, n_values, params, seed, abscissa_mode=IDENTITY_ABSCISSA,
                 output_path=None, scenario=None):
        self.n_values = parse_n_list(n_values)
        if not 0 <= seed <= SEED_MAX:
            raise ConfigError('Seed must fit in 64 bits, got {}'.format(seed))
        if abscissa_mode not in ABSCISSA_MODES:
            raise ConfigError('Unknown abscissa mode : {}'.format(abscissa_mode))
        # users, the leader and one joiner all need a distinct nonzero id
        if max(self.n_values) + 2 >= params.p:
            raise ConfigError('p={} is too small for {} users'.format(
                params.p, max(self.n_values)))
        self.params = params
        self.seed = seed
        self.abscissa_mode = abscissa_mode
        self.output_path = output_path
        self.scenario = scenario

    @property
    def n(self):
        return self.n_values[0]

    def single_n(self):
        if len(self.n_values) != 1:
            raise ConfigError('Expected one group size, got {}'.format(
                self.n_values))
        return self.n

    @staticmethod
    def _layers(options, defaults, environ):
        yield dict(defaults)

        if environ.get(SEED_ENV):
            yield {'seed': environ[SEED_ENV]}

        path = options.get('config')
        if path:
            try:
                values = key_value_file(path)
            except (OSError, ValueError) as e:
                raise ConfigError('Cannot read {} : {}'.format(path, e))
            unknown = set(values) - set(KEYS)
            if unknown:
                raise ConfigError('Unknown keys in {} : {}'.format(
                    path, ', '.join(sorted(unknown))))
            if 'prime' in values and 'prime_bits' in values:
                raise ConfigError('{} sets both prime and prime_bits'.format(
                    path))
            yield values

        yield {k: options[k] for k in KEYS if options.get(k) is not None}

    @classmethod
    def from_options(cls, options, defaults=None, environ=None):
        """ Merge the configuration sources

        :param options: the parsed command options
        :param defaults: defaults to settings.GKA_DEFAULTS
        :param environ: defaults to os.environ
        :rtype: RunConfig
        :raises ConfigError: on any invalid value
        """
        if defaults is None:
            defaults = settings.GKA_DEFAULTS
        if environ is None:
            environ = os.environ

        merged = {}
        for layer in cls._layers(options, defaults, environ):
            # a layer choosing the field replaces any earlier choice
            if 'prime' in layer or 'prime_bits' in layer:
                merged.pop('prime', None)
                merged.pop('prime_bits', None)
            merged.update(layer)

        try:
            if 'prime_bits' in merged:
                params = FieldParams.from_bits(
                    _to_int('prime_bits', merged['prime_bits']))
            else:
                params = FieldParams(_to_int('prime', merged.get('prime')))
        except InvalidModulus as e:
            raise ConfigError(str(e))

        return cls(
            n_values=merged.get('n', 1),
            params=params,
            seed=_to_int('seed', merged.get('seed', 0)),
            abscissa_mode=merged.get('abscissa_mode', IDENTITY_ABSCISSA),
            output_path=merged.get('out'),
            scenario=merged.get('scenario'))

    def __repr__(self):
        return '<RunConfig n={} p={} seed={} {}>'.format(
            self.n_values, self.params.p, self.seed, self.abscissa_mode)

import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.utils.module_loading import import_string

from agreement.protocol import ABSCISSA_MODES
from simulation.config import ConfigError, RunConfig

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
FAILURE = 1


class LoggedCommandError(CommandError):
    def __init__(self, msg, *args, **kwargs):
        super().__init__(msg, *args, **kwargs)
        logger.error(self)


class SessionCommand(BaseCommand):
    """ Options shared by demo, attacks and bench
    """

    def add_arguments(self, parser):
        parser.add_argument(
            '--n', help='Group size (number of users, leader excluded)')
        field = parser.add_mutually_exclusive_group()
        field.add_argument(
            '--prime-bits', type=int,
            help='Use the largest prime below 2^PRIME_BITS')
        field.add_argument('--prime', type=int, help='An explicit prime')
        parser.add_argument(
            '--seed', type=int,
            help='64-bit seed, GKA_SEED is used if absent')
        parser.add_argument('--abscissa-mode', choices=ABSCISSA_MODES)
        parser.add_argument(
            '--config',
            help='A file of "key = value" lines, flags take precedence')

    def get_config(self, options, defaults=None):
        try:
            return RunConfig.from_options(options, defaults)
        except ConfigError as e:
            raise LoggedCommandError(
                'Invalid configuration : {}'.format(e), returncode=USAGE_ERROR)

    def get_single_n(self, config):
        try:
            return config.single_n()
        except ConfigError as e:
            raise LoggedCommandError(str(e), returncode=USAGE_ERROR)

    def get_suite_factory(self):
        try:
            return import_string(settings.GKA_CRYPTO_SUITE)
        except ImportError as e:
            raise LoggedCommandError(
                'Cannot load GKA_CRYPTO_SUITE : {}'.format(e),
                returncode=USAGE_ERROR)

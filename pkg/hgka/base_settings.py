"""
Django settings for the hgka project.

Only management commands are served; there is no web surface and no
database.

Override any key in hgka/local_settings.py, see README.md.
"""

import os

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Not used for anything cryptographic, Django just wants one.
SECRET_KEY = 'hgka-not-a-secret-only-for-django'

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'agreement',
    'simulation',
]

DATABASES = {}


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(levelname)s %(asctime)s %(message)s'
        },
    },
    'handlers': {
        'console': {
            'level': os.environ.get('LOGLEVEL', 'INFO'),
            'class': 'logging.StreamHandler',
            'formatter': 'verbose'
        },
    },
    'loggers': {
        'agreement': {
            'handlers': ['console'],
            'level': 'DEBUG',
        },
        'simulation': {
            'handlers': ['console'],
            'level': 'DEBUG',
        },
    },
}

GKA_DEFAULTS = {
    'n': 4,
    'prime': 2 ** 61 - 1,
    'seed': 1,
    'abscissa_mode': 'identity',
}

GKA_CRYPTO_SUITE = 'agreement.crypto.make_test_suite'

GKA_BENCH_N = [2, 4, 8, 16]

GKA_ATTACK_SCENARIOS = [
    {'name': 'replay', 'class': 'simulation.scenarios.ReplayScenario'},
    {'name': 'tamper', 'class': 'simulation.scenarios.TamperSweepScenario'},
    {'name': 'forged-contribution',
     'class': 'simulation.scenarios.ForgedContributionScenario'},
    {'name': 'forged-broadcast',
     'class': 'simulation.scenarios.ForgedBroadcastScenario'},
    {'name': 'omission', 'class': 'simulation.scenarios.OmissionScenario'},
    {'name': 'join', 'class': 'simulation.scenarios.MembershipScenario',
     'params': ['join']},
    {'name': 'leave', 'class': 'simulation.scenarios.MembershipScenario',
     'params': ['leave']},
    {'name': 'drop', 'class': 'simulation.scenarios.DropScenario'},
]

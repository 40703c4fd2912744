from django.test import SimpleTestCase

from hgka.utils import key_value_file
from simulation.config import ConfigError, RunConfig, parse_n_list

from .utils import get_test_file_path

DEFAULTS = {'n': 4, 'prime': 2 ** 61 - 1, 'seed': 1,
            'abscissa_mode': 'identity'}


def options(**kwargs):
    base = {'n': None, 'prime': None, 'prime_bits': None, 'seed': None,
            'abscissa_mode': None, 'config': None}
    base.update(kwargs)
    return base


class TestParseNList(SimpleTestCase):
    def test_forms(self):
        self.assertEqual(parse_n_list('2,4, 8,16'), [2, 4, 8, 16])
        self.assertEqual(parse_n_list(4), [4])
        self.assertEqual(parse_n_list([2, 4]), [2, 4])

    def test_invalid(self):
        for value in ('0', '', 'four', [], '2,-1'):
            with self.assertRaises(ConfigError, msg=repr(value)):
                parse_n_list(value)


class TestRunConfig(SimpleTestCase):
    def config(self, environ=None, **kwargs):
        return RunConfig.from_options(
            options(**kwargs), DEFAULTS, environ or {})

    def test_defaults(self):
        config = self.config()
        self.assertEqual(config.n, 4)
        self.assertEqual(config.params.p, 2 ** 61 - 1)
        self.assertEqual(config.seed, 1)
        self.assertEqual(config.abscissa_mode, 'identity')
        self.assertIsNone(config.output_path)

    def test_flags(self):
        config = self.config(n='8', prime_bits=8, seed=5)
        self.assertEqual(config.n_values, [8])
        self.assertEqual(config.params.p, 251)
        self.assertEqual(config.seed, 5)

    def test_seed_environment(self):
        self.assertEqual(self.config({'GKA_SEED': '42'}).seed, 42)
        self.assertEqual(self.config({'GKA_SEED': '42'}, seed=3).seed, 3)

    def test_file(self):
        config = self.config(
            {'GKA_SEED': '42'}, config=get_test_file_path('run.conf'))
        self.assertEqual(config.n, 3)
        self.assertEqual(config.params.p, 2 ** 31 - 1)
        self.assertEqual(config.seed, 99)
        self.assertEqual(config.abscissa_mode, 'hashed')

    def test_flag_beats_file(self):
        config = self.config(
            config=get_test_file_path('run.conf'), n='2', prime=97)
        self.assertEqual(config.n, 2)
        self.assertEqual(config.params.p, 97)

    def test_invalid(self):
        invalid = [
            {'n': '0'},
            {'prime': 91},
            {'seed': -1},
            {'seed': 2 ** 64},
            {'prime': 5, 'n': '4'},
            {'abscissa_mode': 'counter'},
            {'config': get_test_file_path('unknown_key.conf')},
            {'config': get_test_file_path('both_primes.conf')},
            {'config': get_test_file_path('no_equal_sign.conf')},
            {'config': get_test_file_path('missing.conf')},
        ]
        for kwargs in invalid:
            with self.assertRaises(ConfigError, msg=repr(kwargs)):
                self.config(**kwargs)

    def test_single_n(self):
        self.assertEqual(self.config(n='3').single_n(), 3)
        with self.assertRaises(ConfigError):
            self.config(n='2,3').single_n()


class TestSettingsFiles(SimpleTestCase):
    def test_key_value_file(self):
        self.assertEqual(key_value_file(get_test_file_path('run.conf')), {
            'n': '3', 'prime_bits': '31', 'seed': '99',
            'abscissa_mode': 'hashed'})

    def test_line_endings(self):
        self.assertEqual(
            key_value_file(get_test_file_path('crlf.conf')),
            {'seed': '5', 'n': '2'})

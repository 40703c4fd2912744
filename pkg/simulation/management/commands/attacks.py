import logging

from django.conf import settings

from simulation.scenarios import load_scenarios, select_scenarios

from ._common import (
    FAILURE, USAGE_ERROR, LoggedCommandError, SessionCommand)

logger = logging.getLogger(__name__)


class Command(SessionCommand):
    help = 'Run the bundled adversary scenarios, as defined in settings'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--scenario',
            help='Run only that scenario, or that family ("forged")')

    def handle(self, *args, **options):
        config = self.get_config(options)
        self.get_single_n(config)
        suite_factory = self.get_suite_factory()

        try:
            scenarios = load_scenarios(settings.GKA_ATTACK_SCENARIOS)
        except ValueError as e:
            raise LoggedCommandError(
                'Invalid GKA_ATTACK_SCENARIOS : {}'.format(e),
                returncode=USAGE_ERROR)

        scenarios = select_scenarios(scenarios, config.scenario)
        if not scenarios:
            raise LoggedCommandError(
                'No scenario named "{}"'.format(config.scenario),
                returncode=USAGE_ERROR)

        failed = []
        for scenario in scenarios:
            logger.info('Running scenario {}…'.format(scenario.name))
            result = scenario.run(config, suite_factory)
            self.stdout.write('{:<20} {}  {}'.format(
                result.name, 'PASS' if result.passed else 'FAIL',
                result.detail))
            if not result.passed:
                failed.append(result.name)

        if failed:
            raise LoggedCommandError(
                'Attacks not detected : {}'.format(', '.join(failed)),
                returncode=FAILURE)
        self.stdout.write('{} scenarios passed'.format(len(scenarios)))

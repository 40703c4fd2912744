import logging

from django.conf import settings

from simulation.exporters import CostReportCSVExporter, SummaryTableExporter
from simulation.harness import HarnessError, measure_costs

from ._common import FAILURE, LoggedCommandError, SessionCommand

logger = logging.getLogger(__name__)


class Command(SessionCommand):
    help = ('Measure octets and operations of honest sessions, outputs CSV '
            'on stdout unless --out is given')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--out', help='Path of the CSV file to write')

    def handle(self, *args, **options):
        defaults = dict(settings.GKA_DEFAULTS, n=settings.GKA_BENCH_N)
        config = self.get_config(options, defaults)
        suite_factory = self.get_suite_factory()

        logger.info('[1] Measuring n = {}…'.format(config.n_values))
        try:
            reports = measure_costs(
                config.n_values, config.params, config.seed,
                config.abscissa_mode, suite_factory)
        except HarnessError as e:
            raise LoggedCommandError(
                'Measure failed : {}'.format(e), returncode=FAILURE)

        for line in SummaryTableExporter().run(reports).splitlines():
            logger.info(line)

        output = CostReportCSVExporter().run(reports)
        if config.output_path:
            logger.info('[2] Exporting to "{}"'.format(config.output_path))
            try:
                with open(config.output_path, 'w') as output_fd:
                    output_fd.write(output)
            except OSError as e:
                raise LoggedCommandError(
                    'Cannot write {} : {}'.format(config.output_path, e),
                    returncode=FAILURE)
        else:
            self.stdout.write(output, ending='')
        logger.info('[2] OK')

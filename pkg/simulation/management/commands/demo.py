import logging

from agreement.field import FieldError
from agreement.protocol import ProtocolError
from simulation.harness import ACCEPTED, HarnessError, Simulation

from ._common import FAILURE, LoggedCommandError, SessionCommand

logger = logging.getLogger(__name__)


class Command(SessionCommand):
    help = 'Run one honest session and print a trace of each step'

    def handle(self, *args, **options):
        config = self.get_config(options)
        n = self.get_single_n(config)
        suite_factory = self.get_suite_factory()

        logger.info('[0] {!r}'.format(config))
        try:
            simulation = Simulation(
                n, config.params, config.seed, config.abscissa_mode,
                suite_factory)
            simulation.run_session()
        except (HarnessError, ProtocolError, FieldError) as e:
            raise LoggedCommandError(
                'Session failed : {}'.format(e), returncode=FAILURE)

        outcomes = simulation.outcomes()
        leader = simulation.leader
        transcript = simulation.transcript

        self.stdout.write('[1] {} contributions sent to leader U#{}'.format(
            len(transcript.unicasts()), simulation.leader_label))
        for party, contribution in sorted(leader.pending.items()):
            self.stdout.write('    {} contribution accepted ({})'.format(
                party, contribution.counter))
        for rejection in outcomes.rejections_for(simulation.leader_label):
            self.stdout.write('    contribution rejected : {}'.format(
                rejection))

        if leader.polynomial is not None:
            broadcast = transcript.broadcasts()[0]
            self.stdout.write(
                '[2] leader interpolated {} coefficients over a {}-bit '
                'prime, broadcast {} octets'.format(
                    len(leader.polynomial), config.params.bit_length,
                    broadcast.size))
        else:
            self.stdout.write('[2] leader could not compute : {}'.format(
                outcomes[simulation.leader_label].reason))

        self.stdout.write('[3] verification')
        for label in simulation.users:
            outcome = outcomes[label]
            if outcome.status == ACCEPTED:
                verdict = 'ACCEPTED'
            else:
                verdict = 'REJECTED ({})'.format(outcome.reason)
            self.stdout.write('    U#{} {}'.format(label, verdict))

        keys = set(o.key for o in outcomes.parties.values())
        if outcomes.rejected() or len(keys) != 1:
            raise LoggedCommandError(
                'Parties do not agree : {}'.format(outcomes.reasons()),
                returncode=FAILURE)

        self.stdout.write('key digest: {}'.format(keys.pop().digest()))
        self.stdout.write('all {} users accepted'.format(n))

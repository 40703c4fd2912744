""" Bundled adversary scenarios

Each scenario runs one or several scripted sessions and tells whether the
protocol rejected or detected the attack. Scenarios are declared in the
GKA_ATTACK_SCENARIOS setting::

    GKA_ATTACK_SCENARIOS = [
        {'name': 'replay', 'class': 'simulation.scenarios.ReplayScenario'},
        {'name': 'join', 'class': 'simulation.scenarios.MembershipScenario',
         'params': ['join']},
    ]
"""

import logging
from collections import namedtuple

from django.utils.module_loading import import_string

from .harness import (
    ACCEPTED, JOIN, LEAVE, NO_BROADCAST, CorruptLeaderOmit, Deliver, Drop,
    Duplicate, InjectForged, NextSession, ReplayBroadcast, TamperBit,
    run_honest_session, run_membership_scenario, run_script)

logger = logging.getLogger(__name__)

ScenarioResult = namedtuple('ScenarioResult', 'name passed detail')


class AbstractScenario:
    name = None

    def run(self, config, suite_factory):
        """
        :type config: simulation.config.RunConfig
        :param suite_factory: callable building a CryptoSuite from a seed
        :rtype: ScenarioResult
        """
        raise NotImplementedError

    def _script(self, config, suite_factory, actions):
        return run_script(
            actions, config.n, config.params, config.seed,
            config.abscissa_mode, suite_factory)

    def result(self, passed, detail):
        return ScenarioResult(self.name, passed, detail)


def honest_accepted(outcomes, labels):
    return all(outcomes[i].status == ACCEPTED for i in labels)


def nobody_accepted(outcomes):
    return all(outcomes[i].status != ACCEPTED for i in outcomes.parties)


class ReplayScenario(AbstractScenario):
    """ A contribution is replayed within its session, then in the next one
    """

    def run(self, config, suite_factory):
        details = []
        passed = True
        for label, actions in [
                ('same session', [Duplicate()]),
                ('next session', [NextSession(), Duplicate(party=1)])]:
            outcomes, _ = self._script(config, suite_factory, actions)
            leader = config.n + 1
            detected = 'ReplayDetected' in outcomes.rejections_for(leader)
            agreed = (outcomes.keys_agree()
                      and honest_accepted(outcomes, range(1, config.n + 2)))
            passed = passed and detected and agreed
            details.append('{}: replay {}'.format(
                label, 'rejected' if detected else 'ACCEPTED'))
        return self.result(passed, ', '.join(details))


class TamperSweepScenario(AbstractScenario):
    """ Every single-bit flip of the honest broadcast, one session each
    """

    def run(self, config, suite_factory):
        n = config.n
        _, transcript = run_honest_session(
            n, config.params, config.seed, config.abscissa_mode, suite_factory)
        size = transcript.broadcasts()[0].size

        accepted = []
        for position in range(size * 8):
            actions = [Deliver() for _ in range(n)] + [TamperBit(position)]
            outcomes, _ = self._script(config, suite_factory, actions)
            if any(outcomes[i].status == ACCEPTED for i in range(1, n + 1)):
                accepted.append(position)

        if accepted:
            logger.warning('Tampered broadcasts accepted at bits {}'.format(
                accepted))
        return self.result(not accepted, '{} positions, {} accepted'.format(
            size * 8, len(accepted)))


class ForgedContributionScenario(AbstractScenario):
    def run(self, config, suite_factory):
        outcomes, _ = self._script(config, suite_factory, [InjectForged()])
        leader = config.n + 1
        detected = 'SignatureInvalid' in outcomes.rejections_for(leader)
        return self.result(
            detected and nobody_accepted(outcomes),
            'leader rejections : {}'.format(outcomes.rejections_for(leader)))


class ForgedBroadcastScenario(AbstractScenario):
    def run(self, config, suite_factory):
        n = config.n
        actions = [Deliver() for _ in range(n)] + [InjectForged()]
        outcomes, _ = self._script(config, suite_factory, actions)
        reasons = {outcomes[i].reason for i in range(1, n + 1)}
        return self.result(
            reasons == {'SignatureInvalid'},
            'user verdicts : {}'.format(sorted(reasons, key=str)))


class OmissionScenario(AbstractScenario):
    """ The leader leaves out one user's contribution

    Only the victim is expected to notice.
    """

    def run(self, config, suite_factory):
        n = config.n
        victim = 2 if n >= 2 else 1
        outcomes, _ = self._script(
            config, suite_factory, [CorruptLeaderOmit(victim)])
        others = [i for i in range(1, n + 2) if i != victim]
        detected = outcomes[victim].reason == 'ContributionNotUsed'
        return self.result(
            detected and honest_accepted(outcomes, others)
            and outcomes.keys_agree(),
            'victim U#{} : {}'.format(victim, outcomes[victim].reason))


class MembershipScenario(AbstractScenario):
    """ The key must change on a join or a leave, and be shared again

    The broadcast of the first session is then replayed; no member may fall
    back to the key it carried.
    """

    def __init__(self, kind):
        if kind not in (JOIN, LEAVE):
            raise ValueError('Unknown membership change : {}'.format(kind))
        self.kind = kind

    def run(self, config, suite_factory):
        n = max(config.n, 2) if self.kind == LEAVE else config.n
        result, _ = run_membership_scenario(
            self.kind, n, config.params, config.seed, config.abscissa_mode,
            suite_factory, script=[ReplayBroadcast(0)])

        after = set(result.after.values())
        members = n + 1 if self.kind == JOIN else n - 1
        fresh = not after & set(result.before.values())
        shared = len(after) == 1 and len(result.after) == members + 1
        kept = all(result.final.get(i) == key for i, key in result.after.items()
                   if i in result.before)
        passed = fresh and shared and kept
        if self.kind == LEAVE:
            passed = passed and (
                result.outcomes[result.party].reason == 'ShareMissing')
        return self.result(passed, '{} of U#{}, {} holders of the new key'.format(
            self.kind, result.party, len(result.after)))


class DropScenario(AbstractScenario):
    def run(self, config, suite_factory):
        outcomes, _ = self._script(config, suite_factory, [Drop()])
        leader = config.n + 1
        users = [outcomes[i].reason for i in range(1, config.n + 1)]
        return self.result(
            outcomes[leader].reason == 'MissingContributions'
            and all(i == NO_BROADCAST for i in users),
            'leader : {}'.format(outcomes[leader].reason))


def load_scenarios(specs):
    """ Instantiate scenarios from GKA_ATTACK_SCENARIOS-like specs

    :param specs: a list of dicts with keys 'name', 'class' and optionally
                  'params'
    :rtype: list of AbstractScenario
    :raises ValueError: on a malformed spec or an unknown class
    """
    allowed_keys = {'name', 'class', 'params'}
    scenarios = []
    for spec in specs:
        unknown = set(spec) - allowed_keys
        if unknown:
            raise ValueError('Unknown scenario keys : {}'.format(
                sorted(unknown)))
        try:
            name, class_path = spec['name'], spec['class']
        except KeyError as e:
            raise ValueError('Scenario spec lacks {}'.format(e))
        try:
            scenario_class = import_string(class_path)
        except ImportError as e:
            raise ValueError('Cannot load scenario "{}" : {}'.format(name, e))

        scenario = scenario_class(*spec.get('params', []))
        scenario.name = name
        scenarios.append(scenario)
    return scenarios


def select_scenarios(scenarios, selection):
    """ Keep the scenarios of a family

    "forged" selects "forged-contribution" and "forged-broadcast".
    """
    if not selection:
        return list(scenarios)
    return [s for s in scenarios
            if s.name == selection or s.name.split('-')[0] == selection]


""" In-memory network for sessions between one leader and n users

Rounds are synchronous. Messages wait in a delivery queue; an adversary
script decides, action after action, what happens to the next one. Whatever
the script leaves queued is delivered when the script ends.

Parties are labelled by their identity value: users 1..n, the leader n+1,
spare users (joiners) n+2 onwards.
"""

import logging
import random
from collections import OrderedDict, deque, namedtuple

from agreement import codec
from agreement.crypto import make_test_suite
from agreement.field import FieldError
from agreement.metering import FIELD_MULTS, XOR_OCTETS
from agreement.models import ContributionMessage, PartyId, Roster
from agreement.protocol import (
    IDENTITY_ABSCISSA, REJECTIONS, AbscissaCollision, InvalidState,
    LeaderState, Phase, ProtocolError, UserState, rejection_reason)

logger = logging.getLogger(__name__)

BROADCAST = '*'

ACCEPTED = 'Accepted'
REJECTED = 'Rejected'

# Reported for a user whose session ended without any broadcast
NO_BROADCAST = 'NoBroadcast'

JOIN = 'join'
LEAVE = 'leave'
MEMBERSHIP_KINDS = (JOIN, LEAVE)


class HarnessError(Exception):
    pass


class ScriptInvalid(HarnessError):
    pass


class SessionFailed(HarnessError):
    pass


# receiver is a party label or BROADCAST
Event = namedtuple('Event', 'round sender receiver octets size')

Envelope = namedtuple('Envelope', 'round sender receiver octets')

Rejection = namedtuple('Rejection', 'round party sender reason')

Outcome = namedtuple('Outcome', 'status reason key')

KeyTestResult = namedtuple('KeyTestResult', 'party distinct')


class Transcript:
    """ What went over the wire, in delivery order, plus per-party meters
    """

    def __init__(self):
        self.events = []
        self.counters = OrderedDict()

    def record(self, round_index, sender, receiver, octets):
        octets = bytes(octets)
        event = Event(round_index, sender, receiver, octets, len(octets))
        self.events.append(event)
        return event

    @property
    def rounds(self):
        return sorted({e.round for e in self.events})

    def unicasts(self):
        return [e for e in self.events if e.receiver != BROADCAST]

    def broadcasts(self):
        return [e for e in self.events if e.receiver == BROADCAST]

    def sent_by(self, party):
        return [e for e in self.events if e.sender == party]

    def octets_sent_by(self, party):
        return sum(e.size for e in self.sent_by(party))

    def counts(self):
        return {party: meter.snapshot()
                for party, meter in self.counters.items()}

    def __eq__(self, other):
        return (isinstance(other, Transcript)
                and other.events == self.events
                and other.counts() == self.counts())

    def __len__(self):
        return len(self.events)


class Outcomes:
    """ Final state of every party of a simulation
    """

    def __init__(self, parties, rejections, session_keys, revealed, tests):
        self.parties = parties
        self.rejections = rejections
        self.session_keys = session_keys
        self.revealed = revealed
        self.tests = tests

    def __getitem__(self, party):
        return self.parties[party]

    def accepted(self):
        return [i for i, o in self.parties.items() if o.status == ACCEPTED]

    def rejected(self):
        return [i for i, o in self.parties.items() if o.status == REJECTED]

    def reasons(self):
        return {i: o.reason for i, o in self.parties.items()
                if o.status == REJECTED}

    def rejections_for(self, party):
        return [r.reason for r in self.rejections if r.party == party]

    def keys_agree(self):
        """ Within every session, accepted keys are all the same """
        return all(len(set(keys.values())) <= 1 for keys in self.session_keys)

    def __eq__(self, other):
        return isinstance(other, Outcomes) and vars(other) == vars(self)


class CorruptibleLeader(LeaderState):
    """ A leader that can be told to substitute the contribution of victims

    For each omitted user, the polynomial goes through a random ordinate
    other than x_i at that user's abscissa.
    """

    def __init__(self, *args, substitution_rng=None, **kwargs):
        super().__init__(*args, **kwargs)
        self.omitted = set()
        self.substitution_rng = substitution_rng or random.Random(0)

    def _point(self, contribution):
        abscissa, x = super()._point(contribution)
        if contribution.party in self.omitted:
            shift = 1 + self.substitution_rng.randrange(self.params.p - 1)
            logger.debug('Leader drops the contribution of {}'.format(
                contribution.party))
            return abscissa, x + shift
        return abscissa, x


class Simulation:
    """ One leader, n users and the queue between them

    Randomness comes from a single random.Random seeded with ``seed``, so a
    given sequence of calls always produces the same transcript.
    """

    STAGE_CONTRIBUTIONS = 'contributions'
    STAGE_BROADCAST = 'broadcast'
    STAGE_DONE = 'done'

    def __init__(self, n, params, seed, abscissa_mode=IDENTITY_ABSCISSA,
                 suite_factory=make_test_suite, spares=0):
        if n < 1:
            raise HarnessError('A group needs at least one user, got {}'.format(n))
        self.n = n
        self.params = params
        self.seed = seed
        self.abscissa_mode = abscissa_mode
        self.rng = random.Random(seed)
        self.test_rng = random.Random(self.rng.getrandbits(64))
        self.suite = suite_factory(seed)
        self.transcript = Transcript()

        user_ids = [PartyId(params, i) for i in range(1, n + 1)]
        self.leader_id = PartyId(params, n + 1)
        spare_ids = [PartyId(params, n + 2 + i) for i in range(spares)]

        enc_keys = self.suite.encryption.generate_keypair(self.rng)
        sig_keys = self.suite.signatures.generate_keypair(self.rng)

        self.users = OrderedDict()
        self.spares = OrderedDict()
        self.departed = OrderedDict()
        for party in user_ids + spare_ids:
            user = UserState(
                party, self.leader_id,
                self.suite.signatures.generate_keypair(self.rng),
                enc_keys.encryption_key, sig_keys.verify_key, self.suite,
                abscissa_mode=abscissa_mode)
            pool = self.users if party in user_ids else self.spares
            pool[party.value] = user

        self.leader = CorruptibleLeader(
            self.leader_id, Roster(user_ids), enc_keys, sig_keys,
            {u.me: u.keys.verify_key for u in self._all_users().values()},
            self.suite, abscissa_mode=abscissa_mode,
            substitution_rng=random.Random(self.rng.getrandbits(64)))

        self.transcript.counters[self.leader_label] = self.leader.meter
        for label, user in self._all_users().items():
            self.transcript.counters[label] = user.meter

        self.round = 0
        self.session = 0
        self.stage = self.STAGE_DONE
        self.queue = deque()
        self.history = []
        self.rejections = []
        self.leader_failure = None
        self.session_keys = []
        self.revealed = []
        self.tests = []

    @property
    def leader_label(self):
        return self.leader_id.value

    def _all_users(self):
        users = OrderedDict()
        for pool in (self.users, self.spares, self.departed):
            users.update(pool)
        return users

    def party(self, label):
        """
        :return: the UserState or LeaderState labelled ``label``
        :raises ScriptInvalid: for an unknown label
        """
        if label == self.leader_label:
            return self.leader
        try:
            return self._all_users()[label]
        except KeyError:
            raise ScriptInvalid('No party labelled {}'.format(label))

    # Sessions

    def start_session(self):
        """ Round 1: every roster member prepares and sends a contribution
        """
        if self.stage != self.STAGE_DONE:
            raise HarnessError('Session {} is still running'.format(
                self.session))
        self.session += 1
        if self.session > 1:
            self.leader.begin_session()
            for user in self._all_users().values():
                user.begin_session()
        self.leader_failure = None
        self.stage = self.STAGE_CONTRIBUTIONS
        self.round += 1
        logger.debug('Session {} starts'.format(self.session))

        share_len = (len(self.leader.roster) + 1) * self.params.w
        for label, user in self.users.items():
            message = user.prepare_contribution(self.rng)
            # offline, before any broadcast can arrive
            user.precompute_keystream(share_len)
            self.queue.append(Envelope(
                self.round, label, self.leader_label,
                codec.serialize_message(message)))

    def _advance(self):
        if self.stage == self.STAGE_CONTRIBUTIONS:
            self.stage = self.STAGE_BROADCAST
            self.round += 1
            try:
                broadcast = self.leader.compute_round(self.rng)
            except (ProtocolError, FieldError) as e:
                self._leader_failed(e)
                self.stage = self.STAGE_DONE
                return
            self.queue.append(Envelope(
                self.round, self.leader_label, BROADCAST,
                codec.serialize_message(broadcast)))
        elif self.stage == self.STAGE_BROADCAST:
            self.stage = self.STAGE_DONE

    def _leader_failed(self, error):
        self.leader_failure = rejection_reason(error)
        logger.warning('Leader cannot complete session {} : {}'.format(
            self.session, self.leader_failure))

    def next_envelope(self):
        """ Oldest queued message, computing the broadcast when its turn comes

        :raises ScriptInvalid: if nothing is left to act upon
        """
        if not self.queue:
            self._advance()
        if not self.queue:
            raise ScriptInvalid('No message in flight in session {}'.format(
                self.session))
        return self.queue.popleft()

    def finish_session(self):
        """ Deliver everything left, then close the session
        """
        while self.stage != self.STAGE_DONE or self.queue:
            if self.queue:
                self.deliver(self.queue.popleft())
            else:
                self._advance()
        self._store_session_keys()
        logger.debug('Session {} ends'.format(self.session))

    def run_session(self):
        self.start_session()
        self.finish_session()

    def _store_session_keys(self):
        keys = {label: user.session_key for label, user in self.users.items()
                if user.phase == Phase.ACCEPTED}
        if self.leader_failure is None and self.leader.session_key:
            keys[self.leader_label] = self.leader.session_key
        self.session_keys.append(keys)

    def current_keys(self):
        """ Accepted keys of the leader and of the current roster """
        keys = {}
        if self.leader.session_key and self.leader_failure is None:
            keys[self.leader_label] = self.leader.session_key
        for label, user in self.users.items():
            if user.phase == Phase.ACCEPTED:
                keys[label] = user.session_key
        return keys

    # Delivery

    def deliver(self, envelope):
        """ Hand a message over to its receiver(s), recording it
        """
        self.transcript.record(
            envelope.round, envelope.sender, envelope.receiver,
            envelope.octets)
        self.history.append(envelope)

        if envelope.receiver == BROADCAST:
            for label, user in self._broadcast_audience().items():
                try:
                    user.receive(envelope.octets)
                except InvalidState:
                    logger.debug('{} ignores the broadcast'.format(user.me))
                except REJECTIONS as e:
                    self._reject(envelope, label, e)
        else:
            try:
                self.leader.receive(envelope.octets)
            except AbscissaCollision as e:
                self._reject(envelope, self.leader_label, e)
                self._recontribute(envelope.sender)
            except REJECTIONS as e:
                self._reject(envelope, self.leader_label, e)

    def _broadcast_audience(self):
        audience = OrderedDict(self.users)
        audience.update(self.departed)
        return audience

    def _reject(self, envelope, party, error):
        self.rejections.append(Rejection(
            envelope.round, party, envelope.sender, rejection_reason(error)))

    def _recontribute(self, label):
        user = self.users.get(label)
        if user is None or user.phase != Phase.SENT:
            return
        message = user.resample_contribution(self.rng)
        user.precompute_keystream(
            (len(self.leader.roster) + 1) * self.params.w)
        self.queue.append(Envelope(
            self.round, label, self.leader_label,
            codec.serialize_message(message)))

    def broadcast(self, message):
        """ Queue-less delivery of a rekey broadcast """
        self.round += 1
        self.deliver(Envelope(
            self.round, self.leader_label, BROADCAST,
            codec.serialize_message(message)))

    def last_contribution_from(self, label):
        for envelope in reversed(self.history):
            if envelope.sender == label and envelope.receiver != BROADCAST:
                return envelope
        raise ScriptInvalid('No contribution from {} was ever delivered'.format(
            label))

    # Membership

    def join(self, label):
        """ A spare user contributes, the leader rekeys the grown group
        """
        try:
            user = self.spares[label]
        except KeyError:
            raise HarnessError('No spare user labelled {}'.format(label))
        message = user.prepare_contribution(self.rng)
        while True:
            self.round += 1
            octets = codec.serialize_message(message)
            self.transcript.record(self.round, label, self.leader_label, octets)
            try:
                rekey = self.leader.handle_join(
                    codec.parse_message(octets, self.params), self.rng)
                break
            except AbscissaCollision:
                message = user.resample_contribution(self.rng)
        self.users[label] = self.spares.pop(label)
        self.broadcast(rekey)
        self._store_session_keys()

    def leave(self, label):
        """ A user departs, the leader rekeys the remaining group
        """
        try:
            user = self.users.pop(label)
        except KeyError:
            raise HarnessError('No user labelled {}'.format(label))
        self.departed[label] = user
        self.broadcast(self.leader.handle_leave(user.me, self.rng))
        self._store_session_keys()

    # Results

    def outcomes(self):
        parties = OrderedDict()
        if self.leader_failure is not None:
            parties[self.leader_label] = Outcome(
                REJECTED, self.leader_failure, None)
        else:
            parties[self.leader_label] = Outcome(
                ACCEPTED, None, self.leader.session_key)

        for label, user in self._all_users().items():
            if user.phase == Phase.ACCEPTED:
                parties[label] = Outcome(ACCEPTED, None, user.session_key)
            elif user.phase == Phase.REJECTED:
                parties[label] = Outcome(REJECTED, user.rejection, None)
            elif user.phase == Phase.SENT:
                parties[label] = Outcome(REJECTED, NO_BROADCAST, None)

        return Outcomes(
            parties, list(self.rejections), list(self.session_keys),
            list(self.revealed), list(self.tests))


# Adversary actions

class AbstractAction:  # pragma: no cover
    def apply(self, simulation):
        raise NotImplementedError

    def __eq__(self, other):
        return type(other) is type(self) and vars(other) == vars(self)

    def __repr__(self):
        return '{}({})'.format(self.__class__.__name__, ', '.join(
            '{}={!r}'.format(k, v) for k, v in vars(self).items()))


class Deliver(AbstractAction):
    def apply(self, simulation):
        simulation.deliver(simulation.next_envelope())


class Drop(AbstractAction):
    def apply(self, simulation):
        envelope = simulation.next_envelope()
        logger.debug('Dropped message {} -> {}'.format(
            envelope.sender, envelope.receiver))


class Duplicate(AbstractAction):
    """ Deliver a message twice

    Without ``party``, the next message is delivered twice. With it, the
    last contribution ever delivered from that party is sent again, in the
    current round.
    """

    def __init__(self, party=None):
        self.party = party

    def apply(self, simulation):
        if self.party is None:
            envelope = simulation.next_envelope()
            simulation.deliver(envelope)
            simulation.deliver(envelope)
        else:
            simulation.party(self.party)
            envelope = simulation.last_contribution_from(self.party)
            simulation.deliver(envelope._replace(round=simulation.round))


class TamperBit(AbstractAction):
    """ Flip one bit of the next message, bit 0 being the MSB of octet 0 """

    def __init__(self, position):
        self.position = position

    def apply(self, simulation):
        envelope = simulation.next_envelope()
        octets = bytearray(envelope.octets)
        if not 0 <= self.position < len(octets) * 8:
            raise ScriptInvalid('Bit {} is outside a {}-octet message'.format(
                self.position, len(octets)))
        octets[self.position // 8] ^= 0x80 >> (self.position % 8)
        simulation.deliver(envelope._replace(octets=bytes(octets)))


class InjectForged(AbstractAction):
    """ Replace the signature of the next message by a forgery """

    def apply(self, simulation):
        envelope = simulation.next_envelope()
        message = codec.parse_message(envelope.octets, simulation.params)
        forge = simulation.suite.signatures.forge
        try:
            if isinstance(message, ContributionMessage):
                forged = message._replace(signature=forge(message.ciphertext))
            else:
                forged = message._replace(signature=forge(
                    codec.broadcast_signing_payload(
                        message.leader, message.shares, message.roster)))
        except NotImplementedError as e:
            raise ScriptInvalid(str(e))
        simulation.deliver(envelope._replace(
            octets=codec.serialize_message(forged)))


class ReplayBroadcast(AbstractAction):
    """ Deliver again a broadcast sent earlier, the first one by default """

    def __init__(self, index=0):
        self.index = index

    def apply(self, simulation):
        sent = [e for e in simulation.history if e.receiver == BROADCAST]
        try:
            envelope = sent[self.index]
        except IndexError:
            raise ScriptInvalid('No broadcast #{} to replay'.format(self.index))
        simulation.deliver(envelope._replace(round=simulation.round))


class RevealKey(AbstractAction):
    def __init__(self, party):
        self.party = party

    def apply(self, simulation):
        key = simulation.party(self.party).session_key
        simulation.revealed.append((self.party, key))


class CorruptLeaderOmit(AbstractAction):
    def __init__(self, party):
        self.party = party

    def apply(self, simulation):
        if self.party not in simulation.users:
            raise ScriptInvalid('{} is not a user'.format(self.party))
        simulation.leader.omitted.add(PartyId(simulation.params, self.party))


class TestCompare(AbstractAction):
    """ Compare a party key with a random string of the same length

    ``distinct`` is None when the party holds no key.
    """
    __test__ = False

    def __init__(self, party):
        self.party = party

    def apply(self, simulation):
        key = simulation.party(self.party).session_key
        if key is None:
            distinct = None
        else:
            noise = simulation.test_rng.randbytes(len(key.octets))
            distinct = noise != key.octets
        simulation.tests.append(KeyTestResult(self.party, distinct))


class NextSession(AbstractAction):
    def apply(self, simulation):
        simulation.finish_session()
        simulation.start_session()


class AdversaryScript:
    """ Ordered adversary actions """

    def __init__(self, actions=(), name=''):
        self.actions = list(actions)
        self.name = name
        for action in self.actions:
            if not isinstance(action, AbstractAction):
                raise ScriptInvalid('{!r} is not an action'.format(action))

    def __iter__(self):
        return iter(self.actions)

    def __len__(self):
        return len(self.actions)


def run_honest_session(n, params, seed, abscissa_mode=IDENTITY_ABSCISSA,
                       suite_factory=make_test_suite):
    """ A whole session, nothing tampered with

    :return: (dict of party label to SessionKey, Transcript)
    :raises SessionFailed: if any party did not accept
    """
    simulation = Simulation(n, params, seed, abscissa_mode, suite_factory)
    simulation.run_session()
    outcomes = simulation.outcomes()
    if outcomes.rejected():
        raise SessionFailed('Honest session failed : {}'.format(
            outcomes.reasons()))
    return {i: o.key for i, o in outcomes.parties.items()}, simulation.transcript


def run_script(script, n, params, seed, abscissa_mode=IDENTITY_ABSCISSA,
               suite_factory=make_test_suite):
    """ A session (or several) under adversary control

    :type script: AdversaryScript or a list of actions
    :return: (Outcomes, Transcript)
    :raises ScriptInvalid:
    """
    if not isinstance(script, AdversaryScript):
        script = AdversaryScript(script)
    simulation = Simulation(n, params, seed, abscissa_mode, suite_factory)
    simulation.start_session()
    for action in script:
        logger.debug('Applying {!r}'.format(action))
        action.apply(simulation)
    simulation.finish_session()
    return simulation.outcomes(), simulation.transcript


MembershipResult = namedtuple(
    'MembershipResult', 'kind party before after outcomes final')


def run_membership_scenario(kind, n, params, seed,
                            abscissa_mode=IDENTITY_ABSCISSA,
                            suite_factory=make_test_suite, script=()):
    """ An honest session followed by a join of user n+2 or a leave of user n

    ``script`` runs once the group is rekeyed.

    :return: (MembershipResult, Transcript); ``before``, ``after`` and
             ``final`` map party labels to their accepted keys, ``final``
             being taken after the script
    """
    if kind not in MEMBERSHIP_KINDS:
        raise HarnessError('Unknown membership change : {}'.format(kind))
    if kind == LEAVE and n < 2:
        raise HarnessError('A leave needs at least 2 users')

    simulation = Simulation(
        n, params, seed, abscissa_mode, suite_factory,
        spares=1 if kind == JOIN else 0)
    simulation.run_session()
    before = simulation.current_keys()

    if kind == JOIN:
        party = n + 2
        simulation.join(party)
    else:
        party = n
        simulation.leave(party)

    after = simulation.current_keys()
    if not isinstance(script, AdversaryScript):
        script = AdversaryScript(script)
    for action in script:
        logger.debug('Applying {!r}'.format(action))
        action.apply(simulation)

    result = MembershipResult(
        kind, party, before, after, simulation.outcomes(),
        simulation.current_keys())
    return result, simulation.transcript


class CostReport:
    """ Communication and computation of one honest session

    Every aggregate is computed from the transcript it is built from.
    """

    FIELDS = (
        'n', 'p_bits', 'leader_octets', 'user_octets', 'rounds',
        'user_mults', 'user_xor_octets', 'leader_mults')

    def __init__(self, n, p_bits, leader_octets, user_octets, rounds,
                 user_mults, user_xor_octets, leader_mults,
                 message_octets=None, party_counts=None):
        self.n = n
        self.p_bits = p_bits
        self.leader_octets = leader_octets
        self.user_octets = user_octets
        self.rounds = rounds
        self.user_mults = user_mults
        self.user_xor_octets = user_xor_octets
        self.leader_mults = leader_mults
        self.message_octets = message_octets or {}
        self.party_counts = party_counts or {}

    @classmethod
    def from_transcript(cls, n, params, transcript, leader):
        user_labels = [i for i in transcript.counters if i != leader]
        per_user = [transcript.octets_sent_by(i) for i in user_labels]
        counts = transcript.counts()
        return cls(
            n=n,
            p_bits=params.bit_length,
            leader_octets=transcript.octets_sent_by(leader),
            user_octets=max(per_user),
            rounds=len(transcript.rounds),
            user_mults=max(counts[i][FIELD_MULTS] for i in user_labels),
            user_xor_octets=max(counts[i][XOR_OCTETS] for i in user_labels),
            leader_mults=counts[leader][FIELD_MULTS],
            message_octets={
                i: [e.size for e in transcript.sent_by(i)]
                for i in transcript.counters},
            party_counts=counts)

    @property
    def total_octets(self):
        return sum(sum(sizes) for sizes in self.message_octets.values())

    def as_row(self):
        return tuple(getattr(self, i) for i in self.FIELDS)

    def __repr__(self):
        return '<CostReport n={} leader_octets={}>'.format(
            self.n, self.leader_octets)


def measure_costs(n_values, params, seed=1, abscissa_mode=IDENTITY_ABSCISSA,
                  suite_factory=make_test_suite):
    """ One honest session per group size

    :rtype: list of CostReport
    """
    n_values = list(n_values)
    if not n_values:
        raise HarnessError('No group size to measure')

    reports = []
    for n in n_values:
        _, transcript = run_honest_session(
            n, params, seed, abscissa_mode, suite_factory)
        report = CostReport.from_transcript(
            n, params, transcript, leader=n + 1)
        logger.debug('Measured {!r}'.format(report))
        reports.append(report)
    return reports

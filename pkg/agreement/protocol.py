""" Leader and user state machines

Two rounds::

    U_i -> U_0 : e_i = Enc_pu0(ID_i || ID_0 || x_i || C_i), sig_i
    U_0 -> all : ID_0, {P_i = K xor H(ID_i, ID_0, x_i, C_i)}, U, sig_0

where K concatenates the coefficients of the polynomial interpolated
through every (abscissa_i, x_i) and (ID_0, x_0). Each user checks
A(abscissa_i) = x_i before deriving Key = F(K, U).

A state machine serves one party and must be driven by one execution
context at a time.
"""

import logging

from . import codec
from .codec import MalformedMessage, MalformedSecret
from .crypto import DecryptionFailure
from .field import (
    DuplicateAbscissa, FieldError, lagrange_interpolate, poly_eval_horner,
    sample_field_element)
from .metering import (
    DECRYPT_CALLS, ENCRYPT_CALLS, SIGN_CALLS, VERIFY_CALLS, OpMeter, count)
from .models import (
    BroadcastMessage, Contribution, ContributionMessage, Counter,
    MaskedShare)

logger = logging.getLogger(__name__)

# Interpolation abscissa of a contribution. Counter values are not offered:
# every user starts its counter at the same value, so abscissas built from
# counters alone collide across users in every session.
IDENTITY_ABSCISSA = 'identity'
HASHED_ABSCISSA = 'hashed'
ABSCISSA_MODES = (IDENTITY_ABSCISSA, HASHED_ABSCISSA)


class ProtocolError(Exception):
    pass


class InvalidState(ProtocolError):
    pass


class SignatureInvalid(ProtocolError):
    pass


class ReplayDetected(ProtocolError):
    pass


class UnknownSender(ProtocolError):
    pass


class IdMismatch(ProtocolError):
    pass


class DuplicateSubmission(ProtocolError):
    pass


class AbscissaCollision(ProtocolError):
    """ A hashed abscissa already taken in this session; the sender must
    contribute again with a fresh x_i
    """


class MissingContributions(ProtocolError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__('No contribution from {}'.format(self.missing))


class ShareMissing(ProtocolError):
    pass


class ContributionNotUsed(ProtocolError):
    pass


class AlreadyMember(ProtocolError):
    pass


class NotAMember(ProtocolError):
    pass


class GroupTooSmall(ProtocolError):
    pass


# What a user or the leader may answer to a message
REJECTIONS = (
    ProtocolError, DecryptionFailure, MalformedMessage, MalformedSecret,
    DuplicateAbscissa)


def rejection_reason(error):
    """ The reported reason of a rejection is its class name """
    return error.__class__.__name__


def contribution_abscissa(mode, h, party, x, meter=None):
    """ Interpolation abscissa of a contribution

    :param mode: IDENTITY_ABSCISSA (ID_i) or HASHED_ABSCISSA (H(ID_i || x_i))
    :rtype: FieldElement
    """
    if mode == IDENTITY_ABSCISSA:
        return party.element
    elif mode == HASHED_ABSCISSA:
        return codec.hashed_abscissa(h, party, x, party.params, meter)
    raise ValueError('Unknown abscissa mode : {}'.format(mode))


class Phase:
    IDLE = 'Idle'
    SENT = 'Sent'
    ACCEPTED = 'Accepted'
    REJECTED = 'Rejected'


class UserState:
    """ U_i, one instance per user

    Phases go Idle -> Sent -> Accepted | Rejected within a session. An
    Accepted user may process the rekey broadcast following a join or a
    leave, with the contribution it already sent.
    """

    def __init__(self, me, leader, keys, leader_enc_key, leader_verify_key,
                 suite, counter=None, abscissa_mode=IDENTITY_ABSCISSA,
                 meter=None):
        if abscissa_mode not in ABSCISSA_MODES:
            raise ValueError('Unknown abscissa mode : {}'.format(abscissa_mode))
        self.me = me
        self.leader = leader
        self.keys = keys
        self.leader_enc_key = leader_enc_key
        self.leader_verify_key = leader_verify_key
        self.suite = suite
        self.counter = counter if counter is not None else Counter(0)
        self.abscissa_mode = abscissa_mode
        self.meter = meter if meter is not None else OpMeter()

        self.phase = Phase.IDLE
        self.current_x = None
        self.abscissa = None
        self.session_key = None
        self.rejection = None
        self._keystream = b''
        # signing payloads of the broadcasts opened with the current x_i
        self._opened = set()

    @property
    def params(self):
        return self.me.params

    def begin_session(self):
        """ Forget the previous session, keep counter and keys """
        self.phase = Phase.IDLE
        self.current_x = None
        self.abscissa = None
        self.session_key = None
        self.rejection = None
        self._keystream = b''
        self._opened = set()

    def _sample_contribution(self, rng):
        while True:
            x = sample_field_element(self.params, rng)
            abscissa = contribution_abscissa(
                self.abscissa_mode, self.suite.hash, self.me, x, self.meter)
            if abscissa.value != 0 and abscissa != self.leader.element:
                return x, abscissa
            logger.debug('{} re-samples its contribution'.format(self.me))

    def prepare_contribution(self, rng):
        """ Step 1, entirely offline

        :rtype: ContributionMessage
        """
        if self.phase != Phase.IDLE:
            raise InvalidState('{} cannot contribute while {}'.format(
                self.me, self.phase))

        counter = self.counter.next()
        x, abscissa = self._sample_contribution(rng)
        plaintext = codec.contribution_plaintext(
            self.me, self.leader, x, counter)

        ciphertext = self.suite.encryption.encrypt(
            self.leader_enc_key, plaintext, rng)
        count(self.meter, ENCRYPT_CALLS)
        signature = self.suite.signatures.sign(self.keys.signing_key, plaintext)
        count(self.meter, SIGN_CALLS)

        self.counter = counter
        self.current_x = x
        self.abscissa = abscissa
        self._keystream = b''
        self._opened = set()
        self.phase = Phase.SENT
        logger.debug('{} sent its contribution ({})'.format(self.me, counter))
        return ContributionMessage(self.me, ciphertext, signature)

    def resample_contribution(self, rng):
        """ Replace a contribution whose abscissa the leader refused

        :rtype: ContributionMessage
        """
        if self.phase != Phase.SENT:
            raise InvalidState('{} has no pending contribution'.format(self.me))
        self.phase = Phase.IDLE
        return self.prepare_contribution(rng)

    def precompute_keystream(self, out_len):
        """ Offline part of step 5: H(ID_i, ID_0, x_i, C_i), out_len octets
        """
        if self.current_x is None:
            raise InvalidState('{} has no contribution'.format(self.me))
        self._keystream = codec.keystream(
            self.suite.hash, self.me, self.leader, self.counter,
            self.current_x, out_len, self.meter)

    def _stream(self, out_len):
        if len(self._keystream) < out_len:
            self.precompute_keystream(out_len)
        return self._keystream[:out_len]

    def _reject(self, error):
        self.phase = Phase.REJECTED
        self.session_key = None
        self.rejection = rejection_reason(error)
        logger.warning('{} rejects the broadcast : {}'.format(
            self.me, self.rejection))

    def _check_phase(self):
        if self.phase not in (Phase.SENT, Phase.ACCEPTED):
            raise InvalidState('{} expects no broadcast while {}'.format(
                self.me, self.phase))

    def receive(self, octets):
        """ Parse a serialized broadcast, then process it

        :rtype: SessionKey
        """
        self._check_phase()
        try:
            message = codec.parse_message(octets, self.params)
            if not isinstance(message, BroadcastMessage):
                raise MalformedMessage('A user only accepts broadcasts')
        except MalformedMessage as e:
            self._reject(e)
            raise
        return self.process_broadcast(message)

    def process_broadcast(self, message):
        """ Step 5: unmask K, check A(abscissa_i) = x_i, derive the key

        :type message: BroadcastMessage
        :rtype: SessionKey
        """
        self._check_phase()
        try:
            key = self._open_broadcast(message)
        except ReplayDetected as e:
            # the current key, if any, stays in place
            logger.warning('{} ignores a replayed broadcast : {}'.format(
                self.me, e))
            raise
        except REJECTIONS as e:
            self._reject(e)
            raise

        self.session_key = key
        self.phase = Phase.ACCEPTED
        logger.debug('{} accepted key {}'.format(self.me, key.digest()))
        return key

    def _open_broadcast(self, message):
        if message.leader != self.leader:
            raise IdMismatch('Broadcast comes from {}, expected {}'.format(
                message.leader, self.leader))

        payload = codec.broadcast_signing_payload(
            message.leader, message.shares, message.roster)
        count(self.meter, VERIFY_CALLS)
        if not self.suite.signatures.verify(
                self.leader_verify_key, payload, message.signature):
            raise SignatureInvalid('Bad leader signature')
        if payload in self._opened:
            raise ReplayDetected('Broadcast already processed')
        self._opened.add(payload)

        share = message.share_for(self.me)
        if share is None or self.me not in message.roster:
            raise ShareMissing('No share addressed to {}'.format(self.me))

        secret_len = (len(message.roster) + 1) * self.params.w
        if len(share.octets) != secret_len:
            raise MalformedSecret('Share of {} octets, expected {}'.format(
                len(share.octets), secret_len))

        secret = codec.mask_secret(
            share.octets, self._stream(secret_len), self.meter)
        poly = codec.decode_secret(secret, self.params)

        if poly_eval_horner(poly, self.abscissa, self.meter) != self.current_x:
            raise ContributionNotUsed(
                'A({}) differs from the contribution of {}'.format(
                    self.abscissa, self.me))

        return codec.derive_session_key(
            secret, message.roster, self.suite.hash, self.meter)


class LeaderState:
    """ U_0, the powerful node

    Collects contributions, interpolates, masks and broadcasts. Accepted
    counters survive sessions.
    """

    def __init__(self, me, roster, enc_keys, sig_keys, user_verify_keys,
                 suite, abscissa_mode=IDENTITY_ABSCISSA, last_counters=None,
                 meter=None):
        if me in roster:
            raise ValueError('Leader identity {} is also a user'.format(me))
        if abscissa_mode not in ABSCISSA_MODES:
            raise ValueError('Unknown abscissa mode : {}'.format(abscissa_mode))
        self.me = me
        self.roster = roster
        self.enc_keys = enc_keys
        self.sig_keys = sig_keys
        self.user_verify_keys = dict(user_verify_keys)
        self.suite = suite
        self.abscissa_mode = abscissa_mode
        self.last_counters = dict(last_counters or {})
        self.meter = meter if meter is not None else OpMeter()

        self.pending = {}
        self.x_0 = None
        self.polynomial = None
        self.secret = None
        self.session_key = None

    @property
    def params(self):
        return self.me.params

    def begin_session(self):
        """ Drop the contributions of the previous session """
        self.pending = {}
        self.x_0 = None
        self.polynomial = None
        self.secret = None
        self.session_key = None

    def receive(self, octets):
        """ Parse a serialized contribution, then register it

        :rtype: Contribution
        """
        try:
            message = codec.parse_message(octets, self.params)
            if not isinstance(message, ContributionMessage):
                raise MalformedMessage('The leader only accepts contributions')
        except MalformedMessage as e:
            logger.warning('Rejected a message : {}'.format(
                rejection_reason(e)))
            raise
        return self.register_contribution(message)

    def register_contribution(self, message):
        """ Step 2: decrypt, verify, check identities and counter

        :type message: ContributionMessage
        :rtype: Contribution
        :raises: DecryptionFailure, SignatureInvalid, ReplayDetected,
                 UnknownSender, IdMismatch, DuplicateSubmission,
                 AbscissaCollision
        """
        if message.sender not in self.roster:
            raise self._rejected(message, UnknownSender(
                '{} is not in the roster'.format(message.sender)))
        return self._admit(message)

    def _rejected(self, message, error):
        logger.warning('Rejected contribution from {} : {}'.format(
            message.sender, rejection_reason(error)))
        return error

    def _admit(self, message):
        try:
            return self._check_contribution(message)
        except (ProtocolError, DecryptionFailure) as e:
            raise self._rejected(message, e)

    def _check_contribution(self, message):
        sender = message.sender
        try:
            verify_key = self.user_verify_keys[sender]
        except KeyError:
            raise UnknownSender('No verify key for {}'.format(sender))

        count(self.meter, DECRYPT_CALLS)
        plaintext = self.suite.encryption.decrypt(
            self.enc_keys.decryption_key, message.ciphertext)

        count(self.meter, VERIFY_CALLS)
        if not self.suite.signatures.verify(
                verify_key, plaintext, message.signature):
            raise SignatureInvalid('Bad signature from {}'.format(sender))

        try:
            id_i, id_0, x, counter = codec.parse_contribution_plaintext(
                plaintext, self.params)
        except MalformedMessage as e:
            raise IdMismatch('Unreadable plaintext : {}'.format(e))
        if id_i != sender or id_0 != self.me:
            raise IdMismatch('Plaintext names {} -> {}'.format(id_i, id_0))

        last = self.last_counters.get(sender)
        if last is not None and counter <= last:
            raise ReplayDetected('{} is not above {}'.format(counter, last))
        if sender in self.pending:
            raise DuplicateSubmission('{} already contributed'.format(sender))

        abscissa = contribution_abscissa(
            self.abscissa_mode, self.suite.hash, sender, x, self.meter)
        self.last_counters[sender] = counter
        if abscissa in self._taken_abscissas():
            raise AbscissaCollision('{} collides at {}'.format(sender, abscissa))

        contribution = Contribution(sender, x, counter, abscissa)
        self.pending[sender] = contribution
        logger.debug('Accepted contribution from {} ({})'.format(
            sender, counter))
        return contribution

    def _taken_abscissas(self):
        taken = {c.abscissa for c in self.pending.values()}
        taken.add(self.me.element)
        return taken

    def _point(self, contribution):
        return contribution.abscissa, contribution.x

    def _interpolation_points(self):
        points = [self._point(self.pending[i]) for i in self.roster]
        points.append((self.me.element, self.x_0))
        return points

    def compute_round(self, rng):
        """ Steps 3 and 4: interpolate, mask K per user, sign

        :rtype: BroadcastMessage
        :raises MissingContributions: unless every roster member contributed
        """
        missing = [i for i in self.roster if i not in self.pending]
        if missing:
            raise MissingContributions(missing)

        h = self.suite.hash
        self.x_0 = sample_field_element(self.params, rng)
        poly = lagrange_interpolate(self._interpolation_points(), self.meter)
        secret = codec.encode_secret(poly, self.params)

        shares = []
        for party in self.roster:
            c = self.pending[party]
            stream = codec.keystream(
                h, party, self.me, c.counter, c.x, len(secret), self.meter)
            shares.append(MaskedShare(
                party, codec.mask_secret(secret, stream, self.meter)))
        shares = tuple(shares)

        payload = codec.broadcast_signing_payload(self.me, shares, self.roster)
        signature = self.suite.signatures.sign(self.sig_keys.signing_key, payload)
        count(self.meter, SIGN_CALLS)

        self.polynomial = poly
        self.secret = secret
        self.session_key = codec.derive_session_key(
            secret, self.roster, h, self.meter)
        logger.debug('Broadcasting {} shares of {} octets'.format(
            len(shares), len(secret)))
        return BroadcastMessage(self.me, shares, self.roster, signature)

    def handle_join(self, message, rng):
        """ A new user contributes; U grows, x_0 is refreshed

        :rtype: BroadcastMessage
        """
        if message.sender in self.roster:
            raise self._rejected(message, AlreadyMember(
                '{} already belongs to the group'.format(message.sender)))
        self._admit(message)
        previous = self.roster
        self.roster = previous.with_member(message.sender)
        try:
            broadcast = self.compute_round(rng)
        except (ProtocolError, FieldError):
            # the consumed counter stays recorded
            self.roster = previous
            self.pending.pop(message.sender, None)
            raise
        logger.info('{} joined, group of {}'.format(
            message.sender, len(self.roster)))
        return broadcast

    def handle_leave(self, departing, rng):
        """ Discard (ID_old, x_old); U shrinks, x_0 is refreshed

        :rtype: BroadcastMessage
        """
        if departing not in self.roster:
            raise NotAMember('{} does not belong to the group'.format(
                departing))
        if len(self.roster) < 2:
            raise GroupTooSmall('The last user cannot leave')
        previous, contribution = self.roster, self.pending.pop(departing, None)
        self.roster = previous.without(departing)
        try:
            broadcast = self.compute_round(rng)
        except (ProtocolError, FieldError):
            self.roster = previous
            if contribution is not None:
                self.pending[departing] = contribution
            raise
        logger.info('{} left, group of {}'.format(departing, len(self.roster)))
        return broadcast

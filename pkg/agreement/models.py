""" Domain values exchanged by the protocol

Plain immutable Python objects, there is no database behind them.
"""

from collections import namedtuple
from functools import total_ordering

from .field import FieldElement

# C_i travels as 8 octets.
COUNTER_MAX = 2 ** 64 - 1

SESSION_KEY_LENGTH = 32


class InvalidPartyId(ValueError):
    pass


class EmptyRoster(ValueError):
    pass


class CounterOverflow(ValueError):
    pass


@total_ordering
class PartyId:
    """ Identity of a party (user or leader), a nonzero field element

    It is also the party interpolation abscissa in "identity" mode.
    """

    __slots__ = ('_element',)

    def __init__(self, params, value):
        value = int(value)
        if not 0 < value < params.p:
            raise InvalidPartyId(
                'Identity must lie in [1, {}), got {}'.format(params.p, value))
        self._element = FieldElement(params, value)

    @property
    def element(self):
        return self._element

    @property
    def params(self):
        return self._element.params

    @property
    def value(self):
        return self._element.value

    def to_bytes(self):
        return self._element.to_bytes()

    def __int__(self):
        return self.value

    def __eq__(self, other):
        return isinstance(other, PartyId) and other.element == self._element

    def __lt__(self, other):
        return self.value < other.value

    def __hash__(self):
        return hash(('PartyId', self._element))

    def __repr__(self):
        return 'U#{}'.format(self.value)


@total_ordering
class Counter:
    """ Per (user, leader) session counter, 64-bit unsigned
    """

    __slots__ = ('_value',)

    def __init__(self, value=0):
        if not 0 <= value <= COUNTER_MAX:
            raise CounterOverflow('Counter out of range : {}'.format(value))
        self._value = value

    @property
    def value(self):
        return self._value

    def next(self):
        return Counter(self._value + 1)

    def to_bytes(self):
        return self._value.to_bytes(8, 'big')

    def __int__(self):
        return self._value

    def __eq__(self, other):
        return isinstance(other, Counter) and other.value == self._value

    def __lt__(self, other):
        return self._value < other.value

    def __hash__(self):
        return hash(('Counter', self._value))

    def __repr__(self):
        return 'C={}'.format(self._value)


class Roster:
    """ The set of user identities of a session, the leader excluded

    Iteration is in ascending numeric order.
    """

    def __init__(self, ids):
        ids = frozenset(ids)
        if not ids:
            raise EmptyRoster('A roster holds at least one user')
        self._ids = ids
        self._sorted = tuple(sorted(ids))

    def with_member(self, party):
        return Roster(self._ids | {party})

    def without(self, party):
        return Roster(self._ids - {party})

    def __contains__(self, party):
        return party in self._ids

    def __iter__(self):
        return iter(self._sorted)

    def __len__(self):
        return len(self._ids)

    def __eq__(self, other):
        return isinstance(other, Roster) and other._ids == self._ids

    def __hash__(self):
        return hash(self._ids)

    def __repr__(self):
        return '<Roster {}>'.format([i.value for i in self._sorted])


class SessionKey:
    """ Output of the key derivation, 32 octets
    """

    __slots__ = ('_octets',)

    def __init__(self, octets):
        if len(octets) != SESSION_KEY_LENGTH:
            raise ValueError('A session key is {} octets, got {}'.format(
                SESSION_KEY_LENGTH, len(octets)))
        self._octets = bytes(octets)

    @property
    def octets(self):
        return self._octets

    def digest(self):
        """ Printable 8-octet prefix, the only part ever shown in logs """
        return self._octets[:8].hex()

    def __eq__(self, other):
        return isinstance(other, SessionKey) and other.octets == self._octets

    def __hash__(self):
        return hash(self._octets)

    def __repr__(self):
        return '<SessionKey {}…>'.format(self.digest())


# A user's input to the key: x is the ordinate, abscissa is ID_i or
# H(ID_i || x) depending on the abscissa mode.
Contribution = namedtuple('Contribution', 'party x counter abscissa')

# P_i, addressed to one user
MaskedShare = namedtuple('MaskedShare', 'recipient octets')

# U_i -> U_0 : e_i, sig_i
ContributionMessage = namedtuple(
    'ContributionMessage', 'sender ciphertext signature')


class BroadcastMessage(namedtuple(
        'BroadcastMessage', 'leader shares roster signature')):
    """ U_0 -> all : ID_0, Y = {P_i}, U, sig_0
    """

    __slots__ = ()

    def share_for(self, party):
        """
        :rtype: MaskedShare or None
        """
        for share in self.shares:
            if share.recipient == party:
                return share
        return None

""" Bit-exact encodings

Secret serialization, the per-user mask keystream, roster encoding,
session key derivation and the two wire messages. All multi-octet integers
are big-endian, counts are 4 octets, counters 8 octets and field elements
w octets (w being the coefficient width of the session field).

ContributionMessage::

    0x01 | sender_id (w) | e_len (4) | e | sig_len (4) | sig

BroadcastMessage::

    0x02 | id_0 (w) | n (4) | n * [id_i (w) | P_i ((n+1)*w)]
         | encode_roster(U) | sig_len (4) | sig
"""

from .field import FieldElement, SecretPolynomial
from .metering import HASH_CALLS, XOR_OCTETS, count
from .models import (
    BroadcastMessage, ContributionMessage, Counter, MaskedShare, PartyId,
    Roster, SessionKey)

CONTRIBUTION_TAG = 0x01
BROADCAST_TAG = 0x02

# Domain separation of the hash inputs
MASK_DOMAIN = b'\x01'
KEY_DOMAIN = b'\x02'
ABSCISSA_DOMAIN = b'\x03'

COUNT_WIDTH = 4
COUNTER_WIDTH = 8


class CodecError(Exception):
    pass


class MalformedSecret(CodecError):
    pass


class MalformedMessage(CodecError):
    pass


class LengthMismatch(CodecError):
    pass


def _u32(value):
    return value.to_bytes(COUNT_WIDTH, 'big')


def encode_secret(poly, params):
    """ K = a_0 || a_1 || ... || a_n, w octets each

    :type poly: SecretPolynomial
    :rtype: bytes
    """
    return b''.join(
        c.value.to_bytes(params.w, 'big') for c in poly.coeffs)


def decode_secret(secret, params):
    """ Inverse of encode_secret

    :rtype: SecretPolynomial
    :raises MalformedSecret: on a length that is not a positive multiple of
                             w, or a chunk >= p
    """
    w = params.w
    if not secret or len(secret) % w:
        raise MalformedSecret(
            'Secret length {} is not a multiple of {}'.format(len(secret), w))

    coeffs = []
    for offset in range(0, len(secret), w):
        value = int.from_bytes(secret[offset:offset + w], 'big')
        if value >= params.p:
            raise MalformedSecret(
                'Coefficient {} is not below p'.format(offset // w))
        coeffs.append(FieldElement(params, value))
    return SecretPolynomial(coeffs)


def _expand(h, prefix, out_len, meter=None):
    """ h(prefix || j) for j = 0, 1, ..., truncated to out_len """
    blocks = []
    produced = 0
    j = 0
    while produced < out_len:
        block = h(prefix + _u32(j))
        count(meter, HASH_CALLS)
        blocks.append(block)
        produced += len(block)
        j += 1
    return b''.join(blocks)[:out_len]


def keystream(h, id_i, id_0, c_i, x_i, out_len, meter=None):
    """ Mask stream of user i

    Blocks h(0x01 || id_i || id_0 || c_i || x_i || j), j as 4 octets.
    Longer streams extend shorter ones (fragmented masking).

    :type id_i: PartyId
    :type id_0: PartyId
    :type c_i: Counter
    :type x_i: FieldElement
    :rtype: bytes
    """
    if out_len < 1:
        raise ValueError('Keystream length must be positive')
    prefix = (MASK_DOMAIN + id_i.to_bytes() + id_0.to_bytes()
              + c_i.to_bytes() + x_i.to_bytes())
    return _expand(h, prefix, out_len, meter)


def mask_secret(data, stream, meter=None):
    """ Octet-wise XOR, its own inverse

    :raises LengthMismatch: if lengths differ
    """
    if len(data) != len(stream):
        raise LengthMismatch('Cannot mask {} octets with {} octets'.format(
            len(data), len(stream)))
    count(meter, XOR_OCTETS, len(data))
    if not data:
        return b''
    return (int.from_bytes(data, 'big') ^ int.from_bytes(stream, 'big')
            ).to_bytes(len(data), 'big')


def encode_roster(roster, params):
    """ Count, then ids in ascending order

    :type roster: Roster
    :rtype: bytes
    """
    return _u32(len(roster)) + b''.join(
        i.value.to_bytes(params.w, 'big') for i in roster)


def derive_session_key(secret, roster, h, meter=None):
    """ Key = F(K, U) = h(0x02 || K || encode_roster(U))

    :rtype: SessionKey
    """
    params = next(iter(roster)).params
    digest = h(KEY_DOMAIN + secret + encode_roster(roster, params))
    count(meter, HASH_CALLS)
    return SessionKey(digest)


def hashed_abscissa(h, party, x, params, meter=None):
    """ Truncate-to-field of h(0x03 || id_i || x_i)

    Sixteen extra octets are drawn before reduction so that the bias
    towards small residues stays negligible.

    :rtype: FieldElement
    """
    prefix = ABSCISSA_DOMAIN + party.to_bytes() + x.to_bytes()
    octets = _expand(h, prefix, params.w + 16, meter)
    return FieldElement(params, int.from_bytes(octets, 'big'))


def contribution_plaintext(id_i, id_0, x_i, c_i):
    """ id_i || id_0 || x_i || C_i, both encrypted and signed by the user
    """
    return id_i.to_bytes() + id_0.to_bytes() + x_i.to_bytes() + c_i.to_bytes()


def parse_contribution_plaintext(octets, params):
    """
    :return: (id_i, id_0, x_i, c_i)
    :raises MalformedMessage:
    """
    reader = OctetReader(octets, params)
    id_i = reader.party()
    id_0 = reader.party()
    x_i = reader.element()
    c_i = Counter(int.from_bytes(reader.take(COUNTER_WIDTH), 'big'))
    reader.finish()
    return id_i, id_0, x_i, c_i


def _share_entries(shares):
    return b''.join(s.recipient.to_bytes() + s.octets for s in shares)


def broadcast_signing_payload(leader, shares, roster):
    """ What sig_0 covers: id_0 || the share entries || encode_roster(U)
    """
    return (leader.to_bytes() + _share_entries(shares)
            + encode_roster(roster, leader.params))


def broadcast_size(n, w, sig_len):
    """ Octet count of a serialized BroadcastMessage

    n * (n+1) * w octets of masked shares, plus ids, roster and framing.
    """
    return (1 + w + COUNT_WIDTH
            + n * (w + (n + 1) * w)
            + COUNT_WIDTH + n * w
            + COUNT_WIDTH + sig_len)


def serialize_message(message):
    """
    :type message: ContributionMessage or BroadcastMessage
    :rtype: bytes
    """
    if isinstance(message, ContributionMessage):
        return b''.join([
            bytes([CONTRIBUTION_TAG]),
            message.sender.to_bytes(),
            _u32(len(message.ciphertext)), message.ciphertext,
            _u32(len(message.signature)), message.signature,
        ])
    elif isinstance(message, BroadcastMessage):
        return b''.join([
            bytes([BROADCAST_TAG]),
            message.leader.to_bytes(),
            _u32(len(message.shares)),
            _share_entries(message.shares),
            encode_roster(message.roster, message.leader.params),
            _u32(len(message.signature)), message.signature,
        ])
    raise TypeError('Cannot serialize {!r}'.format(message))


class OctetReader:
    """ Strict cursor over an octet string

    Every read past the end raises MalformedMessage.
    """

    def __init__(self, octets, params):
        self.octets = bytes(octets)
        self.params = params
        self.offset = 0

    @property
    def remaining(self):
        return len(self.octets) - self.offset

    def take(self, length):
        if length > self.remaining:
            raise MalformedMessage('Truncated input at offset {}'.format(
                self.offset))
        chunk = self.octets[self.offset:self.offset + length]
        self.offset += length
        return chunk

    def u32(self):
        return int.from_bytes(self.take(COUNT_WIDTH), 'big')

    def element(self):
        value = int.from_bytes(self.take(self.params.w), 'big')
        if value >= self.params.p:
            raise MalformedMessage('Field element {} is not below p'.format(
                value))
        return FieldElement(self.params, value)

    def party(self):
        value = self.element().value
        if value == 0:
            raise MalformedMessage('Zero is not an identity')
        return PartyId(self.params, value)

    def finish(self):
        if self.remaining:
            raise MalformedMessage('{} trailing octets'.format(self.remaining))


def _parse_contribution(reader):
    sender = reader.party()
    ciphertext = reader.take(reader.u32())
    signature = reader.take(reader.u32())
    reader.finish()
    return ContributionMessage(sender, ciphertext, signature)


def _parse_broadcast(reader):
    w = reader.params.w
    leader = reader.party()

    n = reader.u32()
    share_len = (n + 1) * w
    if n == 0 or n * (w + share_len) > reader.remaining:
        raise MalformedMessage('Share count {} does not fit the input'.format(n))

    shares = []
    for _ in range(n):
        recipient = reader.party()
        shares.append(MaskedShare(recipient, reader.take(share_len)))

    if reader.u32() != n:
        raise MalformedMessage('Roster size differs from share count')
    ids = [reader.party() for _ in range(n)]
    if any(a >= b for a, b in zip(ids, ids[1:])):
        raise MalformedMessage('Roster is not in canonical order')

    roster = Roster(ids)
    recipients = {s.recipient for s in shares}
    if len(recipients) != n or recipients != set(ids):
        raise MalformedMessage('Share recipients do not match the roster')
    if leader in roster:
        raise MalformedMessage('Leader appears in the roster')

    signature = reader.take(reader.u32())
    reader.finish()
    return BroadcastMessage(leader, tuple(shares), roster, signature)


def parse_message(octets, params):
    """ Strict parse, no trailing octets tolerated

    :rtype: ContributionMessage or BroadcastMessage
    :raises MalformedMessage: bad tag, truncation, trailing data, counts
                              inconsistent with lengths
    """
    if not octets:
        raise MalformedMessage('Empty input')

    reader = OctetReader(octets, params)
    tag = reader.take(1)[0]
    if tag == CONTRIBUTION_TAG:
        return _parse_contribution(reader)
    elif tag == BROADCAST_TAG:
        return _parse_broadcast(reader)
    raise MalformedMessage('Unknown message type 0x{:02x}'.format(tag))

import random

from agreement.crypto import make_test_suite
from agreement.field import FieldParams
from agreement.models import PartyId, Roster
from agreement.protocol import IDENTITY_ABSCISSA, LeaderState, UserState


class FixedBitsRandom(random.Random):
    """ A seeded Random whose draws of ``bits`` bits are scripted

    Draws of any other width (nonces, keys) stay pseudo-random.
    """

    def __new__(cls, values, bits, seed=0):
        # Python < 3.11 seeds from the first positional arg in __new__
        return super().__new__(cls, seed)

    def __init__(self, values, bits, seed=0):
        super().__init__(seed)
        self.values = list(values)
        self.bits = bits

    def getrandbits(self, k):
        if k == self.bits and self.values:
            return self.values.pop(0)
        return super().getrandbits(k)


def make_group(n, p=2 ** 61 - 1, seed=1, abscissa_mode=IDENTITY_ABSCISSA):
    """ A leader (id n+1) and n users (ids 1..n), sharing a test suite

    :return: (leader, list of users, rng)
    """
    params = FieldParams(p)
    rng = random.Random(seed)
    suite = make_test_suite(seed)
    leader_id = PartyId(params, n + 1)
    user_ids = [PartyId(params, i) for i in range(1, n + 1)]

    enc_keys = suite.encryption.generate_keypair(rng)
    sig_keys = suite.signatures.generate_keypair(rng)
    users = [
        UserState(
            i, leader_id, suite.signatures.generate_keypair(rng),
            enc_keys.encryption_key, sig_keys.verify_key, suite,
            abscissa_mode=abscissa_mode)
        for i in user_ids]
    leader = LeaderState(
        leader_id, Roster(user_ids), enc_keys, sig_keys,
        {u.me: u.keys.verify_key for u in users}, suite,
        abscissa_mode=abscissa_mode)
    return leader, users, rng


def add_spare_user(leader, users, rng, value):
    """ A user known to the leader but not in its roster """
    params = leader.params
    suite = leader.suite
    user = UserState(
        PartyId(params, value), leader.me,
        suite.signatures.generate_keypair(rng),
        leader.enc_keys.encryption_key, leader.sig_keys.verify_key, suite,
        abscissa_mode=leader.abscissa_mode)
    leader.user_verify_keys[user.me] = user.keys.verify_key
    return user

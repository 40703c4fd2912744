""" Operation counters

A meter is handed down to the functions doing the counted work. Passing
``None`` disables counting.
"""

from collections import Counter


FIELD_MULTS = 'field_mults'
XOR_OCTETS = 'xor_octets'
HASH_CALLS = 'hash_calls'
SIGN_CALLS = 'sign_calls'
VERIFY_CALLS = 'verify_calls'
ENCRYPT_CALLS = 'encrypt_calls'
DECRYPT_CALLS = 'decrypt_calls'

OPERATIONS = (
    FIELD_MULTS, XOR_OCTETS, HASH_CALLS,
    SIGN_CALLS, VERIFY_CALLS, ENCRYPT_CALLS, DECRYPT_CALLS)


class OpMeter(Counter):
    """ Per-party operation counts, keyed by the names above
    """

    def count(self, operation, amount=1):
        if operation not in OPERATIONS:
            raise ValueError('Unknown operation : {}'.format(operation))
        self[operation] += amount

    def snapshot(self):
        return {i: self[i] for i in OPERATIONS}


def count(meter, operation, amount=1):
    if meter is not None:
        meter.count(operation, amount)

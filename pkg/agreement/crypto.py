""" Signature, public-key encryption and hash primitives

The protocol only sees the abstract interfaces below. Two suites are
provided:

- ``make_test_suite(seed)``: deterministic toys, reproducible byte for
  byte, with a forgery hook for adversary experiments. Not secure.
- ``make_cryptography_suite(seed)``: Ed25519 signatures and an
  X25519 + HKDF + AES-GCM hybrid encryption from the ``cryptography``
  package.

Every randomized operation draws from an explicit rng handle (a
``random.Random``), so both suites replay identically under a fixed seed.
"""

import hashlib
import hmac
from collections import namedtuple

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey, Ed25519PublicKey)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey, X25519PublicKey)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import (
    Encoding, NoEncryption, PrivateFormat, PublicFormat)


class CryptoError(Exception):
    pass


class DecryptionFailure(CryptoError):
    pass


# (pr_i, pu_i)
SignatureKeypair = namedtuple('SignatureKeypair', 'signing_key verify_key')

# (pr_0, pu_0)
EncryptionKeypair = namedtuple(
    'EncryptionKeypair', 'decryption_key encryption_key')

CryptoSuite = namedtuple('CryptoSuite', 'hash signatures encryption')


def _xor(a, b):
    return bytes(i ^ j for i, j in zip(a, b))


class AbstractHashFn:  # pragma: no cover
    output_len = None

    def __call__(self, data):
        """
        :type data: bytes
        :return: output_len octets
        """
        raise NotImplementedError


class Sha256Hash(AbstractHashFn):
    output_len = 32

    def __call__(self, data):
        return hashlib.sha256(data).digest()


class AbstractSignatureScheme:  # pragma: no cover
    def generate_keypair(self, rng):
        """
        :rtype: SignatureKeypair
        """
        raise NotImplementedError

    def sign(self, signing_key, message):
        """
        :rtype: bytes
        """
        raise NotImplementedError

    def verify(self, verify_key, message, signature):
        """ Never raises, garbage input just fails

        :rtype: bool
        """
        raise NotImplementedError

    def forge(self, message):
        """ An invalid signature claimed for ``message``

        Only test schemes offer that hook.
        """
        raise NotImplementedError(
            '{} has no forgery hook'.format(self.__class__.__name__))


class AbstractEncryptionScheme:  # pragma: no cover
    def generate_keypair(self, rng):
        """
        :rtype: EncryptionKeypair
        """
        raise NotImplementedError

    def encrypt(self, encryption_key, plaintext, rng):
        """ Randomized, authenticated encryption

        :rtype: bytes
        """
        raise NotImplementedError

    def decrypt(self, decryption_key, ciphertext):
        """
        :rtype: bytes
        :raises DecryptionFailure: wrong key or tampered ciphertext
        """
        raise NotImplementedError


class _ToyScheme:
    KEY_LENGTH = 32
    LABEL = b''

    def __init__(self, seed):
        self._master = hashlib.sha256(
            b'hgka-toy|' + self.LABEL + b'|' + str(seed).encode()).digest()
        # public keys are private keys sealed under the scheme secret, so
        # the scheme object alone plays the trusted functionality
        self._seal = hashlib.sha256(self._master + b'|public').digest()

    def _open(self, public_key):
        public_key = bytes(public_key)
        if len(public_key) != self.KEY_LENGTH:
            raise ValueError('Bad key length')
        return _xor(public_key, self._seal)

    def _keypair(self, rng):
        private_key = rng.randbytes(self.KEY_LENGTH)
        return private_key, _xor(private_key, self._seal)


class ToySignatureScheme(_ToyScheme, AbstractSignatureScheme):
    """ Stand-in for an ideal signature functionality

    Signatures are HMAC-SHA256 under the scheme secret and the signing key.
    Suites from different seeds sign differently.
    """
    LABEL = b'signature'

    def generate_keypair(self, rng):
        return SignatureKeypair(*self._keypair(rng))

    def sign(self, signing_key, message):
        return hmac.new(
            self._master + bytes(signing_key), bytes(message),
            hashlib.sha256).digest()

    def verify(self, verify_key, message, signature):
        try:
            expected = self.sign(self._open(verify_key), message)
            return hmac.compare_digest(expected, bytes(signature))
        except (TypeError, ValueError):
            return False

    def forge(self, message):
        # right shape, produced without any signing key
        return hmac.new(
            b'forger|' + self._master, bytes(message), hashlib.sha256).digest()


class ToyEncryptionScheme(_ToyScheme, AbstractEncryptionScheme):
    """ Authenticated stream cipher keyed by the decryption key

    nonce (16) | plaintext XOR SHA-256 stream | HMAC-SHA256 tag (32)
    """
    LABEL = b'encryption'
    NONCE_LENGTH = 16
    TAG_LENGTH = 32

    @staticmethod
    def _stream(key, nonce, length):
        blocks = []
        j = 0
        while len(blocks) * 32 < length:
            blocks.append(hashlib.sha256(
                key + nonce + j.to_bytes(4, 'big')).digest())
            j += 1
        return b''.join(blocks)[:length]

    def _tag(self, key, data):
        return hmac.new(key, data, hashlib.sha256).digest()

    def generate_keypair(self, rng):
        return EncryptionKeypair(*self._keypair(rng))

    def encrypt(self, encryption_key, plaintext, rng):
        key = self._open(encryption_key)
        nonce = rng.randbytes(self.NONCE_LENGTH)
        body = _xor(plaintext, self._stream(key, nonce, len(plaintext)))
        return nonce + body + self._tag(key, nonce + body)

    def decrypt(self, decryption_key, ciphertext):
        ciphertext = bytes(ciphertext)
        if len(ciphertext) < self.NONCE_LENGTH + self.TAG_LENGTH:
            raise DecryptionFailure('Ciphertext too short')
        key = bytes(decryption_key)
        nonce = ciphertext[:self.NONCE_LENGTH]
        body = ciphertext[self.NONCE_LENGTH:-self.TAG_LENGTH]
        tag = ciphertext[-self.TAG_LENGTH:]
        if not hmac.compare_digest(tag, self._tag(key, nonce + body)):
            raise DecryptionFailure('Authentication tag mismatch')
        return _xor(body, self._stream(key, nonce, len(body)))


class Ed25519Scheme(AbstractSignatureScheme):
    """ Ed25519, keys as raw 32-octet strings
    """

    def generate_keypair(self, rng):
        private = Ed25519PrivateKey.from_private_bytes(rng.randbytes(32))
        return SignatureKeypair(
            private.private_bytes(
                Encoding.Raw, PrivateFormat.Raw, NoEncryption()),
            private.public_key().public_bytes(
                Encoding.Raw, PublicFormat.Raw))

    def sign(self, signing_key, message):
        return Ed25519PrivateKey.from_private_bytes(
            bytes(signing_key)).sign(bytes(message))

    def verify(self, verify_key, message, signature):
        try:
            Ed25519PublicKey.from_public_bytes(bytes(verify_key)).verify(
                bytes(signature), bytes(message))
        except (InvalidSignature, TypeError, ValueError):
            return False
        return True


class X25519AESGCMScheme(AbstractEncryptionScheme):
    """ Hybrid encryption: ephemeral X25519, HKDF-SHA256, AES-256-GCM

    ephemeral public key (32) | nonce (12) | AES-GCM ciphertext and tag
    """
    NONCE_LENGTH = 12
    INFO = b'hgka contribution encryption'

    @staticmethod
    def _raw_public(private):
        return private.public_key().public_bytes(
            Encoding.Raw, PublicFormat.Raw)

    def _derive(self, shared, ephemeral_public, recipient_public):
        return HKDF(
            algorithm=hashes.SHA256(), length=32, salt=None,
            info=self.INFO + ephemeral_public + recipient_public,
        ).derive(shared)

    def generate_keypair(self, rng):
        private = X25519PrivateKey.from_private_bytes(rng.randbytes(32))
        return EncryptionKeypair(
            private.private_bytes(
                Encoding.Raw, PrivateFormat.Raw, NoEncryption()),
            self._raw_public(private))

    def encrypt(self, encryption_key, plaintext, rng):
        recipient_public = bytes(encryption_key)
        ephemeral = X25519PrivateKey.from_private_bytes(rng.randbytes(32))
        ephemeral_public = self._raw_public(ephemeral)
        shared = ephemeral.exchange(
            X25519PublicKey.from_public_bytes(recipient_public))
        key = self._derive(shared, ephemeral_public, recipient_public)
        nonce = rng.randbytes(self.NONCE_LENGTH)
        return (ephemeral_public + nonce
                + AESGCM(key).encrypt(nonce, bytes(plaintext), ephemeral_public))

    def decrypt(self, decryption_key, ciphertext):
        ciphertext = bytes(ciphertext)
        if len(ciphertext) < 32 + self.NONCE_LENGTH + 16:
            raise DecryptionFailure('Ciphertext too short')
        ephemeral_public = ciphertext[:32]
        nonce = ciphertext[32:32 + self.NONCE_LENGTH]
        body = ciphertext[32 + self.NONCE_LENGTH:]
        try:
            private = X25519PrivateKey.from_private_bytes(bytes(decryption_key))
            shared = private.exchange(
                X25519PublicKey.from_public_bytes(ephemeral_public))
            key = self._derive(
                shared, ephemeral_public, self._raw_public(private))
            return AESGCM(key).decrypt(nonce, body, ephemeral_public)
        except (InvalidTag, ValueError) as e:
            raise DecryptionFailure('Cannot decrypt : {}'.format(
                e.__class__.__name__))


def make_test_suite(seed):
    """ Deterministic toy primitives, for tests and simulations only

    :rtype: CryptoSuite
    """
    return CryptoSuite(
        hash=Sha256Hash(),
        signatures=ToySignatureScheme(seed),
        encryption=ToyEncryptionScheme(seed))


def make_cryptography_suite(seed=None):
    """ Real primitives; ``seed`` is accepted for interface parity only,
    key material comes from the rng handed to each operation.

    :rtype: CryptoSuite
    """
    return CryptoSuite(
        hash=Sha256Hash(),
        signatures=Ed25519Scheme(),
        encryption=X25519AESGCMScheme())

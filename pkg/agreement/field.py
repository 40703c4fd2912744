""" Prime field arithmetic

Elements of GF(p), polynomials given by their coefficient vectors,
Horner evaluation and Lagrange interpolation. Everything here is immutable
and free of global state.
"""

import logging

from .metering import FIELD_MULTS, count

logger = logging.getLogger(__name__)

# Below that bound primality is checked by trial division.
SMALL_PRIME_BOUND = 2 ** 20

# Deterministic for n < 3.3e24, overwhelmingly reliable above.
MILLER_RABIN_BASES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


class FieldError(Exception):
    pass


class InvalidModulus(FieldError, ValueError):
    pass


class ZeroInverse(FieldError):
    pass


class MixedModulus(FieldError):
    pass


class DuplicateAbscissa(FieldError):
    pass


def _trial_division(n):
    if n < 4:
        return n >= 2
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def is_probable_prime(n):
    """ Primality test

    Exhaustive below SMALL_PRIME_BOUND, Miller-Rabin with fixed bases above.

    :type n: int
    :rtype: bool
    """
    if n < SMALL_PRIME_BOUND:
        return _trial_division(n)

    for base in MILLER_RABIN_BASES:
        if n % base == 0:
            return False

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    for base in MILLER_RABIN_BASES:
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def previous_prime(bound):
    """ Largest prime strictly below ``bound``

    :param bound: an int > 2
    :rtype: int
    """
    if bound <= 2:
        raise InvalidModulus('There is no prime below {}'.format(bound))
    candidate = bound - 1
    if candidate > 2 and candidate % 2 == 0:
        candidate -= 1
    while not is_probable_prime(candidate):
        candidate -= 2
    return candidate


class FieldParams:
    """ GF(p) description: the modulus and the coefficient byte width
    """

    def __init__(self, p):
        if not isinstance(p, int) or isinstance(p, bool):
            raise InvalidModulus('Modulus must be an int, got {!r}'.format(p))
        if p < 2 or not is_probable_prime(p):
            raise InvalidModulus('{} is not a prime'.format(p))
        self._p = p
        self._w = max(1, (p.bit_length() + 7) // 8)

    @classmethod
    def from_bits(cls, bits):
        """ Field over the largest prime below 2**bits
        """
        if bits < 2:
            raise InvalidModulus('A prime needs at least 2 bits')
        return cls(previous_prime(2 ** bits))

    @property
    def p(self):
        return self._p

    @property
    def w(self):
        return self._w

    @property
    def bit_length(self):
        return self._p.bit_length()

    def element(self, value):
        return FieldElement(self, value)

    def __eq__(self, other):
        return isinstance(other, FieldParams) and other.p == self.p

    def __hash__(self):
        return hash(('FieldParams', self._p))

    def __repr__(self):
        return '<FieldParams p={} w={}>'.format(self._p, self._w)


class FieldElement:
    """ Value of GF(p), always reduced into [0, p)
    """

    __slots__ = ('_params', '_value')

    def __init__(self, params, value):
        if isinstance(value, FieldElement):
            value = value.value
        self._params = params
        self._value = value % params.p

    @property
    def params(self):
        return self._params

    @property
    def value(self):
        return self._value

    def _coerce(self, other):
        if isinstance(other, int):
            return FieldElement(self._params, other)
        if other.params != self._params:
            raise MixedModulus('{} and {} are not in the same field'.format(
                self, other))
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self._params, self._value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElement(self._params, self._value - other.value)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElement(self._params, self._value * other.value)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self._params, -self._value)

    def inverse(self):
        return fe_inv(self)

    def to_bytes(self):
        """ w-octet big-endian form """
        return self._value.to_bytes(self._params.w, 'big')

    def __int__(self):
        return self._value

    def __index__(self):
        return self._value

    def __eq__(self, other):
        return (isinstance(other, FieldElement)
                and other.params == self._params
                and other.value == self._value)

    def __hash__(self):
        return hash((self._params.p, self._value))

    def __repr__(self):
        return '{}'.format(self._value)


class SecretPolynomial:
    """ Polynomial a_0 + a_1 x + ... + a_n x^n over one field

    Coefficients are stored lowest degree first. Trailing zero
    coefficients are kept: the length is the number of points the
    polynomial was interpolated from.
    """

    def __init__(self, coeffs):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise FieldError('A polynomial needs at least one coefficient')
        params = coeffs[0].params
        for c in coeffs[1:]:
            if c.params != params:
                raise MixedModulus('Coefficients span several fields')
        self._coeffs = coeffs

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def params(self):
        return self._coeffs[0].params

    @property
    def degree(self):
        return len(self._coeffs) - 1

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def __eq__(self, other):
        return (isinstance(other, SecretPolynomial)
                and other.coeffs == self._coeffs)

    def __hash__(self):
        return hash(self._coeffs)

    def __repr__(self):
        return '<SecretPolynomial {}>'.format(
            [c.value for c in self._coeffs])


def fe_inv(a):
    """ Multiplicative inverse, by extended Euclid

    :type a: FieldElement
    :rtype: FieldElement
    :raises ZeroInverse: for zero
    """
    p = a.params.p
    if a.value == 0:
        raise ZeroInverse('0 has no inverse modulo {}'.format(p))

    old_r, r = a.value, p
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    return FieldElement(a.params, old_s)


def poly_eval_horner(poly, x, meter=None):
    """ Evaluate a_0 + x(a_1 + x(a_2 + ...))

    Uses exactly len(poly) - 1 field multiplications, reported to ``meter``.

    :type poly: SecretPolynomial
    :type x: FieldElement
    :rtype: FieldElement
    """
    if x.params != poly.params:
        raise MixedModulus('Cannot evaluate over p={} at a point of p={}'.format(
            poly.params.p, x.params.p))
    p = poly.params.p
    coeffs = poly.coeffs

    acc = coeffs[-1].value
    for c in reversed(coeffs[:-1]):
        acc = (acc * x.value + c.value) % p
        count(meter, FIELD_MULTS)

    return FieldElement(poly.params, acc)


def lagrange_interpolate(points, meter=None):
    """ The unique polynomial of degree <= n through n+1 points

    Textbook Lagrange basis accumulation over the master polynomial
    prod(X - x_j), each basis numerator obtained by synthetic division.
    Multiplications (inversions excluded) are reported to ``meter``.

    :param points: a list of (abscissa, ordinate) FieldElement couples
    :rtype: SecretPolynomial
    :raises DuplicateAbscissa: if two abscissas coincide
    """
    points = list(points)
    if not points:
        raise FieldError('Interpolation needs at least one point')

    params = points[0][0].params
    for x, y in points:
        if x.params != params or y.params != params:
            raise MixedModulus('Points span several fields')

    p = params.p
    xs = [x.value for x, _ in points]
    ys = [y.value for _, y in points]

    seen = set()
    for x in xs:
        if x in seen:
            raise DuplicateAbscissa('Abscissa {} appears twice'.format(x))
        seen.add(x)

    k = len(points)
    mults = 0

    # prod(X - x_j), lowest degree first, k + 1 coefficients
    master = [1]
    for xj in xs:
        nxt = [0] * (len(master) + 1)
        for i, c in enumerate(master):
            nxt[i] = (nxt[i] - xj * c) % p
            nxt[i + 1] = (nxt[i + 1] + c) % p
        mults += len(master)
        master = nxt

    result = [0] * k
    for xi, yi in zip(xs, ys):
        quotient = [0] * k
        carry = 0
        for i in range(k, 0, -1):
            carry = (master[i] + xi * carry) % p
            quotient[i - 1] = carry

        denominator = 1
        for xj in xs:
            if xj != xi:
                denominator = denominator * (xi - xj) % p

        scale = yi * fe_inv(FieldElement(params, denominator)).value % p
        for j in range(k):
            result[j] = (result[j] + scale * quotient[j]) % p
        mults += k + (k - 1) + 1 + k

    count(meter, FIELD_MULTS, mults)
    logger.debug('Interpolated {} points over a {}-bit field'.format(
        k, params.bit_length))
    return SecretPolynomial(FieldElement(params, c) for c in result)


def sample_field_element(params, rng, exclude_zero=False):
    """ Uniform element of GF(p), or of GF(p)* if ``exclude_zero``

    Rejection sampling over bit_length(p)-bit integers, no modulo bias.

    :param rng: a seeded random.Random (anything with getrandbits)
    :rtype: FieldElement
    """
    low = 1 if exclude_zero else 0
    bits = params.bit_length
    while True:
        candidate = rng.getrandbits(bits)
        if low <= candidate < params.p:
            return FieldElement(params, candidate)

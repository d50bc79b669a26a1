"""Exact arithmetic in GF(q) for prime fields and prime-power extension fields.

Elements are canonical integers in [0, q).  For an extension field GF(p^d)
the base-p digits of an element are the coefficients of a polynomial over
GF(p), lowest degree first.  The modulus is always the irreducible monic
polynomial of degree d with the smallest integer encoding, and the
designated primitive element is the smallest element of full multiplicative
order, so constructing the same q twice yields bit-identical tables.
"""

from __future__ import annotations

from functools import lru_cache

MAX_FIELD_SIZE = 1 << 16


class NotPrimePowerError(ValueError):
    """Raised when a requested field size is not a prime power."""


class FieldTooLargeError(ValueError):
    """Raised when a requested field size exceeds MAX_FIELD_SIZE."""


def _prime_factors(x: int) -> list[int]:
    factors = []
    d = 2
    while d * d <= x:
        if x % d == 0:
            factors.append(d)
            while x % d == 0:
                x //= d
        d += 1
    if x > 1:
        factors.append(x)
    return factors


def _factor_prime_power(q: int) -> tuple[int, int]:
    """Return (p, d) with q = p**d, or raise NotPrimePowerError."""
    if q < 2:
        raise NotPrimePowerError(f"field size must be >= 2, got {q}")
    factors = _prime_factors(q)
    if len(factors) != 1:
        raise NotPrimePowerError(f"{q} is not a prime power (factors {factors})")
    p = factors[0]
    d = 0
    while q > 1:
        q //= p
        d += 1
    return p, d


def _int_to_digits(value: int, p: int, width: int) -> list[int]:
    digits = []
    for _ in range(width):
        value, r = divmod(value, p)
        digits.append(r)
    return digits


def _digits_to_int(digits: list[int], p: int) -> int:
    value = 0
    for c in reversed(digits):
        value = value * p + c
    return value


def _poly_divmod(num: list[int], den: list[int], p: int) -> tuple[list[int], list[int]]:
    """Quotient and remainder of polynomial division over GF(p), digits low-first."""
    num = list(num)
    dlead = len(den) - 1
    while den[dlead] == 0:
        dlead -= 1
    inv_lead = pow(den[dlead], p - 2, p) if p > 2 else 1
    quot = [0] * max(1, len(num) - dlead)
    for shift in range(len(num) - 1 - dlead, -1, -1):
        coef = (num[shift + dlead] * inv_lead) % p
        if coef == 0:
            continue
        quot[shift] = coef
        for i in range(dlead + 1):
            num[shift + i] = (num[shift + i] - coef * den[i]) % p
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return quot, num


def _poly_is_irreducible(poly: list[int], p: int) -> bool:
    """Exhaustive trial division by every monic polynomial of degree <= deg/2."""
    deg = len(poly) - 1
    if deg < 1 or poly[deg] == 0:
        return False
    for ddeg in range(1, deg // 2 + 1):
        # Enumerate monic polynomials of degree ddeg: low coefficients count
        # through p**ddeg combinations.
        for low in range(p**ddeg):
            den = _int_to_digits(low, p, ddeg) + [1]
            _, rem = _poly_divmod(poly, den, p)
            if rem == [0]:
                return False
    return True


def _smallest_irreducible(p: int, d: int) -> list[int]:
    """Monic irreducible of degree d over GF(p) with smallest integer encoding."""
    for low in range(p**d):
        poly = _int_to_digits(low, p, d) + [1]
        if _poly_is_irreducible(poly, p):
            return poly
    raise AssertionError(f"no irreducible polynomial of degree {d} over GF({p})")


class Field:
    """GF(q) with fixed modulus, primitive element, and full mul/inv tables.

    Immutable after construction; safe to share between threads.  Use the
    cached factory :func:`GF` rather than constructing directly.
    """

    __slots__ = ("q", "characteristic", "degree", "modulus", "primitive", "_exp", "_log")

    def __init__(self, q: int):
        if q > MAX_FIELD_SIZE:
            raise FieldTooLargeError(f"field size {q} exceeds {MAX_FIELD_SIZE}")
        p, d = _factor_prime_power(q)
        self.q = q
        self.characteristic = p
        self.degree = d
        self.modulus = None if d == 1 else tuple(_smallest_irreducible(p, d))
        self.primitive = self._find_primitive()
        self._build_tables()

    # -- construction helpers -------------------------------------------------

    def _raw_mul(self, a: int, b: int) -> int:
        """Table-free multiply, used only while bootstrapping the tables."""
        p = self.characteristic
        if self.degree == 1:
            return (a * b) % p
        if p == 2:
            mod = _digits_to_int(list(self.modulus), 2)
            top = 1 << self.degree
            acc = 0
            while b:
                if b & 1:
                    acc ^= a
                b >>= 1
                a <<= 1
                if a & top:
                    a ^= mod
            return acc
        da = _int_to_digits(a, p, self.degree)
        db = _int_to_digits(b, p, self.degree)
        prod = [0] * (2 * self.degree - 1)
        for i, ca in enumerate(da):
            if ca == 0:
                continue
            for j, cb in enumerate(db):
                prod[i + j] = (prod[i + j] + ca * cb) % p
        _, rem = _poly_divmod(prod, list(self.modulus), p)
        rem += [0] * (self.degree - len(rem))
        return _digits_to_int(rem, p)

    def _raw_pow(self, a: int, e: int) -> int:
        acc = 1
        base = a
        while e:
            if e & 1:
                acc = self._raw_mul(acc, base)
            base = self._raw_mul(base, base)
            e >>= 1
        return acc

    def _find_primitive(self) -> int:
        order = self.q - 1
        if order == 1:
            return 1
        checks = [order // f for f in _prime_factors(order)]
        for g in range(2, self.q):
            if all(self._raw_pow(g, e) != 1 for e in checks):
                return g
        raise AssertionError(f"no primitive element in GF({self.q})")

    def _build_tables(self) -> None:
        order = self.q - 1
        exp = [1] * order
        log = [0] * self.q
        val = 1
        for i in range(order):
            exp[i] = val
            log[val] = i
            val = self._raw_mul(val, self.primitive)
        if val != 1:
            raise AssertionError("primitive element does not have full order")
        self._exp = exp
        self._log = log

    # -- arithmetic ------------------------------------------------------------

    def validate(self, a: int) -> int:
        if not isinstance(a, int) or not 0 <= a < self.q:
            raise ValueError(f"{a!r} is not an element of GF({self.q})")
        return a

    def add(self, a: int, b: int) -> int:
        p = self.characteristic
        if self.degree == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        out = 0
        mult = 1
        while a or b:
            out += ((a % p + b % p) % p) * mult
            a //= p
            b //= p
            mult *= p
        return out

    def neg(self, a: int) -> int:
        p = self.characteristic
        if self.degree == 1:
            return (-a) % p
        if p == 2:
            return a
        out = 0
        mult = 1
        while a:
            out += ((p - a % p) % p) * mult
            a //= p
            mult *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"inverse of 0 in GF({self.q})")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError(f"division by 0 in GF({self.q})")
        if a == 0:
            return 0
        return self._exp[(self._log[a] - self._log[b]) % (self.q - 1)]

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError(f"0 ** {e} in GF({self.q})")
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def elements(self):
        """Deterministic enumeration 0, 1, g, g^2, ... of all q elements."""
        yield 0
        yield from self._exp

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative order")
        from math import gcd

        return (self.q - 1) // gcd(self._log[a], self.q - 1)

    # -- misc -------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "modulus": list(self.modulus) if self.modulus else None,
            "primitive": self.primitive,
        }

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("Field", self.q))


@lru_cache(maxsize=None)
def GF(q: int) -> Field:
    """Cached field factory; the same q always returns the same object."""
    return Field(q)

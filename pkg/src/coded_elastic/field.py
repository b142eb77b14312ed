"""Exact arithmetic in a prime field GF(p)."""

from __future__ import annotations

from dataclasses import dataclass

# Products of two reduced values must fit in a double-width native integer,
# so CPython never promotes the hot multiply path to multi-limb bignums.
MAX_MODULUS = 1 << 31


class FieldMismatchError(ValueError):
    """Operands belong to fields with different moduli."""


def is_prime(n: int) -> bool:
    """Trial-division primality check; adequate for n < 2**31."""
    if n < 2:
        return False
    for d in (2, 3):
        if n % d == 0:
            return n == d
    d = 5
    while d * d <= n:
        if n % d == 0 or n % (d + 2) == 0:
            return False
        d += 6
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field of integers modulo a prime p, with 2 <= p < 2**31."""

    modulus: int

    def __post_init__(self) -> None:
        if not isinstance(self.modulus, int) or not 2 <= self.modulus < MAX_MODULUS:
            raise ValueError(f"modulus must be an integer in [2, 2**31): {self.modulus!r}")
        if not is_prime(self.modulus):
            raise ValueError(f"modulus is not prime: {self.modulus}")

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value % self.modulus)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def __repr__(self) -> str:
        return f"GF({self.modulus})"


@dataclass(frozen=True)
class FieldElement:
    """A value in [0, p), always reduced modulo p.

    Immutable; arithmetic between elements of different fields raises
    FieldMismatchError rather than silently mixing moduli.
    """

    field: PrimeField
    value: int

    def _coerce(self, other: "FieldElement | int") -> "FieldElement":
        if isinstance(other, int):
            return self.field.element(other)
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")
        if other.field.modulus != self.field.modulus:
            raise FieldMismatchError(
                f"mixed moduli: {self.field.modulus} vs {other.field.modulus}"
            )
        return other

    def __add__(self, other: "FieldElement | int") -> "FieldElement":
        other = self._coerce(other)
        return FieldElement(self.field, (self.value + other.value) % self.field.modulus)

    __radd__ = __add__

    def __sub__(self, other: "FieldElement | int") -> "FieldElement":
        other = self._coerce(other)
        return FieldElement(self.field, (self.value - other.value) % self.field.modulus)

    def __rsub__(self, other: int) -> "FieldElement":
        return self._coerce(other) - self

    def __mul__(self, other: "FieldElement | int") -> "FieldElement":
        other = self._coerce(other)
        return FieldElement(self.field, (self.value * other.value) % self.field.modulus)

    __rmul__ = __mul__

    def __truediv__(self, other: "FieldElement | int") -> "FieldElement":
        return self * self._coerce(other).inverse()

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, -self.value % self.field.modulus)

    def __pow__(self, exponent: int) -> "FieldElement":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        p = self.field.modulus
        return FieldElement(self.field, pow(self.value, exponent, p))

    def inverse(self) -> "FieldElement":
        # Fermat: a^(p-2) is the inverse of a != 0.
        if self.value == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        p = self.field.modulus
        return FieldElement(self.field, pow(self.value, p - 2, p))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.modulus})"

"""PSL(2,R) matrix algebra over exact rationals or floats.

Matrices are stored as 2x2 entries ``a b / c d`` acting on the upper half-plane by
``z -> (a z + b) / (c z + d)``.  Entries are :class:`fractions.Fraction` under the
exact backend and ``float`` under the approximate one; the two are never mixed in a
single computation.  Under the approximate backend every sign decision goes through
:func:`compare`, which refuses to decide inside the tolerance band.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, TypeVar, Union

from config import TOLERANCE

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]

# Relative slack allowed on the determinant of a float matrix.
_DET_SLACK = 1e-9


class FourPSError(Exception):
    """Base class for every error raised by the decision engine."""


class ToleranceBandError(FourPSError):
    """An approximate comparison fell inside the tolerance band."""


class InvalidMatrixError(FourPSError):
    """A matrix violates the determinant constraint of its type."""


class IdentityError(FourPSError):
    """An operation that needs a non-identity element received ±I."""


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

def to_scalar(value: object, exact: bool = True) -> Scalar:
    """Coerce an int, string, float or Fraction to a backend scalar.

    Strings may be integers, finite decimals or ``p/q`` rationals.  Under the exact
    backend they are parsed without rounding, and floats are read through their
    shortest decimal representation.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"non-finite scalar: {value!r}")
    if exact:
        if isinstance(value, float):
            return Fraction(repr(value))
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value.strip())
        raise TypeError(f"cannot read {value!r} as a rational")
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    if isinstance(value, (int, float, Fraction)):
        return float(value)
    raise TypeError(f"cannot read {value!r} as a float")


def is_exact(value: object) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def compare(a: Scalar, b: Scalar, tolerance: float = TOLERANCE) -> int:
    """Return -1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``.

    Exact operands are compared exactly.  For floats, a difference within
    ``tolerance`` raises :class:`ToleranceBandError` instead of guessing.
    """
    diff = a - b
    if is_exact(diff):
        return (diff > 0) - (diff < 0)
    if abs(diff) <= tolerance:
        raise ToleranceBandError(f"|{a!r} - {b!r}| is within the tolerance band {tolerance}")
    return 1 if diff > 0 else -1


def scalar_to_str(value: Scalar) -> str:
    """Render a scalar for output: ``p/q`` for rationals, ``repr`` for floats."""
    if is_exact(value):
        return str(Fraction(value))
    return repr(float(value))


def rational_sqrt(value: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None when irrational."""
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

class Infinity(Enum):
    """The point at infinity of the boundary circle."""

    POINT = "inf"

    def __repr__(self) -> str:
        return "INFINITY"

    def __str__(self) -> str:
        return "inf"


INFINITY = Infinity.POINT


@dataclass(frozen=True)
class QuadraticPoint:
    """A boundary point ``base + coefficient * sqrt(radicand)`` with irrational root."""

    base: Fraction
    coefficient: Fraction
    radicand: Fraction

    def __float__(self) -> float:
        return float(self.base) + float(self.coefficient) * math.sqrt(self.radicand)

    def __str__(self) -> str:
        return f"{self.base} + ({self.coefficient})*sqrt({self.radicand})"


@dataclass(frozen=True)
class InteriorPoint:
    """A point of the upper half-plane, kept as its real part and squared height."""

    real: Scalar
    imag_squared: Scalar

    @property
    def imag(self) -> float:
        return math.sqrt(float(self.imag_squared))

    def __str__(self) -> str:
        return f"{scalar_to_str(self.real)} + i*sqrt({scalar_to_str(self.imag_squared)})"


BoundaryPoint = Union[Fraction, float, QuadraticPoint, Infinity]


class IsometryClass(str, Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    IDENTITY = "identity"


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Matrix2:
    """An invertible 2x2 matrix, compared up to a global sign.

    Products of two :class:`UnimodularMatrix` values stay unimodular; anything
    involving a plain ``Matrix2`` (a conjugator, typically) is a ``Matrix2``.
    """

    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
                raise InvalidMatrixError(f"entry {name}={value!r} is not a scalar")
            if isinstance(value, int):
                object.__setattr__(self, name, Fraction(value))
        self._check_determinant()

    def _check_determinant(self) -> None:
        if self.det == 0:
            raise InvalidMatrixError(f"singular matrix {self!r}")

    @classmethod
    def of(cls, a: object, b: object, c: object, d: object, exact: bool = True):
        return cls(*(to_scalar(v, exact) for v in (a, b, c, d)))

    @property
    def entries(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.a, self.b, self.c, self.d)

    @property
    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> Scalar:
        return self.a + self.d

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.entries)

    def __mul__(self, other: Matrix2) -> Matrix2:
        if not isinstance(other, Matrix2):
            return NotImplemented
        cls = UnimodularMatrix if isinstance(self, UnimodularMatrix) and isinstance(other, UnimodularMatrix) else Matrix2
        return cls(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> Matrix2:
        return type(self)(-self.a, -self.b, -self.c, -self.d)

    def adjugate(self) -> Matrix2:
        return type(self)(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> Matrix2:
        if isinstance(self, UnimodularMatrix):
            return self.adjugate()
        det = self.det
        return Matrix2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def scaled(self, factor: Scalar) -> Matrix2:
        return Matrix2(self.a * factor, self.b * factor, self.c * factor, self.d * factor)

    def apply(self, point: BoundaryPoint) -> BoundaryPoint:
        """Möbius action on a rational, float or infinite boundary point."""
        if point is INFINITY:
            return INFINITY if self.c == 0 else self.a / self.c
        if isinstance(point, QuadraticPoint):
            raise TypeError("quadratic points are not acted on")
        denominator = self.c * point + self.d
        if denominator == 0:
            return INFINITY
        return (self.a * point + self.b) / denominator

    def __call__(self, point: BoundaryPoint) -> BoundaryPoint:
        return self.apply(point)

    def canonical(self) -> Matrix2:
        """The representative whose first nonzero entry is positive."""
        lead = next(v for v in self.entries if v != 0)
        return -self if lead < 0 else self

    def projective(self) -> Matrix2:
        """The scalar multiple whose first nonzero entry is 1."""
        lead = next(v for v in self.entries if v != 0)
        if lead == 1:
            return Matrix2(*self.entries)
        return self.scaled(1 / lead)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix2):
            return NotImplemented
        return self.canonical().entries == other.canonical().entries

    def __hash__(self) -> int:
        return hash(self.canonical().entries)

    def __repr__(self) -> str:
        a, b, c, d = (scalar_to_str(v) for v in self.entries)
        return f"{type(self).__name__}([[{a}, {b}], [{c}, {d}]])"


@dataclass(frozen=True, eq=False)
class UnimodularMatrix(Matrix2):
    """A determinant-one matrix representing an element of PSL(2,R)."""

    def _check_determinant(self) -> None:
        det = self.det
        if is_exact(det):
            if det != 1:
                raise InvalidMatrixError(f"determinant {det} != 1 for {self!r}")
            return
        scale = max(1.0, max(abs(float(v)) for v in self.entries) ** 2)
        if abs(det - 1) > _DET_SLACK * scale:
            raise InvalidMatrixError(f"determinant {det!r} != 1 for {self!r}")

    __eq__ = Matrix2.__eq__
    __hash__ = Matrix2.__hash__


IDENTITY = UnimodularMatrix(1, 0, 0, 1)


def identity_like(M: Matrix2) -> UnimodularMatrix:
    """The identity in the backend of ``M``."""
    return IDENTITY if M.exact else UnimodularMatrix(1.0, 0.0, 0.0, 1.0)


def trace(M: Matrix2) -> Scalar:
    return M.trace


def is_identity(M: Matrix2) -> bool:
    """True when ``M`` is ±I exactly."""
    return M.b == 0 and M.c == 0 and M.a == M.d


def classify(M: Matrix2, tolerance: float = TOLERANCE) -> IsometryClass:
    """Classify by |trace| against 2.

    >>> classify(UnimodularMatrix(1, 2, 0, 1))
    <IsometryClass.PARABOLIC: 'parabolic'>
    """
    if is_identity(M):
        return IsometryClass.IDENTITY
    order = compare(abs(M.trace), 2, tolerance)
    if order < 0:
        return IsometryClass.ELLIPTIC
    if order == 0:
        return IsometryClass.PARABOLIC
    return IsometryClass.HYPERBOLIC


def fixed_points(M: Matrix2, tolerance: float = TOLERANCE) -> tuple:
    """Fixed points: one boundary point (parabolic), two (hyperbolic) or one interior point (elliptic)."""
    kind = classify(M, tolerance)
    if kind is IsometryClass.IDENTITY:
        raise IdentityError("the identity fixes every point")
    a, b, c, d = M.entries
    if c == 0:
        if kind is IsometryClass.PARABOLIC:
            return (INFINITY,)
        # a != d here; the finite point solves (a - d) z + b = 0
        return (INFINITY, b / (d - a))
    centre = (a - d) / (2 * c)
    if kind is IsometryClass.PARABOLIC:
        return (centre,)
    discriminant = M.trace * M.trace - 4
    if kind is IsometryClass.ELLIPTIC:
        return (InteriorPoint(centre, -discriminant / (4 * c * c)),)
    half_width = 1 / (2 * abs(c))
    if not M.exact:
        root = math.sqrt(discriminant) * half_width
        return (centre - root, centre + root)
    root = rational_sqrt(Fraction(discriminant))
    if root is not None:
        return (centre - root * half_width, centre + root * half_width)
    return (
        QuadraticPoint(Fraction(centre), -Fraction(half_width), Fraction(discriminant)),
        QuadraticPoint(Fraction(centre), Fraction(half_width), Fraction(discriminant)),
    )


MatrixT = TypeVar("MatrixT", bound=Matrix2)


def conjugate(M: MatrixT, X: Matrix2) -> MatrixT:
    """Return ``X M X^-1``, keeping the class of ``M``."""
    product = X * M * X.adjugate()
    det = X.det
    return type(M)(product.a / det, product.b / det, product.c / det, product.d / det)


def power(M: Matrix2, n: int) -> Matrix2:
    if n < 0:
        return power(M.inverse(), -n)
    result = identity_like(M)
    base = M
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    return result


def commutator(M1: Matrix2, M2: Matrix2) -> Matrix2:
    """``[M1, M2] = M1 M2 M1^-1 M2^-1``."""
    return M1 * M2 * M1.inverse() * M2.inverse()


def coherently_oriented(M1: Matrix2, M2: Matrix2, tolerance: float = TOLERANCE) -> bool:
    """True when ``|tr(M1 M2)| < |tr(M1^-1 M2)|``."""
    if is_identity(M1) or is_identity(M2):
        raise IdentityError("orientation is undefined for the identity")
    return compare(abs((M1 * M2).trace), abs((M1.inverse() * M2).trace), tolerance) < 0


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------

GENERATOR_NAMES = ("A", "B", "C")

_TOKEN = re.compile(r"\s*([A-Ca-c])(?:\s*\^\s*([+-]?\d+))?\s*")


@dataclass(frozen=True)
class Word:
    """A freely reduced word in A, B, C, stored as ``(letter, exponent)`` syllables."""

    syllables: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        previous = None
        for name, exponent in self.syllables:
            if name not in GENERATOR_NAMES:
                raise ValueError(f"unknown generator {name!r}")
            if not isinstance(exponent, int) or exponent == 0:
                raise ValueError(f"invalid exponent {exponent!r}")
            if name == previous:
                raise ValueError(f"word is not freely reduced: {self.syllables!r}")
            previous = name

    @classmethod
    def reduce(cls, syllables: Iterable[tuple[str, int]]) -> Word:
        stack: list[list] = []
        for name, exponent in syllables:
            if stack and stack[-1][0] == name:
                stack[-1][1] += exponent
                if stack[-1][1] == 0:
                    stack.pop()
            elif exponent:
                stack.append([name, exponent])
        return cls(tuple((n, e) for n, e in stack))

    @classmethod
    def generator(cls, name: str, exponent: int = 1) -> Word:
        return cls.reduce([(name, exponent)])

    @classmethod
    def parse(cls, text: str) -> Word:
        """Parse ``"ABC"``, ``"A^-1 B^2"`` or ``"aBc"`` (lower case means inverse)."""
        text = text.strip()
        if text in ("", "1", "e", "I"):
            return cls()
        syllables = []
        position = 0
        while position < len(text):
            match = _TOKEN.match(text, position)
            if not match or match.end() == position:
                raise ValueError(f"cannot parse word {text!r} at position {position}")
            letter, exponent = match.group(1), int(match.group(2) or 1)
            if letter.islower():
                letter, exponent = letter.upper(), -exponent
            syllables.append((letter, exponent))
            position = match.end()
        return cls.reduce(syllables)

    def __mul__(self, other: Word) -> Word:
        if not isinstance(other, Word):
            return NotImplemented
        return Word.reduce(self.syllables + other.syllables)

    def inverse(self) -> Word:
        return Word(tuple((n, -e) for n, e in reversed(self.syllables)))

    __invert__ = inverse

    def __pow__(self, n: int) -> Word:
        if n < 0:
            return self.inverse() ** -n
        if n and len(self.syllables) == 1:
            (name, exponent), = self.syllables
            return Word(((name, exponent * n),))
        result = Word()
        for _ in range(n):
            result = result * self
        return result

    def conjugated_by(self, other: Word) -> Word:
        """``other self other^-1``."""
        return other * self * other.inverse()

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def __iter__(self) -> Iterator[tuple[str, int]]:
        return iter(self.syllables)

    def letters(self) -> str:
        """Letter string with lower case for inverses, e.g. ``"AbC"``."""
        return "".join((n if e > 0 else n.lower()) * abs(e) for n, e in self.syllables)

    def substitute(self, mapping: Mapping[str, Word]) -> Word:
        """Replace every generator by a word and reduce."""
        result = Word()
        for name, exponent in self.syllables:
            result = result * mapping[name] ** exponent
        return result

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        return "".join(n if e == 1 else f"{n}^{e}" for n, e in self.syllables)


def evaluate_word(word: Word, generators: Sequence[Matrix2]) -> Matrix2:
    """Multiply out ``word`` with ``generators`` standing for A, B, C."""
    result = identity_like(generators[0])
    for name, exponent in word:
        result = result * power(generators[GENERATOR_NAMES.index(name)], exponent)
    return result


# ---------------------------------------------------------------------------
# Nielsen moves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Switch:
    """Swap positions i and j (1-based)."""

    i: int
    j: int


@dataclass(frozen=True)
class Invert:
    """Replace position i by its inverse."""

    i: int


@dataclass(frozen=True)
class Twist:
    """Replace position j by ``g_i g_j``."""

    i: int
    j: int


NielsenMove = Union[Switch, Invert, Twist]

T = TypeVar("T")


def _check_positions(size: int, *positions: int) -> None:
    if any(not 1 <= p <= size for p in positions):
        raise ValueError(f"positions {positions} out of range 1..{size}")
    if len(set(positions)) != len(positions):
        raise ValueError(f"positions {positions} must be distinct")


def nielsen_move(generators: Sequence[T], move: NielsenMove) -> tuple[T, ...]:
    """Apply one elementary Nielsen move to a tuple of matrices or words."""
    items = list(generators)
    match move:
        case Switch(i, j):
            _check_positions(len(items), i, j)
            items[i - 1], items[j - 1] = items[j - 1], items[i - 1]
        case Invert(i):
            _check_positions(len(items), i)
            items[i - 1] = items[i - 1].inverse()
        case Twist(i, j):
            _check_positions(len(items), i, j)
            items[j - 1] = items[i - 1] * items[j - 1]
        case _:
            raise TypeError(f"not a Nielsen move: {move!r}")
    return tuple(items)

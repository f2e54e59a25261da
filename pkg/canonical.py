"""Normal form for three parabolics and the conjugation calculus on it.

In normal form ``A`` translates by 2, ``B`` fixes 0 and ``C`` fixes ``x > 0``:

    A = [[1, 2], [0, 1]]
    B = [[1, 0], [-2/y, 1]]
    C = [[1 - 2x/z, 2x^2/z], [-2/z, 1 + 2x/z]]

``y`` and ``z`` are the Ford strengths of ``B`` and ``C`` (their isometric circles
have radius ``y/2`` and ``z/2``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from config import TOLERANCE
from moebius import (
    IDENTITY,
    INFINITY,
    BoundaryPoint,
    FourPSError,
    IsometryClass,
    Matrix2,
    Scalar,
    ToleranceBandError,
    UnimodularMatrix,
    classify,
    compare,
    conjugate,
    fixed_points,
    is_exact,
    power,
    scalar_to_str,
    to_scalar,
)

logger = logging.getLogger(__name__)


class NotParabolicError(FourPSError):
    """An input generator is not parabolic."""


class ElementaryConfigurationError(FourPSError):
    """Two input generators share a fixed point."""


class NonPositiveCoordinateError(FourPSError):
    """A triple coordinate is zero or negative."""


class NotNormalizedError(FourPSError):
    """Matrices are not in normal form."""


@dataclass(frozen=True)
class ParabolicTriple:
    x: Scalar
    y: Scalar
    z: Scalar

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if isinstance(value, int) and not isinstance(value, bool):
                value = to_scalar(value)
                object.__setattr__(self, name, value)
            if not value > 0:
                raise NonPositiveCoordinateError(f"{name} = {value} must be positive")

    @classmethod
    def parse(cls, x: object, y: object, z: object, exact: bool = True) -> ParabolicTriple:
        return cls(to_scalar(x, exact), to_scalar(y, exact), to_scalar(z, exact))

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in (self.x, self.y, self.z))

    def as_strings(self) -> list[str]:
        return [scalar_to_str(v) for v in (self.x, self.y, self.z)]

    def __str__(self) -> str:
        return "(" + ", ".join(self.as_strings()) + ")"


class Normalization(NamedTuple):
    triple: ParabolicTriple
    conjugator: Matrix2
    # input index used for A, B, C
    order: tuple[int, int, int]
    # whether the conjugated input had to be inverted to reach normal form
    inverted: tuple[bool, bool, bool]


# ---------------------------------------------------------------------------
# Normal form
# ---------------------------------------------------------------------------

def matrices_from_triple(t: ParabolicTriple) -> tuple[UnimodularMatrix, UnimodularMatrix, UnimodularMatrix]:
    x, y, z = t.x, t.y, t.z
    one = 1 if t.exact else 1.0
    A = UnimodularMatrix(one, 2 * one, 0 * one, one)
    B = UnimodularMatrix(one, 0 * one, -2 / y, one)
    C = UnimodularMatrix(one - 2 * x / z, 2 * x * x / z, -2 / z, one + 2 * x / z)
    return A, B, C


def _close(u: Scalar, v: Scalar, tolerance: float) -> bool:
    if is_exact(u) and is_exact(v):
        return u == v
    return abs(u - v) <= tolerance * max(1.0, abs(float(u)), abs(float(v)))


def _same_entries(M: Matrix2, N: Matrix2, tolerance: float) -> bool:
    return all(_close(p, q, tolerance) for p, q in zip(M.entries, N.entries))


def read_triple(
    A: Matrix2, B: Matrix2, C: Matrix2, tolerance: float = TOLERANCE
) -> ParabolicTriple:
    """Read ``(x, y, z)`` off matrices that are already in normal form."""
    if B.c == 0 or C.c == 0:
        raise NotNormalizedError("B and C must move infinity")
    y = -2 / B.c
    z = -2 / C.c
    x = (C.a - C.d) / (2 * C.c)
    try:
        t = ParabolicTriple(x, y, z)
    except NonPositiveCoordinateError as exc:
        raise NotNormalizedError(str(exc)) from exc
    for given, expected, name in zip((A, B, C), matrices_from_triple(t), "ABC"):
        if not _same_entries(given, expected, tolerance):
            raise NotNormalizedError(f"{name} = {given!r} is not in normal form")
    return t


def conjugated_by_b(t: ParabolicTriple, m: int = 1) -> tuple[BoundaryPoint, Scalar]:
    """Fixed point and Ford strength of ``B^m C B^-m``, computed by conjugation."""
    _, B, C = matrices_from_triple(t)
    image = conjugate(C, power(B, m))
    if image.c == 0:
        return INFINITY, 0 * t.z
    return fixed_points(image)[0], 2 / abs(image.c)


# ---------------------------------------------------------------------------
# Normalization of raw input
# ---------------------------------------------------------------------------

def _positive_trace(M: UnimodularMatrix) -> UnimodularMatrix:
    return -M if M.trace < 0 else M


def _parabolic_fixed_point(M: UnimodularMatrix, index: int, tolerance: float) -> BoundaryPoint:
    try:
        kind = classify(M, tolerance)
    except ToleranceBandError:
        # float input: |trace| within the band of 2 reads as parabolic
        kind = IsometryClass.PARABOLIC
    if kind is not IsometryClass.PARABOLIC:
        raise NotParabolicError(f"generator {index} is {kind.value}, not parabolic")
    return INFINITY if M.c == 0 else (M.a - M.d) / (2 * M.c)


def _moving_map(f_a: BoundaryPoint, f_b: BoundaryPoint, one: Scalar) -> Matrix2:
    """A Möbius map sending ``f_a`` to infinity and ``f_b`` to 0."""
    zero = 0 * one
    if f_a is INFINITY:
        return Matrix2(one, -f_b, zero, one)
    if f_b is INFINITY:
        return Matrix2(zero, one, one, -f_a)
    return Matrix2(one, -f_b, one, -f_a)


def _normalize_order(
    raw: Sequence[UnimodularMatrix], order: tuple[int, int, int], tolerance: float
) -> Normalization:
    P, Q, R = (raw[i] for i in order)
    f_a, f_b, f_c = (_parabolic_fixed_point(M, i, tolerance) for M, i in zip((P, Q, R), order))
    points = (f_a, f_b, f_c)
    for i in range(3):
        for j in range(i + 1, 3):
            if points[i] is INFINITY or points[j] is INFINITY:
                same = points[i] is points[j]
            else:
                same = compare(points[i], points[j], tolerance) == 0
            if same:
                raise ElementaryConfigurationError(
                    f"generators {order[i]} and {order[j]} share the fixed point {points[i]}"
                )

    one = 1 if P.exact else 1.0
    moving = _moving_map(f_a, f_b, one)
    shifted = _positive_trace(conjugate(P, moving))
    offset = moving.apply(f_c)
    # scale so A translates by 2 in absolute value and C's fixed point is positive
    scale = 2 / abs(shifted.b)
    if compare(offset, 0, tolerance) < 0:
        scale = -scale
    X = (Matrix2(scale, 0 * one, 0 * one, one) * moving).projective()

    inverted = []
    normal = []
    for M in (P, Q, R):
        image = _positive_trace(conjugate(M, X))
        flip = image.b < 0 if _close(image.c, 0, tolerance) else image.c > 0
        inverted.append(flip)
        normal.append(image.inverse() if flip else image)

    triple = read_triple(*normal, tolerance=tolerance)
    logger.debug("order %s normalizes to %s", order, triple)
    return Normalization(triple, X, order, tuple(inverted))


def _smaller(a: Scalar, b: Scalar, tolerance: float) -> bool:
    try:
        return compare(a, b, tolerance) < 0
    except ToleranceBandError:
        return False


def normalize(
    raw: Sequence[UnimodularMatrix], pick: str = "given", tolerance: float = TOLERANCE
) -> Normalization:
    """Conjugate three parabolics into normal form.

    ``pick="given"`` keeps the input order for A, B, C.  ``pick="smallest_x"`` tries
    each input as A (the remaining two keep their input order) and keeps the
    normalization with the smallest ``x``; ties go to the earlier input.
    """
    if len(raw) != 3:
        raise ValueError(f"expected three generators, got {len(raw)}")
    if pick == "given":
        return _normalize_order(raw, (0, 1, 2), tolerance)
    if pick != "smallest_x":
        raise ValueError(f"unknown pick rule {pick!r}")
    best = None
    for first in range(3):
        rest = tuple(i for i in range(3) if i != first)
        candidate = _normalize_order(raw, (first, *rest), tolerance)
        if best is None or _smaller(candidate.triple.x, best.triple.x, tolerance):
            best = candidate
    return best


def is_identity_conjugator(X: Matrix2) -> bool:
    return X.projective() == IDENTITY

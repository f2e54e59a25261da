"""Isometric circles, Ford strength and ping-pong certificates.

Everything here is measured against the fixed translation ``A = [[1, 2], [0, 1]]``:
an element ``G`` with lower-left entry ``c != 0`` has isometric circle of radius
``1/|c|`` centred at ``-d/c`` and its inverse's circle centred at ``a/c``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from config import TOLERANCE
from moebius import (
    IDENTITY,
    INFINITY,
    BoundaryPoint,
    FourPSError,
    IsometryClass,
    Matrix2,
    Scalar,
    UnimodularMatrix,
    Word,
    classify,
    commutator,
    compare,
    conjugate,
    evaluate_word,
    is_exact,
    scalar_to_str,
)

logger = logging.getLogger(__name__)

TRANSLATION = Fraction(2)


class FixesInfinityError(FourPSError):
    """The element fixes infinity, so it has no isometric circle."""


class EllipticInputError(FourPSError):
    """An operation that needs a non-elliptic element received an elliptic one."""


class MalformedCertificateError(FourPSError):
    """A certificate interval is empty or reversed."""


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A closed boundary interval ``[lo, hi]`` with ``lo < hi``."""

    lo: Scalar
    hi: Scalar

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise MalformedCertificateError(f"interval [{self.lo}, {self.hi}] is empty or reversed")

    @property
    def length(self) -> Scalar:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{scalar_to_str(self.lo)}, {scalar_to_str(self.hi)}]"


@dataclass(frozen=True)
class Geodesic:
    """A hyperbolic geodesic given by its two boundary endpoints."""

    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self) -> None:
        if self.start == self.end:
            raise ValueError(f"geodesic endpoints coincide: {self.start}")

    @property
    def vertical(self) -> bool:
        return self.start is INFINITY or self.end is INFINITY


@dataclass(frozen=True)
class FordData:
    strength: Scalar
    inner_distance: Scalar
    outer_distance: Scalar
    symmetry_center: Scalar
    # (footprint of I(G), footprint of I(G^-1))
    circle_footprints: tuple[Interval, Interval]


@dataclass(frozen=True)
class CertifiedGenerator:
    """A generator of the certified group with its footprint pair.

    ``matrix`` maps the outside of ``footprints[0]`` onto ``footprints[1]``; for
    isometric circles these are the footprints of ``I(G)`` and ``I(G^-1)``.
    """

    name: str
    word: Word
    matrix: UnimodularMatrix
    footprints: tuple[Interval, Interval]


@dataclass(frozen=True)
class PingPongCertificate:
    """Ping-pong data for ``<A, G_1, ..., G_k>`` with ``A`` translating by ``translation``.

    ``word`` fields are written in the letters of the original input triple, and
    ``conjugator`` carries those original matrices onto the ``matrix`` fields.
    """

    translation: Scalar
    strip: Interval | None
    generators: tuple[CertifiedGenerator, ...]
    conjugator: Matrix2 = IDENTITY
    translation_word: Word = field(default_factory=lambda: Word.generator("A"))

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return tuple(iv for g in self.generators for iv in g.footprints)


# ---------------------------------------------------------------------------
# Ford quantities
# ---------------------------------------------------------------------------

def ford_data(G: Matrix2) -> FordData:
    """Ford strength, inner/outer distance and circle footprints of ``G``."""
    a, b, c, d = G.entries
    if c == 0:
        raise FixesInfinityError(f"{G!r} fixes infinity")
    radius = 1 / abs(c)
    abs_trace = abs(a + d)
    return FordData(
        strength=2 * radius,
        inner_distance=(abs_trace - 2) * radius,
        outer_distance=(abs_trace + 2) * radius,
        symmetry_center=(a - d) / (2 * c),
        circle_footprints=(
            Interval(-d / c - radius, -d / c + radius),
            Interval(a / c - radius, a / c + radius),
        ),
    )


def shimizu_violated(G: Matrix2) -> bool:
    """Ford strength above 4 contradicts discreteness together with ``A``."""
    return ford_data(G).strength > 4


def jorgensen_holds(M1: Matrix2, M2: Matrix2, tolerance: float = TOLERANCE) -> bool:
    """``|tr(M1)^2 - 4| + |tr[M1, M2] - 2| >= 1``."""
    total = abs(M1.trace ** 2 - 4) + abs(commutator(M1, M2).trace - 2)
    return compare(total, 1, tolerance) >= 0


def _reject_elliptic(G: Matrix2, tolerance: float) -> None:
    if classify(G, tolerance) is IsometryClass.ELLIPTIC:
        raise EllipticInputError(f"{G!r} is elliptic")


def free_discrete_by_ford(G: Matrix2, tolerance: float = TOLERANCE) -> bool:
    """Sufficient test that ``<A, G>`` is free and discrete: outer distance below 2."""
    _reject_elliptic(G, tolerance)
    return compare(ford_data(G).outer_distance, 2, tolerance) < 0


def products_nonelliptic(G: Matrix2, tolerance: float = TOLERANCE) -> bool:
    """True iff none of ``AG, A^-1 G, G^-1 A, G^-1 A^-1`` is elliptic.

    With the sign of ``G`` chosen so its trace is positive, this is ``|tr - |2c|| >= 2``.
    """
    _reject_elliptic(G, tolerance)
    if G.c == 0:
        raise FixesInfinityError(f"{G!r} fixes infinity")
    t = abs(G.trace)
    return compare(abs(t - 2 * abs(G.c)), 2, tolerance) >= 0


def elliptic_power_exists(G: Matrix2, tolerance: float = TOLERANCE) -> int | None:
    """Find ``n`` with ``A^n G`` elliptic when the Ford strength of ``G`` exceeds 1.

    ``tr(A^n G) = tr(G) + 2nc``, so a strength above 1 (``|2c| < 4``) guarantees some
    step lands in ``(-2, 2)``.  Returns the nonzero ``n`` of least magnitude (positive
    first on ties), or None when the strength is at most 1.
    """
    if G.c == 0:
        raise FixesInfinityError(f"{G!r} fixes infinity")
    if compare(ford_data(G).strength, 1, tolerance) <= 0:
        return None
    step = 2 * G.c
    bound = int(abs(G.trace) / abs(step)) + 2
    for k in range(1, bound + 1):
        for n in (k, -k):
            if compare(abs(G.trace + n * step), 2, tolerance) < 0:
                return n
    return None


# ---------------------------------------------------------------------------
# Ping-pong certificates
# ---------------------------------------------------------------------------

def _placed(intervals: Sequence[Interval], translation: Scalar, start: Scalar) -> list[tuple[Scalar, Scalar]]:
    """Translate each interval so its left end lies in ``[start, start + translation)``."""
    placed = []
    for iv in intervals:
        k = math.floor((iv.lo - start) / translation)
        if k == 0:
            placed.append((iv.lo, iv.hi))
        else:
            placed.append((iv.lo - k * translation, iv.hi - k * translation))
    return sorted(placed, key=lambda pair: pair[0])


def certified_generator(
    name: str, word: Word, matrix: UnimodularMatrix, footprints: tuple[Interval, Interval] | None = None
) -> CertifiedGenerator:
    """A certified generator; the footprints default to the isometric circles of ``matrix``."""
    return CertifiedGenerator(name, word, matrix, footprints or ford_data(matrix).circle_footprints)


def make_certificate(
    generators: Sequence[tuple],
    translation: Scalar = TRANSLATION,
    conjugator: Matrix2 = IDENTITY,
    translation_word: Word | None = None,
    strip: Interval | None = None,
) -> PingPongCertificate:
    """Assemble a certificate from ``(name, word, matrix[, footprints])`` tuples.

    Verification is separate.  Without an explicit ``strip`` the period starts at
    the leftmost footprint reduced into ``[0, translation)``.
    """
    certified = tuple(certified_generator(*item) for item in generators)
    intervals = [iv for g in certified for iv in g.footprints]
    if strip is None and intervals:
        start = min(iv.lo % translation for iv in intervals)
        strip = Interval(start, start + translation)
    return PingPongCertificate(
        translation=translation,
        strip=strip,
        generators=certified,
        conjugator=conjugator,
        translation_word=translation_word or Word.generator("A"),
    )


def _period_mismatch(length: Scalar, translation: Scalar, tolerance: float) -> bool:
    if is_exact(length):
        return length != translation
    return abs(length - translation) > tolerance


def _apart(hi: Scalar, lo: Scalar, tolerance: float) -> bool:
    # shared endpoints are tangencies, even in float arithmetic
    return hi == lo or compare(hi, lo, tolerance) <= 0


def verify_pingpong(cert: PingPongCertificate, tolerance: float = TOLERANCE) -> bool:
    """Check that the footprints have pairwise disjoint interiors on R/(translation)Z.

    Tangent footprints are accepted.  Each footprint must fit in one period.
    """
    translation = cert.translation
    if compare(translation, 0, tolerance) <= 0:
        raise MalformedCertificateError(f"translation length {translation} is not positive")
    if cert.strip is not None and _period_mismatch(cert.strip.length, translation, tolerance):
        raise MalformedCertificateError(f"strip {cert.strip} does not span one period")
    intervals = cert.intervals
    for iv in intervals:
        if not iv.lo < iv.hi:
            raise MalformedCertificateError(f"interval {iv} is reversed")
        if compare(iv.length, translation, tolerance) > 0:
            logger.debug("footprint %s is longer than the period", iv)
            return False
    start = cert.strip.lo if cert.strip is not None else 0 * translation
    placed = _placed(intervals, translation, start)
    for (_, hi), (lo, _) in zip(placed, placed[1:]):
        if not _apart(hi, lo, tolerance):
            logger.debug("footprints overlap near %s", scalar_to_str(lo))
            return False
    if placed and not _apart(placed[-1][1], placed[0][0] + translation, tolerance):
        logger.debug("footprints overlap across the period boundary")
        return False
    return True


def _same_point(p: Scalar, q: Scalar, tolerance: float) -> bool:
    if is_exact(p) and is_exact(q):
        return p == q
    return abs(p - q) <= tolerance * max(1.0, abs(float(p)), abs(float(q)))


def pairs_footprints(g: CertifiedGenerator, tolerance: float = TOLERANCE) -> bool:
    """True iff ``g.matrix`` maps the outside of its first footprint onto its second.

    The endpoints of the first footprint must go to the endpoints of the second and
    infinity must land strictly inside the second.
    """
    source, target = g.footprints
    M = g.matrix
    ends = [M.apply(source.lo), M.apply(source.hi)]
    inner = M.apply(INFINITY)
    if any(e is INFINITY for e in ends) or inner is INFINITY:
        return False
    ends.sort()
    if not (_same_point(ends[0], target.lo, tolerance) and _same_point(ends[1], target.hi, tolerance)):
        return False
    return compare(target.lo, inner, tolerance) < 0 and compare(inner, target.hi, tolerance) < 0


def _same_element(M: Matrix2, N: Matrix2, tolerance: float) -> bool:
    if M.exact and N.exact:
        return M == N
    scale = max(1.0, *(abs(float(v)) for v in M.entries + N.entries))
    return any(
        all(abs(p - sign * q) <= tolerance * scale for p, q in zip(M.entries, N.entries))
        for sign in (1, -1)
    )


def certificate_matches(
    cert: PingPongCertificate, originals: Sequence[UnimodularMatrix], tolerance: float = TOLERANCE
) -> bool:
    """Re-derive every certificate matrix from its word and check its footprint pairing."""
    X = cert.conjugator
    translation = Matrix2(1, cert.translation, 0, 1)
    if not _same_element(conjugate(evaluate_word(cert.translation_word, originals), X), translation, tolerance):
        return False
    for g in cert.generators:
        if not _same_element(conjugate(evaluate_word(g.word, originals), X), g.matrix, tolerance):
            logger.debug("certificate word %s does not evaluate to its matrix", g.word)
            return False
        if not pairs_footprints(g, tolerance):
            logger.debug("%s does not pair its footprints", g.name)
            return False
    return True

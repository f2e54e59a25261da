"""Tests for ford.py isometric circles and ping-pong certificates."""

from __future__ import annotations

from fractions import Fraction

import pytest

from canonical import ParabolicTriple, matrices_from_triple
from ford import (
    CertifiedGenerator,
    EllipticInputError,
    FixesInfinityError,
    Interval,
    MalformedCertificateError,
    PingPongCertificate,
    certificate_matches,
    certified_generator,
    elliptic_power_exists,
    ford_data,
    free_discrete_by_ford,
    jorgensen_holds,
    make_certificate,
    pairs_footprints,
    products_nonelliptic,
    shimizu_violated,
    verify_pingpong,
)
from moebius import (
    IDENTITY,
    IsometryClass,
    ToleranceBandError,
    UnimodularMatrix,
    Word,
    classify,
    commutator,
    conjugate,
    power,
)

A = UnimodularMatrix(1, 2, 0, 1)


def _b(y) -> UnimodularMatrix:
    return UnimodularMatrix(1, 0, -2 / Fraction(y), 1)


def _certificate(t: ParabolicTriple):
    _, B, C = matrices_from_triple(t)
    return make_certificate([("B", Word.parse("B"), B), ("C", Word.parse("C"), C)])


class TestFordData:
    def test_parabolic_footprints(self):
        data = ford_data(_b(Fraction(1, 2)))
        assert data.strength == Fraction(1, 2)
        assert data.inner_distance == 0
        assert data.circle_footprints == (
            Interval(Fraction(0), Fraction(1, 2)),
            Interval(Fraction(-1, 2), Fraction(0)),
        )

    def test_hyperbolic_product(self):
        _, B, C = matrices_from_triple(ParabolicTriple.parse("9/10", "1/2", "1/2"))
        data = ford_data(B * C)
        assert (B * C).trace == Fraction(-274, 25)
        assert (B * C).c == Fraction(32, 5)
        assert data.inner_distance == Fraction(7, 5)
        assert data.outer_distance == Fraction(81, 40)
        assert data.strength == Fraction(5, 16)

    def test_symmetry_center_is_fixed_point_of_parabolic(self):
        _, _, C = matrices_from_triple(ParabolicTriple.parse("1", "1/4", "1/4"))
        assert ford_data(C).symmetry_center == 1

    def test_fixes_infinity(self):
        with pytest.raises(FixesInfinityError):
            ford_data(A)

    def test_shimizu(self):
        assert shimizu_violated(_b(8))
        assert not shimizu_violated(_b(4))


class TestJorgensen:
    def test_holds_for_strength_one(self):
        assert jorgensen_holds(A, _b(1))

    def test_fails_for_large_strength(self):
        """tr[A, B] = 2 + 16/y^2, so y = 8 gives 1/4 < 1."""
        assert not jorgensen_holds(A, _b(8))

    def test_generators_of_running_example(self):
        _, B, _ = matrices_from_triple(ParabolicTriple.parse("1", "1/4", "1/4"))
        assert commutator(A, B).trace - 2 == 256
        assert jorgensen_holds(A, B)

    def test_equal_parabolics_fail(self):
        assert not jorgensen_holds(A, A)
        assert not jorgensen_holds(_b(1), _b(1))

    def test_identity_fails(self):
        assert not jorgensen_holds(IDENTITY, _b(1))

    def test_conjugation_invariant(self, random_unimodular):
        for _ in range(200):
            M1, M2, X = random_unimodular(), random_unimodular(), random_unimodular()
            assert jorgensen_holds(M1, M2) == jorgensen_holds(conjugate(M1, X), conjugate(M2, X))


class TestFreeDiscreteByFord:
    def test_outer_distance_below_two(self):
        G = UnimodularMatrix(1, 1, 32, 33)
        assert ford_data(G).outer_distance == Fraction(9, 8)
        assert free_discrete_by_ford(G)

    def test_boundary_is_not_enough(self):
        assert ford_data(_b(1)).outer_distance == 2
        assert not free_discrete_by_ford(_b(1))

    def test_elliptic_rejected(self):
        with pytest.raises(EllipticInputError):
            free_discrete_by_ford(UnimodularMatrix(0, -1, 1, 0))


class TestProductsNonelliptic:
    def test_examples(self):
        assert products_nonelliptic(UnimodularMatrix(1, 1, 32, 33))
        G = UnimodularMatrix(5, Fraction(-1, 2), 2, 0)
        assert not products_nonelliptic(G)
        assert classify(A.inverse() * G) is IsometryClass.ELLIPTIC
        assert (A.inverse() * G).trace == 1

    def test_agrees_with_direct_classification(self, random_unimodular):
        checked = 0
        while checked < 1000:
            G = random_unimodular()
            if classify(G) is IsometryClass.ELLIPTIC:
                continue
            checked += 1
            Ai, Gi = A.inverse(), G.inverse()
            direct = all(
                classify(P) is not IsometryClass.ELLIPTIC
                for P in (A * G, Ai * G, Gi * A, Gi * Ai)
            )
            assert products_nonelliptic(G) == direct, G

    def test_fixes_infinity(self):
        with pytest.raises(FixesInfinityError):
            products_nonelliptic(UnimodularMatrix(2, 0, 0, Fraction(1, 2)))


class TestEllipticPower:
    def test_example(self):
        G = UnimodularMatrix(2, 1, 1, 1)
        assert elliptic_power_exists(G) == -1
        assert classify(A.inverse() * G) is IsometryClass.ELLIPTIC

    def test_strength_at_most_one(self):
        assert elliptic_power_exists(_b(1)) is None
        _, B, C = matrices_from_triple(ParabolicTriple.parse("9/10", "1/2", "1/2"))
        assert elliptic_power_exists(B * C) is None

    def test_random_strong_elements(self, random_unimodular):
        """Every non-elliptic G with |c| < 2 has an elliptic A^n G."""
        checked = 0
        while checked < 1000:
            G = random_unimodular()
            if abs(G.c) >= 2 or classify(G) is IsometryClass.ELLIPTIC:
                continue
            checked += 1
            n = elliptic_power_exists(G)
            assert n is not None and n != 0
            assert classify(power(A, n) * G) is IsometryClass.ELLIPTIC
            for m in range(1, abs(n)):
                assert classify(power(A, m) * G) is not IsometryClass.ELLIPTIC
                assert classify(power(A, -m) * G) is not IsometryClass.ELLIPTIC

    def test_fixes_infinity(self):
        with pytest.raises(FixesInfinityError):
            elliptic_power_exists(A)


class TestVerifyPingpong:
    def test_disjoint_footprints(self):
        cert = _certificate(ParabolicTriple.parse("1", "1/4", "1/4"))
        assert cert.strip == Interval(Fraction(0), Fraction(2))
        assert verify_pingpong(cert)

    def test_tangent_footprints_accepted(self):
        assert verify_pingpong(_certificate(ParabolicTriple.parse("1", "1/2", "1/2")))

    def test_overlap_rejected(self):
        assert not verify_pingpong(_certificate(ParabolicTriple.parse("9/10", "1/2", "1/2")))

    def test_footprint_longer_than_period(self):
        B = _b(1)
        cert = PingPongCertificate(
            translation=Fraction(2),
            strip=None,
            generators=(
                CertifiedGenerator("G", Word.parse("B"), B, (Interval(Fraction(0), Fraction(3)), Interval(Fraction(3), Fraction(4)))),
            ),
        )
        assert not verify_pingpong(cert)

    def test_empty_certificate(self):
        assert verify_pingpong(PingPongCertificate(Fraction(2), None, ()))

    def test_reversed_interval(self):
        with pytest.raises(MalformedCertificateError):
            Interval(Fraction(1), Fraction(0))

    def test_float_shared_endpoints_are_tangent(self):
        assert verify_pingpong(_certificate(ParabolicTriple.parse(1.0, 0.5, 0.5, exact=False)))

    def test_float_near_tangency_is_indeterminate(self):
        B = _b(1)
        cert = PingPongCertificate(
            translation=Fraction(2),
            strip=None,
            generators=(
                CertifiedGenerator("G", Word.parse("B"), B, (Interval(0.0, 0.5), Interval(0.5 + 1e-15, 1.0))),
            ),
        )
        with pytest.raises(ToleranceBandError):
            verify_pingpong(cert)

    def test_explicit_strip(self):
        cert = make_certificate(
            [("B", Word.parse("B"), _b(1), (Interval(Fraction(0), Fraction(1, 2)), Interval(Fraction(-1, 4), Fraction(0))))],
            strip=Interval(Fraction(-1, 4), Fraction(7, 4)),
        )
        assert cert.strip.lo == Fraction(-1, 4)
        assert verify_pingpong(cert)


class TestCertificateMatches:
    def test_words_reproduce_matrices(self):
        t = ParabolicTriple.parse("1", "1/4", "1/4")
        assert certificate_matches(_certificate(t), matrices_from_triple(t))

    def test_isometric_circles_pair(self):
        _, B, C = matrices_from_triple(ParabolicTriple.parse("1", "1/4", "1/4"))
        assert all(pairs_footprints(g) for g in _certificate(ParabolicTriple.parse("1", "1/4", "1/4")).generators)
        assert pairs_footprints(certified_generator("BC", Word.parse("BC"), B * C))

    def test_shrunk_parabolic_footprints_pair(self):
        """For B fixing 0 with strength y, [0, s] pairs with [B(s), 0] whenever s > y/2."""
        B = _b(1)
        s = Fraction(3, 4)
        footprints = (Interval(Fraction(0), s), Interval(B.apply(s), Fraction(0)))
        assert B.apply(s) == Fraction(-3, 2)
        assert pairs_footprints(certified_generator("B", Word.parse("B"), B, footprints))

    def test_unpaired_footprints_detected(self):
        B = _b(1)
        footprints = (Interval(Fraction(0), Fraction(1)), Interval(Fraction(-1, 4), Fraction(0)))
        assert not pairs_footprints(certified_generator("B", Word.parse("B"), B, footprints))
        t = ParabolicTriple.parse("1", "1/4", "1/4")
        _, B4, C4 = matrices_from_triple(t)
        cert = make_certificate([("B", Word.parse("B"), B4, footprints), ("C", Word.parse("C"), C4)])
        assert not certificate_matches(cert, matrices_from_triple(t))

    def test_wrong_word_detected(self):
        t = ParabolicTriple.parse("1", "1/4", "1/4")
        _, B, C = matrices_from_triple(t)
        cert = make_certificate([("B", Word.parse("C"), B), ("C", Word.parse("C"), C)])
        assert not certificate_matches(cert, matrices_from_triple(t))

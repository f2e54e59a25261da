"""Tests for algorithm.py decision loop."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from unittest.mock import patch

import pytest

from algorithm import (
    AlgorithmConfig,
    CertificateError,
    Degenerate,
    DegenerateKind,
    Discrete,
    EllipticWitness,
    HypothesesFail,
    Phase,
    Undetermined,
    UndeterminedReason,
    audit_holds,
    build_ford_certificate,
    decide,
    e2_chain_holds,
    ford_hypothesis_holds,
    initial_state,
    run_decision,
    short_word_verdict,
    step_A,
    step_D,
    step_E,
    step_S,
    step_d3_holds,
    verdict_failure,
)
from canonical import ParabolicTriple, matrices_from_triple
from ford import Interval, certificate_matches, pairs_footprints, verify_pingpong
from moebius import IsometryClass, Word, classify, evaluate_word, is_identity
from tests.conftest import random_fraction


def _t(x, y, z) -> ParabolicTriple:
    return ParabolicTriple.parse(x, y, z)


class TestAlgorithmConfig:
    def test_defaults(self, cfg):
        assert cfg.epsilon == Fraction(1, 10)
        assert cfg.delta == Fraction(1, 100)
        assert cfg.max_iterations == 10000
        assert cfg.as_dict()["epsilon"] == "1/10"

    @pytest.mark.parametrize("kwargs", [{"epsilon": 0}, {"delta": Fraction(-1)}, {"max_iterations": 0}, {"tolerance": 0.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            AlgorithmConfig(**kwargs)


class TestStepS:
    def test_translates_into_window(self):
        cfg = AlgorithmConfig(epsilon=Fraction(2, 5))
        state = step_S(initial_state(_t("3", "1", "1")), cfg)
        assert state.triple == _t("1", "1", "1")
        assert str(state.words[2]) == "A^-1CA"
        assert state.phase is Phase.A
        assert audit_holds(state)

    def test_two_generator(self, cfg):
        verdict = step_S(initial_state(_t("1", "2", "1")), cfg)
        assert isinstance(verdict, Degenerate)
        assert verdict.kind is DegenerateKind.TWO_GENERATOR
        assert str(verdict.word) == "BCB^-1"
        assert str(verdict.partner) == "A"

    def test_conjugates_by_b_until_z_exceeds_one(self, cfg):
        state = step_S(initial_state(_t("1/2", "3/4", "1/2")), cfg)
        assert state.triple == _t("1/2", "3/4", "9/2")
        assert state.iteration == 1
        assert audit_holds(state)

    def test_normal_position_untouched(self, cfg, quarter_triple):
        state = step_S(initial_state(quarter_triple), cfg)
        assert state.triple == quarter_triple
        assert state.trail == ()


class TestStepA:
    def test_product_traces(self, quarter_triple):
        traces = step_A(initial_state(quarter_triple)).traces()
        assert traces == {"AB": -14, "AC": -14, "BC": -62, "ABC": 34}

    def test_unit_strength_gives_parabolic_ab(self):
        traces = step_A(initial_state(_t("1/2", "1", "1")))
        assert traces.ab.trace == -2


class TestStepD:
    def _run(self, t, cfg):
        state = initial_state(t)
        return step_D(state, step_A(state), cfg)

    def test_elliptic_abc(self, cfg):
        verdict = self._run(_t("9/10", "1/2", "1/2"), cfg)
        assert verdict == EllipticWitness(Word.parse("ABC"), Fraction(46, 25))

    def test_elliptic_bc(self, cfg):
        verdict = self._run(_t("1/2", "51/100", "51/100"), cfg)
        assert isinstance(verdict, EllipticWitness)
        assert str(verdict.word) == "BC"
        assert verdict.trace == Fraction(-4798, 2601)

    def test_power_of_translation(self, cfg):
        verdict = self._run(_t("21/20", "1", "1"), cfg)
        assert verdict == EllipticWitness(Word.parse("A^2BC"), Fraction(-161, 100))

    def test_relation(self, cfg):
        verdict = self._run(_t("1", "1", "1"), cfg)
        assert isinstance(verdict, Degenerate)
        assert verdict.kind is DegenerateKind.RELATION
        assert str(verdict.word) == "ABC"

    def test_discrete(self, cfg, quarter_triple):
        assert isinstance(self._run(quarter_triple, cfg), Discrete)


class TestStepE:
    def test_budget_exhausted(self, cfg, quarter_triple):
        state = replace(initial_state(quarter_triple), iteration=cfg.max_iterations)
        verdict = step_E(state, step_A(state), cfg)
        assert isinstance(verdict, Undetermined)
        assert verdict.reason is UndeterminedReason.BUDGET_EXHAUSTED

    def test_conjugates_c_by_b_when_y_exceeds_x(self, cfg):
        state = initial_state(_t("1/2", "101/200", "1/4"))
        result = step_E(state, step_A(state), cfg)
        assert result.triple == _t("101/198", "101/200", "10201/39204")
        assert result.iteration == 1
        assert result.progress < state.progress
        assert audit_holds(result)

    def test_swaps_when_z_exceeds_y(self, cfg):
        state = initial_state(_t("1", "1/4", "3/4"))
        verdict = step_E(state, step_A(state), cfg)
        assert isinstance(verdict, Discrete)

    def test_decides_in_window(self, cfg, quarter_triple):
        state = initial_state(quarter_triple)
        assert isinstance(step_E(state, step_A(state), cfg), Discrete)


class TestPredicates:
    def test_step_d3(self, quarter_triple):
        assert step_d3_holds(quarter_triple)
        assert step_d3_holds(_t("1", "1/2", "1/2"))
        assert not step_d3_holds(_t("1", "1", "1"))

    def test_ford_hypothesis(self, quarter_triple):
        assert ford_hypothesis_holds(quarter_triple)
        assert not ford_hypothesis_holds(_t("1", "1/2", "1/2"))

    def test_e2_chain_guards(self):
        assert not e2_chain_holds(_t("1", "1/2", "1"))
        assert not e2_chain_holds(_t("21/20", "1/2", "1/4"))


class TestFordCertificate:
    def test_construction_points(self, quarter_triple):
        construction = build_ford_certificate(quarter_triple)
        assert construction.p == Fraction(7, 6)
        assert construction.c_of_p == Fraction(1, 2)
        assert construction.mirror_point == Fraction(-1, 2)
        assert construction.b_image == Fraction(-1, 6)
        assert verify_pingpong(construction.certificate)
        assert len(construction.domain) == 6
        assert construction.certificate.strip == Interval(Fraction(-1, 6), Fraction(11, 6))

    def test_symmetric_strengths(self):
        t = _t("1", "1/3", "1/3")
        construction = build_ford_certificate(t)
        assert construction.c_of_p == t.x * t.y / (t.y + t.z)

    @pytest.mark.parametrize(
        "x, y, z, p, c_of_p, b_image",
        [
            ("5/13", "4/13", "3/13", "10/13", "20/91", "-20/39"),
            ("8/13", "7/13", "3/13", "12/13", "28/65", "-28/39"),
        ],
    )
    def test_unequal_strengths(self, x, y, z, p, c_of_p, b_image):
        """No isometric-circle pair fits here; the footprints chain tangentially instead."""
        t = _t(x, y, z)
        construction = build_ford_certificate(t)
        _, B, C = matrices_from_triple(t)
        assert construction.p == Fraction(p)
        assert construction.c_of_p == Fraction(c_of_p) == C.apply(construction.p)
        assert construction.b_image == Fraction(b_image) == B.apply(construction.c_of_p)
        cert = construction.certificate
        assert verify_pingpong(cert)
        assert certificate_matches(cert, matrices_from_triple(t))
        assert all(pairs_footprints(g) for g in cert.generators)
        span = construction.p - construction.b_image
        assert span == 2 * t.x ** 2 / (2 * t.x - t.y - t.z)
        assert span < 2

    def test_float_footprints_stay_tangent(self):
        t = ParabolicTriple.parse("1", "0.25", "0.25", exact=False)
        cert = build_ford_certificate(t).certificate
        assert verify_pingpong(cert)
        assert all(pairs_footprints(g) for g in cert.generators)

    def test_hypotheses(self):
        with pytest.raises(HypothesesFail):
            build_ford_certificate(_t("1/2", "1", "1/4"))
        with pytest.raises(HypothesesFail):
            build_ford_certificate(_t("1", "1", "1"))

    def test_span_beyond_one_period_means_elliptic_abc(self):
        t = _t("21/20", "1/2", "1/2")
        assert step_d3_holds(t)
        with pytest.raises(HypothesesFail):
            build_ford_certificate(t)
        A, B, C = matrices_from_triple(t)
        assert classify(A * B * C) is IsometryClass.ELLIPTIC

    def test_d3_region_always_certified_or_elliptic(self, random_triple):
        """Ordered triples passing D3 either have elliptic ABC or get a verified certificate."""
        checked = 0
        while checked < 200:
            t = random_triple(hi=Fraction(11, 10))
            if not (t.z <= t.y <= t.x) or not step_d3_holds(t):
                continue
            checked += 1
            A, B, C = matrices_from_triple(t)
            if classify(A * B * C) is IsometryClass.ELLIPTIC:
                continue
            construction = build_ford_certificate(t)
            assert verify_pingpong(construction.certificate), t
            assert certificate_matches(construction.certificate, (A, B, C)), t


class TestDecide:
    def test_discrete(self, quarter_triple):
        decision = run_decision(quarter_triple)
        assert isinstance(decision.verdict, Discrete)
        assert decision.verdict.construction.p == Fraction(7, 6)
        assert decision.iterations == 0

    def test_elliptic_witness(self):
        verdict = decide(_t("9/10", "1/2", "1/2"))
        assert isinstance(verdict, EllipticWitness)
        assert str(verdict.word) == "ABC"
        assert verdict.trace == Fraction(46, 25)
        M = evaluate_word(verdict.word, matrices_from_triple(_t("9/10", "1/2", "1/2")))
        assert abs(M.trace) < 2

    def test_relation(self):
        verdict = decide(_t("1", "1", "1"))
        assert isinstance(verdict, Degenerate)
        assert verdict.kind is DegenerateKind.RELATION
        assert is_identity(evaluate_word(verdict.word, matrices_from_triple(_t("1", "1", "1"))))

    def test_y_equals_2x(self, rng):
        for _ in range(100):
            x = random_fraction(rng, Fraction(0), Fraction(1))
            z = random_fraction(rng, Fraction(0), Fraction(2))
            verdict = decide(ParabolicTriple(x, 2 * x, z))
            assert isinstance(verdict, Degenerate)
            assert verdict.kind is DegenerateKind.TWO_GENERATOR

    def test_translated_into_relation(self):
        t = _t("3/2", "1/2", "1/2")
        verdict = decide(t)
        assert not isinstance(verdict, Discrete)
        assert isinstance(verdict, Degenerate)
        assert verdict.kind is DegenerateKind.RELATION
        assert is_identity(evaluate_word(verdict.word, matrices_from_triple(t)))

    @pytest.mark.parametrize("x, y, z", [("5/13", "4/13", "3/13"), ("8/13", "7/13", "3/13")])
    def test_discrete_without_isometric_pair(self, x, y, z):
        verdict = decide(_t(x, y, z))
        assert isinstance(verdict, Discrete)
        assert [g.name for g in verdict.certificate.generators] == ["B", "C"]

    def test_elliptic_found_when_boundary_stalls(self):
        """At x = 1 with D3 at equality the loop falls back to a short word search."""
        t = _t("1", "6/17", "1")
        verdict = decide(t)
        assert isinstance(verdict, EllipticWitness)
        assert len(verdict.word) <= 6
        assert abs(evaluate_word(verdict.word, matrices_from_triple(t)).trace) < 2

    def test_relation_found_when_boundary_stalls(self):
        t = _t("1", "1/2", "1")
        verdict = decide(t)
        assert isinstance(verdict, (Degenerate, EllipticWitness))
        assert verdict_failure(verdict, matrices_from_triple(t)) is None

    def test_large_strength(self):
        verdict = decide(_t("1/2", "3/4", "1/2"))
        assert isinstance(verdict, EllipticWitness)

    def test_approximate_witness(self):
        t = ParabolicTriple.parse("0.9", "0.5", "0.5", exact=False)
        verdict = decide(t)
        assert isinstance(verdict, EllipticWitness)
        assert str(verdict.word) == "ABC"
        assert verdict.trace == pytest.approx(1.84)

    def test_approximate_tolerance_band(self):
        t = ParabolicTriple.parse("0.5", "1.0", "0.5", exact=False)
        verdict = decide(t)
        assert isinstance(verdict, Undetermined)
        assert verdict.reason is UndeterminedReason.TOLERANCE_BAND

    @patch("algorithm.verdict_failure")
    def test_failed_recheck_raises(self, mock_failure, quarter_triple):
        """A verdict that does not re-verify is an internal error, never output."""
        mock_failure.return_value = "certificate intervals overlap"
        with pytest.raises(CertificateError):
            run_decision(quarter_triple)


class TestShortWordVerdict:
    def test_free_group_has_no_short_hit(self, cfg, quarter_triple):
        assert short_word_verdict(initial_state(quarter_triple), cfg, max_length=4) is None

    def test_finds_elliptic_word(self, cfg):
        t = _t("9/10", "1/2", "1/2")
        verdict = short_word_verdict(initial_state(t), cfg, max_length=3)
        assert isinstance(verdict, EllipticWitness)
        assert verdict_failure(verdict, matrices_from_triple(t)) is None

    def test_relation_lifted_to_input_letters(self, cfg):
        t = _t("1", "1", "1")
        verdict = short_word_verdict(initial_state(t), cfg, max_length=3)
        assert verdict is not None
        assert verdict_failure(verdict, matrices_from_triple(t)) is None


class TestCuspedFamily:
    def test_plus_two_family_is_discrete(self, rng):
        """x = 1, y + z = 1 makes ABC parabolic with tangent footprints."""
        for _ in range(40):
            y = random_fraction(rng, Fraction(0), Fraction(1))
            if y == 1:
                continue
            t = ParabolicTriple(Fraction(1), y, 1 - y)
            A, B, C = matrices_from_triple(t)
            assert (A * B * C).trace == 2
            verdict = decide(t)
            assert isinstance(verdict, Discrete), t

    def test_minus_two_family(self, rng):
        """(x - 1)^2 = (1 - y)(1 - z) makes tr(ABC) = -2; every verdict re-verifies."""
        for _ in range(40):
            w = random_fraction(rng, Fraction(0), Fraction(1))
            q = random_fraction(rng, Fraction(0), Fraction(1))
            if w == 1:
                continue
            t = ParabolicTriple(1 + q * w, 1 - w, 1 - q * q * w)
            A, B, C = matrices_from_triple(t)
            assert (A * B * C).trace == -2
            decision = run_decision(t)
            assert verdict_failure(decision.verdict, matrices_from_triple(t)) is None


class TestDeterminism:
    def test_repeated_runs_agree(self, random_triple):
        for _ in range(20):
            t = random_triple()
            assert decide(t) == decide(t)

    def test_exact_runs_never_hit_tolerance_band(self, random_triple):
        for _ in range(100):
            verdict = decide(random_triple())
            assert not (isinstance(verdict, Undetermined) and verdict.reason is UndeterminedReason.TOLERANCE_BAND)

    def test_final_state_audit(self, random_triple):
        for _ in range(30):
            decision = run_decision(random_triple())
            assert audit_holds(decision.state)


class TestVerdictFailure:
    def test_valid_witness(self):
        t = _t("9/10", "1/2", "1/2")
        assert verdict_failure(decide(t), matrices_from_triple(t)) is None

    def test_tampered_witness(self):
        t = _t("9/10", "1/2", "1/2")
        fake = EllipticWitness(Word.parse("AB"), Fraction(1))
        assert classify(evaluate_word(fake.word, matrices_from_triple(t))) is IsometryClass.HYPERBOLIC
        assert verdict_failure(fake, matrices_from_triple(t)) is not None

    def test_tampered_relation(self, quarter_triple):
        fake = Degenerate(DegenerateKind.RELATION, Word.parse("ABC"))
        assert verdict_failure(fake, matrices_from_triple(quarter_triple)) is not None

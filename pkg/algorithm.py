"""Decision loop for discreteness and freeness of three-parabolic groups.

The loop keeps the generators in normal form (see :mod:`canonical`) and walks
through four phases: S positions the fixed point of C, A computes the product
traces, D tries the direct tests (elliptic products, Ford-domain certificate),
and E applies one more Nielsen/conjugation move and loops back to S.

Every move is recorded twice: on the current matrices and on the words that
express each current generator in the letters of the input triple.  The global
conjugator ``X`` satisfies ``current = X * evaluate(word, input) * X^-1``, so any
verdict can be re-checked against the input matrices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

import config
from canonical import ParabolicTriple, matrices_from_triple, read_triple
from ford import (
    TRANSLATION,
    Geodesic,
    Interval,
    PingPongCertificate,
    certificate_matches,
    elliptic_power_exists,
    make_certificate,
    verify_pingpong,
)
from moebius import (
    INFINITY,
    FourPSError,
    IsometryClass,
    Matrix2,
    Scalar,
    Switch,
    ToleranceBandError,
    UnimodularMatrix,
    Word,
    classify,
    commutator,
    compare,
    conjugate,
    evaluate_word,
    identity_like,
    is_identity,
    nielsen_move,
    power,
    scalar_to_str,
)

logger = logging.getLogger(__name__)


class HypothesesFail(FourPSError):
    """The Ford-domain construction was asked for outside its hypotheses."""


class CertificateError(FourPSError):
    """A verdict failed its own re-verification against the input matrices."""


# ---------------------------------------------------------------------------
# Configuration and verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgorithmConfig:
    epsilon: Scalar = config.EPSILON
    delta: Scalar = config.DELTA
    max_iterations: int = config.MAX_ITERATIONS
    tolerance: float = config.TOLERANCE

    def __post_init__(self) -> None:
        if not self.epsilon > 0 or not self.delta > 0:
            raise ValueError("epsilon and delta must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    def as_dict(self) -> dict:
        return {
            "epsilon": scalar_to_str(self.epsilon),
            "delta": scalar_to_str(self.delta),
            "max_iterations": self.max_iterations,
            "tolerance": self.tolerance,
        }


class DegenerateKind(str, Enum):
    TWO_GENERATOR = "two_generator"
    RELATION = "relation"
    NON_DISCRETE = "non_discrete"


class UndeterminedReason(str, Enum):
    BUDGET_EXHAUSTED = "budget_exhausted"
    TOLERANCE_BAND = "tolerance_band"
    STALLED = "stalled"


@dataclass(frozen=True)
class FordConstruction:
    """Points and geodesics of the explicit Ford-domain construction."""

    p: Scalar
    c_of_p: Scalar
    mirror_point: Scalar
    b_image: Scalar
    domain: tuple[Geodesic, ...]
    certificate: PingPongCertificate


@dataclass(frozen=True)
class Discrete:
    certificate: PingPongCertificate
    construction: FordConstruction | None = None

    @property
    def tag(self) -> str:
        return "discrete"


@dataclass(frozen=True)
class EllipticWitness:
    word: Word
    trace: Scalar

    @property
    def tag(self) -> str:
        return "elliptic_witness"


@dataclass(frozen=True)
class Degenerate:
    """A relation, a two-generator collapse or a non-discrete pair.

    ``partner`` is the word sharing a fixed point with ``word`` when the
    degeneration is a common fixed point rather than an identity.
    """

    kind: DegenerateKind
    word: Word
    detail: str = ""
    partner: Word | None = None

    @property
    def tag(self) -> str:
        return f"degenerate_{self.kind.value}"


@dataclass(frozen=True)
class Undetermined:
    reason: UndeterminedReason
    detail: str = ""

    @property
    def tag(self) -> str:
        return "undetermined"


Verdict = Union[Discrete, EllipticWitness, Degenerate, Undetermined]
VERDICT_TYPES = (Discrete, EllipticWitness, Degenerate, Undetermined)


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

class Phase(str, Enum):
    S = "S"
    A = "A"
    D = "D"
    E = "E"


Generators = tuple[UnimodularMatrix, UnimodularMatrix, UnimodularMatrix]
Words = tuple[Word, Word, Word]

_LOCAL = {name: Word.generator(name) for name in "ABC"}


@dataclass(frozen=True)
class AlgorithmState:
    generators: Generators
    words: Words
    conjugator: Matrix2
    triple: ParabolicTriple
    originals: Generators
    iteration: int = 0
    phase: Phase = Phase.S
    trail: tuple[str, ...] = ()

    def lift(self, word: Word) -> Word:
        """Rewrite a word in the current generators in the input letters."""
        return word.substitute(dict(zip("ABC", self.words)))

    @property
    def progress(self) -> tuple[Scalar, Scalar]:
        t = self.triple
        return (-(t.y * t.z), t.x)


@dataclass(frozen=True)
class ProductTraces:
    ab: UnimodularMatrix
    ac: UnimodularMatrix
    bc: UnimodularMatrix
    abc: UnimodularMatrix

    def items(self) -> tuple[tuple[str, UnimodularMatrix], ...]:
        return (("AB", self.ab), ("AC", self.ac), ("BC", self.bc), ("ABC", self.abc))

    def traces(self) -> dict[str, Scalar]:
        return {name: M.trace for name, M in self.items()}


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    state: AlgorithmState
    traces: ProductTraces | None = field(default=None, compare=False)

    @property
    def iterations(self) -> int:
        return self.state.iteration


def initial_state(t: ParabolicTriple) -> AlgorithmState:
    generators = matrices_from_triple(t)
    return AlgorithmState(
        generators=generators,
        words=(_LOCAL["A"], _LOCAL["B"], _LOCAL["C"]),
        conjugator=identity_like(generators[0]),
        triple=t,
        originals=generators,
    )


def audit_holds(state: AlgorithmState) -> bool:
    """Every current generator equals ``X * evaluate(word, input) * X^-1``."""
    return all(
        conjugate(evaluate_word(word, state.originals), state.conjugator) == current
        for word, current in zip(state.words, state.generators)
    )


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

def step_d3_holds(t: ParabolicTriple, tolerance: float = config.TOLERANCE) -> bool:
    """``(x^2 - yz) / |2x - y - z| < 1``; False when the denominator vanishes."""
    gap = 2 * t.x - t.y - t.z
    if compare(gap, 0, tolerance) == 0:
        return False
    return compare(t.x * t.x - t.y * t.z, abs(gap), tolerance) < 0


def ford_hypothesis_holds(t: ParabolicTriple, tolerance: float = config.TOLERANCE) -> bool:
    """``x^2 / |2x - y - z| < 1``, the stronger form of :func:`step_d3_holds`."""
    gap = 2 * t.x - t.y - t.z
    if compare(gap, 0, tolerance) == 0:
        return False
    return compare(t.x * t.x, abs(gap), tolerance) < 0


def e2_chain_holds(t: ParabolicTriple, tolerance: float = config.TOLERANCE) -> bool:
    """The chain ``(x^2-yz)/(2x-y-z) < (x^2-yz)/(x-z) < (xy-yz)/(x-z) < 1``.

    Each fraction is guarded: a vanishing or negative denominator makes the chain fail.
    """
    x, y, z = t.x, t.y, t.z
    gap, spread = 2 * x - y - z, x - z
    if compare(gap, 0, tolerance) <= 0 or compare(spread, 0, tolerance) <= 0:
        return False
    first = (x * x - y * z) / gap
    second = (x * x - y * z) / spread
    third = (x * y - y * z) / spread
    return (
        compare(first, second, tolerance) < 0
        and compare(second, third, tolerance) < 0
        and compare(third, 1, tolerance) < 0
    )


def _at_most(a: Scalar, b: Scalar, tolerance: float) -> bool:
    """``a <= b``, with the tolerance band counted as equality."""
    try:
        return compare(a, b, tolerance) <= 0
    except ToleranceBandError:
        return True


def _ordered_for_construction(t: ParabolicTriple, cfg: AlgorithmConfig) -> bool:
    tol = cfg.tolerance
    return _at_most(t.z, t.y, tol) and _at_most(t.y, t.x, tol) and _at_most(t.x, 1 + cfg.epsilon, tol)


# ---------------------------------------------------------------------------
# Moves on (generators, words, conjugator)
# ---------------------------------------------------------------------------

def _reflected(gens: Generators, words: Words, X: Matrix2, shift: Scalar) -> tuple[Generators, Words, Matrix2]:
    """Conjugate by ``w -> shift - w`` and invert every generator to restore orientation."""
    one = 1 if X.exact else 1.0
    R = Matrix2(-one, shift, 0 * one, one)
    new_gens = tuple(conjugate(G, R).inverse() for G in gens)
    new_words = tuple(w.inverse() for w in words)
    return new_gens, new_words, (R * X).projective()


def _conjugated_c(gens: Generators, words: Words, by: int, exponent: int) -> tuple[Generators, Words]:
    """``C -> g^n C g^-n`` with ``g`` the generator at position ``by``."""
    A, B, C = gens
    g = power(gens[by], exponent)
    g_word = words[by] ** exponent
    return (A, B, conjugate(C, g)), (words[0], words[1], words[2].conjugated_by(g_word))


def _settle(
    state: AlgorithmState, gens: Generators, words: Words, X: Matrix2, note: str, cfg: AlgorithmConfig
) -> AlgorithmState | Verdict:
    """Bring C's fixed point to the positive axis and re-read the triple."""
    C = gens[2]
    if C.c == 0:
        return Degenerate(
            DegenerateKind.TWO_GENERATOR,
            words[2],
            f"{note}: C now fixes infinity together with A",
            partner=words[0],
        )
    x = (C.a - C.d) / (2 * C.c)
    sign = compare(x, 0, cfg.tolerance)
    if sign == 0:
        return Degenerate(
            DegenerateKind.RELATION,
            words[1] * words[2] * words[1].inverse() * words[2].inverse(),
            f"{note}: B and C share the fixed point 0",
        )
    if sign < 0:
        gens, words, X = _reflected(gens, words, X, 0 * x)
        note += "; reflect w -> -w"
    triple = read_triple(*gens, tolerance=cfg.tolerance)
    logger.debug("%s -> %s", note, triple)
    return replace(state, generators=gens, words=words, conjugator=X, triple=triple, trail=state.trail + (note,))


def _conjugate_c(state: AlgorithmState, by: int, exponent: int, note: str, cfg: AlgorithmConfig) -> AlgorithmState | Verdict:
    gens, words = _conjugated_c(state.generators, state.words, by, exponent)
    return _settle(state, gens, words, state.conjugator, note, cfg)


def _swap(state: AlgorithmState, cfg: AlgorithmConfig) -> AlgorithmState:
    """Exchange the roles of B and C: ``(x, y, z) -> (x, z, y)``."""
    gens, words, X = _reflected(state.generators, state.words, state.conjugator, state.triple.x)
    gens = nielsen_move(gens, Switch(2, 3))
    words = nielsen_move(words, Switch(2, 3))
    triple = read_triple(*gens, tolerance=cfg.tolerance)
    note = "swap B and C"
    logger.debug("%s -> %s", note, triple)
    return replace(state, generators=gens, words=words, conjugator=X, triple=triple, trail=state.trail + (note,))


def _reflect_translate(state: AlgorithmState, cfg: AlgorithmConfig) -> AlgorithmState | Verdict:
    """``x -> 2 - x``: reflect in 0, then conjugate C by A."""
    gens, words, X = _reflected(state.generators, state.words, state.conjugator, 0 * state.triple.x)
    gens, words = _conjugated_c(gens, words, 0, 1)
    return _settle(state, gens, words, X, "reflect w -> -w, then C -> A C A^-1", cfg)


# ---------------------------------------------------------------------------
# Verdict helpers
# ---------------------------------------------------------------------------

def _elliptic(state: AlgorithmState, local: Word) -> EllipticWitness:
    word = state.lift(local)
    return EllipticWitness(word, evaluate_word(word, state.originals).trace)


def _power_witness(state: AlgorithmState, traces: ProductTraces, cfg: AlgorithmConfig) -> EllipticWitness | None:
    """``A^n G`` elliptic for a product ``G`` of B and C with Ford strength above 1."""
    candidates = [("BC", traces.bc)]
    B, C = state.generators[1], state.generators[2]
    for text in ("cb", "Bc", "bC"):
        candidates.append((text, evaluate_word(Word.parse(text), (state.generators[0], B, C))))
    for text, G in candidates:
        if G.c == 0 or classify(G, cfg.tolerance) is IsometryClass.ELLIPTIC:
            continue
        n = elliptic_power_exists(G, cfg.tolerance)
        if n is not None:
            return _elliptic(state, Word.generator("A", n) * Word.parse(text))
    return None


_LETTERS = "AaBbCc"


def short_word_verdict(
    state: AlgorithmState, cfg: AlgorithmConfig, max_length: int = config.WITNESS_WORD_LENGTH
) -> Verdict | None:
    """Shortest elliptic word or relation among reduced words in the current generators.

    Words are tried by length, then in ``AaBbCc`` order.  Float comparisons that land
    in the tolerance band are skipped rather than decided.
    """
    table = {}
    for name, M in zip("ABC", state.generators):
        table[name] = M
        table[name.lower()] = M.inverse()
    layer = [(letter, table[letter]) for letter in _LETTERS]
    for length in range(1, max_length + 1):
        for letters, M in layer:
            if is_identity(M) if M.exact else _near_identity(M, cfg.tolerance):
                word = state.lift(Word.parse(letters))
                return Degenerate(DegenerateKind.RELATION, word, f"{letters} = ±I in the current generators")
            try:
                elliptic = classify(M, cfg.tolerance) is IsometryClass.ELLIPTIC
            except ToleranceBandError:
                continue
            if elliptic:
                return _elliptic(state, Word.parse(letters))
        if length == max_length:
            break
        layer = [
            (letters + letter, M * table[letter])
            for letters, M in layer
            for letter in _LETTERS
            if letter != letters[-1].swapcase()
        ]
    logger.debug("no elliptic word or relation up to length %d at %s", max_length, state.triple)
    return None


def _stalled(state: AlgorithmState, cfg: AlgorithmConfig, detail: str) -> Verdict:
    return short_word_verdict(state, cfg) or Undetermined(UndeterminedReason.STALLED, detail)


def build_ford_certificate(t: ParabolicTriple, cfg: AlgorithmConfig | None = None) -> FordConstruction:
    """Explicit Ford-domain construction and ping-pong certificate for a normalized triple.

    Requires ``z <= y <= x <= 1 + epsilon``, ``(x^2 - yz)/|2x - y - z| < 1`` and
    ``x^2 <= 2x - y - z``; the last one fails exactly when ABC is elliptic.  With
    ``p = x(2x - y)/(2x - y - z)`` the footprints chain tangentially from left to right:
    ``[B(C(p)), 0]``, ``[0, C(p)]`` for B and ``[C(p), x]``, ``[x, p]`` for C, and the
    chain spans ``2x^2/(2x - y - z)``, at most one period.
    """
    cfg = cfg or AlgorithmConfig()
    tol = cfg.tolerance
    if not _ordered_for_construction(t, cfg):
        raise HypothesesFail(f"{t} is not ordered as z <= y <= x <= 1 + epsilon")
    if not step_d3_holds(t, tol):
        raise HypothesesFail(f"{t} fails (x^2 - yz)/|2x - y - z| < 1")
    x, y, z = t.x, t.y, t.z
    gap = 2 * x - y - z
    if compare(gap, 0, tol) <= 0:
        raise HypothesesFail(f"2x - y - z is not positive at {t}")
    if compare(x * x, gap, tol) > 0:
        raise HypothesesFail(f"x^2 > 2x - y - z at {t}, so ABC is elliptic")
    _, B, C = matrices_from_triple(t)
    zero = 0 * x
    p = x * (2 * x - y) / gap
    c_of_p = x * y / (y + z)
    b_image = -x * y / gap
    certificate = make_certificate(
        [
            ("B", _LOCAL["B"], B, (Interval(zero, c_of_p), Interval(b_image, zero))),
            ("C", _LOCAL["C"], C, (Interval(x, p), Interval(c_of_p, x))),
        ],
        conjugator=identity_like(B),
        strip=Interval(b_image, b_image + TRANSLATION),
    )
    strip = certificate.strip
    domain = (
        Geodesic(INFINITY, strip.lo),
        Geodesic(INFINITY, strip.hi),
        Geodesic(p, x),
        Geodesic(x, c_of_p),
        Geodesic(zero, c_of_p),
        Geodesic(b_image, zero),
    )
    logger.debug("Ford construction at %s: p = %s, C(p) = %s", t, scalar_to_str(p), scalar_to_str(c_of_p))
    return FordConstruction(
        p=p,
        c_of_p=c_of_p,
        mirror_point=-c_of_p,
        b_image=b_image,
        domain=domain,
        certificate=certificate,
    )


def _lift_certificate(cert: PingPongCertificate, state: AlgorithmState) -> PingPongCertificate:
    generators = tuple(replace(g, word=state.lift(g.word)) for g in cert.generators)
    return replace(
        cert,
        generators=generators,
        conjugator=state.conjugator,
        translation_word=state.words[0],
    )


def _domain_decision(state: AlgorithmState, traces: ProductTraces, cfg: AlgorithmConfig) -> Verdict | None:
    t = state.triple
    if not _ordered_for_construction(t, cfg) or not step_d3_holds(t, cfg.tolerance):
        return None
    if classify(traces.abc, cfg.tolerance) is IsometryClass.ELLIPTIC:
        return _elliptic(state, Word.parse("ABC"))
    try:
        construction = build_ford_certificate(t, cfg)
    except HypothesesFail as exc:
        logger.debug("no Ford certificate at %s: %s", t, exc)
        return None
    certificate = _lift_certificate(construction.certificate, state)
    return Discrete(certificate, replace(construction, certificate=certificate))


# ---------------------------------------------------------------------------
# Phases
# ---------------------------------------------------------------------------

def step_S(state: AlgorithmState, cfg: AlgorithmConfig) -> AlgorithmState | Verdict:
    """Position C's fixed point: translate into ``(0, 1 + epsilon]``, then conjugate by ``B^m`` while ``x < y - delta``."""
    tol = cfg.tolerance
    while True:
        t = state.triple
        if compare(t.y, 2 * t.x, tol) == 0:
            return Degenerate(
                DegenerateKind.TWO_GENERATOR,
                state.lift(_LOCAL["C"].conjugated_by(_LOCAL["B"])),
                f"y = 2x at {t}: B C B^-1 fixes infinity",
                partner=state.words[0],
            )
        if compare(t.x, 1 + cfg.epsilon, tol) > 0:
            k = math.ceil((t.x - 1 - cfg.epsilon) / 2)
            result = _conjugate_c(state, 0, -k, f"S: C -> A^-{k} C A^{k}", cfg)
            if isinstance(result, VERDICT_TYPES):
                return result
            state = result
            continue
        if compare(t.y, 1, tol) > 0 or compare(t.z, 1, tol) > 0:
            break
        if compare(t.x, t.y - cfg.delta, tol) < 0:
            if state.iteration >= cfg.max_iterations:
                return Undetermined(UndeterminedReason.BUDGET_EXHAUSTED, f"{cfg.max_iterations} iterations used")
            m = max(1, round(t.y / (2 * t.x)))
            if compare(t.y, 2 * m * t.x, tol) == 0:
                return Degenerate(
                    DegenerateKind.TWO_GENERATOR,
                    state.lift(_LOCAL["C"].conjugated_by(_LOCAL["B"] ** m)),
                    f"y = 2*{m}*x at {t}: B^{m} C B^-{m} fixes infinity",
                    partner=state.words[0],
                )
            result = _conjugate_c(state, 1, m, f"S: C -> B^{m} C B^-{m}", cfg)
            if isinstance(result, VERDICT_TYPES):
                return result
            state = replace(result, iteration=result.iteration + 1)
            continue
        break
    return replace(state, phase=Phase.A)


def step_A(state: AlgorithmState) -> ProductTraces:
    """Multiply out AB, AC, BC and ABC."""
    A, B, C = state.generators
    bc = B * C
    return ProductTraces(ab=A * B, ac=A * C, bc=bc, abc=A * bc)


def step_D(state: AlgorithmState, traces: ProductTraces, cfg: AlgorithmConfig) -> Verdict | None:
    """Direct tests; None means continue with phase E."""
    tol = cfg.tolerance
    t = state.triple
    for name, M in traces.items():
        if is_identity(M):
            return Degenerate(DegenerateKind.RELATION, state.lift(Word.parse(name)), f"{name} = ±I")
    for name, M in traces.items():
        if M.c != 0:
            continue
        word = state.lift(Word.parse(name))
        if classify(M, tol) is IsometryClass.PARABOLIC:
            relation = commutator_word(state.words[0], word)
            return Degenerate(DegenerateKind.RELATION, relation, f"{name} is parabolic at infinity, so it commutes with A")
        return Degenerate(
            DegenerateKind.NON_DISCRETE,
            word,
            f"{name} is hyperbolic fixing infinity, shared with the parabolic A",
            partner=state.words[0],
        )

    if classify(traces.bc, tol) is IsometryClass.ELLIPTIC:
        return _elliptic(state, Word.parse("BC"))
    if compare(t.y, 1, tol) > 0:
        return _elliptic(state, Word.parse("AB"))
    if compare(t.z, 1, tol) > 0:
        return _elliptic(state, Word.parse("AC"))

    if compare(abs(2 * t.x - t.y - t.z), t.y * t.z, tol) < 0:
        n = elliptic_power_exists(traces.bc, tol)
        if n is not None:
            return _elliptic(state, Word.generator("A", n) * Word.parse("BC"))

    return _domain_decision(state, traces, cfg)


def step_E(state: AlgorithmState, traces: ProductTraces, cfg: AlgorithmConfig) -> AlgorithmState | Verdict:
    """Make one move that strictly decreases ``(-yz, x)``, or stop."""
    tol = cfg.tolerance
    if state.iteration >= cfg.max_iterations:
        return Undetermined(UndeterminedReason.BUDGET_EXHAUSTED, f"{cfg.max_iterations} iterations used")
    if not _at_most(state.triple.z, state.triple.y, tol):
        state = _swap(state, cfg)
        traces = step_A(state)
    t = state.triple
    following = replace(state, iteration=state.iteration + 1, phase=Phase.S)

    if not _at_most(t.y, t.x, tol):
        return _conjugate_c(following, 1, 1, "E: C -> B C B^-1", cfg)

    if _at_most(t.x, 1, tol):
        verdict = _domain_decision(state, traces, cfg) or _power_witness(state, traces, cfg)
        if verdict is not None:
            return verdict
        return _stalled(state, cfg, f"no test applies at {t} with z <= y <= x <= 1")

    gap = 2 * t.x - t.y - t.z
    if e2_chain_holds(t, tol) or compare(gap, t.y * t.z, tol) < 0:
        witness = _power_witness(state, traces, cfg)
        if witness is not None:
            return witness
    if compare(gap, t.y * t.z, tol) > 0:
        verdict = _domain_decision(state, traces, cfg)
        if verdict is not None:
            return verdict
    return _reflect_translate(following, cfg)


def commutator_word(first: Word, second: Word) -> Word:
    return first * second * first.inverse() * second.inverse()


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _near_identity(M: Matrix2, tolerance: float) -> bool:
    scale = max(1.0, max(abs(float(v)) for v in M.entries))
    return max(abs(M.b), abs(M.c), abs(M.a - M.d)) <= tolerance * scale


def verdict_failure(verdict: Verdict, originals: Generators, cfg: AlgorithmConfig | None = None) -> str | None:
    """Re-verify a verdict against the input matrices; return the failure or None."""
    cfg = cfg or AlgorithmConfig()
    if isinstance(verdict, Discrete):
        if not verify_pingpong(verdict.certificate, cfg.tolerance):
            return "certificate intervals overlap"
        if not certificate_matches(verdict.certificate, originals, cfg.tolerance):
            return "certificate words do not reproduce their matrices"
    elif isinstance(verdict, EllipticWitness):
        M = evaluate_word(verdict.word, originals)
        if classify(M, cfg.tolerance) is not IsometryClass.ELLIPTIC or M.trace != verdict.trace:
            return f"{verdict.word} is not elliptic with trace {scalar_to_str(verdict.trace)} on the input"
    elif isinstance(verdict, Degenerate):
        M = evaluate_word(verdict.word, originals)
        if verdict.partner is None:
            ok = is_identity(M) if M.exact else _near_identity(M, cfg.tolerance)
        else:
            partner = evaluate_word(verdict.partner, originals)
            loop_trace = commutator(M, partner).trace
            shares = loop_trace == 2 if M.exact else abs(loop_trace - 2) <= cfg.tolerance
            expected = IsometryClass.HYPERBOLIC if verdict.kind is DegenerateKind.NON_DISCRETE else IsometryClass.PARABOLIC
            ok = shares and classify(M, cfg.tolerance) is expected
        if not ok:
            return f"{verdict.tag} word {verdict.word} does not verify on the input"
    return None


def run_decision(t: ParabolicTriple, cfg: AlgorithmConfig | None = None) -> Decision:
    """Run the loop to a verdict, keeping the final state and product traces."""
    cfg = cfg or AlgorithmConfig()
    state = initial_state(t)
    traces = None
    try:
        while True:
            result = step_S(state, cfg)
            if isinstance(result, VERDICT_TYPES):
                verdict = result
                break
            state = replace(result, phase=Phase.A)
            traces = step_A(state)
            state = replace(state, phase=Phase.D)
            verdict = step_D(state, traces, cfg)
            if verdict is not None:
                break
            state = replace(state, phase=Phase.E)
            result = step_E(state, traces, cfg)
            if isinstance(result, VERDICT_TYPES):
                verdict = result
                break
            if not result.progress < state.progress:
                verdict = _stalled(state, cfg, f"no progress from {state.triple}")
                break
            state = result
    except ToleranceBandError as exc:
        logger.info("tolerance band reached: %s", exc)
        verdict = Undetermined(UndeterminedReason.TOLERANCE_BAND, str(exc))
    failure = verdict_failure(verdict, state.originals, cfg)
    if failure is not None:
        raise CertificateError(failure)
    logger.info("%s -> %s after %d iterations", t, verdict.tag, state.iteration)
    return Decision(verdict, state, traces)


def decide(t: ParabolicTriple, cfg: AlgorithmConfig | None = None) -> Verdict:
    return run_decision(t, cfg).verdict

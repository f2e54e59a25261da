"""Brute-force cross-check of verdicts by enumerating short words.

The oracle is independent of the decision loop: it multiplies out every freely
reduced word up to a length cap, looking for elliptic elements and relations,
and optionally scans pairs of short words for Jørgensen violations.  Matrices
are carried as integer entries over a common denominator so the search stays
exact without Fraction overhead in the inner loop.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Sequence

import config
from algorithm import (
    AlgorithmConfig,
    Discrete,
    Undetermined,
    Verdict,
    verdict_failure,
)
from canonical import ParabolicTriple, matrices_from_triple
from ford import shimizu_violated
from moebius import FourPSError, Matrix2, Word, evaluate_word, scalar_to_str

logger = logging.getLogger(__name__)

IntMatrix = tuple[int, int, int, int]
# letter -> (integer entries, common denominator)
LetterTable = dict[str, tuple[IntMatrix, int]]

LETTERS = "AaBbCc"
_INVERSE = {"A": "a", "a": "A", "B": "b", "b": "B", "C": "c", "c": "C"}


class WordLengthCapError(FourPSError):
    """A requested word length exceeds the configured hard cap."""


@dataclass(frozen=True)
class FoundWord:
    word: Word
    trace: Fraction

    def as_dict(self) -> dict:
        return {"word": str(self.word), "trace": scalar_to_str(self.trace)}


@dataclass(frozen=True)
class EnumerationReport:
    max_length: int
    counts: tuple[int, ...]
    elliptic_count: int
    relation_count: int
    elliptic: tuple[FoundWord, ...] = ()
    relations: tuple[FoundWord, ...] = ()
    # words whose Ford strength exceeds 4 against the translation A
    shimizu_count: int = 0
    shimizu: tuple[FoundWord, ...] = ()

    @property
    def clean(self) -> bool:
        return self.elliptic_count == 0 and self.relation_count == 0 and self.shimizu_count == 0

    @property
    def truncated(self) -> bool:
        return (
            len(self.elliptic) < self.elliptic_count
            or len(self.relations) < self.relation_count
            or len(self.shimizu) < self.shimizu_count
        )

    def as_dict(self) -> dict:
        return {
            "max_length": self.max_length,
            "counts": list(self.counts),
            "elliptic_count": self.elliptic_count,
            "relation_count": self.relation_count,
            "elliptic": [w.as_dict() for w in self.elliptic],
            "relations": [w.as_dict() for w in self.relations],
            "shimizu_count": self.shimizu_count,
            "shimizu": [w.as_dict() for w in self.shimizu],
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class JorgensenReport:
    max_length: int
    pairs_checked: int
    violations: tuple[tuple[Word, Word], ...] = ()

    def as_dict(self) -> dict:
        return {
            "max_length": self.max_length,
            "pairs_checked": self.pairs_checked,
            "violations": [[str(a), str(b)] for a, b in self.violations],
        }


@dataclass(frozen=True)
class Consistency:
    consistent: bool
    detail: str = ""
    enumeration: EnumerationReport | None = field(default=None, compare=False)

    def as_dict(self) -> dict:
        return {
            "consistent": self.consistent,
            "detail": self.detail,
            "enumeration": self.enumeration.as_dict() if self.enumeration else None,
        }


# ---------------------------------------------------------------------------
# Integer arithmetic
# ---------------------------------------------------------------------------

def _integer_form(M: Matrix2) -> tuple[IntMatrix, int]:
    if not M.exact:
        raise ValueError("the oracle needs exact generators")
    entries = [Fraction(v) for v in M.entries]
    scale = math.lcm(*(v.denominator for v in entries))
    a, b, c, d = (int(v * scale) for v in entries)
    return (a, b, c, d), scale


def letter_table(generators: Sequence[Matrix2]) -> LetterTable:
    table: LetterTable = {}
    for name, M in zip("ABC", generators):
        (a, b, c, d), scale = _integer_form(M)
        table[name] = ((a, b, c, d), scale)
        # inverse of a determinant-one matrix is its adjugate
        table[name.lower()] = ((d, -b, -c, a), scale)
    return table


def _mul(m: IntMatrix, n: IntMatrix) -> IntMatrix:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _to_word(letters: str) -> Word:
    return Word.reduce((ch.upper(), 1 if ch.isupper() else -1) for ch in letters)


def _explore(first: str, table: LetterTable, max_length: int, keep: int, shimizu: bool = False) -> tuple:
    """Depth-first walk of all reduced words starting with ``first``.

    With ``shimizu`` set, words with ``0 < |c| < 1/2`` are collected as well.
    """
    counts = [0] * max_length
    elliptic: list[tuple[str, int, int]] = []
    relations: list[tuple[str, int, int]] = []
    strong: list[tuple[str, int, int]] = []
    elliptic_count = relation_count = strong_count = 0
    matrix, scale = table[first]
    stack = [(first, matrix, scale)]
    while stack:
        letters, (a, b, c, d), s = stack.pop()
        length = len(letters)
        counts[length - 1] += 1
        tr = a + d
        if b == 0 and c == 0 and a == d:
            relation_count += 1
            if len(relations) < keep:
                relations.append((letters, tr, s))
        elif abs(tr) < 2 * s:
            elliptic_count += 1
            if len(elliptic) < keep:
                elliptic.append((letters, tr, s))
        if shimizu and c != 0 and 2 * abs(c) < s:
            strong_count += 1
            if len(strong) < keep:
                strong.append((letters, tr, s))
        if length < max_length:
            forbidden = _INVERSE[letters[-1]]
            for letter in LETTERS:
                if letter != forbidden:
                    n, t = table[letter]
                    stack.append((letters + letter, _mul((a, b, c, d), n), s * t))
    return counts, elliptic_count, relation_count, elliptic, relations, strong_count, strong


def _check_cap(max_length: int, cap: int) -> None:
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    if max_length > cap:
        raise WordLengthCapError(f"word length {max_length} exceeds the cap {cap}")


def _found(records: list[tuple[str, int, int]], keep: int) -> tuple[FoundWord, ...]:
    ordered = sorted(records, key=lambda r: (len(r[0]), r[0]))[:keep]
    return tuple(FoundWord(_to_word(letters), Fraction(tr, s)) for letters, tr, s in ordered)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def enumerate_words(
    generators: Sequence[Matrix2],
    max_length: int = config.ORACLE_WORD_LENGTH,
    workers: int = 1,
    keep: int = config.ORACLE_KEEP_WORDS,
) -> EnumerationReport:
    """Evaluate every reduced word of length 1..max_length.

    All elliptic words and all words equal to ±I are counted; up to ``keep`` of
    each are reported, shortest first.  When the first generator is the
    translation by 2, words of Ford strength above 4 are counted too: by
    Shimizu's lemma each one rules out discreteness.  ``workers > 1`` splits the
    search by first letter across processes.
    """
    _check_cap(max_length, config.ORACLE_MAX_WORD_LENGTH)
    table = letter_table(generators)
    translation = tuple(generators[0].entries) == (1, 2, 0, 1)
    job = partial(_explore, table=table, max_length=max_length, keep=keep, shimizu=translation)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, LETTERS))
    else:
        parts = [job(letter) for letter in LETTERS]

    counts = [sum(p[0][i] for p in parts) for i in range(max_length)]
    report = EnumerationReport(
        max_length=max_length,
        counts=tuple(counts),
        elliptic_count=sum(p[1] for p in parts),
        relation_count=sum(p[2] for p in parts),
        elliptic=_found([r for p in parts for r in p[3]], keep),
        relations=_found([r for p in parts for r in p[4]], keep),
        shimizu_count=sum(p[5] for p in parts),
        shimizu=tuple(
            w for w in _found([r for p in parts for r in p[6]], keep)
            if shimizu_violated(evaluate_word(w.word, generators))
        ),
    )
    logger.info(
        "enumerated %d words up to length %d: %d elliptic, %d relations, %d above Ford strength 4",
        sum(counts), max_length, report.elliptic_count, report.relation_count, report.shimizu_count,
    )
    return report


def _words_up_to(table: LetterTable, max_length: int) -> list[tuple[str, IntMatrix, int]]:
    words = []
    stack = [(letter, *table[letter]) for letter in reversed(LETTERS)]
    while stack:
        letters, matrix, scale = stack.pop()
        words.append((letters, matrix, scale))
        if len(letters) < max_length:
            forbidden = _INVERSE[letters[-1]]
            for letter in reversed(LETTERS):
                if letter != forbidden:
                    n, t = table[letter]
                    stack.append((letters + letter, _mul(matrix, n), scale * t))
    return sorted(words, key=lambda w: (len(w[0]), w[0]))


def _inverse_letters(letters: str) -> str:
    return "".join(_INVERSE[ch] for ch in reversed(letters))


def _projective_key(entries: Sequence[Fraction]) -> tuple[Fraction, ...]:
    lead = next(v for v in entries if v != 0)
    return tuple(-v for v in entries) if lead < 0 else tuple(entries)


def _expressible(targets: Sequence[Matrix2], generators: Sequence[Matrix2], max_length: int) -> bool:
    reachable = {
        _projective_key([Fraction(v, scale) for v in matrix])
        for _, matrix, scale in _words_up_to(letter_table(generators), max_length)
    }
    return all(_projective_key([Fraction(v) for v in M.entries]) in reachable for M in targets)


def nielsen_equivalent(old: Sequence[Matrix2], new: Sequence[Matrix2], max_length: int = 2) -> bool:
    """True when each triple is made of words of length at most ``max_length`` in the other.

    One elementary Nielsen move changes a generating triple by words of length two
    at most, so ``max_length=2`` confirms that a single move kept the group.
    """
    return _expressible(old, new, max_length) and _expressible(new, old, max_length)


def jorgensen_scan(
    generators: Sequence[Matrix2], max_length: int = config.JORGENSEN_WORD_LENGTH
) -> JorgensenReport:
    """Check ``|tr(M)^2 - 4| + |tr[M, N] - 2| >= 1`` for pairs of short words.

    Pairs run over unordered word pairs with total length at most ``max_length``.
    Words equal to ±I and pairs with ``tr[M, N] = 2`` are skipped; elliptic members
    are kept.
    """
    _check_cap(max_length, config.JORGENSEN_MAX_WORD_LENGTH)
    table = letter_table(generators)
    words = [
        w for w in _words_up_to(table, max_length - 1)
        if not (w[1][1] == 0 and w[1][2] == 0 and w[1][0] == w[1][3])
    ]
    violations = []
    checked = 0
    for i, (first, P, s1) in enumerate(words):
        u = (P[0] + P[3]) ** 2 - 4 * s1 * s1
        p_adj = (P[3], -P[1], -P[2], P[0])
        inverse_first = _inverse_letters(first)
        for second, Q, s2 in words[i + 1:]:
            if len(first) + len(second) > max_length:
                break
            if second == inverse_first:
                continue
            loop = _mul(_mul(_mul(P, Q), p_adj), (Q[3], -Q[1], -Q[2], Q[0]))
            big = s1 * s1 * s2 * s2
            v = loop[0] + loop[3] - 2 * big
            if v == 0:
                continue
            checked += 1
            if abs(u) * big + abs(v) * s1 * s1 < s1 * s1 * big:
                violations.append((_to_word(first), _to_word(second)))
    logger.info("checked %d pairs up to length %d: %d violations", checked, max_length, len(violations))
    return JorgensenReport(max_length, checked, tuple(violations))


def cross_validate(
    t: ParabolicTriple,
    verdict: Verdict,
    cfg: AlgorithmConfig | None = None,
    max_length: int = config.ORACLE_WORD_LENGTH,
    workers: int = 1,
) -> Consistency:
    """Check a verdict against brute force.

    Witnesses and degenerations are re-evaluated on the input matrices.  A
    Discrete verdict must additionally survive the full word enumeration.
    """
    if not t.exact:
        raise ValueError("the oracle needs an exact triple")
    originals = matrices_from_triple(t)
    failure = verdict_failure(verdict, originals, cfg)
    if failure is not None:
        return Consistency(False, failure)
    if not isinstance(verdict, (Discrete, Undetermined)):
        return Consistency(True, f"{verdict.tag} re-verified on the input")
    report = enumerate_words(originals, max_length, workers)
    if isinstance(verdict, Undetermined):
        return Consistency(True, "undetermined verdicts are not contradicted", report)
    if not report.clean:
        detail = (
            f"discrete verdict contradicted by {report.elliptic_count} elliptic words, "
            f"{report.relation_count} relations and {report.shimizu_count} words of Ford strength above 4"
        )
        return Consistency(False, detail, report)
    return Consistency(True, f"no elliptic word or relation up to length {max_length}", report)

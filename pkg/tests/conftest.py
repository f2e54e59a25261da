"""Shared test fixtures."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from algorithm import AlgorithmConfig
from canonical import ParabolicTriple
from moebius import UnimodularMatrix


def random_fraction(rng: random.Random, lo: Fraction, hi: Fraction, max_den: int = 12) -> Fraction:
    """A rational in ``(lo, hi]`` with denominator at most ``max_den``."""
    den = rng.randint(1, max_den)
    first = math.floor(lo * den) + 1
    last = math.floor(hi * den)
    if first > last:
        return Fraction(hi)
    return Fraction(rng.randint(first, last), den)


@pytest.fixture
def rng():
    """Seeded generator so every random sweep is reproducible."""
    return random.Random(20240605)


@pytest.fixture
def cfg():
    return AlgorithmConfig()


@pytest.fixture
def random_triple(rng):
    """Factory for random exact triples in ``(0, hi]^3``."""
    def make(hi: Fraction = Fraction(2), max_den: int = 12) -> ParabolicTriple:
        return ParabolicTriple(*(random_fraction(rng, Fraction(0), hi, max_den) for _ in range(3)))
    return make


@pytest.fixture
def random_unimodular(rng):
    """Factory for random exact determinant-one matrices with small entries."""
    def make(nonzero_c: bool = True) -> UnimodularMatrix:
        while True:
            a = random_fraction(rng, Fraction(-4), Fraction(4), 6)
            b = random_fraction(rng, Fraction(-4), Fraction(4), 6)
            c = random_fraction(rng, Fraction(-4), Fraction(4), 6)
            if a == 0 or (nonzero_c and c == 0):
                continue
            return UnimodularMatrix(a, b, c, (1 + b * c) / a)
    return make


@pytest.fixture
def quarter_triple():
    """``(1, 1/4, 1/4)``, decided Discrete with a Ford certificate."""
    return ParabolicTriple.parse("1", "1/4", "1/4")

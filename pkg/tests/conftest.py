"""Shared builders for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

import pytest

from asepdiff import Density, LocalFunction, build_kernel


def ssep_1d(exact=False):
    half = Fraction(1, 2) if exact else 0.5
    return build_kernel([((1,), half), ((-1,), half)])


def tasep_1d(exact=False):
    one = Fraction(1) if exact else 1.0
    return build_kernel([((1,), one)])


def asym_2d(exact=False):
    w = (lambda s: Fraction(s)) if exact else float
    return build_kernel(
        [
            ((1, 0), w("0.4")),
            ((0, 1), w("0.3")),
            ((-1, 0), w("0.2")),
            ((0, -1), w("0.1")),
        ]
    )


def ssep_2d(exact=False):
    q = Fraction(1, 4) if exact else 0.25
    return build_kernel([((1, 0), q), ((0, 1), q), ((-1, 0), q), ((0, -1), q)])


def generic_2d(exact=False):
    """Asymmetric d=2 kernel with diagonal jumps and S_12 != 0."""
    w = (lambda s: Fraction(s)) if exact else float
    return build_kernel(
        [
            ((1, 0), w("0.35")),
            ((0, 1), w("0.25")),
            ((-1, 0), w("0.1")),
            ((0, -1), w("0.05")),
            ((1, 1), w("0.15")),
            ((-1, 1), w("0.1")),
        ]
    )


def random_function(rng: random.Random, density: Density, dim: int, radius: int = 2,
                    nterms: int = 3, maxdeg: int = 3, rational: bool = False,
                    nonconstant: bool = False) -> LocalFunction:
    sites = sorted(product(range(-radius, radius + 1), repeat=dim))
    terms = {}
    for _ in range(rng.randint(1, nterms)):
        deg = rng.randint(1 if nonconstant else 0, maxdeg)
        key = tuple(sorted(rng.sample(sites, deg)))
        if rational:
            coef = Fraction(rng.randint(-9, 9), rng.randint(1, 9)) or Fraction(1)
        else:
            coef = rng.uniform(-2, 2) or 1.0
        terms[key] = terms.get(key, 0) + coef
    f = LocalFunction(density, terms)
    if f.is_zero():
        f = LocalFunction.eta([(0,) * dim], density)
    return f


def random_config(rng: random.Random, box) -> dict:
    return {x: rng.randint(0, 1) for x in box}


@pytest.fixture
def rng():
    return random.Random(20240809)

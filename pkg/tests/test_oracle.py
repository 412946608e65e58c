"""Brute-force oracle: configurations, expectations, pointwise generator,
summed pairing, and invariance of the Bernoulli measures."""

import random
from fractions import Fraction

import pytest

from asepdiff import (
    BoxTooLarge,
    Configuration,
    Density,
    LocalFunction,
    apply_generator,
    exact_expectation,
    exact_expectation_derivative,
    generator_pointwise,
    pair_rho0,
    pair_rho0_bruteforce,
)
from asepdiff.generator import raw_current
from asepdiff.oracle import enumerate_configurations

from conftest import random_function, ssep_1d, tasep_1d

RHO = Density(Fraction(1, 2))
RHO3 = Density(Fraction(1, 3))


def test_exchange_is_involution():
    rng = random.Random(3)
    box = [(x,) for x in range(-2, 3)]
    for _ in range(20):
        cfg = Configuration.from_dict({x: rng.randint(0, 1) for x in box})
        x, y = rng.sample(box, 2)
        assert cfg.exchange(x, y).exchange(x, y) == cfg


def test_exchange_fixes_equal_occupations():
    cfg = Configuration.from_dict({(0,): 1, (1,): 1})
    assert cfg.exchange((0,), (1,)) == cfg


def test_expectation_of_product_of_occupations():
    f = LocalFunction.occupation(0, RHO) * LocalFunction.occupation(1, RHO)
    for theta in (Fraction(1, 4), Fraction(2, 3)):
        assert exact_expectation(f, theta) == theta**2


def test_expectation_of_tasep_current():
    W = raw_current(tasep_1d(True), RHO, 0)
    for theta in (Fraction(1, 5), Fraction(1, 2), Fraction(7, 10)):
        assert exact_expectation(W, theta) == theta * (1 - theta)


def test_expectation_of_centered_pair():
    f = LocalFunction.eta([0, 1], RHO3)
    theta = Fraction(3, 4)
    assert exact_expectation(f, theta) == (theta - RHO3.rho) ** 2


def test_box_too_large():
    f = LocalFunction.eta(range(25), RHO)
    with pytest.raises(BoxTooLarge):
        exact_expectation(f, 0.5)


def test_derivative_oracle_matches_curve():
    rng = random.Random(4)
    for _ in range(20):
        f = random_function(rng, RHO3, dim=1, radius=1, rational=True)
        _, deriv = f.expectation_curve(RHO3.rho)
        assert exact_expectation_derivative(f, RHO3.rho) == deriv


def test_generator_pointwise_constant_is_zero():
    one = LocalFunction.constant(1, RHO) + LocalFunction.eta([0], RHO)
    cfg = {(x,): 1 if x % 2 else 0 for x in range(-2, 3)}
    # only the eta part moves; a pure constant gives zero on every config
    pure = LocalFunction.constant(3, RHO)
    assert generator_pointwise(ssep_1d(), "forward", pure, cfg) == 0
    assert generator_pointwise(tasep_1d(), "adjoint", one, cfg) == generator_pointwise(
        tasep_1d(), "adjoint", one - pure, cfg
    )


def test_generator_pointwise_ssep_single_jump():
    # xi(-1)=1, xi(0)=0, xi(1)=0: only the jump -1 -> 0 moves mass into 0
    f = LocalFunction.occupation(0, RHO)
    cfg = {(-1,): 1, (0,): 0, (1,): 0}
    assert generator_pointwise(ssep_1d(True), "symmetric", f, cfg) == Fraction(1, 2)


def test_pair_bruteforce_matches_closed_form():
    rng = random.Random(5)
    from asepdiff import project_to_G

    for _ in range(60):
        g = project_to_G(random_function(rng, RHO3, dim=1, radius=1, rational=True))
        f = project_to_G(random_function(rng, RHO3, dim=1, radius=1, rational=True))
        assert pair_rho0_bruteforce(g, f) == pair_rho0(g, f)


def test_pair_bruteforce_matches_closed_form_float_2d():
    rng = random.Random(6)
    from asepdiff import project_to_G

    for _ in range(25):
        g = project_to_G(random_function(rng, Density(0.4), dim=2, radius=1, maxdeg=2))
        f = project_to_G(random_function(rng, Density(0.4), dim=2, radius=1, maxdeg=2))
        assert pair_rho0_bruteforce(g, f) == pytest.approx(pair_rho0(g, f), abs=1e-12)


def test_pair_gradient_telescopes_to_zero():
    grad = LocalFunction.gradient(0, 1, RHO)
    f = LocalFunction.eta([0, 1], RHO)
    assert pair_rho0_bruteforce(grad, f) == 0
    assert pair_rho0(grad, f) == 0


def test_pair_single_site():
    e0 = LocalFunction.eta([0], RHO3)
    assert pair_rho0_bruteforce(e0, e0) == RHO3.chi
    assert pair_rho0(e0, e0) == RHO3.chi


def test_bernoulli_measures_invariant_under_all_generators():
    rng = random.Random(7)
    for kernel, dim in ((tasep_1d(True), 1), (ssep_1d(True), 1)):
        for kind in ("forward", "adjoint", "symmetric"):
            for _ in range(5):
                f = random_function(rng, RHO3, dim=dim, radius=1, rational=True)
                lf = apply_generator(kernel, kind, f)
                for theta in (Fraction(1, 5), Fraction(1, 2), Fraction(5, 6)):
                    assert exact_expectation(lf, theta) == 0


def test_enumeration_counts():
    assert len(list(enumerate_configurations([(0,), (1,)]))) == 4
    assert len(list(enumerate_configurations([(0, 0), (1, 0), (0, 1)]))) == 8

"""Identity suite: every supporting lemma and exact relation, run as checks.

Each item evaluates one identity on deterministic pseudo-random inputs and
records the worst defect together with the tolerance it must meet.  In
rational mode (Fraction density and kernel weights) most items are exact
and are required to come out identically zero.

Items:

  site_sum_identity      sum over the support box of Cov(g, xi(x)) equals
                         chi d/dtheta<g>|_rho for EVERY local g (for
                         mean-zero g this is the statement that the summed
                         pairing of g with the occupation field reduces to
                         the density derivative; the covariance form is
                         box independent).  Left side by brute enumeration,
                         right side by exact Lagrange differentiation.
  translation_nullity    tau_h g - g reduces to zero (t and quotient) for
                         g in G_rho.
  gradient_gram          << grad_k, grad_l >> = chi (S^{-1})_{kl}.
  gradient_vs_sym_range  << grad_k, L^s g >> = 0.
  sym_range_pairing      << L^s g_b, g_{b'} >> = - <g_b, g_{b'}>_{rho,0}
                         on pairs whose L^s image reduces inside the basis.
  drift_pairing          t_l(L g) = - <w_l, g>_{rho,0} for g in G_rho.
  reflection_commutation R(Lf) = L*(Rf) at the coefficient level.
  current_reversal       R w_i = -w_i* at the coefficient level.
  current_decomposition  w_i - W_i^s + h_i reduces to zero in the quotient.
  dirichlet_symmetry     M = M^T.
  dirichlet_psd          min eigenvalue of M >= -1e-10.
  reflection_isometry    << Ru, Rv >> = << u, v >> on a reflection-closed
                         basis.
  gradient_reflection    |R grad_k + grad_k| = 0 in the fluctuation space.
  cauchy_schwarz         <<u,v>>^2 <= <<u,u>> <<v,v>>.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .fluctuation import (
    FluctuationSpace,
    build_quotient_basis,
    pair_rho0,
    reduce_to_classes,
    t_vec,
)
from .generator import GeneratorKind, apply_generator, check_commutation, make_currents
from .kernel import JumpKernel
from .localfn import Density, LocalFunction, project_to_G
from .oracle import exact_covariance, exact_expectation_derivative


@dataclass(frozen=True)
class CheckItem:
    name: str
    max_defect: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "max_defect": self.max_defect,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


DEFAULT_TOLERANCES = {
    "site_sum_identity": 1e-12,
    "translation_nullity": 1e-12,
    "gradient_gram": 1e-12,
    "gradient_vs_sym_range": 1e-10,
    "sym_range_pairing": 1e-9,
    "drift_pairing": 1e-12,
    "reflection_commutation": 1e-12,
    "current_reversal": 1e-12,
    "current_decomposition": 1e-12,
    "dirichlet_symmetry": 1e-12,
    "dirichlet_psd": 1e-10,
    "reflection_isometry": 1e-12,
    "gradient_reflection": 1e-12,
    "cauchy_schwarz": 1e-12,
}


def random_local_function(rng: random.Random, density: Density, dim: int,
                          radius: int = 2, nterms: int = 3, maxdeg: int = 3,
                          rational: bool = False, centered: bool = False) -> LocalFunction:
    """Deterministic pseudo-random local function for identity sweeps."""
    sites = sorted(product(range(-radius, radius + 1), repeat=dim))
    terms: dict = {}
    for _ in range(rng.randint(1, nterms)):
        deg = rng.randint(0 if not centered else 1, maxdeg)
        key = tuple(sorted(rng.sample(sites, deg)))
        if rational:
            coef = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        else:
            coef = rng.uniform(-2, 2)
        if coef == 0:
            coef = 1 if not rational else Fraction(1)
        terms[key] = terms.get(key, 0) + coef
    f = LocalFunction(density, terms)
    if f.is_zero():
        f = LocalFunction.eta([(0,) * dim], density)
    return f


def random_g_rho(rng: random.Random, density: Density, dim: int, **kw) -> LocalFunction:
    g = project_to_G(random_local_function(rng, density, dim, **kw))
    if g.is_zero():
        g = LocalFunction.eta([(0,) * dim, (1,) + (0,) * (dim - 1)], density)
    return g


def _defect(value) -> float:
    return float(abs(value))


def run_identity_suite(
    kernel: JumpKernel,
    density: Density,
    radius: int = 3,
    kmax: int = 3,
    rational: bool = False,
    seed: int = 2024,
    tolerances: dict | None = None,
    samples: int = 12,
) -> list[CheckItem]:
    """Run every identity item at one (kernel, rho, basis) triple."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    rng = random.Random(seed)
    dim = kernel.dimension
    basis = build_quotient_basis(dim, radius, kmax)
    space = FluctuationSpace(kernel, density, basis)
    chi = density.chi
    items: list[CheckItem] = []

    def add(name, defect, detail=""):
        items.append(
            CheckItem(name, float(defect), tol[name], float(defect) <= tol[name], detail)
        )

    # --- site-sum identity (box independent covariance form) -------------
    worst = 0
    for _ in range(samples):
        g = random_local_function(rng, density, dim, radius=1, maxdeg=2, rational=rational)
        box = sorted(g.support())
        if not box:
            continue
        lhs = 0
        for x in box:
            lhs = lhs + exact_covariance(g, LocalFunction.occupation(x, density), density.rho)
        rhs = chi * exact_expectation_derivative(g, density.rho)
        worst = max(worst, _defect(lhs - rhs))
        # enlarging the box must not change the sum
        wide = sorted(set(box) | {tuple(c + 1 for c in box[0])})
        lhs_wide = 0
        for x in wide:
            lhs_wide = lhs_wide + exact_covariance(g, LocalFunction.occupation(x, density), density.rho)
        worst = max(worst, _defect(lhs_wide - rhs))
    add("site_sum_identity", worst)

    # --- Lemma: translates are null in the quotient ----------------------
    worst = 0
    for _ in range(samples):
        g = random_g_rho(rng, density, dim, radius=1, rational=rational)
        h = tuple(rng.randint(-2, 2) for _ in range(dim))
        delta = g.translate(h) - g
        vec = reduce_to_classes(delta, basis)
        worst = max(worst, vec.max_abs())
    add("translation_nullity", worst)

    # --- gradient Gram ----------------------------------------------------
    expected = float(chi) * space.s_inv
    exact_grid = np.zeros((dim, dim))
    for k in range(dim):
        for l in range(dim):
            exact_grid[k, l] = space.inner(space.gradient_vector(k), space.gradient_vector(l))
    add(
        "gradient_gram",
        max(
            float(np.max(np.abs(exact_grid - expected))),
            float(np.max(np.abs(space.gradient_gram() - expected))),
        ),
    )

    # --- gradients orthogonal to the symmetric range ----------------------
    worst = 0
    for cls in basis.classes[: max(10, samples)]:
        image = apply_generator(kernel, GeneratorKind.SYMMETRIC, cls.representative(density))
        vec = space.reduce(image)
        for k in range(dim):
            worst = max(worst, _defect(space.gradient_inner(k, vec)))
    add("gradient_vs_sym_range", worst)

    # --- symmetric range pairs back to the negative pairing ---------------
    worst = 0
    used = 0
    for cls in basis.classes:
        gb = cls.representative(density)
        image = apply_generator(kernel, GeneratorKind.SYMMETRIC, gb)
        vec = space.reduce(image)
        if vec.overflow:
            continue
        for other in basis.classes[:6]:
            go = other.representative(density)
            lhs = space.inner(vec, space.reduce(go))
            rhs = -float(pair_rho0(gb, go))
            worst = max(worst, _defect(lhs - rhs))
            used += 1
        if used >= 6 * samples:
            break
    add("sym_range_pairing", worst, detail=f"{used} in-basis pairs")

    # --- t(Lg) against the current pairing --------------------------------
    currents = [make_currents(kernel, density, axis) for axis in range(dim)]
    worst = 0
    for _ in range(samples):
        g = random_g_rho(rng, density, dim, radius=1, rational=rational)
        lg = apply_generator(kernel, GeneratorKind.FORWARD, g)
        tv = t_vec(lg, dim)
        for axis in range(dim):
            rhs = -pair_rho0(currents[axis].w, g)
            worst = max(worst, _defect(tv[axis] - rhs))
    add("drift_pairing", worst)

    # --- reflection intertwines L and L* -----------------------------------
    testset = [random_local_function(rng, density, dim, radius=1, maxdeg=3, rational=rational)
               for _ in range(samples)]
    testset.append(LocalFunction.eta([(0,) * dim], density))
    add("reflection_commutation", check_commutation(kernel, testset))

    # --- reflected currents -------------------------------------------------
    worst = 0
    for cs in currents:
        worst = max(worst, (cs.w.reflect() + cs.w_star).max_abs_coeff())
        worst = max(worst, (cs.W_s.reflect() + cs.W_s).max_abs_coeff())
        worst = max(worst, (cs.h.reflect() - cs.h).max_abs_coeff())
    add("current_reversal", worst)

    # --- w = W^s - h in the quotient ----------------------------------------
    worst = 0
    for cs in currents:
        delta = cs.w - cs.W_s + cs.h
        vec = reduce_to_classes(delta, basis)
        worst = max(worst, vec.max_abs())
        delta_star = cs.w_star - cs.W_s - cs.h
        vec_star = reduce_to_classes(delta_star, basis)
        worst = max(worst, vec_star.max_abs())
    add("current_decomposition", worst)

    # --- Dirichlet matrix shape ----------------------------------------------
    add("dirichlet_symmetry", space.m_symmetry_defect)
    min_eig = float(space.m_eigvals[0]) if len(basis) else 0.0
    add("dirichlet_psd", max(0.0, -min_eig))

    # --- reflection is an isometry ---------------------------------------------
    worst = 0
    pool = [space.reduce(random_g_rho(rng, density, dim, radius=1, rational=rational))
            for _ in range(samples)]
    pool += [space.reduce(cs.w) for cs in currents]
    for i, u in enumerate(pool):
        for v in pool[i:]:
            lhs = space.inner(u.reflected(), v.reflected())
            rhs = space.inner(u, v)
            worst = max(worst, _defect(lhs - rhs))
    add("reflection_isometry", worst)

    # --- gradients flip sign under reflection ------------------------------------
    worst = 0
    for k in range(dim):
        gk = space.gradient_vector(k)
        worst = max(worst, _defect(space.norm_sq(gk.reflected() + gk)))
    add("gradient_reflection", worst)

    # --- Cauchy-Schwarz at this truncation -----------------------------------------
    worst = 0
    for i, u in enumerate(pool):
        nu = space.norm_sq(u)
        for v in pool[i + 1 :]:
            uv = space.inner(u, v)
            slack = uv * uv - nu * space.norm_sq(v)
            worst = max(worst, max(0.0, float(slack)))
    add("cauchy_schwarz", worst)

    return items

"""Independent brute-force ground truth.

Everything here is deliberately slow and literal: expectations by full
enumeration of occupation configurations, generator action by evaluating
the defining double sum pointwise, and the summed pairing by enumerating
shifts.  The symbolic fast paths elsewhere in the package are contractually
required to match these routines, exactly in rational mode and to 1e-12 in
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import BoxTooLarge, UncoveredSite
from .kernel import JumpKernel
from .localfn import LocalFunction, Site, site

MAX_BOX_SITES = 24


@dataclass(frozen=True)
class Configuration:
    """A finite occupation configuration: box of sites, each 0 or 1."""

    occupancy: tuple[tuple[Site, int], ...]

    @classmethod
    def from_dict(cls, occ) -> "Configuration":
        return cls(tuple(sorted((site(x), int(v)) for x, v in occ.items())))

    def as_dict(self) -> dict[Site, int]:
        return dict(self.occupancy)

    def box(self) -> tuple[Site, ...]:
        return tuple(x for x, _ in self.occupancy)

    def value(self, x) -> int:
        s = site(x)
        for y, v in self.occupancy:
            if y == s:
                return v
        raise UncoveredSite(f"site {s} not in configuration box")

    def exchange(self, x, y) -> "Configuration":
        """The configuration with the contents of x and y swapped."""
        sx, sy = site(x), site(y)
        vx, vy = self.value(sx), self.value(sy)
        if vx == vy:
            return self
        out = []
        for s, v in self.occupancy:
            if s == sx:
                out.append((s, vy))
            elif s == sy:
                out.append((s, vx))
            else:
                out.append((s, v))
        return Configuration(tuple(out))


def enumerate_configurations(box):
    """All 2^n occupation configurations on the given sites."""
    sites = tuple(sorted(site(x) for x in set(box)))
    if len(sites) > MAX_BOX_SITES:
        raise BoxTooLarge(f"{len(sites)} sites exceed the enumeration limit {MAX_BOX_SITES}")
    for bits in product((0, 1), repeat=len(sites)):
        yield dict(zip(sites, bits))


def _weight(cfg: dict, theta):
    w = 1
    for x in sorted(cfg):
        w = w * (theta if cfg[x] else (1 - theta))
    return w


def exact_expectation(f: LocalFunction, theta):
    """<f>_theta by full enumeration over the support of f.

    Exact when theta and the coefficients are rational.
    """
    sites = sorted(f.support())
    if not sites:
        return f.constant_term()
    total = 0
    for cfg in enumerate_configurations(sites):
        total = total + f.evaluate(cfg) * _weight(cfg, theta)
    return total


def exact_expectation_derivative(f: LocalFunction, theta, box=None):
    """d/dtheta <f>_theta by exact polynomial interpolation.

    <f>_theta is a polynomial in theta of degree at most the box size, so
    Lagrange differentiation through n+1 rational nodes reproduces the
    derivative exactly (up to roundoff when f has float coefficients).
    This is independent of the eta-basis closed form.
    """
    sites = sorted(f.support()) if box is None else sorted(site(x) for x in box)
    n = len(sites)
    if n == 0:
        return 0
    nodes = [Fraction(k + 1, n + 2) for k in range(n + 1)]
    values = []
    for node in nodes:
        total = 0
        for cfg in enumerate_configurations(sites):
            total = total + f.evaluate(cfg) * _weight(cfg, node)
        values.append(total)
    # Derivative of the Lagrange interpolant at theta.
    deriv = 0
    for i, xi in enumerate(nodes):
        # d/dtheta prod_{j != i} (theta - x_j)/(x_i - x_j)
        term = 0
        for k, xk in enumerate(nodes):
            if k == i:
                continue
            prod_term = 1
            for j, xj in enumerate(nodes):
                if j == i or j == k:
                    continue
                prod_term = prod_term * (theta - xj) / (xi - xj)
            term = term + prod_term / (xi - xk)
        deriv = deriv + values[i] * term
    return deriv


def exact_covariance(f: LocalFunction, g: LocalFunction, theta):
    """Cov_theta(f, g) by enumeration over the union support."""
    sites = sorted(set(f.support()) | set(g.support()))
    if not sites:
        return 0
    ef = 0
    eg = 0
    efg = 0
    for cfg in enumerate_configurations(sites):
        w = _weight(cfg, theta)
        vf = f.evaluate(cfg)
        vg = g.evaluate(cfg)
        ef = ef + w * vf
        eg = eg + w * vg
        efg = efg + w * vf * vg
    return efg - ef * eg


def generator_pointwise(kernel: JumpKernel, kind, f: LocalFunction, config) -> object:
    """Literal evaluation of the generator sum at one configuration:

        sum_{x,y} q(y-x) xi(x) (1 - xi(y)) (f(xi^{x,y}) - f(xi)),

    with q the jump law selected by `kind` (forward / adjoint / symmetric).
    The sum is restricted to ordered pairs touching the support of f; all
    other terms vanish because the exchange does not change f.  The
    configuration must cover the support enlarged by the kernel range.
    """
    from .generator import GeneratorKind  # local import to avoid a cycle

    law = GeneratorKind(kind).law(kernel)
    cfg = Configuration.from_dict(config if isinstance(config, dict) else dict(config))
    support = sorted(f.support())
    if not support:
        return 0
    dim = len(support[0])
    base = f.evaluate(cfg.as_dict())
    pairs = set()
    for z in sorted(law):
        if law[z] == 0:
            continue
        for s in support:
            pairs.add((s, tuple(a + b for a, b in zip(s, z))))  # jump out of support
            pairs.add((tuple(a - b for a, b in zip(s, z)), s))  # jump into support
    total = 0
    for x, y in sorted(pairs):
        z = tuple(b - a for a, b in zip(x, y))
        rate = law.get(z, 0)
        if rate == 0:
            continue
        vx = cfg.value(x)
        vy = cfg.value(y)
        if vx == 1 and vy == 0:
            swapped = cfg.exchange(x, y)
            total = total + rate * (f.evaluate(swapped.as_dict()) - base)
    return total


def pair_rho0_bruteforce(g: LocalFunction, f: LocalFunction) -> object:
    """The summed pairing <g, f>_{rho,0} = sum_x <g . tau_x f>_rho by
    enumeration.

    Both functions must be mean-zero at the reference density, which makes
    every non-overlapping shift vanish by independence; a margin of
    non-overlapping shifts is included in the sum so that this vanishing is
    verified rather than assumed.
    """
    rho = g.density.rho
    gs = sorted(g.support())
    fs = sorted(f.support())
    if not gs or not fs:
        return 0
    dim = len(gs[0])
    lo = [min(s[i] for s in gs) - max(s[i] for s in fs) for i in range(dim)]
    hi = [max(s[i] for s in gs) - min(s[i] for s in fs) for i in range(dim)]
    total = 0
    margin = 1
    for shift in product(*[range(lo[i] - margin, hi[i] + margin + 1) for i in range(dim)]):
        shifted = f.translate(shift)
        sites = sorted(set(g.support()) | set(shifted.support()))
        inner = 0
        for cfg in enumerate_configurations(sites):
            inner = inner + _weight(cfg, rho) * g.evaluate(cfg) * shifted.evaluate(cfg)
        total = total + inner
    return total


def t_vec_bruteforce(g: LocalFunction, dim: int):
    """t_i(g) = <g, sum_x x_i xi(x)> by enumeration (g mean-zero, so the sum
    over any box containing the support is box-independent)."""
    sites = sorted(g.support())
    out = [0] * dim
    for x in sites:
        cov = exact_covariance(g, LocalFunction.occupation(x, g.density), g.density.rho)
        for i in range(dim):
            out[i] = out[i] + x[i] * cov
    return tuple(out)

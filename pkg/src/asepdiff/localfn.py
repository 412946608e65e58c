"""Exact algebra of local functions of an exclusion configuration.

A local function is stored as a finite expansion in centered-occupation
monomials

    eta_A(xi) = prod_{x in A} (xi(x) - rho),        A a finite set of sites,

which form an orthogonal basis of L^2 of the Bernoulli product measure at
density rho, graded by degree |A|.  The empty set is the constant 1.  All
operations below (evaluation, expectations, products, translations,
reflection, centering) are closed-form in this basis and are exact when the
density and all coefficients are `fractions.Fraction`; with floats they are
correct to roundoff.

Sites are tuples of ints.  Monomial keys are stored as sorted site tuples
so that hashing, iteration order and textual rendering are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Iterable, Mapping

from .errors import DensityMismatch, NonCenteredInput, UncoveredSite

Site = tuple[int, ...]
MonomialKey = tuple[Site, ...]


def site(x) -> Site:
    """Normalize a site given as an int (dimension 1) or an iterable of ints."""
    if isinstance(x, int):
        return (x,)
    s = tuple(int(c) for c in x)
    return s


def monomial_key(sites: Iterable) -> MonomialKey:
    """Canonical (sorted, duplicate-checked) key for the monomial eta_A."""
    ss = tuple(sorted(site(x) for x in sites))
    if len(set(ss)) != len(ss):
        raise ValueError(f"monomial sites must be distinct, got {ss}")
    if len({len(s) for s in ss}) > 1:
        raise ValueError(f"sites of mixed dimension: {ss}")
    return ss


@dataclass(frozen=True)
class Density:
    """Particle density rho in the open interval (0,1).

    The endpoints are rejected: chi = rho(1-rho) enters the variational
    norm and the S-inverse pairings as a divisor, and both degenerate at
    rho in {0,1}.  rho may be a float or a Fraction; Fraction makes the
    whole local-function algebra exact.
    """

    rho: float | Fraction

    def __post_init__(self):
        if not (0 < self.rho < 1):
            raise ValueError(f"density must satisfy 0 < rho < 1, got {self.rho}")

    @property
    def chi(self):
        """Static compressibility chi(rho) = rho(1-rho)."""
        return self.rho * (1 - self.rho)

    @property
    def exact(self) -> bool:
        return isinstance(self.rho, Rational)


class LocalFunction:
    """Finite expansion sum_A c_A eta_A at a fixed density.

    Instances are immutable by convention: every operation returns a new
    object and `terms` must not be mutated after construction.  Zero
    coefficients are pruned on construction.
    """

    __slots__ = ("density", "terms")

    def __init__(self, density: Density, terms: Mapping[MonomialKey, object] | None = None):
        self.density = density
        clean = {}
        for key, coef in (terms or {}).items():
            if coef == 0:
                continue
            clean[key] = coef
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, density: Density) -> "LocalFunction":
        return cls(density, {})

    @classmethod
    def constant(cls, value, density: Density) -> "LocalFunction":
        return cls(density, {(): value})

    @classmethod
    def eta(cls, sites: Iterable, density: Density, coef=1) -> "LocalFunction":
        """The monomial eta_A = prod_{x in A}(xi(x) - rho), scaled by coef."""
        return cls(density, {monomial_key(sites): coef})

    @classmethod
    def occupation(cls, x, density: Density) -> "LocalFunction":
        """The occupation variable xi(x) = eta_{x} + rho."""
        return cls(density, {(site(x),): 1, (): density.rho})

    @classmethod
    def gradient(cls, axis: int, dim: int, density: Density) -> "LocalFunction":
        """xi(0) - xi(e_axis), the occupation gradient along an axis (0-based)."""
        e = tuple(1 if i == axis else 0 for i in range(dim))
        origin = (0,) * dim
        return cls(density, {(origin,): 1, (e,): -1})

    # -- inspection ---------------------------------------------------

    def coefficient(self, sites) -> object:
        return self.terms.get(monomial_key(sites), 0)

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def support(self) -> frozenset[Site]:
        out: set[Site] = set()
        for k in self.terms:
            out.update(k)
        return frozenset(out)

    def dimension(self) -> int | None:
        """Lattice dimension, inferred from any site; None for constants."""
        for k in self.terms:
            if k:
                return len(k[0])
        return None

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs_coeff(self):
        return max((abs(c) for c in self.terms.values()), default=0)

    def constant_term(self):
        return self.terms.get((), 0)

    def degree_one_sum(self):
        return sum(c for k, c in sorted(self.terms.items()) if len(k) == 1)

    # -- arithmetic ---------------------------------------------------

    def _check_density(self, other: "LocalFunction"):
        if self.density.rho != other.density.rho:
            raise DensityMismatch(
                f"cannot combine functions at rho={self.density.rho} and rho={other.density.rho}"
            )

    def __add__(self, other: "LocalFunction") -> "LocalFunction":
        self._check_density(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return LocalFunction(self.density, out)

    def __sub__(self, other: "LocalFunction") -> "LocalFunction":
        return self + (-other)

    def __neg__(self) -> "LocalFunction":
        return LocalFunction(self.density, {k: -c for k, c in self.terms.items()})

    def scale(self, factor) -> "LocalFunction":
        return LocalFunction(self.density, {k: factor * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, LocalFunction):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    # -- transforms ---------------------------------------------------

    def translate(self, h) -> "LocalFunction":
        """tau_h: eta_A -> eta_{A+h} (coefficient preserving)."""
        hv = site(h)
        out = {}
        for k, c in self.terms.items():
            out[tuple(sorted(tuple(x + d for x, d in zip(s, hv)) for s in k))] = c
        return LocalFunction(self.density, out)

    def reflect(self) -> "LocalFunction":
        """R: eta_A -> eta_{-A}; an involution."""
        out = {}
        for k, c in self.terms.items():
            out[tuple(sorted(tuple(-x for x in s) for s in k))] = c
        return LocalFunction(self.density, out)

    # -- evaluation and moments ----------------------------------------

    def evaluate(self, config: Mapping):
        """Value at a finite occupation configuration (site -> {0,1}).

        The configuration must cover the support.
        """
        cfg = {site(x): v for x, v in config.items()}
        rho = self.density.rho
        total = 0
        for k, c in sorted(self.terms.items()):
            term = c
            for s in k:
                if s not in cfg:
                    raise UncoveredSite(f"configuration does not cover site {s}")
                term = term * (cfg[s] - rho)
            total = total + term
        return total

    def expectation_curve(self, theta):
        """Mean and d/dtheta of the mean under the Bernoulli(theta) measure.

        <eta_A>_theta = (theta - rho)^{|A|}, extended linearly; both the
        value and the derivative are polynomials in theta and are returned
        exactly for rational inputs.
        """
        u = theta - self.density.rho
        value = 0
        deriv = 0
        for k, c in sorted(self.terms.items()):
            n = len(k)
            value = value + c * u**n
            if n >= 1:
                deriv = deriv + c * n * u ** (n - 1)
        return value, deriv

    def mean(self):
        """Expectation at the reference density (the eta_empty coefficient)."""
        return self.constant_term()

    # -- rendering ------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            if not k:
                parts.append(f"{c}·1")
            else:
                body = ",".join(str(s[0]) if len(s) == 1 else str(s) for s in k)
                parts.append(f"{c}·η{{{body}}}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"LocalFunction(rho={self.density.rho}, {len(self.terms)} terms)"


def multiply(f: LocalFunction, g: LocalFunction) -> LocalFunction:
    """Pointwise product, re-expanded in the eta basis.

    At a shared site the square reduces by xi^2 = xi:

        (xi(x)-rho)^2 = (1-2 rho)(xi(x)-rho) + chi(rho),

    so eta_A * eta_B = sum over subsets T of the overlap of
    (1-2rho)^{|T|} chi^{|overlap|-|T|} eta_{(A xor B) + T}.
    """
    f._check_density(g)
    rho = f.density.rho
    chi = f.density.chi
    lin = 1 - 2 * rho
    out: dict[MonomialKey, object] = {}
    for ka, ca in f.terms.items():
        sa = set(ka)
        for kb, cb in g.terms.items():
            sb = set(kb)
            shared = sorted(sa & sb)
            rest = tuple(sorted(sa ^ sb))
            base = ca * cb
            if not shared:
                out[rest] = out.get(rest, 0) + base
                continue
            m = len(shared)
            for tsize in range(m + 1):
                weight = base * lin**tsize * chi ** (m - tsize)
                for kept in combinations(shared, tsize):
                    key = tuple(sorted(rest + kept))
                    out[key] = out.get(key, 0) + weight
    return LocalFunction(f.density, out)


def in_G_rho(f: LocalFunction, atol: float = 1e-12) -> bool:
    """Membership in the fluctuation class G_rho.

    In the eta basis the two defining moment conditions (zero mean and zero
    density-derivative of the mean at rho) reduce exactly to: the constant
    coefficient is 0 and the degree-1 coefficients sum to 0.  `atol` is the
    absolute slack used for float coefficients; exact inputs need none.
    """
    scale = max(1, abs(f.max_abs_coeff()))
    return abs(f.constant_term()) <= atol * scale and abs(f.degree_one_sum()) <= atol * scale


def project_to_G(f: LocalFunction) -> LocalFunction:
    """Normalize f into G_rho:  f - <f>_rho - (xi(0)-rho) d/dtheta<f>|_rho.

    Only the constant and the origin degree-1 coefficient change; the map
    is idempotent and kills constants.
    """
    c0 = f.constant_term()
    s1 = f.degree_one_sum()
    out = dict(f.terms)
    if c0 != 0:
        out.pop((), None)
    if s1 != 0:
        dim = f.dimension()
        origin = ((0,) * dim,)
        out[origin] = out.get(origin, 0) - s1
    return LocalFunction(f.density, out)

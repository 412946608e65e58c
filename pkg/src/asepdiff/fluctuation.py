"""The inner-product layer of the fluctuation space.

For mean-zero local g, f the summed pairing is

    <g, f>_{rho,0} = sum_x <g . tau_x f>_rho
                   = sum_x sum_A c_A(g) c_{A-x}(f) chi^{|A|},

a finite sum because distinct monomials are orthogonal under mu_rho with
<eta_A eta_A> = chi^{|A|}.  The squared variational norm of g is

    |g|^2 = sup_alpha ( 2 sum_i alpha_i t_i(g) - chi alpha.S alpha )
          + sup_f     ( 2 <g,f>_{rho,0} - <f, (-L^s) f>_{rho,0} ),

with t_i(g) = <g, sum_x x_i xi(x)>.  The alpha-supremum is an explicit
concave quadratic: the maximizer is alpha* = (chi S)^{-1} t and the value
is t . S^{-1} t / chi.  The f-supremum is evaluated on a finite basis of
translation classes of monomials (a Galerkin restriction, hence a monotone
lower bound): with M the Dirichlet matrix and qt(g) the pairing vector of
g against the class representatives, the restricted supremum is
qt(g) . M^+ qt(g), attained at the linear solve c = M^+ qt(g).

Translates are identified (tau_h g = g in the fluctuation space for
g in G_rho), so classes are monomial site sets anchored with their
lexicographically least site at the origin.  Degree-0/1 classes are
excluded from the quotient: for g in G_rho the degree-1 coefficients sum
to zero, so their entire contribution to pairings is carried by t(g); this
reduction is covered by property tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, NamedTuple

import numpy as np

from .errors import NonCenteredInput, NotInG, SingularDirichlet
from .generator import GeneratorKind, apply_generator
from .kernel import JumpKernel
from .localfn import Density, LocalFunction, MonomialKey, Site, in_G_rho


class TranslationClass(NamedTuple):
    """A translation class of monomials, keyed by the anchored representative
    (lexicographically least site at the origin)."""

    sites: MonomialKey

    @property
    def degree(self) -> int:
        return len(self.sites)

    def sort_key(self):
        return (len(self.sites), self.sites)

    def reflected(self) -> "TranslationClass":
        reflected = [tuple(-c for c in s) for s in self.sites]
        return TranslationClass(anchor(tuple(sorted(reflected)))[0])

    def representative(self, density: Density) -> LocalFunction:
        return LocalFunction(density, {self.sites: 1})

    def __str__(self) -> str:
        body = ",".join(str(s[0]) if len(s) == 1 else str(s) for s in self.sites)
        return f"[{body}]"


def anchor(key: MonomialKey) -> tuple[MonomialKey, Site]:
    """Translate a monomial key so its lexicographically least site is the
    origin; returns (anchored key, shift applied)."""
    base = min(key)
    shift = tuple(-c for c in base)
    anchored = tuple(sorted(tuple(a + b for a, b in zip(s, shift)) for s in key))
    return anchored, shift


def _diameters(key: MonomialKey) -> tuple[int, ...]:
    dim = len(key[0])
    return tuple(
        max(s[i] for s in key) - min(s[i] for s in key) for i in range(dim)
    )


@dataclass(frozen=True)
class QuotientBasis:
    """Ordered, reflection-closed list of translation classes.

    Membership rule: degree in [2, kmax] and per-coordinate diameter of the
    site set at most r.  The rule is translation and reflection invariant,
    so the listing is closed under reflection by construction, and every
    anchored representative automatically lies in the centered radius-r box.
    Classes are ordered by (degree, site list) for reproducible matrices.
    """

    dimension: int
    radius: int
    kmax: int
    classes: tuple[TranslationClass, ...]
    index: dict = field(repr=False, hash=False, compare=False)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __contains__(self, cls: TranslationClass) -> bool:
        return cls in self.index

    def position(self, cls: TranslationClass) -> int:
        return self.index[cls]

    def contains_basis(self, other: "QuotientBasis") -> bool:
        return all(c in self.index for c in other.classes)

    def listing(self) -> list[str]:
        return [str(c) for c in self.classes]


def build_quotient_basis(dim: int, radius: int, kmax: int) -> QuotientBasis:
    """Enumerate all translation classes with degree in [2, kmax] whose site
    set has per-coordinate diameter at most `radius`."""
    if radius < 1 or kmax < 2:
        raise ValueError("need radius >= 1 and kmax >= 2")
    origin = (0,) * dim
    box = [s for s in product(range(-radius, radius + 1), repeat=dim)]
    positive = sorted(s for s in box if s > origin)
    classes = []
    for degree in range(2, kmax + 1):
        for rest in combinations(positive, degree - 1):
            key = tuple(sorted((origin,) + rest))
            if all(dm <= radius for dm in _diameters(key)):
                classes.append(TranslationClass(key))
    classes.sort(key=TranslationClass.sort_key)
    index = {c: i for i, c in enumerate(classes)}
    basis = QuotientBasis(dim, radius, kmax, tuple(classes), index)
    for c in classes:  # closure is structural; guard against regressions
        if c.reflected() not in index:
            raise AssertionError(f"reflection closure violated at {c}")
    return basis


@dataclass(frozen=True)
class FluctuationVector:
    """Reduced coordinates of a fluctuation-space element.

    tvec     the d-vector t(g);
    qcoef    translation-class coefficients of the degree >= 2 content that
             lies inside the chosen basis;
    overflow classes outside the basis, kept for diagnostics only (they pair
             to zero against every in-basis function, so they never enter
             Galerkin values).
    """

    tvec: tuple
    qcoef: dict
    overflow: dict
    chi: object

    def overflow_mass(self):
        return sum(abs(c) for c in self.overflow.values())

    def qtilde(self, basis: QuotientBasis) -> np.ndarray:
        """Pairing coordinates against class representatives:
        qt_b = qcoef_b * chi^degree(b)."""
        out = np.zeros(len(basis))
        for cls, coef in self.qcoef.items():
            out[basis.position(cls)] = float(coef * self.chi**cls.degree)
        return out

    def tvec_array(self) -> np.ndarray:
        return np.array([float(t) for t in self.tvec])

    def reflected(self) -> "FluctuationVector":
        tv = tuple(-t for t in self.tvec)
        qc = {}
        for cls, coef in self.qcoef.items():
            rc = cls.reflected()
            qc[rc] = qc.get(rc, 0) + coef
        ov = {}
        for cls, coef in self.overflow.items():
            rc = cls.reflected()
            ov[rc] = ov.get(rc, 0) + coef
        return FluctuationVector(tv, qc, ov, self.chi)

    def max_abs(self):
        vals = [abs(t) for t in self.tvec]
        vals += [abs(c) for c in self.qcoef.values()]
        vals += [abs(c) for c in self.overflow.values()]
        return max(vals, default=0)

    def __add__(self, other: "FluctuationVector") -> "FluctuationVector":
        tv = tuple(a + b for a, b in zip(self.tvec, other.tvec))
        qc = dict(self.qcoef)
        for cls, coef in other.qcoef.items():
            qc[cls] = qc.get(cls, 0) + coef
        ov = dict(self.overflow)
        for cls, coef in other.overflow.items():
            ov[cls] = ov.get(cls, 0) + coef
        return FluctuationVector(tv, {c: v for c, v in qc.items() if v != 0},
                                 {c: v for c, v in ov.items() if v != 0}, self.chi)

    def __neg__(self) -> "FluctuationVector":
        return FluctuationVector(
            tuple(-t for t in self.tvec),
            {c: -v for c, v in self.qcoef.items()},
            {c: -v for c, v in self.overflow.items()},
            self.chi,
        )

    def __sub__(self, other: "FluctuationVector") -> "FluctuationVector":
        return self + (-other)


def _require_mean_zero(g: LocalFunction, what: str, atol: float) -> None:
    scale = max(1, abs(g.max_abs_coeff()))
    if abs(g.constant_term()) > atol * scale:
        raise NonCenteredInput(f"{what} requires a mean-zero function")


def t_vec(g: LocalFunction, dim: int, atol: float = 1e-12) -> tuple:
    """t_i(g) = <g, sum_x x_i xi(x)>, closed form in the eta basis:
    chi * sum over degree-1 monomials of coefficient times site coordinate.

    Requires a mean-zero input (otherwise the defining sum depends on the
    summation box); `atol` is the scaled slack granted to float inputs.
    """
    _require_mean_zero(g, "t-vector", atol)
    chi = g.density.chi
    out = [0] * dim
    for key, coef in sorted(g.terms.items()):
        if len(key) != 1:
            continue
        x = key[0]
        for i in range(dim):
            out[i] = out[i] + chi * coef * x[i]
    return tuple(out)


def pair_rho0(g: LocalFunction, f: LocalFunction, atol: float = 1e-12) -> object:
    """<g, f>_{rho,0} = sum over shifts of sum_A c_A(g) c_{A-x}(f) chi^{|A|}.

    Exact finite sum; symmetric in its arguments; both inputs must be
    mean-zero under the reference measure.
    """
    g._check_density(f)
    _require_mean_zero(g, "summed pairing", atol)
    _require_mean_zero(f, "summed pairing", atol)
    chi = g.density.chi
    total = 0
    fkeys = sorted(f.terms.items())
    for ka, ca in sorted(g.terms.items()):
        na = len(ka)
        for kb, cb in fkeys:
            if len(kb) != na:
                continue
            # translation sending kb to ka must shift every site equally
            shift = tuple(a - b for a, b in zip(ka[0], kb[0]))
            if all(tuple(b + s for b, s in zip(sb, shift)) == sa
                   for sa, sb in zip(ka, kb)):
                total = total + ca * cb * chi**na
    return total


def reduce_to_classes(g: LocalFunction, basis: QuotientBasis, atol: float = 1e-12) -> FluctuationVector:
    """Reduce g in G_rho to quotient coordinates.

    Degree >= 2 monomials are anchored to their translation class and
    accumulated (in-basis classes into qcoef, the rest into overflow);
    degree-1 content is fully carried by tvec, since for G_rho elements its
    coefficients sum to zero and it pairs to zero with everything under
    <.,.>_{rho,0}.
    """
    if not in_G_rho(g, atol=atol):
        raise NotInG("translation-quotient reduction requires a G_rho element")
    dim = basis.dimension
    tv = t_vec(g, dim) if g.terms else (0,) * dim
    qcoef: dict = {}
    overflow: dict = {}
    for key, coef in sorted(g.terms.items()):
        if len(key) < 2:
            continue
        anchored, _ = anchor(key)
        cls = TranslationClass(anchored)
        target = qcoef if cls in basis else overflow
        target[cls] = target.get(cls, 0) + coef
    qcoef = {c: v for c, v in qcoef.items() if v != 0}
    overflow = {c: v for c, v in overflow.items() if v != 0}
    return FluctuationVector(tv, qcoef, overflow, g.density.chi)


def dirichlet_matrix(kernel: JumpKernel, basis: QuotientBasis, density: Density) -> np.ndarray:
    """M[b,b'] = <g_b, (-L^s) g_{b'}>_{rho,0} over class representatives.

    L^s preserves degree and maps monomials to monomials, and distinct
    classes are orthogonal under the summed pairing with
    <g_b, g_b>_{rho,0} = chi^degree, so column b' is read off from the
    class reduction of L^s g_{b'}.  The reduction is exact (out-of-basis
    classes land in an overflow bucket and simply do not pair with basis
    elements), M is symmetric because L^s is self-adjoint and commutes with
    translations, and it is positive semidefinite as a Dirichlet form.
    """
    n = len(basis)
    m = np.zeros((n, n))
    chi = float(density.chi)
    for col, cls in enumerate(basis.classes):
        image = apply_generator(kernel, GeneratorKind.SYMMETRIC, cls.representative(density))
        vec = reduce_to_classes(image, basis)
        weight = chi**cls.degree
        for other, coef in vec.qcoef.items():
            m[basis.position(other), col] = -float(coef) * weight
    return m


class FluctuationSpace:
    """Galerkin model of the fluctuation inner product at one (kernel, rho,
    basis) triple.

    Holds S^{-1}, the Dirichlet matrix M and its eigendecomposition; the
    factorization is immutable after construction.  `inner` evaluates

        <<u, v>> = t(u) . S^{-1} t(v) / chi + qt(u) . M^+ qt(v),

    a symmetric positive-semidefinite bilinear form at every truncation,
    nondecreasing in the basis on the diagonal.
    """

    def __init__(
        self,
        kernel: JumpKernel,
        density: Density,
        basis: QuotientBasis,
        svd_cutoff: float = 1e-10,
        psd_tol: float = 1e-10,
    ):
        if kernel.dimension != basis.dimension:
            raise ValueError("kernel and basis dimension differ")
        self.kernel = kernel
        self.density = density
        self.basis = basis
        self.svd_cutoff = svd_cutoff
        self.chi = float(density.chi)
        s = np.array([[float(v) for v in row] for row in kernel.s_matrix])
        self.s_inv = np.linalg.inv(s)
        self.m_raw = dirichlet_matrix(kernel, basis, density)
        self.m_symmetry_defect = float(np.max(np.abs(self.m_raw - self.m_raw.T))) if len(basis) else 0.0
        m = 0.5 * (self.m_raw + self.m_raw.T)
        if len(basis):
            eigvals, eigvecs = np.linalg.eigh(m)
            lam_max = float(eigvals[-1]) if eigvals.size else 0.0
            if lam_max <= 0:
                raise SingularDirichlet("Dirichlet matrix has no positive spectrum")
            if float(eigvals[0]) < -psd_tol * lam_max:
                raise SingularDirichlet(
                    f"Dirichlet matrix not positive semidefinite: min eig {eigvals[0]:.3e}"
                )
            keep = eigvals > svd_cutoff * lam_max
            inv = np.where(keep, 1.0 / np.where(keep, eigvals, 1.0), 0.0)
            self.m_eigvals = eigvals
            self._m_pinv = (eigvecs * inv) @ eigvecs.T
            self.m_rank = int(keep.sum())
        else:
            self.m_eigvals = np.zeros(0)
            self._m_pinv = np.zeros((0, 0))
            self.m_rank = 0

    # -- reductions ------------------------------------------------------

    def reduce(self, g: LocalFunction) -> FluctuationVector:
        return reduce_to_classes(g, self.basis)

    def gradient_vector(self, axis: int) -> FluctuationVector:
        """The reduced gradient: t = -chi e_axis, no quotient content."""
        tv = tuple(-self.density.chi if i == axis else 0 for i in range(self.kernel.dimension))
        return FluctuationVector(tv, {}, {}, self.density.chi)

    # -- the inner product -------------------------------------------------

    def m_pinv_apply(self, vec: np.ndarray) -> np.ndarray:
        return self._m_pinv @ vec

    def inner(self, u: FluctuationVector, v: FluctuationVector) -> float:
        tu = u.tvec_array()
        tv = v.tvec_array()
        value = float(tu @ self.s_inv @ tv) / self.chi
        if len(self.basis):
            value += float(u.qtilde(self.basis) @ self._m_pinv @ v.qtilde(self.basis))
        return value

    def norm_sq(self, u: FluctuationVector) -> float:
        return self.inner(u, u)

    def inner_local(self, g: LocalFunction, f: LocalFunction) -> float:
        return self.inner(self.reduce(g), self.reduce(f))

    def gradient_inner(self, axis: int, v: FluctuationVector) -> float:
        """<< grad_axis, v >> = -(S^{-1} t(v))_axis, closed form."""
        return float(-(self.s_inv @ v.tvec_array())[axis])

    def gradient_gram(self) -> np.ndarray:
        """<< grad_k, grad_l >> = chi (S^{-1})_{kl}."""
        return self.chi * self.s_inv

    # -- diagnostics -------------------------------------------------------

    def dump(self, path) -> None:
        """Write the basis listing and M to a JSON file for inspection."""
        import json

        doc = {
            "basis": self.basis.listing(),
            "radius": self.basis.radius,
            "kmax": self.basis.kmax,
            "dirichlet_matrix": [[float(v) for v in row] for row in self.m_raw],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def h_inner(
    u: FluctuationVector,
    v: FluctuationVector,
    space: FluctuationSpace,
) -> float:
    """Functional form of the polarized variational inner product."""
    return space.inner(u, v)

"""Q and D from the fluctuation-dissipation decomposition.

The occupation gradients grad_j = xi(0) - xi(e_j) are approximated in the
span of the normalized currents {w_i} and of {L g_b} over a quotient basis
(the decomposition space is dense in the fluctuation space, so the
Galerkin residual is the honesty metric of the truncation).  Writing the
best approximation as grad_j ~ sum_i alpha_i w_i + L g, the pairing matrix
of the mapped gradients collapses in closed form:

    Q_jk = << T grad_j, grad_k >>  with  T(sum alpha_i w_i + Lg)
         = sum_{i,k} alpha_i S_ik grad_k + L^s g

gives << T grad_j, grad_k >> = sum_{i,l} alpha_i S_il . chi (S^{-1})_{lk}
plus << L^s g, grad_k >> = 0, i.e.

    Q_jk = chi alpha^{(j)}_k.

(The mapped-current operator itself is never materialized; only this
pairing consequence is used.  The unit tests re-derive the collapse
against a hand-expanded pairing on a one-class basis.)  The identity
chi I = D Q then defines D = chi Q^{-1}.

A second, independent estimate of D comes from the direct decomposition:
jointly minimize |w_j - sum_k c_k grad_k - L u| over (c, u); the c row
estimates row j of D.  The two routes are reported together with their
gap; they are never averaged.

The starred space (currents and generator of the reversed law p*) is the
exact reflection image of the unstarred one on a reflection-closed basis,
so the starred representation coefficients alpha* must equal alpha to
solver precision; this is the desk-scale embodiment of the reflection
covariance that makes Q (and hence D) symmetric in the untruncated limit.
At finite truncation only the trend of the symmetry defect is asserted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import MonotonicityError, SingularQ
from .fluctuation import (
    FluctuationSpace,
    FluctuationVector,
    QuotientBasis,
    build_quotient_basis,
)
from .generator import GeneratorKind, apply_generator, make_currents
from .kernel import JumpKernel
from .localfn import Density


def solve_psd(gram: np.ndarray, rhs: np.ndarray, cutoff: float) -> tuple[np.ndarray, int]:
    """Least-squares solve of a symmetric PSD system by eigendecomposition
    with a relative spectral cutoff; returns (solution, effective rank).

    Pivoted elimination would be order sensitive when the generator family
    is nearly dependent; the spectral cutoff keeps results reproducible.
    """
    if gram.size == 0:
        return np.zeros(0), 0
    sym = 0.5 * (gram + gram.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    lam_max = float(eigvals[-1])
    if lam_max <= 0:
        return np.zeros_like(rhs), 0
    keep = eigvals > cutoff * lam_max
    inv = np.where(keep, 1.0 / np.where(keep, eigvals, 1.0), 0.0)
    solution = eigvecs @ (inv * (eigvecs.T @ rhs))
    return solution, int(keep.sum())


@dataclass
class RepresentationSpace:
    """Reduced generators spanning (currents + L G_rho) at one truncation.

    generators[0:d] are the normalized currents, generators[d:] are L g_b
    for the classes of `gen_basis` in order; `starred` swaps in the
    reversed-law currents and adjoint generator.  Norms and pairings are
    evaluated in `space`, whose quotient model is built over a strictly
    larger class set (radius enlarged by the kernel range) so that the
    degree <= kmax content of every L g_b is seen by the f-supremum; were
    the two sets equal, the least-squares system would be square and the
    Galerkin residual would collapse to zero at every truncation.
    """

    space: FluctuationSpace
    gen_basis: QuotientBasis
    starred: bool
    generators: list[FluctuationVector]
    gram: np.ndarray
    tmat: np.ndarray
    qtmat: np.ndarray

    @property
    def dimension(self) -> int:
        return self.space.kernel.dimension

    def gradient_rhs(self, axis: int) -> np.ndarray:
        """<< v_m, grad_axis >> for every generator, via the closed form
        -(S^{-1} t(v_m))_axis."""
        return -(self.space.s_inv @ self.tmat)[axis, :]

    def vector_rhs(self, target: FluctuationVector) -> np.ndarray:
        tpart = (self.tmat.T @ self.space.s_inv @ target.tvec_array()) / self.space.chi
        qpart = self.qtmat.T @ self.space.m_pinv_apply(target.qtilde(self.space.basis))
        return tpart + qpart

    def overflow_mass(self) -> float:
        """Total reduced content falling outside the norm model (degree
        kmax+1 terms of L g_b); reported, never silently relevant to the
        Galerkin values."""
        return float(sum(v.overflow_mass() for v in self.generators))


def model_basis(kernel: JumpKernel, radius: int, kmax: int) -> QuotientBasis:
    """The norm-model basis for a generator truncation (r, kmax): radius
    enlarged by the kernel range so no in-degree content of L g_b escapes."""
    return build_quotient_basis(kernel.dimension, radius + kernel.range(), kmax)


def build_representation_space(
    space: FluctuationSpace, gen_basis: QuotientBasis, starred: bool = False
) -> RepresentationSpace:
    kernel = space.kernel
    density = space.density
    dim = kernel.dimension
    kind = GeneratorKind.ADJOINT if starred else GeneratorKind.FORWARD
    gens: list[FluctuationVector] = []
    for axis in range(dim):
        currents = make_currents(kernel, density, axis)
        gens.append(space.reduce(currents.w_star if starred else currents.w))
    for cls in gen_basis.classes:
        image = apply_generator(kernel, kind, cls.representative(density))
        gens.append(space.reduce(image))

    m = len(gens)
    tmat = np.zeros((dim, m))
    qtmat = np.zeros((len(space.basis), m))
    for j, v in enumerate(gens):
        tmat[:, j] = v.tvec_array()
        qtmat[:, j] = v.qtilde(space.basis)
    gram = (tmat.T @ space.s_inv @ tmat) / space.chi + qtmat.T @ (space.m_pinv_apply(qtmat))
    return RepresentationSpace(space, gen_basis, starred, gens, gram, tmat, qtmat)


def restrict_representation_space(
    rep: RepresentationSpace, gen_basis: QuotientBasis
) -> RepresentationSpace:
    """Restriction of a representation space to a generator sub-basis,
    keeping the same norm model (so nested restrictions give residuals that
    are nonincreasing by construction)."""
    dim = rep.dimension
    idx = list(range(dim)) + [dim + rep.gen_basis.position(cls) for cls in gen_basis.classes]
    sel = np.array(idx)
    return RepresentationSpace(
        rep.space,
        gen_basis,
        rep.starred,
        [rep.generators[i] for i in idx],
        rep.gram[np.ix_(sel, sel)],
        rep.tmat[:, sel],
        rep.qtmat[:, sel],
    )


@dataclass
class GradientRepresentation:
    """Best approximation of one gradient in a representation space."""

    axis: int
    alpha: np.ndarray
    gcoef: np.ndarray
    residual: float
    target_norm_sq: float
    rank: int


def represent_gradient(rep: RepresentationSpace, axis: int, cutoff: float = 1e-10) -> GradientRepresentation:
    """Orthogonal projection of grad_axis onto the representation span.

    residual^2 = chi (S^{-1})_{jj} - solution . rhs  >= 0 up to roundoff,
    and is nonincreasing under basis enlargement.
    """
    rhs = rep.gradient_rhs(axis)
    solution, rank = solve_psd(rep.gram, rhs, cutoff)
    target = rep.space.chi * rep.space.s_inv[axis, axis]
    res_sq = target - float(solution @ rhs)
    if res_sq < -1e-10 * max(1.0, abs(target)):
        raise SingularQ(f"negative residual {res_sq:.3e} in gradient representation")
    dim = rep.dimension
    return GradientRepresentation(
        axis=axis,
        alpha=solution[:dim].copy(),
        gcoef=solution[dim:].copy(),
        residual=float(np.sqrt(max(res_sq, 0.0))),
        target_norm_sq=target,
        rank=rank,
    )


@dataclass
class DirectRow:
    """Row of D from the direct decomposition of one current."""

    axis: int
    d_row: np.ndarray
    ucoef: np.ndarray
    residual: float


def direct_decomposition(rep: RepresentationSpace, axis: int, cutoff: float = 1e-10) -> DirectRow:
    """Jointly minimize |w_axis - sum_k c_k grad_k - L u| over (c, u).

    Uses the gradient Gram chi S^{-1}, the closed-form pairings of the
    gradients against the L-range generators, and the assembled Gram of the
    latter.  The returned c is the direct estimate of row `axis` of D.
    """
    space = rep.space
    dim = rep.dimension
    target = rep.generators[axis]  # reduced w_axis (or w*_axis in a starred space)
    n_l = rep.gram.shape[0] - dim
    lgram = rep.gram[dim:, dim:]
    tmat_l = rep.tmat[:, dim:]
    grad_block = space.chi * space.s_inv
    cross = -(space.s_inv @ tmat_l)
    gram = np.block([[grad_block, cross], [cross.T, lgram]])
    rhs = np.zeros(dim + n_l)
    rhs[:dim] = -(space.s_inv @ target.tvec_array())
    rhs[dim:] = rep.vector_rhs(target)[dim:]
    solution, _ = solve_psd(gram, rhs, cutoff)
    target_norm = space.norm_sq(target)
    res_sq = target_norm - float(solution @ rhs)
    return DirectRow(
        axis=axis,
        d_row=solution[:dim].copy(),
        ucoef=solution[dim:].copy(),
        residual=float(np.sqrt(max(res_sq, 0.0))),
    )


def _rel_frobenius_asymmetry(m: np.ndarray) -> float:
    denom = float(np.linalg.norm(m))
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(m - m.T)) / denom


@dataclass
class LevelReport:
    """Everything computed at one (r, kmax) truncation."""

    radius: int
    kmax: int
    n_classes: int
    model_radius: int
    n_model_classes: int
    overflow_mass: float
    Q: np.ndarray
    Q_star: np.ndarray
    D: np.ndarray
    alpha: np.ndarray
    alpha_star: np.ndarray
    reflection_gap: float
    residuals: np.ndarray
    residuals_star: np.ndarray
    D_direct: np.ndarray
    residuals_direct: np.ndarray
    symmetry_defect_Q: float
    symmetry_defect_D: float
    dq_identity_defect: float
    cross_check_gap: float
    consistency_ok: bool
    gram_rank: int
    dirichlet_rank: int

    def max_residual(self) -> float:
        return float(max(self.residuals.max(), self.residuals_direct.max()))

    def to_json_dict(self) -> dict:
        return {
            "radius": self.radius,
            "kmax": self.kmax,
            "n_classes": self.n_classes,
            "model_radius": self.model_radius,
            "n_model_classes": self.n_model_classes,
            "overflow_mass": self.overflow_mass,
            "Q": _rows(self.Q),
            "Q_star": _rows(self.Q_star),
            "D": _rows(self.D),
            "alpha": _rows(self.alpha),
            "alpha_star": _rows(self.alpha_star),
            "reflection_gap": self.reflection_gap,
            "residuals": [float(r) for r in self.residuals],
            "residuals_star": [float(r) for r in self.residuals_star],
            "D_direct": _rows(self.D_direct),
            "residuals_direct": [float(r) for r in self.residuals_direct],
            "symmetry_defect_Q": self.symmetry_defect_Q,
            "symmetry_defect_D": self.symmetry_defect_D,
            "dq_identity_defect": self.dq_identity_defect,
            "cross_check_gap": self.cross_check_gap,
            "consistency_ok": self.consistency_ok,
            "gram_rank": self.gram_rank,
            "dirichlet_rank": self.dirichlet_rank,
        }


def _rows(m: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in m]


CONSISTENCY_FLOOR = 1e-10  # absolute slack when both residuals vanish


def q_and_d(rep: RepresentationSpace, rep_star: RepresentationSpace, cutoff: float = 1e-10) -> LevelReport:
    """Q from the unstarred representation, Q* from the starred one,
    D = chi Q^{-1}, and the direct-decomposition cross-check."""
    space = rep.space
    dim = rep.dimension
    chi = space.chi
    reps = [represent_gradient(rep, j, cutoff) for j in range(dim)]
    reps_star = [represent_gradient(rep_star, j, cutoff) for j in range(dim)]
    alpha = np.vstack([r.alpha for r in reps])
    alpha_star = np.vstack([r.alpha for r in reps_star])
    q = chi * alpha
    q_star = chi * alpha_star
    reflection_gap = float(np.max(np.abs(alpha - alpha_star)))

    sing = np.linalg.svd(q, compute_uv=False)
    if sing[-1] <= 1e-12 * max(sing[0], 1.0):
        raise SingularQ(
            f"Q is singular at truncation (r={space.basis.radius}, kmax={space.basis.kmax}); "
            "no diffusion matrix is reported"
        )
    d = chi * np.linalg.inv(q)

    direct = [direct_decomposition(rep, j, cutoff) for j in range(dim)]
    d_direct = np.vstack([row.d_row for row in direct])
    residuals = np.array([r.residual for r in reps])
    residuals_star = np.array([r.residual for r in reps_star])
    residuals_direct = np.array([row.residual for row in direct])
    cross_gap = float(np.max(np.abs(d - d_direct)))
    consistency_ok = True
    for j in range(dim):
        row_gap = float(np.max(np.abs(d[j] - d_direct[j])))
        allowed = 5.0 * max(residuals[j], residuals_direct[j]) + CONSISTENCY_FLOOR
        if row_gap > allowed:
            consistency_ok = False

    return LevelReport(
        radius=rep.gen_basis.radius,
        kmax=rep.gen_basis.kmax,
        n_classes=len(rep.gen_basis),
        model_radius=space.basis.radius,
        n_model_classes=len(space.basis),
        overflow_mass=rep.overflow_mass(),
        Q=q,
        Q_star=q_star,
        D=d,
        alpha=alpha,
        alpha_star=alpha_star,
        reflection_gap=reflection_gap,
        residuals=residuals,
        residuals_star=residuals_star,
        D_direct=d_direct,
        residuals_direct=residuals_direct,
        symmetry_defect_Q=_rel_frobenius_asymmetry(q),
        symmetry_defect_D=_rel_frobenius_asymmetry(d),
        dq_identity_defect=float(np.linalg.norm(chi * np.eye(dim) - d @ q)),
        cross_check_gap=cross_gap,
        consistency_ok=consistency_ok,
        gram_rank=min(r.rank for r in reps),
        dirichlet_rank=space.m_rank,
    )


@dataclass
class DiffusionReport:
    """Final report: per-level results plus cross-level trends."""

    kernel: JumpKernel
    rho: object
    svd_cutoff: float
    levels: list[LevelReport]
    residual_trend_ok: bool
    defect_trend_ok: bool
    defect_to_residual_ratio: float | None
    timings: dict = field(default_factory=dict)

    @property
    def final(self) -> LevelReport:
        return self.levels[-1]

    def to_json_dict(self, include_timings: bool = False) -> dict:
        doc = {
            "kernel": self.kernel.to_json_dict(),
            "rho": float(self.rho),
            "svd_cutoff": self.svd_cutoff,
            "levels": [lv.to_json_dict() for lv in self.levels],
            "residual_trend_ok": self.residual_trend_ok,
            "defect_trend_ok": self.defect_trend_ok,
            "defect_to_residual_ratio": self.defect_to_residual_ratio,
        }
        if include_timings:
            doc["timings"] = dict(self.timings)
        return doc

    def table(self) -> str:
        """Human-readable convergence table."""
        lines = [
            f"{'r':>3} {'kmax':>4} {'classes':>7} {'max resid':>12} "
            f"{'sym defect Q':>13} {'refl gap':>10} {'cross gap':>10}"
        ]
        for lv in self.levels:
            lines.append(
                f"{lv.radius:>3} {lv.kmax:>4} {lv.n_classes:>7} "
                f"{lv.max_residual():>12.3e} {lv.symmetry_defect_Q:>13.3e} "
                f"{lv.reflection_gap:>10.3e} {lv.cross_check_gap:>10.3e}"
            )
        return "\n".join(lines)


RESIDUAL_SLACK = 1e-10  # allowed roundoff jitter in monotone sequences


def convergence_study(
    kernel: JumpKernel,
    density: Density,
    schedule: list[tuple[int, int]],
    svd_cutoff: float = 1e-10,
    strict: bool = True,
) -> DiffusionReport:
    """Run the full pipeline over a nested schedule of (r, kmax) levels.

    Asserts (when strict) that the maximum Galerkin residual never
    increases along the schedule; the symmetry-defect trend is recorded in
    the report rather than enforced, since the untruncated symmetry of Q
    only bounds the truncated defect through the residual.  Truncated
    values are never extrapolated to the infinite-basis limit.
    """
    if not schedule:
        raise ValueError("empty schedule")
    dim = kernel.dimension
    bases = [build_quotient_basis(dim, r, k) for r, k in schedule]
    for prev, nxt in zip(bases, bases[1:]):
        if not nxt.contains_basis(prev):
            raise ValueError(
                f"schedule not nested: ({nxt.radius},{nxt.kmax}) does not contain "
                f"({prev.radius},{prev.kmax})"
            )
    levels = []
    timings: dict[str, float] = {}
    t_start = time.perf_counter()
    # One norm model for the whole study (the finest level's enlarged
    # quotient): residuals across levels are then projections onto nested
    # spans in a single inner product, hence nonincreasing by construction.
    t0 = time.perf_counter()
    finest = bases[-1]
    model = model_basis(kernel, finest.radius, finest.kmax)
    space = FluctuationSpace(kernel, density, model, svd_cutoff=svd_cutoff)
    rep_full = build_representation_space(space, finest, starred=False)
    rep_star_full = build_representation_space(space, finest, starred=True)
    timings["assembly_s"] = time.perf_counter() - t0
    for basis in bases:
        t0 = time.perf_counter()
        rep = restrict_representation_space(rep_full, basis)
        rep_star = restrict_representation_space(rep_star_full, basis)
        levels.append(q_and_d(rep, rep_star, cutoff=svd_cutoff))
        timings[f"level_{basis.radius}_{basis.kmax}_s"] = time.perf_counter() - t0
    timings["total_s"] = time.perf_counter() - t_start

    residual_trend_ok = True
    for prev, nxt in zip(levels, levels[1:]):
        if nxt.max_residual() > prev.max_residual() + RESIDUAL_SLACK:
            residual_trend_ok = False
    if strict and not residual_trend_ok:
        seq = [lv.max_residual() for lv in levels]
        raise MonotonicityError(f"residuals not nonincreasing along schedule: {seq}")

    defect_trend_ok = levels[-1].symmetry_defect_Q <= levels[0].symmetry_defect_Q + RESIDUAL_SLACK
    final_res = levels[-1].max_residual()
    ratio = None if final_res == 0 else levels[-1].symmetry_defect_Q / final_res
    return DiffusionReport(
        kernel=kernel,
        rho=density.rho,
        svd_cutoff=svd_cutoff,
        levels=levels,
        residual_trend_ok=residual_trend_ok,
        defect_trend_ok=defect_trend_ok,
        defect_to_residual_ratio=ratio,
        timings=timings,
    )


def compute_diffusion(
    kernel: JumpKernel,
    density: Density,
    schedule: list[tuple[int, int]] | None = None,
    svd_cutoff: float = 1e-10,
    strict: bool = True,
) -> DiffusionReport:
    """Convenience wrapper with the default nested schedule."""
    if schedule is None:
        schedule = [(1, 2), (2, 3), (3, 3)]
    return convergence_study(kernel, density, schedule, svd_cutoff=svd_cutoff, strict=strict)

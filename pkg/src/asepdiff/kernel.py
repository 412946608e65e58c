"""Validated finite-range jump laws on Z^d.

A jump law is a finite probability measure p on Z^d with p(0) = 0.  From it
we derive the symmetric part a(z) = (p(z)+p(-z))/2, the antisymmetric part
b(z) = (p(z)-p(-z))/2 and the covariance-type matrix

    S_ij = 1/2 sum_z p(z) z_i z_j,

which equals the same sum with a in place of p because the b contribution
cancels by antisymmetry.  Weights arrive as decimal text in the kernel file
and are stored either in double precision or, in exact mode, as Fractions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DuplicateVector,
    KernelError,
    NegativeWeight,
    NotNormalized,
    ZeroSiteWeight,
)
from .localfn import Site, site

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class JumpKernel:
    """A finite-range jump law with its derived symmetric split and S matrix."""

    dimension: int
    entries: dict[Site, object]
    a: dict[Site, object] = field(repr=False)
    b: dict[Site, object] = field(repr=False)
    s_matrix: tuple[tuple[object, ...], ...] = field(repr=False)

    def p(self, z) -> object:
        return self.entries.get(site(z), 0)

    def support(self) -> tuple[Site, ...]:
        return tuple(sorted(self.entries))

    def symmetrized_support(self) -> tuple[Site, ...]:
        """Union of the support and its reflection (domain of a and b)."""
        return tuple(sorted(self.a))

    def range(self) -> int:
        return max(max(abs(c) for c in z) for z in self.entries)

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.entries.values())

    def is_symmetric(self) -> bool:
        return all(w == 0 for w in self.b.values())

    def adjoint(self) -> "JumpKernel":
        """The kernel of the reversed process, p*(z) = p(-z)."""
        flipped = [(tuple(-c for c in z), w) for z, w in self.entries.items()]
        return build_kernel(flipped)

    def to_json_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "jumps": [
                {"z": list(z), "p": _weight_repr(w)} for z, w in sorted(self.entries.items())
            ],
        }


def _weight_repr(w):
    if isinstance(w, Fraction):
        return f"{w.numerator}/{w.denominator}"
    return w


def build_kernel(spec: Iterable[tuple[Sequence[int] | int, object]]) -> JumpKernel:
    """Validate a list of (vector, weight) pairs and derive a, b and S.

    Weights must already sum to 1: normalization is never applied silently,
    an off-by-normalization input is an error.
    """
    entries: dict[Site, object] = {}
    dim = None
    for z, w in spec:
        zz = site(z)
        if dim is None:
            dim = len(zz)
        elif len(zz) != dim:
            raise KernelError(f"jump vectors of mixed dimension: {zz}")
        if all(c == 0 for c in zz):
            raise ZeroSiteWeight("a weight was assigned to z = 0")
        if zz in entries:
            raise DuplicateVector(f"jump vector {zz} appears twice")
        if not (0 < w <= 1):
            raise NegativeWeight(f"weight {w} at {zz} is outside (0, 1]")
        entries[zz] = w
    if not entries:
        raise KernelError("empty jump law")
    total = sum(entries[z] for z in sorted(entries))
    if abs(total - 1) > NORMALIZATION_TOL:
        raise NotNormalized(f"weights sum to {total}, not 1")

    support = set(entries)
    sym_support = sorted(support | {tuple(-c for c in z) for z in support})
    half = Fraction(1, 2) if all(isinstance(w, Fraction) for w in entries.values()) else 0.5
    a = {}
    b = {}
    for z in sym_support:
        mz = tuple(-c for c in z)
        pz = entries.get(z, 0)
        pmz = entries.get(mz, 0)
        a[z] = half * (pz + pmz)
        b[z] = half * (pz - pmz)

    s = [[0] * dim for _ in range(dim)]
    for z in sorted(entries):
        w = entries[z]
        for i in range(dim):
            for j in range(dim):
                s[i][j] = s[i][j] + half * w * z[i] * z[j]
    s_matrix = tuple(tuple(row) for row in s)
    return JumpKernel(dimension=dim, entries=entries, a=a, b=b, s_matrix=s_matrix)


# -- irreducibility ------------------------------------------------------


@dataclass(frozen=True)
class IrreducibilityReport:
    """Verdict of the group-generation check, with the S flag kept separate.

    The two can disagree: in d=1 the support {-2, +2} generates only 2Z
    while S = [2] is invertible.  The lattice check is authoritative.
    """

    generates_lattice: bool
    lattice_index: int | None
    s_invertible: bool
    witness: str | None

    @property
    def verdict(self) -> str:
        return "pass" if self.generates_lattice else "fail"


def _hermite_diagonal(vectors: list[list[int]], dim: int) -> list[int] | None:
    """Diagonal of a column echelon form of the integer matrix whose columns
    are `vectors`, reached by unimodular column operations only (integer
    multiples of one column subtracted from another).  Returns None if the
    rank is below dim.
    """
    cols = [list(v) for v in vectors]
    diag = []
    for row in range(dim):
        pivots = [c for c in cols if c[row] != 0]
        if not pivots:
            # Remaining columns all vanish on rows <= row, so the rank is
            # at most row + (dim - row - 1) < dim.
            return None
        # Euclid on the row entries: after this loop exactly one column
        # keeps a nonzero entry in this row.
        while len(pivots) > 1:
            pivots.sort(key=lambda c: abs(c[row]))
            small, nxt = pivots[0], pivots[1]
            q = nxt[row] // small[row]
            for r in range(dim):
                nxt[r] -= q * small[r]
            pivots = [c for c in pivots if c[row] != 0]
        pivot = pivots[0]
        diag.append(abs(pivot[row]))
        cols = [c for c in cols if c is not pivot]
    return diag


def lattice_index(vectors: Iterable[Sequence[int]], dim: int) -> int | None:
    """Index in Z^d of the sublattice generated by the vectors (None if not
    of full rank)."""
    vs = [list(v) for v in vectors]
    if not vs:
        return None
    diag = _hermite_diagonal(vs, dim)
    if diag is None:
        return None
    idx = 1
    for e in diag:
        idx *= e
    return idx


def check_irreducibility(kernel: JumpKernel, det_tol: float = 1e-12) -> IrreducibilityReport:
    """Does {z : a(z) > 0} generate the whole group Z^d?

    Computed by integer column reduction (Hermite form) of the support
    vectors; the verdict passes iff the generated sublattice has index 1.
    Invertibility of S is reported as a separate flag, not folded into the
    verdict.
    """
    support = [list(z) for z in sorted(kernel.a) if kernel.a[z] > 0]
    idx = lattice_index(support, kernel.dimension)
    s_det = _det(kernel.s_matrix)
    s_invertible = abs(s_det) > det_tol
    if idx == 1:
        return IrreducibilityReport(True, 1, s_invertible, None)
    if idx is None:
        witness = f"symmetric support spans a rank-deficient sublattice of Z^{kernel.dimension}"
    else:
        witness = f"symmetric support generates a sublattice of index {idx}"
    return IrreducibilityReport(False, idx, s_invertible, witness)


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total = total + (-1) ** j * m[0][j] * _det(minor)
    return total


# -- kernel files --------------------------------------------------------


def kernel_from_json_dict(doc: dict, exact: bool = False) -> JumpKernel:
    """Build a kernel from the file schema
    {"dimension": d, "jumps": [{"z": [..], "p": number}, ...]}.

    Weights are parsed from their decimal text so that exact mode stores
    them as the rational they denote (0.1 becomes 1/10, not the nearest
    double).  Fraction text like "1/3" is accepted in either mode.
    """
    try:
        dim = int(doc["dimension"])
        jumps = doc["jumps"]
        spec = []
        for entry in jumps:
            z = tuple(int(c) for c in entry["z"])
            if len(z) != dim:
                raise KernelError(f"jump vector {z} does not have dimension {dim}")
            spec.append((z, _parse_weight(entry["p"], exact)))
    except (KeyError, TypeError, ValueError) as exc:
        raise KernelError(f"malformed kernel document: {exc}") from exc
    return build_kernel(spec)


def _parse_weight(raw, exact: bool):
    text = raw if isinstance(raw, str) else repr(raw)
    if exact:
        return Fraction(text)
    return float(Fraction(text)) if "/" in text else float(text)


def load_kernel(path, exact: bool = False) -> JumpKernel:
    """Read a kernel specification file (JSON).  Number tokens are kept as
    text during parsing so the exact path sees the written decimals."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh, parse_float=str, parse_int=str)
    return kernel_from_json_dict(doc, exact=exact)

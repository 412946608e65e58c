"""Jump-law validation, the symmetric split, S, and irreducibility."""

import json
from fractions import Fraction

import pytest

from asepdiff import (
    DuplicateVector,
    NegativeWeight,
    NotNormalized,
    ZeroSiteWeight,
    build_kernel,
    check_irreducibility,
    load_kernel,
)
from asepdiff.kernel import lattice_index

from conftest import asym_2d, generic_2d, ssep_1d, tasep_1d


def test_ssep_split():
    k = ssep_1d()
    assert k.a[(1,)] == 0.5 and k.a[(-1,)] == 0.5
    assert all(v == 0 for v in k.b.values())
    assert k.s_matrix == ((0.5,),)
    assert k.is_symmetric()


def test_tasep_split():
    k = tasep_1d()
    assert k.a[(1,)] == 0.5 and k.a[(-1,)] == 0.5
    assert k.b[(1,)] == 0.5 and k.b[(-1,)] == -0.5
    assert k.s_matrix == ((0.5,),)
    assert not k.is_symmetric()


def test_zero_site_weight_rejected():
    with pytest.raises(ZeroSiteWeight):
        build_kernel([((0,), 0.5), ((1,), 0.5)])


def test_not_normalized_rejected():
    with pytest.raises(NotNormalized):
        build_kernel([((1,), 0.7)])
    # no silent renormalization of near misses either
    with pytest.raises(NotNormalized):
        build_kernel([((1,), 0.5), ((-1,), 0.5 + 1e-9)])


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        build_kernel([((1,), 1.5), ((-1,), -0.5)])


def test_duplicate_vector_rejected():
    with pytest.raises(DuplicateVector):
        build_kernel([((1,), 0.5), ((1,), 0.5)])


def test_reconstruction_p_equals_a_plus_b():
    for k in (ssep_1d(True), tasep_1d(True), asym_2d(True), generic_2d(True)):
        for z in k.symmetrized_support():
            assert k.a[z] + k.b[z] == k.p(z)


def test_s_from_a_alone_matches():
    # the b contribution to S vanishes by antisymmetry
    for k in (tasep_1d(), asym_2d(), generic_2d()):
        d = k.dimension
        for i in range(d):
            for j in range(d):
                from_a = sum(0.5 * float(k.a[z]) * z[i] * z[j] for z in sorted(k.a))
                assert abs(from_a - float(k.s_matrix[i][j])) <= 1e-14


def test_s_is_symmetric():
    k = generic_2d()
    assert abs(k.s_matrix[0][1] - k.s_matrix[1][0]) <= 1e-15
    assert k.s_matrix[0][1] == pytest.approx(0.025)


def test_lattice_index_helper():
    assert lattice_index([(1,), (-1,)], 1) == 1
    assert lattice_index([(2,), (-2,)], 1) == 2
    assert lattice_index([(1, 0), (0, 1)], 2) == 1
    assert lattice_index([(1, 1), (1, -1)], 2) == 2  # checkerboard sublattice
    assert lattice_index([(1, 0), (-1, 0)], 2) is None  # rank deficient
    assert lattice_index([(2, 1), (4, 2)], 2) is None
    assert lattice_index([(1, 5), (3, 0)], 2) == 15


def test_irreducibility_nearest_neighbour_passes():
    rep = check_irreducibility(ssep_1d())
    assert rep.verdict == "pass" and rep.lattice_index == 1 and rep.s_invertible


def test_irreducibility_even_support_fails_with_invertible_s():
    # support {-2, 2} generates 2Z, yet S = [2] is invertible: the two
    # flags legitimately disagree and both are reported
    k = build_kernel([((2,), 0.5), ((-2,), 0.5)])
    rep = check_irreducibility(k)
    assert rep.verdict == "fail"
    assert rep.lattice_index == 2
    assert rep.s_invertible
    assert "index 2" in rep.witness


def test_irreducibility_unit_vectors_pass_2d():
    rep = check_irreducibility(asym_2d())
    assert rep.verdict == "pass"


def test_irreducibility_diagonal_only_fails_2d():
    q = 0.25
    k = build_kernel([((1, 1), q), ((-1, -1), q), ((1, -1), q), ((-1, 1), q)])
    rep = check_irreducibility(k)
    assert rep.verdict == "fail" and rep.lattice_index == 2
    assert rep.s_invertible  # S = I/2


def test_irreducibility_rank_deficient_fails():
    k = build_kernel([((1, 0), 0.5), ((-1, 0), 0.5)])
    rep = check_irreducibility(k)
    assert rep.verdict == "fail" and rep.lattice_index is None
    assert not rep.s_invertible


def test_load_kernel_roundtrip(tmp_path):
    doc = {"dimension": 1, "jumps": [{"z": [1], "p": 0.5}, {"z": [-1], "p": 0.5}]}
    path = tmp_path / "k.json"
    path.write_text(json.dumps(doc))
    k = load_kernel(path)
    assert k.entries == {(1,): 0.5, (-1,): 0.5}


def test_load_kernel_exact_reads_decimal_text(tmp_path):
    # 0.1 is not a binary float; the exact reader must see the decimal
    path = tmp_path / "k.json"
    path.write_text(
        '{"dimension": 2, "jumps": ['
        '{"z": [1, 0], "p": 0.4}, {"z": [0, 1], "p": 0.3},'
        '{"z": [-1, 0], "p": 0.2}, {"z": [0, -1], "p": 0.1}]}'
    )
    k = load_kernel(path, exact=True)
    assert k.entries[(0, -1)] == Fraction(1, 10)
    assert sum(k.entries.values()) == 1
    assert k.exact


def test_kernel_adjoint_reverses_jumps():
    k = tasep_1d()
    rev = k.adjoint()
    assert rev.entries == {(-1,): 1.0}
    assert rev.adjoint().entries == k.entries

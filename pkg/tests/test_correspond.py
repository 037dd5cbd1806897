import numpy as np
import pytest

from quiverflow.correspond import (
    affine_project,
    flowline_to_hecke,
    handsaw_adjoint,
    handsaw_constraint,
    handsaw_hecke_check,
    hecke_check,
    hecke_to_flowline,
    intertwiner_space,
    is_isomorphic,
    lagrangian_check,
    snap_rep,
)
from quiverflow.critical import negative_slice_basis
from quiverflow.fixtures import (
    chain2_rep,
    framed_a1,
    framed_a1_rep,
    framed_a1w2_critical,
    hs2,
    hs2_rep,
    hs3,
    jordan_rep,
)
from quiverflow.quiver import canonical_stability
from quiverflow.rep import (
    Representation,
    add_tangent,
    mats_norm,
    mats_scale,
    random_rep,
    rep_distance,
)


def test_intertwiner_space_dims():
    x = chain2_rep(2.0)
    assert len(intertwiner_space(x, x)) == 1
    J = jordan_rep([[1.0, 1.0], [0.0, 1.0]])
    I2 = jordan_rep(np.eye(2))
    assert len(intertwiner_space(J, J)) == 2
    assert len(intertwiner_space(I2, J)) == 2
    assert len(intertwiner_space(J, I2)) == 2


def test_intertwiner_basis_intertwines():
    J = jordan_rep([[1.0, 1.0], [0.0, 1.0]])
    I2 = jordan_rep(np.eye(2))
    for b in intertwiner_space(I2, J):
        assert np.max(np.abs(b["1"] @ I2.mats[0] - J.mats[0] @ b["1"])) < 1e-12


def test_is_isomorphic_conjugated_diagonal():
    d = np.diag([1.0, -2.0]).astype(complex)
    g = np.array([[1.0, 2.0], [0.5, 3.0]], dtype=complex)
    ok, wit = is_isomorphic(jordan_rep(g @ d @ np.linalg.inv(g)), jordan_rep(d))
    assert ok
    m = wit[0] @ (g @ d @ np.linalg.inv(g)) @ np.linalg.inv(wit[0])
    assert np.max(np.abs(m - d)) < 1e-12


def test_is_isomorphic_rejects_jordan_block():
    # scalar vs unipotent: every intertwiner kills a line, so no witness
    J = jordan_rep([[1.0, 1.0], [0.0, 1.0]])
    I2 = jordan_rep(np.eye(2))
    assert is_isomorphic(I2, J)[0] is False
    assert is_isomorphic(I2, J, strict=True)[0] is False
    assert is_isomorphic(I2, chain2_rep(1.0))[0] is False


def small_f1_rep():
    q = framed_a1()
    return Representation(q, {"1": 0, "inf": 1},
                          [np.zeros((0, 1), dtype=complex),
                           np.zeros((1, 0), dtype=complex)])


def test_hecke_member_pure_b():
    x1 = small_f1_rep()
    x2 = framed_a1_rep(0.0, 1.3)
    xi = hecke_check(x1, x2, "1")
    assert xi is not None
    assert xi.residual == 0.0
    assert xi.space_dim == 0
    assert xi.injective
    assert xi.blocks["1"].shape == (1, 0)
    assert np.allclose(xi.blocks["inf"], np.eye(1))


def test_hecke_nonmember_when_a_nonzero():
    assert hecke_check(small_f1_rep(), framed_a1_rep(1.0, 1.3), "1") is None


def test_hecke_check_guards():
    with pytest.raises(ValueError):
        hecke_check(jordan_rep([[0.0]]), jordan_rep(np.zeros((2, 2))), "1")
    x1 = small_f1_rep()
    with pytest.raises(ValueError):
        hecke_check(x1, framed_a1_rep(0.0, 1.0), "inf")
    with pytest.raises(ValueError):
        hecke_check(framed_a1_rep(0.0, 1.0), framed_a1_rep(0.0, 1.0), "1")


def test_hecke_flowline_roundtrip():
    x1 = small_f1_rep()
    x2 = framed_a1_rep(0.0, 1.3)
    xi = hecke_check(x1, x2, "1")
    pair = hecke_to_flowline(x1, x2, xi, "1")
    assert pair.action_residual == 0.0
    assert pair.slice_residual == 0.0
    # the slice direction reproduces the b entry on the new line
    assert pair.delta[1][0, 0] == pytest.approx(1.3)
    assert mats_norm([pair.delta[0]]) == 0.0
    back = flowline_to_hecke(pair, "1")
    for v in x1.quiver.vertices:
        assert np.array_equal(back.blocks[v], xi.blocks[v])


def test_snap_rep_thresholds_entries():
    x = framed_a1_rep(1e-9, 2.0)
    y = snap_rep(x, 1e-6)
    assert y.mats[0][0, 0] == 0.0
    assert y.mats[1][0, 0] == 2.0


def test_affine_project_chain_collapses():
    p, r = affine_project(chain2_rep(2.0), snap_tol="auto")
    assert r.status == "converged"
    assert mats_norm(p.mats) == 0.0


def test_affine_project_keeps_closed_orbit():
    m = np.array([[1.0, 1.0], [0.0, -1.0 + 0.5j]])
    p, r = affine_project(jordan_rep(m), snap_tol="auto")
    assert r.status == "converged"
    ok, _ = is_isomorphic(p, jordan_rep(np.diag([1.0, -1.0 + 0.5j])))
    assert ok


def test_affine_project_semisimplifies_jordan_block():
    p, r = affine_project(jordan_rep([[0.5, 1.0], [0.0, 0.5]]), snap_tol="auto")
    assert r.status == "converged"
    assert rep_distance(p, jordan_rep(0.5 * np.eye(2))) == 0.0
    # already at the collapsed point: projecting again is a no-op
    p2, r2 = affine_project(p, snap_tol="auto")
    assert r2.steps == 0
    assert rep_distance(p2, p) == 0.0


def test_lagrangian_two_slice_seeds_related():
    xc = framed_a1w2_critical(np.sqrt(1.5), np.sqrt(1.5))
    alpha = canonical_stability(xc.quiver, xc.dims)
    basis, _ = negative_slice_basis(xc, alpha)
    s1 = add_tangent(xc, mats_scale(0.4, basis[0]))
    s2 = add_tangent(xc, mats_scale(0.4, basis[1]))
    rep = lagrangian_check(s1, s2)
    assert rep.related
    assert rep.iso_witness_found
    assert rep.grad1 < 1e-7 and rep.grad2 < 1e-7


def test_lagrangian_distinct_orbits_unrelated():
    rep = lagrangian_check(jordan_rep(np.diag([1.0, 2.0])),
                           jordan_rep(np.diag([1.0, 3.0])))
    assert not rep.related


def test_handsaw_constraint_matches_slot_formula():
    q, dims = hs3((1, 2), (1, 1, 1))
    x = random_rep(q, dims, np.random.default_rng(5))
    C = handsaw_constraint(x)
    assert [c.shape for c in C] == [(2, 1)]
    # edge order: B1_1, B2_1, B2_2, a_1^1, a_2^1, b_2^1, b_3^1
    manual = (x.mats[0] @ x.mats[1] - x.mats[2] @ x.mats[0]
              + x.mats[4] @ x.mats[5])
    assert np.array_equal(C[0], manual)


def test_handsaw_constraint_empty_for_shortest_chain():
    assert handsaw_constraint(hs2_rep(0.7, 1.1, -0.3)) == []


def test_handsaw_adjoint_involution():
    q, dims = hs3((1, 2), (1, 1, 1))
    x = random_rep(q, dims, np.random.default_rng(5))
    y = handsaw_adjoint(x)
    assert rep_distance(handsaw_adjoint(y), x) == 0.0
    # the transported constraint is minus the conjugate transpose slotwise
    C = handsaw_constraint(x)
    Cy = handsaw_constraint(y)
    assert np.max(np.abs(Cy[0] + C[0].conj().T)) == 0.0


def test_handsaw_adjoint_rejects_plain_quiver():
    with pytest.raises(ValueError):
        handsaw_adjoint(chain2_rep(1.0))


def test_handsaw_hecke_member_and_rejection():
    q, _ = hs2()
    lam, mu = 0.6, -0.4
    xs = hs2_rep(lam, 0.9, 0.0)
    member = Representation(q, {"V1": 2, "inf": 1},
                            [np.diag([lam, mu]).astype(complex),
                             np.array([[0.9], [0.5]], dtype=complex),
                             np.zeros((1, 2), dtype=complex)])
    xi = handsaw_hecke_check(xs, member, "V1")
    assert xi is not None
    assert xi.residual < 1e-12
    assert xi.surjective
    assert xi.space_dim == 0
    assert np.allclose(xi.blocks["V1"], [[1.0, 0.0]])
    bad = Representation(q, {"V1": 2, "inf": 1},
                         [np.diag([lam, mu]).astype(complex),
                          np.array([[0.9], [0.5]], dtype=complex),
                          np.array([[0.8, 0.2]], dtype=complex)])
    assert handsaw_hecke_check(xs, bad, "V1") is None

import numpy as np

from scrollres import DEFAULT_PRIME as P
from scrollres.ffield import solve_mod
from scrollres.plane_curve import (
    NodalOcticModel,
    PlaneCurveModel,
    _hessian_nondegenerate,
    condition_matrix,
    construct_nodal_nonic,
    construct_nodal_octic,
    derivative_row,
    evaluate_form,
    linear_system,
    monomial_count,
    monomials,
    sample_smooth_points,
    verify_model_report,
    verify_node_report,
)


def poly_mult(a: dict, b: dict, p: int) -> dict:
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = (out.get(e, 0) + ca * cb) % p
    return out


def coeff_vector(poly: dict, d: int) -> np.ndarray:
    vec = np.zeros(monomial_count(d), dtype=np.int64)
    index = {m: i for i, m in enumerate(monomials(d))}
    for e, c in poly.items():
        vec[index[e]] = c % P
    return vec


def test_construct_dimensions(model):
    report = verify_node_report(model)
    assert report["ok"], report["failures"]
    assert report["condition_rank"] == 36
    assert report["octic_space_dim"] == 45 - 36 == 9
    assert report["genus"] == 9


def test_two_seeds_distinct_octics_same_report(model):
    other = construct_nodal_octic(P, seed=2)
    assert not np.array_equal(model.octic, other.octic)
    ra, rb = verify_node_report(model), verify_node_report(other)
    for key in ("ok", "genus", "condition_rank", "octic_space_dim", "node_count"):
        assert ra[key] == rb[key]


def test_cuspidal_point_flagged():
    # (y^2 z - x^3) * (z^5 + x^4 y) has a cusp at (0:0:1): double point with
    # rank-1 quadratic part, so the Hessian test must fail.
    cusp_factor = {(0, 2, 1): 1, (3, 0, 0): P - 1}
    unit = {(0, 0, 5): 1, (4, 1, 0): 1}
    octic = coeff_vector(poly_mult(cusp_factor, unit, P), 8)
    assert not _hessian_nondegenerate(octic, 8, (0, 0, 1), P)
    fake_nodes = ((0, 0, 1),) + tuple((i + 1, i * i + 3, 1) for i in range(11))
    bad = NodalOcticModel(P, octic, fake_nodes, q_index=0, seed=0)
    report = verify_node_report(bad)
    assert not report["ok"]
    assert any("not ordinary" in f for f in report["failures"])


def test_deleted_node_changes_genus(model):
    truncated = NodalOcticModel(
        P, model.octic, model.nodes[:-1], q_index=0, seed=model.seed
    )
    report = verify_node_report(truncated)
    assert report["genus"] == 10
    assert not report["ok"]


def test_perturbed_octic_fails_vanishing(model):
    octic = model.octic.copy()
    octic[0] = (octic[0] + 1) % P
    report = verify_node_report(
        NodalOcticModel(P, octic, model.nodes, model.q_index, model.seed)
    )
    assert not report["ok"]


def test_canonical_system_dimension(model):
    basis = linear_system(model, 5, [(n, 1) for n in model.nodes])
    assert len(basis) == 9  # h^0(omega) = genus


def test_residual_quartics_dimension(model):
    basis = linear_system(model, 4, [(n, 1) for n in model.other_nodes])
    assert len(basis) == 15 - 11 == 4


def test_line_pencil_dimension(model):
    basis = linear_system(model, 1, [(model.q, 1)])
    assert len(basis) == 2


def test_linear_system_multiplicity_vanishing(model):
    conditions = [(model.nodes[0], 2), (model.nodes[1], 1)]
    basis = linear_system(model, 4, conditions)
    assert basis
    for vec in basis:
        for point, mult in conditions:
            for total in range(mult):
                for a in range(total + 1):
                    for b in range(total - a + 1):
                        order = (a, b, total - a - b)
                        row = derivative_row(4, order, point, P)
                        assert int(row @ vec % P) == 0


def test_product_lies_in_canonical_span(model):
    lines = linear_system(model, 1, [(model.q, 1)])
    quartics = linear_system(model, 4, [(n, 1) for n in model.other_nodes])
    quintics = linear_system(model, 5, [(n, 1) for n in model.nodes])
    span = np.stack(quintics).T  # columns = canonical basis
    lin = {m: int(c) for m, c in zip(monomials(1), lines[0]) if c}
    qua = {m: int(c) for m, c in zip(monomials(4), quartics[0]) if c}
    product = coeff_vector(poly_mult(lin, qua, P), 5)
    assert solve_mod(span, product, P) is not None


def test_sample_points_on_curve(model, sample_pool):
    assert len(sample_pool) == 200
    assert len(set(sample_pool)) == 200
    values = evaluate_form(model.octic, 8, np.array(sample_pool), P)
    assert not np.any(values)
    assert not (set(sample_pool) & set(model.nodes))


def test_sample_zero_count(model):
    assert sample_smooth_points(model, 0) == []


def test_condition_matrix_shape():
    cond = condition_matrix(3, [((1, 2, 1), 2)], P)
    assert cond.shape == (4, 10)  # orders 0 and 1


def test_json_roundtrip(model):
    clone = NodalOcticModel.from_json(model.to_json())
    assert np.array_equal(clone.octic, model.octic)
    assert clone.nodes == model.nodes
    assert clone.q_index == model.q_index


def test_nonic_model_invariants():
    nonic = construct_nodal_nonic(P, seed=1)
    assert nonic.degree == 9
    assert nonic.q_mult == 3
    assert len(nonic.nodes) == 16
    assert nonic.pencil_degree == 6
    report = verify_model_report(nonic)
    assert report["ok"], report["failures"]
    assert report["genus"] == 9
    assert report["arithmetic_genus"] == 28


def test_nonic_adjoint_dimensions():
    nonic = construct_nodal_nonic(P, seed=1)
    canonical = linear_system(
        nonic, 6, [(nonic.q, 2)] + [(n, 1) for n in nonic.nodes]
    )
    assert len(canonical) == 9
    residual = linear_system(
        nonic, 5, [(nonic.q, 1)] + [(n, 1) for n in nonic.nodes]
    )
    assert len(residual) == 4


def test_nonic_sampling():
    nonic = construct_nodal_nonic(P, seed=1)
    pts = sample_smooth_points(nonic, 30, seed=3)
    vals = evaluate_form(nonic.coeffs, 9, np.array(pts), P)
    assert not np.any(vals)
    assert not (set(pts) & nonic.banned_points())


def test_plane_model_json_roundtrip():
    nonic = construct_nodal_nonic(P, seed=2)
    clone = PlaneCurveModel.from_json(nonic.to_json())
    assert np.array_equal(clone.coeffs, nonic.coeffs)
    assert clone.q == nonic.q and clone.q_mult == 3
    assert clone.nodes == nonic.nodes


def test_exhausted_attempts_raise():
    import pytest

    from scrollres.plane_curve import DegenerateConfigurationError

    with pytest.raises(DegenerateConfigurationError, match="degenerate configuration"):
        construct_nodal_octic(P, seed=1, max_attempts=0)
    with pytest.raises(DegenerateConfigurationError):
        construct_nodal_nonic(P, seed=1, max_attempts=0)

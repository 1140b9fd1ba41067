import numpy as np
import pytest

from coaction_tower import tangles
from coaction_tower.algebra import WeightedForm, build_algebra, form_value
from coaction_tower.coaction import (
    check_f1,
    check_modularity,
    check_two_paths,
    from_group_action,
    trivial_coaction,
    unitary_action,
)
from coaction_tower.hopf import from_group_function_algebra, group_table, symmetric_group_permutations
from coaction_tower.oracles import (
    oracle_algebra_closure,
    oracle_group_average,
    orbit_count,
    vn_from_tensor_power,
)
from coaction_tower.tower import (
    check_equivariance,
    check_fixed_points,
    check_Q_closure,
    check_theta_from_f1,
    check_tower_axioms,
    check_weak_equivariance,
    dense_cap,
    fixed_point_basis,
    fixed_point_kernel_dimension,
    gamma,
    is_tracial,
    poincare_series,
    vn_map,
    vn_table,
    w_corep_check,
    w_matrix,
)

NAMES = ["trivial", "flip", "s3", "translation", "inner_m2"]

# dimensions of Q_0..Q_4; group examples agree with the orbit/averaging oracles below
SERIES = {
    "trivial": [1, 2, 4, 8, 16],
    "flip": [1, 1, 2, 4, 8],
    "s3": [1, 1, 2, 5, 14],
    "translation": [1, 1, 2, 4, 8],
    "inner_m2": [1, 2, 8, 32, 128],
}


def test_dense_cap():
    assert dense_cap(build_algebra([2], [0.5, 0.5])) == 4
    assert dense_cap(build_algebra([1, 2], [0.2, 0.4, 0.4])) == 3


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_vn_equals_tensor_power_expansion(examples, name, n):
    c = examples[name]
    space = c.structure.power(n)
    V = vn_table(c, n).V
    ours = V[space.rows[:, None], space.cols[:, None], space.rows[None, :], space.cols[None, :]]
    assert np.array_equal(ours, vn_from_tensor_power(c, n))


def test_vn_of_degree_zero_is_unit(flip):
    vm = vn_map(flip, 0)
    assert vm.shape == (2, 1, 1)
    assert np.allclose(vm[:, 0, 0], flip.hopf.unit)


@pytest.mark.parametrize("name", NAMES)
def test_poincare_series(examples, name):
    assert poincare_series(examples[name], 4) == SERIES[name]


@pytest.mark.parametrize("name", ["flip", "s3", "inner_m2"])
def test_gamma_rank_equals_group_average(examples, name):
    c = examples[name]
    assert [oracle_group_average(c, n) for n in range(5)] == SERIES[name]


def test_orbit_counts_match_permutation_examples():
    c2 = build_algebra([1, 1], [0.5, 0.5])
    c3 = build_algebra([1, 1, 1], [1 / 3] * 3)
    assert [orbit_count(c2, [[0, 1], [1, 0]], n) for n in range(5)] == SERIES["flip"]
    assert [orbit_count(c3, symmetric_group_permutations(3), n) for n in range(5)] == SERIES["s3"]


@pytest.mark.parametrize("name", NAMES)
def test_kernel_dimension_matches_gamma_rank(examples, name):
    c = examples[name]
    for n in range(0, 4):
        assert fixed_point_kernel_dimension(c, n) == SERIES[name][n]


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_tower_level_checks(examples, name, n):
    c = examples[name]
    for rep in (check_tower_axioms(c, n), check_fixed_points(c, n), check_equivariance(c, n)):
        assert rep.all_pass, [r for r in rep if r.failed]


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_weak_equivariance(examples, name, n):
    rep = check_weak_equivariance(examples[name], n)
    assert rep.all_pass and not any(r.status == "skip" for r in rep)
    if is_tracial(examples[name].structure):
        assert rep["Jq_equals_J"].passed


def test_gamma_is_a_projection(examples):
    G = gamma(examples["s3"], 3).dense()
    assert np.max(np.abs(G @ G - G)) < 1e-9


def test_fixed_point_basis_is_fixed_and_orthonormal(flip):
    Q = fixed_point_basis(flip, 3)
    v3 = vn_map(flip, 3)
    w = flip.structure.power(3).gns_weights()
    vectors = np.array([x.vec() for x in Q.basis]).T
    for x in range(flip.hopf.dim):
        assert np.allclose(v3[x] @ vectors, flip.hopf.unit[x] * vectors)
    gram = vectors.conj().T @ (w[:, None] * vectors)
    assert np.allclose(gram, np.eye(Q.dimension))


def test_fixed_points_of_flip_in_degree_two(flip):
    # Q_2 is spanned by 1 and the Jones projection
    alg = flip.structure
    Q = fixed_point_basis(flip, 2)
    e2 = tangles.jones(alg, 2)
    G = gamma(flip, 2)
    assert np.allclose(G(e2).matrix, e2.matrix)
    assert Q.dimension == 2


@pytest.mark.parametrize("name", NAMES)
def test_closure_of_fixed_points(examples, name):
    rep = check_Q_closure(examples[name], 3)
    assert rep.all_pass, [r for r in rep if r.failed]


@pytest.mark.parametrize("name", NAMES)
def test_w_corepresentation(examples, name):
    rep = w_corep_check(examples[name])
    assert rep.all_pass, [r for r in rep if r.failed]


@pytest.mark.parametrize("name", ["flip", "s3", "inner_m2"])
def test_w_evaluates_to_unitaries_on_group_elements(examples, name):
    # over C(G) the basis δ_g is a family of orthogonal characters, so W(g) must be unitary
    c = examples[name]
    W = w_matrix(c)
    assert W.shape[:2] == (c.structure.power(2).size,) * 2
    for g in range(c.hopf.dim):
        Wg = W[:, :, g]
        assert np.allclose(Wg @ Wg.conj().T, np.eye(len(Wg)))


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_f1_and_theta(examples, name, n):
    c = examples[name]
    assert check_f1(c, n).passed
    assert check_theta_from_f1(c, n).passed


def test_lifted_coaction_is_again_a_coaction(examples):
    level = vn_table(examples["s3"], 2)
    assert check_two_paths(level).all_pass


def test_temperley_lieb_dimensions():
    alg = build_algebra([1] * 4, [0.25] * 4)
    e2 = tangles.jones(alg, 2)
    e3 = tangles.jones(alg, 3)
    assert oracle_algebra_closure([tangles.inclusion(alg, 3)(e2), e3]) == 5
    assert oracle_algebra_closure([e2]) == 2


def test_fixed_points_carry_the_unit(examples):
    for name in NAMES:
        c = examples[name]
        for n in range(1, 4):
            G = gamma(c, n)
            one = c.structure.power(n).unit()
            assert np.allclose(G(one).matrix, one.matrix)
            assert form_value(WeightedForm("phi", n), c.structure.power(n).unit()) == pytest.approx(1.0)


def test_non_tracial_kac_coactions_fail_modularity_and_the_gate_matters():
    # for σ = id, counitality forces V(k,l,k,l) ≠ 0, so (σ) can only hold for a trace
    alg = build_algebra([2], [1 / 3, 2 / 3])
    z2 = group_table("Z2")
    inner = from_group_action(alg, z2, [unitary_action(alg, np.eye(2)), unitary_action(alg, np.diag([1.0, -1.0]))])
    for c in (inner, trivial_coaction(alg, from_group_function_algebra(z2))):
        assert check_modularity(c).failed
        assert [r.status for r in check_weak_equivariance(c, 2)] == ["skip"]
        J, Jq = tangles.shift(alg, 2).dense(), tangles.shift_q(alg, 2).dense()
        G_up, G_down = gamma(c, 3).dense(), gamma(c, 1).dense()
        assert np.max(np.abs(G_up @ Jq - J @ G_down)) > 1.0
        assert np.max(np.abs(G_up @ J - J @ G_down)) < 1e-9

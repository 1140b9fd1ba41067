import math
import time

import numpy as np
import pytest

from coaction_tower import tangles
from coaction_tower.algebra import WeightedForm, build_algebra, form_value
from coaction_tower.lattice import (
    default_n_max,
    verify_all,
    verify_bimodule_E,
    verify_commuting_squares,
    verify_diagram_I,
    verify_phi_infty,
    verify_pp,
    verify_TL,
)

ROOT5 = math.sqrt(5)


def twisted_m2():
    return build_algebra([2], [1 / 3, 2 / 3])


def failures(rep):
    return [(r.name, r.degree, r.max_residual) for r in rep if r.failed]


def test_default_depth():
    assert default_n_max(twisted_m2()) == 4
    assert default_n_max(build_algebra([1, 2], [0.2, 0.4, 0.4])) == 3


@pytest.mark.parametrize("verify", [verify_diagram_I, verify_bimodule_E, verify_TL, verify_pp,
                                    verify_commuting_squares, verify_phi_infty])
def test_each_family_on_twisted_m2(verify):
    rep = verify(twisted_m2(), 3)
    assert len(rep) > 0 and rep.all_pass, failures(rep)
    assert not any(r.status == "skip" for r in rep)


@pytest.mark.parametrize("blocks, weights, n_max", [
    ([1, 1], [0.5, 0.5], 4),
    ([1, 1, 1], [1 / 3] * 3, 3),
    ([1, 2], [1 / 6, (5 / 6 + ROOT5 / 6) / 2, (5 / 6 - ROOT5 / 6) / 2], 2),
])
def test_all_families_on_other_delta_forms(blocks, weights, n_max):
    rep = verify_all(build_algebra(blocks, weights), n_max)
    assert rep.all_pass, failures(rep)


def test_records_are_tagged_with_their_family():
    rep = verify_all(twisted_m2(), 2)
    assert {r.suite for r in rep} == {"diagram_I", "bimodule_E", "TL", "pimsner_popa",
                                      "commuting_squares", "phi_infty"}


def test_without_delta_form_normalized_families_are_skipped():
    rep = verify_all(build_algebra([1, 1], [1 / 3, 2 / 3]), 3)
    assert rep.all_pass
    skipped = {r.suite for r in rep if r.status == "skip"}
    assert skipped == {"bimodule_E", "TL", "pimsner_popa", "commuting_squares", "phi_infty"}
    assert all(r.passed for r in rep if r.suite == "diagram_I")


def test_wrong_modulus_is_detected():
    alg = twisted_m2()
    alg.delta = 2.0
    for verify, name in [(verify_TL, "e_idempotent"), (verify_bimodule_E, "E_unital"),
                         (verify_phi_infty, "phi_unital")]:
        assert any(r.failed for r in verify(alg, 3).named(name))


def test_jones_projection_of_c2_is_a_rank_one_projection():
    alg = build_algebra([1, 1], [0.5, 0.5])
    e = tangles.jones(alg, 2).matrix
    assert np.allclose(e @ e, e) and np.allclose(e, e.conj().T)
    assert np.linalg.matrix_rank(e) == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_markov_property(n):
    alg = twisted_m2()
    e = tangles.jones(alg, n)
    assert np.allclose(tangles.expectation(alg, n)(e).matrix,
                       alg.delta**-2 * alg.power(n - 1).unit().matrix)
    assert form_value(WeightedForm("phi", n), e) == pytest.approx(alg.delta**-2)


def test_expectations_are_unital_and_preserve_phi():
    alg = twisted_m2()
    rng = np.random.default_rng(7)
    for n in range(1, 4):
        E = tangles.expectation(alg, n)
        assert np.allclose(E(alg.power(n).unit()).matrix, alg.power(n - 1).unit().matrix)
        x = tangles.Tensor.from_vector(alg.power(n), rng.standard_normal(alg.power(n).dim))
        assert form_value(WeightedForm("phi", n - 1), E(x)) == pytest.approx(
            form_value(WeightedForm("phi", n), x))


def test_full_lattice_runtime_at_depth_three():
    start = time.perf_counter()
    rep = verify_all(twisted_m2(), 3)
    assert rep.all_pass
    assert time.perf_counter() - start < 60

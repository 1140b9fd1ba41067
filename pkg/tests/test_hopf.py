import dataclasses

import numpy as np
import pytest

from coaction_tower.hopf import (
    FiniteGroup,
    character_f,
    check_characters,
    check_hopf_axioms,
    from_group_algebra,
    from_group_function_algebra,
    group_table,
    haar,
    hopf_from_custom,
    is_kac,
    modular_sigma,
    symmetric_group_permutations,
)

GROUPS = ["trivial", "Z2", "Z3", "S3"]


@pytest.mark.parametrize("name", GROUPS)
@pytest.mark.parametrize("build", [from_group_function_algebra, from_group_algebra])
def test_group_hopf_algebras_satisfy_axioms(name, build):
    h = build(group_table(name))
    rep = check_hopf_axioms(h)
    assert rep.all_pass, [r for r in rep if r.failed]
    assert is_kac(h)
    assert check_characters(h).all_pass


@pytest.mark.parametrize("name", GROUPS)
def test_haar_values(name):
    g = group_table(name)
    assert np.allclose(haar(from_group_function_algebra(g)).values, np.full(g.order, 1 / g.order))
    expected = np.zeros(g.order)
    expected[g.identity] = 1.0
    assert np.allclose(haar(from_group_algebra(g)).values, expected)


def test_modular_map_is_trivial_for_kac_algebras():
    h = from_group_algebra(group_table("S3"))
    assert np.allclose(modular_sigma(h), np.eye(h.dim))


def test_symmetric_group_composes_right_to_left():
    g = group_table("S3")
    perms = symmetric_group_permutations(3)
    for a, p in enumerate(perms):
        for b, q in enumerate(perms):
            composed = tuple(p[q[x]] for x in range(3))
            assert perms[g.mul(a, b)] == composed
    assert not g.is_abelian and group_table("Z3").is_abelian


@pytest.mark.parametrize("table, message", [
    ([[0, 1], [1, 1]], "inverse"),
    ([[0, 0], [0, 0]], "identity"),
    ([[0, 2], [1, 0]], "element indices"),
    ([[0, 1, 2], [1, 0, 0], [2, 0, 0]], "associativity|inverse"),
])
def test_bad_group_tables(table, message):
    with pytest.raises(ValueError, match=message):
        FiniteGroup(table)


def test_unknown_group_name():
    with pytest.raises(ValueError):
        group_table("Q8")


def test_custom_structure_constants_roundtrip():
    ref = from_group_function_algebra(group_table("Z3"))
    h = hopf_from_custom(3, ref.m.ravel(), ref.delta.ravel(), ref.eps, ref.antipode.ravel(), ref.star.ravel())
    assert np.allclose(h.unit, ref.unit)
    assert check_hopf_axioms(h).all_pass


def test_broken_antipode_is_detected():
    ref = from_group_function_algebra(group_table("Z3"))
    cycle = np.roll(np.eye(3), 1, axis=1)
    h = dataclasses.replace(ref, antipode=cycle)
    rep = check_hopf_axioms(h)
    assert rep["antipode"].failed
    assert not is_kac(h)
    with pytest.raises(ValueError, match="non-Kac"):
        character_f(h, 0.5)


def test_haar_requires_unique_invariant_functional():
    ref = from_group_function_algebra(group_table("Z2"))
    broken = dataclasses.replace(ref, delta=np.zeros_like(ref.delta))
    with pytest.raises(ValueError):
        haar(broken)


def test_shape_validation():
    ref = from_group_function_algebra(group_table("Z2"))
    with pytest.raises(ValueError, match="hopf.eps"):
        dataclasses.replace(ref, eps=np.ones(3))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coaction_tower.algebra import (
    Tensor,
    WeightedForm,
    build_algebra,
    form_value,
    loop_weight,
    p_weights,
    parity_sign,
    theta,
)


def random_tensor(space, rng):
    v = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return Tensor.from_vector(space, v)


@st.composite
def algebras(draw):
    blocks = draw(st.lists(st.integers(1, 2), min_size=1, max_size=2))
    raw = draw(st.lists(st.floats(0.1, 1.0), min_size=sum(blocks), max_size=sum(blocks)))
    total = sum(raw)
    return build_algebra(blocks, [w / total for w in raw])


@pytest.mark.parametrize("blocks, weights, delta_sq", [
    ([1, 1], [0.5, 0.5], 2.0),
    ([2], [0.5, 0.5], 4.0),
    ([2], [1 / 3, 2 / 3], 4.5),
    ([1, 1, 1, 1], [0.25] * 4, 16.0 / 4),
    ([1, 1, 1], [1 / 3] * 3, 3.0),
])
def test_delta_of_delta_forms(blocks, weights, delta_sq):
    alg = build_algebra(blocks, weights)
    assert alg.has_delta
    assert alg.delta**2 == pytest.approx(delta_sq, abs=1e-12)


def test_non_tracial_two_block_delta_form():
    root5 = math.sqrt(5)
    alg = build_algebra([1, 2], [1 / 6, (5 / 6 + root5 / 6) / 2, (5 / 6 - root5 / 6) / 2])
    assert alg.delta**2 == pytest.approx(6.0, abs=1e-12)


def test_unequal_block_sums_have_no_delta():
    alg = build_algebra([1, 1], [1 / 3, 2 / 3])
    assert not alg.has_delta
    with pytest.raises(ValueError, match="δ-form"):
        alg.require_delta()
    with pytest.raises(ValueError):
        form_value(WeightedForm("phi", 1), alg.power(1).unit())


@pytest.mark.parametrize("blocks, weights", [([0], []), ([1, 1], [0.5]), ([1], [-1.0]), ([1.5], [1.0])])
def test_build_algebra_rejects_bad_input(blocks, weights):
    with pytest.raises(ValueError):
        build_algebra(blocks, weights)


@pytest.mark.parametrize("blocks, weights", [
    ([1, 1], [0.5, 0.5]), ([2], [1 / 3, 2 / 3]), ([1, 1, 1], [1 / 3] * 3), ([1, 2], [0.2, 0.4, 0.4]),
])
def test_level_dimension_is_power_of_base_dimension(blocks, weights):
    # the n-th basic construction over C ⊂ A has dimension (dim A)^n
    alg = build_algebra(blocks, weights)
    base = sum(b * b for b in blocks)
    assert [alg.power(n).dim for n in range(5)] == [base**n for n in range(5)]


def test_loop_weight_alternates_exponents():
    alg = build_algebra([2], [1 / 3, 2 / 3])
    assert loop_weight(alg, [1, 0]) == pytest.approx(2**0.25)
    assert loop_weight(alg, [0, 1, 1]) == pytest.approx(alg.q[0])
    with pytest.raises(ValueError):
        loop_weight(alg, [2])


def test_p_weights_of_twisted_m2():
    alg = build_algebra([2], [1 / 3, 2 / 3])
    assert p_weights(alg) ** 4 == pytest.approx([2 / 3, 1 / 3])


def test_parity_sign():
    assert [parity_sign(n) for n in range(4)] == [1, -1, 1, -1]


@pytest.mark.parametrize("n", range(0, 5))
def test_phi_is_unital_on_every_level(n):
    alg = build_algebra([2], [1 / 3, 2 / 3])
    assert form_value(WeightedForm("phi", n), alg.power(n).unit()) == pytest.approx(1.0)


def test_psi_forms_are_states():
    alg = build_algebra([2], [1 / 3, 2 / 3])
    assert form_value(WeightedForm("psi2", 2), alg.power(2).unit()) == pytest.approx(1.0)
    assert np.sum(WeightedForm("psi", 1).diagonal(alg)) == pytest.approx(1.0)


def test_weighted_form_validation():
    with pytest.raises(ValueError):
        WeightedForm("trace", 1)
    with pytest.raises(ValueError):
        WeightedForm("psi2", 3)


def test_mixing_degrees_raises():
    alg = build_algebra([1, 1], [0.5, 0.5])
    with pytest.raises(ValueError, match="degree mismatch"):
        alg.power(1).unit() @ alg.power(2).unit()


def test_records_roundtrip():
    alg = build_algebra([2], [0.5, 0.5])
    rng = np.random.default_rng(3)
    x = random_tensor(alg.power(2), rng)
    y = Tensor.from_records(alg.power(2), x.to_records())
    assert np.allclose(x.matrix, y.matrix)


def test_invalid_matrix_unit_rejected():
    alg = build_algebra([1, 1], [0.5, 0.5])
    with pytest.raises(KeyError):
        Tensor.from_coeffs(alg.power(1), {(0, 1): 1.0})


@settings(max_examples=25, deadline=None)
@given(alg=algebras(), n=st.integers(1, 3), seed=st.integers(0, 2**16))
def test_multiplication_is_associative_and_unital(alg, n, seed):
    rng = np.random.default_rng(seed)
    space = alg.power(n)
    x, y, z = (random_tensor(space, rng) for _ in range(3))
    assert np.allclose(((x @ y) @ z).matrix, (x @ (y @ z)).matrix, atol=1e-9)
    assert np.allclose((space.unit() @ x).matrix, x.matrix)


@settings(max_examples=25, deadline=None)
@given(alg=algebras(), n=st.integers(1, 3), seed=st.integers(0, 2**16))
def test_involution_is_antimultiplicative(alg, n, seed):
    rng = np.random.default_rng(seed)
    space = alg.power(n)
    x, y = random_tensor(space, rng), random_tensor(space, rng)
    assert np.allclose((x @ y).adjoint().matrix, (y.adjoint() @ x.adjoint()).matrix, atol=1e-9)
    assert np.allclose(x.adjoint().adjoint().matrix, x.matrix)


@settings(max_examples=25, deadline=None)
@given(alg=algebras(), n=st.integers(1, 3), seed=st.integers(0, 2**16))
def test_unnormalized_form_is_positive_with_modular_map(alg, n, seed):
    rng = np.random.default_rng(seed)
    space = alg.power(n)
    x, y = random_tensor(space, rng), random_tensor(space, rng)
    form = WeightedForm("phi_tilde", n)
    value = form_value(form, x.adjoint() @ x)
    assert value.real > 0 and abs(value.imag) < 1e-9 * value.real
    assert form_value(form, x @ y) == pytest.approx(form_value(form, y @ theta(x)), rel=1e-9, abs=1e-12)

"""Generator maps of the tower: inclusions, expectations, shifts, Jones projections.

Every map is assembled loop by loop into a sparse matrix between loop bases.  Sums
in the defining formulas run over the indices that keep the output loop valid.
Maps into ``A ⊗ A^{⊗m}`` use the flattened labels of ``IndexedAlgebra.space(1, m)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
import scipy.sparse as sp

from .algebra import (
    IndexedAlgebra,
    LoopSpace,
    MatrixUnitSystem,
    Tensor,
    parity_sign,
    p_weights,
)

ROLES = (
    "I", "E~", "e~", "J", "Jq", "E", "e", "J-", "J+", "E-", "E+",
    "id(x)I", "id(x)E", "unital", "Gamma", "M", "theta", "composite",
)


@dataclass(frozen=True, eq=False)
class TowerMap:
    """A linear map between loop spaces; ``matrix`` is (target.dim, source.dim)."""

    source: MatrixUnitSystem
    target: MatrixUnitSystem
    matrix: sp.csr_matrix
    role: str

    def __post_init__(self):
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise ValueError(f"{self.role}: matrix shape {self.matrix.shape} does not match spaces")

    @property
    def source_degree(self) -> int:
        return getattr(self.source, "degree", 1)

    @property
    def target_degree(self) -> int:
        return getattr(self.target, "degree", 1)

    def __call__(self, x: Tensor) -> Tensor:
        if x.space is not self.source:
            raise ValueError(f"{self.role} expects {self.source!r}, got {x.space!r}")
        return Tensor.from_vector(self.target, self.matrix @ x.vec())

    def __matmul__(self, other: "TowerMap") -> "TowerMap":
        if other.target is not self.source:
            raise ValueError(f"cannot compose {self.role} after {other.role}")
        return TowerMap(other.source, self.target, (self.matrix @ other.matrix).tocsr(), "composite")

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def residual(self, other: "TowerMap") -> float:
        if other.source is not self.source or other.target is not self.target:
            raise ValueError("maps live on different spaces")
        diff = (self.matrix - other.matrix).tocoo()
        return float(np.max(np.abs(diff.data), initial=0.0))


def _assemble(source, target, role: str, rule: Callable[[tuple, tuple], Iterable]) -> TowerMap:
    rows, cols, vals = [], [], []
    for col in range(source.dim):
        bottom, top = source.loop_at(col)
        for out_bottom, out_top, coeff in rule(bottom, top):
            if coeff == 0:
                continue
            rows.append(target.loop_position(out_bottom, out_top))
            cols.append(col)
            vals.append(coeff)
    matrix = sp.csr_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)), shape=(target.dim, source.dim)
    )
    matrix.sum_duplicates()
    return TowerMap(source, target, matrix, role)


def identity_map(space: MatrixUnitSystem) -> TowerMap:
    return TowerMap(space, space, sp.identity(space.dim, dtype=complex, format="csr"), "composite")


def _linear_map(source, target, dense_or_sparse, role: str) -> TowerMap:
    return TowerMap(source, target, sp.csr_matrix(dense_or_sparse, dtype=complex), role)


# unnormalized family ---------------------------------------------------------

def inclusion(alg: IndexedAlgebra, n: int) -> TowerMap:
    """I_n : A^{⊗n-1} -> A^{⊗n}, appending a summed label to both rows."""
    target = alg.power(n)

    def rule(bottom, top):
        for l in range(alg.size):
            b, t = bottom + (l,), top + (l,)
            if target.is_loop(b, t):
                yield b, t, 1.0

    return _assemble(alg.power(n - 1), target, "I", rule)


def _expectation_coefficient(alg: IndexedAlgebra, n: int, label: int, normalized: bool) -> float:
    sign = parity_sign(n)
    coeff = alg.q[label] ** (-4 * sign)
    if normalized:
        coeff *= alg.require_delta() ** (-1 - sign)
    return coeff


def _drop_last(alg: IndexedAlgebra, n: int, normalized: bool, role: str, source, target) -> TowerMap:
    def rule(bottom, top):
        if bottom[-1] == top[-1]:
            yield bottom[:-1], top[:-1], _expectation_coefficient(alg, n, bottom[-1], normalized)

    return _assemble(source, target, role, rule)


def expectation_tilde(alg: IndexedAlgebra, n: int) -> TowerMap:
    return _drop_last(alg, n, False, "E~", alg.power(n), alg.power(n - 1))


def expectation(alg: IndexedAlgebra, n: int) -> TowerMap:
    """E_n : A^{⊗n} -> A^{⊗n-1}, unital when the weights form a δ-form."""
    return _drop_last(alg, n, True, "E", alg.power(n), alg.power(n - 1))


def _jones_element(alg: IndexedAlgebra, n: int, normalized: bool) -> Tensor:
    if n < 2:
        raise ValueError("Jones projections start in degree 2")
    space = alg.power(n)
    sign = parity_sign(n)
    scale = alg.require_delta() ** (-1 + sign) if normalized else 1.0
    weights = alg.q ** (2 * sign)
    matrix = np.zeros((space.size, space.size), dtype=complex)
    # rows (g, i, i) and columns (g, j, j) share the prefix g
    by_prefix: dict[tuple, list[tuple[int, int]]] = {}
    for pos, label in enumerate(space.labels):
        if label[-1] == label[-2]:
            by_prefix.setdefault(label[:-2], []).append((pos, label[-1]))
    for members in by_prefix.values():
        for row, i in members:
            for col, j in members:
                if space.mask[row, col]:
                    matrix[row, col] = scale * weights[i] * weights[j]
    return Tensor(space, matrix)


def jones_tilde(alg: IndexedAlgebra, n: int) -> Tensor:
    return _jones_element(alg, n, False)


def jones(alg: IndexedAlgebra, n: int) -> Tensor:
    """e_n in A^{⊗n}; a self-adjoint idempotent for a δ-form."""
    return _jones_element(alg, n, True)


def _prepend_pair(alg: IndexedAlgebra, n: int, spin: bool) -> TowerMap:
    target = alg.power(n + 1)

    def rule(bottom, top):
        for l in range(alg.size):
            for k in range(alg.size):
                b, t = (l, k) + bottom, (l, k) + top
                if target.is_loop(b, t):
                    coeff = alg.q[l] ** -8 * alg.q[k] ** 8 if spin else 1.0
                    yield b, t, coeff

    return _assemble(alg.power(n - 1), target, "Jq" if spin else "J", rule)


def shift(alg: IndexedAlgebra, n: int) -> TowerMap:
    """J_n : A^{⊗n-1} -> A^{⊗n+1}, prepending a summed pair of labels."""
    return _prepend_pair(alg, n, False)


def shift_q(alg: IndexedAlgebra, n: int) -> TowerMap:
    """J_n with the spin factor q_l^-8 q_k^8 on the prepended pair."""
    return _prepend_pair(alg, n, True)


def unital_embedding(alg: IndexedAlgebra, target: MatrixUnitSystem) -> TowerMap:
    """C -> target, 1 -> 1."""
    source = alg.power(0)
    column = np.ones((target.dim, 1), dtype=complex)
    column[target.rows != target.cols] = 0.0
    return _linear_map(source, target, column, "unital")


def _prepend_label(alg, source, target, role) -> TowerMap:
    def rule(bottom, top):
        for h in range(alg.size):
            b, t = (h,) + bottom, (h,) + top
            if target.is_loop(b, t):
                yield b, t, 1.0

    return _assemble(source, target, role, rule)


def shift_minus(alg: IndexedAlgebra, n: int) -> TowerMap:
    """J_n^- : A^{⊗n-1} -> A ⊗ A^{⊗n-1}, x -> 1 ⊗ x."""
    return _prepend_label(alg, alg.power(n - 1), alg.space(1, n - 1), "J-")


def shift_plus(alg: IndexedAlgebra, n: int) -> TowerMap:
    """J_n^+ : A ⊗ A^{⊗n-1} -> A^{⊗n+1}; for n = 0 the unital embedding C -> A."""
    if n == 0:
        return unital_embedding(alg, alg.power(1))
    return _prepend_label(alg, alg.space(1, n - 1), alg.power(n + 1), "J+")


def expectation_minus(alg: IndexedAlgebra, n: int) -> TowerMap:
    """E_n^- : A ⊗ A^{⊗n-1} -> A^{⊗n-1}, pairing the first leg with φ."""
    q4 = alg.q**4

    def rule(bottom, top):
        if bottom[0] == top[0]:
            yield bottom[1:], top[1:], q4[bottom[0]]

    return _assemble(alg.space(1, n - 1), alg.power(n - 1), "E-", rule)


def expectation_plus(alg: IndexedAlgebra, n: int) -> TowerMap:
    """E_n^+ : A^{⊗n+1} -> A ⊗ A^{⊗n-1}, dropping the first label."""
    factor = alg.require_delta() ** -2 * alg.q**-4

    def rule(bottom, top):
        if bottom[0] == top[0]:
            yield bottom[1:], top[1:], factor[bottom[0]]

    return _assemble(alg.power(n + 1), alg.space(1, n - 1), "E+", rule)


def id_inclusion(alg: IndexedAlgebra, m: int) -> TowerMap:
    """id ⊗ I_m : A ⊗ A^{⊗m-1} -> A ⊗ A^{⊗m}; for m = 0 the unital embedding C -> A ⊗ C."""
    target = alg.space(1, m)
    if m == 0:
        return unital_embedding(alg, target)

    def rule(bottom, top):
        for l in range(alg.size):
            b, t = bottom + (l,), top + (l,)
            if target.is_loop(b, t):
                yield b, t, 1.0

    return _assemble(alg.space(1, m - 1), target, "id(x)I", rule)


def id_expectation(alg: IndexedAlgebra, m: int) -> TowerMap:
    """id ⊗ E_m : A ⊗ A^{⊗m} -> A ⊗ A^{⊗m-1}."""
    return _drop_last(alg, m, True, "id(x)E", alg.space(1, m), alg.space(1, m - 1))


def d_element(alg: IndexedAlgebra, n: int) -> Tensor:
    """d_n in A ⊗ A^{⊗n-1}: d_2 = Σ δ^-2 q_i^-2 q_j^-2 e_ij ⊗ e_ij, pushed up by id ⊗ I."""
    if n < 2:
        raise ValueError("d_n starts in degree 2")
    space = alg.space(1, 1)
    delta = alg.require_delta()
    coeffs = {}
    for i in range(alg.size):
        for j in range(alg.size):
            if alg.same_block(i, j):
                coeffs[((i, i), (j, j))] = delta**-2 * alg.q[i] ** -2 * alg.q[j] ** -2
    element = Tensor.from_coeffs(space, coeffs)
    for m in range(2, n):
        element = id_inclusion(alg, m)(element)
    return element


def f_element(alg: IndexedAlgebra, n: int) -> Tensor:
    """f_n = I_n ... I_3 (e_2) in A^{⊗n}."""
    element = jones(alg, 2)
    for m in range(3, n + 1):
        element = inclusion(alg, m)(element)
    return element


# algebraic helpers ----------------------------------------------------------------

def _kron_restricted(space: MatrixUnitSystem, left: np.ndarray, right: np.ndarray) -> sp.csr_matrix:
    flat = space.rows * space.size + space.cols
    full = sp.kron(sp.csr_matrix(left), sp.csr_matrix(right.T), format="csr")
    return full[flat][:, flat].tocsr()


def multiplication_map(x: Tensor, y: Tensor) -> TowerMap:
    """p -> x p y on the common space of x and y."""
    if x.space is not y.space:
        raise ValueError("degree mismatch")
    space = x.space
    return TowerMap(space, space, _kron_restricted(space, x.matrix, y.matrix), "M")


def left_multiplication(x: Tensor) -> TowerMap:
    return multiplication_map(x, x.space.unit())


def right_multiplication(y: Tensor) -> TowerMap:
    return multiplication_map(y.space.unit(), y)


def theta_map(space: MatrixUnitSystem) -> TowerMap:
    q4 = space.q**4
    diag = q4[space.rows] / q4[space.cols]
    return TowerMap(space, space, sp.diags(diag.astype(complex), format="csr"), "theta")


def compose(*maps: TowerMap) -> TowerMap:
    """compose(A, B, C) = A ∘ B ∘ C."""
    result = maps[-1]
    for m in reversed(maps[:-1]):
        result = m @ result
    return result


# forms as row vectors over the loop basis -------------------------------------------

def form_row(space: MatrixUnitSystem, diagonal: np.ndarray) -> np.ndarray:
    """Row vector f with f @ x.vec() = Σ_label diagonal[label] x[label, label]."""
    row = np.zeros(space.dim, dtype=complex)
    on_diag = space.rows == space.cols
    row[on_diag] = diagonal[space.rows[on_diag]]
    return row


def phi_diagonal(alg: IndexedAlgebra, n: int) -> np.ndarray:
    """Normalized φ_n on diagonal loops of A^{⊗n}."""
    exponent = 0.5 - 0.5 * parity_sign(n) - n
    return alg.require_delta() ** exponent * alg.power(n).q ** 4


def psi_phi_diagonal(alg: IndexedAlgebra, m: int) -> np.ndarray:
    """ψ ⊗ φ_m on diagonal loops of A ⊗ A^{⊗m}."""
    space = alg.space(1, m)
    p4 = p_weights(alg) ** 4
    phi_m = dict(zip(alg.power(m).labels, phi_diagonal(alg, m)))
    return np.array([p4[label[0]] * phi_m[label[1:]] for label in space.labels])


def psi2_diagonal(alg: IndexedAlgebra) -> np.ndarray:
    labels = np.array(alg.power(2).labels)
    return alg.require_delta() ** -2 * alg.q[labels[:, 0]] ** -4 * alg.q[labels[:, 1]] ** 4


def annular_maps(alg: IndexedAlgebra, n: int) -> dict:
    """All generator maps and elements indexed by n (normalized ones only with a δ-form)."""
    family: dict = {
        "I": inclusion(alg, n),
        "E~": expectation_tilde(alg, n),
        "J": shift(alg, n),
        "Jq": shift_q(alg, n),
        "J-": shift_minus(alg, n),
        "J+": shift_plus(alg, n),
        "E-": expectation_minus(alg, n),
    }
    if n >= 2:
        family["e~"] = jones_tilde(alg, n)
    if alg.has_delta:
        family["E"] = expectation(alg, n)
        family["E+"] = expectation_plus(alg, n)
        if n >= 2:
            family["e"] = jones(alg, n)
            family["d"] = d_element(alg, n)
            family["f"] = f_element(alg, n)
    return family

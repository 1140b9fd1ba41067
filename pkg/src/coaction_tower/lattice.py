"""Identities of the twisted tower that depend only on (A, φ, δ).

Every check compares two linear maps (or two linear forms) as whole matrices
in the loop bases, so a pass means equality on a complete basis.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .algebra import DEFAULT_TOL, IndexedAlgebra, Tensor, p_weights
from .checks import CheckReport, residual_record, skip_record
from . import tangles as tg


def default_n_max(alg: IndexedAlgebra) -> int:
    return 4 if alg.dim <= 4 else 3


def _matrix(m) -> sp.csr_matrix:
    if isinstance(m, tg.TowerMap):
        return m.matrix
    return sp.csr_matrix(m)


def _diff(a, b):
    d = _matrix(a) - _matrix(b)
    return d.data if d.nnz else np.zeros(0)


def _compare(name: str, lhs, rhs, tol: float, degree: int):
    return residual_record(name, _diff(lhs, rhs), tol, degree)


def _mul_left(x: Tensor) -> sp.csr_matrix:
    return tg.left_multiplication(x).matrix


def _mul_right(y: Tensor) -> sp.csr_matrix:
    return tg.right_multiplication(y).matrix


def _embed_jones(alg: IndexedAlgebra, i: int, n: int) -> Tensor:
    """e_i pushed into A^{⊗n} by inclusions."""
    e = tg.jones(alg, i)
    for m in range(i + 1, n + 1):
        e = tg.inclusion(alg, m)(e)
    return e


def verify_diagram_I(alg: IndexedAlgebra, n_max: int | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    n_max = default_n_max(alg) if n_max is None else n_max
    rep = CheckReport()
    for n in range(1, n_max + 1):
        J = tg.shift(alg, n)
        rep.add(_compare("J+J-=J", tg.shift_plus(alg, n) @ tg.shift_minus(alg, n), J, tol, n))
        first_lhs = tg.inclusion(alg, n + 1) @ tg.shift_plus(alg, n - 1)
        first_rhs = tg.shift_plus(alg, n) @ tg.id_inclusion(alg, n - 1)
        rep.add(_compare("square_row1", first_lhs, first_rhs, tol, n))
        second_lhs = tg.id_inclusion(alg, n) @ tg.shift_minus(alg, n)
        second_rhs = tg.shift_minus(alg, n + 1) @ tg.inclusion(alg, n)
        rep.add(_compare("square_row2", second_lhs, second_rhs, tol, n))
    return rep


def verify_bimodule_E(alg: IndexedAlgebra, n_max: int | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """Unitality and E(I(y)x) = yE(x), E(xI(y)) = E(x)y for the pairs (E, I), (E-, J-), (E+, J+)."""
    n_max = default_n_max(alg) if n_max is None else n_max
    rep = CheckReport()
    if not alg.has_delta:
        rep.add(skip_record("bimodule_E", "no δ-form"))
        return rep
    for n in range(1, n_max + 1):
        pairs = {
            "E": (tg.expectation(alg, n), tg.inclusion(alg, n)),
            "E-": (tg.expectation_minus(alg, n), tg.shift_minus(alg, n)),
            "E+": (tg.expectation_plus(alg, n), tg.shift_plus(alg, n)),
        }
        for label, (E, inc) in pairs.items():
            one = E.source.unit()
            rep.add(residual_record(f"{label}_unital", (E(one) - E.target.unit()).vec(), tol, n))
            left, right = [], []
            for k in range(inc.source.dim):
                y = inc.source.basis_tensor(k)
                Iy = inc(y)
                left.append(_diff(E.matrix @ _mul_left(Iy), _mul_left(y) @ E.matrix))
                right.append(_diff(E.matrix @ _mul_right(Iy), _mul_right(y) @ E.matrix))
            rep.add(residual_record(f"{label}_left_module", np.concatenate(left), tol, n))
            rep.add(residual_record(f"{label}_right_module", np.concatenate(right), tol, n))
        rep.add(_compare("E+J+=id", tg.expectation_plus(alg, n) @ tg.shift_plus(alg, n),
                         sp.identity(alg.space(1, n - 1).dim, format="csr"), tol, n))
    return rep


def verify_TL(alg: IndexedAlgebra, n_max: int | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """Self-adjoint idempotents with both Jones relations at modulus δ and far commutation."""
    n_max = default_n_max(alg) if n_max is None else n_max
    rep = CheckReport()
    if not alg.has_delta:
        rep.add(skip_record("TL", "no δ-form"))
        return rep
    d2 = alg.delta**-2
    for n in range(2, n_max + 1):
        e = tg.jones(alg, n)
        rep.add(residual_record("e_idempotent", (e @ e - e).vec(), tol, n))
        rep.add(residual_record("e_selfadjoint", (e.adjoint() - e).vec(), tol, n))
        if n >= 4:
            rep.add(residual_record("e_is_shifted", (tg.shift(alg, n - 1)(tg.jones(alg, n - 2)) - e).vec(), tol, n))
        if n == 3:
            rep.add(residual_record("e3_from_d2", (tg.shift_plus(alg, 2)(tg.d_element(alg, 2)) - e).vec(), tol, n))
        gens = {i: _embed_jones(alg, i, n) for i in range(2, n + 1)}
        jones_a, jones_b, far = [], [], []
        for i in range(2, n):
            a, b = gens[i + 1], gens[i]
            jones_a.append((a @ b @ a - a * d2).vec())
            jones_b.append((b @ a @ b - b * d2).vec())
        for i in range(2, n + 1):
            for j in range(i + 2, n + 1):
                far.append((gens[i] @ gens[j] - gens[j] @ gens[i]).vec())
        if jones_a:
            rep.add(residual_record("jones_relation_eIe", np.concatenate(jones_a), tol, n))
            rep.add(residual_record("jones_relation_IeI", np.concatenate(jones_b), tol, n))
        if far:
            rep.add(residual_record("far_commutation", np.concatenate(far), tol, n))
    return rep


def verify_pp(alg: IndexedAlgebra, n_max: int | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """The expectation and Pimsner–Popa identities for the e, f and d families."""
    n_max = default_n_max(alg) if n_max is None else n_max
    rep = CheckReport()
    if not alg.has_delta:
        rep.add(skip_record("pimsner_popa", "no δ-form"))
        return rep
    delta2 = alg.delta**2
    for n in range(0, n_max - 1):
        top = n + 2
        e = tg.jones(alg, top)
        I_top, I_mid = tg.inclusion(alg, top).matrix, tg.inclusion(alg, n + 1).matrix
        sandwich = tg.multiplication_map(e, e).matrix @ I_top
        rhs = _mul_right(e) @ I_top @ I_mid @ tg.expectation(alg, n + 1).matrix
        rep.add(_compare("pp_e_expectation", sandwich, rhs, tol, n))
        lhs = delta2 * _mul_right(e) @ I_top @ tg.expectation(alg, top).matrix @ _mul_right(e)
        rep.add(_compare("pp_e_basis", lhs, _mul_right(e), tol, n))

        f = tg.f_element(alg, top)
        Jp, Jm = tg.shift_plus(alg, n + 1).matrix, tg.shift_minus(alg, n + 1).matrix
        sandwich = tg.multiplication_map(f, f).matrix @ Jp
        rhs = _mul_right(f) @ Jp @ Jm @ tg.expectation_minus(alg, n + 1).matrix
        rep.add(_compare("pp_f_expectation", sandwich, rhs, tol, n))
        lhs = delta2 * _mul_right(f) @ Jp @ tg.expectation_plus(alg, n + 1).matrix @ _mul_right(f)
        rep.add(_compare("pp_f_basis", lhs, _mul_right(f), tol, n))

        d = tg.d_element(alg, top)
        Jm_top = tg.shift_minus(alg, top).matrix
        if n >= 1:
            sandwich = tg.multiplication_map(d, d).matrix @ Jm_top
            rhs = (_mul_right(d) @ Jm_top @ tg.shift_plus(alg, n).matrix
                   @ tg.expectation_plus(alg, n).matrix)
            rep.add(_compare("pp_d_expectation", sandwich, rhs, tol, n))
        lhs = delta2 * _mul_right(d) @ Jm_top @ tg.expectation_minus(alg, top).matrix @ _mul_right(d)
        rep.add(_compare("pp_d_basis", lhs, _mul_right(d), tol, n))
    return rep


def _chain(maps: list) -> sp.csr_matrix:
    """maps[0] applied first."""
    out = maps[0].matrix
    for m in maps[1:]:
        out = m.matrix @ out
    return out


def _commutator_residual(space, X: sp.csr_matrix, Y: sp.csr_matrix) -> np.ndarray:
    xs = np.stack([space.unvec(c) for c in X.toarray().T])
    ys = np.stack([space.unvec(c) for c in Y.toarray().T])
    xy = np.einsum("aij,bjk->abik", xs, ys)
    yx = np.einsum("bij,ajk->abik", ys, xs)
    return xy - yx


def _corner_maps(alg: IndexedAlgebra, s: int, k: int, odd: bool, tensored: bool):
    if odd:
        low, high = 2 * s, 2 * s + k
        j_maps = [tg.shift(alg, m) for m in range(k + 1, 2 * s + k, 2)]
    else:
        low, high = 2 * s + 1, 2 * s + k + 2
        j_maps = [tg.shift_plus(alg, k + 1)] + [tg.shift(alg, m) for m in range(k + 3, 2 * s + k + 2, 2)]
    if tensored:
        i_maps = [tg.id_inclusion(alg, m) for m in range(low + 1, high + 1)]
        j_maps = j_maps + [tg.shift_minus(alg, high + 1)]
    else:
        i_maps = [tg.inclusion(alg, m) for m in range(low + 1, high + 1)]
    return i_maps, j_maps


def verify_commuting_squares(alg: IndexedAlgebra, n_max: int | None = None,
                             tol: float = DEFAULT_TOL) -> CheckReport:
    n_max = default_n_max(alg) if n_max is None else n_max
    rep = CheckReport()
    if not alg.has_delta:
        rep.add(skip_record("commuting_squares", "no δ-form"))
        return rep
    for n in range(1, n_max + 1):
        if n >= 2:
            lhs = tg.expectation_plus(alg, n) @ tg.inclusion(alg, n + 1)
            rhs = tg.id_inclusion(alg, n - 1) @ tg.expectation_plus(alg, n - 1)
            rep.add(_compare("IE_square_row1", lhs, rhs, tol, n))
        lhs = tg.expectation_minus(alg, n + 1) @ tg.id_inclusion(alg, n)
        rhs = tg.inclusion(alg, n) @ tg.expectation_minus(alg, n)
        rep.add(_compare("IE_square_row2", lhs, rhs, tol, n))
    for odd in (True, False):
        for tensored in (False, True):
            label = ("odd" if odd else "even") + ("_tensored" if tensored else "")
            for s in range(1 if odd else 0, n_max + 1):
                for k in range(1, n_max + 1):
                    high = 2 * s + k if odd else 2 * s + k + 2
                    if high > n_max + 1 or (odd and s == 0):
                        continue
                    i_maps, j_maps = _corner_maps(alg, s, k, odd, tensored)
                    if not j_maps:
                        continue
                    X, Y = _chain(i_maps), _chain(j_maps)
                    space = i_maps[-1].target
                    rep.add(residual_record(f"corner_commutation_{label}",
                                            _commutator_residual(space, X, Y), tol, high,
                                            detail=f"s={s}, k={k}"))
    return rep


def verify_phi_infty(alg: IndexedAlgebra, n_max: int | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """Items (i)-(vi) of the filtered form, as equalities of row vectors."""
    n_max = default_n_max(alg) if n_max is None else n_max
    rep = CheckReport()
    if not alg.has_delta:
        rep.add(skip_record("phi_infty", "no δ-form"))
        return rep

    def phi(m):
        return tg.form_row(alg.power(m), tg.phi_diagonal(alg, m))

    def psi_phi(m):
        return tg.form_row(alg.space(1, m), tg.psi_phi_diagonal(alg, m))

    psi2 = tg.form_row(alg.power(2), tg.psi2_diagonal(alg))

    def expectations_down_to(top: int, bottom: int):
        """E_{bottom+1} … E_top : A^{⊗top} -> A^{⊗bottom}, as a dense matrix."""
        out = sp.identity(alg.power(top).dim, format="csr", dtype=complex)
        for m in range(top, bottom, -1):
            out = tg.expectation(alg, m).matrix @ out
        return out

    p4q4 = p_weights(alg) ** 4 * alg.q**4
    rep.add(residual_record("p4q4_constant_on_blocks", p4q4[alg.rows] - p4q4[alg.cols], tol))
    for n in range(1, n_max + 1):
        rep.add(residual_record("phi_unital", phi(n) @ alg.power(n).unit().vec() - 1.0, tol, n))
        rep.add(residual_record("phi_i_filtered", phi(n - 1) @ tg.expectation(alg, n).matrix - phi(n), tol, n))
        rep.add(residual_record("phi_ii_second_row",
                                phi(n + 1) @ tg.shift_plus(alg, n).matrix - psi_phi(n - 1), tol, n))
        rep.add(residual_record("phi_iii_periodic", phi(n + 1) @ tg.shift(alg, n).matrix - phi(n - 1), tol, n))
        rep.add(residual_record("phi_iv_horizontal",
                                psi_phi(n - 1) @ tg.id_expectation(alg, n).matrix - psi_phi(n), tol, n))
        lhs = phi(n - 1) @ tg.expectation_minus(alg, n).matrix @ tg.expectation_plus(alg, n).matrix
        rhs = psi2 @ expectations_down_to(n + 1, 2)
        rep.add(residual_record("phi_v", lhs - rhs, tol, n))
        lhs = psi_phi(n - 1) @ tg.expectation_plus(alg, n).matrix
        rhs = psi2 @ tg.inclusion(alg, 2).matrix @ expectations_down_to(n + 1, 1)
        rep.add(residual_record("phi_vi", lhs - rhs, tol, n))
    p4 = p_weights(alg) ** 4
    rep.add(residual_record("p_sum", p4.sum() - 1.0, tol))
    block_sums = np.array([np.sum(p4[alg.block == alg.block[i]] ** -1) for i in range(alg.size)])
    rep.add(residual_record("p_block_sums", block_sums - alg.delta**2, tol))
    return rep


SUITES = ("diagram_I", "bimodule_E", "TL", "pimsner_popa", "commuting_squares", "phi_infty")


def verify_all(alg: IndexedAlgebra, n_max: int | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    rep = CheckReport()
    for name, fn in zip(SUITES, (verify_diagram_I, verify_bimodule_E, verify_TL, verify_pp,
                                 verify_commuting_squares, verify_phi_infty)):
        rep.extend(r.in_suite(name) for r in fn(alg, n_max, tol))
    return rep

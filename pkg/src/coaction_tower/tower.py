"""The tower of a coaction: V_n, v_n, the fixed-point projector Γ_n and Q_n(v).

Level n reuses the coaction machinery with the loop space A^{⊗n} as the
matrix-unit system: its labels are half multi-indices and its weights are loop
weights, so ``check_axioms`` applies to V_n verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .algebra import DEFAULT_TOL, RANK_TOL, IndexedAlgebra, LoopSpace, Tensor
from .checks import CheckReport, flag_record, residual_record, skip_record
from .coaction import (
    CoactionTable,
    check_axioms,
    check_invariance,
    check_modularity,
    to_map,
)
from .hopf import character_f, haar
from . import tangles


def dense_cap(alg: IndexedAlgebra) -> int:
    """Largest degree whose coaction is stored as a dense (d, D, D) array."""
    return 4 if alg.dim <= 4 else 3


def _base(c: CoactionTable) -> IndexedAlgebra:
    if not isinstance(c.structure, IndexedAlgebra):
        raise ValueError("the tower is built from a coaction on the base algebra")
    return c.structure


def _circles(space: LoopSpace, positions: np.ndarray) -> np.ndarray:
    """Circle (i_1..i_n, j_n..j_1) of each loop, one row per position."""
    labels = np.array(space.labels, dtype=np.int64).reshape(space.size, -1)
    bottoms = labels[space.rows[positions]]
    tops = labels[space.cols[positions]][:, ::-1]
    return np.concatenate([bottoms, tops], axis=1)


def _coefficients_on_loops(c: CoactionTable, n: int, out_positions: np.ndarray | None = None) -> np.ndarray:
    """R[p, q, x] = V_n(out loop p, in loop q), an ordered product of n base coefficients."""
    alg = _base(c)
    space = alg.power(n)
    all_pos = np.arange(space.dim)
    out_pos = all_pos if out_positions is None else out_positions
    c_out = _circles(space, out_pos)
    c_in = _circles(space, all_pos)
    result = None
    for m in range(n):
        a, b = c_out[:, 2 * m][:, None], c_out[:, 2 * m + 1][:, None]
        i, j = c_in[:, 2 * m][None, :], c_in[:, 2 * m + 1][None, :]
        factor = c.V[a, b, i, j]  # (P, Q, d)
        result = factor if result is None else np.einsum("pqx,pqy,xyz->pqz", result, factor, c.hopf.m,
                                                         optimize=True)
    return result


def vn_table(c: CoactionTable, n: int) -> CoactionTable:
    """V_n as a coefficient table on the loop space A^{⊗n}."""
    alg = _base(c)
    if n < 1:
        raise ValueError("V_n is defined for n ≥ 1")
    if n == 1:
        return CoactionTable(alg.power(1), c.hopf, c.V)
    space = alg.power(n)
    R = _coefficients_on_loops(c, n)
    N = space.size
    V = np.zeros((N, N, N, N, c.hopf.dim), dtype=complex)
    k, l = space.rows, space.cols
    V[k[:, None], l[:, None], k[None, :], l[None, :], :] = R
    return CoactionTable(space, c.hopf, V)


def vn_coefficients(c: CoactionTable, n: int) -> np.ndarray:
    return vn_table(c, n).V


def vn_map(c: CoactionTable, n: int) -> np.ndarray:
    """v_n as an array (d, D, D) in loop coordinates; degree 0 is the trivial coaction on C."""
    alg = _base(c)
    if n == 0:
        return np.einsum("x,pq->xpq", c.hopf.unit, np.ones((1, 1)))
    space = alg.power(n)
    R = _coefficients_on_loops(c, n)
    q = space.q
    w = (q[space.cols] * q[space.rows])[None, :] / (q[space.rows] * q[space.cols])[:, None]
    return R.transpose(2, 0, 1) * w[None]


def _gamma_matrix(c: CoactionTable, n: int, haar_values: np.ndarray, chunk: int = 256) -> np.ndarray:
    alg = _base(c)
    if n == 0:
        return np.ones((1, 1), dtype=complex)
    space = alg.power(n)
    q = space.q
    in_w = q[space.rows] * q[space.cols]
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for start in range(0, space.dim, chunk):
        pos = np.arange(start, min(start + chunk, space.dim))
        R = _coefficients_on_loops(c, n, pos)
        out[pos] = (R @ haar_values) * in_w[None, :] / in_w[pos][:, None]
    return out


def gamma(c: CoactionTable, n: int, tol: float = DEFAULT_TOL) -> tangles.TowerMap:
    """Γ_n = (id⊗h)v_n; above the dense cap it is accumulated without storing v_n."""
    alg = _base(c)
    h = haar(c.hopf, tol).values
    if 0 < n <= dense_cap(alg):
        matrix = np.einsum("x,xpq->pq", h, vn_map(c, n))
    else:
        matrix = _gamma_matrix(c, n, h)
    space = alg.power(n)
    return tangles.TowerMap(space, space, sp.csr_matrix(matrix), "Gamma")


@dataclass(frozen=True, eq=False)
class FixedPointSpace:
    degree: int
    coords: np.ndarray  # (D, r) loop coordinates, orthonormal for <x, y> = φ̃_n(y* x)
    space: LoopSpace

    @property
    def dimension(self) -> int:
        return self.coords.shape[1]

    @property
    def basis(self) -> list[Tensor]:
        return [Tensor.from_vector(self.space, self.coords[:, k]) for k in range(self.dimension)]


def fixed_point_basis(c: CoactionTable, n: int, tol: float = DEFAULT_TOL,
                      rank_tol: float = RANK_TOL) -> FixedPointSpace:
    alg = _base(c)
    space = alg.power(n)
    G = gamma(c, n, tol).dense()
    root = np.sqrt(space.gns_weights())
    u, s, _ = np.linalg.svd(root[:, None] * G, full_matrices=False)
    rank = int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 1.0)))
    coords = u[:, :rank] / root[:, None]
    return FixedPointSpace(n, coords, space)


def fixed_point_kernel_dimension(c: CoactionTable, n: int, rank_tol: float = RANK_TOL) -> int:
    """dim ker(v_n - (·)⊗1), computed without h."""
    vm = vn_map(c, n) if n > 0 else np.einsum("x,pq->xpq", c.hopf.unit, np.ones((1, 1)))
    D = vm.shape[1]
    stacked = np.concatenate([vm[x] - c.hopf.unit[x] * np.eye(D) for x in range(c.hopf.dim)])
    s = np.linalg.svd(stacked, compute_uv=False)
    return D - int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 1.0)))


def poincare_series(c: CoactionTable, n_max: int, tol: float = DEFAULT_TOL) -> list[int]:
    return [fixed_point_basis(c, n, tol).dimension for n in range(n_max + 1)]


def check_fixed_points(c: CoactionTable, n: int, tol: float = DEFAULT_TOL) -> CheckReport:
    """Γ_n idempotent, basis elements fixed, and rank(Γ_n) = dim ker(v_n - ·⊗1)."""
    rep = CheckReport()
    G = gamma(c, n, tol).dense()
    rep.add(residual_record("gamma_idempotent", G @ G - G, tol, n))
    Q = fixed_point_basis(c, n, tol)
    rep.add(residual_record("gamma_identity_on_Q", G @ Q.coords - Q.coords, tol, n))
    if n <= dense_cap(_base(c)):
        vm = vn_map(c, n) if n > 0 else np.einsum("x,pq->xpq", c.hopf.unit, np.ones((1, 1)))
        fixed = np.einsum("xpq,qr->xpr", vm, Q.coords) - np.einsum("x,pr->xpr", c.hopf.unit, Q.coords)
        rep.add(residual_record("basis_fixed", fixed, tol, n))
        kernel = fixed_point_kernel_dimension(c, n)
        rep.add(flag_record("rank_matches_kernel", kernel == Q.dimension, n,
                            detail=f"rank={Q.dimension}, kernel={kernel}"))
    gram = (Q.coords.conj().T * Q.space.gns_weights()) @ Q.coords
    rep.add(residual_record("basis_orthonormal", gram - np.eye(Q.dimension), tol, n))
    return rep


def check_tower_axioms(c: CoactionTable, n: int, tol: float = DEFAULT_TOL) -> CheckReport:
    """v_n satisfies the five coefficient conditions and preserves φ̃_n."""
    level = vn_table(c, n)
    rep = check_axioms(level, tol, n)
    inv = check_invariance(level, tol, n)
    rep.add(inv["phi_invariance"])
    return rep


# equivariance -------------------------------------------------------------------------

def _equivariance_residual(name: str, v_target: np.ndarray, T: np.ndarray, v_source: np.ndarray,
                           tol: float, degree: int):
    diff = np.einsum("xpq,qr->xpr", v_target, T) - np.einsum("pq,xqr->xpr", T, v_source)
    return residual_record(name, diff, tol, degree)


def check_equivariance(c: CoactionTable, n: int, tol: float = DEFAULT_TOL) -> CheckReport:
    """v_m T = (T⊗id) v_n for T = I_n, Ẽ_n, and v_n(ẽ_n) = ẽ_n ⊗ 1."""
    alg = _base(c)
    rep = CheckReport()
    v_n, v_prev = vn_map(c, n), vn_map(c, n - 1)
    I = tangles.inclusion(alg, n).dense()
    E = tangles.expectation_tilde(alg, n).dense()
    rep.add(_equivariance_residual("I_equivariant", v_n, I, v_prev, tol, n))
    rep.add(_equivariance_residual("E~_equivariant", v_prev, E, v_n, tol, n))
    if n >= 2:
        e = tangles.jones_tilde(alg, n).vec()
        fixed = np.einsum("xpq,q->xp", v_n, e) - np.einsum("x,p->xp", c.hopf.unit, e)
        rep.add(residual_record("e~_fixed", fixed, tol, n))
    return rep


def is_tracial(alg: IndexedAlgebra, tol: float = DEFAULT_TOL) -> bool:
    q = alg.q
    return bool(np.all(np.abs(q[alg.rows] - q[alg.cols]) < tol))


def check_weak_equivariance(c: CoactionTable, n: int, tol: float = DEFAULT_TOL) -> CheckReport:
    """Γ_{n+1} J^q_n = J_n Γ_{n-1}; plain J_n when φ is a trace; full equivariance for commutative H."""
    alg = _base(c)
    rep = CheckReport()
    modularity = check_modularity(c, tol)
    if not modularity.passed:
        rep.add(skip_record("weak_equivariance_Jq", "modularity condition fails", n))
        return rep
    J = tangles.shift(alg, n).dense()
    Jq = tangles.shift_q(alg, n).dense()
    G_up = gamma(c, n + 1, tol).dense()
    G_down = gamma(c, n - 1, tol).dense()
    rep.add(residual_record("weak_equivariance_Jq", G_up @ Jq - J @ G_down, tol, n))
    if is_tracial(alg, tol):
        rep.add(residual_record("Jq_equals_J", Jq - J, tol, n))
        rep.add(residual_record("weak_equivariance_J", G_up @ J - J @ G_down, tol, n))
    if c.hopf.is_commutative and n + 1 <= dense_cap(alg):
        rep.add(_equivariance_residual("J_equivariant", vn_map(c, n + 1), J, vn_map(c, n - 1), tol, n))
    return rep


def check_theta_from_f1(c: CoactionTable, n: int, tol: float = DEFAULT_TOL):
    """θ_n = (id⊗f_1)v_n as matrices."""
    alg = _base(c)
    f1 = character_f(c.hopf, 1.0, tol).values
    lhs = np.einsum("x,xpq->pq", f1, vn_map(c, n))
    return residual_record("theta_from_f1", lhs - tangles.theta_map(alg.power(n)).dense(), tol, n)


# closure of Q(v) ------------------------------------------------------------------------

def _outside(G: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return vectors - G @ vectors


def check_Q_closure(c: CoactionTable, n_max: int, tol: float = DEFAULT_TOL) -> CheckReport:
    """Q(v) is stable under I, E, J, contains e_n, is θ-invariant, and φ_2 = ψ_2 on Q_2."""
    alg = _base(c)
    rep = CheckReport()
    gammas = {n: gamma(c, n, tol).dense() for n in range(0, n_max + 2)}
    bases = {n: fixed_point_basis(c, n, tol) for n in range(0, n_max + 2)}
    for n in range(1, n_max + 1):
        X_prev, X_n = bases[n - 1].coords, bases[n].coords
        I = tangles.inclusion(alg, n).dense()
        J = tangles.shift(alg, n).dense()
        rep.add(residual_record("I_preserves_Q", _outside(gammas[n], I @ X_prev), tol, n))
        rep.add(residual_record("J_preserves_Q", _outside(gammas[n + 1], J @ X_prev), tol, n))
        if alg.has_delta:
            E = tangles.expectation(alg, n).dense()
            rep.add(residual_record("E_preserves_Q", _outside(gammas[n - 1], E @ X_n), tol, n))
            if n >= 2:
                e = tangles.jones(alg, n).vec()
                rep.add(residual_record("e_in_Q", _outside(gammas[n], e[:, None]), tol, n))
        else:
            rep.add(skip_record("E_preserves_Q", "no δ-form", n))
        theta = tangles.theta_map(alg.power(n)).dense()
        rep.add(residual_record("theta_fixes_Q", theta @ X_n - X_n, tol, n))
        space = alg.power(n)
        products, adjoints = [], []
        basis = bases[n].basis
        for x in basis:
            adjoints.append(x.adjoint().vec())
            for y in basis:
                products.append((x @ y).vec())
        if products:
            rep.add(residual_record("Q_multiplicative", _outside(gammas[n], np.array(products).T), tol, n))
            rep.add(residual_record("Q_involutive", _outside(gammas[n], np.array(adjoints).T), tol, n))
    if n_max >= 2 and alg.has_delta:
        space = alg.power(2)
        phi2 = tangles.form_row(space, tangles.phi_diagonal(alg, 2))
        psi2 = tangles.form_row(space, tangles.psi2_diagonal(alg))
        rep.add(residual_record("phi2_equals_psi2_on_Q", (phi2 - psi2) @ bases[2].coords, tol, 2))
    return rep


def multiplication_tangle(x: Tensor, y: Tensor) -> tangles.TowerMap:
    """p -> x p y on A^{⊗k}."""
    if x.space is not y.space:
        raise ValueError(f"degree mismatch: {x.space!r} vs {y.space!r}")
    return tangles.multiplication_map(x, y)


# W-corepresentation ---------------------------------------------------------------------

def w_matrix(c: CoactionTable) -> np.ndarray:
    """W[(k1,k2), (i1,i2), x] over the labels of A^{⊗2}."""
    alg = _base(c)
    space = alg.power(2)
    labels = np.array(space.labels)
    k1, k2 = labels[:, 0][:, None], labels[:, 1][:, None]
    i1, i2 = labels[:, 0][None, :], labels[:, 1][None, :]
    q = alg.q
    weight = q[k1] ** -1 * q[k2] * q[i1] * q[i2] ** -1
    return weight[..., None] * c.V[k1, k2, i1, i2]


def w_corep_check(c: CoactionTable, tol: float = DEFAULT_TOL) -> CheckReport:
    """(id⊗ε)W = 1, (id⊗Δ)W = W12 W13, (id⊗S)W = W*, v_2 = ad(W), and the Q_W trace forms."""
    alg = _base(c)
    h = c.hopf
    space = alg.power(2)
    N = space.size
    W = w_matrix(c)
    rep = CheckReport()
    rep.add(residual_record("W_counit", np.einsum("abx,x->ab", W, h.eps) - np.eye(N), tol, 2))
    lhs = np.einsum("abx,xyz->abyz", W, h.delta)
    rhs = np.einsum("agy,gbz->abyz", W, W)
    rep.add(residual_record("W_coproduct", lhs - rhs, tol, 2))
    W_star = np.einsum("bax,xy->aby", np.conj(W), h.star)
    rep.add(residual_record("W_antipode_is_adjoint", np.einsum("abx,xy->aby", W, h.antipode) - W_star, tol, 2))
    # W (E_ab ⊗ 1) W*: entry (k, l) is W[k, a] W*[b, l]
    adW = np.einsum("kax,bly,xyz->zklab", W, W_star, h.m)
    v2 = vn_map(c, 2)
    adW_loops = adW[:, space.rows[:, None], space.cols[:, None], space.rows[None, :], space.cols[None, :]]
    rep.add(residual_record("v2_is_adW", adW_loops - v2, tol, 2))
    labels = np.array(space.labels)
    q = alg.q
    displayed = np.diag(q[labels[:, 0]] ** 2 * q[labels[:, 1]] ** -2)
    f_half = character_f(h, 0.5, tol).values
    Q_W = np.einsum("abx,x->ab", W, f_half)
    rep.add(residual_record("Q_W_formula", Q_W - displayed, tol, 2))
    if alg.has_delta:
        delta = alg.delta
        diag_sq = np.diag(displayed) ** 2
        phi2 = tangles.phi_diagonal(alg, 2)
        psi2 = tangles.psi2_diagonal(alg)
        rep.add(residual_record("trace_QW2_is_phi2", delta**-2 * diag_sq - phi2, tol, 2))
        rep.add(residual_record("trace_QW-2_is_psi2", delta**-2 / diag_sq - psi2, tol, 2))
        Q2 = fixed_point_basis(c, 2, tol)
        row = tangles.form_row(space, phi2 - psi2)
        rep.add(residual_record("phi2_equals_psi2_on_Q2", row @ Q2.coords, tol, 2))
    else:
        rep.add(skip_record("trace_QW2_is_phi2", "no δ-form", 2))
    return rep

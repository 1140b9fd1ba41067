"""Finite-dimensional Hopf *-algebras given by structure constants.

Conventions (basis b_0, ..., b_{d-1}; elements are coefficient vectors):

* ``m[a, b, c]``: b_a b_b = Σ_c m[a, b, c] b_c
* ``delta[a, b, c]``: Δ(b_a) = Σ delta[a, b, c] b_b ⊗ b_c
* ``antipode[a, b]``: S(b_a) = Σ_b antipode[a, b] b_b
* ``star[a, b]``: b_a* = Σ_b star[a, b] b_b, extended antilinearly
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import DEFAULT_TOL
from .checks import CheckReport, residual_record

NON_KAC_MESSAGE = "non-Kac finite-dimensional input unsupported"


class FiniteGroup:
    """A finite group given by its multiplication table ``table[a][b] = a*b``."""

    def __init__(self, table: Sequence[Sequence[int]], name: str = "G"):
        t = np.asarray(table, dtype=np.int64)
        n = len(t)
        if t.ndim != 2 or t.shape != (n, n) or n == 0:
            raise ValueError("group table must be a non-empty square array")
        if t.min() < 0 or t.max() >= n:
            raise ValueError("group table entries must be element indices")
        for a, b, c in itertools.product(range(n), repeat=3):
            if t[t[a, b], c] != t[a, t[b, c]]:
                raise ValueError(f"group table fails associativity at ({a}, {b}, {c})")
        ids = [e for e in range(n) if np.all(t[e] == np.arange(n)) and np.all(t[:, e] == np.arange(n))]
        if not ids:
            raise ValueError("group table has no identity element")
        self.identity = ids[0]
        inverse = []
        for a in range(n):
            found = [b for b in range(n) if t[a, b] == self.identity and t[b, a] == self.identity]
            if not found:
                raise ValueError(f"group table element {a} has no inverse")
            inverse.append(found[0])
        self.table = t
        self.order = n
        self.inverse = np.array(inverse)
        self.name = name

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    @property
    def is_abelian(self) -> bool:
        return bool(np.all(self.table == self.table.T))

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def group_table(name: str) -> FiniteGroup:
    """Named groups: ``Z<n>`` (cyclic), ``S<n>`` (symmetric, n ≤ 5) and ``trivial``."""
    key = name.strip()
    if key.lower() == "trivial":
        return FiniteGroup([[0]], "trivial")
    if key[:1] in ("Z", "C") and key[1:].isdigit():
        n = int(key[1:])
        return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], f"Z{n}")
    if key[:1] == "S" and key[1:].isdigit() and 1 <= int(key[1:]) <= 5:
        perms = list(itertools.permutations(range(int(key[1:]))))
        index = {p: k for k, p in enumerate(perms)}
        # (p q)(x) = p(q(x))
        table = [[index[tuple(p[q[x]] for x in range(len(p)))] for q in perms] for p in perms]
        return FiniteGroup(table, key)
    raise ValueError(f"unknown group name {name!r}")


def symmetric_group_permutations(n: int) -> list[tuple[int, ...]]:
    """Permutations in the element order used by ``group_table('S<n>')``."""
    return list(itertools.permutations(range(n)))


@dataclass(frozen=True, eq=False)
class HopfData:
    labels: tuple
    m: np.ndarray
    unit: np.ndarray
    delta: np.ndarray
    eps: np.ndarray
    antipode: np.ndarray
    star: np.ndarray
    name: str = "H"

    def __post_init__(self):
        d = len(self.labels)
        shapes = {"m": (d, d, d), "unit": (d,), "delta": (d, d, d), "eps": (d,),
                  "antipode": (d, d), "star": (d, d)}
        for attr, shape in shapes.items():
            arr = np.asarray(getattr(self, attr), dtype=complex)
            if arr.shape != shape:
                raise ValueError(f"hopf.{attr}: expected shape {shape}, got {arr.shape}")
            object.__setattr__(self, attr, arr)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def basis(self, a: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[a] = 1.0
        return v

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("a,b,abc->c", x, y, self.m)

    def involution(self, x: np.ndarray) -> np.ndarray:
        return np.conj(x) @ self.star

    def apply_antipode(self, x: np.ndarray) -> np.ndarray:
        return x @ self.antipode

    def coproduct(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("a,abc->bc", x, self.delta)

    def counit(self, x: np.ndarray) -> complex:
        return complex(x @ self.eps)

    @property
    def is_commutative(self) -> bool:
        return bool(np.allclose(self.m, self.m.transpose(1, 0, 2), atol=1e-12))

    def left_regular(self) -> np.ndarray:
        """L[a] is the matrix of y -> b_a y acting on coefficient vectors (columns)."""
        return self.m.transpose(0, 2, 1)

    def __repr__(self) -> str:
        return f"HopfData({self.name}, dim={self.dim})"


def from_group_function_algebra(group: FiniteGroup) -> HopfData:
    """C(G) in the point-mass basis δ_g."""
    n = group.order
    m = np.zeros((n, n, n))
    delta = np.zeros((n, n, n))
    antipode = np.zeros((n, n))
    for g in range(n):
        m[g, g, g] = 1.0
        antipode[g, group.inverse[g]] = 1.0
        for a in range(n):
            for b in range(n):
                if group.table[a, b] == g:
                    delta[g, a, b] = 1.0
    eps = np.zeros(n)
    eps[group.identity] = 1.0
    return HopfData(tuple(f"delta_{g}" for g in range(n)), m, np.ones(n), delta, eps, antipode,
                    np.eye(n), name=f"C({group.name})")


def from_group_algebra(group: FiniteGroup) -> HopfData:
    """C[G] with grouplike basis λ_g."""
    n = group.order
    m = np.zeros((n, n, n))
    delta = np.zeros((n, n, n))
    antipode = np.zeros((n, n))
    star = np.zeros((n, n))
    for a in range(n):
        delta[a, a, a] = 1.0
        antipode[a, group.inverse[a]] = 1.0
        star[a, group.inverse[a]] = 1.0
        for b in range(n):
            m[a, b, group.table[a, b]] = 1.0
    unit = np.zeros(n)
    unit[group.identity] = 1.0
    return HopfData(tuple(f"lambda_{g}" for g in range(n)), m, unit, delta, np.ones(n), antipode,
                    star, name=f"C[{group.name}]")


def _antipode_star_cycle(h: HopfData) -> np.ndarray:
    """Rows: S(*(S(*(b_a)))) for each basis element."""
    rows = []
    for a in range(h.dim):
        x = h.basis(a)
        for _ in range(2):
            x = h.apply_antipode(h.involution(x))
        rows.append(x)
    return np.array(rows)


def check_hopf_axioms(h: HopfData, tol: float = DEFAULT_TOL) -> CheckReport:
    """Max residual per Hopf *-algebra axiom; the ``antipode_squared`` record is the Kac flag."""
    d = h.dim
    eye = np.eye(d)
    m, delta, S, star, u, eps = h.m, h.delta, h.antipode, h.star, h.unit, h.eps
    rep = CheckReport()

    def add(name, residual):
        rep.add(residual_record(name, residual, tol))

    add("associativity", np.einsum("abx,xcy->abcy", m, m) - np.einsum("bcx,axy->abcy", m, m))
    add("unit", np.stack([np.einsum("x,xay->ay", u, m) - eye, np.einsum("x,axy->ay", u, m) - eye]))
    add("coassociativity",
        np.einsum("axy,xpr->apry", delta, delta) - np.einsum("apx,xry->apry", delta, delta))
    add("counit", np.stack([np.einsum("axy,x->ay", delta, eps) - eye,
                            np.einsum("axy,y->ax", delta, eps) - eye]))
    target = np.outer(eps, u)
    add("antipode", np.stack([
        np.einsum("axy,xp,pyr->ar", delta, S, m) - target,
        np.einsum("axy,yp,xpr->ar", delta, S, m) - target,
    ]))
    lhs = np.einsum("abc,cpr->abpr", m, delta)
    rhs = np.einsum("axy,bzw,xzp,ywr->abpr", delta, delta, m, m, optimize=True)
    add("coproduct_multiplicative", lhs - rhs)
    add("coproduct_unit", h.coproduct(u) - np.outer(u, u))
    add("counit_multiplicative", np.einsum("abc,c->ab", m, eps) - np.outer(eps, eps))
    add("counit_unit", np.array([h.counit(u) - 1.0]))
    add("star_involutive", np.conj(star) @ star - eye)
    add("star_antimultiplicative",
        np.einsum("abc,cr->abr", np.conj(m), star) - np.einsum("bx,ay,xyr->abr", star, star, m))
    add("coproduct_star",
        np.einsum("ac,cpr->apr", star, delta) - np.einsum("axy,xp,yr->apr", np.conj(delta), star, star))
    add("counit_star", star @ eps - np.conj(eps))
    add("antipode_star", _antipode_star_cycle(h) - eye)
    add("antipode_squared", S @ S - eye)
    return rep


def is_kac(h: HopfData, tol: float = DEFAULT_TOL) -> bool:
    return float(np.max(np.abs(h.antipode @ h.antipode - np.eye(h.dim)))) < tol


@dataclass(frozen=True, eq=False)
class HFunctional:
    """A linear form on H, stored by its values on the basis."""

    values: np.ndarray
    kind: str
    parameter: float | None = None

    def __call__(self, x: np.ndarray) -> complex:
        return complex(np.asarray(x) @ self.values)


def _null_space(matrix: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(matrix)
    scale = max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


def haar(h: HopfData, tol: float = DEFAULT_TOL) -> HFunctional:
    """The unique functional with (h⊗id)Δ = (id⊗h)Δ = h(·)1 and h(1) = 1."""
    d = h.dim
    rows = []
    for a in range(d):
        for x in range(d):
            row = h.delta[a, x, :].copy()
            row[a] -= h.unit[x]
            rows.append(row)
            row = h.delta[a, :, x].copy()
            row[a] -= h.unit[x]
            rows.append(row)
    null = _null_space(np.array(rows), tol)
    if null.shape[1] != 1:
        raise ValueError(f"invariance system has a {null.shape[1]}-dimensional solution space; "
                         "expected exactly one Haar functional")
    values = null[:, 0]
    norm = values @ h.unit
    if abs(norm) < tol:
        raise ValueError("invariant functional vanishes on the unit")
    return HFunctional(values / norm, "haar")


def haar_projection(h: HopfData, haar_values: HFunctional) -> np.ndarray:
    """Matrix P[a, c] of x -> (id⊗h)Δ(x), acting on rows."""
    return np.einsum("axy,y->ax", h.delta, haar_values.values)


def gram_matrix(h: HopfData, haar_values: HFunctional) -> np.ndarray:
    return np.einsum("abc,c->ab", h.m, haar_values.values)


def modular_sigma(h: HopfData, haar_values: HFunctional | None = None,
                  tol: float = DEFAULT_TOL) -> np.ndarray:
    """Matrix Σ with σ(b_a) = Σ_c Σ[a, c] b_c and h(ab) = h(b σ(a))."""
    haar_values = haar_values or haar(h, tol)
    G = gram_matrix(h, haar_values)
    if np.linalg.matrix_rank(G, tol=tol) < h.dim:
        raise ValueError("Haar functional is not faithful; modular map undefined")
    sigma = G @ np.linalg.inv(G.T)
    residual = sigma @ G.T - G
    if np.max(np.abs(residual)) > tol * max(1.0, np.max(np.abs(G))) * 10:
        raise ValueError("modular map system is inconsistent")
    return sigma


def character_f(h: HopfData, z: float, tol: float = DEFAULT_TOL) -> HFunctional:
    """f_z; in finite dimension the Kac property forces f_z = ε."""
    if not is_kac(h, tol):
        raise ValueError(NON_KAC_MESSAGE)
    return HFunctional(h.eps.copy(), "f", float(z))


def check_characters(h: HopfData, tol: float = DEFAULT_TOL,
                     samples: Sequence[float] = (-1.0, -0.25, 0.5, 1.0)) -> CheckReport:
    """Identities satisfied by the f_z family, evaluated on the basis of H."""
    rep = CheckReport()
    f = {z: character_f(h, z, tol).values for z in set(samples) | {0.0} | {-z for z in samples}}
    rep.add(residual_record("f0_is_counit", f[0.0] - h.eps, tol))
    conv, mult, anti, star = [], [], [], []
    for z in samples:
        for t in samples:
            if z + t in f:
                conv.append(np.einsum("axy,x,y->a", h.delta, f[z], f[t]) - f[z + t])
        mult.append(np.einsum("abc,c->ab", h.m, f[z]) - np.outer(f[z], f[z]))
        anti.append(h.antipode @ f[z] - f[-z])
        star.append(h.star @ f[z] - np.conj(f[-z]))
    rep.add(residual_record("f_convolution_additive", np.array(conv), tol))
    rep.add(residual_record("f_multiplicative", np.array(mult), tol))
    rep.add(residual_record("f_antipode", np.array(anti), tol))
    rep.add(residual_record("f_star", np.array(star), tol))
    double = np.einsum("axy,xpr->apry", h.delta, h.delta)
    s2 = np.einsum("apry,p,y->ar", double, f[1.0], f[-1.0])
    rep.add(residual_record("antipode_squared_from_f", s2 - h.antipode @ h.antipode, tol))
    sigma_f = np.einsum("apry,p,y->ar", double, f[1.0], f[1.0])
    rep.add(residual_record("sigma_from_f", sigma_f - modular_sigma(h, tol=tol), tol))
    return rep


def hopf_from_custom(dim: int, m, delta, eps, antipode, star, unit=None, labels=None) -> HopfData:
    """Build HopfData from nested or flat arrays; the unit is derived when omitted."""
    d = int(dim)
    m = np.asarray(m, dtype=complex).reshape(d, d, d)
    if unit is None:
        # the unit is the element u with u b = b for all b
        lhs = m.transpose(1, 2, 0).reshape(d * d, d)
        rhs = np.eye(d).reshape(-1)
        unit, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return HopfData(
        tuple(labels) if labels else tuple(f"b_{a}" for a in range(d)),
        m,
        np.asarray(unit, dtype=complex).reshape(d),
        np.asarray(delta, dtype=complex).reshape(d, d, d),
        np.asarray(eps, dtype=complex).reshape(d),
        np.asarray(antipode, dtype=complex).reshape(d, d),
        np.asarray(star, dtype=complex).reshape(d, d),
        name="custom",
    )

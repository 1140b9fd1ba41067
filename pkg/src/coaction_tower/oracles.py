"""Brute-force reference computations used to cross-check the main path.

Nothing here goes through the circle bookkeeping of the tower module: tensor
powers are formed by plain Kronecker products over all matrix-unit tuples and
then read off at the tuples a loop occupies.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .algebra import RANK_TOL, IndexedAlgebra, LoopSpace, Tensor
from .coaction import CoactionTable


def loop_unit_tuple(space: LoopSpace, position: int) -> tuple[tuple[int, int], ...]:
    """The matrix units (a, b) of A that a loop of A^{⊗n} is made of, in tensor order."""
    bottom, top = space.loop_at(position)
    ring = list(bottom) + list(reversed(top))
    return tuple((ring[2 * m], ring[2 * m + 1]) for m in range(space.degree))


def tensor_power_corepresentation(c: CoactionTable, n: int) -> np.ndarray:
    """u^{⊗n} = u_{1,n+1}…u_{n,n+1} as an H-valued matrix over all n-tuples of unit pairs.

    Row and column index is the mixed-radix number of ((a_1,b_1),…,(a_n,b_n)),
    each pair ranging over size**2 values.
    """
    N = c.structure.size
    U = c.V.reshape(N * N, N * N, c.hopf.dim)
    result = np.ones((1, 1, c.hopf.dim)) * c.hopf.unit
    for _ in range(n):
        result = np.einsum("ABx,aby,xyz->AaBbz", result, U, c.hopf.m).reshape(
            result.shape[0] * N * N, result.shape[1] * N * N, c.hopf.dim)
    return result


def vn_from_tensor_power(c: CoactionTable, n: int) -> np.ndarray:
    """R[p, q, x]: the u^{⊗n} coefficient between the unit tuples of loops p and q."""
    alg = c.structure
    if not isinstance(alg, IndexedAlgebra):
        raise ValueError("oracle expects a base-level coaction")
    space = alg.power(n)
    N = alg.size
    flat = []
    for p in range(space.dim):
        index = 0
        for a, b in loop_unit_tuple(space, p):
            index = index * N * N + a * N + b
        flat.append(index)
    if len(set(flat)) != len(flat):
        raise AssertionError("loops do not map injectively to unit tuples")
    big = tensor_power_corepresentation(c, n)
    return big[np.ix_(flat, flat)]


def oracle_group_average(c: CoactionTable, n: int, rank_tol: float = RANK_TOL) -> int:
    """dim of the fixed space of the n-fold diagonal group action, with no Hopf data involved."""
    if c.action is None:
        raise ValueError("coaction does not come from a group action")
    alg = c.structure
    space = alg.power(n)
    if n == 0:
        return 1
    unit_of = alg.loop_index
    rows = []
    for p in range(space.dim):
        units = [int(unit_of[a, b]) for a, b in loop_unit_tuple(space, p)]
        index = 0
        for u in units:
            index = index * alg.dim + u
        rows.append(index)
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for alpha in c.action.matrices:
        power = np.ones((1, 1))
        for _ in range(n):
            power = np.kron(power, alpha)
        total += power[np.ix_(rows, rows)]
    average = total / len(c.action.matrices)
    s = np.linalg.svd(average, compute_uv=False)
    return int(np.sum(s > rank_tol * max(1.0, s[0])))


def orbit_count(alg: IndexedAlgebra, permutations: Sequence[Sequence[int]], n: int) -> int:
    """Number of orbits of a group of label permutations on the loops of A^{⊗n}."""
    space = alg.power(n)
    if n == 0:
        return 1
    seen: set = set()
    orbits = 0
    for p in range(space.dim):
        loop = space.loop_at(p)
        if loop in seen:
            continue
        orbits += 1
        stack = [loop]
        while stack:
            bottom, top = stack.pop()
            if (bottom, top) in seen:
                continue
            seen.add((bottom, top))
            for perm in permutations:
                image = (tuple(perm[i] for i in bottom), tuple(perm[i] for i in top))
                if space.is_loop(*image) and image not in seen:
                    stack.append(image)
    return orbits


def oracle_algebra_closure(generators: Sequence[Tensor], rank_tol: float = RANK_TOL) -> int:
    """Dimension of the unital algebra generated, by growing span{1} ∪ span·generators."""
    if not generators:
        raise ValueError("need at least one generator")
    space = generators[0].space
    if any(g.space is not space for g in generators):
        raise ValueError("generators must share a degree")
    basis = np.zeros((space.dim, 0), dtype=complex)

    def absorb(vectors: list[np.ndarray]) -> list[np.ndarray]:
        nonlocal basis
        added = []
        for v in vectors:
            r = v - basis @ (basis.conj().T @ v)
            r = r - basis @ (basis.conj().T @ r)
            norm = np.linalg.norm(r)
            if norm > rank_tol * max(1.0, np.linalg.norm(v)):
                basis = np.column_stack([basis, r / norm])
                added.append(v)
        return added

    frontier = absorb([space.unit().vec()])
    while frontier:
        candidates = []
        for v in frontier:
            x = Tensor.from_vector(space, v)
            candidates.extend((x @ g).vec() for g in generators)
        frontier = absorb(candidates)
    return basis.shape[1]

"""Finite-dimensional C*-algebras with matrix units, and the loop-basis algebras A^{⊗n}.

A loop of degree n is written with a bottom multi-index ``i`` and a top multi-index
``j``; it multiplies as a matrix unit ``E[i, j]``, so every tower level is a
block-diagonal matrix algebra over *half multi-indices*.  A half multi-index of
degree n is an n-tuple whose consecutive pairs (positions 1-2, 3-4, ...) lie in a
common block of A; a pair (bottom, top) is a valid loop when both are half
multi-indices and, for odd n, their last labels lie in a common block.

The tensor factors of a loop are recovered from its circle
``c = (i_1, ..., i_n, j_n, ..., j_1)``: factor m is the matrix unit
``e[c_{2m-1}, c_{2m}]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
RANK_TOL = 1e-8
PRUNE_TOL = 1e-14

__all__ = [
    "DEFAULT_TOL",
    "RANK_TOL",
    "PRUNE_TOL",
    "parity_sign",
    "MatrixUnitSystem",
    "IndexedAlgebra",
    "LoopSpace",
    "Tensor",
    "WeightedForm",
    "build_algebra",
    "multiply",
    "involution",
    "unit",
    "loop_weight",
    "form_value",
    "theta",
    "p_weights",
]


def parity_sign(n: int) -> int:
    """(-1)**n; the single place where even/odd bookkeeping is decided."""
    return 1 if n % 2 == 0 else -1


class MatrixUnitSystem:
    """Labels with block keys and positive weights, viewed as a block-diagonal matrix algebra.

    ``mask[a, b]`` marks valid matrix units; the vectorized basis is the row-major
    list of valid (bottom, top) positions, i.e. lexicographic in (bottom, top).
    """

    def __init__(self, labels: Sequence, keys: Sequence, q: Sequence[float]):
        self.labels = list(labels)
        self.size = len(self.labels)
        self.q = np.asarray(q, dtype=float)
        ids: dict = {}
        self.keys = list(keys)
        self.key_ids = np.array([ids.setdefault(k, len(ids)) for k in self.keys], dtype=np.int64)
        self.mask = self.key_ids[:, None] == self.key_ids[None, :]
        rows, cols = np.nonzero(self.mask)
        self.rows = rows
        self.cols = cols
        self.dim = len(rows)
        self.loop_index = -np.ones((self.size, self.size), dtype=np.int64)
        self.loop_index[rows, cols] = np.arange(self.dim)
        self.position = {label: a for a, label in enumerate(self.labels)}

    # vectorization ---------------------------------------------------------
    def vec(self, matrix: np.ndarray) -> np.ndarray:
        return matrix[self.rows, self.cols]

    def unvec(self, vector: np.ndarray) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=complex)
        out[self.rows, self.cols] = vector
        return out

    def loop_at(self, index: int) -> tuple:
        """(bottom label, top label) of the basis loop with the given position."""
        return self.labels[self.rows[index]], self.labels[self.cols[index]]

    def loop_position(self, bottom, top) -> int:
        pos = self.loop_index[self.position[bottom], self.position[top]]
        if pos < 0:
            raise KeyError(f"({bottom}, {top}) is not a valid matrix unit")
        return int(pos)

    def is_loop(self, bottom, top) -> bool:
        a = self.position.get(bottom)
        b = self.position.get(top)
        return a is not None and b is not None and bool(self.mask[a, b])

    def basis_tensor(self, index: int) -> "Tensor":
        vector = np.zeros(self.dim, dtype=complex)
        vector[index] = 1.0
        return Tensor.from_vector(self, vector)

    def unit(self) -> "Tensor":
        return Tensor(self, np.eye(self.size, dtype=complex))

    def phi_weights(self) -> np.ndarray:
        """Diagonal weights of the unnormalized form: q**4 per label."""
        return self.q**4

    def gns_weights(self) -> np.ndarray:
        """Per-basis weight w with <x, y> = sum w * x * conj(y) for x, y in loop coordinates."""
        return (self.q**4)[self.cols]


class IndexedAlgebra(MatrixUnitSystem):
    """A = ⊕ M_{d_b}(C) with matrix units labelled 0..N-1 and weights q_i**4 of φ."""

    def __init__(self, block_sizes: Sequence[int], q: Sequence[float], tol: float = DEFAULT_TOL):
        self.block_sizes = tuple(int(b) for b in block_sizes)
        self.block = np.repeat(np.arange(len(self.block_sizes)), self.block_sizes)
        super().__init__(range(len(self.block)), list(self.block), q)
        self.tol = tol
        self.delta = self._delta_from_weights(tol)
        self._spaces: dict[tuple, LoopSpace] = {}

    def _delta_from_weights(self, tol: float) -> float | None:
        q4 = self.q**4
        if abs(q4.sum() - 1.0) > tol:
            return None
        per_block = np.array([np.sum(1.0 / q4[self.block == b]) for b in range(len(self.block_sizes))])
        if np.max(per_block) - np.min(per_block) > tol * max(1.0, np.max(per_block)):
            return None
        return float(np.sqrt(per_block.mean()))

    @property
    def has_delta(self) -> bool:
        return self.delta is not None

    def require_delta(self) -> float:
        if self.delta is None:
            raise ValueError("the weights do not define a δ-form; normalized maps are unavailable")
        return self.delta

    def same_block(self, i: int, j: int) -> bool:
        return bool(self.block[i] == self.block[j])

    def space(self, *segments: int) -> "LoopSpace":
        """Loop space for A^{⊗n} (``space(n)``) or A ⊗ A^{⊗m} (``space(1, m)``)."""
        key = tuple(segments)
        if key not in self._spaces:
            self._spaces[key] = LoopSpace(self, key)
        return self._spaces[key]

    def power(self, n: int) -> "LoopSpace":
        return self.space(n)

    def __repr__(self) -> str:
        return f"IndexedAlgebra(blocks={list(self.block_sizes)}, delta={self.delta})"


def _half_indices(alg: IndexedAlgebra, degree: int) -> list[tuple]:
    out = []
    for tup in itertools.product(range(alg.size), repeat=degree):
        if all(alg.block[tup[p]] == alg.block[tup[p + 1]] for p in range(0, degree - 1, 2)):
            out.append(tup)
    return out


def _segment_key(alg: IndexedAlgebra, half: tuple) -> int:
    return int(alg.block[half[-1]]) if len(half) % 2 == 1 else -1


def loop_weight(alg: IndexedAlgebra, multi_index: Sequence[int]) -> float:
    """q_{(i)} = q_{i1} q_{i2}^{-1} q_{i3} ... (alternating exponents)."""
    weight = 1.0
    for k, label in enumerate(multi_index):
        if not 0 <= label < alg.size:
            raise ValueError(f"unknown label {label}")
        weight *= alg.q[label] ** (1 if k % 2 == 0 else -1)
    return float(weight)


class LoopSpace(MatrixUnitSystem):
    """A^{⊗n} (segments ``(n,)``) or A ⊗ A^{⊗m} (segments ``(1, m)``) in the loop basis.

    Labels are flattened tuples; each segment is a half multi-index of its own degree.
    """

    def __init__(self, alg: IndexedAlgebra, segments: tuple[int, ...]):
        self.algebra = alg
        self.segments = segments
        pieces = [_half_indices(alg, d) for d in segments]
        labels, keys, weights = [], [], []
        for combo in itertools.product(*pieces):
            labels.append(tuple(itertools.chain.from_iterable(combo)))
            keys.append(tuple(_segment_key(alg, half) if half else -1 for half in combo))
            weights.append(np.prod([loop_weight(alg, half) for half in combo]))
        super().__init__(labels, keys, weights)

    @property
    def degree(self) -> int:
        return sum(self.segments)

    @property
    def is_power(self) -> bool:
        return len(self.segments) == 1

    def __repr__(self) -> str:
        return f"LoopSpace(segments={self.segments}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Tensor:
    """An element of a loop space, stored as its (masked) block-diagonal matrix."""

    space: MatrixUnitSystem
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m[~self.space.mask] = 0.0
        m[np.abs(m) < PRUNE_TOL] = 0.0
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, space: MatrixUnitSystem, vector: np.ndarray) -> "Tensor":
        return cls(space, space.unvec(np.asarray(vector, dtype=complex)))

    @classmethod
    def from_coeffs(cls, space: MatrixUnitSystem, coeffs: dict) -> "Tensor":
        m = np.zeros((space.size, space.size), dtype=complex)
        for (bottom, top), value in coeffs.items():
            space.loop_position(bottom, top)
            m[space.position[bottom], space.position[top]] += value
        return cls(space, m)

    @property
    def degree(self) -> int:
        return getattr(self.space, "degree", 1)

    def vec(self) -> np.ndarray:
        return self.space.vec(self.matrix)

    @property
    def coeffs(self) -> dict:
        rows, cols = np.nonzero(self.matrix)
        labels = self.space.labels
        return {(labels[a], labels[b]): complex(self.matrix[a, b]) for a, b in zip(rows, cols)}

    def _check(self, other: "Tensor") -> None:
        if other.space is not self.space:
            raise ValueError(f"degree mismatch: {self.space!r} vs {other.space!r}")

    def __matmul__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Tensor":
        return Tensor(self.space, -self.matrix)

    def __mul__(self, scalar: complex) -> "Tensor":
        return Tensor(self.space, scalar * self.matrix)

    __rmul__ = __mul__

    def adjoint(self) -> "Tensor":
        return Tensor(self.space, self.matrix.conj().T)

    def norm(self) -> float:
        return float(np.max(np.abs(self.matrix), initial=0.0))

    def to_records(self) -> list[tuple]:
        return [
            (list(bottom) if isinstance(bottom, tuple) else [bottom],
             list(top) if isinstance(top, tuple) else [top],
             value.real, value.imag)
            for (bottom, top), value in sorted(self.coeffs.items())
        ]

    @classmethod
    def from_records(cls, space: MatrixUnitSystem, records: Iterable) -> "Tensor":
        coeffs = {}
        for bottom, top, re, im in records:
            key_b = tuple(bottom) if isinstance(space, LoopSpace) else bottom[0]
            key_t = tuple(top) if isinstance(space, LoopSpace) else top[0]
            coeffs[(key_b, key_t)] = complex(re, im)
        return cls.from_coeffs(space, coeffs)


def multiply(x: Tensor, y: Tensor) -> Tensor:
    return x @ y


def involution(x: Tensor) -> Tensor:
    return x.adjoint()


def unit(alg: IndexedAlgebra, n: int) -> Tensor:
    return alg.power(n).unit()


@dataclass(frozen=True)
class WeightedForm:
    """A linear form on a tower level: ``phi_tilde``, ``phi``, ``psi2`` or ``psi``."""

    kind: str
    degree: int

    def __post_init__(self):
        if self.kind not in ("phi_tilde", "phi", "psi2", "psi"):
            raise ValueError(f"unknown form kind {self.kind!r}")
        fixed = {"psi2": 2, "psi": 1}.get(self.kind)
        if fixed is not None and self.degree != fixed:
            raise ValueError(f"{self.kind} lives in degree {fixed}")

    def diagonal(self, alg: IndexedAlgebra) -> np.ndarray:
        """Value of the form on each diagonal loop, in label order of the level."""
        space = alg.power(self.degree)
        if self.kind == "phi_tilde":
            return space.q**4
        if self.kind == "phi":
            n = self.degree
            exponent = 0.5 - 0.5 * parity_sign(n) - n
            return alg.require_delta() ** exponent * space.q**4
        if self.kind == "psi":
            return p_weights(alg) ** 4
        delta = alg.require_delta()
        labels = np.array(space.labels)
        return delta**-2 * alg.q[labels[:, 0]] ** -4 * alg.q[labels[:, 1]] ** 4


def form_value(form: WeightedForm, x: Tensor) -> complex:
    alg = x.space.algebra if isinstance(x.space, LoopSpace) else x.space
    if x.degree != form.degree or (isinstance(x.space, LoopSpace) and not x.space.is_power):
        raise ValueError(f"form of degree {form.degree} applied to degree {x.degree}")
    return complex(np.dot(form.diagonal(alg), np.diag(x.matrix)))


def theta(x: Tensor) -> Tensor:
    """Modular map of the unnormalized form: scales loop (i -> j) by q_(i)^4 q_(j)^-4."""
    q4 = x.space.q**4
    return Tensor(x.space, x.matrix * q4[:, None] / q4[None, :])


def p_weights(alg: IndexedAlgebra) -> np.ndarray:
    delta = alg.require_delta()
    q4 = alg.q**4
    block_mass = np.array([q4[alg.block == alg.block[i]].sum() for i in range(alg.size)])
    return delta**-0.5 / alg.q * block_mass**0.25


def build_algebra(block_sizes: Sequence[int], weights_fourth_power: Sequence[float],
                  tol: float = DEFAULT_TOL) -> IndexedAlgebra:
    """Build A from its block sizes and the diagonal weights q_i**4 of φ."""
    block_sizes = list(block_sizes)
    weights = np.asarray(weights_fourth_power, dtype=float)
    if not block_sizes or any(int(b) != b or b <= 0 for b in block_sizes):
        raise ValueError("block sizes must be positive integers")
    if weights.ndim != 1 or len(weights) != sum(block_sizes):
        raise ValueError(f"expected {sum(block_sizes)} weights, got {weights.size}")
    if np.any(weights <= 0):
        raise ValueError("weights must be strictly positive")
    return IndexedAlgebra(block_sizes, weights**0.25, tol=tol)

"""
Truncated Fock-space and two-level-system operator algebra.

Composite spaces follow the usual Kronecker convention: subsystem 0 is the
slowest-varying index. Models in this package always put the atom in slot 0
and the mechanical mode in slot 1.

Two-level basis ordering is (|g>, |e>), so sigma_minus = |g><e| is the
upper-right element.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvalidDensityMatrixError, InvalidDimensionError, InvalidEmbeddingError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-8


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HilbertSpace:
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __init__(self, dims: Sequence[int], labels: Sequence[str] | None = None):
        dims = tuple(int(d) for d in dims)
        if labels is None:
            labels = tuple(f"s{i}" for i in range(len(dims)))
        labels = tuple(labels)
        if not dims:
            raise InvalidDimensionError("a Hilbert space needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise InvalidDimensionError(f"every subsystem dimension must be >= 2, got {dims}")
        if len(labels) != len(dims):
            raise InvalidDimensionError(f"{len(labels)} labels for {len(dims)} subsystems")
        if len(set(labels)) != len(labels):
            raise InvalidDimensionError(f"subsystem labels must be unique, got {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidDimensionError(f"no subsystem labelled {label!r} in {self.labels}") from None

    def __repr__(self):
        inner = ", ".join(f"{l}:{d}" for l, d in zip(self.labels, self.dims))
        return f"HilbertSpace({inner})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with the space it acts on."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.space.dim
        if m.shape != (d, d):
            raise InvalidDimensionError(f"matrix shape {m.shape} does not match space dimension {d}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.space.dim

    def dag(self) -> Operator:
        return Operator(self.space, self.matrix.conj().T)

    def _check(self, other: Operator):
        if other.space != self.space:
            raise InvalidDimensionError(f"operator spaces differ: {self.space} vs {other.space}")

    def __add__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> Operator:
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar) -> Operator:
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        scale = max(np.max(np.abs(self.matrix)), 1.0)
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= rtol * scale)

    def __repr__(self):
        return f"Operator({self.space!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator.

    Construction validates all three properties and raises
    ``InvalidDensityMatrixError`` when any of them fails.
    """

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.space.dim
        if m.shape != (d, d):
            raise InvalidDimensionError(f"matrix shape {m.shape} does not match space dimension {d}")
        herm_dev = np.max(np.abs(m - m.conj().T))
        if herm_dev > HERMITIAN_TOL:
            raise InvalidDensityMatrixError(f"not hermitian (max deviation {herm_dev:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrixError(f"trace is {tr.real:.12g}, expected 1")
        lam = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
        if lam < -POSITIVITY_TOL:
            raise InvalidDensityMatrixError(f"negative eigenvalue {lam:.3e}")
        object.__setattr__(self, "matrix", m)

    def as_operator(self) -> Operator:
        return Operator(self.space, self.matrix)


def mode_space(n: int, label: str = "mode") -> HilbertSpace:
    return HilbertSpace((n,), (label,))


def annihilation(n_trunc: int) -> Operator:
    if n_trunc < 2:
        raise InvalidDimensionError(f"Fock truncation must be >= 2, got {n_trunc}")
    return Operator(mode_space(n_trunc), np.diag(np.sqrt(np.arange(1, n_trunc)), 1))


def creation(n_trunc: int) -> Operator:
    return annihilation(n_trunc).dag()


def number(n_trunc: int) -> Operator:
    return Operator(mode_space(n_trunc), np.diag(np.arange(n_trunc, dtype=float)))


def identity(space: HilbertSpace | int) -> Operator:
    if isinstance(space, int):
        space = mode_space(space)
    return Operator(space, np.eye(space.dim))


def pauli_ops() -> tuple[Operator, Operator, Operator]:
    """Return (sigma_plus, sigma_minus, sigma_z) on the (|g>, |e>) basis."""
    space = HilbertSpace((2,), ("atom",))
    sp = Operator(space, [[0, 0], [1, 0]])
    sm = Operator(space, [[0, 1], [0, 0]])
    sz = Operator(space, [[-1, 0], [0, 1]])
    return sp, sm, sz


def embed(op: Operator, target: HilbertSpace, position: int | str) -> Operator:
    """Place a single-subsystem operator into slot ``position`` of ``target``.

    Identities fill every other slot.
    """
    if isinstance(position, str):
        position = target.index(position)
    if not 0 <= position < len(target.dims):
        raise InvalidEmbeddingError(f"position {position} out of range for {target}")
    if op.dim != target.dims[position]:
        raise InvalidEmbeddingError(
            f"operator of dimension {op.dim} cannot sit in slot {position} of size {target.dims[position]}"
        )
    factors = [np.eye(d) for d in target.dims]
    factors[position] = op.matrix
    return Operator(target, reduce(np.kron, factors))


def expectation(op: Operator, rho: DensityMatrix) -> complex:
    if op.space != rho.space:
        raise InvalidDimensionError(f"operator acts on {op.space}, state lives in {rho.space}")
    # tr(A B) = sum_ij A_ij B_ji
    return complex(np.sum(op.matrix * rho.matrix.T))


# ---- state constructors -------------------------------------------------


def basis(n: int, k: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def pure(space: HilbertSpace, ket) -> DensityMatrix:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return DensityMatrix(space, np.outer(ket, ket.conj()))


def product_state(space: HilbertSpace, levels: Sequence[int]) -> DensityMatrix:
    """Pure product of basis states, one level per subsystem."""
    ket = reduce(np.kron, [basis(d, k) for d, k in zip(space.dims, levels)])
    return pure(space, ket)


def fock_dm(n_trunc: int, k: int) -> DensityMatrix:
    return pure(mode_space(n_trunc), basis(n_trunc, k))


def coherent_dm(n_trunc: int, alpha: complex) -> DensityMatrix:
    """Truncated coherent state, renormalized inside the truncation."""
    k = np.arange(n_trunc)
    log_fact = np.array([np.sum(np.log(np.arange(1, j + 1))) for j in k])
    amps = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * np.power(complex(alpha), k)
    return pure(mode_space(n_trunc), amps)


def thermal_dm(n_trunc: int, n_bar: float) -> DensityMatrix:
    if n_bar == 0:
        p = basis(n_trunc, 0).real
    else:
        x = n_bar / (1 + n_bar)
        p = x ** np.arange(n_trunc)
        p /= p.sum()
    return DensityMatrix(mode_space(n_trunc), np.diag(p))

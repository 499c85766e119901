"""
Lindblad generators as dense superoperators.

Density matrices are vectorized by stacking columns (Fortran order), so that
vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import constants
import scipy.sparse as sp

from .errors import InvalidDimensionError, InvalidFrequencyError
from .hilbert import HilbertSpace, Operator, annihilation, embed, pauli_ops


def vectorize(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvectorize(vec: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(vec.shape[0])))
    return np.asarray(vec).reshape(d, d, order="F")


def trace_row(d: int) -> np.ndarray:
    """Row vector t with t @ vec(rho) = tr(rho)."""
    return vectorize(np.eye(d, dtype=complex))


@dataclass(frozen=True)
class CollapseChannel:
    op: Operator
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"collapse rate must be >= 0, got {self.rate}")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d * d, d * d):
            raise InvalidDimensionError(f"superoperator shape {m.shape} does not match space dimension {d}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvectorize(self.matrix @ vectorize(rho))


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation for angular frequency ``omega`` (rad/s) at ``temperature`` (K)."""
    if omega <= 0:
        raise InvalidFrequencyError(f"frequency must be positive, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    x = constants.hbar * omega / (constants.k * temperature)
    return float(1.0 / np.expm1(x))


def commutator_superop(H: Operator | np.ndarray) -> np.ndarray:
    """Superoperator of rho -> -i [H, rho]."""
    h = H.matrix if isinstance(H, Operator) else np.asarray(H)
    eye = sp.identity(h.shape[0], format="csr")
    return (-1j * (sp.kron(eye, h) - sp.kron(h.T, eye))).toarray()


def dissipator(op: Operator | np.ndarray) -> np.ndarray:
    """Superoperator of D[o] rho = o rho o^dag - (o^dag o rho + rho o^dag o)/2."""
    o = op.matrix if isinstance(op, Operator) else np.asarray(op)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise InvalidDimensionError(f"jump operator must be square, got shape {o.shape}")
    eye = sp.identity(o.shape[0], format="csr")
    odo = o.conj().T @ o
    return (sp.kron(o.conj(), o) - 0.5 * sp.kron(eye, odo) - 0.5 * sp.kron(odo.T, eye)).toarray()


def dissipative_part(space: HilbertSpace, channels: Sequence[CollapseChannel]) -> np.ndarray:
    d = space.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for ch in channels:
        if ch.op.space != space:
            raise InvalidDimensionError(f"channel operator acts on {ch.op.space}, expected {space}")
        if ch.rate:
            out += ch.rate * dissipator(ch.op)
    return out


def build_liouvillian(H: Operator, channels: Sequence[CollapseChannel]) -> Liouvillian:
    return Liouvillian(H.space, commutator_superop(H) + dissipative_part(H.space, channels))


def atom_mode_channels(
    space: HilbertSpace, kappa: float, gamma_m: float, n_bth: float = 0.0
) -> list[CollapseChannel]:
    """Mechanical damping at temperature n_bth plus zero-temperature atomic decay."""
    b = embed(annihilation(space.dims[1]), space, 1)
    sm = embed(pauli_ops()[1], space, 0)
    return [
        CollapseChannel(b, gamma_m * (n_bth + 1)),
        CollapseChannel(b.dag(), gamma_m * n_bth),
        CollapseChannel(sm, kappa),
    ]


def one_cavity_channels(p) -> list[CollapseChannel]:
    return atom_mode_channels(p.space, p.kappa, p.gamma_m, p.n_bth)


def two_cavity_channels(p) -> list[CollapseChannel]:
    return atom_mode_channels(p.space, p.kappa, p.gamma_m, p.n_bth)

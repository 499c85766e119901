"""
Steady states and time evolution of the master equation.

``steady_state`` replaces one row of L with the trace functional and solves
the resulting square system by LU. ``evolve`` integrates d vec(rho)/dt = L vec(rho)
with classical fixed-step RK4. For periodically driven generators,
``period_propagator`` runs the same RK4 stepper over one drive period on a
full operator basis, so long runs reduce to repeated matrix products;
``evolve_periodic`` uses it to sample the trajectory stroboscopically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import DegenerateSteadyStateError, InvalidDensityMatrixError, StepSizeError, TruncationTooSmallError
from .hilbert import POSITIVITY_TOL, DensityMatrix, HilbertSpace, Operator
from .liouvillian import (
    CollapseChannel,
    Liouvillian,
    build_liouvillian,
    commutator_superop,
    dissipative_part,
    trace_row,
    unvectorize,
    vectorize,
)
from .models import TimeDependentHamiltonian

log = logging.getLogger(__name__)

COND_LIMIT = 1e14
MAX_TRACE_DRIFT = 1e-6
TRACE_DRIFT_RATE = 1e-8
REFINE_STEPS = 2
TD_STEP = 0.02  # default h * omega for time-dependent generators
TD_STEP_MAX = 0.1


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) != len(self.states):
            raise ValueError("times and states must be aligned 1-d sequences")
        if np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return len(self.times)

    def expect(self, op: Operator) -> np.ndarray:
        return np.array([np.sum(op.matrix * s.matrix.T) for s in self.states])


# ---- steady state ---------------------------------------------------------


def _to_density_matrix(space: HilbertSpace, rho: np.ndarray) -> DensityMatrix:
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < -POSITIVITY_TOL:
        raise TruncationTooSmallError(f"steady state has eigenvalue {lam:.3e}; increase the Fock truncation")
    return DensityMatrix(space, rho)


def _null_vector_svd(matrix: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(matrix)
    if s[-2] <= 1e-12 * s[0]:
        raise DegenerateSteadyStateError(
            f"generator has a degenerate kernel (two smallest singular values {s[-2]:.2e}, {s[-1]:.2e})"
        )
    return vh[-1].conj()


def _refine(A: sps.csr_matrix, lu, b: np.ndarray, x: np.ndarray, steps: int = REFINE_STEPS) -> np.ndarray:
    """Iterative refinement with the residual accumulated in extended precision.

    Multi-phonon populations sit many orders of magnitude below the vacuum
    population; a plain double-precision solve leaves them with relative
    errors near 1e-6, which is enough to spoil high-order correlations.
    """
    data = A.data.astype(np.clongdouble)
    starts = A.indptr[:-1]
    nonempty = np.diff(A.indptr) > 0
    for _ in range(steps):
        xl = x.astype(np.clongdouble)
        Ax = np.zeros(len(b), dtype=np.clongdouble)
        Ax[nonempty] = np.add.reduceat(data * xl[A.indices], starts[nonempty])
        r = (b - Ax).astype(complex)
        x = (xl + lu.solve(r)).astype(complex)
    return x


def steady_state(L: Liouvillian) -> DensityMatrix:
    """Unique stationary state of ``L``.

    The trace-augmented system is factorized with sparse LU and its 1-norm
    condition number estimated; beyond 1e14 (or if the factorization is
    singular) the SVD null vector of ``L`` is used instead, and
    ``DegenerateSteadyStateError`` is raised if that kernel is not one-dimensional.
    """
    d = L.space.dim
    A = np.array(L.matrix)
    A[0, :] = trace_row(d)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0

    A = sps.csc_matrix(A)
    try:
        lu = spla.splu(A)
    except RuntimeError:
        log.debug("augmented system singular; using SVD")
        x = _null_vector_svd(L.matrix)
    else:
        inv = spla.LinearOperator(A.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="H"), dtype=complex)
        rcond = 1.0 / (spla.norm(A, 1) * spla.onenormest(inv))
        if rcond * COND_LIMIT < 1.0:
            log.debug("augmented system ill-conditioned (rcond=%.2e); using SVD", rcond)
            x = _null_vector_svd(L.matrix)
        else:
            x = _refine(A.tocsr(), lu, rhs, lu.solve(rhs))
    return _to_density_matrix(L.space, unvectorize(x))


def residual(L: Liouvillian, rho: DensityMatrix) -> float:
    return float(np.linalg.norm(L.matrix @ vectorize(rho.matrix)))


# ---- time evolution -------------------------------------------------------


class _Generator:
    """L(t) = L0 + sum_k c_k(t) C_k, applied to vectors or matrices."""

    def __init__(self, H, channels: Sequence[CollapseChannel]):
        if isinstance(H, TimeDependentHamiltonian):
            self.space = H.space
            self.L0 = commutator_superop(H.static) + dissipative_part(H.space, channels)
            self.terms = [(sps.csr_matrix(commutator_superop(op)), coeff) for op, coeff in H.terms]
            self.frequency = H.frequency
        elif isinstance(H, Operator):
            self.space = H.space
            self.L0 = build_liouvillian(H, channels).matrix
            self.terms = []
            self.frequency = None
        else:
            raise TypeError(f"expected Operator or TimeDependentHamiltonian, got {type(H).__name__}")
        self._L0 = sps.csr_matrix(self.L0)

    @property
    def static(self) -> bool:
        return not self.terms

    def matrix(self, t: float):
        """L(t) as a sparse matrix."""
        out = self._L0
        for C, coeff in self.terms:
            out = out + coeff(t) * C
        return out

    def apply(self, t: float, v: np.ndarray) -> np.ndarray:
        out = self._L0 @ v
        for C, coeff in self.terms:
            out += coeff(t) * (C @ v)
        return out

    def default_step(self) -> float:
        if self.frequency:
            return TD_STEP / self.frequency
        # RK4 is stable for h * |lambda| up to ~2.8; the 1-norm bounds the spectral radius
        return min(0.01, 1.0 / np.linalg.norm(self.L0, 1))

    def check_step(self, h: float):
        if self.frequency and h * self.frequency > TD_STEP_MAX:
            raise StepSizeError(f"step {h:g} does not resolve the drive: h*omega = {h * self.frequency:.3g}")


def _rk4(f: Callable, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + h / 2, y + (h / 2) * k1)
    k3 = f(t + h / 2, y + (h / 2) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _checked_state(space, v, t) -> DensityMatrix:
    rho = unvectorize(v)
    rho = (rho + rho.conj().T) / 2
    try:
        return DensityMatrix(space, rho)
    except InvalidDensityMatrixError as exc:
        raise StepSizeError(f"state at t={t:g} left the physical set ({exc}); reduce h or raise the truncation") from exc


def evolve(
    H: Operator | TimeDependentHamiltonian,
    channels: Sequence[CollapseChannel],
    rho0: DensityMatrix,
    t_grid: Sequence[float],
    h: float | None = None,
) -> Trajectory:
    """Integrate the master equation with fixed-step RK4 and sample on ``t_grid``.

    Each sub-interval of the grid is split into equal steps no longer than
    ``h``. States are renormalized to unit trace at every output time; the
    accumulated trace error is monitored and a drift above 1e-6 aborts.
    """
    gen = _Generator(H, channels)
    if rho0.space != gen.space:
        raise ValueError(f"initial state lives in {rho0.space}, generator in {gen.space}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a non-empty strictly increasing sequence")
    h = gen.default_step() if h is None else float(h)
    gen.check_step(h)

    tr = trace_row(gen.space.dim)
    v = vectorize(rho0.matrix).astype(complex)
    states = [rho0]
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        n = max(1, math.ceil((t1 - t0) / h - 1e-9))
        step = (t1 - t0) / n
        t = t0
        for _ in range(n):
            v = _rk4(gen.apply, t, v, step)
            t += step
        drift = abs(tr @ v - 1.0)
        if drift > MAX_TRACE_DRIFT:
            raise StepSizeError(f"trace drifted by {drift:.2e} over [{t0:g}, {t1:g}]")
        if drift > TRACE_DRIFT_RATE * (t1 - t0):
            log.warning("trace drift %.2e over an interval of length %g", drift, t1 - t0)
        v = v / (tr @ v)
        states.append(_checked_state(gen.space, v, t1))
    return Trajectory(t_grid, states)


def period_propagator(
    H: TimeDependentHamiltonian,
    channels: Sequence[CollapseChannel],
    h: float | None = None,
) -> np.ndarray:
    """Superoperator mapping vec(rho(t)) to vec(rho(t + T)) for t a multiple of T.

    Obtained by RK4 over one period on the identity, so it is exactly the map
    the vector integrator would apply with the same step.
    """
    if H.period is None:
        raise ValueError("Hamiltonian has no period")
    gen = _Generator(H, channels)
    h = gen.default_step() if h is None else float(h)
    gen.check_step(h)
    n = max(1, math.ceil(H.period / h - 1e-9))
    step = H.period / n
    P = np.eye(gen.space.dim**2, dtype=complex)
    t = 0.0
    for _ in range(n):
        P = _rk4(lambda s, y: gen.matrix(s) @ y, t, P, step)
        t += step
    return P


def periodic_steady_state(P: np.ndarray, space: HilbertSpace) -> DensityMatrix:
    """Fixed point of a one-period propagator (the stroboscopic limit cycle)."""
    d = space.dim
    A = P - np.eye(d * d)
    A[0, :] = trace_row(d)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    return _to_density_matrix(space, unvectorize(np.linalg.solve(A, rhs)))


def evolve_periodic(
    H: TimeDependentHamiltonian,
    channels: Sequence[CollapseChannel],
    rho0: DensityMatrix,
    t_grid: Sequence[float],
    h: float | None = None,
    propagator: np.ndarray | None = None,
) -> Trajectory:
    """RK4 trajectory of a periodically driven system, sampled at whole periods.

    Every entry of ``t_grid`` is snapped to the nearest multiple of the drive
    period; the returned trajectory carries the snapped times.
    """
    P = period_propagator(H, channels, h) if propagator is None else propagator
    counts = np.rint(np.asarray(t_grid, dtype=float) / H.period).astype(int)
    if np.any(np.diff(counts) <= 0) or counts[0] < 0:
        raise ValueError("t_grid is not strictly increasing once snapped to whole drive periods")
    tr = trace_row(H.space.dim)
    v = vectorize(rho0.matrix).astype(complex)
    v = np.linalg.matrix_power(P, int(counts[0])) @ v
    states = []
    cache: dict[int, np.ndarray] = {}
    prev = counts[0]
    for k in counts:
        gap = int(k - prev)
        if gap:
            if gap not in cache:
                cache[gap] = np.linalg.matrix_power(P, gap)
            v = cache[gap] @ v
        prev = k
        drift = abs(tr @ v - 1.0)
        if drift > MAX_TRACE_DRIFT:
            raise StepSizeError(f"trace drifted by {drift:.2e} after {k} periods")
        v = v / (tr @ v)
        states.append(_checked_state(H.space, v, k * H.period))
    return Trajectory(counts * H.period, states)

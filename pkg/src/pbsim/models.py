"""
Effective Hamiltonians of the hybrid atom-optomechanical setups.

All rates are in units of the atom damping rate kappa. The cavity field never
appears as a quantum mode: it enters only through its mean photon number,
which fixes the effective atom-phonon coupling.

One cavity
    H = (D/2) sz + D b^dag b + G (s+ b + s- b^dag) + eps (b^dag + b),
    G = gamma_tri * sqrt(n_cav).

Two cavities (mechanical supermode b- only)
    reduced:  H = -G' (s+ b- + s- b-^dag) + (eps/sqrt2)(b-^dag + b-)
    full:     reduced + (g/sqrt2)(G'/gamma)(s+ e^{i wm t} + s- e^{-i wm t}),
    gamma = g g0 / (4J),  G' = gamma (sqrt(n+) - sqrt(n-)).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields, replace
from typing import Callable, Literal

import numpy as np

from .errors import DivergentDriveError, ExpansionInvalidError, RWAWarning
from .hilbert import HilbertSpace, Operator, annihilation, embed, pauli_ops

KAPPA_MHZ_OVER_2PI = 5.0

RWA_RATIO = 10.0
QUASI_STATIC_LIMIT = 0.1
FIRST_ORDER_LIMIT = 0.2


def from_mhz_over_2pi(value: float, kappa_mhz_over_2pi: float = KAPPA_MHZ_OVER_2PI) -> float:
    """Convert a caption-style rate (MHz, already divided by 2 pi) to units of kappa."""
    return value / kappa_mhz_over_2pi


def _check_nonnegative(obj, names):
    for name in names:
        v = getattr(obj, name)
        if v < 0:
            raise ValueError(f"{type(obj).__name__}.{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class OneCavityParams:
    """Parameters of the single-cavity model.

    Defaults are the standard single-cavity working point:
    omega_m = 280, Gamma_c = 1, Gamma_m = 0.01, gamma = 0.003, eps = 0.01.
    ``omega_drive`` is the cavity drive amplitude Omega and ``delta`` is the
    atom/phonon detuning from the mechanical drive.
    """

    kappa: float = 1.0
    gamma_m: float = 0.01
    gamma_c: float = 1.0
    gamma_tri: float = 0.003
    omega_m: float = 280.0
    delta_c: float = 0.0
    omega_drive: float = 0.0
    eps: float = 0.01
    delta: float = 0.0
    n_bth: float = 0.0
    n_trunc: int = 15

    def __post_init__(self):
        _check_nonnegative(self, ["kappa", "gamma_m", "gamma_c", "gamma_tri", "omega_m", "omega_drive", "eps", "n_bth"])
        if self.n_trunc < 2:
            raise ValueError(f"n_trunc must be >= 2, got {self.n_trunc}")

    @property
    def n_cav(self) -> float:
        return cavity_mean_photon(self.omega_drive, self.delta_c, self.gamma_c)

    @property
    def coupling(self) -> float:
        return effective_coupling_one_cavity(self.gamma_tri, self.n_cav)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((2, self.n_trunc), ("atom", "phonon"))


@dataclass(frozen=True)
class TwoCavityParams:
    """Parameters of the two-cavity model, reduced to the atom and the b- supermode.

    Defaults: g/2pi = 0.4 MHz, g0/2pi = 2 MHz,
    J/2pi = 4 MHz, J_m/2pi = 0.01 MHz with kappa/2pi = 5 MHz, and
    sqrt(n+) = 51, sqrt(n-) = 1, eps = 0.03.
    """

    g: float = 0.08
    g0: float = 0.4
    J: float = 0.8
    Jm: float = 0.002
    omega_m: float = 280.0
    n_plus: float = 51.0**2
    n_minus: float = 1.0
    eps: float = 0.03
    kappa: float = 1.0
    gamma_m: float = 0.01
    n_bth: float = 0.0
    n_trunc: int = 15

    def __post_init__(self):
        _check_nonnegative(self, ["g", "g0", "Jm", "omega_m", "n_minus", "eps", "kappa", "gamma_m", "n_bth"])
        if self.J <= 0:
            raise ValueError(f"J must be > 0, got {self.J}")
        if self.n_plus < self.n_minus:
            raise ValueError(f"n_plus ({self.n_plus}) must be >= n_minus ({self.n_minus})")
        if self.n_trunc < 2:
            raise ValueError(f"n_trunc must be >= 2, got {self.n_trunc}")

    @property
    def gamma_eff(self) -> float:
        return tripartite_rate_two_cavity(self.g, self.g0, self.J)

    @property
    def coupling(self) -> float:
        return effective_coupling_two_cavity(self.gamma_eff, self.n_plus, self.n_minus)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((2, self.n_trunc), ("atom", "b_minus"))

    def with_coupling(self, g_prime: float) -> TwoCavityParams:
        """Same parameters with n_plus moved so that G' equals ``g_prime``."""
        root = np.sqrt(self.n_minus) + g_prime / self.gamma_eff
        return replace(self, n_plus=float(root**2))


def param_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


# ---- derived rates --------------------------------------------------------


def cavity_mean_photon(omega_drive: float, delta_c: float, gamma_c: float) -> float:
    """Steady-state photon number of a coherently driven, damped cavity."""
    if gamma_c == 0 and delta_c == 0:
        if omega_drive == 0:
            return 0.0
        raise DivergentDriveError("resonant drive of a lossless cavity has no steady state")
    return omega_drive**2 / (delta_c**2 + (gamma_c / 2) ** 2)


def effective_coupling_one_cavity(gamma_tri: float, n_cav: float) -> float:
    if n_cav < 0:
        raise ValueError(f"n_cav must be >= 0, got {n_cav}")
    return gamma_tri * np.sqrt(n_cav)


def tripartite_rate_two_cavity(g: float, g0: float, J: float) -> float:
    if J == 0:
        raise ZeroDivisionError("cavity-cavity coupling J must be nonzero")
    return g * g0 / (4 * J)


def effective_coupling_two_cavity(gamma_eff: float, n_plus: float, n_minus: float) -> float:
    if not n_plus >= n_minus >= 0:
        raise ValueError(f"need n_plus >= n_minus >= 0, got {n_plus}, {n_minus}")
    return gamma_eff * (np.sqrt(n_plus) - np.sqrt(n_minus))


def optimal_coupling(kappa: float, gamma_tri: float) -> float:
    """Atom-phonon coupling that gives the deepest antibunching."""
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    return 0.5 * np.sqrt(kappa * (kappa + gamma_tri))


def supermode_coefficients(
    delta_b: float, J: float, order: Literal["exact", "first_order"] = "exact"
) -> tuple[float, float]:
    """Weights of the atom on the two optical supermodes for a static shift ``delta_b``."""
    if J <= 0:
        raise ValueError(f"J must be > 0, got {J}")
    if order == "exact":
        root = np.sqrt(delta_b**2 + J**2) + delta_b
        alpha = J / np.sqrt(root**2 + J**2)
        return float(alpha), float(alpha * root / J)
    if order == "first_order":
        if abs(delta_b) / J >= FIRST_ORDER_LIMIT:
            raise ExpansionInvalidError(f"|delta_b|/J = {abs(delta_b) / J:.3g} too large for first-order expansion")
        x = delta_b / (2 * J)
        return (1 - x) / np.sqrt(2), (1 + x) / np.sqrt(2)
    raise ValueError(f"unknown order {order!r}")


# ---- Hamiltonians ---------------------------------------------------------


def _atom_mode_ops(space: HilbertSpace):
    sp, sm, sz = pauli_ops()
    b = annihilation(space.dims[1])
    return embed(sp, space, 0), embed(sm, space, 0), embed(sz, space, 0), embed(b, space, 1)


def jaynes_cummings_hamiltonian(n_trunc: int, delta: float, coupling: float, eps: float, labels=("atom", "phonon")):
    """(D/2) sz + D b^dag b + G (s+ b + s- b^dag) + eps (b^dag + b) on atom x mode."""
    space = HilbertSpace((2, n_trunc), labels)
    sp, sm, sz, b = _atom_mode_ops(space)
    bd = b.dag()
    return (delta / 2) * sz + delta * (bd @ b) + coupling * (sp @ b + sm @ bd) + eps * (bd + b)


def build_one_cavity_hamiltonian(p: OneCavityParams, rwa_ratio: float = RWA_RATIO) -> Operator:
    G = p.coupling
    if p.gamma_tri > G / rwa_ratio or G > p.omega_m / rwa_ratio:
        warnings.warn(
            f"gamma << G << omega_m not satisfied (gamma={p.gamma_tri:g}, G={G:g}, omega_m={p.omega_m:g})",
            RWAWarning,
            stacklevel=2,
        )
    return jaynes_cummings_hamiltonian(p.n_trunc, p.delta, G, p.eps)


def reduced_supermode_hamiltonian(n_trunc: int, g_prime: float, eps: float) -> Operator:
    """-G' (s+ b- + s- b-^dag) + (eps/sqrt2)(b-^dag + b-) for arbitrary real G' and eps."""
    space = HilbertSpace((2, n_trunc), ("atom", "b_minus"))
    sp, sm, _, b = _atom_mode_ops(space)
    bd = b.dag()
    return -g_prime * (sp @ b + sm @ bd) + (eps / np.sqrt(2)) * (bd + b)


def quasi_static_ratio(p: TwoCavityParams) -> float:
    return p.g / p.omega_m * (np.sqrt(p.n_plus) - np.sqrt(p.n_minus))


def build_two_cavity_hamiltonian_reduced(p: TwoCavityParams, threshold: float = QUASI_STATIC_LIMIT) -> Operator:
    ratio = quasi_static_ratio(p)
    if ratio > threshold:
        warnings.warn(
            f"(g/omega_m)(sqrt(n+) - sqrt(n-)) = {ratio:.3g} exceeds {threshold:g}; "
            "the fast atomic drive can no longer be dropped",
            RWAWarning,
            stacklevel=2,
        )
    return reduced_supermode_hamiltonian(p.n_trunc, p.coupling, p.eps)


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    """H(t) = static + sum_k coeff_k(t) * op_k.

    ``frequency`` is the fastest angular frequency among the coefficients and
    sets the integration step; ``period`` is set when H(t) is periodic.
    """

    static: Operator
    terms: tuple[tuple[Operator, Callable[[float], complex]], ...]
    frequency: float
    period: float | None = None

    @property
    def space(self) -> HilbertSpace:
        return self.static.space

    def __call__(self, t: float) -> Operator:
        m = self.static.matrix.copy()
        for op, coeff in self.terms:
            m = m + coeff(t) * op.matrix
        return Operator(self.space, m)


def fast_drive_amplitude(p: TwoCavityParams) -> float:
    """Prefactor (g/sqrt2)(G'/gamma) of the oscillating atomic drive."""
    return p.g / np.sqrt(2) * (np.sqrt(p.n_plus) - np.sqrt(p.n_minus))


def two_cavity_time_dependent(p: TwoCavityParams) -> TimeDependentHamiltonian:
    static = reduced_supermode_hamiltonian(p.n_trunc, p.coupling, p.eps)
    sp, sm, _, _ = _atom_mode_ops(static.space)
    amp = fast_drive_amplitude(p)
    w = p.omega_m
    terms = (
        (amp * sp, lambda t: np.exp(1j * w * t)),
        (amp * sm, lambda t: np.exp(-1j * w * t)),
    )
    return TimeDependentHamiltonian(static, terms, frequency=w, period=2 * np.pi / w)


def build_two_cavity_hamiltonian_full(p: TwoCavityParams, t: float) -> Operator:
    return two_cavity_time_dependent(p)(t)

"""
Equal-time phonon-number correlations and blockade/tunneling classification.

g(n) = <(b^dag)^n b^n> / <b^dag b>^n. Regions follow the orderings among
{1, g2, g3, g4} observed along a detuning sweep of the one-cavity model
(regions A to F below).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UndefinedCorrelationError
from .hilbert import DensityMatrix, annihilation, embed

OCCUPATION_FLOOR = 1e-12


class Region(str, Enum):
    STANDARD_PB = "standard_PB"
    NON_STANDARD_PB = "non_standard_PB"
    TUNNELING = "phonon_induced_tunneling"
    UNCLASSIFIED = "unclassified"


# orderings from largest to smallest, keyed to the labelled detuning regions
TABLE_REGIONS = {
    "1>g2>g4>g3": "A",
    "1>g4>g2>g3": "B",
    "g4>1>g2>g3": "C",
    "g4>1>g3>g2": "D",
    "g4>g3>1>g2": "E",
    "g4>g3>g2>1": "F",
}


@dataclass(frozen=True)
class CorrelationReport:
    mean_phonon: float
    g2: float
    g3: float
    g4: float
    region_label: Region
    ordering: str

    @property
    def table_region(self) -> str | None:
        return TABLE_REGIONS.get(self.ordering)


def _moments(rho: DensityMatrix, mode: int | str, orders) -> dict[int, float]:
    if isinstance(mode, str):
        mode = rho.space.index(mode)
    b = embed(annihilation(rho.space.dims[mode]), rho.space, mode).matrix
    bd = b.conj().T
    # <(b^dag)^n b^n> = tr(b^n rho (b^dag)^n)
    out = {}
    x = rho.matrix
    for n in range(1, max(orders) + 1):
        x = b @ x @ bd
        if n in orders:
            val = np.trace(x)
            if abs(val.imag) > 1e-9 * max(abs(val.real), 1e-300) and abs(val.imag) > 1e-15:
                raise ValueError(f"moment of order {n} has imaginary part {val.imag:.3e}")
            out[n] = float(val.real)
    return out


def mean_occupation(rho: DensityMatrix, mode: int | str = 1) -> float:
    return _moments(rho, mode, {1})[1]


def g_n(rho: DensityMatrix, mode: int | str = 1, n: int = 2, floor: float = OCCUPATION_FLOOR) -> float:
    if n not in (2, 3, 4):
        raise ValueError(f"correlation order must be 2, 3 or 4, got {n}")
    m = _moments(rho, mode, {1, n})
    if m[1] < floor:
        raise UndefinedCorrelationError(f"<b^dag b> = {m[1]:.3e} is below the floor {floor:g}")
    return max(m[n], 0.0) / m[1] ** n


def supermode_g2(rho: DensityMatrix, floor: float = OCCUPATION_FLOOR) -> float:
    return g_n(rho, "b_minus" if "b_minus" in rho.space.labels else 1, 2, floor)


def ordering(g2: float, g3: float, g4: float) -> str:
    vals = {"1": 1.0, "g2": g2, "g3": g3, "g4": g4}
    # ties keep the listed order, so the string is deterministic
    return ">".join(sorted(vals, key=lambda k: -vals[k]))


def classify(g2: float, g3: float, g4: float, weak_tunneling: bool = False) -> tuple[Region, str]:
    """Blockade regime for a triple of correlations.

    ``weak_tunneling`` accepts g3 > g2 > 1 as tunneling instead of requiring
    g4 > g3 > g2 > 1.
    """
    if min(g2, g3, g4) < 0:
        raise ValueError("correlations must be non-negative")
    order = ordering(g2, g3, g4)
    if g2 < 1 and g3 < 1 and g4 < 1:
        label = Region.STANDARD_PB
    elif g2 < 1 and (g3 > 1 or g4 > 1):
        label = Region.NON_STANDARD_PB
    elif (g3 > g2 > 1) if weak_tunneling else (g4 > g3 > g2 > 1):
        label = Region.TUNNELING
    else:
        label = Region.UNCLASSIFIED
    return label, order


def correlation_report(rho: DensityMatrix, mode: int | str = 1, floor: float = OCCUPATION_FLOOR) -> CorrelationReport:
    m = _moments(rho, mode, {1, 2, 3, 4})
    if m[1] < floor:
        raise UndefinedCorrelationError(f"<b^dag b> = {m[1]:.3e} is below the floor {floor:g}")
    g2, g3, g4 = (max(m[n], 0.0) / m[1] ** n for n in (2, 3, 4))
    label, order = classify(g2, g3, g4)
    return CorrelationReport(m[1], g2, g3, g4, label, order)

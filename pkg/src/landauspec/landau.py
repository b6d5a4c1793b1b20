"""Level arithmetic and the truncated symmetric-gauge orbital basis.

The free transverse operator has a purely discrete ladder of infinitely
degenerate eigenvalues, evenly spaced by twice the field strength.  This
module owns that ladder (distances to it and to the half-line it spans)
and, for the planar case, a concrete orthonormal family spanning the first
few eigenspaces: Laguerre orbitals in the symmetric gauge, indexed by the
level number j and the angular momentum m >= 0 within the level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import UnsupportedDimensionError

__all__ = [
    "MagneticConfig",
    "BasisSpec",
    "landau_level",
    "level_set",
    "dist_to_levels",
    "nearest_level_index",
    "dist_to_essential",
    "orbital_eval",
]


@dataclass(frozen=True)
class MagneticConfig:
    """Field strength b > 0 and half-dimension d >= 1 of the transverse space."""

    b: float
    d: int = 1

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"field strength must be positive, got b={self.b}")
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise ValueError(f"half-dimension must be an integer >= 1, got d={self.d}")


@dataclass(frozen=True)
class BasisSpec:
    """Truncation cutoffs: levels j = 0..j_max, angular indices m = 0..m_max.

    Flat indexing is j-major: index = j*(m_max+1) + m, a total order-preserving
    bijection with the pairs (j, m).
    """

    j_max: int
    m_max: int

    def __post_init__(self):
        if self.j_max < 0 or self.m_max < 0:
            raise ValueError("cutoffs must be nonnegative")

    @property
    def dim(self) -> int:
        return (self.j_max + 1) * (self.m_max + 1)

    def flat_index(self, j: int, m: int) -> int:
        if not (0 <= j <= self.j_max and 0 <= m <= self.m_max):
            raise IndexError(f"(j={j}, m={m}) outside basis cutoffs")
        return j * (self.m_max + 1) + m

    def pair_index(self, idx: int) -> tuple[int, int]:
        if not (0 <= idx < self.dim):
            raise IndexError(f"flat index {idx} outside basis of size {self.dim}")
        return divmod(idx, self.m_max + 1)

    def level_indices(self) -> np.ndarray:
        """Level number j of every flat basis index, in order."""
        return np.repeat(np.arange(self.j_max + 1), self.m_max + 1)

    def enlarged(self, extra_j: int = 2, extra_m: int = 2) -> "BasisSpec":
        return BasisSpec(self.j_max + extra_j, self.m_max + extra_m)


def landau_level(cfg: MagneticConfig, j: int) -> float:
    """Energy of the j-th free level: 2b(j+1), strictly increasing with gap 2b.

    The ladder starts at 2b and is independent of the half-dimension d; d
    enters the envelope norms and weight exponents elsewhere, not the ladder.
    """
    if j < 0:
        raise ValueError(f"level index must be nonnegative, got {j}")
    return cfg.b * (2.0 * j + 2.0)


def level_set(cfg: MagneticConfig, j_max: int) -> np.ndarray:
    """Levels 0..j_max as an array."""
    return cfg.b * (2.0 * np.arange(j_max + 1) + 2.0)


def _levels_needed(cfg: MagneticConfig, lam: complex) -> int:
    # Smallest count such that levels beyond it cannot attain the minimum:
    # levels are increasing, so once Re(lam) is passed, one extra suffices.
    j_star = max(0.0, (lam.real / cfg.b - 2.0) / 2.0)
    return int(math.ceil(j_star)) + 2


def dist_to_levels(cfg: MagneticConfig, lam: complex) -> float:
    """Euclidean distance of lam to the level set (minimum is attained)."""
    lam = complex(lam)
    js = np.arange(_levels_needed(cfg, lam))
    levels = cfg.b * (2.0 * js + 2.0)
    return float(np.min(np.abs(lam - levels)))


def nearest_level_index(cfg: MagneticConfig, lam: complex) -> int:
    """Index j of the level closest to lam (lowest such j on ties)."""
    lam = complex(lam)
    js = np.arange(_levels_needed(cfg, lam))
    levels = cfg.b * (2.0 * js + 2.0)
    return int(np.argmin(np.abs(lam - levels)))


def dist_to_essential(cfg: MagneticConfig, lam: complex) -> float:
    """Distance of lam to the half-line [lowest level, +inf)."""
    lam = complex(lam)
    lam0 = landau_level(cfg, 0)
    if lam.real >= lam0:
        return abs(lam.imag)
    return abs(lam - lam0)


def orbital_eval(cfg: MagneticConfig, j: int, m: int, point) -> complex:
    """Orthonormal symmetric-gauge orbital value at a planar point (x, y).

    Level j, angular momentum m >= 0.  With rho = b r^2 / 2:

        phi_{j,m} = sqrt(b / (2 pi)) * sqrt(j! / (j+m)!)
                    * exp(i m theta) * rho^(m/2) * L_j^(m)(rho) * exp(-rho/2)

    The family is orthonormal under the plane Lebesgue measure; fixing the
    angular index to the angular momentum makes radial potentials exactly
    block-diagonal in m.  Only d = 1 is realized.
    """
    if cfg.d != 1:
        raise UnsupportedDimensionError(
            f"orbitals are only built for d=1 transverse planes, got d={cfg.d}"
        )
    if j < 0 or m < 0:
        raise ValueError("orbital indices must be nonnegative")
    x, y = point
    r2 = x * x + y * y
    rho = 0.5 * cfg.b * r2
    theta = math.atan2(y, x)
    lognorm = 0.5 * (gammaln(j + 1) - gammaln(j + m + 1))
    radial = (
        math.sqrt(cfg.b / (2.0 * math.pi))
        * math.exp(lognorm)
        * rho ** (0.5 * m)
        * eval_genlaguerre(j, m, rho)
        * math.exp(-0.5 * rho)
    )
    return radial * complex(math.cos(m * theta), math.sin(m * theta))


def orbital_radial_table(
    cfg: MagneticConfig, basis: BasisSpec, rho: np.ndarray
) -> np.ndarray:
    """Radial parts of all basis orbitals on a grid of rho = b r^2 / 2 values.

    Returns an array of shape (j_max+1, m_max+1, len(rho)) holding
    N_{jm} * rho^(m/2) * L_j^m(rho) * exp(-rho/2), i.e. the orbital without
    its exp(i m theta) angular factor.  Used by Galerkin quadrature.
    """
    if cfg.d != 1:
        raise UnsupportedDimensionError("radial tables require d=1")
    rho = np.asarray(rho, dtype=float)
    out = np.empty((basis.j_max + 1, basis.m_max + 1, rho.size))
    pref = math.sqrt(cfg.b / (2.0 * math.pi))
    for m in range(basis.m_max + 1):
        half_pow = rho ** (0.5 * m)
        for j in range(basis.j_max + 1):
            lognorm = 0.5 * (gammaln(j + 1) - gammaln(j + m + 1))
            out[j, m] = (
                pref
                * math.exp(lognorm)
                * half_pow
                * eval_genlaguerre(j, m, rho)
                * np.exp(-0.5 * rho)
            )
    return out

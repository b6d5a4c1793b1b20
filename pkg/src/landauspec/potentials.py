"""Complex-valued potentials on the plane with decay envelopes.

A potential carries its evaluator, a sup-norm (exact for the built-in
closed-form families, else a flagged grid estimate), an optional envelope
(C, m_perp) meaning |V(X)| <= C * (1+|X|^2)^(-m_perp/2), and a radial flag.
Nothing downstream assumes self-adjointness: values are complex throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import DivergentNormError

__all__ = [
    "Potential",
    "make_power_decay",
    "make_gaussian_complex",
    "make_synthetic_diagonal",
    "envelope_check",
    "lp_norm_of_envelope",
]


@dataclass(frozen=True)
class Potential:
    """Immutable complex potential on R^2.

    ``eval_xy(x, y)`` accepts scalars or numpy arrays and broadcasts.
    ``envelope`` is ``(C, m_perp)`` when a pointwise decay bound is declared.
    ``amplitude`` is the complex prefactor the whole potential scales with.
    ``envelope_lp_pow_p(p)`` returns ||F||_p^p for the modulus profile F
    entering the sum-functional bounds; it scales linearly with the
    amplitude magnitude.
    """

    eval_xy: Callable[[np.ndarray, np.ndarray], np.ndarray]
    sup_norm: float
    sup_norm_exact: bool
    radial_flag: bool
    label: str
    envelope: Optional[tuple[float, float]] = None
    amplitude: complex = 1.0 + 0j
    _lp_pow_p: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def __call__(self, x, y):
        return self.eval_xy(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def envelope_lp_pow_p(self, p: float) -> float:
        """||F||_{L^p}^p of the potential's modulus envelope profile."""
        if self._lp_pow_p is None:
            raise ValueError(f"potential {self.label!r} declares no L^p envelope")
        return self._lp_pow_p(p)

    def scaled(self, t: complex) -> "Potential":
        """The potential multiplied by a complex scalar t."""
        t = complex(t)
        base = self.eval_xy
        env = None
        if self.envelope is not None:
            env = (self.envelope[0] * abs(t), self.envelope[1])
        lp = None
        if self._lp_pow_p is not None:
            old = self._lp_pow_p
            lp = lambda p, _old=old, _a=abs(t): _a**p * _old(p)
        return Potential(
            eval_xy=lambda x, y, _b=base, _t=t: _t * _b(x, y),
            sup_norm=abs(t) * self.sup_norm,
            sup_norm_exact=self.sup_norm_exact,
            radial_flag=self.radial_flag,
            label=f"{abs(t):g}*{self.label}",
            envelope=env,
            amplitude=t * self.amplitude,
            _lp_pow_p=lp,
        )


def _trig_poly(coeffs: Sequence[complex]) -> Callable[[np.ndarray], np.ndarray]:
    """Angular profile sum_k c_k * exp(i k theta), k = -K..K from a coefficient list.

    ``coeffs`` is ordered [c_{-K}, ..., c_0, ..., c_K]; a length-1 list is the
    constant profile.
    """
    coeffs = [complex(c) for c in coeffs]
    if len(coeffs) % 2 != 1:
        raise ValueError("trig-polynomial coefficient list must have odd length")
    K = len(coeffs) // 2

    def profile(theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for k, c in zip(range(-K, K + 1), coeffs):
            if c != 0:
                out = out + c * np.exp(1j * k * theta)
        return out

    return profile


def make_power_decay(
    C: float, m_perp: float, v_coeffs: Sequence[complex] = (1.0,)
) -> Potential:
    """Potential C * v(theta) * (1 + r^2)^(-m_perp/2) with trig-poly profile v.

    For the constant profile the sup-norm |C*v| is exact (maximum at the
    origin); otherwise it is the exact angular max at the origin since the
    radial factor peaks there.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    if m_perp <= 0:
        raise ValueError(f"decay exponent must be positive, got {m_perp}")
    prof = _trig_poly(v_coeffs)
    radial = len(v_coeffs) == 1

    def ev(x, y):
        r2 = x * x + y * y
        rad = C * (1.0 + r2) ** (-0.5 * m_perp)
        if radial:
            return rad * complex(v_coeffs[0])
        return rad * prof(np.arctan2(y, x))

    # angular maximum of |v| on a fine exact-sampling grid (trig poly of low
    # degree: 4096 samples overshoot any practical degree)
    th = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
    vmax = float(np.max(np.abs(prof(th))))
    sup = C * vmax

    def lp_pow(p: float, _C=C, _m=m_perp, _vmax=vmax) -> float:
        return (_C * _vmax) ** p * _radial_lp_pow(p, _m, d=1)

    return Potential(
        eval_xy=ev,
        sup_norm=sup,
        sup_norm_exact=True,
        radial_flag=radial,
        label=f"power_decay(C={C:g},m_perp={m_perp:g})",
        envelope=(sup, m_perp),
        amplitude=C * v_coeffs[len(v_coeffs) // 2],
        _lp_pow_p=lp_pow,
    )


def make_gaussian_complex(a: complex, sigma: float) -> Potential:
    """Potential a * exp(-r^2 / (2 sigma^2)); sup-norm |a| exactly.

    The L^p envelope profile is the gaussian itself:
    ||F||_p^p = |a|^p * 2 pi sigma^2 / p.
    """
    if sigma <= 0:
        raise ValueError(f"width must be positive, got sigma={sigma}")
    a = complex(a)

    def ev(x, y, _a=a, _s2=2.0 * sigma * sigma):
        return _a * np.exp(-(x * x + y * y) / _s2)

    def lp_pow(p: float, _a=abs(a), _sig=sigma) -> float:
        return _a**p * 2.0 * math.pi * _sig * _sig / p

    return Potential(
        eval_xy=ev,
        sup_norm=abs(a),
        sup_norm_exact=True,
        radial_flag=True,
        label=f"gaussian(a={a:g},sigma={sigma:g})",
        envelope=None,
        amplitude=a,
        _lp_pow_p=lp_pow,
    )


@dataclass(frozen=True)
class SyntheticDiagonal:
    """Non-physical test operator given directly by diagonal entries.

    Maps (j, m) basis pairs to complex shifts; everything absent is zero.
    Not a multiplication operator -- consumed by the assembly layer, which
    recognizes it and skips quadrature.  Gives exactly solvable spectra
    (level + shift) for cross-checks.
    """

    entries: dict
    label: str = "synthetic_diagonal"

    @property
    def sup_norm(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)


def make_synthetic_diagonal(entries: dict) -> SyntheticDiagonal:
    """Diagonal fixture: entries is {(j, m): complex shift}."""
    return SyntheticDiagonal(entries=dict(entries))


def envelope_check(
    V: Potential, C: float, m_perp: float, grid: np.ndarray
) -> tuple[bool, float]:
    """Worst ratio |V| * (1+r^2)^(m_perp/2) / C over a radial grid.

    Returns (passed, worst_ratio); passes iff the ratio never exceeds
    1 + 1e-12.  The grid is a nonempty array of radii (evaluated along the
    positive x-axis; for angular profiles the caller supplies points 2-D).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("envelope grid must be nonempty")
    if grid.ndim == 1:
        x, y = grid, np.zeros_like(grid)
    else:
        x, y = grid[..., 0], grid[..., 1]
    vals = np.abs(V(x, y))
    weights = (1.0 + x * x + y * y) ** (0.5 * m_perp)
    worst = float(np.max(vals * weights)) / C
    return worst <= 1.0 + 1e-12, worst


def _radial_lp_pow(p: float, m_perp: float, d: int) -> float:
    """||(1+|X|^2)^(-m_perp/2)||_{L^p(R^{2d})}^p by radial quadrature."""
    if p * m_perp <= 2 * d:
        raise DivergentNormError(
            f"p*m_perp = {p * m_perp:g} must exceed 2d = {2 * d} for a finite norm"
        )
    n = 2 * d  # ambient dimension
    sphere = 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)

    def integrand(r):
        return r ** (n - 1) * (1.0 + r * r) ** (-0.5 * p * m_perp)

    # split at 1 to help the adaptive rule with the scale change
    val1, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12)
    val2, _ = quad(integrand, 1.0, np.inf, epsabs=1e-14, epsrel=1e-12)
    return sphere * (val1 + val2)


def lp_norm_of_envelope(C: float, m_perp: float, p: float, d: int) -> float:
    """L^p(R^{2d}) norm of C * (1+|X|^2)^(-m_perp/2); errors when divergent."""
    if C <= 0 or m_perp <= 0:
        raise ValueError("C and m_perp must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    return C * _radial_lp_pow(p, m_perp, d) ** (1.0 / p)

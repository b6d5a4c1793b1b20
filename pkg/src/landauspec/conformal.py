"""Conformal machinery: disk-to-rectangle maps and the inverse-shift map.

Two maps live here.  The disk-to-rectangle map has derivative
C / prod_k (z - z_k)^(1/2) over four prevertices on the unit circle; the
rectangle symmetry reduces prevertex solving to one angle, found by
bisection on the aspect ratio of two midline integrals.  The inverse-shift
map lam -> 1/(lam - mu) transports the unbounded spectral picture to
bounded resolvents; its distortion of distances to the level set and to
the essential half-line is probed pointwise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import PoleError, RectangleTooShortError
from .landau import MagneticConfig, dist_to_essential, dist_to_levels, landau_level
from .zeros import ComplexRectangle

__all__ = [
    "SCMap",
    "DiskAutomorphism",
    "MobiusData",
    "DistortionSample",
    "RegionCheck",
    "ComparabilityResult",
    "mu_of_potential",
    "mobius_map",
    "mobius_inverse",
    "distortion_probe",
    "region_split_check",
    "sc_solve",
    "sc_eval",
    "comparability_probe",
    "choose_lambda0",
]


# ---------------------------------------------------------------------------
# inverse-shift map and distortion probes
# ---------------------------------------------------------------------------


def mu_of_potential(v_inf: float) -> float:
    """Left anchor point -(sup norm) - 1 used for bounded resolvents."""
    if v_inf < 0:
        raise ValueError("sup norm must be nonnegative")
    return -float(v_inf) - 1.0


def mobius_map(lam: complex, mu: float) -> complex:
    """z = 1/(lam - mu); pole at lam = mu."""
    lam = complex(lam)
    if lam == complex(mu):
        raise PoleError(f"inverse-shift map has its pole at {mu}")
    return 1.0 / (lam - mu)


def mobius_inverse(z: complex, mu: float) -> complex:
    """lam = mu + 1/z; pole at z = 0."""
    z = complex(z)
    if z == 0:
        raise PoleError("inverse-shift map inverse has its pole at 0")
    return mu + 1.0 / z


def _dist_point_to_real_segment(w: complex, lo: float, hi: float) -> float:
    x = min(max(w.real, lo), hi)
    return abs(w - x)


@dataclass(frozen=True)
class MobiusData:
    """Geometry transported by z = 1/(lam - mu) for a given ladder.

    Level images 1/(level_j - mu) decrease to 0; the essential half-line
    maps onto the segment (0, 1/(level_0 - mu)].  The gap radius between
    consecutive levels is 2b, so the near-ladder region is the union of
    balls of radius 4b around the levels.
    """

    cfg: MagneticConfig
    mu: float

    def __post_init__(self):
        if self.mu > -1.0:
            raise ValueError("anchor point must satisfy mu <= -1")

    @property
    def gap_radius(self) -> float:
        return 2.0 * self.cfg.b

    @property
    def segment_end(self) -> float:
        return 1.0 / (landau_level(self.cfg, 0) - self.mu)

    def level_image(self, j: int) -> float:
        return 1.0 / (landau_level(self.cfg, j) - self.mu)

    def level_images(self, j_max: int) -> np.ndarray:
        return 1.0 / (
            self.cfg.b * (2.0 * np.arange(j_max + 1) + 2.0) - self.mu
        )

    def dist_to_level_images(self, w: complex) -> float:
        """Distance from w to the set of level images, exactly.

        The images form a positive decreasing sequence accumulating at 0,
        so the minimizing image brackets the real part of w; only the
        bracketing indices (and the accumulation point, which represents
        the tail infimum: distance to a set equals distance to its closure)
        need checking.
        """
        w = complex(w)
        best = abs(w)  # tail infimum: images accumulate at 0
        candidates = {0, 1}
        if w.real > 0:
            # x_j = Re w  <=>  j + 1 = (1/Re w + mu) / (2b)
            j_star = (1.0 / w.real + self.mu) / (2.0 * self.cfg.b) - 1.0
            if j_star > 0:
                base = int(j_star)
                candidates.update(
                    max(0, base + k) for k in (-1, 0, 1, 2)
                )
        for j in candidates:
            best = min(best, abs(w - self.level_image(j)))
        return best

    def dist_to_halfline_image(self, w: complex) -> float:
        """Distance to the closed segment [0, 1/(level_0 - mu)]."""
        return _dist_point_to_real_segment(complex(w), 0.0, self.segment_end)

    def in_near_ladder_region(self, lam: complex) -> bool:
        """True when lam lies in the union of balls B(level_j, 2 * gap_radius)."""
        return dist_to_levels(self.cfg, lam) < 2.0 * self.gap_radius

    def image_sector(self, lam: complex) -> str:
        """Which of the four source sectors lam falls into, by image shape.

        The map carries {Re lam < mu} onto the left half-plane, the disk
        over [mu, level_0] onto {Re z >= 1/(level_0 - mu)}, the rest of the
        strip {mu <= Re lam <= level_0} onto the remaining right half-plane,
        and {Re lam >= level_0} onto the disk of radius 1/(2(level_0 - mu))
        tangent to the origin.
        """
        lam = complex(lam)
        lam0 = landau_level(self.cfg, 0)
        if lam.real < self.mu:
            return "left-halfplane"
        if abs(lam - 0.5 * (self.mu + lam0)) <= 0.5 * (lam0 - self.mu):
            return "anchor-disk"
        if lam.real <= lam0:
            return "strip"
        return "right-halfplane"


@dataclass(frozen=True)
class DistortionSample:
    """Both sides of the level-set and half-line distortion bounds at one point."""

    lam: complex
    mu: float
    lhs_levels: float
    rhs_levels_core: float
    lhs_halfline: float
    rhs_halfline_core: float


def distortion_probe(lam: complex, cfg: MagneticConfig, v_inf: float) -> DistortionSample:
    """Distances before/after the inverse-shift map at one sample point.

    lhs_levels   = dist(z, images of the level set), z = 1/(lam - mu),
    rhs_levels_core = dist(lam, levels) / ((1+v_inf)^2 (1+|lam|)^2),
    and the same pair for the essential half-line.  Callers fit the
    comparability constant lhs >= c * rhs_core over grids.
    """
    lam = complex(lam)
    mu = mu_of_potential(v_inf)
    geo = MobiusData(cfg=cfg, mu=mu)
    w = mobius_map(lam, mu)
    denom = (1.0 + v_inf) ** 2 * (1.0 + abs(lam)) ** 2
    return DistortionSample(
        lam=lam,
        mu=mu,
        lhs_levels=geo.dist_to_level_images(w),
        rhs_levels_core=dist_to_levels(cfg, lam) / denom,
        lhs_halfline=geo.dist_to_halfline_image(w),
        rhs_halfline_core=dist_to_essential(cfg, lam) / denom,
    )


@dataclass(frozen=True)
class RegionCheck:
    """Near-ladder / far classification with the matching literal bounds."""

    lam: complex
    region: str  # "A" near the ladder, "D" away from it
    dist_levels: float
    dist_halfline: float
    two_sided_ok: Optional[bool]  # on D: dist_E/2 <= dist_I <= dist_E
    mapped_lhs: Optional[float]  # on A: dist of images
    mapped_rhs_core: Optional[float]


def region_split_check(
    lam: complex, cfg: MagneticConfig, v_inf: float = 0.0
) -> RegionCheck:
    """Classify lam against the 4b-balls around the levels and check bounds.

    Away from the ladder (region D) the half-line distance pinches the level
    distance two-sidedly: dist_E / 2 <= dist_I <= dist_E, checked literally.
    Inside the balls (region A) the mapped-distance pair is returned for
    constant fitting.
    """
    lam = complex(lam)
    d_e = dist_to_levels(cfg, lam)
    d_i = dist_to_essential(cfg, lam)
    if d_e < 4.0 * cfg.b:
        mu = mu_of_potential(v_inf)
        geo = MobiusData(cfg=cfg, mu=mu)
        w = mobius_map(lam, mu)
        denom = (1.0 + v_inf) ** 2 * (1.0 + abs(lam)) ** 2
        return RegionCheck(
            lam=lam,
            region="A",
            dist_levels=d_e,
            dist_halfline=d_i,
            two_sided_ok=None,
            mapped_lhs=geo.dist_to_level_images(w),
            mapped_rhs_core=d_e / denom,
        )
    ok = (0.5 * d_e <= d_i * (1.0 + 1e-12)) and (d_i <= d_e * (1.0 + 1e-12))
    return RegionCheck(
        lam=lam,
        region="D",
        dist_levels=d_e,
        dist_halfline=d_i,
        two_sided_ok=bool(ok),
        mapped_lhs=None,
        mapped_rhs_core=None,
    )


# ---------------------------------------------------------------------------
# disk-to-rectangle map
# ---------------------------------------------------------------------------


def _midline_integrals(theta: float, n: int = 120) -> tuple[float, float]:
    """Half-width and half-height integrals of the normalized map.

    A = int_0^1 dt / sqrt(t^4 - 2 cos(2 theta) t^2 + 1)   (real diameter)
    B = int_0^1 ds / sqrt(s^4 + 2 cos(2 theta) s^2 + 1)   (imaginary diameter)
    Both integrands are smooth on [0, 1] for theta in (0, pi/2).
    """
    x, w = roots_legendre(n)
    t = 0.5 * (x + 1.0)
    c2 = math.cos(2.0 * theta)
    A = 0.5 * np.sum(w / np.sqrt(t**4 - 2.0 * c2 * t**2 + 1.0))
    B = 0.5 * np.sum(w / np.sqrt(t**4 + 2.0 * c2 * t**2 + 1.0))
    return float(A), float(B)


@dataclass(frozen=True)
class SCMap:
    """Conformal map from the unit disk onto an axis-aligned rectangle.

    Prevertices sit symmetrically at exp(+-i theta) and exp(i(pi -+ theta)),
    so the derivative C / prod (1 - z/z_k)^(1/2) (per-factor principal
    branches, all continuous on the disk) is real and positive at 0, the
    real diameter maps onto the horizontal midline, and the map commutes
    with conjugation.  phi(0) is the rectangle center.
    """

    rect: ComplexRectangle
    theta: float
    multiplier: float

    @property
    def prevertices(self) -> tuple[complex, complex, complex, complex]:
        """(bottom-left, bottom-right, top-right, top-left) preimages."""
        th = self.theta
        return (
            cmath.exp(1j * (-math.pi + th)),  # maps to bottom-left corner
            cmath.exp(-1j * th),  # bottom-right
            cmath.exp(1j * th),  # top-right
            cmath.exp(1j * (math.pi - th)),  # top-left
        )

    def deriv(self, z):
        """Derivative at z (scalar or array); per-factor principal branches
        stay continuous because Re(1 - z/zk) >= 0 inside the disk."""
        z = np.asarray(z, dtype=complex)
        prod = np.ones_like(z)
        for zk in self.prevertices:
            prod = prod * np.sqrt(1.0 - z / zk)
        out = self.multiplier / prod
        return complex(out) if out.ndim == 0 else out

    def _integrate(self, z0: complex, z1: complex, n: int = 48) -> complex:
        """Path integral of the derivative along the straight segment [z0, z1].

        Doubles the panel count until two successive values agree to 1e-13
        of scale.
        """
        x, w = roots_legendre(n)
        prev = None
        panels = 1
        for _ in range(9):
            ks = np.arange(panels)
            mids = z0 + (z1 - z0) * (ks + 0.5) / panels
            half = 0.5 * (z1 - z0) / panels
            zs = (mids[:, np.newaxis] + half * x[np.newaxis, :]).ravel()
            vals = self.deriv(zs).reshape(panels, n)
            total = half * np.sum(vals @ w)
            if prev is not None and abs(total - prev) <= 1e-13 * max(
                1.0, abs(total)
            ):
                return total
            prev = total
            panels *= 2
        return total

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        if abs(z) >= 1.0:
            raise ValueError(f"|z| = {abs(z):.6f} must be < 1")
        return self.rect.center + self._integrate(0.0 + 0.0j, z)

    def vertex_image(self, k: int) -> complex:
        """phi at prevertex k (0=BL, 1=BR, 2=TR, 3=TL) via weighted quadrature.

        The integrand along the radius to z_k carries a (1-t)^(-1/2) factor
        at the endpoint, absorbed into a Gauss-Jacobi rule.
        """
        zk = self.prevertices[k]
        x, w = roots_jacobi(80, -0.5, 0.0)
        t = 0.5 * (x + 1.0)
        vals = np.ones(t.size, dtype=complex)
        for m, zm in enumerate(self.prevertices):
            if zm == zk:
                continue
            vals /= np.sqrt(1.0 - t * (zk / zm))
        integral = (1.0 / math.sqrt(2.0)) * np.sum(w * vals)
        return self.rect.center + self.multiplier * zk * integral

    def invert(self, lam: complex, tol: float = 1e-13) -> complex:
        """Interior inverse by damped Newton iteration from the center."""
        z = 0.0 + 0.0j
        target = complex(lam)
        for _ in range(200):
            err = self(z) - target
            if abs(err) <= tol * max(1.0, abs(target)):
                return z
            step = -err / self.deriv(z)
            z_new = z + step
            while abs(z_new) >= 1.0 - 1e-12:
                step *= 0.5
                z_new = z + step
                if abs(step) < 1e-300:
                    raise RuntimeError("inverse iteration trapped at the boundary")
            z = z_new
        raise RuntimeError(f"inverse iteration did not converge for {lam}")

    def invert_bottom_edge(self, x_target: float, tol: float = 1e-12) -> complex:
        """Preimage on the unit circle of a point on the open bottom edge."""
        if not (self.rect.re_min < x_target < self.rect.re_max):
            raise ValueError("point must lie strictly inside the bottom edge")
        th = self.theta
        lo, hi = -math.pi + th + 1e-9, -th - 1e-9

        def bottom_real(psi: float) -> float:
            # integrate along the radius to the arc point; smooth away from
            # prevertices
            z = cmath.exp(1j * psi)
            val = self.rect.center + self._integrate(0.0 + 0.0j, 0.999999 * z)
            # final sliver approximated linearly; edge correspondence is
            # monotone so bisection tolerates the tiny bias
            return val.real

        flo, fhi = bottom_real(lo), bottom_real(hi)
        if not (min(flo, fhi) <= x_target <= max(flo, fhi)):
            raise ValueError("target outside the resolvable bottom-edge range")
        increasing = fhi > flo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = bottom_real(mid)
            if abs(fm - x_target) <= tol * max(1.0, abs(x_target)):
                return cmath.exp(1j * mid)
            if (fm < x_target) == increasing:
                lo = mid
            else:
                hi = mid
        return cmath.exp(1j * 0.5 * (lo + hi))

    def anchored(self, lam0: complex, bottom_point: float) -> "AnchoredSCMap":
        """Compose with the disk automorphism sending 0 -> preimage(lam0)
        and 1 -> preimage(bottom_point on the bottom edge)."""
        w0 = self.invert(lam0)
        w1 = self.invert_bottom_edge(bottom_point)
        return AnchoredSCMap(base=self, auto=DiskAutomorphism.sending(w0, w1))


@dataclass(frozen=True)
class DiskAutomorphism:
    """m(z) = u (z - a) / (1 - conj(a) z) with |u| = 1, |a| < 1."""

    u: complex
    a: complex

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        return self.u * (z - self.a) / (1.0 - self.a.conjugate() * z)

    def deriv(self, z: complex) -> complex:
        z = complex(z)
        d = 1.0 - self.a.conjugate() * z
        return self.u * (1.0 - abs(self.a) ** 2) / (d * d)

    def inverse(self, w: complex) -> complex:
        w = complex(w) / self.u
        return (w + self.a) / (1.0 + self.a.conjugate() * w)

    @staticmethod
    def sending(w0: complex, w1: complex) -> "DiskAutomorphism":
        """The unique automorphism with m(0) = w0 and m(1) = w1 (|w1| = 1)."""
        w0, w1 = complex(w0), complex(w1)
        if abs(w0) >= 1.0:
            raise ValueError("w0 must be inside the open disk")
        if abs(abs(w1) - 1.0) > 1e-9:
            raise ValueError("w1 must sit on the unit circle")
        u = (w1 - w0) / (1.0 - w0.conjugate() * w1)
        a = -w0 * u.conjugate()
        return DiskAutomorphism(u=u, a=a)


@dataclass(frozen=True)
class AnchoredSCMap:
    """Disk-to-rectangle map with re-normalized interior/boundary anchors."""

    base: SCMap
    auto: DiskAutomorphism

    def __call__(self, z: complex) -> complex:
        return self.base(self.auto(z))

    def deriv(self, z: complex) -> complex:
        w = self.auto(z)
        return self.base.deriv(w) * self.auto.deriv(z)


def sc_solve(rect: ComplexRectangle, tol: float = 1e-12) -> SCMap:
    """Prevertex angle and multiplier for the rectangle, by bisection.

    The aspect ratio width/height equals the ratio of the two midline
    integrals; it decreases continuously from +inf to 0 as the prevertex
    angle sweeps (0, pi/2), so bisection is safe.  The multiplier then
    scales the normalized half-width onto the target.
    """
    aspect = rect.width / rect.height
    if not (aspect > 0 and math.isfinite(aspect)):
        raise ValueError("degenerate rectangle")
    lo, hi = 1e-12, 0.5 * math.pi - 1e-12

    def resid(theta: float) -> float:
        A, B = _midline_integrals(theta)
        return A / B - aspect

    flo, fhi = resid(lo), resid(hi)
    if not (flo > 0 > fhi):
        raise RuntimeError("aspect-ratio bisection failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = resid(mid)
        if abs(fm) <= tol * max(1.0, aspect):
            break
        if fm > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    theta = 0.5 * (lo + hi)
    A, _ = _midline_integrals(theta)
    C = (0.5 * rect.width) / A
    return SCMap(rect=rect, theta=theta, multiplier=C)


def sc_eval(scmap: SCMap, z: complex) -> tuple[complex, complex]:
    """(phi(z), phi'(z)) for z strictly inside the disk."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError(f"|z| = {abs(z):.6f} must be < 1")
    return scmap(z), scmap.deriv(z)


def _dist_to_arc(z: complex, psi_lo: float, psi_hi: float) -> float:
    """Distance from z to the circular arc exp(i psi), psi in [psi_lo, psi_hi]."""
    ang = cmath.phase(z) if z != 0 else psi_lo
    # normalize relative to the arc span
    span = psi_hi - psi_lo
    rel = (ang - psi_lo) % (2.0 * math.pi)
    if rel <= span:
        return abs(1.0 - abs(z))
    return min(abs(z - cmath.exp(1j * psi_lo)), abs(z - cmath.exp(1j * psi_hi)))


@dataclass(frozen=True)
class ComparabilityResult:
    """Extremes of the distance-comparability ratios over a sample set."""

    min_ratio: float
    max_ratio: float
    edge_min_ratio: float
    edge_max_ratio: float


def comparability_probe(
    scmap: SCMap, samples: Sequence[complex]
) -> ComparabilityResult:
    """Ratios dist(z, circle)/sqrt(dist(z, prevertices)) vs dist(phi(z), boundary).

    For each sample the full-boundary ratio and the bottom-edge variant
    (arc distance over the flanking-prevertex distance root, against the
    image's distance to the bottom edge) are accumulated; the extremes come
    back for constant fitting.  Samples must satisfy |z| <= 0.98.
    """
    samples = [complex(z) for z in samples]
    if not samples:
        raise ValueError("sample list must be nonempty")
    if any(abs(z) > 0.98 for z in samples):
        raise ValueError("comparability samples must satisfy |z| <= 0.98")
    rect = scmap.rect
    pv = scmap.prevertices
    th = scmap.theta
    ratios = []
    edge_ratios = []
    for z in samples:
        lam = scmap(z)
        d_t = 1.0 - abs(z)
        d_f = min(abs(z - zk) for zk in pv)
        d_edge = rect.boundary_distance(lam)
        if d_edge <= 0 or d_f == 0:
            continue
        ratios.append((d_t / math.sqrt(d_f)) / d_edge)
        d_arc = _dist_to_arc(z, -math.pi + th, -th)
        d_fl = min(abs(z - pv[0]), abs(z - pv[1]))
        d_bottom = math.hypot(
            max(rect.re_min - lam.real, 0.0, lam.real - rect.re_max),
            lam.imag - rect.im_min,
        )
        if d_bottom > 0 and d_fl > 0:
            edge_ratios.append((d_arc / math.sqrt(d_fl)) / d_bottom)
    if not ratios:
        raise ValueError("no usable samples (all degenerate)")
    return ComparabilityResult(
        min_ratio=float(min(ratios)),
        max_ratio=float(max(ratios)),
        edge_min_ratio=float(min(edge_ratios)) if edge_ratios else math.nan,
        edge_max_ratio=float(max(edge_ratios)) if edge_ratios else math.nan,
    )


def _dist_to_numerical_range_strip(lam: complex, v_inf: float) -> float:
    """Distance to {Re >= -v_inf, |Im| <= v_inf}, the strip holding the spectrum."""
    dx = max(-v_inf - lam.real, 0.0)
    dy = max(abs(lam.imag) - v_inf, 0.0)
    return math.hypot(dx, dy)


def choose_lambda0(
    rect: ComplexRectangle, v_inf: float, margin: float = 0.5
) -> complex:
    """Interior anchor point clearing the spectrum strip by 1 + v_inf.

    Picks the horizontal center at height max(im_min + margin,
    1 + 2 v_inf + margin) (mirrored for rectangles below the axis), then
    re-validates both conditions min(|Im|, dist to strip) >= 1 + v_inf
    against the strip over-approximation of the numerical range.  Errors
    when the rectangle is too short: im extent must reach
    2 (1 + v_inf) + margin.
    """
    if v_inf < 0:
        raise ValueError("sup norm must be nonnegative")
    lower_half = rect.im_max <= 0
    top = -rect.im_min if lower_half else rect.im_max
    bottom = -rect.im_max if lower_half else rect.im_min
    if top < 2.0 * (1.0 + v_inf) + margin:
        raise RectangleTooShortError(
            f"rectangle height reaches {top:g} < 2(1+v_inf)+margin = "
            f"{2.0 * (1.0 + v_inf) + margin:g}"
        )
    im = max(bottom + margin, 1.0 + 2.0 * v_inf + margin)
    im = min(im, top - 1e-9 * max(1.0, top))
    if lower_half:
        im = -im
    lam0 = complex(0.5 * (rect.re_min + rect.re_max), im)
    ok = (
        min(abs(lam0.imag), _dist_to_numerical_range_strip(lam0, v_inf))
        >= 1.0 + v_inf - 1e-12
    )
    if not ok or not rect.contains(lam0):
        raise RectangleTooShortError(
            f"candidate {lam0} fails the clearance conditions for v_inf={v_inf}"
        )
    return lam0

"""Zero counting and localization for holomorphic functions on rectangles,
plus the weighted zero-sum functional on the unit disk.

The workhorse is boundary phase tracking: a function is traced along the
rectangle boundary, segments are bisected until every phase increment is
below pi/2 (and the log-modulus varies tamely), and the winding number is
the total accumulated phase over 2 pi.  Functions may be supplied either as
plain complex callables or in log form (log-modulus, argument), which keeps
determinant-like functions with huge dynamic range usable.  A
derivative-quadrature route is kept alongside for cross-checks.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BadNormalizationPointError,
    BoundaryZeroError,
    MaxDepthError,
    WindingDefectError,
)

__all__ = [
    "ComplexRectangle",
    "ZeroRecord",
    "LogFormFunction",
    "winding_count",
    "locate_zeros",
    "pullback_normalize",
    "bgk_sum",
]

_MAX_DEPTH = 40
_PHASE_STEP = 0.5 * math.pi
_LOGMOD_STEP = 0.5


@dataclass(frozen=True)
class ComplexRectangle:
    """Axis-aligned rectangle re_min < re_max, im_min < im_max.

    Corner labels follow the counterclockwise bottom-first convention:
    corner 1 = bottom-left, 4 = bottom-right, 3 = top-right, 2 = top-left,
    so edge 1 is the bottom (the side anchored to the real axis when the
    rectangle sits on it), edge 2 the right, edge 3 the top, edge 4 the left.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("rectangle must have positive width and height")

    @property
    def corners(self) -> tuple[complex, complex, complex, complex]:
        """(bottom-left, bottom-right, top-right, top-left)."""
        return (
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        )

    @property
    def center(self) -> complex:
        return complex(
            0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max)
        )

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    def dilated(self, factor: float) -> "ComplexRectangle":
        cx, cy = self.center.real, self.center.imag
        hw, hh = 0.5 * self.width * factor, 0.5 * self.height * factor
        return ComplexRectangle(cx - hw, cx + hw, cy - hh, cy + hh)

    def boundary_distance(self, z: complex) -> float:
        """Distance to the boundary (positive inside and outside)."""
        dx = max(self.re_min - z.real, 0.0, z.real - self.re_max)
        dy = max(self.im_min - z.imag, 0.0, z.imag - self.im_max)
        if dx > 0.0 or dy > 0.0:
            return math.hypot(dx, dy)
        return min(
            z.real - self.re_min,
            self.re_max - z.real,
            z.imag - self.im_min,
            self.im_max - z.imag,
        )


@dataclass(frozen=True)
class ZeroRecord:
    """One located zero: position, multiplicity, and |f| at the position."""

    location: complex
    multiplicity: int
    residual: float

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")


class LogFormFunction:
    """Function given by lam -> (log|f|, arg f); also callable as f(lam).

    The log form keeps phase-tracking usable when |f| overflows or
    underflows the double range.  A function may additionally provide its
    phase in two channels via ``split_eval``: a mod-2pi-ambiguous part (an
    ordinary argument) plus an exactly-evaluated part (e.g. the imaginary
    part of analytic trace corrections).  The exact channel never needs
    unwrapping, which removes the aliasing risk where it varies violently.
    """

    def __init__(
        self,
        log_eval: Optional[Callable[[complex], tuple[float, float]]] = None,
        split_eval: Optional[Callable[[complex], tuple[float, float, float]]] = None,
    ):
        if (log_eval is None) == (split_eval is None):
            raise ValueError("provide exactly one of log_eval / split_eval")
        self._plain = log_eval
        self._split = split_eval

    def log_eval(self, lam: complex) -> tuple[float, float]:
        if self._split is not None:
            lm, wp, ep = self._split(lam)
            return lm, wp + ep
        return self._plain(lam)

    def log_eval_split(self, lam: complex) -> tuple[float, float, float]:
        if self._split is not None:
            return self._split(lam)
        lm, ph = self._plain(lam)
        return lm, ph, 0.0

    def __call__(self, lam: complex) -> complex:
        lm, ph = self.log_eval(lam)
        if lm == -math.inf:
            return 0.0 + 0.0j
        return cmath.exp(complex(lm, ph))


def _as_split_eval(f) -> Callable[[complex], tuple[float, float, float]]:
    if hasattr(f, "log_eval_split"):
        return f.log_eval_split
    if hasattr(f, "log_eval"):
        le = f.log_eval

        def from_log(lam: complex) -> tuple[float, float, float]:
            lm, ph = le(lam)
            return lm, ph, 0.0

        return from_log

    def from_plain(lam: complex) -> tuple[float, float, float]:
        v = complex(f(lam))
        if v == 0:
            return -math.inf, 0.0, 0.0
        return math.log(abs(v)), cmath.phase(v), 0.0

    return from_plain


class _Tracer:
    """Caches split log-form evaluations keyed by the complex argument."""

    def __init__(self, f):
        self._split_eval = _as_split_eval(f)
        self.cache: dict[complex, tuple[float, float, float]] = {}
        self.n_evals = 0

    def __call__(self, lam: complex) -> tuple[float, float, float]:
        got = self.cache.get(lam)
        if got is None:
            got = self._split_eval(lam)
            self.cache[lam] = got
            self.n_evals += 1
        return got


def _wrap(phi: float) -> float:
    """Wrap a phase difference into (-pi, pi]."""
    return phi - 2.0 * math.pi * math.floor((phi + math.pi) / (2.0 * math.pi))


def _increment(sa: tuple[float, float, float], sb: tuple[float, float, float]) -> float:
    """Phase increment between samples: wrapped argument plus exact channel."""
    return _wrap(sb[1] - sa[1]) + (sb[2] - sa[2])


def _trace_segment(
    tr: _Tracer, a: complex, b: complex, min_seg: float
) -> list[tuple[complex, float, float, float]]:
    """Refine [a, b) until the phase steps along it are unambiguous.

    Acceptance needs the wrapped-channel step below pi/2, the log-modulus
    step below the tame bound, the exact-channel step below a full turn
    (for moment quality; exactness itself needs no bound), and one midpoint
    probe confirming that the wrapped increment equals the sum of the two
    half increments: a 2 pi slip between samples (possible when the phase
    gradient dwarfs the modulus gradient) shows up there as a +-2 pi
    mismatch and forces refinement.

    Returns samples [(z, logmod, wrapped-phase, exact-phase)], half open:
    includes a, excludes b.  Raises BoundaryZeroError if refinement bottoms
    out (a zero sits on or hugs the segment).
    """
    sa = tr(a)
    sb = tr(b)
    if sa[0] == -math.inf or sb[0] == -math.inf:
        raise BoundaryZeroError(f"exact zero on the contour near {a}")
    out: list[tuple[complex, float, float, float]] = []
    stack = [(a, sa, b, sb)]
    while stack:
        za, wa, zb, wb = stack.pop()
        if abs(zb - za) <= min_seg:
            raise BoundaryZeroError(
                f"cannot resolve the phase near {0.5 * (za + zb)}: "
                "zero on or hugging the contour"
            )
        zm = 0.5 * (za + zb)
        wm = tr(zm)
        if wm[0] == -math.inf:
            raise BoundaryZeroError(f"exact zero on the contour at {zm}")
        inc = _increment(wa, wb)
        halves = _increment(wa, wm) + _increment(wm, wb)
        if (
            abs(halves - inc) < math.pi
            and abs(_wrap(wb[1] - wa[1])) < _PHASE_STEP
            and abs(wb[2] - wa[2]) < 2.0 * math.pi
            and abs(wb[0] - wa[0]) < _LOGMOD_STEP
        ):
            out.append((za, wa[0], wa[1], wa[2]))
            out.append((zm, wm[0], wm[1], wm[2]))
            continue
        stack.append((zm, wm, zb, wb))
        stack.append((za, wa, zm, wm))
    return out


@dataclass
class _BoundaryTrace:
    points: np.ndarray  # closed polyline, last point == first point
    logmod: np.ndarray
    phase: np.ndarray  # unwrapped, continuous along the polyline

    @property
    def winding_real(self) -> float:
        return (self.phase[-1] - self.phase[0]) / (2.0 * math.pi)

    def first_moment(self) -> complex:
        """(1/2 pi i) * contour integral of z f'/f dz via parts.

        Uses the continuous boundary logarithm: equals W * z_0 minus the
        trapezoid value of (1/2 pi i) * integral of log f dz.
        """
        logf = self.logmod + 1j * self.phase
        dz = np.diff(self.points)
        integral = np.sum(0.5 * (logf[:-1] + logf[1:]) * dz)
        W = self.winding_real
        return self.points[0] * W - integral / (2j * math.pi)


def _trace_boundary(tr: _Tracer, rect: ComplexRectangle, n0: int = 8) -> _BoundaryTrace:
    corners = list(rect.corners)
    min_seg = max(1e-13 * rect.diameter, 5e-16 * max(1.0, abs(rect.center)))
    samples: list[tuple[complex, float, float, float]] = []
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        for t in range(n0):
            z0 = a + (b - a) * (t / n0)
            z1 = a + (b - a) * ((t + 1) / n0)
            samples.extend(_trace_segment(tr, z0, z1, min_seg))
    w0 = tr(corners[0])
    samples.append((corners[0], w0[0], w0[1], w0[2]))
    pts = np.array([s[0] for s in samples])
    lms = np.array([s[1] for s in samples])
    # continuous phase: wrapped-channel increments unwrapped, exact channel added
    wp = np.array([s[2] for s in samples])
    ep = np.array([s[3] for s in samples])
    incr = np.diff(wp)
    incr = incr - 2.0 * math.pi * np.floor((incr + math.pi) / (2.0 * math.pi))
    incr = incr + np.diff(ep)
    start = wp[0] + ep[0]
    phase = np.concatenate(([start], start + np.cumsum(incr)))
    return _BoundaryTrace(points=pts, logmod=lms, phase=phase)


def _winding_argument(tr: _Tracer, rect: ComplexRectangle, n0: int = 8) -> int:
    trace = _trace_boundary(tr, rect, n0=n0)
    w = trace.winding_real
    if abs(w - round(w)) > 0.1:
        raise WindingDefectError(
            f"winding {w:.4f} did not round cleanly on {rect}"
        )
    return int(round(w))


def _winding_derivative(f, rect: ComplexRectangle, n0: int = 64) -> int:
    """(1/2 pi i) contour integral of f'/f, f' by central differences."""
    h = 1e-6 * rect.diameter
    corners = list(rect.corners)
    n = n0
    for _ in range(8):
        total = 0.0 + 0.0j
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            ts = np.linspace(0.0, 1.0, n + 1)
            zs = a + (b - a) * ts
            fv = np.array([complex(f(z)) for z in zs])
            if np.any(fv == 0):
                raise BoundaryZeroError("exact zero on the contour")
            if np.min(np.abs(fv)) < 1e-13 * np.median(np.abs(fv)):
                raise BoundaryZeroError("zero detected on the contour (screening)")
            fp = np.array([(complex(f(z + h)) - complex(f(z - h))) / (2 * h) for z in zs])
            integrand = fp / fv
            total += np.trapezoid(integrand, zs)
        w = total / (2j * math.pi)
        if abs(w.real - round(w.real)) < 0.1 and abs(w.imag) < 0.1:
            return int(round(w.real))
        n *= 2
    raise WindingDefectError(f"derivative-route winding failed to settle on {rect}")


def winding_count(
    f,
    rect: ComplexRectangle,
    method: str = "argument",
    n0: int = 8,
) -> int:
    """Number of zeros (with multiplicity) of f inside the rectangle.

    ``method='argument'`` tracks the boundary phase with adaptive bisection
    (robust for determinant-like functions, works on log-form callables);
    ``method='derivative'`` integrates f'/f with finite-difference
    derivatives and checks the integer-rounding defect.
    """
    if method == "argument":
        return _winding_argument(_Tracer(f), rect, n0=n0)
    if method == "derivative":
        return _winding_derivative(f, rect, n0=max(n0, 32))
    raise ValueError(f"unknown winding method {method!r}")


def _polish_newton(
    tr: _Tracer, seed: complex, mult: int, tol: float, scale: float
) -> complex:
    """Refine a zero via the boundary-free logarithmic derivative.

    Works for multiple zeros too: the step is -mult / (log f)'.
    """
    z = seed
    h = max(1e-7 * scale, 1e-12)
    for _ in range(80):
        wp = tr(z + h)
        wm = tr(z - h)
        if wp[0] == -math.inf or wm[0] == -math.inf:
            break
        dlog = complex(wp[0] - wm[0], _increment(wm, wp)) / (2.0 * h)
        if dlog == 0:
            break
        step = -mult / dlog
        z_new = z + step
        if not (math.isfinite(z_new.real) and math.isfinite(z_new.imag)):
            break
        z = z_new
        if abs(step) < tol:
            break
        h = max(min(h, 0.1 * abs(step)), 1e-14 * max(1.0, abs(z)))
    return z


def locate_zeros(
    f,
    rect: ComplexRectangle,
    tol: Optional[float] = None,
    cluster_diameter: Optional[float] = None,
    max_depth: int = _MAX_DEPTH,
) -> list[ZeroRecord]:
    """All zeros of f inside the rectangle, with multiplicities.

    Adaptive quadrisection: each subrectangle keeps its winding count, cells
    are split until they hold a single zero cluster, then the cluster is
    polished (Newton steps on the logarithmic derivative, seeded by the
    contour first moment).  Split lines are jittered when a zero lands on
    them.  The multiplicities always add up to the top-level winding count.
    Clusters tighter than ``cluster_diameter`` (default 1e-9 * diameter) are
    reported unsplit with their total multiplicity.
    """
    tr = _Tracer(f)
    if tol is None:
        tol = 1e-10 * rect.diameter
    if cluster_diameter is None:
        cluster_diameter = max(1e-9 * rect.diameter, 4e-15 * max(1.0, abs(rect.center)))

    records: list[ZeroRecord] = []

    def recurse(r: ComplexRectangle, w: int, depth: int):
        if w == 0:
            return
        if w < 0:
            raise WindingDefectError(
                f"negative zero count {w} on {r}: the function has poles "
                "inside the scanned region"
            )
        if r.diameter <= cluster_diameter or depth >= max_depth:
            if depth >= max_depth and r.diameter > 1e3 * cluster_diameter:
                raise MaxDepthError(
                    f"subdivision exceeded depth {max_depth} on {r}"
                )
            finalize(r, w)
            return
        trace = _trace_boundary(tr, r, n0=4)
        moment = trace.first_moment()
        centroid = moment / w if w else r.center
        # single tight cluster? decide by polishing and re-counting a small box
        if w >= 1 and r.contains(centroid, pad=0.25 * r.diameter):
            z = _polish_newton(tr, centroid, w, 0.25 * tol, r.diameter)
            boxr = max(4.0 * tol, cluster_diameter)
            if r.contains(z) and r.boundary_distance(z) > 2 * boxr:
                try:
                    box = ComplexRectangle(
                        z.real - boxr, z.real + boxr, z.imag - boxr, z.imag + boxr
                    )
                    if _winding_argument(tr, box, n0=4) == w:
                        finalize_point(z, w)
                        return
                except (BoundaryZeroError, WindingDefectError):
                    pass
        split_and_recurse(r, w, depth)

    def split_and_recurse(r: ComplexRectangle, w: int, depth: int):
        for shift in (0.5, 0.53, 0.47, 0.515, 0.485, 0.56):
            xm = r.re_min + shift * r.width
            ym = r.im_min + shift * r.height
            quads = [
                ComplexRectangle(r.re_min, xm, r.im_min, ym),
                ComplexRectangle(xm, r.re_max, r.im_min, ym),
                ComplexRectangle(r.re_min, xm, ym, r.im_max),
                ComplexRectangle(xm, r.re_max, ym, r.im_max),
            ]
            try:
                ws = [_winding_argument(tr, q, n0=2) for q in quads]
            except (BoundaryZeroError, WindingDefectError):
                continue
            if sum(ws) != w:
                continue  # aliasing across a split line: jitter and retry
            for q, wq in zip(quads, ws):
                recurse(q, wq, depth + 1)
            return
        raise BoundaryZeroError(
            f"could not find a zero-free split of {r} after jittering"
        )

    def finalize(r: ComplexRectangle, w: int):
        trace = _trace_boundary(tr, r, n0=4)
        centroid = trace.first_moment() / w
        z = _polish_newton(tr, centroid, w, 0.25 * tol, max(r.diameter, tol))
        if not r.contains(z, pad=2.0 * r.diameter):
            z = centroid
        finalize_point(z, w)

    def finalize_point(z: complex, w: int):
        lm = tr(z)[0]
        residual = 0.0 if lm == -math.inf else math.exp(min(lm, 700.0))
        records.append(ZeroRecord(location=z, multiplicity=w, residual=residual))

    total = _winding_argument(tr, rect, n0=8)
    recurse(rect, total, 0)
    found = sum(rec.multiplicity for rec in records)
    if found != total:
        raise WindingDefectError(
            f"located multiplicities {found} != boundary count {total}"
        )
    return sorted(records, key=lambda rec: (rec.location.real, rec.location.imag))


def pullback_normalize(f, phi, z0: complex = 0.0 + 0.0j):
    """h(z) = f(phi(z)) / f(phi(z0)), normalized so h(z0) = 1 exactly.

    ``phi`` maps the unit disk into the domain of f (a conformal map object
    with __call__, or any callable).
    """
    base = complex(f(phi(z0)))
    if base == 0 or not (math.isfinite(base.real) and math.isfinite(base.imag)):
        raise BadNormalizationPointError(
            f"f(phi({z0})) = {base}; cannot normalize there"
        )

    def h(z: complex) -> complex:
        if z == z0:
            return 1.0 + 0.0j
        return complex(f(phi(z))) / base

    return h


def bgk_sum(
    zeros: Sequence[complex],
    alpha: float,
    boundary_pts: Sequence[tuple[complex, float]] = (),
    tau: float = 0.5,
) -> float:
    """Weighted zero sum on the unit disk.

    For zeros z_k strictly inside the disk, boundary points (xi_j, beta_j)
    on the circle, and tau > 0:

        sum_k (1 - |z_k|)^(alpha + 1 + tau) * prod_j |z_k - xi_j|^(max(beta_j - 1 + tau, 0))

    An empty zero list sums to 0.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    for xi, beta in boundary_pts:
        if abs(abs(complex(xi)) - 1.0) > 1e-12:
            raise ValueError(f"boundary point {xi} is not on the unit circle")
        if beta < 0:
            raise ValueError("boundary exponents must be nonnegative")
    total = 0.0
    comp = 0.0
    for z in zeros:
        z = complex(z)
        if abs(z) >= 1.0:
            raise ValueError(f"zero {z} lies outside the open unit disk")
        term = (1.0 - abs(z)) ** (alpha + 1.0 + tau)
        for xi, beta in boundary_pts:
            expo = max(beta - 1.0 + tau, 0.0)
            term *= abs(z - complex(xi)) ** expo
        # compensated accumulation: terms span many magnitudes
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total

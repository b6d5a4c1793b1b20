"""End-to-end discrete-spectrum computation for the perturbed operator.

Two independent routes to the same spectrum: dense eigensolve of the
truncated operator (with nested-cutoff convergence filtering), and zero
localization of the regularized characteristic function built from the
potential-times-resolvent product.  The cross-check matches the two within
a tolerance, multiplicities included.

The finite-section characteristic function is meromorphic at the truncated
free levels (the infinite-dimensional one never sees them because they are
essential spectrum there), so scan rectangles containing a level are split
into bands around a small exclusion square; only the scanned bands
participate in matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import PoleError
from .landau import BasisSpec, MagneticConfig, dist_to_essential, dist_to_levels, nearest_level_index, landau_level
from .operators import TruncatedOperator, level_diagonal, potential_matrix
from .potentials import Potential, SyntheticDiagonal
from .schatten import _reg_det_split
from .zeros import ComplexRectangle, LogFormFunction, ZeroRecord, locate_zeros

__all__ = [
    "EigRecord",
    "CrosscheckReport",
    "galerkin_eigs",
    "converged_filter",
    "det_crosscheck",
    "classify",
    "determinant_function",
    "auto_rectangles",
    "split_rect_around_levels",
    "default_det_order",
]


@dataclass(frozen=True)
class EigRecord:
    """One discrete eigenvalue with its classification payload."""

    value: complex
    multiplicity: int
    dist_E: Optional[float] = None
    dist_ess: Optional[float] = None
    nearest_level: Optional[int] = None
    converged: bool = True
    method: str = "galerkin"

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if (
            self.dist_E is not None
            and self.dist_ess is not None
            and self.dist_ess > self.dist_E + 1e-12
        ):
            raise ValueError("distance to the half-line cannot exceed distance to levels")


def default_det_order(d: int) -> int:
    """Default regularization order when no Schatten exponent is given.

    The smallest even integer covering the admissible-exponent threshold:
    4 for the planar case, growing with the half-dimension.
    """
    return 2 * ((d + 1) // 2) + 2


def _cluster_points(
    values: np.ndarray, tol: float
) -> list[tuple[complex, int]]:
    """Single-linkage clustering; returns (mean, count) per cluster.

    Ties break toward merging: any chain of gaps <= tol joins.
    """
    if values.size == 0:
        return []
    order = np.lexsort((values.imag, values.real))
    vals = values[order]
    parent = list(range(vals.size))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for i in range(vals.size):
        for j in range(i + 1, vals.size):
            if vals[j].real - vals[i].real > tol:
                break
            if abs(vals[j] - vals[i]) <= tol:
                union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(vals.size):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        pts = vals[members]
        out.append((complex(np.mean(pts)), len(members)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def galerkin_eigs(
    Hmat: TruncatedOperator, cluster_tol: Optional[float] = None
) -> list[EigRecord]:
    """All eigenvalues of the truncated operator, clustered into multiplicity
    groups at 1e-8 times the operator norm (single linkage, merge-biased)."""
    M = Hmat.matrix
    vals = np.linalg.eigvals(M)
    if cluster_tol is None:
        cluster_tol = 1e-8 * max(1.0, float(np.linalg.norm(M, 2)))
    return [
        EigRecord(value=v, multiplicity=k)
        for v, k in _cluster_points(vals, cluster_tol)
    ]


def converged_filter(
    coarse: Sequence[EigRecord],
    fine: Sequence[EigRecord],
    tol_conv: float = 1e-6,
) -> list[EigRecord]:
    """Flag coarse-cutoff eigenvalues by their movement to the finer cutoff.

    A record is converged when some fine-cutoff eigenvalue lies within
    tol_conv * (1 + |value|); everything else is flagged and later excluded
    from eigenvalue-sum functionals.
    """
    if not coarse:
        return []
    fine_vals = np.array([r.value for r in fine], dtype=complex)
    out = []
    for rec in coarse:
        if fine_vals.size:
            move = float(np.min(np.abs(fine_vals - rec.value)))
        else:
            move = math.inf
        ok = move < tol_conv * (1.0 + abs(rec.value))
        out.append(replace(rec, converged=bool(ok)))
    return out


def classify(
    records: Sequence[EigRecord],
    cfg: MagneticConfig,
    v_inf: float,
    strip_slack: float = 0.0,
) -> tuple[list[EigRecord], list[EigRecord]]:
    """Fill the distance fields and flag numerical-range-strip violations.

    The spectrum of the perturbed operator lies in the strip
    {Re >= -v_inf, |Im| <= v_inf} up to truncation slack; converged records
    escaping it by more than 1e-8 + strip_slack come back as anomalies.
    """
    tol = 1e-8 + strip_slack
    enriched = []
    anomalies = []
    for rec in records:
        lam = rec.value
        newrec = replace(
            rec,
            dist_E=dist_to_levels(cfg, lam),
            dist_ess=dist_to_essential(cfg, lam),
            nearest_level=nearest_level_index(cfg, lam),
        )
        enriched.append(newrec)
        if newrec.converged and (
            lam.real < -v_inf - tol or abs(lam.imag) > v_inf + tol
        ):
            anomalies.append(newrec)
    return enriched, anomalies


# ---------------------------------------------------------------------------
# determinant route
# ---------------------------------------------------------------------------


def _block_partition(
    vm: np.ndarray, basis: BasisSpec, tol: float = 1e-12
) -> Optional[list[np.ndarray]]:
    """Index groups making the potential matrix block-diagonal by angular index.

    Radial potentials vanish across different angular indices; detecting
    that turns each determinant evaluation into a handful of small blocks.
    Returns None when off-block entries are not negligible.
    """
    mm = basis.m_max + 1
    scale = max(1.0, float(np.max(np.abs(vm))))
    idx = [np.arange(basis.j_max + 1) * mm + m for m in range(mm)]
    mask = np.zeros_like(vm, dtype=bool)
    for ix in idx:
        mask[np.ix_(ix, ix)] = True
    off = vm[~mask]
    if off.size and float(np.max(np.abs(off))) > tol * scale:
        return None
    return idx


def determinant_function(
    V: Union[Potential, SyntheticDiagonal],
    basis: BasisSpec,
    cfg: MagneticConfig,
    q: Optional[int] = None,
    vmat: Optional[TruncatedOperator] = None,
) -> LogFormFunction:
    """The regularized characteristic function lam -> det_q(I + V R0(lam)).

    Returned in log form so scans survive the enormous dynamic range near
    the truncated levels.  The evaluation assembles the potential matrix
    once; each call costs one small eigensolve per angular block (or one
    dense eigensolve when the potential couples angular indices).
    """
    if q is None:
        q = default_det_order(cfg.d)
    if vmat is None:
        vmat = potential_matrix(V, basis, cfg)
    vm = vmat.matrix
    levels = level_diagonal(basis, cfg)
    blocks = _block_partition(vm, basis)
    if blocks is None:
        blocks = [np.arange(basis.dim)]
    # angular blocks share a shape, so they stack into one batched eigensolve
    vstack = np.stack([vm[np.ix_(ix, ix)] for ix in blocks])
    lstack = np.stack([levels[ix] for ix in blocks])

    def split_eval(lam: complex) -> tuple[float, float, float]:
        lam = complex(lam)
        gap = float(np.min(np.abs(levels - lam)))
        if gap <= 1e-14 * max(1.0, abs(lam)):
            raise PoleError(f"determinant evaluated on a truncated level: {lam}")
        M = vstack * (1.0 / (lstack - lam))[:, np.newaxis, :]
        mu = np.linalg.eigvals(M).ravel()
        return _reg_det_split(mu, int(q))

    return LogFormFunction(split_eval=split_eval)


def split_rect_around_levels(
    rect: ComplexRectangle,
    cfg: MagneticConfig,
    exclusion: float,
    boundary_tol: float = 1e-9,
) -> tuple[list[ComplexRectangle], list[ComplexRectangle]]:
    """Bands covering ``rect`` minus small squares around interior levels.

    Returns (scanned sub-rectangles, excluded squares).  Raises PoleError
    when a level sits on (or hugs) the rectangle boundary; callers must
    choose rectangles whose edges avoid the ladder.
    """
    j_hi = int(rect.re_max / (2.0 * cfg.b)) + 1
    inside = []
    for j in range(j_hi + 1):
        lv = landau_level(cfg, j)
        on_vert = (
            abs(lv - rect.re_min) < boundary_tol or abs(lv - rect.re_max) < boundary_tol
        ) and rect.im_min < boundary_tol and rect.im_max > -boundary_tol
        on_horiz = (
            min(abs(rect.im_min), abs(rect.im_max)) < boundary_tol
            and rect.re_min - boundary_tol <= lv <= rect.re_max + boundary_tol
        )
        if on_vert or on_horiz:
            raise PoleError(f"level {lv} lies on the boundary of {rect}")
        if rect.re_min < lv < rect.re_max and rect.im_min < 0.0 < rect.im_max:
            inside.append(lv)
    if not inside:
        return [rect], []
    inside.sort()
    e = exclusion
    scanned: list[ComplexRectangle] = []
    excluded: list[ComplexRectangle] = []
    # vertical strips between consecutive exclusion columns
    cuts = [rect.re_min]
    for lv in inside:
        if lv - e - cuts[-1] > boundary_tol:
            scanned.append(
                ComplexRectangle(cuts[-1], lv - e, rect.im_min, rect.im_max)
            )
        cuts.append(lv + e)
    if rect.re_max - cuts[-1] > boundary_tol:
        scanned.append(
            ComplexRectangle(cuts[-1], rect.re_max, rect.im_min, rect.im_max)
        )
    for lv in inside:
        lo = max(rect.im_min, -e)
        hi = min(rect.im_max, e)
        excluded.append(ComplexRectangle(lv - e, lv + e, lo, hi))
        if rect.im_max - e > boundary_tol:
            scanned.append(ComplexRectangle(lv - e, lv + e, e, rect.im_max))
        if -e - rect.im_min > boundary_tol:
            scanned.append(ComplexRectangle(lv - e, lv + e, rect.im_min, -e))
    return scanned, excluded


def auto_rectangles(
    cfg: MagneticConfig,
    j_range: Sequence[int],
    v_inf: float,
    delta: Optional[float] = None,
    height: Optional[float] = None,
    mirror: bool = False,
    underhang: float = 0.1,
) -> list[ComplexRectangle]:
    """Level-centered scan rectangles: width 2b - 2 delta, delta = b/2.

    Height defaults to 2 v_inf + 0.5.  Upper-half rectangles dip below the
    axis by ``underhang`` times the height so the real axis never coincides
    with an edge; ``mirror`` adds the reflected rectangles.
    """
    if delta is None:
        delta = 0.5 * cfg.b
    if not (0.0 < delta < cfg.b):
        raise ValueError("delta must lie strictly between 0 and b")
    if height is None:
        height = 2.0 * v_inf + 0.5
    out = []
    for j in j_range:
        lv = landau_level(cfg, int(j))
        half_w = cfg.b - delta
        dip = underhang * height
        out.append(ComplexRectangle(lv - half_w, lv + half_w, -dip, height))
        if mirror:
            out.append(ComplexRectangle(lv - half_w, lv + half_w, -height, dip))
    return out


@dataclass(frozen=True)
class CrosscheckReport:
    """Outcome of matching determinant zeros against eigensolve records."""

    zeros: list[ZeroRecord]
    matched: list[tuple[ZeroRecord, EigRecord]]
    unmatched_zeros: list[ZeroRecord]
    unmatched_records: list[EigRecord]
    scanned: list[ComplexRectangle]
    excluded: list[ComplexRectangle]
    match_tol: float

    @property
    def all_matched(self) -> bool:
        return not self.unmatched_zeros and not self.unmatched_records


def _in_scanned(lam: complex, scanned: Sequence[ComplexRectangle], margin: float) -> bool:
    return any(
        r.re_min + margin < lam.real < r.re_max - margin
        and r.im_min + margin < lam.imag < r.im_max - margin
        for r in scanned
    )


def det_crosscheck(
    V: Union[Potential, SyntheticDiagonal],
    rects: Sequence[ComplexRectangle],
    basis: BasisSpec,
    cfg: MagneticConfig,
    p: float,
    galerkin: Optional[Sequence[EigRecord]] = None,
    vmat: Optional[TruncatedOperator] = None,
    match_tol: float = 1e-6,
    exclusion: Optional[float] = None,
) -> CrosscheckReport:
    """Locate determinant zeros in the rectangles and match them to the
    eigensolve.

    ``galerkin`` defaults to the (unfiltered-but-classified) eigensolve of
    the same truncation; pass pre-filtered records to restrict matching to
    the converged set.  Matching requires distance <= match_tol and equal
    multiplicity; near-coincident groups are compared by total multiplicity
    within match_tol-diameter clusters.
    """
    q = max(1, math.ceil(p))
    if exclusion is None:
        exclusion = 0.07 * cfg.b
    if vmat is None:
        vmat = potential_matrix(V, basis, cfg)
    f = determinant_function(V, basis, cfg, q=q, vmat=vmat)

    scanned_all: list[ComplexRectangle] = []
    excluded_all: list[ComplexRectangle] = []
    zero_records: list[ZeroRecord] = []
    for rect in rects:
        scanned, excluded = split_rect_around_levels(rect, cfg, exclusion)
        scanned_all.extend(scanned)
        excluded_all.extend(excluded)
        for sub in scanned:
            zero_records.extend(
                locate_zeros(f, sub, cluster_diameter=0.05 * match_tol)
            )

    if galerkin is None:
        from .operators import hamiltonian_matrix

        H = hamiltonian_matrix(V, basis, cfg, vmat=vmat)
        galerkin = galerkin_eigs(H)
    candidates = [
        r
        for r in galerkin
        if r.converged and _in_scanned(r.value, scanned_all, margin=1e-9)
    ]

    matched: list[tuple[ZeroRecord, EigRecord]] = []
    un_zeros = []
    un_recs = list(candidates)
    for z in zero_records:
        best = None
        best_d = match_tol
        for rec in un_recs:
            d = abs(rec.value - z.location)
            if d <= best_d and rec.multiplicity == z.multiplicity:
                best, best_d = rec, d
        if best is None:
            un_zeros.append(z)
        else:
            matched.append((z, best))
            un_recs.remove(best)

    # second pass: group-level comparison for near-coincident clusters
    if un_zeros and un_recs:
        still_z, still_r = [], []
        used_r = set()
        for z in un_zeros:
            group = [
                i
                for i, rec in enumerate(un_recs)
                if i not in used_r and abs(rec.value - z.location) <= match_tol
            ]
            gm = sum(un_recs[i].multiplicity for i in group)
            if group and gm == z.multiplicity:
                for i in group:
                    used_r.add(i)
                    matched.append((z, un_recs[i]))
            else:
                still_z.append(z)
        still_r = [rec for i, rec in enumerate(un_recs) if i not in used_r]
        un_zeros, un_recs = still_z, still_r

    return CrosscheckReport(
        zeros=zero_records,
        matched=matched,
        unmatched_zeros=un_zeros,
        unmatched_records=un_recs,
        scanned=scanned_all,
        excluded=excluded_all,
        match_tol=match_tol,
    )

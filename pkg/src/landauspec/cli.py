"""Command-line interface: configuration-driven runs with file artifacts.

Subcommands (each takes --config <path>, optional --out <dir>, --seed <n>):

  levels     free-ladder table
  spectrum   eigensolve + convergence filter + classification -> CSV + SVG
  detscan    determinant zero scan cross-checked against the eigensolve
  ltcheck    weighted eigenvalue-sum functionals (computed or supplied eigenvalues)
  conformal  disk-rectangle map solve + comparability/distortion probes
  bgk        seeded finite-product zero-sum experiment on the disk
  report     all of the above in dependency order

Exit codes: 0 success, 1 module error or failed assertion, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .conformal import (
    comparability_probe,
    distortion_probe,
    mu_of_potential,
    region_split_check,
    sc_solve,
)
from .errors import ConfigError, LandauSpecError
from .landau import landau_level
from .ltsums import (
    bound_constants,
    hansmann_check,
    lt_sum_2d,
    lt_sum_3d,
    mapped_chain_check,
    tail_sum,
)
from .operators import hamiltonian_matrix, potential_matrix
from .pipeline import (
    EigRecord,
    classify,
    converged_filter,
    det_crosscheck,
    galerkin_eigs,
)
from .potentials import Potential
from .report import emit_csv, emit_lt_csv, emit_svg, read_eig_csv
from .zeros import bgk_sum

_COMMANDS = ("levels", "spectrum", "detscan", "ltcheck", "conformal", "bgk", "report")


def _write_table(path: Path, header: Sequence[str], rows, rc: RunConfig) -> None:
    buf = io.StringIO()
    buf.write(f"# landauspec {__version__} config={rc.config_hash} seed={rc.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(
            [format(v, ".17g") if isinstance(v, float) else str(v) for v in row]
        )
    path.write_text(buf.getvalue(), encoding="utf-8")


def _compute_spectrum(rc: RunConfig) -> tuple[list[EigRecord], list[EigRecord], object]:
    """(classified records, anomalies, potential matrix) for the run."""
    vmat = potential_matrix(rc.potential, rc.basis, rc.cfg)
    H = hamiltonian_matrix(rc.potential, rc.basis, rc.cfg, vmat=vmat)
    coarse = galerkin_eigs(H)
    fine = galerkin_eigs(hamiltonian_matrix(rc.potential, rc.enlarged, rc.cfg))
    filtered = converged_filter(coarse, fine, tol_conv=rc.tol_conv)
    records, anomalies = classify(filtered, rc.cfg, rc.v_inf)
    return records, anomalies, vmat


def _cmd_levels(rc: RunConfig) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    rows = [(j, landau_level(rc.cfg, j)) for j in range(rc.basis.j_max + 1)]
    _write_table(rc.out_dir / "levels.csv", ("j", "energy"), rows, rc)
    print(f"levels: {len(rows)} entries, lowest {rows[0][1]:g}, gap {2 * rc.cfg.b:g}")
    return 0


def _cmd_spectrum(rc: RunConfig) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    records, anomalies, _ = _compute_spectrum(rc)
    emit_csv(records, rc.out_dir / "eigenvalues.csv", rc.config_hash, rc.seed)
    emit_svg(
        records,
        rc.cfg,
        rc.out_dir / "spectrum.svg",
        v_inf=rc.v_inf,
        rects=rc.scan_rectangles(),
        config_hash=rc.config_hash,
        seed=rc.seed,
        j_max_markers=rc.basis.j_max,
    )
    n_conv = sum(r.multiplicity for r in records if r.converged)
    n_all = sum(r.multiplicity for r in records)
    print(f"spectrum: {n_all} eigenvalues, {n_conv} converged")
    if anomalies:
        for a in anomalies:
            print(f"anomaly: {a.value} escapes the spectrum strip", file=sys.stderr)
        return 1
    return 0


def _cmd_detscan(rc: RunConfig) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    rects = rc.scan_rectangles()
    if not rects:
        print("detscan: no scan rectangles configured", file=sys.stderr)
        return 2
    records, anomalies, vmat = _compute_spectrum(rc)
    rep = det_crosscheck(
        rc.potential,
        rects,
        rc.basis,
        rc.cfg,
        p=rc.p,
        galerkin=records,
        vmat=vmat,
        exclusion=rc.scan_exclusion,
    )
    zero_records = [
        EigRecord(value=z.location, multiplicity=z.multiplicity, method="determinant")
        for z in rep.zeros
    ]
    zero_records, _ = classify(zero_records, rc.cfg, rc.v_inf)
    emit_csv(zero_records, rc.out_dir / "det_zeros.csv", rc.config_hash, rc.seed)
    rows = [
        (
            f"{z.location.real:.17g}",
            f"{z.location.imag:.17g}",
            z.multiplicity,
            f"{rec.value.real:.17g}",
            f"{rec.value.imag:.17g}",
            rec.multiplicity,
            abs(z.location - rec.value),
        )
        for z, rec in rep.matched
    ]
    _write_table(
        rc.out_dir / "crosscheck.csv",
        ("zero_re", "zero_im", "zero_mult", "eig_re", "eig_im", "eig_mult", "dist"),
        rows,
        rc,
    )
    print(
        f"detscan: {len(rep.zeros)} zero groups, {len(rep.matched)} matched, "
        f"{len(rep.unmatched_zeros)} unmatched zeros, "
        f"{len(rep.unmatched_records)} unmatched eigenvalues"
    )
    if not rep.all_matched:
        print("detscan: dual-route disagreement", file=sys.stderr)
        return 1
    return 0


def _cmd_ltcheck(rc: RunConfig, eigs_path: Optional[str] = None) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    if eigs_path:
        records = [r for r in read_eig_csv(eigs_path) if r.converged]
    else:
        records, _, _ = _compute_spectrum(rc)
        records = [r for r in records if r.converged]
    summary = []
    for kind in rc.lt_sums:
        if kind == "2d":
            rep = lt_sum_2d(records, rc.cfg, rc.p)
        elif kind == "3d":
            rep = lt_sum_3d(records, rc.cfg, rc.p, rc.eps, rc.gamma)
        elif kind == "tail2d":
            rep = tail_sum(records, rc.cfg, rc.p, rc.tau, variant="2d")
        else:
            rep = tail_sum(
                records, rc.cfg, rc.p, rc.tau, variant="3d", eps=rc.eps, gamma=rc.gamma
            )
        emit_lt_csv(rep, rc.out_dir / f"lt_{kind}.csv", rc.config_hash, rc.seed)
        summary.append((kind, rep.total))
    if isinstance(rc.potential, Potential) and rc.potential._lp_pow_p is not None:
        consts = bound_constants(
            rc.potential.envelope_lp_pow_p(rc.p),
            g_l2=1.0,
            g_linf=1.0,
            v_inf=rc.v_inf,
            p=rc.p,
            d=rc.cfg.d,
            eps=rc.eps,
        )
        _write_table(
            rc.out_dir / "lt_constants.csv",
            ("K", "K1", "K2", "K3"),
            [tuple(float(c) for c in consts)],
            rc,
        )
    for kind, total in summary:
        print(f"ltcheck[{kind}]: total = {total:.12e}")
    return 0


def _cmd_conformal(rc: RunConfig) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(rc.seed)
    rects = rc.scan_rectangles()[:2]
    if not rects:
        print("conformal: no rectangles configured", file=sys.stderr)
        return 2
    rows = []
    for rect in rects:
        scmap = sc_solve(rect)
        n = min(rc.probe_samples, 20000)
        zs = []
        while len(zs) < n:
            cand = rng.uniform(-0.98, 0.98, size=(2 * n, 2))
            pts = cand[:, 0] + 1j * cand[:, 1]
            pts = pts[np.abs(pts) <= 0.98]
            zs.extend(pts.tolist())
        res = comparability_probe(scmap, zs[:n])
        verts = [scmap.vertex_image(k) for k in range(4)]
        vert_err = max(
            abs(v - c) for v, c in zip(verts, rect.corners)
        )
        rows.append(
            (
                f"{rect.re_min:g},{rect.re_max:g},{rect.im_min:g},{rect.im_max:g}",
                float(scmap.theta),
                float(vert_err),
                res.min_ratio,
                res.max_ratio,
                res.edge_min_ratio,
                res.edge_max_ratio,
            )
        )
    _write_table(
        rc.out_dir / "conformal.csv",
        ("rect", "prevertex_angle", "vertex_err", "min_ratio", "max_ratio", "edge_min", "edge_max"),
        rows,
        rc,
    )
    # distortion grid on a box around the first levels
    n = int(math.isqrt(min(rc.probe_samples, 20000)))
    xs = np.linspace(-1.0, 4 * rc.cfg.b + 1.0, n)
    ys = np.linspace(-3.0, 3.0, n)
    ratios = []
    for x in xs:
        for y in ys:
            s = distortion_probe(complex(x, y), rc.cfg, rc.v_inf)
            if s.rhs_levels_core > 0:
                ratios.append(s.lhs_levels / s.rhs_levels_core)
    two_sided = all(
        region_split_check(complex(x, y), rc.cfg).two_sided_ok in (None, True)
        for x in xs
        for y in ys
    )
    _write_table(
        rc.out_dir / "distortion.csv",
        ("min_ratio", "max_ratio", "grid", "two_sided_ok"),
        [(float(min(ratios)), float(max(ratios)), n * n, str(two_sided).lower())],
        rc,
    )
    print(
        f"conformal: {len(rows)} maps solved, worst vertex error "
        f"{max(r[2] for r in rows):.2e}, distortion ratio >= {min(ratios):.4f}"
    )
    if not two_sided:
        print("conformal: two-sided far-region bound violated", file=sys.stderr)
        return 1
    return 0


def _cmd_bgk(rc: RunConfig) -> int:
    rc.out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(rc.seed)
    taus = (0.25, 0.5, 1.0)
    rows = []
    fits: dict[float, list[float]] = {t: [] for t in taus}
    zeros: list[complex] = []
    for k in (2, 4, 6):
        while len(zeros) < k:
            r = rng.uniform(0.4, 0.6)
            phi = rng.uniform(0.0, 2.0 * math.pi)
            zeros.append(r * complex(math.cos(phi), math.sin(phi)))
        k0 = -sum(math.log(abs(z)) for z in zeros)
        for tau in taus:
            s = bgk_sum(zeros, alpha=0.0, tau=tau)
            c_fit = s / k0
            fits[tau].append(c_fit)
            rows.append((k, tau, s, k0, c_fit))
    _write_table(
        rc.out_dir / "bgk.csv", ("n_zeros", "tau", "zero_sum", "k0", "c_fit"), rows, rc
    )
    worst = max(max(f) / min(f) for f in fits.values())
    print(f"bgk: worst per-tau fitted-constant spread x{worst:.3f}")
    if worst > 2.0:
        print("bgk: fitted constant unstable beyond x2", file=sys.stderr)
        return 1
    return 0


def _cmd_report(rc: RunConfig) -> int:
    status = _cmd_spectrum(rc)
    if rc.scan_mode != "none":
        status = max(status, _cmd_detscan(rc))
    status = max(status, _cmd_ltcheck(rc))
    for probe in rc.probes:
        if probe in ("distortion", "comparability"):
            status = max(status, _cmd_conformal(rc))
        elif probe == "bgk":
            status = max(status, _cmd_bgk(rc))
        elif probe == "hansmann":
            rng = np.random.default_rng(rc.seed)
            diag = np.sort(rng.uniform(0.0, 4.0, size=12))
            pert = 0.05 * (rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12)))
            lhs, rhs, ratio = hansmann_check(diag, np.diag(diag) + pert, rc.p)
            _write_table(
                rc.out_dir / "hansmann.csv",
                ("lhs", "rhs_core", "ratio"),
                [(lhs, rhs, ratio)],
                rc,
            )
            print(f"hansmann: ratio {ratio:.4f}")
        elif probe == "chain":
            if not isinstance(rc.potential, Potential):
                print("chain probe needs a genuine potential", file=sys.stderr)
                return 2
            rep = mapped_chain_check(rc.potential, rc.basis, rc.cfg, rc.p)
            _write_table(
                rc.out_dir / "chain.csv",
                (
                    "mu",
                    "diff_norm_pow_p",
                    "mapped_sum",
                    "mapped_ratio",
                    "lt2d_total",
                    "end_to_end_ratio",
                ),
                [
                    (
                        rep.mu,
                        rep.diff_norm_pow_p,
                        rep.mapped_sum,
                        rep.mapped_ratio,
                        rep.lt2d_total,
                        rep.end_to_end_ratio,
                    )
                ],
                rc,
            )
            print(f"chain: mapped ratio {rep.mapped_ratio:.4f}")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="landauspec",
        description="spectra of perturbed Landau Hamiltonians: eigensolves, "
        "determinant scans, conformal probes, eigenvalue-sum functionals",
    )
    parser.add_argument("--version", action="version", version=f"landauspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to a run configuration")
        sp.add_argument("--out", help="output directory override")
        sp.add_argument("--seed", type=int, help="random seed override")
        if name == "ltcheck":
            sp.add_argument(
                "--eigs", help="eigenvalue CSV to evaluate instead of computing"
            )
    args = parser.parse_args(argv)

    try:
        rc = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        rc.out_dir = Path(args.out)
    if args.seed is not None:
        rc.seed = int(args.seed)

    try:
        if args.command == "levels":
            return _cmd_levels(rc)
        if args.command == "spectrum":
            return _cmd_spectrum(rc)
        if args.command == "detscan":
            return _cmd_detscan(rc)
        if args.command == "ltcheck":
            return _cmd_ltcheck(rc, getattr(args, "eigs", None))
        if args.command == "conformal":
            return _cmd_conformal(rc)
        if args.command == "bgk":
            return _cmd_bgk(rc)
        return _cmd_report(rc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LandauSpecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

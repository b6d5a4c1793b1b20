"""Artifact emission: delimited eigenvalue/sum tables and rendered figures.

Every file starts with a provenance comment (tool version, config hash,
seed).  Numbers are written with 17 significant digits so a read-back
reproduces the doubles bit for bit; identical runs produce byte-identical
delimited output.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib import patches

from . import __version__
from .landau import MagneticConfig, landau_level
from .ltsums import LTReport
from .pipeline import EigRecord
from .zeros import ComplexRectangle

__all__ = ["emit_csv", "emit_lt_csv", "emit_svg", "read_eig_csv"]

EIG_COLUMNS = (
    "re",
    "im",
    "multiplicity",
    "nearest_level",
    "dist_E",
    "dist_ess",
    "converged",
    "method",
)


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _provenance(config_hash: str, seed: int) -> str:
    return f"# landauspec {__version__} config={config_hash} seed={seed}"


def emit_csv(
    records: Sequence[EigRecord],
    path: Union[str, Path],
    config_hash: str = "adhoc",
    seed: int = 0,
) -> Path:
    """Eigenvalue table with the fixed column set; header always present."""
    path = Path(path)
    buf = io.StringIO()
    buf.write(_provenance(config_hash, seed) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EIG_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                _fmt(rec.value.real),
                _fmt(rec.value.imag),
                str(rec.multiplicity),
                "" if rec.nearest_level is None else str(rec.nearest_level),
                _fmt(rec.dist_E),
                _fmt(rec.dist_ess),
                "true" if rec.converged else "false",
                rec.method,
            ]
        )
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def emit_lt_csv(
    report: LTReport,
    path: Union[str, Path],
    config_hash: str = "adhoc",
    seed: int = 0,
) -> Path:
    """Sum-functional table: one row per eigenvalue term plus a TOTAL row."""
    path = Path(path)
    buf = io.StringIO()
    buf.write(_provenance(config_hash, seed) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("label", "re", "im", "multiplicity", "term"))
    for lam, mult, term in zip(
        report.eigenvalues, report.multiplicities, report.terms
    ):
        writer.writerow(
            ["term", _fmt(lam.real), _fmt(lam.imag), str(mult), _fmt(term)]
        )
    writer.writerow(["TOTAL", "", "", "", _fmt(report.total)])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_eig_csv(path: Union[str, Path]) -> list[EigRecord]:
    """Read an eigenvalue table back (comment lines skipped)."""
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = row
                if tuple(header) != EIG_COLUMNS:
                    raise ValueError(
                        f"unexpected eigenvalue CSV header {header!r}"
                    )
                continue
            rows.append(row)
    out = []
    for row in rows:
        out.append(
            EigRecord(
                value=complex(float(row[0]), float(row[1])),
                multiplicity=int(row[2]),
                nearest_level=None if row[3] == "" else int(row[3]),
                dist_E=None if row[4] == "" else float(row[4]),
                dist_ess=None if row[5] == "" else float(row[5]),
                converged=row[6] == "true",
                method=row[7],
            )
        )
    return out


def emit_svg(
    records: Sequence[EigRecord],
    cfg: MagneticConfig,
    path: Union[str, Path],
    v_inf: float = 0.0,
    rects: Sequence[ComplexRectangle] = (),
    config_hash: str = "adhoc",
    seed: int = 0,
    j_max_markers: int = 10,
) -> Path:
    """Spectrum scatter: level markers, spectrum strip, scan outlines.

    Rendered with matplotlib into a standalone SVG.  The shaded strip is
    the numerical-range over-approximation {Re >= -v_inf, |Im| <= v_inf};
    vertical lines mark the free levels; scan rectangles are outlined.
    """
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": config_hash}):
        fig, ax = plt.subplots(figsize=(8.0, 4.5))
        levels = [landau_level(cfg, j) for j in range(j_max_markers + 1)]
        for lv in levels:
            ax.axvline(lv, color="0.75", lw=0.8, zorder=1)
        xmax = max(
            levels[-1] + cfg.b,
            max((r.value.real for r in records), default=0.0) + 1.0,
        )
        ymax = max(
            v_inf + 0.5,
            max((abs(r.value.imag) for r in records), default=0.0) + 0.3,
        )
        if v_inf > 0:
            strip = patches.Rectangle(
                (-v_inf, -v_inf),
                xmax + 2 * v_inf,
                2 * v_inf,
                facecolor="tab:orange",
                alpha=0.15,
                edgecolor="none",
                zorder=0,
            )
            ax.add_patch(strip)
        for r in rects:
            ax.add_patch(
                patches.Rectangle(
                    (r.re_min, r.im_min),
                    r.width,
                    r.height,
                    fill=False,
                    edgecolor="tab:green",
                    lw=0.9,
                    zorder=2,
                )
            )
        conv = [r for r in records if r.converged]
        unconv = [r for r in records if not r.converged]
        if conv:
            ax.scatter(
                [r.value.real for r in conv],
                [r.value.imag for r in conv],
                s=22,
                c="tab:blue",
                marker="o",
                label="converged",
                zorder=3,
            )
        if unconv:
            ax.scatter(
                [r.value.real for r in unconv],
                [r.value.imag for r in unconv],
                s=16,
                c="tab:red",
                marker="x",
                label="unconverged",
                zorder=3,
            )
        ax.axhline(0.0, color="0.4", lw=0.6)
        ax.set_xlim(min(-1.0, -v_inf - 0.5), xmax)
        ax.set_ylim(-ymax, ymax)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_title("discrete spectrum against the free ladder")
        if conv or unconv:
            ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path

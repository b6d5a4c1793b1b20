"""Run configuration: INI-style files, validated before any computation.

Sections and keys are line-oriented ``key = value`` under bracketed
headers; no nesting.  Every module precondition that a run could trip is
checked here first, so a bad file fails fast with exit code 2 and a message
naming the violated constraint.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigError
from .landau import BasisSpec, MagneticConfig
from .potentials import (
    Potential,
    SyntheticDiagonal,
    make_gaussian_complex,
    make_power_decay,
    make_synthetic_diagonal,
)
from .zeros import ComplexRectangle

__all__ = ["RunConfig", "load_config"]

_KNOWN_PROBES = ("distortion", "comparability", "bgk", "hansmann", "chain")
_KNOWN_SUMS = ("2d", "3d", "tail2d", "tail3d")


@dataclass
class RunConfig:
    """Validated run parameters; construct via load_config()."""

    cfg: MagneticConfig
    basis: BasisSpec
    enlarged: BasisSpec
    potential: Union[Potential, SyntheticDiagonal]
    v_inf: float
    scan_mode: str  # "auto" | "explicit" | "none"
    scan_j_list: tuple[int, ...]
    scan_height: float
    scan_delta: float
    scan_mirror: bool
    scan_underhang: float
    scan_exclusion: float
    scan_rects: tuple[ComplexRectangle, ...]
    lt_sums: tuple[str, ...]
    p: float
    eps: float
    gamma: Optional[float]
    tau: float
    probes: tuple[str, ...]
    probe_samples: int
    grid_refine: int
    out_dir: Path
    seed: int
    config_hash: str
    tol_conv: float = 1e-6

    def scan_rectangles(self) -> list[ComplexRectangle]:
        from .pipeline import auto_rectangles

        if self.scan_mode == "none":
            return []
        if self.scan_mode == "explicit":
            return list(self.scan_rects)
        return auto_rectangles(
            self.cfg,
            self.scan_j_list,
            self.v_inf,
            delta=self.scan_delta,
            height=self.scan_height,
            mirror=self.scan_mirror,
            underhang=self.scan_underhang,
        )


def _get(section, key, cast, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing key {key!r} in section [{section.name}]")
        return default
    raw = section[key].strip()
    try:
        if cast is bool:
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(
            f"key {key!r} in [{section.name}]: cannot parse {raw!r} as {cast.__name__}"
        ) from exc


def _parse_potential(sec) -> tuple[Union[Potential, SyntheticDiagonal], float]:
    kind = _get(sec, "kind", str, required=True).lower()
    if kind == "zero":
        pot = make_synthetic_diagonal({})
        return pot, 0.0
    if kind == "synthetic":
        raw = _get(sec, "entries", str, required=True)
        entries = {}
        for chunk in raw.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = [t.strip() for t in chunk.split(",")]
            if len(parts) != 4:
                raise ConfigError(
                    f"synthetic entry {chunk!r} must be 'j,m,re,im'"
                )
            j, m = int(parts[0]), int(parts[1])
            entries[(j, m)] = complex(float(parts[2]), float(parts[3]))
        pot = make_synthetic_diagonal(entries)
        return pot, pot.sup_norm
    if kind == "gaussian":
        a = complex(_get(sec, "a_re", float, 0.0), _get(sec, "a_im", float, 0.0))
        sigma = _get(sec, "sigma", float, required=True)
        if sigma <= 0:
            raise ConfigError(f"potential sigma must be positive, got {sigma}")
        if a == 0:
            raise ConfigError("gaussian potential needs a nonzero amplitude")
        pot = make_gaussian_complex(a, sigma)
        return pot, pot.sup_norm
    if kind == "power":
        C = _get(sec, "c", float, required=True)
        m_perp = _get(sec, "m_perp", float, required=True)
        if C <= 0 or m_perp <= 0:
            raise ConfigError("power potential needs C > 0 and m_perp > 0")
        raw = _get(sec, "v_coeffs", str, "1")
        coeffs = [complex(tok.strip()) for tok in raw.split(",") if tok.strip()]
        pot = make_power_decay(C, m_perp, coeffs)
        return pot, pot.sup_norm
    raise ConfigError(f"unknown potential kind {kind!r}")


def _parse_rects(raw: str) -> tuple[ComplexRectangle, ...]:
    rects = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [float(t) for t in chunk.split(",")]
        if len(parts) != 4:
            raise ConfigError(
                f"rectangle {chunk!r} must be 're_min,re_max,im_min,im_max'"
            )
        try:
            rects.append(ComplexRectangle(*parts))
        except ValueError as exc:
            raise ConfigError(f"bad rectangle {chunk!r}: {exc}") from exc
    return tuple(rects)


def load_config(path: Union[str, Path]) -> RunConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} is not readable")
    text = path.read_text(encoding="utf-8")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from exc

    for name in parser.sections():
        if name not in ("problem", "basis", "potential", "scan", "lt", "probes", "output"):
            raise ConfigError(f"unknown section [{name}]")

    if "problem" not in parser:
        raise ConfigError("missing [problem] section")
    prob = parser["problem"]
    b = _get(prob, "b", float, required=True)
    d = _get(prob, "d", int, 1)
    if b <= 0:
        raise ConfigError(f"field strength b must be positive, got {b}")
    if d < 1:
        raise ConfigError(f"half-dimension d must be >= 1, got {d}")
    cfg = MagneticConfig(b=b, d=d)

    if "basis" not in parser:
        raise ConfigError("missing [basis] section")
    bsec = parser["basis"]
    j_max = _get(bsec, "j_max", int, required=True)
    m_max = _get(bsec, "m_max", int, required=True)
    if j_max < 0 or m_max < 0:
        raise ConfigError("basis cutoffs must be nonnegative")
    basis = BasisSpec(j_max, m_max)
    enlarged = BasisSpec(
        _get(bsec, "enlarged_j", int, j_max + 2),
        _get(bsec, "enlarged_m", int, m_max + 2),
    )
    if enlarged.j_max < j_max or enlarged.m_max < m_max:
        raise ConfigError("enlarged cutoffs must contain the base cutoffs")

    if "potential" not in parser:
        raise ConfigError("missing [potential] section")
    potential, v_inf = _parse_potential(parser["potential"])
    if isinstance(potential, SyntheticDiagonal):
        for (j, m) in potential.entries:
            if j > basis.j_max or m > basis.m_max:
                raise ConfigError(
                    f"synthetic entry at (j={j}, m={m}) falls outside the basis"
                )

    ssec = parser["scan"] if "scan" in parser else {}
    scan_mode = (ssec.get("mode", "auto") if ssec else "auto").strip().lower()
    if scan_mode not in ("auto", "explicit", "none"):
        raise ConfigError(f"scan mode must be auto/explicit/none, got {scan_mode!r}")
    j_list_raw = ssec.get("j_list", "0") if ssec else "0"
    try:
        scan_j_list = tuple(int(t) for t in j_list_raw.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad scan j_list {j_list_raw!r}") from exc
    if any(j < 0 for j in scan_j_list):
        raise ConfigError("scan j_list entries must be nonnegative")
    scan_delta = float(ssec.get("delta", 0.5 * b)) if ssec else 0.5 * b
    if not (0.0 < scan_delta < b):
        raise ConfigError(
            f"scan delta must lie strictly between 0 and b={b:g}, got {scan_delta:g}"
        )
    scan_height = float(ssec.get("height", 2.0 * v_inf + 0.5)) if ssec else 2.0 * v_inf + 0.5
    if scan_height <= 0:
        raise ConfigError("scan height must be positive")
    scan_mirror = (ssec.get("mirror", "false").strip().lower() in ("true", "1", "yes", "on")) if ssec else False
    scan_underhang = float(ssec.get("underhang", 0.1)) if ssec else 0.1
    scan_exclusion = float(ssec.get("exclusion", 0.07 * b)) if ssec else 0.07 * b
    if not (0.0 < scan_exclusion < b):
        raise ConfigError("scan exclusion must lie strictly between 0 and b")
    scan_rects = _parse_rects(ssec.get("rects", "")) if ssec else ()
    if scan_mode == "explicit" and not scan_rects:
        raise ConfigError("scan mode 'explicit' needs a nonempty 'rects' list")

    lsec = parser["lt"] if "lt" in parser else {}
    sums_raw = (lsec.get("sums", "2d") if lsec else "2d").strip()
    lt_sums = tuple(t.strip().lower() for t in sums_raw.split(",") if t.strip())
    for s in lt_sums:
        if s not in _KNOWN_SUMS:
            raise ConfigError(f"unknown lt sum kind {s!r} (known: {_KNOWN_SUMS})")
    p = float(lsec.get("p", 4.0)) if lsec else 4.0
    if p < 1:
        raise ConfigError(f"lt exponent p must be >= 1, got {p}")
    eps = float(lsec.get("eps", 0.5)) if lsec else 0.5
    gamma = float(lsec["gamma"]) if (lsec and "gamma" in lsec) else None
    tau = float(lsec.get("tau", 1.0)) if lsec else 1.0
    if tau <= 0:
        raise ConfigError(f"lt tail threshold tau must be positive, got {tau}")
    needs_gamma = any(s in lt_sums for s in ("3d", "tail3d"))
    if needs_gamma:
        if not (0.0 < eps < 1.0):
            raise ConfigError(f"lt eps must lie in (0, 1), got {eps}")
        if gamma is None:
            raise ConfigError("3d sums requested but no gamma given")
        if not gamma > d + 1.5:
            raise ConfigError(
                f"gamma = {gamma:g} violates the constraint gamma > d + 3/2 = {d + 1.5:g}"
            )

    psec = parser["probes"] if "probes" in parser else {}
    probes_raw = (psec.get("run", "") if psec else "").strip()
    probes = tuple(t.strip().lower() for t in probes_raw.split(",") if t.strip())
    for pr in probes:
        if pr not in _KNOWN_PROBES:
            raise ConfigError(f"unknown probe {pr!r} (known: {_KNOWN_PROBES})")
    probe_samples = int(psec.get("samples", 10000)) if psec else 10000
    if probe_samples < 1:
        raise ConfigError("probe sample count must be positive")
    grid_refine = int(psec.get("grid_refine", 2)) if psec else 2

    osec = parser["output"] if "output" in parser else {}
    out_dir = Path(osec.get("dir", "out")) if osec else Path("out")
    seed = int(osec.get("seed", 0)) if osec else 0
    tol_conv = float(osec.get("tol_conv", 1e-6)) if osec else 1e-6
    if tol_conv <= 0:
        raise ConfigError("tol_conv must be positive")

    return RunConfig(
        cfg=cfg,
        basis=basis,
        enlarged=enlarged,
        potential=potential,
        v_inf=v_inf,
        scan_mode=scan_mode,
        scan_j_list=scan_j_list,
        scan_height=scan_height,
        scan_delta=scan_delta,
        scan_mirror=scan_mirror,
        scan_underhang=scan_underhang,
        scan_exclusion=scan_exclusion,
        scan_rects=scan_rects,
        lt_sums=lt_sums,
        p=p,
        eps=eps,
        gamma=gamma,
        tau=tau,
        probes=probes,
        probe_samples=probe_samples,
        grid_refine=grid_refine,
        out_dir=out_dir,
        seed=seed,
        config_hash=hashlib.sha256(text.encode("utf-8")).hexdigest()[:16],
        tol_conv=tol_conv,
    )

import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss
from numpy.testing import assert_allclose

from landauspec.errors import UnsupportedDimensionError
from landauspec.landau import (
    BasisSpec,
    MagneticConfig,
    dist_to_essential,
    dist_to_levels,
    landau_level,
    level_set,
    nearest_level_index,
    orbital_eval,
)


def test_level_values():
    assert landau_level(MagneticConfig(1.0, 1), 0) == 2
    assert landau_level(MagneticConfig(1.0, 1), 1) == 4
    assert landau_level(MagneticConfig(0.5, 2), 3) == 4


def test_level_gap_exact_dyadic():
    # products with the integer 2j+2 are exact floats for dyadic b
    for b in (1.0, 0.5, 0.75, 1.25, 2.0):
        cfg = MagneticConfig(b=b, d=1)
        for j in (0, 1, 5, 100, 10_000, 1_000_000):
            assert landau_level(cfg, j + 1) - landau_level(cfg, j) == 2 * b


def test_level_gap_ulp_tight_general():
    cfg = MagneticConfig(b=0.7, d=1)
    for j in (0, 1, 5, 100, 10_000, 1_000_000):
        gap = landau_level(cfg, j + 1) - landau_level(cfg, j)
        assert abs(gap - 2 * cfg.b) <= 4 * np.spacing(landau_level(cfg, j + 1))


def test_level_set_matches_scalar(cfg):
    assert_allclose(level_set(cfg, 4), [landau_level(cfg, j) for j in range(5)])


def test_config_invariants():
    with pytest.raises(ValueError):
        MagneticConfig(b=0.0, d=1)
    with pytest.raises(ValueError):
        MagneticConfig(b=1.0, d=0)


def test_dist_to_levels(cfg):
    assert dist_to_levels(cfg, 3.0) == 1.0
    assert dist_to_levels(cfg, 2.0) == 0.0
    assert_allclose(dist_to_levels(cfg, 5 + 1j), math.sqrt(2.0), rtol=1e-15)


def test_dist_to_essential(cfg):
    assert dist_to_essential(cfg, 3 + 2j) == 2.0
    assert dist_to_essential(cfg, 1.0) == 1.0
    assert_allclose(dist_to_essential(cfg, -1j), math.sqrt(5.0), rtol=1e-15)


def test_essential_below_levels(cfg):
    rng = np.random.default_rng(7)
    for _ in range(200):
        lam = complex(rng.uniform(-5, 25), rng.uniform(-5, 5))
        assert dist_to_essential(cfg, lam) <= dist_to_levels(cfg, lam) + 1e-15


def test_gap_half_width(cfg):
    rng = np.random.default_rng(8)
    for _ in range(100):
        lam = rng.uniform(2.0, 22.0)  # real, at or above the first level
        assert dist_to_levels(cfg, lam) <= cfg.b + 1e-15


def test_nearest_level_index(cfg):
    assert nearest_level_index(cfg, 2.3 + 0.2j) == 0
    assert nearest_level_index(cfg, 4.9) == 1
    assert nearest_level_index(cfg, -50.0) == 0


def test_basis_flat_index_bijection():
    basis = BasisSpec(3, 5)
    seen = []
    for j in range(4):
        for m in range(6):
            seen.append(basis.flat_index(j, m))
            assert basis.pair_index(basis.flat_index(j, m)) == (j, m)
    assert seen == sorted(seen)
    assert len(seen) == basis.dim == 24
    with pytest.raises(IndexError):
        basis.flat_index(4, 0)


def test_orbital_requires_plane():
    with pytest.raises(UnsupportedDimensionError):
        orbital_eval(MagneticConfig(1.0, 2), 0, 0, (0.0, 0.0))


def test_orbital_density_at_origin(cfg):
    # normalized gaussian ground orbital: squared modulus at the origin is
    # b/(2 pi); frozen from the quadrature-normalization oracle
    val = abs(orbital_eval(cfg, 0, 0, (0.0, 0.0))) ** 2
    assert_allclose(val, 0.15915494309189533, rtol=1e-12)


def _hermite_grid(b: float, n: int):
    # nodes/weights for integrals of f(x, y) * exp(-b r^2 / 2) over the plane
    t, w = hermgauss(n)
    x = t * math.sqrt(2.0 / b)
    wx = w * math.sqrt(2.0 / b)
    return x, wx


def _orbital_grid(cfg, j, m, X, Y):
    out = np.empty(X.shape, dtype=complex)
    for i in range(X.shape[0]):
        for k in range(X.shape[1]):
            out[i, k] = orbital_eval(cfg, j, m, (X[i, k], Y[i, k]))
    return out


def test_orbital_orthonormality_quadrature(cfg):
    # independent route: tensor Gauss-Hermite in Cartesian coordinates
    x, wx = _hermite_grid(cfg.b, 32)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(wx, wx)
    undo = np.exp(0.5 * cfg.b * (X**2 + Y**2) / 2.0)

    def inner(a, b_):
        return np.sum(W * np.conj(a) * b_ * undo**2)

    o00 = _orbital_grid(cfg, 0, 0, X, Y)
    o10 = _orbital_grid(cfg, 1, 0, X, Y)
    assert_allclose(inner(o00, o00).real, 1.0, atol=1e-10)
    assert abs(inner(o00, o10)) < 1e-10


def test_gram_identity():
    # full truncated Gram matrix via Cartesian quadrature, identity to 1e-8
    cfg = MagneticConfig(1.0, 1)
    basis = BasisSpec(8, 8)
    x, wx = _hermite_grid(cfg.b, 40)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(wx, wx)
    undo2 = np.exp(cfg.b * (X**2 + Y**2) / 2.0)
    orbs = []
    for j in range(basis.j_max + 1):
        for m in range(basis.m_max + 1):
            orbs.append(_orbital_grid(cfg, j, m, X, Y))
    flat = np.array([o.ravel() for o in orbs])
    weights = (W * undo2).ravel()
    gram = (flat.conj() * weights) @ flat.T
    assert np.max(np.abs(gram - np.eye(basis.dim))) < 1e-8

import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from numpy.testing import assert_allclose

from conftest import constant_potential
from landauspec.errors import (
    BranchError,
    NearSpectrumError,
    PoleError,
    QuadratureAccuracyError,
)
from landauspec.landau import BasisSpec, MagneticConfig, level_set
from landauspec.operators import (
    OneDFactor,
    birman_schwinger,
    free_resolvent_diag,
    hamiltonian_matrix,
    hs_norm_1d_resolvent,
    level_diagonal,
    potential_matrix,
    resolvent_difference,
    sandwiched_norm_probe,
)
from landauspec.potentials import (
    Potential,
    make_gaussian_complex,
    make_synthetic_diagonal,
)
from landauspec.schatten import schatten_norm


def test_zero_potential_matrix(cfg, small_basis):
    M = potential_matrix(make_synthetic_diagonal({}), small_basis, cfg).matrix
    assert np.all(M == 0)


def test_constant_potential_is_half_identity(cfg, small_basis):
    M = potential_matrix(constant_potential(0.5), small_basis, cfg).matrix
    assert np.max(np.abs(M - 0.5 * np.eye(small_basis.dim))) < 1e-10


def test_radial_selection_rule(cfg):
    # radial gaussian: entries across different angular indices vanish
    basis = BasisSpec(4, 4)
    M = potential_matrix(make_gaussian_complex(0.2j, 1.0), basis, cfg).matrix
    mm = basis.m_max + 1
    worst = 0.0
    for a in range(basis.dim):
        for b in range(basis.dim):
            if a % mm != b % mm:
                worst = max(worst, abs(M[a, b]))
    assert worst < 1e-10


def test_gaussian_diagonal_closed_form(cfg):
    # lowest-level diagonal entries are a / 2^(m+1) for a unit-width gaussian
    basis = BasisSpec(2, 3)
    M = potential_matrix(make_gaussian_complex(0.2j, 1.0), basis, cfg).matrix
    for m in range(4):
        assert_allclose(M[m, m], 0.2j * 2.0 ** (-(m + 1)), rtol=1e-12)


def test_quadrature_check_catches_noise(cfg, small_basis):
    # a non-deterministic "potential" cannot satisfy the doubled-node check
    rng = np.random.default_rng(0)
    noisy = Potential(
        eval_xy=lambda x, y: rng.standard_normal(np.shape(np.asarray(x))) + 0.5,
        sup_norm=1.5,
        sup_norm_exact=False,
        radial_flag=False,
        label="noise",
    )
    with pytest.raises(QuadratureAccuracyError):
        potential_matrix(noisy, small_basis, cfg)


def test_free_resolvent_values(cfg, small_basis):
    R = free_resolvent_diag(0.0, small_basis, cfg).matrix
    assert_allclose(R[0, 0], 0.5)
    R3 = free_resolvent_diag(3.0, small_basis, cfg).matrix
    mm = small_basis.m_max + 1
    assert_allclose(R3[0, 0], -1.0)
    assert_allclose(R3[mm, mm], 1.0)
    with pytest.raises(PoleError):
        free_resolvent_diag(2.0, small_basis, cfg)


def test_birman_schwinger_factorization(cfg, small_basis):
    Vd = make_synthetic_diagonal({(0, 0): 0.3 + 0.2j})
    lam = 1.0 + 0.5j
    T = birman_schwinger(Vd, lam, small_basis, cfg).matrix
    vm = potential_matrix(Vd, small_basis, cfg).matrix
    r0 = free_resolvent_diag(lam, small_basis, cfg).matrix
    assert np.array_equal(T, vm @ r0)
    assert_allclose(T[0, 0], (0.3 + 0.2j) / (2.0 - lam), rtol=1e-15)


def test_birman_schwinger_zero_potential(cfg, small_basis):
    T = birman_schwinger(make_synthetic_diagonal({}), 1.0, small_basis, cfg).matrix
    assert np.all(T == 0)


def test_birman_schwinger_norm_decay(cfg, small_basis):
    V = make_gaussian_complex(0.2j, 1.0)
    vmat = potential_matrix(V, small_basis, cfg)
    norms = [
        np.linalg.norm(
            birman_schwinger(V, -t, small_basis, cfg, vmat=vmat).matrix, 2
        )
        for t in (10.0, 100.0, 1000.0)
    ]
    assert norms[0] > norms[1] > norms[2]


def test_hamiltonian_free_diagonal(cfg, small_basis):
    H = hamiltonian_matrix(make_synthetic_diagonal({}), small_basis, cfg).matrix
    assert np.array_equal(np.diag(H), level_diagonal(small_basis, cfg))
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def test_hamiltonian_constant_shift(cfg, small_basis):
    c = 0.3 - 0.1j
    H = hamiltonian_matrix(constant_potential(c), small_basis, cfg).matrix
    ev = np.sort_complex(np.linalg.eigvals(H))
    expect = np.sort_complex(level_diagonal(small_basis, cfg) + c)
    assert np.max(np.abs(ev - expect)) < 1e-10


def test_hamiltonian_hermitian_for_real_potential(cfg, small_basis):
    H = hamiltonian_matrix(make_gaussian_complex(0.4, 1.0), small_basis, cfg).matrix
    assert np.max(np.abs(H - H.conj().T)) < 1e-12


def test_resolvent_difference_zero_potential(cfg, small_basis):
    D = resolvent_difference(make_synthetic_diagonal({}), -1.0, small_basis, cfg).matrix
    assert np.max(np.abs(D)) == 0.0


def test_resolvent_difference_first_order(cfg, small_basis):
    # (A - A0) + t A0 V1 A0 = O(t^2): the quotient by t^2 stays bounded
    V1 = make_gaussian_complex(1.0, 1.0)
    mu = -2.0
    levels = level_diagonal(small_basis, cfg)
    a0 = np.diag(1.0 / (levels - mu))
    v1 = potential_matrix(V1, small_basis, cfg).matrix
    quotients = []
    for t in (1e-4, 5e-5):
        D = resolvent_difference(V1.scaled(t), mu, small_basis, cfg).matrix
        quotients.append(np.linalg.norm(D + t * a0 @ v1 @ a0, 2) / t**2)
    assert quotients[0] < 10.0
    assert quotients[1] < 2.0 * quotients[0] + 1.0


def test_resolvent_difference_amplitude_linearity(cfg, small_basis):
    V = make_gaussian_complex(0.2j, 1.0)
    mu = -(V.sup_norm) - 1.0
    norms = []
    for t in (1.0, 0.5, 0.25):
        D = resolvent_difference(V.scaled(t), mu, small_basis, cfg).matrix
        norms.append(np.linalg.norm(D, 2))
    for a, b in zip(norms[1:], norms[:-1]):
        assert 0.45 <= a / b <= 0.55


def test_resolvent_difference_admissible_shift(cfg, small_basis):
    V = make_gaussian_complex(0.2j, 1.0)
    mu = -1.0 - V.sup_norm
    levels = level_diagonal(small_basis, cfg)
    vm = potential_matrix(V, small_basis, cfg).matrix
    D = resolvent_difference(V, mu, small_basis, cfg, ).matrix
    H = np.diag(levels).astype(complex) + vm
    lhs = (H - mu * np.eye(small_basis.dim)) @ (-D)
    rhs = vm @ np.diag(1.0 / (levels - mu))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_resolvent_difference_near_spectrum(cfg, small_basis):
    with pytest.raises(NearSpectrumError):
        resolvent_difference(make_synthetic_diagonal({}), 4.0, small_basis, cfg)


def test_hs_norm_closed_values():
    G = OneDFactor(l2_norm=1.0, linf_norm=1.0)
    # z = -1: lam = conj(z) + level
    assert_allclose(hs_norm_1d_resolvent(G, 0.0, -1.0), 0.25, rtol=1e-15)
    assert_allclose(
        hs_norm_1d_resolvent(G, 0.0, np.conj(1j)), math.sqrt(2.0) / 4.0, rtol=1e-14
    )
    assert hs_norm_1d_resolvent(OneDFactor(0.0, 0.0), 0.0, -1.0) == 0.0
    with pytest.raises(BranchError):
        hs_norm_1d_resolvent(G, 0.0, 1.0)  # z = 1 on the cut
    with pytest.raises(BranchError):
        hs_norm_1d_resolvent(G, 2.0, 2.0)  # z = 0


def kernel_hs_oracle(sigma: float, z: complex) -> float:
    """Brute-force double quadrature of |K(x, x')|^2 for a gaussian factor.

    K(x, x') = G(x) i exp(i sqrt(z)|x - x'|) / (2 sqrt(z)); the squared
    modulus is |G(x)|^2 exp(-2 Im sqrt(z) |x - x'|) / (4|z|).  The x'
    integral is split at the |.| kink so plain Gauss-Legendre converges.
    """
    s = np.sqrt(complex(z))
    if s.imag < 0:
        s = -s
    v = s.imag
    xs, wx = leggauss(120)
    L = 8.0 * sigma
    xs, wx = xs * L, wx * L
    U = 18.0 / v
    us, wu = leggauss(120)
    us, wu = 0.5 * U * (us + 1.0), wu * 0.5 * U
    inner = np.sum(wu * np.exp(-2.0 * v * us)) * 2.0  # both sides of the kink
    gx2 = np.exp(-(xs**2) / (sigma**2))
    return float(np.sum(wx * gx2) * inner / (4.0 * abs(z)))


def test_hs_norm_against_kernel_quadrature():
    # acceptance-grade check: 20 random branch points, relative error <= 1e-6
    rng = np.random.default_rng(1234)
    sigma = 1.0
    G = OneDFactor.gaussian(1.0, sigma)
    level = 2.0
    for _ in range(20):
        w = complex(rng.uniform(-5, 5), rng.uniform(0.1, 5.0))
        z = w * w
        got = hs_norm_1d_resolvent(G, level, np.conj(z) + level)
        ora = kernel_hs_oracle(sigma, z)
        assert abs(got - ora) <= 1e-6 * ora


def test_sandwiched_probe_two_levels(cfg):
    basis = BasisSpec(1, 0)
    lhs, rhs = sandwiched_norm_probe(np.ones(2), 3.0, 4.0, basis, cfg)
    assert_allclose(lhs, 2.0**0.25, rtol=1e-12)
    assert_allclose(rhs, (4.0 / 1.0) ** 0.25, rtol=1e-12)


def test_sandwiched_probe_near_level(cfg):
    basis = BasisSpec(3, 0)
    lam = 2.0 + 1e-3
    lhs, _ = sandwiched_norm_probe(np.ones(basis.dim), lam, 4.0, basis, cfg)
    assert_allclose(lhs, 1.0 / 1e-3, rtol=1e-2)


def test_sandwiched_probe_far_left(cfg):
    basis = BasisSpec(5, 5)
    lhs, _ = sandwiched_norm_probe(np.ones(basis.dim), -100.0, 4.0, basis, cfg)
    assert lhs < 0.05


def test_sandwiched_probe_bounded_ratio(cfg):
    basis = BasisSpec(5, 2)
    rng = np.random.default_rng(77)
    ratios = []
    for _ in range(50):
        lam = complex(rng.uniform(-3, 15), rng.uniform(-3, 3))
        if abs(lam.imag) < 0.05:
            lam += 0.1j
        lhs, rhs = sandwiched_norm_probe(np.ones(basis.dim), lam, 4.0, basis, cfg)
        ratios.append(lhs / rhs)
    assert max(ratios) < 100.0

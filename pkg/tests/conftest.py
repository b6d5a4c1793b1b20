import numpy as np
import pytest

from landauspec.landau import BasisSpec, MagneticConfig
from landauspec.potentials import Potential, make_gaussian_complex


@pytest.fixture(scope="session")
def cfg():
    return MagneticConfig(b=1.0, d=1)


@pytest.fixture(scope="session")
def small_basis():
    return BasisSpec(3, 3)


@pytest.fixture(scope="session")
def gaussian_v():
    return make_gaussian_complex(0.2j, 1.0)


def constant_potential(c: complex) -> Potential:
    """A genuinely constant potential (exercises the quadrature path)."""
    c = complex(c)
    return Potential(
        eval_xy=lambda x, y, _c=c: np.full_like(np.asarray(x, dtype=float), _c, dtype=complex),
        sup_norm=abs(c),
        sup_norm_exact=True,
        radial_flag=True,
        label=f"const({c:g})",
        amplitude=c,
    )

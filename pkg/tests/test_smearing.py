import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from udw.errors import DomainError
from udw.smearing import ResolutionKernel, f_sigma, factorization_residual, g_sigma, product_identity_residual

F0 = 0.3989422804014327  # 1 / sqrt(2 pi)


def test_f_sigma_peak_oracle():
    assert f_sigma(0.0, 1.0) == pytest.approx(F0, rel=1e-15)
    assert f_sigma(0.0, 4.0) == pytest.approx(F0 / 4, rel=1e-15)


@pytest.mark.parametrize("sigma", [0.1, 1.0, 50.0])
def test_f_sigma_normalized(sigma):
    val, _ = quad(f_sigma, -40 * sigma, 40 * sigma, args=(sigma,), epsabs=0, epsrel=1e-13)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_g_sigma_window_edge():
    # the 12-sigma quadrature window cuts the kernel at exp(-18)
    assert g_sigma(12.0, 1.0) == pytest.approx(np.exp(-18.0), rel=1e-14)


def test_g_sigma_complex_argument():
    z = 1.0 - 2.0j
    assert g_sigma(z, 1.0) == pytest.approx(np.exp(-z * z / 8))


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20), st.floats(0.1, 10))
def test_factorization_identity(t, s, sp, sigma):
    assert abs(factorization_residual(t, s, sp, sigma)) < 1e-13


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(0.1, 10))
def test_product_identity(s, sp, sigma):
    assert abs(product_identity_residual(s, sp, sigma)) < 1e-13


def test_resolution_kernel_bundles_both():
    k = ResolutionKernel(2.0)
    assert k.f(0.3) == f_sigma(0.3, 2.0)
    assert k.g(0.3) == g_sigma(0.3, 2.0)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_nonpositive_sigma_rejected(sigma):
    with pytest.raises(DomainError):
        f_sigma(0.0, sigma)
    with pytest.raises(DomainError):
        ResolutionKernel(sigma)

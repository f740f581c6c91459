import math

import numpy as np
import pytest

from slowhom.oscillatory import (cos_moment, direct_moment, filon_cos,
                                 filon_moment, gauss_panels, ibp_bound,
                                 sin_moment)


def gauss(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2)


gauss.vectorized = True


def test_direct_matches_closed_form():
    # int e^{-x^2} cos(2 pi mu x) dx = sqrt(pi) exp(-(pi mu)^2)
    for mu in (0.0, 0.3, 1.2):
        m = cos_moment(gauss, mu, -9.0, 9.0)
        want = math.sqrt(math.pi) * math.exp(-(math.pi * mu) ** 2)
        assert m.method == "direct"
        assert m.value == pytest.approx(want, abs=1e-11)


def test_sin_moment_odd_integrand_vanishes():
    m = sin_moment(gauss, 0.7, -9.0, 9.0)
    assert m.value == pytest.approx(0.0, abs=1e-10)


def test_filon_against_gauss_panel_oracle():
    # independent oracle: composite Gauss-Legendre resolving every period
    def f(x):
        return 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2)

    f.vectorized = True
    mu = 800.0  # frequency * width = 3200 > direct limit
    a, b = -2.0, 2.0
    m = cos_moment(f, mu, a, b)
    assert m.method == "filon"
    n_panels = int(10 * mu * (b - a))
    oracle = gauss_panels(
        lambda x: f(x) * np.cos(2 * math.pi * mu * x), a, b, n_panels)
    assert m.value == pytest.approx(oracle, abs=5e-12)
    assert abs(m.value - oracle) <= m.error + 1e-12


def test_filon_weights_small_theta_series():
    # theta ~ 0 turns Filon into composite Simpson; check against adaptive
    val_series = filon_cos(gauss, 1e-9, -1.0, 1.0, 256)
    direct = direct_moment(gauss, 1e-9, -1.0, 1.0)
    assert val_series == pytest.approx(direct.value, rel=1e-9)


def test_analytic_regime_returns_none():
    assert cos_moment(gauss, 1e9, -1.0, 1.0) is None


def test_ibp_bound_decays():
    assert ibp_bound(2.0, 100.0) == pytest.approx(
        2.0 / (2.0 * math.pi * 100.0))
    assert ibp_bound(2.0, 1000.0) < ibp_bound(2.0, 10.0)
    assert math.isinf(ibp_bound(2.0, 0.0))


def test_gauss_panels_polynomial_exact():
    got = gauss_panels(lambda x: x ** 4 - x + 2.0, -1.0, 3.0, 8)
    want = (3.0 ** 5 + 1.0) / 5.0 - (9.0 - 1.0) / 2.0 + 2.0 * 4.0
    assert got == pytest.approx(want, rel=1e-14)

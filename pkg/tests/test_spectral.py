import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinlab.spectral import (
    Field,
    GridError,
    MixedNormSpec,
    PhaseGrid,
    bessel_multiplier,
    conjugate_exponent,
    dealiased_product,
    fractional_derivative,
    guard_band_max,
    mixed_lebesgue_norm,
    sobolev_mixed_norm,
    spectral_derivative,
)


def random_field(grid, seed, smooth=True):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if smooth:
        c = Field(grid, vals).to_spectral().values
        k2 = sum(grid.mode_numbers(i) ** 2 for i in range(grid.ndim))
        c = c * np.exp(-0.05 * k2)
        return Field(grid, c, "spectral").to_physical()
    return Field(grid, vals)


def test_grid_rejects_bad_sizes():
    with pytest.raises(GridError):
        PhaseGrid.make(x=(1.0, 12))
    with pytest.raises(GridError):
        PhaseGrid.make(x=(1.0, 4))
    with pytest.raises(GridError):
        PhaseGrid.make(y=(1.0, 16))


def test_grid_equality_and_lattice():
    a = PhaseGrid.make(x=(2.0, 16), v=(3.0, 8))
    b = PhaseGrid.make(x=(2.0, 16), v=(3.0, 8))
    c = PhaseGrid.make(x=(2.0, 16), v=(3.0, 16))
    assert a == b and a != c
    k = np.sort(a.axes[0].frequencies())
    np.testing.assert_allclose(k, 2 * np.pi * np.arange(-8, 8) / 2.0)


def test_round_trip():
    grid = PhaseGrid.make(t=(1.0, 8), x=(2.0, 16), v=(5.0, 32))
    f = random_field(grid, 0, smooth=False)
    back = f.to_spectral().to_physical()
    assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_real_field_is_hermitian():
    grid = PhaseGrid.make(x=(2.0, 16), v=(5.0, 32))
    f = Field(grid, random_field(grid, 1).real)
    assert f.is_hermitian()
    assert not Field(grid, 1j * f.values + f.values[::-1]).is_hermitian()


def test_unknown_axis_raises():
    grid = PhaseGrid.make(x=(1.0, 16))
    f = random_field(grid, 2)
    with pytest.raises(GridError):
        fractional_derivative(f, "v", 1.0)
    with pytest.raises(GridError):
        fractional_derivative(f, "v", 0.0)


def test_fractional_derivative_identity_and_eigenfunction():
    L = 3.0
    grid = PhaseGrid.make(x=(L, 32), v=(1.0, 8))
    f = Field.from_function(grid, lambda x, v: np.sin(2 * np.pi * x / L) + 0 * v)
    assert fractional_derivative(f, "x", 0) is f
    for m in (0.5, 1.0, 2.7):
        d = fractional_derivative(f, "x", m)
        np.testing.assert_allclose(d.values, (2 * np.pi / L) ** m * f.values, atol=1e-12)


def test_laplacian_matches_finite_differences():
    # -d^2 f by centred differences, error O(h^2): ratio ~4 per halving
    errs = []
    for n in (32, 64, 128):
        grid = PhaseGrid.make(x=(2 * np.pi, n))
        f = Field.from_function(grid, lambda x: np.exp(np.sin(x)) + np.cos(3 * x))
        h = grid.axes[0].spacing
        fd = -(np.roll(f.values, -1) - 2 * f.values + np.roll(f.values, 1)) / h**2
        errs.append(np.abs(fractional_derivative(f, "x", 2).values - fd).max())
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_fractional_derivative_composition_exact():
    grid = PhaseGrid.make(x=(2.0, 16), v=(4.0, 16))
    f = random_field(grid, 3).to_spectral()
    a = fractional_derivative(fractional_derivative(f, "v", 0.7), "v", 1.6)
    b = fractional_derivative(f, "v", 2.3)
    np.testing.assert_allclose(a.values, b.values, rtol=1e-13, atol=1e-16)


def test_negative_order_rejected():
    grid = PhaseGrid.make(x=(1.0, 8))
    with pytest.raises(ValueError):
        fractional_derivative(Field(grid, np.ones(8)), "x", -1.0)


def test_bessel_cases():
    grid = PhaseGrid.make(x=(2.0, 16), v=(4.0, 16))
    const = Field(grid, 2.5 * np.ones(grid.shape))
    np.testing.assert_allclose(bessel_multiplier(const, ("x", "v"), 1.7).values, 2.5, atol=1e-13)
    f = random_field(grid, 4)
    assert bessel_multiplier(f, "v", 0) is f
    back = bessel_multiplier(bessel_multiplier(f, ("x", "v"), -3), ("x", "v"), 3)
    np.testing.assert_allclose(back.values, f.values, atol=1e-12 * np.abs(f.values).max())


def test_mixed_norm_constant_unit_box():
    grid = PhaseGrid.make(t=(1.0, 8), x=(1.0, 16), v=(1.0, 8))
    f = Field(grid, np.ones(grid.shape))
    for p, q in [(1, 1), (2, 3), (math.inf, 2), (1.5, math.inf), (math.inf, math.inf)]:
        assert mixed_lebesgue_norm(f, MixedNormSpec(p, q)) == pytest.approx(1.0, rel=1e-12)


def test_mixed_norm_separable():
    grid = PhaseGrid.make(x=(3.0, 32), v=(5.0, 64))
    x, v = grid.mesh()
    a = 1.5 + np.cos(2 * np.pi * x / 3.0)
    b = np.exp(-v**2)
    f = Field(grid, a * b)
    dx, dv = 3.0 / 32, 5.0 / 64
    for p, q in [(1, 2), (3, 1.5), (math.inf, 4), (2, math.inf)]:
        an = np.max(a) if math.isinf(p) else (dx * np.sum(np.abs(a) ** p)) ** (1 / p)
        bn = np.max(b) if math.isinf(q) else (dv * np.sum(np.abs(b) ** q)) ** (1 / q)
        assert mixed_lebesgue_norm(f, MixedNormSpec(p, q)) == pytest.approx(an * bn, rel=1e-12)


def test_mixed_norm_collapse_and_errors():
    grid = PhaseGrid.make(x=(2.0, 16), v=(3.0, 32))
    f = random_field(grid, 5)
    for p in (1.0, 2.5, 4.0):
        plain = (grid.cell_volume * np.sum(np.abs(f.values) ** p)) ** (1 / p)
        assert mixed_lebesgue_norm(f, MixedNormSpec(p, p)) == pytest.approx(plain, rel=1e-12)
    with pytest.raises(ValueError):
        MixedNormSpec(0.5, 2)


@pytest.mark.parametrize("seed", range(100))
def test_parseval(seed):
    grid = PhaseGrid.make(t=(1.0, 8), x=(2.0, 8), v=(3.0, 16))
    f = random_field(grid, seed, smooth=False)
    assert sobolev_mixed_norm(f, 0, 0) == pytest.approx(mixed_lebesgue_norm(f, MixedNormSpec(2, 2)), rel=1e-10)


def test_sobolev_single_mode():
    grid = PhaseGrid.make(t=(1.0, 8), x=(1.0, 16), v=(1.0, 16))
    t, x, v = grid.mesh()
    kt, kx, kv = 2, -3, 5
    zt, zx, zv = 2 * np.pi * kt, 2 * np.pi * kx, 2 * np.pi * kv
    f = Field(grid, np.exp(1j * (zt * t + zx * x + zv * v)))
    s, r = 0.7, -1.3
    want = (1 + zt**2 + zx**2) ** (s / 2) * (1 + zv**2) ** (r / 2)
    assert sobolev_mixed_norm(f, s, r) == pytest.approx(want, rel=1e-12)


def test_sobolev_s1_direct_sum():
    grid = PhaseGrid.make(t=(1.0, 8), x=(2.0, 8), v=(3.0, 16))
    f = random_field(grid, 7)
    # odd derivatives drop Nyquist, so compare on a Nyquist-free field
    nyq = (grid.mode_numbers(0) == -4) | (grid.mode_numbers(1) == -4)
    c = np.where(nyq, 0, f.to_spectral().values)
    f = Field(grid, c, "spectral")
    # ||f||^2 + ||d_t f||^2 + ||d_x f||^2 in physical space
    parts = [f, spectral_derivative(f, 0), spectral_derivative(f, 1)]
    total = sum(grid.cell_volume * np.sum(np.abs(p.to_physical().values) ** 2) for p in parts)
    assert sobolev_mixed_norm(f, 1, 0) == pytest.approx(math.sqrt(total), rel=1e-12)


def test_conjugate_exponent_values():
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(1) == math.inf
    assert conjugate_exponent(math.inf) == 1
    assert conjugate_exponent(Fraction(3, 2)) == 3
    assert conjugate_exponent(1.5) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        conjugate_exponent(0.9)


@given(st.fractions(min_value=1, max_value=50))
def test_conjugate_involution(p):
    assert conjugate_exponent(conjugate_exponent(p)) == p


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_operations_deterministic(seed):
    grid = PhaseGrid.make(x=(2.0, 16), v=(3.0, 16))
    f = random_field(grid, seed)
    a = fractional_derivative(f, "v", 1.3).values
    b = fractional_derivative(f, "v", 1.3).values
    assert np.array_equal(a, b)


def test_guard_band_and_product():
    grid = PhaseGrid.make(x=(2 * np.pi, 32), v=(20.0, 64))
    x, v = grid.mesh()
    f = Field(grid, np.exp(-(v**2)) * np.cos(x))
    assert guard_band_max(f, "v") < 1e-12
    g = Field(grid, np.sin(2 * x) + 0 * v)
    prod = dealiased_product(f, g)
    np.testing.assert_allclose(prod.to_physical().values, f.values * g.values, atol=1e-11)

"""Velocity averages, the commutator and time identities, and manufactured (f, g) pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .exponents import KineticParams, reg0_i_exponent, reg0_ii_exponent
from .probe import ProbeError, estimate_exponent
from .spectral import (
    Field,
    MixedNormSpec,
    PhaseGrid,
    bessel_multiplier,
    bump,
    conjugate_exponent,
    dealiased_product,
    forward,
    fractional_derivative,
    inverse,
    mixed_lebesgue_norm,
)

EPS_DIV = 1e-8
MAX_EXCLUDED = 0.2


class RejectionError(ValueError):
    pass


def _txv(grid: PhaseGrid):
    if grid.labels != ("t", "x", "v"):
        raise ValueError(f"expected a (t, x, v) grid, got {grid.labels}")
    return [grid.frequencies(i) for i in range(3)]


def _safe_ratio(num: float, den: float) -> float:
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def inverse_derivative(field: Field, axes, m: float) -> Field:
    """D^{-m} on ``axes``; the zero mode is sent to zero."""
    k2 = field.grid.freq_norm_sq(axes)
    with np.errstate(divide="ignore"):
        sym = np.where(k2 > 0, k2 ** (-0.5 * m), 0.0)
    c = field.to_spectral().values * sym
    out = Field(field.grid, c, "spectral")
    return out if field.space == "spectral" else out.to_physical()


def velocity_moment(f: Field, phi) -> Field:
    """rho_phi[f] = int f phi dv by the rectangle rule on the v axis."""
    grid = f.grid
    iv = grid.indices("v")
    if len(iv) != 1:
        raise ValueError("velocity_moment expects exactly one v axis")
    iv = iv[0]
    w = phi.to_physical().values if isinstance(phi, Field) else np.asarray(phi)
    n = grid.axes[iv].size
    w = np.broadcast_to(np.ravel(w) if np.size(w) == n else w, (n,))
    shape = [1] * grid.ndim
    shape[iv] = n
    vals = f.to_physical().values
    mom = np.sum(vals * w.reshape(shape), axis=iv) * grid.axes[iv].spacing
    rest = PhaseGrid(tuple(a for i, a in enumerate(grid.axes) if i != iv))
    return Field(rest, mom)


# -- identities ---------------------------------------------------------------------


def _transport(f: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """d_t f + v d_x f in physical space, spectral derivatives."""
    tau, xi, _ = _txv(grid)
    c = forward(f)
    v = grid.coords(2)
    return inverse(1j * tau * c) + v * inverse(1j * xi * c)


def commutator_residual(f: Field, r: float) -> float:
    """Relative l2 size of A - B - C for the commutator of <D_v>^{1-r} with d_t + v d_x.

    A = <D_v>^{1-r}(d_t f + v d_x f), B = (d_t + v d_x)<D_v>^{1-r} f and
    C = (1 - r) xi eta <eta>^{-1-r} f_hat taken back to physical space.
    """
    grid = f.grid
    _, xi, eta = _txv(grid)
    vals = f.to_physical().values
    bracket = (1.0 + eta**2) ** (0.5 * (1 - r))
    a = inverse(bracket * forward(_transport(vals, grid)))
    b = _transport(inverse(bracket * forward(vals)), grid)
    c = (1 - r) * inverse(xi * eta * (1.0 + eta**2) ** (-0.5 * (1 + r)) * forward(vals))
    scale = max(np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(c))
    return _safe_ratio(float(np.linalg.norm(a - b - c)), float(scale))


def _eta_derivative(c: np.ndarray, extent: float) -> np.ndarray:
    """i d/d eta of the coefficient array along the v-frequency axis.

    The coefficients are a trigonometric series in eta whose dual variable is
    the centred v coordinate; the ambiguous edge node -L/2 gets weight 0.
    """
    n = c.shape[2]
    phase = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    samples = np.fft.ifft(c * phase, axis=2, norm="forward")
    dual = (np.arange(n) - n // 2) * (extent / n)
    dual[0] = 0.0
    return np.fft.fft(samples * dual, axis=2, norm="forward") * phase


def time_identity_residual(f: Field, s: float, r: float, u=None) -> float:
    """Relative residual of the tau-weighted energy identity with weights tau <tau>^{2s-2} <eta>^{-2r}.

    The left side is |tau|^2 <tau>^{2s-2} <eta>^{-2r} |f_hat|^2 summed over the
    lattice.  On the right, F[v f] comes from the eta-derivative of f_hat, the
    equation term X f_hat from d_t f + d_x((v + u) f) formed in physical space,
    and the u term from a padded product.
    """
    grid = f.grid
    tau, xi, eta = _txv(grid)
    vals = f.to_physical().values
    c = forward(vals)
    w = (1.0 + tau**2) ** (s - 1) * (1.0 + eta**2) ** (-r)
    lhs = float(np.sum(w * tau**2 * np.abs(c) ** 2))
    vf_hat = _eta_derivative(c, grid.axes[2].extent)
    flux = grid.coords(2) * vals
    uf_hat = 0.0
    if u is not None:
        uu = u.to_physical().values if isinstance(u, Field) else np.asarray(u)
        uu = np.broadcast_to(uu.reshape(uu.shape + (1,) * (3 - uu.ndim)), grid.shape)
        flux = flux + uu * vals
        uf_hat = dealiased_product(Field(grid, uu), Field(grid, vals), axes=(0, 1)).to_spectral().values
    x_hat = 1j * tau * c + 1j * xi * forward(flux)
    tw = w * tau
    conj = np.conj(c)
    rhs = (
        -np.real(np.sum(tw * xi * vf_hat * conj))
        + np.imag(np.sum(tw * x_hat * conj))
        - np.real(np.sum(tw * xi * uf_hat * conj))
    )
    scale = max(abs(lhs), abs(rhs))
    return _safe_ratio(abs(lhs - rhs), scale)


# -- manufactured pairs -------------------------------------------------------------


@dataclass
class ManufacturedPair:
    f: Field
    g: Field
    params: KineticParams
    seed: int
    t_radius: float
    v_radius: float
    excluded_fraction: float = 0.0
    residual: float = 0.0


@dataclass
class AveragingReport:
    variant: str
    s: float
    lhs: float
    rhs: float
    ratio: float
    pieces: dict = dc_field(default_factory=dict)
    params: dict = dc_field(default_factory=dict)
    grid: tuple = ()
    s_measured: float | None = None

    def as_dict(self):
        return dict(self.__dict__)


def default_pair_grid(n: int = 64) -> PhaseGrid:
    return PhaseGrid.make(t=(4.0, n), x=(2 * math.pi, n), v=(8.0, n))


def divisor(grid: PhaseGrid, params: KineticParams) -> np.ndarray:
    """(lam |tau|^alpha + |xi|^alpha) |eta|^beta on the lattice (0^0 = 1)."""
    tau, xi, eta = _txv(grid)
    a, b = float(params.alpha), float(params.beta)
    pw = lambda z, e: np.ones_like(z) if e == 0 else np.abs(z) ** e
    return (params.lam * pw(tau, a) + pw(xi, a)) * pw(eta, b)


def _odd_symbol(grid: PhaseGrid, i: int) -> np.ndarray:
    # first-derivative symbol with the unpaired Nyquist mode zeroed, so real data stay real
    k = grid.frequencies(i)
    return np.where(grid.mode_numbers(i) == -(grid.axes[i].size // 2), 0.0, k)


def kinetic_operator(f: Field, coeffs: np.ndarray | None = None) -> np.ndarray:
    """Spectrum of d_t f + d_x(v f)."""
    grid = f.grid
    _txv(grid)
    tau, xi = _odd_symbol(grid, 0), _odd_symbol(grid, 1)
    vals = f.to_physical().values
    c = forward(vals) if coeffs is None else coeffs
    return 1j * tau * c + 1j * xi * forward(grid.coords(2) * vals)


def pair_residual(pair: ManufacturedPair) -> float:
    lhs = kinetic_operator(pair.f)
    rhs = divisor(pair.f.grid, pair.params) * pair.g.to_spectral().values
    return _safe_ratio(float(np.linalg.norm(lhs - rhs)), float(np.linalg.norm(lhs)))


def _random_field(grid: PhaseGrid, rng, s_tx: float, k_v: float) -> np.ndarray:
    """Random-phase real field with power <k_tx>^{-2(s_tx + 1)} <k_v>^{-(2 k_v + 1)} per mode."""
    kt, kx, kv = (grid.mode_numbers(i).astype(float) for i in range(3))
    kt, kx, kv = kt.reshape(-1, 1, 1), kx.reshape(1, -1, 1), kv.reshape(1, 1, -1)
    amp = (1 + kt**2 + kx**2) ** (-0.5 * (s_tx + 1)) * (1 + kv**2) ** (-0.5 * (k_v + 0.5))
    noise = np.exp(2j * math.pi * rng.random(grid.shape))
    return inverse(amp * noise).real


def manufacture_pair(params: KineticParams, k=None, l=None, seed: int = 0, grid: PhaseGrid | None = None,
                     s_tx: float | None = None, smooth: bool = False, project: bool = True) -> ManufacturedPair:
    """Build f with v-regularity ``k`` (windowed in t and v) and g from the kinetic equation.

    The (t, x) roughness defaults to 1 - alpha + 0.2, just enough for g to stay
    square integrable as the grid is refined.  ``smooth`` replaces the random
    series by a few low modes.  ``project=False`` skips the removal of the
    components the equation cannot reach (x-average, low v-moments), which
    typically triggers the rejection.
    """
    k = float(params.k if k is None else k)
    l = float(params.l if l is None else l)
    grid = grid or default_pair_grid()
    _txv(grid)
    rng = np.random.Generator(np.random.Philox(seed))
    t_rad = 0.4 * grid.axes[0].extent
    v_rad = 0.375 * grid.axes[2].extent
    t, x, v = grid.mesh()
    if smooth:
        h = np.zeros(grid.shape)
        for _ in range(4):
            a, b, c = rng.integers(-2, 3, 3)
            h = h + rng.standard_normal() * np.cos(2 * math.pi * (a * t / grid.axes[0].extent + c * v / grid.axes[2].extent) + b * x + rng.uniform(0, 2 * math.pi))
    else:
        s_tx = float(1 - params.alpha + 0.2 if s_tx is None else s_tx)
        h = _random_field(grid, rng, s_tx, k)
    wt = bump(t, t_rad)
    wv = bump(v, v_rad)
    f = wt * wv * h
    alpha, beta = float(params.alpha), float(params.beta)
    if alpha > 0 and project:
        # |xi|^alpha vanishes on xi = 0 (and the t-part too on tau = 0 when lam = 1);
        # removing the x-average keeps the t and v supports
        f = f - f.mean(axis=1, keepdims=True)
    if beta > 0 and project:
        # |eta|^beta vanishes on eta = 0: project out the zeroth and first v-moments
        w2 = bump(v[0, 0], 0.8 * v_rad)
        vv = v[0, 0]
        gram = np.array([[np.sum(w2), np.sum(vv * w2)], [np.sum(vv * w2), np.sum(vv * vv * w2)]])
        m0 = np.sum(f, axis=2)
        m1 = np.sum(f * vv, axis=2)
        coef = np.linalg.solve(gram, np.stack([m0.ravel(), m1.ravel()]))
        a0 = coef[0].reshape(m0.shape)[..., None]
        a1 = coef[1].reshape(m0.shape)[..., None]
        f = f - (a0 + a1 * vv) * w2
    f = f / max(np.sqrt(np.mean(f * f)), 1e-300)
    D = divisor(grid, params)
    mask = D >= EPS_DIV
    fc = forward(f)
    total = float(np.sum(np.abs(fc) ** 2))
    excluded = _safe_ratio(float(np.sum(np.abs(fc[~mask]) ** 2)), total)
    if excluded > MAX_EXCLUDED:
        raise RejectionError(f"{100 * excluded:.1f}% of the energy of f sits where the divisor vanishes")
    fc = np.where(mask, fc, 0.0)
    f_field = Field(grid, inverse(fc).real)
    xf = kinetic_operator(f_field, fc)
    with np.errstate(divide="ignore", invalid="ignore"):
        gc = np.where(mask, xf / D, 0.0)
    g_vals = inverse(gc)
    g_field = Field(grid, g_vals.real)
    pair = ManufacturedPair(f_field, g_field, replace(params, k=k, l=l, R=max(1.0, v_rad)), seed, t_rad, v_rad, excluded)
    pair.residual = pair_residual(pair)
    return pair


def _weighted_norm_sq(grid: PhaseGrid, power: np.ndarray, axes_sym: np.ndarray, v_weight=None) -> float:
    w = axes_sym if v_weight is None else axes_sym * v_weight
    return float(grid.volume * np.sum(w * power))


def verify_reg0(pair: ManufacturedPair, variant: str = "ii", measure: bool = False) -> AveragingReport:
    """Left and right sides of the averaging/hypoelliptic inequality without constants."""
    if variant not in ("i", "ii"):
        raise ValueError("variant must be 'i' or 'ii'")
    params = pair.params
    s = float(reg0_i_exponent(params) if variant == "i" else reg0_ii_exponent(params))
    f, g = pair.f, pair.g
    grid = f.grid
    fs = f.to_spectral()
    power = np.abs(fs.values) ** 2
    tau, xi, eta = _txv(grid)
    vw = (1.0 + eta**2) ** (-1.5) if variant == "i" else None
    R = float(params.R)
    lx = _weighted_norm_sq(grid, power, np.abs(xi) ** (2 * s), vw)
    lt = _weighted_norm_sq(grid, power, np.abs(tau) ** (2 * s), vw)
    lhs = lx + R ** (-2 * s) * lt
    p, q = params.p, params.q
    ps, qs = conjugate_exponent(p), conjugate_exponent(q)
    dvl = fractional_derivative(fs, "v", float(params.l)) if params.l else f
    n_dl = mixed_lebesgue_norm(dvl, MixedNormSpec(float(ps), float(qs)))
    n_g = mixed_lebesgue_norm(g, MixedNormSpec(float(p), float(q)))
    flux = 1.0 + params.lam * R ** float(params.alpha)
    n_fk = _weighted_norm_sq(grid, power, (1.0 + eta**2) ** float(params.k))
    rhs = flux * n_dl * n_g + n_fk
    pieces = {
        "lhs_x": lx,
        "lhs_t": lt,
        "flux_factor": flux,
        "dv_l_norm": n_dl,
        "g_norm": n_g,
        "bilinear": flux * n_dl * n_g,
        "f_hk_sq": n_fk,
    }
    s_meas = None
    if measure:
        target = fs if variant == "ii" else bessel_multiplier(fs, "v", -1.5)
        try:
            s_meas = estimate_exponent(target, ("t", "x")).s_est
        except ProbeError:
            s_meas = None
    pdict = {k: float(v) for k, v in params.__dict__.items()}
    return AveragingReport(variant, s, lhs, rhs, _safe_ratio(lhs, rhs), pieces, pdict, grid.shape, s_meas)

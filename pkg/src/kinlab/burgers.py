"""
Burgers' equation with a rough transport, d_t w + d_x(w^2/2 + u w) = 0, on a periodic x grid,
together with its kinetic lift and the entropy-defect measure.

The finite-volume flux is Engquist-Osher for w^2/2 plus upwind for u w.  The EO
flux is the velocity integral of the upwinded kinetic flux v+ chi(w_i) + v- chi(w_{i+1}),
so the defect below is reconstructed with exact cell integrals in v and the
solver's own time levels; summed over v it reproduces the scheme to roundoff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import special

from .probe import ExponentFit, estimate_exponent
from .spectral import Axis, Field, PhaseGrid, bump
from .solver import CFLError

CFL_MAX = 0.9
EPS0 = 0.01


@dataclass
class ConservationState:
    w: np.ndarray
    axis: Axis
    t: float = 0.0
    bound: float | None = None

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.shape != (self.axis.size,):
            raise ValueError("w must be sampled on the x axis")
        if self.bound is None:
            self.bound = float(np.abs(self.w).max())

    @property
    def mass(self) -> float:
        return float(self.w.sum() * self.axis.spacing)

    @property
    def tv(self) -> float:
        return float(np.abs(np.roll(self.w, -1) - self.w).sum())


@dataclass
class RoughTransport:
    """u sampled on a (t, x) grid; time slice n covers [n dt_u, (n+1) dt_u)."""

    u: np.ndarray
    grid: PhaseGrid
    s0: float = math.inf
    fit: ExponentFit | None = None

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.grid.labels != ("t", "x") or self.u.shape != self.grid.shape:
            raise ValueError("u must live on a (t, x) grid")

    @property
    def sup(self) -> float:
        return float(np.abs(self.u).max())

    def at(self, t: float) -> np.ndarray:
        dt = self.grid.axes[0].spacing
        n = min(int(math.floor(t / dt + 1e-9)), self.grid.shape[0] - 1)
        return self.u[max(n, 0)]

    @classmethod
    def constant(cls, c: float, x_axis: Axis, duration: float = 1.0):
        grid = PhaseGrid((Axis("t", duration, 8), x_axis))
        return cls(np.full(grid.shape, float(c)), grid)

    @property
    def x_constant(self) -> bool:
        return bool(np.all(np.ptp(self.u, axis=1) <= 1e-14 * max(1.0, self.sup)))


def sample_rough_transport(s0: float, sup: float, seed: int, grid: PhaseGrid, eps0: float = EPS0,
                           validate: bool = True) -> RoughTransport:
    """Random-phase Fourier series with amplitudes <(k_t, k_x)>^{-s0-1-eps0}, scaled to sup |u| = ``sup``."""
    if not s0 > 0:
        raise ValueError("s0 must be positive")
    if grid.labels != ("t", "x"):
        raise ValueError("rough transport lives on a (t, x) grid")
    rng = np.random.Generator(np.random.Philox(seed))
    kt = grid.mode_numbers(0).astype(float)
    kx = grid.mode_numbers(1).astype(float)
    amp = (1 + kt**2 + kx**2) ** (-0.5 * (s0 + 1 + eps0))
    amp[0, 0] = 0.0
    coeffs = amp * np.exp(2j * math.pi * rng.random(grid.shape))
    u = np.fft.ifft2(coeffs).real
    u *= sup / np.abs(u).max()
    fit = estimate_exponent(Field(grid, u), ("t", "x"))
    if validate and not (fit.clamped or fit.s_est >= s0 - 0.1):
        raise ValueError(f"sampled transport fits s = {fit.s_est:.3f}, below the declared {s0} - 0.1")
    return RoughTransport(u, grid, float(s0), fit)


# -- solver --------------------------------------------------------------------------


def numerical_flux(w: np.ndarray, u: np.ndarray | None) -> np.ndarray:
    """Interface flux F_{i+1/2}: EO for w^2/2 plus upwind u w with averaged interface speed."""
    a, b = w, np.roll(w, -1)
    flux = 0.5 * np.maximum(a, 0.0) ** 2 + 0.5 * np.minimum(b, 0.0) ** 2
    if u is not None:
        uh = 0.5 * (u + np.roll(u, -1))
        flux = flux + np.maximum(uh, 0.0) * a + np.minimum(uh, 0.0) * b
    return flux


def solve_burgers(w0: ConservationState, u: RoughTransport | None, T: float, cfl: float = 0.5,
                  dt: float | None = None) -> list:
    """Explicit Euler in time with a fixed step; every step is returned."""
    dx = w0.axis.spacing
    usup = u.sup if u is not None else 0.0
    speed = w0.bound + usup
    if dt is None:
        steps = max(1, int(math.ceil(T * max(speed, 1e-12) / (cfl * dx))))
        dt = T / steps
    else:
        steps = int(round(T / dt))
        if abs(steps * dt - T) > 1e-9 * T:
            raise ValueError("T must be a whole number of steps")
    if speed * dt / dx > CFL_MAX:
        raise CFLError(f"CFL number {speed * dt / dx:.3g} exceeds {CFL_MAX}; use dt <= {CFL_MAX * dx / speed:.3g}")
    w = w0.w.copy()
    out = [ConservationState(w.copy(), w0.axis, w0.t)]
    for n in range(steps):
        t = w0.t + n * dt
        un = u.at(t - w0.t) if u is not None else None
        local = (np.abs(w).max() + (np.abs(un).max() if un is not None else 0.0)) * dt / dx
        if local > CFL_MAX:
            raise CFLError(f"CFL number {local:.3g} exceeded during the run at t={t:.4g}")
        flux = numerical_flux(w, un)
        w = w - dt / dx * (flux - np.roll(flux, 1))
        out.append(ConservationState(w.copy(), w0.axis, w0.t + (n + 1) * dt))
    return out


# -- Maxwellians ---------------------------------------------------------------------


def _cell_edges(v_axis: Axis):
    # half-integer multiples of h: one rounding per edge, no drift from the -L/2 offset
    h = v_axis.spacing
    e = (np.arange(v_axis.size + 1) - v_axis.size // 2 - 0.5) * h
    return e[:-1], e[1:]


def _overlap(lo, hi, a, b, h):
    # length of [lo, hi] intersected with [a, b]; covered cells get exactly h
    part = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    return np.where((lo >= a) & (hi <= b), h, part)


def _chi_cells(w: np.ndarray, v_axis: Axis, power: int = 0) -> np.ndarray:
    """Cell integrals of v^power * chi(w; v) where chi = 1 on (0, w), -1 on (w, 0)."""
    lo, hi = _cell_edges(v_axis)
    w = np.asarray(w, dtype=float)[..., None]
    pos = np.maximum(w, 0.0)
    neg = np.minimum(w, 0.0)
    a_p, b_p = np.maximum(lo, 0.0), np.minimum(hi, pos)
    a_n, b_n = np.maximum(lo, neg), np.minimum(hi, 0.0)
    if power == 0:
        h = v_axis.spacing
        return _overlap(lo, hi, 0.0, pos, h) - _overlap(lo, hi, neg, 0.0, h)
    if power == 1:
        ip = np.where(b_p > a_p, 0.5 * (b_p**2 - a_p**2), 0.0)
        ineg = np.where(b_n > a_n, 0.5 * (b_n**2 - a_n**2), 0.0)
        return ip - ineg
    raise ValueError("power must be 0 or 1")


def _check_span(v_axis: Axis, lo: float, hi: float):
    edges_lo = v_axis.coords()[0] - 0.5 * v_axis.spacing
    edges_hi = v_axis.coords()[-1] + 0.5 * v_axis.spacing
    if lo < edges_lo or hi > edges_hi:
        raise ValueError(f"v grid [{edges_lo:.3g}, {edges_hi:.3g}] does not contain [{lo:.3g}, {hi:.3g}]")


def maxwellian_burgers(w, v_axis: Axis) -> Field:
    """Cell averages of chi(w; v) on an (x, v) grid (or a v grid for scalar w)."""
    state = w if isinstance(w, ConservationState) else None
    vals = state.w if state is not None else np.atleast_1d(np.asarray(w, dtype=float))
    bound = float(np.abs(vals).max())
    _check_span(v_axis, -bound - 1, bound + 1)
    f = _chi_cells(vals, v_axis) / v_axis.spacing
    if state is not None:
        return Field(PhaseGrid((state.axis, v_axis)), f)
    if np.ndim(w) == 0:
        return Field(PhaseGrid((v_axis,)), f[0])
    raise ValueError("pass a ConservationState for spatially varying w")


def isentropic_constant(theta: float) -> float:
    """C_theta with int C_theta [1 - z^2]_+^m dz = 1, m = (1 - theta)/(2 theta)."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    m = (1 - theta) / (2 * theta)
    return 1.0 / special.beta(0.5, m + 1)


def maxwellian_isentropic(rho, u, theta: float, v_axis: Axis) -> np.ndarray:
    """Cell averages of C_theta [rho^{2 theta} - (v - u)^2]_+^m, m = (1 - theta)/(2 theta).

    Cell integrals use the symmetric Beta distribution function, so the zeroth
    moment is exact.  ``rho`` and ``u`` may be arrays over x; the v axis is last.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    c = rho**theta
    _check_span(v_axis, float(np.min(u - c)), float(np.max(u + c)))
    m = (1 - theta) / (2 * theta)
    lo, hi = _cell_edges(v_axis)
    rho_, u_, c_ = rho[..., None], u[..., None], c[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        zl = np.clip((lo - u_) / c_, -1.0, 1.0)
        zh = np.clip((hi - u_) / c_, -1.0, 1.0)
        cdf = lambda z: special.betainc(m + 1, m + 1, 0.5 * (z + 1))
        cells = rho_ * (cdf(zh) - cdf(zl))
    cells = np.where(rho_ > 0, cells, 0.0)
    return cells / v_axis.spacing


# -- defect measure ------------------------------------------------------------------


@dataclass
class DefectField:
    v_axis: Axis
    min: float
    max: float
    mass: float
    boundary_residue: float
    snapshots: dict = dc_field(default_factory=dict)  # step -> mu at upper cell edges, shape (Nx, Nv)
    rows: list = dc_field(default_factory=list)

    @property
    def positive(self) -> bool:
        return self.min >= -1e-6 * max(self.max, 0.0)


def default_v_axis(bound: float, n: int = 256) -> Axis:
    # upper cell edge is L/2 - h/2, so leave one spare cell
    return Axis("v", 2 * (bound + 1) * n / (n - 2), n)


def defect_measure(states: list, u: RoughTransport | None, v_axis: Axis | None = None, keep=()) -> DefectField:
    """mu(v) = int_{-inf}^v [d_t f + d_x((v' + u) f)] dv' for the lifted trajectory.

    Forward time differences and the solver's upwind stencils; mu is reported at
    upper cell edges.  Requires the full step-by-step trajectory.
    """
    if len(states) < 2:
        raise ValueError("need at least two states")
    axis = states[0].axis
    dx = axis.spacing
    times = np.array([s.t for s in states])
    dts = np.diff(times)
    bound = max(float(np.abs(s.w).max()) for s in states)
    v_axis = v_axis or default_v_axis(bound)
    _check_span(v_axis, -bound - 1, bound + 1)
    h = v_axis.spacing
    keep = set(keep)
    mu_min, mu_max, mass, residue = math.inf, -math.inf, 0.0, 0.0
    snaps, rows = {}, []
    m_now = _chi_cells(states[0].w, v_axis)
    for n in range(len(states) - 1):
        w, dt = states[n].w, dts[n]
        m_next = _chi_cells(states[n + 1].w, v_axis)
        vflux_i = _chi_cells(np.maximum(w, 0.0), v_axis, 1)
        vflux_ip = _chi_cells(np.minimum(np.roll(w, -1), 0.0), v_axis, 1)
        phi = vflux_i + vflux_ip
        if u is not None:
            un = u.at(states[n].t - states[0].t)
            uh = (0.5 * (un + np.roll(un, -1)))[:, None]
            phi = phi + np.maximum(uh, 0.0) * m_now + np.minimum(uh, 0.0) * np.roll(m_now, -1, axis=0)
        resid = (m_next - m_now) / dt + (phi - np.roll(phi, 1, axis=0)) / dx
        mu = np.cumsum(resid, axis=1)
        top = np.abs(mu[:, -1]).max()
        scale = max(np.abs(mu).max(), 1e-300)
        residue = max(residue, top / scale if scale > 1e-300 else 0.0)
        mu_min = min(mu_min, float(mu.min()))
        mu_max = max(mu_max, float(mu.max()))
        step_mass = float(mu.sum() * h * dx * dt)
        mass += step_mass
        rows.append({"t": float(times[n]), "mass": states[n].mass, "TV": states[n].tv,
                     "min_mu": float(mu.min()), "mu_mass": step_mass})
        if n in keep:
            snaps[n] = mu
        m_now = m_next
    return DefectField(v_axis, mu_min, mu_max, mass, residue, snaps, rows)


# -- regularity ----------------------------------------------------------------------


def trajectory_field(states: list, slices: int | None = None) -> Field:
    """w on a (t, x) grid, uniformly subsampled to a power of two of time slices and windowed in t.

    The C-infinity window localises the non-periodic time interval.
    """
    n_all = len(states)
    if slices is None:
        slices = 1 << int(math.floor(math.log2(n_all)))
        slices = min(slices, max(states[0].axis.size, 64))
    if slices < 64 or n_all < slices:
        raise ValueError(f"need at least 64 time slices, have {n_all}")
    idx = np.round(np.linspace(0, n_all - 1, slices)).astype(int)
    w = np.stack([states[i].w for i in idx])
    duration = states[-1].t - states[0].t
    t_axis = Axis("t", duration * slices / max(slices - 1, 1), slices)
    grid = PhaseGrid((t_axis, states[0].axis))
    window = bump(np.linspace(-1, 1, slices + 2)[1:-1], 1.0)
    return Field(grid, w * window[:, None])


def regularity_report(states: list, u: RoughTransport | None = None, slices: int | None = None) -> dict:
    """Shell-fit exponent of w over (t, x) against the lower bound min{s0, 1/3}."""
    field = trajectory_field(states, slices)
    fit = estimate_exponent(field, ("t", "x"))
    s0 = u.s0 if u is not None else math.inf
    threshold = min(s0, 1.0 / 3.0) - 0.05
    return {
        "s0": s0,
        "s_measured": fit.s_est,
        "stderr": fit.stderr,
        "clamped": fit.clamped,
        "threshold": threshold,
        "pass": bool(fit.s_est >= threshold),
        "slices": field.grid.shape[0],
    }

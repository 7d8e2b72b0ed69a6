"""
Fourier-side solver for  d_t f + v d_x f + D_v^sigma f + d_x(u f) = S  on an (x, v) box.

Free transport acts on the spectrum as a shear, ``f_hat(xi, eta) <- f_hat(xi, eta + dt xi)``.
When ``dt * (2 pi / L_x)`` is an integer multiple of ``2 pi / L_v`` the shear maps
the lattice onto itself and becomes an index shift, so the linear step

    f_hat(xi, eta) <- f_hat(xi, eta + dt xi) * exp(-int_0^dt |eta + s xi|^sigma ds)

is exact.  Sources enter through the trapezoidal Duhamel rule and a macroscopic
velocity ``u(t, x)`` through Strang splitting with a first-order upwind step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable

import numpy as np

from .kernel import KernelSpec, kernel_fourier
from .spectral import Field, PhaseGrid, forward, inverse

SHEAR_TOL = 1e-9


class ConfigurationError(ValueError):
    pass


class CFLError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def _check_grid(grid: PhaseGrid):
    if grid.labels != ("x", "v"):
        raise ConfigurationError(f"solver grids are (x, v); got axes {grid.labels}")


def shear_shift(grid: PhaseGrid, dt: float) -> int:
    """Number of eta-lattice steps per unit x-mode number for a step ``dt``."""
    _check_grid(grid)
    lx, lv = grid.axes[0].extent, grid.axes[1].extent
    n = dt * lv / lx
    if n <= 0 or abs(n - round(n)) > SHEAR_TOL * max(1.0, abs(n)):
        allowed = ", ".join(f"{k * lx / lv:.6g}" for k in range(1, 6))
        raise ConfigurationError(
            f"time step {dt} does not map the eta lattice onto itself; "
            f"admissible steps are integer multiples of L_x/L_v = {lx / lv:.6g} ({allowed}, ...)"
        )
    return int(round(n))


class ShearPropagator:
    """Exact one-step solution operator on spectral coefficients."""

    def __init__(self, grid: PhaseGrid, dt: float, sigma: float, dissipation: bool = True, n_q: int = 12):
        self.grid = grid
        self.dt = dt
        self.shift = shear_shift(grid, dt)
        nx, nv = grid.shape
        kx = grid.axes[0].mode_numbers()
        self.index = (np.arange(nv)[None, :] + self.shift * kx[:, None]) % nv
        if dissipation:
            xi = grid.frequencies(0)
            eta = grid.frequencies(1)
            xi, eta = np.broadcast_arrays(xi, eta)
            self.weight = kernel_fourier(KernelSpec(sigma, n_q=n_q), dt, xi, eta)
        else:
            self.weight = None

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        out = np.take_along_axis(coeffs, self.index, axis=1)
        if self.weight is not None:
            out = out * self.weight
        return out


@lru_cache(maxsize=32)
def _propagator(grid, dt, sigma, dissipation, n_q):
    return ShearPropagator(grid, dt, sigma, dissipation, n_q)


def step_exact_linear(f: Field, dt: float, sigma: float, dissipation: bool = True, n_q: int = 12) -> Field:
    """Advance ``f`` by ``dt`` under free transport and (optionally) D_v^sigma damping."""
    prop = _propagator(f.grid, float(dt), float(sigma), bool(dissipation), int(n_q))
    out = Field(f.grid, prop(f.to_spectral().values), "spectral")
    return out if f.space == "spectral" else out.to_physical()


def advect_u(f: Field, u, dt: float, flux: str = "u") -> Field:
    """Conservative upwind step for d_t f + d_x(a f) = 0 with a = u(x) or v + u(x).

    Interface speeds are neighbour averages; the update telescopes, so the sum
    of f over the grid is unchanged up to roundoff.
    """
    grid = f.grid
    _check_grid(grid)
    vals = f.to_physical().values
    u = np.broadcast_to(np.asarray(u, dtype=float).reshape(-1, 1), (grid.shape[0], 1))
    a = u + (grid.coords(1) if flux == "v+u" else 0.0)
    if flux not in ("u", "v+u"):
        raise ValueError("flux must be 'u' or 'v+u'")
    a = np.broadcast_to(a, grid.shape)
    dx = grid.axes[0].spacing
    a_half = 0.5 * (a + np.roll(a, -1, axis=0))
    cfl = float(np.abs(a_half).max()) * dt / dx
    if cfl > 0.9:
        raise CFLError(f"upwind step violates CFL: {cfl:.3g} > 0.9; reduce dt below {0.9 * dx / np.abs(a_half).max():.3g}")
    flux_half = np.maximum(a_half, 0.0) * vals + np.minimum(a_half, 0.0) * np.roll(vals, -1, axis=0)
    new = vals - dt / dx * (flux_half - np.roll(flux_half, 1, axis=0))
    out = Field(grid, new)
    return out if f.space == "physical" else out.to_spectral()


@dataclass
class CauchyProblem:
    """Data of a time-marched solve on [t0, t0 + T] with ``steps`` equal steps.

    ``source(t)`` and ``u(t)`` are samplers returning arrays (or Fields) on the
    (x, v) grid and on the x axis respectively.
    """

    grid: PhaseGrid
    sigma: float
    T: float
    steps: int
    f0: Field | None = None
    source: Callable | None = None
    u: Callable | None = None
    dissipation: bool = True
    flux: str = "u"
    n_q: int = 12
    t0: float = 0.0

    def __post_init__(self):
        _check_grid(self.grid)
        if self.steps < 1 or not self.T > 0:
            raise ConfigurationError("need T > 0 and at least one step")
        shear_shift(self.grid, self.dt)
        if self.f0 is not None and self.f0.grid != self.grid:
            raise ConfigurationError("initial datum lives on a different grid")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)

    def source_coeffs(self, t: float) -> np.ndarray:
        if self.source is None:
            return np.zeros(self.grid.shape, dtype=complex)
        s = self.source(t)
        if isinstance(s, Field):
            return s.to_spectral().values
        return forward(np.broadcast_to(np.asarray(s, dtype=complex), self.grid.shape))

    def u_values(self, t: float) -> np.ndarray:
        if self.u is None:
            return np.zeros(self.grid.shape[0])
        u = self.u(t)
        if isinstance(u, Field):
            u = u.real
        return np.broadcast_to(np.asarray(u, dtype=float).ravel(), (self.grid.shape[0],))


@dataclass
class Trajectory:
    grid: PhaseGrid
    times: np.ndarray
    snapshots: list  # spectral coefficient arrays
    diagnostics: list = dc_field(default_factory=list)

    def field(self, j: int) -> Field:
        return Field(self.grid, self.snapshots[j], "spectral")

    @property
    def final(self) -> Field:
        return self.field(-1)


def _diagnostics(grid: PhaseGrid, t: float, c: np.ndarray, sigma: float) -> dict:
    eta = np.abs(grid.frequencies(1))
    p = np.abs(c) ** 2
    return {
        "t": float(t),
        "mass": float((c[0, 0] * grid.volume).real),
        "L2": float(math.sqrt(grid.volume * p.sum())),
        "HsigmaV": float(math.sqrt(grid.volume * np.sum(eta ** (2 * sigma) * p))),
    }


def solve_cauchy(problem: CauchyProblem) -> Trajectory:
    """March the problem; every step is stored (snapshots are spectral)."""
    grid, dt = problem.grid, problem.dt
    prop = _propagator(grid, float(dt), float(problem.sigma), bool(problem.dissipation), int(problem.n_q))
    times = problem.times()
    c = np.zeros(grid.shape, dtype=complex) if problem.f0 is None else problem.f0.to_spectral().values.copy()
    snaps = [c]
    diags = [_diagnostics(grid, times[0], c, problem.sigma)]
    s_prev = problem.source_coeffs(times[0])
    for j in range(problem.steps):
        t, t_next = times[j], times[j + 1]
        if problem.u is not None:
            half = Field(grid, c, "spectral")
            c = advect_u(half, problem.u_values(t), 0.5 * dt, problem.flux).to_spectral().values
        s_next = problem.source_coeffs(t_next)
        c = prop(c + 0.5 * dt * s_prev) + 0.5 * dt * s_next
        if problem.u is not None:
            half = Field(grid, c, "spectral")
            c = advect_u(half, problem.u_values(t_next), 0.5 * dt, problem.flux).to_spectral().values
        s_prev = s_next
        snaps.append(c)
        diags.append(_diagnostics(grid, t_next, c, problem.sigma))
    return Trajectory(grid, times, snaps, diags)


def fk_source(g: Field, f: Field, alpha: float, beta: float, sigma: float) -> Field:
    """Right side D_x^alpha D_v^beta g + D_v^sigma f of the rewritten kinetic equation."""
    grid = g.grid
    xi = np.abs(grid.frequencies(0))
    eta = np.abs(grid.frequencies(1))
    sym_g = (xi**alpha if alpha else 1.0) * (eta**beta if beta else 1.0)
    c = sym_g * g.to_spectral().values + eta**sigma * f.to_spectral().values
    return Field(grid, c, "spectral")


def pde_residual(traj: Trajectory, problem: CauchyProblem) -> float:
    """L^2 over interior times of the centred-difference residual of the equation."""
    if len(traj.snapshots) < 3:
        raise ValueError("residual needs at least three snapshots")
    grid = traj.grid
    xi = grid.frequencies(0)
    eta = np.abs(grid.frequencies(1))
    v = grid.coords(1)
    dt = traj.times[1] - traj.times[0]
    total = 0.0
    for j in range(1, len(traj.snapshots) - 1):
        c = traj.snapshots[j]
        dtf = (traj.snapshots[j + 1] - traj.snapshots[j - 1]) / (2 * dt)
        phys = inverse(c)
        transport = forward(v * inverse(1j * xi * c))
        r = dtf + transport - problem.source_coeffs(traj.times[j])
        if problem.dissipation:
            r = r + eta**problem.sigma * c
        if problem.u is not None:
            u = problem.u_values(traj.times[j])[:, None]
            r = r + 1j * xi * forward(u * phys)
        total += dt * grid.volume * float(np.sum(np.abs(r) ** 2))
    return math.sqrt(total)


@dataclass
class EnergyReport:
    ratio: float
    f_norm: float
    dv_norm: float
    source_norm: float
    R: float
    order: float

    def as_dict(self):
        return dict(self.__dict__)


def _time_weights(n: int, dt: float) -> np.ndarray:
    w = np.full(n, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def energy_inequality_check(traj: Trajectory, problem: CauchyProblem, R: float) -> EnergyReport:
    """(||f|| + ||D_v^s f||) / (R ||S||_{L^2 H_v^{-s}}) for dissipation (-Laplace_v)^s = D_v^{2s}.

    The problem's dissipation order is ``2 s``; u must be constant in x and the
    initial datum zero.
    """
    grid = traj.grid
    s = 0.5 * problem.sigma
    if problem.f0 is not None and np.abs(problem.f0.values).max() > 0:
        raise PreconditionError("the energy estimate is stated for zero initial data")
    if problem.u is not None:
        for t in traj.times:
            u = problem.u_values(t)
            if np.ptp(u) > 1e-12 * max(1.0, np.abs(u).max()):
                raise PreconditionError("u must be divergence free (constant in x in one dimension)")
    eta2 = grid.frequencies(1) ** 2
    w = _time_weights(len(traj.times), traj.times[1] - traj.times[0])
    nf = nd = ns = 0.0
    for wj, t, c in zip(w, traj.times, traj.snapshots):
        p = np.abs(c) ** 2
        nf += wj * grid.volume * p.sum()
        nd += wj * grid.volume * np.sum(eta2**s * p)
        sc = problem.source_coeffs(t)
        ns += wj * grid.volume * np.sum((1 + eta2) ** (-s) * np.abs(sc) ** 2)
    nf, nd, ns = math.sqrt(nf), math.sqrt(nd), math.sqrt(ns)
    ratio = 0.0 if ns == 0 else (nf + nd) / (R * ns)
    return EnergyReport(ratio, nf, nd, ns, R, problem.sigma)

"""
Fundamental solution of the fractional Kolmogorov equation

    d_t f + v . grad_x f + D_v^sigma f = S

evaluated through its Fourier symbol.  With the drift symbol

    psi(xi, eta) = int_0^1 |theta xi - eta|^sigma dtheta

the profile has transform ``exp(-psi(xi, eta))``.  Solving the equation mode by
mode in the ``exp(-i z.zeta)`` convention gives the propagator

    G_hat(t, xi, eta) = exp(-int_0^t |eta + s xi|^sigma ds) = exp(-t psi(t xi, -eta)),

i.e. the profile reflected in eta.  ``kernel_fourier`` returns the propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .exponents import kernel_decay_power
from .spectral import Field, MixedNormSpec, PhaseGrid, inverse, mixed_lebesgue_norm

GUARD = 1e-12
_CHUNK = 8192


class ResolutionError(ValueError):
    """The frequency box does not contain the numerical support of the symbol."""

    def __init__(self, message, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion


@dataclass(frozen=True)
class KernelSpec:
    sigma: float
    d: int = 1
    n_q: int = 12

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("kernel dimension must be 1 or 2")
        if not 0 < self.sigma <= 4:
            raise ValueError(f"sigma must lie in (0, 4], got {self.sigma}")
        if self.n_q < 8:
            raise ValueError("at least 8 Gauss-Legendre nodes per panel are required")

    @property
    def polynomial(self) -> bool:
        """Even-integer orders make the integrand a polynomial in theta."""
        s = float(self.sigma)
        return s == round(s) and int(round(s)) % 2 == 0 and s + 1 <= 2 * self.n_q

    @property
    def levels(self) -> int:
        # innermost panel width 2^-J keeps the endpoint-singular part below ~2^-52
        return int(math.ceil(40.0 / (1.0 + float(self.sigma)))) + 2


# -- drift symbol ----------------------------------------------------------------


def _graded_rule(n_q: int, levels: int):
    """Nodes/weights on [0, 1] clustered geometrically toward 0."""
    x, w = np.polynomial.legendre.leggauss(n_q)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    nodes, weights = [], []
    hi = 1.0
    for _ in range(levels):
        lo = 0.5 * hi
        nodes.append(lo + (hi - lo) * x)
        weights.append((hi - lo) * w)
        hi = lo
    nodes.append(hi * x)
    weights.append(hi * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _as_vectors(arr, d):
    a = np.asarray(arr, dtype=float)
    if d == 1:
        return a[..., None]
    if a.shape[-1:] != (2,):
        raise ValueError("d = 2 frequencies need a trailing axis of length 2")
    return a


def drift_symbol(spec: KernelSpec, xi, eta) -> np.ndarray:
    """psi(xi, eta) by Gauss-Legendre quadrature split at the kink theta*.

    ``theta* = clamp(xi.eta / |xi|^2, 0, 1)`` is where ``|theta xi - eta|`` is
    smallest; each side is integrated on panels graded toward theta*.
    """
    d, sigma = spec.d, float(spec.sigma)
    X = _as_vectors(xi, d)
    E = _as_vectors(eta, d)
    X, E = np.broadcast_arrays(X, E)
    shape = X.shape[:-1]
    X = X.reshape(-1, d)
    E = E.reshape(-1, d)
    out = np.empty(X.shape[0])

    if spec.polynomial:
        tq, wq = np.polynomial.legendre.leggauss(spec.n_q)
        tq, wq = 0.5 * (tq + 1.0), 0.5 * wq
        for s in range(0, X.shape[0], _CHUNK):
            xs, es = X[s : s + _CHUNK], E[s : s + _CHUNK]
            diff = tq[None, :, None] * xs[:, None, :] - es[:, None, :]
            out[s : s + _CHUNK] = (np.sum(diff * diff, axis=-1) ** (0.5 * sigma)) @ wq
        return out.reshape(shape)

    u, wu = _graded_rule(spec.n_q, spec.levels)
    for s in range(0, X.shape[0], _CHUNK):
        xs, es = X[s : s + _CHUNK], E[s : s + _CHUNK]
        x2 = np.sum(xs * xs, axis=-1)
        safe = np.where(x2 > 0, x2, 1.0)
        ts = np.clip(np.sum(xs * es, axis=-1) / safe, 0.0, 1.0)
        ts = np.where(x2 > 0, ts, 0.0)
        acc = np.zeros(xs.shape[0])
        # left piece [0, ts] as ts - ts*u, right piece [ts, 1] as ts + (1-ts)*u
        for length, sign in ((ts, -1.0), (1.0 - ts, 1.0)):
            theta = ts[:, None] + sign * length[:, None] * u[None, :]
            diff = theta[..., None] * xs[:, None, :] - es[:, None, :]
            vals = np.sum(diff * diff, axis=-1) ** (0.5 * sigma)
            acc += length * (vals @ wu)
        out[s : s + _CHUNK] = acc
    return out.reshape(shape)


def profile_symbol(spec: KernelSpec, xi, eta) -> np.ndarray:
    """Fourier transform of the self-similar profile, exp(-psi(xi, eta))."""
    return np.exp(-drift_symbol(spec, xi, eta))


def kernel_fourier(spec: KernelSpec, t: float, xi, eta) -> np.ndarray:
    """G_hat(t, xi, eta) = exp(-t psi(t xi, -eta)); equals 1 at the origin."""
    if not t > 0:
        raise ValueError("the fundamental solution vanishes for t <= 0; need t > 0")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return np.exp(-t * drift_symbol(spec, t * xi, -eta))


# -- real space ------------------------------------------------------------------


def _lattice(grid: PhaseGrid, d: int):
    xs = grid.indices("x")
    vs = grid.indices("v")
    if len(xs) != d or len(vs) != d or grid.ndim != 2 * d:
        raise ValueError(f"kernel grid must have exactly {d} x axes and {d} v axes")
    xi = np.stack(np.broadcast_arrays(*[grid.frequencies(i) for i in xs]), axis=-1)
    eta = np.stack(np.broadcast_arrays(*[grid.frequencies(i) for i in vs]), axis=-1)
    xi, eta = np.broadcast_arrays(xi, eta)
    if d == 1:
        return xi[..., 0], eta[..., 0]
    return xi, eta


def _edge_mask(grid: PhaseGrid) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for i, ax in enumerate(grid.axes):
        k = grid.mode_numbers(i)
        edge = np.abs(k) >= ax.size // 2 - 1
        mask |= np.broadcast_to(edge, grid.shape)
    return mask


def _suggest_grid(spec: KernelSpec, t: float, grid: PhaseGrid) -> dict:
    """Sizes that would push the symbol below the guard on the box boundary."""
    target = -math.log(GUARD)
    sigma = float(spec.sigma)
    # the pointwise lower bounds A psi >= |xi|^s and B psi >= |eta|^s
    a, b, _ = appendix_constants(sigma)
    eta_max = (b * target / t) ** (1 / sigma)
    xi_max = (a * target / t) ** (1 / sigma) / t
    out = {}
    for ax in grid.axes:
        need = (xi_max if ax.label == "x" else eta_max) * ax.extent / math.pi + 2
        out[ax.label] = (ax.extent, 1 << max(3, int(math.ceil(math.log2(max(need, 8))))))
    return out


def kernel_spectrum(spec: KernelSpec, t: float, grid: PhaseGrid, source=None, guard: bool = True) -> np.ndarray:
    """Fourier coefficients of G(t) on ``grid`` (FFT order), optionally for a shifted source."""
    xi, eta = _lattice(grid, spec.d)
    ghat = kernel_fourier(spec, t, xi, eta)
    if guard:
        worst = float(ghat[_edge_mask(grid)].max())
        if worst >= GUARD:
            sug = _suggest_grid(spec, t, grid)
            raise ResolutionError(
                f"kernel symbol reaches {worst:.3g} on the frequency-box boundary at t={t}; "
                f"refine to about {sug}",
                sug,
            )
    coeffs = ghat / grid.volume
    if source is not None:
        x0, v0 = (np.atleast_1d(np.asarray(c, dtype=float)) for c in source)
        if spec.d == 1:
            xi_v, eta_v = xi[..., None], eta[..., None]
        else:
            xi_v, eta_v = xi, eta
        # a source at (x0, v0) sits at x0 + t v0 after free transport
        phase = np.sum(xi_v * (x0 + t * v0), axis=-1) + np.sum(eta_v * v0, axis=-1)
        coeffs = coeffs * np.exp(-1j * phase)
    return coeffs


def kernel_realspace(spec: KernelSpec, t: float, grid: PhaseGrid, source=None, guard: bool = True) -> Field:
    """Samples of G(t, x, v) on ``grid``; mass sum(G) dx dv equals G_hat(t,0,0) = 1."""
    coeffs = kernel_spectrum(spec, t, grid, source, guard)
    vals = inverse(coeffs)
    scale = max(float(np.abs(vals.real).max()), 1e-300)
    residue = float(np.abs(vals.imag).max()) / scale
    if residue > 1e-10:
        raise ArithmeticError(f"imaginary residue {residue:.3g} in a real kernel")
    return Field(grid, vals.real)


def gaussian_kernel(t: float, x, v) -> np.ndarray:
    """Closed-form sigma = 2 kernel: covariance [[2t^3/3, t^2], [t^2, 2t]]."""
    cxx, cxv, cvv = 2 * t**3 / 3, t**2, 2 * t
    det = cxx * cvv - cxv**2
    q = (cvv * x * x - 2 * cxv * x * v + cxx * v * v) / det
    return np.exp(-0.5 * q) / (2 * np.pi * math.sqrt(det))


# -- scans and checks ------------------------------------------------------------


@dataclass
class ScanResult:
    rows: list
    slope: float
    predicted: float
    tolerance: float
    passed: bool = dc_field(init=False)

    def __post_init__(self):
        self.passed = abs(self.slope - self.predicted) <= self.tolerance

    def summary(self):
        return {"slope": self.slope, "predicted": self.predicted, "tolerance": self.tolerance, "pass": self.passed}


def derivative_norm(spec, t, grid, alpha0, beta0, p0, q0) -> float:
    """||D_x^alpha0 D_v^beta0 G(t)|| in L^p0_x L^q0_v."""
    coeffs = kernel_spectrum(spec, t, grid)
    xi, eta = _lattice(grid, spec.d)
    if spec.d == 2:
        xi = np.linalg.norm(xi, axis=-1)
        eta = np.linalg.norm(eta, axis=-1)
    sym = np.ones(grid.shape)
    if alpha0:
        sym = sym * np.abs(xi) ** alpha0
    if beta0:
        sym = sym * np.abs(eta) ** beta0
    vals = inverse(coeffs * sym)
    return mixed_lebesgue_norm(Field(grid, vals.real), MixedNormSpec(p0, q0))


def scaling_norm_scan(
    spec: KernelSpec,
    alpha0: float,
    beta0: float,
    p0,
    q0,
    times: Sequence[float],
    grid: PhaseGrid,
    tolerance: float = 0.02,
) -> ScanResult:
    """Fit the power of t in the kernel's mixed norm and compare with the predicted exponent."""
    times = [float(t) for t in times]
    if len(times) < 4:
        raise ValueError("a scaling scan needs at least 4 times")
    ratios = np.diff(np.log(times))
    if np.ptp(ratios) > 1e-9 * max(1.0, abs(ratios).max()) or ratios.min() <= 0:
        raise ValueError("scan times must form an increasing geometric sequence")
    predicted = float(kernel_decay_power(spec.d, spec.sigma, alpha0, beta0, p0, q0))
    norms = [derivative_norm(spec, t, grid, alpha0, beta0, p0, q0) for t in times]
    lt, ln = np.log(times), np.log(norms)
    slope = float(np.polyfit(lt, ln, 1)[0])
    c0 = float(np.mean(ln - predicted * lt))
    rows = [
        {"t": t, "norm": n, "predicted_power": predicted, "slack": float(math.log(n) - (c0 + predicted * math.log(t)))}
        for t, n in zip(times, norms)
    ]
    return ScanResult(rows, slope, predicted, tolerance)


def appendix_constants(sigma: float):
    """(A, B, c_sigma) with A psi >= |xi|^s, B psi >= |eta|^s and c = 2^(-s/2)/B."""
    a = 2**sigma * (1 + sigma)
    b = 2**sigma * (1 + 2**sigma * (1 + sigma))
    return a, b, 2 ** (-sigma / 2) / b


@dataclass
class BoundsReport:
    sigma: float
    nodes: int
    worst_xi_slack: float
    worst_eta_slack: float
    worst_envelope_slack: float
    violations: int
    c_sigma: float

    @property
    def passed(self):
        return self.violations == 0

    def as_dict(self):
        out = dict(self.__dict__)
        out["pass"] = self.passed
        return out


def appendix_bounds_check(spec: KernelSpec, xi, eta, rtol: float = 1e-12) -> BoundsReport:
    """Check the two pointwise lower bounds on psi and the exponential envelope.

    Slacks are relative, ``(lhs - rhs) / lhs``; a node counts as a violation
    when its slack is below ``-rtol``.  The origin, where every side is 0, is
    reported with slack 0.
    """
    sigma = float(spec.sigma)
    a, b, c = appendix_constants(sigma)
    psi = drift_symbol(spec, xi, eta)
    X = _as_vectors(xi, spec.d)
    E = _as_vectors(eta, spec.d)
    nx = np.linalg.norm(X, axis=-1)
    ne = np.linalg.norm(E, axis=-1)
    nz = np.sqrt(nx**2 + ne**2)

    def slack(lhs, rhs):
        lhs, rhs = np.broadcast_arrays(lhs, rhs)
        out = np.zeros(lhs.shape)
        pos = lhs > 0
        out[pos] = (lhs[pos] - rhs[pos]) / lhs[pos]
        out[~pos] = np.where(rhs[~pos] > 0, -np.inf, 0.0)
        return out

    s1 = slack(a * psi, nx**sigma)
    s2 = slack(b * psi, ne**sigma)
    # exp(-psi) <= exp(-c |zeta|^sigma)  <=>  psi >= c |zeta|^sigma
    s3 = slack(psi, c * nz**sigma)
    bad = int(np.sum(s1 < -rtol) + np.sum(s2 < -rtol) + np.sum(s3 < -rtol))
    off = nz > 0
    if not off.any():
        return BoundsReport(sigma, int(psi.size), 0.0, 0.0, 0.0, bad, c)
    worst = [float(s[off].min()) for s in (s1, s2, s3)]
    return BoundsReport(sigma, int(psi.size), *worst, bad, c)


def frequency_lattice(n: int = 256, spacing: float = 0.25):
    """Square (xi, eta) lattice of n^2 nodes centred on the origin."""
    k = spacing * (np.arange(n) - n // 2)
    return np.meshgrid(k, k, indexing="ij")


@dataclass
class MomentReport:
    a: float
    m: tuple
    coarse: float
    fine: float
    rel_change: float

    @property
    def passed(self):
        return math.isfinite(self.fine) and self.rel_change < 0.05


def profile_realspace(spec: KernelSpec, grid: PhaseGrid, guard: bool = True) -> Field:
    """Samples of the profile whose transform is exp(-psi(xi, eta))."""
    xi, eta = _lattice(grid, spec.d)
    ghat = profile_symbol(spec, xi, eta)
    if guard:
        worst = float(ghat[_edge_mask(grid)].max())
        if worst >= GUARD:
            raise ResolutionError(f"profile symbol reaches {worst:.3g} on the frequency-box boundary")
    return Field(grid, inverse(ghat / grid.volume).real)


def weighted_moment(spec: KernelSpec, grid: PhaseGrid, a: float, m: Sequence[int]) -> float:
    """sum <(x,v)>^a |d^m G| dx dv for the profile, with spectral derivatives."""
    xi, eta = _lattice(grid, spec.d)
    ghat = profile_symbol(spec, xi, eta)
    worst = float(ghat[_edge_mask(grid)].max())
    if worst >= GUARD:
        raise ResolutionError(f"profile symbol reaches {worst:.3g} on the frequency-box boundary")
    ghat = ghat / grid.volume
    freqs = [grid.frequencies(i) for i in range(grid.ndim)]
    sym = np.ones(grid.shape, dtype=complex)
    for f, order in zip(freqs, m):
        if order:
            sym = sym * (1j * f) ** order
    vals = inverse(ghat * sym).real
    r2 = sum(c**2 for c in grid.mesh())
    return float(np.sum((1 + r2) ** (a / 2) * np.abs(vals)) * grid.cell_volume)


def weighted_moment_check(spec: KernelSpec, a: float, m: Sequence[int], extent: float = 40.0, n: int = 256) -> MomentReport:
    """Compare the weighted moment on a grid and on one with doubled window and resolution."""
    if a >= spec.sigma:
        raise ValueError("weighted integrability needs a < sigma")
    coarse_grid = PhaseGrid.make(x=(extent, n), v=(extent, n))
    fine_grid = PhaseGrid.make(x=(2 * extent, 4 * n), v=(2 * extent, 4 * n))
    m = tuple(m) + (0,) * (2 - len(m))
    coarse = weighted_moment(spec, coarse_grid, a, m)
    fine = weighted_moment(spec, fine_grid, a, m)
    return MomentReport(a, m, coarse, fine, abs(fine - coarse) / abs(fine))

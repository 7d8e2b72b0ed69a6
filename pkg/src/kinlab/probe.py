"""Sobolev-exponent estimation from spectral shell energies.

Shells are annuli in integer mode-index space, ``2^(j/b) <= |n| < 2^((j+1)/b)``
with ``b`` bands per octave (``b = 1`` gives the usual dyadic shells).  If the
shell energies behave like ``rho^(d - 2 gamma)`` the field sits in ``H^s`` for
every ``s < gamma - d/2``; the fit returns that critical index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Field

DEFAULT_CAP = 2.0
FIT_LOW = 4.0
FIT_TOP_FRACTION = 0.75
ENERGY_FLOOR = 1e-26


class ProbeError(ValueError):
    """Not enough resolved shells to fit an exponent."""


@dataclass(frozen=True)
class ShellSpectrum:
    axes: tuple
    bands: int
    edges: np.ndarray  # lower radius of each shell
    energies: np.ndarray
    counts: np.ndarray  # lattice points per shell
    mean_log_radius: np.ndarray
    zero_energy: float
    total: float
    max_radius: float  # N_min / 2 over the probed axes

    @property
    def dimension(self) -> int:
        return len(self.axes)

    def rows(self):
        return [
            (j, float(r), float(e), int(c))
            for j, (r, e, c) in enumerate(zip(self.edges, self.energies, self.counts))
        ]


@dataclass(frozen=True)
class ExponentFit:
    s_est: float
    stderr: float
    fit_range: tuple
    shells_used: int
    clamped: bool

    def as_dict(self):
        return {
            "s_est": self.s_est,
            "stderr": self.stderr,
            "fit_range": list(self.fit_range),
            "shells_used": self.shells_used,
            "clamped": self.clamped,
        }


def _radius(grid, idx):
    r2 = np.zeros([1] * grid.ndim)
    for i in idx:
        r2 = r2 + grid.mode_numbers(i).astype(float) ** 2
    return np.sqrt(r2)


def shell_energies(field: Field, axes, bands: int = 1) -> ShellSpectrum:
    """Partition ||f||^2 into geometric shells over the axes labelled in ``axes``."""
    grid = field.grid
    idx = grid.indices(axes)
    power = grid.volume * np.abs(field.to_spectral().values) ** 2
    other = tuple(i for i in range(grid.ndim) if i not in idx)
    if other:
        power = power.sum(axis=other, keepdims=True)
    rho = np.broadcast_to(_radius(grid, idx), power.shape).ravel()
    power = power.ravel()
    zero = float(power[rho == 0].sum())
    rmax_all = float(rho.max())
    nshell = int(math.floor(bands * math.log2(rmax_all))) + 1
    j = np.full(rho.shape, -1, dtype=np.int64)
    nz = rho > 0
    # small offset guards exact powers of two against log2 roundoff
    j[nz] = np.floor(bands * np.log2(rho[nz]) + 1e-9).astype(np.int64)
    energies = np.bincount(j[nz], weights=power[nz], minlength=nshell)[:nshell]
    counts = np.bincount(j[nz], minlength=nshell)[:nshell]
    logr = np.bincount(j[nz], weights=np.log2(rho[nz]), minlength=nshell)[:nshell]
    mean_log = np.where(counts > 0, logr / np.maximum(counts, 1), np.nan)
    edges = 2.0 ** (np.arange(nshell) / bands)
    n_min = min(grid.axes[i].size for i in idx)
    return ShellSpectrum(
        axes=tuple(grid.axes[i].label for i in idx),
        bands=bands,
        edges=edges,
        energies=energies,
        counts=counts,
        mean_log_radius=mean_log,
        zero_energy=zero,
        total=float(power.sum()),
        max_radius=n_min / 2,
    )


def fit_exponent(spectrum: ShellSpectrum, d_ax: int | None = None, cap: float = DEFAULT_CAP) -> ExponentFit:
    """Least-squares power law over the fixed fit band.

    The band keeps shells whose lower edge is at least 4 and whose upper edge
    stays below ``max_radius ** 0.75``.  Each shell contributes its mean power
    per lattice point against its mean log-radius, which removes the jitter in
    lattice-point counts of thin shells; the shell energies themselves then
    scale like ``rho^(d - 2 gamma)``.
    """
    if d_ax is None:
        d_ax = spectrum.dimension
    b = spectrum.bands
    hi = spectrum.max_radius ** FIT_TOP_FRACTION
    lower = spectrum.edges
    upper = lower * 2.0 ** (1.0 / b)
    band = (lower >= FIT_LOW * (1 - 1e-12)) & (upper <= hi * (1 + 1e-12)) & (spectrum.counts > 0)
    if band.sum() < 5:
        raise ProbeError(
            f"only {int(band.sum())} shells in the fit band [{FIT_LOW}, {hi:.3g}]; "
            "use a finer grid or more bands per octave"
        )
    rng = (float(lower[band][0]), float(upper[band][-1]))
    floor = ENERGY_FLOOR * spectrum.total
    top = np.nonzero(band)[0][-1]
    if spectrum.total == 0 or spectrum.energies[top] <= floor:
        # spectrum has fallen to roundoff inside the band: faster than any power
        return ExponentFit(cap, 0.0, rng, int(band.sum()), True)
    # isolated exact zeros (e.g. symmetric data) carry no slope information
    sel = band & (spectrum.energies > floor)
    n = int(sel.sum())
    if n < 5:
        raise ProbeError(f"only {n} shells above the energy floor in the fit band")
    x = spectrum.mean_log_radius[sel]
    y = np.log2(spectrum.energies[sel] / spectrum.counts[sel])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = float(coef[0])  # = -2 gamma
    resid = y - A @ coef
    sxx = float(np.sum((x - x.mean()) ** 2))
    se_slope = math.sqrt(float(resid @ resid) / max(n - 2, 1) / sxx)
    s = -slope / 2.0 - d_ax / 2.0
    clamped = abs(s) > cap
    return ExponentFit(float(np.clip(s, -cap, cap)), se_slope / 2.0, rng, n, bool(clamped))


def _band_count(max_radius: float, bands: int) -> int:
    hi = math.log2(max_radius ** FIT_TOP_FRACTION)
    lo = math.log2(FIT_LOW)
    return int(math.floor((hi - lo) * bands + 1e-9))


def auto_bands(field: Field, axes, minimum: int = 5) -> int:
    """Coarsest bands-per-octave in {1, 2, 4, 8} leaving ``minimum`` shells to fit.

    Coarse shells average out oscillating spectra (jumps), so they are
    preferred whenever the grid is fine enough.
    """
    grid = field.grid
    n_min = min(grid.axes[i].size for i in grid.indices(axes))
    for b in (1, 2, 4, 8):
        if _band_count(n_min / 2, b) >= minimum:
            return b
    raise ProbeError(f"grid with N={n_min} is too coarse for a {minimum}-shell fit")


def estimate_exponent(field: Field, axes, bands: int | None = None, cap: float = DEFAULT_CAP) -> ExponentFit:
    """Shell spectrum plus fit in one call; ``bands=None`` picks :func:`auto_bands`."""
    if bands is None:
        bands = auto_bands(field, axes)
    return fit_exponent(shell_energies(field, axes, bands=bands), cap=cap)

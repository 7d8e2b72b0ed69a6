"""
Periodic phase-space grids, spectral transforms and the norms built on them.

Coordinates on every axis are centred, ``z_n = -L/2 + n*L/N``, and the
forward transform uses the kernel ``exp(-i z . zeta)`` with the Fourier
series normalisation

    c_k = (1/N) sum_n f(z_n) exp(-i zeta_k z_n),    zeta_k = 2 pi k / L,

so that ``f(z_n) = sum_k c_k exp(i zeta_k z_n)``.  For a function supported
inside the box, ``c_k`` equals ``f_hat(zeta_k) / L`` where ``f_hat`` is the
continuum transform.  Spectral arrays are stored in numpy's FFT ordering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

LABELS = ("t", "x", "v")


class GridError(ValueError):
    """Raised for inconsistent grid/axis requests."""


@dataclass(frozen=True)
class Axis:
    label: str
    extent: float
    size: int

    def __post_init__(self):
        if self.label not in LABELS:
            raise GridError(f"axis label must be one of {LABELS}, got {self.label!r}")
        n = int(self.size)
        if n < 8 or n & (n - 1):
            raise GridError(f"axis {self.label}: size must be a power of two >= 8, got {self.size}")
        if not self.extent > 0:
            raise GridError(f"axis {self.label}: extent must be positive")

    @property
    def spacing(self) -> float:
        return self.extent / self.size

    def coords(self) -> np.ndarray:
        return -0.5 * self.extent + self.spacing * np.arange(self.size)

    def mode_numbers(self) -> np.ndarray:
        """Integer wavenumbers k in FFT order (-N/2 .. N/2-1)."""
        return np.fft.fftfreq(self.size, d=1.0 / self.size).astype(np.int64)

    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * self.mode_numbers() / self.extent


@dataclass(frozen=True)
class PhaseGrid:
    """Ordered tuple of periodic axes; labels may repeat (d = 2 uses two x and two v axes)."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise GridError("a grid needs at least one axis")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def make(cls, **spec) -> "PhaseGrid":
        """``PhaseGrid.make(t=(L, N), x=(L, N), v=(L, N))`` in keyword order."""
        return cls(tuple(Axis(lab, float(L), int(N)) for lab, (L, N) in spec.items()))

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def labels(self) -> tuple:
        return tuple(a.label for a in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    @property
    def volume(self) -> float:
        return float(np.prod([a.extent for a in self.axes]))

    def has(self, label: str) -> bool:
        return label in self.labels

    def indices(self, labels: Iterable[str] | str) -> tuple:
        if isinstance(labels, str):
            labels = (labels,)
        labels = tuple(labels)
        for lab in labels:
            if lab not in self.labels:
                raise GridError(f"axis {lab!r} not present in grid with axes {self.labels}")
        return tuple(i for i, a in enumerate(self.axes) if a.label in labels)

    def axis(self, label: str) -> Axis:
        (i, *rest) = self.indices(label)
        if rest:
            raise GridError(f"label {label!r} is repeated; address axes by index")
        return self.axes[i]

    def _bcast(self, i: int, arr: np.ndarray) -> np.ndarray:
        shape = [1] * self.ndim
        shape[i] = arr.size
        return arr.reshape(shape)

    def coords(self, i: int | str) -> np.ndarray:
        """Broadcastable coordinate array of axis ``i`` (index or unique label)."""
        if isinstance(i, str):
            i = self.indices(i)[0]
        return self._bcast(i, self.axes[i].coords())

    def frequencies(self, i: int | str) -> np.ndarray:
        if isinstance(i, str):
            i = self.indices(i)[0]
        return self._bcast(i, self.axes[i].frequencies())

    def mode_numbers(self, i: int) -> np.ndarray:
        return self._bcast(i, self.axes[i].mode_numbers())

    def freq_norm_sq(self, labels: Iterable[str] | str) -> np.ndarray:
        """|zeta|^2 restricted to the axes carrying ``labels`` (broadcastable)."""
        out = np.zeros([1] * self.ndim)
        for i in self.indices(labels):
            out = out + self.frequencies(i) ** 2
        return out

    def mesh(self) -> list:
        return [self.coords(i) for i in range(self.ndim)]


def _phase(n: int) -> np.ndarray:
    return np.where(np.fft.fftfreq(n, 1.0 / n).astype(np.int64) % 2 == 0, 1.0, -1.0)


def _apply_phase(arr: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    for ax in axes:
        shape = [1] * arr.ndim
        shape[ax] = arr.shape[ax]
        arr = arr * _phase(arr.shape[ax]).reshape(shape)
    return arr


def forward(values: np.ndarray, axes: Sequence[int] | None = None) -> np.ndarray:
    """Centred-coordinate Fourier coefficients of ``values`` along ``axes``."""
    axes = tuple(range(values.ndim)) if axes is None else tuple(axes)
    return _apply_phase(np.fft.fftn(values, axes=axes, norm="forward"), axes)


def inverse(coeffs: np.ndarray, axes: Sequence[int] | None = None) -> np.ndarray:
    axes = tuple(range(coeffs.ndim)) if axes is None else tuple(axes)
    return np.fft.ifftn(_apply_phase(coeffs, axes), axes=axes, norm="forward")


class Field:
    """Immutable complex samples on a :class:`PhaseGrid`, physical or spectral."""

    __slots__ = ("grid", "values", "space")

    def __init__(self, grid: PhaseGrid, values, space: str = "physical"):
        if space not in ("physical", "spectral"):
            raise ValueError("space must be 'physical' or 'spectral'")
        arr = np.array(values, dtype=np.complex128)
        if arr.shape != grid.shape:
            raise GridError(f"values shape {arr.shape} does not match grid {grid.shape}")
        arr.flags.writeable = False
        self.grid = grid
        self.values = arr
        self.space = space

    @classmethod
    def from_function(cls, grid: PhaseGrid, fn: Callable[..., np.ndarray]) -> "Field":
        vals = np.broadcast_to(fn(*grid.mesh()), grid.shape)
        return cls(grid, vals)

    def to_spectral(self) -> "Field":
        if self.space == "spectral":
            return self
        return Field(self.grid, forward(self.values), "spectral")

    def to_physical(self) -> "Field":
        if self.space == "physical":
            return self
        return Field(self.grid, inverse(self.values), "physical")

    def like(self, values, space: str | None = None) -> "Field":
        return Field(self.grid, values, space or self.space)

    @property
    def real(self) -> np.ndarray:
        return self.to_physical().values.real

    def __add__(self, other: "Field") -> "Field":
        other = other.to_physical() if self.space == "physical" else other.to_spectral()
        return self.like(self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        other = other.to_physical() if self.space == "physical" else other.to_spectral()
        return self.like(self.values - other.values)

    def __mul__(self, c) -> "Field":
        return self.like(self.values * c)

    __rmul__ = __mul__

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        """True when the spectrum satisfies c(-k) = conj(c(k)) away from Nyquist modes."""
        c = forward(self.to_physical().values)
        flipped = np.conj(np.roll(np.flip(c), 1, axis=tuple(range(c.ndim))))
        scale = max(np.abs(c).max(), 1e-300)
        return bool(np.abs(c - flipped).max() <= rtol * scale)

    def __repr__(self):
        return f"Field({self.grid.labels}, shape={self.grid.shape}, space={self.space!r})"


def apply_multiplier(field: Field, symbol: np.ndarray) -> Field:
    """Multiply the spectrum by ``symbol`` and return in the input representation."""
    spec = field.to_spectral().values * symbol
    out = Field(field.grid, spec, "spectral")
    return out if field.space == "spectral" else out.to_physical()


def fractional_derivative(field: Field, axes, m: float) -> Field:
    """D^m = (-Laplacian)^(m/2) on the given axes; the zero mode maps to 0 when m > 0."""
    if m < 0:
        raise ValueError("m must be nonnegative; negative orders live in averaging.inverse_derivative")
    if m == 0:
        field.grid.indices(axes)
        return field
    k2 = field.grid.freq_norm_sq(axes)
    return apply_multiplier(field, np.where(k2 > 0, k2, 0.0) ** (0.5 * m))


def bessel_multiplier(field: Field, axes, r: float) -> Field:
    """Multiply the spectrum by <zeta>^r = (1 + |zeta|^2)^(r/2)."""
    if r == 0:
        field.grid.indices(axes)
        return field
    return apply_multiplier(field, (1.0 + field.grid.freq_norm_sq(axes)) ** (0.5 * r))


def spectral_derivative(field: Field, axis: int, order: int = 1) -> Field:
    """(d/dz)^order along one axis; the Nyquist mode is zeroed for odd orders."""
    grid = field.grid
    ik = 1j * grid.frequencies(axis)
    sym = ik ** order
    if order % 2:
        sym = np.where(grid.mode_numbers(axis) == -grid.axes[axis].size // 2, 0.0, sym)
    return apply_multiplier(field, sym)


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponents of L^p_{t,x} L^q_v; ``math.inf`` is allowed for either."""

    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if not (self.p >= 1 and self.q >= 1):
            raise ValueError(f"mixed norm exponents must be >= 1, got p={self.p}, q={self.q}")


def _pnorm(a: np.ndarray, p: float, weight: float, axes: tuple) -> np.ndarray:
    if not axes:
        return a
    if math.isinf(p):
        return a.max(axis=axes)
    if p == 2:
        return np.sqrt(weight * np.sum(a * a, axis=axes))
    if p == 1:
        return weight * np.sum(a, axis=axes)
    return (weight * np.sum(a ** p, axis=axes)) ** (1.0 / p)


def mixed_lebesgue_norm(field: Field, spec: MixedNormSpec) -> float:
    """Inner q-norm over the v axes, outer p-norm over every other axis."""
    grid = field.grid
    a = np.abs(field.to_physical().values)
    v_axes = tuple(i for i, ax in enumerate(grid.axes) if ax.label == "v")
    o_axes = tuple(i for i in range(grid.ndim) if i not in v_axes)
    dv = float(np.prod([grid.axes[i].spacing for i in v_axes])) if v_axes else 1.0
    do = float(np.prod([grid.axes[i].spacing for i in o_axes])) if o_axes else 1.0
    inner = _pnorm(a, spec.q, dv, v_axes)
    outer_axes = tuple(range(inner.ndim))
    return float(_pnorm(inner, spec.p, do, outer_axes))


def sobolev_mixed_norm(field: Field, s: float, r: float) -> float:
    """|| <(tau,xi)>^s <eta>^r f_hat ||_2 with Plancherel normalisation.

    ``s`` weights every non-v axis, ``r`` weights the v axes.  On an (x, v)
    grid the ``s`` weight therefore acts on x only.
    """
    grid = field.grid
    c = field.to_spectral().values
    w = np.ones([1] * grid.ndim)
    other = tuple(sorted(set(grid.labels) - {"v"}))
    if s and other:
        w = w * (1.0 + grid.freq_norm_sq(other)) ** s
    if r and grid.has("v"):
        w = w * (1.0 + grid.freq_norm_sq("v")) ** r
    return float(np.sqrt(grid.volume * np.sum(w * np.abs(c) ** 2)))


def l2_norm(field: Field) -> float:
    return mixed_lebesgue_norm(field, MixedNormSpec(2.0, 2.0))


def conjugate_exponent(p):
    """Hoelder conjugate p* with 1/p + 1/p* = 1; exact for ints and Fractions."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if isinstance(p, float) and math.isinf(p):
        return 1
    if p == 1:
        return math.inf
    if isinstance(p, (int, Fraction)):
        p = Fraction(p)
        out = p / (p - 1)
        return int(out) if out.denominator == 1 else out
    return p / (p - 1.0)


# -- windows and band-limited products ------------------------------------------


def bump(z: np.ndarray, radius: float) -> np.ndarray:
    """C-infinity bump exp(1 - 1/(1 - (z/R)^2)) supported in |z| < R, equal to 1 at 0."""
    y = np.asarray(z, dtype=float) / radius
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - y[inside] ** 2))
    return out


def guard_band_max(field: Field, label: str = "v", fraction: float = 0.125) -> float:
    """Largest |f| within ``fraction * N`` nodes of either edge of the labelled axes."""
    a = np.abs(field.to_physical().values)
    worst = 0.0
    for i in field.grid.indices(label):
        n = field.grid.axes[i].size
        g = max(1, int(math.ceil(fraction * n)))
        edge = np.concatenate([np.take(a, np.arange(g), axis=i), np.take(a, np.arange(n - g, n), axis=i)], axis=i)
        worst = max(worst, float(edge.max()))
    return worst


def pad_spectrum(c: np.ndarray, axes: Sequence[int], sizes: Sequence[int]) -> np.ndarray:
    """Embed FFT-ordered coefficients into a larger lattice (Nyquist modes dropped)."""
    out = c
    for ax, m in zip(axes, sizes):
        n = out.shape[ax]
        k = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
        new_shape = list(out.shape)
        new_shape[ax] = m
        big = np.zeros(new_shape, dtype=complex)
        keep = k != -n // 2
        idx = np.where(k >= 0, k, m + k)[keep]
        src = np.take(out, np.nonzero(keep)[0], axis=ax)
        sl = [slice(None)] * out.ndim
        sl[ax] = idx
        big[tuple(sl)] = src
        out = big
    return out


def truncate_spectrum(c: np.ndarray, axes: Sequence[int], sizes: Sequence[int]) -> np.ndarray:
    out = c
    for ax, n in zip(axes, sizes):
        m = out.shape[ax]
        k = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
        idx = np.where(k >= 0, k, m + k)
        small = np.take(out, idx, axis=ax)
        sl = [slice(None)] * out.ndim
        sl[ax] = np.nonzero(k == -n // 2)[0]
        small[tuple(sl)] = 0.0
        out = small
    return out


def dealiased_product(a: Field, b: Field, axes: Sequence[int] | None = None) -> Field:
    """Pointwise product formed on a 3/2-padded lattice along ``axes`` (default: all)."""
    if a.grid != b.grid:
        raise GridError("product of fields on different grids")
    grid = a.grid
    axes = tuple(range(grid.ndim)) if axes is None else tuple(axes)
    sizes = [grid.axes[i].size for i in axes]
    big = [3 * n // 2 for n in sizes]
    # transform only along the padded axes; the rest stay physical for the product
    pa = inverse(pad_spectrum(forward(a.to_physical().values, axes), axes, big), axes)
    pb = inverse(pad_spectrum(forward(b.to_physical().values, axes), axes, big), axes)
    prod = truncate_spectrum(forward(pa * pb, axes), axes, sizes)
    rest = [i for i in range(grid.ndim) if i not in axes]
    if rest:
        prod = forward(prod, rest)
    return Field(grid, prod, "spectral")

"""Periodic uniform grids, field storage, and discrete calculus.

Fields live on a uniform torus in 1 or 2 space dimensions.  Scalar fields
are arrays of shape ``grid.sizes``; vector fields carry a leading component
axis, shape ``(dim, *sizes)``.  Two derivative families are provided:

* second-order centered differences (:func:`grad`, :func:`div`, :func:`lap`)
  which satisfy discrete integration by parts against the midpoint
  quadrature exactly, and
* Fourier collocation derivatives (:func:`spectral_grad`, :func:`spectral_div`)
  used as a high-order oracle on band-limited fields.

Velocity is never obtained by a bare division: :func:`derived` reconstructs
``u`` and ``m/sqrt(rho)`` with a hard vacuum cutoff so that both vanish on
dry cells.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

CHECKPOINT_MAGIC = b"BDNS"
CHECKPOINT_VERSION = 1


class GridError(ValueError):
    """Invalid grid construction or mismatched field shapes."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on a 1D or 2D torus."""

    sizes: tuple[int, ...]
    lengths: tuple[float, ...] = ()

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {len(sizes)}")
        if any(n < 8 for n in sizes):
            raise GridError(f"each axis needs >= 8 cells, got {sizes}")
        lengths = self.lengths or tuple(1.0 for _ in sizes)
        lengths = tuple(float(x) for x in lengths)
        if len(lengths) != len(sizes):
            raise GridError("lengths must match sizes")
        if any(x <= 0 for x in lengths):
            raise GridError("lengths must be positive")
        object.__setattr__(self, "lengths", lengths)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.sizes))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.sizes))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        n = self.sizes[axis]
        return (np.arange(n) + 0.5) * self.spacing[axis]

    def coords(self) -> tuple[np.ndarray, ...]:
        """Meshgrid ('ij') of cell-center coordinates, one array per axis."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers for FFT along ``axis``, broadcast-ready."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.sizes[axis], d=self.spacing[axis])
        shape = [1] * self.dim
        shape[axis] = self.sizes[axis]
        return k.reshape(shape)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.sizes)

    def zeros_vector(self) -> np.ndarray:
        return np.zeros((self.dim, *self.sizes))


@dataclass
class State:
    """Density and momentum on a grid at one instant."""

    t: float
    rho: np.ndarray
    mom: np.ndarray

    def copy(self) -> "State":
        return State(self.t, self.rho.copy(), self.mom.copy())

    def check_shapes(self, grid: PeriodicGrid):
        if self.rho.shape != grid.sizes:
            raise GridError(f"rho shape {self.rho.shape} != grid {grid.sizes}")
        if self.mom.shape != (grid.dim, *grid.sizes):
            raise GridError(f"mom shape {self.mom.shape} != {(grid.dim, *grid.sizes)}")


@dataclass
class DerivedFields:
    """Vacuum-safe velocity and sqrt-density weighted momentum.

    ``u`` and ``sqrt_rho_u`` are zero wherever ``rho <= eps_vac``;
    ``cutoff_count`` is the number of cells where that cutoff suppressed a
    nonzero momentum.
    """

    u: np.ndarray
    sqrt_rho: np.ndarray
    sqrt_rho_u: np.ndarray
    cutoff_count: int


def _check_scalar(f: np.ndarray, grid: PeriodicGrid):
    if f.shape != grid.sizes:
        raise GridError(f"scalar field shape {f.shape} != grid {grid.sizes}")


def _check_vector(v: np.ndarray, grid: PeriodicGrid):
    if v.shape != (grid.dim, *grid.sizes):
        raise GridError(f"vector field shape {v.shape} != {(grid.dim, *grid.sizes)}")


def _ddx(f: np.ndarray, grid: PeriodicGrid, axis: int) -> np.ndarray:
    h = grid.spacing[axis]
    return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * h)


def grad(f: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Centered periodic gradient of a scalar field, shape (dim, *sizes)."""
    _check_scalar(f, grid)
    return np.stack([_ddx(f, grid, a) for a in range(grid.dim)])


def div(v: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Centered periodic divergence of a vector field."""
    _check_vector(v, grid)
    out = grid.zeros()
    for a in range(grid.dim):
        out += _ddx(v[a], grid, a)
    return out


def lap(f: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Discrete Laplacian, defined as div(grad(f)) so the composition is exact."""
    return div(grad(f, grid), grid)


def _spectral_ddx(f: np.ndarray, grid: PeriodicGrid, axis: int) -> np.ndarray:
    fh = np.fft.fftn(f)
    k = grid.wavenumbers(axis)
    # zero the unpaired Nyquist mode so the derivative of a real field stays real
    n = grid.sizes[axis]
    if n % 2 == 0:
        idx = [slice(None)] * grid.dim
        idx[axis] = n // 2
        fh[tuple(idx)] = 0.0
    return np.real(np.fft.ifftn(1j * k * fh))


def spectral_grad(f: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Fourier-collocation gradient; spectrally accurate on smooth fields."""
    _check_scalar(f, grid)
    return np.stack([_spectral_ddx(f, grid, a) for a in range(grid.dim)])


def spectral_div(v: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    """Fourier-collocation divergence."""
    _check_vector(v, grid)
    out = grid.zeros()
    for a in range(grid.dim):
        out += _spectral_ddx(v[a], grid, a)
    return out


def spectral_lap(f: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    return spectral_div(spectral_grad(f, grid), grid)


def integrate(f: np.ndarray, grid: PeriodicGrid) -> float:
    """Midpoint quadrature over the torus."""
    return float(np.sum(f) * grid.cell_volume)


def _pointwise_magnitude(f: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    if f.shape == grid.sizes:
        return np.abs(f)
    if f.shape == (grid.dim, *grid.sizes):
        return np.sqrt(np.sum(f * f, axis=0))
    raise GridError(f"field shape {f.shape} fits neither scalar nor vector layout")


def lp_norm(f: np.ndarray, grid: PeriodicGrid, p: float) -> float:
    """L^p norm with midpoint quadrature; vector fields use the pointwise
    Euclidean magnitude. p = inf gives the max norm."""
    mag = _pointwise_magnitude(f, grid)
    if np.isinf(p):
        return float(np.max(mag))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(integrate(mag**p, grid) ** (1.0 / p))


def derived(state: State, grid: PeriodicGrid, eps_vac: float) -> DerivedFields:
    """Vacuum-safe derived fields with a hard density cutoff."""
    if eps_vac <= 0:
        raise ValueError("eps_vac must be positive")
    state.check_shapes(grid)
    rho = state.rho
    wet = rho > eps_vac
    sqrt_rho = np.sqrt(np.maximum(rho, 0.0))
    safe_rho = np.where(wet, rho, 1.0)
    safe_sqrt = np.where(wet, sqrt_rho, 1.0)
    u = np.where(wet, state.mom / safe_rho, 0.0)
    sqrt_rho_u = np.where(wet, state.mom / safe_sqrt, 0.0)
    suppressed = (~wet) & np.any(state.mom != 0.0, axis=0)
    return DerivedFields(u, sqrt_rho, sqrt_rho_u, int(np.count_nonzero(suppressed)))


def save_checkpoint(path, state: State, grid: PeriodicGrid):
    """Binary checkpoint: magic 'BDNS', u32 version, u32 dim, u32 sizes,
    f64 lengths, f64 time, then rho and momentum components as little-endian
    f64 in row-major storage order."""
    state.check_shapes(grid)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, grid.dim))
        fh.write(struct.pack(f"<{grid.dim}I", *grid.sizes))
        fh.write(struct.pack(f"<{grid.dim}d", *grid.lengths))
        fh.write(struct.pack("<d", state.t))
        fh.write(np.ascontiguousarray(state.rho, dtype="<f8").tobytes())
        for a in range(grid.dim):
            fh.write(np.ascontiguousarray(state.mom[a], dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[State, PeriodicGrid]:
    with open(path, "rb") as fh:
        magic, version, dim = struct.unpack("<4sII", fh.read(12))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        sizes = struct.unpack(f"<{dim}I", fh.read(4 * dim))
        lengths = struct.unpack(f"<{dim}d", fh.read(8 * dim))
        (t,) = struct.unpack("<d", fh.read(8))
        grid = PeriodicGrid(sizes, lengths)
        n = grid.n_cells
        rho = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(sizes).copy()
        mom = np.empty((dim, *sizes))
        for a in range(dim):
            mom[a] = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(sizes)
    return State(t, rho, mom), grid

"""Discrete torus geometry, Fourier transforms, and L^p norms.

The domain is the flat torus [0, 2pi)^n sampled on L points per axis, L a
power of two.  A frequency mode k (integer vector, components in
[-L/2, L/2)) acts through the normalized character (2pi)^{-n/2} exp(i k.x),
and integrals are h^n-weighted Riemann sums with h = 2pi/L.  With these
conventions the discrete Parseval identity

    h^n sum_x |f(x)|^2 = sum_k |c_k|^2

holds exactly (up to rounding), and forward/inverse transforms are exact
inverses of each other.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

SPACE = "space"
FREQUENCY = "frequency"

_SIDE_CODES = {SPACE: 0, FREQUENCY: 1}
_SIDE_NAMES = {code: name for name, code in _SIDE_CODES.items()}


class TorusGrid:
    """Sampling grid for [0, 2pi)^n with L = 2^K points per axis."""

    def __init__(self, n: int, L: int):
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= 3:
            raise ValueError(f"dimension n must be an integer in 1..3, got {n!r}")
        if not isinstance(L, (int, np.integer)) or L < 4 or (L & (L - 1)) != 0:
            raise ValueError(f"L must be a power of two >= 4, got {L!r}")
        self.n = int(n)
        self.L = int(L)
        self.h = 2.0 * np.pi / self.L
        self.shape = (self.L,) * self.n
        self.npoints = self.L**self.n
        self.volume = (2.0 * np.pi) ** self.n
        # number of dyadic refinement levels: level 0 is the whole torus,
        # level K is single cells
        self.depth = int(math.log2(self.L))

        k1d = np.fft.fftfreq(self.L, d=1.0 / self.L).astype(np.int64)
        self.k1d = k1d
        ksq = np.zeros(self.shape, dtype=np.int64)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.L
            ksq = ksq + (k1d**2).reshape(shape)
        self.ksq = ksq
        self.lam = np.sqrt(ksq.astype(np.float64))

        x1d = np.arange(self.L) * self.h
        d1d = np.minimum(x1d, 2.0 * np.pi - x1d)
        rsq = np.zeros(self.shape, dtype=np.float64)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.L
            rsq = rsq + (d1d**2).reshape(shape)
        # geodesic distance from each grid point to the origin
        self.geodesic_radius = np.sqrt(rsq)

    @property
    def nyquist(self) -> int:
        """Spectral range limit L/2 (largest usable eigenvalue scale)."""
        return self.L // 2

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.L) * self.h

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and (self.n, self.L) == (other.n, other.L)

    def __hash__(self):
        return hash((self.n, self.L))

    def __repr__(self):
        return f"TorusGrid(n={self.n}, L={self.L})"


def make_grid(n: int, L: int) -> TorusGrid:
    """Build the torus grid; rejects n outside 1..3 and non-power-of-two L."""
    return TorusGrid(n, L)


@dataclass(frozen=True)
class EigenIndex:
    """A lattice frequency together with its eigenvalue |k|."""

    k: tuple
    lam: float

    def __post_init__(self):
        expected = float(np.sqrt(sum(int(c) ** 2 for c in self.k)))
        if self.lam != expected:
            raise ValueError(f"eigenvalue {self.lam} does not match |{self.k}| = {expected}")

    @classmethod
    def from_vector(cls, k) -> "EigenIndex":
        k = tuple(int(c) for c in k)
        return cls(k=k, lam=float(np.sqrt(sum(c**2 for c in k))))


@dataclass
class Field:
    """Complex samples over a TorusGrid, on the space or frequency side."""

    grid: TorusGrid
    values: np.ndarray
    side: str = SPACE

    def __post_init__(self):
        if self.side not in _SIDE_CODES:
            raise ValueError(f"side must be 'space' or 'frequency', got {self.side!r}")
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.side)

    def _check_compatible(self, other: "Field"):
        if self.grid != other.grid or self.side != other.side:
            raise ValueError("fields live on different grids or sides")

    def __add__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.grid, self.values + other.values, self.side)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.grid, self.values - other.values, self.side)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar, self.side)

    __rmul__ = __mul__


def transform(f: Field, direction: str = "forward") -> Field:
    """FFT realization of the eigenbasis expansion.

    forward: c_k = h^n sum_x f(x) (2pi)^{-n/2} exp(-i k.x)
    inverse: f(x) = sum_k c_k (2pi)^{-n/2} exp(+i k.x)
    """
    g = f.grid
    if direction == "forward":
        if f.side != SPACE:
            raise ValueError("forward transform expects a space-side field")
        coeff = np.fft.fftn(f.values) * ((2.0 * np.pi) ** (g.n / 2.0) / g.npoints)
        return Field(g, coeff, FREQUENCY)
    if direction == "inverse":
        if f.side != FREQUENCY:
            raise ValueError("inverse transform expects a frequency-side field")
        vals = np.fft.ifftn(f.values) * (g.npoints / (2.0 * np.pi) ** (g.n / 2.0))
        return Field(g, vals, SPACE)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def lp_norm(f: Field, p: float) -> float:
    """(h^n sum |f|^p)^{1/p}; p = inf returns the max of |f|."""
    if f.side != SPACE:
        raise ValueError("lp_norm expects a space-side field")
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    g = f.grid
    return float((g.h**g.n * np.sum(a**p)) ** (1.0 / p))


_HEADER = struct.Struct("<iii")


def write_field(f: Field, path) -> None:
    """Flat binary layout: int32 header (n, L, side), float64 re/im payload."""
    payload = np.empty(2 * f.grid.npoints, dtype=np.float64)
    flat = np.ascontiguousarray(f.values, dtype=np.complex128).reshape(-1)
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.grid.n, f.grid.L, _SIDE_CODES[f.side]))
        fh.write(payload.tobytes())


def read_field(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError("truncated field file: missing header")
        n, L, side_code = _HEADER.unpack(raw)
        if side_code not in _SIDE_NAMES:
            raise ValueError(f"unknown side code {side_code}")
        grid = TorusGrid(n, L)
        payload = np.fromfile(fh, dtype=np.float64)
    if payload.size != 2 * grid.npoints:
        raise ValueError(
            f"payload has {payload.size} floats, expected {2 * grid.npoints}"
        )
    values = (payload[0::2] + 1j * payload[1::2]).reshape(grid.shape)
    return Field(grid, values, _SIDE_NAMES[side_code])


def field_to_csv(f: Field, path) -> None:
    """Text export for debugging: one row per point, index tuple then re, im."""
    idx_cols = ",".join(f"i{a}" for a in range(f.grid.n))
    with open(path, "w") as fh:
        fh.write(f"{idx_cols},re,im\n")
        for idx in np.ndindex(f.grid.shape):
            v = complex(f.values[idx])
            ix = ",".join(str(i) for i in idx)
            fh.write(f"{ix},{v.real:.17g},{v.imag:.17g}\n")

"""Multiplier operators on the torus spectrum.

A symbol m acts diagonally on the eigenbasis: the mode k is scaled by
m(|k|).  Everything here is translation invariant, so each operator is also
a circular convolution with a kernel profile K(u); both routes are exposed
and cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import FREQUENCY, SPACE, Field, TorusGrid, field_to_csv, lp_norm, transform
from .symbols import (
    DyadicPartition,
    Symbol,
    SymbolFamily,
    build_partition,
    default_band_count,
    dyadic_piece,
)


def apply_multiplier(m: Symbol, f: Field) -> Field:
    """Scale each frequency coefficient c_k by m(|k|); returns a space field."""
    g = f.grid
    F = transform(f, "forward")
    out = Field(g, F.values * m(g.lam), FREQUENCY)
    return transform(out, "inverse")


def _cluster_mask(lam: float, grid: TorusGrid, closed: bool) -> np.ndarray:
    lo = lam * lam
    hi = (lam + 1.0) ** 2
    if closed:
        return (grid.ksq >= lo) & (grid.ksq <= hi)
    return (grid.ksq >= lo) & (grid.ksq < hi)


def spectral_projection(lam: float, f: Field, closed: bool = True) -> Field:
    """Projection onto modes with |k| in the unit window starting at lam.

    The window is closed ([lam, lam+1]) by default; ``closed=False`` switches
    to the half-open window [lam, lam+1), which makes integer-spaced windows
    a partition of the spectrum.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    g = f.grid
    F = transform(f, "forward")
    masked = Field(g, np.where(_cluster_mask(lam, g, closed), F.values, 0.0), FREQUENCY)
    return transform(masked, "inverse")


def cluster_mode_count(lam: float, grid: TorusGrid, closed: bool = True) -> int:
    """Number of lattice modes with |k| in the unit window starting at lam."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam + 1.0 > grid.nyquist:
        raise ValueError(
            f"lambda + 1 = {lam + 1.0} exceeds the grid spectral range {grid.nyquist}"
        )
    return int(np.count_nonzero(_cluster_mask(lam, grid, closed)))


def cluster_2_to_infty_norm(lam: float, grid: TorusGrid, closed: bool = True) -> float:
    """Exact L^2 -> L^infty operator norm of the cluster projection.

    Aligning all window coefficients at one point shows the norm equals
    sqrt(N_lam) / (2 pi)^{n/2} with N_lam the window mode count.
    """
    count = cluster_mode_count(lam, grid, closed)
    return math.sqrt(count) / (2.0 * np.pi) ** (grid.n / 2.0)


@dataclass
class KernelProfile:
    """Translation-invariant kernel K(u) with action (Kf)(x) = h^n sum_u K(u) f(x-u).

    ``dc`` is the frequency-zero symbol value; the h^n Riemann sum of the
    sampled kernel telescopes to exactly this number in exact arithmetic, so
    it is the lattice-exact kernel mean.
    """

    grid: TorusGrid
    values: np.ndarray
    label: str
    dc: complex

    def mean(self, quadrature: bool = False) -> complex:
        if quadrature:
            g = self.grid
            return complex(g.h**g.n * np.sum(self.values))
        return self.dc

    def to_csv(self, path) -> None:
        field_to_csv(Field(self.grid, self.values, SPACE), path)


def multiplier_kernel(m: Symbol, grid: TorusGrid) -> KernelProfile:
    """K(u) = (2 pi)^{-n} sum_k m(|k|) exp(i k.u) sampled on the grid."""
    M = m(grid.lam)
    values = np.fft.ifftn(M) * (grid.npoints / grid.volume)
    return KernelProfile(grid=grid, values=values, label=m.label, dc=complex(M.flat[0]))


def apply_kernel(profile: KernelProfile, f: Field) -> Field:
    """Circular convolution route; agrees with apply_multiplier."""
    if f.side != SPACE:
        raise ValueError("apply_kernel expects a space-side field")
    g = f.grid
    if g != profile.grid:
        raise ValueError("kernel and field grids differ")
    conv = np.fft.ifftn(np.fft.fftn(profile.values) * np.fft.fftn(f.values))
    return Field(g, g.h**g.n * conv, SPACE)


def weighted_kernel_norm(
    m: Symbol,
    j: int,
    s: float,
    alpha: int,
    grid: TorusGrid,
    partition: Optional[DyadicPartition] = None,
) -> float:
    """Weighted L^2 mass of the rescaled band kernel.

    The band-j piece of m has kernel K_j; rescaling by the band width gives
    K*(v) = 2^{-nj} K_j(2^{-j} v) on the 2^j-dilated lattice.  The returned
    value is

        sum_v |D^alpha K*(v)|^2 (1 + |v|)^{2s} dv,

    with dv the rescaled cell volume, |v| the 2^j-scaled torus geodesic
    distance, and D^alpha for alpha = 1 the forward-difference gradient at
    the rescaled resolution (alpha = 0 applies no derivative).  Uniform
    boundedness of this quantity over j is the content of the kernel-decay
    estimate being probed.
    """
    if j < 1:
        raise ValueError(f"band index must be >= 1, got {j}")
    if not s > 0:
        raise ValueError(f"weight exponent s must be > 0, got {s}")
    if alpha not in (0, 1):
        raise ValueError(f"derivative order alpha must be 0 or 1, got {alpha}")
    if 2 ** (j + 1) > grid.nyquist:
        raise ValueError(
            f"band {j} spans up to 2^{j + 1} which exceeds the grid spectrum {grid.nyquist}"
        )
    if partition is None:
        partition = build_partition(default_band_count(grid))
    if j > partition.J:
        raise ValueError(f"band index {j} outside partition range 0..{partition.J}")

    piece = dyadic_piece(m, j, partition)
    kernel = multiplier_kernel(piece, grid).values
    scale = 2.0**j
    kstar = kernel / scale**grid.n
    hstar = grid.h * scale
    weight = (1.0 + scale * grid.geodesic_radius) ** (2.0 * s)
    if alpha == 0:
        density = np.abs(kstar) ** 2
    else:
        density = np.zeros(grid.shape, dtype=np.float64)
        for axis in range(grid.n):
            diff = (np.roll(kstar, -1, axis=axis) - kstar) / hstar
            density += np.abs(diff) ** 2
    return float(np.sum(density * weight) * hstar**grid.n)


def maximal_multiplier(family: SymbolFamily, f: Field) -> Field:
    """Pointwise sup over the family of |m_i(P) f|; real nonnegative field."""
    g = f.grid
    F = transform(f, "forward")
    best = np.zeros(g.shape, dtype=np.float64)
    for m in family.members:
        out = transform(Field(g, F.values * m(g.lam), FREQUENCY), "inverse")
        np.maximum(best, np.abs(out.values), out=best)
    return Field(g, best, SPACE)


def operator_norm_lower_bound(
    m: Symbol, p: float, trials: int, seed: int, grid: TorusGrid
) -> float:
    """Empirical lower bound for the L^p -> L^p norm of the multiplier.

    The trial pool contains every single character (their ratio is |m(|k|)|
    for any p, evaluated analytically, which makes the p = 2 value exact on
    the finite lattice), a point mass, and seeded random fields: white
    Gaussian fields and dyadic-band-concentrated fields.  Deterministic for
    fixed (seed, trials, grid).
    """
    if not 1 < p < math.inf:
        raise ValueError(f"p must lie in (1, inf), got {p}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    symbol_values = m(grid.lam)
    best = float(np.abs(symbol_values).max())

    pool = []
    delta = np.zeros(grid.shape, dtype=np.complex128)
    delta[(0,) * grid.n] = 1.0
    pool.append(delta)

    bands = default_band_count(grid)
    for t in range(trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, t))))
        gaussian = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        pool.append(gaussian)
        j = 1 + t % bands
        mask = (grid.lam >= 2.0 ** (j - 1)) & (grid.lam < 2.0**j)
        if np.any(mask):
            coeff = np.where(
                mask,
                rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape),
                0.0,
            )
            band_field = transform(Field(grid, coeff, FREQUENCY), "inverse")
            pool.append(band_field.values)

    for values in pool:
        f = Field(grid, values, SPACE)
        denom = lp_norm(f, p)
        if denom == 0.0:
            continue
        ratio = lp_norm(apply_multiplier(m, f), p) / denom
        best = max(best, ratio)
    return best

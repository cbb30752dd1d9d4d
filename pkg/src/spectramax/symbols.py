"""Symbols (multipliers as functions of the eigenvalue) and the symbol-side
toolkit: smooth dyadic partitions, the scale-invariant Sobolev functional,
dyadic pieces, and seeded random-sign families.

All bumps are built from the classical exp(-1/t) mollifier, so they are
C^infinity with exact support boundaries: the step function below evaluates
to exactly 1.0 / 0.0 outside its transition interval, which makes partition
identities and product identities hold exactly where they should.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

# ---------------------------------------------------------------------------
# smooth bump machinery
# ---------------------------------------------------------------------------


def _exp_bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, identically 0 for t <= 0."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C^infinity decreasing step: exactly 1 for t <= 0, exactly 0 for t >= 1."""
    t = np.asarray(t, dtype=np.float64)
    a = _exp_bump(1.0 - t)
    b = _exp_bump(t)
    # a + b > 0 everywhere: at least one argument is >= 1/2
    return a / (a + b)


def _eta(t: np.ndarray) -> np.ndarray:
    """Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), strictly decreasing between."""
    return smooth_step(2.0 * np.asarray(t, dtype=np.float64) - 1.0)


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Symbol:
    """A bounded multiplier m: [0, inf) -> C, evaluable on numpy arrays.

    ``support`` is an optional interval hint (a, b); the symbol promises to
    vanish outside it.  ``b`` may be ``math.inf``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    support: Optional[Tuple[float, float]] = None

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=np.float64)
        out = np.asarray(self.fn(lam))
        if out.shape != lam.shape:
            out = np.broadcast_to(out, lam.shape).copy()
        return out.astype(np.complex128, copy=False)


def symbol_one() -> Symbol:
    return Symbol(lambda lam: np.ones_like(lam), "one")


def symbol_zero() -> Symbol:
    return Symbol(lambda lam: np.zeros_like(lam), "zero", support=(0.0, 0.0))


def constant_symbol(c: complex, label: Optional[str] = None) -> Symbol:
    c = complex(c)
    return Symbol(
        lambda lam: np.full(lam.shape, c, dtype=np.complex128),
        label if label is not None else f"constant:{c}",
    )


def indicator_symbol(a: float, b: float) -> Symbol:
    """Indicator of the closed interval [a, b]."""
    if b < a:
        raise ValueError(f"empty indicator interval [{a}, {b}]")

    def fn(lam):
        return np.where((lam >= a) & (lam <= b), 1.0, 0.0)

    return Symbol(fn, f"indicator:{a},{b}", support=(float(a), float(b)))


def table_symbol(lams: Sequence[float], values: Sequence[complex], label: str = "table") -> Symbol:
    """Piecewise-linear symbol through (lam, value) knots, clamped outside."""
    lams = np.asarray(lams, dtype=np.float64)
    values = np.asarray(values, dtype=np.complex128)
    if lams.ndim != 1 or lams.size < 1 or values.shape != lams.shape:
        raise ValueError("table symbol needs matching 1-d knot and value arrays")
    if np.any(np.diff(lams) <= 0):
        raise ValueError("table knots must be strictly increasing")

    def fn(lam):
        re = np.interp(lam, lams, values.real)
        im = np.interp(lam, lams, values.imag)
        return re + 1j * im

    return Symbol(fn, label)


def product_symbol(a: Symbol, b: Symbol, label: Optional[str] = None) -> Symbol:
    def fn(lam):
        return a(lam) * b(lam)

    support = None
    if a.support is not None and b.support is not None:
        lo = max(a.support[0], b.support[0])
        hi = min(a.support[1], b.support[1])
        support = (lo, max(lo, hi))
    elif a.support is not None:
        support = a.support
    elif b.support is not None:
        support = b.support
    return Symbol(fn, label if label is not None else f"({a.label})*({b.label})", support)


def symbol_from_spec(text: str, base_dir: str = ".") -> Symbol:
    """Parse a config-side symbol spec.

    Supported forms: ``one``, ``zero``, ``constant:c``, ``indicator:a,b``,
    ``table:PATH`` where PATH is a CSV of (lambda, re, im) rows.
    """
    text = text.strip()
    if text == "one":
        return symbol_one()
    if text == "zero":
        return symbol_zero()
    if text.startswith("constant:"):
        return constant_symbol(complex(text.split(":", 1)[1]))
    if text.startswith("indicator:"):
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ValueError(f"indicator symbol needs two endpoints, got {text!r}")
        return indicator_symbol(float(parts[0]), float(parts[1]))
    if text.startswith("table:"):
        path = text.split(":", 1)[1]
        import os

        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        rows = np.loadtxt(full, delimiter=",", ndmin=2)
        if rows.shape[1] == 2:
            return table_symbol(rows[:, 0], rows[:, 1].astype(np.complex128), label=text)
        if rows.shape[1] == 3:
            return table_symbol(rows[:, 0], rows[:, 1] + 1j * rows[:, 2], label=text)
        raise ValueError("table CSV must have columns (lambda, re[, im])")
    raise ValueError(f"unknown symbol spec {text!r}")


@dataclass(frozen=True)
class SymbolFamily:
    """Ordered family of symbols with unique labels and optional seed provenance."""

    members: Tuple[Symbol, ...]
    seed: Optional[int] = None
    sign_matrix: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("a symbol family needs at least one member")
        labels = [m.label for m in self.members]
        if len(set(labels)) != len(labels):
            raise ValueError("family member labels must be unique")

    def __len__(self):
        return len(self.members)


# ---------------------------------------------------------------------------
# dyadic partition with cubed-sum normalization
# ---------------------------------------------------------------------------


PARTITION_CONSTRUCTION = "cbrt-smoothstep-v1"


@dataclass(frozen=True)
class DyadicPartition:
    """Bands phi_j, j = 0..J, with sum_j phi_j(s)^3 = 1 for all s >= 0.

    phi_0 is supported in [0, 1); for 1 <= j < J the band phi_j(s) =
    phi(s / 2^j) with the base bump phi supported in (1/4, 1), so phi_j lives
    on (2^{j-2}, 2^j); the top band j = J absorbs [2^{J-1}, inf) so the finite
    cubed sum is exactly 1 everywhere.  ``cubes[j]`` evaluates phi_j^3
    directly (it is the underlying smooth partition member, exact where the
    cube of the cube root would round).  ``tildes[j]`` are the enlarged bumps,
    identically 1 on the support of phi_j, with tilde * phi = phi exactly.
    """

    J: int
    bands: Tuple[Symbol, ...]
    cubes: Tuple[Symbol, ...]
    tildes: Tuple[Symbol, ...]

    def phi(self, j: int) -> Symbol:
        return self.bands[j]

    def phi_tilde(self, j: int) -> Symbol:
        return self.tildes[j]


def _psi_band(j: int) -> Callable[[np.ndarray], np.ndarray]:
    lo = 2.0 ** (j - 1)
    hi = 2.0**j

    def fn(s):
        return _eta(s / hi) - _eta(s / lo)

    return fn


def _psi_tail(J: int) -> Callable[[np.ndarray], np.ndarray]:
    lo = 2.0 ** (J - 1)

    def fn(s):
        return 1.0 - _eta(s / lo)

    return fn


def _cbrt_of(psi: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    def fn(s):
        return np.cbrt(np.maximum(np.real(psi(s)), 0.0))

    return fn


def build_partition(J: int) -> DyadicPartition:
    """Smooth dyadic partition with sum of cubes exactly 1 on [0, inf)."""
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    psis = []
    bands = []
    tildes = []

    psi0 = lambda s: _eta(s)  # noqa: E731
    psis.append(psi0)
    bands.append(Symbol(_cbrt_of(psi0), "phi0", support=(0.0, 1.0)))
    tildes.append(Symbol(lambda s: _eta(s / 2.0) + 0j, "phi0~", support=(0.0, 2.0)))

    def _tilde_band(j):
        scale = 2.0**j

        def fn(s):
            u = np.asarray(s, dtype=np.float64) / scale
            return _eta(u / 2.0) * (1.0 - _eta(4.0 * u))

        return fn

    for j in range(1, J):
        psi = _psi_band(j)
        psis.append(psi)
        bands.append(
            Symbol(_cbrt_of(psi), f"phi{j}", support=(2.0 ** (j - 2), 2.0**j))
        )
        tildes.append(
            Symbol(_tilde_band(j), f"phi{j}~", support=(2.0 ** (j - 3), 2.0 ** (j + 1)))
        )

    tail = _psi_tail(J)
    psis.append(tail)
    bands.append(Symbol(_cbrt_of(tail), f"phi{J}", support=(2.0 ** (J - 2), math.inf)))

    def _tilde_tail(s):
        return 1.0 - _eta(4.0 * np.asarray(s, dtype=np.float64) / 2.0**J)

    tildes.append(Symbol(_tilde_tail, f"phi{J}~", support=(2.0 ** (J - 3), math.inf)))

    cubes = tuple(
        Symbol(psi, f"phi{j}^3", support=bands[j].support) for j, psi in enumerate(psis)
    )
    return DyadicPartition(J=J, bands=tuple(bands), cubes=cubes, tildes=tuple(tildes))


def default_band_count(grid) -> int:
    """Deepest regular band that still fits in the grid spectrum."""
    return max(1, grid.depth - 1)


def dyadic_piece(m: Symbol, j: int, partition: DyadicPartition) -> Symbol:
    """The dyadic piece of m at band j: the pointwise product with phi_j."""
    if not 0 <= j <= partition.J:
        raise ValueError(f"band index {j} outside 0..{partition.J}")
    piece = product_symbol(m, partition.bands[j], label=f"{m.label}*phi{j}")
    return Symbol(piece.fn, piece.label, support=partition.bands[j].support)


def partition_to_csv(partition: DyadicPartition, path, ts: Optional[np.ndarray] = None) -> None:
    if ts is None:
        ts = np.linspace(0.0, 2.0**partition.J, 2049)
    cols = [b(ts).real for b in partition.bands]
    with open(path, "w") as fh:
        fh.write("t," + ",".join(b.label for b in partition.bands) + "\n")
        for i, t in enumerate(ts):
            fh.write(f"{t:.12e}," + ",".join(f"{c[i]:.12e}" for c in cols) + "\n")


def family_to_csv(family: SymbolFamily, path, ts: np.ndarray) -> None:
    cols = [np.real(m(ts)) for m in family.members]
    with open(path, "w") as fh:
        fh.write("t," + ",".join(m.label for m in family.members) + "\n")
        for i, t in enumerate(ts):
            fh.write(f"{t:.12e}," + ",".join(f"{c[i]:.12e}" for c in cols) + "\n")


# ---------------------------------------------------------------------------
# scale-invariant Sobolev functional
# ---------------------------------------------------------------------------

# The windowed symbol g_lam(u) = beta(u) m(lam u) lives in (1/2, 2); it is
# zero-extended to a period-8 interval, so its Fourier series sees no
# wrap-around support overlap.
_WINDOW_PERIOD = 8.0
DEFAULT_WINDOW_RESOLUTION = 4096


def frequency_bump() -> Symbol:
    """The fixed bump beta supported in (1/2, 2) with sum_j beta(2^j t) = 1."""

    def fn(t):
        t = np.asarray(t, dtype=np.float64)
        return _eta(t / 2.0) - _eta(t)

    return Symbol(fn, "beta", support=(0.5, 2.0))


@dataclass(frozen=True)
class HormanderParams:
    """Smoothness order s > 0, window bump, and the dyadic scales probed."""

    s: float
    beta: Symbol
    lambda_grid: Tuple[float, ...]

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"smoothness order s must be > 0, got {self.s}")
        if len(self.lambda_grid) == 0:
            raise ValueError("lambda_grid must be nonempty")


def make_hormander_params(s: float, lambda_max: float = 128.0, beta: Optional[Symbol] = None) -> HormanderParams:
    """Dyadic probe scales 2^0 .. 2^ceil(log2(lambda_max))."""
    if not lambda_max >= 1:
        raise ValueError("lambda_max must be >= 1")
    top = max(0, int(math.ceil(math.log2(lambda_max))))
    grid = tuple(2.0**j for j in range(top + 1))
    return HormanderParams(s=float(s), beta=beta if beta is not None else frequency_bump(), lambda_grid=grid)


def hormander_norm(m: Symbol, params: HormanderParams, resolution: int = DEFAULT_WINDOW_RESOLUTION) -> float:
    """Scale-invariant localized Sobolev norm of the symbol.

    For each probe scale lam the windowed function g(u) = beta(u) m(lam u)
    is expanded in a Fourier series on the period-8 window, and the value is

        sup_lam  max( ||g||_L2 , (sum_xi |xi|^{2s} |g^(xi)|^2)^{1/2} ).

    Fractional orders between 0 and s need not be scanned: the seminorm is
    log-convex in the order, so the sup over [0, s] is attained at an
    endpoint.  The reported value is the square root of the underlying
    quadratic bracket, i.e. a norm.
    """
    s = params.s
    M = int(resolution)
    du = _WINDOW_PERIOD / M
    u = np.arange(M) * du
    bu = params.beta(u)
    xi = 2.0 * np.pi * np.fft.fftfreq(M, d=du)
    weight = np.abs(xi) ** (2.0 * s)
    best = 0.0
    for lam in params.lambda_grid:
        g = bu * m(lam * u)
        c = np.fft.fft(g) / M
        e = np.abs(c) ** 2
        l2 = _WINDOW_PERIOD * float(np.sum(e))
        frac = _WINDOW_PERIOD * float(np.sum(weight * e))
        best = max(best, l2, frac)
    return math.sqrt(best)


# ---------------------------------------------------------------------------
# random-sign families
# ---------------------------------------------------------------------------

# Named, versioned generator so families reproduce across platforms:
# PCG64 seeded through numpy's SeedSequence(seed); the sign block is the
# row-major array 1 - 2 * integers(0, 2, size=(N, J)).  Prefix stability in N
# follows from the row-major draw order.
SIGN_STREAM_ALGORITHM = "spectramax-signs-v1"


def random_sign_family(N: int, partition: DyadicPartition, seed: int) -> SymbolFamily:
    """Members m_i(t) = sum_{j=1}^{J} eps_{i,j} phi_j(t)^3 with i.i.d. signs.

    The cubed bands sum to at most 1, so every member is bounded by 1 in
    absolute value and vanishes at t = 0.
    """
    if N < 1:
        raise ValueError(f"family size must be >= 1, got {N}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    signs = 1 - 2 * rng.integers(0, 2, size=(N, partition.J))
    cubes = partition.cubes[1:]

    def _member(row):
        coeff = row.astype(np.float64)

        def fn(t):
            acc = np.zeros(np.asarray(t, dtype=np.float64).shape, dtype=np.float64)
            for c, cube in zip(coeff, cubes):
                acc = acc + c * np.real(cube(t))
            return acc

        return fn

    members = tuple(
        Symbol(_member(signs[i]), label=f"rs{seed}-{i}") for i in range(N)
    )
    return SymbolFamily(members=members, seed=seed, sign_matrix=signs)

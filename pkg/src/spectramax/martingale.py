"""Dyadic martingale structure and maximal operators on the torus.

Levels are indexed so k = 0 is the whole torus and k = depth is single
cells; cubes at level k are aligned blocks of 2^{depth-k} cells per axis.
Refinement increases k, and the difference operator at level k is
expectation(k+1) - expectation(k).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .grid import FREQUENCY, SPACE, Field, TorusGrid, transform
from .symbols import DyadicPartition


class DyadicCubeSystem:
    """Nested dyadic cubes on the grid; level-k cubes have side 2pi 2^{-k}."""

    def __init__(self, grid: TorusGrid):
        self.grid = grid
        self.depth = grid.depth

    def cells_per_side(self, k: int) -> int:
        if not 0 <= k <= self.depth:
            raise ValueError(f"level {k} outside 0..{self.depth}")
        return 2 ** (self.depth - k)


def _block_mean(values: np.ndarray, block: int) -> np.ndarray:
    """Average over aligned blocks of ``block`` cells per axis, broadcast back.

    Averaging proceeds by successive pair means, so a block-constant input is
    reproduced bitwise; this keeps the projection identities of the
    expectation operators exact in floating point.
    """
    if block == 1:
        return values.copy()
    out = np.asarray(values)
    n = out.ndim
    for _ in range(block.bit_length() - 1):
        for axis in range(n):
            cur = out.shape[axis]
            shape = out.shape[:axis] + (cur // 2, 2) + out.shape[axis + 1 :]
            out = out.reshape(shape).mean(axis=axis + 1)
    for axis in range(n):
        out = np.repeat(out, block, axis=axis)
    return out


def expectation(f: Field, k: int) -> Field:
    """Cube average at level k: constant on each level-k cube."""
    if f.side != SPACE:
        raise ValueError("expectation expects a space-side field")
    system = DyadicCubeSystem(f.grid)
    block = system.cells_per_side(k)
    return Field(f.grid, _block_mean(f.values, block), SPACE)


def martingale_difference(f: Field, k: int) -> Field:
    """expectation(k+1) - expectation(k); mean zero on every level-k cube."""
    depth = f.grid.depth
    if not 0 <= k <= depth - 1:
        raise ValueError(f"difference level {k} outside 0..{depth - 1}")
    return expectation(f, k + 1) - expectation(f, k)


def _expectation_stack(f: Field) -> list[np.ndarray]:
    """Values of expectation(f, k) for k = 0..depth (coarsest to finest)."""
    values = np.asarray(f.values, dtype=np.complex128)
    depth = f.grid.depth
    return [_block_mean(values, 2 ** (depth - k)) for k in range(depth + 1)]


def square_function(f: Field) -> Field:
    """Pointwise l^2 aggregate of all martingale differences."""
    if f.side != SPACE:
        raise ValueError("square_function expects a space-side field")
    stack = _expectation_stack(f)
    acc = np.zeros(f.grid.shape, dtype=np.float64)
    for k in range(len(stack) - 1):
        acc += np.abs(stack[k + 1] - stack[k]) ** 2
    return Field(f.grid, np.sqrt(acc), SPACE)


def _window_mean_axis(a: np.ndarray, W: int, axis: int) -> np.ndarray:
    """Mean over the cyclic window of W cells starting at offset -(W//2)."""
    if W == 1:
        return a
    L = a.shape[axis]
    if W == L:
        return np.broadcast_to(a.mean(axis=axis, keepdims=True), a.shape).copy()
    head = np.take(a, np.arange(W - 1), axis=axis)
    cs = np.cumsum(np.concatenate([a, head], axis=axis), axis=axis)
    upper = np.take(cs, np.arange(W - 1, W - 1 + L), axis=axis)
    zeros_shape = list(a.shape)
    zeros_shape[axis] = 1
    lower = np.concatenate(
        [np.zeros(zeros_shape, dtype=cs.dtype), np.take(cs, np.arange(L - 1), axis=axis)],
        axis=axis,
    )
    start_sums = upper - lower
    return np.roll(start_sums, W // 2, axis=axis) / W


def _centered_window_mean(a: np.ndarray, W: int) -> np.ndarray:
    out = a
    for axis in range(a.ndim):
        out = _window_mean_axis(out, W, axis)
    return out


def hl_maximal(f: Field, r: float = 1.0) -> Field:
    """Hardy-Littlewood maximal function over dyadic-side-length cubes.

    M_r f(x) = sup_Q (|Q|^{-1} int_Q |f|^r)^{1/r} with Q ranging over the
    centered windows of side 2pi 2^{-k}, k = 0..depth, together with the
    aligned dyadic cubes containing x at the same side lengths.  Including
    the aligned cubes makes M_1 f >= |expectation(f, k)| hold pointwise and
    exactly; cost stays O(L^n log L) via prefix sums and block means.
    """
    if f.side != SPACE:
        raise ValueError("hl_maximal expects a space-side field")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    g = f.grid
    power = np.abs(f.values) ** r
    best = np.array(power, dtype=np.float64, copy=True)  # W = 1 window
    for k in range(g.depth):
        W = 2 ** (g.depth - k)
        np.maximum(best, _block_mean(power, W).real, out=best)
        np.maximum(best, _centered_window_mean(power, W).real, out=best)
    return Field(g, best ** (1.0 / r), SPACE)


def g_functional(f: Field, r: float, partition: DyadicPartition) -> Field:
    """l^2-in-bands aggregate of M_r applied to each dyadic band of f."""
    if f.side != SPACE:
        raise ValueError("g_functional expects a space-side field")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    g = f.grid
    F = transform(f, "forward")
    acc = np.zeros(g.shape, dtype=np.float64)
    for band in partition.bands:
        coeff = F.values * band(g.lam)
        if not np.any(coeff):
            continue
        piece = transform(Field(g, coeff, FREQUENCY), "inverse")
        acc += hl_maximal(piece, r).values ** 2
    return Field(g, np.sqrt(acc), SPACE)


@dataclass
class LevelSetReport:
    """Raw level-set measures for the sub-Gaussian martingale inequality.

    Per (lambda, epsilon): lhs is the measure of points where the maximal
    deviation from the coarsest average exceeds 2 lambda while the square
    function stays below epsilon lambda; rhs is the measure where the
    maximal average exceeds lambda.  The lhs set is always contained in the
    rhs set, so the ratio is well-defined (reported as 0 when both vanish).
    """

    lambdas: Tuple[float, ...]
    epsilons: Tuple[float, ...]
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("lambda,epsilon,lhs_measure,rhs_measure,ratio\n")
            for i, lam in enumerate(self.lambdas):
                for j, eps in enumerate(self.epsilons):
                    fh.write(
                        f"{lam:.12e},{eps:.12e},{self.lhs[i, j]:.12e},"
                        f"{self.rhs[i, j]:.12e},{self.ratio[i, j]:.12e}\n"
                    )


def cw_report(g: Field, lambdas: Sequence[float], epsilons: Sequence[float]) -> LevelSetReport:
    """Count the level sets of the good-lambda inequality by direct measure.

    Measures are h^n times point counts.  Thresholds follow the inequality
    being probed: deviation > 2 lambda, square function < epsilon lambda on
    the left; maximal average > lambda on the right.
    """
    if g.side != SPACE:
        raise ValueError("cw_report expects a space-side field")
    lambdas = tuple(float(x) for x in lambdas)
    epsilons = tuple(float(x) for x in epsilons)
    for lam in lambdas:
        if not lam > 0:
            raise ValueError(f"lambda must be > 0, got {lam}")
    for eps in epsilons:
        if not 0 < eps <= 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2], got {eps}")

    grid = g.grid
    stack = _expectation_stack(g)
    base = stack[0]
    dev = np.zeros(grid.shape, dtype=np.float64)
    sup = np.zeros(grid.shape, dtype=np.float64)
    for level in stack:
        np.maximum(dev, np.abs(level - base), out=dev)
        np.maximum(sup, np.abs(level), out=sup)
    sq = square_function(g).values
    cell = grid.h**grid.n

    nl, ne = len(lambdas), len(epsilons)
    lhs = np.zeros((nl, ne))
    rhs = np.zeros((nl, ne))
    ratio = np.zeros((nl, ne))
    for i, lam in enumerate(lambdas):
        rhs_mask = sup > lam
        rhs_measure = cell * float(np.count_nonzero(rhs_mask))
        for j, eps in enumerate(epsilons):
            lhs_mask = (dev > 2.0 * lam) & (sq < eps * lam)
            if np.any(lhs_mask & ~rhs_mask):
                # impossible by the triangle inequality; a hit means a bug
                raise AssertionError("level-set inclusion violated")
            lhs_measure = cell * float(np.count_nonzero(lhs_mask))
            lhs[i, j] = lhs_measure
            rhs[i, j] = rhs_measure
            ratio[i, j] = lhs_measure / rhs_measure if rhs_measure > 0 else 0.0
    return LevelSetReport(lambdas=lambdas, epsilons=epsilons, lhs=lhs, rhs=rhs, ratio=ratio)

"""Command-line entry point.

Exit codes: 0 success, 1 config error, 2 numerical-invariant failure
(selftest).  SPECTRAMAX_THREADS caps the worker count of parallel loops.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .experiments import ConfigError, parse_config, run_experiment

_SUBCOMMANDS = {
    "logn-growth": "logn_growth",
    "kernel-suite": "kernel_suite",
    "cluster-suite": "cluster_suite",
    "martingale-suite": "martingale_suite",
}


def _selftest() -> int:
    """Quick numerical-invariant battery; returns the number of failures."""
    from .grid import SPACE, Field, lp_norm, make_grid, transform
    from .martingale import expectation, martingale_difference, square_function
    from .operators import (
        apply_kernel,
        apply_multiplier,
        cluster_mode_count,
        multiplier_kernel,
    )
    from .symbols import build_partition, symbol_one, table_symbol

    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"{status} {name}{suffix}")
        if not ok:
            failures += 1

    rng = np.random.default_rng(0)

    grid = make_grid(2, 32)
    f = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape), SPACE)
    c = transform(f, "forward")
    back = transform(c, "inverse")
    err = np.abs(back.values - f.values).max() / np.abs(f.values).max()
    check("transform round-trip", err <= 1e-12, f"rel err {err:.2e}")

    parseval = abs(
        grid.h**grid.n * np.sum(np.abs(f.values) ** 2) - np.sum(np.abs(c.values) ** 2)
    ) / np.sum(np.abs(c.values) ** 2)
    check("Parseval identity", parseval <= 1e-12, f"rel err {parseval:.2e}")

    part = build_partition(5)
    ts = np.linspace(0.0, 16.0, 2001)
    total = sum(np.real(cube(ts)) for cube in part.cubes)
    perr = np.abs(total - 1.0).max()
    check("partition cubed sum", perr <= 1e-8, f"max err {perr:.2e}")

    m = table_symbol([0.0, 4.0, 8.0, 16.0], [1.0, 0.3 + 0.1j, -0.5, 0.2])
    direct = apply_multiplier(m, f)
    viaker = apply_kernel(multiplier_kernel(m, grid), f)
    kerr = np.abs(direct.values - viaker.values).max() / max(np.abs(direct.values).max(), 1e-30)
    check("kernel/operator consistency", kerr <= 1e-10, f"rel err {kerr:.2e}")

    ident = apply_multiplier(symbol_one(), f)
    ierr = np.abs(ident.values - f.values).max() / np.abs(f.values).max()
    check("identity multiplier", ierr <= 1e-12, f"rel err {ierr:.2e}")

    d1 = martingale_difference(f, 1)
    d3 = martingale_difference(f, 3)
    inner = abs(np.vdot(d1.values, d3.values)) / (lp_norm(f, 2) ** 2)
    check("martingale orthogonality", inner <= 1e-12, f"rel inner {inner:.2e}")

    e0 = expectation(f, 0)
    sq = square_function(f)
    lhs = grid.h**grid.n * np.sum(sq.values**2)
    rhs = lp_norm(f - e0, 2) ** 2
    serr = abs(lhs - rhs) / rhs
    check("square-function identity", serr <= 1e-10, f"rel err {serr:.2e}")

    check("cluster count (n=2, lambda=5)", cluster_mode_count(5.0, grid) == 44)

    return failures


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spectramax",
        description="Spectral multiplier experiments on the discrete torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {name.replace('-', ' ')} experiment")
        sp.add_argument("--config", required=True, help="path to a key=value config file")
        sp.add_argument("--out", default=None, help="output directory (overrides config)")
    sub.add_parser("selftest", help="run quick numerical invariant checks")

    args = parser.parse_args(argv)

    if args.command == "selftest":
        failures = _selftest()
        if failures:
            print(f"selftest: {failures} failure(s)")
            return 2
        print("selftest: all checks passed")
        return 0

    expected = _SUBCOMMANDS[args.command]
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
        if config.experiment != expected:
            raise ConfigError(
                f"config experiment is {config.experiment!r} but subcommand wants {expected!r}"
            )
        report = run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    outdir = args.out or config.output_dir
    if outdir is not None:
        paths = report.write(outdir)
        for path in paths:
            print(f"wrote {path}")
    for line in report.summary_lines():
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())

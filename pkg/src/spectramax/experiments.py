"""Config-driven experiment suites with CSV/JSON reports.

Configs are flat ``key=value`` tokens (any whitespace layout, ``#`` starts a
comment, lists are comma-separated).  All randomness is drawn from PCG64
generators seeded by tuples (seed, experiment_code, stream, index), so runs
are reproducible bitwise and growth curves for a prefix of N_list coincide
with the prefix rows of a longer run.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .grid import FREQUENCY, SPACE, Field, TorusGrid, lp_norm, make_grid, transform
from .martingale import _expectation_stack, cw_report, g_functional, square_function
from .operators import (
    apply_multiplier,
    cluster_2_to_infty_norm,
    cluster_mode_count,
    multiplier_kernel,
    weighted_kernel_norm,
)
from .symbols import (
    PARTITION_CONSTRUCTION,
    SIGN_STREAM_ALGORITHM,
    DyadicPartition,
    build_partition,
    default_band_count,
    dyadic_piece,
    hormander_norm,
    make_hormander_params,
    random_sign_family,
    symbol_from_spec,
)


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configs."""


EXPERIMENTS = ("logn_growth", "kernel_suite", "cluster_suite", "martingale_suite")
_EXP_CODES = {name: i + 1 for i, name in enumerate(EXPERIMENTS)}

_INT_KEYS = {"n", "L", "trials", "seed"}
_FLOAT_KEYS = {"p", "r", "s"}
_STR_KEYS = {"experiment", "output_dir", "symbol"}
_LIST_KEYS = {"N_list"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS

_BASE_REQUIRED = ("experiment", "n", "L")
_EXTRA_REQUIRED = {
    "logn_growth": ("p", "r", "s", "N_list"),
    "kernel_suite": ("s",),
    "cluster_suite": (),
    "martingale_suite": ("r", "p"),
}

# epsilon grid of the sub-Gaussian level-set probe
CW_EPSILONS = (0.5, 0.25, 0.125)
# fallback when the level-set ratios give the fit nothing to work with
DEFAULT_CD = 1.0


@dataclass
class ExperimentConfig:
    experiment: str
    n: int
    L: int
    p: Optional[float] = None
    r: Optional[float] = None
    s: Optional[float] = None
    N_list: Optional[Tuple[int, ...]] = None
    trials: int = 20
    seed: int = 1
    output_dir: Optional[str] = None
    symbol: str = "one"

    def to_dict(self) -> dict:
        out = {
            "experiment": self.experiment,
            "n": self.n,
            "L": self.L,
            "trials": self.trials,
            "seed": self.seed,
            "symbol": self.symbol,
        }
        for key in ("p", "r", "s"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.N_list is not None:
            out["N_list"] = list(self.N_list)
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a flat key=value config."""
    values: Dict[str, object] = {}
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0]
        for token in line.split():
            if "=" not in token:
                raise ConfigError(f"expected key=value, got {token!r}")
            key, _, val = token.partition("=")
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"unknown key: {key}")
            if key in values:
                raise ConfigError(f"duplicate key: {key}")
            try:
                if key in _INT_KEYS:
                    values[key] = int(val)
                elif key in _FLOAT_KEYS:
                    values[key] = float(val)
                elif key in _LIST_KEYS:
                    values[key] = tuple(int(x) for x in val.split(",") if x)
                else:
                    values[key] = val
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {val!r}") from exc

    missing = [k for k in _BASE_REQUIRED if k not in values]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    experiment = values["experiment"]
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of {', '.join(EXPERIMENTS)}"
        )
    missing = [k for k in _EXTRA_REQUIRED[experiment] if k not in values]
    if missing:
        raise ConfigError(
            f"missing required keys for {experiment}: " + ", ".join(missing)
        )

    cfg = ExperimentConfig(
        experiment=experiment,
        n=values["n"],
        L=values["L"],
        p=values.get("p"),
        r=values.get("r"),
        s=values.get("s"),
        N_list=values.get("N_list"),
        trials=values.get("trials", 20),
        seed=values.get("seed", 1),
        output_dir=values.get("output_dir"),
        symbol=values.get("symbol", "one"),
    )

    if not 1 <= cfg.n <= 3:
        raise ConfigError("n must be in 1..3")
    if cfg.L < 4 or (cfg.L & (cfg.L - 1)) != 0:
        raise ConfigError("L must be a power of two >= 4")
    if cfg.trials < 1:
        raise ConfigError("trials >= 1 required")
    if cfg.r is not None and not 1.0 <= cfg.r < 2.0:
        raise ConfigError("r in [1, 2) required")
    if cfg.p is not None and not cfg.p > 1.0:
        raise ConfigError("p > 1 required")
    if cfg.p is not None and cfg.r is not None and not cfg.p > cfg.r:
        raise ConfigError("p > r required")
    if cfg.experiment == "logn_growth" and not cfg.s > cfg.n / cfg.r:
        raise ConfigError("s > n/r required")
    if cfg.s is not None and not cfg.s > 0:
        raise ConfigError("s > 0 required")
    if cfg.N_list is not None:
        if len(cfg.N_list) == 0:
            raise ConfigError("N_list must be nonempty")
        if any(N < 1 for N in cfg.N_list):
            raise ConfigError("N_list entries must be >= 1")
        if any(b <= a for a, b in zip(cfg.N_list, cfg.N_list[1:])):
            raise ConfigError("N_list strictly increasing required")
    return cfg


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{float(x):.12e}"


def _write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_dat(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(_fmt(x) for x in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _meta(config: ExperimentConfig, partition: Optional[DyadicPartition]) -> dict:
    meta = {
        "config": config.to_dict(),
        "version": __version__,
        "sign_stream": SIGN_STREAM_ALGORITHM,
    }
    if partition is not None:
        meta["partition"] = {"J": partition.J, "construction": PARTITION_CONSTRUCTION}
    return meta


def _worker_count() -> int:
    raw = os.environ.get("SPECTRAMAX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _rng(seed: int, experiment: str, stream: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((seed, _EXP_CODES[experiment], stream, index)))
    )


# ---------------------------------------------------------------------------
# trial fields
# ---------------------------------------------------------------------------


def _gaussian_values(grid: TorusGrid, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    if real:
        return rng.standard_normal(grid.shape).astype(np.complex128)
    return rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)


def _lacunary_values(grid: TorusGrid, rng: np.random.Generator, partition: DyadicPartition) -> np.ndarray:
    """One random-phase character per dyadic band, at the band center |k| = 2^{j-1}."""
    coeff = np.zeros(grid.shape, dtype=np.complex128)
    lam = grid.lam
    for j in range(1, partition.J + 1):
        center = 2.0 ** (j - 1)
        if center > grid.nyquist - 1:
            break
        dist = np.abs(lam - center)
        candidates = np.argwhere(dist == dist.min())
        pick = candidates[rng.integers(len(candidates))]
        phase = np.exp(2j * np.pi * rng.random())
        coeff[tuple(pick)] += phase
    return transform(Field(grid, coeff, FREQUENCY), "inverse").values


def _smoothed_point_mass(grid: TorusGrid) -> np.ndarray:
    coeff = np.exp(-((2.0 * grid.lam / grid.L) ** 2)).astype(np.complex128)
    return transform(Field(grid, coeff, FREQUENCY), "inverse").values


# ---------------------------------------------------------------------------
# growth experiment
# ---------------------------------------------------------------------------


@dataclass
class GrowthReport:
    rows: List[dict]
    fit: Optional[dict]
    diagnostic_rows: List[dict]
    cd_value: float
    cd_source: str
    meta: dict

    def summary_lines(self) -> List[str]:
        lines = [
            f"logn_growth: {len(self.rows)} family sizes, "
            f"max N = {self.rows[-1]['N']}"
        ]
        for row in self.rows:
            lines.append(
                f"  N={row['N']:>4d}  max_ratio={row['max_ratio']:.6f}  "
                f"sqrt_log={row['sqrt_log']:.6f}  normalized={row['normalized']:.6f}"
            )
        if self.fit is not None:
            lines.append(
                f"  fit: slope={self.fit['slope']:.6f} intercept={self.fit['intercept']:.6f} "
                f"correlation={self.fit['correlation']:.6f}"
            )
        return lines

    def write(self, outdir) -> List[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        header = ["N", "max_ratio", "sqrt_log", "normalized", "hormander_sup"]
        rows = [
            (r["N"], r["max_ratio"], r["sqrt_log"], r["normalized"], r["hormander_sup"])
            for r in self.rows
        ]
        paths = [outdir / "growth.csv", outdir / "growth.dat", outdir / "growth.json"]
        _write_table(paths[0], header, rows)
        _write_dat(paths[1], header, rows)
        payload = dict(self.meta)
        payload["rows"] = self.rows
        payload["fit"] = self.fit
        payload["level_set_cd"] = {"value": self.cd_value, "source": self.cd_source}
        _write_json(paths[2], payload)
        diag_path = outdir / "growth_levelsets.csv"
        _write_table(
            diag_path,
            ["N", "lambda", "eps_N", "E1_measure", "E2_measure", "E3_measure"],
            [
                (r["N"], r["lambda"], r["eps_N"], r["E1"], r["E2"], r["E3"])
                for r in self.diagnostic_rows
            ],
        )
        paths.append(diag_path)
        return paths


def _fit_cd(n: int, L: int, seed: int, trials: int = 16) -> Tuple[float, str]:
    """Estimate the sub-Gaussian constant from aggregated level-set ratios.

    At desk-scale martingale depth the left-hand sets are typically empty
    (see run_martingale_suite), in which case the documented default is used.
    """
    grid = make_grid(n, min(L, 64))
    lhs = np.zeros(len(CW_EPSILONS))
    rhs = 0.0
    for t in range(trials):
        rng = _rng(seed, "logn_growth", 7, t)
        g = Field(grid, _gaussian_values(grid, rng, real=True), SPACE)
        stack = _expectation_stack(g)
        sup = np.zeros(grid.shape)
        for level in stack:
            np.maximum(sup, np.abs(level), out=sup)
        lam = float(np.median(sup))
        if lam <= 0:
            continue
        rep = cw_report(g, [lam], CW_EPSILONS)
        lhs += rep.lhs[0]
        rhs += rep.rhs[0, 0]
    ratios = lhs / rhs if rhs > 0 else np.zeros_like(lhs)
    xs = [1.0 / e**2 for e, q in zip(CW_EPSILONS, ratios) if q > 0]
    ys = [math.log(q) for q in ratios if q > 0]
    if len(xs) >= 2:
        slope, _ = np.polyfit(xs, ys, 1)
        if slope < 0:
            return float(-slope), "martingale_suite_fit"
    return DEFAULT_CD, "default_unfit"


def run_logn_growth(config: ExperimentConfig) -> GrowthReport:
    """Growth of the maximal-multiplier norm ratio across nested family sizes."""
    if config.experiment != "logn_growth":
        raise ConfigError(f"config experiment is {config.experiment!r}, expected 'logn_growth'")
    grid = make_grid(config.n, config.L)
    J = default_band_count(grid)
    if J < 2:
        raise ConfigError("spectral range insufficient for the partition depth")
    partition = build_partition(J)
    n_list = list(config.N_list)
    max_n = n_list[-1]
    family = random_sign_family(max_n, partition, config.seed)
    signs = family.sign_matrix.astype(np.float64)

    band_values = [np.real(partition.cubes[j](grid.lam)) for j in range(1, J + 1)]

    # trial pool: alternating lacunary / Gaussian fields plus a smoothed
    # point mass; single characters are folded in analytically below
    fields: List[np.ndarray] = []
    for t in range(config.trials):
        rng = _rng(config.seed, "logn_growth", 0, t)
        if t % 2 == 0:
            fields.append(_lacunary_values(grid, rng, partition))
        else:
            fields.append(_gaussian_values(grid, rng))
    fields.append(_smoothed_point_mass(grid))

    p = config.p
    cell = grid.h**grid.n
    denoms = [lp_norm(Field(grid, v, SPACE), p) for v in fields]
    ffts = [np.fft.fftn(v) for v in fields]
    running = [np.zeros(grid.shape) for _ in fields]
    checkpoints = set(n_list)

    ratios = {N: [] for N in n_list}
    char_best = 0.0
    char_ratios: Dict[int, float] = {}

    hparams = make_hormander_params(config.s, lambda_max=max(2.0, float(grid.nyquist)))
    horm_best = 0.0
    horm_sup: Dict[int, float] = {}

    workers = _worker_count()

    def _advance(t: int, mult: np.ndarray) -> None:
        out = np.fft.ifftn(mult * ffts[t])
        np.maximum(running[t], np.abs(out), out=running[t])

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i in range(max_n):
            mult = np.zeros(grid.shape, dtype=np.float64)
            for c, bv in zip(signs[i], band_values):
                mult += c * bv
            char_best = max(char_best, float(np.abs(mult).max()))
            if executor is not None:
                list(executor.map(lambda t: _advance(t, mult), range(len(fields))))
            else:
                for t in range(len(fields)):
                    _advance(t, mult)
            horm_best = max(horm_best, hormander_norm(family.members[i], hparams))
            if i + 1 in checkpoints:
                N = i + 1
                for t in range(len(fields)):
                    num = (cell * np.sum(running[t] ** p)) ** (1.0 / p)
                    ratios[N].append(num / denoms[t])
                char_ratios[N] = char_best
                horm_sup[N] = horm_best
    finally:
        if executor is not None:
            executor.shutdown()

    rows = []
    max_ratios = {}
    for N in n_list:
        max_ratio = max(max(ratios[N]), char_ratios[N])
        max_ratios[N] = max_ratio
        sqrt_log = math.sqrt(math.log(N + 1))
        rows.append(
            {
                "N": N,
                "max_ratio": float(max_ratio),
                "sqrt_log": sqrt_log,
                "normalized": float(max_ratio / sqrt_log),
                "hormander_sup": float(horm_sup[N]),
            }
        )

    fit = None
    if len(n_list) >= 2:
        xs = np.array([r["sqrt_log"] for r in rows])
        ys = np.array([r["max_ratio"] for r in rows])
        slope, intercept = np.polyfit(xs, ys, 1)
        corr = float(np.corrcoef(xs, ys)[0, 1])
        fit = {"slope": float(slope), "intercept": float(intercept), "correlation": corr}

    # level-set diagnostic on the strongest trial field
    cd_value, cd_source = _fit_cd(config.n, config.L, config.seed)
    best_t = int(np.argmax([max(ratios[max_n][t], 0.0) for t in range(len(fields))]))
    gfun = g_functional(Field(grid, fields[best_t], SPACE), config.r, partition).values
    fbest = ffts[best_t]
    dev = np.zeros(grid.shape)
    tsup = np.zeros(grid.shape)
    mean_sup = 0.0
    diagnostic_rows: List[dict] = []
    for i in range(max_n):
        mult = np.zeros(grid.shape, dtype=np.float64)
        for c, bv in zip(signs[i], band_values):
            mult += c * bv
        out = np.fft.ifftn(mult * fbest)
        mu = out.mean()
        np.maximum(dev, np.abs(out - mu), out=dev)
        np.maximum(tsup, np.abs(out), out=tsup)
        mean_sup = max(mean_sup, abs(mu))
        if i + 1 in checkpoints:
            N = i + 1
            eps_n = math.sqrt(cd_value / (10.0 * math.log(N + 1)))
            for q in (0.5, 0.75, 0.9):
                lam = float(np.quantile(dev, q)) / 2.0
                if lam <= 0:
                    continue
                e1 = cell * float(np.count_nonzero((dev > 2 * lam) & (gfun <= eps_n * lam)))
                e2 = cell * float(np.count_nonzero(gfun > eps_n * lam))
                e3 = cell * float(np.count_nonzero(np.full(grid.shape, mean_sup) > 2 * lam))
                diagnostic_rows.append(
                    {"N": N, "lambda": lam, "eps_N": eps_n, "E1": e1, "E2": e2, "E3": e3}
                )

    return GrowthReport(
        rows=rows,
        fit=fit,
        diagnostic_rows=diagnostic_rows,
        cd_value=cd_value,
        cd_source=cd_source,
        meta=_meta(config, partition),
    )


# ---------------------------------------------------------------------------
# kernel suite
# ---------------------------------------------------------------------------


@dataclass
class KernelReport:
    rows: List[dict]
    mean_rows: List[dict]
    stats: dict
    meta: dict

    def summary_lines(self) -> List[str]:
        lines = [f"kernel_suite: {len(self.rows)} (j, alpha) entries"]
        for row in self.rows:
            lines.append(
                f"  j={row['j']} alpha={row['alpha']}  weighted_norm={row['value']:.6e}"
            )
        lines.append(
            f"  max/median = {self.stats['max_over_median']:.4f}; "
            f"all dyadic-piece kernel means exactly zero = {self.stats['means_exact_zero']}"
        )
        return lines

    def write(self, outdir) -> List[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = [
            outdir / "kernel.csv",
            outdir / "kernel.dat",
            outdir / "kernel_means.csv",
            outdir / "kernel.json",
        ]
        header = ["j", "alpha", "weighted_norm"]
        rows = [(r["j"], r["alpha"], r["value"]) for r in self.rows]
        _write_table(paths[0], header, rows)
        _write_dat(paths[1], header, rows)
        _write_table(
            paths[2],
            ["j", "mean_exact_re", "mean_exact_im", "mean_quadrature_re", "mean_quadrature_im"],
            [
                (r["j"], r["exact"].real, r["exact"].imag, r["quadrature"].real, r["quadrature"].imag)
                for r in self.mean_rows
            ],
        )
        payload = dict(self.meta)
        payload["rows"] = self.rows
        payload["means"] = [
            {
                "j": r["j"],
                "exact": [r["exact"].real, r["exact"].imag],
                "quadrature": [r["quadrature"].real, r["quadrature"].imag],
            }
            for r in self.mean_rows
        ]
        payload["stats"] = self.stats
        _write_json(paths[3], payload)
        return paths


def run_kernel_suite(config: ExperimentConfig) -> KernelReport:
    """Weighted decay of rescaled band kernels plus exact cancellation checks."""
    if config.experiment != "kernel_suite":
        raise ConfigError(f"config experiment is {config.experiment!r}, expected 'kernel_suite'")
    grid = make_grid(config.n, config.L)
    j_max = grid.depth - 2
    if j_max < 2:
        raise ConfigError("L too small for the kernel band range (need L >= 32)")
    partition = build_partition(default_band_count(grid))
    m = symbol_from_spec(config.symbol)
    j_list = list(range(2, min(5, j_max) + 1))

    rows = []
    for j in j_list:
        for alpha in (0, 1):
            value = weighted_kernel_norm(m, j, config.s, alpha, grid, partition)
            rows.append({"j": j, "alpha": alpha, "value": float(value)})

    mean_rows = []
    means_exact_zero = True
    for j in j_list:
        profile = multiplier_kernel(dyadic_piece(m, j, partition), grid)
        exact = profile.mean()
        quad = profile.mean(quadrature=True)
        if exact != 0:
            means_exact_zero = False
        mean_rows.append({"j": j, "exact": exact, "quadrature": quad})

    values = np.array([r["value"] for r in rows])
    median = float(np.median(values))
    stats = {
        "max": float(values.max()),
        "median": median,
        "max_over_median": float(values.max() / median) if median > 0 else math.inf,
        "means_exact_zero": means_exact_zero,
    }
    return KernelReport(rows=rows, mean_rows=mean_rows, stats=stats, meta=_meta(config, partition))


# ---------------------------------------------------------------------------
# cluster suite
# ---------------------------------------------------------------------------


@dataclass
class ClusterReport:
    rows: List[dict]
    stats: dict
    meta: dict

    def summary_lines(self) -> List[str]:
        return [
            f"cluster_suite: lambda in 1..{self.rows[-1]['lambda']}",
            f"  ratio max/median = {self.stats['max_over_median']:.4f}",
        ]

    def write(self, outdir) -> List[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        header = ["lambda", "mode_count", "norm_2_to_infty", "ratio_2_to_infty", "ratio_1_to_2"]
        rows = [
            (r["lambda"], r["count"], r["norm"], r["ratio"], r["ratio_dual"])
            for r in self.rows
        ]
        paths = [outdir / "cluster.csv", outdir / "cluster.dat", outdir / "cluster.json"]
        _write_table(paths[0], header, rows)
        _write_dat(paths[1], header, rows)
        payload = dict(self.meta)
        payload["rows"] = self.rows
        payload["stats"] = self.stats
        _write_json(paths[2], payload)
        return paths


def run_cluster_suite(config: ExperimentConfig) -> ClusterReport:
    """Window mode counts and the exact cluster norms against the power law."""
    if config.experiment != "cluster_suite":
        raise ConfigError(f"config experiment is {config.experiment!r}, expected 'cluster_suite'")
    grid = make_grid(config.n, config.L)
    lam_top = min(grid.L // 4, 64)
    if lam_top < 1:
        raise ConfigError("L too small for the cluster range")
    rows = []
    for lam in range(1, lam_top + 1):
        count = cluster_mode_count(float(lam), grid)
        norm = cluster_2_to_infty_norm(float(lam), grid)
        rows.append(
            {
                "lambda": lam,
                "count": count,
                "norm": norm,
                "ratio": norm / (1.0 + lam) ** ((grid.n - 1) / 2.0),
                "ratio_dual": norm / (1.0 + lam) ** (grid.n / 2.0 - 1.0),
            }
        )
    ratios = np.array([r["ratio"] for r in rows])
    median = float(np.median(ratios))
    stats = {
        "max": float(ratios.max()),
        "median": median,
        "max_over_median": float(ratios.max() / median),
    }
    return ClusterReport(rows=rows, stats=stats, meta=_meta(config, None))


# ---------------------------------------------------------------------------
# martingale suite
# ---------------------------------------------------------------------------


@dataclass
class MartingaleReport:
    cw_rows: List[dict]
    cw_fit: Optional[dict]
    fs_ratios: List[float]
    fs_stats: dict
    domination: dict
    meta: dict

    def summary_lines(self) -> List[str]:
        lines = ["martingale_suite:"]
        for row in self.cw_rows:
            lines.append(
                f"  eps={row['epsilon']:.3f}  lhs={row['lhs']:.6e}  rhs={row['rhs']:.6e}  "
                f"ratio={row['ratio']:.6e}"
            )
        if self.cw_fit is None:
            lines.append("  level-set fit: unavailable (no nonzero ratios)")
        else:
            lines.append(
                f"  level-set fit: C={self.cw_fit['C']:.4f} c_d={self.cw_fit['c_d']:.4f}"
            )
        lines.append(
            f"  FS ratio max={self.fs_stats['max']:.4f} median={self.fs_stats['median']:.4f} "
            f"max/median={self.fs_stats['max_over_median']:.4f}"
        )
        lines.append(f"  domination sup = {self.domination['sup']:.4f}")
        return lines

    def write(self, outdir) -> List[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = [
            outdir / "cw.csv",
            outdir / "fs.csv",
            outdir / "domination.csv",
            outdir / "martingale.json",
        ]
        _write_table(
            paths[0],
            ["epsilon", "lhs_measure", "rhs_measure", "ratio"],
            [(r["epsilon"], r["lhs"], r["rhs"], r["ratio"]) for r in self.cw_rows],
        )
        _write_table(
            paths[1],
            ["trial", "fs_ratio"],
            [(t, v) for t, v in enumerate(self.fs_ratios)],
        )
        _write_table(
            paths[2],
            ["member", "sup_ratio"],
            [(k, v) for k, v in enumerate(self.domination["per_member"])],
        )
        payload = dict(self.meta)
        payload["cw_rows"] = self.cw_rows
        payload["cw_fit"] = self.cw_fit
        payload["fs_stats"] = self.fs_stats
        payload["domination"] = self.domination
        _write_json(paths[3], payload)
        return paths


def run_martingale_suite(config: ExperimentConfig) -> MartingaleReport:
    """Level-set decay probe, vector maximal stability, pointwise domination."""
    if config.experiment != "martingale_suite":
        raise ConfigError(
            f"config experiment is {config.experiment!r}, expected 'martingale_suite'"
        )
    grid = make_grid(config.n, config.L)
    partition = build_partition(default_band_count(grid))
    r = config.r
    p = config.p

    # (a) aggregated level-set measures at per-trial median thresholds
    lhs = np.zeros(len(CW_EPSILONS))
    rhs = 0.0
    for t in range(config.trials):
        rng = _rng(config.seed, "martingale_suite", 1, t)
        g = Field(grid, _gaussian_values(grid, rng, real=True), SPACE)
        stack = _expectation_stack(g)
        sup = np.zeros(grid.shape)
        for level in stack:
            np.maximum(sup, np.abs(level), out=sup)
        lam = float(np.median(sup))
        if lam <= 0:
            continue
        rep = cw_report(g, [lam], CW_EPSILONS)
        lhs += rep.lhs[0]
        rhs += rep.rhs[0, 0]
    cw_rows = []
    for j, eps in enumerate(CW_EPSILONS):
        ratio = float(lhs[j] / rhs) if rhs > 0 else 0.0
        cw_rows.append({"epsilon": eps, "lhs": float(lhs[j]), "rhs": float(rhs), "ratio": ratio})
    xs = [1.0 / e**2 for e, row in zip(CW_EPSILONS, cw_rows) if row["ratio"] > 0]
    ys = [math.log(row["ratio"]) for row in cw_rows if row["ratio"] > 0]
    cw_fit = None
    if len(xs) >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
        cw_fit = {
            "slope": float(slope),
            "c_d": float(-slope),
            "C": float(math.exp(intercept)),
        }

    # (b) vector-valued maximal ratios
    fs_ratios = []
    for t in range(config.trials):
        rng = _rng(config.seed, "martingale_suite", 2, t)
        f = Field(grid, _gaussian_values(grid, rng), SPACE)
        fs_ratios.append(lp_norm(g_functional(f, r, partition), p) / lp_norm(f, p))
    fs_arr = np.array(fs_ratios)
    fs_stats = {
        "max": float(fs_arr.max()),
        "median": float(np.median(fs_arr)),
        "max_over_median": float(fs_arr.max() / np.median(fs_arr)),
    }

    # (c) pointwise domination of the square function by the band functional
    family = random_sign_family(4, partition, config.seed)
    dom_fields = min(config.trials, 20)
    per_member = [0.0] * len(family.members)
    for t in range(dom_fields):
        rng = _rng(config.seed, "martingale_suite", 3, t)
        f = Field(grid, _gaussian_values(grid, rng), SPACE)
        gfun = g_functional(f, r, partition).values
        for k, member in enumerate(family.members):
            sq = square_function(apply_multiplier(member, f)).values
            per_member[k] = max(per_member[k], float((sq / (1.0 + gfun)).max()))
    domination = {"sup": max(per_member), "per_member": per_member, "fields": dom_fields}

    return MartingaleReport(
        cw_rows=cw_rows,
        cw_fit=cw_fit,
        fs_ratios=[float(v) for v in fs_ratios],
        fs_stats=fs_stats,
        domination=domination,
        meta=_meta(config, partition),
    )


_RUNNERS = {
    "logn_growth": run_logn_growth,
    "kernel_suite": run_kernel_suite,
    "cluster_suite": run_cluster_suite,
    "martingale_suite": run_martingale_suite,
}


def run_experiment(config: ExperimentConfig):
    return _RUNNERS[config.experiment](config)

import math

import numpy as np
import pytest

from spectramax import (
    SPACE,
    Field,
    apply_kernel,
    apply_multiplier,
    build_partition,
    cluster_2_to_infty_norm,
    cluster_mode_count,
    constant_symbol,
    dyadic_piece,
    indicator_symbol,
    lp_norm,
    make_grid,
    maximal_multiplier,
    multiplier_kernel,
    operator_norm_lower_bound,
    spectral_projection,
    symbol_one,
    symbol_zero,
    table_symbol,
    transform,
    weighted_kernel_norm,
)
from spectramax.symbols import Symbol, SymbolFamily

TWO_PI = 2.0 * np.pi


def random_field(grid, rng):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, vals, SPACE)


def character(grid, k):
    """exp(i k.x) as a space-side field."""
    x = grid.axis_coordinates()
    phase = np.zeros(grid.shape)
    for axis, ki in enumerate(k):
        shape = [1] * grid.n
        shape[axis] = grid.L
        phase = phase + ki * x.reshape(shape)
    return Field(grid, np.exp(1j * phase), SPACE)


def brute_count(n, lam, closed=True):
    """Direct lattice enumeration of the unit annulus count."""
    R = int(math.ceil(lam + 1.0)) + 1
    lo, hi = lam * lam, (lam + 1.0) ** 2
    count = 0
    rng = range(-R, R + 1)
    if n == 1:
        for a in rng:
            q = a * a
            if q >= lo and (q <= hi if closed else q < hi):
                count += 1
        return count
    for a in rng:
        for b in rng:
            q = a * a + b * b
            if q >= lo and (q <= hi if closed else q < hi):
                count += 1
    return count


# ---------------------------------------------------------------------------
# apply_multiplier
# ---------------------------------------------------------------------------


def test_identity_multiplier():
    rng = np.random.default_rng(0)
    g = make_grid(2, 16)
    f = random_field(g, rng)
    out = apply_multiplier(symbol_one(), f)
    assert np.abs(out.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_single_eigenmode_scaling():
    g = make_grid(2, 32)
    f = character(g, (3, 4))  # |k| = 5
    m = table_symbol([0.0, 5.0, 10.0], [0.0, 0.7, 0.0])
    out = apply_multiplier(m, f)
    expected = 0.7 * f.values
    assert np.abs(out.values - expected).max() <= 1e-12


def test_indicator_keeps_and_kills_modes():
    g = make_grid(2, 32)
    f = Field(g, character(g, (3, 4)).values + character(g, (1, 0)).values, SPACE)
    out = apply_multiplier(indicator_symbol(4.5, 5.5), f)
    assert np.abs(out.values - character(g, (3, 4)).values).max() <= 1e-12


def test_multiplier_composition():
    rng = np.random.default_rng(3)
    g = make_grid(2, 32)
    knots = np.linspace(0.0, g.nyquist * 1.5, 20)
    for _ in range(5):
        m1 = table_symbol(knots, rng.standard_normal(20) + 1j * rng.standard_normal(20), "m1")
        m2 = table_symbol(knots, rng.standard_normal(20) + 1j * rng.standard_normal(20), "m2")
        prod = Symbol(lambda t, a=m1, b=m2: a(t) * b(t), "m1*m2")
        f = random_field(g, rng)
        once = apply_multiplier(prod, f)
        twice = apply_multiplier(m1, apply_multiplier(m2, f))
        scale = np.abs(once.values).max()
        assert np.abs(once.values - twice.values).max() <= 1e-10 * max(scale, 1.0)


# ---------------------------------------------------------------------------
# spectral projections and cluster norms
# ---------------------------------------------------------------------------


def test_projection_mode_counts():
    g = make_grid(2, 32)
    all_ones = transform(Field(g, np.ones(g.shape, dtype=complex), "frequency"), "inverse")
    out = transform(spectral_projection(5.0, all_ones), "forward")
    assert np.count_nonzero(np.abs(out.values) > 1e-9) == 44
    out0 = transform(spectral_projection(0.0, all_ones), "forward")
    assert np.count_nonzero(np.abs(out0.values) > 1e-9) == 5


def test_projection_kills_outside_window():
    g = make_grid(2, 32)
    f = character(g, (1, 0))
    out = spectral_projection(5.0, f)
    assert np.abs(out.values).max() <= 1e-13


def test_projection_rejects_negative_lambda():
    g = make_grid(1, 8)
    with pytest.raises(ValueError):
        spectral_projection(-1.0, Field(g, np.ones(8, dtype=complex)))


def test_projection_idempotent_and_self_adjoint():
    rng = np.random.default_rng(7)
    g = make_grid(2, 32)
    f, h = random_field(g, rng), random_field(g, rng)
    pf = spectral_projection(3.0, f)
    ppf = spectral_projection(3.0, pf)
    assert np.abs(ppf.values - pf.values).max() <= 1e-12 * np.abs(pf.values).max()
    w = g.h**g.n
    lhs = w * np.vdot(h.values, pf.values)
    rhs = w * np.vdot(spectral_projection(3.0, h).values, f.values)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_projection_completeness_half_open():
    rng = np.random.default_rng(11)
    g = make_grid(2, 16)
    f = random_field(g, rng)
    acc = np.zeros(g.shape, dtype=complex)
    for lam in range(0, int(g.nyquist * math.sqrt(2)) + 1):
        acc += spectral_projection(float(lam), f, closed=False).values
    assert np.abs(acc - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_cluster_counts_match_brute_force():
    g = make_grid(2, 32)
    for lam in (0.0, 1.0, 2.5, 5.0, 7.0):
        assert cluster_mode_count(lam, g) == brute_count(2, lam)
        assert cluster_mode_count(lam, g, closed=False) == brute_count(2, lam, closed=False)
    g1 = make_grid(1, 32)
    for lam in (0.0, 3.0, 4.5):
        assert cluster_mode_count(lam, g1) == brute_count(1, lam)


def test_cluster_norm_values():
    g = make_grid(2, 32)
    assert cluster_2_to_infty_norm(5.0, g) == pytest.approx(math.sqrt(44) / TWO_PI, abs=1e-12)
    assert cluster_2_to_infty_norm(0.0, g) == pytest.approx(math.sqrt(5) / TWO_PI, abs=1e-12)
    g1 = make_grid(1, 16)
    # modes |k| in [3, 4] are {+-3, +-4}
    assert cluster_2_to_infty_norm(3.0, g1) == pytest.approx(
        math.sqrt(4) / math.sqrt(TWO_PI), abs=1e-12
    )


def test_cluster_norm_range_check():
    g = make_grid(2, 16)
    with pytest.raises(ValueError):
        cluster_mode_count(8.0, g)


def test_cluster_norm_is_attained():
    # random fields never beat the norm; aligned window coefficients attain it
    rng = np.random.default_rng(13)
    g = make_grid(2, 32)
    lam = 4.0
    norm = cluster_2_to_infty_norm(lam, g)
    for _ in range(20):
        f = random_field(g, rng)
        ratio = lp_norm(spectral_projection(lam, f), np.inf) / lp_norm(f, 2)
        assert ratio <= norm * (1 + 1e-12)
    mask = (g.ksq >= lam * lam) & (g.ksq <= (lam + 1.0) ** 2)
    coeff = np.where(mask, 1.0 + 0.0j, 0.0)
    witness = transform(Field(g, coeff, "frequency"), "inverse")
    ratio = lp_norm(spectral_projection(lam, witness), np.inf) / lp_norm(witness, 2)
    assert ratio == pytest.approx(norm, rel=1e-12)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def test_zero_kernel():
    g = make_grid(2, 16)
    prof = multiplier_kernel(symbol_zero(), g)
    assert np.abs(prof.values).max() == 0.0
    assert prof.mean() == 0.0


def test_identity_kernel_action():
    rng = np.random.default_rng(17)
    g = make_grid(2, 16)
    f = random_field(g, rng)
    prof = multiplier_kernel(symbol_one(), g)
    out = apply_kernel(prof, f)
    assert np.abs(out.values - f.values).max() <= 1e-10 * np.abs(f.values).max()


def test_kernel_mean_is_symbol_at_zero():
    g = make_grid(2, 16)
    m = table_symbol([0.0, 2.0, 8.0], [0.3 + 0.1j, 1.0, 0.0])
    prof = multiplier_kernel(m, g)
    assert prof.mean() == 0.3 + 0.1j
    assert prof.mean(quadrature=True) == pytest.approx(0.3 + 0.1j, abs=1e-12)


def test_dyadic_piece_kernel_mean_exactly_zero():
    g = make_grid(2, 64)
    part = build_partition(5)
    for j in (1, 2, 3):
        prof = multiplier_kernel(dyadic_piece(symbol_one(), j, part), g)
        assert prof.mean() == 0.0  # band bumps vanish at frequency zero
        assert abs(prof.mean(quadrature=True)) <= 1e-12


def test_kernel_matches_multiplier_on_random_fields():
    rng = np.random.default_rng(19)
    g = make_grid(2, 32)
    knots = np.linspace(0.0, 24.0, 15)
    for _ in range(5):
        m = table_symbol(knots, rng.standard_normal(15) + 1j * rng.standard_normal(15))
        prof = multiplier_kernel(m, g)
        f = random_field(g, rng)
        a = apply_multiplier(m, f)
        b = apply_kernel(prof, f)
        assert np.abs(a.values - b.values).max() <= 1e-10 * np.abs(a.values).max()


def test_kernel_action_matches_direct_convolution():
    # O(L^2) reference: (Kf)(x) = h sum_u K(u) f(x - u)
    rng = np.random.default_rng(23)
    g = make_grid(1, 16)
    m = table_symbol([0.0, 3.0, 8.0], [1.0, -0.5 + 0.2j, 0.1])
    prof = multiplier_kernel(m, g)
    f = random_field(g, rng)
    direct = np.zeros(16, dtype=complex)
    for x in range(16):
        for u in range(16):
            direct[x] += prof.values[u] * f.values[(x - u) % 16]
    direct *= g.h
    fast = apply_kernel(prof, f)
    assert np.abs(fast.values - direct).max() <= 1e-10 * np.abs(direct).max()


def test_weighted_kernel_norm_zero_symbol():
    g = make_grid(2, 64)
    for j in (1, 2, 3):
        for alpha in (0, 1):
            assert weighted_kernel_norm(symbol_zero(), j, 1.2, alpha, g) == 0.0


def test_weighted_kernel_norm_uniform_in_band():
    g = make_grid(2, 128)
    part = build_partition(6)
    vals = [weighted_kernel_norm(symbol_one(), j, 1.2, 0, g, part) for j in (2, 3, 4)]
    assert max(vals) <= 2.0 * min(vals)
    vals1 = [weighted_kernel_norm(symbol_one(), j, 1.2, 1, g, part) for j in (2, 3, 4)]
    assert max(vals1) <= 2.0 * min(vals1)


def test_weighted_kernel_norm_of_random_sign_member():
    # finite at every band and controlled by the squared Sobolev norm
    from spectramax import hormander_norm, make_hormander_params, random_sign_family

    g = make_grid(2, 128)
    part = build_partition(6)
    member = random_sign_family(1, part, seed=21).members[0]
    bound = hormander_norm(member, make_hormander_params(1.2, lambda_max=64.0)) ** 2
    for j in (2, 3, 4):
        for alpha in (0, 1):
            value = weighted_kernel_norm(member, j, 1.2, alpha, g, part)
            assert np.isfinite(value)
            assert value <= bound


def test_kernel_profile_csv_export(tmp_path):
    g = make_grid(1, 8)
    prof = multiplier_kernel(symbol_one(), g)
    path = tmp_path / "kernel.csv"
    prof.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "i0,re,im"
    assert len(lines) == 9


def test_weighted_kernel_norm_validation():
    g = make_grid(2, 32)
    with pytest.raises(ValueError):
        weighted_kernel_norm(symbol_one(), 4, 1.2, 0, g)  # band exceeds spectrum
    with pytest.raises(ValueError):
        weighted_kernel_norm(symbol_one(), 2, -1.0, 0, g)
    with pytest.raises(ValueError):
        weighted_kernel_norm(symbol_one(), 2, 1.2, 2, g)
    with pytest.raises(ValueError):
        weighted_kernel_norm(symbol_one(), 0, 1.2, 0, g)


# ---------------------------------------------------------------------------
# maximal function over a family
# ---------------------------------------------------------------------------


def test_maximal_singleton_and_negation():
    rng = np.random.default_rng(29)
    g = make_grid(2, 16)
    f = random_field(g, rng)
    m = table_symbol([0.0, 5.0, 12.0], [1.0, -0.3, 0.8], "m")
    single = maximal_multiplier(SymbolFamily((m,)), f)
    assert np.abs(single.values - np.abs(apply_multiplier(m, f).values)).max() <= 1e-12

    neg = Symbol(lambda t, m=m: -m(t), "-m")
    pair = maximal_multiplier(SymbolFamily((m, neg)), f)
    assert np.abs(pair.values - single.values).max() <= 1e-12


def test_maximal_one_zero_family():
    rng = np.random.default_rng(31)
    g = make_grid(1, 32)
    f = Field(g, rng.standard_normal(32).astype(complex), SPACE)
    out = maximal_multiplier(SymbolFamily((symbol_one(), symbol_zero())), f)
    assert np.abs(out.values - np.abs(f.values)).max() <= 1e-12


def test_maximal_monotone_in_family():
    rng = np.random.default_rng(37)
    g = make_grid(2, 16)
    f = random_field(g, rng)
    knots = np.linspace(0.0, 12.0, 8)
    ms = [
        table_symbol(knots, rng.standard_normal(8) + 1j * rng.standard_normal(8), f"m{i}")
        for i in range(3)
    ]
    small = maximal_multiplier(SymbolFamily(tuple(ms[:2])), f)
    large = maximal_multiplier(SymbolFamily(tuple(ms)), f)
    assert np.all(large.values >= small.values)


def test_empty_family_rejected():
    with pytest.raises(ValueError):
        SymbolFamily(())


# ---------------------------------------------------------------------------
# operator norm estimation
# ---------------------------------------------------------------------------


def test_operator_norm_exact_at_p2():
    rng = np.random.default_rng(41)
    g = make_grid(2, 32)
    knots = np.linspace(0.0, 30.0, 12)
    for trial in range(5):
        m = table_symbol(knots, rng.standard_normal(12) + 1j * rng.standard_normal(12))
        est = operator_norm_lower_bound(m, 2.0, trials=3, seed=trial, grid=g)
        exact = float(np.abs(m(g.lam)).max())
        assert est == pytest.approx(exact, rel=1e-10)


def test_operator_norm_identity_and_constant():
    g = make_grid(2, 16)
    for p in (1.5, 2.0, 4.0):
        assert operator_norm_lower_bound(symbol_one(), p, 2, 0, g) == pytest.approx(
            1.0, abs=1e-12
        )
    est = operator_norm_lower_bound(constant_symbol(-2.5 + 1.0j), 3.0, 2, 0, g)
    assert est == pytest.approx(abs(-2.5 + 1.0j), rel=1e-12)


def test_operator_norm_deterministic():
    g = make_grid(2, 16)
    m = table_symbol([0.0, 4.0, 8.0], [1.0, 0.2, -0.7])
    a = operator_norm_lower_bound(m, 3.0, trials=4, seed=5, grid=g)
    b = operator_norm_lower_bound(m, 3.0, trials=4, seed=5, grid=g)
    assert a == b


def test_operator_norm_validation():
    g = make_grid(1, 8)
    with pytest.raises(ValueError):
        operator_norm_lower_bound(symbol_one(), 1.0, 1, 0, g)
    with pytest.raises(ValueError):
        operator_norm_lower_bound(symbol_one(), 2.0, 0, 0, g)

import numpy as np
import pytest

from wbinterp.analysis import (
    GridFunction,
    construct_g,
    default_eps,
    g_family,
    lattice_nodes,
    merging_pair,
    mq_maximal,
    o_interpolation_setup,
    partition_of_unity,
    smooth_bump,
    solve_dbar,
    solve_interpolation,
)
from wbinterp.errors import CoverageError, InfeasibleConstraintsError
from wbinterp.geometry import psh_distance
from wbinterp.schemes import Jet, build_scheme, check_admissible
from wbinterp.sequences import PointSet, hyperbolic_lattice
from wbinterp.weights import standard_weight, zero_weight

# ---------------------------------------------------------------- grids


def test_grid_function_basics(tmp_path):
    f = GridFunction.sample(lambda z: z**2, 32, 0.9)
    z = f.nodes
    assert np.allclose(f.values[f.mask], z[f.mask] ** 2)
    assert np.all(f.values[~f.mask] == 0)
    f.save_npz(tmp_path / "f.npz")
    assert np.array_equal(GridFunction.load_npz(tmp_path / "f.npz").values, f.values)
    f.save_csv(tmp_path / "f.csv", header="# test")
    back = GridFunction.load_csv(tmp_path / "f.csv")
    assert np.array_equal(back.values, f.values) and back.h == f.h and back.r_max == f.r_max
    assert np.allclose((f + f - 2 * f).values, 0)
    with pytest.raises(ValueError):
        GridFunction(np.full((4, 4), np.nan), 0.5, 0.9)


def test_mq_examples():
    one = GridFunction.sample(lambda z: np.ones(z.shape), 64, 0.95)
    m = mq_maximal(one, np.inf)
    assert np.allclose(m.values[m.mask], 1.0)
    c = 2 - 1j
    const = GridFunction.sample(lambda z: np.full(z.shape, c), 64, 0.95)
    for q in (1, 2, 3.5):
        assert np.allclose(mq_maximal(const, q, [0.0, 0.3j]), abs(c))


def test_mq_inf_dominates_and_monotone():
    rng = np.random.default_rng(0)
    n = 48
    vals = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    f = GridFunction(vals, 2 / n, 0.95)
    g = GridFunction(vals * (1 + rng.uniform(size=(n, n))), 2 / n, 0.95)
    pts = np.array([0.0, 0.2 + 0.1j, -0.4j])
    assert np.all(mq_maximal(f, np.inf, pts) >= mq_maximal(f, 2, pts) - 1e-14)
    assert np.all(mq_maximal(f, 2, pts) <= mq_maximal(g, 2, pts) + 1e-14)


def test_mq_coverage():
    f = GridFunction.sample(lambda z: z, 32, 0.9)
    with pytest.raises(CoverageError):
        mq_maximal(f, 2, [0.8])
    with pytest.raises(CoverageError):
        mq_maximal(GridFunction.sample(lambda z: z, 32, 0.4), 2)

# ---------------------------------------------------------------- partition of unity


def test_pou_single_center():
    pou = partition_of_unity(0.9, 0.6, 0.05)
    assert len(pou) == 1
    assert np.allclose(pou(np.array([0.0, 0.03j])), 1.0)


def test_pou_partition_and_support():
    pou = partition_of_unity(0.5, 0.45, 0.9)
    rng = np.random.default_rng(1)
    z = 0.9 * np.sqrt(rng.uniform(size=10_000)) * np.exp(2j * np.pi * rng.uniform(size=10_000))
    gam = pou(z)
    assert np.max(np.abs(gam.sum(axis=-1) - 1)) < 1e-10
    assert np.all(gam >= 0)
    d = psh_distance(z[:, None], pou.centers[None, :])
    assert np.all(gam[d > pou.rho] == 0)


def test_pou_needs_overlap():
    with pytest.raises(CoverageError):
        partition_of_unity(0.5, 0.2, 0.9)

# ---------------------------------------------------------------- g_a


@pytest.mark.parametrize("a", [0.0, 0.4 - 0.3j])
def test_construct_g_closed_form_empty_set(a):
    m = 1.5
    G = construct_g(a, PointSet(), standard_weight(m), 1.0, 0.2, r_max=0.99)
    z = np.array([a, 0.1, -0.3j, 0.5 + 0.2j])
    got = G.log_g(z)
    expect = -2 * m * np.log(1 - np.conj(a) * z)
    # same function up to an additive constant
    assert np.allclose(got - got[0], expect - expect[0], atol=1e-12)
    assert G.passed and G.delta > 0
    assert G.value_at_a == pytest.approx(1.0, abs=1e-12)


def test_construct_g_bounds_from_definition():
    Z = PointSet([0.3, -0.5j, 0.6 + 0.2j])
    phi = standard_weight(1.0)
    G = construct_g(0.2j, Z, phi, 1.5, 0.1, r_max=0.99)
    from wbinterp.geometry import mobius
    from wbinterp.sequences import k_function

    rng = np.random.default_rng(2)
    w = 0.99 * np.sqrt(rng.uniform(size=400)) * np.exp(2j * np.pi * rng.uniform(size=400))
    z = mobius(G.a, w)
    u = (np.real(G.log_g(z)) + k_function(Z, z) - phi.value(z)
         + (G.alpha - G.eps) * np.log1p(-np.abs(w) ** 2))
    assert np.max(u) <= np.log(G.upper_max) + 0.05
    za = np.array([G.a])
    assert np.exp(np.real(G.log_g(za))[0] + k_function(Z, za)[0] - phi.value(za)[0]) >= G.delta


def test_construct_g_directionality_single_lattice():
    Z = hyperbolic_lattice(0.8, 0.999)
    s_plus = 1.17  # measured density of this lattice at truncation 0.9999 is about 1.17
    up = construct_g(0.0, Z, zero_weight(), s_plus + 0.4, default_eps(s_plus + 0.4, s_plus), r_max=0.99)
    down = construct_g(0.0, Z, zero_weight(), s_plus - 0.4, default_eps(s_plus - 0.4, s_plus), r_max=0.99)
    assert up.upper_ok
    assert not down.upper_ok


def test_default_eps():
    assert default_eps(1.2, 1.0) == pytest.approx(0.1)
    assert default_eps(0.8, 1.0) == 0.01
    assert default_eps(1.0, 1.0, floor=0.05) == 0.05


def test_log_g_domain():
    G = construct_g(0.0, PointSet(), standard_weight(1.0), 1.0, 0.1, r_max=0.9)
    with pytest.raises(ValueError):
        G.log_g(np.array([0.95]))

# ---------------------------------------------------------------- dbar


def _bump_data(n, radius=0.8, r_max=0.999):
    b = smooth_bump(radius)
    return GridFunction.sample(lambda z: (1 - np.abs(z) ** 2) * b(z), n, r_max)


def test_dbar_zero():
    res = solve_dbar(GridFunction.zeros(64, 0.999), m=1)
    assert not np.any(res.u.values) and res.rel_residual == 0


def test_dbar_single_term_refines():
    r1 = solve_dbar(_bump_data(128), m=1)
    r2 = solve_dbar(_bump_data(256), m=1)
    assert r2.rel_residual < 1e-2
    assert r2.rel_residual < r1.rel_residual / 2


def test_dbar_constant_data_gives_zbar():
    # f = 1 - |z|^2 on the whole grid: u - conj(z) must be analytic, so dbar u = 1
    f = GridFunction.sample(lambda z: (1 - np.abs(z) ** 2) * smooth_bump(0.95)(z) / smooth_bump(0.95)(np.zeros(1))[0], 128, 0.999)
    res = solve_dbar(f, m=1)
    assert res.rel_residual < 1e-2


@pytest.mark.parametrize("m", [1, 2, 3])
def test_dbar_linearity(m):
    f1 = _bump_data(96)
    f2 = GridFunction.sample(lambda z: (1 - np.abs(z) ** 2) * smooth_bump(0.5, 0.2j)(z) * (1 + z), 96, 0.999)
    u12 = solve_dbar(f1 + f2, m=m).u
    u1, u2 = solve_dbar(f1, m=m).u, solve_dbar(f2, m=m).u
    assert np.max(np.abs(u12.values - u1.values - u2.values)) < 1e-10 * np.max(np.abs(u12.values))


def test_dbar_kernel_orders_agree_on_residual():
    for m in (1, 3):
        assert solve_dbar(_bump_data(128), m=m).rel_residual < 2e-3


def test_dbar_multi_term():
    Z = PointSet([0.1, -0.3j])
    pou = partition_of_unity(0.8, 0.6, 0.6)
    logs, reports = g_family(pou, Z, standard_weight(1.0), 1.0, 0.25, 0.6, circle_res=1024, n_sample=256)
    assert all(r.lower_ok for r in reports)
    # the grid must stay where the partition and every g_j are defined
    f = _bump_data(128, 0.5, r_max=0.6)
    res = solve_dbar(f, Z, standard_weight(1.0), 2.0, 1.0, m=3, pou=pou, g_funcs=logs)
    assert res.rel_residual < 1e-2
    assert np.isfinite(res.norm_ratio) and res.norm_ratio > 0

# ---------------------------------------------------------------- interpolation


def test_interp_zero_jets():
    I = build_scheme(PointSet([0.0, 0.5]), 0.2, 0.1)
    sol = solve_interpolation(I, [Jet.zeros(cl) for cl in I.clusters], None, 2.0, 1.0)
    assert sol.K_estimate == 0 and not np.any(sol.coeffs)


def test_interp_singleton_at_origin():
    I = build_scheme(PointSet([0.0]), 0.2, 0.1)
    sol = solve_interpolation(I, [Jet.values(I.clusters[0], 1.0)], None, 2.0, 1.0)
    # f = 1 is admissible: its truncated norm is sqrt(pi/2 (1 - (1 - r^2)^2))
    r = 0.999
    assert sol.achieved_norm <= np.sqrt(np.pi / 2 * (1 - (1 - r * r) ** 2)) + 1e-12
    assert sol.achieved_norm == pytest.approx(1.2533116, abs=1e-6)
    assert np.max(sol.residuals) < 1e-9


def test_interp_mixed_jets_and_dim():
    Z = PointSet([0.0, 0.3 + 0.2j, -0.5], [2, 1, 1])
    I = build_scheme(Z, 0.2, 0.1)
    f = lambda z: 1 + z - z**2
    from wbinterp.schemes import jet_from_function

    jets = [jet_from_function(f, cl) for cl in I.clusters]
    norms = [solve_interpolation(I, jets, standard_weight(0.5), 2.0, 1.0, global_dim=d).achieved_norm
             for d in (8, 16, 32)]
    assert np.all(np.diff(norms) <= 1e-10 * norms[0])
    sol = solve_interpolation(I, jets, standard_weight(0.5), 2.0, 1.0, global_dim=16)
    assert np.max(sol.residuals) < 1e-9
    with pytest.raises(InfeasibleConstraintsError):
        solve_interpolation(I, jets, None, 2.0, 1.0, global_dim=3)


def test_interp_p_not_two():
    I = build_scheme(PointSet([0.0, 0.6j]), 0.2, 0.1)
    jets = [Jet.values(cl, 1.0) for cl in I.clusters]
    sol = solve_interpolation(I, jets, None, 1.5, 1.0, global_dim=16)
    assert np.max(sol.residuals) < 1e-9 and sol.K_estimate > 0


def test_merging_pair_distance():
    for s in (0.5, 0.2, 0.05):
        Z = merging_pair(s)
        assert psh_distance(*Z.points) == pytest.approx(s, abs=1e-14)


def test_merging_constants_increase():
    Ks = []
    for s in (0.5, 0.2, 0.1, 0.05):
        Z = merging_pair(s)
        I = build_scheme(Z, s / 2, 0.1)
        jets = [Jet.values(cl, (-1.0) ** k) for k, cl in enumerate(I.clusters)]
        Ks.append(solve_interpolation(I, jets, None, 2.0, 1.0).K_estimate)
    assert np.all(np.diff(Ks) >= 0) and Ks[-1] > Ks[-2]

# ---------------------------------------------------------------- O-interpolation


def test_oi_two_points():
    out = o_interpolation_setup(PointSet([0.0, 0.5]), 1.0)
    assert np.allclose(out.delta_a, 0.5)
    assert np.array_equal(out.n_a, [1, 1])
    assert np.isfinite(out.finiteness_sum)
    assert check_admissible(out.scheme).passed


def test_oi_homogeneity_and_errors():
    Z = PointSet([0.0, 0.3, -0.4j, 0.7])
    a = o_interpolation_setup(Z, 1.0 + 0.5j, p=2.0, with_norms=False)
    b = o_interpolation_setup(Z, 3 * (1.0 + 0.5j), p=2.0, with_norms=False)
    assert b.finiteness_sum == pytest.approx(9 * a.finiteness_sum, rel=1e-13)
    with pytest.raises(ValueError):
        o_interpolation_setup(PointSet([0.0, 0.3], [2, 1]), 1.0)


def test_oi_constants_stable():
    rng = np.random.default_rng(8)
    Z = PointSet(hyperbolic_lattice(0.5, 0.9).points)
    out = o_interpolation_setup(Z, rng.normal(size=Z.n_distinct) + 1j, delta=0.4, eps=0.1)
    C = out.C_ratios
    assert np.all(C > 0)
    assert C.max() / C.min() < 20

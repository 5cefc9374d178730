import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import disk_points
from wbinterp.errors import ClusterTooLargeError, EmptyInputError, InfeasibleConstraintsError
from wbinterp.geometry import DiskRegion, psh_distance
from wbinterp.schemes import (
    InterpolationScheme,
    Jet,
    SchemeConstants,
    build_scheme,
    check_admissible,
    chebyshev_center,
    coset_norm,
    jet_from_function,
    overlap_count,
    perturb_scheme,
    phi_operator_norm_check,
    subscheme,
    transform_scheme,
    weighted_norm_p,
)
from wbinterp.sequences import PointSet, random_pointset
from wbinterp.weights import standard_weight


def _scheme(pairs, R=0.9, eps=0.1, delta=0.1, B=4):
    return InterpolationScheme(tuple(pairs), SchemeConstants(R, eps, delta, B))


def test_check_single_pair():
    rep = check_admissible(_scheme([(DiskRegion(0, 0.5), PointSet([0.0]))], R=0.8, eps=0.5))
    assert rep.passed
    assert rep.R_star == pytest.approx(0.8)
    assert rep.eps_star == pytest.approx(0.5)
    assert rep.delta_star == np.inf and rep.B_star == 1
    assert rep.to_json()["measured"]["delta"] is None


def test_check_shared_point_fails_p3():
    I = _scheme([(DiskRegion(0, 0.3), PointSet([0.0])), (DiskRegion(0.05, 0.3), PointSet([0.0, 0.05]))], eps=0.01)
    rep = check_admissible(I)
    assert not rep.p3 and rep.delta_star == 0.0 and not rep.passed
    assert set(rep.p3_witness) == {0, 1}


def test_check_two_singletons_delta():
    I = _scheme([(DiskRegion(0, 0.3), PointSet([0.0])), (DiskRegion(0.5, 0.3), PointSet([0.5]))])
    rep = check_admissible(I)
    assert rep.delta_star == pytest.approx(0.5)
    # 0.5 < psh_add(0.3, 0.3) = 0.55, so the two disks meet
    assert rep.overlap == 2


def test_build_scheme_examples():
    I = build_scheme(PointSet([0.0, 0.5]), 0.2, 0.05)
    assert len(I) == 2 and all(len(cl) == 1 for cl in I.clusters)
    I = build_scheme(PointSet([0.0, 0.1]), 0.2, 0.05)
    assert len(I) == 1 and len(I.clusters[0]) == 2
    assert check_admissible(I).passed
    with pytest.raises(ClusterTooLargeError):
        build_scheme(PointSet(np.linspace(-0.8, 0.8, 40)), 0.5, 0.1)
    with pytest.raises(EmptyInputError):
        build_scheme(PointSet(), 0.2, 0.1)


def test_build_scheme_random_inputs_pass():
    rng = np.random.default_rng(7)
    for _ in range(25):
        Z = random_pointset(rng, int(rng.integers(2, 40)), 0.95, max_mult=2)
        I = build_scheme(Z, 0.15, 0.1)
        assert check_admissible(I).passed
        assert I.all_points() == Z


def test_chebyshev_center_symmetric_pair():
    c, rho = chebyshev_center(np.array([-0.3, 0.3]))
    assert abs(c) < 1e-6 and rho == pytest.approx(0.3, abs=1e-9)


def test_subscheme_examples():
    Z = PointSet([0.0, 0.05, 0.6], [2, 1, 1])
    I = build_scheme(Z, 0.2, 0.1)
    assert subscheme(I, I.clusters) == I
    before = check_admissible(I)
    keep = [PointSet([0.0, 0.05], [1, 1]) if 0 in cl.points else cl for cl in I.clusters]
    after = check_admissible(subscheme(I, keep))
    assert after.B_star <= before.B_star
    dropped = check_admissible(subscheme(I, [PointSet([0.0], [2]) if 0 in cl.points else cl for cl in I.clusters]))
    assert dropped.eps_star >= before.eps_star
    with pytest.raises(EmptyInputError):
        subscheme(I, [PointSet()] * len(I))
    with pytest.raises(ValueError):
        subscheme(I, [PointSet([0.33])] * len(I))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_subscheme_never_worsens(seed):
    rng = np.random.default_rng(seed)
    Z = random_pointset(rng, 25, 0.9, max_mult=2)
    try:
        I = build_scheme(Z, 0.3, 0.1)
    except ClusterTooLargeError:
        assume(False)  # no scheme to take subschemes of
    keep = []
    for cl in I.clusters:
        if rng.uniform() < 0.2 and len(I) > 1 and keep.count(None) < len(I) - 1:
            keep.append(None)
            continue
        sel = rng.uniform(size=cl.n_distinct) < 0.7
        sel[rng.integers(cl.n_distinct)] = True
        mult = np.minimum(cl.mult, rng.integers(1, 3, cl.n_distinct))
        keep.append(PointSet(cl.points[sel], mult[sel]))
    a, b = check_admissible(I), check_admissible(subscheme(I, keep))
    assert b.R_star <= a.R_star + 1e-15
    assert b.eps_star >= a.eps_star - 1e-15
    assert b.delta_star >= a.delta_star - 1e-15
    assert b.B_star <= a.B_star
    assert b.passed


@settings(max_examples=20, deadline=None)
@given(disk_points(0.8))
def test_transform_keeps_constants(a):
    rng = np.random.default_rng(3)
    I = build_scheme(random_pointset(rng, 15, 0.8), 0.2, 0.1)
    r1, r2 = check_admissible(I), check_admissible(transform_scheme(I, a))
    assert r2.R_star == pytest.approx(r1.R_star, abs=1e-9)
    assert r2.eps_star == pytest.approx(r1.eps_star, abs=1e-9)
    assert r2.delta_star == pytest.approx(r1.delta_star, abs=1e-9)


def test_perturb_examples():
    I = build_scheme(PointSet([0.0, 0.5]), 0.2, 0.05)
    ident = perturb_scheme(I, [1.0, 1.0])
    assert ident.eta_star == 0.0 and ident.scheme == I
    k0 = [k for k, cl in enumerate(I.clusters) if cl.points[0] == 0][0]
    out = perturb_scheme(I, [0.9 if k == k0 else 1.0 for k in range(2)])
    assert out.scheme.clusters[k0] == PointSet([0.0])
    out = perturb_scheme(I, [0.99, 0.99])
    k1 = 1 - k0
    assert out.scheme.clusters[k1].points[0] == pytest.approx(0.495)
    # brute-force eta over a dense sample of the original disk
    c, rho = I.regions[k1].euclidean()
    rr = rho * np.sqrt(np.linspace(0, 1, 200))[:, None]
    th = np.exp(2j * np.pi * np.arange(400) / 400)[None, :]
    z = (c + rr * th).ravel()
    assert out.eta_star >= np.max(psh_distance(0.99 * z, z)) - 1e-6
    with pytest.raises(ValueError):
        perturb_scheme(I, [1.0])


def test_jet_checks():
    cl = PointSet([0.1, 0.2], [2, 1])
    with pytest.raises(ValueError):
        Jet(cl.points, ([1.0], [1.0])).check(cl)
    with pytest.raises(ValueError):
        Jet.values(cl, 1.0)
    assert Jet.zeros(cl).length == 3


def test_jet_from_polynomial():
    cl = PointSet([0.3j, -0.2], [3, 1])
    f = lambda z: 1 + 2 * z + 3 * z**2
    jet = jet_from_function(f, cl)
    for z0, d in zip(jet.points, jet.derivs):
        expect = [f(z0), 2 + 6 * z0, 6.0][: d.size]
        assert np.allclose(d, expect, atol=1e-12)


G = DiskRegion(0.3 + 0.1j, 0.5)
CL = PointSet([0.3, 0.35 + 0.15j], [2, 1])
JET = Jet(CL.points, ([1.0, 0.5j], [2.0]))


def test_coset_zero_jet():
    res = coset_norm(G, CL, Jet.zeros(CL))
    assert res.norm == 0 and not np.any(res.coeffs)


def test_coset_homogeneity_and_residual():
    base = coset_norm(G, CL, JET, standard_weight(1.0), 2.0, 1.0)
    assert base.jet_residual < 1e-9
    c = 2.5 - 1.5j
    scaled = coset_norm(G, CL, JET.scaled(c), standard_weight(1.0), 2.0, 1.0)
    assert scaled.norm == pytest.approx(abs(c) * base.norm, rel=1e-10)
    z0 = CL.points[0]
    assert base(np.array([z0]))[0] == pytest.approx(JET.derivs[0][0], abs=1e-9)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_coset_other_p(p):
    res = coset_norm(G, CL, JET, None, p, 1.0)
    assert res.converged and res.jet_residual < 1e-9
    two = coset_norm(G, CL, JET, None, 2.0, 1.0)
    # the p = 2 minimizer is feasible, so the p-objective cannot exceed its value there
    grid_val = weighted_p_on_region(two, p)
    assert res.norm <= grid_val * (1 + 1e-8)
    assert coset_norm(G, CL, JET.scaled(3.0), None, p, 1.0).norm == pytest.approx(3 * res.norm, rel=1e-6)


def weighted_p_on_region(res, p, quad_res=32):
    from wbinterp.geometry import build_grid

    grid = build_grid(G, quad_res)
    vals = np.abs(res(grid.nodes)) ** p * (1 - np.abs(grid.nodes) ** 2) ** (p - 1)
    return float(np.sum(vals * grid.weights)) ** (1 / p)


def test_coset_monotone_in_basis_dim():
    norms = [coset_norm(G, CL, JET, None, 2.0, 1.0, basis_dim=d).norm for d in (3, 5, 8, 12, 16, 20, 24)]
    assert np.all(np.diff(norms) <= 1e-12 * norms[0])
    assert abs(norms[-1] - norms[-2]) / norms[-1] < 1e-6


def test_coset_infeasible():
    with pytest.raises(InfeasibleConstraintsError):
        coset_norm(G, CL, JET, basis_dim=2)


def test_singleton_band():
    # ratio ||w|| / (|c| e^(-phi(z0)) (1 - |z0|^2)^(1/p)) over random z0, phi = 0, alpha = 0
    rng = np.random.default_rng(4)
    ratios = []
    for _ in range(100):
        z0 = random_pointset(rng, 1, 0.99).points[0]
        cl = PointSet([z0])
        c = rng.normal() + 1j * rng.normal()
        res = coset_norm(DiskRegion(z0, 0.5), cl, Jet.values(cl, c), None, 2.0, 0.0)
        ratios.append(res.norm / (abs(c) * (1 - abs(z0) ** 2) ** 0.5))
    ratios = np.array(ratios)
    assert ratios.max() / ratios.min() < 1.05


def test_phi_check_examples():
    I = build_scheme(PointSet([0.0, 0.5, -0.4j]), 0.2, 0.1)
    zero = phi_operator_norm_check(I, lambda z: 0 * z)
    assert zero.lhs == 0 and zero.holds
    f = lambda z: 1 + z - 2 * z**3
    chk = phi_operator_norm_check(I, f)
    assert chk.overlap == 1 and chk.holds
    bigger = build_scheme(PointSet([0.0, 0.5, -0.4j, 0.7 + 0.2j]), 0.2, 0.1)
    chk2 = phi_operator_norm_check(bigger, f)
    assert chk2.lhs >= chk.lhs and chk2.rhs == pytest.approx(chk.rhs, rel=1e-12)


def test_weighted_norm_closed_form():
    # integral of (1 - |z|^2)^(2 alpha - 1) dA = pi / (2 alpha)
    assert weighted_norm_p(lambda z: np.ones(z.shape), None, 2.0, 1.0) == pytest.approx(np.pi / 2, rel=1e-10)


def test_scheme_json_roundtrip(tmp_path):
    I = build_scheme(PointSet([0.0, 0.5, 0.52], [2, 1, 1]), 0.2, 0.1)
    I.dump(tmp_path / "s.json")
    assert InterpolationScheme.load(tmp_path / "s.json") == I


def test_overlap_count_nested():
    regs = [DiskRegion(0, 0.5), DiskRegion(0, 0.3), DiskRegion(0.6, 0.2)]
    assert overlap_count(regs) == 2
    assert overlap_count([]) == 0

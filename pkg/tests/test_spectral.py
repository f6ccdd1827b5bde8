import math

import numpy as np
import pytest

import heatlab as hl


def test_grid_masses(ou_setup, mua_setup):
    for grid, _, _ in (ou_setup, mua_setup):
        assert np.all(np.diff(grid.points) > 0)
        total = grid.node_masses.sum()
        assert 1.0 - hl.TAIL_TOL <= total <= 1.0 + 1e-8


def test_grid_validation(ou_model):
    with pytest.raises(ValueError):
        hl.make_grid(ou_model, 2)
    with pytest.raises(ValueError):
        hl.make_grid(ou_model, 100, radius=9.0)  # beyond the model window


def test_dirichlet_energy_basics(ou_setup, rng):
    grid, op, _ = ou_setup
    const = np.ones(grid.n_points)
    assert hl.dirichlet_energy(const, op) == 0.0
    # E(x, x) = int 1 dgamma = 1
    assert hl.dirichlet_energy(grid.points, op) == pytest.approx(1.0, abs=1e-2)
    for _ in range(50):
        f = rng.normal(size=grid.n_points)
        assert hl.dirichlet_energy(f, op) >= 0.0
    with pytest.raises(ValueError):
        hl.dirichlet_energy(np.ones(5), op)


def test_form_annihilates_constants(ou_setup):
    # row sums of the form matrix vanish: S (sqrt masses) ~ 0
    grid, op, _ = ou_setup
    w = np.sqrt(grid.node_masses)
    sw = op.sym_diag * w
    sw[:-1] += op.sym_offdiag * w[1:]
    sw[1:] += op.sym_offdiag * w[:-1]
    assert np.max(np.abs(sw)) < 1e-8


def test_ou_spectrum(ou_setup):
    _, _, dec = ou_setup
    lam = dec.eigenvalues
    assert np.max(np.abs(lam[:6] - np.arange(6))) < 1e-2
    assert abs(lam[0]) <= 1e-8
    assert np.all(np.diff(lam) >= 0.0)
    assert np.all(lam >= -1e-8)
    e0 = dec.eigenfunctions[:, 0]
    assert np.ptp(e0) <= 1e-6 * abs(e0.mean())


def test_eigenvector_orthonormality(mua_setup):
    grid, _, dec = mua_setup
    gram = (dec.eigenfunctions * grid.node_masses[:, None]).T @ dec.eigenfunctions
    assert np.max(np.abs(gram - np.eye(grid.n_points))) <= 1e-8


def test_spectral_convergence_under_refinement(ou_model, mua_model, ou_setup, mua_setup):
    for model, (_, _, dec) in ((ou_model, ou_setup), (mua_model, mua_setup)):
        fine = hl.eigendecompose(hl.discretize(model, hl.make_grid(model, 1600)))
        coarse_lam = dec.eigenvalues[1:6]
        fine_lam = fine.eigenvalues[1:6]
        assert np.max(np.abs(coarse_lam - fine_lam) / fine_lam) < 1e-3


def test_kernel_row_stochasticity(ou_setup, mua_setup):
    for _, _, dec in (ou_setup, mua_setup):
        for t in (0.25, 0.5, 1.0):
            assert hl.stochasticity_defect(dec, t) < 1e-6


def test_kernel_matches_mehler(ou_setup):
    grid, _, dec = ou_setup
    idx = hl.bulk_indices(grid, 2.0)
    x = grid.points
    p = hl.kernel_matrix(dec, 0.5)[np.ix_(idx, idx)]
    exact = hl.mehler_kernel(0.5, x[idx][:, None], x[idx][None, :])
    assert np.max(np.abs(p - exact) / exact) < 1e-2


def test_kernel_symmetry_and_positivity(mua_setup):
    grid, _, dec = mua_setup
    idx = hl.bulk_indices(grid)
    for t in (1e-3, 0.25, 1.0):
        p = hl.kernel_matrix(dec, t)
        assert np.array_equal(p, p.T)
        assert p[np.ix_(idx, idx)].min() >= -1e-8
    i, j = idx[0], idx[-1]
    assert hl.kernel(dec, 0.5, i, j) == hl.kernel(dec, 0.5, j, i)


def test_kernel_ergodic_limit(mua_setup):
    grid, _, dec = mua_setup
    idx = hl.bulk_indices(grid, 2.0)
    p = hl.kernel_matrix(dec, 10.0)[np.ix_(idx, idx)]
    dev = np.max(np.abs(p - 1.0))
    assert dev < 1e-4
    # derived bound from the measured spectral gap
    lam1 = dec.eigenvalues[1]
    e1max = np.max(np.abs(dec.eigenfunctions[idx, 1]))
    assert dev <= 1.1 * math.exp(-10.0 * lam1) * e1max ** 2


def test_kernel_time_floor(mua_setup):
    _, _, dec = mua_setup
    with pytest.raises(ValueError):
        hl.kernel_matrix(dec, 1e-4)
    with pytest.raises(ValueError):
        hl.kernel(dec, 5e-4, 0, 0)
    with pytest.raises(ValueError):
        hl.trace(dec, 1e-4)
    with pytest.raises(ValueError):
        hl.chapman_kolmogorov_residual(dec, 1e-4, 0.5)


def test_chapman_kolmogorov(ou_setup, mua_setup):
    _, _, ou_dec = ou_setup
    _, _, mua_dec = mua_setup
    assert hl.chapman_kolmogorov_residual(mua_dec, 0.5, 0.5) < 1e-6
    assert hl.chapman_kolmogorov_residual(ou_dec, 0.25, 0.25) < 1e-6


def test_apply_semigroup(mua_setup, rng):
    grid, _, dec = mua_setup
    ones = np.ones(grid.n_points)
    assert np.max(np.abs(hl.apply_semigroup(dec, ones, 0.7) - 1.0)) < 1e-10

    f = hl.gaussian_bump_family(grid, 1, rng)[0]
    norms = [hl.l2_norm(hl.apply_semigroup(dec, f, t), grid) for t in np.arange(0.0, 1.01, 0.1)]
    assert np.all(np.diff(norms) <= 1e-12)

    mean = np.sum(grid.node_masses * f)
    assert np.max(np.abs(hl.apply_semigroup(dec, f, 60.0) - mean)) < 1e-6

    roundtrip = hl.apply_semigroup(dec, f, 0.0)
    assert hl.l2_norm(roundtrip - f, grid) < 1e-8

    with pytest.raises(ValueError):
        hl.apply_semigroup(dec, f, -0.1)


def test_log_convexity_of_l2_decay(mua_setup, rng):
    grid, _, dec = mua_setup
    fam = hl.gaussian_bump_family(grid, 20, rng, center_span=0.5)
    ts = np.linspace(0.05, 1.0, 10)
    for f in fam:
        h = np.array([hl.l2_norm(hl.apply_semigroup(dec, f, t), grid) ** 2 for t in ts])
        assert np.min(np.diff(np.log(h), 2)) >= -1e-8


def test_trace_identities(ou_setup, mua_setup):
    _, _, ou_dec = ou_setup
    geometric = 1.0 / (1.0 - math.exp(-1.0))
    assert hl.trace(ou_dec, 1.0) == pytest.approx(geometric, abs=2e-2)

    grid, _, dec = mua_setup
    for t in (0.25, 0.5, 1.0):
        assert hl.hs_norm_sq(dec, t) == hl.trace(dec, 2.0 * t)
        assert abs(hl.hs_norm_sq(dec, t) - hl.diagonal_trace_quadrature(dec, 2.0 * t)) <= 1e-8
    # brute-force double quadrature of p_t^2
    t = 0.5
    p = hl.kernel_matrix(dec, t)
    m = grid.node_masses
    double = float(np.sum(m[:, None] * m[None, :] * p * p))
    assert double == pytest.approx(hl.hs_norm_sq(dec, t), rel=1e-4)


def test_norms(mua_setup, mua_model, rng):
    grid, op, _ = mua_setup
    ones = np.ones(grid.n_points)
    assert hl.l2_norm(ones, grid) == pytest.approx(1.0, abs=1e-9)
    f = hl.gaussian_bump_family(grid, 1, rng)[0]
    assert hl.weighted_l1(f, hl.unit_weight(), grid) == pytest.approx(
        float(np.sum(grid.node_masses * np.abs(f))), rel=1e-14
    )
    # refinement oracle for the quadrature norms
    fine_grid = hl.make_grid(mua_model, 2 * grid.n_points)
    w = np.exp(-((fine_grid.points - 0.7) ** 2))
    coarse = hl.l2_norm(np.exp(-((grid.points - 0.7) ** 2)), grid)
    fine = hl.l2_norm(w, fine_grid)
    assert coarse == pytest.approx(fine, rel=1e-4)
    with pytest.raises(ValueError):
        hl.l2_norm(np.ones(7), grid)


def test_ground_state_transform(mua_model, mua_setup):
    grid, _, _ = mua_setup
    zero = np.zeros(grid.n_points)
    assert hl.ground_state_transform_residual(mua_model, zero, grid) == 0.0

    g = np.exp(-grid.points ** 2 / (2 * 1.2 ** 2))
    res = hl.ground_state_transform_residual(mua_model, g, grid)
    assert res < 1e-5

    fine = hl.make_grid(mua_model, 2 * grid.n_points - 1)  # exactly halves h
    g2 = np.exp(-fine.points ** 2 / (2 * 1.2 ** 2))
    res2 = hl.ground_state_transform_residual(mua_model, g2, fine)
    assert 3.3 < res / res2 < 4.7

    bad = np.ones(grid.n_points)
    with pytest.raises(ValueError):
        hl.ground_state_transform_residual(mua_model, bad, grid)


def test_gaussian_bump_family_determinism(mua_setup):
    grid, _, _ = mua_setup
    a = hl.gaussian_bump_family(grid, 5, np.random.default_rng(42))
    b = hl.gaussian_bump_family(grid, 5, np.random.default_rng(42))
    assert np.array_equal(a, b)
    assert a.shape == (5, grid.n_points)

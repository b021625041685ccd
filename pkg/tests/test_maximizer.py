import numpy as np
import pytest

from robinopt import (
    ConfigError,
    F_eval,
    SolverParams,
    dirichlet_ceiling,
    interval_robin_p2,
    invert_F,
    random_weight,
    rayleigh,
    sigma_max,
    solve_aux,
    solve_robin,
)
from robinopt.eigensolver import _residual_vector
from robinopt.oracle import bisect_root


@pytest.fixture(scope="module")
def lam_d(interval200):
    return dirichlet_ceiling(interval200, SolverParams(p=2.0))


def closed_form_F_root(m):
    """Root of 2 sqrt(xi) tan(sqrt(xi)/2) = m, independent scalar solve."""
    f = lambda xi: 2 * np.sqrt(xi) * np.tan(np.sqrt(xi) / 2) - m
    return bisect_root(f, 1e-12, np.pi**2 - 1e-9, rtol=1e-14)


def test_aux_small_parameter_is_torsion(interval200, p2, lam_d):
    sol = solve_aux(interval200, 1e-8, p2, lam_dirichlet=lam_d)
    assert abs(sol.u_xi.values.max() - 0.125) < 1e-6


def test_aux_closed_form_at_unit_parameter(interval200, p2, lam_d):
    sol = solve_aux(interval200, 1.0, p2, lam_dirichlet=lam_d)
    exact_max = 1.0 / np.cos(0.5) - 1.0
    assert abs(sol.u_xi.values.max() - exact_max) / exact_max < 0.005
    assert abs(sol.F_value - 2 * np.tan(0.5)) / (2 * np.tan(0.5)) < 0.005


def test_aux_rejects_parameter_at_ceiling(interval200, p2, lam_d):
    with pytest.raises(ConfigError):
        solve_aux(interval200, lam_d, p2, lam_dirichlet=lam_d)
    with pytest.raises(ConfigError):
        solve_aux(interval200, -1.0, p2, lam_dirichlet=lam_d)


def test_F_at_zero(interval200, p2, lam_d):
    assert F_eval(interval200, 0.0, p2, lam_dirichlet=lam_d) == 0.0


def test_F_monotone_and_above_linear_bound(interval200, p2, lam_d):
    xs = [f * lam_d for f in (0.1, 0.3, 0.5, 0.7, 0.9)]
    fs = [F_eval(interval200, xi, p2, lam_dirichlet=lam_d) for xi in xs]
    assert all(b > a for a, b in zip(fs, fs[1:]))
    assert all(F >= xi * interval200.volume - 1e-9 for F, xi in zip(fs, xs))


def test_aux_solutions_ordered_in_parameter(interval200, p2, lam_d):
    prev = None
    for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
        sol = solve_aux(interval200, frac * lam_d, p2, lam_dirichlet=lam_d)
        if prev is not None:
            assert np.all(sol.u_xi.values >= prev - 1e-9)
        prev = sol.u_xi.values


def test_invert_F_against_scalar_root(interval200, p2, lam_d):
    xi = invert_F(interval200, 2.0, p2, lam_dirichlet=lam_d)
    exact = closed_form_F_root(2.0)
    assert abs(xi - exact) / exact < 0.005


def test_invert_F_small_mass(interval200, p2, lam_d):
    assert invert_F(interval200, 1e-6, p2, lam_dirichlet=lam_d) < 1e-5


def test_invert_F_monotone(interval200, p2, lam_d):
    xs = [invert_F(interval200, m, p2, lam_dirichlet=lam_d) for m in (1.0, 2.0, 4.0)]
    assert xs[0] < xs[1] < xs[2]


def test_invert_F_rejects_nonpositive_mass(interval200, p2, lam_d):
    with pytest.raises(ConfigError):
        invert_F(interval200, 0.0, p2, lam_dirichlet=lam_d)


def test_pipeline_interval_symmetric(interval200, p2, lam_d):
    rep = sigma_max(interval200, 2.0, p2, lam_dirichlet=lam_d)
    masses = dict(rep.sigma_m.atoms)
    left, right = masses[0], masses[interval200.n_nodes - 1]
    assert abs(left - right) / max(left, right) < 1e-10
    assert abs(rep.sigma_mass - 2.0) / 2.0 < 1e-9
    assert rep.crosscheck_ok
    assert abs(rep.crosscheck_lambda - rep.xi_m) / rep.xi_m < 1e-3
    # the maximal eigenvalue coincides with the symmetric Robin eigenvalue
    assert abs(rep.Lambda - interval_robin_p2(1.0, 1.0)) / rep.Lambda < 0.005


def test_pipeline_eigenfunction_is_one_on_boundary(interval200, p2, lam_d):
    rep = sigma_max(interval200, 3.0, p2, lam_dirichlet=lam_d)
    bvals = rep.u_m.values[interval200.node_is_boundary]
    assert np.all(bvals == 1.0)


def test_pipeline_candidate_satisfies_weak_form(interval200, p2, lam_d):
    rep = sigma_max(interval200, 2.0, p2, lam_dirichlet=lam_d)
    r = _residual_vector(rep.u_m, rep.sigma_m, 2.0, rep.xi_m, p2.eps_reg)
    assert 2.0 * np.max(np.abs(r)) < p2.tol_res


def test_pipeline_disk_constant_weight(p2):
    from robinopt import build_disk, disk_robin_p2_const

    d = build_disk(0.1)
    rep = sigma_max(d, 2 * np.pi, p2)
    dens = rep.aux.sigma_flux.as_facet_density()
    assert abs(dens.mean() - 1.0) < 0.02
    assert (dens.max() - dens.min()) / dens.mean() < 0.02
    total = float(np.dot(dens, d.facet_measures))
    assert abs(total - rep.sigma_mass) < 1e-12 * rep.sigma_mass
    oracle = disk_robin_p2_const(1.0)
    assert abs(rep.Lambda - oracle) / oracle < 0.02


def test_pipeline_square_p3(square4, p3):
    rep = sigma_max(square4, 2.0, p3)
    assert rep.crosscheck_ok
    assert abs(rep.sigma_mass - 2.0) / 2.0 < 1e-9
    assert np.all([m >= 0 for _, m in rep.sigma_m.atoms])


def test_maximal_value_dominates_random_weights(interval200, p2, lam_d):
    rep = sigma_max(interval200, 2.0, p2, lam_dirichlet=lam_d)
    rng = np.random.default_rng(42)
    for _ in range(20):
        w = random_weight(interval200, 2.0, rng)
        # the test-function value at the pipeline eigenfunction is exact
        assert rayleigh(rep.u_m, w, 2.0) <= rep.xi_m + 1e-9
        # and the solved eigenvalue sits below it up to solver tolerance
        assert solve_robin(interval200, w, p2).lam <= rep.xi_m + 1e-6


def test_Lambda_monotone_and_sandwiched(interval200, p2, lam_d):
    vals = []
    for m in (0.5, 1.0, 2.0, 8.0):
        rep = sigma_max(interval200, m, p2, lam_dirichlet=lam_d)
        vals.append(rep.Lambda)
        assert rep.Lambda <= min(lam_d, m / interval200.volume) + 1e-9
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_mass_inversion_second_order_in_h():
    from robinopt import build_interval

    exact = closed_form_F_root(2.0)
    errs = []
    for n in (50, 100, 200):
        xi = invert_F(build_interval(n), 2.0, SolverParams(p=2.0))
        errs.append(abs(xi - exact) / exact)
    orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) > 1.8

"""Identity battery, oracle, convergence and conjecture probes."""

import dataclasses
import math
import time

import numpy as np
import pytest

from distributional_curvature import quadrature, suite
from distributional_curvature.config import CHECKS, IDENTITY_CHECKS
from distributional_curvature.errors import BudgetError, ConvergenceSetupError, UnknownCheckError
from distributional_curvature.quadrature import build_grid
from distributional_curvature.spaces import TestVector, builtin_space
from distributional_curvature.suite import (
    CheckReport,
    FieldBudget,
    check_manifest,
    conjecture_probe,
    convergence_study,
    draw_field,
    oracle_compare,
    random_fields,
    run_check,
    run_identity_checks,
)


def test_manifest_lists_every_check():
    ids = check_manifest()
    assert ids == list(CHECKS)
    assert len(ids) == 13
    assert ids[:10] == IDENTITY_CHECKS
    assert {'oracle', 'convergence', 'conjecture'} <= set(ids)


def test_random_fields_are_deterministic(torus):
    budget = FieldBudget(seed=11)
    first = random_fields(torus, budget, 3)
    second = random_fields(torus, budget, 3)
    assert [str(v) for v in first] == [str(v) for v in second]
    other = random_fields(torus, FieldBudget(seed=12), 3)
    assert [str(v) for v in first] != [str(v) for v in other]


def test_draws_depend_on_seed_draw_and_role(torus):
    budget = FieldBudget(seed=5)
    X = draw_field(torus, budget, 0, 'X')
    assert draw_field(torus, budget, 0, 'X') is X
    assert draw_field(torus, dataclasses.replace(budget, draws=3), 0, 'X') == X
    assert draw_field(torus, budget, 1, 'X') != X
    assert draw_field(torus, budget, 0, 'Y') != X
    assert draw_field(torus, FieldBudget(seed=6), 0, 'X') != X


def test_checks_share_grid_samples_of_a_draw(torus, torus_grid, small_budget):
    quadrature._field_samples.cache_clear()
    run_check('r1a', torus, torus_grid, small_budget)
    computed = quadrature._field_samples.cache_info().misses
    assert computed == 4 * small_budget.draws
    run_check('bianchi', torus, torus_grid, small_budget)
    assert quadrature._field_samples.cache_info().misses == computed


def test_reduced_torus_battery_runs_quickly(torus, torus_grid):
    started = time.perf_counter()
    reports = run_identity_checks(torus, torus_grid, FieldBudget(draws=3, seed=2))
    elapsed = time.perf_counter() - started
    assert all(rep.passed for rep in reports), [(r.check_id, r.residual) for r in reports]
    assert elapsed < 60.0
    assert sum(rep.wall_time for rep in reports) <= elapsed


def test_random_vectors_respect_atom_budget(torus):
    vectors = random_fields(torus, FieldBudget(atoms=3, seed=2), 2)
    assert all(isinstance(v, TestVector) and len(v.atoms) == 3 for v in vectors)


def test_disk_fields_vanish_outside_support(disk):
    grid = build_grid(disk, 32)
    f, = random_fields(disk, FieldBudget(seed=4), 1, kind='function')
    X, = random_fields(disk, FieldBudget(seed=4), 1)
    r = np.hypot(grid.nodes[:, 0], grid.nodes[:, 1])
    outside = r >= 0.65
    assert np.any(outside)
    assert np.all(grid.function_jet(f, 0).value[outside] == 0.0)
    assert np.all(grid.samples(X).comp[outside] == 0.0)


def test_probe_functions_are_nonnegative(sphere, sphere_grid):
    probes = random_fields(sphere, FieldBudget(seed=9), 2, kind='probe')
    for f in probes:
        assert np.all(sphere_grid.function_jet(f, 0).value >= 0.0)


def test_family_mismatch_is_rejected(torus, disk):
    with pytest.raises(BudgetError):
        FieldBudget(family='bump').family_for(torus)
    with pytest.raises(BudgetError):
        FieldBudget(family='trig').family_for(disk)
    with pytest.raises(BudgetError):
        FieldBudget(family='spline')


@pytest.mark.parametrize("kwargs", [
    {'atoms': 0}, {'atoms': 5}, {'degree': 4}, {'coef_range': 0.0},
    {'coef_range': 2.5}, {'seed': -1}, {'draws': 0},
])
def test_budget_validation(kwargs):
    with pytest.raises(BudgetError):
        FieldBudget(**kwargs)


def test_unknown_check_id_fails_before_running(torus, torus_grid, small_budget):
    with pytest.raises(UnknownCheckError) as info:
        run_identity_checks(torus, torus_grid, small_budget, which=['r1a', 'nope'])
    assert "Supported checks" in str(info.value)


def test_torus_identities_pass(torus, torus_grid, small_budget):
    reports = run_identity_checks(torus, torus_grid, small_budget)
    assert [rep.check_id for rep in reports] == IDENTITY_CHECKS
    for rep in reports:
        assert rep.error is None, rep.error
        assert rep.passed, (rep.check_id, rep.residual, rep.scale)
        assert rep.backend == 'torus'
        assert rep.grid == '32x32'
        assert rep.details['draws'] == 2


def test_exact_checks_use_exact_tolerance(torus, torus_grid, small_budget):
    reports = run_identity_checks(torus, torus_grid, small_budget, which=['r1a', 'module'])
    assert [rep.tolerance for rep in reports] == [1e-12, 1e-12]
    assert reports[0].residual == 0.0
    # every draw cancels exactly, the report still carries the integrand scale
    assert reports[0].scale > 1.0


def test_fixed_fields_replace_the_first_draw(torus, torus_grid, torus_fields):
    budget = FieldBudget(draws=1)
    report = run_check('conscov', torus, torus_grid, budget, fields=torus_fields)
    assert report.passed
    again = run_check('conscov', torus, torus_grid, budget, fields=torus_fields)
    assert again.residual == report.residual


def test_inadmissible_fixed_field_becomes_error_report(torus, torus_grid):
    fields = {'X': torus.vector([('x0', 'sin(x1)')])}
    report = run_check('conscov', torus, torus_grid, FieldBudget(draws=1), fields=fields)
    assert not report.passed
    assert math.isinf(report.residual)
    assert report.error.startswith('AdmissibilityError')


def test_torus_oracle(torus, torus_grid, small_budget):
    report = oracle_compare(torus, torus_grid, small_budget)
    assert report.passed
    assert report.check_id == 'oracle'
    assert 'max_abs_distributional' in report.details


def test_periodic_convergence_stays_at_roundoff(torus):
    budget = FieldBudget(draws=1, seed=3)
    report = convergence_study(torus, 'conscov', [16, 24, 32], budget)
    assert report.passed
    assert [res for res, _ in report.ladder] == [(16, 16), (24, 24), (32, 32)]
    assert report.order is None
    assert report.note in ('periodic', 'saturated')
    assert report.grid == '16->24->32'


@pytest.mark.parametrize("rungs", [[16, 32], [32, 16, 64], [16, 16, 32]])
def test_convergence_setup_errors(torus, rungs):
    with pytest.raises(ConvergenceSetupError):
        convergence_study(torus, 'conscov', rungs, FieldBudget())


def test_convergence_rejects_non_refinable_target(torus):
    with pytest.raises(ConvergenceSetupError):
        convergence_study(torus, 'conjecture', [16, 24, 32], FieldBudget())


def test_flat_torus_lower_bound_holds(torus, torus_grid):
    report = conjecture_probe(torus, torus_grid, 0.0, 1, budget=FieldBudget(draws=1))
    assert report.passed, report.note
    assert report.note.startswith('consistent with')


def test_conjecture_needs_known_curvature():
    space = builtin_space('torus')
    unknown = dataclasses.replace(space, name='torus-unknown', curvature=None)
    grid = build_grid(unknown, 16)
    report = conjecture_probe(unknown, grid, 0.0, 1, budget=FieldBudget(draws=1))
    assert not report.passed
    assert 'no known constant curvature' in report.error


def test_report_round_trips_through_dict():
    report = CheckReport('convergence', 'sphere', 1e-9, 2.0, 1e-6, True, grid='32->64->96',
                         ladder=[((32, 32), 1e-5), ((64, 64), 1e-8)], order=4.1, seed=3,
                         note='', details={'target': 'oracle'})
    again = CheckReport.from_dict(report.to_dict())
    assert again == report
    assert report.ratio == pytest.approx(5e-10)


@pytest.mark.slow
def test_sphere_oracle_and_lower_bound(sphere):
    grid = build_grid(sphere, 96)
    budget = FieldBudget(draws=3, seed=1)
    oracle = oracle_compare(sphere, grid, budget)
    assert oracle.passed, (oracle.residual, oracle.scale)
    bound = run_check('conjecture', sphere, grid, budget)
    assert bound.passed
    assert bound.note.startswith('consistent with curvature >= 1.0')


@pytest.mark.slow
def test_sphere_witness_above_curvature(sphere):
    grid = build_grid(sphere, 64)
    report = conjecture_probe(sphere, grid, 1.05, 5, budget=FieldBudget(draws=5, seed=1))
    assert report.passed, report.note
    witness = report.details['witness']
    assert witness['area'] >= 1e-6
    assert witness['margin_ratio'] <= -1e-3
    assert witness['sectional_ratio'] == pytest.approx(1.0, abs=1e-3)


@pytest.mark.slow
def test_disk_oracle_converges(disk):
    budget = FieldBudget(draws=2, seed=1)
    report = convergence_study(disk, 'oracle', [32, 48, 64, 96], budget)
    assert report.error is None
    assert report.passed, report.ladder
    residuals = [r for _, r in report.ladder]
    assert residuals[-1] < residuals[0]
    assert report.order is not None and report.order >= 2.0


def _power_ladder(order):
    def rung(check_id, space, grid, budget, fields):
        return 1e-8 * (32.0 / grid.resolution[0]) ** order, 1.0
    return rung


def test_first_order_ladder_fails_even_within_tolerance(disk, monkeypatch):
    monkeypatch.setattr(suite, '_rung_residual', _power_ladder(1))
    report = convergence_study(disk, 'conscov', [32, 48, 64], FieldBudget(draws=1))
    assert report.residual <= report.tolerance * report.scale
    assert report.order == pytest.approx(1.0)
    assert not report.passed
    assert report.note == 'order below 2'


def test_third_order_ladder_passes(disk, monkeypatch):
    monkeypatch.setattr(suite, '_rung_residual', _power_ladder(3))
    report = convergence_study(disk, 'conscov', [32, 48, 64], FieldBudget(draws=1))
    assert report.order == pytest.approx(3.0)
    assert report.passed
    assert report.note == ''


def test_saturated_ladder_needs_no_order(disk, monkeypatch):
    monkeypatch.setattr(suite, '_rung_residual', lambda *args: (0.0, 2.0))
    report = convergence_study(disk, 'conscov', [32, 48, 64], FieldBudget(draws=1))
    assert report.order is None
    assert report.note == 'saturated'
    assert report.passed


@pytest.mark.parametrize("backend, resolution", [
    ('weighted-torus', 32),
    pytest.param('gauss-weighted-plane', 96, marks=pytest.mark.slow),
])
def test_weighted_backends_pass_the_battery(backend, resolution):
    space = builtin_space(backend)
    grid = build_grid(space, resolution)
    reports = run_identity_checks(space, grid, FieldBudget(draws=2, seed=3))
    assert [rep.check_id for rep in reports] == IDENTITY_CHECKS
    for rep in reports:
        assert rep.error is None, rep.error
        assert rep.passed, (rep.check_id, rep.residual, rep.scale)
        assert rep.backend == backend


@pytest.mark.slow
def test_gaussian_plane_curvature_vanishes():
    space = builtin_space('gauss-weighted-plane')
    report = oracle_compare(space, build_grid(space, 96), FieldBudget(draws=3, seed=1))
    assert report.passed, (report.residual, report.scale)
    assert report.details['max_abs_distributional'] <= 1e-9


@pytest.mark.slow
def test_disk_lower_bound_at_true_curvature(disk):
    grid = build_grid(disk, 64)
    report = conjecture_probe(disk, grid, -1.0, 3, budget=FieldBudget(draws=3, seed=1))
    assert report.passed, report.note
    assert 'witness' not in report.details
    assert report.details['min_normalized_margin'] >= -1e-6


@pytest.mark.slow
def test_disk_witness_above_true_curvature(disk):
    grid = build_grid(disk, 64)
    report = conjecture_probe(disk, grid, -0.5, 3, budget=FieldBudget(draws=3, seed=1))
    assert report.passed, report.note
    witness = report.details['witness']
    assert witness['margin_ratio'] <= -1e-3
    assert witness['margin_ratio'] == pytest.approx(-0.5, abs=0.05)

"""Spline basis construction, design assembly, and the least-squares fit."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alphasign.basis import (
    SplineConfig,
    bic_penalty,
    bic_score,
    bspline_basis,
    build_design,
    default_knot_candidates,
    fit_panel,
    make_knots,
    select_knots_bic,
)
from alphasign.errors import ContractError, SingularDesignError


def test_spline_config_validation():
    with pytest.raises(ContractError):
        SplineConfig(2, order=0)
    with pytest.raises(ContractError):
        SplineConfig(-1, order=3)
    assert SplineConfig(5, order=3).basis_dim == 8
    assert SplineConfig(0, order=1).basis_dim == 1


def test_make_knots_layout():
    knots = make_knots(3, order=3)
    assert np.allclose(knots, [0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1])
    assert np.allclose(make_knots(0, order=2), [0, 0, 1, 1])
    with pytest.raises(ContractError):
        make_knots(-1)
    with pytest.raises(ContractError):
        make_knots(2, order=0)


def test_order_one_basis_is_interval_indicator():
    config = SplineConfig(1, order=1)
    knots = make_knots(1, order=1)
    assert np.allclose(bspline_basis(config, knots, 0.3), [1, 0])
    assert np.allclose(bspline_basis(config, knots, 0.7), [0, 1])
    # intervals are half open; the right boundary closes the last one
    assert np.allclose(bspline_basis(config, knots, 0.5), [0, 1])
    assert np.allclose(bspline_basis(config, knots, 1.0), [0, 1])


def test_clamped_basis_interpolates_at_endpoints():
    config = SplineConfig(3, order=3)
    knots = make_knots(3, order=3)
    L = config.basis_dim
    left = bspline_basis(config, knots, 0.0)
    right = bspline_basis(config, knots, 1.0)
    assert np.allclose(left, np.eye(L)[0], atol=1e-14)
    assert np.allclose(right, np.eye(L)[L - 1], atol=1e-14)


@given(
    u=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    n=st.integers(min_value=0, max_value=8),
    order=st.integers(min_value=1, max_value=4),
)
def test_partition_of_unity(u, n, order):
    config = SplineConfig(n, order)
    values = bspline_basis(config, make_knots(n, order), u)
    assert values.shape == (config.basis_dim,)
    assert np.all(values >= -1e-14)
    assert abs(values.sum() - 1.0) <= 1e-12


def test_no_interior_knots_order3_is_quadratic_bernstein():
    config = SplineConfig(0, order=3)
    knots = make_knots(0, order=3)
    grid = np.linspace(0.0, 1.0, 101)
    for u in grid:
        values = bspline_basis(config, knots, u)
        bern = np.array([(1 - u) ** 2, 2 * u * (1 - u), u**2])
        assert np.max(np.abs(values - bern)) <= 1e-12


def test_basis_rejects_bad_evaluation_points():
    config = SplineConfig(2, order=3)
    knots = make_knots(2, order=3)
    for bad in (-0.1, 1.5):
        with pytest.raises(ContractError):
            bspline_basis(config, knots, bad)


def test_design_layout_and_h_invariants(small_design):
    design = small_design
    L = design.config.basis_dim
    T = design.n_obs
    p = design.n_factors
    assert design.Z.shape == (T, (1 + p) * L)
    assert design.Z_tilde.shape == design.Z.shape
    # centered intercept block: columns sum to zero
    assert np.max(np.abs(design.Z[:, :L].sum(axis=0))) <= 1e-10
    # uncentered intercept block: rows sum to one
    assert np.max(np.abs(design.Z_tilde[:, :L].sum(axis=1) - 1.0)) <= 1e-12
    # factor blocks are shared between the twins
    assert np.array_equal(design.Z[:, L:], design.Z_tilde[:, L:])
    # h is the annihilated ones vector: orthogonal to the span, norm omega_T
    assert np.max(np.abs(design.Z.T @ design.h)) <= 1e-8
    assert design.omega_T == pytest.approx(float(design.h @ design.h), rel=1e-12)
    assert 0.0 < design.omega_T <= T
    # annihilate kills every design column and fixes h
    for j in range(design.n_columns):
        assert np.max(np.abs(design.annihilate(design.Z[:, j]))) <= 1e-8
    assert np.max(np.abs(design.annihilate(design.h) - design.h)) <= 1e-8


def test_h_from_uncentered_design_degenerates(small_sim):
    # the ones vector lies in the uncentered intercept span, so h collapses
    design = build_design(small_sim.factors, SplineConfig(2, 3), h_from="uncentered")
    assert design.omega_T <= 1e-8 * design.n_obs
    with pytest.raises(ContractError):
        build_design(small_sim.factors, SplineConfig(2, 3), h_from="bogus")


def test_design_needs_enough_observations():
    rng = np.random.default_rng(0)
    config = SplineConfig(1, 3)  # L=4, two blocks -> K=8
    with pytest.raises(ContractError, match="need T >="):
        build_design(rng.standard_normal((8, 1)), config)
    build_design(rng.standard_normal((9, 1)), config)  # boundary is usable


def test_rank_deficient_designs_name_the_failing_block():
    rng = np.random.default_rng(1)
    f = rng.standard_normal((60, 1))
    dup = np.hstack([f, f])
    with pytest.raises(SingularDesignError, match="factor 2 block"):
        build_design(dup, SplineConfig(2, 3))
    zero_first = np.hstack([np.zeros((60, 1)), f])
    with pytest.raises(SingularDesignError, match="factor 1 block"):
        build_design(zero_first, SplineConfig(2, 3))


def test_fit_matches_brute_force_normal_equations():
    rng = np.random.default_rng(42)
    for _ in range(10):
        p = int(rng.integers(1, 3))
        n = int(rng.integers(0, 2))
        order = int(rng.integers(2, 4))
        K = (1 + p) * (n + order)
        if K + 1 > 20:
            n, order = 0, 2
            K = (1 + p) * 2
        T = int(rng.integers(K + 1, 21))
        N = int(rng.integers(1, 6))
        design = build_design(rng.standard_normal((T, p)), SplineConfig(n, order))
        Y = rng.standard_normal((T, N))
        fit = fit_panel(Y, design)
        for Z, resid in ((design.Z, fit.residuals), (design.Z_tilde, fit.residuals_tilde)):
            coef = np.linalg.pinv(Z.T @ Z) @ (Z.T @ Y)
            assert np.max(np.abs(Y - Z @ coef - resid)) <= 1e-8


def test_fit_residuals_orthogonal_to_design(small_design, small_fit):
    scale = np.max(np.abs(small_fit.residuals))
    assert np.max(np.abs(small_design.Z.T @ small_fit.residuals)) <= 1e-8 * scale * small_design.n_obs
    assert np.max(np.abs(small_design.Z_tilde.T @ small_fit.residuals_tilde)) <= 1e-8 * scale * small_design.n_obs
    assert small_fit.coefficients.shape == (25, small_design.n_columns)


def test_fit_input_guards(small_design):
    with pytest.raises(ContractError):
        fit_panel(np.zeros((10, 3)), small_design)  # wrong row count
    bad = np.zeros((small_design.n_obs, 2))
    bad[0, 0] = np.nan
    with pytest.raises(ContractError):
        fit_panel(bad, small_design)


def test_bic_penalty_value():
    # log(200*350)/(200*350) * (3+1) * (2+3)
    assert bic_penalty(200, 350, 3, SplineConfig(2, 3)) == pytest.approx(
        3.1875001488661414e-3, rel=1e-9
    )


def test_knot_selection_contract(small_sim):
    picked = select_knots_bic(small_sim.panel, small_sim.factors, candidates=[2])
    assert picked == 2
    default = select_knots_bic(small_sim.panel, small_sim.factors)
    assert default in default_knot_candidates(small_sim.panel.shape[0])
    again = select_knots_bic(small_sim.panel, small_sim.factors)
    assert again == default
    # scores are comparable across candidates for the winner to be minimal
    scores = {
        n: bic_score(small_sim.panel, small_sim.factors, SplineConfig(n, 3))
        for n in default_knot_candidates(small_sim.panel.shape[0])
    }
    assert default == min(sorted(scores), key=lambda n: scores[n])


def test_knot_selection_failure_modes(small_sim):
    with pytest.raises(ContractError):
        select_knots_bic(small_sim.panel, small_sim.factors, candidates=[])
    rng = np.random.default_rng(3)
    tiny_f = rng.standard_normal((30, 1))
    tiny_y = rng.standard_normal((30, 2))
    with pytest.raises(SingularDesignError, match="no knot candidate"):
        select_knots_bic(tiny_y, tiny_f, candidates=[40])
